"""Data-generating processes, trajectories and Monte Carlo scoring.

Every replication draws the full table of potential outcomes before any
action is taken, so the policy can never influence them.  Random streams
are derived from ``(seed, replication)``:

* ``SeedSequence(seed, spawn_key=(rep, 0))`` feeds the outcome table
  (spawned into context, innovation and arm-noise streams);
* ``SeedSequence(policy_seed, spawn_key=(rep, 1))`` feeds the policy's uniforms.

Each stream is consumed strictly in round order, so the first ``n`` rounds
are identical whatever horizon is drawn, and a streaming run
(:func:`generate_round`, :func:`run_trajectory`) reproduces the batch path
bit for bit.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .confidence import (
    CsConfig,
    Method,
    bounds_from_path,
    gamma_cs_contains,
    gamma_mixture_half_width,
    half_width,
)
from .contextual import DEFAULT_CLAMP_MULT, contextual_path, residual_predictions
from .errors import ConfigError, OutOfRange
from .estimators import Arm, Contrast, estimate_path
from .log import Observation, ObservationLog, append_observation
from .policies import PolicyConfig, PolicyState, action_probs, sample_action

BERNOULLI = "bernoulli"
AR1 = "ar1"


@dataclass(frozen=True)
class DgpSpec:
    """Potential-outcome model.

    ``bernoulli``
        ``Y_t(w) ~ Bernoulli(mu[w])`` independently.
    ``ar1``
        ``Y_t(0) = rho_ar Y_{t-1}(0) + beta X_t + eps_t`` with
        ``eps_t ~ N(mu[0], 1)``, ``Y_0(0) = 0``, ``X_t ~ Bernoulli(x_p)``, and
        ``Y_t(w) = Y_t(0) + N(mu[w], 1)`` for ``w >= 1``.
    """

    variant: str
    K: int
    horizon: int
    mu: tuple
    seed: int = 0
    rho_ar: float = 0.0
    beta: float = 0.0
    x_p: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        if self.variant not in (BERNOULLI, AR1):
            raise ConfigError("dgp", f"unknown variant {self.variant!r}; use {BERNOULLI!r} or {AR1!r}")
        if not isinstance(self.K, (int, np.integer)) or self.K < 2:
            raise ConfigError("K", f"must be an integer >= 2, got {self.K!r}")
        if len(self.mu) != self.K:
            raise ConfigError("mu", f"has {len(self.mu)} entries, expected K={self.K}")
        if not isinstance(self.horizon, (int, np.integer)) or self.horizon < 0:
            raise ConfigError("horizon", f"must be a non-negative integer, got {self.horizon!r}")
        if self.variant == BERNOULLI and not all(0.0 <= v <= 1.0 for v in self.mu):
            raise ConfigError("mu", "Bernoulli means must lie in [0, 1]")
        if not abs(self.rho_ar) <= 1.0:
            raise ConfigError("rho_ar", f"|rho_ar| must be <= 1, got {self.rho_ar!r}")
        if not 0.0 <= self.x_p <= 1.0:
            raise ConfigError("x_p", f"must lie in [0, 1], got {self.x_p!r}")

    @property
    def has_context(self) -> bool:
        return self.variant == AR1

    @property
    def reward_bound(self) -> Optional[float]:
        """A-priori bound ``M`` on ``|Y|``, when the model has one."""
        return 1.0 if self.variant == BERNOULLI else None


# --- random streams ---------------------------------------------------------------

@dataclass
class DgpStreams:
    x: np.random.Generator
    eps: np.random.Generator
    noise: np.random.Generator


def dgp_streams(seed: int, rep: int) -> DgpStreams:
    children = np.random.SeedSequence(seed, spawn_key=(rep, 0)).spawn(3)
    return DgpStreams(*(np.random.Generator(np.random.PCG64(c)) for c in children))


def policy_stream(seed: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(rep, 1))))


# --- truth ---------------------------------------------------------------------------

class TruthTrack:
    """All potential outcomes and contexts, with running true means.

    ``Q(t, w)`` is the mean of ``Y_1(w), ..., Y_t(w)``, accumulated with the
    same compensated summation as the estimators.
    """

    def __init__(self, K: int):
        self.K = K
        self._rows = []
        self._x = []
        self._q = []
        self._acc = [(0.0, 0.0)] * K

    @classmethod
    def from_arrays(cls, potentials, contexts=None):
        pot = np.asarray(potentials, dtype=np.float64)
        tr = cls(pot.shape[1])
        ctx = [None] * len(pot) if contexts is None else np.asarray(contexts, dtype=np.float64).reshape(len(pot), -1)
        for row, x in zip(pot.tolist(), ctx):
            tr.append(row, x)
        return tr

    def append(self, outcomes, x=None) -> None:
        outcomes = tuple(float(v) for v in outcomes)
        if len(outcomes) != self.K:
            raise ValueError(f"expected {self.K} potential outcomes, got {len(outcomes)}")
        t = len(self._rows) + 1
        acc = []
        for (s, c), v in zip(self._acc, outcomes):
            tt = s + v
            if abs(s) >= abs(v):
                c += (s - tt) + v
            else:
                c += (v - tt) + s
            acc.append((tt, c))
        self._acc = acc
        self._rows.append(outcomes)
        self._x.append(None if x is None else tuple(np.atleast_1d(x).astype(float)))
        self._q.append(tuple((s + c) / t for s, c in acc))

    @property
    def horizon(self) -> int:
        return len(self._rows)

    def _check(self, t):
        if not 1 <= t <= self.horizon:
            raise OutOfRange(f"t={t} outside 1..{self.horizon}")

    def outcomes(self, t: int) -> tuple:
        self._check(t)
        return self._rows[t - 1]

    def context(self, t: int):
        self._check(t)
        return self._x[t - 1]

    def Q(self, t: int, w: int) -> float:
        self._check(t)
        return self._q[t - 1][w]

    def potentials(self) -> np.ndarray:
        return np.asarray(self._rows, dtype=np.float64).reshape(-1, self.K)

    def Q_path(self, w: int) -> np.ndarray:
        return np.asarray([q[w] for q in self._q], dtype=np.float64)

    def estimand_path(self, estimand) -> np.ndarray:
        if isinstance(estimand, Arm):
            return self.Q_path(estimand.w)
        return self.Q_path(estimand.w) - self.Q_path(estimand.w2)


def truth_path(potentials, estimand) -> np.ndarray:
    """Running true estimand for every round of a potential-outcome table."""
    pot = np.asarray(potentials, dtype=np.float64)
    t = np.arange(1, len(pot) + 1, dtype=np.float64)
    q = kernels.compensated_cumsum(pot[:, estimand.w]) / t
    if isinstance(estimand, Arm):
        return q
    return q - kernels.compensated_cumsum(pot[:, estimand.w2]) / t


# --- outcome generation ------------------------------------------------------------------

def draw_potentials(dgp: DgpSpec, streams: DgpStreams, n: int):
    """``n`` rounds of potential outcomes ``(n, K)`` and contexts ``(n, 1)`` or ``None``."""
    K = dgp.K
    mu = np.asarray(dgp.mu)
    if dgp.variant == BERNOULLI:
        pot = (streams.noise.random((n, K)) < mu).astype(np.float64)
        return pot, None
    x = (streams.x.random(n) < dgp.x_p).astype(np.float64)
    eps = streams.eps.standard_normal(n) + mu[0]
    noise = streams.noise.standard_normal((n, K - 1)) + mu[1:]
    y0 = kernels.ar1_filter(dgp.beta * x + eps, dgp.rho_ar)
    pot = np.empty((n, K))
    pot[:, 0] = y0
    pot[:, 1:] = y0[:, None] + noise
    return pot, x[:, None]


def generate_round(dgp: DgpSpec, truth: TruthTrack, streams: DgpStreams):
    """Draw round ``truth.horizon + 1``; store and return ``(context, outcomes)``."""
    K = dgp.K
    mu = dgp.mu
    if dgp.variant == BERNOULLI:
        u = streams.noise.random(K)
        outcomes = tuple(1.0 if u[w] < mu[w] else 0.0 for w in range(K))
        truth.append(outcomes)
        return None, outcomes
    x = 1.0 if streams.x.random() < dgp.x_p else 0.0
    eps = streams.eps.standard_normal() + mu[0]
    noise = streams.noise.standard_normal(K - 1)
    prev = truth.outcomes(truth.horizon)[0] if truth.horizon else 0.0
    y0 = dgp.rho_ar * prev + (dgp.beta * x + eps)
    outcomes = (y0,) + tuple(y0 + (noise[w - 1] + mu[w]) for w in range(1, K))
    truth.append(outcomes, (x,))
    return (x,), outcomes


@dataclass(frozen=True)
class PopulationContrast(Contrast):
    """Model-level mean difference ``E[Y_t(w) - Y_t(w2)]``, constant in ``t``.

    Scored with the same bounds as ``tau(w, w2)``; only the target changes.
    """

    @property
    def label(self) -> str:
        return f"E[tau({self.w},{self.w2})]"


def population_contrast(dgp: DgpSpec, w: int, w2: int) -> float:
    """``E[Y_t(w) - Y_t(w2)]`` under the model (the same for every ``t``)."""
    if dgp.variant == BERNOULLI:
        return dgp.mu[w] - dgp.mu[w2]
    # Y_t(w) - Y_t(0) ~ N(mu[w], 1) for w >= 1
    shift = [0.0] + list(dgp.mu[1:])
    return shift[w] - shift[w2]


# --- analysis spec -------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisSpec:
    """What to compute on each trajectory.

    ``contextual`` adds residualized ``ci`` / ``asymp-cs`` variants (labelled
    ``ci+x`` and ``asymp-cs+x``) for every contrast estimand.  Uniform
    coverage and stopping are checked only for ``t > burn_in``.
    ``population`` adds, for every contrast, rows scored against the model's
    population mean difference instead of the realized ``tau_t``.
    """

    methods: tuple = (Method.CI, Method.ASYMPTOTIC_CS)
    estimands: tuple = (Contrast(1, 0),)
    config: CsConfig = field(default_factory=CsConfig)
    contextual: bool = False
    clamp_mult: float = DEFAULT_CLAMP_MULT
    burn_in: int = 10
    population: bool = False

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        for m in self.methods:
            if m.needs_m and self.config.m is None:
                raise ConfigError("m", f"method {m.value} needs m = M / p_min")
        if self.burn_in < 0:
            raise ConfigError("burn_in", "must be non-negative")

    @property
    def needs_stopping(self) -> bool:
        return any(m.is_sequence for m in self.methods)

    def labelled(self):
        """``(label, method, estimand, contextual)`` for every scored combination."""
        out = []
        targets = list(self.estimands)
        if self.population:
            targets += [PopulationContrast(e.w, e.w2) for e in self.estimands if isinstance(e, Contrast)]
        for est in targets:
            for m in self.methods:
                out.append((m.value, m, est, False))
            if self.contextual and isinstance(est, Contrast):
                for m in self.methods:
                    if m in (Method.CI, Method.ASYMPTOTIC_CS):
                        out.append((m.value + "+x", m, est, True))
        return out


def _check_arms(dgp, analysis):
    for est in analysis.estimands:
        arms = (est.w,) if isinstance(est, Arm) else (est.w, est.w2)
        if any(not 0 <= a < dgp.K for a in arms):
            raise ConfigError("estimands", f"{est.label} refers to an arm outside 0..{dgp.K - 1}")
        if analysis.contextual and not dgp.has_context:
            raise ConfigError("contextual", f"DGP variant {dgp.variant!r} has no context")


# --- trajectories ------------------------------------------------------------------------------

@dataclass
class TrajectoryArrays:
    potentials: np.ndarray
    contexts: Optional[np.ndarray]
    actions: np.ndarray
    probs: np.ndarray

    @property
    def rewards(self) -> np.ndarray:
        return self.potentials[np.arange(len(self.actions)), self.actions]


def simulate_arrays(dgp: DgpSpec, policy_cfg: PolicyConfig, rep: int, n: int,
                    policy_seed: Optional[int] = None) -> TrajectoryArrays:
    """Batch trajectory of ``n`` rounds (compiled kernels when available)."""
    policy_cfg.check_arms(dgp.K)
    pot, x = draw_potentials(dgp, dgp_streams(dgp.seed, rep), n)
    u = policy_stream(dgp.seed if policy_seed is None else policy_seed, rep).random(n)
    actions, probs = kernels.policy_path(pot, u, policy_cfg.n_explore, policy_cfg.p_floor,
                                         policy_cfg.mean_floor_code, policy_cfg.kind.code)
    return TrajectoryArrays(pot, x, actions, probs)


def run_trajectory(dgp: DgpSpec, policy_cfg: PolicyConfig, analysis: AnalysisSpec, rep: int = 0,
                   policy_seed: Optional[int] = None):
    """One streamed trajectory of ``dgp.horizon`` rounds.

    Each round draws every potential outcome, then the policy's
    propensities, then the action, and logs exactly the propensities used.

    Returns
    -------
    log : ObservationLog
    truth : TruthTrack
    series : dict
        ``{(label, estimand_label): BoundSeries}`` for every configured method.
    """
    _check_arms(dgp, analysis)
    policy_cfg.check_arms(dgp.K)
    streams = dgp_streams(dgp.seed, rep)
    state = PolicyState(dgp.K, rng=policy_stream(dgp.seed if policy_seed is None else policy_seed, rep))
    truth = TruthTrack(dgp.K)
    log = ObservationLog(K=dgp.K, M=dgp.reward_bound, p_min=policy_cfg.p_floor,
                         meta={"seed": dgp.seed, "rep": rep})
    rows = []
    for t in range(1, dgp.horizon + 1):
        x, outcomes = generate_round(dgp, truth, streams)
        p = action_probs(state, policy_cfg)
        a = sample_action(p, state.rng)
        y = outcomes[a]
        state.record(a, y)
        obs = Observation(t=t, p=p, a=a, y=y, x=x)
        log = append_observation(log, obs)
        rows.append(obs)
    arrays = TrajectoryArrays(
        truth.potentials(),
        None if not dgp.has_context else np.asarray([o.x for o in rows], dtype=np.float64).reshape(-1, 1),
        np.asarray([o.a for o in rows], dtype=np.int64),
        np.asarray([o.p for o in rows], dtype=np.float64).reshape(-1, dgp.K),
    )
    return log, truth, trajectory_series(arrays, analysis)


def trajectory_series(arrays: TrajectoryArrays, analysis: AnalysisSpec) -> dict:
    """Bound series for every configured method on one trajectory."""
    out = {}
    y = arrays.rewards
    y_hat = None
    for label, method, est, ctx in analysis.labelled():
        if ctx:
            if y_hat is None:
                y_hat = residual_predictions(arrays.contexts, y, analysis.clamp_mult)
            t, c, S = contextual_path(arrays.actions, arrays.probs, y, arrays.contexts, est.w, est.w2, y_hat=y_hat)
        else:
            t, c, S = estimate_path(arrays.actions, arrays.probs, y, est)
        out[(label, est.label)] = bounds_from_path(method, t, c, S, analysis.config, est.label)
    return out


# --- Monte Carlo -----------------------------------------------------------------------------

REPORT_COLUMNS = ("method", "estimand", "coverage", "coverage_se", "mean_width",
                  "stop_mean", "stop_censored", "power", "n_reps")


@dataclass(frozen=True)
class ReportRow:
    method: str
    estimand: str
    coverage: float
    coverage_se: float
    mean_width: float
    stop_mean: float
    stop_censored: int
    power: float
    n_reps: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MonteCarloReport:
    """Aggregated metrics.

    CI rows score coverage at ``T`` and power (``0`` outside the CI at ``T``).
    CS rows score coverage simultaneously over ``burn_in < t <= T`` and the
    first ``t > burn_in`` whose set excludes 0, searched up to the stopping
    horizon; replications that never stop are counted in ``stop_censored``
    and left out of ``stop_mean``.  Metrics that do not apply are NaN.
    """

    rows: tuple
    n_reps: int
    seed: int
    config: dict = field(default_factory=dict)

    def row(self, method: str, estimand: Optional[str] = None) -> ReportRow:
        for r in self.rows:
            if r.method == method and (estimand is None or r.estimand == estimand):
                return r
        raise KeyError((method, estimand))


@dataclass
class _RepScore:
    covered: bool
    width: float
    excludes_zero: bool
    stop: Optional[int]


def _score_one(method, t, center, S, truth, config, T, burn_in, stop_n):
    """Score one method on one trajectory path (arrays cover ``stop_n`` rounds)."""
    a = config.alpha
    if method is Method.GAMMA_CS:
        m = config.require_m(method)
        hw_T = gamma_mixture_half_width(S[T - 1], t[T - 1], a, m, config.rho_mix, config.gamma_bracket)
        sl = slice(burn_in, T)
        covered = bool(np.all(gamma_cs_contains(center[sl], truth[sl], S[sl], t[sl], a, m, config.rho_mix)))
        tail = slice(burn_in, stop_n)
        inside0 = gamma_cs_contains(center[tail], 0.0, S[tail], t[tail], a, m, config.rho_mix)
        idx = np.flatnonzero(~inside0)
        stop = int(burn_in + idx[0] + 1) if idx.size else None
        return _RepScore(covered, 2.0 * hw_T, abs(center[T - 1]) > hw_T, stop)
    if not method.is_sequence:
        hw_T = half_width(method, S[T - 1], t[T - 1], config)
        covered = abs(center[T - 1] - truth[T - 1]) <= hw_T
        return _RepScore(bool(covered), 2.0 * hw_T, bool(abs(center[T - 1]) > hw_T), None)
    hw = half_width(method, S[:stop_n], t[:stop_n], config)
    sl = slice(burn_in, T)
    covered = bool(np.all(np.abs(center[sl] - truth[sl]) <= hw[sl]))
    excl = np.abs(center[burn_in:stop_n]) > hw[burn_in:stop_n]
    idx = np.flatnonzero(excl)
    stop = int(burn_in + idx[0] + 1) if idx.size else None
    return _RepScore(covered, 2.0 * float(hw[T - 1]), bool(abs(center[T - 1]) > hw[T - 1]), stop)


def score_replication(dgp: DgpSpec, policy_cfg: PolicyConfig, analysis: AnalysisSpec, rep: int,
                      stopping_horizon: int, policy_seed: Optional[int] = None) -> dict:
    """``{label_key: _RepScore}`` for one replication."""
    T = dgp.horizon
    n = stopping_horizon if analysis.needs_stopping else T
    arr = simulate_arrays(dgp, policy_cfg, rep, n, policy_seed)
    y = arr.rewards
    y_hat = None
    out = {}
    truths = {}
    for label, method, est, ctx in analysis.labelled():
        if est.label not in truths:
            if isinstance(est, PopulationContrast):
                truths[est.label] = np.full(T, population_contrast(dgp, est.w, est.w2))
            else:
                truths[est.label] = truth_path(arr.potentials[:T], est)
        if ctx:
            if y_hat is None:
                y_hat = residual_predictions(arr.contexts, y, analysis.clamp_mult)
            t, c, S = contextual_path(arr.actions, arr.probs, y, arr.contexts, est.w, est.w2, y_hat=y_hat)
        else:
            t, c, S = estimate_path(arr.actions, arr.probs, y, est)
        out[(label, est.label)] = _score_one(method, t, c, S, truths[est.label], analysis.config,
                                             T, analysis.burn_in, n)
    return out


def default_workers() -> int:
    env = os.environ.get("DBCS_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cap))
        except ValueError:
            raise ConfigError("DBCS_THREADS", f"must be an integer, got {env!r}") from None
    return cap


def _map_reps(fn, n_reps, workers):
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or n_reps == 1:
        return [fn(r) for r in range(n_reps)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(n_reps)))


def _binom_se(p, n):
    return math.sqrt(p * (1.0 - p) / n) if n > 0 else math.nan


def run_monte_carlo(dgp: DgpSpec, policy_cfg: PolicyConfig, analysis: AnalysisSpec, n_reps: int,
                    seed: Optional[int] = None, stopping_horizon: Optional[int] = None,
                    workers: Optional[int] = None, policy_seed: Optional[int] = None) -> MonteCarloReport:
    """Replicate trajectories and aggregate coverage, width, stopping and power.

    Results depend only on ``(seed, replication index)``, never on the
    number of workers: replications are scored independently and aggregated
    in index order.
    """
    if not isinstance(n_reps, (int, np.integer)) or n_reps < 1:
        raise ConfigError("n_reps", f"must be an integer >= 1, got {n_reps!r}")
    if dgp.horizon < 1:
        raise ConfigError("horizon", "Monte Carlo needs horizon >= 1")
    if seed is not None:
        dgp = replace(dgp, seed=seed)
    _check_arms(dgp, analysis)
    policy_cfg.check_arms(dgp.K)
    if analysis.needs_stopping:
        if stopping_horizon is None:
            stopping_horizon = 4 * dgp.horizon
        if stopping_horizon <= dgp.horizon:
            raise ConfigError("stopping_horizon",
                              f"stopping times need a horizon beyond T={dgp.horizon}, got {stopping_horizon}")
    else:
        stopping_horizon = dgp.horizon
    if analysis.burn_in >= dgp.horizon:
        raise ConfigError("burn_in", f"must be below the horizon {dgp.horizon}")

    def one(rep):
        return score_replication(dgp, policy_cfg, analysis, rep, stopping_horizon, policy_seed)

    scores = _map_reps(one, n_reps, workers)
    rows = []
    for label, method, est, _ in analysis.labelled():
        key = (label, est.label)
        reps = [s[key] for s in scores]
        cov = float(np.mean([r.covered for r in reps]))
        width = float(np.mean([r.width for r in reps]))
        if method.is_sequence:
            stops = [r.stop for r in reps if r.stop is not None]
            stop_mean = float(np.mean(stops)) if stops else math.nan
            censored = n_reps - len(stops)
            power = math.nan
        else:
            stop_mean, censored = math.nan, 0
            power = float(np.mean([r.excludes_zero for r in reps]))
        rows.append(ReportRow(label, est.label, cov, _binom_se(cov, n_reps), width, stop_mean, censored, power, n_reps))
    echo = {
        "dgp": asdict(dgp),
        "policy": {**asdict(policy_cfg), "kind": policy_cfg.kind.value},
        "analysis": {
            "methods": [m.value for m in analysis.methods],
            "estimands": [e.label for e in analysis.estimands],
            "alpha": analysis.config.alpha,
            "eta": analysis.config.eta,
            "m": analysis.config.m,
            "rho_mix": analysis.config.rho_mix,
            "gamma_bracket": analysis.config.gamma_bracket,
            "contextual": analysis.contextual,
            "burn_in": analysis.burn_in,
            "population": analysis.population,
        },
        "stopping_horizon": stopping_horizon,
        "policy_seed": policy_seed,
    }
    return MonteCarloReport(tuple(rows), n_reps, dgp.seed, echo)


# --- rho sweep ------------------------------------------------------------------------------

@dataclass(frozen=True)
class RhoRow:
    rho: float
    coverage: float
    coverage_se: float
    mean_width: float
    n_reps: int


def rho_sweep(dgp_base: DgpSpec, rho_grid: Sequence[float], policy_cfg: PolicyConfig, n_reps: int,
              seed: Optional[int] = None, alpha: float = 0.05, workers: Optional[int] = None,
              arm: int = 0) -> list:
    """CI coverage of ``Q_T(arm)`` for each AR coefficient (``beta`` set to 0)."""
    if dgp_base.variant != AR1:
        raise ConfigError("dgp", "rho sweep needs the ar1 variant")
    out = []
    analysis = AnalysisSpec(methods=(Method.CI,), estimands=(Arm(arm),), config=CsConfig(alpha=alpha))
    for rho in rho_grid:
        if not 0.0 <= rho < 1.0:
            raise ConfigError("rho_grid", f"values must lie in [0, 1), got {rho!r}")
        dgp = replace(dgp_base, rho_ar=float(rho), beta=0.0)
        rep = run_monte_carlo(dgp, policy_cfg, analysis, n_reps, seed=seed, workers=workers)
        r = rep.rows[0]
        out.append(RhoRow(float(rho), r.coverage, r.coverage_se, r.mean_width, n_reps))
    return out


__all__ = [
    "DgpSpec", "DgpStreams", "dgp_streams", "policy_stream", "TruthTrack", "truth_path",
    "draw_potentials", "generate_round", "PopulationContrast", "population_contrast", "AnalysisSpec", "TrajectoryArrays", "simulate_arrays",
    "run_trajectory", "trajectory_series", "REPORT_COLUMNS", "ReportRow", "MonteCarloReport",
    "score_replication", "run_monte_carlo", "RhoRow", "rho_sweep", "default_workers",
]
