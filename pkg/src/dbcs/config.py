"""Flat ``key = value`` run configuration.

Blank lines and lines starting with ``#`` are ignored; a ``#`` after a value
starts a comment.  Keys (all optional unless a mode needs them):

=====================  ==========================================================
``mode``               ``simulate`` | ``analyze`` | ``tune-eta`` | ``rho-sweep``
``dgp``                ``bernoulli`` | ``ar1``
``K``, ``horizon``     arm count, rounds per trajectory ``T``
``mu``                 comma-separated per-arm means
``rho_ar``, ``beta``   AR(1) coefficient and context effect (``ar1`` only)
``x_p``                context success probability (``ar1`` only)
``seed``               master seed
``policy_seed``        separate seed for the policy streams (default: ``seed``)
``policy``             ``uniform`` | ``mean-proportional``
``explore_fraction``   share of ``T`` explored uniformly
``p_floor``            propensity floor
``mean_floor``         floor on sample means (default adaptive)
``methods``            comma list of ``ci``, ``exact-cs``, ``gamma-cs``, ``asymp-cs``
``estimands``          e.g. ``tau(1,0) Q(0)`` (space or ``;`` separated)
``alpha``, ``eta``     miscoverage level, asymptotic-CS mixture parameter
``M``, ``p_min``       declared reward bound and propensity floor
``m``                  ``M / p_min`` (derived from ``M`` and ``p_min`` if absent)
``rho_mix``            gamma-mixture parameter
``gamma_bracket``      ``exact`` | ``expand``
``contextual``         ``true`` adds residualized ``ci+x`` / ``asymp-cs+x``
``population``         ``true`` also scores contrasts against the model's
                       population mean difference
``reps``               Monte Carlo replications
``stopping_horizon``   rounds simulated for stopping times (default ``4 T``)
``burn_in``            rounds excluded from uniform coverage and stopping
``rho_grid``           comma list for ``rho-sweep``
``t_star``             target round for ``tune-eta``
``series``             ``true`` writes replication 0's bound series
``log``                input log for ``analyze``
``out``                output directory
``workers``            worker threads (``DBCS_THREADS`` caps the default)
=====================  ==========================================================
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .confidence import CsConfig, Method
from .errors import ConfigError, DbcsError
from .estimators import Contrast, parse_estimand
from .policies import PolicyConfig
from .simulation import AnalysisSpec, DgpSpec

MODES = ("simulate", "analyze", "tune-eta", "rho-sweep")

KNOWN_KEYS = {
    "mode", "dgp", "K", "horizon", "mu", "rho_ar", "beta", "x_p", "seed", "policy_seed", "policy",
    "explore_fraction", "p_floor", "mean_floor", "methods", "estimands", "alpha", "eta", "M", "p_min",
    "m", "rho_mix", "gamma_bracket", "contextual", "population", "reps", "stopping_horizon", "burn_in",
    "rho_grid", "t_star", "series", "log", "out", "workers",
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into an ordered ``{key: raw string}`` dict."""
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", f"expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(key, f"unknown key (line {n})")
        out[key] = value
    return out


def read_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None


# --- typed accessors ---------------------------------------------------------------

def _get(raw, key, conv, default=None, required=False):
    if key not in raw or raw[key] == "":
        if required:
            raise ConfigError(key, "is required")
        return default
    try:
        return conv(raw[key])
    except (ValueError, TypeError) as exc:
        raise ConfigError(key, f"invalid value {raw[key]!r} ({exc})") from None


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError("expected an integer")
    return int(v)


def _bool(s):
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _floats(s):
    return tuple(float(v) for v in s.replace(";", ",").split(",") if v.strip())


_EST_TOKEN = re.compile(r"Q\(\s*\d+\s*\)|tau\(\s*\d+\s*,\s*\d+\s*\)")


def _estimands(s):
    found = _EST_TOKEN.findall(s)
    if not found or _EST_TOKEN.sub("", s).replace(";", "").strip():
        raise ValueError("use Q(w) or tau(w,w2), separated by spaces or ';'")
    return tuple(parse_estimand(f) for f in found)


def _methods(s):
    return tuple(Method(v.strip()) for v in s.split(",") if v.strip())


# --- run configuration -----------------------------------------------------------------

@dataclass
class RunConfig:
    mode: str
    raw: dict
    dgp: Optional[DgpSpec] = None
    policy: Optional[PolicyConfig] = None
    analysis: Optional[AnalysisSpec] = None
    cs: Optional[CsConfig] = None
    reps: int = 1
    seed: int = 0
    policy_seed: Optional[int] = None
    stopping_horizon: Optional[int] = None
    rho_grid: tuple = ()
    t_star: int = 10
    series: bool = False
    population: bool = False
    log: Optional[str] = None
    out: str = "out"
    workers: Optional[int] = None
    M: Optional[float] = None
    p_min: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Resolved configuration for reproducibility headers."""
        return {k: self.raw[k] for k in sorted(self.raw)}


def build_run_config(raw: dict) -> RunConfig:
    """Validate raw keys and build the typed objects a mode needs."""
    mode = _get(raw, "mode", str, default="simulate")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {mode!r}")
    rc = RunConfig(mode=mode, raw=dict(raw))
    rc.seed = _get(raw, "seed", _int, default=0)
    rc.policy_seed = _get(raw, "policy_seed", _int)
    rc.reps = _get(raw, "reps", _int, default=1)
    rc.stopping_horizon = _get(raw, "stopping_horizon", _int)
    rc.t_star = _get(raw, "t_star", _int, default=10)
    rc.series = _get(raw, "series", _bool, default=False)
    rc.population = _get(raw, "population", _bool, default=False)
    rc.log = _get(raw, "log", str)
    rc.out = _get(raw, "out", str, default="out")
    rc.workers = _get(raw, "workers", _int)
    rc.rho_grid = _get(raw, "rho_grid", _floats, default=(0.0, 0.2, 0.4, 0.6, 0.8))
    if rc.reps < 1:
        raise ConfigError("reps", "must be >= 1")

    alpha = _get(raw, "alpha", float, default=0.05)
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha", f"must lie in (0, 1), got {alpha!r}")
    if mode == "tune-eta":
        if rc.t_star < 1:
            raise ConfigError("t_star", "must be >= 1")
        rc.cs = None
        rc.extra["alpha"] = alpha
        return rc

    methods = _get(raw, "methods", _methods, default=(Method.CI, Method.ASYMPTOTIC_CS))
    rc.M = _get(raw, "M", float)
    p_floor = _get(raw, "p_floor", float, default=0.01)
    rc.p_min = _get(raw, "p_min", float)
    m = _get(raw, "m", float)
    if m is None and rc.M is not None and mode != "analyze":
        m = rc.M / (rc.p_min if rc.p_min is not None else p_floor)
    eta = _get(raw, "eta", float)
    rho_mix = _get(raw, "rho_mix", float, default=1.0)
    bracket = _get(raw, "gamma_bracket", str, default="exact")
    for key, v in (("eta", eta), ("m", m), ("rho_mix", rho_mix)):
        if v is not None and not v > 0:
            raise ConfigError(key, f"must be positive, got {v!r}")
    if bracket not in ("exact", "expand"):
        raise ConfigError("gamma_bracket", f"must be exact or expand, got {bracket!r}")
    try:
        rc.cs = CsConfig(alpha=alpha, eta=eta, m=m, rho_mix=rho_mix, gamma_bracket=bracket)
    except DbcsError as exc:
        # only the default eta can fail here (closed form needs alpha <= 1/e)
        raise ConfigError("eta", f"{exc}; set eta explicitly") from None

    estimands = _get(raw, "estimands", _estimands, default=None)
    contextual = _get(raw, "contextual", _bool, default=False)
    burn_in = _get(raw, "burn_in", _int, default=10)

    if mode == "analyze":
        if rc.log is None:
            raise ConfigError("log", "analyze mode needs an input log (--log)")
        rc.extra.update(methods=methods, estimands=estimands, contextual=contextual)
        return rc

    variant = _get(raw, "dgp", str, required=True)
    K = _get(raw, "K", _int, required=True)
    horizon = _get(raw, "horizon", _int, required=True)
    rc.dgp = DgpSpec(
        variant=variant, K=K, horizon=horizon, mu=_get(raw, "mu", _floats, required=True), seed=rc.seed,
        rho_ar=_get(raw, "rho_ar", float, default=0.0), beta=_get(raw, "beta", float, default=0.0),
        x_p=_get(raw, "x_p", float, default=0.5),
    )
    rc.policy = PolicyConfig(
        kind=_get(raw, "policy", str, default="mean-proportional"), horizon=horizon,
        explore_fraction=_get(raw, "explore_fraction", float, default=0.1), p_floor=p_floor,
        mean_floor=_get(raw, "mean_floor", float),
    )
    rc.policy.check_arms(K)
    if rc.M is not None and rc.dgp.reward_bound is not None and rc.M < rc.dgp.reward_bound:
        raise ConfigError("M", f"declared bound {rc.M!r} is below the model's reward bound {rc.dgp.reward_bound!r}")
    if rc.p_min is not None and rc.p_min > p_floor:
        raise ConfigError("p_min", f"declared p_min {rc.p_min!r} exceeds the policy floor {p_floor!r}")
    if mode == "rho-sweep":
        return rc
    if estimands is None:
        estimands = (Contrast(1, 0),)
    rc.analysis = AnalysisSpec(methods=methods, estimands=estimands, config=rc.cs, contextual=contextual,
                               burn_in=burn_in, population=rc.population)
    return rc
