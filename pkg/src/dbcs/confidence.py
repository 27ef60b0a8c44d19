"""Confidence intervals and confidence sequences for IPW estimates.

Four constructions share one calling convention, ``half_width(S, t)``,
where ``S`` is the running variance sum of the estimator and ``t`` the round:

``ci``
    Fixed-time normal interval, ``z_{1-alpha/2} sqrt(S) / t``.
``exact-cs``
    Non-asymptotic sequence from bounded summands (needs ``m = M / p_min``).
``gamma-cs``
    Tighter non-asymptotic sequence from a truncated-gamma mixture
    martingale, inverted numerically (needs ``m``).
``asymp-cs``
    Asymptotic sequence with a normal mixture tuned by ``eta``.

Width functions accept scalars or numpy arrays for ``S`` and ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import special as sps

from .errors import BracketError, DomainError, MissingBound
from .special import lambert_w_minus1, log_kummer_1f1_a1, normal_quantile

GAMMA_TOL = 1e-9


class Method(str, Enum):
    CI = "ci"
    EXACT_CS = "exact-cs"
    GAMMA_CS = "gamma-cs"
    ASYMPTOTIC_CS = "asymp-cs"

    @property
    def is_sequence(self) -> bool:
        return self is not Method.CI

    @property
    def needs_m(self) -> bool:
        return self in (Method.EXACT_CS, Method.GAMMA_CS)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_st(S, t):
    S = np.asarray(S, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 1):
        raise DomainError("t must be >= 1")
    if np.any(S < 0) or not np.all(np.isfinite(S)):
        raise DomainError("S must be finite and non-negative")
    return S, t


# --- tuning ----------------------------------------------------------------------

def tune_eta(alpha: float, t_star: int = 10) -> float:
    """Closed-form mixture parameter ``sqrt((-W_{-1}(-alpha^2 e) - 1) / t_star)``.

    Returns about 0.77 for ``alpha = 0.05, t_star = 10``.  The argument of
    ``W_{-1}`` must be at least ``-1/e``, so this form exists only for
    ``alpha <= 1/e``.  See :func:`optimal_eta` for the exact minimizer of
    the width at ``t_star``.
    """
    _check_alpha(alpha)
    if t_star < 1:
        raise DomainError(f"t_star must be >= 1, got {t_star!r}")
    arg = -alpha * alpha * math.e
    if arg < -math.exp(-1.0):
        raise DomainError(f"closed form needs alpha <= 1/e, got alpha={alpha!r}; use optimal_eta")
    return math.sqrt((-lambert_w_minus1(arg) - 1.0) / t_star)


def optimal_eta(alpha: float, t_star: int = 10) -> float:
    """Exact minimizer over ``eta`` of the asymptotic half-width at ``t = t_star``.

    With ``x = eta^2`` the width is proportional to
    ``f(x) = (t x + 1)/(t^2 x) log((t x + 1)/alpha^2)``; setting
    ``u = t x + 1``, ``f'(x) = 0`` reduces to ``u e^{-u} = alpha^2 / e``, so
    ``eta = sqrt((-W_{-1}(-alpha^2 / e) - 1) / t_star)``, defined for all
    ``alpha`` in (0, 1).
    """
    _check_alpha(alpha)
    if t_star < 1:
        raise DomainError(f"t_star must be >= 1, got {t_star!r}")
    return math.sqrt((-lambert_w_minus1(-alpha * alpha / math.e) - 1.0) / t_star)


def eta_objective(x: float, t: float, alpha: float) -> float:
    """``f(x) = (t x + 1)/(t^2 x) log((t x + 1)/alpha^2)`` with ``x = eta^2``."""
    return (t * x + 1.0) / (t * t * x) * math.log((t * x + 1.0) / (alpha * alpha))


# --- configuration ---------------------------------------------------------------------

@dataclass(frozen=True)
class CsConfig:
    """Shared parameters for every bound.

    Parameters
    ----------
    alpha : float
        Miscoverage level in (0, 1).
    eta : float, optional
        Asymptotic-CS mixture parameter; defaults to ``tune_eta(alpha, 10)``.
    m : float, optional
        ``M / p_min``; required by the exact and gamma-mixture sequences.
    rho_mix : float
        Truncated-gamma mixture parameter.
    gamma_bracket : {"exact", "expand"}
        ``"exact"`` raises :class:`BracketError` when the exact-CS interval
        fails to bracket the gamma-mixture root; ``"expand"`` doubles the
        bracket until it does.
    """

    alpha: float = 0.05
    eta: Optional[float] = None
    m: Optional[float] = None
    rho_mix: float = 1.0
    gamma_bracket: str = "exact"

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.eta is None:
            object.__setattr__(self, "eta", tune_eta(self.alpha, 10))
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise DomainError(f"eta must be positive, got {self.eta!r}")
        if self.m is not None and not (self.m > 0 and math.isfinite(self.m)):
            raise DomainError(f"m must be positive, got {self.m!r}")
        if not (self.rho_mix > 0 and math.isfinite(self.rho_mix)):
            raise DomainError(f"rho_mix must be positive, got {self.rho_mix!r}")
        if self.gamma_bracket not in ("exact", "expand"):
            raise DomainError(f"gamma_bracket must be 'exact' or 'expand', got {self.gamma_bracket!r}")

    def require_m(self, method) -> float:
        if self.m is None:
            raise MissingBound(f"{Method(method).value} needs m = M / p_min")
        return self.m


@dataclass(frozen=True)
class Interval:
    center: float
    half_width: float
    alpha: float

    def __post_init__(self):
        if not self.half_width >= 0:
            raise DomainError(f"half_width must be >= 0, got {self.half_width!r}")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


# --- closed-form widths -------------------------------------------------------------------

def ci_half_width(S, t, alpha):
    """``z_{1-alpha/2} sqrt(S) / t``."""
    _check_alpha(alpha)
    S, t = _check_st(S, t)
    return _out(normal_quantile(1.0 - alpha / 2.0) * np.sqrt(S) / t)


def exact_cs_half_width(S, t, alpha, m):
    """``m(m+1)/t log(2/alpha) + (S/t)((m+1)/m log(1+1/m) - 1/m)``."""
    _check_alpha(alpha)
    if m is None:
        raise MissingBound("exact-cs needs m = M / p_min")
    if not m > 0:
        raise DomainError(f"m must be positive, got {m!r}")
    S, t = _check_st(S, t)
    slope = (m + 1.0) / m * math.log1p(1.0 / m) - 1.0 / m
    return _out((m * (m + 1.0) * math.log(2.0 / alpha) + S * slope) / t)


def asymptotic_cs_half_width(S, t, alpha, eta):
    """``(1/t) sqrt(((S eta^2 + 1)/eta^2) log((S eta^2 + 1)/alpha^2))``."""
    _check_alpha(alpha)
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    S, t = _check_st(S, t)
    e2 = eta * eta
    u = S * e2 + 1.0
    return _out(np.sqrt(u / e2 * np.log(u / (alpha * alpha))) / t)


# --- gamma-mixture sequence -----------------------------------------------------------------

def _log_norm_const(rho):
    # rho^rho e^{-rho} / gamma(rho, rho) = rho / 1F1(1; rho+1; rho)
    return math.log(rho) - log_kummer_1f1_a1(rho + 1.0, rho)


def gamma_log_mixture(A, B, rho=1.0):
    """Log of the truncated-gamma mixture martingale at ``(A, B)`` (scalar).

    ``A = sum_j u_j / m`` and ``B = S / m^2``; the value is increasing in ``A``
    and at most 0 at ``A = 0``.
    """
    return _log_norm_const(rho) - math.log(B + rho) + log_kummer_1f1_a1(B + rho + 1.0, A + B + rho)


def _log_1f1_a1_vec(b, z):
    # z >= b - 1 > 0 here: 1F1(1; b; z) = (b-1) e^z z^{1-b} Gamma(b-1) P(b-1, z)
    a = b - 1.0
    return np.log(a) + z - a * np.log(z) + sps.gammaln(a) + np.log(sps.gammainc(a, z))


def gamma_log_mixture_vec(A, B, rho=1.0):
    """Vectorized :func:`gamma_log_mixture` for ``A >= 0`` (scipy incomplete gamma)."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    return _log_norm_const(rho) - np.log(B + rho) + _log_1f1_a1_vec(B + rho + 1.0, A + B + rho)


def _exact_bracket_A(B, alpha, m):
    # exact-CS half-width expressed on the A scale: t C_t / m
    return (m + 1.0) * math.log(2.0 / alpha) + B * ((m + 1.0) * math.log1p(1.0 / m) - 1.0)


def gamma_mixture_half_width(S, t, alpha, m, rho_mix=1.0, bracket="exact", tol=GAMMA_TOL):
    """Half-width of the gamma-mixture sequence at one round.

    Each side is a one-sided test at level ``alpha/2``; the boundary solves
    ``V(A, B) = 2/alpha`` by bisection on ``A`` over ``[0, t C_t / m]``, the
    exact-CS interval.  The returned width errs on the wide side by at most
    ``tol``.
    """
    _check_alpha(alpha)
    if m is None:
        raise MissingBound("gamma-cs needs m = M / p_min")
    S, t = (float(v) for v in _check_st(S, t))
    B = S / (m * m)
    target = math.log(2.0 / alpha)
    lo = 0.0
    hi = _exact_bracket_A(B, alpha, m)
    if gamma_log_mixture(hi, B, rho_mix) < target:
        if bracket != "expand":
            raise BracketError(
                f"exact-CS bracket does not reach the mixture threshold (S={S!r}, t={t!r}, m={m!r}); "
                "pass bracket='expand' to search wider"
            )
        while gamma_log_mixture(hi, B, rho_mix) < target:
            lo, hi = hi, 2.0 * hi
    tol_A = tol * t / m
    while hi - lo > tol_A:
        mid = 0.5 * (lo + hi)
        if gamma_log_mixture(mid, B, rho_mix) < target:
            lo = mid
        else:
            hi = mid
    return m * hi / t


def gamma_mixture_half_width_vec(S, t, alpha, m, rho_mix=1.0, bracket="exact", tol=GAMMA_TOL):
    """Vectorized :func:`gamma_mixture_half_width` (same bisection, all rounds at once)."""
    _check_alpha(alpha)
    if m is None:
        raise MissingBound("gamma-cs needs m = M / p_min")
    S, t = _check_st(S, t)
    S, t = np.broadcast_arrays(S, t)
    B = S / (m * m)
    target = math.log(2.0 / alpha)
    lo = np.zeros_like(B)
    hi = _exact_bracket_A(B, alpha, m)
    short = gamma_log_mixture_vec(hi, B, rho_mix) < target
    if np.any(short):
        if bracket != "expand":
            i = int(np.flatnonzero(short.ravel())[0])
            raise BracketError(
                f"exact-CS bracket does not reach the mixture threshold "
                f"(S={S.ravel()[i]!r}, t={t.ravel()[i]!r}, m={m!r}); pass bracket='expand' to search wider"
            )
        while np.any(short):
            lo = np.where(short, hi, lo)
            hi = np.where(short, 2.0 * hi, hi)
            short = gamma_log_mixture_vec(hi, B, rho_mix) < target
    tol_A = tol * t / m
    while np.any(hi - lo > tol_A):
        mid = 0.5 * (lo + hi)
        below = gamma_log_mixture_vec(mid, B, rho_mix) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return _out(m * hi / t)


def gamma_cs_contains(center, value, S, t, alpha, m, rho_mix=1.0):
    """Whether ``value`` lies in the gamma-mixture sequence at each round.

    Uses the monotonicity of the mixture in ``A``, so no root is needed:
    ``value`` is inside iff ``V(t |center - value| / m, S / m^2) < 2 / alpha``.
    """
    _check_alpha(alpha)
    if m is None:
        raise MissingBound("gamma-cs needs m = M / p_min")
    S, t = _check_st(S, t)
    A = t * np.abs(np.asarray(center, dtype=np.float64) - value) / m
    return gamma_log_mixture_vec(A, S / (m * m), rho_mix) < math.log(2.0 / alpha)


def gamma_mixture_cs(state, alpha, m, rho_mix=1.0, bracket="exact") -> Interval:
    """Gamma-mixture interval for an arm or contrast estimator state."""
    if m is None:
        raise MissingBound("gamma-cs needs m = M / p_min")
    hw = gamma_mixture_half_width(state.S, state.t, alpha, m, rho_mix, bracket)
    return Interval(state.estimate, hw, alpha)


# --- dispatch and series ----------------------------------------------------------------------

def half_width(method, S, t, config: CsConfig, vectorized=True):
    """Half-width of ``method`` at ``(S, t)`` under ``config``."""
    method = Method(method)
    a = config.alpha
    if method is Method.CI:
        return ci_half_width(S, t, a)
    if method is Method.ASYMPTOTIC_CS:
        return asymptotic_cs_half_width(S, t, a, config.eta)
    m = config.require_m(method)
    if method is Method.EXACT_CS:
        return exact_cs_half_width(S, t, a, m)
    if vectorized:
        return gamma_mixture_half_width_vec(S, t, a, m, config.rho_mix, config.gamma_bracket)
    return gamma_mixture_half_width(S, t, a, m, config.rho_mix, config.gamma_bracket)


def interval(method, state, config: CsConfig) -> Interval:
    """Bound for one estimator state."""
    hw = half_width(method, state.S, state.t, config, vectorized=False)
    return Interval(state.estimate, hw, config.alpha)


@dataclass(frozen=True)
class BoundSeries:
    """Per-round bounds for one method and estimand (rows ordered by ``t``)."""

    method: Method
    estimand: str
    t: np.ndarray
    center: np.ndarray
    half_width: np.ndarray
    alpha: float = field(default=0.05)

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.half_width

    def __len__(self) -> int:
        return len(self.t)

    def rows(self):
        """Yield ``(t, center, lower, upper)`` tuples."""
        for i in range(len(self.t)):
            yield int(self.t[i]), float(self.center[i]), float(self.lower[i]), float(self.upper[i])

    def final(self) -> Interval:
        return Interval(float(self.center[-1]), float(self.half_width[-1]), self.alpha)


def bounds_from_path(method, t, center, S, config: CsConfig, estimand: str = "") -> BoundSeries:
    """Series from precomputed ``(t, center, S)`` arrays."""
    method = Method(method)
    t = np.asarray(t, dtype=np.float64)
    hw = np.asarray(half_width(method, S, t, config), dtype=np.float64) if len(t) else np.empty(0)
    return BoundSeries(method, estimand, t.astype(np.int64), np.asarray(center, dtype=np.float64), hw, config.alpha)


def bound_series(states, method, config: CsConfig, estimand: str = "") -> BoundSeries:
    """Series from a stream of estimator states (one per round, in order)."""
    method = Method(method)
    if method.needs_m:
        config.require_m(method)
    ts, centers, Ss = [], [], []
    for st in states:
        ts.append(st.t)
        centers.append(st.estimate)
        Ss.append(st.S)
    return bounds_from_path(method, ts, centers, Ss, config, estimand)
