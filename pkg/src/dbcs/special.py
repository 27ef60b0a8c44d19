"""Scalar special functions used by the interval widths.

Only the cases the package needs are covered:

* the confluent hypergeometric function ``1F1(1; b; z)`` for ``b > 0``,
* the lower incomplete gamma value ``gamma(rho, rho)``,
* the lower real branch ``W_{-1}`` of the Lambert W function,
* the standard normal quantile.

Everything is evaluated in log space where it can overflow.
"""
from __future__ import annotations

import math
from statistics import NormalDist

from .errors import DomainError, NonConvergence

TERM_CAP = 1_000_000
_RESCALE = 1e280
_LOG_RESCALE = math.log(_RESCALE)
_TINY = 1e-300
_STD_NORMAL = NormalDist()


def normal_quantile(q: float) -> float:
    """Standard normal quantile ``Phi^{-1}(q)``."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q!r}")
    return _STD_NORMAL.inv_cdf(q)


# --- 1F1(1; b; z) -------------------------------------------------------------------

def _log_series(coef, z_abs):
    """log of ``sum_k c_k`` where ``c_0 = 1`` and ``c_{k+1} = c_k * coef(k) * z_abs``.

    All terms must be non-negative.  The running sum is rescaled whenever it
    grows past 1e280 so the result cannot overflow.
    """
    total = 1.0
    term = 1.0
    offset = 0.0
    k = 0
    while True:
        ratio = coef(k) * z_abs
        term *= ratio
        total += term
        k += 1
        if total > _RESCALE:
            total /= _RESCALE
            term /= _RESCALE
            offset += _LOG_RESCALE
        if ratio < 1.0 and term <= 1e-17 * total:
            return offset + math.log(total)
        if k >= TERM_CAP:
            raise NonConvergence(f"1F1 series did not converge in {TERM_CAP} terms")


def _direct_alternating(b, z):
    # |z| < b: terms shrink from the start, so the alternating sum is benign.
    total = 1.0
    term = 1.0
    k = 0
    while True:
        term *= z / (b + k)
        total += term
        k += 1
        if abs(term) <= 1e-17 * abs(total):
            return total
        if k >= TERM_CAP:
            raise NonConvergence(f"1F1 series did not converge in {TERM_CAP} terms")


def _log_upper_gamma_q_cf(a, x):
    """Regularized upper incomplete gamma ``Q(a, x)`` for ``x > a + 1`` (Lentz)."""
    bb = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / bb
    h = d
    for i in range(1, TERM_CAP):
        an = -i * (i - a)
        bb += 2.0
        d = an * d + bb
        if abs(d) < _TINY:
            d = _TINY
        c = bb + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return -x + a * math.log(x) - math.lgamma(a) + math.log(h)
    raise NonConvergence("incomplete gamma continued fraction did not converge")


def _small_b_negative_z(b, z):
    # 0 < b < 1, z <= -b: e^z (1 + (b-1) sum_{k>=1} |z|^k / (k! (b-1+k))).
    # The value changes sign for large |z|, so it is summed in linear space.
    a = b - 1.0
    term = 1.0
    total = 0.0
    k = 1
    while True:
        term *= -z / k
        piece = term / (a + k)
        total += piece
        if k > -z and piece <= 1e-17 * total:
            return math.exp(z) * (1.0 + a * total)
        k += 1
        if k >= TERM_CAP:
            raise NonConvergence(f"1F1 series did not converge in {TERM_CAP} terms")


def log_kummer_1f1_a1(b: float, z: float) -> float:
    """``log 1F1(1; b; z)`` for ``b > 0``.

    Evaluation route:

    * ``|z| < b``: the defining series (terms decrease from the start);
    * ``z <= -b``: Kummer's transform ``e^z 1F1(b-1; b; -z)``, whose series
      has non-negative terms when ``b >= 1``;
    * ``z >= b > 1``: the identity
      ``1F1(1; b; z) = (b-1) e^z z^{1-b} Gamma(b-1) P(b-1, z)`` with
      ``P = 1 - Q`` and ``Q`` from a continued fraction;
    * ``z >= b``, ``b <= 1``: the defining series in log space;
    * ``z <= -b``, ``b < 1``: a signed linear-space sum (see below).

    Raises
    ------
    DomainError
        If ``b <= 0``, an argument is not finite, or the function value is
        not positive (possible only for ``b < 1`` and negative ``z``).
    NonConvergence
        If a series needs more than ``TERM_CAP`` terms.
    """
    if not (math.isfinite(b) and math.isfinite(z)):
        raise DomainError("arguments must be finite")
    if b <= 0.0:
        raise DomainError(f"b must be positive, got {b!r}")
    if z == 0.0:
        return 0.0
    if abs(z) < b:
        return math.log(_direct_alternating(b, z))
    if z < 0.0:
        if b == 1.0:
            return z
        a = b - 1.0
        # sum_k (b-1)_k/(b)_k |z|^k/k!; (b-1)_k/(b)_k = (b-1)/(b-1+k)
        if b > 1.0:
            return z + _log_series(lambda k: (a + k) / ((b + k) * (k + 1)), -z)
        value = _small_b_negative_z(b, z)
        if value <= 0.0:
            raise DomainError(f"1F1(1; {b!r}; {z!r}) = {value!r} is not positive; its log is undefined")
        return math.log(value)
    if b > 1.0:
        a = b - 1.0
        q = math.exp(_log_upper_gamma_q_cf(a, z)) if z > a + 1.0 else None
        if q is None:
            return _log_series(lambda k: 1.0 / (b + k), z)
        return math.log(a) + z - a * math.log(z) + math.lgamma(a) + math.log1p(-q)
    return _log_series(lambda k: 1.0 / (b + k), z)


def kummer_1f1_a1(b: float, z: float) -> float:
    """``1F1(1; b; z)``; returns ``inf`` past the float range.

    Unlike the log form this also covers ``0 < b < 1`` with ``z <= -b``,
    where the function can be negative.
    """
    if 0.0 < b < 1.0 and z <= -b and math.isfinite(z):
        return _small_b_negative_z(b, z)
    lv = log_kummer_1f1_a1(b, z)
    return math.exp(lv) if lv < 709.78 else math.inf


def log_trunc_gamma_norm(rho: float) -> float:
    """``log gamma(rho, rho)``, the lower incomplete gamma function at ``(rho, rho)``."""
    if not (rho > 0.0 and math.isfinite(rho)):
        raise DomainError(f"rho must be positive and finite, got {rho!r}")
    # gamma(rho, x) = x^rho e^{-x} / rho * 1F1(1; rho+1; x)
    return rho * math.log(rho) - rho - math.log(rho) + log_kummer_1f1_a1(rho + 1.0, rho)


def trunc_gamma_norm(rho: float) -> float:
    """``gamma(rho, rho) = int_0^rho u^{rho-1} e^{-u} du``; ``inf`` past the float range."""
    lv = log_trunc_gamma_norm(rho)
    return math.exp(lv) if lv < 709.78 else math.inf


# --- Lambert W, lower branch ----------------------------------------------------------

_INV_E = math.exp(-1.0)
_INV_E_LO = -1.2428753672788363e-17  # 1/e - _INV_E


def lambert_w_minus1(x: float) -> float:
    """Lower real branch ``W_{-1}(x)`` for ``x`` in ``[-1/e, 0)``.

    Halley iteration from a branch-point series (near ``-1/e``) or the
    logarithmic asymptote (near 0).
    """
    if not (-_INV_E <= x < 0.0):
        raise DomainError(f"W_-1 is real only on [-1/e, 0), got {x!r}")
    # 1 + e*x without cancellation: x + 1/e is exact for x near -1/e
    q = ((x + _INV_E) + _INV_E_LO) * math.e
    if q <= 0.0:
        return -1.0
    if x < -0.25:
        p = -math.sqrt(2.0 * q)
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (
            -43.0 / 540.0 + p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))))
        if p > -1e-2:
            # series error is O(p^7); Halley is ill-conditioned this close to -1
            return w
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= 4.5e-16 * -x:
            # residual at rounding level; further steps only oscillate
            return w
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if w_new >= -1.0:
            # stay on the lower branch
            w_new = (w - 1.0) / 2.0
        if abs(w_new - w) <= 1e-15 * abs(w_new):
            return w_new
        w = w_new
    raise NonConvergence(f"Halley iteration for W_-1({x!r}) did not converge")
