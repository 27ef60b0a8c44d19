"""Variance reduction for contrasts with context-based outcome predictions.

A predictor fitted on strictly past rounds produces ``y_hat_t`` from ``x_t``
before the action is drawn.  The contrast estimator is then run on the
residual ``y_t - y_hat_t``.  Because the same prediction enters both arms'
terms, it cancels in expectation and the estimand is still
``tau_t(w, w2)``; only the variance changes.  Single-arm means do not
enjoy this cancellation, so only contrast states are offered here.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from . import kernels
from ._kernels_py import VAR_TOL, _predict
from .confidence import CsConfig, Interval, Method, bounds_from_path, half_width
from .errors import DimensionMismatch, DbcsError
from .estimators import ContrastEstimatorState, _contrast_step, contrast_terms, running_sums

DEFAULT_CLAMP_MULT = 10.0


class Predictor(Protocol):
    """Anything that predicts a reward from a context using past data only."""

    def predict(self, x) -> float: ...

    def update(self, x, y: float) -> None: ...


class LeastSquaresPredictor:
    """Streaming least squares of reward on context, with intercept.

    Co-moments are accumulated with Welford updates.  Directions of the
    context covariance with eigenvalue below ``1e-12 (1 + lambda_max)`` are
    dropped (pseudo-inverse), which handles the cold start and constant
    contexts without biasing well-conditioned fits.  Predictions are clamped
    to ``clamp_bound`` if given, else to ``clamp_mult`` times the largest
    ``|y|`` seen so far.

    For scalar contexts the arithmetic matches the batch kernel
    :func:`dbcs.kernels.ls_predictions` exactly.
    """

    def __init__(self, dim: Optional[int] = None, clamp_bound: Optional[float] = None,
                 clamp_mult: float = DEFAULT_CLAMP_MULT):
        if clamp_bound is not None and not clamp_bound > 0:
            raise ValueError("clamp_bound must be positive")
        self.dim = dim
        self.clamp_bound = clamp_bound
        self.clamp_mult = clamp_mult
        self.n = 0
        self.ymax = 0.0
        self.my = 0.0
        self._mx = None
        self._cxx = None
        self._cxy = None

    def _bound(self):
        return self.clamp_bound if self.clamp_bound is not None else self.ymax * self.clamp_mult

    def _as_vec(self, x):
        v = np.atleast_1d(np.asarray(x, dtype=np.float64)).ravel()
        if self.dim is None:
            self.dim = v.size
        elif v.size != self.dim:
            raise DimensionMismatch(f"context has dimension {v.size}, predictor uses {self.dim}")
        return v

    def predict(self, x) -> float:
        v = self._as_vec(x)
        if self.n == 0:
            return 0.0
        bound = self._bound()
        if self.dim == 1:
            return _predict(self.n, float(self._mx[0]), self.my, float(self._cxx[0, 0]),
                            float(self._cxy[0]), bound, float(v[0]))
        lam, vec = np.linalg.eigh(self._cxx / self.n)
        keep = lam > VAR_TOL * (1.0 + max(lam.max(), 0.0))
        pred = self.my
        if np.any(keep):
            proj = vec[:, keep].T @ (self._cxy / self.n)
            beta = vec[:, keep] @ (proj / lam[keep])
            pred = self.my + float(beta @ (v - self._mx))
        return min(max(pred, -bound), bound)

    def update(self, x, y: float) -> None:
        v = self._as_vec(x)
        if self._mx is None:
            self._mx = np.zeros(self.dim)
            self._cxx = np.zeros((self.dim, self.dim))
            self._cxy = np.zeros(self.dim)
        self.n += 1
        if self.dim == 1:
            # scalar path in the kernel's exact operation order
            xi = float(v[0])
            mx = float(self._mx[0])
            dx = xi - mx
            mx += dx / self.n
            self.my += (y - self.my) / self.n
            self._mx[0] = mx
            self._cxx[0, 0] += dx * (xi - mx)
            self._cxy[0] += dx * (y - self.my)
        else:
            dx = v - self._mx
            self._mx = self._mx + dx / self.n
            self.my += (y - self.my) / self.n
            self._cxx += np.outer(dx, v - self._mx)
            self._cxy += dx * (y - self.my)
        if abs(y) > self.ymax:
            self.ymax = abs(y)


class ConstantMeanPredictor:
    """Predicts the running mean of past rewards, ignoring the context."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0

    def predict(self, x=None) -> float:
        return self.mean

    def update(self, x, y: float) -> None:
        self.n += 1
        self.mean += (y - self.mean) / self.n


def predict_next(pred: Predictor, x) -> float:
    return pred.predict(x)


@dataclass(frozen=True)
class ResidualContrastState(ContrastEstimatorState):
    """Contrast state fed with residualized rewards ``y - y_hat``."""


def update_residual_contrast(state: ResidualContrastState, obs, y_hat: float) -> ResidualContrastState:
    """Contrast update with the reward replaced by ``obs.y - y_hat``."""
    return _contrast_step(state, obs, obs.y - y_hat)


class ProtocolError(DbcsError, RuntimeError):
    """Observe was called without a prediction for that round."""


class ContextualTracker:
    """Enforces predict-then-observe for one contrast.

    ``predict(x_t)`` must be called before the reward of round ``t`` is
    revealed through ``observe(obs)``; the predictor learns from round
    ``t`` only after the residual has been formed.
    """

    def __init__(self, w: int, w2: int, predictor: Optional[Predictor] = None):
        self.predictor = predictor if predictor is not None else LeastSquaresPredictor()
        self.state = ResidualContrastState((w, w2))
        self._pending = None

    def predict(self, x) -> float:
        if self._pending is not None:
            raise ProtocolError(f"round {self.state.t + 1} already has a prediction")
        y_hat = self.predictor.predict(x)
        self._pending = (x, y_hat)
        return y_hat

    def observe(self, obs) -> ResidualContrastState:
        if self._pending is None:
            raise ProtocolError(f"round {obs.t} observed before predict() was called")
        x, y_hat = self._pending
        if obs.x is not None and tuple(np.atleast_1d(x).astype(float)) != tuple(obs.x):
            raise ProtocolError(f"round {obs.t} context differs from the one used for prediction")
        self.state = update_residual_contrast(self.state, obs, y_hat)
        self.predictor.update(x, obs.y)
        self._pending = None
        return self.state


class StallWarning(UserWarning):
    """The residual variance sum has stopped growing."""


def check_stall(S_path, window: int = 50, rel: float = 1e-9) -> bool:
    """True when the last ``window`` rounds added (almost) nothing to ``S``.

    Validity of the contextual bounds needs non-vanishing residual variance,
    which data cannot confirm; a stalled sum is the visible symptom.
    """
    S_path = np.asarray(S_path, dtype=np.float64)
    if len(S_path) <= window:
        return False
    return bool(S_path[-1] - S_path[-1 - window] <= rel * max(S_path[-1], 1.0))


def contextual_bounds(state: ResidualContrastState, config: CsConfig, method="ci") -> Interval:
    """CI or asymptotic CS for ``tau_t(w, w2)`` from a residualized state."""
    method = Method(method)
    if method not in (Method.CI, Method.ASYMPTOTIC_CS):
        raise ValueError(f"contextual bounds support ci and asymp-cs, not {method.value}")
    hw = half_width(method, state.S, state.t, config, vectorized=False)
    return Interval(state.estimate, hw, config.alpha)


def residual_predictions(contexts, rewards, clamp_mult: float = DEFAULT_CLAMP_MULT):
    """Batch past-only predictions for a whole trajectory.

    Scalar contexts use the compiled kernel; wider contexts fall back to the
    streaming predictor.
    """
    x = np.asarray(contexts, dtype=np.float64)
    y = np.asarray(rewards, dtype=np.float64)
    if x.ndim == 1 or x.shape[1] == 1:
        return kernels.ls_predictions(x.reshape(-1), y, clamp_mult)
    pred = LeastSquaresPredictor(dim=x.shape[1], clamp_mult=clamp_mult)
    out = np.empty(len(y))
    for i in range(len(y)):
        out[i] = pred.predict(x[i])
        pred.update(x[i], float(y[i]))
    return out


def contextual_path(actions, probs, rewards, contexts, w, w2, clamp_mult=DEFAULT_CLAMP_MULT, y_hat=None):
    """Batch residualized contrast path ``(t, center, S)``."""
    y = np.asarray(rewards, dtype=np.float64)
    if y_hat is None:
        y_hat = residual_predictions(contexts, y, clamp_mult)
    diff, var = contrast_terms(actions, probs, y - y_hat, w, w2)
    t = np.arange(1, len(diff) + 1, dtype=np.float64)
    return t, running_sums(diff) / t, running_sums(var)


def contextual_bound_series(log, w, w2, method, config: CsConfig, predictor: Optional[Predictor] = None,
                            warn: bool = True):
    """Per-round contextual bounds for a log with contexts."""
    method = Method(method)
    if method not in (Method.CI, Method.ASYMPTOTIC_CS):
        raise ValueError(f"contextual bounds support ci and asymp-cs, not {method.value}")
    if log.context_dim is None and len(log):
        raise DimensionMismatch("log has no context column")
    tracker = ContextualTracker(w, w2, predictor)
    ts, centers, Ss = [], [], []
    for obs in log:
        tracker.predict(obs.x)
        st = tracker.observe(obs)
        ts.append(st.t)
        centers.append(st.estimate)
        Ss.append(st.S)
    if warn and check_stall(Ss):
        warnings.warn("residual variance sum has stalled; contextual bounds may be unreliable", StallWarning)
    return bounds_from_path(method, ts, centers, Ss, config, f"tau({w},{w2})|x")


__all__ = [
    "Predictor", "LeastSquaresPredictor", "ConstantMeanPredictor", "predict_next",
    "ResidualContrastState", "update_residual_contrast", "ContextualTracker", "ProtocolError",
    "StallWarning", "check_stall", "contextual_bounds", "residual_predictions", "contextual_path",
    "contextual_bound_series",
]
