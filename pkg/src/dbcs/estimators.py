"""Inverse-propensity-weighted estimators of arm means and pairwise contrasts.

Two ways to run the same arithmetic:

* streaming states (:class:`ArmEstimatorState`, :class:`ContrastEstimatorState`)
  updated one observation at a time in O(1);
* batch helpers (:func:`arm_terms`, :func:`contrast_terms`, :func:`running_sums`)
  that build the per-round summands for a whole trajectory as arrays.

Both accumulate with Neumaier-compensated summation in round order, so the
streaming value after round t equals the batch prefix value at t exactly.
No weight clipping is applied anywhere: clipping would bias the estimators.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import EmptyState, OrderViolation, OutOfRange


def _neumaier(s, c, x):
    tt = s + x
    if abs(s) >= abs(x):
        c += (s - tt) + x
    else:
        c += (x - tt) + s
    return tt, c


# --- estimands -----------------------------------------------------------------

@dataclass(frozen=True)
class Arm:
    """Estimand Q_t(w): cumulative mean of arm w's potential outcomes."""

    w: int

    @property
    def label(self) -> str:
        return f"Q({self.w})"


@dataclass(frozen=True)
class Contrast:
    """Estimand tau_t(w, w2) = Q_t(w) - Q_t(w2)."""

    w: int
    w2: int

    @property
    def label(self) -> str:
        return f"tau({self.w},{self.w2})"


_EST_RE = re.compile(r"^\s*(?:(Q)\(\s*(\d+)\s*\)|(tau)\(\s*(\d+)\s*,\s*(\d+)\s*\))\s*$")


def parse_estimand(text: str):
    """``"Q(0)"`` -> :class:`Arm`, ``"tau(1,0)"`` -> :class:`Contrast`."""
    m = _EST_RE.match(text)
    if m is None:
        raise ValueError(f"cannot parse estimand {text!r}; use Q(w) or tau(w,w2)")
    if m.group(1):
        return Arm(int(m.group(2)))
    return Contrast(int(m.group(4)), int(m.group(5)))


# --- per-round summands -----------------------------------------------------------
#
# The scalar and array forms below must stay expression-for-expression
# identical; the streaming/batch equivalence tests depend on it.

def arm_terms(actions, probs, rewards, w):
    """Per-round ``(tau_hat_j(w), sigma_hat_j^2(w))`` arrays."""
    actions = np.asarray(actions)
    p = np.asarray(probs, dtype=np.float64)[:, w]
    y = np.asarray(rewards, dtype=np.float64)
    hit = actions == w
    tau = np.where(hit, y / p, 0.0)
    var = np.where(hit, y * y * (1.0 - p) / (p * p), 0.0)
    return tau, var


def contrast_terms(actions, probs, rewards, w, w2):
    """Per-round ``(tau_hat_j(w) - tau_hat_j(w2), sigma_hat_j^2(w, w2))`` arrays."""
    actions = np.asarray(actions)
    probs = np.asarray(probs, dtype=np.float64)
    y = np.asarray(rewards, dtype=np.float64)
    p1 = probs[:, w]
    p2 = probs[:, w2]
    hit1 = actions == w
    hit2 = actions == w2
    diff = np.where(hit1, y / p1, 0.0) - np.where(hit2, y / p2, 0.0)
    var = np.where(hit1, y * y / (p1 * p1), 0.0) + np.where(hit2, y * y / (p2 * p2), 0.0)
    return diff, var


def running_sums(terms):
    """Compensated prefix sums (entry t-1 holds the sum through round t)."""
    return kernels.compensated_cumsum(terms)


def estimate_path(actions, probs, rewards, estimand):
    """Batch estimator path: ``(t, center, S)`` arrays over rounds 1..n."""
    if isinstance(estimand, Arm):
        tau, var = arm_terms(actions, probs, rewards, estimand.w)
    else:
        tau, var = contrast_terms(actions, probs, rewards, estimand.w, estimand.w2)
    t = np.arange(1, len(tau) + 1, dtype=np.float64)
    return t, running_sums(tau) / t, running_sums(var)


# --- streaming states -------------------------------------------------------------

@dataclass(frozen=True)
class ArmEstimatorState:
    """Running sums for Q_hat_t(w) and S_t(w).

    ``sum_tau`` and ``S`` are exposed as properties; the stored pairs are the
    Neumaier running sum and its compensation term.
    """

    arm: int
    t: int = 0
    _tau: tuple = (0.0, 0.0)
    _var: tuple = (0.0, 0.0)

    @property
    def sum_tau(self) -> float:
        return self._tau[0] + self._tau[1]

    @property
    def S(self) -> float:
        return self._var[0] + self._var[1]

    @property
    def estimate(self) -> float:
        return q_hat(self)


@dataclass(frozen=True)
class ContrastEstimatorState:
    """Running sums for tau_hat_t(w, w2) and the conservative S_t(w, w2)."""

    arms: tuple
    t: int = 0
    _diff: tuple = (0.0, 0.0)
    _var: tuple = (0.0, 0.0)

    @property
    def sum_diff(self) -> float:
        return self._diff[0] + self._diff[1]

    @property
    def S(self) -> float:
        return self._var[0] + self._var[1]

    @property
    def estimate(self) -> float:
        return tau_hat(self)


def new_state(estimand):
    """Empty streaming state for an :class:`Arm` or :class:`Contrast`."""
    if isinstance(estimand, Arm):
        return ArmEstimatorState(estimand.w)
    return ContrastEstimatorState((estimand.w, estimand.w2))


def _check_next(state, obs):
    if obs.t != state.t + 1:
        raise OrderViolation(f"observation t={obs.t} cannot follow state at t={state.t}")


def update_arm(state: ArmEstimatorState, obs) -> ArmEstimatorState:
    _check_next(state, obs)
    w = state.arm
    p = obs.p[w]
    y = obs.y
    if obs.a == w:
        tau = y / p
        var = y * y * (1.0 - p) / (p * p)
    else:
        tau = var = 0.0
    return replace(state, t=state.t + 1, _tau=_neumaier(*state._tau, tau), _var=_neumaier(*state._var, var))


def _contrast_step(state, obs, y):
    _check_next(state, obs)
    w, w2 = state.arms
    p1 = obs.p[w]
    p2 = obs.p[w2]
    hit1 = obs.a == w
    hit2 = obs.a == w2
    diff = (y / p1 if hit1 else 0.0) - (y / p2 if hit2 else 0.0)
    var = (y * y / (p1 * p1) if hit1 else 0.0) + (y * y / (p2 * p2) if hit2 else 0.0)
    return replace(state, t=state.t + 1, _diff=_neumaier(*state._diff, diff), _var=_neumaier(*state._var, var))


def update_contrast(state: ContrastEstimatorState, obs) -> ContrastEstimatorState:
    return _contrast_step(state, obs, obs.y)


def update(state, obs):
    """Dispatch on state type."""
    if isinstance(state, ArmEstimatorState):
        return update_arm(state, obs)
    return update_contrast(state, obs)


def q_hat(state: ArmEstimatorState) -> float:
    if state.t == 0:
        raise EmptyState("no rounds seen yet")
    return state.sum_tau / state.t


def tau_hat(state: ContrastEstimatorState) -> float:
    if state.t == 0:
        raise EmptyState("no rounds seen yet")
    return state.sum_diff / state.t


def s_contrast(state: ContrastEstimatorState) -> float:
    if state.t == 0:
        raise EmptyState("no rounds seen yet")
    return state.S


def fold(states_or_estimand, observations):
    """Yield the state after each observation."""
    state = states_or_estimand
    if isinstance(state, (Arm, Contrast)):
        state = new_state(state)
    for obs in observations:
        state = update(state, obs)
        yield state


def true_estimands(truth, t: int, w: int, w2: int):
    """``(Q_t(w), tau_t(w, w2))`` from a simulation's potential-outcome table."""
    if not 1 <= t <= truth.horizon:
        raise OutOfRange(f"t={t} outside 1..{truth.horizon}")
    q1 = truth.Q(t, w)
    return q1, q1 - truth.Q(t, w2)
