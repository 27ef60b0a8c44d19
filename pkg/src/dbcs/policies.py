"""Adaptive allocation rules that generate the logged propensities.

Two rules are shipped:

``uniform``
    ``1/K`` every round.
``mean-proportional``
    Uniform for the first ``ceil(explore_fraction * T)`` rounds, then each
    arm's probability is proportional to its sample mean so far.  Means are
    floored at ``mean_floor`` first (the raw rule is undefined for
    non-positive means), and the result is water-filled so every entry is at
    least ``p_floor``.

The probability arithmetic lives in :mod:`dbcs._kernels_py` and is shared
with the compiled batch kernel, so streaming and batch runs agree exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ._kernels_py import MEAN_PROPORTIONAL, UNIFORM, mean_proportional_probs, sample_index
from .errors import ConfigError


class PolicyKind(str, Enum):
    UNIFORM = "uniform"
    MEAN_PROPORTIONAL = "mean-proportional"

    @property
    def code(self) -> int:
        return UNIFORM if self is PolicyKind.UNIFORM else MEAN_PROPORTIONAL


@dataclass(frozen=True)
class PolicyConfig:
    """Policy parameters.

    Parameters
    ----------
    kind : PolicyKind
    horizon : int
        Planned number of rounds ``T``; sets the exploration length.
    explore_fraction : float
        Fraction of ``T`` spent on uniform exploration, in (0, 1].
    p_floor : float
        Minimum propensity of every arm; ``K * p_floor`` must stay below 1.
    mean_floor : float, optional
        Floor applied to sample means before normalizing.  ``None`` selects
        ``0.05 * max(1, max_w |mean_w|)`` recomputed each round.
    """

    kind: PolicyKind = PolicyKind.MEAN_PROPORTIONAL
    horizon: int = 1
    explore_fraction: float = 0.1
    p_floor: float = 0.01
    mean_floor: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if not isinstance(self.horizon, (int, np.integer)) or self.horizon < 0:
            raise ConfigError("horizon", f"must be a non-negative integer, got {self.horizon!r}")
        if not 0.0 < self.explore_fraction <= 1.0:
            raise ConfigError("explore_fraction", f"must lie in (0, 1], got {self.explore_fraction!r}")
        if self.kind is PolicyKind.MEAN_PROPORTIONAL and self.horizon > 0 and self.explore_fraction * self.horizon < 1:
            raise ConfigError("explore_fraction", "explore_fraction * horizon must be at least 1")
        if not 0.0 < self.p_floor < 1.0:
            raise ConfigError("p_floor", f"must lie in (0, 1), got {self.p_floor!r}")
        if self.mean_floor is not None and not self.mean_floor > 0:
            raise ConfigError("mean_floor", f"must be positive, got {self.mean_floor!r}")

    @property
    def n_explore(self) -> int:
        # round() guards against 0.1 * 700 = 70.00000000000001
        return math.ceil(round(self.explore_fraction * self.horizon, 9))

    @property
    def mean_floor_code(self) -> float:
        return -1.0 if self.mean_floor is None else float(self.mean_floor)

    def check_arms(self, K: int) -> None:
        if K * self.p_floor >= 1.0:
            raise ConfigError("p_floor", f"K * p_floor = {K * self.p_floor!r} must be below 1")


@dataclass
class PolicyState:
    """Per-arm pull counts and reward sums, plus the policy's RNG stream."""

    K: int
    rng: Optional[np.random.Generator] = None
    counts: list = field(default_factory=list)
    sums: list = field(default_factory=list)
    rounds: int = 0

    def __post_init__(self):
        if not self.counts:
            self.counts = [0] * self.K
        if not self.sums:
            self.sums = [0.0] * self.K

    def record(self, action: int, reward: float) -> None:
        self.sums[action] += reward
        self.counts[action] += 1
        self.rounds += 1


def action_probs(state: PolicyState, cfg: PolicyConfig) -> tuple:
    """Propensity vector for round ``state.rounds + 1``."""
    K = state.K
    if cfg.kind is PolicyKind.UNIFORM or state.rounds + 1 <= cfg.n_explore:
        return tuple([1.0 / K] * K)
    return tuple(mean_proportional_probs(state.sums, state.counts, cfg.p_floor, cfg.mean_floor_code))


def sample_action(probs, rng: np.random.Generator) -> int:
    """Categorical draw by inverting the cumulative sum at one uniform."""
    return sample_index(probs, rng.random())
