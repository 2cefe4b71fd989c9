"""Instance generators: the synthetic benchmark family and a two-level
adversarial family used to stress-test adaptivity across hardness levels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BanditInstance, best_arm_count, hardness_alpha


@dataclass(frozen=True)
class SyntheticSpec:
    """Bernoulli benchmark family: m best arms over a fixed suboptimal ladder.

    With epsilon > 0 the best arms are spread evenly over
    [best_mean - epsilon, best_mean] instead of sitting at a single value
    (a near-optimal band rather than exact ties).
    """

    n: int
    horizon: int
    alpha: float
    best_mean: float = 0.9
    suboptimal_means: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    epsilon: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        means = (self.best_mean,) + tuple(self.suboptimal_means)
        if any(not 0.0 <= mu <= 1.0 for mu in means):
            raise ValueError("all means must lie in [0, 1]")
        if self.suboptimal_means and self.best_mean <= max(self.suboptimal_means):
            raise ValueError("best_mean must exceed every suboptimal mean")
        if self.best_mean - self.epsilon < 0.0:
            raise ValueError("epsilon drops the near-optimal band below 0")


def make_synthetic(spec: SyntheticSpec) -> BanditInstance:
    """Instance with best_arm_count(n, T, alpha) best arms.

    Best arms come first, then the remaining arms cycle round-robin through
    the suboptimal ladder so every level gets an even share.
    """
    m = best_arm_count(spec.n, spec.horizon, spec.alpha)
    if spec.epsilon > 0.0 and m > 1:
        best = np.linspace(spec.best_mean, spec.best_mean - spec.epsilon, m)
    else:
        best = np.full(m, spec.best_mean)
    ladder = spec.suboptimal_means
    if spec.n > m and not ladder:
        raise ValueError(
            f"{spec.n - m} suboptimal arms requested but the ladder is empty"
        )
    rest = [ladder[j % len(ladder)] for j in range(spec.n - m)] if ladder else []
    return BanditInstance.bernoulli(np.concatenate([best, np.asarray(rest)]))


@dataclass(frozen=True)
class LowerBoundFamilySpec:
    """Parameters of the K+1 Gaussian instances with two candidate best sets.

    Derived layout: K = floor(T**alpha) - 1 (must be >= 2),
    m0 = m * ceil(T**(alpha - alpha_prime)), n = m0 + K*m.
    """

    horizon: int
    alpha: float
    alpha_prime: float
    m: int
    delta: float = 0.5

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")
        if not 0.0 <= self.alpha_prime < self.alpha <= 1.0:
            raise ValueError(
                f"need 0 <= alpha_prime < alpha <= 1, got "
                f"alpha_prime={self.alpha_prime}, alpha={self.alpha}"
            )
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")

    @property
    def k_groups(self) -> int:
        return math.floor(self.horizon**self.alpha) - 1

    @property
    def m0(self) -> int:
        return self.m * math.ceil(self.horizon ** (self.alpha - self.alpha_prime))

    @property
    def n(self) -> int:
        return self.m0 + self.k_groups * self.m


def make_lower_bound_family(spec: LowerBoundFamilySpec) -> list[BanditInstance]:
    """K+1 Gaussian(., 1/4) instances on a shared index layout.

    Group S_0 holds the first m0 indices, groups S_1..S_K the next m each.
    Instance 0 pays delta/2 on S_0 and 0 elsewhere; instance i >= 1
    additionally pays delta on S_i.  Instance 0 therefore has hardness at most
    alpha_prime while every other instance has hardness at most alpha; both
    facts are asserted before returning.
    """
    K = spec.k_groups
    if K < 2:
        raise ValueError(
            f"derived K={K} < 2: horizon**alpha too small "
            f"(horizon={spec.horizon}, alpha={spec.alpha})"
        )
    m0, m, n = spec.m0, spec.m, spec.n
    base = np.zeros(n)
    base[:m0] = spec.delta / 2.0
    family = [BanditInstance.gaussian(base)]
    for i in range(1, K + 1):
        means = base.copy()
        lo = m0 + (i - 1) * m
        means[lo : lo + m] = spec.delta
        family.append(BanditInstance.gaussian(means))

    if hardness_alpha(n, m0, spec.horizon) > spec.alpha_prime + 1e-9:
        raise AssertionError("instance 0 fell outside its hardness family")
    if hardness_alpha(n, m, spec.horizon) > spec.alpha + 1e-9:
        raise AssertionError("alternative instances fell outside their hardness family")
    return family
