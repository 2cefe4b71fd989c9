"""Instance representation, reward sampling, mixture-arm algebra and hardness math.

An instance is an ordered list of reward distributions (Bernoulli, or Gaussian
with variance fixed at 1/4 so both families are (1/4)-sub-Gaussian).  On top of
the real arms, an :class:`ArmPool` can grow "mixture arms": virtual arms that
sample one of the earlier pool entries according to a fixed weight vector.
Mixtures are flattened to a weight vector over real arms at construction time,
so sampling cost does not depend on nesting depth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

BERNOULLI = "bernoulli"
GAUSSIAN = "gaussian"
GAUSSIAN_VARIANCE = 0.25
GAUSSIAN_STDDEV = 0.5

_KIND_CODES = {BERNOULLI: 0, GAUSSIAN: 1}
_KIND_NAMES = {0: BERNOULLI, 1: GAUSSIAN}

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class ArmDistribution:
    """A single arm's reward law.

    Bernoulli arms pay {0, 1}; Gaussian arms pay N(mean, 1/4).  The variance is
    not a free parameter: it is pinned to 1/4 so that every reward is
    (1/4)-sub-Gaussian.
    """

    kind: str
    mean: float
    variance: float | None = None

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown arm kind {self.kind!r}")
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError(f"arm mean must lie in [0, 1], got {self.mean}")
        if self.kind == GAUSSIAN:
            var = GAUSSIAN_VARIANCE if self.variance is None else self.variance
            if var != GAUSSIAN_VARIANCE:
                raise ValueError(f"gaussian variance is fixed at 1/4, got {var}")
            object.__setattr__(self, "variance", GAUSSIAN_VARIANCE)
        elif self.variance is not None:
            raise ValueError("bernoulli arms take no variance parameter")


class BanditInstance:
    """Ordered real arms plus cached best-arm statistics.

    Means and kinds are held as flat numpy arrays so that instances with tens
    of thousands of arms stay cheap to build, copy and pickle.
    """

    __slots__ = ("means", "kinds", "mu_star", "best_set", "n", "m")

    def __init__(self, means, kinds):
        means = np.asarray(means, dtype=np.float64)
        if means.ndim != 1 or means.size < 1:
            raise ValueError("an instance needs at least one arm")
        if np.any(means < 0.0) or np.any(means > 1.0):
            raise ValueError("arm means must lie in [0, 1]")
        kinds = np.asarray(kinds, dtype=np.uint8)
        if kinds.shape != means.shape:
            raise ValueError("means and kinds must have equal length")
        if np.any(kinds > 1):
            raise ValueError("unknown arm kind code")
        self.means = means
        self.kinds = kinds
        self.means.setflags(write=False)
        self.kinds.setflags(write=False)
        self.mu_star = float(means.max())
        self.best_set = np.flatnonzero(means == self.mu_star)
        self.n = int(means.size)
        self.m = int(self.best_set.size)

    @classmethod
    def bernoulli(cls, means) -> "BanditInstance":
        means = np.asarray(means, dtype=np.float64)
        return cls(means, np.zeros(means.shape, dtype=np.uint8))

    @classmethod
    def gaussian(cls, means) -> "BanditInstance":
        means = np.asarray(means, dtype=np.float64)
        return cls(means, np.ones(means.shape, dtype=np.uint8))

    @classmethod
    def from_arms(cls, arms) -> "BanditInstance":
        arms = list(arms)
        means = [a.mean for a in arms]
        kinds = [_KIND_CODES[a.kind] for a in arms]
        return cls(means, kinds)

    def arm(self, i: int) -> ArmDistribution:
        kind = _KIND_NAMES[int(self.kinds[i])]
        if kind == GAUSSIAN:
            return ArmDistribution(kind, float(self.means[i]), GAUSSIAN_VARIANCE)
        return ArmDistribution(kind, float(self.means[i]))

    @property
    def arms(self) -> tuple[ArmDistribution, ...]:
        return tuple(self.arm(i) for i in range(self.n))

    def __repr__(self):
        return f"BanditInstance(n={self.n}, m={self.m}, mu_star={self.mu_star})"


@dataclass(frozen=True)
class MixtureArm:
    """Weighted mixture over earlier pool entries (real arms or mixtures)."""

    components: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("a mixture needs at least one component")
        total = 0.0
        for idx, w in self.components:
            if idx < 0:
                raise ValueError(f"negative component index {idx}")
            if w < -WEIGHT_TOL:
                raise ValueError(f"negative mixture weight {w}")
            total += w
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"mixture weights must sum to 1, got {total}")


@dataclass(frozen=True)
class HardnessParams:
    """(n, m, T) triple together with its hardness exponent alpha."""

    n: int
    m: int
    horizon: int
    alpha: float

    @classmethod
    def of(cls, n: int, m: int, horizon: int) -> "HardnessParams":
        return cls(n, m, horizon, hardness_alpha(n, m, horizon))


def hardness_alpha(n: int, m: int, horizon: int) -> float:
    """Smallest alpha >= 0 with n/m <= 2*T**alpha.

    Closed form max(0, ln(n/(2m)) / ln(T)), the exact infimum of the defining
    set.  Values above 1 are rejected: the problem family is only defined for
    alpha in [0, 1].
    """
    if m < 1 or m > n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if horizon < 2:
        raise ValueError(f"horizon must be >= 2, got {horizon}")
    alpha = math.log(n / (2.0 * m)) / math.log(horizon)
    if alpha > 1.0 + 1e-12:
        raise ValueError(
            f"hardness {alpha:.4f} exceeds 1: n={n} arms cannot be expressed "
            f"with m={m} best arms at horizon {horizon}"
        )
    return min(max(alpha, 0.0), 1.0)


def best_arm_count(n: int, horizon: int, alpha: float) -> int:
    """Number of best arms ceil(n / (2*T**alpha)), clamped to [1, n]."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if horizon < 2:
        raise ValueError(f"horizon must be >= 2, got {horizon}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    m = math.ceil(n / (2.0 * horizon**alpha))
    return min(max(m, 1), n)


def no_best_selection_prob(n: int, m: int, k: int) -> tuple[float, float]:
    """Probability that a uniform k-subset of n arms misses all m best arms.

    Returns ``(exact, bound)`` where ``exact`` is the hypergeometric product
    prod_{i<k} (n-m-i)/(n-i) and ``bound`` is exp(-m*k/n).  The exact value
    never exceeds the bound.
    """
    if m < 1 or m > n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k > n - m:
        exact = 0.0
    else:
        exact = 1.0
        for i in range(k):
            exact *= (n - m - i) / (n - i)
    bound = math.exp(-m * k / n)
    return exact, bound


def sample_subset(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform k-subset of range(n), returned as a sorted int64 array.

    Partial Fisher-Yates over a sparse swap map: exact uniformity without
    replacement at O(k) extra memory, so drawing a small subset of a huge
    arm universe never materialises range(n).
    """
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == n:
        return np.arange(n, dtype=np.int64)
    out = np.empty(k, dtype=np.int64)
    swaps: dict[int, int] = {}
    for i in range(k):
        j = int(rng.integers(i, n))
        out[i] = swaps.get(j, j)
        swaps[j] = swaps.get(i, i)
    out.sort()
    return out


class ArmPool:
    """Real arms of one instance plus any mixture arms appended during a run.

    Entry indices are stable: real arms occupy 0..n-1 in instance order and
    mixtures are appended after them.  A mixture may only reference entries
    that already exist, which makes cycles impossible.  Each mixture stores
    its flattened weight vector over real arms (support + cumulative weights),
    so sampling resolves in one binary search regardless of nesting.
    """

    def __init__(self, instance: BanditInstance):
        self.instance = instance
        self.num_real = instance.n
        self._real_means = instance.means
        self._real_kinds = instance.kinds
        self._mix_components: list[tuple[tuple[int, float], ...]] = []
        self._mix_support: list[np.ndarray] = []
        self._mix_weights: list[np.ndarray] = []
        self._mix_cum: list[np.ndarray] = []
        self._mix_means: list[float] = []

    def __len__(self) -> int:
        return self.num_real + len(self._mix_components)

    def is_mixture(self, index: int) -> bool:
        self._check(index)
        return index >= self.num_real

    def components(self, index: int) -> tuple[tuple[int, float], ...]:
        if not self.is_mixture(index):
            raise ValueError(f"entry {index} is a real arm, not a mixture")
        return self._mix_components[index - self.num_real]

    def entry_mean(self, index: int) -> float:
        """True mean of an entry; a mixture's mean is its flattened average."""
        self._check(index)
        if index < self.num_real:
            return float(self._real_means[index])
        return self._mix_means[index - self.num_real]

    def all_means(self) -> np.ndarray:
        return np.concatenate([self._real_means, np.asarray(self._mix_means)])

    def append_mixture(self, components) -> int:
        """Add a mixture over existing entries; returns its pool index."""
        arm = MixtureArm(tuple((int(i), float(w)) for i, w in components))
        here = len(self)
        acc: dict[int, float] = {}
        for idx, w in arm.components:
            if idx >= here:
                raise ValueError(
                    f"mixture component {idx} does not precede pool position {here}"
                )
            if w <= 0.0:
                continue
            if idx < self.num_real:
                acc[idx] = acc.get(idx, 0.0) + w
            else:
                mi = idx - self.num_real
                for real_idx, real_w in zip(
                    self._mix_support[mi], self._mix_weights[mi]
                ):
                    ri = int(real_idx)
                    acc[ri] = acc.get(ri, 0.0) + w * float(real_w)
        support = np.array(sorted(acc), dtype=np.int64)
        weights = np.array([acc[i] for i in support], dtype=np.float64)
        self._mix_components.append(arm.components)
        self._mix_support.append(support)
        self._mix_weights.append(weights)
        self._mix_cum.append(np.cumsum(weights))
        self._mix_means.append(float(weights @ self._real_means[support]))
        return here

    def sample(self, index: int, rng: np.random.Generator) -> float:
        """One reward draw from an entry (mixtures resolve to a real arm first)."""
        if index < 0 or index >= len(self):
            raise ValueError(f"pool index {index} out of range")
        if index >= self.num_real:
            mi = index - self.num_real
            cum = self._mix_cum[mi]
            j = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            if j >= len(cum):
                j = len(cum) - 1
            index = int(self._mix_support[mi][j])
        if self._real_kinds[index]:
            return float(rng.normal(self._real_means[index], GAUSSIAN_STDDEV))
        return 1.0 if rng.random() < self._real_means[index] else 0.0

    def _check(self, index: int):
        if index < 0 or index >= len(self):
            raise ValueError(f"pool index {index} out of range")


def sample_arm(pool: ArmPool, index: int, rng: np.random.Generator) -> float:
    return pool.sample(index, rng)


def mixture_mean(pool: ArmPool, index: int) -> float:
    """Mean of a pool entry computed by recursive expansion.

    Deliberately independent of the flattened weights cached by the pool;
    used as the oracle that the flattening is correct.
    """
    if not pool.is_mixture(index):
        return pool.entry_mean(index)
    return sum(w * mixture_mean(pool, idx) for idx, w in pool.components(index))


def flatten_mixture(pool: ArmPool, index: int) -> np.ndarray:
    """Weights over real arms equivalent to recursively sampling an entry.

    Returns a dense vector of length len(pool) with support only on real-arm
    positions.  A real arm flattens to its own one-hot vector.
    """
    out = np.zeros(len(pool))
    if not pool.is_mixture(index):
        out[index] = 1.0
        return out
    mi = index - pool.num_real
    out[pool._mix_support[mi]] = pool._mix_weights[mi]
    return out


def instance_to_dict(instance: BanditInstance) -> dict:
    arms = []
    for i in range(instance.n):
        kind = _KIND_NAMES[int(instance.kinds[i])]
        entry: dict = {"kind": kind, "mean": float(instance.means[i])}
        if kind == GAUSSIAN:
            entry["variance"] = GAUSSIAN_VARIANCE
        arms.append(entry)
    return {"arms": arms}


def instance_from_dict(data: dict) -> BanditInstance:
    try:
        arms = data["arms"]
    except (TypeError, KeyError):
        raise ValueError("instance JSON must be an object with an 'arms' list")
    if not isinstance(arms, list) or not arms:
        raise ValueError("'arms' must be a non-empty list")
    means = np.empty(len(arms))
    kinds = np.empty(len(arms), dtype=np.uint8)
    for i, entry in enumerate(arms):
        try:
            kind = entry["kind"]
            means[i] = float(entry["mean"])
        except (TypeError, KeyError) as exc:
            raise ValueError(f"arm {i}: each arm needs 'kind' and 'mean' ({exc})")
        if kind not in _KIND_CODES:
            raise ValueError(f"arm {i}: unknown kind {kind!r}")
        kinds[i] = _KIND_CODES[kind]
        var = entry.get("variance")
        if kind == GAUSSIAN and var is not None and var != GAUSSIAN_VARIANCE:
            raise ValueError(f"arm {i}: gaussian variance is fixed at 1/4")
    return BanditInstance(means, kinds)


def save_instance(instance: BanditInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh, separators=(",", ":"))
        fh.write("\n")


def load_instance(path) -> BanditInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
