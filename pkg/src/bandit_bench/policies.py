"""Bandit policies behind one choose/observe interface.

Every policy follows the same protocol: ``reset(pool)`` binds it to an arm
pool, then ``choose()`` and ``observe(index, reward)`` strictly alternate,
once per time step.  Policies see arm identities and rewards only -- never
true means -- with the single exception of Parallel, which is handed the best
mean as side information.

All tie-breaking goes to the lowest pool index so that runs are reproducible
bit for bit given the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ArmPool, sample_subset


def moss_index(mean_hat: float, s: int, t_moss: int, k: int) -> float:
    """Optimistic index for an arm pulled s times under budget t_moss over k arms.

    Unpulled arms get +inf so each arm is tried once.  The exploration width
    sqrt(log+(T/(K*s)) / s) is the 1-sub-Gaussian width sqrt(4*log+/s) scaled
    for rewards with variance proxy 1/4.
    """
    if s == 0:
        return math.inf
    return mean_hat + math.sqrt(max(0.0, math.log(t_moss / (k * s))) / s)


class MossPolicy:
    """Index policy over a fixed arm set with a fixed pull budget.

    ``priors`` maps pool index -> (count, mean) and warm-starts the per-arm
    statistics; arms without a prior start unpulled.
    """

    def __init__(self, arm_set, horizon: int, priors=None):
        arm_set = sorted(int(a) for a in arm_set)
        if not arm_set:
            raise ValueError("MOSS needs a non-empty arm set")
        if len(set(arm_set)) != len(arm_set):
            raise ValueError("duplicate entries in arm set")
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self.arm_set = arm_set
        self.horizon = horizon
        self.k = len(arm_set)
        self._slot = {a: i for i, a in enumerate(arm_set)}
        self._priors = dict(priors) if priors else None
        self.counts: list[int] = []
        self.means: list[float] = []
        self.index: np.ndarray | None = None

    def reset(self, pool: ArmPool):
        self.counts = [0] * self.k
        self.means = [0.0] * self.k
        self.index = np.full(self.k, np.inf)
        if self._priors:
            for arm, (count, mean) in self._priors.items():
                i = self._slot[arm]
                if count > 0:
                    self.counts[i] = int(count)
                    self.means[i] = float(mean)
                    self.index[i] = moss_index(mean, count, self.horizon, self.k)

    def choose(self) -> int:
        return self.arm_set[int(np.argmax(self.index))]

    def observe(self, index: int, reward: float):
        i = self._slot[index]
        c = self.counts[i] + 1
        self.counts[i] = c
        mu = self.means[i] + (reward - self.means[i]) / c
        self.means[i] = mu
        log_term = math.log(self.horizon / (self.k * c))
        self.index[i] = mu + math.sqrt(log_term / c) if log_term > 0.0 else mu


def make_moss(arm_set, horizon: int) -> MossPolicy:
    return MossPolicy(arm_set, horizon)


def sr_subset_size(horizon: int, alpha: float, n: int) -> int:
    """Subset size min(ceil(2*T**alpha * ln(sqrt(T))), T, n) for one subroutine."""
    if horizon < 2:
        raise ValueError(f"horizon must be >= 2, got {horizon}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    size = math.ceil(2.0 * horizon**alpha * math.log(math.sqrt(horizon)))
    return min(size, horizon, n)


class RandomSubsetMoss:
    """MOSS restricted to a uniform random subset of the real arms.

    The subset is drawn at reset time from the policy's own generator, so a
    given seed always yields the same subset and hence the same trace.
    """

    def __init__(self, horizon: int, subset_size: int | None, rng, n_arms=None):
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self.horizon = horizon
        self.subset_size = subset_size
        self.rng = rng
        self.n_arms = n_arms
        self.subset: np.ndarray | None = None
        self._moss: MossPolicy | None = None

    def _resolve_size(self, n: int) -> int:
        return self.subset_size if self.subset_size is not None else n

    def reset(self, pool: ArmPool):
        n = pool.num_real
        if self.n_arms is not None and self.n_arms != n:
            raise ValueError(
                f"policy was sized for {self.n_arms} arms but pool has {n}"
            )
        size = min(self._resolve_size(n), n)
        if size < 1:
            raise ValueError("subset size must be at least 1")
        self.subset = sample_subset(n, size, self.rng)
        self._moss = MossPolicy(self.subset.tolist(), self.horizon)
        self._moss.reset(pool)

    def choose(self) -> int:
        return self._moss.choose()

    def observe(self, index: int, reward: float):
        self._moss.observe(index, reward)


def make_sr(horizon: int, alpha: float, instance_size: int, rng) -> RandomSubsetMoss:
    """Subroutine: MOSS on a uniform subset sized for hardness level alpha."""
    size = sr_subset_size(horizon, alpha, instance_size)
    return RandomSubsetMoss(horizon, size, rng, n_arms=instance_size)


def make_subset_moss_baseline(
    horizon: int, exponent: float, rng, n_arms=None
) -> RandomSubsetMoss:
    """MOSS on a uniform subset of cardinality ceil(T**exponent), capped at n."""
    if not 0.0 <= exponent <= 1.0:
        raise ValueError(f"exponent must lie in [0, 1], got {exponent}")
    size = math.ceil(horizon**exponent)
    return RandomSubsetMoss(horizon, size, rng, n_arms=n_arms)


@dataclass(frozen=True)
class MossPPSchedule:
    """Iteration layout: p rounds with subset sizes K_i and lengths dT_i.

    p = ceil(log2(T**beta)), K_i = 2**(p+2-i), dT_i = min(2**(p+i), T).
    The lengths always sum to at least T, so a run of horizon T finishes
    within p iterations.
    """

    horizon: int
    beta: float
    p: int
    subset_sizes: tuple[int, ...]
    block_lengths: tuple[int, ...]


def mosspp_schedule(horizon: int, beta: float) -> MossPPSchedule:
    if horizon < 2:
        raise ValueError(f"horizon must be >= 2, got {horizon}")
    if not 0.5 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [1/2, 1], got {beta}")
    # The tiny nudge keeps ceil() stable when beta*log2(T) lands on an integer
    # up to float rounding (e.g. T a power of two).
    p = math.ceil(beta * math.log2(horizon) - 1e-12)
    p = max(p, 1)
    sizes = tuple(2 ** (p + 2 - i) for i in range(1, p + 1))
    lengths = tuple(min(2 ** (p + i), horizon) for i in range(1, p + 1))
    return MossPPSchedule(horizon, beta, p, sizes, lengths)


class MossPPPolicy:
    """Iterated MOSS over shrinking random subsets plus mixture-arm summaries.

    Each iteration i restarts MOSS on K_i fresh uniformly drawn real arms
    together with the mixture arms built from every previous iteration.  When
    an iteration ends, its empirical pull frequencies become a new mixture arm
    appended to the pool.  The run stops after exactly T pulls, truncating the
    final iteration; a truncated iteration still contributes a mixture arm
    built from its partial frequencies (it is never consumed, but keeping the
    bookkeeping uniform costs nothing).
    """

    def __init__(self, horizon: int, beta: float, rng):
        self.schedule = mosspp_schedule(horizon, beta)
        self.horizon = horizon
        self.beta = beta
        self.rng = rng

    def reset(self, pool: ArmPool):
        self.pool = pool
        self.t = 0
        self.iteration = 0
        self.own_mixtures: list[int] = []
        self.iteration_pulls: list[int] = []
        self.iteration_sets: list[list[int]] = []
        self._moss: MossPolicy | None = None
        self._iter_counts: dict[int, int] = {}
        self._iter_done = 0
        self._iter_budget = 0
        self._start_iteration()

    def _real_arms_for_iteration(self, i: int, k_real: int) -> list[int]:
        return sample_subset(self.pool.num_real, k_real, self.rng).tolist()

    def _warm_priors(self, arm_set):
        return None

    def _start_iteration(self):
        self.iteration += 1
        i = self.iteration
        k_real = min(self.schedule.subset_sizes[i - 1], self.pool.num_real)
        arm_set = self._real_arms_for_iteration(i, k_real) + self.own_mixtures
        block = self.schedule.block_lengths[i - 1]
        self._iter_budget = min(block, self.horizon - self.t)
        self._iter_done = 0
        self._iter_counts = {}
        # The inner MOSS is budgeted with the scheduled block length; the
        # global horizon may cut the block short but the index stays tuned to
        # the planned length.
        self._moss = MossPolicy(arm_set, block, priors=self._warm_priors(arm_set))
        self._moss.reset(self.pool)
        self.iteration_sets.append(list(self._moss.arm_set))

    def _finish_iteration(self):
        total = self._iter_done
        components = [
            (arm, count / total) for arm, count in sorted(self._iter_counts.items())
        ]
        mix_idx = self.pool.append_mixture(components)
        self.own_mixtures.append(mix_idx)
        self.iteration_pulls.append(total)
        if self.t < self.horizon and self.iteration < self.schedule.p:
            self._start_iteration()
        else:
            self._moss = None

    def choose(self) -> int:
        if self._moss is None:
            raise RuntimeError("budget exhausted: no pulls left to schedule")
        return self._moss.choose()

    def observe(self, index: int, reward: float):
        self._moss.observe(index, reward)
        self._record(index, reward)
        self._iter_counts[index] = self._iter_counts.get(index, 0) + 1
        self._iter_done += 1
        self.t += 1
        if self._iter_done >= self._iter_budget or self.t >= self.horizon:
            self._finish_iteration()

    def _record(self, index: int, reward: float):
        pass


def make_mosspp(horizon: int, beta: float, rng) -> MossPPPolicy:
    return MossPPPolicy(horizon, beta, rng)


class EmpMossPPPolicy(MossPPPolicy):
    """MOSS++ variant that reuses statistics and exploits empirical leaders.

    Two changes relative to the base schedule: (a) per-arm counts and means
    persist across iterations in a global registry that warm-starts each
    iteration's MOSS state, and (b) from the second iteration on, the real
    arms of S_i are the K_i arms with the highest recorded empirical mean
    (ties to the lowest index), topped up with fresh uniform draws from the
    unobserved arms when fewer than K_i have been observed.  Iteration 1 draws
    uniformly, exactly like the base policy.
    """

    def reset(self, pool: ArmPool):
        self._reg_counts: dict[int, int] = {}
        self._reg_means: dict[int, float] = {}
        super().reset(pool)

    def _real_arms_for_iteration(self, i: int, k_real: int) -> list[int]:
        n = self.pool.num_real
        if i == 1:
            return sample_subset(n, k_real, self.rng).tolist()
        observed = [a for a in self._reg_counts if a < n]
        observed.sort(key=lambda a: (-self._reg_means[a], a))
        chosen = observed[:k_real]
        missing = k_real - len(chosen)
        if missing > 0:
            seen = set(chosen)
            unobserved = [a for a in range(n) if a not in seen and a not in self._reg_counts]
            picks = sample_subset(len(unobserved), missing, self.rng)
            chosen.extend(unobserved[int(j)] for j in picks)
        return chosen

    def _warm_priors(self, arm_set):
        priors = {}
        for arm in arm_set:
            c = self._reg_counts.get(arm, 0)
            if c > 0:
                priors[arm] = (c, self._reg_means[arm])
        return priors or None

    def _record(self, index: int, reward: float):
        c = self._reg_counts.get(index, 0) + 1
        self._reg_counts[index] = c
        prev = self._reg_means.get(index, 0.0)
        self._reg_means[index] = prev + (reward - prev) / c

    def registry_count(self, index: int) -> int:
        return self._reg_counts.get(index, 0)

    def registry_mean(self, index: int) -> float:
        return self._reg_means[index]


def make_empmosspp(horizon: int, beta: float, rng) -> EmpMossPPPolicy:
    return EmpMossPPPolicy(horizon, beta, rng)


class ParallelPolicy:
    """Scheduler over ceil(ln T) subroutines given the best mean as input.

    Subroutine i is a random-subset MOSS sized for hardness level i/p with
    budget T.  Time is split into blocks of ceil(sqrt(T)) pulls; each block
    resumes the subroutine whose empirical regret T_i*mu_star - sum(rewards_i)
    is currently smallest (ties to the lowest subroutine index).  The final
    block is truncated so the run takes exactly T pulls.
    """

    def __init__(self, horizon: int, mu_star: float, rng):
        if horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {horizon}")
        if not 0.0 <= mu_star <= 1.0:
            raise ValueError(f"mu_star must lie in [0, 1], got {mu_star}")
        self.horizon = horizon
        self.mu_star = mu_star
        self.rng = rng
        self.p = max(math.ceil(math.log(horizon)), 1)
        self.block = math.ceil(math.sqrt(horizon))

    def reset(self, pool: ArmPool):
        n = pool.num_real
        self.subroutines = [
            make_sr(self.horizon, i / self.p, n, self.rng)
            for i in range(1, self.p + 1)
        ]
        for sub in self.subroutines:
            sub.reset(pool)
        self.pull_counts = [0] * self.p
        self.reward_sums = [0.0] * self.p
        self.regret_hat = [0.0] * self.p
        self.t = 0
        self.current = -1
        self._block_left = 0
        self.block_log: list[tuple[int, int, tuple[float, ...]]] = []

    def choose(self) -> int:
        if self._block_left == 0:
            k = min(range(self.p), key=self.regret_hat.__getitem__)
            self.current = k
            self._block_left = min(self.block, self.horizon - self.t)
            self.block_log.append((self.t, k, tuple(self.regret_hat)))
        return self.subroutines[self.current].choose()

    def observe(self, index: int, reward: float):
        k = self.current
        self.subroutines[k].observe(index, reward)
        self.pull_counts[k] += 1
        self.reward_sums[k] += reward
        self.regret_hat[k] = self.pull_counts[k] * self.mu_star - self.reward_sums[k]
        self._block_left -= 1
        self.t += 1


def make_parallel(horizon: int, mu_star: float, rng) -> ParallelPolicy:
    return ParallelPolicy(horizon, mu_star, rng)


class UniformRandomPolicy:
    """Uniform random pulls over the real arms; the 1-round fallback."""

    def __init__(self, rng):
        self.rng = rng

    def reset(self, pool: ArmPool):
        self._n = pool.num_real

    def choose(self) -> int:
        return int(self.rng.integers(self._n))

    def observe(self, index: int, reward: float):
        pass


class AnytimePolicy:
    """Doubling wrapper: restart a fixed-horizon policy on segments 1, 2, 4, ...

    Segment i instantiates a fresh inner policy with horizon 2**i and runs it
    for exactly 2**i pulls (the caller may stop earlier).  No state carries
    across segments.
    """

    def __init__(self, builder):
        self.builder = builder

    def reset(self, pool: ArmPool):
        self.pool = pool
        self.segment = -1
        self.segments: list[int] = []
        self._seg_left = 0
        self._inner = None

    def choose(self) -> int:
        if self._seg_left == 0:
            self.segment += 1
            length = 2**self.segment
            self._inner = self.builder(length)
            self._inner.reset(self.pool)
            self._seg_left = length
            self.segments.append(0)
        return self._inner.choose()

    def observe(self, index: int, reward: float):
        self._inner.observe(index, reward)
        self._seg_left -= 1
        self.segments[-1] += 1


def make_anytime(builder) -> AnytimePolicy:
    """Anytime version of a fixed-horizon policy family.

    ``builder(horizon)`` must return a fresh policy for that horizon.  Inner
    algorithms need horizon >= 2, so builders from the convenience factories
    below fall back to a single uniform random pull for the 1-round segment.
    """
    return AnytimePolicy(builder)


def make_anytime_mosspp(beta: float, rng) -> AnytimePolicy:
    def builder(horizon: int):
        if horizon < 2:
            return UniformRandomPolicy(rng)
        return MossPPPolicy(horizon, beta, rng)

    return AnytimePolicy(builder)


def make_anytime_parallel(mu_star: float, rng) -> AnytimePolicy:
    def builder(horizon: int):
        if horizon < 2:
            return UniformRandomPolicy(rng)
        return ParallelPolicy(horizon, mu_star, rng)

    return AnytimePolicy(builder)
