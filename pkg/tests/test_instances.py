import math
from collections import Counter

import numpy as np
import pytest

from bandit_bench.core import best_arm_count, hardness_alpha
from bandit_bench.instances import (
    LowerBoundFamilySpec,
    SyntheticSpec,
    make_lower_bound_family,
    make_synthetic,
)


# ---------------------------------------------------------------------------
# synthetic family


def test_synthetic_benchmark_scale_layout():
    spec = SyntheticSpec(n=20000, horizon=50000, alpha=0.25)
    inst = make_synthetic(spec)
    assert inst.n == 20000
    assert inst.m == 669
    assert inst.mu_star == 0.9
    ladder_counts = Counter(inst.means[669:].tolist())
    assert set(ladder_counts) == {0.1, 0.2, 0.3, 0.4, 0.5}
    # 19331 arms over 5 levels: sizes differ by at most one
    assert max(ladder_counts.values()) - min(ladder_counts.values()) <= 1
    assert min(ladder_counts.values()) == 3866


def test_synthetic_alpha_zero_small():
    inst = make_synthetic(SyntheticSpec(n=4, horizon=100, alpha=0.0))
    assert inst.m == 2  # ceil(4/2)


def test_synthetic_hardness_never_exceeds_alpha():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 5000))
        horizon = int(rng.integers(2, 100_000))
        alpha = float(rng.uniform(0, 1))
        inst = make_synthetic(SyntheticSpec(n=n, horizon=horizon, alpha=alpha))
        assert inst.m == best_arm_count(n, horizon, alpha)
        assert hardness_alpha(inst.n, inst.m, horizon) <= alpha + 1e-9
        assert np.all(inst.means >= 0.0) and np.all(inst.means <= 1.0)


def test_synthetic_near_optimal_band():
    spec = SyntheticSpec(n=100, horizon=1000, alpha=0.3, epsilon=0.05)
    inst = make_synthetic(spec)
    m = best_arm_count(100, 1000, 0.3)
    band = inst.means[:m]
    assert band.max() == 0.9
    assert band.min() >= 0.9 - 0.05 - 1e-12
    assert len(np.unique(band)) == m  # spread, not tied


def test_synthetic_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(n=0, horizon=100, alpha=0.5)
    with pytest.raises(ValueError):
        SyntheticSpec(n=10, horizon=100, alpha=1.5)
    with pytest.raises(ValueError):
        SyntheticSpec(n=10, horizon=100, alpha=0.5, best_mean=0.4)  # below ladder
    with pytest.raises(ValueError):
        SyntheticSpec(n=10, horizon=100, alpha=0.5, epsilon=-0.1)
    with pytest.raises(ValueError):
        SyntheticSpec(n=10, horizon=100, alpha=0.5, best_mean=1.2)


# ---------------------------------------------------------------------------
# lower-bound family


def test_family_small_fixture():
    spec = LowerBoundFamilySpec(horizon=100, alpha=0.5, alpha_prime=0.0, m=2)
    assert spec.k_groups == 9
    assert spec.m0 == 20
    assert spec.n == 38
    family = make_lower_bound_family(spec)
    assert len(family) == 10
    assert spec.n / spec.m0 <= 2 * 100**0.0
    assert spec.n / spec.m <= 2 * 100**0.5


def test_family_instance_zero_layout():
    spec = LowerBoundFamilySpec(horizon=100, alpha=0.5, alpha_prime=0.0, m=2, delta=0.5)
    family = make_lower_bound_family(spec)
    base = family[0]
    assert base.mu_star == 0.25  # delta / 2
    assert list(base.best_set) == list(range(20))
    assert np.all(base.kinds == 1)  # gaussian


def test_family_alternative_instance_layout():
    spec = LowerBoundFamilySpec(horizon=100, alpha=0.5, alpha_prime=0.0, m=2, delta=0.5)
    family = make_lower_bound_family(spec)
    third = family[3]
    assert third.mu_star == 0.5
    assert list(third.best_set) == [20 + 2 * 2, 20 + 2 * 2 + 1]  # group S_3
    assert third.m == 2
    # S_0 keeps its delta/2 bump in every alternative instance
    assert np.all(third.means[:20] == 0.25)


def test_family_rejects_small_k():
    with pytest.raises(ValueError):
        make_lower_bound_family(
            LowerBoundFamilySpec(horizon=4, alpha=0.5, alpha_prime=0.0, m=1)
        )


def test_family_spec_validation():
    with pytest.raises(ValueError):
        LowerBoundFamilySpec(horizon=100, alpha=0.3, alpha_prime=0.5, m=1)
    with pytest.raises(ValueError):
        LowerBoundFamilySpec(horizon=100, alpha=0.5, alpha_prime=0.0, m=0)
    with pytest.raises(ValueError):
        LowerBoundFamilySpec(horizon=100, alpha=0.5, alpha_prime=0.0, m=1, delta=1.5)


def test_family_structural_conditions_random_draws():
    rng = np.random.default_rng(1)
    checked = 0
    while checked < 50:
        horizon = int(rng.integers(30, 400))
        alpha = float(rng.uniform(0.4, 1.0))
        alpha_prime = float(rng.uniform(0.0, alpha - 0.1))
        m = int(rng.integers(1, 4))
        spec = LowerBoundFamilySpec(
            horizon=horizon, alpha=alpha, alpha_prime=alpha_prime, m=m
        )
        if spec.k_groups < 2:
            continue
        family = make_lower_bound_family(spec)
        K, m0, n = spec.k_groups, spec.m0, spec.n
        assert n == m0 + K * m
        assert n / m0 <= 2 * horizon**alpha_prime + 1e-9
        assert n / m <= 2 * horizon**alpha + 1e-9
        assert len(family) == K + 1
        assert family[0].m == m0
        assert all(inst.m == m for inst in family[1:])
        checked += 1
