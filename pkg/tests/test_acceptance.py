"""Acceptance suite.

One test per acceptance criterion, each printing a PASS line with its key
numbers (run with ``pytest tests/test_acceptance.py -s`` to watch them live;
on failures pytest replays the captured output).  Desk-scale Monte-Carlo
checks pin base_seed 2024, so every run of this suite sees identical numbers.
"""

import hashlib
import json
import math
import os
import time

import numpy as np
import pytest

from bandit_bench.cli import main as cli_main
from bandit_bench.core import (
    ArmPool,
    BanditInstance,
    hardness_alpha,
    no_best_selection_prob,
    sample_subset,
)
from bandit_bench.harness import (
    build_policy,
    play,
    pseudo_regret,
    regret_decomposition,
)
from bandit_bench.instances import (
    LowerBoundFamilySpec,
    SyntheticSpec,
    make_lower_bound_family,
    make_synthetic,
)
from bandit_bench.ingest import load_ratings, means_to_instance, ratings_to_means
from bandit_bench.policies import ParallelPolicy, make_sr, make_subset_moss_baseline, mosspp_schedule

BASE_SEED = 2024
CONTEST_CSV = os.environ.get("BANDIT_BENCH_CONTEST_CSV", "data/contest_652.csv")


def mean_final_regrets(policy_spec, instance, horizon, replications, base_seed=BASE_SEED):
    finals = np.empty(replications)
    for rep in range(replications):
        rng = np.random.default_rng(base_seed ^ rep)
        policy = build_policy(policy_spec, horizon, instance, rng)
        trace = play(ArmPool(instance), policy, horizon, rng)
        finals[rep] = pseudo_regret(trace, instance.mu_star)[-1]
    return finals


# ---------------------------------------------------------------------------
# criterion: subset-miss probability is exact and dominated by its bound


def test_subset_miss_probability_dominance_and_sampling():
    started = time.time()
    for n in range(1, 61):
        for m in range(1, n + 1):
            for k in range(0, n + 1):
                exact, bound = no_best_selection_prob(n, m, k)
                assert exact <= bound + 1e-12, (n, m, k)

    rng = np.random.default_rng(BASE_SEED)
    draws, miss = 100_000, 0
    for _ in range(draws):
        if sample_subset(10, 3, rng)[0] > 1:  # sorted: best arms {0,1} absent
            miss += 1
    p_exact, _ = no_best_selection_prob(10, 2, 3)
    se = math.sqrt(p_exact * (1 - p_exact) / draws)
    observed = miss / draws
    assert abs(observed - p_exact) < 3 * se

    elapsed = time.time() - started
    assert elapsed < 10.0
    print(
        f"\nACCEPTANCE PASS: subset-miss probability exact<=bound on the 60-arm grid; "
        f"sampled miss rate {observed:.5f} vs exact {p_exact:.5f} ({elapsed:.1f}s)"
    )


# ---------------------------------------------------------------------------
# criterion: MOSS stays inside the published envelope (and a tight one)


def test_moss_mean_regret_within_envelopes():
    started = time.time()
    horizon, reps = 10_000, 100
    ladder = [0.1, 0.2, 0.3, 0.4, 0.5]
    means = [0.9] + [ladder[j % 5] for j in range(9)]
    instance = BanditInstance.bernoulli(means)
    finals = mean_final_regrets({"name": "moss"}, instance, horizon, reps)
    mean_final = float(finals.mean())
    minimax_envelope = 18 * math.sqrt(10 * horizon)
    assert mean_final <= minimax_envelope
    assert mean_final <= 300.0
    elapsed = time.time() - started
    assert elapsed < 30.0
    print(
        f"\nACCEPTANCE PASS: MOSS mean final regret {mean_final:.1f} <= 300 "
        f"(envelope {minimax_envelope:.0f}, {elapsed:.1f}s)"
    )


# ---------------------------------------------------------------------------
# criterion: schedule fixtures


def test_schedule_fixtures():
    s = mosspp_schedule(50_000, 0.5)
    assert s.p == 8
    assert s.subset_sizes == (512, 256, 128, 64, 32, 16, 8, 4)
    assert s.block_lengths == (512, 1024, 2048, 4096, 8192, 16384, 32768, 50000)
    parallel = ParallelPolicy(50_000, 0.9, np.random.default_rng(0))
    assert parallel.p == 11
    print("\nACCEPTANCE PASS: iteration schedule and 11-subroutine fixtures exact")


# ---------------------------------------------------------------------------
# criterion: hardness-sweep ordering at desk scale


DESK_T = 20_000
DESK_N = 8_000
DESK_REPS = 50
DESK_ALPHAS = (0.1, 0.3, 0.5, 0.7)
DESK_POLICIES = {
    "moss": {"name": "moss"},
    "mosspp": {"name": "mosspp", "beta": 0.5},
    "empmosspp": {"name": "empmosspp", "beta": 0.5},
    "subset_moss": {"name": "subset_moss", "exponent": 0.347},
}


@pytest.fixture(scope="module")
def desk_grid():
    grid = {}
    for alpha in DESK_ALPHAS:
        instance = make_synthetic(SyntheticSpec(n=DESK_N, horizon=DESK_T, alpha=alpha))
        for label, spec in DESK_POLICIES.items():
            grid[(label, alpha)] = mean_final_regrets(spec, instance, DESK_T, DESK_REPS)
    return grid


def test_hardness_ordering_across_policies(desk_grid):
    started = time.time()
    means = {key: float(f.mean()) for key, f in desk_grid.items()}
    stds = {key: float(f.std()) for key, f in desk_grid.items()}
    print("\ndesk-scale grid (mean final regret over 50 replications):")
    for alpha in DESK_ALPHAS:
        row = "  ".join(
            f"{label}={means[(label, alpha)]:8.1f}" for label in DESK_POLICIES
        )
        print(f"  alpha={alpha}: {row}")

    violations = []
    # (i) plain MOSS carries the largest mean regret at every hardness level
    for alpha in DESK_ALPHAS:
        for label in ("mosspp", "empmosspp", "subset_moss"):
            if means[("moss", alpha)] <= means[(label, alpha)]:
                violations.append(
                    f"(i) moss {means[('moss', alpha)]:.1f} not above "
                    f"{label} {means[(label, alpha)]:.1f} at alpha={alpha}"
                )
    # (ii) the adaptive policies beat the fixed-exponent proxy once alpha >= 0.3
    for alpha in (0.3, 0.5, 0.7):
        for label in ("mosspp", "empmosspp"):
            if not means[(label, alpha)] < means[("subset_moss", alpha)]:
                violations.append(
                    f"(ii) {label} {means[(label, alpha)]:.1f} not below "
                    f"subset_moss {means[('subset_moss', alpha)]:.1f} at alpha={alpha}"
                )
    # (iii) per policy, mean regret non-decreasing in alpha within 1 pooled std
    for label in DESK_POLICIES:
        for lo, hi in zip(DESK_ALPHAS, DESK_ALPHAS[1:]):
            pooled = math.sqrt(
                (stds[(label, lo)] ** 2 + stds[(label, hi)] ** 2) / 2.0
            )
            if means[(label, hi)] < means[(label, lo)] - pooled:
                violations.append(
                    f"(iii) {label} decreases from alpha={lo} "
                    f"({means[(label, lo)]:.1f}) to alpha={hi} "
                    f"({means[(label, hi)]:.1f}) beyond 1 pooled std ({pooled:.1f})"
                )

    elapsed = time.time() - started
    assert not violations, "; ".join(violations)
    print(f"ACCEPTANCE PASS: desk-scale ordering (i)-(iii) hold ({elapsed:.0f}s)")


# ---------------------------------------------------------------------------
# criterion: Parallel regret scaling across horizons


def test_parallel_regret_scaling_with_horizon():
    started = time.time()
    horizons = (4_000, 16_000, 64_000)
    reps = 30
    report = []
    for alpha in (0.2, 0.5):
        ratios = {}
        for horizon in horizons:
            n = round(0.4 * horizon)  # keep the arms-to-horizon ratio of the benchmark
            instance = make_synthetic(SyntheticSpec(n=n, horizon=horizon, alpha=alpha))
            finals = mean_final_regrets(
                {"name": "parallel"}, instance, horizon, reps
            )
            ratios[horizon] = float(finals.mean()) / horizon ** ((1 + alpha) / 2)
        scale_const = ratios[horizons[0]] / math.log(horizons[0]) ** 2
        for horizon in horizons[1:]:
            allowance = scale_const * math.log(horizon) ** 2
            assert ratios[horizon] <= allowance, (
                f"alpha={alpha}, T={horizon}: normalised regret {ratios[horizon]:.3f} "
                f"exceeds (ln T)^2 growth allowance {allowance:.3f}"
            )
        report.append(
            f"alpha={alpha}: " + ", ".join(f"r({T})={ratios[T]:.2f}" for T in horizons)
        )
    elapsed = time.time() - started
    print(
        "\nACCEPTANCE PASS: Parallel regret grows no faster than (ln T)^2 * T^((1+a)/2); "
        + "; ".join(report)
        + f" ({elapsed:.0f}s)"
    )


# ---------------------------------------------------------------------------
# criterion: approximation + learning error equals final pseudo-regret


def test_decomposition_identity_on_random_subset_traces():
    rng = np.random.default_rng(BASE_SEED)
    worst = 0.0
    for trial in range(1000):
        n = int(rng.integers(3, 30))
        horizon = int(rng.integers(10, 150))
        instance = BanditInstance.bernoulli(rng.uniform(0.0, 1.0, n))
        if trial % 2 == 0:
            policy = make_subset_moss_baseline(
                horizon, float(rng.uniform(0, 1)), np.random.default_rng(trial)
            )
        else:
            policy = make_sr(
                horizon, float(rng.uniform(0, 1)), n, np.random.default_rng(trial)
            )
        trace = play(ArmPool(instance), policy, horizon, rng)
        approx, learning = regret_decomposition(
            trace, policy.subset, instance.mu_star, instance.means
        )
        final = pseudo_regret(trace, instance.mu_star)[-1]
        worst = max(worst, abs(approx + learning - final))
    assert worst < 1e-9
    print(
        f"\nACCEPTANCE PASS: regret decomposition identity on 1000 subset traces "
        f"(worst defect {worst:.2e})"
    )


# ---------------------------------------------------------------------------
# criterion: CLI determinism


def test_cli_rerun_hash_identical(tmp_path, capsys):
    config = {
        "instance": {"type": "synthetic", "n": 40, "alpha": 0.4},
        "policies": [
            {"name": "moss"},
            {"name": "mosspp", "beta": 0.5},
            {"name": "parallel"},
            {"name": "subset_moss", "exponent": 0.347},
        ],
        "horizon": 400,
        "replications": 3,
        "base_seed": BASE_SEED,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    digests = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        assert cli_main(["run", "--config", str(config_path), "--out", str(out_dir)]) == 0
        digests.append(
            {
                p.name: hashlib.sha256(p.read_bytes()).hexdigest()
                for p in sorted(out_dir.iterdir())
            }
        )
    capsys.readouterr()
    assert digests[0] == digests[1]
    print(
        f"\nACCEPTANCE PASS: repeated CLI run hash-identical "
        f"({len(digests[0])} files)"
    )


# ---------------------------------------------------------------------------
# criterion: ratings ingestion pipeline


def test_ratings_pipeline_fixture(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text("id,stars1,stars2,stars3\na,2,1,1\nb,3,1,1\nc,4,0,1\n")
    table = load_ratings(path)
    means, m = ratings_to_means(table, threshold=0.8)
    # raw fractions {0.5, 0.4, 0.2} -> normalised {1.0, 0.8, 0.4} -> {1, 1, 0.4}
    assert means.tolist() == pytest.approx([1.0, 1.0, 0.4])
    assert m == 2
    instance = means_to_instance(means)
    assert (instance.n, instance.m, instance.mu_star) == (3, 2, 1.0)
    print("\nACCEPTANCE PASS: 3-item ratings fixture yields means (1, 1, 0.4), m=2")


def test_ratings_pipeline_real_export():
    if not os.path.exists(CONTEST_CSV):
        pytest.skip(f"real ratings export not present at {CONTEST_CSV}")
    table = load_ratings(CONTEST_CSV)
    means, m = ratings_to_means(table)
    instance = means_to_instance(means)
    assert instance.n == 10025
    assert m == 54
    alpha = hardness_alpha(instance.n, m, 100_000)
    assert alpha == pytest.approx(0.43, abs=0.02)
    print(f"\nACCEPTANCE PASS: real ratings export n={instance.n} m={m} alpha={alpha:.3f}")


# ---------------------------------------------------------------------------
# criterion: two-level family conditions


def test_two_level_family_conditions():
    rng = np.random.default_rng(BASE_SEED)
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
        checked += 1
    print("\nACCEPTANCE PASS: two-level family conditions hold on 50 random draws")
