"""Replicated-experiment runner.

Executes (instance x policy x replication) grids, turns traces into cumulative
pseudo-regret curves, aggregates mean/std across replications and persists
everything in a long-form CSV plus a summary JSON.

Determinism contract: the random stream of a replication is derived solely
from ``base_seed XOR replication_index``, so any execution order -- including
running replications in parallel worker processes -- produces results
identical to a sequential run.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ArmPool,
    BanditInstance,
    hardness_alpha,
    load_instance,
)
from .instances import LowerBoundFamilySpec, SyntheticSpec, make_lower_bound_family, make_synthetic
from .policies import (
    make_anytime_mosspp,
    make_anytime_parallel,
    make_empmosspp,
    make_moss,
    make_mosspp,
    make_parallel,
    make_sr,
    make_subset_moss_baseline,
)

CSV_HEADER = "policy,alpha,beta,T,n,m,replication,t,cum_regret"
DEFAULT_CHECKPOINTS = 100


class ConfigError(ValueError):
    """Raised for malformed or out-of-range experiment configuration."""


@dataclass
class RunTrace:
    """Per-step record of one policy run.

    ``chosen_means`` holds the true mean of the chosen pool entry (a mixture
    arm contributes its mixture mean), which is what pseudo-regret is built
    from; realized rewards are kept for diagnostics only.
    """

    choices: np.ndarray
    rewards: np.ndarray
    chosen_means: np.ndarray

    def __len__(self) -> int:
        return len(self.choices)


def play(pool: ArmPool, policy, horizon: int, rng: np.random.Generator) -> RunTrace:
    """Drive one policy for exactly ``horizon`` choose/observe steps."""
    choices = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon)
    policy.reset(pool)
    sample = pool.sample
    choose = policy.choose
    observe = policy.observe
    for t in range(horizon):
        a = choose()
        r = sample(a, rng)
        observe(a, r)
        choices[t] = a
        rewards[t] = r
    chosen_means = pool.all_means()[choices]
    return RunTrace(choices, rewards, chosen_means)


def pseudo_regret(trace: RunTrace, mu_star: float) -> np.ndarray:
    """Cumulative sums of (mu_star - mean of chosen arm), one value per step."""
    return np.cumsum(mu_star - trace.chosen_means)


def regret_decomposition(
    trace: RunTrace, subset, mu_star: float, arm_means
) -> tuple[float, float]:
    """Split final pseudo-regret into approximation and learning error.

    For a policy confined to ``subset``: approximation = T*(mu_star - mu_S)
    with mu_S the best true mean inside the subset, learning = T*mu_S minus
    the sum of chosen means.  The two parts add up to the final pseudo-regret
    exactly.
    """
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise ValueError("subset must be non-empty")
    arm_means = np.asarray(arm_means)
    mu_s = float(arm_means[subset].max())
    horizon = len(trace)
    approximation = horizon * (mu_star - mu_s)
    learning = horizon * mu_s - float(trace.chosen_means.sum())
    return approximation, learning


def checkpoint_steps(horizon: int, count: int = DEFAULT_CHECKPOINTS) -> np.ndarray:
    """Persisted time steps: ``count`` evenly spaced checkpoints plus the final step."""
    if horizon <= count:
        return np.arange(1, horizon + 1, dtype=np.int64)
    steps = np.unique(np.round(np.linspace(1, horizon, count)).astype(np.int64))
    if steps[-1] != horizon:
        steps = np.append(steps, horizon)
    return steps


# ---------------------------------------------------------------------------
# Configuration


_POLICY_KEYS = {
    "moss": set(),
    "sr": {"alpha"},
    "mosspp": {"beta"},
    "empmosspp": {"beta"},
    "parallel": {"mu_star_mode", "delta"},
    "subset_moss": {"exponent"},
    "anytime_mosspp": {"beta"},
    "anytime_parallel": {"mu_star_mode", "delta"},
}

_INSTANCE_KEYS = {
    "synthetic": {"n", "alpha", "best_mean", "suboptimal_means", "epsilon"},
    "fixture": {"path"},
    "lower_bound": {"alpha", "alpha_prime", "m", "delta"},
}

_TOP_KEYS = {
    "instance",
    "policies",
    "horizon",
    "replications",
    "base_seed",
    "alpha_grid",
    "out",
    "checkpoints",
}


@dataclass
class ExperimentConfig:
    instance: dict
    policies: list[dict]
    horizon: int
    replications: int
    base_seed: int = 2024
    alpha_grid: list[float] | None = None
    out: str | None = None
    checkpoints: int = DEFAULT_CHECKPOINTS


def _check_keys(given: dict, allowed: set, where: str):
    unknown = sorted(set(given) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")


def validate_policy_spec(spec: dict, position: int) -> dict:
    where = f"policies[{position}]"
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: policy entries must be objects")
    name = spec.get("name")
    if name not in _POLICY_KEYS:
        raise ConfigError(
            f"{where}: unknown policy name {name!r}; choose from "
            f"{sorted(_POLICY_KEYS)}"
        )
    _check_keys(spec, _POLICY_KEYS[name] | {"name", "label"}, where)
    beta = spec.get("beta", 0.5)
    if name in ("mosspp", "empmosspp", "anytime_mosspp") and not 0.5 <= beta <= 1.0:
        raise ConfigError(f"{where}: beta must lie in [1/2, 1], got {beta}")
    if name == "subset_moss":
        exponent = spec.get("exponent")
        if exponent is None or not 0.0 <= exponent <= 1.0:
            raise ConfigError(f"{where}: exponent must lie in [0, 1], got {exponent}")
    if name == "sr":
        alpha = spec.get("alpha")
        if alpha is not None and not 0.0 <= alpha <= 1.0:
            raise ConfigError(f"{where}: alpha must lie in [0, 1] or be null, got {alpha}")
    if name in ("parallel", "anytime_parallel"):
        mode = spec.get("mu_star_mode", "exact")
        if mode not in ("exact", "perturbed"):
            raise ConfigError(f"{where}: mu_star_mode must be 'exact' or 'perturbed'")
        if mode == "perturbed" and "delta" not in spec:
            raise ConfigError(f"{where}: perturbed mu_star_mode needs a delta")
    return spec


def validate_instance_spec(spec: dict) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError("instance must be an object")
    kind = spec.get("type")
    if kind not in _INSTANCE_KEYS:
        raise ConfigError(
            f"instance: unknown type {kind!r}; choose from {sorted(_INSTANCE_KEYS)}"
        )
    _check_keys(spec, _INSTANCE_KEYS[kind] | {"type"}, "instance")
    if kind == "synthetic":
        for key in ("n", "alpha"):
            if key not in spec:
                raise ConfigError(f"instance: synthetic spec needs '{key}'")
    if kind == "fixture" and "path" not in spec:
        raise ConfigError("instance: fixture spec needs 'path'")
    if kind == "lower_bound":
        for key in ("alpha", "alpha_prime", "m"):
            if key not in spec:
                raise ConfigError(f"instance: lower_bound spec needs '{key}'")
    return spec


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    _check_keys(data, _TOP_KEYS, "config")
    for key in ("instance", "policies", "horizon", "replications"):
        if key not in data:
            raise ConfigError(f"config: missing required key '{key}'")
    instance = validate_instance_spec(data["instance"])
    policies = data["policies"]
    if not isinstance(policies, list) or not policies:
        raise ConfigError("config: 'policies' must be a non-empty list")
    policies = [validate_policy_spec(p, i) for i, p in enumerate(policies)]
    labels = [policy_label(p) for p in policies]
    if len(set(labels)) != len(labels):
        raise ConfigError(
            "config: duplicate policy labels; set an explicit 'label' to disambiguate"
        )
    horizon = data["horizon"]
    if not isinstance(horizon, int) or horizon < 2:
        raise ConfigError(f"config: horizon must be an integer >= 2, got {horizon}")
    replications = data["replications"]
    if not isinstance(replications, int) or replications < 1:
        raise ConfigError(
            f"config: replications must be an integer >= 1, got {replications}"
        )
    base_seed = data.get("base_seed", 2024)
    if not isinstance(base_seed, int) or base_seed < 0:
        raise ConfigError(f"config: base_seed must be a non-negative integer")
    alpha_grid = data.get("alpha_grid")
    if alpha_grid is not None:
        if not isinstance(alpha_grid, list) or not all(
            isinstance(a, (int, float)) and 0.0 <= a <= 1.0 for a in alpha_grid
        ):
            raise ConfigError("config: alpha_grid must be a list of values in [0, 1]")
    checkpoints = data.get("checkpoints", DEFAULT_CHECKPOINTS)
    if not isinstance(checkpoints, int) or checkpoints < 1:
        raise ConfigError("config: checkpoints must be a positive integer")
    return ExperimentConfig(
        instance=instance,
        policies=policies,
        horizon=horizon,
        replications=replications,
        base_seed=base_seed,
        alpha_grid=list(alpha_grid) if alpha_grid is not None else None,
        out=data.get("out"),
        checkpoints=checkpoints,
    )


def load_config(path) -> ExperimentConfig:
    text_path = os.fspath(path)
    if text_path.endswith(".toml"):
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        # TOML cannot express null: the string "instance" marks oracle mode.
        for pspec in data.get("policies", []):
            if isinstance(pspec, dict) and pspec.get("alpha") == "instance":
                pspec["alpha"] = None
    elif text_path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        raise ConfigError(f"config file must end in .toml or .json: {text_path}")
    return parse_config(data)


def policy_label(spec: dict) -> str:
    return spec.get("label", spec["name"])


def policy_beta(spec: dict) -> float | None:
    if spec["name"] in ("mosspp", "empmosspp", "anytime_mosspp"):
        return float(spec.get("beta", 0.5))
    return None


def build_instance(spec: dict, horizon: int) -> BanditInstance:
    kind = spec["type"]
    if kind == "synthetic":
        return make_synthetic(synthetic_spec(spec, horizon))
    if kind == "fixture":
        return load_instance(spec["path"])
    raise ConfigError(f"instance type {spec['type']!r} cannot be run directly")


def synthetic_spec(spec: dict, horizon: int, alpha: float | None = None) -> SyntheticSpec:
    kwargs = {}
    if "best_mean" in spec:
        kwargs["best_mean"] = float(spec["best_mean"])
    if "suboptimal_means" in spec:
        kwargs["suboptimal_means"] = tuple(spec["suboptimal_means"])
    if "epsilon" in spec:
        kwargs["epsilon"] = float(spec["epsilon"])
    return SyntheticSpec(
        n=int(spec["n"]),
        horizon=horizon,
        alpha=float(spec["alpha"] if alpha is None else alpha),
        **kwargs,
    )


def instance_alpha(spec: dict, instance: BanditInstance, horizon: int) -> float:
    """Hardness value recorded in outputs: the declared alpha when the spec
    carries one, otherwise the exact hardness of the loaded instance."""
    if spec["type"] == "synthetic":
        return float(spec["alpha"])
    return hardness_alpha(instance.n, instance.m, horizon)


def resolve_mu_star(spec: dict, instance: BanditInstance) -> float:
    mode = spec.get("mu_star_mode", "exact")
    if mode == "exact":
        return instance.mu_star
    return float(np.clip(instance.mu_star + float(spec["delta"]), 0.0, 1.0))


def build_policy(spec: dict, horizon: int, instance: BanditInstance, rng):
    name = spec["name"]
    if name == "moss":
        return make_moss(range(instance.n), horizon)
    if name == "sr":
        alpha = spec.get("alpha")
        if alpha is None:
            alpha = hardness_alpha(instance.n, instance.m, horizon)
        return make_sr(horizon, float(alpha), instance.n, rng)
    if name == "mosspp":
        return make_mosspp(horizon, float(spec.get("beta", 0.5)), rng)
    if name == "empmosspp":
        return make_empmosspp(horizon, float(spec.get("beta", 0.5)), rng)
    if name == "parallel":
        return make_parallel(horizon, resolve_mu_star(spec, instance), rng)
    if name == "subset_moss":
        return make_subset_moss_baseline(horizon, float(spec["exponent"]), rng)
    if name == "anytime_mosspp":
        return make_anytime_mosspp(float(spec.get("beta", 0.5)), rng)
    if name == "anytime_parallel":
        return make_anytime_parallel(resolve_mu_star(spec, instance), rng)
    raise ConfigError(f"unknown policy name {name!r}")


# ---------------------------------------------------------------------------
# Execution


@dataclass
class PolicyResult:
    """Aggregated curves of one (policy, alpha) cell."""

    policy: str
    alpha: float
    beta: float | None
    horizon: int
    n: int
    m: int
    steps: np.ndarray
    curves: np.ndarray  # (replications, len(steps)) pseudo-regret checkpoints
    realized_final: np.ndarray  # (replications,) T*mu_star - sum(rewards)

    @property
    def mean(self) -> np.ndarray:
        return self.curves.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.curves.std(axis=0)

    @property
    def final_mean(self) -> float:
        return float(self.curves[:, -1].mean())

    @property
    def final_std(self) -> float:
        return float(self.curves[:, -1].std())


@dataclass
class ExperimentResult:
    base_seed: int
    replications: int
    entries: list[PolicyResult] = field(default_factory=list)

    def entry(self, policy: str, alpha: float | None = None) -> PolicyResult:
        for e in self.entries:
            if e.policy == policy and (alpha is None or e.alpha == alpha):
                return e
        raise KeyError(f"no result entry for policy={policy!r}, alpha={alpha!r}")


def replication_seed(base_seed: int, replication: int) -> int:
    """Seed of one replication: base_seed XOR replication index."""
    return base_seed ^ replication


def _run_one(task) -> tuple[np.ndarray, float]:
    pspec, instance, horizon, seed, steps = task
    rng = np.random.default_rng(seed)
    policy = build_policy(pspec, horizon, instance, rng)
    pool = ArmPool(instance)
    trace = play(pool, policy, horizon, rng)
    curve = pseudo_regret(trace, instance.mu_star)
    realized = horizon * instance.mu_star - float(trace.rewards.sum())
    return curve[steps - 1], realized


def _run_cells(cells, config: ExperimentConfig, threads: int) -> list[PolicyResult]:
    """Run every (alpha, instance, policy) cell for all replications.

    Tasks are generated in a fixed order and results folded back by position,
    so worker-pool scheduling cannot change the output.
    """
    steps = checkpoint_steps(config.horizon, config.checkpoints)
    tasks = []
    for alpha, instance in cells:
        for pspec in config.policies:
            for rep in range(config.replications):
                tasks.append(
                    (
                        pspec,
                        instance,
                        config.horizon,
                        replication_seed(config.base_seed, rep),
                        steps,
                    )
                )
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run_one, tasks, chunksize=1))
    else:
        outcomes = [_run_one(t) for t in tasks]

    entries = []
    pos = 0
    for alpha, instance in cells:
        for pspec in config.policies:
            block = outcomes[pos : pos + config.replications]
            pos += config.replications
            curves = np.vstack([c for c, _ in block])
            realized = np.array([r for _, r in block])
            entries.append(
                PolicyResult(
                    policy=policy_label(pspec),
                    alpha=float(alpha),
                    beta=policy_beta(pspec),
                    horizon=config.horizon,
                    n=instance.n,
                    m=instance.m,
                    steps=steps,
                    curves=curves,
                    realized_final=realized,
                )
            )
    return entries


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the configured policies on one instance, all replications."""
    instance = build_instance(config.instance, config.horizon)
    alpha = instance_alpha(config.instance, instance, config.horizon)
    entries = _run_cells([(alpha, instance)], config, threads)
    return ExperimentResult(config.base_seed, config.replications, entries)


def sweep_alpha(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the policy list once per alpha_grid value.

    Each grid point rebuilds the synthetic instance with the number of best
    arms implied by that alpha at the configured horizon.
    """
    if not config.alpha_grid:
        raise ConfigError("config: alpha_grid must be a non-empty list for sweeps")
    if config.instance["type"] != "synthetic":
        raise ConfigError("config: sweeps need a synthetic instance spec")
    cells = []
    for alpha in config.alpha_grid:
        spec = synthetic_spec(config.instance, config.horizon, alpha=alpha)
        cells.append((alpha, make_synthetic(spec)))
    entries = _run_cells(cells, config, threads)
    return ExperimentResult(config.base_seed, config.replications, entries)


# ---------------------------------------------------------------------------
# Persistence


def write_results_csv(path, result: ExperimentResult) -> None:
    """Long-form CSV: policy,alpha,beta,T,n,m,replication,t,cum_regret."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for e in result.entries:
            beta_txt = repr(float(e.beta)) if e.beta is not None else ""
            alpha_txt = repr(float(e.alpha))
            prefix = f"{e.policy},{alpha_txt},{beta_txt},{e.horizon},{e.n},{e.m}"
            for rep in range(e.curves.shape[0]):
                row = e.curves[rep]
                for j, step in enumerate(e.steps):
                    fh.write(f"{prefix},{rep},{step},{repr(float(row[j]))}\n")


def write_summary_json(path, result: ExperimentResult) -> None:
    rows = []
    for e in result.entries:
        rows.append(
            {
                "policy": e.policy,
                "alpha": float(e.alpha),
                "final_mean": e.final_mean,
                "final_std": e.final_std,
                "final_realized_mean": float(e.realized_final.mean()),
                "replications": result.replications,
                "seed": result.base_seed,
            }
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump({"results": rows}, fh, indent=2)
        fh.write("\n")


def write_results(result: ExperimentResult, out_dir) -> tuple[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    summary_path = os.path.join(out_dir, "summary.json")
    write_results_csv(csv_path, result)
    write_summary_json(summary_path, result)
    return csv_path, summary_path


def read_results_csv(path) -> list[dict]:
    """Parse a results CSV back into row dicts (numbers converted)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append(
                {
                    "policy": parts[0],
                    "alpha": float(parts[1]),
                    "beta": float(parts[2]) if parts[2] else None,
                    "T": int(parts[3]),
                    "n": int(parts[4]),
                    "m": int(parts[5]),
                    "replication": int(parts[6]),
                    "t": int(parts[7]),
                    "cum_regret": float(parts[8]),
                }
            )
    return rows


def export_fixture(spec: dict, horizon: int, out_path) -> list[str]:
    """Write generator output(s) as instance fixture JSON.

    Synthetic and fixture specs produce one file; a lower_bound spec produces
    one file per family member inside ``out_path`` treated as a directory.
    Returns the list of written paths.
    """
    from .core import save_instance

    kind = spec["type"]
    if kind == "lower_bound":
        family_spec = LowerBoundFamilySpec(
            horizon=horizon,
            alpha=float(spec["alpha"]),
            alpha_prime=float(spec["alpha_prime"]),
            m=int(spec["m"]),
            delta=float(spec.get("delta", 0.5)),
        )
        family = make_lower_bound_family(family_spec)
        os.makedirs(out_path, exist_ok=True)
        paths = []
        for i, inst in enumerate(family):
            path = os.path.join(out_path, f"instance_{i:03d}.json")
            save_instance(inst, path)
            paths.append(path)
        return paths
    instance = build_instance(spec, horizon)
    parent = os.path.dirname(os.fspath(out_path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    save_instance(instance, out_path)
    return [os.fspath(out_path)]
