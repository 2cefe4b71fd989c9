"""Multi-armed bandit simulation library and Monte-Carlo benchmark harness
for regimes where the action space rivals the time horizon."""

from .core import (
    ArmDistribution,
    ArmPool,
    BanditInstance,
    HardnessParams,
    MixtureArm,
    best_arm_count,
    flatten_mixture,
    hardness_alpha,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    mixture_mean,
    no_best_selection_prob,
    sample_arm,
    sample_subset,
    save_instance,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    RunTrace,
    checkpoint_steps,
    load_config,
    play,
    pseudo_regret,
    regret_decomposition,
    run_experiment,
    sweep_alpha,
    write_results,
)
from .instances import (
    LowerBoundFamilySpec,
    SyntheticSpec,
    make_lower_bound_family,
    make_synthetic,
)
from .policies import (
    AnytimePolicy,
    EmpMossPPPolicy,
    MossPolicy,
    MossPPPolicy,
    MossPPSchedule,
    ParallelPolicy,
    RandomSubsetMoss,
    make_anytime,
    make_anytime_mosspp,
    make_anytime_parallel,
    make_empmosspp,
    make_moss,
    make_mosspp,
    make_parallel,
    make_sr,
    make_subset_moss_baseline,
    moss_index,
    mosspp_schedule,
    sr_subset_size,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
