"""Simulator and optimizer for downlink multi-waveguide pinching-antenna
systems under line-of-sight blockages."""

from .channel import (
    SPEED_OF_LIGHT,
    ChannelTensor,
    RadioConstants,
    Scatterer,
    build_channel_tensor,
    effective_channel,
    los_component,
    mixed_channel,
    nlos_component,
)
from .experiments import (
    ExperimentConfig,
    OracleReport,
    SummaryRow,
    TrialResult,
    aggregate,
    emit_csv,
    emit_plot,
    run_oracle_compare,
    run_sweep,
    run_trial,
)
from .geometry import Blockage, Region, Vec3, los_indicator, segment_blocked
from .matching import (
    LOS_DISTANCE,
    SUM_RATE,
    AlgorithmStats,
    Matching,
    PreferencePolicy,
    SwapCandidate,
    apply_swap,
    certify_stable,
    exhaustive_search,
    is_swap_blocking,
    run_swap_matching,
)
from .rate import PowerBudget, RateReport, dbm_to_watts, sum_rate, user_rate
from .scenario import (
    Scenario,
    ScenarioConfig,
    build_scenario,
    default_scenario,
    derive_trial_seed,
    fixed_center_variant,
    random_baseline,
)

__version__ = "0.1.0"
