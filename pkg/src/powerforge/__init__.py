"""Monte Carlo power-analysis workbench for within-subject experiment designs."""

from .design import (
    BalanceWarning,
    Condition,
    DependentVariableMeta,
    Direction,
    ExperimentDesign,
    IndependentVariable,
    Strategy,
    TrialTable,
    balanced_latin_square,
    enumerate_conditions,
    generate_trial_table,
    required_participant_multiple,
    validate_balance,
)
from .effects import (
    GRAND,
    ConfoundSpec,
    MeanTree,
    SliderRange,
    condition_node,
    confound_contribution,
    confound_preview,
    group_node,
    slider_ranges,
)
from .errors import (
    CancelledByNewerRequest,
    InvalidMetadata,
    InvalidUpdate,
    MissingCellMean,
    PowerforgeError,
    RejectedMove,
    UnknownNode,
)
from .history import HistoryNode, HistoryTree, Snapshot, SnapshotDiff
from .session import (
    Session,
    Settings,
    TradeoffSelection,
    apply_update,
    create_session,
    load_session,
    restore_node,
    save_session,
    session_from_document,
    session_to_document,
)
from .simulate import (
    PopulationModel,
    SimulatedDataset,
    SimulationBatch,
    derive_seed,
    iter_batch,
    simulate_batch,
    simulate_dataset,
    split_seed,
)
from .stats import (
    Axis,
    LevelPair,
    MinPowerResult,
    PairwiseFrame,
    PowerCurve,
    PowerPoint,
    Tier,
    all_pairs,
    analytic_cohens_d,
    cohens_d_paired,
    min_power_pair,
    noncentral_t_cdf,
    noncentral_t_power,
    pair_differences,
    pairwise_frames,
    participant_condition_means,
    power_curve,
    simulated_power,
)

__version__ = "0.1.0"
