"""pathcutter: adaptive attack-path proposals that cut source from target.

The package plans which source-target path to show an admin each round so
that their single-edge removals disconnect the graph in as few rounds as
possible, simulates the interaction under a confidence-weighted choice
model, and serves the same loop over HTTP for a live admin.
"""

from .admin import (
    ChoiceDistribution,
    Interactive,
    SampledStream,
    Scripted,
    choice_distribution,
    resolve,
    sample_choice,
)
from .errors import (
    EnumerationOverflow,
    GenerationError,
    GraphValidationError,
    PathcutterError,
    ProtocolViolation,
    RealizationError,
    StateSpaceOverflow,
)
from .generate import (
    GeneratorConfig,
    MISCONFIG_LEVELS,
    build_reduction_gadget,
    generate_tiered_graph,
    merge_supernodes,
    preset_config,
    preset_graph,
)
from .graph import (
    AttackGraph,
    EdgeRecord,
    PathCatalog,
    enumerate_paths,
    is_connected,
    load_graph,
    min_cut,
    min_hop_paths,
    shortest_paths,
)
from .mdp import (
    QueryState,
    RewardSpec,
    StateKind,
    apply_choice,
    classify,
    feasible_actions,
    reward,
)
from .policies import (
    DprConfig,
    POLICY_KINDS,
    ProposalPolicy,
    ValueTable,
    app_step,
    dpr_solve,
    dpr_step,
    make_policy,
    marginal_gain,
    opt_solve,
    oth1_step,
    oth2_step,
    path_sampling,
    utility_g,
)
from .simulate import (
    ComparisonReport,
    Transcript,
    TrialStats,
    compare_policies,
    exhaustive_expected_queries,
    exhaustive_outcome,
    monte_carlo,
    report_to_csv,
    run_trial,
    stats_csv,
    trial_rng,
)

__version__ = "0.1.0"
