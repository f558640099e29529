"""ballotlab: exact and Monte Carlo analysis of ballot-type events for
mean-zero lattice random walks.

Exact constrained-path dynamic programming (rational or float arithmetic),
seeded counter-based Monte Carlo, Gaussian local approximations, closed-form
concentration bounds, and scaling scans that check the predicted growth rates
as bounded-ratio properties.
"""

from ._kernels import active_backend, compiled_available, set_backend
from .approx import (
    chernoff_binomial_bounds,
    clt_compare,
    stone_lattice_approx,
    stone_window_approx,
)
from .distributions import (
    LeveledDistribution,
    builtin,
    heavy_tower_distribution,
    tower_distribution,
    tower_f,
)
from .exactdp import (
    Constraint,
    PathLawTable,
    conditional_ballot_prob,
    conditional_second_moment,
    constrained_endpoint_law,
    endpoint_window_prob,
    positive_path_window_prob,
    positive_prefix_prob,
    spread_sup,
    stopping_time_tail,
)
from .harness import (
    BoundReport,
    counterexample_report,
    scan_ballot_ratio,
    scan_second_moment,
    scan_spread,
    scan_stopping,
)
from .montecarlo import (
    LevelDecomposition,
    McConfig,
    WalkEvent,
    chernoff_rand_check,
    decompose_path,
    estimate_conditional,
    estimate_event,
    level_summary,
    permutation_positive_prob,
    sample_level_decomposition,
)
from .walkcore import (
    LatticeInfo,
    Multiset,
    ProbResult,
    StepDistribution,
    WalkQuery,
    lattice_info,
    moment,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "Constraint", "LatticeInfo", "LevelDecomposition",
    "LeveledDistribution", "McConfig", "Multiset", "PathLawTable",
    "ProbResult", "StepDistribution", "WalkEvent", "WalkQuery",
    "active_backend", "builtin", "chernoff_binomial_bounds",
    "chernoff_rand_check", "clt_compare", "compiled_available",
    "conditional_ballot_prob", "conditional_second_moment",
    "constrained_endpoint_law", "counterexample_report", "decompose_path",
    "endpoint_window_prob", "estimate_conditional", "estimate_event",
    "heavy_tower_distribution", "lattice_info", "level_summary", "moment",
    "permutation_positive_prob", "positive_path_window_prob",
    "positive_prefix_prob", "sample_level_decomposition", "scan_ballot_ratio",
    "scan_second_moment", "scan_spread", "scan_stopping", "set_backend",
    "spread_sup", "stone_lattice_approx", "stone_window_approx",
    "stopping_time_tail", "tower_distribution", "tower_f",
]
