"""Model-agnostic homophily measurement and hypothesis tests for networks.

The package measures how much more densely connected nodes are inside
communities than between them, relative to overall density, and tests
whether that contrast exceeds what fitted null models (constant
probability, degree-weighted, latent-space) produce on their own.
"""

__version__ = "0.1.0"

from .errors import (
    AssignmentError,
    DegenerateInputError,
    HomotestError,
    ParseError,
    SearchSpaceError,
    ValidationError,
)
from .graph import (
    CommunityAssignment,
    Graph,
    ProbabilityMatrix,
    parse_edge_list,
    parse_labels,
    write_edge_list,
)
from .homophily import (
    HomophilyDecomposition,
    decompose,
    er_characterization_check,
    gamma,
    max_homophily_exhaustive,
    t_statistic,
)
from .detection import (
    MergeDendrogram,
    cut_dendrogram,
    detect_communities,
    modularity,
    t_local_search,
    walktrap,
    walktrap_dendrogram,
    walktrap_details,
)
from .models import (
    ChungLuParams,
    DcsbmParams,
    ErParams,
    FittedNull,
    LsmHomParams,
    LsmParams,
    SbmParams,
    expected_matrix,
    fit_chung_lu,
    fit_er,
    fit_lsm,
    fit_null,
    params_from_dict,
    planted_assignment,
    planted_for,
    sample_chung_lu,
    sample_dcsbm,
    sample_er,
    sample_lsm,
    sample_lsmhom,
    sample_sbm,
    sampler_for,
)
from .inference import (
    TestReport,
    asymptotic_test,
    asymptotic_threshold,
    bootstrap_test,
    labeled_bootstrap_test,
)
from .experiments import (
    ScenarioConfig,
    SweepResult,
    convergence_check,
    convergence_csv,
    run_scenario,
)
from .rng import normalize_rng, substream, substream_seed

__all__ = [name for name in dir() if not name.startswith("_")]
