"""searchlab: heuristic-vector best-first search with exact-arithmetic experiments."""

__version__ = "0.1.0"

from .engines import (
    CanonicalOptimalPath,
    SearchTrace,
    dijkstra_opt,
    run_astar,
    run_gbfs,
    trace_fingerprint,
)
from .errors import (
    CertificateViolation,
    ConstructionViolation,
    GenerationError,
    InfeasibleInstanceError,
    LedgerViolation,
    SearchLabError,
    TheoryViolation,
    ValidationError,
)
from .inconsistency import (
    InconsistencyReport,
    LearnerConfig,
    check_suboptimality_bound,
    empirical_inconsistency,
    inconsistency,
    minimize_empirical_inconsistency,
    verify_appendix_ledger,
)
from .instances import (
    HeuristicVector,
    InstanceDistributionSpec,
    PathInstance,
    sample_instance,
    validate,
)
from .measures import UtilityMeasure, UtilityValue, evaluate

__all__ = [
    "CanonicalOptimalPath",
    "CertificateViolation",
    "ConstructionViolation",
    "GenerationError",
    "HeuristicVector",
    "InconsistencyReport",
    "InfeasibleInstanceError",
    "InstanceDistributionSpec",
    "LearnerConfig",
    "LedgerViolation",
    "PathInstance",
    "SearchLabError",
    "SearchTrace",
    "TheoryViolation",
    "UtilityMeasure",
    "UtilityValue",
    "ValidationError",
    "check_suboptimality_bound",
    "dijkstra_opt",
    "empirical_inconsistency",
    "evaluate",
    "inconsistency",
    "minimize_empirical_inconsistency",
    "run_astar",
    "run_gbfs",
    "sample_instance",
    "trace_fingerprint",
    "validate",
    "verify_appendix_ledger",
]
