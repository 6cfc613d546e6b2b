"""Grid privacy analysis: attack-graph vulnerability profiling and
personalized differential privacy for smart-grid consumption data."""

from .attack_graph import (
    AttackEdge,
    AttackIncident,
    AttackPath,
    SvplEntry,
    SvplRanking,
    Vaag,
    VulnerabilityProfile,
    VulnerabilityRecord,
    best_attack_profile,
    build_vaag,
    generate_vulnerability_profile,
    rank_svpl,
    risk_score,
)
from .evaluation import (
    CaseSpec,
    EvaluationReport,
    LossDistribution,
    UtilityReport,
    compare_cases,
    disclosure_risk,
    four_case_grid,
    loss_distribution,
    mae,
    utility,
)
from .ingestion import (
    AggregationMap,
    ConsumptionDataset,
    ConsumptionRecord,
    aggregate,
    generate_synthetic,
    load_csv,
    write_csv,
)
from .privacy import (
    AssignmentMode,
    AssignmentSource,
    BudgetLedger,
    EpsilonAssignment,
    EpsilonBounds,
    Level,
    NoiseParams,
    NoiseStream,
    PrivacyPreference,
    assign_from_distance,
    assign_from_preference,
    compose,
    epsilon_from_distance,
    epsilon_from_preference,
    laplace_sample,
    privatize,
    privatize_series,
)
from .topology import (
    CentralityScores,
    GridTopology,
    LinkRecord,
    NodeRecord,
    Tier,
    adjacency_matrix,
    build_topology,
    centrality_scores,
    diameter,
    laplacian_matrix,
    shortest_distance,
    shortest_distances_from,
)

__version__ = "0.1.0"
