"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

from pydantic import BaseModel, Field


class NodeIn(BaseModel):
    id: str
    tier: str = Field(description="edge, fog, or cloud")
    label: str = ""


class LinkIn(BaseModel):
    src: str
    dst: str
    weight: float


class TopologyIn(BaseModel):
    nodes: list[NodeIn]
    links: list[LinkIn] = []


class AnalyzeRequest(BaseModel):
    topology: TopologyIn
    include_matrices: bool = False


class CentralityOut(BaseModel):
    degree: dict[str, float]
    eigenvector: dict[str, float]
    betweenness: dict[str, float]
    closeness: dict[str, float]


class AnalyzeResponse(BaseModel):
    node_count: int
    link_count: int
    connected: bool
    diameter: float | None = Field(description="largest finite distance; null when disconnected")
    centrality: CentralityOut
    adjacency: list[list[float]] | None = None
    laplacian: list[list[float]] | None = None


class IncidentIn(BaseModel):
    id: str
    target: str
    preconditions: list[str]
    consequences: list[str]


class VulnerabilityIn(BaseModel):
    node: str
    conditions: list[str]
    plm: float = 0.0
    fple: float = 0.0
    risk_source: str = ""
    privacy_weakness: str = ""
    feared_event: str = ""
    privacy_harm: str = ""


class ProfileRequest(BaseModel):
    topology: TopologyIn
    vulnerabilities: list[VulnerabilityIn] = []
    incidents: list[IncidentIn] = []


class RankingEntryOut(BaseModel):
    node: str
    risk: float
    plm: float
    fple: float


class AttackEdgeOut(BaseModel):
    source: str
    target: str
    action: str


class AttackPathOut(BaseModel):
    nodes: list[str]
    total_risk: float


class ProfileResponse(BaseModel):
    ranking: list[RankingEntryOut]
    best_attack_profile: AttackPathOut
    start_nodes: list[str]
    attacked_nodes: list[str]
    path_nodes: list[str]
    edges: list[AttackEdgeOut]


class BoundsIn(BaseModel):
    minimum: float = 0.1
    maximum: float = 1.0


class PreferenceIn(BaseModel):
    access_to_nodes: str
    access_frequency: str
    attacker_background_knowledge: str
    communication_medium: str
    operational_complexity: str


class EpsilonRequest(BaseModel):
    """Compute one epsilon from a distance or a preference profile."""

    bounds: BoundsIn = BoundsIn()
    distance: float | None = None
    threshold: float | None = None
    seed: int = 0
    preference: PreferenceIn | None = None


class EpsilonResponse(BaseModel):
    epsilon: float
    source: str


class SeriesItemIn(BaseModel):
    node: str
    value: float


class PlanIn(BaseModel):
    mode: str = Field(description="udp or pdp")
    epsilon: float | None = Field(default=None, description="shared epsilon for udp")
    epsilons: dict[str, float] | None = Field(
        default=None, description="per-node epsilons for pdp"
    )


class PrivatizeRequest(BaseModel):
    series: list[SeriesItemIn]
    sensitivity: float
    seed: int
    plan: PlanIn
    clamp_non_negative: bool = False


class LedgerEntryOut(BaseModel):
    node: str
    epsilon: float
    operation: str


class LedgerOut(BaseModel):
    entries: list[LedgerEntryOut]
    total: float


class PrivatizeResponse(BaseModel):
    series: list[SeriesItemIn]
    ledger: LedgerOut


class SyntheticIn(BaseModel):
    homes: int
    minutes: int
    seed: int = 0


class ConsumptionRecordIn(BaseModel):
    home_id: str
    timestamp: int
    consumption: float


class CaseIn(BaseModel):
    label: str
    eps_fog: float
    eps_cloud: float


class CompareRequest(BaseModel):
    records: list[ConsumptionRecordIn] | None = None
    synthetic: SyntheticIn | None = None
    cases: list[CaseIn]
    seeds: list[int]
    sensitivity: float
    delta: float | None = None


class LevelMetricsOut(BaseModel):
    utility: float
    mae: float
    risk: float
    loss_mean: float
    loss_std: float


class CaseResultOut(BaseModel):
    case: str
    seed: int
    fog: LevelMetricsOut
    cloud: LevelMetricsOut
    cloud_record_budget: float
    ledger_total: float


class CompareResponse(BaseModel):
    results: list[CaseResultOut]
    trends: dict[str, dict]


class HealthResponse(BaseModel):
    status: str
