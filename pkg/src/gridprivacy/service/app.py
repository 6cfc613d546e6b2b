"""HTTP service exposing the core analysis and privatization operations.

Run with ``uvicorn gridprivacy.service.app:app``. Domain validation errors
map to 400, convergence/structure failures to 500; payload shape problems
are FastAPI's usual 422.
"""
from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..attack_graph import (
    AttackIncident,
    VulnerabilityRecord,
    best_attack_profile,
    build_vaag,
    rank_svpl,
)
from ..errors import ComputationError, ValidationError
from ..evaluation import CaseSpec, compare_cases, default_reidentification_window
from ..ingestion import (
    AggregationMap,
    ConsumptionRecord,
    dataset_from_records,
    generate_synthetic,
)
from ..privacy import (
    AssignmentSource,
    BudgetLedger,
    EpsilonAssignment,
    EpsilonBounds,
    Level,
    NoiseStream,
    PrivacyPreference,
    epsilon_from_distance,
    epsilon_from_preference,
    privatize_series,
)
from ..topology import (
    LinkRecord,
    NodeRecord,
    Tier,
    adjacency_matrix,
    build_topology,
    centrality_scores,
    diameter,
    laplacian_matrix,
    shortest_distances_from,
)
from . import schemas

app = FastAPI(
    title="gridprivacy",
    description="Topology analytics, vulnerability profiling, and "
    "personalized differential privacy for consumption data.",
)


@app.exception_handler(ValidationError)
async def _validation_handler(request: Request, error: ValidationError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(error)})


@app.exception_handler(ComputationError)
async def _computation_handler(request: Request, error: ComputationError) -> JSONResponse:
    return JSONResponse(status_code=500, content={"detail": str(error)})


def _build_topology(payload: schemas.TopologyIn):
    nodes = [NodeRecord(n.id, Tier.parse(n.tier), n.label) for n in payload.nodes]
    links = [LinkRecord(link.src, link.dst, link.weight) for link in payload.links]
    return build_topology(nodes, links)


@app.get("/health", response_model=schemas.HealthResponse)
async def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok")


@app.post("/topology/analyze", response_model=schemas.AnalyzeResponse)
async def analyze_topology(request: schemas.AnalyzeRequest) -> schemas.AnalyzeResponse:
    topology = _build_topology(request.topology)
    scores = centrality_scores(topology)
    connected = not any(
        math.isinf(value)
        for node_id in topology.node_ids
        for value in shortest_distances_from(topology, node_id).values()
    )
    return schemas.AnalyzeResponse(
        node_count=topology.n,
        link_count=len(topology.links),
        connected=connected,
        diameter=diameter(topology) if connected else None,
        centrality=schemas.CentralityOut(
            degree=dict(scores.degree),
            eigenvector=dict(scores.eigenvector),
            betweenness=dict(scores.betweenness),
            closeness=dict(scores.closeness),
        ),
        adjacency=adjacency_matrix(topology).tolist() if request.include_matrices else None,
        laplacian=laplacian_matrix(topology).tolist() if request.include_matrices else None,
    )


@app.post("/profile/rank", response_model=schemas.ProfileResponse)
async def rank_profile(request: schemas.ProfileRequest) -> schemas.ProfileResponse:
    topology = _build_topology(request.topology)
    records = [
        VulnerabilityRecord(
            node=v.node,
            conditions=frozenset(v.conditions),
            plm=v.plm,
            fple=v.fple,
            risk_source=v.risk_source,
            privacy_weakness=v.privacy_weakness,
            feared_event=v.feared_event,
            privacy_harm=v.privacy_harm,
        )
        for v in request.vulnerabilities
    ]
    incidents = [
        AttackIncident(
            id=i.id,
            target=i.target,
            preconditions=frozenset(i.preconditions),
            consequences=frozenset(i.consequences),
        )
        for i in request.incidents
    ]
    vaag = build_vaag(topology, records, incidents)
    ranking = rank_svpl(vaag)
    best = best_attack_profile(vaag)
    return schemas.ProfileResponse(
        ranking=[
            schemas.RankingEntryOut(node=e.node, risk=e.risk, plm=e.plm, fple=e.fple)
            for e in ranking.entries
        ],
        best_attack_profile=schemas.AttackPathOut(
            nodes=list(best.nodes), total_risk=best.total_risk
        ),
        start_nodes=list(vaag.start_nodes),
        attacked_nodes=list(vaag.attacked_nodes),
        path_nodes=list(vaag.path_nodes),
        edges=[
            schemas.AttackEdgeOut(source=e.source, target=e.target, action=e.action)
            for e in vaag.edges
        ],
    )


@app.post("/privacy/epsilon", response_model=schemas.EpsilonResponse)
async def compute_epsilon(request: schemas.EpsilonRequest) -> schemas.EpsilonResponse:
    bounds = EpsilonBounds(request.bounds.minimum, request.bounds.maximum)
    if (request.distance is None) == (request.preference is None):
        raise ValidationError("give exactly one of distance or preference")
    if request.distance is not None:
        threshold = request.threshold if request.threshold is not None else request.distance + 1.0
        value = epsilon_from_distance(
            request.distance, threshold, bounds, NoiseStream(request.seed)
        )
        return schemas.EpsilonResponse(epsilon=value, source="distance")
    preference = PrivacyPreference(
        access_to_nodes=Level.parse(request.preference.access_to_nodes),
        access_frequency=Level.parse(request.preference.access_frequency),
        attacker_background_knowledge=Level.parse(
            request.preference.attacker_background_knowledge
        ),
        communication_medium=Level.parse(request.preference.communication_medium),
        operational_complexity=Level.parse(request.preference.operational_complexity),
    )
    return schemas.EpsilonResponse(
        epsilon=epsilon_from_preference(preference, bounds), source="preference"
    )


@app.post("/privacy/privatize", response_model=schemas.PrivatizeResponse)
async def privatize_endpoint(request: schemas.PrivatizeRequest) -> schemas.PrivatizeResponse:
    if request.plan.mode == "udp":
        if request.plan.epsilon is None:
            raise ValidationError("udp plan needs a shared epsilon")
        plan = EpsilonAssignment.uniform(request.plan.epsilon)
    elif request.plan.mode == "pdp":
        if not request.plan.epsilons:
            raise ValidationError("pdp plan needs per-node epsilons")
        plan = EpsilonAssignment.personalized(
            request.plan.epsilons, AssignmentSource.EXPLICIT
        )
    else:
        raise ValidationError(f"unknown plan mode {request.plan.mode!r}")

    ledger = BudgetLedger()
    series = [(item.node, item.value) for item in request.series]
    released = privatize_series(
        series,
        plan,
        request.sensitivity,
        ledger,
        NoiseStream(request.seed).substream("privatize"),
        clamp_non_negative=request.clamp_non_negative,
    )
    return schemas.PrivatizeResponse(
        series=[schemas.SeriesItemIn(node=node, value=value) for node, value in released],
        ledger=schemas.LedgerOut(
            entries=[
                schemas.LedgerEntryOut(
                    node=e.node, epsilon=e.epsilon, operation=e.operation
                )
                for e in ledger.entries
            ],
            total=ledger.total(),
        ),
    )


@app.post("/evaluation/compare", response_model=schemas.CompareResponse)
async def compare_endpoint(request: schemas.CompareRequest) -> schemas.CompareResponse:
    if (request.records is None) == (request.synthetic is None):
        raise ValidationError("give exactly one of records or synthetic")
    if request.records is not None:
        dataset = dataset_from_records(
            ConsumptionRecord(r.home_id, r.timestamp, r.consumption)
            for r in request.records
        )
    else:
        dataset = generate_synthetic(
            request.synthetic.homes, request.synthetic.minutes, request.synthetic.seed
        )
    cases = [CaseSpec(c.label, c.eps_fog, c.eps_cloud) for c in request.cases]
    mapping = AggregationMap.round_robin(dataset.home_ids)
    delta = (
        request.delta
        if request.delta is not None
        else default_reidentification_window(dataset)
    )
    report = compare_cases(
        dataset, mapping, cases, request.seeds, request.sensitivity, delta
    )
    return schemas.CompareResponse(
        results=[
            schemas.CaseResultOut(
                case=result.case.label,
                seed=result.seed,
                fog=schemas.LevelMetricsOut(
                    utility=result.fog.utility.utility,
                    mae=result.fog.utility.mae,
                    risk=result.fog.risk,
                    loss_mean=result.fog.loss.mean,
                    loss_std=result.fog.loss.std,
                ),
                cloud=schemas.LevelMetricsOut(
                    utility=result.cloud.utility.utility,
                    mae=result.cloud.utility.mae,
                    risk=result.cloud.risk,
                    loss_mean=result.cloud.loss.mean,
                    loss_std=result.cloud.loss.std,
                ),
                cloud_record_budget=result.cloud_record_budget,
                ledger_total=result.ledger_total,
            )
            for result in report.results
        ],
        trends={k: dict(v) for k, v in report.trends.items()},
    )


def main() -> None:  # pragma: no cover - convenience launcher
    import uvicorn

    uvicorn.run(app, host="127.0.0.1", port=8000)


if __name__ == "__main__":  # pragma: no cover
    main()
