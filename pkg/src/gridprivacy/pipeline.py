"""End-to-end runs behind the CLI subcommands.

Each run validates its configuration, computes through the core modules,
and writes machine-readable CSV/JSON plus a copy of the effective
configuration into the output directory. All randomness flows from the
single run seed, so a repeated run produces byte-identical files.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from . import formats
from .attack_graph import SvplRanking, best_attack_profile, build_vaag, rank_svpl
from .config import RunConfig
from .errors import ValidationError
from .evaluation import compare_cases, default_reidentification_window
from .ingestion import AggregationMap, ConsumptionDataset, generate_synthetic, load_csv
from .privacy import (
    AssignmentSource,
    BudgetLedger,
    EpsilonAssignment,
    EpsilonBounds,
    NoiseStream,
    assign_from_distance,
    assign_from_preference,
    privatize_series,
)
from .topology import (
    GridTopology,
    Tier,
    adjacency_matrix,
    centrality_scores,
    diameter,
    laplacian_matrix,
    shortest_distances_from,
)


def _prepare_out(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config.as_text(), encoding="utf-8")
    return out


def _require_topology(config: RunConfig) -> GridTopology:
    if config.topology is None:
        raise ValidationError("a topology file is required (--topology)")
    return formats.load_topology(config.topology)


def _load_dataset(config: RunConfig) -> ConsumptionDataset:
    shape = config.synthetic_shape()
    if config.data is not None and shape is not None:
        raise ValidationError("give either --data or --synthetic, not both")
    if config.data is not None:
        return load_csv(config.data)
    if shape is not None:
        homes, minutes = shape
        return generate_synthetic(homes, minutes, seed=config.seed)
    raise ValidationError("a dataset is required (--data FILE or --synthetic HOMESxMINUTES)")


def _require_sensitivity(config: RunConfig) -> float:
    if config.sensitivity is None:
        raise ValidationError(
            "sensitivity required: pass --sensitivity (the per-record maximum); "
            "it is never inferred from the data"
        )
    return config.sensitivity


def run_topology(config: RunConfig) -> dict:
    """Topology stats: matrices, centralities, and the graph diameter."""
    out = _prepare_out(config)
    topology = _require_topology(config)

    adjacency = adjacency_matrix(topology)
    laplacian = laplacian_matrix(topology)
    scores = centrality_scores(topology)

    disconnected = any(
        math.isinf(value)
        for node_id in topology.node_ids
        for value in shortest_distances_from(topology, node_id).values()
    )
    stats = {
        "nodes": topology.n,
        "links": len(topology.links),
        "diameter": "infinite" if disconnected else diameter(topology),
        "tiers": {node.id: node.tier.value for node in topology.nodes},
    }

    formats.write_matrix_csv(adjacency, topology.node_ids, out / "adjacency.csv")
    formats.write_matrix_csv(laplacian, topology.node_ids, out / "laplacian.csv")
    formats.write_centrality_csv(scores, topology.node_ids, out / "centrality.csv")
    formats.write_json(stats, out / "topology_stats.json")
    return stats


def run_profile(config: RunConfig) -> dict:
    """Vulnerability ranking and the best attack profile for a topology."""
    out = _prepare_out(config)
    topology = _require_topology(config)
    incidents = formats.load_incidents(config.incidents) if config.incidents else ()
    records = (
        formats.load_vulnerabilities(config.vulnerabilities)
        if config.vulnerabilities
        else ()
    )

    vaag = build_vaag(topology, records, incidents)
    ranking = rank_svpl(vaag)
    best = best_attack_profile(vaag)
    if not incidents:
        # no attack evidence: the profile is empty, not a list of zero scores
        ranking = SvplRanking(entries=())

    formats.write_svpl_csv(ranking, out / "svpl.csv")
    formats.write_svpl_json(ranking, best, out / "svpl.json")
    formats.write_json(
        {
            "start_nodes": list(vaag.start_nodes),
            "attacked_nodes": list(vaag.attacked_nodes),
            "path_nodes": list(vaag.path_nodes),
            "compromised_on_path": list(vaag.compromised_on_path),
            "edges": [
                {"source": e.source, "target": e.target, "action": e.action}
                for e in vaag.edges
            ],
            "dependencies": [list(pair) for pair in vaag.dependencies],
        },
        out / "attack_graph.json",
    )
    return {
        "attacked": len(vaag.attacked_nodes),
        "edges": len(vaag.edges),
        "best_path": list(best.nodes),
        "best_path_risk": best.total_risk,
    }


def _resolve_plan(config: RunConfig, bounds: EpsilonBounds) -> EpsilonAssignment:
    mode = config.mode
    if mode == "udp":
        if config.epsilon is None:
            raise ValidationError("udp mode needs --epsilon, the shared privacy loss")
        return EpsilonAssignment.uniform(bounds.clamp(config.epsilon))

    if mode == "pdp-distance":
        topology = _require_topology(config)
        destination = _resolve_destination(config, topology)
        return assign_from_distance(
            topology, destination, bounds, seed=config.seed, threshold=config.th_d
        )

    if mode == "pdp-preference":
        topology = _require_topology(config)
        return assign_from_preference(topology, bounds)

    if config.plan is None:
        raise ValidationError("pdp-explicit mode needs --plan, the per-node epsilon file")
    raw = formats.load_plan(config.plan)
    topology = formats.load_topology(config.topology) if config.topology else None
    distance_plan = preference_plan = None
    epsilons: dict[str, float] = {}
    for node, value in raw.items():
        if isinstance(value, float):
            epsilons[node] = bounds.clamp(value)
            continue
        if topology is None:
            raise ValidationError(
                f"plan entry {node!r} uses {value}, which needs --topology to resolve"
            )
        if value == formats.AUTO_DISTANCE:
            if distance_plan is None:
                destination = _resolve_destination(config, topology)
                distance_plan = assign_from_distance(
                    topology, destination, bounds, seed=config.seed, threshold=config.th_d
                )
            epsilons[node] = distance_plan.epsilon_for(node)
        else:
            if preference_plan is None:
                preference_plan = assign_from_preference(topology, bounds)
            epsilons[node] = preference_plan.epsilon_for(node)
    return EpsilonAssignment.personalized(epsilons, AssignmentSource.EXPLICIT)


def _resolve_destination(config: RunConfig, topology: GridTopology) -> str:
    if config.destination is not None:
        if config.destination not in topology.node_ids:
            raise ValidationError(f"destination {config.destination!r} is not a topology node")
        return config.destination
    clouds = [node.id for node in topology.nodes if node.tier is Tier.CLOUD]
    if len(clouds) != 1:
        raise ValidationError(
            "pass --destination: the topology does not have exactly one cloud node"
        )
    return clouds[0]


def run_privatize(config: RunConfig) -> dict:
    """Release the dataset under the configured epsilon plan."""
    out = _prepare_out(config)
    dataset = _load_dataset(config)
    sensitivity = _require_sensitivity(config)
    bounds = EpsilonBounds(config.eps_min, config.eps_max)
    plan = _resolve_plan(config, bounds)

    ledger = BudgetLedger()
    series = [(record.home_id, record.consumption) for record in dataset.records]
    released = privatize_series(
        series, plan, sensitivity, ledger, NoiseStream(config.seed).substream("privatize")
    )

    with open(out / "privatized.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["home_id", "timestamp", "consumption"])
        for record, (_, value) in zip(dataset.records, released):
            writer.writerow([record.home_id, record.minute, repr(value)])

    formats.write_plan_csv(plan, out / "plan.csv")
    formats.write_ledger_json(ledger, out / "ledger.json")
    return {
        "records": len(released),
        "mode": config.mode,
        "budget_total": ledger.total(),
    }


def run_compare(config: RunConfig) -> dict:
    """Four-case uniform-vs-personalized comparison over multiple noise seeds."""
    out = _prepare_out(config)
    dataset = _load_dataset(config)
    sensitivity = _require_sensitivity(config)
    cases = config.parsed_cases()
    if config.aggregation_map is not None:
        mapping = formats.load_aggregation_map(config.aggregation_map)
    else:
        mapping = AggregationMap.round_robin(dataset.home_ids)
    delta = config.delta if config.delta is not None else default_reidentification_window(dataset)
    seeds = [config.seed + i for i in range(config.compare_seeds)]

    report = compare_cases(dataset, mapping, cases, seeds, sensitivity, delta)

    formats.write_json(formats.report_to_dict(report), out / "report.json")
    formats.write_report_csv(report, out / "report.csv")
    _write_metric_csv(report, out / "utility.csv", ("utility", "mae"))
    _write_metric_csv(report, out / "losses.csv", ("loss_mean", "loss_std"))
    _write_metric_csv(report, out / "risk.csv", ("risk",))
    return {
        "cases": [case.label for case in cases],
        "seeds": len(seeds),
        "trends": {k: v["passed"] for k, v in report.trends.items()},
    }


def _write_metric_csv(report, path: Path, metrics: tuple[str, ...]) -> None:
    collected: dict[tuple[str, str, str], list[float]] = {}
    for result in report.results:
        for level in ("fog", "cloud"):
            cell = getattr(result, level)
            values = {
                "utility": cell.utility.utility,
                "mae": cell.utility.mae,
                "risk": cell.risk,
                "loss_mean": cell.loss.mean,
                "loss_std": cell.loss.std,
            }
            for metric in metrics:
                collected.setdefault((result.case.label, level, metric), []).append(
                    values[metric]
                )
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["case", "level", "metric", "mean"])
        for case in report.cases:
            for level in ("fog", "cloud"):
                for metric in metrics:
                    series = collected[(case.label, level, metric)]
                    writer.writerow(
                        [case.label, level, metric, repr(float(np.mean(series)))]
                    )
