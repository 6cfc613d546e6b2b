"""Readers and writers for the on-disk text formats.

All files are UTF-8 CSV (or JSON for reports and ledgers). Parsers raise
line-numbered errors so the CLI can point at the offending row. Condition
and identifier lists inside a CSV cell are separated by semicolons.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .attack_graph import AttackIncident, AttackPath, SvplRanking, VulnerabilityRecord
from .errors import MalformedRowError
from .evaluation import EvaluationReport
from .ingestion import AggregateRecord, AggregationMap
from .privacy import BudgetLedger, EpsilonAssignment
from .topology import GridTopology, LinkRecord, NodeRecord, Tier, build_topology

NODE_HEADER = ("id", "tier", "label")
LINK_HEADER = ("src", "dst", "weight")
INCIDENT_HEADER = ("incident_id", "target", "preconditions", "consequences")
VULNERABILITY_HEADER = (
    "node_id",
    "conditions",
    "plm",
    "fple",
    "risk_source",
    "privacy_weakness",
    "feared_event",
    "privacy_harm",
)
PLAN_HEADER = ("node_id", "epsilon")
AUTO_DISTANCE = "auto-distance"
AUTO_PREFERENCE = "auto-preference"


def _rows(path: str | Path) -> Iterable[tuple[int, list[str]]]:
    with open(path, newline="", encoding="utf-8") as handle:
        for line, row in enumerate(csv.reader(handle), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            yield line, [cell.strip() for cell in row]


def _expect_header(line: int, row: list[str], header: tuple[str, ...]) -> None:
    if tuple(row) != header:
        raise MalformedRowError(line, f"expected header {','.join(header)}")


def _parse_float(line: int, text: str, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRowError(line, f"{column} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise MalformedRowError(line, f"{column} {text!r} is not finite")
    return value


def load_topology(path: str | Path) -> GridTopology:
    """Parse a two-section topology file.

    The file contains a ``[nodes]`` section (rows id,tier,label) followed
    by a ``[links]`` section (rows src,dst,weight), each with a header row.
    """
    nodes: list[NodeRecord] = []
    links: list[LinkRecord] = []
    section = None
    expect_header = None
    for line, row in _rows(path):
        marker = row[0].lower() if len(row) == 1 else None
        if marker in ("[nodes]", "[links]"):
            section = marker.strip("[]")
            expect_header = NODE_HEADER if section == "nodes" else LINK_HEADER
            continue
        if section is None:
            raise MalformedRowError(line, "expected a [nodes] or [links] section marker")
        if expect_header is not None:
            _expect_header(line, row, expect_header)
            expect_header = None
            continue
        if section == "nodes":
            if len(row) != 3:
                raise MalformedRowError(line, f"expected 3 node columns, got {len(row)}")
            nodes.append(NodeRecord(id=row[0], tier=Tier.parse(row[1]), label=row[2]))
        else:
            if len(row) != 3:
                raise MalformedRowError(line, f"expected 3 link columns, got {len(row)}")
            links.append(
                LinkRecord(src=row[0], dst=row[1], weight=_parse_float(line, row[2], "weight"))
            )
    if not nodes:
        raise MalformedRowError(1, "topology file has no [nodes] section")
    return build_topology(nodes, links)


def write_topology(topology: GridTopology, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["[nodes]"])
        writer.writerow(NODE_HEADER)
        for node in topology.nodes:
            writer.writerow([node.id, node.tier.value, node.label])
        writer.writerow(["[links]"])
        writer.writerow(LINK_HEADER)
        for link in topology.links:
            writer.writerow([link.src, link.dst, repr(link.weight)])


def _split_cell(cell: str) -> frozenset[str]:
    return frozenset(part.strip() for part in cell.split(";") if part.strip())


def load_incidents(path: str | Path) -> tuple[AttackIncident, ...]:
    incidents = []
    saw_header = False
    for line, row in _rows(path):
        if not saw_header:
            _expect_header(line, row, INCIDENT_HEADER)
            saw_header = True
            continue
        if len(row) != 4:
            raise MalformedRowError(line, f"expected 4 columns, got {len(row)}")
        preconditions = _split_cell(row[2])
        consequences = _split_cell(row[3])
        if not preconditions or not consequences:
            raise MalformedRowError(line, "preconditions and consequences must be non-empty")
        incidents.append(
            AttackIncident(
                id=row[0],
                target=row[1],
                preconditions=preconditions,
                consequences=consequences,
            )
        )
    return tuple(incidents)


def load_vulnerabilities(path: str | Path) -> tuple[VulnerabilityRecord, ...]:
    records = []
    saw_header = False
    for line, row in _rows(path):
        if not saw_header:
            _expect_header(line, row, VULNERABILITY_HEADER)
            saw_header = True
            continue
        if len(row) != 8:
            raise MalformedRowError(line, f"expected 8 columns, got {len(row)}")
        plm = _parse_float(line, row[2], "plm")
        fple = _parse_float(line, row[3], "fple")
        if plm < 0 or fple < 0:
            raise MalformedRowError(line, "plm and fple must be non-negative")
        records.append(
            VulnerabilityRecord(
                node=row[0],
                conditions=_split_cell(row[1]),
                plm=plm,
                fple=fple,
                risk_source=row[4],
                privacy_weakness=row[5],
                feared_event=row[6],
                privacy_harm=row[7],
            )
        )
    return tuple(records)


def write_matrix_csv(matrix: np.ndarray, node_ids: Iterable[str], path: str | Path) -> None:
    ids = list(node_ids)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["node", *ids])
        for node_id, row in zip(ids, matrix):
            writer.writerow([node_id, *[repr(float(x)) for x in row]])


def write_centrality_csv(scores, node_ids: Iterable[str], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["node", *scores.METRICS])
        for node_id in node_ids:
            row = scores.for_node(node_id)
            writer.writerow([node_id, *[repr(row[metric]) for metric in scores.METRICS]])


def write_svpl_csv(ranking: SvplRanking, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rank", "node", "risk", "plm", "fple"])
        for rank, entry in enumerate(ranking.entries, start=1):
            writer.writerow(
                [rank, entry.node, repr(entry.risk), repr(entry.plm), repr(entry.fple)]
            )


def write_svpl_json(
    ranking: SvplRanking, best_path: AttackPath, path: str | Path
) -> None:
    payload = {
        "ranking": [
            {"node": e.node, "risk": e.risk, "plm": e.plm, "fple": e.fple}
            for e in ranking.entries
        ],
        "best_attack_profile": {
            "nodes": list(best_path.nodes),
            "total_risk": best_path.total_risk,
        },
    }
    write_json(payload, path)


def load_plan(path: str | Path) -> dict[str, float | str]:
    """Read a privacy plan: node_id to epsilon or an auto-assignment marker."""
    plan: dict[str, float | str] = {}
    saw_header = False
    for line, row in _rows(path):
        if not saw_header:
            _expect_header(line, row, PLAN_HEADER)
            saw_header = True
            continue
        if len(row) != 2:
            raise MalformedRowError(line, f"expected 2 columns, got {len(row)}")
        node, cell = row
        if node in plan:
            raise MalformedRowError(line, f"duplicate plan entry for node {node!r}")
        if cell in (AUTO_DISTANCE, AUTO_PREFERENCE):
            plan[node] = cell
        else:
            value = _parse_float(line, cell, "epsilon")
            if not value > 0:
                raise MalformedRowError(line, f"epsilon must be positive, got {value}")
            plan[node] = value
    return plan


def write_plan_csv(assignment: EpsilonAssignment, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(PLAN_HEADER)
        if assignment.shared is not None:
            writer.writerow(["*", repr(assignment.shared)])
        for node in sorted(assignment.epsilons):
            writer.writerow([node, repr(assignment.epsilons[node])])


def write_ledger_json(ledger: BudgetLedger, path: str | Path) -> None:
    payload = {
        "entries": [
            {"node": e.node, "epsilon": e.epsilon, "operation": e.operation}
            for e in ledger.entries
        ],
        "per_node_totals": dict(sorted(ledger.per_node_totals().items())),
        "total": ledger.total(),
    }
    write_json(payload, path)


def load_aggregation_map(path: str | Path) -> AggregationMap:
    """Read child,parent rows covering both tiers of the rollup.

    A row's parent is the cloud root when it never appears as a child
    itself; those rows are the fog-to-cloud tier, every other row maps a
    home to its fog node.
    """
    pairs: list[tuple[str, str]] = []
    saw_header = False
    for line, row in _rows(path):
        if not saw_header:
            _expect_header(line, row, ("child", "parent"))
            saw_header = True
            continue
        if len(row) != 2:
            raise MalformedRowError(line, f"expected 2 columns, got {len(row)}")
        pairs.append((row[0], row[1]))
    children = {child for child, _ in pairs}
    fog_to_cloud = {c: p for c, p in pairs if p not in children}
    home_to_fog = {c: p for c, p in pairs if p in children}
    return AggregationMap(home_to_fog=home_to_fog, fog_to_cloud=fog_to_cloud)


def write_aggregation_map(mapping: AggregationMap, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["child", "parent"])
        for home in sorted(mapping.home_to_fog):
            writer.writerow([home, mapping.home_to_fog[home]])
        for fog in sorted(mapping.fog_to_cloud):
            writer.writerow([fog, mapping.fog_to_cloud[fog]])


def write_aggregates_csv(records: Iterable[AggregateRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["node_id", "timestamp", "value"])
        for record in records:
            writer.writerow([record.node_id, record.minute, repr(record.total)])


def write_json(payload: Mapping, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def report_to_dict(report: EvaluationReport) -> dict:
    def loss_cell(metrics):
        return {
            "mae": metrics.utility.mae,
            "mean": metrics.utility.mean,
            "percentage_deviation": metrics.utility.percentage_deviation,
            "utility": metrics.utility.utility,
            "risk": metrics.risk,
            "loss_mean": metrics.loss.mean,
            "loss_std": metrics.loss.std,
            "records": len(metrics.loss.losses),
        }

    return {
        "sensitivity": report.sensitivity,
        "delta": report.delta,
        "seeds": list(report.seeds),
        "cases": [
            {"label": c.label, "eps_fog": c.eps_fog, "eps_cloud": c.eps_cloud}
            for c in report.cases
        ],
        "results": [
            {
                "case": result.case.label,
                "seed": result.seed,
                "fog": loss_cell(result.fog),
                "cloud": loss_cell(result.cloud),
                "cloud_record_budget": result.cloud_record_budget,
                "ledger_total": result.ledger_total,
                "plan_epsilon_variance": result.plan_epsilon_variance,
            }
            for result in report.results
        ],
        "trends": dict(report.trends),
        "risk_model": "laplace-window",
        "risk_values_reference_only": True,
    }


_REPORT_METRICS = ("utility", "mae", "risk", "loss_mean", "loss_std")


def write_report_csv(report: EvaluationReport, path: str | Path) -> None:
    """Plot-ready summary: one row per case x level x metric, averaged over seeds."""
    cells: dict[tuple[str, str, str], list[float]] = {}
    for result in report.results:
        for level in ("fog", "cloud"):
            metrics = getattr(result, level)
            values = {
                "utility": metrics.utility.utility,
                "mae": metrics.utility.mae,
                "risk": metrics.risk,
                "loss_mean": metrics.loss.mean,
                "loss_std": metrics.loss.std,
            }
            for metric in _REPORT_METRICS:
                cells.setdefault((result.case.label, level, metric), []).append(
                    values[metric]
                )
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["case", "level", "metric", "mean", "std_across_seeds"])
        for case in report.cases:
            for level in ("fog", "cloud"):
                for metric in _REPORT_METRICS:
                    series = np.array(cells[(case.label, level, metric)])
                    writer.writerow(
                        [case.label, level, metric, repr(float(series.mean())),
                         repr(float(series.std()))]
                    )
