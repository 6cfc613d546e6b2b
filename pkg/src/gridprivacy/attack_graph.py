"""Attack-graph construction and node vulnerability ranking.

From per-node vulnerability records and observed attack incidents we derive
the set of compromised nodes, the directed attack edges that connect
condition holders to their targets, a per-node risk score (loss magnitude
times event frequency), the full ranking of nodes by that risk, and the
highest-risk path through the attack graph.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import (
    CyclicAttackGraphError,
    NegativeInputError,
    UnknownConditionError,
    UnknownNodeError,
)
from .topology import GridTopology


@dataclass(frozen=True)
class AttackIncident:
    """An observed attack: what it needed, what it produced, whom it hit."""

    id: str
    target: str
    preconditions: frozenset[str]
    consequences: frozenset[str]

    def __post_init__(self):
        if not self.preconditions or not self.consequences:
            raise UnknownConditionError(
                f"incident {self.id!r} needs non-empty preconditions and consequences"
            )


@dataclass(frozen=True)
class VulnerabilityRecord:
    """Conditions a node holds plus its privacy risk factors and class tags."""

    node: str
    conditions: frozenset[str]
    plm: float
    fple: float
    risk_source: str = ""
    privacy_weakness: str = ""
    feared_event: str = ""
    privacy_harm: str = ""

    def __post_init__(self):
        if self.plm < 0 or self.fple < 0:
            raise NegativeInputError(
                f"record for {self.node!r}: plm and fple must be non-negative"
            )


@dataclass(frozen=True)
class AttackEdge:
    """Directed edge from a condition-holding node into an attacked node."""

    source: str
    target: str
    action: str  # id of the incident that created the edge


@dataclass(frozen=True)
class VulnerabilityProfile:
    """Result of the profile generation pass.

    ``compromised`` and ``edges`` are in canonical sorted order;
    ``edge_conditions`` maps each edge to the conditions its source supplied
    at fire time; ``matched_incidents`` lists, per compromised node, the
    incidents that fired against it.
    """

    compromised: tuple[str, ...]
    edges: tuple[AttackEdge, ...]
    updated: tuple[VulnerabilityRecord, ...]
    edge_conditions: Mapping[AttackEdge, tuple[str, ...]]
    matched_incidents: Mapping[str, tuple[str, ...]]
    fired_incidents: tuple[str, ...] = ()


def risk_score(plm: float, fple: float) -> float:
    """Privacy risk of a node: loss magnitude times event frequency."""
    if plm < 0 or fple < 0:
        raise NegativeInputError("plm and fple must be non-negative")
    return plm * fple


def _validate_profile_inputs(
    records: Sequence[VulnerabilityRecord],
    incidents: Sequence[AttackIncident],
    new_nodes: frozenset[str],
) -> None:
    known_conditions: set[str] = set()
    for record in records:
        known_conditions.update(record.conditions)
    for incident in incidents:
        known_conditions.update(incident.consequences)

    known_nodes = {record.node for record in records} | new_nodes
    for incident in incidents:
        missing = incident.preconditions - known_conditions
        if missing:
            raise UnknownConditionError(
                f"incident {incident.id!r} references unknown conditions "
                f"{sorted(missing)}"
            )
        if incident.target not in known_nodes:
            raise UnknownNodeError(
                f"incident {incident.id!r} targets unknown node {incident.target!r}"
            )


def generate_vulnerability_profile(
    vulnerabilities: Iterable[VulnerabilityRecord],
    incidents: Iterable[AttackIncident],
    new_nodes: Iterable[str],
) -> VulnerabilityProfile:
    """Discover compromised nodes and attack edges from incident data.

    An incident fires when its target is among ``new_nodes`` and every
    precondition the target does not hold itself is covered by some record.
    Firing marks the target compromised, adds one edge from every other
    node holding any of the incident's preconditions, and appends the
    incident's consequences to the target's record when they are new to the
    vulnerability set. Passes repeat until no further incident fires, so
    chains resolve regardless of input order and a re-run on the updated
    set adds nothing new.
    """
    records = tuple(vulnerabilities)
    incident_list = sorted(incidents, key=lambda incident: incident.id)
    candidates = frozenset(new_nodes)
    if not incident_list:
        return VulnerabilityProfile(
            compromised=(),
            edges=(),
            updated=records,
            edge_conditions={},
            matched_incidents={},
        )
    _validate_profile_inputs(records, incident_list, candidates)

    held: dict[str, set[str]] = {}
    for record in records:
        held.setdefault(record.node, set()).update(record.conditions)

    compromised: set[str] = set()
    fired: set[str] = set()
    edges: list[AttackEdge] = []
    edge_conditions: dict[AttackEdge, tuple[str, ...]] = {}

    changed = True
    while changed:
        changed = False
        covered = set().union(*held.values()) if held else set()
        for incident in incident_list:
            if incident.id in fired or incident.target not in candidates:
                continue
            own = held.get(incident.target, set())
            remaining = incident.preconditions - own
            if not remaining <= covered:
                continue

            fired.add(incident.id)
            compromised.add(incident.target)
            for holder in sorted(held):
                if holder == incident.target:
                    continue
                supplied = held[holder] & incident.preconditions
                if supplied:
                    edge = AttackEdge(holder, incident.target, incident.id)
                    edges.append(edge)
                    edge_conditions[edge] = tuple(sorted(supplied))
            new_conditions = incident.consequences - covered
            if new_conditions:
                held.setdefault(incident.target, set()).update(new_conditions)
                covered |= new_conditions
            changed = True

    by_node = {record.node: record for record in records}
    updated: list[VulnerabilityRecord] = []
    for record in records:
        updated.append(replace(record, conditions=frozenset(held[record.node])))
    for node in sorted(compromised):
        if node not in by_node:
            updated.append(
                VulnerabilityRecord(
                    node=node,
                    conditions=frozenset(held.get(node, set())),
                    plm=0.0,
                    fple=0.0,
                )
            )

    matched = {
        node: tuple(
            sorted(
                incident.id
                for incident in incident_list
                if incident.id in fired and incident.target == node
            )
        )
        for node in sorted(compromised)
    }
    ordered_edges = tuple(sorted(edges, key=lambda e: (e.source, e.target, e.action)))
    return VulnerabilityProfile(
        compromised=tuple(sorted(compromised)),
        edges=ordered_edges,
        updated=tuple(updated),
        edge_conditions=edge_conditions,
        matched_incidents=matched,
        fired_incidents=tuple(sorted(fired)),
    )


@dataclass(frozen=True)
class Vaag:
    """Vulnerability-assessment attack graph over a grid topology.

    Nodes split into start nodes (uncompromised holders that enabled an
    attack), attacked nodes, and path nodes (everything lying on a directed
    edge path from a start node to an attacked node). ``edge_vulnerabilities``
    maps each attack edge to the condition set that enabled it, and
    ``dependencies`` holds the derived precondition-to-consequence pairs of
    every fired incident (stored for inspection; they do not change risk).
    """

    topology: GridTopology
    start_nodes: tuple[str, ...]
    attacked_nodes: tuple[str, ...]
    path_nodes: tuple[str, ...]
    edges: tuple[AttackEdge, ...]
    physical_connectivity: tuple[tuple[str, tuple[str, str]], ...]
    edge_vulnerabilities: Mapping[AttackEdge, tuple[str, ...]]
    dependencies: tuple[tuple[str, str], ...]
    risk: Mapping[str, float]
    plm: Mapping[str, float]
    fple: Mapping[str, float]
    records: tuple[VulnerabilityRecord, ...]
    matched_incidents: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def compromised_on_path(self) -> tuple[str, ...]:
        """Attacked nodes that also lie on an attack path."""
        on_path = set(self.path_nodes)
        return tuple(node for node in self.attacked_nodes if node in on_path)


def _reachable(starts: set[str], forward: Mapping[str, set[str]]) -> set[str]:
    seen = set(starts)
    frontier = list(starts)
    while frontier:
        node = frontier.pop()
        for nxt in forward.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def build_vaag(
    topology: GridTopology,
    vulnerabilities: Iterable[VulnerabilityRecord],
    incidents: Iterable[AttackIncident],
) -> Vaag:
    """Assemble the attack graph for a topology from records and incidents.

    Every topology node is a candidate target. Risk is the product of loss
    magnitude and event frequency for compromised nodes and 0 for everyone
    else: an uncompromised node has no realized privacy loss to score.
    """
    records = tuple(vulnerabilities)
    incident_list = tuple(incidents)
    node_ids = set(topology.node_ids)
    for record in records:
        if record.node not in node_ids:
            raise UnknownNodeError(
                f"vulnerability record references unknown node {record.node!r}"
            )
    for incident in incident_list:
        if incident.target not in node_ids:
            raise UnknownNodeError(
                f"incident {incident.id!r} targets unknown node {incident.target!r}"
            )

    profile = generate_vulnerability_profile(records, incident_list, node_ids)

    compromised = set(profile.compromised)
    sources = {edge.source for edge in profile.edges}
    start_nodes = tuple(sorted(sources - compromised))

    forward: dict[str, set[str]] = {}
    backward: dict[str, set[str]] = {}
    for edge in profile.edges:
        forward.setdefault(edge.source, set()).add(edge.target)
        backward.setdefault(edge.target, set()).add(edge.source)
    reaches_from_start = _reachable(set(start_nodes), forward)
    reaches_attacked = _reachable(compromised, backward)
    path_nodes = tuple(sorted(reaches_from_start & reaches_attacked))

    plm_by_node = {node_id: 0.0 for node_id in topology.node_ids}
    fple_by_node = {node_id: 0.0 for node_id in topology.node_ids}
    for record in profile.updated:
        plm_by_node[record.node] = record.plm
        fple_by_node[record.node] = record.fple
    risk = {
        node_id: risk_score(plm_by_node[node_id], fple_by_node[node_id])
        if node_id in compromised
        else 0.0
        for node_id in topology.node_ids
    }

    fired = set(profile.fired_incidents)
    dependencies = tuple(
        (pre, post)
        for incident in sorted(incident_list, key=lambda inc: inc.id)
        if incident.id in fired
        for pre in sorted(incident.preconditions)
        for post in sorted(incident.consequences)
    )

    physical = tuple(
        (node, (link.src, link.dst))
        for link in topology.links
        for node in (link.src, link.dst)
    )

    return Vaag(
        topology=topology,
        start_nodes=start_nodes,
        attacked_nodes=profile.compromised,
        path_nodes=path_nodes,
        edges=profile.edges,
        physical_connectivity=physical,
        edge_vulnerabilities=profile.edge_conditions,
        dependencies=dependencies,
        risk=risk,
        plm=plm_by_node,
        fple=fple_by_node,
        records=profile.updated,
        matched_incidents=profile.matched_incidents,
    )


@dataclass(frozen=True)
class SvplEntry:
    node: str
    risk: float
    plm: float
    fple: float


@dataclass(frozen=True)
class SvplRanking:
    """Nodes ordered from maximum to minimum privacy-loss risk."""

    entries: tuple[SvplEntry, ...]

    @property
    def node_order(self) -> tuple[str, ...]:
        return tuple(entry.node for entry in self.entries)


def rank_svpl(vaag: Vaag) -> SvplRanking:
    """Order every node by descending risk, ties broken by ascending id."""
    entries = sorted(
        (
            SvplEntry(
                node=node_id,
                risk=vaag.risk[node_id],
                plm=vaag.plm[node_id],
                fple=vaag.fple[node_id],
            )
            for node_id in vaag.topology.node_ids
        ),
        key=lambda entry: (-entry.risk, entry.node),
    )
    return SvplRanking(entries=tuple(entries))


@dataclass(frozen=True)
class AttackPath:
    nodes: tuple[str, ...]
    total_risk: float


def best_attack_profile(vaag: Vaag) -> AttackPath:
    """Highest cumulative-risk simple path through the attack edges.

    The attack edges form a DAG for ordinary incident chains; the path is
    found by dynamic programming over a topological order, summing node
    risk. Mutually-enabling incidents can create a cycle, in which case no
    best path is defined.

    Raises:
        CyclicAttackGraphError: the edge set contains a directed cycle.
    """
    if not vaag.edges:
        return AttackPath(nodes=(), total_risk=0.0)

    nodes = sorted({edge.source for edge in vaag.edges} | {edge.target for edge in vaag.edges})
    succ: dict[str, set[str]] = {node: set() for node in nodes}
    indegree: dict[str, int] = {node: 0 for node in nodes}
    for edge in set(vaag.edges):
        if edge.target not in succ[edge.source]:
            succ[edge.source].add(edge.target)
            indegree[edge.target] += 1

    order: list[str] = []
    ready = [node for node in nodes if indegree[node] == 0]
    heapq.heapify(ready)
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for nxt in sorted(succ[node]):
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != len(nodes):
        raise CyclicAttackGraphError("attack edges contain a directed cycle")

    preds: dict[str, list[str]] = {node: [] for node in nodes}
    for source in nodes:
        for target in succ[source]:
            preds[target].append(source)

    # maximize cumulative risk, preferring the longer route on ties (zero-risk
    # holders still belong to the attack narrative), then ascending node id
    best: dict[str, float] = {}
    length: dict[str, int] = {}
    parent: dict[str, str | None] = {}
    for node in order:
        best[node] = vaag.risk.get(node, 0.0)
        length[node] = 1
        parent[node] = None
        for pred in sorted(preds[node]):
            candidate = vaag.risk.get(node, 0.0) + best[pred]
            if (candidate, length[pred] + 1) > (best[node], length[node]):
                best[node] = candidate
                length[node] = length[pred] + 1
                parent[node] = pred

    end = min(nodes, key=lambda node: (-best[node], -length[node], node))
    path: list[str] = []
    cursor: str | None = end
    while cursor is not None:
        path.append(cursor)
        cursor = parent[cursor]
    path.reverse()
    return AttackPath(nodes=tuple(path), total_risk=best[end])
