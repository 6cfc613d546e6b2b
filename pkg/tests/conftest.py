from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from gridprivacy.attack_graph import AttackIncident, VulnerabilityRecord
from gridprivacy.topology import (
    GridTopology,
    LinkRecord,
    NodeRecord,
    Tier,
    build_topology,
)

FIXTURES = Path(__file__).parent / "fixtures"


def make_topology(edges: list[tuple[str, str, float]], tiers=None) -> GridTopology:
    """Build a topology from weighted edge triples; tiers default to edge."""
    tiers = tiers or {}
    ids = sorted({n for a, b, _ in edges for n in (a, b)})
    nodes = [NodeRecord(i, tiers.get(i, Tier.EDGE)) for i in ids]
    return build_topology(nodes, [LinkRecord(a, b, w) for a, b, w in edges])


def random_connected_topology(
    rng: np.random.Generator, n: int, extra_edges: int | None = None
) -> GridTopology:
    """Random spanning tree plus extra links; integer weights keep path-cost
    ties exact so oracle comparisons are not at the mercy of float rounding."""
    ids = [f"v{i:02d}" for i in range(n)]
    edges: set[tuple[str, str]] = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.add((ids[j], ids[i]))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n))
    for _ in range(extra_edges):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            a, b = sorted((ids[int(i)], ids[int(j)]))
            edges.add((a, b))
    weighted = [(a, b, float(rng.integers(1, 10))) for a, b in sorted(edges)]
    return make_topology(weighted)


@pytest.fixture
def path3() -> GridTopology:
    return make_topology([("a", "b", 1.0), ("b", "c", 2.0)])


@pytest.fixture
def trace_topology() -> GridTopology:
    tiers = {"n4": Tier.FOG, "n5": Tier.CLOUD}
    return make_topology(
        [("n1", "n4", 1.0), ("n2", "n4", 1.0), ("n3", "n4", 1.0), ("n4", "n5", 2.0)],
        tiers=tiers,
    )


@pytest.fixture
def trace_records() -> tuple[VulnerabilityRecord, ...]:
    return (
        VulnerabilityRecord(
            "n1", frozenset({"c-default-creds"}), 0.9, 2.0,
            "external-adversary", "default-credentials", "credential-replay",
            "occupancy-disclosure",
        ),
        VulnerabilityRecord(
            "n2", frozenset({"c-open-telnet"}), 0.4, 1.0,
            "external-adversary", "unauthenticated-service", "remote-shell",
            "consumption-disclosure",
        ),
        VulnerabilityRecord(
            "n4", frozenset({"c-weak-tls"}), 0.6, 3.0,
            "network-eavesdropper", "weak-transport-cipher", "session-hijack",
            "aggregate-disclosure",
        ),
    )


@pytest.fixture
def trace_incidents() -> tuple[AttackIncident, ...]:
    return (
        AttackIncident(
            "i1", "n2",
            frozenset({"c-default-creds", "c-open-telnet"}),
            frozenset({"c-meter-dump"}),
        ),
        AttackIncident(
            "i2", "n4",
            frozenset({"c-meter-dump", "c-weak-tls"}),
            frozenset({"c-agg-leak"}),
        ),
        AttackIncident(
            "i3", "n5",
            frozenset({"c-agg-leak", "c-weak-tls"}),
            frozenset({"c-full-disclosure"}),
        ),
    )
