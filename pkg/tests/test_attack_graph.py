import numpy as np
import pytest

from gridprivacy.attack_graph import (
    AttackEdge,
    AttackIncident,
    Vaag,
    VulnerabilityRecord,
    best_attack_profile,
    build_vaag,
    generate_vulnerability_profile,
    rank_svpl,
    risk_score,
)
from gridprivacy.errors import (
    CyclicAttackGraphError,
    NegativeInputError,
    UnknownConditionError,
    UnknownNodeError,
)

from conftest import make_topology
from oracles import brute_best_path


def incident(id, target, pre, cons):
    return AttackIncident(id, target, frozenset(pre), frozenset(cons))


def record(node, conditions, plm=0.0, fple=0.0):
    return VulnerabilityRecord(node, frozenset(conditions), plm, fple)


class TestRiskScore:
    def test_zero_magnitude_annihilates(self):
        assert risk_score(0.0, 123.4) == 0.0

    def test_unit_magnitude_is_identity(self):
        assert risk_score(1.0, 7.5) == 7.5

    def test_product(self):
        assert risk_score(0.5, 4.0) == 2.0

    def test_commutative(self):
        assert risk_score(0.3, 2.7) == risk_score(2.7, 0.3)

    @pytest.mark.parametrize("plm,fple", [(-0.1, 1.0), (1.0, -2.0)])
    def test_negative_inputs_rejected(self, plm, fple):
        with pytest.raises(NegativeInputError):
            risk_score(plm, fple)


class TestGenerateVulnerabilityProfile:
    def test_no_incidents_returns_empty(self):
        records = (record("n1", {"c1"}, 0.5, 1.0),)
        profile = generate_vulnerability_profile(records, (), {"n1", "n2"})
        assert profile.compromised == ()
        assert profile.edges == ()
        assert profile.updated == records

    def test_single_incident_trace(self):
        # holder covers c1, the target holds c2 itself, c3 is the new fallout
        records = (record("holder", {"c1"}), record("n", {"c2"}))
        ai = incident("i1", "n", {"c1", "c2"}, {"c3"})
        profile = generate_vulnerability_profile(records, [ai], {"n"})
        assert profile.compromised == ("n",)
        assert profile.edges == (AttackEdge("holder", "n", "i1"),)
        held = {r.node: r.conditions for r in profile.updated}
        assert held["n"] == {"c2", "c3"}
        assert held["holder"] == {"c1"}
        assert profile.edge_conditions[profile.edges[0]] == ("c1",)
        assert profile.matched_incidents == {"n": ("i1",)}

    def test_chained_incidents_link_through_shared_condition(self):
        records = (record("seed", {"c1"}),)
        first = incident("i1", "t1", {"c1"}, {"c2"})
        second = incident("i2", "t2", {"c2"}, {"c3"})
        profile = generate_vulnerability_profile(records, [second, first], {"t1", "t2"})
        assert profile.compromised == ("t1", "t2")
        assert AttackEdge("seed", "t1", "i1") in profile.edges
        assert AttackEdge("t1", "t2", "i2") in profile.edges

    def test_chain_resolves_regardless_of_incident_order(self):
        records = (record("seed", {"c1"}),)
        # z-incident must fire first logically but sorts last by id
        first = incident("z-first", "t1", {"c1"}, {"c2"})
        second = incident("a-second", "t2", {"c2"}, {"c3"})
        profile = generate_vulnerability_profile(records, [first, second], {"t1", "t2"})
        assert profile.compromised == ("t1", "t2")

    def test_uncovered_precondition_does_not_fire(self):
        records = (record("holder", {"c1"}),)
        ai = incident("i1", "n", {"c1", "c9"}, {"c2"})
        # c9 is known (a consequence) but never covered: the incident that
        # would produce it needs it itself
        filler = incident("i0", "other", {"c9"}, {"c9"})
        profile = generate_vulnerability_profile(
            records, [ai, filler], {"n", "other"}
        )
        assert profile.compromised == ()

    def test_unknown_condition_rejected(self):
        with pytest.raises(UnknownConditionError):
            generate_vulnerability_profile(
                (record("holder", {"c1"}),),
                [incident("i1", "n", {"c-nowhere"}, {"c2"})],
                {"n"},
            )

    def test_unknown_target_rejected(self):
        with pytest.raises(UnknownNodeError):
            generate_vulnerability_profile(
                (record("holder", {"c1"}),),
                [incident("i1", "ghost", {"c1"}, {"c2"})],
                {"n"},
            )

    def test_five_node_fixture_trace(self, trace_records, trace_incidents):
        profile = generate_vulnerability_profile(
            trace_records, trace_incidents, {"n1", "n2", "n3", "n4", "n5"}
        )
        assert profile.compromised == ("n2", "n4", "n5")
        assert profile.edges == (
            AttackEdge("n1", "n2", "i1"),
            AttackEdge("n2", "n4", "i2"),
            AttackEdge("n4", "n5", "i3"),
        )
        held = {r.node: r.conditions for r in profile.updated}
        assert held["n1"] == {"c-default-creds"}
        assert held["n2"] == {"c-open-telnet", "c-meter-dump"}
        assert held["n4"] == {"c-weak-tls", "c-agg-leak"}
        assert held["n5"] == {"c-full-disclosure"}
        assert profile.fired_incidents == ("i1", "i2", "i3")


def random_profile_inputs(rng: np.random.Generator):
    """Random but always-valid records, incidents, and candidate nodes."""
    nodes = [f"m{i}" for i in range(int(rng.integers(3, 7)))]
    pool = [f"c{i}" for i in range(int(rng.integers(3, 9)))]

    records = []
    for node in nodes:
        if rng.random() < 0.7:
            count = int(rng.integers(1, 3))
            conditions = set(rng.choice(pool, size=count, replace=False))
            records.append(record(node, conditions, float(rng.random()), float(rng.random() * 3)))

    raw = []
    for k in range(int(rng.integers(1, 6))):
        cons = set(rng.choice(pool, size=int(rng.integers(1, 3)), replace=False))
        raw.append((f"i{k}", str(rng.choice(nodes)), cons))
    universe = sorted(
        {c for r in records for c in r.conditions} | {c for _, _, cons in raw for c in cons}
    )
    incidents = [
        incident(
            iid,
            target,
            set(rng.choice(universe, size=min(int(rng.integers(1, 3)), len(universe)), replace=False)),
            cons,
        )
        for iid, target, cons in raw
    ]
    return tuple(records), tuple(incidents), frozenset(nodes)


class TestProfileProperties:
    def test_monotone_and_idempotent_on_random_inputs(self):
        rng = np.random.default_rng(20260810)
        for _ in range(100):
            records, incidents, nodes = random_profile_inputs(rng)
            profile = generate_vulnerability_profile(records, incidents, nodes)

            # idempotence: running again on the updated set adds nothing
            again = generate_vulnerability_profile(profile.updated, incidents, nodes)
            assert set(again.compromised) == set(profile.compromised)

            # monotonicity: enlarging the vulnerability set never shrinks CN
            universe = sorted(
                {c for r in records for c in r.conditions}
                | {c for i in incidents for c in i.consequences}
            )
            extra = record("extra-holder", set(universe[: max(1, len(universe) // 2)]))
            bigger = generate_vulnerability_profile(
                records + (extra,), incidents, nodes | {"extra-holder"}
            )
            assert set(profile.compromised) <= set(bigger.compromised)


class TestBuildVaag:
    def test_no_incidents_gives_empty_attack_surface(self, trace_topology, trace_records):
        vaag = build_vaag(trace_topology, trace_records, ())
        assert vaag.attacked_nodes == ()
        assert vaag.edges == ()
        assert all(value == 0.0 for value in vaag.risk.values())

    def test_single_compromised_node_risk(self):
        t = make_topology([("a", "b", 1.0), ("b", "c", 1.0)])
        records = (record("a", {"c-bait"}), record("b", {"c-hole"}, 0.5, 4.0))
        vaag = build_vaag(t, records, [incident("i1", "b", {"c-bait"}, {"c-spoil"})])
        assert vaag.risk == {"a": 0.0, "b": 2.0, "c": 0.0}

    def test_five_node_fixture_partition(
        self, trace_topology, trace_records, trace_incidents
    ):
        vaag = build_vaag(trace_topology, trace_records, trace_incidents)
        assert vaag.attacked_nodes == ("n2", "n4", "n5")
        assert vaag.start_nodes == ("n1",)
        assert vaag.path_nodes == ("n1", "n2", "n4", "n5")
        assert vaag.compromised_on_path == ("n2", "n4", "n5")
        assert vaag.risk == {
            "n1": 0.0,
            "n2": 0.4 * 1.0,
            "n3": 0.0,
            "n4": 0.6 * 3.0,
            "n5": 0.0,
        }
        assert ("c-meter-dump", "c-agg-leak") in vaag.dependencies
        # physical connectivity mirrors the four topology links, twice each
        assert len(vaag.physical_connectivity) == 8

    def test_every_compromised_node_is_attacked_and_path_reachable(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            records, incidents, nodes = random_profile_inputs(rng)
            t = make_topology(
                [(a, b, 1.0) for a, b in zip(sorted(nodes), sorted(nodes)[1:])]
            )
            vaag = build_vaag(t, records, incidents)
            profile_cn = set(vaag.attacked_nodes)
            assert profile_cn <= set(t.node_ids)
            # reachability: every attacked node on a path is reachable from a start
            forward = {}
            for edge in vaag.edges:
                forward.setdefault(edge.source, set()).add(edge.target)
            seen = set(vaag.start_nodes)
            frontier = list(seen)
            while frontier:
                node = frontier.pop()
                for nxt in forward.get(node, ()):
                    if nxt not in seen:
                        seen.add(nxt)
                        frontier.append(nxt)
            for node in vaag.compromised_on_path:
                assert node in seen

    def test_unknown_record_node_rejected(self, trace_topology, trace_incidents):
        with pytest.raises(UnknownNodeError):
            build_vaag(trace_topology, (record("ghost", {"c-x"}),), trace_incidents)


def vaag_with(edges, risk, topology=None):
    """Minimal hand-built graph for ranking and path tests."""
    t = topology or make_topology(
        [(a, b, 1.0) for a, b in zip(sorted(risk), sorted(risk)[1:])]
    )
    return Vaag(
        topology=t,
        start_nodes=(),
        attacked_nodes=tuple(sorted(risk)),
        path_nodes=(),
        edges=tuple(AttackEdge(a, b, "x") for a, b in edges),
        physical_connectivity=(),
        edge_vulnerabilities={},
        dependencies=(),
        risk=risk,
        plm={n: 0.0 for n in risk},
        fple={n: 0.0 for n in risk},
        records=(),
    )


class TestRankSvpl:
    def test_descending_with_id_tie_break(self):
        vaag = vaag_with([], {"a": 2.0, "b": 5.0, "c": 2.0})
        assert rank_svpl(vaag).node_order == ("b", "a", "c")

    def test_all_equal_orders_by_id(self):
        vaag = vaag_with([], {"z": 1.0, "m": 1.0, "a": 1.0})
        assert rank_svpl(vaag).node_order == ("a", "m", "z")

    def test_matches_sort_oracle_on_random_risks(self):
        rng = np.random.default_rng(3)
        risk = {f"q{i:02d}": float(rng.choice([0.0, 1.5, 2.0, rng.random()])) for i in range(20)}
        vaag = vaag_with([], risk)
        expected = sorted(risk, key=lambda n: (-risk[n], n))
        assert list(rank_svpl(vaag).node_order) == expected

    def test_order_invariant_under_positive_scaling(self, trace_topology, trace_records, trace_incidents):
        base = build_vaag(trace_topology, trace_records, trace_incidents)
        scaled_records = tuple(
            VulnerabilityRecord(r.node, r.conditions, r.plm * 3.0, r.fple * 0.25)
            for r in trace_records
        )
        scaled = build_vaag(trace_topology, scaled_records, trace_incidents)
        assert rank_svpl(base).node_order == rank_svpl(scaled).node_order


class TestBestAttackProfile:
    def test_empty_edges_gives_empty_path(self):
        vaag = vaag_with([], {"a": 5.0})
        assert best_attack_profile(vaag).nodes == ()
        assert best_attack_profile(vaag).total_risk == 0.0

    def test_linear_chain(self):
        vaag = vaag_with([("a", "b"), ("b", "c")], {"a": 1.0, "b": 2.0, "c": 3.0})
        path = best_attack_profile(vaag)
        assert path.nodes == ("a", "b", "c")
        assert path.total_risk == 6.0

    def test_cycle_rejected(self):
        vaag = vaag_with([("a", "b"), ("b", "a")], {"a": 1.0, "b": 1.0})
        with pytest.raises(CyclicAttackGraphError):
            best_attack_profile(vaag)

    def test_branching_dags_match_enumeration_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 10))
            names = [f"d{i}" for i in range(n)]
            edges = {
                (names[i], names[j])
                for i in range(n)
                for j in range(i + 1, n)
                if rng.random() < 0.35
            }
            risk = {name: float(np.round(rng.random() * 5, 3)) for name in names}
            vaag = vaag_with(sorted(edges), risk)
            if not edges:
                assert best_attack_profile(vaag).nodes == ()
                continue
            got = best_attack_profile(vaag)
            assert got.total_risk == pytest.approx(brute_best_path(edges, risk), abs=1e-9)
            # the returned path is a real edge path achieving its own total
            for a, b in zip(got.nodes, got.nodes[1:]):
                assert (a, b) in edges
            assert sum(risk[n] for n in got.nodes) == pytest.approx(got.total_risk)

    def test_five_node_fixture_best_path(
        self, trace_topology, trace_records, trace_incidents
    ):
        vaag = build_vaag(trace_topology, trace_records, trace_incidents)
        path = best_attack_profile(vaag)
        assert path.nodes == ("n1", "n2", "n4", "n5")
        assert path.total_risk == pytest.approx(0.4 + 1.8)
