"""Tests for S-graphs, phases, HN filtrations and wall crossing"""

import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pandas as pd
import pytest

from fukayagen import linalg, stab
from fukayagen.errors import (
    DegenerateChargeError,
    FormatError,
    InvalidInputError,
    PreconditionError,
    UnboundedError,
)
from fukayagen.lattice import ClassVector
from fukayagen.stab import GaussianRational as G
from fukayagen.strings import BACKWARD, FORWARD, Connector, CurveWord, Letter

A3_CHARGES = {
    3: [(-3, 1), (1, 2), (3, 1)],
    4: [(1, 1), (-1, 1), (2, 3)],
    5: [(1, 1), (-1, 1), (-1, 2)],
    6: [(3, 1), (1, 2), (-3, 1)],
}


def a2(reverse: bool = False) -> stab.SGraph:
    charges = [(-1, 1), (1, 1)] if reverse else [(1, 1), (-1, 1)]
    return stab.path_sgraph(2, charges)


def extension_a2() -> CurveWord:
    """e2 -> e1 in the path A2 heart"""
    return CurveWord.string(
        [Letter("e2", 0), Letter("e1", 0)], [Connector(("e1b|e2a",), FORWARD)]
    )


def kronecker(za=(1, 1), zb=(-1, 2)) -> stab.SGraph:
    return stab.SGraph(
        {
            "v1": stab.SVertex("total", ("a1", "b1"), (1,)),
            "v2": stab.SVertex("total", ("a2", "b2"), (1,)),
        },
        {
            "a": stab.SEdge(("a1", "a2"), G(*za)),
            "b": stab.SEdge(("b1", "b2"), G(*zb)),
        },
    )


def kronecker_band() -> CurveWord:
    return CurveWord.band(
        [Letter("a", 0), Letter("b", 0)],
        [Connector(("a1|b1",), BACKWARD), Connector(("a2|b2",), FORWARD)],
        [[1]],
    )


class TestGaussianRational:
    """Test exact complex charges"""

    def test_parse_forms(self):
        """Test the dict, pair and real forms all parse"""
        assert G.parse({"re": "1/2", "im": "-3"}) == G(Fraction(1, 2), -3)
        assert G.parse(["2", "1/3"]) == G(2, Fraction(1, 3))
        assert G.parse(5) == G(5, 0)

    def test_arithmetic(self):
        """Test products follow complex multiplication"""
        assert G(1, 1) * G(1, -1) == G(2, 0)
        assert G(1, 2) + G(-1, 1) == G(0, 3)
        assert 2 * G(1, 1) == G(2, 2)
        assert G(3, 4).norm2() == 25

    def test_cross_orientation(self):
        """Test cross is positive when the second charge lies counterclockwise"""
        assert G(1, 1).cross(G(-1, 1)) == 2
        assert G(-1, 1).cross(G(1, 1)) == -2
        assert G(1, 1).cross(G(2, 2)) == 0


class TestPhase:
    """Test phase comparison without angles"""

    def test_order_within_heart(self):
        """Test phases order by cross products"""
        assert stab.Phase(0, G(1, 1)) < stab.Phase(0, G(-1, 1))
        assert stab.Phase(0, G(2, 2)) == stab.Phase(0, G(1, 1))
        assert stab.Phase(0, G(1, 1)) != stab.Phase(0, G(-1, -1))

    def test_shift_dominates(self):
        """Test a larger shift always means a larger phase"""
        assert stab.Phase(1, G(5, 1)) > stab.Phase(0, G(-5, 1))

    def test_value_for_reports(self):
        """Test the float reading of a phase"""
        assert stab.Phase(0, G(0, 1)).value == pytest.approx(0.5)
        assert stab.Phase(2, G(1, 1)).value == pytest.approx(2.25)

    def test_zero_charge_rejected(self):
        """Test Z = 0 has no phase"""
        with pytest.raises(DegenerateChargeError):
            stab.Phase(0, G(0, 0))


class TestSGraphValidation:
    """Test S-graph structure and charge checks"""

    def test_fixture_is_valid(self, load_fixture):
        """Test the shipped A2 S-graph validates"""
        s = stab.sgraph_from_dict(load_fixture("sgraph-a2.json"))
        assert stab.validate_sgraph(s, upper=True).ok

    def test_colinear_charges(self):
        """Test colinear simples are a wall of the first kind"""
        report = stab.validate_sgraph(stab.path_sgraph(2, [(1, 1), (2, 2)]))
        assert not report.ok
        assert "first kind" in report.issues[0].message

    def test_colinear_charges_raise(self):
        """Test building a state on colinear charges raises"""
        with pytest.raises(DegenerateChargeError):
            stab.initial_state(stab.path_sgraph(2, [(1, 1), (2, 2)]))

    def test_zero_charge(self):
        """Test a zero charge is reported on its edge"""
        report = stab.validate_sgraph(stab.path_sgraph(2, [(0, 0), (1, 1)]))
        assert report.issues[0].location == "edges.e1.Z"

    def test_upper_half_plane_for_input(self):
        """Test starting chambers need upper half-plane charges"""
        s = stab.path_sgraph(2, [(1, -1), (1, 1)])
        assert stab.validate_sgraph(s).ok
        assert not stab.validate_sgraph(s, upper=True).ok

    def test_strip_count_below_one(self):
        """Test d(a, b) = 0 is rejected"""
        s = stab.SGraph(
            {"v": stab.SVertex("total", ("x", "y"), (0,))},
            {"e": stab.SEdge(("x", "y"), G(0, 1))},
        )
        report = stab.validate_sgraph(s)
        assert any("at least 1" in i.message for i in report.issues)

    def test_wrong_number_of_strip_counts(self):
        """Test a cyclic vertex needs one d per half-edge"""
        s = stab.SGraph(
            {"v": stab.SVertex("cyclic", ("x", "y"), (1,))},
            {"e": stab.SEdge(("x", "y"), G(0, 1))},
        )
        assert not stab.validate_sgraph(s).ok

    def test_orphan_half_edge(self):
        """Test a half-edge on no edge is reported"""
        s = stab.SGraph(
            {"v": stab.SVertex("total", ("x", "y", "z"), (1, 1))},
            {"e": stab.SEdge(("x", "y"), G(0, 1))},
        )
        report = stab.validate_sgraph(s)
        assert any("no edge" in i.message for i in report.issues)
        with pytest.raises(InvalidInputError):
            stab.sgraph_to_gentle(s)


class TestSGraphToGentle:
    """Test the graded quiver of an S-graph"""

    def test_path_a3_has_relation(self):
        """Test the path S-graph composes to zero across an edge"""
        p = stab.path_sgraph(3).presentation
        assert {(a.source, a.target, a.degree) for a in p.arrows} == {
            ("e2", "e1", 1),
            ("e3", "e2", 1),
        }
        assert p.relations == frozenset({("e2b|e3a", "e1b|e2a")})

    def test_star_a3_is_linear(self):
        """Test the star S-graph composes through its centre"""
        p = stab.star_sgraph(3).presentation
        assert p.relations == frozenset()
        assert {(a.source, a.target) for a in p.arrows} == {("e2", "e1"), ("e3", "e2")}

    def test_kronecker(self):
        """Test two parallel degree-one arrows"""
        p = kronecker().presentation
        assert sorted((a.source, a.target, a.degree) for a in p.arrows) == [
            ("b", "a", 1),
            ("b", "a", 1),
        ]

    def test_strip_counts_become_degrees(self):
        """Test d(a, b) = 2 gives a degree-two arrow"""
        s = stab.SGraph(
            {
                "v0": stab.SVertex("total", ("e1a", "e2a"), (2,)),
                "v1": stab.SVertex("total", ("e1b",)),
                "v2": stab.SVertex("total", ("e2b",)),
            },
            {"e1": stab.SEdge(("e1a", "e1b"), G(1, 1)), "e2": stab.SEdge(("e2a", "e2b"), G(0, 1))},
        )
        assert [a.degree for a in s.presentation.arrows] == [2]

    def test_heart_has_no_negative_homs(self):
        """Test Hom between simples lives in positive degrees only"""
        from fukayagen.gentle import hom_basis

        p = stab.star_sgraph(3).presentation
        for x in p.vertices:
            for y in p.vertices:
                degrees = [b.degree for b in hom_basis(p, x, y)]
                assert all(d >= 1 for d in degrees) or (x == y and degrees.count(0) == 1)


class TestCharges:
    """Test central charges and phases of classes"""

    def test_central_charge_is_additive(self):
        """Test Z of a class is the signed sum"""
        s = a2()
        assert stab.central_charge(s, {"e1": 1, "e2": 2}) == G(-1, 3)
        lattice = stab.charge_lattice(s)
        assert stab.central_charge(s, lattice.vector({"e1": -1})) == G(-1, -1)

    def test_shifted_class_phase(self):
        """Test the class of e1[1] has phase one more than e1"""
        s = a2()
        lattice = stab.charge_lattice(s)
        assert stab.phase_of(s, lattice.vector({"e1": 1})) == stab.Phase(0, G(1, 1))
        assert stab.phase_of(s, lattice.vector({"e1": -1})) == stab.Phase(1, G(1, 1))

    def test_zero_class(self):
        """Test the zero class has no phase"""
        s = a2()
        with pytest.raises(DegenerateChargeError):
            stab.phase_of(s, ClassVector(("e1", "e2"), (0, 0)))

    def test_word_phase(self):
        """Test a heart word's phase is that of its total charge"""
        assert stab.phase_of(a2(), extension_a2()) == stab.Phase(0, G(0, 2))

    def test_mixed_shifts(self):
        """Test a word across two heart shifts has no single phase"""
        w = CurveWord.string([Letter("e1", 0), Letter("e2", 1)])
        with pytest.raises(PreconditionError):
            stab.phase_of(a2(), w)


class TestSemistability:
    """Test stability of heart words"""

    def test_extension_stable_when_sub_has_lower_phase(self):
        """Test the A2 extension is stable when its sub e1 has lower phase"""
        assert stab.is_stable(a2(), extension_a2())
        assert stab.is_semistable(a2(), extension_a2())

    def test_extension_unstable_otherwise(self):
        """Test the A2 extension is destabilized by e1"""
        assert not stab.is_semistable(a2(reverse=True), extension_a2())

    def test_simples_are_stable(self):
        """Test single letters are always stable"""
        assert stab.is_stable(a2(reverse=True), CurveWord.string([Letter("e1", 0)]))

    def test_band_semistable(self):
        """Test the Kronecker band follows the order of the two simples"""
        assert stab.is_semistable(kronecker(), kronecker_band())
        assert not stab.is_semistable(kronecker((-1, 2), (1, 1)), kronecker_band())

    def test_higher_multiplicity_rejected(self):
        """Test sub-word search needs multiplicity one"""
        w = CurveWord.string([Letter("e1", 0)], dimension=2)
        with pytest.raises(PreconditionError):
            stab.is_semistable(a2(), w)

    @pytest.mark.parametrize("count", sorted(A3_CHARGES))
    def test_bruteforce_agrees(self, count):
        """Test sub-word search equals sub-module enumeration over F2"""
        s = stab.path_sgraph(3, A3_CHARGES[count])
        K = linalg.field("f2")
        for w in stab.heart_objects(s):
            assert stab.is_semistable_bruteforce(s, w, K) == stab.is_semistable(s, w), str(w)

    def test_bruteforce_on_band(self):
        """Test sub-module enumeration on the Kronecker band"""
        K = linalg.field("f3")
        assert stab.is_semistable_bruteforce(kronecker(), kronecker_band(), K)
        assert not stab.is_semistable_bruteforce(
            kronecker((-1, 2), (1, 1)), kronecker_band(), K
        )

    def test_bruteforce_needs_finite_field(self):
        """Test sub-module enumeration refuses ℚ"""
        with pytest.raises(PreconditionError):
            stab.is_semistable_bruteforce(a2(), extension_a2(), linalg.field("q"))


class TestHarderNarasimhan:
    """Test HN filtrations"""

    def test_semistable_has_one_factor(self):
        """Test a semistable word is its own filtration"""
        tower = stab.hn(a2(), extension_a2())
        assert len(tower) == 1
        assert tower.factors[0].words == (extension_a2(),)

    def test_destabilized_extension(self):
        """Test the filtration puts the higher-phase simple first"""
        tower = stab.hn(a2(reverse=True), extension_a2())
        assert tower.partition() == (frozenset({1}), frozenset({0}))
        assert [str(w) for f in tower.factors for w in f.words] == ["string e1[0]", "string e2[0]"]
        assert tower.phases[0] > tower.phases[1]

    def test_mass(self):
        """Test mass adds the factor lengths"""
        assert stab.mass(a2(), extension_a2()) == pytest.approx(2.0)
        assert stab.mass(a2(reverse=True), extension_a2()) == pytest.approx(2 * math.sqrt(2))

    def test_band_factors(self):
        """Test an unstable band splits into its two letters"""
        tower = stab.hn(kronecker((-1, 2), (1, 1)), kronecker_band())
        assert tower.partition() == (frozenset({0}), frozenset({1}))

    @pytest.mark.parametrize("count", sorted(A3_CHARGES))
    def test_fast_path_matches_oracle(self, count):
        """Test the grouped filtration equals the destabilizer search"""
        for builder in (stab.star_sgraph, stab.path_sgraph):
            s = builder(3, A3_CHARGES[count])
            for w in stab.heart_objects(s):
                tower = stab.hn(s, w)
                assert tower == stab.hn_oracle(s, w), str(w)
                assert all(a > b for a, b in zip(tower.phases, tower.phases[1:]))

    def test_fast_path_falls_back(self):
        """Test a δ pointing down in phase uses the destabilizer search"""
        s = kronecker()
        tower = stab.hn(s, kronecker_band())
        assert tower == stab.hn_oracle(s, kronecker_band())
        assert len(tower) == 1


class TestHeartObjects:
    """Test the enumeration of heart strings"""

    def test_a2(self):
        """Test A2 has three indecomposables"""
        words = stab.heart_objects(a2())
        assert len(words) == 3

    def test_a3_path(self):
        """Test the path heart is hereditary A3 with six indecomposables"""
        assert len(stab.heart_objects(stab.path_sgraph(3))) == 6

    def test_a3_star(self):
        """Test the star heart composes to zero and has five indecomposables"""
        assert len(stab.heart_objects(stab.star_sgraph(3))) == 5

    def test_kronecker_is_unbounded(self):
        """Test infinitely many strings need a bound"""
        with pytest.raises(UnboundedError):
            stab.heart_objects(kronecker())
        assert len(stab.heart_objects(kronecker(), max_letters=3)) == 6


class TestStableCount:
    """Test stable objects up to shift"""

    def test_a1(self):
        """Test A1 has a single stable object"""
        assert stab.stable_count(stab.path_sgraph(1)) == 1

    def test_a2_chambers(self):
        """Test A2 has 3 or 2 stable objects depending on the phase order"""
        assert stab.stable_count(a2()) == 3
        assert stab.stable_count(a2(reverse=True)) == 2

    @pytest.mark.parametrize("count", sorted(A3_CHARGES))
    def test_a3_chambers(self, count):
        """Test the four A3 charge regions give 3, 4, 5 and 6"""
        assert stab.stable_count(stab.path_sgraph(3, A3_CHARGES[count])) == count

    @pytest.mark.parametrize("count", sorted(A3_CHARGES))
    def test_a3_fixtures(self, count, load_fixture):
        """Test the shipped A3 S-graphs match their names"""
        st = stab.state_from_dict(load_fixture(f"sgraph-a3-{count}.json"))
        assert stab.stable_count(st.sgraph) == count


class TestMutation:
    """Test wall crossing on S-graphs"""

    def test_left_mutation_a2(self):
        """Test tilting at e1 slides e2 along it and keeps e1's charge"""
        st = stab.mutate_left(a2(), "e1")
        s = st.sgraph
        assert s.vertices["v0"] == stab.SVertex("total", ("e2a", "e1a"), (1,))
        assert s.vertices["v1"] == stab.SVertex("total", ("e1b",), ())
        assert s.charge("e1") == G(1, 1)
        assert s.charge("e2") == G(0, 2)
        assert st.classes == {"e1": (-1, 0), "e2": (1, 1)}

    def test_tilt_at_any_simple(self):
        """Test the higher-phase simple tilts too and only opens a strip"""
        st = stab.mutate_left(a2(), "e2")
        s = st.sgraph
        assert s.vertices["v1"] == stab.SVertex("total", ("e1b", "e2a"), (2,))
        assert s.charge("e2") == G(-1, 1)
        assert st.classes == {"e1": (1, 0), "e2": (0, -1)}

    def test_right_undoes_left(self):
        """Test the right mutation at the same edge restores the state"""
        st = stab.initial_state(a2())
        back = stab.mutate_right(stab.mutate_left(st, "e1"), "e1")
        assert dict(back.sgraph.vertices) == dict(st.sgraph.vertices)
        assert {e: back.sgraph.charge(e) for e in back.sgraph.edges} == {
            e: st.sgraph.charge(e) for e in st.sgraph.edges
        }
        assert dict(back.classes) == dict(st.classes)

    def test_unknown_edge(self):
        """Test an unknown edge is invalid input"""
        with pytest.raises(InvalidInputError):
            stab.mutate_left(a2(), "nope")

    def test_colinear_after_crossing(self):
        """Test a crossing that lands two simples on one ray is degenerate"""
        s = stab.path_sgraph(3, [(1, 1), (-1, 1), (0, 1)])
        with pytest.raises(DegenerateChargeError):
            stab.mutate_left(s, "e1")

    def test_involution_on_random_trees(self):
        """Test right∘left and left∘right are the identity on random S-graphs"""
        rng = np.random.default_rng(7)
        for _ in range(50):
            s = stab.random_sgraph(rng, int(rng.integers(1, 5)))
            st = stab.initial_state(s)
            for e in s.edges:
                for first, second in (
                    (stab.mutate_left, stab.mutate_right),
                    (stab.mutate_right, stab.mutate_left),
                ):
                    try:
                        there = first(st, e)
                    except DegenerateChargeError:
                        continue
                    back = second(there, e)
                    assert dict(back.sgraph.vertices) == dict(s.vertices)
                    assert all(back.sgraph.charge(f) == s.charge(f) for f in s.edges)
                    assert dict(back.classes) == dict(st.classes)

    def test_charges_follow_reference_classes(self):
        """Test every simple's charge stays ±Z0 of its class in the upper half-plane"""
        rng = np.random.default_rng(11)
        for charges in A3_CHARGES.values():
            start = stab.initial_state(stab.path_sgraph(3, charges))
            for _ in range(50):
                for st in stab.random_mutation_path(rng, start, 8):
                    assert st.reference_z == start.reference_z
                    assert abs(st.basis_change.det()) == 1
                    for e in st.sgraph.edges:
                        z = st.reference_charge(st.classes[e])
                        assert st.sgraph.charge(e) in (z, -z)
                        assert st.sgraph.charge(e).im > 0

    def test_state_round_trip(self):
        """Test a mutated state survives its JSON document"""
        st = stab.mutate_left(a2(), "e1")
        again = stab.state_from_dict(stab.state_to_dict(st))
        assert stab.chamber_key(again) == stab.chamber_key(st)
        assert dict(again.classes) == dict(st.classes)
        assert dict(again.reference_z) == {"e1": G(1, 1), "e2": G(-1, 1)}

    def test_state_without_reference_charges(self):
        """Test Z0 is solved from the charges when a document omits it"""
        doc = stab.state_to_dict(stab.initial_state(a2()))
        del doc["reference_Z"]
        st = stab.state_from_dict(doc)
        assert dict(st.reference_z) == {"e1": G(1, 1), "e2": G(-1, 1)}

    def test_charge_must_match_class(self):
        """Test a charge that is not ±Z0 of its class is located"""
        doc = stab.state_to_dict(stab.mutate_left(a2(), "e1"))
        doc["edges"]["e2"]["Z"] = {"re": "1", "im": "2"}
        with pytest.raises(FormatError) as excinfo:
            stab.state_from_dict(doc)
        assert excinfo.value.location == "edges.e2"


class TestChamberExploration:
    """Test the chamber graph"""

    def test_a1(self):
        """Test A1 has two hearts of one shape, H and H[1]"""
        graph = stab.explore_chambers(stab.path_sgraph(1), 4)
        assert graph.number_of_nodes() == 2
        assert graph.number_of_edges() == 1
        shapes = {stab.canonical_form(graph.nodes[k]["state"].sgraph) for k in graph.nodes}
        assert len(shapes) == 1

    def test_a2_pentagon(self):
        """Test the A2 interval closes up into a five-cycle"""
        graph = stab.explore_chambers(a2(), 5)
        assert (graph.number_of_nodes(), graph.number_of_edges()) == (5, 5)
        assert [len(c) for c in nx.cycle_basis(graph)] == [5]
        assert max(d for _, d in graph.nodes(data="depth")) == 2
        counts = [stab.stable_count(graph.nodes[k]["state"].sgraph) for k in graph.nodes]
        assert sorted(counts) == [2, 2, 2, 3, 3]

    def test_a3_interval(self):
        """Test the linear A3 interval has fourteen hearts, three walls each"""
        graph = stab.explore_chambers(stab.path_sgraph(3, A3_CHARGES[6]), 6)
        assert (graph.number_of_nodes(), graph.number_of_edges()) == (14, 21)
        assert all(d == 3 for _, d in graph.degree())
        counts = {stab.stable_count(graph.nodes[k]["state"].sgraph) for k in graph.nodes}
        assert counts == {3, 4, 6}

    def test_counts_across_a3_regions(self):
        """Test the stable counts seen over the A3 regions are exactly 3..6"""
        seen = set()
        for charges in A3_CHARGES.values():
            graph = stab.explore_chambers(stab.path_sgraph(3, charges), 6)
            seen |= {stab.stable_count(graph.nodes[k]["state"].sgraph) for k in graph.nodes}
        assert seen == {3, 4, 5, 6}

    def test_depth_zero(self):
        """Test depth zero keeps only the start"""
        assert stab.explore_chambers(a2(), 0).number_of_nodes() == 1

    def test_negative_depth(self):
        with pytest.raises(InvalidInputError):
            stab.explore_chambers(a2(), -1)

    def test_edge_labels(self):
        """Test walls are labelled with side and edge"""
        graph = stab.explore_chambers(a2(), 1)
        labels = {d["label"] for _, _, d in graph.edges(data=True)}
        assert labels == {"left e1", "left e2"}

    def test_degenerate_wall_is_skipped(self):
        """Test a crossing onto colinear charges is left out of the graph"""
        graph = stab.explore_chambers(stab.path_sgraph(3, [(1, 1), (-1, 1), (0, 1)]), 1)
        labels = {d["label"] for _, _, d in graph.edges(data=True)}
        assert labels == {"left e2", "left e3"}

    def test_jobs_give_same_graph(self):
        """Test fanning levels out over worker processes does not change the graph"""
        one = stab.explore_chambers(a2(), 5)
        two = stab.explore_chambers(a2(), 5, jobs=2)
        assert set(one.nodes) == set(two.nodes)
        assert {frozenset((u, v)): d["label"] for u, v, d in one.edges(data=True)} == {
            frozenset((u, v)): d["label"] for u, v, d in two.edges(data=True)
        }


class TestAxioms:
    """Test the stability axioms on every explored chamber"""

    def test_a3_chambers(self):
        """Test HN, Hom vanishing and support on the linear A3 chambers"""
        graph = stab.explore_chambers(stab.path_sgraph(3, A3_CHARGES[6]), 6)
        for key in graph.nodes:
            report = stab.verify_axioms(graph.nodes[key]["state"])
            assert report.ok, [str(i) for i in report.issues]
            assert report.support > 0

    def test_support_constant_a2(self):
        """Test the support bound of the A2 triangle"""
        assert stab.support_constant(a2()) == Fraction(1, 2)

    def test_support_invariant_under_rotation(self):
        """Test rotating every charge by a unit keeps the bound"""
        s = stab.path_sgraph(3, A3_CHARGES[5])
        u = G(Fraction(3, 5), Fraction(4, 5))
        rotated = s.with_charges({e: s.charge(e) * u for e in s.edges})
        assert stab.support_constant(rotated) == stab.support_constant(s)


class TestStabMetric:
    """Test the distance between stability conditions"""

    def test_zero_on_itself(self):
        """Test a condition is at distance zero from itself"""
        assert stab.stab_metric(a2(), a2()) == 0.0

    def test_scaling(self):
        """Test doubling every charge moves masses only"""
        s = a2()
        doubled = s.with_charges({e: s.charge(e) * 2 for e in s.edges})
        assert stab.stab_metric(s, doubled) == pytest.approx(math.log(2))

    def test_different_graphs(self):
        """Test conditions on different S-graphs are not compared"""
        with pytest.raises(InvalidInputError):
            stab.stab_metric(stab.path_sgraph(3), stab.star_sgraph(3))


class TestReports:
    """Test DOT and CSV output"""

    def test_chamber_dot(self):
        """Test the chamber graph renders as undirected DOT"""
        text = stab.chamber_dot(stab.explore_chambers(a2(), 6))
        assert text.startswith("graph chambers {")
        assert text.count("--") == 5

    def test_sgraph_dot(self):
        """Test the S-graph renders its edges"""
        text = stab.sgraph_dot(a2())
        assert "e1 Z=1+1i" in text

    def test_sweep(self, tmp_path):
        """Test the sweep table"""
        states = [stab.path_sgraph(3, A3_CHARGES[k]) for k in (3, 6)]
        df = stab.stable_count_sweep(states, ["low", "high"])
        assert list(df.columns) == ["chamber", "charges", "stable_count", "support"]
        assert list(df["stable_count"]) == [3, 6]
        out = tmp_path / "sweep.csv"
        df.to_csv(out, index=False)
        assert list(pd.read_csv(out)["chamber"]) == ["low", "high"]


class TestSGraphJson:
    """Test sgraph.v1 documents"""

    def test_wrong_format(self):
        """Test the format tag is checked"""
        with pytest.raises(FormatError):
            stab.sgraph_from_dict({"format": "surface.v1"})

    def test_bad_charge(self, load_fixture):
        """Test an unreadable charge names its edge"""
        doc = load_fixture("sgraph-a2.json")
        doc["edges"]["e1"]["Z"] = {"re": "x"}
        with pytest.raises(FormatError) as excinfo:
            stab.sgraph_from_dict(doc)
        assert excinfo.value.location == "edges.e1"

    def test_lower_half_plane_start(self, load_fixture):
        """Test a starting chamber below the real axis is degenerate"""
        doc = load_fixture("sgraph-a2.json")
        doc["edges"]["e1"]["Z"] = {"re": "1", "im": "-1"}
        with pytest.raises(DegenerateChargeError):
            stab.state_from_dict(doc)

    def test_class_table_must_be_unimodular(self, load_fixture):
        """Test a class table that is not invertible over ℤ is rejected"""
        doc = load_fixture("sgraph-a2.json")
        doc["reference"] = ["e1", "e2"]
        doc["classes"] = {"e1": [2, 0], "e2": [0, 1]}
        with pytest.raises(FormatError):
            stab.state_from_dict(doc)
