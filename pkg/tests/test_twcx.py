"""Tests for twisted complexes: Maurer-Cartan, cones, Hom cohomology, minimal models"""

import pytest

from fukayagen import gentle, linalg, surface, twcx
from fukayagen.errors import FormatError, InvalidInputError, PreconditionError
from fukayagen.gentle import LinCombo
from fukayagen.twcx import Summand, TwistedComplex

A = "X1+>X2-"
B = "X2+>X3-"


def category(g=None, field="q"):
    p, disks = gentle.from_ribbon(g or surface.linear_tree(2))
    return gentle.Products(p, disks, linalg.field(field))


def arrow_map(cat):
    """The degree zero map X1 -> X2 given by the arrow"""
    x1, x2 = twcx.single(cat, "X1"), twcx.single(cat, "X2")
    return twcx.morphism(x1, x2, {(0, 0): LinCombo.of(cat.field, cat.p.path([A]))})


class TestConstruction:
    """Test building complexes and the degree checks on δ"""

    def test_degree_mismatch(self):
        """Test a δ entry of the wrong degree is refused"""
        cat = category()
        delta = {(1, 0): LinCombo.of(cat.field, cat.p.path([A]))}
        with pytest.raises(InvalidInputError):
            TwistedComplex(cat, (Summand("X1", 0), Summand("X2", 0)), delta)

    def test_diagonal_entry(self):
        """Test δ may not map a copy to itself"""
        cat = category()
        delta = {(0, 0): LinCombo.of(cat.field, cat.p.identity("X1"))}
        with pytest.raises(InvalidInputError):
            TwistedComplex(cat, (Summand("X1", 0),), delta)

    def test_shift(self):
        """Test shifting moves every copy and keeps δ"""
        cat = category()
        c = twcx.cone(arrow_map(cat))
        moved = twcx.shift(c, 2)

        assert [s.shift for s in moved.summands] == [3, 2]
        assert moved.delta == c.delta

    def test_direct_sum_needs_one_category(self):
        """Test summing complexes over different categories fails"""
        with pytest.raises(InvalidInputError):
            twcx.direct_sum(twcx.single(category(), "X1"), twcx.single(category(), "X1"))


class TestMaurerCartan:
    """Test the Maurer-Cartan check"""

    def test_cone(self):
        """Test the cone of the arrow satisfies Maurer-Cartan"""
        cat = category()
        c = twcx.cone(arrow_map(cat))

        assert [(s.arc, s.shift) for s in c.summands] == [("X1", 1), ("X2", 0)]
        assert twcx.verify_mc(c)

    def test_composable_delta_fails(self):
        """Test δ with a nonzero square fails"""
        cat = category(surface.linear_tree(3))
        K = cat.field
        t = TwistedComplex(
            cat,
            (Summand("X1", 0), Summand("X2", -1), Summand("X3", -2)),
            {
                (1, 0): LinCombo.of(K, cat.p.path([A])),
                (2, 1): LinCombo.of(K, cat.p.path([B])),
            },
        )
        assert not twcx.verify_mc(t)

    def test_disk_tower(self, load_fixture):
        """Test the tower along a square satisfies Maurer-Cartan"""
        cat = category(surface.from_dict(load_fixture("disk4.json")))
        t = twcx.disk_tower(cat)

        assert [s.arc for s in t.summands] == ["E1", "E2", "E3"]
        assert twcx.is_triangular(t)
        assert twcx.verify_mc(t)

    def test_cone_needs_closed_degree_zero(self):
        """Test the cone of a degree one map is refused"""
        cat = category(surface.linear_tree(2, [1]))
        x1, x2 = twcx.single(cat, "X1"), twcx.single(cat, "X2")
        f = twcx.morphism(x1, x2, {(0, 0): LinCombo.of(cat.field, cat.p.path([A]))}, degree=1)
        with pytest.raises(PreconditionError):
            twcx.cone(f)


class TestMorphisms:
    """Test the differential and composition of morphisms"""

    def test_arrow_is_closed(self):
        """Test a map between single objects has zero differential"""
        f = arrow_map(category())

        assert twcx.is_closed(f)
        d = twcx.morphism_differential(f)
        assert d.degree == 1
        assert not d

    def test_inclusion_into_cone_is_not_closed(self):
        """Test the identity onto the shifted copy hits δ of the cone"""
        cat = category()
        c = twcx.cone(arrow_map(cat))
        x1 = twcx.single(cat, "X1")
        g = twcx.morphism(x1, c, {(0, 0): LinCombo.of(cat.field, cat.p.identity("X1"))}, -1)

        assert not twcx.is_closed(g)
        assert list(twcx.morphism_differential(g).entries) == [(1, 0)]

    def test_compose_with_unit(self):
        """Test composing with the unit of an unshifted object keeps the map"""
        cat = category()
        f = arrow_map(cat)
        g = twcx.compose_morphisms(twcx.unit(f.target), f)

        assert g.degree == 0
        assert g.entries == f.entries

    def test_compose_mismatch(self):
        """Test morphisms must meet at the same complex"""
        f = arrow_map(category())
        with pytest.raises(InvalidInputError):
            twcx.compose_morphisms(f, f)


class TestHomCohomology:
    """Test graded Hom dimensions"""

    def test_between_arcs(self):
        """Test Hom(X1, X2) is one-dimensional in degree zero"""
        cat = category()
        x1, x2 = twcx.single(cat, "X1"), twcx.single(cat, "X2")

        assert twcx.hom_cohomology(x1, x2) == {0: 1}
        assert twcx.hom_cohomology(x2, x1) == {}

    def test_shifted(self):
        """Test shifting the target moves the degree"""
        cat = category()
        x1, x2 = twcx.single(cat, "X1"), twcx.single(cat, "X2", 2)

        assert twcx.hom_cohomology(x1, x2) == {-2: 1}

    def test_endomorphisms_of_cone(self):
        """Test the cone of the arrow is indecomposable with one-dimensional End"""
        cat = category()
        c = twcx.cone(arrow_map(cat))

        assert twcx.hom_cohomology(c, c) == {0: 1}

    def test_contractible(self):
        """Test the cone of an identity has no cohomology"""
        cat = category()
        c = twcx.cone(twcx.unit(twcx.single(cat, "X1")))

        assert twcx.hom_cohomology(c, c) == {}

    def test_needs_proper_presentation(self):
        """Test Hom complexes refuse a non-proper presentation"""
        cat = category(surface.torus_two_loops())
        with pytest.raises(PreconditionError):
            twcx.hom_complex(twcx.single(cat, "A"), twcx.single(cat, "B"))


class TestMinimize:
    """Test Gaussian elimination of identity components"""

    def test_drops_contractible_cone(self):
        """Test a contractible summand disappears"""
        cat = category()
        t = twcx.direct_sum(twcx.cone(twcx.unit(twcx.single(cat, "X1"))), twcx.single(cat, "X2"))

        assert twcx.minimize(t) == twcx.single(cat, "X2")

    def test_minimal_complex_is_unchanged(self):
        """Test a complex without identity components is kept"""
        cat = category()
        c = twcx.cone(arrow_map(cat))

        assert twcx.minimize(c) == c

    def test_contractible_cone_with_disks(self):
        """Test a contractible summand disappears when the category has a disk"""
        cat = category(surface.disk_polygon(3))
        t = twcx.direct_sum(twcx.cone(twcx.unit(twcx.single(cat, "E1"))), twcx.single(cat, "E2"))

        assert twcx.minimize(t) == twcx.single(cat, "E2")

    def test_higher_product_cancels_copies(self):
        """Test μ³ around the triangle leaves an identity E1 -> E1[-1] that cancels too"""
        cat = category(surface.disk_polygon(3), field="f3")
        K = cat.field
        a1, a2, a3 = (cat.p.path([n]) for n in ("E1i>E2i", "E2i>E3i", "E3i>E1i"))
        copies = (
            Summand("E1", 0),
            Summand("E2", 1),
            Summand("E2", 0),
            Summand("E3", 0),
            Summand("E1", -1),
        )
        delta = {
            (2, 0): LinCombo.of(K, a1),
            (2, 1): LinCombo.of(K, cat.p.identity("E2")),
            (3, 1): LinCombo.of(K, a2),
            (4, 3): LinCombo.of(K, a3),
        }
        t = TwistedComplex(cat, copies, delta)
        assert twcx.verify_mc(t)

        m = twcx.minimize(t)
        assert m == twcx.single(cat, "E3")
        for arc in cat.p.vertices:
            x = twcx.single(cat, arc)
            assert twcx.hom_cohomology(x, m) == twcx.hom_cohomology(x, t)


class TestIsomorphism:
    """Test the isomorphism search"""

    def test_minimal_model(self):
        """Test a complex is isomorphic to a copy of itself"""
        cat = category(field="f3")
        t = twcx.minimize(
            twcx.direct_sum(twcx.cone(twcx.unit(twcx.single(cat, "X1"))), twcx.single(cat, "X2"))
        )
        assert twcx.is_isomorphic(t, twcx.single(cat, "X2"))

    def test_different_classes(self):
        """Test complexes with different classes are not isomorphic"""
        cat = category(field="f3")
        assert not twcx.is_isomorphic(twcx.single(cat, "X1"), twcx.single(cat, "X2"))

    def test_same_class_different_objects(self):
        """Test the cone and X2 ⊕ X1[1] share a class but differ"""
        cat = category(field="f3")
        c = twcx.cone(arrow_map(cat))
        split = twcx.direct_sum(twcx.single(cat, "X1", 1), twcx.single(cat, "X2"))

        assert twcx.class_vector(c) == twcx.class_vector(split) == {"X1": -1, "X2": 1}
        assert not twcx.is_isomorphic(c, split)

    @pytest.mark.parametrize("n", range(3, 9))
    def test_disk_tower_is_last_side(self, n, load_fixture):
        """Test E_1 -> ... -> E_{n-1} is E_n shifted down by the degree of the last corner"""
        cat = category(surface.from_dict(load_fixture(f"disk{n}.json")), field="f3")
        last = cat.disks[0].corners[-1]
        tower = twcx.disk_tower(cat)

        assert last.source == f"E{n}"
        assert twcx.verify_mc(tower)
        assert twcx.is_isomorphic(tower, twcx.single(cat, f"E{n}", -last.degree))
        assert not twcx.is_isomorphic(tower, twcx.single(cat, f"E{n}", 1 - last.degree))

    def test_disk_tower_over_rationals(self):
        """Test the randomized search over ℚ still finds the triangle isomorphism"""
        cat = category(surface.disk_polygon(3))
        last = cat.disks[0].corners[-1]

        assert twcx.is_isomorphic(
            twcx.disk_tower(cat), twcx.single(cat, "E3", -last.degree), tries=16
        )


class TestComplexJson:
    """Test twisted complex documents"""

    def test_round_trip(self):
        """Test a cone survives to_dict / from_dict over the same category"""
        cat = category()
        c = twcx.cone(arrow_map(cat))

        assert twcx.from_dict(twcx.to_dict(c), cat) == c

    def test_embedded_presentation(self):
        """Test a document may carry its own presentation"""
        cat = category()
        doc = twcx.to_dict(twcx.cone(arrow_map(cat)))
        doc["presentation"] = gentle.presentation_to_dict(cat.p)

        loaded = twcx.from_dict(doc)
        assert [(s.arc, s.shift) for s in loaded.summands] == [("X1", 1), ("X2", 0)]

    def test_missing_presentation(self):
        """Test a document with no category to load into"""
        with pytest.raises(FormatError) as exc:
            twcx.from_dict({"summands": [{"arc": "X1"}]})
        assert exc.value.location == "presentation"

    def test_bad_path(self):
        """Test a δ entry naming an unknown arrow is located"""
        cat = category()
        doc = twcx.to_dict(twcx.cone(arrow_map(cat)))
        doc["delta"][0]["terms"][0]["path"] = ["nope"]
        with pytest.raises(FormatError) as exc:
            twcx.from_dict(doc, cat)
        assert exc.value.location == "delta[0]"
