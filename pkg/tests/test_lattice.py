"""Tests for the charge lattice, classes of objects and the Euler form"""

import pytest
from sympy import Matrix

from fukayagen import gentle, lattice, linalg, strings, surface, twcx
from fukayagen.errors import InvalidInputError, PreconditionError
from fukayagen.gentle import LinCombo


def category(g):
    p, disks = gentle.from_ribbon(g)
    return gentle.Products(p, disks, linalg.field("q"))


class TestK0:
    """Test the lattice presented by arcs modulo face relations"""

    def test_tree_is_free(self):
        """Test a tree has no closed faces and so no relations"""
        lat = lattice.k0(surface.linear_tree(3))

        assert lat.generators == ("X1", "X2", "X3")
        assert lat.rank == 3
        assert lat.torsion() == []
        assert lat.faces == ()

    def test_triangle(self):
        """Test the sign flips after the even corners of a triangle"""
        lat = lattice.k0(surface.disk_polygon(3))

        assert lat.relations == ((1, 1, -1),)
        assert lat.faces == ("p",)
        assert lat.rank == 2

    def test_square(self, load_fixture):
        """Test a square gives one relation with a single sign change"""
        lat = lattice.k0(surface.from_dict(load_fixture("disk4.json")))

        assert lat.relations == ((1, 1, 1, -1),)
        assert lat.rank == 3

    def test_torus_has_torsion(self):
        """Test the torus relation 2A = 0 leaves a ℤ/2"""
        lat = lattice.k0(surface.torus_two_loops())

        assert lat.relations == ((2, 0),)
        assert lat.rank == 1
        assert lat.torsion() == [2]

    def test_face_relation(self):
        """Test the face relation of the triangle by arc"""
        assert lattice.face_relation(surface.disk_polygon(3), "p") == {"E1": 1, "E2": 1, "E3": -1}

    def test_invalid_graph(self, load_fixture):
        """Test an invalid graph has no lattice"""
        with pytest.raises(InvalidInputError):
            lattice.k0(surface.from_dict(load_fixture("bad.json")))


class TestClasses:
    """Test classes of complexes and words"""

    def test_cone(self):
        """Test the cone counts its shifted copy with a minus sign"""
        cat = category(surface.linear_tree(2))
        x1, x2 = twcx.single(cat, "X1"), twcx.single(cat, "X2")
        f = twcx.morphism(x1, x2, {(0, 0): LinCombo.of(cat.field, cat.p.path(["X1+>X2-"]))})
        lat = lattice.k0(surface.linear_tree(2))

        assert lattice.class_of(lat, twcx.cone(f)).as_dict() == {"X1": -1, "X2": 1}

    def test_word(self, load_fixture):
        """Test a word has the class of its letters"""
        lat = lattice.k0(surface.linear_tree(3))
        w = strings.word_from_dict(load_fixture("word-a3.json"))

        assert lattice.class_of(lat, w).as_dict() == {"X1": 1, "X2": -1}

    def test_unknown_object(self):
        """Test only complexes and words have classes"""
        with pytest.raises(InvalidInputError):
            lattice.class_of(lattice.k0(surface.linear_tree(2)), 5)

    def test_unknown_arc(self):
        """Test a count on an arc outside the lattice is refused"""
        with pytest.raises(InvalidInputError):
            lattice.k0(surface.linear_tree(2)).vector({"X7": 1})

    def test_equivalent_modulo_face(self):
        """Test E1 + E2 and E3 agree in the triangle lattice"""
        lat = lattice.k0(surface.disk_polygon(3))
        a, b = lat.vector({"E1": 1, "E2": 1}), lat.vector({"E3": 1})

        assert lattice.equivalent(lat, a, b)
        assert not lattice.equivalent(lat, a, lat.zero())

    def test_equivalent_sees_torsion(self):
        """Test A is not zero on the torus but 2A is"""
        lat = lattice.k0(surface.torus_two_loops())

        assert not lattice.equivalent(lat, lat.vector({"A": 1}), lat.zero())
        assert lattice.equivalent(lat, lat.vector({"A": 2}), lat.zero())
        assert lattice.equivalent(lat, lat.vector({"A": 3, "B": 1}), lat.vector({"A": 1, "B": 1}))

    def test_arithmetic(self):
        lat = lattice.k0(surface.linear_tree(2))
        a, b = lat.vector({"X1": 1}), lat.vector({"X2": 2})

        assert (a + b).coords == (1, 2)
        assert (a - b).as_dict() == {"X1": 1, "X2": -2}

    def test_mismatched_generators(self):
        """Test vectors from different lattices do not add"""
        a = lattice.k0(surface.linear_tree(2)).zero()
        b = lattice.k0(surface.linear_tree(3)).zero()
        with pytest.raises(InvalidInputError):
            a + b


class TestEulerForm:
    """Test the Euler form and its radical"""

    def test_a2(self):
        """Test A_2 has an upper triangular form and no radical"""
        g = surface.linear_tree(2)
        chi = lattice.euler_form(lattice.k0(g), category(g))

        assert chi == Matrix([[1, 1], [0, 1]])
        assert lattice.radical(chi) == []

    def test_kronecker(self):
        """Test the Kronecker form is degenerate along the band class"""
        g = surface.annulus(1, 1)
        lat = lattice.k0(g)
        chi = lattice.euler_form(lat, category(g))

        assert chi == Matrix([[1, 2], [0, 1]])
        assert lattice.radical(chi) in ([(1, -1)], [(-1, 1)])
        assert lattice.pairing(chi, lat.vector({"X0": 1}), lat.vector({"X1": 1})) == 2

    def test_needs_smooth(self):
        """Test the triangle is proper but not smooth"""
        g = surface.disk_polygon(3)
        with pytest.raises(PreconditionError):
            lattice.euler_form(lattice.k0(g), category(g))

    def test_needs_proper(self):
        """Test the torus presentation is not proper"""
        g = surface.torus_two_loops()
        with pytest.raises(PreconditionError):
            lattice.euler_form(lattice.k0(g), category(g))


class TestSpan:
    """Test rational span membership"""

    def test_in_span(self):
        assert lattice.in_span([(1, 1, -1)], (2, 2, -2))
        assert not lattice.in_span([(1, 1, -1)], (1, 0, 0))

    def test_empty(self):
        """Test only zero lies in the empty span"""
        assert lattice.in_span([], (0, 0))
        assert not lattice.in_span([], (0, 1))
