"""Tests for exact linear algebra over ℚ and F_p"""

from fractions import Fraction

import pytest

from fukayagen import linalg
from fukayagen.errors import InvalidInputError


class TestField:
    """Test field construction and scalar conversion"""

    @pytest.mark.parametrize("name", ["f4", "f1", "r"])
    def test_bad_name(self, name):
        """Test non-prime sizes and unknown names are refused"""
        with pytest.raises(InvalidInputError):
            linalg.Field(name)

    def test_rational(self):
        K = linalg.field("q")

        assert K.to_python(K.convert("1/2")) == Fraction(1, 2)
        assert K.to_python(K.convert(4)) == 4
        assert K.format(K.convert(Fraction(-3, 6))) == "-1/2"

    def test_prime_field_division(self):
        """Test 1/2 is 2 in F_3"""
        K = linalg.field("f3")
        assert K.to_python(K.convert(Fraction(1, 2))) == 2

    def test_elements(self):
        assert len(linalg.field("f3").elements()) == 3
        with pytest.raises(InvalidInputError):
            linalg.field("q").elements()

    def test_cached(self):
        assert linalg.field("f5") is linalg.field("f5")


class TestMatrices:
    """Test rank, inverse and subspace helpers"""

    def test_rank_depends_on_field(self):
        """Test [[1, 1], [1, -1]] is singular only in characteristic two"""
        rows = [[1, 1], [1, -1]]

        assert linalg.rank(linalg.field("q"), linalg.field("q").matrix(rows)) == 2
        assert linalg.rank(linalg.field("f2"), linalg.field("f2").matrix(rows)) == 1

    def test_inverse(self):
        K = linalg.field("q")
        m = K.matrix([[1, 1], [0, 1]])

        assert K.to_python_rows(linalg.inverse(K, m)) == [[1, -1], [0, 1]]

    def test_singular_inverse(self):
        K = linalg.field("q")
        with pytest.raises(InvalidInputError):
            linalg.inverse(K, K.matrix([[1, 2], [2, 4]]))

    def test_nullspace(self):
        K = linalg.field("q")
        assert K.to_python_rows(linalg.nullspace(K, K.matrix([[1, 1]]))) == [[-1], [1]]

    def test_solve_inconsistent(self):
        """Test an inconsistent system has no solution"""
        K = linalg.field("q")
        a = K.matrix([[1, 0], [0, 0]])

        assert linalg.solve(K, a, K.column([0, 1])) is None

    def test_intersect(self):
        """Test two coordinate planes in ℚ³ meet in a line"""
        K = linalg.field("q")
        s = K.matrix([[1, 0], [0, 1], [0, 0]])
        t = K.matrix([[0, 0], [1, 0], [0, 1]])
        meet = linalg.intersect(K, 3, s, t)

        assert linalg.dim(K, meet) == 1
        assert linalg.contains(K, meet, K.column([0, 1, 0]))

    def test_empty_shapes(self):
        """Test zero-size matrices need no special casing"""
        K = linalg.field("f2")

        assert linalg.rank(K, K.zeros(0, 3)) == 0
        assert linalg.ncols(linalg.nullspace(K, K.zeros(0, 2))) == 2
        assert linalg.is_invertible(K, K.zeros(0, 0))
