"""Tests for string and band words and the decomposition of twisted complexes"""

from fractions import Fraction

import numpy as np
import pytest

from fukayagen import gentle, linalg, strings, surface, twcx
from fukayagen.errors import FormatError, InvalidInputError, PreconditionError
from fukayagen.strings import BACKWARD, FORWARD, Connector, CurveWord, Decomposition, Letter

A = "X1+>X2-"
B = "X2+>X3-"


def category(g=None, field="q"):
    p, disks = gentle.from_ribbon(g or surface.linear_tree(3))
    return gentle.Products(p, disks, linalg.field(field))


def kronecker_category():
    return category(surface.annulus(1, 1))


def kronecker_band(m=2):
    return CurveWord.band(
        [Letter("X0", 0), Letter("X1", -1)],
        [Connector(("X0b>X1a",), FORWARD), Connector(("X0a>X1b",), BACKWARD)],
        [[m]],
    )


class TestValidateWord:
    """Test the checks on words"""

    def test_fixture_is_valid(self, load_fixture):
        """Test the A_3 string fixture validates"""
        w = strings.word_from_dict(load_fixture("word-a3.json"))
        assert strings.validate_word(category(), w).ok

    def test_wrong_shift(self):
        """Test a connector whose degree does not match the shifts"""
        w = CurveWord.string([Letter("X1", 0), Letter("X2", 0)], [Connector((A,), FORWARD)])
        report = strings.validate_word(category(), w)

        assert [i.location for i in report.issues] == ["connectors[0]"]
        assert "degree" in report.issues[0].message

    def test_not_reduced(self):
        """Test going out and straight back along the same arrow"""
        w = CurveWord.string(
            [Letter("X1", 0), Letter("X2", -1), Letter("X1", 0)],
            [Connector((A,), FORWARD), Connector((A,), BACKWARD)],
        )
        report = strings.validate_word(category(), w)

        assert report.issues[0].location == "letters[1]"
        assert "not reduced" in report.issues[0].message

    def test_forward_forward_needs_relation(self):
        """Test two forward connectors that compose give δ² ≠ 0"""
        w = CurveWord.string(
            [Letter("X1", 0), Letter("X2", -1), Letter("X3", -2)],
            [Connector((A,), FORWARD), Connector((B,), FORWARD)],
        )
        report = strings.validate_word(category(), w)

        assert not report.ok
        assert "not a relation" in report.issues[0].message
        with pytest.raises(InvalidInputError):
            strings.word_to_twcx(category(), w)

    def test_unknown_arc(self):
        """Test letters on unknown arcs are reported"""
        w = CurveWord.string([Letter("Y", 0)])
        assert strings.validate_word(category(), w).issues[0].location == "letters[0]"

    def test_band_needs_invertible_monodromy(self):
        """Test a singular local system is rejected"""
        report = strings.validate_word(kronecker_category(), kronecker_band(0))
        assert any(i.location == "monodromy" for i in report.issues)

    def test_band(self):
        """Test the Kronecker band validates"""
        assert strings.validate_word(kronecker_category(), kronecker_band()).ok


class TestWordToComplex:
    """Test building twisted complexes from words"""

    def test_string(self, load_fixture):
        """Test a string gives one copy per letter and one δ entry per connector"""
        w = strings.word_from_dict(load_fixture("word-a3.json"))
        t = strings.word_to_twcx(category(), w)

        assert [(s.arc, s.shift) for s in t.summands] == [("X1", 0), ("X2", -1)]
        assert list(t.delta) == [(1, 0)]
        assert twcx.verify_mc(t)

    def test_dimension(self, load_fixture):
        """Test a string of dimension two doubles every copy"""
        doc = load_fixture("word-a3.json")
        doc["dimension"] = 2
        t = strings.word_to_twcx(category(), strings.word_from_dict(doc))

        assert len(t) == 4
        assert len(t.delta) == 2

    def test_band_connectors_share_an_entry(self):
        """Test both Kronecker arrows land in the same δ entry"""
        cat = kronecker_category()
        t = strings.word_to_twcx(cat, kronecker_band())
        K = cat.field
        a, b = cat.p.path(["X0b>X1a"]), cat.p.path(["X0a>X1b"])

        assert list(t.delta) == [(1, 0)]
        assert t.delta[(1, 0)].coefficient(a) == K.one
        assert t.delta[(1, 0)].coefficient(b) == K.convert(2)


class TestNormalForm:
    """Test orientation and rotation independence"""

    def test_string_reversal(self, load_fixture):
        """Test a string and its reversal share a normal form"""
        K = linalg.field("q")
        w = strings.word_from_dict(load_fixture("word-a3.json"))

        assert w.reversed().normal_form(K) == w.normal_form(K)
        assert w.reversed().reversed() == w

    def test_band_rotation(self):
        """Test rotating a band keeps its normal form"""
        K = linalg.field("q")
        w = kronecker_band()
        rotated = CurveWord.band(
            w.letters[1:] + w.letters[:1], w.connectors[1:] + w.connectors[:1], w.monodromy
        )

        assert w.normal_form(K).kind == "band"
        assert strings.validate_word(kronecker_category(), w.normal_form(K)).ok
        assert rotated.normal_form(K).letters == w.normal_form(K).letters


class TestDecomposition:
    """Test splitting complexes into indecomposable words"""

    def test_string_fixture(self, load_fixture):
        """Test a string complex is its own single summand"""
        cat = category()
        w = strings.word_from_dict(load_fixture("word-a3.json"))
        d = strings.twcx_to_decomposition(strings.word_to_twcx(cat, w))

        assert d.components == ((w.normal_form(cat.field), 1),)

    def test_single_object(self):
        """Test a lone arc is a one-letter string"""
        cat = category()
        d = strings.twcx_to_decomposition(twcx.single(cat, "X2", 3))

        assert d.components == ((CurveWord.string([Letter("X2", 3)]), 1),)

    def test_contractible(self):
        """Test the cone of an identity decomposes to nothing"""
        cat = category()
        t = twcx.cone(twcx.unit(twcx.single(cat, "X1")))

        assert strings.twcx_to_decomposition(t).components == ()

    def test_multiplicity(self, load_fixture):
        """Test two copies of a string are counted once with multiplicity two"""
        cat = category()
        w = strings.word_from_dict(load_fixture("word-a3.json"))
        t = twcx.direct_sum(strings.word_to_twcx(cat, w), strings.word_to_twcx(cat, w))

        assert strings.twcx_to_decomposition(t).components == ((w.normal_form(cat.field), 2),)

    def test_band(self):
        """Test the Kronecker band comes back as one band"""
        cat = kronecker_category()
        d = strings.twcx_to_decomposition(strings.word_to_twcx(cat, kronecker_band()))

        assert d.size == 1
        word, _ = d.components[0]
        assert word.kind == "band"
        assert word.dimension == 1

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_random_complex_keeps_class(self, seed):
        """Test reassembling a decomposition keeps the class of the complex"""
        cat = category()
        t = strings.random_complex(np.random.default_rng(seed), cat, max_copies=5)
        d = strings.twcx_to_decomposition(t)

        assert twcx.class_vector(strings.reassemble(cat, d)) == twcx.class_vector(t)

    @pytest.mark.parametrize("seed", range(100))
    def test_reassembled_is_isomorphic(self, seed):
        """Test reassembling a decomposition gives the minimal model of the complex"""
        cat = category(field="f3")
        t = strings.random_complex(np.random.default_rng(seed), cat, max_copies=5)
        d = strings.twcx_to_decomposition(t)

        assert twcx.is_isomorphic(
            strings.reassemble(cat, d), twcx.minimize(t), tries=64, rng=np.random.default_rng(seed)
        )

    def test_needs_gentle_presentation(self):
        """Test a non-proper presentation is refused"""
        cat = category(surface.torus_two_loops())
        with pytest.raises(PreconditionError):
            strings.twcx_to_decomposition(twcx.single(cat, "A"))


class TestRandomWords:
    """Test the seeded word generator"""

    @pytest.mark.parametrize("seed", range(5))
    def test_valid(self, seed):
        """Test every generated word validates"""
        cat = category()
        w = strings.random_word(np.random.default_rng(seed), cat)
        assert strings.validate_word(cat, w).ok


class TestWordJson:
    """Test word and decomposition documents"""

    def test_band_needs_monodromy(self):
        """Test a band document without a matrix is refused"""
        doc = strings.word_to_dict(kronecker_band())
        del doc["monodromy"]
        with pytest.raises(FormatError) as exc:
            strings.word_from_dict(doc)
        assert exc.value.location == "monodromy"

    def test_fraction_monodromy(self):
        """Test rational entries travel as strings"""
        band = kronecker_band()
        w = CurveWord.band(band.letters, band.connectors, [[Fraction(1, 2)]])
        doc = strings.word_to_dict(w)

        assert doc["monodromy"] == [["1/2"]]
        assert strings.word_from_dict(doc) == w

    def test_bad_scalar(self):
        """Test a float entry is rejected with its location"""
        doc = strings.word_to_dict(kronecker_band())
        doc["monodromy"] = [[0.5]]
        with pytest.raises(FormatError) as exc:
            strings.word_from_dict(doc)
        assert exc.value.location == "monodromy[0][0]"

    def test_decomposition_round_trip(self):
        """Test a decomposition survives to_dict / from_dict"""
        w = CurveWord.string([Letter("X1", 0), Letter("X2", -1)], [Connector((A,), FORWARD)])
        d = Decomposition(((w, 2),))

        assert strings.decomposition_from_dict(strings.decomposition_to_dict(d)) == d

    def test_bad_multiplicity(self):
        """Test a zero multiplicity is a format error"""
        doc = {"components": [{"word": {"letters": [{"arc": "X1"}]}, "multiplicity": 0}]}
        with pytest.raises(FormatError) as exc:
            strings.decomposition_from_dict(doc)
        assert exc.value.location == "components[0]"
