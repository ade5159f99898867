"""
Test suite for the normed division algebras
"""

from fractions import Fraction

import numpy as np
import pytest

from nda_riccati.exceptions import AlgebraDivisionError, ContractViolationError, ExpressionParseError
from nda_riccati.services.algebra import (
    AlgebraElement,
    AlgebraTag,
    build_algebra,
    check_composition_laws,
    check_derivative_rules,
    conj,
    inner,
    inv,
    mul,
    norm,
    scalar_part,
    vector_part,
)
from nda_riccati.utils.report_utils import format_scalar, parse_scalar


class TestAlgebraTag:
    """Test cases for algebra tags"""

    def test_dimensions(self):
        """Test that dimensions double at each level"""
        assert [t.dim for t in AlgebraTag] == [1, 2, 4, 8]

    def test_parse_aliases(self):
        """Test that blackboard-bold and lower-case names are accepted"""
        assert AlgebraTag.parse("𝕆") == AlgebraTag.O
        assert AlgebraTag.parse("h") == AlgebraTag.H
        assert AlgebraTag.parse(AlgebraTag.C) == AlgebraTag.C

    def test_parse_unknown(self):
        """Test that unknown algebra names are rejected"""
        with pytest.raises(ContractViolationError):
            AlgebraTag.parse("S")


class TestStructureConstants:
    """Test cases for Cayley-Dickson structure constants"""

    def test_real_table(self):
        """Test that the real algebra is the unit algebra"""
        assert build_algebra(AlgebraTag.R).as_rows() == [["+e0"]]

    def test_octonion_squares(self):
        """Test that imaginary units square to -1"""
        sc = build_algebra(AlgebraTag.O)
        for i in range(1, 8):
            assert sc.product(i, i) == (-1, 0)

    def test_octonion_e1_e2(self):
        """Test the Cayley-Dickson sign convention e1 e2 = e3"""
        sc = build_algebra(AlgebraTag.O)
        assert sc.product(1, 2) == (1, 3)
        assert sc.product(2, 1) == (-1, 3)

    def test_unit_row_and_column(self):
        """Test that e0 is a two-sided identity"""
        sc = build_algebra(AlgebraTag.O)
        for i in range(8):
            assert sc.product(0, i) == (1, i)
            assert sc.product(i, 0) == (1, i)

    def test_float_path_matches_exact(self):
        """Test that the array product agrees with the generic product"""
        sc = build_algebra(AlgebraTag.O)
        rng = np.random.default_rng(3)
        x, y = rng.standard_normal(8), rng.standard_normal(8)
        expected = np.array(sc.multiply(list(x), list(y)))
        assert np.allclose(sc.multiply_array(x, y), expected, atol=1e-14)


class TestAlgebraElement:
    """Test cases for element arithmetic"""

    def setup_method(self):
        """Set up octonion basis elements"""
        self.e = [AlgebraElement.basis(AlgebraTag.O, i) for i in range(8)]
        self.one = AlgebraElement.scalar(AlgebraTag.O)

    def test_unit_law(self):
        """Test that 1 a = a"""
        a = AlgebraElement.from_json(AlgebraTag.O, [1, "1/2", 0, -3, 2, 0, 0, "7/3"])
        assert mul(self.one, a) == a
        assert mul(a, self.one) == a

    def test_anticommuting_units(self):
        """Test that distinct imaginary units anticommute"""
        assert mul(self.e[1], self.e[2]) == -mul(self.e[2], self.e[1])

    def test_conjugate_and_inverse_of_unit(self):
        """Test that conj(e1) = inv(e1) = -e1"""
        assert conj(self.e[1]) == -self.e[1]
        assert inv(self.e[1]) == -self.e[1]

    def test_orthonormal_basis(self):
        """Test that the basis is orthonormal"""
        for i in range(8):
            for j in range(8):
                assert inner(self.e[i], self.e[j]) == (1 if i == j else 0)

    def test_norm_multiplicative(self):
        """Test that the norm is multiplicative on random elements"""
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = AlgebraElement.from_array(AlgebraTag.O, rng.standard_normal(8))
            b = AlgebraElement.from_array(AlgebraTag.O, rng.standard_normal(8))
            assert norm(mul(a, b)) == pytest.approx(norm(a) * norm(b), rel=1e-12)

    def test_exact_inverse(self):
        """Test that a a^-1 = 1 exactly on rationals"""
        a = AlgebraElement.from_json(AlgebraTag.O, [1, 2, "1/3", 0, -1, 0, 5, 1])
        assert a.is_exact()
        assert mul(a, inv(a)) == self.one
        assert mul(inv(a), a) == self.one

    def test_inverse_of_zero(self):
        """Test that zero has no inverse"""
        with pytest.raises(AlgebraDivisionError):
            inv(AlgebraElement.zero(AlgebraTag.H))

    def test_scalar_and_vector_parts(self):
        """Test the real/imaginary split"""
        a = AlgebraElement.from_json(AlgebraTag.H, [2, 1, 0, -1])
        assert scalar_part(a) == 2
        assert vector_part(a) == AlgebraElement.from_json(AlgebraTag.H, [0, 1, 0, -1])

    def test_mixed_algebras_rejected(self):
        """Test that elements of different algebras do not combine"""
        with pytest.raises(ContractViolationError):
            mul(AlgebraElement.scalar(AlgebraTag.H), self.one)

    def test_wrong_length_rejected(self):
        """Test that coefficient tuples must match the dimension"""
        with pytest.raises(ContractViolationError):
            AlgebraElement.from_json(AlgebraTag.H, [1, 2, 3])

    def test_json_round_trip_keeps_rationals(self):
        """Test that rational coefficients are written as p/q strings"""
        a = AlgebraElement.from_json(AlgebraTag.C, ["1/3", 2])
        assert a.to_json() == ["1/3", 2]


class TestScalars:
    """Test cases for scalar parsing"""

    def test_parse_decimal_float(self):
        """Test that floats parse through their shortest decimal form"""
        assert parse_scalar(0.1) == Fraction(1, 10)

    def test_parse_fraction_string(self):
        """Test p/q strings"""
        assert parse_scalar(" -3/4 ") == Fraction(-3, 4)

    def test_parse_rejects_bool(self):
        """Test that booleans are not scalars"""
        with pytest.raises(ExpressionParseError):
            parse_scalar(True)

    def test_format(self):
        """Test exact formatting"""
        assert format_scalar(Fraction(4, 2)) == 2
        assert format_scalar(Fraction(1, 3)) == "1/3"


class TestCompositionLaws:
    """Test cases for the composition law report"""

    def test_octonion_exact(self):
        """Test that every required law holds exactly on octonions"""
        report = check_composition_laws(AlgebraTag.O, samples=100, seed=0, exact=True)
        for name in report.required_laws():
            assert report.residuals[name] == 0, name
        assert report.passed

    def test_octonion_not_associative(self):
        """Test that the associator is reported but not required on octonions"""
        report = check_composition_laws(AlgebraTag.O, samples=20, seed=1, exact=True)
        assert "associativity" not in report.required_laws()
        assert report.residuals["associativity"] != 0

    def test_quaternion_associative(self):
        """Test that quaternions are associative"""
        report = check_composition_laws(AlgebraTag.H, samples=50, seed=2, exact=True)
        assert report.residuals["associativity"] == 0
        assert "associativity" in report.required_laws()

    def test_octonion_float(self):
        """Test float residuals on unit-scale inputs"""
        report = check_composition_laws(AlgebraTag.O, samples=200, seed=5, exact=False)
        assert report.passed
        for name in report.required_laws():
            assert float(report.residuals[name]) < 1e-12

    def test_deterministic(self):
        """Test that a fixed seed reproduces the report"""
        first = check_composition_laws(AlgebraTag.C, samples=30, seed=9, exact=False)
        second = check_composition_laws(AlgebraTag.C, samples=30, seed=9, exact=False)
        assert first.to_dict() == second.to_dict()

    def test_report_dict(self):
        """Test the serialized report"""
        payload = check_composition_laws(AlgebraTag.R, samples=5, seed=0).to_dict()
        assert payload["algebra"] == "R"
        assert payload["passed"] is True
        assert set(payload["residuals"]) >= {"scaling", "exchange", "braid", "inverse", "moufang"}


class TestDerivativeRules:
    """Test cases for the product and inverse derivative rules"""

    @pytest.mark.parametrize("tag", ["C", "H", "O"])
    def test_rules_hold(self, tag):
        """Test that both rules simplify to zero"""
        result = check_derivative_rules(tag, samples=2, seed=4)
        assert result["failures"] == 0
        assert result["samples"] == 2


if __name__ == "__main__":
    pytest.main([__file__])
