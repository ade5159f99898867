"""
Test suite for the Riccati solver
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from nda_riccati.exceptions import ContractViolationError, ExpressionParseError, SingularCombinationError
from nda_riccati.services.algebra import AlgebraElement, AlgebraTag
from nda_riccati.services.riccati_solver import (
    RiccatiSpec,
    alternativity_gap,
    check_conformal,
    check_superposition,
    conformal_dimension,
    conformal_rhs,
    integrate,
    quadratic_identity_check,
    random_polynomial_spec,
    rhs,
    superposition_real,
    to_conformal,
)
from nda_riccati.utils.expressions import CoeffFn

TAN_SPEC = {"algebra": "R", "b_minus": 1, "b_plus": 1}


def _octonion(values):
    return AlgebraElement.from_json(AlgebraTag.O, values)


class TestRiccatiSpec:
    """Test cases for Riccati spec parsing"""

    def test_scalar_shorthand(self):
        """Test that a bare number is a real coefficient"""
        spec = RiccatiSpec.from_dict({"algebra": "H", "b_plus": "1/2"})
        assert spec.b_plus.evaluate(0, exact=True) == [Fraction(1, 2), 0, 0, 0]
        assert spec.b_minus.is_zero()

    def test_expression_nodes(self):
        """Test polynomial and sine coefficient nodes"""
        spec = RiccatiSpec.from_dict({
            "algebra": "C",
            "b_minus": {"type": "polynomial", "params": {"coeffs": [[1, 0], [0, 2]]}},
            "b_0L": {"type": "sin", "params": {"amplitude": [1, 0], "omega": 2}},
        })
        assert spec.b_minus.evaluate(Fraction(1, 2), exact=True) == [1, 1]
        assert spec.b_0L.evaluate(0.25)[0] == pytest.approx(math.sin(0.5))
        assert not spec.is_exact()

    def test_unknown_key(self):
        """Test that unknown keys are rejected"""
        with pytest.raises(ExpressionParseError):
            RiccatiSpec.from_dict({"algebra": "R", "b_half": 1})

    def test_wrong_coefficient_length(self):
        """Test that coefficient vectors must match the algebra"""
        with pytest.raises(ExpressionParseError):
            RiccatiSpec.from_dict({"algebra": "H", "b_minus": [1, 2]})

    def test_round_trip_dict(self):
        """Test that to_dict reproduces an equivalent spec"""
        spec = RiccatiSpec.from_dict({"algebra": "O", "b_0R": [0, "1/3", 0, 0, 0, 0, 0, 1]})
        again = RiccatiSpec.from_dict(spec.to_dict())
        assert again.b_0R.evaluate(1, exact=True) == spec.b_0R.evaluate(1, exact=True)


class TestRightHandSide:
    """Test cases for right-hand side evaluation"""

    def test_zero_spec(self):
        """Test that the zero spec has zero velocity"""
        a = _octonion([1, 2, 3, 4, 5, 6, 7, 8])
        assert rhs(RiccatiSpec.zero(AlgebraTag.O), 0, a).is_zero()

    def test_real_polynomial(self):
        """Test the real Riccati polynomial a + b x + c x^2"""
        spec = RiccatiSpec.from_dict({"algebra": "R", "b_minus": 2, "b_0L": 1, "b_0R": 2, "b_plus": 5})
        x = AlgebraElement(AlgebraTag.R, (Fraction(1, 2),))
        assert rhs(spec, 0, x).coeffs == (2 + 3 * Fraction(1, 2) + 5 * Fraction(1, 4),)

    def test_octonion_quadratic_term(self):
        """Test that a = e1, b+ = e2 gives (e1 e2) e1 = e2"""
        spec = RiccatiSpec.from_dict({"algebra": "O", "b_plus": [0, 0, 1, 0, 0, 0, 0, 0]})
        a = AlgebraElement.basis(AlgebraTag.O, 1)
        assert rhs(spec, 0, a) == AlgebraElement.basis(AlgebraTag.O, 2)

    def test_alternativity(self):
        """Test that (a b) a = a (b a) for octonions"""
        spec = RiccatiSpec.from_dict({"algebra": "O", "b_plus": [1, "2/3", 0, -1, 4, 0, 1, 2]})
        a = _octonion([3, 0, 1, "1/2", 0, -2, 1, 1])
        assert alternativity_gap(spec, 0, a).is_zero()

    def test_algebra_mismatch(self):
        """Test that the state must live in the spec's algebra"""
        with pytest.raises(ContractViolationError):
            rhs(RiccatiSpec.zero(AlgebraTag.H), 0, AlgebraElement.zero(AlgebraTag.O))


class TestIntegrate:
    """Test cases for RK4 integration"""

    def test_constant_trajectory(self):
        """Test that the zero spec keeps the initial value"""
        a0 = AlgebraElement.basis(AlgebraTag.O, 1)
        trajectory = integrate(RiccatiSpec.zero(AlgebraTag.O), a0, 0.0, 1.0, 0.1)
        assert np.allclose(trajectory.states, a0.as_array())

    def test_tangent(self):
        """Test that dx/dt = 1 + x^2 from 0 reaches tan(1)"""
        spec = RiccatiSpec.from_dict(TAN_SPEC)
        trajectory = integrate(spec, AlgebraElement.zero(AlgebraTag.R), 0.0, 1.0, 1e-3)
        assert not trajectory.blowup
        assert trajectory.final().coeffs[0] == pytest.approx(math.tan(1.0), abs=1e-8)
        assert trajectory.times[-1] == pytest.approx(1.0)

    def test_rotation_preserves_norm(self):
        """Test that left multiplication by e1 keeps unit quaternions on the sphere"""
        spec = RiccatiSpec.from_dict({"algebra": "H", "b_0L": [0, 1, 0, 0]})
        trajectory = integrate(spec, AlgebraElement.scalar(AlgebraTag.H), 0.0, 2.0, 1e-3)
        norms = np.linalg.norm(trajectory.states, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-8

    def test_blowup_truncates(self):
        """Test that tan(t) is cut off at its pole"""
        spec = RiccatiSpec.from_dict(TAN_SPEC)
        trajectory = integrate(spec, AlgebraElement.zero(AlgebraTag.R), 0.0, 2.0, 1e-3, bound=1e6)
        assert trajectory.blowup
        assert trajectory.times[-1] < math.pi / 2 + 0.01

    def test_csv(self, tmp_path):
        """Test the trajectory CSV layout"""
        spec = RiccatiSpec.from_dict({"algebra": "C", "b_minus": [1, 0]})
        trajectory = integrate(spec, AlgebraElement.zero(AlgebraTag.C), 0.0, 0.5, 0.1)
        path = tmp_path / "trajectory.csv"
        assert trajectory.to_csv(path) == 6
        lines = path.read_text().splitlines()
        assert lines[0] == "t,x_0,x_1"
        assert len(lines) == 7

    def test_invalid_interval(self):
        """Test that t1 must exceed t0"""
        with pytest.raises(ContractViolationError):
            integrate(RiccatiSpec.zero(AlgebraTag.R), AlgebraElement.zero(AlgebraTag.R), 1.0, 0.0, 0.1)


class TestSuperposition:
    """Test cases for the real superposition rule"""

    def test_k_zero(self):
        """Test that k = 0 returns the first solution"""
        assert superposition_real(Fraction(1, 3), 2, 5, 0) == Fraction(1, 3)

    def test_translations(self):
        """Test x1 = t, x2 = t + 1, x3 = t + 2 with k = 1 gives t + 2/3"""
        for t in (Fraction(0), Fraction(3, 7), Fraction(-5, 2)):
            assert superposition_real(t, t + 1, t + 2, 1) == t + Fraction(2, 3)

    def test_singular(self):
        """Test that a vanishing denominator is reported"""
        with pytest.raises(SingularCombinationError):
            superposition_real(0, 1, 1, 0)

    def test_against_direct_integration(self):
        """Test that three solutions reproduce a fourth on [0, 1]"""
        spec = RiccatiSpec.from_dict(TAN_SPEC)
        result = check_superposition(spec, [0.0, 0.2, -0.3], 2.0, 0.0, 1.0, 1e-3)
        assert not result["blowup"]
        assert result["max_error"] < 1e-6

    def test_real_only(self):
        """Test that the closed-form rule needs a real equation"""
        with pytest.raises(ContractViolationError):
            check_superposition(RiccatiSpec.zero(AlgebraTag.C), [0, 1, 2], 1.0)


class TestConformal:
    """Test cases for the conformal form"""

    def test_zero_spec(self):
        """Test that the zero spec has an all-zero conformal form"""
        cs = to_conformal(RiccatiSpec.zero(AlgebraTag.O))
        assert conformal_rhs(cs, 0, [1] * 8) == [0] * 8

    def test_pure_dilation(self):
        """Test that lambda = 1 returns xi"""
        z = CoeffFn.zero(4)
        cs = to_conformal(RiccatiSpec(AlgebraTag.H, z, CoeffFn.constant(4, [1, 0, 0, 0]), z, z))
        assert conformal_rhs(cs, 0, [1, 2, 3, 4]) == [1, 2, 3, 4]

    def test_quaternion_example(self):
        """Test the conversion of a quaternionic spec"""
        spec = RiccatiSpec.from_dict({"algebra": "H", "b_minus": [0, 1, 0, 0], "b_0L": [0, 1, 0, 0], "b_plus": 1})
        cs = to_conformal(spec)
        assert cs.lambda_fn(0, exact=True) == 0
        assert cs.a_fn(0, exact=True) == [0, 1, 0, 0]
        assert cs.c_fn(0, exact=True) == [-1, 0, 0, 0]
        omega = cs.omega_fn(0, exact=True)
        assert omega[1][0] == 1 and omega[0][1] == -1
        assert cs.antisymmetry_residual(0, exact=True) == 0

    @pytest.mark.parametrize("tag", ["C", "H", "O"])
    def test_exact_equality(self, tag):
        """Test that both right-hand sides agree exactly on rationals"""
        n = AlgebraTag.parse(tag).dim
        spec = RiccatiSpec.from_dict({
            "algebra": tag,
            "b_minus": {"type": "polynomial", "params": {"coeffs": [[1] + [0] * (n - 1), list(range(n))]}},
            "b_0L": list(range(1, n + 1)),
            "b_0R": ["1/2"] * n,
            "b_plus": [-1] + [2] * (n - 1),
        })
        result = check_conformal(spec, samples=50, seed=11)
        assert result["exact"] is True
        assert result["max_residual"] == 0
        assert result["antisymmetry_residual"] == 0

    @pytest.mark.parametrize("tag", ["R", "C", "H", "O"])
    def test_random_polynomial_specs(self, tag):
        """Test exact equality of both right-hand sides on twenty random polynomial specs"""
        rng = np.random.default_rng(2024)
        for k in range(20):
            spec = random_polynomial_spec(AlgebraTag.parse(tag), rng)
            result = check_conformal(spec, samples=1000, seed=k)
            assert result["exact"] is True
            assert result["max_residual"] == 0, k
            assert result["antisymmetry_residual"] == 0, k

    def test_float_equality(self):
        """Test float agreement with sine coefficients"""
        spec = RiccatiSpec.from_dict({
            "algebra": "O",
            "b_0R": {"type": "sin", "params": {"amplitude": [1, 2, 0, 0, 1, 0, 0, 3], "omega": 1}},
            "b_plus": {"type": "exp", "params": {"amplitude": [0, 1, 1, 0, 0, 0, 0, 1], "rate": "-1/2"}},
        })
        result = check_conformal(spec, samples=200, seed=3)
        assert result["exact"] is False
        assert result["max_residual"] < 1e-12

    def test_exact_rejected_for_sine(self):
        """Test that exact mode needs exact coefficients"""
        spec = RiccatiSpec.from_dict({"algebra": "R", "b_minus": {"type": "sin", "params": {"amplitude": 1, "omega": 1}}})
        with pytest.raises(ContractViolationError):
            check_conformal(spec, samples=1, seed=0, exact=True)

    def test_quadratic_identity(self):
        """Test (a b) a = 2 g(b*, a) a - b* g(a, a)"""
        assert quadratic_identity_check(AlgebraElement.scalar(AlgebraTag.O), AlgebraElement.basis(AlgebraTag.O, 1)) == 0.0
        rng = np.random.default_rng(2)
        for _ in range(20):
            b = AlgebraElement(AlgebraTag.O, tuple(Fraction(int(v)) for v in rng.integers(-5, 6, 8)))
            a = AlgebraElement(AlgebraTag.O, tuple(Fraction(int(v), 3) for v in rng.integers(-5, 6, 8)))
            assert quadratic_identity_check(b, a) == 0.0

    def test_conformal_dimension(self):
        """Test dim conf(R^n) = (n+1)(n+2)/2"""
        assert conformal_dimension(AlgebraTag.O) == 45
        assert conformal_dimension(AlgebraTag.H) == 15


if __name__ == "__main__":
    pytest.main([__file__])
