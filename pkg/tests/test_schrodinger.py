"""
Test suite for the quaternionic Schrodinger reduction
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from nda_riccati.exceptions import ContractViolationError, ExpressionParseError, UnsupportedRestrictionError
from nda_riccati.services.algebra import AlgebraTag
from nda_riccati.services.schrodinger import (
    SchrodingerSpec,
    minimal_algebra_dimension,
    residual_convergence,
    riccati_from_potentials,
    schrodinger_closure,
    solve_and_reconstruct,
)
from nda_riccati.services.vector_fields import in_span, named_field


class TestSchrodingerSpec:
    """Test cases for Schrodinger spec parsing"""

    def test_defaults(self):
        """Test hbar = m = 1 on [0, 1] when nothing is given"""
        spec = SchrodingerSpec.from_dict({})
        assert spec.kinetic == Fraction(1, 2)
        assert spec.x0 == 0 and spec.x1 == 1
        assert spec.V.is_zero() and spec.W.is_zero()

    def test_unknown_key(self):
        """Test that unknown keys are rejected"""
        with pytest.raises(ExpressionParseError):
            SchrodingerSpec.from_dict({"potential": 1})

    def test_invalid_interval(self):
        """Test that x1 must exceed x0"""
        with pytest.raises(ContractViolationError):
            SchrodingerSpec.from_dict({"x0": 1, "x1": 0})

    def test_invalid_mass(self):
        """Test that the mass must be positive"""
        with pytest.raises(ContractViolationError):
            SchrodingerSpec.from_dict({"m": 0})


class TestRiccatiReduction:
    """Test cases for the reduction to a quaternionic Riccati equation"""

    def test_coefficients(self):
        """Test b = (2m/hbar^2)(V + k W) and the quadratic coefficient -1"""
        spec = SchrodingerSpec.from_dict({"V": 2, "W": [1, 3]})
        riccati = riccati_from_potentials(spec)
        assert riccati.algebra == AlgebraTag.H
        assert riccati.b_minus.evaluate(0, exact=True) == [4, 0, 6, 2]
        assert riccati.b_plus.evaluate(0, exact=True) == [-1, 0, 0, 0]
        assert riccati.b_0L.is_zero() and riccati.b_0R.is_zero()

    def test_mass_scaling(self):
        """Test that m = 2 doubles the Riccati source term"""
        spec = SchrodingerSpec.from_dict({"m": 2, "V": 2, "W": [1, 3]})
        assert riccati_from_potentials(spec).b_minus.evaluate(0, exact=True) == [8, 0, 12, 4]

    def test_constant_potential_gives_square(self):
        """Test that V = hbar^2 c^2 / 2m gives the source term c^2"""
        spec = SchrodingerSpec.from_dict({"hbar": 2, "m": 3, "V": "1/6"})
        assert riccati_from_potentials(spec).b_minus.evaluate(0, exact=True) == [Fraction(1, 4), 0, 0, 0]

    def test_nonzero_energy(self):
        """Test that E != 0 is not supported"""
        spec = SchrodingerSpec.from_dict({"E": 1})
        with pytest.raises(UnsupportedRestrictionError):
            riccati_from_potentials(spec)


class TestReconstruction:
    """Test cases for solving u and rebuilding the wave function"""

    def test_constant_potential(self):
        """Test that V = c^2/2 with u0 = c gives u = c and psi = exp(c x)"""
        c = 0.8
        spec = SchrodingerSpec.from_dict({"V": c * c / 2})
        solution = solve_and_reconstruct(spec, u0=[c, 0, 0, 0], step=1e-3)
        assert not solution.blowup
        assert np.allclose(solution.u[:, 0], c, atol=1e-10)
        assert np.allclose(solution.u[:, 1:], 0.0)
        assert solution.psi[-1][0] == pytest.approx(math.exp(c), rel=1e-9)
        assert solution.max_residual < 1e-6

    def test_free_particle(self):
        """Test that V = W = 0 with u0 = 0 keeps psi constant"""
        spec = SchrodingerSpec.from_dict({})
        solution = solve_and_reconstruct(spec, psi0=[0, 1, 0, 0], step=0.01)
        assert np.allclose(solution.psi, [0.0, 1.0, 0.0, 0.0])
        assert solution.max_residual == 0.0

    def test_coupled_potential(self):
        """Test that the residual stays small with a quaternionic coupling"""
        spec = SchrodingerSpec.from_dict({
            "V": {"type": "polynomial", "params": {"coeffs": [1, 1]}},
            "W": [0, "1/2"],
        })
        solution = solve_and_reconstruct(spec, psi0=[1, 0, 1, 0], step=1e-3)
        assert not solution.blowup
        assert solution.max_residual < 1e-5
        assert solution.log_derivative_gap() < 1e-5

    def test_zero_psi_rejected(self):
        """Test that the wave function must start nonzero"""
        with pytest.raises(ContractViolationError):
            solve_and_reconstruct(SchrodingerSpec.from_dict({}), psi0=[0, 0, 0, 0])

    def test_boundary_residuals_excluded(self):
        """Test that only interior points enter the maximum"""
        spec = SchrodingerSpec.from_dict({"V": 1})
        solution = solve_and_reconstruct(spec, step=0.05)
        assert solution.max_residual == pytest.approx(float(np.max(solution.residual[1:-1])))

    def test_csv(self, tmp_path):
        """Test the per-point CSV columns"""
        spec = SchrodingerSpec.from_dict({"x1": "1/5"})
        solution = solve_and_reconstruct(spec, step=0.1)
        path = tmp_path / "psi.csv"
        assert solution.to_csv(path) == 3
        header = path.read_text().splitlines()[0].split(",")
        assert header[0] == "x" and header[-1] == "residual"
        assert len(header) == 10

    def test_convergence(self):
        """Test that halving the step divides the residual by about four"""
        spec = SchrodingerSpec.from_dict({
            "V": {"type": "polynomial", "params": {"coeffs": [1, 1]}},
            "W": [0, "1/2"],
        })
        result = residual_convergence(spec, psi0=[1, 0, 1, 0], step=0.02)
        assert 3.5 <= result["ratio"] <= 4.5

    def test_convergence_oscillating_potential(self):
        """Test the step-halving ratio with a sine potential and an exponential coupling"""
        spec = SchrodingerSpec.from_dict({
            "V": {"type": "sin", "params": {"amplitude": 1, "omega": 2}},
            "W": {"type": "exp", "params": {"amplitude": ["1/2", "1/4"], "rate": "1/2"}},
        })
        result = residual_convergence(spec, u0=["1/5", 0, 0, 0], psi0=[1, 1, 0, 0], step=0.02)
        assert result["fine_residual"] < result["coarse_residual"]
        assert 3.5 <= result["ratio"] <= 4.5


class TestMinimalAlgebra:
    """Test cases for the closure of the Schrodinger generators"""

    def test_dimension(self):
        """Test that the square and the four translations generate 15 fields"""
        assert minimal_algebra_dimension() == 15

    def test_contains_euler_field(self):
        """Test [X_0^-, X_0^+] = 2 X^(0) inside the closure"""
        report = schrodinger_closure()
        euler = named_field(AlgebraTag.H, "X^{(0)}")
        assert report.closed
        assert in_span(report.basis, euler.scaled(2))

    def test_contains_intermediate_fields(self):
        """Test that the quadratic, left-product and tilde fields all lie in the closure"""
        basis = schrodinger_closure().basis
        for i in range(4):
            assert in_span(basis, named_field(AlgebraTag.H, f"X^+_{i}")), i
        for i in range(1, 4):
            assert in_span(basis, named_field(AlgebraTag.H, f"X^{{(0)}}_{{0{i}}}")), i
        for j in range(4):
            for i in range(4):
                assert in_span(basis, named_field(AlgebraTag.H, f"X~_{{{j}{i}}}")), (j, i)


if __name__ == "__main__":
    pytest.main([__file__])
