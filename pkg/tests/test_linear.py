"""
Test suite for the exact echelon basis
"""

from fractions import Fraction

import pytest

from nda_riccati.utils.linear import EchelonBasis, rank


class TestEchelonBasis:
    """Test cases for incremental rank checks"""

    def test_dependent_vector_rejected(self):
        """Test that a combination of basis rows is not added"""
        basis = EchelonBasis()
        assert basis.add({"a": 1, "b": 2}) == "b"
        assert basis.add({"a": 1}) == "a"
        assert basis.add({"a": Fraction(3, 2), "b": -4}) is None
        assert len(basis) == 2

    def test_contains(self):
        """Test span membership after elimination of several pivots"""
        basis = EchelonBasis()
        basis.add({0: 1, 2: 1})
        basis.add({1: 1, 2: 1})
        assert basis.contains({0: 1, 1: -1})
        assert not basis.contains({0: 1, 1: 1, 2: 5})

    def test_zero_vector(self):
        """Test that the zero vector is always in the span"""
        basis = EchelonBasis()
        assert basis.add({"x": 0}) is None
        assert basis.pivots == []

    def test_rank(self):
        """Test the exact rank of a small set"""
        vectors = [{0: 1, 1: 1}, {1: 1, 2: 1}, {0: 1, 2: -1}, {2: Fraction(1, 3)}]
        assert rank(vectors) == 3


if __name__ == "__main__":
    pytest.main([__file__])
