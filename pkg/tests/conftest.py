"""Pytest fixtures: small curve models and point samples."""

from __future__ import annotations

import pytest

from services.curves import CurveModel, PointSample, make_curve, sample_points
from services.exactla import PrimeField

# Small enough to keep every default run fast, large enough to be generic.
TEST_PRIME = 1009


@pytest.fixture
def field() -> PrimeField:
    return PrimeField(TEST_PRIME)


@pytest.fixture
def twisted_cubic() -> CurveModel:
    return make_curve("rational_normal", 3, 3, TEST_PRIME, 1)


@pytest.fixture
def twisted_cubic_points(twisted_cubic: CurveModel) -> PointSample:
    """Seven points on the twisted cubic."""
    return sample_points(twisted_cubic, 7, 1)


@pytest.fixture
def rational_quintic() -> CurveModel:
    """A general rational curve of degree 5 in P^3."""
    return make_curve("rational_general", 3, 5, TEST_PRIME, 3)


@pytest.fixture
def elliptic_quartic() -> CurveModel:
    """An elliptic normal quartic in P^3."""
    return make_curve("elliptic", 3, 4, TEST_PRIME, 1)
