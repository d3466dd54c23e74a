"""Unit tests for services.curves: models, point samples and section evaluation."""

from __future__ import annotations

from math import comb

import numpy as np
import pytest

from schemas.curve import CurveSpec
from services.curves import (
    CurveKind,
    CurveModel,
    InvalidParamsError,
    NotEnoughPointsError,
    PointSample,
    SampleTooSmallError,
    SectionAlgebra,
    TwistSpec,
    count_points,
    evaluation_matrix,
    graded_piece,
    graded_pieces,
    make_curve,
    make_curve_from_spec,
    monomial_exponents,
    sample_points,
    vanishing_subspace,
)
from services.exactla import matmul_mod


class TestMakeCurve:
    """make_curve validates its parameters and is deterministic."""

    def test_rational_normal_basis(self, twisted_cubic: CurveModel) -> None:
        assert twisted_cubic.kind is CurveKind.RATIONAL_NORMAL
        assert twisted_cubic.section_basis.tolist() == np.eye(4, dtype=int).tolist()
        assert twisted_cubic.genus == 0

    def test_elliptic_model(self, elliptic_quartic: CurveModel) -> None:
        assert elliptic_quartic.genus == 1
        assert elliptic_quartic.section_basis.shape == (4, 4)
        a, b = elliptic_quartic.weierstrass
        assert (4 * a**3 + 27 * b**2) % elliptic_quartic.p != 0

    def test_same_seed_same_model(self) -> None:
        m1 = make_curve("rational_general", 3, 5, 1009, 7)
        m2 = make_curve("rational_general", 3, 5, 1009, 7)
        assert np.array_equal(m1.section_basis, m2.section_basis)

    @pytest.mark.parametrize(
        "kind, r, d, p",
        [
            ("conic", 2, 2, 101),
            ("rational_normal", 3, 4, 101),
            ("rational_general", 4, 3, 101),
            ("rational_general", 3, 5, 100),
            ("elliptic", 3, 4, 3),
            ("elliptic", 3, 3, 101),
        ],
    )
    def test_invalid_params(self, kind: str, r: int, d: int, p: int) -> None:
        with pytest.raises(InvalidParamsError):
            make_curve(kind, r, d, p, 1)

    def test_singular_weierstrass_rejected(self) -> None:
        with pytest.raises(InvalidParamsError):
            make_curve("elliptic", 3, 4, 101, 1, weierstrass=(0, 0))

    def test_from_spec(self) -> None:
        spec = CurveSpec(kind="elliptic", r=3, d=5, prime=101, seed=2, weierstrass={"a": 1, "b": 3})
        model = make_curve_from_spec(spec)
        assert model.weierstrass == (1, 3)
        assert model.d == 5

    def test_hilbert_polynomial(self, twisted_cubic: CurveModel, elliptic_quartic: CurveModel) -> None:
        assert twisted_cubic.hilbert_polynomial(2) == 7
        assert elliptic_quartic.hilbert_polynomial(2) == 8

    def test_describe(self, elliptic_quartic: CurveModel) -> None:
        info = elliptic_quartic.describe()
        assert info["kind"] == "elliptic"
        assert set(info["weierstrass"]) == {"a", "b"}


class TestPoints:
    """count_points and sample_points."""

    def test_count_points_rational(self, twisted_cubic: CurveModel) -> None:
        assert count_points(twisted_cubic) == 1010

    def test_count_points_elliptic_matches_brute_force(self) -> None:
        model = make_curve("elliptic", 3, 4, 101, 5)
        a, b = model.weierstrass
        affine = sum(
            1 for x in range(101) for y in range(101) if (y * y - x**3 - a * x - b) % 101 == 0
        )
        assert count_points(model) == affine + 1
        # Hasse bound
        assert abs(count_points(model) - 102) <= 2 * np.sqrt(101)

    def test_rational_normal_points_lie_on_curve(self, twisted_cubic_points: PointSample) -> None:
        p = twisted_cubic_points.field.p
        for x0, x1, x2, x3 in twisted_cubic_points.points.tolist():
            assert (x1 * x1 - x0 * x2) % p == 0
            assert (x1 * x2 - x0 * x3) % p == 0
            assert (x2 * x2 - x1 * x3) % p == 0

    def test_elliptic_parameters_satisfy_weierstrass(self, elliptic_quartic: CurveModel) -> None:
        sample = sample_points(elliptic_quartic, 20, 3)
        a, b = elliptic_quartic.weierstrass
        p = elliptic_quartic.p
        for x, y in sample.parameters.tolist():
            assert (y * y - x**3 - a * x - b) % p == 0

    def test_points_are_distinct_projectively(self, rational_quintic: CurveModel) -> None:
        sample = sample_points(rational_quintic, 30, 2)
        assert sample.gamma == 30
        normalized = set()
        p = rational_quintic.p
        for row in sample.points.tolist():
            lead = next(v for v in row if v)
            inv = pow(lead, p - 2, p)
            normalized.add(tuple(v * inv % p for v in row))
        assert len(normalized) == 30

    def test_deterministic_in_seed(self, twisted_cubic: CurveModel) -> None:
        first = sample_points(twisted_cubic, 10, 4)
        again = sample_points(twisted_cubic, 10, 4)
        other = sample_points(twisted_cubic, 10, 5)
        assert np.array_equal(first.points, again.points)
        assert not np.array_equal(first.points, other.points)

    def test_not_enough_points(self) -> None:
        model = make_curve("rational_normal", 2, 2, 5, 1)
        with pytest.raises(NotEnoughPointsError):
            sample_points(model, 7, 1)

    def test_elliptic_beyond_hasse_bound(self) -> None:
        model = make_curve("elliptic", 3, 4, 101, 1)
        with pytest.raises(NotEnoughPointsError):
            sample_points(model, 131, 1)
        # the point at infinity is never sampled
        with pytest.raises(NotEnoughPointsError):
            sample_points(model, count_points(model), 1)
        assert sample_points(model, count_points(model) - 1, 1).gamma == count_points(model) - 1

    def test_needs_positive_count(self, twisted_cubic: CurveModel) -> None:
        with pytest.raises(InvalidParamsError):
            sample_points(twisted_cubic, 0, 1)

    def test_permuted_and_rescaled(self, twisted_cubic_points: PointSample) -> None:
        order = list(reversed(range(7)))
        reversed_sample = twisted_cubic_points.permuted(order)
        assert np.array_equal(reversed_sample.points[0], twisted_cubic_points.points[6])
        scaled = twisted_cubic_points.rescaled([2] * 7)
        assert np.array_equal(scaled.points, (2 * twisted_cubic_points.points) % 1009)
        with pytest.raises(ValueError):
            twisted_cubic_points.rescaled([0] * 7)
        with pytest.raises(ValueError):
            twisted_cubic_points.permuted([0, 0, 1, 2, 3, 4, 5])


class TestSectionAlgebra:
    """Point-free products agree with pointwise products of values."""

    def test_h0(self, twisted_cubic: CurveModel, elliptic_quartic: CurveModel) -> None:
        rational = SectionAlgebra(twisted_cubic)
        elliptic = SectionAlgebra(elliptic_quartic)
        assert [rational.h0(n) for n in range(4)] == [1, 4, 7, 10]
        assert [elliptic.h0(n) for n in range(4)] == [1, 4, 8, 12]
        assert rational.h0(-1) == 0

    @pytest.mark.parametrize("fixture", ["rational_quintic", "elliptic_quartic"])
    def test_multiply_matches_evaluation(self, fixture: str, request: pytest.FixtureRequest) -> None:
        model = request.getfixturevalue(fixture)
        algebra = SectionAlgebra(model)
        sample = sample_points(model, 40, 9)
        p = model.p
        f, g = algebra.section(0), algebra.section(1)
        fg = algebra.multiply(f, 1, g, 1)
        f2g = algebra.multiply(fg, 2, f, 1)

        def values(sec: np.ndarray, n: int) -> np.ndarray:
            return matmul_mod(algebra.evaluate(sample.parameters, n), sec[:, None], p)[:, 0]

        assert np.array_equal(values(fg, 2), values(f, 1) * values(g, 1) % p)
        assert np.array_equal(values(f2g, 3), values(fg, 2) * values(f, 1) % p)

    def test_power_matches_repeated_multiplication(self, elliptic_quartic: CurveModel) -> None:
        algebra = SectionAlgebra(elliptic_quartic)
        f = algebra.section(2)
        cube = algebra.multiply(algebra.multiply(f, 1, f, 1), 2, f, 1)
        assert np.array_equal(algebra.power(f, 1, 3), cube)
        assert np.array_equal(algebra.power(f, 1, 0), algebra.unit())

    def test_multiplication_matrix_shape(self, elliptic_quartic: CurveModel) -> None:
        algebra = SectionAlgebra(elliptic_quartic)
        mult = algebra.multiplication_matrix(algebra.section(0), 1, 2)
        assert mult.shape == (algebra.h0(2), algebra.h0(3))


class TestGradedPieces:
    """Evaluation matrices and the graded pieces of S(Gamma)."""

    def test_monomial_order(self) -> None:
        assert monomial_exponents(3, 2) == [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]

    def test_evaluation_matrix_shape(self, twisted_cubic_points: PointSample) -> None:
        for j in range(4):
            assert evaluation_matrix(twisted_cubic_points, j).shape == (7, comb(3 + j, j))
        with pytest.raises(InvalidParamsError):
            evaluation_matrix(twisted_cubic_points, -1)

    def test_hilbert_function_of_seven_points(self, twisted_cubic_points: PointSample) -> None:
        assert [w.dim for w in graded_pieces(twisted_cubic_points, 3)] == [1, 4, 7, 7]

    def test_direct_piece_matches_incremental(self, twisted_cubic_points: PointSample) -> None:
        for j, piece in enumerate(graded_pieces(twisted_cubic_points, 3)):
            direct = graded_piece(twisted_cubic_points, j)
            assert direct == piece

    def test_vanishing_subspace_dimensions(
        self, rational_quintic: CurveModel, elliptic_quartic: CurveModel
    ) -> None:
        # h^0(L^(m+j)(-D)) = deg + 1 - g once the degree is positive
        twist = TwistSpec(m=1, vanishing_indices=(0, 1, 2))
        sample = sample_points(rational_quintic, 40, 1)
        assert vanishing_subspace(sample, 0, twist).dim == 5 - 3 + 1
        assert vanishing_subspace(sample, 1, twist).dim == 10 - 3 + 1
        sample = sample_points(elliptic_quartic, 40, 1)
        assert vanishing_subspace(sample, 0, twist).dim == 4 - 3
        assert vanishing_subspace(sample, 1, twist).dim == 8 - 3

    def test_graded_piece_dims_nondecreasing(
        self, twisted_cubic: CurveModel, elliptic_quartic: CurveModel
    ) -> None:
        for model, gamma in ((twisted_cubic, 10), (elliptic_quartic, 12)):
            sample = sample_points(model, gamma, 2)
            dims = [graded_piece(sample, j).dim for j in range(6)]
            assert dims == sorted(dims)
            assert dims[-1] == gamma

    @pytest.mark.parametrize("fixture", ["twisted_cubic", "rational_quintic"])
    def test_vanishing_plus_divisor_covers_piece(
        self, fixture: str, request: pytest.FixtureRequest
    ) -> None:
        model = request.getfixturevalue(fixture)
        sample = sample_points(model, 40, 1)
        for n in range(1, 4):
            for size in range(5):
                twist = TwistSpec(m=n, vanishing_indices=tuple(range(size)))
                vanishing = vanishing_subspace(sample, 0, twist).dim
                piece = graded_piece(sample, n).dim
                assert vanishing + size >= piece
                if model.d == model.r:
                    # distinct points impose independent conditions on the complete series
                    assert vanishing + size == piece

    def test_vanishing_subspace_negative_twist(self, twisted_cubic_points: PointSample) -> None:
        twist = TwistSpec(m=0, vanishing_indices=(0,))
        assert vanishing_subspace(twisted_cubic_points, -1, twist).dim == 0

    def test_vanishing_subspace_needs_enough_points(self, twisted_cubic_points: PointSample) -> None:
        with pytest.raises(SampleTooSmallError):
            vanishing_subspace(twisted_cubic_points, 2, TwistSpec(m=1))

    def test_twist_spec_validation(self) -> None:
        with pytest.raises(InvalidParamsError):
            TwistSpec(m=-1)
        with pytest.raises(InvalidParamsError):
            TwistSpec(m=1, vanishing_indices=(2, 2))
        assert TwistSpec(m=2, vanishing_indices=(0, 3)).degree_offset == 2
