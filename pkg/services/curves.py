"""Curve models over F_p, point sampling and evaluation of sections.

Three kinds of models are supported:

- ``rational_normal``: the rational normal curve t -> (1 : t : ... : t^r).
- ``rational_general``: a random (r+1)-dimensional base-point-free linear
  system of binary forms of degree d.
- ``elliptic``: y^2 = x^3 + a x + b embedded by r+1 random combinations of
  the pole-order basis of H^0(O(d*O)).

Sections of L^n are kept in a point-free coefficient representation
(``SectionAlgebra``): polynomials in t of degree <= d*n for rational models,
and pairs (A, B) standing for A(x) + B(x) y for elliptic models.
"""

from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from config import CURVE_RETRIES, ENUMERATION_LIMIT
from services.exactla import (
    FieldError,
    Matrix,
    PrimeField,
    Subspace,
    kernel_basis,
    matmul_mod,
    rank,
    row_space,
    span,
)

if TYPE_CHECKING:
    from schemas.curve import CurveSpec

logger = logging.getLogger(__name__)

_RNG_STREAMS = {"linear_system": 0, "weierstrass": 1, "points": 2}
_BATCH = 4096
_MAX_BATCHES = 64


class CurveError(Exception):
    """Raised when a curve model or a point sample cannot be produced."""


class InvalidParamsError(CurveError):
    """Raised when curve parameters violate the model's preconditions."""


class CurveNotFoundError(CurveError):
    """Raised when no valid random model is found within the retry budget."""


class NotEnoughPointsError(CurveError):
    """Raised when the curve has fewer usable F_p-points than requested."""


class SampleTooSmallError(CurveError):
    """Raised when a sample cannot separate the sections being evaluated."""


class CurveKind(str, Enum):
    RATIONAL_NORMAL = "rational_normal"
    RATIONAL_GENERAL = "rational_general"
    ELLIPTIC = "elliptic"


def _rng(seed: int, stream: str) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(_RNG_STREAMS[stream],))
    )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.int64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class CurveModel:
    """A curve in P^r over F_p given by a linear system of sections."""

    kind: CurveKind
    r: int
    d: int
    field: PrimeField
    seed: int
    section_basis: np.ndarray
    weierstrass: Optional[Tuple[int, int]] = None
    # the Weierstrass pair came from the caller rather than the seed
    fixed_weierstrass: bool = False

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def genus(self) -> int:
        return 1 if self.kind is CurveKind.ELLIPTIC else 0

    @property
    def is_rational(self) -> bool:
        return self.kind is not CurveKind.ELLIPTIC

    def hilbert_polynomial(self, m: int) -> int:
        """P_C(m) = d m + 1 - g."""
        return self.d * m + 1 - self.genus

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "r": self.r,
            "d": self.d,
            "prime": self.p,
            "seed": self.seed,
            "weierstrass": (
                {"a": self.weierstrass[0], "b": self.weierstrass[1]}
                if self.weierstrass
                else None
            ),
        }


@dataclass(frozen=True, eq=False)
class PointSample:
    """Points of a curve with one fixed homogeneous representative each."""

    model: CurveModel
    points: np.ndarray
    parameters: np.ndarray
    seed: int = 0

    @property
    def gamma(self) -> int:
        return int(self.points.shape[0])

    @property
    def field(self) -> PrimeField:
        return self.model.field

    def subset(self, indices: Sequence[int]) -> "PointSample":
        idx = list(indices)
        return PointSample(self.model, _frozen(self.points[idx]), _frozen(self.parameters[idx]), self.seed)

    def permuted(self, order: Sequence[int]) -> "PointSample":
        if sorted(order) != list(range(self.gamma)):
            raise ValueError("order must be a permutation of the sample indices")
        return self.subset(order)

    def rescaled(self, factors: Sequence[int]) -> "PointSample":
        """Same projective points with representatives scaled by nonzero factors."""
        lam = self.field.reduce(list(factors))
        if lam.shape != (self.gamma,) or np.any(lam == 0):
            raise ValueError("need one nonzero factor per point")
        points = (self.points * lam[:, None]) % self.field.p
        return PointSample(self.model, _frozen(points), self.parameters, self.seed)


@dataclass(frozen=True)
class TwistSpec:
    """L^m(-D) with D given by indices into a point sample."""

    m: int
    vanishing_indices: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.m < 0:
            raise InvalidParamsError(f"Twist exponent must be >= 0, got {self.m}")
        indices = tuple(int(i) for i in self.vanishing_indices)
        if len(set(indices)) != len(indices) or any(i < 0 for i in indices):
            raise InvalidParamsError("vanishing_indices must be distinct and non-negative")
        object.__setattr__(self, "vanishing_indices", indices)

    @property
    def degree_offset(self) -> int:
        return len(self.vanishing_indices)


def _shift_rows(poly: np.ndarray, count: int, width: int) -> np.ndarray:
    """Rows i = 0..count-1 hold poly shifted up by i, truncated to width."""
    out = np.zeros((count, width), dtype=np.int64)
    nonzero = np.flatnonzero(poly)
    if nonzero.size == 0:
        return out
    poly = poly[: int(nonzero[-1]) + 1]
    for i in range(count):
        seg = poly[: max(0, width - i)]
        if seg.size < poly.size:
            raise ValueError("product exceeds the target section space")
        out[i, i:i + seg.size] = seg
    return out


def _polymul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if a.size == 0 or b.size == 0:
        return np.zeros(0, dtype=np.int64)
    toeplitz = _shift_rows(b, a.size, a.size + b.size - 1)
    return matmul_mod(a[None, :], toeplitz, p)[0]


@dataclass(frozen=True)
class SectionAlgebra:
    """Coefficient representation of the section ring of (C, L)."""

    model: CurveModel

    def _elliptic_split(self, n: int) -> Tuple[int, int]:
        """Lengths of the x^i and x^i*y parts of H^0(L^n)."""
        pole = self.model.d * n
        a_len = pole // 2 + 1
        b_len = (pole - 3) // 2 + 1 if pole >= 3 else 0
        return a_len, b_len

    def h0(self, n: int) -> int:
        if n < 0:
            return 0
        if self.model.is_rational:
            return self.model.d * n + 1
        return sum(self._elliptic_split(n))

    def section(self, k: int) -> np.ndarray:
        return np.array(self.model.section_basis[k], dtype=np.int64)

    def multiplication_matrix(self, f: np.ndarray, n_f: int, n: int) -> np.ndarray:
        """Matrix of w -> f*w from H^0(L^n) to H^0(L^(n+n_f)), acting on row vectors."""
        p = self.model.p
        target = n + n_f
        if self.model.is_rational:
            return _shift_rows(np.asarray(f, dtype=np.int64), self.h0(n), self.h0(target))
        a_f, b_f = self._elliptic_split(n_f)
        f_a, f_b = np.asarray(f[:a_f], dtype=np.int64), np.asarray(f[a_f:a_f + b_f], dtype=np.int64)
        a_n, b_n = self._elliptic_split(n)
        a_t, b_t = self._elliptic_split(target)
        # x^i * (A + B y) = x^i A + x^i B y and x^i y * (A + B y) = x^i B (x^3+ax+b) + x^i A y
        cubic = self._cubic()
        b_times_cubic = _polymul(f_b, cubic, p) if f_b.size else np.zeros(0, dtype=np.int64)
        top = np.hstack([_shift_rows(f_a, a_n, a_t), _shift_rows(f_b, a_n, b_t)])
        bottom = np.hstack([_shift_rows(b_times_cubic, b_n, a_t), _shift_rows(f_a, b_n, b_t)])
        return np.vstack([top, bottom]) % p

    def multiply(self, f: np.ndarray, n_f: int, g: np.ndarray, n_g: int) -> np.ndarray:
        mult = self.multiplication_matrix(f, n_f, n_g)
        return matmul_mod(np.asarray(g, dtype=np.int64)[None, :], mult, self.model.p)[0]

    def power(self, f: np.ndarray, n_f: int, e: int) -> np.ndarray:
        """f**e as a section of L^(n_f*e), by repeated squaring."""
        result = self.unit()
        result_deg = 0
        base = np.asarray(f, dtype=np.int64)
        base_deg = n_f
        while e > 0:
            if e & 1:
                result = self.multiply(base, base_deg, result, result_deg)
                result_deg += base_deg
            e >>= 1
            if e:
                base = self.multiply(base, base_deg, base, base_deg)
                base_deg *= 2
        return result

    def unit(self) -> np.ndarray:
        return np.ones(1, dtype=np.int64)

    def evaluate(self, parameters: np.ndarray, n: int) -> np.ndarray:
        """gamma x h0(L^n) matrix of the basis of H^0(L^n) at the given parameters."""
        p = self.model.p
        if self.model.is_rational:
            return _powers(np.asarray(parameters, dtype=np.int64), self.h0(n), p)
        xs = np.asarray(parameters[:, 0], dtype=np.int64)
        ys = np.asarray(parameters[:, 1], dtype=np.int64)
        a_len, b_len = self._elliptic_split(n)
        x_pows = _powers(xs, max(a_len, b_len), p)
        return np.hstack([x_pows[:, :a_len], (x_pows[:, :b_len] * ys[:, None]) % p])

    def _cubic(self) -> np.ndarray:
        a, b = self.model.weierstrass
        return self.model.field.reduce([b, a, 0, 1])


def _powers(values: np.ndarray, count: int, p: int) -> np.ndarray:
    out = np.ones((values.shape[0], count), dtype=np.int64)
    for k in range(1, count):
        out[:, k] = (out[:, k - 1] * values) % p
    return out


def _nonsingular(a: int, b: int, p: int) -> bool:
    return (4 * a**3 + 27 * b**2) % p != 0


def _forms_coprime(coeffs: np.ndarray, p: int) -> bool:
    """Binary forms sum_b c_b s^(d-b) t^b have no common zero on P^1."""
    if not np.any(coeffs[:, -1]):
        return False  # common zero at infinity
    t = sympy.Symbol("t")
    polys = [sympy.Poly([int(c) for c in row[::-1]], t, modulus=p) for row in coeffs]
    common = functools.reduce(lambda f, g: f.gcd(g), polys)
    return bool(common.is_ground)


def make_curve(
    kind: CurveKind | str,
    r: int,
    d: int,
    p: int,
    seed: int,
    weierstrass: Optional[Tuple[int, int]] = None,
    retries: int = CURVE_RETRIES,
) -> CurveModel:
    """Build a curve model, redrawing random data until its checks pass."""
    try:
        kind = CurveKind(kind)
    except ValueError as exc:
        raise InvalidParamsError(f"Unknown curve kind {kind!r}") from exc
    if r < 1 or d < r:
        raise InvalidParamsError(f"Need d >= r >= 1, got r={r}, d={d}")
    if seed < 0:
        raise InvalidParamsError(f"Seed must be non-negative, got {seed}")
    try:
        fld = PrimeField(p)
    except FieldError as exc:
        raise InvalidParamsError(str(exc)) from exc

    if kind is CurveKind.RATIONAL_NORMAL:
        if d != r:
            raise InvalidParamsError(f"A rational normal curve has d = r, got r={r}, d={d}")
        return CurveModel(kind, r, d, fld, seed, _frozen(np.eye(r + 1, dtype=np.int64)))

    if kind is CurveKind.RATIONAL_GENERAL:
        rng = _rng(seed, "linear_system")
        for attempt in range(retries):
            coeffs = rng.integers(0, fld.p, size=(r + 1, d + 1), dtype=np.int64)
            if rank(Matrix(fld, coeffs)) == r + 1 and _forms_coprime(coeffs, fld.p):
                return CurveModel(kind, r, d, fld, seed, _frozen(coeffs))
            logger.debug("Redrawing rational linear system (attempt %d)", attempt + 1)
        raise CurveNotFoundError(
            f"No base-point-free g^{r}_{d} found over F_{fld.p} in {retries} attempts"
        )

    if fld.p <= 3:
        raise InvalidParamsError("Elliptic models need characteristic > 3")
    if d < 3 or r + 1 > d:
        raise InvalidParamsError(f"Elliptic models need d >= max(3, r+1), got r={r}, d={d}")
    if weierstrass is not None:
        a, b = (int(weierstrass[0]) % fld.p, int(weierstrass[1]) % fld.p)
        if not _nonsingular(a, b, fld.p):
            raise InvalidParamsError(f"y^2 = x^3 + {a}x + {b} is singular over F_{fld.p}")
    else:
        rng = _rng(seed, "weierstrass")
        for _ in range(retries):
            a, b = (int(v) for v in rng.integers(0, fld.p, size=2))
            if _nonsingular(a, b, fld.p):
                break
        else:
            raise CurveNotFoundError(f"No nonsingular Weierstrass pair over F_{fld.p}")

    rng = _rng(seed, "linear_system")
    for attempt in range(retries):
        coeffs = rng.integers(0, fld.p, size=(r + 1, d), dtype=np.int64)
        # the top pole-order basis element is the only one not vanishing at O
        top = d // 2 if d % 2 == 0 else d // 2 + (d - 3) // 2 + 1
        if rank(Matrix(fld, coeffs)) == r + 1 and np.any(coeffs[:, top]):
            return CurveModel(
                kind, r, d, fld, seed, _frozen(coeffs), (a, b), weierstrass is not None
            )
        logger.debug("Redrawing elliptic linear system (attempt %d)", attempt + 1)
    raise CurveNotFoundError(f"No base-point-free linear system found over F_{fld.p}")


def make_curve_from_spec(spec: CurveSpec) -> CurveModel:
    weierstrass = (spec.weierstrass.a, spec.weierstrass.b) if spec.weierstrass else None
    return make_curve(spec.kind, spec.r, spec.d, spec.prime, spec.seed, weierstrass)


def _elliptic_affine_points(model: CurveModel) -> np.ndarray:
    """All affine F_p-points of the Weierstrass curve, as an (N, 2) array."""
    p = model.p
    a, b = model.weierstrass
    xs = np.arange(p, dtype=np.int64)
    rhs = ((xs * xs % p) * xs + a * xs + b) % p
    squares = (xs * xs) % p
    order = np.argsort(squares, kind="stable")
    sorted_sq = squares[order]
    left = np.searchsorted(sorted_sq, rhs, side="left")
    right = np.searchsorted(sorted_sq, rhs, side="right")
    counts = right - left
    total = int(counts.sum())
    starts = np.repeat(left, counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    ys = order[starts + offsets]
    return np.column_stack([np.repeat(xs, counts), ys]).astype(np.int64)


def count_points(model: CurveModel) -> int:
    """#C(F_p), the point at infinity included."""
    if model.is_rational:
        return model.p + 1
    if model.p > ENUMERATION_LIMIT:
        raise CurveError(f"F_{model.p} is too large to enumerate")
    return int(_elliptic_affine_points(model).shape[0]) + 1


def _candidate_batches(model: CurveModel, rng: np.random.Generator) -> Iterator[np.ndarray]:
    p = model.p
    if p <= ENUMERATION_LIMIT:
        if model.is_rational:
            yield rng.permutation(p).astype(np.int64)
        else:
            pts = _elliptic_affine_points(model)
            yield pts[rng.permutation(pts.shape[0])]
        return
    a, b = model.weierstrass or (0, 0)
    for _ in range(_MAX_BATCHES):
        xs = rng.integers(0, p, size=_BATCH, dtype=np.int64)
        if model.is_rational:
            yield xs
            continue
        flips = rng.integers(0, 2, size=_BATCH)
        found = []
        for x, flip in zip(xs.tolist(), flips.tolist()):
            y = sympy.sqrt_mod((x**3 + a * x + b) % p, p)
            if y is not None:
                found.append((x, (p - y) % p if flip else y))
        if found:
            yield np.array(found, dtype=np.int64)


def _normalize(points: np.ndarray, fld: PrimeField) -> List[Optional[Tuple[int, ...]]]:
    """Scale each point so its first nonzero coordinate is 1; None for the zero vector."""
    keys: List[Optional[Tuple[int, ...]]] = []
    for row in points.tolist():
        lead = next((v for v in row if v), 0)
        if lead == 0:
            keys.append(None)
            continue
        inv = fld.inverse(lead)
        keys.append(tuple(v * inv % fld.p for v in row))
    return keys


def sample_points(model: CurveModel, n: int, seed: int) -> PointSample:
    """n distinct F_p-points of the curve, deterministic in the seed."""
    if n < 1:
        raise InvalidParamsError(f"Need at least one point, got n={n}")
    fld = model.field
    algebra = SectionAlgebra(model)
    rng = _rng(seed, "points")
    seen = set()
    chosen_points: List[np.ndarray] = []
    chosen_params: List[np.ndarray] = []
    for batch in _candidate_batches(model, rng):
        for start in range(0, batch.shape[0], max(64, 2 * n)):
            params = batch[start:start + max(64, 2 * n)]
            coords = matmul_mod(algebra.evaluate(params, 1), model.section_basis.T, fld.p)
            for k, key in enumerate(_normalize(coords, fld)):
                if key is None or key in seen:
                    continue
                seen.add(key)
                chosen_points.append(coords[k])
                chosen_params.append(params[k])
                if len(chosen_points) == n:
                    return PointSample(
                        model, _frozen(np.array(chosen_points)), _frozen(np.array(chosen_params)), seed
                    )
    hint = ""
    if not model.is_rational:
        hint = f" (Hasse bound: #C(F_p) <= {fld.p + 1 + 2 * int(np.ceil(np.sqrt(fld.p)))})"
    raise NotEnoughPointsError(
        f"Only {len(chosen_points)} usable points over F_{fld.p}, {n} requested{hint}"
    )


def monomial_exponents(num_vars: int, j: int) -> List[Tuple[int, ...]]:
    """Variable-index multisets of the degree-j monomials, in evaluation column order."""
    return list(itertools.combinations_with_replacement(range(num_vars), j))


def evaluation_matrix(sample: PointSample, j: int) -> Matrix:
    """gamma x C(r+j, j) matrix of degree-j monomials evaluated at the sample."""
    if j < 0:
        raise InvalidParamsError(f"Degree must be >= 0, got {j}")
    p = sample.field.p
    pts = sample.points
    columns = []
    for combo in monomial_exponents(pts.shape[1], j):
        col = np.ones(pts.shape[0], dtype=np.int64)
        for k in combo:
            col = (col * pts[:, k]) % p
        columns.append(col)
    return Matrix(sample.field, np.column_stack(columns))


def graded_piece(sample: PointSample, j: int) -> Subspace:
    """S(Gamma)_j as a subspace of F_p^gamma."""
    return row_space(evaluation_matrix(sample, j).transpose())


def next_graded_piece(sample: PointSample, piece: Subspace) -> Subspace:
    """S(Gamma)_(j+1) = sum_k x_k * S(Gamma)_j."""
    p = sample.field.p
    prev = piece.basis.entries
    blocks = [(prev * sample.points[:, k][None, :]) % p for k in range(sample.points.shape[1])]
    return span(sample.field, sample.gamma, blocks)


def graded_pieces(sample: PointSample, j_max: int) -> List[Subspace]:
    """S(Gamma)_0 .. S(Gamma)_j_max, each built from the previous one."""
    pieces = [row_space(Matrix(sample.field, np.ones((1, sample.gamma), dtype=np.int64)))]
    for _ in range(j_max):
        pieces.append(next_graded_piece(sample, pieces[-1]))
    return pieces


def vanishing_subspace(sample: PointSample, j: int, twist: TwistSpec) -> Subspace:
    """H^0(L^(m+j)(-D)) restricted to the points outside D.

    The full section space H^0(L^(m+j)) is evaluated at the sample, the
    sections vanishing on D are kept, and their values on the remaining
    points are returned. This is exact when more than d*(m+j) points
    remain, since then no nonzero section vanishes on all of them.
    """
    n = twist.m + j
    if n < 0:
        return Subspace.zero(sample.field, sample.gamma - twist.degree_offset)
    vanishing = list(twist.vanishing_indices)
    if any(i >= sample.gamma for i in vanishing):
        raise InvalidParamsError("vanishing_indices out of the sample range")
    marked = set(vanishing)
    complement = [i for i in range(sample.gamma) if i not in marked]
    if len(complement) <= sample.model.d * n:
        raise SampleTooSmallError(
            f"{len(complement)} points cannot separate sections of degree {sample.model.d * n}"
        )
    fld = sample.field
    values = SectionAlgebra(sample.model).evaluate(sample.parameters, n)
    if vanishing:
        sections = kernel_basis(Matrix(fld, values[vanishing])).basis.entries
    else:
        sections = np.eye(values.shape[1], dtype=np.int64)
    if sections.shape[0] == 0:
        return Subspace.zero(fld, len(complement))
    image = matmul_mod(values[complement], sections.T, fld.p)
    return row_space(Matrix(fld, image.T))
