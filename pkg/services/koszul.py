"""Graded Betti numbers as Koszul cohomology.

For a graded piece sequence W_j inside F_p^gamma and the r+1 coordinate
multipliers x_0..x_r, the Koszul complex

    ... -> wedge^(i+1) V (x) W_(j-1) -> wedge^i V (x) W_j -> wedge^(i-1) V (x) W_(j+1) -> ...

has middle homology of dimension b_{i,j}. Only ranks are computed.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import DEFAULT_SEED
from schemas.betti import BettiMeta, BettiTable
from services.curves import (
    CurveModel,
    PointSample,
    TwistSpec,
    graded_pieces,
    next_graded_piece,
    sample_points,
    vanishing_subspace,
)
from services.exactla import Matrix, PrimeField, Subspace, rank

logger = logging.getLogger(__name__)


class KoszulError(Exception):
    """Raised when a Koszul computation is requested outside its range."""


class MissingPieceError(KoszulError):
    """Raised when a graded piece needed by a differential is not stored."""


class MultiplierError(KoszulError):
    """Raised when a multiplier does not map W_j into W_(j+1)."""


@dataclass(frozen=True, eq=False)
class KoszulInstance:
    """Graded pieces W_j with the coordinate multipliers acting between them.

    Blocks and differential ranks are memoized in an unlocked cache; use an
    instance from one thread only.
    """

    field: PrimeField
    v_dim: int
    pieces: Dict[int, Subspace]
    multipliers: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(
        cls,
        fld: PrimeField,
        multipliers: np.ndarray,
        pieces: Dict[int, Subspace],
        check: bool = True,
    ) -> "KoszulInstance":
        multipliers = fld.reduce(multipliers)
        inst = cls(fld, int(multipliers.shape[0]), dict(pieces), multipliers)
        if check:
            inst.check_multipliers()
        return inst

    def piece(self, j: int) -> Subspace:
        try:
            return self.pieces[j]
        except KeyError:
            raise MissingPieceError(f"Graded piece W_{j} is not available") from None

    def check_multipliers(self) -> None:
        p = self.field.p
        for j, src in self.pieces.items():
            dst = self.pieces.get(j + 1)
            if dst is None or src.dim == 0:
                continue
            for k in range(self.v_dim):
                images = (src.basis.entries * self.multipliers[k][None, :]) % p
                if not dst.contains(images):
                    raise MultiplierError(f"x_{k} does not map W_{j} into W_{j + 1}")

    def block(self, k: int, j: int) -> np.ndarray:
        """Coordinates (dim W_j x dim W_(j+1)) of x_k times the basis of W_j."""
        key = ("block", k, j)
        if key not in self._cache:
            src, dst = self.piece(j), self.piece(j + 1)
            images = (src.basis.entries * self.multipliers[k][None, :]) % self.field.p
            self._cache[key] = dst.coordinates(images)
        return self._cache[key]


def _wedge_basis(n: int, i: int) -> List[Tuple[int, ...]]:
    if i < 0 or i > n:
        return []
    return list(itertools.combinations(range(n), i))


def koszul_differential(inst: KoszulInstance, i: int, j: int) -> Matrix:
    """Matrix of d_{i,j}: wedge^i V (x) W_j -> wedge^(i-1) V (x) W_(j+1).

    Columns follow (wedge tuple, basis vector of W_j), rows
    (wedge tuple, basis vector of W_(j+1)), wedge tuples in lex order.
    """
    if i < 0:
        raise KoszulError(f"Wedge index must be >= 0, got {i}")
    src, dst = inst.piece(j), inst.piece(j + 1)
    domain = _wedge_basis(inst.v_dim, i)
    codomain = _wedge_basis(inst.v_dim, i - 1)
    sd, dd = src.dim, dst.dim
    out = np.zeros((len(codomain) * dd, len(domain) * sd), dtype=np.int64)
    if out.size == 0:
        return Matrix(inst.field, out)
    p = inst.field.p
    position = {t: n for n, t in enumerate(codomain)}
    blocks = [inst.block(k, j).T for k in range(inst.v_dim)]
    for col, tup in enumerate(domain):
        for s, k in enumerate(tup):
            row = position[tup[:s] + tup[s + 1:]]
            # (-1)^(s+1) with s counted from 1
            block = blocks[k] if s % 2 == 0 else (-blocks[k]) % p
            out[row * dd:(row + 1) * dd, col * sd:(col + 1) * sd] = block
    return Matrix(inst.field, out)


def _differential_rank(inst: KoszulInstance, i: int, j: int) -> int:
    key = ("rank", i, j)
    if key not in inst._cache:
        if i > inst.v_dim or i < 1 or j not in inst.pieces or inst.pieces[j].dim == 0:
            inst._cache[key] = 0
        else:
            inst._cache[key] = rank(koszul_differential(inst, i, j))
            logger.debug("rank d_(%d,%d) = %d", i, j, inst._cache[key])
    return inst._cache[key]


def betti_number(inst: KoszulInstance, i: int, j: int) -> int:
    """b_{i,j} = dim ker d_{i,j} - rank d_{i+1,j-1}."""
    for needed in (j - 1, j, j + 1):
        inst.piece(needed)
    kernel = comb(inst.v_dim, i) * inst.piece(j).dim - _differential_rank(inst, i, j)
    return kernel - _differential_rank(inst, i + 1, j - 1)


def hilbert_function(sample: PointSample, j_max: int) -> List[int]:
    return [w.dim for w in graded_pieces(sample, j_max)]


def stabilization_degree(sample: PointSample) -> int:
    """Smallest j with h_Gamma(j) = gamma."""
    j, piece = 0, graded_pieces(sample, 0)[0]
    while piece.dim < sample.gamma:
        piece = next_graded_piece(sample, piece)
        j += 1
    return j


def _pieces_with_floor(sample: PointSample, top: int) -> Dict[int, Subspace]:
    pieces = {j: w for j, w in enumerate(graded_pieces(sample, top))}
    pieces[-1] = Subspace.zero(sample.field, sample.gamma)
    return pieces


def koszul_instance(sample: PointSample, j_max: int) -> KoszulInstance:
    """Pieces W_-1 .. W_(j_max+1) of S(Gamma) with the coordinate multipliers."""
    return KoszulInstance.build(sample.field, sample.points.T, _pieces_with_floor(sample, j_max + 1))


def _table(inst: KoszulInstance, j_max: int, meta: BettiMeta) -> BettiTable:
    r = inst.v_dim - 1
    rows = {j: [betti_number(inst, i, j) for i in range(r + 2)] for j in range(j_max + 1)}
    return BettiTable.from_rows(r, meta, rows)


def betti_table(sample: PointSample, j_max: Optional[int] = None) -> BettiTable:
    """Betti table of the points, rows 0..j_max.

    The default j_max is one past the degree where the Hilbert function
    reaches gamma, so the last row is the first one forced to vanish.
    """
    if j_max is None:
        j_max = max(2, stabilization_degree(sample) + 1)
    if j_max < 2:
        raise KoszulError(f"j_max must be >= 2, got {j_max}")
    model = sample.model
    meta = BettiMeta(
        g=model.genus, d=model.d, gamma=sample.gamma, prime=model.p, seed=sample.seed, kind=model.kind.value
    )
    return _table(koszul_instance(sample, j_max), j_max, meta)


def default_curve_j_max(model: CurveModel) -> int:
    return max(2, model.d - model.r + 3)


def curve_betti_table(
    model: CurveModel, j_max: Optional[int] = None, seed: int = DEFAULT_SEED
) -> BettiTable:
    """Betti table of S(C) from N = d*(j_max+1)+1 points.

    A form of degree j <= j_max+1 vanishing at more than d*j points of the
    curve vanishes on the curve, so the sampled pieces equal S(C)_j.
    """
    if j_max is None:
        j_max = default_curve_j_max(model)
    if j_max < 2:
        raise KoszulError(f"j_max must be >= 2, got {j_max}")
    sample = sample_points(model, model.d * (j_max + 1) + 1, seed)
    meta = BettiMeta(g=model.genus, d=model.d, gamma=None, prime=model.p, seed=seed, kind=model.kind.value)
    return _table(koszul_instance(sample, j_max), j_max, meta)


def twisted_koszul_dim(
    model: CurveModel,
    twist: TwistSpec,
    i: int,
    sample_size: int,
    seed: int = DEFAULT_SEED,
) -> int:
    """dim K_{i,1}(C; eta, L) for eta = L^m(-D).

    The three spaces H^0(eta), H^0(eta L), H^0(eta L^2) are realized by
    vanishing_subspace on a sample whose first |D| points form D.
    """
    if any(k >= sample_size for k in twist.vanishing_indices):
        raise KoszulError("vanishing_indices exceed the sample size")
    sample = sample_points(model, sample_size, seed)
    pieces = {j: vanishing_subspace(sample, j, twist) for j in (0, 1, 2)}
    marked = set(twist.vanishing_indices)
    complement = [k for k in range(sample.gamma) if k not in marked]
    inst = KoszulInstance.build(sample.field, sample.points[complement].T, pieces)
    return betti_number(inst, i, 1)


def regularity(table: BettiTable) -> int:
    """Index of the last nonzero row."""
    return table.last_nonzero_row()


def linear_strand(table: BettiTable) -> List[int]:
    """b_{i,1} for i = 1..r+1."""
    return table.row(1)[1:]
