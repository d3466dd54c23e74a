"""Hilbert-Kunz functions of curve coordinate rings in characteristic p.

HK(q) = dim_k S(C) / (x_0^q, ..., x_r^q) S(C) is summed degree by degree.
S(C)_j is the span of products of j coordinate sections inside H^0(L^j),
kept in the coefficient representation of ``SectionAlgebra`` so that no
points of C are needed, and the Frobenius ideal in degree j is
sum_k x_k^q * S(C)_(j-q).
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from config import MATRIX_CEILING
from schemas.hk import HKEstimate, HKRecord, RationalValue
from services.curves import CurveKind, CurveModel, SectionAlgebra
from services.exactla import Subspace, matmul_mod, span

logger = logging.getLogger(__name__)


class HKError(Exception):
    """Raised when a Hilbert-Kunz computation is requested outside its range."""


class BudgetExceededError(HKError):
    """Raised when a computation would exceed the configured matrix ceiling."""


def hk_predicted(d: int, r: int) -> Fraction:
    """d (r+1) / (2r), the multiplicity under strong semistability."""
    if d < 1 or r < 1:
        raise HKError(f"Need d, r >= 1, got d={d}, r={r}")
    return Fraction(d * (r + 1), 2 * r)


def frobenius_exponent(p: int, q: int) -> int:
    """e with q = p^e, e >= 1."""
    e, rest = 0, q
    while rest > 1 and rest % p == 0:
        rest //= p
        e += 1
    if rest != 1 or e == 0:
        raise HKError(f"q={q} is not a positive power of p={p}")
    return e


def monomial_hk(d: int, q: int) -> List[int]:
    """Per-degree HK of the rational normal curve of degree d by exponent counting.

    S(C)_j has the monomials t^b, 0 <= b <= d j, and x_i^q = t^(q i), so the
    Frobenius ideal in degree j covers t^(q i + b') with 0 <= b' <= d (j - q).
    """
    per_degree = []
    j = 0
    while True:
        size = d * j + 1
        if j < q:
            per_degree.append(size)
        else:
            covered = set()
            for i in range(d + 1):
                covered.update(range(q * i, min(q * i + d * (j - q), d * j) + 1))
            per_degree.append(size - len(covered))
        if per_degree[-1] == 0:
            return per_degree
        j += 1


def _check_budget(algebra: SectionAlgebra, j: int, rows: int, ceiling: int) -> None:
    if algebra.h0(j) > ceiling or rows > ceiling:
        raise BudgetExceededError(
            f"degree {j} needs a {rows} x {algebra.h0(j)} matrix, ceiling is {ceiling}"
        )


def hk_dimension(model: CurveModel, q: int, ceiling: int = MATRIX_CEILING) -> HKRecord:
    """HK(q) with the per-degree quotient dimensions, stopping at the first zero."""
    e = frobenius_exponent(model.p, q)
    p = model.p
    algebra = SectionAlgebra(model)
    sections = [algebra.section(k) for k in range(model.r + 1)]
    frobenius = [algebra.power(s, 1, q) for s in sections]
    cap = (model.r + 1) * q

    mult_cache: Dict[tuple, np.ndarray] = {}

    def mult(k: int, power: int, n: int) -> np.ndarray:
        key = (k, power, n)
        if key not in mult_cache:
            f = sections[k] if power == 1 else frobenius[k]
            mult_cache[key] = algebra.multiplication_matrix(f, power, n)
        return mult_cache[key]

    def image(piece: Subspace, power: int, n: int) -> Subspace:
        blocks = [
            matmul_mod(piece.basis.entries, mult(k, power, n), p) for k in range(model.r + 1)
        ]
        return span(model.field, algebra.h0(n + power), blocks)

    pieces: List[Subspace] = [Subspace.full(model.field, 1)]
    per_degree: List[int] = []
    j = 0
    while True:
        piece = pieces[j]
        if j >= q:
            _check_budget(algebra, j, (model.r + 1) * pieces[j - q].dim, ceiling)
            ideal_dim = image(pieces[j - q], q, j - q).dim
        else:
            ideal_dim = 0
        per_degree.append(piece.dim - ideal_dim)
        logger.debug("q=%d degree %d: dim S_j=%d, quotient=%d", q, j, piece.dim, per_degree[-1])
        if per_degree[-1] == 0:
            break
        if j >= cap:
            raise HKError(f"No vanishing quotient up to degree {cap}")
        _check_budget(algebra, j + 1, (model.r + 1) * piece.dim, ceiling)
        pieces.append(image(piece, 1, j))
        j += 1

    hk = sum(per_degree)
    return HKRecord(
        q=q,
        e=e,
        hk=hk,
        per_degree=per_degree,
        ratio=RationalValue.of(Fraction(hk, q * q)),
    )


def hk_estimate(model: CurveModel, e_max: int, ceiling: int = MATRIX_CEILING) -> HKEstimate:
    """HK(p^e) for e = 1..e_max against d (r+1) / (2r)."""
    if e_max < 1:
        raise HKError(f"e_max must be >= 1, got {e_max}")
    largest = model.d * (model.r + 1) * model.p**e_max + 1
    if largest > ceiling:
        raise BudgetExceededError(
            f"q={model.p}^{e_max} may need pieces of dimension {largest}, ceiling is {ceiling}"
        )
    if not model.is_rational:
        logger.warning("Hilbert-Kunz on elliptic models is experimental")
    predicted = hk_predicted(model.d, model.r)
    records: List[HKRecord] = []
    fitted = Fraction(0)
    for e in range(1, e_max + 1):
        q = model.p**e
        record = hk_dimension(model, q, ceiling)
        deviation = abs(record.ratio.to_fraction() - predicted)
        fitted = max(fitted, deviation * q)
        oracle: Optional[int] = None
        if model.kind is CurveKind.RATIONAL_NORMAL:
            oracle = sum(monomial_hk(model.d, q))
            if oracle != record.hk:
                raise HKError(f"HK({q}) = {record.hk} disagrees with exponent count {oracle}")
        records.append(
            record.model_copy(update={"deviation": RationalValue.of(deviation), "oracle_hk": oracle})
        )
    return HKEstimate(
        kind=model.kind.value,
        r=model.r,
        d=model.d,
        prime=model.p,
        records=records,
        e_hk_predicted=RationalValue.of(predicted),
        ratios=[rec.ratio for rec in records],
        fitted_constant=RationalValue.of(fitted),
        experimental=not model.is_rational,
    )
