"""Minimal Resolution Conjecture: closed-form predictions and their verification.

For gamma general points on a curve C of genus g and degree d in P^r,
u = 1 + floor((gamma + g - 1) / d) and phi is the fractional part of
(gamma + g - 1) / d. The Betti table of the points agrees with that of C
in rows j <= u - 2, vanishes in rows j >= u + 1, and rows u - 1 and u
are determined by

    b_{i,u}   = 0                           if i <= r (1 - phi)
              = d C(r,i) (i/r + phi - 1)    otherwise
    b_{i+1,u-1} - b_{i,u} = C(r,i) (-i d / r + d u - gamma + 1 - g).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import List, Optional, Sequence

import sympy

from config import DEFAULT_SEED, DEFAULT_TRIALS
from schemas.betti import BettiMeta, BettiTable
from schemas.verdict import EntryDiff, TrialRecord, TwistedDim, Verdict
from services.curves import CurveModel, TwistSpec, make_curve, sample_points
from services.koszul import betti_table, curve_betti_table, twisted_koszul_dim

logger = logging.getLogger(__name__)


class MRCError(Exception):
    """Raised when an MRC computation cannot be carried out."""


class InstanceOutOfRangeError(MRCError):
    """Raised when gamma lies below the regularity floor or the model is out of scope."""


@dataclass(frozen=True)
class MRCInstance:
    """(g, r, d, gamma) with the derived row index u and fractional part phi."""

    g: int
    r: int
    d: int
    gamma: int

    def __post_init__(self) -> None:
        if self.g < 0 or self.r < 1 or self.d < 1 or self.gamma < 1:
            raise InstanceOutOfRangeError(f"Invalid instance {self}")
        if self.gamma + self.g - 1 < 0:
            raise InstanceOutOfRangeError("gamma + g - 1 must be non-negative")

    @property
    def u(self) -> int:
        return 1 + (self.gamma + self.g - 1) // self.d

    @property
    def phi(self) -> Fraction:
        return Fraction((self.gamma + self.g - 1) % self.d, self.d)


def euler_characteristic(inst: MRCInstance, i: int) -> int:
    """C(r,i) (-i d / r + d u - gamma + 1 - g), an integer."""
    value = comb(inst.r, i) * (
        Fraction(-i * inst.d, inst.r) + inst.d * inst.u - inst.gamma + 1 - inst.g
    )
    if value.denominator != 1:
        raise MRCError(f"Euler characteristic {value} is not integral")
    return int(value)


def predict_row_u(inst: MRCInstance) -> List[int]:
    """b_{i,u} for i = 0..r."""
    threshold = inst.r * (1 - inst.phi)
    row = []
    for i in range(inst.r + 1):
        if i <= threshold:
            row.append(0)
            continue
        value = inst.d * comb(inst.r, i) * (Fraction(i, inst.r) + inst.phi - 1)
        if value.denominator != 1:
            raise MRCError(f"b_({i},{inst.u}) = {value} is not integral")
        row.append(int(value))
    return row


def predict_row_u_minus_1(inst: MRCInstance) -> List[int]:
    """b_{i+1,u-1} for i = 0..r."""
    row_u = predict_row_u(inst)
    row = [row_u[i] + euler_characteristic(inst, i) for i in range(inst.r + 1)]
    if any(v < 0 for v in row):
        raise InstanceOutOfRangeError(
            f"gamma={inst.gamma} is below P_C(u-1); predicted row u-1 would be {row}"
        )
    return row


def predict_table(inst: MRCInstance, curve_rows: BettiTable) -> BettiTable:
    """Curve rows up to u-2, the two predicted rows, zeros in row u+1."""
    u = inst.u
    if curve_rows.j_max < u - 2 and curve_rows.last_nonzero_row() >= curve_rows.j_max:
        raise InstanceOutOfRangeError(
            f"Curve table stops at row {curve_rows.j_max} while row {u - 2} is needed"
        )
    if curve_rows.last_nonzero_row() > u - 2:
        raise InstanceOutOfRangeError(
            f"gamma={inst.gamma} is below the regularity floor of the curve"
        )
    r = inst.r
    rows = {j: curve_rows.row(j) for j in range(max(u - 1, 0))}
    rows[u - 1] = [1 if u - 1 == 0 else 0] + predict_row_u_minus_1(inst)
    rows[u] = predict_row_u(inst) + [0]
    rows[u + 1] = [0] * (r + 2)
    meta = BettiMeta(g=inst.g, d=inst.d, gamma=inst.gamma, kind="predicted")
    return BettiTable.from_rows(r, meta, rows)


def product_condition(table: BettiTable, u: int) -> bool:
    """b_{i,u} * b_{i+1,u-1} = 0 for every i."""
    return all(table.entry(i, u) * table.entry(i + 1, u - 1) == 0 for i in range(table.r + 1))


def compare_tables(predicted: BettiTable, computed: BettiTable) -> List[EntryDiff]:
    diffs = []
    for j in range(max(predicted.j_max, computed.j_max) + 1):
        for i in range(predicted.r + 2):
            a, b = predicted.entry(i, j), computed.entry(i, j)
            if a != b:
                diffs.append(EntryDiff(i=i, j=j, predicted=a, computed=b))
    return diffs


def regularity_floor(model: CurveModel, curve_table: Optional[BettiTable] = None) -> int:
    """m = last nonzero row of the curve's table + 1."""
    table = curve_table or curve_betti_table(model)
    return table.last_nonzero_row() + 1


def instance_range(model: CurveModel, u: int) -> range:
    """Point counts gamma with P_C(u-1) <= gamma < P_C(u)."""
    return range(model.hilbert_polynomial(u - 1), model.hilbert_polynomial(u))


def _check_scope(model: CurveModel) -> None:
    if model.genus not in (0, 1):
        raise InstanceOutOfRangeError("Only genus 0 and 1 models can be verified")
    if model.genus == 1 and model.r < 3:
        raise InstanceOutOfRangeError("Elliptic verification needs r >= 3")


def _trial_models(model: CurveModel, trials: int) -> List[CurveModel]:
    """The model itself, then rebuilds over successively larger primes."""
    models = [model]
    p = model.p
    for _ in range(trials - 1):
        p = int(sympy.nextprime(p))
        logger.info("Escalating to p=%d", p)
        weierstrass = model.weierstrass if model.fixed_weierstrass else None
        models.append(make_curve(model.kind, model.r, model.d, p, model.seed, weierstrass))
    return models


def _trial_seeds(trials: int, seeds: Optional[Sequence[int]]) -> List[int]:
    if seeds is None:
        return [DEFAULT_SEED + k for k in range(trials)]
    if len(seeds) < trials:
        raise MRCError(f"{trials} trials need {trials} seeds, got {len(seeds)}")
    return list(seeds[:trials])


def verify_mrc(
    model: CurveModel,
    gamma: int,
    trials: int = DEFAULT_TRIALS,
    seeds: Optional[Sequence[int]] = None,
    curve_table: Optional[BettiTable] = None,
) -> Verdict:
    """Compare the Betti tables of sampled points against the prediction."""
    _check_scope(model)
    if trials < 1:
        raise MRCError("At least one trial is needed")
    curve_table = curve_table or curve_betti_table(model)
    floor = regularity_floor(model, curve_table)
    if gamma < model.hilbert_polynomial(floor):
        raise InstanceOutOfRangeError(
            f"gamma={gamma} is below the regularity floor P_C({floor}) = "
            f"{model.hilbert_polynomial(floor)}"
        )
    inst = MRCInstance(model.genus, model.r, model.d, gamma)
    predicted = predict_table(inst, curve_table)

    records: List[TrialRecord] = []
    computed: Optional[BettiTable] = None
    detail: List[EntryDiff] = []
    for trial_model, seed in zip(_trial_models(model, trials), _trial_seeds(trials, seeds)):
        table = betti_table(sample_points(trial_model, gamma, seed), j_max=max(2, inst.u + 1))
        diffs = compare_tables(predicted, table)
        records.append(
            TrialRecord(
                seed=seed,
                prime=trial_model.p,
                match=not diffs,
                computed=table,
                product_condition=product_condition(table, inst.u),
                diffs=diffs,
            )
        )
        computed, detail = table, diffs
        if not diffs:
            break

    notes: List[str] = []
    if records[-1].match:
        status = "confirmed"
        if not records[-1].product_condition:
            raise MRCError("Matching table fails the product condition")
    elif all(any(diff.excess for diff in rec.diffs) for rec in records):
        status = "violated"
        notes.append("every trial exceeds the prediction; small p or special position can cause this")
    else:
        status = "inconclusive"
    logger.info("MRC (g=%d, r=%d, d=%d, gamma=%d): %s", inst.g, inst.r, inst.d, gamma, status)
    return Verdict(
        check="mrc",
        status=status,
        trials=records,
        predicted=predicted,
        computed=computed,
        detail=detail,
        notes=notes,
    )


def xi_degree(g: int, r: int, d: int, i: int) -> int:
    """g - 1 + floor(i d / r)."""
    return g - 1 + (i * d) // r


def twist_for_degree(model: CurveModel, e: int, slack: int = 1) -> TwistSpec:
    """L^m(-D) of degree e, D the first m*d - e sample points.

    m is minimal with |D| >= slack; a nonempty random D keeps the class of
    L^m(-D) general in Pic^e on an elliptic curve.
    """
    m = max(0, -(-(e + slack) // model.d))
    return TwistSpec(m=m, vanishing_indices=tuple(range(m * model.d - e)))


def raynaud_check(
    model: CurveModel,
    i_range: Optional[Sequence[int]] = None,
    trials: int = DEFAULT_TRIALS,
    seeds: Optional[Sequence[int]] = None,
) -> Verdict:
    """Check H^0(wedge^i M_V (x) xi) = 0 for general xi of degree g - 1 + floor(i d / r)."""
    if model.genus not in (0, 1):
        raise InstanceOutOfRangeError("Only genus 0 and 1 models can be checked")
    if trials < 1:
        raise MRCError("At least one trial is needed")
    g, r, d = model.genus, model.r, model.d
    indices = list(i_range) if i_range is not None else list(range(r + 1))
    if any(i < 0 or i > r for i in indices):
        raise InstanceOutOfRangeError(f"Wedge indices must lie in [0, {r}]")

    pending = set(indices)
    records: List[TrialRecord] = []
    for trial_model, seed in zip(_trial_models(model, trials), _trial_seeds(trials, seeds)):
        dims: List[TwistedDim] = []
        for i in sorted(pending):
            xi = xi_degree(g, r, d, i)
            twist = twist_for_degree(trial_model, xi - d)
            size = twist.degree_offset + d * (twist.m + 3) + 1
            dim = twisted_koszul_dim(trial_model, twist, i, size, seed)
            dims.append(
                TwistedDim(i=i, xi_degree=xi, m=twist.m, vanishing=twist.degree_offset, dim=dim)
            )
        pending -= {t.i for t in dims if t.dim == 0}
        records.append(TrialRecord(seed=seed, prime=trial_model.p, match=not pending, twisted=dims))
        if not pending:
            break

    status = "confirmed" if not pending else "violated"
    notes = [] if not pending else [f"nonzero in every trial for i in {sorted(pending)}"]
    logger.info("Raynaud check (g=%d, r=%d, d=%d): %s", g, r, d, status)
    return Verdict(check="raynaud", status=status, trials=records, notes=notes)


def compatible_indices(g: int, r: int, d: int) -> List[int]:
    """i in [0, r] satisfying both failure inequalities."""
    out = []
    for i in range(r + 1):
        slack = g - 1 + (i * d) // r - d + r - i
        if slack >= 0 and slack + r - i >= g:
            out.append(i)
    return out


def failure_region(g: int, r: int, d: int) -> bool:
    """(2r - d) g - r >= 0: the range where MRC fails for every curve."""
    return (2 * r - d) * g - r >= 0
