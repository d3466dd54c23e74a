"""Exact slope and stability calculus for restricted tangent and kernel bundles.

Everything here is arithmetic on degrees, ranks and Brill-Noether numbers:
adjusted slopes on nodal curves, general splitting types, fraction
selectors for two-step extensions, the corank inequality audit, the
stability verdict tables and the degeneration planners.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from schemas.hk import RationalValue
from schemas.plan import (
    DecompositionType,
    DegenerationPlan,
    IGCPlan,
    IGCStep,
    InequalityAudit,
    InequalityQuad,
    PlanBase,
    PlanStep,
    PlanTarget,
    QuotientDescriptor,
    StabilityReport,
    Summand,
)
from services.mrc import failure_region

logger = logging.getLogger(__name__)


class SlopeError(Exception):
    """Raised when slope arithmetic is requested outside its range."""


class MissingSubsheafError(SlopeError):
    """Raised when a sketch carries no data for the requested subsheaf."""


class InfeasibleError(SlopeError):
    """Raised when no degeneration chain exists for the requested data."""


class Stability(str, Enum):
    STABLE = "stable"
    STRICTLY_SEMISTABLE = "strictly_semistable"
    OUT_OF_SCOPE = "out_of_scope"


class StrongStability(str, Enum):
    STRONGLY_STABLE = "strongly_stable"
    STRONGLY_SEMISTABLE = "strongly_semistable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SlopeDatum:
    degree: int
    rank: int

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise SlopeError(f"Rank must be positive, got {self.rank}")

    @property
    def mu(self) -> Fraction:
        return Fraction(self.degree, self.rank)


@dataclass(frozen=True)
class SubsheafData:
    """A subsheaf F given by its pullback to each component and its gluing defects.

    ``codims[k]`` is codim_F(F|p1 cap F|p2) at the k-th node of the sketch.
    """

    pieces: Dict[str, SlopeDatum]
    codims: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return next(iter(self.pieces.values())).rank

    @property
    def degree(self) -> int:
        return sum(piece.degree for piece in self.pieces.values())

    @property
    def mu(self) -> Fraction:
        return Fraction(self.degree, self.rank)


@dataclass(frozen=True)
class NodalBundleSketch:
    """A vector bundle on a nodal curve through its components and nodes."""

    components: List[Tuple[str, SlopeDatum]]
    nodes: List[Tuple[Tuple[str, str], str]] = field(default_factory=list)
    subsheaf_data: Optional[List[SubsheafData]] = None

    def __post_init__(self) -> None:
        if not self.components:
            raise SlopeError("A sketch needs at least one component")
        names = [name for name, _ in self.components]
        if len(set(names)) != len(names):
            raise SlopeError("Component names must be distinct")
        if len({datum.rank for _, datum in self.components}) != 1:
            raise SlopeError("Components must carry the same rank")
        adjacency: Dict[str, set] = {name: set() for name in names}
        for (a, b), _ in self.nodes:
            if a not in adjacency or b not in adjacency:
                raise SlopeError(f"Node joins unknown components {(a, b)}")
            adjacency[a].add(b)
            adjacency[b].add(a)
        seen, stack = {names[0]}, [names[0]]
        while stack:
            for nxt in adjacency[stack.pop()] - seen:
                seen.add(nxt)
                stack.append(nxt)
        if len(seen) != len(names):
            raise SlopeError("Components are not connected through the nodes")
        for sub in self.subsheaf_data or []:
            if set(sub.pieces) != set(names):
                raise SlopeError("A subsheaf needs a piece on every component")
            if len({piece.rank for piece in sub.pieces.values()}) != 1:
                raise SlopeError("Subsheaf pieces must carry the same rank")
            if len(sub.codims) != len(self.nodes):
                raise SlopeError("A subsheaf needs one codimension per node")
            if any(c < 0 or c > sub.rank for c in sub.codims):
                raise SlopeError("Codimensions must lie in [0, rank F]")

    @property
    def rank(self) -> int:
        return self.components[0][1].rank

    @property
    def degree(self) -> int:
        return sum(datum.degree for _, datum in self.components)

    @property
    def mu(self) -> Fraction:
        return Fraction(self.degree, self.rank)


def rho(g: int, r: int, d: int) -> int:
    """Brill-Noether number g - (r+1)(g - d + r)."""
    return g - (r + 1) * (g - d + r)


def rho_identity_holds(g: int, r: int, d: int) -> bool:
    return rho(g, r, d) == rho(g - r - 1, r, d - r)


def kernel_bundle(r: int, d: int) -> SlopeDatum:
    """M_V for a nondegenerate degree-d map to P^r: rank r, degree -d."""
    return SlopeDatum(-d, r)


def tangent_bundle(r: int, d: int) -> SlopeDatum:
    """The restricted tangent bundle: rank r, degree (r+1) d."""
    return SlopeDatum((r + 1) * d, r)


def twist(datum: SlopeDatum, line_degree: int) -> SlopeDatum:
    return SlopeDatum(datum.degree + datum.rank * line_degree, datum.rank)


def elementary_modification(e: SlopeDatum, f: SlopeDatum, deg_d: int) -> SlopeDatum:
    """E[D -> F]: same rank, degree lowered by (rk E - rk F) deg D."""
    if f.rank > e.rank or deg_d < 0:
        raise SlopeError("Need rk F <= rk E and deg D >= 0")
    return SlopeDatum(e.degree - (e.rank - f.rank) * deg_d, e.rank)


def adjusted_slope(sketch: NodalBundleSketch, subsheaf_index: int) -> Fraction:
    """mu(F) - (1 / rk F) * sum of the gluing codimensions of F."""
    data = sketch.subsheaf_data
    if data is None or not 0 <= subsheaf_index < len(data):
        raise MissingSubsheafError(f"No subsheaf data at index {subsheaf_index}")
    sub = data[subsheaf_index]
    return sub.mu - Fraction(sum(sub.codims), sub.rank)


def _adjusted_slopes(sketch: NodalBundleSketch) -> List[Fraction]:
    if sketch.subsheaf_data is None:
        raise MissingSubsheafError("The sketch records no subsheaves")
    return [adjusted_slope(sketch, k) for k in range(len(sketch.subsheaf_data))]


def is_semistable(sketch: NodalBundleSketch) -> bool:
    """mu_adj(F) <= mu(E) for every recorded subsheaf F."""
    return all(mu <= sketch.mu for mu in _adjusted_slopes(sketch))


def is_stable(sketch: NodalBundleSketch) -> bool:
    return all(mu < sketch.mu for mu in _adjusted_slopes(sketch))


def ray_open_hypotheses(sketch: NodalBundleSketch) -> bool:
    """True when the slope is integral along all but at most one component."""
    fractional = [name for name, datum in sketch.components if datum.mu.denominator != 1]
    return len(fractional) <= 1


def pointing_det_degree(dim_lambda: int, deg_l: int, preimage_len: int) -> int:
    """deg det T_(f -> Lambda) = (dim Lambda + 1) deg L + len f^-1(Lambda)."""
    if dim_lambda < 0 or preimage_len < 0:
        raise SlopeError("dim Lambda and the preimage length must be non-negative")
    return (dim_lambda + 1) * deg_l + preimage_len


def check_close_slope(s: SlopeDatum, q: SlopeDatum) -> bool:
    """No integer lies strictly between mu(S) and mu(Q)."""
    return (
        math.ceil(s.mu) <= math.floor(q.mu) + 1
        and math.ceil(q.mu) <= math.floor(s.mu) + 1
    )


def minimal_exceeding_slope(mu_e: Fraction, rk_e: int) -> Fraction:
    """Least fraction above mu_e whose reduced denominator is below rk_e.

    Walks the Stern-Brocot tree on the fractional part, keeping the
    tightest upper bound with denominator at most rk_e - 1.
    """
    if rk_e < 2:
        raise SlopeError(f"Need rank >= 2, got {rk_e}")
    mu_e = Fraction(mu_e)
    limit = rk_e - 1
    whole = math.floor(mu_e)
    part = mu_e - whole
    lower, upper = (0, 1), (1, 1)
    while True:
        mediant = (lower[0] + upper[0], lower[1] + upper[1])
        if mediant[1] > limit:
            return whole + Fraction(*upper)
        if Fraction(*mediant) > part:
            upper = mediant
        else:
            lower = mediant


def zw_pair(b: int, a: int) -> Tuple[int, int]:
    """(z, w) with z/w the least fraction above b/a with w < a."""
    if not 0 < b < a:
        raise SlopeError(f"Need 0 < b < a, got b={b}, a={a}")
    best = minimal_exceeding_slope(Fraction(b, a), a)
    z, w = best.numerator, best.denominator
    if z > b:
        raise SlopeError(f"z={z} exceeds b={b}")
    return z, w


def xy_pair(m: int, r: int) -> Tuple[int, int]:
    if not 0 < m + 1 < r:
        raise SlopeError(f"Need 0 < m + 1 < r, got m={m}, r={r}")
    k = math.gcd(m + 1, r)
    if k == 1:
        best = minimal_exceeding_slope(Fraction(m + 1, r), r)
        return best.numerator, best.denominator
    a, b = (m + 1) // k, r // k
    return (k - 1) * a, (k - 1) * b


def check_minimal_quotient(s: SlopeDatum, q: SlopeDatum) -> bool:
    """Whether 0 -> S -> E -> Q -> 0 has Q of minimal exceeding slope and S, Q close."""
    total = SlopeDatum(s.degree + q.degree, s.rank + q.rank)
    return q.mu == minimal_exceeding_slope(total.mu, total.rank) and check_close_slope(s, q)


def general_type_p1(r: int, d: int) -> DecompositionType:
    """Balanced splitting O(a)^(r-b) + O(a+1)^b with d = r a + b."""
    if r < 1:
        raise SlopeError(f"Need r >= 1, got {r}")
    a, b = divmod(d, r)
    summands = []
    if r - b:
        summands.append(Summand(twist=a, multiplicity=r - b))
    if b:
        summands.append(Summand(twist=a + 1, multiplicity=b))
    return DecompositionType(curve="p1", rank=r, degree=d, summands=summands)


def general_type_elliptic(r: int, d: int) -> DecompositionType:
    """Tangent bundle of a general elliptic curve of degree d: gcd(d, r) stable factors."""
    if r < 1 or d < 1:
        raise SlopeError(f"Need r, d >= 1, got r={r}, d={d}")
    a = math.gcd(d, r)
    r1, d1 = r // a, d // a
    return DecompositionType(
        curve="elliptic",
        rank=r,
        degree=(r + 1) * d,
        a=a,
        r1=r1,
        d1=d1,
        factor_degree=(r + 1) * d1,
    )


def stability_verdict(g: int, r: int, d: int) -> Stability:
    if g <= 1 or rho(g, r, d) < 0:
        return Stability.OUT_OF_SCOPE
    if g == 2 and d == 2 * r and r >= 3:
        return Stability.STRICTLY_SEMISTABLE
    return Stability.STABLE


def strong_stability_verdict(g: int, r: int, d: int, characteristic: int = 0) -> StrongStability:
    """Strong (semi)stability of the kernel bundle; characteristic 0 never divides r."""
    if rho(g, r, d) < 0:
        return StrongStability.UNKNOWN
    divides_r = characteristic > 0 and r % characteristic == 0
    if (
        (g >= r + 1 and d % r == 0)
        or (g >= 2 and d >= 2 * r + 1 and not divides_r)
        or (g >= r + 2 and d >= 3 * r)
    ):
        return StrongStability.STRONGLY_STABLE
    if g >= 1 and d >= 2 * r:
        return StrongStability.STRONGLY_SEMISTABLE
    return StrongStability.UNKNOWN


def corank1_witness(g: int, r: int, d: int) -> Optional[QuotientDescriptor]:
    """The quotient omega_C (x) L of the tangent bundle, present only for g = 2, d = 2r."""
    if d > 2 * r or g < 2 or r < 2:
        raise SlopeError(f"Need d <= 2r, g >= 2, r >= 2, got {(g, r, d)}")
    if g == 2 and d == 2 * r:
        return QuotientDescriptor(description="omega_C (x) L", degree=2 * g - 2 + d)
    return None


def _quad_values(d: int, r: int, s: int, t: int) -> Tuple[int, int]:
    p1 = r * (t + 1) * (r - 1 - s) + (d - 2 * r) * (r * t - t * s - 2 * s + r)
    p0 = r * (t + 1) * (r - 2 - s) + (d - 2 * r) * (r * t - t * s - 2 * s)
    return p0, p1


def audit_inequalities(r_max: int) -> InequalityAudit:
    """Check P1 > 0 and P0 >= 0 (zero only at d = 2r, s = r - 2) over the whole grid."""
    if r_max < 4:
        raise SlopeError(f"Need r_max >= 4, got {r_max}")
    checked, zero_cases = 0, 0
    p1_bad: List[InequalityQuad] = []
    p0_bad: List[InequalityQuad] = []
    for r in range(4, r_max + 1):
        for d in range(r + 1, 2 * r + 1):
            for s in range(1, r - 1):
                for t in range(s):
                    p0, p1 = _quad_values(d, r, s, t)
                    checked += 1
                    quad = InequalityQuad(d=d, r=r, s=s, t=t, p0=p0, p1=p1)
                    if p1 <= 0:
                        p1_bad.append(quad)
                    if p0 == 0:
                        zero_cases += 1
                    if p0 < 0 or (p0 == 0 and (d, s) != (2 * r, r - 2)):
                        p0_bad.append(quad)
    audit = InequalityAudit(
        r_max=r_max,
        checked=checked,
        p1_counterexamples=p1_bad,
        p0_counterexamples=p0_bad,
        p0_zero_cases=zero_cases,
    )
    logger.info("Inequality audit up to r=%d: %d quads, clean=%s", r_max, checked, audit.clean)
    return audit


def _plan_base(g: int, r: int, d: int) -> Optional[PlanBase]:
    value = rho(g, r, d)
    if value < 0:
        return None
    if d == 2 * r and 0 <= g <= r + 1:
        return PlanBase(kind="rational_normal", d=d, attach=g, rho=value)
    if 2 * r + 1 <= d <= 3 * r - 1 and 1 <= g <= d - r + 1:
        return PlanBase(kind="elliptic", d=d, attach=g, elliptic_degree=d - r, rho=value)
    return None


def _eps_order(g: int, r: int, d: int) -> List[int]:
    # keep g >= 1 whenever the next degree still lies above 2r
    floor = 1 if d - r > 2 * r else 0
    greedy = min(r + 1, g - floor)
    rest = [eps for eps in range(min(r + 1, g), -1, -1) if eps != greedy]
    return ([greedy] if greedy >= 0 else []) + rest


def _search_plan(g: int, r: int, d: int) -> Optional[Tuple[List[PlanStep], PlanBase]]:
    if g < 0 or rho(g, r, d) < 0:
        return None
    if d <= 3 * r - 1:
        base = _plan_base(g, r, d)
        return ([], base) if base is not None else None
    for eps in _eps_order(g, r, d):
        found = _search_plan(g - eps, r, d - r)
        if found is not None:
            steps, base = found
            return [PlanStep(d=d, g=g, eps=eps, rho=rho(g, r, d))] + steps, base
    return None


def plan_degeneration(g: int, r: int, d: int) -> DegenerationPlan:
    """Reduce (g, r, d) by rational-normal attachments to an elliptic or rational-normal base."""
    if r < 1 or d < 2 * r or g < 1:
        raise InfeasibleError(f"Need r >= 1, d >= 2r, g >= 1, got {(g, r, d)}")
    if rho(g, r, d) < 0:
        raise InfeasibleError(f"rho({g}, {r}, {d}) = {rho(g, r, d)} < 0")
    found = _search_plan(g, r, d)
    if found is None:
        raise InfeasibleError(f"No degeneration chain for {(g, r, d)}")
    steps, base = found
    for step in steps:
        logger.debug("plan step (d=%d, g=%d) eps=%d", step.d, step.g, step.eps)
    return DegenerationPlan(target=PlanTarget(g=g, r=r, d=d), steps=steps, base=base)


def plan_weak_raynaud(g: int, r: int, d: int) -> IGCPlan:
    """Projections and rational-normal attachments from (g, r, d) down to a line."""
    if r < 1 or d < r or g < 0:
        raise InfeasibleError(f"Need r >= 1, d >= r, g >= 0, got {(g, r, d)}")
    if rho(g, r, d) < 0:
        raise InfeasibleError(f"rho({g}, {r}, {d}) = {rho(g, r, d)} < 0")
    target = PlanTarget(g=g, r=r, d=d)
    steps: List[IGCStep] = []
    while (g, r, d) != (0, 1, 1):
        if d < 2 * r:
            steps.append(IGCStep(kind="project", g=g, r=r, d=d, rho=rho(g, r, d)))
            r, d = r - 1, d - 1
        else:
            eps = min(r + 1, g)
            steps.append(IGCStep(kind="attach", g=g, r=r, d=d, eps=eps, rho=rho(g, r, d)))
            g, d = g - eps, d - r
        if rho(g, r, d) < 0 or r < 1:
            raise InfeasibleError(f"Chain leaves the Brill-Noether range at {(g, r, d)}")
    return IGCPlan(target=target, steps=steps, base=PlanTarget(g=0, r=1, d=1))


def stability_report(g: int, r: int, d: int, characteristic: int = 0) -> StabilityReport:
    """Everything the slope calculus says about a general (g, r, d) curve."""
    if g < 0 or r < 1 or d < 1:
        raise SlopeError(f"Invalid (g, r, d) = {(g, r, d)}")
    tangent_type: Optional[DecompositionType] = None
    if g == 0:
        tangent_type = general_type_p1(r, (r + 1) * d)
    elif g == 1:
        tangent_type = general_type_elliptic(r, d)
    corank1 = corank1_witness(g, r, d) if d <= 2 * r and g >= 2 and r >= 2 else None
    return StabilityReport(
        g=g,
        r=r,
        d=d,
        rho=rho(g, r, d),
        kernel_slope=RationalValue.of(kernel_bundle(r, d).mu),
        tangent_slope=RationalValue.of(tangent_bundle(r, d).mu),
        stability=stability_verdict(g, r, d).value,
        strong_stability=strong_stability_verdict(g, r, d, characteristic).value,
        corank1=corank1,
        tangent_type=tangent_type,
        mrc_fails=failure_region(g, r, d),
    )
