"""Pydantic schemas for the slope calculus: degeneration plans, types, audits."""

from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from schemas.hk import RationalValue


def _rho(g: int, r: int, d: int) -> int:
    return g - (r + 1) * (g - d + r)


class PlanTarget(BaseModel):
    g: int = Field(ge=0)
    r: int = Field(ge=1)
    d: int = Field(ge=1)


class PlanStep(BaseModel):
    """Reduction (d, g) -> (d - r, g - eps) by attaching a rational normal curve."""

    d: int
    g: int
    eps: int = Field(ge=0)
    rho: int


class PlanBase(BaseModel):
    """Where the chain stops."""

    kind: Literal["elliptic", "rational_normal"]
    d: int
    attach: int = Field(ge=0, description="Genus carried by the base, i.e. attachment count.")
    elliptic_degree: Optional[int] = Field(default=None, description="d - r for elliptic bases.")
    rho: int


class DegenerationPlan(BaseModel):
    """Certificate chain from (g, r, d) down to a base case."""

    target: PlanTarget
    steps: List[PlanStep]
    base: PlanBase

    @model_validator(mode="after")
    def _check_chain(self) -> "DegenerationPlan":
        r = self.target.r
        d, g = self.target.d, self.target.g
        for step in self.steps:
            if (step.d, step.g) != (d, g):
                raise ValueError(f"step starts at {(step.d, step.g)}, expected {(d, g)}")
            if step.eps > r + 1 or step.eps > g:
                raise ValueError(f"eps={step.eps} out of range at {(d, g)}")
            if step.rho != _rho(g, r, d) or step.rho < 0:
                raise ValueError(f"rho check fails at {(d, g)}")
            d, g = d - r, g - step.eps
        base = self.base
        if (base.d, base.attach) != (d, g):
            raise ValueError(f"base {(base.d, base.attach)} does not end the chain at {(d, g)}")
        if base.rho != _rho(g, r, d) or base.rho < 0:
            raise ValueError(f"rho check fails at the base {(d, g)}")
        if base.kind == "elliptic":
            if not 2 * r + 1 <= d <= 3 * r - 1:
                raise ValueError(f"elliptic base degree {d} outside [{2 * r + 1}, {3 * r - 1}]")
            if base.elliptic_degree != d - r or not 1 <= g <= d - r + 1:
                raise ValueError("elliptic base violates its attachment constraint")
        elif d != 2 * r or g > r + 1:
            raise ValueError("rational normal base needs d = 2r and g <= r + 1")
        return self


class IGCStep(BaseModel):
    """One inductive step of the ideal-generation chain."""

    kind: Literal["project", "attach"]
    g: int
    r: int
    d: int
    eps: Optional[int] = None
    rho: int


class IGCPlan(BaseModel):
    """Chain of projections and rational-normal attachments down to (0, 1, 1)."""

    target: PlanTarget
    steps: List[IGCStep]
    base: PlanTarget

    @model_validator(mode="after")
    def _check_chain(self) -> "IGCPlan":
        if (self.base.g, self.base.r, self.base.d) != (0, 1, 1):
            raise ValueError("the chain must end at a line (g, r, d) = (0, 1, 1)")
        if any(step.rho < 0 for step in self.steps):
            raise ValueError("every node needs rho >= 0")
        return self


class Summand(BaseModel):
    twist: int
    multiplicity: int = Field(ge=1)


class DecompositionType(BaseModel):
    """Splitting type of a general bundle on P^1, or Atiyah type on an elliptic curve."""

    curve: Literal["p1", "elliptic"]
    rank: int = Field(ge=1)
    degree: int
    summands: List[Summand] = Field(default_factory=list)
    a: Optional[int] = Field(default=None, description="Number of stable factors.")
    r1: Optional[int] = Field(default=None, description="Rank of each factor.")
    d1: Optional[int] = None
    factor_degree: Optional[int] = None

    @model_validator(mode="after")
    def _check_type(self) -> "DecompositionType":
        if self.curve == "p1":
            if sum(s.multiplicity for s in self.summands) != self.rank:
                raise ValueError("multiplicities must add up to the rank")
            if sum(s.twist * s.multiplicity for s in self.summands) != self.degree:
                raise ValueError("twists must add up to the degree")
            twists = [s.twist for s in self.summands]
            if twists and max(twists) - min(twists) > 1:
                raise ValueError("a general bundle on P^1 is balanced")
        else:
            if None in (self.a, self.r1, self.factor_degree):
                raise ValueError("elliptic types need a, r1 and factor_degree")
            if self.a * self.r1 != self.rank or self.a * self.factor_degree != self.degree:
                raise ValueError("factors do not add up to the bundle")
        return self

    def describe(self) -> str:
        if self.curve == "p1":
            return " + ".join(
                f"O({s.twist})" + (f"^{s.multiplicity}" if s.multiplicity > 1 else "")
                for s in self.summands
            )
        return f"{self.a} stable factors of rank {self.r1} and degree {self.factor_degree}"


class InequalityQuad(BaseModel):
    d: int
    r: int
    s: int
    t: int
    p0: int
    p1: int


class InequalityAudit(BaseModel):
    """Exhaustive check of the corank estimates over the constrained grid."""

    r_max: int
    checked: int
    p1_counterexamples: List[InequalityQuad] = Field(default_factory=list)
    p0_counterexamples: List[InequalityQuad] = Field(default_factory=list)
    p0_zero_cases: int = Field(description="Quads with P0 = 0, all expected at d = 2r, s = r - 2.")

    @property
    def clean(self) -> bool:
        return not self.p1_counterexamples and not self.p0_counterexamples


class QuotientDescriptor(BaseModel):
    """The destabilizing quotient line bundle omega_C (x) L."""

    description: str
    degree: int
    rank: int = 1


class StabilityReport(BaseModel):
    """Slope-level facts about the kernel bundle of a general (g, r, d) curve."""

    g: int
    r: int
    d: int
    rho: int
    kernel_slope: RationalValue
    tangent_slope: RationalValue
    stability: Literal["stable", "strictly_semistable", "out_of_scope"]
    strong_stability: Literal["strongly_stable", "strongly_semistable", "unknown"]
    corank1: Optional[QuotientDescriptor] = None
    tangent_type: Optional[DecompositionType] = None
    mrc_fails: bool
