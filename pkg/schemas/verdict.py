"""Pydantic schemas for verification verdicts."""

from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from schemas.betti import BettiTable


class EntryDiff(BaseModel):
    """One entry where the computed table differs from the prediction."""

    i: int
    j: int
    predicted: int
    computed: int

    @property
    def excess(self) -> bool:
        return self.computed > self.predicted


class TwistedDim(BaseModel):
    """dim K_{i,1}(C; eta, L) for eta = L^m(-D) with |D| = vanishing."""

    i: int
    xi_degree: int = Field(description="Degree of the general line bundle xi = eta (x) L.")
    m: int
    vanishing: int
    dim: int


class TrialRecord(BaseModel):
    """Outcome of one sampling trial."""

    seed: int
    prime: int
    match: bool
    computed: Optional[BettiTable] = None
    product_condition: Optional[bool] = None
    twisted: Optional[List[TwistedDim]] = None
    diffs: List[EntryDiff] = Field(default_factory=list)


class Verdict(BaseModel):
    """Aggregated result of repeated trials against a prediction."""

    check: Literal["mrc", "raynaud"]
    status: Literal["confirmed", "violated", "inconclusive"]
    trials: List[TrialRecord]
    predicted: Optional[BettiTable] = None
    computed: Optional[BettiTable] = None
    detail: List[EntryDiff] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_status(self) -> "Verdict":
        if self.status == "confirmed" and not any(t.match for t in self.trials):
            raise ValueError("a confirmed verdict needs a matching trial")
        if self.status == "violated" and (not self.trials or any(t.match for t in self.trials)):
            raise ValueError("a violated verdict needs trials and no match")
        return self
