"""Pydantic schema for graded Betti tables."""

from __future__ import annotations

import csv
import io
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, Field, NonNegativeInt, model_validator


class BettiMeta(BaseModel):
    """Provenance of a table."""

    g: int = Field(description="Genus of the curve carrying the points.")
    d: int = Field(description="Degree of the curve.")
    gamma: Optional[int] = Field(
        default=None, description="Number of points; null for the curve's own table."
    )
    prime: Optional[int] = Field(default=None, description="Characteristic used.")
    seed: Optional[int] = Field(default=None, description="Sampling seed.")
    kind: Optional[str] = Field(default=None, description="Curve model kind, or 'predicted'.")


class BettiRow(BaseModel):
    """Row j of the table: b_{i,j} for i = 0..r+1."""

    j: NonNegativeInt
    b: List[NonNegativeInt]


class BettiTable(BaseModel):
    """Betti table with rows j and columns i = 0..r+1."""

    r: int = Field(ge=1, description="Ambient projective dimension.")
    meta: BettiMeta
    rows: List[BettiRow]

    @model_validator(mode="after")
    def _check_shape(self) -> "BettiTable":
        seen = [row.j for row in self.rows]
        if seen != sorted(set(seen)):
            raise ValueError("rows must have distinct, increasing j")
        for row in self.rows:
            if len(row.b) != self.r + 2:
                raise ValueError(f"row {row.j} has {len(row.b)} entries, expected {self.r + 2}")
            if row.j == 0 and row.b[0] != 1:
                raise ValueError("b_{0,0} must be 1")
            if row.j > 0 and row.b[0] != 0:
                raise ValueError(f"b_(0,{row.j}) must be 0")
        return self

    @classmethod
    def from_rows(cls, r: int, meta: BettiMeta, rows: Dict[int, Sequence[int]]) -> "BettiTable":
        return cls(
            r=r,
            meta=meta,
            rows=[BettiRow(j=j, b=list(rows[j])) for j in sorted(rows)],
        )

    @property
    def j_max(self) -> int:
        return self.rows[-1].j if self.rows else -1

    def row(self, j: int) -> List[int]:
        for row in self.rows:
            if row.j == j:
                return list(row.b)
        return [0] * (self.r + 2)

    def entry(self, i: int, j: int) -> int:
        if i < 0 or i > self.r + 1:
            return 0
        return self.row(j)[i]

    def last_nonzero_row(self) -> int:
        nonzero = [row.j for row in self.rows if any(row.b)]
        return max(nonzero) if nonzero else -1

    def to_csv(self) -> str:
        """Rows j down, columns i across."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["j"] + [str(i) for i in range(self.r + 2)])
        for row in self.rows:
            writer.writerow([row.j] + row.b)
        return buf.getvalue()
