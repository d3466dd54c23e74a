"""Pydantic schemas for Hilbert-Kunz computations."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class RationalValue(BaseModel):
    """An exact rational, serialized as numerator and denominator."""

    num: int
    den: int = Field(gt=0)

    @model_validator(mode="after")
    def _check_reduced(self) -> "RationalValue":
        if gcd(self.num, self.den) != 1:
            raise ValueError(f"{self.num}/{self.den} is not reduced")
        return self

    @classmethod
    def of(cls, value: Fraction | int) -> "RationalValue":
        value = Fraction(value)
        return cls(num=value.numerator, den=value.denominator)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)


class HKRecord(BaseModel):
    """HK(q) = dim S(C) / (x_0^q, ..., x_r^q), degree by degree."""

    q: int = Field(ge=2)
    e: int = Field(ge=1)
    hk: int
    per_degree: List[int]
    ratio: RationalValue = Field(description="hk / q^2.")
    deviation: Optional[RationalValue] = Field(
        default=None, description="|ratio - predicted multiplicity|."
    )
    oracle_hk: Optional[int] = Field(
        default=None, description="Exponent-counting value (rational normal curves only)."
    )

    @model_validator(mode="after")
    def _check_sum(self) -> "HKRecord":
        if self.hk != sum(self.per_degree):
            raise ValueError("hk must equal the sum of per_degree")
        return self


class HKEstimate(BaseModel):
    """HK records for q = p, p^2, ... with the predicted multiplicity."""

    kind: str
    r: int
    d: int
    prime: int
    records: List[HKRecord]
    e_hk_predicted: RationalValue
    ratios: List[RationalValue]
    fitted_constant: RationalValue = Field(description="max over e of |ratio - predicted| * q.")
    experimental: bool = Field(default=False, description="True for elliptic models.")
