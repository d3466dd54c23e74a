"""Pydantic schema for curve description files consumed by the CLI."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class WeierstrassSpec(BaseModel):
    """Coefficients of y^2 = x^3 + a x + b."""

    a: int = Field(description="Linear coefficient a.")
    b: int = Field(description="Constant coefficient b.")


class CurveSpec(BaseModel):
    """A curve model request: kind, embedding and field."""

    kind: Literal["rational_normal", "rational_general", "elliptic"] = Field(
        description="Model family."
    )
    r: int = Field(ge=1, description="Dimension of the ambient projective space.")
    d: int = Field(ge=1, description="Degree of the embedding line bundle.")
    prime: int = Field(ge=2, description="Characteristic of the base field F_p.")
    seed: int = Field(default=1, ge=0, description="Seed for all random choices.")
    weierstrass: Optional[WeierstrassSpec] = Field(
        default=None,
        description="Fixed Weierstrass pair (elliptic only); omitted means drawn from the seed.",
    )

    @model_validator(mode="after")
    def _check_shape(self) -> "CurveSpec":
        if self.d < self.r:
            raise ValueError(f"degree d={self.d} must be at least r={self.r}")
        if self.kind == "rational_normal" and self.d != self.r:
            raise ValueError("rational_normal requires d == r")
        if self.weierstrass is not None and self.kind != "elliptic":
            raise ValueError("weierstrass coefficients only apply to elliptic curves")
        return self
