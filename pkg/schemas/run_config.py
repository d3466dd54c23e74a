"""Pydantic schema for one validated command-line request."""

from __future__ import annotations

from typing import List, Literal, Optional

import sympy
from pydantic import BaseModel, Field, field_validator, model_validator

from config import DEFAULT_SEED, DEFAULT_TRIALS

Subcommand = Literal["betti", "mrc", "raynaud", "hk", "plan", "audit", "slope"]

_CURVE_COMMANDS = {"betti", "mrc", "raynaud", "hk"}
_GRD_COMMANDS = {"plan", "slope"}


class RunConfig(BaseModel):
    """Everything a subcommand needs, checked before any computation starts."""

    subcommand: Subcommand = Field(description="Which computation to run.")

    # Curve, either from a JSON file or inline
    curve_path: Optional[str] = Field(default=None, description="Path to a curve JSON file.")
    kind: Optional[Literal["rational_normal", "rational_general", "elliptic"]] = None
    r: Optional[int] = Field(default=None, ge=1)
    d: Optional[int] = Field(default=None, ge=1)
    g: Optional[int] = Field(default=None, ge=0, description="Genus for plan and slope.")

    prime: Optional[int] = Field(
        default=None, description="Characteristic override; the default depends on gamma."
    )
    seed: Optional[int] = Field(
        default=None, ge=0, description=f"Sampling seed; {DEFAULT_SEED} when omitted."
    )
    gamma: Optional[int] = Field(default=None, ge=1, description="Number of points.")
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    j_max: Optional[int] = Field(default=None, ge=2)
    e_max: int = Field(default=1, ge=1, description="Largest Frobenius exponent for hk.")
    r_max: int = Field(default=12, ge=4, description="Grid bound for audit.")
    characteristic: int = Field(default=0, ge=0, description="Characteristic for slope; 0 for none.")
    i: List[int] = Field(default_factory=list, description="Wedge indices for raynaud.")

    out: Optional[str] = Field(default=None, description="Output path; stdout when omitted.")
    format: Literal["json", "csv"] = "json"
    argv: List[str] = Field(default_factory=list, description="Echoed into provenance.")

    @field_validator("prime")
    @classmethod
    def _check_prime(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and not sympy.isprime(value):
            raise ValueError(f"{value} is not prime")
        return value

    @field_validator("characteristic")
    @classmethod
    def _check_characteristic(cls, value: int) -> int:
        if value != 0 and not sympy.isprime(value):
            raise ValueError(f"characteristic {value} is neither 0 nor prime")
        return value

    @model_validator(mode="after")
    def _check_required(self) -> "RunConfig":
        cmd = self.subcommand
        if cmd in _CURVE_COMMANDS:
            inline = (self.kind, self.r, self.d)
            if self.curve_path is None and None in inline:
                raise ValueError(f"{cmd} needs --curve or all of --kind, --r, --d")
            if self.curve_path is not None and any(v is not None for v in inline):
                raise ValueError("--curve cannot be combined with --kind, --r, --d")
        if cmd == "mrc" and self.gamma is None:
            raise ValueError("mrc needs --gamma")
        if cmd == "hk" and self.prime is None and self.curve_path is None:
            raise ValueError("hk needs --prime")
        if cmd in _GRD_COMMANDS and None in (self.g, self.r, self.d):
            raise ValueError(f"{cmd} needs --g, --r and --d")
        if self.format == "csv" and cmd != "betti":
            raise ValueError("csv output is only available for betti")
        return self

    @property
    def resolved_seed(self) -> int:
        return DEFAULT_SEED if self.seed is None else self.seed
