"""Deterministic router from RunConfig -> concrete service calls."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import sympy

from config import PRIME_FACTOR, PRIME_FLOOR, SYZLAB_VERSION
from schemas.betti import BettiTable
from schemas.curve import CurveSpec
from schemas.run_config import RunConfig
from services import charp, mrc, slopes
from services.curves import CurveModel, make_curve_from_spec, sample_points
from services.koszul import betti_table, curve_betti_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2
EXIT_USAGE = 64

_STATUS_EXIT = {
    "confirmed": EXIT_OK,
    "violated": EXIT_VIOLATED,
    "inconclusive": EXIT_ERROR,
}


class RoutingError(Exception):
    """Raised when a run configuration cannot be turned into a computation."""


@dataclass
class RunResult:
    """Result document of one subcommand with its exit code."""

    config: RunConfig
    document: Dict[str, Any]
    exit_code: int = EXIT_OK
    prime: Optional[int] = None
    seed: Optional[int] = None
    table: Optional[BettiTable] = field(default=None, repr=False)

    def provenance(self) -> Dict[str, Any]:
        return {
            "prime": self.prime,
            "seed": self.config.resolved_seed if self.seed is None else self.seed,
            "version": SYZLAB_VERSION,
            "subcommand": self.config.subcommand,
            "argv": list(self.config.argv),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {**self.document, "provenance": self.provenance()}


def default_prime(gamma: int) -> int:
    """Smallest prime above max(PRIME_FACTOR * gamma, PRIME_FLOOR)."""
    if gamma < 1:
        raise RoutingError(f"gamma must be >= 1, got {gamma}")
    return int(sympy.nextprime(max(PRIME_FACTOR * gamma, PRIME_FLOOR)))


def curve_spec(config: RunConfig) -> CurveSpec:
    """The curve request, from --curve with --prime/--seed overrides or from inline flags."""
    if config.curve_path is not None:
        try:
            text = Path(config.curve_path).read_text()
        except OSError as exc:
            raise RoutingError(f"Cannot read curve file {config.curve_path}: {exc}") from exc
        spec = CurveSpec.model_validate_json(text)
        updates: Dict[str, Any] = {}
        if config.prime is not None:
            updates["prime"] = config.prime
        if config.seed is not None:
            updates["seed"] = config.seed
        return spec.model_copy(update=updates) if updates else spec
    prime = config.prime if config.prime is not None else default_prime(config.gamma or 1)
    return CurveSpec(
        kind=config.kind,
        r=config.r,
        d=config.d,
        prime=prime,
        seed=config.resolved_seed,
    )


def _route_betti(config: RunConfig, model: CurveModel) -> RunResult:
    if config.gamma is None:
        table = curve_betti_table(model, config.j_max, model.seed)
    else:
        table = betti_table(sample_points(model, config.gamma, model.seed), config.j_max)
    return RunResult(
        config, table.model_dump(mode="json"), prime=model.p, seed=model.seed, table=table
    )


def _route_mrc(config: RunConfig, model: CurveModel) -> RunResult:
    seeds = [model.seed + k for k in range(config.trials)]
    verdict = mrc.verify_mrc(model, config.gamma, config.trials, seeds)
    return RunResult(
        config,
        verdict.model_dump(mode="json"),
        _STATUS_EXIT[verdict.status],
        prime=model.p,
        seed=model.seed,
    )


def _route_raynaud(config: RunConfig, model: CurveModel) -> RunResult:
    seeds = [model.seed + k for k in range(config.trials)]
    verdict = mrc.raynaud_check(model, config.i or None, config.trials, seeds)
    return RunResult(
        config,
        verdict.model_dump(mode="json"),
        _STATUS_EXIT[verdict.status],
        prime=model.p,
        seed=model.seed,
    )


def _route_hk(config: RunConfig, model: CurveModel) -> RunResult:
    estimate = charp.hk_estimate(model, config.e_max)
    return RunResult(config, estimate.model_dump(mode="json"), prime=model.p, seed=model.seed)


def route(config: RunConfig) -> RunResult:
    """Run the subcommand named in the config."""
    cmd = config.subcommand
    logger.debug("Routing %s", cmd)

    if cmd == "plan":
        document: Dict[str, Any] = {
            "degeneration": None,
            "ideal_generation": slopes.plan_weak_raynaud(config.g, config.r, config.d).model_dump(
                mode="json"
            ),
        }
        # the degeneration chain only exists in its own range
        if config.g >= 1 and config.d >= 2 * config.r:
            document["degeneration"] = slopes.plan_degeneration(
                config.g, config.r, config.d
            ).model_dump(mode="json")
        return RunResult(config, document)

    if cmd == "audit":
        audit = slopes.audit_inequalities(config.r_max)
        document = audit.model_dump(mode="json")
        document["clean"] = audit.clean
        return RunResult(config, document, EXIT_OK if audit.clean else EXIT_VIOLATED)

    if cmd == "slope":
        report = slopes.stability_report(config.g, config.r, config.d, config.characteristic)
        return RunResult(config, report.model_dump(mode="json"))

    model = make_curve_from_spec(curve_spec(config))
    if cmd == "betti":
        return _route_betti(config, model)
    if cmd == "mrc":
        return _route_mrc(config, model)
    if cmd == "raynaud":
        return _route_raynaud(config, model)
    if cmd == "hk":
        return _route_hk(config, model)

    raise RoutingError(f"Unsupported subcommand: {cmd}")
