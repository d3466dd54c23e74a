"""Unit tests for the pydantic schemas."""

from __future__ import annotations

from fractions import Fraction

import pytest
from pydantic import ValidationError

from schemas.betti import BettiMeta, BettiRow, BettiTable
from schemas.curve import CurveSpec
from schemas.hk import HKRecord, RationalValue
from schemas.plan import DecompositionType, DegenerationPlan, Summand
from schemas.run_config import RunConfig
from schemas.verdict import EntryDiff, TrialRecord, Verdict


class TestBettiTable:
    """Shape checks and accessors."""

    def _table(self, rows: dict) -> BettiTable:
        return BettiTable.from_rows(2, BettiMeta(g=0, d=2, gamma=3), rows)

    def test_accessors(self) -> None:
        table = self._table({0: [1, 0, 0, 0], 1: [0, 2, 1, 0]})
        assert table.j_max == 1
        assert table.entry(1, 1) == 2
        assert table.entry(5, 1) == 0
        assert table.row(4) == [0, 0, 0, 0]
        assert table.last_nonzero_row() == 1

    def test_csv(self) -> None:
        table = self._table({0: [1, 0, 0, 0], 1: [0, 2, 1, 0]})
        assert table.to_csv() == "j,0,1,2,3\n0,1,0,0,0\n1,0,2,1,0\n"

    @pytest.mark.parametrize(
        "rows",
        [
            {0: [1, 0, 0]},
            {0: [2, 0, 0, 0]},
            {0: [1, 0, 0, 0], 1: [1, 2, 1, 0]},
            {0: [1, 0, 0, 0], 1: [0, -1, 0, 0]},
        ],
    )
    def test_rejects_bad_rows(self, rows: dict) -> None:
        with pytest.raises(ValidationError):
            self._table(rows)

    def test_rejects_unsorted_rows(self) -> None:
        with pytest.raises(ValidationError):
            BettiTable(
                r=2,
                meta=BettiMeta(g=0, d=2),
                rows=[BettiRow(j=1, b=[0, 1, 0, 0]), BettiRow(j=0, b=[1, 0, 0, 0])],
            )

    def test_json_round_trip(self) -> None:
        table = self._table({0: [1, 0, 0, 0], 1: [0, 2, 1, 0]})
        assert BettiTable.model_validate_json(table.model_dump_json()) == table


class TestRationalValue:
    def test_of(self) -> None:
        assert RationalValue.of(Fraction(6, 4)) == RationalValue(num=3, den=2)
        assert RationalValue.of(-2).to_fraction() == -2

    def test_rejects_unreduced(self) -> None:
        with pytest.raises(ValidationError):
            RationalValue(num=2, den=4)
        with pytest.raises(ValidationError):
            RationalValue(num=1, den=0)

    def test_hk_record_sum(self) -> None:
        with pytest.raises(ValidationError):
            HKRecord(q=2, e=1, hk=9, per_degree=[1, 4, 3, 0], ratio=RationalValue.of(2))


class TestPlanSchemas:
    """DegenerationPlan and DecompositionType validate themselves."""

    def _plan(self, **overrides: object) -> dict:
        plan = {
            "target": {"g": 10, "r": 3, "d": 12},
            "steps": [
                {"d": 12, "g": 10, "eps": 4, "rho": 6},
                {"d": 9, "g": 6, "eps": 4, "rho": 6},
            ],
            "base": {"kind": "rational_normal", "d": 6, "attach": 2, "rho": 6},
        }
        plan.update(overrides)
        return plan

    def test_valid_plan(self) -> None:
        assert DegenerationPlan.model_validate(self._plan()).base.attach == 2

    def test_step_must_continue_the_chain(self) -> None:
        bad = self._plan(
            steps=[
                {"d": 12, "g": 10, "eps": 4, "rho": 6},
                {"d": 9, "g": 7, "eps": 4, "rho": 6},
            ]
        )
        with pytest.raises(ValidationError):
            DegenerationPlan.model_validate(bad)

    def test_eps_bound(self) -> None:
        bad = self._plan(
            target={"g": 10, "r": 3, "d": 12},
            steps=[{"d": 12, "g": 10, "eps": 5, "rho": 6}],
            base={"kind": "elliptic", "d": 9, "attach": 5, "elliptic_degree": 6, "rho": 5},
        )
        with pytest.raises(ValidationError):
            DegenerationPlan.model_validate(bad)

    def test_wrong_rho(self) -> None:
        bad = self._plan(base={"kind": "rational_normal", "d": 6, "attach": 2, "rho": 5})
        with pytest.raises(ValidationError):
            DegenerationPlan.model_validate(bad)

    def test_elliptic_base_window(self) -> None:
        bad = self._plan(
            target={"g": 2, "r": 3, "d": 6},
            steps=[],
            base={"kind": "elliptic", "d": 6, "attach": 2, "elliptic_degree": 3, "rho": 6},
        )
        with pytest.raises(ValidationError):
            DegenerationPlan.model_validate(bad)

    def test_unbalanced_p1_type(self) -> None:
        with pytest.raises(ValidationError):
            DecompositionType(
                curve="p1",
                rank=2,
                degree=4,
                summands=[Summand(twist=1, multiplicity=1), Summand(twist=3, multiplicity=1)],
            )

    def test_elliptic_type_needs_factors(self) -> None:
        with pytest.raises(ValidationError):
            DecompositionType(curve="elliptic", rank=4, degree=30)


class TestVerdict:
    def test_confirmed_needs_a_match(self) -> None:
        with pytest.raises(ValidationError):
            Verdict(
                check="mrc",
                status="confirmed",
                trials=[TrialRecord(seed=1, prime=101, match=False)],
            )

    def test_violated_excludes_matches(self) -> None:
        with pytest.raises(ValidationError):
            Verdict(
                check="mrc",
                status="violated",
                trials=[TrialRecord(seed=1, prime=101, match=True)],
            )

    def test_excess(self) -> None:
        assert EntryDiff(i=1, j=2, predicted=3, computed=4).excess
        assert not EntryDiff(i=1, j=2, predicted=3, computed=2).excess


class TestCurveSpec:
    def test_defaults(self) -> None:
        spec = CurveSpec(kind="rational_general", r=3, d=5, prime=101)
        assert spec.seed == 1
        assert spec.weierstrass is None

    @pytest.mark.parametrize(
        "payload",
        [
            {"kind": "rational_normal", "r": 3, "d": 4, "prime": 101},
            {"kind": "rational_general", "r": 4, "d": 3, "prime": 101},
            {
                "kind": "rational_general",
                "r": 3,
                "d": 5,
                "prime": 101,
                "weierstrass": {"a": 1, "b": 1},
            },
            {"kind": "conic", "r": 2, "d": 2, "prime": 101},
            {"kind": "elliptic", "r": 3, "d": 4, "prime": 101, "seed": -1},
        ],
    )
    def test_rejects(self, payload: dict) -> None:
        with pytest.raises(ValidationError):
            CurveSpec(**payload)


class TestRunConfig:
    """Cross-field requirements of a command line."""

    def test_inline_betti(self) -> None:
        config = RunConfig(subcommand="betti", kind="rational_normal", r=3, d=3, gamma=7)
        assert config.resolved_seed == 1
        assert config.trials == 3

    @pytest.mark.parametrize(
        "payload",
        [
            {"subcommand": "betti", "kind": "rational_normal", "r": 3},
            {"subcommand": "betti", "curve_path": "c.json", "kind": "elliptic", "r": 3, "d": 4},
            {"subcommand": "mrc", "kind": "rational_normal", "r": 3, "d": 3},
            {"subcommand": "hk", "kind": "rational_normal", "r": 3, "d": 3},
            {"subcommand": "plan", "g": 1, "r": 3},
            {"subcommand": "slope", "g": 1, "r": 3, "d": 6, "format": "csv"},
            {"subcommand": "betti", "kind": "rational_normal", "r": 3, "d": 3, "prime": 100},
            {"subcommand": "slope", "g": 1, "r": 3, "d": 6, "characteristic": 4},
            {"subcommand": "audit", "r_max": 3},
            {"subcommand": "betti", "kind": "rational_normal", "r": 3, "d": 3, "j_max": 1},
            {"subcommand": "search"},
        ],
    )
    def test_rejects(self, payload: dict) -> None:
        with pytest.raises(ValidationError):
            RunConfig(**payload)

    def test_hk_from_file_needs_no_prime(self) -> None:
        assert RunConfig(subcommand="hk", curve_path="c.json").prime is None

    def test_slope_characteristic(self) -> None:
        assert RunConfig(subcommand="slope", g=2, r=3, d=7, characteristic=3).characteristic == 3
