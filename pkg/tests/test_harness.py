"""Tests for harness module."""

import pytest

from motbiv.errors import InvalidParameters
from motbiv.harness import (
    Budget,
    RunResult,
    SplitMix64,
    SuiteSummary,
    generate,
    run_blowup_suite,
    run_check,
    run_seeds,
    run_suite,
)
from motbiv.report import CheckReport, Status


class TestSplitMix64:
    """Tests for the seeded generator."""

    def test_known_first_output(self) -> None:
        assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF

    def test_same_seed_same_sequence(self) -> None:
        a, b = SplitMix64(42), SplitMix64(42)

        assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]

    def test_below_range(self) -> None:
        rng = SplitMix64(1)

        assert all(0 <= rng.below(7) < 7 for _ in range(50))

    def test_below_empty(self) -> None:
        with pytest.raises(InvalidParameters):
            SplitMix64(1).below(0)

    def test_coefficients_nonzero(self) -> None:
        rng = SplitMix64(3)

        assert all(rng.coefficient() in (-2, -1, 1, 2) for _ in range(20))


class TestBudget:
    """Tests for Budget validation."""

    def test_defaults(self) -> None:
        assert Budget() == Budget(3, 3, 3)

    @pytest.mark.parametrize("field", ["max_dim", "max_chain", "max_rank"])
    def test_out_of_range(self, field: str) -> None:
        with pytest.raises(InvalidParameters):
            Budget(**{field: 4})

    def test_negative(self) -> None:
        with pytest.raises(InvalidParameters):
            Budget(max_dim=-1)


class TestGenerate:
    """Tests for scenario generation."""

    def test_deterministic(self) -> None:
        assert generate(7).describe() == generate(7).describe()

    def test_seeds_differ(self) -> None:
        described = {str(generate(seed).describe()["elements"]) for seed in range(6)}

        assert len(described) > 1

    def test_zero_budget_gives_point_scenario(self) -> None:
        scenario = generate(3, Budget.zero())

        assert [x.key for x in scenario.spaces] == ["pt"]
        assert run_suite(scenario).ok

    def test_dimension_cap(self) -> None:
        scenario = generate(11, Budget(max_dim=2))

        assert scenario.spaces[1].key == "P(1)"

    @pytest.mark.parametrize("max_dim", [1, 2, 3])
    @pytest.mark.parametrize("seed", range(8))
    def test_every_space_within_cap(self, seed: int, max_dim: int) -> None:
        budget = Budget(max_dim=max_dim)
        scenario = generate(seed, budget, kinds=("axioms", "rr"))

        assert max(s.dim for s in scenario.spaces) <= budget.max_dim

    def test_no_room_for_product_gives_point_scenario(self) -> None:
        scenario = generate(11, Budget(max_dim=1))

        assert [x.key for x in scenario.spaces] == ["pt"]

    def test_rr_kind_adds_rr_checks(self) -> None:
        codes = {spec.code for spec in generate(2, kinds=("rr",)).script}

        assert {"verdier-rr", "sga6-rr", "module-property", "module-property-class"} <= codes
        assert "B-1" not in codes


class TestRunSuite:
    """Tests for running generated scenarios."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_axioms_pass(self, seed: int) -> None:
        summary = run_suite(generate(seed, Budget(max_dim=2)))

        assert summary.ok, [r.render() for r in summary.failures]
        assert summary.executed > 0

    def test_rr_pass(self) -> None:
        summary = run_suite(generate(4, Budget(max_dim=2), kinds=("rr",)))

        assert summary.ok, [r.render() for r in summary.failures]

    def test_run_seeds_sorted(self) -> None:
        result = run_seeds([2, 0, 1], Budget(max_dim=1))

        assert [s.seed for s in result.summaries] == [0, 1, 2]
        assert result.ok


class TestSeedZero:
    """The documented seed-0 scenario under the default budget."""

    def test_contents(self) -> None:
        described = generate(0).describe()

        assert described["spaces"] == ["pt", "P(2)", "prod(P(1),P(2))", "P(1)"]
        assert len(described["morphisms"]) == 14
        assert len(described["elements"]) == 6
        assert len(described["script"]) == 31
        assert described["morphisms"][6] == "pt -PointInclusion-> P(2)"
        assert described["morphisms"][12] == "pt -PointInclusion-> P(1)"

    def test_executed_count(self) -> None:
        summary = run_suite(generate(0))

        assert summary.ok, [r.render() for r in summary.failures]
        assert summary.unsupported == 0
        assert summary.executed == 53


class TestBlowupSuite:
    """Tests for the blow-up suite."""

    @pytest.mark.parametrize(("n", "m"), [(2, 0), (3, 1)])
    def test_passes(self, n: int, m: int) -> None:
        summary = run_blowup_suite(n, m)

        assert summary.ok, [r.render() for r in summary.failures]
        assert summary.coverage["k0-witness"] == 2

    def test_corrupted_fails(self) -> None:
        summary = run_blowup_suite(2, 0, corrupt=True)

        assert not summary.ok
        assert any(r.check.startswith("vanishing:") for r in summary.failures)


class TestSummaries:
    """Tests for SuiteSummary and RunResult."""

    def test_informational_failures_are_observations(self) -> None:
        reports = [
            CheckReport("B-1", {}, "a", "a", Status.PASS),
            CheckReport("commutativity", {}, "a", "b", Status.FAIL, informational=True),
            CheckReport("B-3", {}, "", "", Status.UNSUPPORTED),
        ]

        summary = SuiteSummary.from_reports(9, reports)

        assert (summary.executed, summary.passed, summary.failed, summary.unsupported) == (1, 1, 0, 1)
        assert len(summary.observations) == 1
        assert summary.coverage["B-3"] == 0

    def test_coverage_warning(self) -> None:
        result = RunResult([SuiteSummary(0)])

        warning = result.coverage_warning()

        assert warning is not None
        assert "B-1" in warning

    def test_no_warning_without_scenarios(self) -> None:
        assert RunResult([]).coverage_warning() is None

    def test_to_dict_totals(self) -> None:
        result = RunResult([SuiteSummary(0, executed=2, passed=2)], [SuiteSummary(0, executed=3, failed=1)])

        payload = result.to_dict()

        assert payload["scenarios"] == 1
        assert payload["executed"] == 5
        assert payload["failed"] == 1
        assert not result.ok


class TestRunCheck:
    """Tests for run_check."""

    def test_blowup(self) -> None:
        result = run_check("blowup", n=3, m=0)

        assert result.ok
        assert result.summaries == []
        assert len(result.extra) == 1

    def test_unknown_kind(self) -> None:
        with pytest.raises(InvalidParameters):
            run_check("everything")

    def test_negative_cases(self) -> None:
        with pytest.raises(InvalidParameters):
            run_check("axioms", cases=-1)

    def test_zero_cases(self) -> None:
        result = run_check("axioms", cases=0)

        assert result.summaries == []
        assert result.to_dict()["executed"] == 0
