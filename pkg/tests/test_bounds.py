import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pollsets import (
    AllocationConstraint,
    CoalitionSpec,
    Interval,
    Majority,
    PartyRegistry,
    PartySet,
    Respondent,
    Survey,
    coalition_report,
    constrained_bounds,
    conventional_forecast,
    dempster_bounds,
    effective_allocation_limits,
    event_bounds,
    majority_classification,
)
from conftest import random_event, random_survey


class TestDempster:
    def test_worked_fixture(self, abc_survey):
        f = dempster_bounds(abc_survey)
        assert (f["A"].lower, f["A"].upper) == (0.4, 0.6)
        assert (f["B"].lower, f["B"].upper) == (0.2, 0.4)
        assert (f["C"].lower, f["C"].upper) == (0.2, 0.2)

    def test_all_decided_degenerate(self, abc_registry):
        reg = abc_registry
        s = Survey(reg, (), (Respondent(2.0, reg.singleton("A")), Respondent(1.0, reg.singleton("B"))))
        f = dempster_bounds(s)
        conv = conventional_forecast(s)
        for code in reg.options:
            assert f[code].lower == f[code].upper == conv[code]

    def test_full_ambiguity(self, abc_registry):
        s = Survey(abc_registry, (), (Respondent(1.0, abc_registry.full_set()),))
        f = dempster_bounds(s)
        for code in abc_registry.options:
            assert (f[code].lower, f[code].upper) == (0.0, 1.0)

    def test_empty_survey_errors(self, abc_registry):
        with pytest.raises(ValueError):
            dempster_bounds(Survey(abc_registry, (), ()))


class TestEventBounds:
    def test_event_ab_dissolves_ambiguity(self, abc_survey, abc_registry):
        iv = event_bounds(abc_survey, abc_registry.set_of(["A", "B"]))
        assert (iv.lower, iv.upper) == (0.8, 0.8)

    def test_constrained_singleton(self, abc_survey, abc_registry):
        iv = event_bounds(abc_survey, abc_registry.singleton("A"), AllocationConstraint(0.2, 0.8))
        assert abs(iv.lower - 0.44) < 1e-12
        assert abs(iv.upper - 0.56) < 1e-12

    def test_full_registry_event(self, abc_survey, abc_registry):
        iv = event_bounds(abc_survey, abc_registry.full_set())
        assert (iv.lower, iv.upper) == (1.0, 1.0)


class TestEffectiveLimits:
    def test_pair_keeps_raw_box(self):
        assert effective_allocation_limits(2, AllocationConstraint(0.2, 0.8)) == (0.2, 0.8)

    def test_singleton_votes_itself(self):
        assert effective_allocation_limits(1, AllocationConstraint(0.3, 0.4)) == (1.0, 1.0)

    def test_five_way_fully_forced(self):
        assert effective_allocation_limits(5, AllocationConstraint(0.2, 0.8)) == (0.2, 0.2)

    @given(st.integers(1, 8), st.floats(0, 1), st.floats(0, 1))
    def test_box_always_reaches_simplex(self, k, a, b):
        alpha, beta = min(a, b), max(a, b)
        alpha_eff, beta_eff = effective_allocation_limits(k, AllocationConstraint(alpha, beta))
        assert alpha_eff <= 1.0 / k + 1e-12
        assert beta_eff >= 1.0 / k - 1e-12
        assert k * alpha_eff <= 1.0 + 1e-12


class TestConstrainedBounds:
    def test_worked_fixture(self, abc_survey):
        f = constrained_bounds(abc_survey, AllocationConstraint(0.2, 0.8))
        assert abs(f["A"].lower - 0.44) < 1e-12 and abs(f["A"].upper - 0.56) < 1e-12
        assert abs(f["B"].lower - 0.24) < 1e-12 and abs(f["B"].upper - 0.36) < 1e-12
        assert (f["C"].lower, f["C"].upper) == (0.2, 0.2)

    def test_vacuous_constraint_is_dempster_exactly(self, abc_survey):
        loose = constrained_bounds(abc_survey, AllocationConstraint(0.0, 1.0))
        demp = dempster_bounds(abc_survey)
        for code in abc_survey.registry.options:
            assert (loose[code].lower, loose[code].upper) == (demp[code].lower, demp[code].upper)

    def test_all_decided_any_constraint(self, abc_registry):
        reg = abc_registry
        s = Survey(reg, (), (Respondent(1.5, reg.singleton("A")), Respondent(0.5, reg.singleton("C"))))
        f = constrained_bounds(s, AllocationConstraint(0.3, 0.6))
        conv = conventional_forecast(s)
        for code in reg.options:
            assert f[code].lower == f[code].upper == conv[code]


class TestMajority:
    @pytest.mark.parametrize(
        "interval,expected",
        [
            (Interval(0.52, 0.60), Majority.GUARANTEED),
            (Interval(0.45, 0.55), Majority.POSSIBLE),
            (Interval(0.50, 0.50), Majority.EXCLUDED),
        ],
    )
    def test_classification(self, interval, expected):
        assert majority_classification(interval) is expected

    def test_threshold_parameter(self):
        assert majority_classification(Interval(0.35, 0.45), threshold=0.3) is Majority.GUARANTEED


class TestCoalitionReport:
    def test_worked_fixture(self, abc_survey, abc_registry):
        reg = abc_registry
        specs = [
            CoalitionSpec("AB", reg.set_of(["A", "B"])),
            CoalitionSpec("C_ALONE", reg.singleton("C")),
            CoalitionSpec("ALL", reg.full_set()),
        ]
        report = coalition_report(abc_survey, specs)
        assert [name for name, _, _ in report] == ["AB", "C_ALONE", "ALL"]
        assert report[0][1].lower == 0.8 and report[0][2] is Majority.GUARANTEED
        assert report[1][1].upper == 0.2 and report[1][2] is Majority.EXCLUDED
        assert report[2][1].lower == 1.0 and report[2][2] is Majority.GUARANTEED


class TestProperties:
    def test_duality_and_sums(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            s = random_survey(rng, max_n=14, max_undecided=6)
            full = s.registry.full_set().mask
            event = random_event(rng, s)
            if event.mask != full:
                complement = PartySet(full & ~event.mask)
                assert abs(event_bounds(s, event).upper - (1.0 - event_bounds(s, complement).lower)) <= 1e-12
            f = dempster_bounds(s)
            lowers = math.fsum(iv.lower for iv in f.intervals.values())
            uppers = math.fsum(iv.upper for iv in f.intervals.values())
            assert lowers <= 1.0 + 1e-12 <= uppers + 2e-12

    def test_constrained_nested_in_dempster(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            s = random_survey(rng, max_n=14, max_undecided=6)
            alpha = float(rng.uniform(0, 0.5))
            beta = float(rng.uniform(alpha, 1))
            narrow = constrained_bounds(s, AllocationConstraint(alpha, beta))
            wide = dempster_bounds(s)
            for code in s.registry.options:
                assert narrow[code].lower >= wide[code].lower - 1e-12
                assert narrow[code].upper <= wide[code].upper + 1e-12

    def test_singleton_event_equals_dempster(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            s = random_survey(rng, max_n=12, max_undecided=5)
            f = dempster_bounds(s)
            for code in s.registry.options:
                iv = event_bounds(s, s.registry.singleton(code))
                assert (iv.lower, iv.upper) == (f[code].lower, f[code].upper)

    def test_every_completion_lies_inside(self):
        rng = np.random.default_rng(17)
        for _ in range(15):
            s = random_survey(rng, max_n=10, max_undecided=5, completion_limit=200)
            f = dempster_bounds(s)
            undecided = [r for r in s.respondents if not r.decided]
            for combo in itertools.product(*(r.set.indices() for r in undecided)):
                chosen = dict(zip((id(r) for r in undecided), combo))
                for i_opt, code in enumerate(s.registry.options):
                    share = math.fsum(
                        r.weight
                        for r in s.respondents
                        if (chosen[id(r)] if not r.decided else r.set.indices()[0]) == i_opt
                    ) / s.total_weight
                    assert f[code].contains(share, slack=1e-15)

    def test_allocation_mixtures_lie_inside(self):
        # Random feasible within-set allocations (convex mixtures of the
        # uniform point and a box extreme) must stay inside the intervals.
        rng = np.random.default_rng(19)
        for _ in range(15):
            s = random_survey(rng, max_n=10, max_undecided=5)
            alpha = float(rng.choice([0.0, 0.1, 0.2]))
            beta = float(rng.choice([0.7, 0.8, 1.0]))
            c = AllocationConstraint(alpha, beta)
            f = constrained_bounds(s, c)
            for code in s.registry.options:
                idx = s.registry.index(code)
                total = 0.0
                for r in s.respondents:
                    k = r.set.size
                    if not r.set.contains_index(idx):
                        continue
                    if k == 1:
                        total += r.weight
                        continue
                    a_eff, b_eff = effective_allocation_limits(k, c)
                    t = float(rng.random())
                    extreme = min(b_eff, 1.0 - (k - 1) * a_eff)
                    share = (1 - t) / k + t * extreme
                    total += r.weight * share
                value = total / s.total_weight
                assert f[code].lower - 1e-9 <= value <= f[code].upper + 1e-9


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(0.6, 0.4)
    with pytest.raises(ValueError):
        Interval(-0.1, 0.5)


def test_event_must_fit_registry(abc_survey):
    with pytest.raises(ValueError):
        event_bounds(abc_survey, PartySet(1 << 10))
