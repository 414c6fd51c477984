import numpy as np
import pandas as pd
import pytest

from sonder.errors import (
    DegenerateDistribution,
    EmptyArm,
    InvalidInput,
    InvalidResponse,
)
from sonder.experiment import (
    ARM_CONTROL,
    ARM_TREATMENT,
    ArmAssigner,
    ClickEvent,
    Participant,
    SurveyResponse,
    assign_arm,
    balance_table,
    compute_o2,
    estimate_effect,
    find_balanced_seed,
    load_scale,
    score_survey,
    standardize,
)

AOT17 = load_scale("aot17")


class TestAssignment:
    def test_idempotent(self):
        assigner = ArmAssigner(seed=7)
        first = assigner.assign("p-1")
        assert assigner.assign("p-1") == first

    def test_deterministic_across_instances(self):
        ids = [f"p-{i}" for i in range(200)]
        a = [ArmAssigner(seed=3).assign(pid) for pid in ids]
        b = [assign_arm(pid, 3) for pid in ids]
        assert a == b

    def test_share_near_half(self):
        ids = [f"p-{i}" for i in range(10_000)]
        share = sum(assign_arm(pid, 0) == ARM_TREATMENT
                    for pid in ids) / len(ids)
        assert 0.48 <= share <= 0.52

    def test_find_balanced_seed(self):
        ids = [f"p-{i}" for i in range(100)]
        seed = find_balanced_seed(ids, 50)
        assert sum(assign_arm(pid, seed) == ARM_TREATMENT for pid in ids) == 50


class TestScaleDefinition:
    def test_aot17_structure(self):
        counts = {}
        for item in AOT17.items:
            counts[item.dimension] = counts.get(item.dimension, 0) + 1
        assert counts == {
            "fact_resistance": 5, "dogmatism": 6,
            "liberalism": 3, "belief_personification": 3,
        }
        assert len(AOT17.items) == 17

    def test_reverse_flags(self):
        flags = [item.reverse_coded for item in AOT17.items]
        # fact resistance: 3 reversed then 2 forward; dogmatism: all 6
        # reversed; liberalism: none; belief personification: all 3
        assert flags == ([True] * 3 + [False] * 2 + [True] * 6
                         + [False] * 3 + [True] * 3)


class TestScoring:
    def _resp(self, answers):
        return SurveyResponse("p", "aot17", tuple(answers))

    def test_all_zero(self):
        scores = score_survey(self._resp([0] * 17), AOT17)
        assert scores["overall"] == 0.0
        assert all(v == 0.0 for v in scores["by_dimension"].values())

    def test_reverse_coded_contribution(self):
        answers = [0] * 17
        answers[0] = 3  # first fact-resistance item is reverse coded
        scores = score_survey(self._resp(answers), AOT17)
        assert scores["by_dimension"]["fact_resistance"] == pytest.approx(-3 / 5)

    def test_all_plus_three(self):
        scores = score_survey(self._resp([3] * 17), AOT17)
        assert scores["by_dimension"]["fact_resistance"] == pytest.approx(-0.6)
        assert scores["by_dimension"]["dogmatism"] == -3.0
        assert scores["by_dimension"]["liberalism"] == 3.0
        assert scores["by_dimension"]["belief_personification"] == -3.0
        assert -3.0 <= scores["overall"] <= 3.0

    def test_reverse_involution_on_all_reversed_dimension(self):
        base = [0] * 17
        flipped = [0] * 17
        for i, item in enumerate(AOT17.items):
            if item.dimension == "dogmatism":
                base[i] = 2
                flipped[i] = -2
        s1 = score_survey(self._resp(base), AOT17)
        s2 = score_survey(self._resp(flipped), AOT17)
        assert s1["by_dimension"]["dogmatism"] == -s2["by_dimension"]["dogmatism"]

    def test_invalid_responses(self):
        with pytest.raises(InvalidResponse):
            score_survey(self._resp([0] * 16), AOT17)
        with pytest.raises(InvalidResponse):
            score_survey(self._resp([4] + [0] * 16), AOT17)

    def test_overall_in_range_random(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            answers = [int(a) for a in rng.integers(-3, 4, size=17)]
            scores = score_survey(self._resp(answers), AOT17)
            assert -3.0 <= scores["overall"] <= 3.0
            for v in scores["by_dimension"].values():
                assert -3.0 <= v <= 3.0


class TestStandardize:
    def test_basic(self):
        z = standardize([1.0, 2.0, 3.0])
        assert z.mean() == pytest.approx(0.0, abs=1e-12)
        assert z.std(ddof=1) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateDistribution):
            standardize([5.0, 5.0, 5.0])
        with pytest.raises(DegenerateDistribution):
            standardize([5.0])

    def test_affine_invariance(self):
        rng = np.random.default_rng(2)
        values = rng.normal(size=40)
        assert standardize(3.5 * values - 7.0) == pytest.approx(
            list(standardize(values)), abs=1e-10
        )


def make_participant(pid, arm, value=0.5):
    covs = {name: value for name in
            ("white", "female", "age", "college", "income_60k",
             "urban", "democrat")}
    return Participant(id=pid, covariates=covs, arm=arm, aot7_pre=value)


class TestBalance:
    def test_identical_groups(self):
        parts = [make_participant(f"t{i}", ARM_TREATMENT) for i in range(5)]
        parts += [make_participant(f"c{i}", ARM_CONTROL) for i in range(5)]
        # give within-group variance so SEs are finite
        parts[0].covariates["age"] = 0.6
        parts[5].covariates["age"] = 0.6
        for row in balance_table(parts):
            assert row["diff"] == pytest.approx(0.0, abs=1e-12)

    def test_known_two_point_se(self):
        t = [make_participant("t1", ARM_TREATMENT, 0.0),
             make_participant("t2", ARM_TREATMENT, 1.0)]
        c = [make_participant("c1", ARM_CONTROL, 0.0),
             make_participant("c2", ARM_CONTROL, 2.0)]
        rows = balance_table(t + c)
        age = next(r for r in rows if r["covariate"] == "age")
        # s_t^2 = 0.5, s_c^2 = 2 -> se = sqrt(0.5/2 + 2/2)
        assert age["se"] == pytest.approx(np.sqrt(0.25 + 1.0), abs=1e-12)
        assert age["diff"] == pytest.approx(0.5 - 1.0)

    def test_empty_arm(self):
        with pytest.raises(EmptyArm):
            balance_table([make_participant("t", ARM_TREATMENT)])


class TestO2:
    def _click(self, rank, completeness=0.5):
        return ClickEvent("p", "topic", "q", rank, completeness)

    def test_basic(self):
        max_rank, n, mean_c = compute_o2(
            [self._click(1, 0.2), self._click(3, 0.4), self._click(7, 0.6)]
        )
        assert (max_rank, n) == (7, 3)
        assert mean_c == pytest.approx(0.4)

    def test_no_clicks(self):
        assert compute_o2([]) == (0, 0, None)

    def test_order_invariant(self):
        clicks = [self._click(r, r / 10) for r in (5, 1, 9, 2)]
        assert compute_o2(clicks) == compute_o2(list(reversed(clicks)))

    def test_rank_validation(self):
        with pytest.raises(InvalidInput):
            self._click(0)


class TestEstimateEffect:
    def test_null_effect(self):
        values = [1.0, 2.0, 3.0, 4.0] * 10
        outcomes = [v for v in values for _ in range(2)]
        arms = [ARM_TREATMENT, ARM_CONTROL] * len(values)
        fit = estimate_effect(outcomes, arms)
        assert fit.coef("treatment") == pytest.approx(0.0, abs=1e-8)

    def test_planted_shift(self):
        rng = np.random.default_rng(15)
        n = 1000
        arms = [ARM_TREATMENT if rng.random() < 0.5 else ARM_CONTROL
                for _ in range(n)]
        outcomes = [rng.normal(0.5 if a == ARM_TREATMENT else 0.0, 1.0)
                    for a in arms]
        fit = estimate_effect(outcomes, arms)
        assert abs(fit.coef("treatment") - 0.5) < 3 * fit.se("treatment")

    def test_orthogonal_covariate_barely_moves_beta(self):
        rng = np.random.default_rng(16)
        n = 4000
        arms = [ARM_TREATMENT if rng.random() < 0.5 else ARM_CONTROL
                for _ in range(n)]
        outcomes = [rng.normal(0.5 if a == ARM_TREATMENT else 0.0, 1.0)
                    for a in arms]
        plain = estimate_effect(outcomes, arms)
        covs = pd.DataFrame({"noise": rng.normal(size=n)})
        controlled = estimate_effect(outcomes, arms, covariates=covs)
        assert abs(plain.coef("treatment")
                   - controlled.coef("treatment")) < 0.01

    def test_missing_outcomes_dropped(self):
        outcomes = [1.0, None, 2.0, 3.0, None, 4.0]
        arms = [ARM_TREATMENT, ARM_TREATMENT, ARM_CONTROL,
                ARM_TREATMENT, ARM_CONTROL, ARM_CONTROL]
        fit = estimate_effect(outcomes, arms)
        assert fit.n_obs == 4
