import math

import numpy as np
import pytest
from scipy.special import ndtri

import oracles
from impulsekit.errors import (
    EmptyInput,
    InsufficientN,
    ShapeMismatch,
    SingularDesign,
    UnbalancedDesign,
    WeightsNotCentered,
)
from impulsekit.stats import (
    CONTRAST_PRESETS,
    ConditionMatrix,
    parallel_moderation,
    rank_inverse_normal,
    rm_anova_two_factor,
    within_subject_contrast,
    within_subject_sem,
)


def matrix(values):
    values = np.asarray(values, dtype=float)
    n, k = values.shape
    return ConditionMatrix(subjects=[f"s{i}" for i in range(n)],
                           conditions=[f"c{j}" for j in range(k)],
                           values=values)


class TestRankInverseNormal:
    def test_median_maps_to_zero(self):
        out = rank_inverse_normal([3.0, 1.0, 2.0])
        assert out[2] == pytest.approx(0.0, abs=1e-12)

    def test_extremes_blom(self):
        out = rank_inverse_normal([3.0, 1.0, 2.0])
        expected = ndtri(2.625 / 3.25)
        assert out[0] == pytest.approx(expected, abs=1e-4)
        assert out[1] == pytest.approx(-expected, abs=1e-4)
        assert abs(expected - 0.8694) < 1e-3

    def test_mean_near_zero_and_order_preserved(self, rng):
        for _ in range(30):
            vals = rng.normal(size=int(rng.integers(5, 200)))
            out = rank_inverse_normal(vals)
            assert abs(out.mean()) < 1e-8
            assert np.array_equal(np.argsort(vals), np.argsort(out))

    def test_ties_share_average_rank_score(self):
        out = rank_inverse_normal([5.0, 1.0, 5.0, 2.0])
        assert out[0] == out[2]

    def test_invariant_under_monotone_transform(self, rng):
        vals = rng.normal(size=50)
        out = rank_inverse_normal(vals)
        out2 = rank_inverse_normal(np.exp(3 * vals) + 7)
        assert np.allclose(out, out2)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            rank_inverse_normal([])
        with pytest.raises(EmptyInput):
            rank_inverse_normal([1.0])


class TestWithinSubjectContrast:
    def test_constant_subjects_give_zero(self):
        data = matrix(np.tile(np.arange(6.0)[:, None], (1, 3)))
        res = within_subject_contrast(data, [1.0, -2.0, 1.0])
        assert res.estimate == pytest.approx(0.0, abs=1e-12)
        assert res.t == pytest.approx(0.0, abs=1e-9)

    def test_df_structure_n61(self, rng):
        data = matrix(rng.normal(size=(61, 3)))
        res = within_subject_contrast(data, CONTRAST_PRESETS["l_shape_negative"])
        assert res.df == 120
        assert res.subject_scores_df == 60

    def test_matches_partition_oracle(self, rng):
        for _ in range(30):
            vals = rng.normal(size=(8, 3))
            w = [1.0, -2.0, 1.0]
            res = within_subject_contrast(matrix(vals), w)
            est, se, t, df, ms = oracles.contrast_loop(vals.tolist(), w)
            assert res.estimate == pytest.approx(est, rel=1e-10, abs=1e-12)
            assert res.ms_error == pytest.approx(ms, rel=1e-10)
            assert res.t == pytest.approx(t, rel=1e-10)
            assert res.df == df

    def test_subject_offset_invariance(self, rng):
        vals = rng.normal(size=(12, 3))
        offsets = rng.normal(scale=10, size=(12, 1))
        res = within_subject_contrast(matrix(vals), [2.0, -1.0, -1.0])
        res_off = within_subject_contrast(matrix(vals + offsets), [2.0, -1.0, -1.0])
        assert res_off.estimate == pytest.approx(res.estimate, rel=1e-9, abs=1e-9)
        assert res_off.t == pytest.approx(res.t, rel=1e-9)

    def test_scale_invariance_of_t(self, rng):
        vals = rng.normal(size=(10, 3))
        res = within_subject_contrast(matrix(vals), [1.0, 0.0, -1.0])
        res_scaled = within_subject_contrast(matrix(vals * 3.7), [1.0, 0.0, -1.0])
        assert res_scaled.t == pytest.approx(res.t, rel=1e-9)

    def test_orthogonal_contrasts_partition_condition_ss(self, rng):
        for _ in range(20):
            vals = rng.normal(size=(9, 3))
            n = 9
            ss = 0.0
            for w in ([1.0, -2.0, 1.0], [1.0, 0.0, -1.0]):
                res = within_subject_contrast(matrix(vals), w)
                ss += n * res.estimate ** 2 / sum(x * x for x in w)
            ss_cond, *_ = oracles.rm_anova_one_factor_loop(vals.tolist())
            assert ss == pytest.approx(ss_cond, rel=1e-9)

    def test_weights_must_sum_to_zero(self):
        with pytest.raises(WeightsNotCentered):
            within_subject_contrast(matrix(np.ones((4, 3))), [1.0, 1.0, 1.0])
        with pytest.raises(ShapeMismatch):
            within_subject_contrast(matrix(np.ones((4, 3))), [1.0, -1.0])


class TestRmAnovaTwoFactor:
    def test_zero_b_effect(self, rng):
        n, a, b = 12, 2, 3
        subj = rng.normal(size=(n, 1, 1))
        eff_a = np.array([0.0, 1.0])[None, :, None]
        x = subj + eff_a + rng.normal(scale=0.1, size=(n, a, b))
        x -= x.mean(axis=(0, 1), keepdims=True)  # remove any B signal exactly
        table = rm_anova_two_factor(x)
        assert table.effects["B"].f == pytest.approx(0.0, abs=1e-20)

    def test_df_structure_n61(self, rng):
        x = rng.normal(size=(61, 2, 3))
        table = rm_anova_two_factor(x)
        assert (table.effects["B"].df, table.effects["B"].error_df) == (2, 120)
        assert (table.effects["A"].df, table.effects["A"].error_df) == (1, 60)
        assert (table.effects["AxB"].df, table.effects["AxB"].error_df) == (2, 120)

    def test_matches_definitional_oracle(self, rng):
        for _ in range(15):
            x = rng.normal(size=(6, 2, 3))
            table = rm_anova_two_factor(x)
            parts = oracles.rm_anova_two_factor_loop(x.tolist())
            for name, err in (("A", "SxA"), ("B", "SxB"), ("AxB", "SxAxB")):
                eff = table.effects[name]
                ss, df = parts[name]
                ss_e, df_e = parts[err]
                assert eff.ss == pytest.approx(ss, rel=1e-9, abs=1e-12)
                assert eff.df == df
                assert eff.error_ss == pytest.approx(ss_e, rel=1e-9, abs=1e-12)
                assert eff.f == pytest.approx((ss / df) / (ss_e / df_e), rel=1e-9)
            assert table.ss_total == pytest.approx(parts["total"][0], rel=1e-12)

    def test_effect_sizes_both_conventions(self, rng):
        x = rng.normal(size=(8, 2, 3))
        table = rm_anova_two_factor(x)
        eff = table.effects["B"]
        assert eff.eta_squared == pytest.approx(eff.ss / table.ss_total)
        assert eff.partial_eta_squared == pytest.approx(
            eff.ss / (eff.ss + eff.error_ss))

    def test_rejects_bad_shapes(self):
        with pytest.raises(UnbalancedDesign):
            rm_anova_two_factor(np.ones((5, 3)))
        with pytest.raises(UnbalancedDesign):
            rm_anova_two_factor(np.ones((1, 2, 3)))
        bad = np.ones((4, 2, 3))
        bad[2, 1, 1] = np.nan
        with pytest.raises(UnbalancedDesign):
            rm_anova_two_factor(bad)


class TestParallelModeration:
    def gen(self, rng, n=61, b=(0.3, 0.5, 0.2, -0.1, 0.4, 0.0), noise=1.0):
        x = rng.normal(size=n)
        m1 = rng.normal(size=n)
        m2 = 0.4 * m1 + rng.normal(size=n)
        y = (b[0] + b[1] * x + b[2] * m1 + b[3] * m2
             + b[4] * x * m1 + b[5] * x * m2 + noise * rng.normal(size=n))
        return y, x, m1, m2

    def test_df_structure_n61(self, rng):
        y, x, m1, m2 = self.gen(rng)
        res = parallel_moderation(y, x, m1, m2)
        assert res.f_df == (5, 55)
        assert all(c.df == 55 for c in res.conditional_effects)
        assert all(t.df == (1, 55) for t in res.interaction_tests)

    def test_exact_recovery_zero_noise(self, rng):
        n = 40
        x = rng.normal(size=n)
        m1 = rng.normal(size=n)
        m2 = rng.normal(size=n)
        xc, m1c = x - x.mean(), m1 - m1.mean()
        y = 1.5 + 2.0 * xc + 0.7 * xc * m1c
        res = parallel_moderation(y, x, m1, m2, center=True)
        assert res.coefficients[1] == pytest.approx(2.0, abs=1e-8)
        assert res.coefficients[4] == pytest.approx(0.7, abs=1e-8)
        assert res.coefficients[5] == pytest.approx(0.0, abs=1e-8)
        sd1 = np.std(m1, ddof=1)
        plus = [c for c in res.conditional_effects
                if c.m1_label == "mean+1sd" and c.m2_label == "mean"][0]
        assert plus.estimate == pytest.approx(2.0 + 0.7 * sd1, abs=1e-8)

    def test_matches_normal_equations(self, rng):
        y, x, m1, m2 = self.gen(rng, n=35)
        res = parallel_moderation(y, x, m1, m2, center=False)
        X = [[1.0, xi, a, b_, xi * a, xi * b_]
             for xi, a, b_ in zip(x, m1, m2)]
        expected = oracles.ols_normal_equations(X, list(y))
        assert np.allclose(res.coefficients, expected, atol=1e-8)

    def test_centered_conditional_at_means_equals_b1(self, rng):
        y, x, m1, m2 = self.gen(rng)
        res = parallel_moderation(y, x, m1, m2, center=True)
        center_row = [c for c in res.conditional_effects
                      if c.m1_label == "mean" and c.m2_label == "mean"][0]
        assert center_row.estimate == res.coefficients[1]

    def test_table_shape_and_order(self, rng):
        y, x, m1, m2 = self.gen(rng)
        res = parallel_moderation(y, x, m1, m2)
        labels = [(c.m1_label, c.m2_label) for c in res.conditional_effects]
        order = ["mean-1sd", "mean", "mean+1sd"]
        assert labels == [(a, b) for a in order for b in order]
        assert len(labels) == 9

    def test_ci_halfwidth(self, rng):
        from scipy.stats import t as t_dist
        y, x, m1, m2 = self.gen(rng)
        res = parallel_moderation(y, x, m1, m2)
        crit = t_dist.ppf(0.975, 55)
        for c in res.conditional_effects:
            assert c.ci_high - c.estimate == pytest.approx(crit * c.se, rel=1e-10)

    def test_errors(self, rng):
        with pytest.raises(InsufficientN):
            parallel_moderation([1.0] * 6, [1, 2, 3, 4, 5, 6],
                                [1, 2, 3, 4, 5, 6], [2, 1, 3, 4, 5, 6])
        y, x, m1, m2 = self.gen(rng, n=30)
        with pytest.raises(SingularDesign):
            parallel_moderation(y, x, m1, m1)  # m2 duplicates m1
        with pytest.raises(SingularDesign):
            parallel_moderation(y, x, np.ones(30), m2)


class TestWithinSubjectSem:
    def test_pure_subject_offsets_give_zero(self, rng):
        offsets = rng.normal(size=(10, 1))
        vals = np.tile([1.0, 2.0, 3.0], (10, 1)) + offsets
        sem = within_subject_sem(matrix(vals))
        assert np.allclose(sem, 0.0, atol=1e-12)

    def test_k2_closed_form(self, rng):
        n = 40
        vals = rng.normal(size=(n, 2))
        d = vals[:, 0] - vals[:, 1]
        expected = np.std(d, ddof=1) / (2 * math.sqrt(n)) * math.sqrt(2)
        sem = within_subject_sem(matrix(vals))
        assert np.allclose(sem, expected, rtol=1e-10)

    def test_matches_two_step_oracle(self, rng):
        for _ in range(20):
            vals = rng.normal(size=(7, 4))
            sem = within_subject_sem(matrix(vals))
            expected = oracles.cousineau_morey_sem_loop(vals.tolist())
            assert np.allclose(sem, expected, rtol=1e-12, atol=1e-14)
