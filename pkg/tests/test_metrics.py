import numpy as np
import pytest

import oracles
from impulsekit.errors import (
    DegenerateStopRate,
    MissingField,
    NoGoRTs,
    NoGoTrials,
    NoStopTrials,
    TooFewTrials,
)
from impulsekit.metrics import (
    POLICIES,
    ConditionBreakdown,
    SubjectSummary,
    TrialRecord,
    commission_error,
    go_max_velocity_sd,
    go_rts_from_trials,
    go_stats,
    quality_filter,
    ssrt_integration,
    stop_failure_rate,
    summarize_subject,
)
from impulsekit.trajectory import FeatureVector, Trajectory


def _traj():
    return Trajectory([[0.0, 0.0, -0.8], [16.0, 0.0, -0.8]])


def stop_trial(i, responded, ssd=300.0, rt=None):
    return TrialRecord(trial_id=f"s{i}", task="sst", condition="neutral",
                       kind="stop", ssd=ssd, responded=responded,
                       rt=rt if responded else None,
                       correct=True if responded else None,
                       trajectory=_traj())


def go_trial(i, rt=None, correct=True):
    responded = rt is not None
    return TrialRecord(trial_id=f"g{i}", task="sst", condition="neutral",
                       kind="go", responded=responded, rt=rt,
                       correct=correct if responded else None,
                       trajectory=_traj())


class TestStopFailureRate:
    def test_no_responses(self):
        trials = [stop_trial(i, False) for i in range(50)]
        assert stop_failure_rate(trials) == 0.0

    def test_counting(self):
        trials = [stop_trial(i, i < 20, rt=500.0) for i in range(50)]
        assert stop_failure_rate(trials) == pytest.approx(0.4)

    def test_requires_stop_trials(self):
        with pytest.raises(NoStopTrials):
            stop_failure_rate([go_trial(0, 400.0)])

    def test_commission_conventions_sum_to_one(self):
        rate = 0.37
        assert commission_error(rate, "fig6") + commission_error(rate, "fig5") == 1.0
        assert commission_error(rate, "fig6") == rate


class TestSsrtIntegration:
    def test_hand_computation(self):
        # p = 0.4, N = 5 -> 2nd sorted RT = 350; mean SSD = 200 -> SSRT 150
        go_rts = [300.0, 350.0, 400.0, 450.0, 500.0]
        stops = [stop_trial(i, i < 2, ssd=200.0, rt=400.0) for i in range(5)]
        assert ssrt_integration(go_rts, stops) == pytest.approx(150.0)

    def test_interpolated_quantile_reported_separately(self):
        go_rts = [300.0, 350.0, 400.0, 450.0, 500.0]
        stops = [stop_trial(i, i < 2, ssd=200.0, rt=400.0) for i in range(5)]
        interp = ssrt_integration(go_rts, stops, quantile_rule="interp")
        assert interp == pytest.approx(np.quantile(go_rts, 0.4) - 200.0)

    def test_degenerate_rates(self):
        go_rts = [300.0, 400.0]
        all_fail = [stop_trial(i, True, rt=350.0) for i in range(10)]
        none_fail = [stop_trial(i, False) for i in range(10)]
        with pytest.raises(DegenerateStopRate):
            ssrt_integration(go_rts, all_fail)
        with pytest.raises(DegenerateStopRate):
            ssrt_integration(go_rts, none_fail)

    def test_no_go_rts(self):
        stops = [stop_trial(i, i < 5, rt=400.0) for i in range(10)]
        with pytest.raises(NoGoRTs):
            ssrt_integration([], stops)
        with pytest.raises(NoGoRTs):
            ssrt_integration([None, None], stops, omission_policy="exclude")

    def test_omission_policies_differ(self):
        go_rts = [300.0, 350.0, 400.0, None, None]
        stops = [stop_trial(i, i < 8, ssd=300.0, rt=400.0) for i in range(10)]
        excl = ssrt_integration(go_rts, stops, omission_policy="exclude")
        amax = ssrt_integration(go_rts, stops, omission_policy="assign_max")
        # p = 0.8: exclude -> ceil(.8*3) = 3rd of {300,350,400}; assign_max ->
        # ceil(.8*5) = 4th of {300,350,400,3000,3000}
        assert excl == pytest.approx(400.0 - 300.0)
        assert amax == pytest.approx(3000.0 - 300.0)

    def test_monotone_in_stop_failure_rate(self, rng):
        go_rts = sorted(rng.normal(600, 120, size=80))
        estimates = []
        for n_resp in range(1, 20):
            stops = [stop_trial(i, i < n_resp, ssd=300.0, rt=500.0)
                     for i in range(20)]
            estimates.append(ssrt_integration(list(go_rts), stops))
        assert all(b >= a - 1e-12 for a, b in zip(estimates, estimates[1:]))

    def test_shift_invariance(self, rng):
        go_rts = list(rng.normal(650, 100, size=60))
        stops = [stop_trial(i, i < 7, ssd=float(100 * (1 + i % 6)), rt=500.0)
                 for i in range(20)]
        base = ssrt_integration(go_rts, stops)
        shifted_stops = [stop_trial(i, t.responded, ssd=t.ssd + 100.0, rt=t.rt)
                         for i, t in enumerate(stops)]
        both = ssrt_integration([r + 100.0 for r in go_rts], shifted_stops)
        only_go = ssrt_integration([r + 100.0 for r in go_rts], stops)
        assert abs(both - base) < 1e-9
        assert only_go - base == pytest.approx(100.0, abs=1e-9)


class TestGoStats:
    def test_identical_rts_zero_sd(self):
        trials = [go_trial(i, 500.0) for i in range(10)]
        stats = go_stats(trials)
        assert stats["go_rt_sd"] == 0.0
        assert stats["go_rt_mean"] == 500.0

    def test_two_point_sd(self):
        trials = [go_trial(0, 400.0), go_trial(1, 600.0)]
        stats = go_stats(trials)
        assert stats["go_rt_mean"] == 500.0
        assert stats["go_rt_sd"] == pytest.approx(141.4213562, rel=1e-6)

    def test_stop_rts_use_failed_stops_only(self):
        trials = [go_trial(0, 500.0),
                  stop_trial(1, True, rt=420.0),
                  stop_trial(2, True, rt=380.0),
                  stop_trial(3, False)]
        stats = go_stats(trials)
        assert stats["stop_rt_mean"] == pytest.approx(400.0)

    def test_accuracy_counts_all_go_trials(self):
        trials = [go_trial(0, 500.0, correct=True),
                  go_trial(1, 520.0, correct=False),
                  go_trial(2, None)]  # omission counts in the denominator
        assert go_stats(trials)["go_accuracy"] == pytest.approx(1 / 3)

    def test_matches_definitional_oracle(self, rng):
        for _ in range(50):
            rts = rng.normal(600, 150, size=int(rng.integers(3, 40))).tolist()
            trials = [go_trial(i, max(r, 1.0)) for i, r in enumerate(rts)]
            stats = go_stats(trials)
            clipped = [max(r, 1.0) for r in rts]
            assert stats["go_rt_mean"] == pytest.approx(oracles.mean(clipped), rel=1e-9)
            assert stats["go_rt_sd"] == pytest.approx(oracles.sample_sd(clipped), rel=1e-9)

    def test_requires_go_trials(self):
        with pytest.raises(NoGoTrials):
            go_stats([stop_trial(0, True, rt=300.0)])


class TestGoMaxVelocitySd:
    @staticmethod
    def fv(v):
        return FeatureVector(total_distance=1.0, max_velocity=v,
                             max_acceleration=0.0, auc=0.0)

    def test_identical_trials_zero(self):
        assert go_max_velocity_sd([self.fv(2.0)] * 5) == 0.0

    def test_three_point(self):
        assert go_max_velocity_sd([self.fv(1.0), self.fv(2.0), self.fv(3.0)]) == 1.0

    def test_too_few(self):
        with pytest.raises(TooFewTrials):
            go_max_velocity_sd([self.fv(1.0)])


class TestQualityFilter:
    def summary(self, acc=0.9, sfr=0.4, per_condition=None):
        return SubjectSummary(subject_id="s", go_accuracy=acc,
                              stop_failure_rate=sfr,
                              per_condition=per_condition or {})

    def test_low_primary_accuracy_rejected(self):
        verdict = quality_filter(self.summary(acc=0.04), POLICIES["study1"])
        assert not verdict.accepted and "primary_accuracy" in verdict.reasons

    def test_total_commission_rejected_study2(self):
        per_cond = {"neutral": ConditionBreakdown(0.9, 1.0)}
        verdict = quality_filter(self.summary(per_condition=per_cond),
                                 POLICIES["study2"])
        assert not verdict.accepted
        assert any(r.startswith("commission") for r in verdict.reasons)

    def test_perfect_subject_accepted(self):
        for policy in POLICIES.values():
            assert quality_filter(self.summary(acc=1.0, sfr=0.5), policy).accepted

    def test_strict_presets(self):
        assert not quality_filter(self.summary(acc=0.15), POLICIES["strict20"]).accepted
        assert quality_filter(self.summary(acc=0.25), POLICIES["strict20"]).accepted
        assert not quality_filter(self.summary(acc=0.25), POLICIES["strict40"]).accepted

    def test_missing_field(self):
        with pytest.raises(MissingField):
            quality_filter(SubjectSummary(subject_id="s"), POLICIES["study1"])

    def test_deterministic(self):
        s = self.summary(acc=0.5, sfr=0.5)
        v1 = quality_filter(s, POLICIES["study1"])
        v2 = quality_filter(s, POLICIES["study1"])
        assert v1 == v2


class TestSummarizeSubject:
    def test_full_summary(self):
        trials = ([go_trial(i, 400.0 + 10 * i) for i in range(20)]
                  + [stop_trial(100 + i, i < 5, ssd=300.0, rt=450.0) for i in range(10)])
        s = summarize_subject(trials, "subj1")
        assert s.stop_failure_rate == pytest.approx(0.5)
        assert s.ssrt is not None
        assert s.go_accuracy == 1.0
        assert s.commission_error_reported == pytest.approx(0.5)
        assert "neutral" in s.per_condition

    def test_degenerate_ssrt_is_none_not_number(self):
        trials = ([go_trial(i, 400.0) for i in range(5)]
                  + [stop_trial(10 + i, False) for i in range(5)])
        s = summarize_subject(trials, "subj2")
        assert s.ssrt is None
        assert s.stop_failure_rate == 0.0

    def test_go_rts_extraction_keeps_omissions(self):
        trials = [go_trial(0, 400.0), go_trial(1, None), go_trial(2, 500.0)]
        assert go_rts_from_trials(trials) == [400.0, None, 500.0]
