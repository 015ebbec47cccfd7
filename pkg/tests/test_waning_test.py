import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from waning.errors import DegenerateResampling, DomainError, WrongMode, ZeroEvents
from waning.strata_sim import SimConfig, StratumDist, hr2_bias_factor, simulate_table, simulate_trial
from waning.trial_data import RecordArray, TrialSummary, summary_from_table
from waning.waning_test import (
    CONSERVATIVE_DELTA,
    DIRECT_DELTA,
    TestResult,
    bootstrap_ir_test,
    conservative_variance,
    direct_delta_variance,
    hr_ratio_test,
    incidence_ratio,
    ir_ratio_test,
    katz_variance,
    percentile_p_value,
    z_quantile,
)


def records_from_table(table):
    arm, outcome = [], []
    for a in (0, 1):
        for y in (0, 1, 2):
            arm += [a] * int(table[a][y])
            outcome += [y] * int(table[a][y])
    return RecordArray(arm, outcome)


# -- point quantities ------------------------------------------------------


def test_incidence_ratio_hpylori(hpylori):
    assert incidence_ratio(hpylori, 1) == pytest.approx(0.28022, abs=1e-4)
    # independent arithmetic
    assert incidence_ratio(hpylori, 1) == pytest.approx((10 / 1403.6) / (36 / 1416))


def test_incidence_ratio_identical_arms():
    s = TrialSummary.from_counts(500, 20, 10, 500, 20, 10)
    assert incidence_ratio(s, 1) == 1.0 and incidence_ratio(s, 2) == 1.0


def test_incidence_ratio_zero_events_names_cell():
    s = TrialSummary.from_counts(500, 20, 0, 500, 20, 10)
    with pytest.raises(ZeroEvents) as info:
        incidence_ratio(s, 2)
    assert info.value.arm == 0 and info.value.period == 2


def test_katz_variance_example():
    s = TrialSummary.from_counts(1000, 20, 20, 1000, 10, 10)
    assert katz_variance(s, 1) == pytest.approx(0.148, abs=1e-12)


def test_katz_variance_all_treated_events():
    s = TrialSummary.from_counts(100, 10, 5, 40, 40, 0)
    assert katz_variance(s, 1) == pytest.approx((1 - 0.1) / 10)


def test_katz_rejects_person_time(hpylori):
    with pytest.raises(WrongMode):
        katz_variance(hpylori, 1)


def test_direct_variance_examples(hpylori):
    assert direct_delta_variance(hpylori) == pytest.approx(0.449206, abs=1e-6)
    assert direct_delta_variance(TrialSummary.from_counts(10, 1, 1, 10, 1, 1)) == 4.0
    assert direct_delta_variance(TrialSummary.from_counts(1000, 100, 100, 1000, 100, 100)) == pytest.approx(0.04)


def test_conservative_variance_examples():
    # Katz terms by hand: 0.99/10 + 0.98/20 = 0.148 and 2 * 0.96/40 = 0.048
    s = TrialSummary.from_counts(1000, 20, 40, 1000, 10, 40)
    s1, s2 = katz_variance(s, 1), katz_variance(s, 2)
    assert s1 == pytest.approx(0.148) and s2 == pytest.approx(0.048)
    assert conservative_variance(s) == pytest.approx(s1 + s2 + 2 * math.sqrt(s1 * s2), rel=1e-15)
    # the plug-in example with s2 = 0.05 exactly
    assert 0.148 + 0.05 + 2 * math.sqrt(0.148 * 0.05) == pytest.approx(0.37005, abs=1e-5)
    same = TrialSummary.from_counts(1000, 20, 20, 1000, 10, 10)
    assert conservative_variance(same) == pytest.approx(4 * 0.148)


def test_conservative_rejects_person_time(hpylori):
    with pytest.raises(WrongMode):
        ir_ratio_test(hpylori, CONSERVATIVE_DELTA)


def test_conservative_zero_events():
    with pytest.raises(ZeroEvents):
        conservative_variance(TrialSummary.from_counts(100, 0, 5, 100, 3, 3))


# -- delta-method test -------------------------------------------------------


def test_hpylori_direct(hpylori):
    r = ir_ratio_test(hpylori, DIRECT_DELTA, 0.05)
    assert r.estimate == pytest.approx(0.977, abs=0.005)
    assert r.ci_low == pytest.approx(0.263, abs=0.01)
    assert r.ci_high == pytest.approx(3.63, abs=0.01)
    assert r.p_value == pytest.approx(0.97, abs=0.01)
    assert r.method == DIRECT_DELTA


def test_symmetric_summary_has_p_one():
    r = ir_ratio_test(TrialSummary.from_counts(1000, 30, 20, 1000, 30, 20))
    assert r.estimate == 1.0 and r.p_value == 1.0


def test_zero_cell_error_and_continuity_flag():
    s = TrialSummary.from_counts(1000, 30, 0, 1000, 10, 5)
    with pytest.raises(ZeroEvents):
        ir_ratio_test(s)
    r = ir_ratio_test(s, continuity=True)
    assert r.note and "continuity" in r.note
    assert r.estimate == pytest.approx((10.5 / 30.5) / (5.5 / 0.5))


@pytest.mark.parametrize("alpha", [0, 1, -0.1, 1.5])
def test_alpha_domain(hpylori, alpha):
    with pytest.raises(DomainError):
        ir_ratio_test(hpylori, alpha=alpha)


def test_unknown_method(hpylori):
    with pytest.raises(DomainError):
        ir_ratio_test(hpylori, "bootstrap")


def test_z_quantile_against_table():
    assert z_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
    assert z_quantile(0.95) == pytest.approx(1.6448536269514722, abs=1e-12)


summaries = st.tuples(
    st.integers(50, 20_000), st.integers(1, 400), st.integers(1, 400),
    st.integers(50, 20_000), st.integers(1, 400), st.integers(1, 400),
).filter(lambda t: t[1] + t[2] <= t[0] and t[4] + t[5] <= t[3])


@given(summaries)
def test_conservative_equals_squared_sum_of_katz_roots(t):
    s = TrialSummary.from_counts(*t)
    expected = (math.sqrt(katz_variance(s, 1)) + math.sqrt(katz_variance(s, 2))) ** 2
    assert conservative_variance(s) == pytest.approx(expected, rel=1e-12)


@given(summaries, st.sampled_from([DIRECT_DELTA, CONSERVATIVE_DELTA]), st.floats(0.001, 0.5))
def test_delta_ci_symmetric_on_log_scale(t, method, alpha):
    r = ir_ratio_test(TrialSummary.from_counts(*t), method, alpha)
    assert math.log(r.ci_high) - r.log_estimate == pytest.approx(r.log_estimate - math.log(r.ci_low), abs=1e-12)
    assert r.ci_low <= r.estimate <= r.ci_high


@given(summaries, st.sampled_from([DIRECT_DELTA, CONSERVATIVE_DELTA]))
def test_arm_swap_inverts_estimate(t, method):
    s = TrialSummary.from_counts(*t)
    a, b = ir_ratio_test(s, method), ir_ratio_test(s.swap_arms(), method)
    assert b.estimate == pytest.approx(1 / a.estimate, rel=1e-12)
    assert b.p_value == pytest.approx(a.p_value, abs=1e-12)


@given(st.lists(st.integers(1, 500), min_size=4, max_size=4),
       st.lists(st.floats(1.0, 1e5), min_size=4, max_size=4),
       st.floats(1e-3, 1e3))
def test_person_time_scale_invariance(events, pt, c):
    args = [x for pair in zip(events, pt) for x in pair]
    s = TrialSummary.from_person_time(*args)
    scaled = TrialSummary.from_person_time(*[x * c if i % 2 else x for i, x in enumerate(args)])
    a, b = ir_ratio_test(s), ir_ratio_test(scaled)
    assert b.estimate == pytest.approx(a.estimate, rel=1e-9)
    assert b.ci_low == pytest.approx(a.ci_low, rel=1e-9)
    assert b.p_value == pytest.approx(a.p_value, rel=1e-9, abs=1e-12)


def test_result_json_roundtrip(hpylori):
    r = ir_ratio_test(hpylori)
    assert TestResult.from_json(r.to_json()) == r


# -- bootstrap ---------------------------------------------------------------


@pytest.fixture(scope="module")
def sim_records():
    return simulate_trial(SimConfig(n=2000, dist=(0.2, 0.6, 0.2, 0.0), seed=5))


def test_bootstrap_deterministic(sim_records):
    a = bootstrap_ir_test(sim_records, B=1000, seed=9)
    b = bootstrap_ir_test(sim_records, B=1000, seed=9, workers=4)
    assert a == b
    assert a.ci_low <= a.estimate <= a.ci_high
    assert a.log_se is None


def test_bootstrap_seed_changes_interval(sim_records):
    a = bootstrap_ir_test(sim_records, B=1000, seed=1)
    b = bootstrap_ir_test(sim_records, B=1000, seed=2)
    assert a.estimate == b.estimate and (a.ci_low, a.ci_high) != (b.ci_low, b.ci_high)


def test_bootstrap_estimate_matches_delta(sim_records):
    from waning.trial_data import aggregate

    assert bootstrap_ir_test(sim_records, B=500).estimate == pytest.approx(ir_ratio_test(aggregate(sim_records)).estimate)


def test_bootstrap_rejects_zero_B(sim_records):
    with pytest.raises(DomainError):
        bootstrap_ir_test(sim_records, B=0)


def test_bootstrap_zero_events():
    with pytest.raises(ZeroEvents):
        bootstrap_ir_test(records_from_table([[90, 10, 0], [90, 5, 5]]), B=100)


def test_bootstrap_degenerate_resampling():
    # single events per cell: most resamples lose a cell
    with pytest.raises(DegenerateResampling):
        bootstrap_ir_test(records_from_table([[2, 1, 1], [2, 1, 1]]), B=1000)


def test_stratified_bootstrap_keeps_arm_sizes(sim_records):
    r = bootstrap_ir_test(sim_records, B=500, seed=3, stratified=True)
    assert "stratified" in r.note


def test_percentile_p_value_grid():
    assert percentile_p_value(np.linspace(0.5, 1.5, 1001)) == 1.0
    assert percentile_p_value(np.linspace(1.1, 2.0, 1001)) == 0.001


@pytest.mark.slow
def test_bootstrap_coverage_under_independence():
    # arm independent of outcome: the true ratio is 1
    rng = np.random.default_rng(77)
    probs = np.array([0.9, 0.06, 0.04])
    covered = 0
    for _ in range(500):
        table = np.stack([rng.multinomial(1000, probs), rng.multinomial(1000, probs)])
        r = bootstrap_ir_test(records_from_table(table), B=1000, seed=int(rng.integers(1 << 31)))
        covered += r.ci_low <= 1 <= r.ci_high
    assert covered / 500 >= 0.94


# -- hazard-ratio comparison -------------------------------------------------


def test_hr_equals_ir_without_period1_events():
    # no depletion: HR2 = IR2 up to the arm-size ratio cancelling
    table = [[900, 0, 100], [950, 0, 50]]
    rec = records_from_table(table)
    with pytest.raises(ZeroEvents):
        hr_ratio_test(rec, B=200)
    # both estimators share HR1 = IR1; compare HR2 with IR2 directly
    t = np.array(table)
    hr2 = (t[1, 2] / (t[1].sum() - t[1, 1])) / (t[0, 2] / (t[0].sum() - t[0, 1]))
    ir2 = (t[1, 2] / t[1].sum()) / (t[0, 2] / t[0].sum())
    assert hr2 == ir2


def test_hr_deterministic_and_flagged(sim_records):
    a = hr_ratio_test(sim_records, B=800, seed=4)
    assert a == hr_ratio_test(sim_records, B=800, seed=4, workers=3)
    assert a.method == "hr_bootstrap" and "not a valid waning test" in a.note


def test_hr_bias_at_large_n():
    dist = StratumDist(0.2, 0.6, 0.2, 0.0)
    table = simulate_table(SimConfig(n=10**6, dist=dist, p_e1=0.9, p_e2=0.9, seed=12))
    s = summary_from_table(table)
    hr1 = incidence_ratio(s, 1)
    hr2 = (table[1, 2] / (table[1].sum() - table[1, 1])) / (table[0, 2] / (table[0].sum() - table[0, 1]))
    assert hr1 / hr2 == pytest.approx(1 / hr2_bias_factor(dist, 0.9), rel=0.02)


@pytest.mark.slow
def test_null_level_both_delta_methods():
    from waning.power_study import PowerGrid, run_power_grid

    grid = PowerGrid([4000], [0.9], [1.0], methods=(DIRECT_DELTA, CONSERVATIVE_DELTA), replications=1000, base_seed=31)
    for cell in run_power_grid(grid, (0.2, 0.6, 0.2, 0.0), workers=4):
        assert cell.rejection_rate <= 0.07


def test_consistency_large_null():
    table = simulate_table(SimConfig(n=10**6, dist=(0.2, 0.6, 0.2, 0.0), p_e1=0.5, p_e2=0.5, seed=8))
    r = ir_ratio_test(summary_from_table(table))
    assert abs(r.log_estimate) < 0.02
