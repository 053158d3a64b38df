import math

import numpy as np
import pytest

from qmcs.gibbs import (Graph, exact_partition, ising_model, matching_model)
from qmcs.outcome import QueryLedger
from qmcs.partition import (CoolingSchedule, ScheduleError, build_schedule,
                            chebyshev_ratio, classical_baseline,
                            estimate_partition, ratio_variable,
                            reversed_ratio_variable, verify_schedule)

K2 = Graph(2, ((0, 1),))
C4 = Graph(4, ((0, 1), (1, 2), (2, 3), (3, 0)))


def test_schedule_validation():
    with pytest.raises(ScheduleError):
        CoolingSchedule((0.5, 1.0, math.inf), 2.0, "forward")  # must start at 0
    with pytest.raises(ScheduleError):
        CoolingSchedule((0.0, 1.0, 0.5), 2.0, "forward")  # not increasing
    with pytest.raises(ScheduleError):
        CoolingSchedule((0.0, math.inf), 0.9, "forward")  # B <= 1


def test_ratio_variable_telescopes():
    m = matching_model(C4)
    bi, bj = 0.3, 1.1
    d = ratio_variable(m, bi, bj)
    assert d.mean() == pytest.approx(
        exact_partition(m, bj) / exact_partition(m, bi), rel=1e-12)
    # relative second moment matches the three-partition expression
    ratio = d.l2norm() ** 2 / d.mean() ** 2
    assert ratio == pytest.approx(chebyshev_ratio(m, bi, bj), rel=1e-12)


def test_ratio_variable_terminal_indicator():
    m = ising_model(K2)
    d = ratio_variable(m, 0.7, math.inf)
    assert set(np.round(d.values, 12)) <= {0.0, 1.0}
    assert d.mean() == pytest.approx(
        exact_partition(m, math.inf) / exact_partition(m, 0.7))


def test_reversed_ratio_variable():
    m = matching_model(C4)
    bi, bj = 0.3, 1.1
    d = reversed_ratio_variable(m, bi, bj)
    assert d.mean() == pytest.approx(
        exact_partition(m, bi) / exact_partition(m, bj), rel=1e-12)
    with pytest.raises(ScheduleError):
        reversed_ratio_variable(m, 0.3, math.inf)


def test_minimal_schedule_for_small_model():
    # Z(0)/Z(inf) = 2 for a single Ising edge, so B = 2 needs no midpoints
    s = build_schedule(ising_model(K2), 2.0)
    assert s.betas == (0.0, math.inf)


def test_schedule_pairs_respect_budget():
    m = matching_model(C4)
    s = build_schedule(m, 1.5)
    report = verify_schedule(m, s)
    assert report["ok"]
    assert all(p["ratio"] <= 1.5 * (1 + 1e-12) for p in report["pairs"])
    assert report["pairs"][-1]["terminal_pair"]
    # tightening B lengthens the schedule
    assert build_schedule(m, 1.1).ell >= s.ell


def test_estimate_partition_ideal_sampling():
    m = ising_model(K2)
    s = build_schedule(m, 2.0)
    eps = 0.1
    hits = 0
    for seed in range(20):
        est = estimate_partition(m, s, eps, 0.1, "ideal_sampling",
                                 np.random.default_rng(seed), QueryLedger())
        hits += abs(est.z_value - 2.0) <= eps * 2.0
    assert hits >= 18


def test_estimate_partition_reversed_direction():
    m = matching_model(C4)
    s = build_schedule(m, 2.0, direction="reversed")
    est = estimate_partition(m, s, 0.1, 0.1, "ideal_sampling",
                             np.random.default_rng(1), QueryLedger())
    assert abs(est.z_value - 7.0) <= 0.1 * 7.0


def test_walk_mode_charges_walk_steps_not_oracle_calls():
    m = ising_model(K2)
    s = build_schedule(m, 2.0)
    ledger = QueryLedger()
    estimate_partition(m, s, 0.2, 0.2, "walk_idealized",
                       np.random.default_rng(2), ledger)
    assert ledger.walk_steps > 0


def test_exact_sim_charges_exceed_idealized():
    m = ising_model(K2)
    s = build_schedule(m, 2.0)
    l_ideal, l_sim = QueryLedger(), QueryLedger()
    estimate_partition(m, s, 0.2, 0.2, "walk_idealized",
                       np.random.default_rng(3), l_ideal)
    estimate_partition(m, s, 0.2, 0.2, "walk_exact_sim",
                       np.random.default_rng(3), l_sim)
    assert l_sim.walk_steps > l_ideal.walk_steps


def test_classical_baseline_sample_count_and_value():
    m = ising_model(K2)
    s = build_schedule(m, 2.0)
    eps = 0.1
    ledger = QueryLedger()
    est = classical_baseline(m, s, eps, np.random.default_rng(4), ledger)
    n = math.ceil(16.0 * 2.0 * s.ell / eps**2)
    assert ledger.classical_samples == n * s.ell
    assert abs(est.z_value - 2.0) <= eps * 2.0


def test_classical_baseline_mix_sampling():
    m = ising_model(K2)
    s = build_schedule(m, 2.0)
    ledger = QueryLedger()
    est = classical_baseline(m, s, 0.2, np.random.default_rng(5), ledger,
                             sampling="mix")
    assert ledger.walk_steps > 0
    assert abs(est.z_value - 2.0) <= 0.2 * 2.0


def test_estimate_rejects_bad_mode_and_schedule():
    m = ising_model(K2)
    s = build_schedule(m, 2.0)
    with pytest.raises(ValueError):
        estimate_partition(m, s, 0.1, 0.1, "other",
                           np.random.default_rng(0), QueryLedger())
    bad = CoolingSchedule((0.0, math.inf), 1.5, "forward")  # ratio 2 > 1.5
    with pytest.raises(ScheduleError):
        estimate_partition(m, bad, 0.1, 0.1, "ideal_sampling",
                           np.random.default_rng(0), QueryLedger())
