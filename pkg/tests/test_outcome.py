import numpy as np
import pytest

from qmcs.outcome import (DistributionError, QueryLedger, classical_sample,
                          classical_sample_block, make_distribution, moments,
                          transform, truncate)


def test_merge_duplicates():
    d = make_distribution([(1.0, 0.25), (1.0, 0.25), (2.0, 0.5)])
    assert d.support_size == 2
    assert d.probs[d.values == 1.0][0] == pytest.approx(0.5)


def test_normalization_enforced():
    with pytest.raises(DistributionError):
        make_distribution([(0.0, 0.5), (1.0, 0.4)])
    with pytest.raises(DistributionError):
        make_distribution([(0.0, -0.1), (1.0, 1.1)])
    with pytest.raises(DistributionError):
        make_distribution([])


def test_moments_against_direct_sums():
    pairs = [(0.0, 0.3), (1.5, 0.2), (4.0, 0.5)]
    d = make_distribution(pairs)
    mean = sum(v * p for v, p in pairs)
    var = sum(p * (v - mean) ** 2 for v, p in pairs)
    l2 = np.sqrt(sum(p * v * v for v, p in pairs))
    got = moments(d)
    assert got == pytest.approx((mean, var, l2))


def test_truncate_range_moves_mass_to_zero():
    d = make_distribution([(0.5, 0.25), (1.5, 0.25), (3.0, 0.5)])
    cut = truncate(d, "range", 1.0, 2.0)
    assert cut.mean() == pytest.approx(1.5 * 0.25)
    # all discarded mass sits at zero
    assert cut.probs[cut.values == 0.0][0] == pytest.approx(0.75)


def test_truncate_below_and_atleast():
    d = make_distribution([(-2.0, 0.5), (3.0, 0.5)])
    neg = truncate(d, "below", 0.0)
    assert neg.mean() == pytest.approx(-1.0)
    pos = truncate(d, "atleast", None, 0.0)
    assert pos.mean() == pytest.approx(1.5)


def test_transform_rejects_nonfinite():
    d = make_distribution([(0.0, 0.5), (1.0, 0.5)])
    with pytest.raises(DistributionError):
        transform(d, lambda v: float("nan"))


def test_classical_sampling_ledger_and_law():
    d = make_distribution([(0.0, 0.75), (1.0, 0.25)])
    rng = np.random.default_rng(0)
    ledger = QueryLedger()
    xs = classical_sample_block(d, 20000, rng, ledger)
    assert ledger.classical_samples == 20000
    assert np.mean(xs) == pytest.approx(0.25, abs=0.02)
    classical_sample(d, rng, ledger)
    assert ledger.classical_samples == 20001


def test_ledger_merge_and_snapshot():
    a = QueryLedger(a_uses=1, reflection_uses=10)
    b = QueryLedger(a_uses=2, walk_steps=5)
    snap = a.snapshot()
    a.merge(b)
    assert a.a_uses == 3 and a.walk_steps == 5 and a.reflection_uses == 10
    assert snap.a_uses == 1  # snapshot unaffected
