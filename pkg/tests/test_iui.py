import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aremc.channel import ChannelParams, cir
from aremc.errors import EnumerationCapError
from aremc.grid import build_layout
from aremc.iui import (IuiEnsemble, enumerate_states, iui_count_logpmf, iui_ensemble,
                       iui_states, sample_states, signal_mean)
from aremc.metrics import sampling_time
from aremc.oracles import brute_force_states, cylinder_integral

P = ChannelParams.table1(0.2)


def test_signal_mean_scaling():
    assert signal_mean(P, 0.0).c_bar_s == 0.0
    assert signal_mean(P, 0.05).c_bar_s == pytest.approx(5.0)
    with pytest.raises(ValueError):
        signal_mean(P, 1.5)


def test_signal_mean_at_peak_matches_oracle():
    t = sampling_time(P)
    assert signal_mean(P, float(cir(0.0, t, P))).c_bar_s == pytest.approx(
        100 * cylinder_integral(0.0, t, P), rel=1e-6)


def test_ensemble_shapes():
    t = sampling_time(P)
    assert iui_ensemble(build_layout(0.2, 0), P, t).n_interferers == 0
    one = iui_ensemble(build_layout(0.2, 1), P, t)
    assert one.n_interferers == 6 and len(one.classes) == 1
    assert np.all(one.means == one.means[0])
    three = iui_ensemble(build_layout(0.2, 3), P, t)
    assert [n for _, n in three.classes] == [6, 6, 6, 12, 6]
    assert sorted(three.means) == sorted(np.repeat(*zip(*three.classes)))


def test_means_nonincreasing_with_distance():
    for d in (0.05, 0.2, 1.0, 3.0):
        p = P.with_d_hex(d)
        e = iui_ensemble(build_layout(d, 4), p, sampling_time(p), series_atol=1e-6)
        m = [c for c, _ in e.classes]
        assert np.all(np.diff(m) <= 0)


def test_single_class_is_binomial():
    s = enumerate_states(IuiEnsemble.from_classes([(2.5, 6)]))
    assert len(s) == 7
    assert np.allclose(s.weight, [math.comb(6, k) / 64 for k in range(7)], rtol=0, atol=1e-15)
    assert np.allclose(s.aggregate, 2.5 * np.arange(7))


def test_three_ring_state_count():
    e = iui_ensemble(build_layout(0.2, 3), P, sampling_time(P))
    assert e.n_states == 7 * 7 * 7 * 13 * 7 == 31_213
    s = enumerate_states(e)
    assert len(s) == 31_213
    assert s.weight.sum() == pytest.approx(1.0, abs=1e-12)


def test_no_interferers_single_state():
    s = enumerate_states(IuiEnsemble.from_means([]))
    assert list(s) == [(0.0, 1.0)]


means_st = st.lists(st.sampled_from([0.0, 0.3, 1.0, 2.5, 7.0]) | st.floats(0, 10),
                    min_size=0, max_size=12)


@given(means_st)
def test_class_collapse_equals_brute_force(means):
    s = enumerate_states(IuiEnsemble.from_means(means))
    agg, w = brute_force_states(means)
    assert s.weight.sum() == pytest.approx(1.0, abs=1e-12)
    for f in (lambda a: np.exp(-a), np.cos, lambda a: a**2 / 100):
        assert s.expect(f) == pytest.approx(float(np.sum(w * f(agg))), abs=1e-12)


def test_cap_is_enforced_and_fallback_samples():
    e = IuiEnsemble.from_means(np.arange(1, 31, dtype=float))  # 2**30 states
    with pytest.raises(EnumerationCapError):
        enumerate_states(e)
    s = iui_states(e, n_samples=1000)
    assert not s.exact and len(s) == 1000


def test_sampling_zero_interferers():
    s = sample_states(IuiEnsemble.from_means([]), 500, seed=1)
    assert np.all(s.aggregate == 0)


def test_sampling_mean_one_class():
    m = 1.7
    s = sample_states(IuiEnsemble.from_classes([(m, 6)]), 100_000, seed=2)
    se = math.sqrt(6 * 0.25 * m * m / 100_000)
    assert abs(s.aggregate.mean() - 3 * m) < 4 * se


def test_sampling_matches_enumeration_within_3se():
    e = iui_ensemble(build_layout(0.2, 3), P, sampling_time(P))
    exact = enumerate_states(e)
    samp = sample_states(e, 100_000, seed=0)
    for f in (lambda a: a, lambda a: np.exp(-a / 10)):
        vals = f(samp.aggregate)
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - exact.expect(f)) <= 3 * se


def test_sampling_is_reproducible_and_prefix_stable():
    e = IuiEnsemble.from_means([1.0, 2.0, 3.0])
    a = sample_states(e, 5000, seed=9).aggregate
    b = sample_states(e, 5000, seed=9).aggregate
    c = sample_states(e, 4096, seed=9).aggregate
    assert np.array_equal(a, b) and np.array_equal(a[:4096], c)
    assert not np.array_equal(a, sample_states(e, 5000, seed=10).aggregate)


def test_count_law_matches_enumeration():
    from aremc.detector import log_mixture_mass
    e = IuiEnsemble.from_classes([(3.0, 6), (1.2, 6), (0.5, 12)])
    lp = iui_count_logpmf(e, 150)
    ref = log_mixture_mass(np.arange(151), 0.0, enumerate_states(e))
    assert np.max(np.abs(np.exp(lp) - np.exp(ref))) < 1e-14
    assert np.exp(lp).sum() == pytest.approx(1.0, abs=1e-12)
