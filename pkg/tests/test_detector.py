import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aremc.detector import (CountLaw, compute_threshold, log_likelihood_ratio, make_detector,
                            ml_decide, threshold_decide, threshold_from_counts)
from aremc.errors import ThresholdOutOfRangeError
from aremc.iui import IuiEnsemble, enumerate_states
from aremc.oracles import brute_force_ml

EMPTY = IuiEnsemble.from_means([])
SIX = np.array([0.4, 1.1, 1.1, 2.0, 3.3, 0.05])


def test_no_iui_decisions():
    assert ml_decide(0, 5.0, EMPTY) == 0
    assert ml_decide(10, 5.0, EMPTY) == 1


def test_zero_support_under_both_hypotheses():
    with pytest.raises(ValueError):
        ml_decide(3, 0.0, EMPTY)


def test_ml_matches_brute_force_six_interferers():
    states = enumerate_states(IuiEnsemble.from_means(SIX))
    for r in range(201):
        assert ml_decide(r, 4.0, states) == brute_force_ml(r, 4.0, SIX)


def test_threshold_examples():
    assert compute_threshold(5.0, EMPTY) == 1
    assert compute_threshold(0.0, EMPTY) == 0


def test_threshold_one_interferer_direct_scan():
    c, m = 5.0, 5.0
    theta = 0
    while True:  # two-state sums with 0**0 = 1
        lhs = c**theta * math.exp(-c) + (c + m) ** theta * math.exp(-(c + m))
        rhs = (1.0 if theta == 0 else 0.0) + m**theta * math.exp(-m)
        if lhs >= rhs:
            break
        theta += 1
    assert compute_threshold(c, IuiEnsemble.from_means([m])) == theta


def test_threshold_decide():
    assert threshold_decide(0, 1) == 0
    assert threshold_decide(7, 7) == 1
    assert list(threshold_decide(np.array([0, 1, 2]), 2)) == [0, 0, 1]


def test_out_of_range_threshold():
    e = IuiEnsemble.from_means([150.0] * 4)
    with pytest.raises(ThresholdOutOfRangeError):
        compute_threshold(160.0, e, theta_max=20)


def test_detector_config():
    d = make_detector(5.0, EMPTY)
    assert d.theta == 1 and d.decide(3) == 1
    with pytest.raises(ValueError):
        type(d)(theta=-1, c_bar_s=1.0, states=d.states)


# Interferers are farther from RX0 than TX0, so each mean stays below c_bar_s.
physical = st.tuples(
    st.sampled_from([0.5, 2.0, 5.0, 20.0]),
    st.lists(st.floats(0.0, 1.0), min_size=0, max_size=12),
).map(lambda t: (t[0], np.array(t[1]) * t[0]))


@given(physical)
def test_threshold_rule_equals_ml_rule(cfg):
    c, means = cfg
    states = enumerate_states(IuiEnsemble.from_means(means))
    theta = compute_threshold(c, states)
    r = np.arange(501)
    llr = log_likelihood_ratio(r, c, states)
    assert np.array_equal((llr >= 0).astype(int), threshold_decide(r, theta))


@given(physical)
def test_threshold_nondecreasing_in_signal(cfg):
    _, means = cfg
    states = enumerate_states(IuiEnsemble.from_means(means))
    thetas = [compute_threshold(c, states) for c in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0)]
    assert thetas == sorted(thetas)


def test_threshold_rule_can_differ_from_ml_when_an_interferer_outshines_the_signal():
    # One interferer with mean 6 against a signal of 0.5: the likelihood
    # ratio exceeds one at r = 1, drops below it, then rises again.
    e = IuiEnsemble.from_means([6.0])
    llr = log_likelihood_ratio(np.arange(30), 0.5, e)
    decisions = (llr >= 0).astype(int)
    assert decisions[1] == 1 and decisions[4] == 0 and decisions[-1] == 1
    assert compute_threshold(0.5, e) == 1


def test_count_law_threshold_matches_state_threshold():
    e = IuiEnsemble.from_classes([(3.0, 6), (1.2, 6), (0.5, 12)])
    for c in (0.5, 4.0, 12.0):
        law = CountLaw.from_ensemble(c, e, 200)
        assert threshold_from_counts(law) == compute_threshold(c, e)
