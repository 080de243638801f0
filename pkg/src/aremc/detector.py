"""ML detection of on-off keyed molecule counts under Poisson IUI.

The receiver knows every mean but not which interferers are active, so each
hypothesis is a Poisson mixture over the IUI states.  In the physical regime
(every interferer weaker than the desired link) the ML rule reduces to a
threshold test on the count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ThresholdOutOfRangeError
from .iui import IuiEnsemble, IuiStates, _log_convolve, iui_count_logpmf, iui_states, poisson_logpmf

THETA_MAX_DEFAULT = 200


def _as_states(e) -> IuiStates:
    if isinstance(e, IuiStates):
        return e
    if isinstance(e, IuiEnsemble):
        return iui_states(e)
    raise TypeError(f"expected IuiStates or IuiEnsemble, got {type(e).__name__}")


def log_mixture_mass(r, offset: float, states: IuiStates):
    """``log sum_s w_s Pois(offset + agg_s)(r)`` with ``0**0 = 1``.

    ``r`` may be an array; the result has its shape.
    """
    r = np.asarray(r, dtype=float)
    lam = offset + states.aggregate
    logw = np.log(states.weight)
    # xlogy gives 0 for r == 0 at lam == 0 and -inf for r > 0.
    terms = (special.xlogy(r[..., None], lam) - lam + logw) - special.gammaln(r[..., None] + 1)
    return special.logsumexp(terms, axis=-1)


def log_likelihood_ratio(r, c_bar_s: float, e):
    """``log f(r | s0=1) - log f(r | s0=0)``; may be +-inf."""
    states = _as_states(e)
    num = log_mixture_mass(r, c_bar_s, states)
    den = log_mixture_mass(r, 0.0, states)
    with np.errstate(invalid="ignore"):
        return num - den


def ml_decide(r: int, c_bar_s: float, e) -> int:
    """ML estimate of the TX0 bit from the observed count ``r``.

    Raises
    ------
    ValueError
        If neither hypothesis gives ``r`` positive probability.
    """
    if r < 0:
        raise ValueError("count must be non-negative")
    states = _as_states(e)
    num = float(log_mixture_mass(r, c_bar_s, states))
    den = float(log_mixture_mass(r, 0.0, states))
    if num == -np.inf and den == -np.inf:
        raise ValueError(f"count {r} has zero likelihood under both hypotheses")
    return int(num >= den)


def compute_threshold(c_bar_s: float, e, theta_max: int = THETA_MAX_DEFAULT,
                      chunk: int = 16) -> int:
    """Smallest ``theta`` at which the ML condition holds.

    The condition compares probability-weighted sums of
    ``lam**theta * exp(-lam)`` for ``lam = c_bar_s + agg`` and ``lam = agg``;
    with uniform state weights this equals the unweighted sum over all
    activation vectors up to a common factor.

    The threshold test reproduces :func:`ml_decide` when no interferer mean
    exceeds ``c_bar_s``, which every layout satisfies because TX0 is the
    nearest transmitter.  With a dominant interferer the likelihood ratio can
    cross one more than once and only :func:`ml_decide` is optimal.

    Raises
    ------
    ThresholdOutOfRangeError
        If no ``theta <= theta_max`` satisfies the condition.
    """
    states = _as_states(e)
    for start in range(0, theta_max + 1, chunk):
        thetas = np.arange(start, min(start + chunk, theta_max + 1))
        num = log_mixture_mass(thetas, c_bar_s, states)
        den = log_mixture_mass(thetas, 0.0, states)
        ok = np.flatnonzero(num >= den)
        if ok.size:
            return int(thetas[ok[0]])
    raise ThresholdOutOfRangeError(
        f"no threshold <= {theta_max} satisfies the ML condition (c_bar_s={c_bar_s:g})")


def threshold_decide(r, theta: int):
    out = np.asarray(r) >= theta
    return int(out) if out.ndim == 0 else out.astype(int)


@dataclass(frozen=True)
class DetectorConfig:
    theta: int
    c_bar_s: float
    states: IuiStates

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be non-negative")

    def decide(self, r):
        return threshold_decide(r, self.theta)


def make_detector(c_bar_s: float, e, theta_max: int = THETA_MAX_DEFAULT) -> DetectorConfig:
    states = _as_states(e)
    return DetectorConfig(compute_threshold(c_bar_s, states, theta_max), c_bar_s, states)


@dataclass(frozen=True)
class CountLaw:
    """Log pmfs of the received count ``r = 0..r_max`` under both hypotheses.

    Built by convolution (see :func:`aremc.iui.iui_count_logpmf`), this is
    an exact alternative to state enumeration for large interferer sets.
    """

    log_pmf0: np.ndarray
    log_pmf1: np.ndarray

    @classmethod
    def from_ensemble(cls, c_bar_s: float, e: IuiEnsemble, r_max: int) -> "CountLaw":
        lp0 = iui_count_logpmf(e, r_max)
        lp1 = _log_convolve(lp0, poisson_logpmf(c_bar_s, r_max))
        return cls(lp0, lp1)

    @property
    def r_max(self) -> int:
        return len(self.log_pmf0) - 1


def threshold_from_counts(law: CountLaw, theta_max: int = THETA_MAX_DEFAULT) -> int:
    if theta_max > law.r_max:
        raise ValueError("count law too short for theta_max")
    ok = np.flatnonzero(law.log_pmf1[:theta_max + 1] >= law.log_pmf0[:theta_max + 1])
    if not ok.size:
        raise ThresholdOutOfRangeError(f"no threshold <= {theta_max} satisfies the ML condition")
    return int(ok[0])
