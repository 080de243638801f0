"""Poisson models of the desired signal and of inter-user interference.

Interferers at the same lattice distance have identical mean counts, so the
``2**n`` activation vectors collapse to ``prod(n_j + 1)`` distinct aggregate
means, one per choice of how many interferers ``k_j`` of each distance
class are active.  The collapsed weights are exact binomial products.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .channel import K_MAX_DEFAULT, SERIES_ATOL, ChannelParams, cir
from .errors import EnumerationCapError
from .grid import GridLayout, distance_classes
from .rng import block_generator

logger = logging.getLogger(__name__)

STATE_CAP = 10**7
N_SAMPLES_DEFAULT = 10**5


@dataclass(frozen=True)
class SignalModel:
    c_bar_s: float


@dataclass(frozen=True)
class IuiEnsemble:
    """Mean interferer counts at the sampling time.

    Attributes
    ----------
    means : ndarray
        One mean per interferer, ordered as in the layout.
    classes : tuple of (class_mean, multiplicity)
        The same multiset grouped by lattice distance.
    """

    means: np.ndarray
    classes: tuple[tuple[float, int], ...]

    @property
    def n_interferers(self) -> int:
        return len(self.means)

    @classmethod
    def from_classes(cls, classes) -> "IuiEnsemble":
        classes = tuple((float(m), int(n)) for m, n in classes)
        for m, n in classes:
            if m < 0 or n < 1:
                raise ValueError("class means must be >= 0 and multiplicities >= 1")
        means = np.repeat([m for m, _ in classes], [n for _, n in classes]).astype(float)
        return cls(means=means, classes=classes)

    @classmethod
    def from_means(cls, means) -> "IuiEnsemble":
        """Group a flat vector of means into classes of exactly equal value."""
        means = np.asarray(means, dtype=float).ravel()
        if np.any(means < 0):
            raise ValueError("interferer means must be non-negative")
        values, counts = np.unique(means, return_counts=True)
        classes = tuple((float(m), int(n)) for m, n in zip(values, counts))
        return cls(means=means.copy(), classes=classes)

    @property
    def n_states(self) -> int:
        return math.prod(n + 1 for _, n in self.classes)


@dataclass(frozen=True)
class IuiStates:
    """Weighted aggregate IUI means ``s_IUI . c_bar_IUI``.

    ``exact`` is False when the states were sampled instead of enumerated.
    """

    aggregate: np.ndarray
    weight: np.ndarray
    exact: bool = True

    def __iter__(self):
        return zip(self.aggregate.tolist(), self.weight.tolist())

    def __len__(self) -> int:
        return len(self.aggregate)

    def expect(self, f) -> float:
        """Expectation of ``f(aggregate)`` over the IUI activity."""
        return float(np.sum(self.weight * f(self.aggregate)))


def signal_mean(p: ChannelParams, cir_peak: float) -> SignalModel:
    if not 0.0 <= cir_peak <= 1.0:
        raise ValueError(f"cir_peak must lie in [0, 1], got {cir_peak!r}")
    return SignalModel(c_bar_s=p.n_mol * float(cir_peak))


def iui_ensemble(layout: GridLayout, p: ChannelParams, t_max: float,
                 k_max: int = K_MAX_DEFAULT, series_atol: float = SERIES_ATOL) -> IuiEnsemble:
    classes = distance_classes(layout)
    if not classes:
        return IuiEnsemble(means=np.zeros(0), classes=())
    dist = np.array([d for d, _ in classes])
    mult = [n for _, n in classes]
    class_means = p.n_mol * np.asarray(cir(dist, t_max, p, k_max, atol=series_atol), dtype=float)
    if np.any(np.diff(class_means) > 0):
        logger.warning("interferer means not monotone in distance at d_hex=%g, t=%g",
                       layout.d_hex, t_max)
    return IuiEnsemble.from_classes(zip(class_means.tolist(), mult))


def enumerate_states(e: IuiEnsemble, cap: int = STATE_CAP) -> IuiStates:
    """All distinct aggregate means with their exact probabilities.

    Each state picks ``k_j`` active interferers in class ``j`` and has
    weight ``prod_j C(n_j, k_j) / 2**n_j``.

    Raises
    ------
    EnumerationCapError
        If ``prod_j (n_j + 1)`` exceeds ``cap``; use :func:`sample_states`.
    """
    if e.n_states > cap:
        raise EnumerationCapError(
            f"{e.n_states} IUI states exceed the cap of {cap}; sample instead")
    agg = np.zeros(1)
    w = np.ones(1)
    for mean, n in e.classes:
        k = np.arange(n + 1)
        wk = np.array([math.comb(n, int(j)) for j in k], dtype=float) / 2.0**n
        agg = (agg[:, None] + k[None, :] * mean).ravel()
        w = (w[:, None] * wk[None, :]).ravel()
    return IuiStates(aggregate=agg, weight=w, exact=True)


def sample_states(e: IuiEnsemble, n_samples: int = N_SAMPLES_DEFAULT,
                  seed: int = 0, block: int = 4096) -> IuiStates:
    """Monte Carlo IUI states: every interferer is active with probability 1/2.

    Draws are made in blocks of ``block`` samples, each from its own
    counter-based stream keyed by ``(seed, block index)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    out = np.empty(n_samples)
    for b, start in enumerate(range(0, n_samples, block)):
        m = min(block, n_samples - start)
        rng = block_generator(seed, b, stream="iui")
        bits = rng.integers(0, 2, size=(m, e.n_interferers), dtype=np.int8)
        out[start:start + m] = bits @ e.means if e.n_interferers else 0.0
    return IuiStates(aggregate=out, weight=np.full(n_samples, 1.0 / n_samples), exact=False)


def iui_states(e: IuiEnsemble, cap: int = STATE_CAP,
               n_samples: int = N_SAMPLES_DEFAULT, seed: int = 0) -> IuiStates:
    """Enumerate when the state count allows it, otherwise sample."""
    try:
        return enumerate_states(e, cap)
    except EnumerationCapError:
        logger.info("falling back to %d sampled IUI states (%d > cap)", n_samples, e.n_states)
        return sample_states(e, n_samples, seed)


def _log_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Log-domain convolution truncated to ``len(a)`` entries."""
    n = len(a)
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    bb = np.where(diff >= 0, b[np.clip(diff, 0, n - 1)], -np.inf)
    with np.errstate(invalid="ignore"):
        return special.logsumexp(a[None, :] + bb, axis=1)


def poisson_logpmf(mean: float, r_max: int) -> np.ndarray:
    r = np.arange(r_max + 1, dtype=float)
    return special.xlogy(r, mean) - mean - special.gammaln(r + 1)


def iui_count_logpmf(e: IuiEnsemble, r_max: int) -> np.ndarray:
    """Log pmf of the IUI molecule count on ``0..r_max``.

    Interferer ``i`` contributes ``0`` with probability 1/2 and a
    ``Pois(c_bar_i)`` count otherwise, independently of the others, so the
    count law is the convolution of these mixtures.  Entries up to ``r_max``
    are exact; no enumeration of activation vectors is needed.
    """
    out = np.full(r_max + 1, -np.inf)
    out[0] = 0.0
    log_half = -math.log(2.0)
    for mean, n in e.classes:
        single = log_half + poisson_logpmf(mean, r_max)
        single[0] = np.logaddexp(single[0], log_half)
        power = single
        while n:
            if n & 1:
                out = _log_convolve(out, power)
            n >>= 1
            if n:
                power = _log_convolve(power, power)
    return out
