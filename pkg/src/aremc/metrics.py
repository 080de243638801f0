"""Link error rates, user rate, spatial multiplexing rate and ARE."""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .channel import K_MAX_DEFAULT, ChannelParams, cir, find_sampling_time
from .detector import (THETA_MAX_DEFAULT, CountLaw, _as_states, compute_threshold,
                       threshold_from_counts)
from .errors import NumericalError
from .grid import build_layout, cell_area
from .iui import N_SAMPLES_DEFAULT, STATE_CAP, iui_ensemble, sample_states, signal_mean, enumerate_states

LN2 = math.log(2.0)
# Absolute CIR error per molecule that is immaterial for link metrics.
PIPELINE_SERIES_ATOL = 1e-6


@dataclass(frozen=True)
class LinkMetrics:
    d_hex: float
    n_mol: int
    n_rings: int
    t_max: float
    c_bar_s: float
    theta: int
    p: float
    q: float
    ber: float
    user_rate: float
    spatial_rate: float
    are: float
    exact: bool = True


def error_probabilities(theta: int, c_bar_s: float, e) -> tuple[float, float]:
    """False alarm ``p`` and miss ``q`` of the threshold detector.

    ``q = E[P(Pois(c_bar_s + agg) <= theta - 1)]`` and
    ``p = E[P(Pois(agg) >= theta)]``; ``theta = 0`` always decides 1.
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    states = _as_states(e)
    if theta == 0:
        return 1.0, 0.0
    q = states.expect(lambda a: special.pdtr(theta - 1, c_bar_s + a))
    p = states.expect(lambda a: special.pdtrc(theta - 1, a))
    return p, q


def error_probabilities_from_counts(theta: int, law: CountLaw) -> tuple[float, float]:
    """``(p, q)`` from count pmfs; needs ``theta <= law.r_max + 1``."""
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if theta > law.r_max + 1:
        raise ValueError("count law too short for theta")
    if theta == 0:
        return 1.0, 0.0
    below0 = float(np.exp(special.logsumexp(law.log_pmf0[:theta])))
    q = float(np.exp(special.logsumexp(law.log_pmf1[:theta])))
    return max(0.0, 1.0 - below0), min(1.0, q)


def bit_error_rate(p: float, q: float) -> float:
    return 0.5 * (p + q)


def _h2(x) -> float:
    return float((special.entr(x) + special.entr(1.0 - x)) / LN2)


def user_rate(p: float, q: float) -> float:
    """Mutual information of the binary channel for equiprobable inputs [bit].

    ``H(s_hat) - H(s_hat | s)`` with ``p = P(1|0)`` and ``q = P(0|1)``.
    """
    for name, x in (("p", p), ("q", q)):
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return _h2(0.5 * (1.0 - p + q)) - 0.5 * (_h2(p) + _h2(q))


def spatial_rate(d_hex: float) -> float:
    """Links per square meter, ``2 / (sqrt(3) d_hex**2)``."""
    return 1.0 / cell_area(d_hex)


def are(user_rate: float, spatial_rate: float) -> float:
    return user_rate * spatial_rate


@functools.lru_cache(maxsize=1024)
def _sampling_time(p: ChannelParams, k_max: int, t_sim: float, dt: float) -> float:
    return find_sampling_time(p, k_max, t_sim, dt)


def sampling_time(p: ChannelParams, k_max: int = K_MAX_DEFAULT,
                  t_sim: float = 15.0, dt: float = 1e-3) -> float:
    """Cached :func:`find_sampling_time`; independent of ``n_mol``."""
    return _sampling_time(replace(p, n_mol=1), k_max, t_sim, dt)


def evaluate_link(d_hex: float, n_rings: int, p: ChannelParams,
                  k_max: int = K_MAX_DEFAULT, *, theta_max: int = THETA_MAX_DEFAULT,
                  scale_receiver: bool = True, state_cap: int = STATE_CAP,
                  n_samples: int = N_SAMPLES_DEFAULT, seed: int = 0,
                  t_sim: float = 15.0, dt: float = 1e-3,
                  series_atol: float = PIPELINE_SERIES_ATOL,
                  large_ensemble: str = "convolve") -> LinkMetrics:
    """Grid -> CIR -> sampling time -> IUI states -> threshold -> rates.

    With ``scale_receiver`` the receiver radius is set to ``d_hex / 2``.
    ``series_atol`` is the absolute CIR truncation error tolerated before a
    :class:`SeriesConvergenceError` is raised; the 21-term series leaves up
    to ~3e-7 per molecule around ``d_hex = 1.8`` m.
    IUI states are enumerated exactly up to ``state_cap``.  Beyond it,
    ``large_ensemble="convolve"`` switches to the exact count-domain law and
    ``"sample"`` to ``n_samples`` sampled states (``exact=False``).
    """
    if large_ensemble not in ("convolve", "sample"):
        raise ValueError(f"unknown large_ensemble mode {large_ensemble!r}")
    if scale_receiver:
        p = p.with_d_hex(d_hex)
    try:
        t_max = sampling_time(p, k_max, t_sim, dt)
        sig = signal_mean(p, float(cir(0.0, t_max, p, k_max)))
        ens = iui_ensemble(build_layout(d_hex, n_rings), p, t_max, k_max, series_atol)
        exact = True
        if ens.n_states <= state_cap:
            states = enumerate_states(ens, state_cap)
            theta = compute_threshold(sig.c_bar_s, states, theta_max)
            pe, qe = error_probabilities(theta, sig.c_bar_s, states)
        elif large_ensemble == "convolve":
            law = CountLaw.from_ensemble(sig.c_bar_s, ens, theta_max)
            theta = threshold_from_counts(law, theta_max)
            pe, qe = error_probabilities_from_counts(theta, law)
        else:
            states = sample_states(ens, n_samples, seed)
            theta = compute_threshold(sig.c_bar_s, states, theta_max)
            pe, qe = error_probabilities(theta, sig.c_bar_s, states)
            exact = False
    except NumericalError as exc:
        raise type(exc)(f"d_hex={d_hex:g}, n_rings={n_rings}, N={p.n_mol}: {exc}") from exc
    rate = user_rate(pe, qe)
    srate = spatial_rate(d_hex)
    return LinkMetrics(d_hex=float(d_hex), n_mol=p.n_mol, n_rings=n_rings, t_max=t_max,
                       c_bar_s=sig.c_bar_s, theta=theta, p=pe, q=qe,
                       ber=bit_error_rate(pe, qe), user_rate=rate, spatial_rate=srate,
                       are=are(rate, srate), exact=exact)


def d_hex_grid(d_min: float = 0.05, d_max: float = 5.0, n: int = 100) -> np.ndarray:
    return np.geomspace(d_min, d_max, n)


def sweep(d_grid, n_rings: int, p: ChannelParams, k_max: int = K_MAX_DEFAULT,
          executor=None, **kwargs) -> list[LinkMetrics]:
    """Evaluate the link at every ``d_hex``; output order follows ``d_grid``."""
    fn = functools.partial(evaluate_link, n_rings=n_rings, p=p, k_max=k_max, **kwargs)
    if executor is None:
        return [fn(float(d)) for d in d_grid]
    return list(executor.map(fn, [float(d) for d in d_grid]))


def merge_plateaus(values, rtol: float = 1e-12) -> np.ndarray:
    """Collapse runs of (relatively) equal consecutive values to one entry."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values
    keep = [0]
    for i in range(1, len(values)):
        prev = values[keep[-1]]
        if abs(values[i] - prev) > rtol * max(abs(prev), abs(values[i])):
            keep.append(i)
    return values[keep]


def collapse_runs(values, keys) -> np.ndarray:
    """Maximum of ``values`` over each run of equal consecutive ``keys``.

    With ``keys`` the detection threshold along a sweep, each run is one
    integer-threshold segment of the curve.
    """
    values = np.asarray(values, dtype=float)
    keys = np.asarray(keys)
    if values.shape != keys.shape:
        raise ValueError("values and keys must have the same shape")
    if values.size == 0:
        return values
    starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
    return np.maximum.reduceat(values, starts)


def interior_maxima(values, rtol: float = 1e-12, keys=None) -> int:
    """Number of strict interior local maxima after merging plateaus.

    If ``keys`` is given, runs of equal keys are first collapsed to their
    maximum (see :func:`collapse_runs`).
    """
    if keys is not None:
        values = collapse_runs(values, keys)
    v = merge_plateaus(values, rtol)
    if v.size < 3:
        return 0
    return int(np.sum((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])))


@dataclass(frozen=True)
class Optimum:
    d_hex_opt: float
    are_max: float
    interior: bool
    d_grid: np.ndarray
    are_values: np.ndarray


def optimize_d_hex(are_of, d_range=(0.05, 5.0), grid_points: int = 100) -> Optimum:
    """Grid maximizer of ``are_of(d_hex)`` over a log-spaced grid.

    ``are_of`` may also be a precomputed sequence of ARE values matching
    the grid.  A maximizer on the grid boundary triggers a warning.
    """
    d = d_hex_grid(d_range[0], d_range[1], grid_points)
    if callable(are_of):
        values = np.array([are_of(float(x)) for x in d], dtype=float)
    else:
        values = np.asarray(are_of, dtype=float)
        if values.shape != d.shape:
            raise ValueError("ARE values do not match the grid")
    i = int(np.argmax(values))
    interior = 0 < i < len(d) - 1
    if not interior:
        warnings.warn(f"ARE maximum on the grid boundary d_hex={d[i]:g}; widen the range",
                      RuntimeWarning, stacklevel=2)
    return Optimum(float(d[i]), float(values[i]), interior, d, values)
