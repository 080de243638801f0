"""Particle-based simulation of drifting Brownian molecules.

Molecules are released at a transmitter cell center on the TX plane and
counted, without absorption, whenever they sit inside the cylindrical
receiver of the reference cell at the origin.

Free Brownian motion with constant drift has Gaussian increments over any
interval, so positions are only drawn at the recorded instants.  With
``record_every = k`` the increment over ``k * dt`` is drawn in one piece;
this is exact in distribution and only coarsens the time axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .channel import ChannelParams
from .grid import GridLayout, OffsetCoord, offset_to_cartesian
from .rng import block_generator


@dataclass(frozen=True)
class PbsConfig:
    dt: float = 1e-3
    t_sim: float = 15.0
    n_particles: int = 100
    n_realizations: int = 3000
    seed: int = 0
    record_every: int = 1
    release_position: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not self.dt > 0 or self.t_sim < self.dt:
            raise ValueError("need dt > 0 and t_sim >= dt")
        if self.n_particles < 1 or self.n_realizations < 1 or self.record_every < 1:
            raise ValueError("particle, realization and stride counts must be >= 1")

    @property
    def n_steps(self) -> int:
        # round() guards against 15.0 / 1e-3 = 14999.999...
        return int(round(self.t_sim / self.dt))

    @property
    def step_indices(self) -> np.ndarray:
        return np.arange(self.record_every, self.n_steps + 1, self.record_every)

    @property
    def times(self) -> np.ndarray:
        return self.step_indices * self.dt


@dataclass(frozen=True)
class PbsCirEstimate:
    """Empirical CIR: fraction of released molecules inside the receiver.

    ``counts`` holds the pooled number of molecules found inside at each
    time over ``n_particles * n_realizations`` trials.
    """

    times: np.ndarray
    mean_fraction: np.ndarray
    std_error: np.ndarray
    counts: np.ndarray
    n_particles: int
    n_realizations: int

    @property
    def n_trials(self) -> int:
        return self.n_particles * self.n_realizations

    def band(self, level: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
        return wilson_band(self.counts, self.n_trials, level)


def wilson_band(successes, n: int, level: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise Wilson score interval for a binomial proportion.

    Unlike the normal interval it stays non-degenerate at zero counts.
    """
    z = stats.norm.ppf(0.5 + level / 2.0)
    k = np.asarray(successes, dtype=float)
    phat = k / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    lo = np.where(k == 0, 0.0, np.clip(center - half, 0.0, 1.0))
    hi = np.where(k == n, 1.0, np.clip(center + half, 0.0, 1.0))
    return lo, hi


def step_particle(pos, dt: float, D: float, v: float, rng: np.random.Generator) -> np.ndarray:
    """One Euler-Maruyama step for positions of shape ``(..., 3)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if D < 0:
        raise ValueError("D must be non-negative")
    pos = np.asarray(pos, dtype=float)
    out = pos + rng.standard_normal(pos.shape) * math.sqrt(2.0 * D * dt) if D > 0 else pos.copy()
    out[..., 2] += v * dt
    return out


def inside_receiver(pos, rx_center_xy, p: ChannelParams):
    """Membership in the receiver cylinder (radial edge inclusive, axial edges exclusive)."""
    pos = np.asarray(pos, dtype=float)
    cx, cy = rx_center_xy
    rr = (pos[..., 0] - cx) ** 2 + (pos[..., 1] - cy) ** 2
    z = pos[..., 2]
    res = (rr <= p.a_rx**2) & (z > p.z_s) & (z < p.z_e)
    return bool(res) if res.ndim == 0 else res


def release_point(cfg: PbsConfig, p: ChannelParams, source: OffsetCoord | tuple,
                  layout: GridLayout) -> np.ndarray:
    if cfg.release_position is not None:
        return np.asarray(cfg.release_position, dtype=float)
    x, y = offset_to_cartesian((source[0], source[1]), layout.d_hex)
    return np.array([x, y, p.z0])


def _realization_counts(cfg: PbsConfig, p: ChannelParams, start: np.ndarray,
                        index: int, D: float) -> np.ndarray:
    idx = cfg.step_indices
    times = idx * cfg.dt
    n = cfg.n_particles
    pos = np.empty((len(idx), n, 3))
    pos[:] = start
    pos[:, :, 2] += (p.v * times)[:, None]
    if D > 0:
        rng = block_generator(cfg.seed, index, stream="pbs")
        lags = np.diff(np.concatenate(([0], idx))) * cfg.dt
        incr = rng.standard_normal((len(idx), n, 3))
        incr *= np.sqrt(2.0 * D * lags)[:, None, None]
        pos += np.cumsum(incr, axis=0)
    return inside_receiver(pos, (0.0, 0.0), p).sum(axis=1)


def estimate_cir(cfg: PbsConfig, p: ChannelParams, source: OffsetCoord | tuple,
                 layout: GridLayout, executor=None, *, D: float | None = None) -> PbsCirEstimate:
    """Average receiver occupancy over ``cfg.n_realizations`` releases.

    ``D`` overrides ``p.D`` for the stepping only; ``D=0`` gives purely
    ballistic transport.

    Each realization has its own counter-based stream, and per-realization
    counts are summed in realization order, so the result does not depend
    on ``executor``.
    """
    D = p.D if D is None else float(D)
    if D < 0:
        raise ValueError("D must be non-negative")
    start = release_point(cfg, p, source, layout)
    work = range(cfg.n_realizations)

    def one(i):
        return _realization_counts(cfg, p, start, i, D)

    per = list(executor.map(one, work)) if executor is not None else [one(i) for i in work]
    counts = np.stack(per).astype(np.int64)  # (realizations, times)
    frac = counts / cfg.n_particles
    mean = frac.mean(axis=0)
    if cfg.n_realizations > 1:
        se = frac.std(axis=0, ddof=1) / math.sqrt(cfg.n_realizations)
    else:
        se = np.full_like(mean, np.nan)
    return PbsCirEstimate(times=cfg.times, mean_fraction=mean, std_error=se,
                          counts=counts.sum(axis=0), n_particles=cfg.n_particles,
                          n_realizations=cfg.n_realizations)
