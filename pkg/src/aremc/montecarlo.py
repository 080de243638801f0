"""Symbol-level Monte Carlo simulation of the multiuser link.

Every realization draws the TX0 bit and the bits of all interferers, draws
the desired and interfering molecule counts from Poisson laws with the
CIR-derived means, and tallies the errors of the threshold detector for
every threshold up to ``theta_scan_max``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import K_MAX_DEFAULT, ChannelParams, cir
from .detector import THETA_MAX_DEFAULT
from .grid import build_layout
from .iui import iui_ensemble
from .metrics import PIPELINE_SERIES_ATOL, evaluate_link, sampling_time, spatial_rate, user_rate
from .rng import block_generator

BLOCK = 4096


@dataclass(frozen=True)
class McConfig:
    n_realizations: int = 10**5
    n_rings: int = 20
    theta_scan_max: int = THETA_MAX_DEFAULT
    seed: int = 0

    def __post_init__(self):
        if self.n_realizations < 1 or self.n_rings < 0 or self.theta_scan_max < 1:
            raise ValueError(f"invalid Monte Carlo configuration: {self}")


@dataclass(frozen=True)
class McResult:
    """Empirical error rates for every threshold ``0..theta_scan_max``.

    ``ber_by_theta`` is the overall error fraction; ``p_by_theta`` and
    ``q_by_theta`` are conditioned on the transmitted TX0 bit.
    """

    best_theta: int
    ber: float
    p_hat: float
    q_hat: float
    ber_by_theta: np.ndarray
    std_errors: np.ndarray
    p_by_theta: np.ndarray
    q_by_theta: np.ndarray
    n0: int
    n1: int
    c_bar_s: float
    n_interferers: int

    @property
    def n_realizations(self) -> int:
        return self.n0 + self.n1

    def at(self, theta: int) -> tuple[float, float, float, float]:
        """``(ber, p_hat, q_hat, se)`` of the detector with threshold ``theta``."""
        return (float(self.ber_by_theta[theta]), float(self.p_by_theta[theta]),
                float(self.q_by_theta[theta]), float(self.std_errors[theta]))


def simulate_counts(c_bar_s: float, means, n_realizations: int, seed: int):
    """Draw ``(s0, r)`` for ``n_realizations`` independent symbol intervals.

    Work is split into fixed blocks with one counter-based stream per block.
    """
    means = np.asarray(means, dtype=float)
    s0 = np.empty(n_realizations, dtype=np.int8)
    r = np.empty(n_realizations, dtype=np.int64)
    for b, start in enumerate(range(0, n_realizations, BLOCK)):
        m = min(BLOCK, n_realizations - start)
        rng = block_generator(seed, b, stream="mc")
        s = rng.integers(0, 2, size=m, dtype=np.int8)
        bits = rng.integers(0, 2, size=(m, len(means)), dtype=np.int8)
        agg = bits @ means if len(means) else np.zeros(m)
        r[start:start + m] = rng.poisson(s * c_bar_s) + rng.poisson(agg)
        s0[start:start + m] = s
    return s0, r


def tally(s0, r, theta_max: int) -> McResult:
    s0 = np.asarray(s0)
    r = np.minimum(np.asarray(r), theta_max + 1)
    h0 = np.bincount(r[s0 == 0], minlength=theta_max + 2)
    h1 = np.bincount(r[s0 == 1], minlength=theta_max + 2)
    n0, n1 = int(h0.sum()), int(h1.sum())
    # count of r < theta for theta = 0..theta_max
    below0 = np.concatenate(([0], np.cumsum(h0)[:theta_max]))
    below1 = np.concatenate(([0], np.cumsum(h1)[:theta_max]))
    errors = (n0 - below0) + below1
    n = n0 + n1
    ber = errors / n
    with np.errstate(invalid="ignore", divide="ignore"):
        p = (n0 - below0) / n0
        q = below1 / n1
    se = np.sqrt(ber * (1.0 - ber) / n)
    best = int(np.argmin(ber))
    return McResult(best_theta=best, ber=float(ber[best]), p_hat=float(p[best]),
                    q_hat=float(q[best]), ber_by_theta=ber, std_errors=se,
                    p_by_theta=p, q_by_theta=q, n0=n0, n1=n1,
                    c_bar_s=float("nan"), n_interferers=0)


def run_mc(cfg: McConfig, d_hex: float, p: ChannelParams, k_max: int = K_MAX_DEFAULT,
           scale_receiver: bool = True, series_atol: float = PIPELINE_SERIES_ATOL) -> McResult:
    if scale_receiver:
        p = p.with_d_hex(d_hex)
    t_max = sampling_time(p, k_max)
    c_bar_s = p.n_mol * float(cir(0.0, t_max, p, k_max))
    ens = iui_ensemble(build_layout(d_hex, cfg.n_rings), p, t_max, k_max, series_atol)
    s0, r = simulate_counts(c_bar_s, ens.means, cfg.n_realizations, cfg.seed)
    res = tally(s0, r, cfg.theta_scan_max)
    return McResult(**{**res.__dict__, "c_bar_s": c_bar_s, "n_interferers": ens.n_interferers})


MC_SWEEP_COLUMNS = ("d_hex", "theta_best", "theta_analytical", "ber_mc", "ber_analytical",
                    "p_hat", "q_hat", "user_rate", "are", "se_ber",
                    "ber_mc_at_theta_analytical", "se_ber_at_theta_analytical")


def mc_are_sweep(cfg: McConfig, d_hex_grid, p: ChannelParams, k_max: int = K_MAX_DEFAULT,
                 analytical_rings: int = 3, executor=None, scale_receiver: bool = True,
                 series_atol: float = PIPELINE_SERIES_ATOL) -> list[dict]:
    """Monte Carlo BER/ARE markers next to the analytical values.

    The user rate is formed from the empirical ``p_hat`` and ``q_hat`` at the
    BER-minimizing threshold of the scan.
    """
    def point(d):
        mc = run_mc(cfg, d, p, k_max, scale_receiver, series_atol)
        an = evaluate_link(d, analytical_rings, p, k_max, theta_max=cfg.theta_scan_max,
                           scale_receiver=scale_receiver, series_atol=series_atol)
        rate = user_rate(mc.p_hat, mc.q_hat)
        b_an, _, _, se_an = mc.at(an.theta)
        return {"d_hex": d, "theta_best": mc.best_theta, "theta_analytical": an.theta,
                "ber_mc": mc.ber, "ber_analytical": an.ber, "p_hat": mc.p_hat,
                "q_hat": mc.q_hat, "user_rate": rate, "are": rate * spatial_rate(d),
                "se_ber": float(mc.std_errors[mc.best_theta]),
                "ber_mc_at_theta_analytical": b_an, "se_ber_at_theta_analytical": se_an}

    grid = [float(d) for d in d_hex_grid]
    if executor is None:
        return [point(d) for d in grid]
    return list(executor.map(point, grid))
