"""Desk-scale oracle checks with a machine-readable report.

Each check compares a production route with an independent one and
records the measured deviation next to its tolerance.  ``tolerance_scale``
multiplies every tolerance, so a value below one tightens the suite and
shows how much headroom each check has.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import asdict, dataclass
from unittest import mock

import numpy as np

from . import channel
from .channel import ChannelParams, cir
from .detector import CountLaw, compute_threshold, log_mixture_mass, ml_decide, threshold_decide
from .iui import IuiEnsemble, enumerate_states
from .metrics import error_probabilities, evaluate_link
from .montecarlo import McConfig, run_mc
from .oracles import (brute_force_error_probabilities, brute_force_ml, brute_force_states,
                      cylinder_integral)
from .rng import block_generator

FAULTS = ("erf-denominator",)


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _faulty_axial(t, p: ChannelParams):
    # Wrong spread in the erf arguments: sqrt(2Dt) in place of sqrt(4Dt).
    t = np.asarray(t, dtype=float)
    s = np.sqrt(2.0 * p.D * t)
    c = p.z0 + p.v * t
    return 0.5 * channel._erf_diff((c - p.z_s) / s, (c - p.z_e) / s)


@contextlib.contextmanager
def injected(fault: str | None):
    if fault is None:
        yield
        return
    if fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    with mock.patch.object(channel, "axial_fraction", _faulty_axial):
        yield


def check_series_vs_integration(scale: float = 1.0) -> Check:
    p = ChannelParams.table1(0.2)
    worst = 0.0
    for r0 in (0.0, 0.2, 0.2 * math.sqrt(3.0)):
        for t in (1.0, 2.0, 2.5, 4.0):
            ref = cylinder_integral(r0, t, p, n_r=48, n_phi=128, n_z=48)
            val = float(cir(r0, t, p, rtol=None))
            worst = max(worst, abs(val - ref) / ref)
    tol = 1e-6 * scale
    return Check("series_vs_integration", worst <= tol, worst, tol,
                 "max relative deviation, d_hex=0.2, 12 points")


def _random_ensembles(n_configs: int, max_n: int, seed: int):
    for i in range(n_configs):
        rng = block_generator(seed, i, stream="validate")
        n = int(rng.integers(0, max_n + 1))
        yield rng.uniform(0.0, 1.0, size=n)


def check_ml_vs_threshold(scale: float = 1.0, seed: int = 0) -> Check:
    r = np.arange(501)
    mismatches = 0
    # Interferers sit farther away than TX0, so their means stay below c.
    for frac in _random_ensembles(8, 6, seed):
        for c in (0.5, 2.0, 5.0, 20.0):
            means = frac * c
            states = enumerate_states(IuiEnsemble.from_means(means))
            theta = compute_threshold(c, states)
            ml = np.array([ml_decide(int(x), c, states) for x in r])
            mismatches += int(np.sum(ml != threshold_decide(r, theta)))
            # independent oracle on a few counts
            for x in (0, theta - 1, theta, theta + 1):
                if x >= 0 and brute_force_ml(x, c, means) != ml[x]:
                    mismatches += 1
    # exact agreement is required, so the tolerance does not scale
    return Check("ml_vs_threshold", mismatches == 0, float(mismatches), 0.0,
                 "decision mismatches over r in [0, 500]")


def check_enumeration_vs_brute_force(scale: float = 1.0, seed: int = 0) -> Check:
    worst = 0.0
    for means in _random_ensembles(8, 10, seed + 1):
        means = np.round(8.0 * means, 1)  # force repeated values into shared classes
        states = enumerate_states(IuiEnsemble.from_means(means))
        agg, w = brute_force_states(means)
        for f in (lambda a: np.exp(-a), np.sin, np.square):
            worst = max(worst, abs(states.expect(f) - float(np.sum(w * f(agg)))))
        p, q = error_probabilities(3, 2.0, states)
        pb, qb = brute_force_error_probabilities(3, 2.0, means)
        worst = max(worst, abs(p - pb), abs(q - qb))
    tol = 1e-12 * scale
    return Check("enumeration_vs_brute_force", worst <= tol, worst, tol,
                 "max absolute deviation of expectations")


def check_convolution_vs_enumeration(scale: float = 1.0) -> Check:
    e = IuiEnsemble.from_classes([(3.0, 6), (1.2, 6), (0.5, 12)])
    law = CountLaw.from_ensemble(4.0, e, 120)
    states = enumerate_states(e)
    r = np.arange(121)
    ref0 = np.exp(log_mixture_mass(r, 0.0, states))
    ref1 = np.exp(log_mixture_mass(r, 4.0, states))
    worst = float(max(np.max(np.abs(np.exp(law.log_pmf0) - ref0)),
                      np.max(np.abs(np.exp(law.log_pmf1) - ref1))))
    tol = 1e-12 * scale
    return Check("convolution_vs_enumeration", worst <= tol, worst, tol,
                 "max absolute pmf deviation")


def check_no_iui(scale: float = 1.0) -> Check:
    m = evaluate_link(0.2, 0, ChannelParams.table1(0.2))
    ref = 0.5 * math.exp(-m.c_bar_s)
    dev = max(abs(m.ber - ref), abs(m.q - math.exp(-m.c_bar_s)), abs(m.p), abs(m.theta - 1))
    tol = 1e-12 * scale
    return Check("no_iui_closed_form", dev <= tol, dev, tol, "theta=1, p=0, q=exp(-c_s)")


def check_mc_vs_analytical(scale: float = 1.0, seed: int = 0) -> Check:
    p = ChannelParams(n_mol=100)
    an = evaluate_link(1.0, 3, p)
    mc = run_mc(McConfig(n_realizations=100_000, n_rings=3, seed=seed), 1.0, p)
    ber, _, _, _ = mc.at(an.theta)
    se = math.sqrt(an.ber * (1 - an.ber) / mc.n_realizations)
    z = abs(ber - an.ber) / se if se > 0 else abs(ber - an.ber)
    tol = 3.0 * scale
    return Check("mc_vs_analytical", z <= tol, z, tol,
                 f"|BER gap| in standard errors, d_hex=1, 36 interferers, theta={an.theta}")


def run_validation(tolerance_scale: float = 1.0, fault: str | None = None,
                   seed: int = 0) -> dict:
    """Run every check and return ``{"passed": bool, "checks": [...]}``."""
    with injected(fault):
        checks = [
            check_series_vs_integration(tolerance_scale),
            check_ml_vs_threshold(tolerance_scale, seed),
            check_enumeration_vs_brute_force(tolerance_scale, seed),
            check_convolution_vs_enumeration(tolerance_scale),
            check_no_iui(tolerance_scale),
            check_mc_vs_analytical(tolerance_scale, seed),
        ]
    return {"passed": all(c.passed for c in checks),
            "fault": fault, "tolerance_scale": tolerance_scale,
            "checks": [asdict(c) for c in checks]}
