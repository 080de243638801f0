"""Independent reference computations used to cross-check the fast paths.

Nothing here is used by the production pipeline; these routines exist so
that tests and ``aremc validate`` can compare against a route that shares
no code with the series, the class-collapsed enumeration or the threshold
search.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import stats

from .channel import ChannelParams, concentration_kernel


def cylinder_integral(r0: float, t: float, p: ChannelParams,
                      n_r: int = 96, n_phi: int = 256, n_z: int = 96) -> float:
    """Brute-force 3D quadrature of the concentration kernel over RX0.

    Gauss-Legendre in ``r`` and ``z``, periodic trapezoid in ``phi``.
    """
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    xz, wz = np.polynomial.legendre.leggauss(n_z)
    r = 0.5 * p.a_rx * (xr + 1.0)
    wr = 0.5 * p.a_rx * wr
    z = p.z_s + 0.5 * p.l_rx * (xz + 1.0)
    wz = 0.5 * p.l_rx * wz
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * math.pi / n_phi
    c = concentration_kernel(r[:, None, None], r0, phi[None, :, None],
                             z[None, None, :], t, p)
    return float(np.einsum("i,ijk,k->", wr * r, c, wz) * wphi)


def series_limit(r0, t, p: ChannelParams):
    """Untruncated CIR via the noncentral chi-square CDF.

    The full radial series equals ``P[|X| <= a_rx]`` for a 2D Gaussian with
    per-axis variance ``2Dt`` centered at distance ``r0``.
    """
    from .channel import axial_fraction

    t = np.asarray(t, dtype=float)
    var = 2.0 * p.D * t
    radial = stats.ncx2.cdf(p.a_rx**2 / var, df=2, nc=np.asarray(r0, float) ** 2 / var)
    return axial_fraction(t, p) * radial


def brute_force_states(means):
    """All ``2**n`` activation vectors with their aggregate means.

    Returns ``(aggregate, weight)`` arrays with uniform weights ``2**-n``.
    """
    means = np.asarray(means, dtype=float)
    n = len(means)
    if n > 20:
        raise ValueError("brute force enumeration limited to 20 interferers")
    bits = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float).reshape(2**n, n)
    return bits @ means, np.full(len(bits), 2.0**-n)


def brute_force_ml(r: int, c_bar_s: float, means) -> int:
    """ML decision by direct summation of Poisson masses over all states."""
    agg, _ = brute_force_states(means)
    num = stats.poisson.pmf(r, c_bar_s + agg).sum()
    den = stats.poisson.pmf(r, agg).sum()
    if num == 0.0 and den == 0.0:
        # Both sums underflowed: fall back to log space.
        ln = stats.poisson.logpmf(r, c_bar_s + agg)
        ld = stats.poisson.logpmf(r, agg)
        return int(np.logaddexp.reduce(ln) >= np.logaddexp.reduce(ld))
    return int(num >= den)


def brute_force_error_probabilities(theta: int, c_bar_s: float, means):
    """``(p, q)`` from Poisson CDFs summed over every activation vector."""
    agg, w = brute_force_states(means)
    if theta == 0:
        return 1.0, 0.0
    q = float(np.sum(w * stats.poisson.cdf(theta - 1, c_bar_s + agg)))
    p = float(np.sum(w * stats.poisson.sf(theta - 1, agg)))
    return p, q
