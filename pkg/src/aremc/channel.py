"""Channel impulse response of a transparent cylindrical receiver.

Molecules are released at a point in the TX plane ``z = z0`` and move by
diffusion plus a uniform flow along ``z``.  The receiver RX0 is a cylinder
of radius ``a_rx`` centered on the z axis, spanning ``z_s < z < z_e``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize, special

from .errors import SamplingTimeError, SeriesConvergenceError

K_MAX_DEFAULT = 20
SERIES_RTOL = 1e-6
SERIES_ATOL = 1e-12


@dataclass(frozen=True)
class ChannelParams:
    """Physical parameters of one TX-RX link.

    Attributes
    ----------
    D : float
        Diffusion coefficient [m^2/s].
    v : float
        Flow velocity along ``z`` [m/s].
    z0 : float
        Position of the TX plane [m].
    d : float
        Separation of TX and RX planes [m].
    a_rx : float
        Receiver radius [m].
    l_rx : float
        Receiver length [m].
    n_mol : int
        Molecules released per ``1`` symbol.
    """

    D: float = 0.01
    v: float = 0.2
    z0: float = 0.0
    d: float = 0.5
    a_rx: float = 0.1
    l_rx: float = 0.2
    n_mol: int = 100

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError(f"D must be positive, got {self.D!r}")
        if not self.a_rx > 0:
            raise ValueError(f"a_rx must be positive, got {self.a_rx!r}")
        if not self.l_rx > 0:
            raise ValueError(f"l_rx must be positive, got {self.l_rx!r}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d!r}")
        if self.n_mol < 1 or int(self.n_mol) != self.n_mol:
            raise ValueError(f"n_mol must be a positive integer, got {self.n_mol!r}")

    @classmethod
    def table1(cls, d_hex: float = 0.2, **overrides) -> "ChannelParams":
        """Default parameters with the receiver radius tied to ``d_hex / 2``."""
        return replace(cls(a_rx=d_hex / 2.0), **overrides)

    def with_d_hex(self, d_hex: float) -> "ChannelParams":
        """Copy with touching receivers for cell distance ``d_hex``."""
        if not d_hex > 0:
            raise ValueError(f"d_hex must be positive, got {d_hex!r}")
        return replace(self, a_rx=d_hex / 2.0)

    @property
    def z_r(self) -> float:
        return self.z0 + self.d

    @property
    def z_s(self) -> float:
        return self.z_r - self.l_rx / 2.0

    @property
    def z_e(self) -> float:
        return self.z_r + self.l_rx / 2.0

    @property
    def volume(self) -> float:
        return self.a_rx**2 * math.pi * self.l_rx


@dataclass(frozen=True)
class CirCurve:
    r0: float
    times: np.ndarray
    values: np.ndarray
    t_max: float
    peak_value: float


def _check_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("times must be strictly positive")
    return t


def concentration_kernel(r, r0, dphi, z, t, p: ChannelParams):
    """Point-source concentration [1/m^3] in cylindrical coordinates.

    ``dphi`` is the angle between the field point and the source in the
    xy plane.  Broadcasts over all array arguments.
    """
    t = _check_times(t)
    r, r0, dphi, z = (np.asarray(a, dtype=float) for a in (r, r0, dphi, z))
    four_dt = 4.0 * p.D * t
    rho2 = r * r + r0 * r0 - 2.0 * r0 * r * np.cos(dphi)
    zeta = z - p.z0 - p.v * t
    return (math.pi * four_dt) ** -1.5 * np.exp(-(rho2 + zeta * zeta) / four_dt)


def _erf_diff(a, b):
    """``erf(a) - erf(b)`` without cancellation in the tails."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = special.erf(a) - special.erf(b)
    pos = (a >= 0) & (b >= 0)
    neg = (a <= 0) & (b <= 0)
    out = np.where(pos, special.erfc(b) - special.erfc(a), out)
    out = np.where(neg, special.erfc(-a) - special.erfc(-b), out)
    return out


def axial_fraction(t, p: ChannelParams):
    """Probability that the axial coordinate lies in ``(z_s, z_e)`` at time ``t``."""
    t = _check_times(t)
    s = np.sqrt(4.0 * p.D * t)
    c = p.z0 + p.v * t
    return 0.5 * _erf_diff((c - p.z_s) / s, (c - p.z_e) / s)


def radial_series_terms(r0, t, a_rx: float, D: float, k_max: int) -> np.ndarray:
    """Terms ``k = 0..k_max`` of the radial series, along a trailing axis.

    Term ``k`` is ``exp(-x) x**k / (k!)**2 * gamma(k+1, y)`` with
    ``x = r0**2/(4Dt)`` and ``y = a_rx**2/(4Dt)``, evaluated in log space as
    ``exp(k log x - x - log k!) * P(k+1, y)``.
    """
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    t = _check_times(t)
    four_dt = 4.0 * D * t
    x = np.asarray(r0, dtype=float) ** 2 / four_dt
    y = a_rx * a_rx / four_dt
    x, y = np.broadcast_arrays(x, y)
    k = np.arange(k_max + 1, dtype=float)
    xe, ye = x[..., None], y[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pois = np.where(xe > 0, k * np.log(xe) - xe - special.gammaln(k + 1), 0.0)
        log_pois = np.where((xe == 0) & (k > 0), -np.inf, log_pois)
        terms = np.exp(log_pois) * special.gammainc(k + 1, ye)
    return terms


def cir(r0, t, p: ChannelParams, k_max: int = K_MAX_DEFAULT, *,
        rtol: float | None = SERIES_RTOL, atol: float = SERIES_ATOL):
    """Expected fraction of one released molecule inside RX0 at time ``t``.

    Parameters
    ----------
    r0 : float or array
        Horizontal distance between the releasing TX and RX0 [m].
    t : float or array
        Time after release [s]; broadcast against ``r0``.
    k_max : int
        Index of the last retained series term.
    rtol, atol : float
        Non-convergence is reported when the last retained term, scaled by
        the axial factor, exceeds ``rtol * cir + atol``.  Pass ``rtol=None``
        to study truncation on purpose.

    Raises
    ------
    SeriesConvergenceError
        If the truncated series has not converged.
    """
    t = _check_times(t)
    r0 = np.asarray(r0, dtype=float)
    terms = radial_series_terms(r0, t, p.a_rx, p.D, k_max)
    axial = axial_fraction(t, p)
    axial, radial = np.broadcast_arrays(axial, terms.sum(axis=-1))
    value = axial * radial
    if rtol is not None and k_max >= 0:
        last = np.broadcast_to(axial * terms[..., -1], value.shape)
        source_on_axis = np.broadcast_to(r0 == 0, value.shape)
        bad = (last > rtol * value + atol) & ~source_on_axis
        if np.any(bad):
            i = np.flatnonzero(bad)[0]
            raise SeriesConvergenceError(
                f"CIR series not converged at k_max={k_max}: last term "
                f"{last.flat[i]:.3e} vs value {value.flat[i]:.3e} "
                f"(r0={np.broadcast_to(r0, value.shape).flat[i]:g} m, "
                f"t={np.broadcast_to(t, value.shape).flat[i]:g} s)")
    return value[()] if value.ndim == 0 else value


def cir_uca(r0, t, p: ChannelParams):
    """CIR under the uniform concentration assumption.

    Concentration at the receiver center times the receiver volume; not
    bounded by one.
    """
    return concentration_kernel(0.0, r0, 0.0, p.z_r, t, p) * p.volume


def _peak_time(r0: float, p: ChannelParams, k_max: int, t_sim: float, dt: float,
               rtol=SERIES_RTOL) -> float:
    times = dt * np.arange(1, int(round(t_sim / dt)) + 1)
    values = cir(r0, times, p, k_max, rtol=rtol)
    i = int(np.argmax(values))
    if i == len(times) - 1:
        raise SamplingTimeError(
            f"CIR maximum at the end of the window t_sim={t_sim:g} s; increase t_sim")
    top = np.flatnonzero(values == values[i])
    if len(top) > 1:
        # flat maximum (e.g. D -> 0): take the middle of the plateau
        if top[-1] == len(times) - 1:
            raise SamplingTimeError(
                f"CIR maximum reaches the end of the window t_sim={t_sim:g} s")
        return float(0.5 * (times[top[0]] + times[top[-1]]))
    if i == 0:
        lo, mid, hi = 0.5 * times[0], times[0], times[1]
    else:
        lo, mid, hi = times[i - 1], times[i], times[i + 1]
    res = optimize.minimize_scalar(lambda s: -float(cir(r0, s, p, k_max, rtol=rtol)),
                                   bracket=(lo, mid, hi), method="golden",
                                   options={"xtol": 1e-10})
    t_best = float(res.x)
    if not lo <= t_best <= hi or -res.fun < values[i]:
        t_best = float(times[i])
    return t_best


def find_sampling_time(p: ChannelParams, k_max: int = K_MAX_DEFAULT,
                       t_sim: float = 15.0, dt: float = 1e-3) -> float:
    """Time at which the TX0 -> RX0 CIR peaks.

    A grid scan with step ``dt`` over ``(0, t_sim]`` is refined by golden
    section search on the bracketing interval.

    Raises
    ------
    SamplingTimeError
        If the grid maximum is the last grid point.
    """
    return _peak_time(0.0, p, k_max, t_sim, dt)


def cir_curve(r0: float, times, p: ChannelParams, k_max: int = K_MAX_DEFAULT,
              t_sim: float = 15.0, dt: float = 1e-3, *, rtol=SERIES_RTOL) -> CirCurve:
    times = _check_times(times)
    values = np.asarray(cir(r0, times, p, k_max, rtol=rtol), dtype=float)
    t_max = _peak_time(r0, p, k_max, t_sim, dt, rtol)
    peak = float(cir(r0, t_max, p, k_max, rtol=rtol))
    return CirCurve(r0=float(r0), times=times, values=values, t_max=t_max, peak_value=peak)
