import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aremc.channel import (ChannelParams, axial_fraction, cir, cir_curve, cir_uca,
                           concentration_kernel, find_sampling_time)
from aremc.errors import SamplingTimeError, SeriesConvergenceError
from aremc.oracles import cylinder_integral, series_limit

P = ChannelParams.table1(0.2)


def test_table1_geometry():
    assert (P.D, P.v, P.d, P.l_rx, P.n_mol, P.a_rx) == (0.01, 0.2, 0.5, 0.2, 100, 0.1)
    assert P.z_s == pytest.approx(0.4) and P.z_e == pytest.approx(0.6)
    assert P.z_e - P.z_s == pytest.approx(P.l_rx)
    assert P.volume == pytest.approx(math.pi * 0.002, rel=1e-14)


@pytest.mark.parametrize("kw", [dict(D=0), dict(a_rx=-1), dict(l_rx=0), dict(d=0), dict(n_mol=0)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        ChannelParams(**kw)


def test_kernel_peak_at_drifting_center():
    t = 1.7
    val = concentration_kernel(0.0, 0.0, 0.0, P.z0 + P.v * t, t, P)
    assert val == pytest.approx((4 * math.pi * P.D * t) ** -1.5, rel=1e-14)


def test_kernel_matches_cartesian_gaussian():
    rng = np.random.default_rng(3)
    for _ in range(100):
        r, r0, phi0, phi, z = rng.uniform([0, 0, 0, 0, -1], [1, 1, 6.3, 6.3, 2])
        t = rng.uniform(0.1, 5)
        x, y = r * math.cos(phi), r * math.sin(phi)
        x0, y0 = r0 * math.cos(phi0), r0 * math.sin(phi0)
        s2 = 4 * P.D * t
        ref = (math.pi * s2) ** -1.5 * math.exp(
            -((x - x0) ** 2 + (y - y0) ** 2 + (z - P.z0 - P.v * t) ** 2) / s2)
        val = concentration_kernel(r, r0, phi - phi0, z, t, P)
        assert val == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_kernel_integrates_to_one():
    # a cylinder of radius and half-length 10 sigma around the drifting center
    t = 2.0
    sig = math.sqrt(2 * P.D * t)
    big = ChannelParams(D=P.D, v=P.v, d=P.v * t, a_rx=10 * sig, l_rx=20 * sig)
    total = cylinder_integral(0.0, t, big, n_r=128, n_phi=64, n_z=128)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_kernel_rejects_non_positive_time():
    with pytest.raises(ValueError):
        concentration_kernel(0, 0, 0, 0.5, 0.0, P)


@pytest.mark.parametrize("t", [0.5, 1.8, 2.5, 6.0])
def test_on_axis_closed_form(t):
    ref = axial_fraction(t, P) * (1 - math.exp(-P.a_rx**2 / (4 * P.D * t)))
    assert cir(0.0, t, P) == pytest.approx(float(ref), rel=1e-14)


def test_vanishes_as_t_goes_to_zero():
    assert cir(0.2, 1e-4, P) == 0.0


def test_default_value_matches_integration_oracle():
    val = float(cir(0.0, 2.5, P))
    ref = cylinder_integral(0.0, 2.5, P)
    assert val == pytest.approx(ref, rel=1e-6)
    assert val == pytest.approx(0.0328577, rel=1e-5)


@pytest.mark.parametrize("r0", [0.2, 0.2 * math.sqrt(3), 0.4])
@pytest.mark.parametrize("t", [1.0, 2.0, 4.0])
def test_series_matches_quadrature_and_noncentral_chi2(r0, t):
    val = float(cir(r0, t, P))
    assert val == pytest.approx(cylinder_integral(r0, t, P), rel=1e-6)
    assert val == pytest.approx(float(series_limit(r0, t, P)), rel=1e-6)


@given(r0=st.floats(0, 1.0), t=st.floats(0.05, 15), k=st.integers(0, 25))
def test_bounds_and_partial_sum_monotonicity(r0, t, k):
    a = float(cir(r0, t, P, k, rtol=None))
    b = float(cir(r0, t, P, k + 1, rtol=None))
    assert 0.0 <= a <= b <= 1.0


def test_non_convergence_is_reported():
    with pytest.raises(SeriesConvergenceError):
        cir(0.2, 2.0, P, 0)
    # explicit opt-out for truncation studies
    assert cir(0.2, 2.0, P, 0, rtol=None) > 0


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        cir(0.1, 0.0, P)
    with pytest.raises(ValueError):
        cir(0.1, 1.0, P, -1)


def test_uca_volume_and_center():
    t = 2.0
    assert cir_uca(0.0, t, P) == pytest.approx(
        float(concentration_kernel(0, 0, 0, P.z_r, t, P)) * math.pi * 0.002, rel=1e-14)


def test_uca_deviates_near_receiver_and_improves_far_away():
    t = 1.8
    near = abs(cir_uca(0.2, t, P) - cir(0.2, t, P)) / cir(0.2, t, P)
    assert near > 0.03
    # far source (r0 = 10 a_rx): the gap shrinks as time spreads the cloud
    gaps = [abs(cir_uca(1.0, t, P) - cylinder_integral(1.0, t, P)) / cylinder_integral(1.0, t, P)
            for t in (2.0, 5.0, 8.0)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 0.1


def test_sampling_time_matches_dense_scan():
    t_max = find_sampling_time(P)
    times = 1e-3 * np.arange(1, 15001)
    scan = times[np.argmax(cir(0.0, times, P))]
    assert abs(t_max - scan) <= 1e-3
    assert 1.5 < t_max < P.d / P.v
    assert cir(0.0, t_max, P) >= cir(0.0, scan, P)


def test_sampling_time_advection_limit():
    assert find_sampling_time(ChannelParams.table1(0.2, D=1e-8)) == pytest.approx(2.5, abs=2e-3)


def test_more_diffusion_peaks_earlier():
    assert find_sampling_time(ChannelParams.table1(0.2, D=0.02)) < find_sampling_time(P)


def test_sampling_time_window_too_short():
    with pytest.raises(SamplingTimeError):
        find_sampling_time(P, t_sim=1.0)


def test_cir_curve_peak():
    times = np.linspace(0.1, 15, 300)
    c = cir_curve(0.2, times, P)
    assert c.peak_value >= c.values.max()
    assert np.all((c.values >= 0) & (c.values <= 1))
