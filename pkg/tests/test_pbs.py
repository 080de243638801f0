import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from aremc.channel import ChannelParams, cir
from aremc.grid import build_layout
from aremc.pbs import PbsConfig, estimate_cir, inside_receiver, step_particle, wilson_band
from aremc.rng import block_generator

P = ChannelParams.table1(0.2)
LAYOUT = build_layout(0.2, 2)


def test_zero_diffusion_step_is_pure_drift():
    rng = block_generator(0, 0)
    pos = np.zeros((5, 3))
    for _ in range(100):
        pos = step_particle(pos, 0.01, 0.0, 0.2, rng)
    assert np.allclose(pos[:, :2], 0.0, atol=0)
    assert np.allclose(pos[:, 2], 0.2 * 1.0, rtol=1e-12)


def test_step_statistics_over_1e5_particles():
    n, dt, steps, D, v = 100_000, 0.01, 50, 0.02, 0.3
    rng = block_generator(5, 0, "test")
    pos = np.zeros((n, 3))
    for _ in range(steps):
        pos = step_particle(pos, dt, D, v, rng)
    t = steps * dt
    var = pos[:, 0].var(ddof=1)
    se_var = 2 * D * t * math.sqrt(2 / (n - 1))
    assert abs(var - 2 * D * t) <= 3 * se_var
    se_mean = math.sqrt(2 * D * t / n)
    assert abs(pos[:, 2].mean() - v * t) <= 3 * se_mean


def test_step_rejects_bad_inputs():
    rng = block_generator(0, 0)
    with pytest.raises(ValueError):
        step_particle(np.zeros(3), 0.0, 0.1, 0.0, rng)
    with pytest.raises(ValueError):
        step_particle(np.zeros(3), 0.1, -0.1, 0.0, rng)


def test_receiver_membership_boundaries():
    mid = (P.z_s + P.z_e) / 2
    assert inside_receiver((0, 0, mid), (0, 0), P)
    assert inside_receiver((P.a_rx, 0, mid), (0, 0), P)  # radial edge counts
    assert not inside_receiver((0, 0, P.z_e), (0, 0), P)  # axial edges do not
    assert not inside_receiver((0, 0, P.z_s), (0, 0), P)
    assert not inside_receiver((0.3, 0.0, mid), (0, 0), P)


def test_ballistic_occupancy():
    est = estimate_cir(PbsConfig(n_particles=4, n_realizations=2), P, (0, 0), LAYOUT, D=0.0)
    inside = (est.times > 2.0) & (est.times < 3.0)
    assert np.all(est.mean_fraction[inside] == 1.0)
    assert np.all(est.mean_fraction[~inside] == 0.0)


def test_seed_and_schedule_determinism():
    cfg = PbsConfig(n_particles=50, n_realizations=40, record_every=250, seed=3)
    a = estimate_cir(cfg, P, (1, 0), LAYOUT)
    b = estimate_cir(cfg, P, (1, 0), LAYOUT)
    with ThreadPoolExecutor(4) as ex:
        c = estimate_cir(cfg, P, (1, 0), LAYOUT, ex)
    for x in (b, c):
        assert np.array_equal(a.mean_fraction, x.mean_fraction)
        assert np.array_equal(a.std_error, x.std_error)
    assert np.all(a.counts <= a.n_trials)
    assert np.allclose(a.times, 0.25 * np.arange(1, 61))


def test_short_run_tracks_the_analytical_cir():
    cfg = PbsConfig(n_realizations=500, record_every=500, seed=1)
    est = estimate_cir(cfg, P, (1, 0), LAYOUT)
    lo, hi = est.band(0.99)
    an = cir(0.2, est.times, P)
    assert np.mean((an >= lo) & (an <= hi)) >= 0.9


def test_wilson_band():
    lo, hi = wilson_band(np.array([0, 5, 100]), 100, 0.99)
    assert lo[0] == 0.0 and hi[0] > 0.0
    assert lo[1] < 0.05 < hi[1]
    assert hi[2] == 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        PbsConfig(dt=0)
    with pytest.raises(ValueError):
        PbsConfig(n_particles=0)
    assert PbsConfig().n_steps == 15000
