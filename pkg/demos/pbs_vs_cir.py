"""Particle-based simulation against the closed-form CIR.

Releases 100 molecules per realization from TX0 and TX1 and counts how
many sit inside RX0, then checks the analytical CIR against a 99% Wilson
band on the pooled fraction.

    python3 demos/pbs_vs_cir.py
"""

from aremc.channel import ChannelParams, cir
from aremc.grid import build_layout
from aremc.pbs import PbsConfig, estimate_cir

p = ChannelParams.table1(0.2)
layout = build_layout(0.2, 1)
cfg = PbsConfig(n_realizations=2000, record_every=1000, seed=3)

for name, src in (("TX0", (0, 0)), ("TX1", layout.interferer(1).coord)):
    est = estimate_cir(cfg, p, src, layout)
    r0 = 0.0 if name == "TX0" else layout.interferer(1).distance
    lo, hi = est.band(0.99)
    print(f"{name}  t [s]   simulated   analytical   in band")
    for t, f, a, l, h in zip(est.times, est.mean_fraction, cir(r0, est.times, p), lo, hi):
        print(f"     {t:5.1f}  {f:10.3e}  {a:11.3e}   {'yes' if l <= a <= h else 'no'}")
    print()
