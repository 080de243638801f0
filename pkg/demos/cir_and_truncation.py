"""Channel impulse response of the desired and interfering links.

Prints the CIR of TX0, TX1 and TX7 at d_hex = 0.2 m around the sampling
time, then shows how much the series loses when cut after 0 or 1 terms.

    python3 demos/cir_and_truncation.py
"""

import numpy as np

from aremc.channel import ChannelParams, cir
from aremc.grid import build_layout
from aremc.metrics import sampling_time

d_hex = 0.2
p = ChannelParams.table1(d_hex)
layout = build_layout(d_hex, 2)
t_max = sampling_time(p)
print(f"d_hex = {d_hex} m, a_rx = {p.a_rx} m, sampling time t_max = {t_max:.3f} s\n")

links = {"TX0": 0.0, "TX1": layout.interferer(1).distance, "TX7": layout.interferer(7).distance}
times = np.array([1.0, 2.0, t_max, 3.0, 5.0, 10.0])
print("t [s]   " + "".join(f"{name:>12}" for name in links))
for t in times:
    print(f"{t:6.3f}  " + "".join(f"{float(cir(r0, t, p)):12.4e}" for r0 in links.values()))

print("\nrelative truncation gap at t_max (k_max = 20 as reference)")
for name, r0 in list(links.items())[1:]:
    ref = float(cir(r0, t_max, p))
    gaps = [abs(float(cir(r0, t_max, p, k, rtol=None)) - ref) / ref for k in (0, 1, 2)]
    print(f"  {name}: " + ", ".join(f"k_max={k}: {g:.2e}" for k, g in enumerate(gaps)))
