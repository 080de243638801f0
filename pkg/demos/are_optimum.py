"""Area rate efficiency against cell size, with the best d_hex per N.

Small cells pack more users per square meter but drown in interference;
large cells waste area.  The sweep below finds the balance for three
molecule budgets (about half a minute on one core).

    python3 demos/are_optimum.py
"""

import numpy as np

from aremc.channel import ChannelParams
from aremc.metrics import d_hex_grid, interior_maxima, optimize_d_hex, sweep

grid = d_hex_grid(0.05, 5.0, 100)
for n_mol in (10, 100, 1000):
    links = sweep(grid, 3, ChannelParams(n_mol=n_mol))
    are = np.array([m.are for m in links])
    opt = optimize_d_hex(are)
    best = links[int(np.argmax(are))]
    print(f"N = {n_mol:4d}: d_hex* = {opt.d_hex_opt:.3f} m, ARE = {opt.are_max:.4g} bit/m^2 per use, "
          f"theta = {best.theta}, BER = {best.ber:.3g}, "
          f"peaks = {interior_maxima(are, keys=[m.theta for m in links])}")

print("\nN = 100 profile (every tenth grid point)")
links = sweep(grid[::10], 3, ChannelParams(n_mol=100))
print(" d_hex     theta   BER        ARE")
for m in links:
    print(f"{m.d_hex:6.3f}  {m.theta:6d}   {m.ber:.3e}  {m.are:.3e}")
