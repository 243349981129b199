#!/usr/bin/env python3
"""Convergence of the projected gradient ascent for growing array sizes.

Runs the beamformer optimization from a random start at rho = 0.8 and
SNR 10 dB for several antenna counts and prints the per-iteration weighted
MI.  The objective is monotone under backtracking, plateaus within a
handful of iterations, and the optimized value grows with the array size.

Run: python demos/pga_convergence.py
"""

import math

from isac_mi import NoiseConfig, PgaOptions, SystemDims, generate_scenario, pga

LN2 = math.log(2.0)
noise = NoiseConfig(10.0)
rho = 0.8

finals = []
for n in (4, 8, 16):
    dims = SystemDims(n_t=n, n_r=n, n_u=n, num_scatter=2, m=n, n_s=n)
    stats = generate_scenario(dims, rician_kappa=1.0, seed=7)
    _, trace = pga(stats, noise, rho, p_t=float(n), opts=PgaOptions(init_seed=1))
    print(f"\nN_t = N_r = N_u = {n}")
    print(f"{'iter':>4} {'weighted MI (bits)':>19} {'step':>10} {'|grad|':>10}")
    for row in trace.rows:
        print(f"{row.iteration:4d} {row.weighted_mi / LN2:19.4f} "
              f"{row.step_size:10.4f} {row.grad_norm:10.4f}")
    finals.append(trace.rows[-1].weighted_mi / LN2)

print("\noptimized weighted MI by antenna count:",
      ", ".join(f"{v:.2f} bits" for v in finals))
