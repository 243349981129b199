#!/usr/bin/env python3
"""Internal consistency checks of the closed forms, end to end.

Three independent validations on one random scenario:
  1. the Shannon transform obeys dV/dsigma2 = -1/sigma2 - G(-sigma2)
     (central finite differences vs the fixed-point Cauchy transform);
  2. the one-sided correlation operators satisfy the trace duality
     Tr(A eta(B)) = Tr(B eta_tilde(A));
  3. the closed-form gradient of the weighted MI matches a full
     finite-difference probe of the two fixed points.

Run: python demos/consistency_checks.py
"""

import numpy as np

from isac_mi import (
    Beamformer,
    NoiseConfig,
    SystemDims,
    default_beamformer,
    derivative_identity_check,
    generate_scenario,
    gradient,
    weighted_mi,
)
from isac_mi.correlation import CorrelationOps

dims = SystemDims(n_t=4, n_r=4, n_u=4, num_scatter=2, m=4, n_s=4)
stats = generate_scenario(dims, rician_kappa=1.0, seed=11)
bf = default_beamformer(dims, 4.0)
noise = NoiseConfig(5.0)

print("1. Shannon/Cauchy derivative identity (central differences):")
for branch in ("sensing", "comm"):
    sigma2 = noise.sigma_s2 if branch == "sensing" else noise.sigma_c2
    disc = derivative_identity_check(stats, bf, noise, branch, h=1e-4 * sigma2)
    print(f"   {branch:8s}: |dV/dsigma2 + 1/sigma2 + G(-sigma2)| = {disc:.2e}")

print("\n2. trace duality of the correlation operators:")
ops = CorrelationOps(stats)
rng = np.random.default_rng(0)
a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
a = 0.5 * (a + a.conj().T)
b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
b = 0.5 * (b + b.conj().T)
lhs = np.trace(a @ ops.eta(0, b))
rhs = np.trace(b @ ops.eta_tilde(0, a))
print(f"   Tr(A eta(B)) = {lhs:.10f}")
print(f"   Tr(B eta~(A)) = {rhs:.10f}   (diff {abs(lhs - rhs):.2e})")

print("\n3. closed-form gradient vs finite differences (rho = 0.8):")
rng = np.random.default_rng(2)
w0 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
w0 = 0.8 * 2.0 * w0 / np.linalg.norm(w0)
bf0 = Beamformer(w0, 4.0)
_, fs, fc = weighted_mi(stats, bf0, noise, 0.8, return_fixed_points=True)
g = gradient(stats, bf0, noise, 0.8, fs, fc)

h = 1e-4
fd = np.zeros((4, 4), dtype=complex)
for i in range(4):
    for j in range(4):
        e = np.zeros((4, 4))
        e[i, j] = 1.0
        up = weighted_mi(stats, Beamformer(w0 + h * e, 4.0), noise, 0.8).weighted
        dn = weighted_mi(stats, Beamformer(w0 - h * e, 4.0), noise, 0.8).weighted
        up_i = weighted_mi(stats, Beamformer(w0 + 1j * h * e, 4.0), noise, 0.8).weighted
        dn_i = weighted_mi(stats, Beamformer(w0 - 1j * h * e, 4.0), noise, 0.8).weighted
        fd[i, j] = 0.5 * ((up - dn) + 1j * (up_i - dn_i)) / (2.0 * h)
rel = np.linalg.norm(fd - g) / np.linalg.norm(fd)
print(f"   relative Frobenius error: {rel:.2e}")
