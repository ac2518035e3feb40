"""
Eigenvalue trajectories through the exceptional point
=======================================================

Follow the ten eigenvalues of the word ``ooooe`` as ``t`` runs from -0.5 to
0.5.  At ``t = 0`` the operator is a single Jordan block and every eigenvalue
sits at the origin.  For ``t > 0`` all ten are real.  For ``t < 0`` eight of
them pair up into complex-conjugate ghosts.

Pass a file name to save the trajectories as CSV for plotting.
"""

import sys

import numpy as np

import jordanlattice as jl
from jordanlattice.export import sweep_csv

n, word = 10, "ooooe"
t = np.linspace(-0.5, 0.5, 1001)
sr = jl.sweep(n, word, t)

# real-eigenvalue count on each side of the transition
for label, mask in (("t < 0", t < 0), ("t = 0", t == 0), ("t > 0", t > 0)):
    counts = np.unique(sr.real_count_per_t[mask])
    print(f"{label}: real counts {counts.tolist()}")

# the branches open like sqrt(t) near the exceptional point
near = jl.sweep(n, word, np.geomspace(1e-4, 1e-2, 41))
fit = jl.unfolding_fit(near)
print(f"fitted exponent {fit.exponent:.4f} over t in {fit.fit_window}")
for k in sorted(fit.coefficients)[:3]:
    print(f"  path {k}: |c| = {fit.coefficients[k]:.4f}")

# a snapshot on the ghost side
i = np.searchsorted(t, -0.1)
snap = sr.trajectories[:, i]
print(f"t = {t[i]:+.3f}")
for z in snap:
    print(f"  {z.real:+.6f} {z.imag:+.6f}i")

if len(sys.argv) > 1:
    with open(sys.argv[1], "w", newline="") as fh:
        fh.write(sweep_csv(sr))
    print(f"wrote {sys.argv[1]}")
