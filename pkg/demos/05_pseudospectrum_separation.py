"""
How well separated are the ghosts?
==================================

The epsilon-pseudospectrum is the set where the smallest singular value of
``Q - z`` drops below ``epsilon``.  At large ``epsilon`` the real eigenvalues
and the ghosts share one component.  Lowering ``epsilon`` splits them, and the
level at which a real cluster and a ghost cluster separate measures how
distinct the two families are.

This takes about ten seconds for three 201 x 201 grids.
"""

import warnings

import numpy as np

import jordanlattice as jl
from jordanlattice.pseudospectrum import GridResolutionWarning, separation_summary

words = ("eooee", "eoooe", "eoeee")
for word in words:
    q = jl.build_operator(10, word, -0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GridResolutionWarning)
        s = separation_summary(q)
    rep = s["report"]
    print(f"{word}: {s['classification'].n_real} real, {s['classification'].n_ghost} ghost")
    print(f"  components per epsilon {dict(zip(rep.epsilon_ladder, rep.component_counts))}")
    print(f"  ladder merge level     {s['real_ghost_merge_epsilon']:.0e}")
    print(f"  exact grid bottleneck  {s['real_ghost_bottleneck']:.3e}")

# one point evaluated two ways
q = jl.build_operator(10, "eooee", -0.1)
z = 0.1 + 0.05j
print(f"\nsigma_min at {z}: {jl.sigma_min(q, z):.15e} (inverse Lanczos)")
print(f"sigma_min at {z}: {jl.sigma_min(q, z, method='svd'):.15e} (dense SVD)")
