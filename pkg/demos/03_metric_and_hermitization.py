"""
A metric that makes the operator self-adjoint
=============================================

When the spectrum is real and simple, any positive weights ``kappa`` give a
positive-definite metric ``theta = sum kappa_n psi_n psi_n^H`` built from the
left eigenvectors.  Factoring ``theta = omega^H omega`` gives a similarity
transform ``omega Q omega^-1`` that is Hermitian with the same eigenvalues.
"""

import numpy as np

import jordanlattice as jl

# two sites, by hand: psi = (1, -3) and (1, 3) normalised, so theta = diag(0.2, 1.8)
q2 = jl.build_operator(2, "o", 0.1)
sol2 = jl.metric_from_weights(q2, [1.0, 1.0])
print("N = 2 metric")
print(np.round(sol2.theta.real, 12) + 0.0)

q = jl.build_operator(10, "ooooe", 0.1)
sol = jl.metric_from_weights(q)
print(f"\nN = 10: residual {sol.residual:.2e}, min eigenvalue {sol.min_eigenvalue:.3e}")

for method in ("sqrt", "cholesky"):
    omega = jl.factor_metric(sol, method)
    h = jl.hermitize(q, omega)
    print(f"{method:>8}: hermiticity {h.hermiticity_residual:.2e}, isospectral {h.isospectral_residual:.2e}")

# the metric grows ill-conditioned as the exceptional point is approached
print("\ncondition number of theta for N = 4")
for t in (0.1, 0.01, 0.001):
    c = jl.metric_from_weights(jl.build_operator(4, "oe", t)).condition_number
    print(f"  t = {t:<6} {c:.3e}")

# with ghosts present no positive metric exists
try:
    jl.metric_from_weights(jl.build_operator(10, "ooooe", -0.1))
except jl.NonRealSpectrumError as exc:
    print(f"\nt = -0.1: {exc}")
