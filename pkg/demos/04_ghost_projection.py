"""
Projecting out the ghosts
=========================

For ``t < 0`` a metric exists only on the subspace spanned by the real
eigenvectors.  The spectral projector onto that subspace commutes with the
operator, and the reduced operator on its range can be Hermitized in the
usual way.  The ghosts live on the complementary range.
"""

import numpy as np

import jordanlattice as jl
from jordanlattice.phase import ghost_restriction

for word in ("ooooe", "ooeee", "eooee"):
    q = jl.build_operator(10, word, -0.1)
    rm = jl.real_subspace_projector(q)
    p, a = rm.projector, q.entries
    print(f"{word}: reduced dimension {rm.reduced_dim}")
    print(f"  |P^2 - P|  = {np.linalg.norm(p @ p - p, 2):.2e}")
    print(f"  |QP - PQ|  = {np.linalg.norm(a @ p - p @ a, 2):.2e}")
    print(f"  |P|        = {np.linalg.norm(p, 2):.1f}")
    h = jl.reduced_hermitize(rm)
    print(f"  reduced eigenvalues {np.round(np.linalg.eigvalsh(h.q_image), 6).tolist()}")
    ghosts = np.linalg.eigvals(ghost_restriction(q, rm))
    print(f"  ghosts on the complement: {np.round(np.sort_complex(ghosts), 4).tolist()}")
