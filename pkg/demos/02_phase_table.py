"""
Which words keep a real spectrum?
=================================

For ``t > 0`` the spectrum does not depend on the word: it is always real.
On the other side of the exceptional point the word matters.  This script
tabulates the number of real eigenvalues at ``t = -0.1`` and ``t = 0.1`` for
every word of length five.
"""

import numpy as np

import jordanlattice as jl

n, t0 = 10, 0.1
rows = jl.classify_all_words(n, t0)

print(f"{'index':>5}  word   before  after")
for r in rows:
    print(f"{r.index:>5}  {str(r.word)}  {r.n_real_before:>6}  {r.n_real_after:>5}")

before = np.array([r.n_real_before for r in rows])
values, counts = np.unique(before, return_counts=True)
print()
for v, c in zip(values, counts):
    print(f"{c:>2} words keep {v} real eigenvalues at t = {-t0}")

# every word ending in 'o' loses all of its real eigenvalues
odd = [r for r in rows if str(r.word).endswith("o")]
print(f"words ending in 'o' with a real eigenvalue: {sum(r.n_real_before > 0 for r in odd)}")

# at t = 0 the operator is a single Jordan block
c = jl.defectiveness(jl.build_operator(n, "ooooe", 0.0))
print(f"t = 0: algebraic {c.algebraic_multiplicity}, geometric {c.geometric_multiplicity}, rank {c.rank}")
