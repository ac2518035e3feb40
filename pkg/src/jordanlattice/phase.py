"""Bookkeeping across the exceptional point ``t = 0``.

Covers the per-word table of real-eigenvalue counts on both sides of the
transition, a rank certificate for the Jordan degeneracy, and the reduction
of ``Q`` to the invariant subspace spanned by its real-eigenvalue
eigenvectors (ghosts projected out) together with a metric there.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EigensolverError
from .metric import (
    EigenSystem,
    HermitizationResult,
    MetricSolution,
    _gauge,
    _hermitize_matrix,
    _realify,
    eigensystem,
    factor_metric,
    metric_from_dyads,
)
from .model import LatticeOperator, Word, all_words, build_operator, word_length
from .spectral import TOL_ABS, TOL_REL, SpectrumClassification, classify, eigenvalues

#: Eigenvalues within this distance of the probe point count towards its algebraic multiplicity.
CLUSTER_TOL = 1e-6
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class PhaseTableRow:
    word: Word
    index: int
    n_real_before: int
    n_real_after: int
    t0: float


@dataclass(frozen=True)
class DefectivenessCertificate:
    t: float
    z: complex
    algebraic_multiplicity: int
    geometric_multiplicity: int
    rank: int


@dataclass(frozen=True)
class ReducedModel:
    """Restriction of ``Q`` to its real-eigenvalue invariant subspace.

    ``basis`` has orthonormal columns spanning ``range(projector)``;
    ``q_reduced = basis^H Q basis``.  ``metric`` is the unit-weight dyadic
    metric of ``q_reduced`` (``None`` when the subspace is empty).
    """

    projector: np.ndarray
    reduced_dim: int
    basis: np.ndarray
    q_reduced: np.ndarray
    metric: MetricSolution | None
    real_eigenvalues: np.ndarray
    ghost_eigenvalues: np.ndarray
    ghost_basis: np.ndarray

    @property
    def theta_reduced(self) -> np.ndarray:
        if self.metric is None:
            return np.zeros((0, 0))
        return self.metric.theta


def classify_all_words(
    n: int,
    t0: float,
    *,
    tol_abs: float = TOL_ABS,
    tol_rel: float = TOL_REL,
    threads: int | None = None,
) -> list:
    """Real-eigenvalue counts at ``-t0`` and ``+t0`` for every word, ordered by index."""
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    if not 0 < t0 < 1:
        raise DomainError(f"probe time must satisfy 0 < t0 < 1, got {t0!r}")
    n = int(n)

    def row(w: Word) -> PhaseTableRow:
        counts = []
        for t in (-t0, t0):
            try:
                counts.append(classify(eigenvalues(build_operator(n, w, t)), tol_abs, tol_rel).n_real)
            except EigensolverError as exc:
                raise EigensolverError(f"word {w} (index {w.index}): {exc}") from exc
        return PhaseTableRow(w, w.index, counts[0], counts[1], float(t0))

    words = all_words(word_length(n))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(row, words))
    return [row(w) for w in words]


def defectiveness(q: LatticeOperator, z: complex = 0.0) -> DefectivenessCertificate:
    """Algebraic and geometric multiplicity of ``z`` as an eigenvalue of ``q``.

    The rank of ``Q - zI`` comes from its singular values with threshold
    ``1e-10 * ||Q||_2``.
    """
    a = q.entries - z * np.eye(q.n)
    sv = np.linalg.svd(a, compute_uv=False)
    norm = max(np.linalg.norm(q.entries, 2), np.finfo(float).tiny)
    rank = int(np.sum(sv > RANK_RTOL * norm))
    ev = eigenvalues(q).eigenvalues
    alg = int(np.sum(np.abs(ev - z) <= CLUSTER_TOL))
    return DefectivenessCertificate(
        t=q.t, z=complex(z), algebraic_multiplicity=alg, geometric_multiplicity=q.n - rank, rank=rank
    )


def _orthonormal_columns(vectors: np.ndarray) -> np.ndarray:
    if vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], 0))
    basis, _ = np.linalg.qr(vectors)
    return _realify(np.column_stack([_gauge(basis[:, k]) for k in range(basis.shape[1])]))


def real_subspace_projector(
    q: LatticeOperator, cls: SpectrumClassification | None = None
) -> ReducedModel:
    """Spectral projector onto the real-eigenvalue eigenvectors and the reduced operator.

    ``P = sum_real x_n psi_n^H / (psi_n^H x_n)`` from right/left eigenvector
    pairs.  The reduced basis orthonormalizes the real right eigenvectors in
    ascending eigenvalue order.  A spectrum without real eigenvalues gives
    an empty (``reduced_dim == 0``) model.
    """
    es: EigenSystem = eigensystem(q)
    if cls is None:
        cls = classify(eigenvalues(q))
    real = np.abs(es.eigenvalues.imag) <= cls.tolerance_used
    if int(real.sum()) != cls.n_real:
        raise DomainError("classification does not match the operator's spectrum")
    x, psi = es.right, es.left
    p = np.zeros((q.n, q.n), dtype=complex)
    for k in np.flatnonzero(real):
        p += np.outer(x[:, k], psi[:, k].conj()) / (psi[:, k].conj() @ x[:, k])
    p = _realify(p)
    real_idx = np.flatnonzero(real)
    real_idx = real_idx[np.argsort(es.eigenvalues[real_idx].real, kind="stable")]
    ghost_idx = np.flatnonzero(~real)
    basis = _orthonormal_columns(x[:, real_idx])
    ghost_basis = _orthonormal_columns(x[:, ghost_idx])
    real_ev = es.eigenvalues[real_idx].real
    ghost_ev = es.eigenvalues[ghost_idx]

    m = real_idx.size
    if m == 0:
        return ReducedModel(
            projector=p,
            reduced_dim=0,
            basis=basis,
            q_reduced=np.zeros((0, 0)),
            metric=None,
            real_eigenvalues=real_ev,
            ghost_eigenvalues=ghost_ev,
            ghost_basis=ghost_basis,
        )
    q_red = _realify(basis.conj().T @ q.entries @ basis)
    # reduced right eigenvectors are the coordinates of x_n; left ones are the dual basis
    y = basis.conj().T @ x[:, real_idx]
    phi = np.linalg.inv(y).conj().T
    phi = _realify(np.column_stack([_gauge(phi[:, k]) for k in range(m)]))
    metric = metric_from_dyads(q_red, phi, np.ones(m))
    return ReducedModel(
        projector=p,
        reduced_dim=m,
        basis=basis,
        q_reduced=q_red,
        metric=metric,
        real_eigenvalues=real_ev,
        ghost_eigenvalues=ghost_ev,
        ghost_basis=ghost_basis,
    )


def ghost_restriction(q: LatticeOperator, rm: ReducedModel) -> np.ndarray:
    """``Q`` compressed to an orthonormal basis of the ghost subspace ``range(I - P)``."""
    g = rm.ghost_basis
    return g.conj().T @ q.entries @ g


def reduced_hermitize(rm: ReducedModel, method: str = "sqrt") -> HermitizationResult:
    """Hermitian image ``Omega_R Q_R Omega_R^-1`` of the reduced operator."""
    if rm.reduced_dim < 1 or rm.metric is None:
        raise DomainError("reduced model is empty: no real eigenvalues to keep")
    omega = factor_metric(rm.metric, method)
    return _hermitize_matrix(rm.q_reduced, rm.real_eigenvalues.astype(complex), omega)
