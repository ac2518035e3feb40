"""Metrics ``Theta`` with ``Q^H Theta = Theta Q`` and the induced Hermitization.

For a real, simple spectrum every Hermitian intertwiner is a combination
``sum_n kappa_n psi_n psi_n^H`` of left-eigenvector dyads; positive weights
give a positive-definite metric.  Factoring ``Theta = Omega^H Omega`` then
makes ``Omega Q Omega^-1`` Hermitian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import (
    DegenerateSpectrumError,
    DomainError,
    NonRealSpectrumError,
    NotPositiveDefiniteError,
    SingularFactorError,
)
from .model import LatticeOperator
from .spectral import (
    balanced_tridiagonal,
    balancing_scales,
    classify,
    coupling_products,
    eigenvalues,
    sort_spectrum,
)

#: Eigenvalues closer than this (relative to max(1, ||Q||_F)) count as degenerate.
SIMPLE_TOL = 1e-8


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with unit right (``right[:, n]``) and left (``left[:, n]``) vectors.

    ``Q @ right[:, n] = q_n right[:, n]`` and ``Q^H @ left[:, n] = conj(q_n) left[:, n]``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray


@dataclass(frozen=True)
class MetricSolution:
    theta: np.ndarray
    kappa: np.ndarray
    residual: float
    positive_definite: bool
    min_eigenvalue: float
    condition_number: float
    factor: np.ndarray | None = None  # W with theta = W W^H, when known


@dataclass(frozen=True)
class HermitizationResult:
    omega: np.ndarray
    q_image: np.ndarray
    hermiticity_residual: float
    isospectral_residual: float
    omega_condition: float


def _gauge(v: np.ndarray) -> np.ndarray:
    """Unit norm, first non-negligible component real and positive."""
    v = v / np.linalg.norm(v)
    big = np.flatnonzero(np.abs(v) > 1e-14 * np.abs(v).max())[0]
    phase = v[big] / abs(v[big])
    v = v * np.conj(phase)
    if np.allclose(v.imag, 0, atol=0):
        v = v.real
    return v


def _realify(a: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(a) and not np.any(a.imag):
        return a.real.copy()
    return a


def _check_simple(ev: np.ndarray, scale: float):
    tol = SIMPLE_TOL * max(1.0, scale)
    gaps = np.abs(ev[:, None] - ev[None, :]) + np.diag(np.full(ev.size, np.inf))
    if gaps.min() <= tol:
        raise DegenerateSpectrumError(
            f"spectrum is degenerate (closest pair {gaps.min():.3g} <= {tol:.3g}); "
            "left/right eigenvector pairing is undefined"
        )


def eigensystem(q: LatticeOperator) -> EigenSystem:
    """Right and left eigenvectors of ``q``, ordered like :func:`eigenvalues`.

    The vectors are computed on the balanced tridiagonal form and mapped back
    through the diagonal similarity, which keeps the graded components of the
    near-Jordan eigenvectors accurate.
    """
    spec = eigenvalues(q)
    _check_simple(spec.eigenvalues, spec.scale)
    scales = balancing_scales(q)
    if scales is None:
        ev, vl, vr = sla.eig(q.entries, left=True, right=True)
        right, left = vr, vl
    elif np.all(coupling_products(q) > 0):
        ev, u = sla.eigh_tridiagonal(np.zeros(q.n), np.sqrt(coupling_products(q)))
        right, left = scales[:, None] * u, u / scales[:, None]
    else:
        ev, vl, vr = sla.eig(balanced_tridiagonal(q), left=True, right=True)
        right, left = scales[:, None] * vr, vl / scales[:, None]
    ev = np.asarray(ev, dtype=complex)
    order = np.lexsort((ev.imag, ev.real))
    ev, right, left = ev[order], right[:, order], left[:, order]
    right = np.column_stack([_gauge(right[:, k]) for k in range(q.n)])
    left = np.column_stack([_gauge(left[:, k]) for k in range(q.n)])
    overlap = np.abs(np.einsum("ij,ij->j", left.conj(), right))
    if overlap.min() < 1e-14:
        raise DegenerateSpectrumError("left/right eigenvectors are orthogonal: operator is defective")
    return EigenSystem(sort_spectrum(ev), _realify(right), _realify(left))


def left_eigenvectors(q: LatticeOperator) -> np.ndarray:
    """Unit left eigenvectors as columns (see :func:`eigensystem`)."""
    return eigensystem(q).left


def _theta_condition(psi: np.ndarray, kappa: np.ndarray) -> float:
    sv = np.linalg.svd(psi * np.sqrt(kappa)[None, :], compute_uv=False)
    return float((sv[0] / sv[-1]) ** 2) if sv[-1] > 0 else float("inf")


def intertwining_residual(q: LatticeOperator, theta: np.ndarray) -> float:
    a = q.entries
    return float(np.linalg.norm(a.conj().T @ theta - theta @ a))


def metric_from_weights(q: LatticeOperator, kappa=None) -> MetricSolution:
    """Dyadic metric ``Theta = sum_n kappa_n psi_n psi_n^H`` (default ``kappa = 1``).

    Requires a real, simple spectrum.  For operators with ghosts, use
    :func:`jordanlattice.phase.real_subspace_projector` and its reduced metric.
    """
    kappa = np.ones(q.n) if kappa is None else np.asarray(kappa, dtype=float)
    if kappa.shape != (q.n,):
        raise DomainError(f"kappa must have {q.n} entries, got shape {kappa.shape}")
    if not np.all(np.isfinite(kappa)) or np.any(kappa <= 0):
        raise DomainError("all weights kappa_n must be finite and positive")
    cls = classify(eigenvalues(q))
    if cls.n_ghost:
        raise NonRealSpectrumError(
            f"spectrum of n={q.n}, word={q.word}, t={q.t} has {cls.n_ghost} non-real "
            "eigenvalues; no positive metric exists (use the reduced metric of the phase module)"
        )
    psi = eigensystem(q).left
    return metric_from_dyads(q.entries, psi, kappa)


def metric_from_dyads(a: np.ndarray, psi: np.ndarray, kappa: np.ndarray) -> MetricSolution:
    """``sum_n kappa_n psi_n psi_n^H`` for left eigenvectors ``psi`` of the matrix ``a``."""
    w = psi * np.sqrt(kappa)[None, :]
    theta = w @ w.conj().T
    theta = _realify((theta + theta.conj().T) / 2)
    lam = np.linalg.eigvalsh(theta)
    return MetricSolution(
        theta=theta,
        kappa=kappa,
        residual=float(np.linalg.norm(a.conj().T @ theta - theta @ a)),
        positive_definite=bool(lam[0] > 0),
        min_eigenvalue=float(lam[0]),
        condition_number=_theta_condition(psi, kappa),
        factor=_realify(w),
    )


def _hermitian_basis(n: int) -> list:
    """Frobenius-orthonormal real basis of the ``n x n`` Hermitian matrices."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1
        basis.append(e)
    r = 1 / np.sqrt(2)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = r
            basis.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[i, j], e[j, i] = -1j * r, 1j * r
            basis.append(e)
    return basis


def intertwiner_basis(q: LatticeOperator, rtol: float = 1e-10) -> list:
    """Basis of the real vector space ``{Theta = Theta^H : Q^H Theta = Theta Q}``.

    Computed as the null space of the linear map on the Hermitian matrices,
    written out as a real ``2N^2 x N^2`` system.  Singular values below
    ``rtol`` times the largest count as zero.  Returned matrices are
    Frobenius-orthonormal (real when possible).
    """
    a = q.entries.astype(complex)
    basis = _hermitian_basis(q.n)
    cols = []
    for e in basis:
        img = a.conj().T @ e - e @ a
        cols.append(np.concatenate([img.real.ravel(), img.imag.ravel()]))
    m = np.column_stack(cols)
    _, sv, vh = np.linalg.svd(m)
    rank = int(np.sum(sv > rtol * sv[0]))
    null = vh[rank:]
    stack = np.array(basis)
    return [_realify(np.tensordot(c, stack, axes=1)) for c in null]


def span_residual(theta: np.ndarray, basis: list) -> float:
    """Relative Frobenius residual of the least-squares fit of ``theta`` by ``basis``."""
    if not basis:
        return 1.0
    b = np.column_stack([np.asarray(x, dtype=complex).ravel() for x in basis])
    target = np.asarray(theta, dtype=complex).ravel()
    coef, *_ = np.linalg.lstsq(b, target, rcond=None)
    return float(np.linalg.norm(b @ coef - target) / np.linalg.norm(target))


def factor_metric(theta, method: str = "sqrt") -> np.ndarray:
    """``Omega`` with ``Omega^H Omega = Theta``.

    ``method="sqrt"`` gives the Hermitian principal square root;
    ``method="cholesky"`` gives the upper-triangular factor.  Passing a
    :class:`MetricSolution` instead of a bare matrix lets the factor be
    computed from the dyadic factor ``W`` (``Theta = W W^H``) through an SVD
    or QR of ``W``, which avoids squaring the condition number of ``W``.
    """
    w = None
    if isinstance(theta, MetricSolution):
        w, theta = theta.factor, theta.theta
    theta = np.asarray(theta)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise DomainError("metric must be a square matrix")
    if method not in ("sqrt", "cholesky"):
        raise DomainError(f"unknown factorization {method!r}")
    herm = (theta + theta.conj().T) / 2
    if np.linalg.norm(theta - herm) > 1e-12 * max(np.linalg.norm(theta), 1.0):
        raise DomainError("metric is not Hermitian")
    lam, v = np.linalg.eigh(herm)
    if lam[0] <= 0:
        raise NotPositiveDefiniteError("metric is not positive definite", float(lam[0]))
    if w is not None:
        if method == "sqrt":
            u, sv, _ = np.linalg.svd(w)
            omega = (u * sv[None, :]) @ u.conj().T
        else:
            r = np.linalg.qr(w.conj().T, mode="r")
            # fix the row phases so the diagonal is positive, as in Cholesky
            d = np.diagonal(r)
            omega = (np.conj(d / np.abs(d)))[:, None] * r
    elif method == "sqrt":
        omega = (v * np.sqrt(lam)[None, :]) @ v.conj().T
    else:
        omega = sla.cholesky(herm, lower=False)
    if method == "sqrt":
        omega = (omega + omega.conj().T) / 2
    return _realify(omega)


def hermitize(q: LatticeOperator, omega) -> HermitizationResult:
    """Similarity image ``Omega Q Omega^-1`` and its Hermiticity / spectrum residuals."""
    omega = np.asarray(omega)
    return _hermitize_matrix(q.entries, eigenvalues(q).eigenvalues, omega)


def _hermitize_matrix(a: np.ndarray, spectrum: np.ndarray, omega: np.ndarray) -> HermitizationResult:
    cond = float(np.linalg.cond(omega))
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularFactorError(f"factor is numerically singular (condition number {cond:.3g})")
    # q_image = omega @ a @ inv(omega), via a solve on the transposed system
    image = np.linalg.solve(omega.T, (omega @ a).T).T
    image = _realify(image)
    herm_res = float(np.linalg.norm(image - image.conj().T))
    img_ev = sort_spectrum(np.linalg.eigvals(image))
    if spectrum.size:
        cost = np.abs(np.asarray(spectrum)[:, None] - img_ev[None, :])
        rows, cols = linear_sum_assignment(cost)
        iso = float(cost[rows, cols].max())
    else:
        iso = 0.0
    return HermitizationResult(
        omega=omega,
        q_image=image,
        hermiticity_residual=herm_res,
        isospectral_residual=iso,
        omega_condition=cond,
    )
