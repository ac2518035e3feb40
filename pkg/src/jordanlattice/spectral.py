"""Spectra of the lattice operators, real/ghost classification and time sweeps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import ClassificationError, DomainError, EigensolverError
from .model import LatticeOperator, Word, build_operator, coerce_word

TOL_ABS = 1e-9
TOL_REL = 1e-12
#: Counts at ``0 < |t|`` below this are reported but marked low-confidence.
LOW_CONFIDENCE_T = 1e-6


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by (real part, imaginary part).

    ``scale`` is the Frobenius norm of the operator, used as the relative
    tolerance reference by :func:`classify`.
    """

    eigenvalues: np.ndarray
    scale: float

    def __len__(self):
        return self.eigenvalues.size

    def __iter__(self):
        return iter(self.eigenvalues)


@dataclass(frozen=True)
class SpectrumClassification:
    real_eigenvalues: np.ndarray
    ghost_pairs: list  # representatives with Im > 0
    n_real: int
    n_ghost: int
    tolerance_used: float
    real_mask: np.ndarray = field(repr=False)  # aligned with Spectrum.eigenvalues


@dataclass(frozen=True)
class SweepResult:
    n: int
    word: Word
    t_grid: np.ndarray
    trajectories: np.ndarray  # shape (N, len(t_grid)), row i is path q_i(t)
    real_count_per_t: np.ndarray
    defective: np.ndarray  # True at t == 0
    low_confidence: np.ndarray


@dataclass(frozen=True)
class UnfoldingFit:
    exponent: float
    coefficients: dict  # trajectory id -> |c_n|
    slopes: dict  # trajectory id -> individual log-log slope
    fit_window: tuple
    residual: float


def coupling_products(q: LatticeOperator) -> np.ndarray:
    """``sub_k * sup_k``; the characteristic polynomial depends on nothing else."""
    return q.sub * q.sup


def balanced_tridiagonal(q: LatticeOperator) -> np.ndarray:
    """Tridiagonal matrix with the same characteristic polynomial as ``q``.

    Off-diagonal magnitudes are ``sqrt|sub*sup|``, with the sign of the product
    carried by the subdiagonal.  Where all products are positive the result is
    symmetric.  When no entry of ``q`` vanishes it is a diagonal similarity of
    ``q`` (see :func:`balancing_scales`).
    """
    c = coupling_products(q)
    r = np.sqrt(np.abs(c))
    return np.diag(np.sign(c) * r, -1) + np.diag(r, 1)


def balancing_scales(q: LatticeOperator) -> np.ndarray | None:
    """Diagonal ``s`` with ``diag(s)^-1 Q diag(s) == balanced_tridiagonal(Q)``.

    Returns ``None`` when some off-diagonal entry is zero and no such
    similarity exists.
    """
    sub, sup = q.sub, q.sup
    if np.any(sub == 0) or np.any(sup == 0):
        return None
    ratio = np.sqrt(np.abs(sub * sup)) / sup
    return np.concatenate([[1.0], np.cumprod(ratio)])


def _pair_conjugates(ev: np.ndarray) -> np.ndarray:
    ev = np.asarray(ev, dtype=complex)
    upper = ev[ev.imag > 0]
    lower = ev[ev.imag < 0]
    if upper.size != lower.size:
        return ev
    # replace the lower half-plane by exact conjugates of matched partners
    cost = np.abs(upper[:, None] - np.conj(lower)[None, :])
    _, cols = linear_sum_assignment(cost)
    fixed = (upper + np.conj(lower[cols])) / 2
    return np.concatenate([ev[ev.imag == 0], fixed, np.conj(fixed)])


def sort_spectrum(ev: np.ndarray) -> np.ndarray:
    ev = np.asarray(ev, dtype=complex)
    order = np.lexsort((ev.imag, ev.real))
    return ev[order]


def eigenvalues(q: LatticeOperator) -> Spectrum:
    """All ``N`` eigenvalues of ``q``.

    The operator is first mapped to its balanced tridiagonal form.  With all
    coupling products non-negative this is real symmetric and handled by the
    symmetric tridiagonal solver; otherwise the Hessenberg QR solver is used.
    Convergence failures raise :class:`EigensolverError`.
    """
    entries = q.entries
    if not np.all(np.isfinite(entries)):
        raise DomainError("operator has non-finite entries")
    c = coupling_products(q)
    try:
        if np.all(c >= 0):
            ev = sla.eigvalsh_tridiagonal(np.zeros(q.n), np.sqrt(c))
            ev = ev.astype(complex)
        else:
            ev = _pair_conjugates(np.linalg.eigvals(balanced_tridiagonal(q)))
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise EigensolverError(
            f"eigenvalue iteration failed for n={q.n}, word={q.word}, t={q.t}: {exc}"
        ) from exc
    return Spectrum(sort_spectrum(ev), q.frobenius_norm())


def classify(
    s: Spectrum, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL, scale: float | None = None
) -> SpectrumClassification:
    """Split a spectrum into real eigenvalues and conjugate ghost pairs.

    An eigenvalue counts as real iff ``|Im q| <= tol_abs + tol_rel * scale``
    (``scale`` defaults to the operator's Frobenius norm).
    """
    if tol_abs <= 0 or tol_rel < 0:
        raise DomainError("need tol_abs > 0 and tol_rel >= 0")
    scale = s.scale if scale is None else scale
    tol = tol_abs + tol_rel * scale
    ev = s.eigenvalues
    real_mask = np.abs(ev.imag) <= tol
    upper = ev[~real_mask & (ev.imag > 0)]
    lower = ev[~real_mask & (ev.imag < 0)]
    if upper.size != lower.size:
        raise ClassificationError(
            f"{upper.size} eigenvalues above the real axis vs {lower.size} below"
        )
    if upper.size:
        cost = np.abs(upper[:, None] - np.conj(lower)[None, :])
        rows, cols = linear_sum_assignment(cost)
        worst = cost[rows, cols].max()
        if worst > 10 * tol:
            raise ClassificationError(
                f"conjugate pairing mismatch {worst:.3g} exceeds {10 * tol:.3g}"
            )
    real = np.sort(ev[real_mask].real)
    ghosts = sorted(upper.tolist(), key=lambda z: (z.real, z.imag))
    return SpectrumClassification(
        real_eigenvalues=real,
        ghost_pairs=ghosts,
        n_real=int(real.size),
        n_ghost=int(ev.size - real.size),
        tolerance_used=tol,
        real_mask=real_mask,
    )


def char_poly_at(q: LatticeOperator, z: complex) -> complex:
    """``det(zI - Q)`` by the three-term continuant recurrence."""
    c = coupling_products(q)
    d_prev, d = 1.0 + 0j, complex(z)
    for ck in c:
        d_prev, d = d, z * d - ck * d_prev
    return d


def _match(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Permutation ``p`` so that ``new[p]`` continues the paths ending at ``prev``."""
    cost = np.abs(prev[:, None] - new[None, :])
    nearest = np.argmin(cost, axis=1)
    if np.unique(nearest).size == nearest.size:
        return nearest
    _, cols = linear_sum_assignment(cost)
    return cols


def sweep(
    n: int,
    w: Word | str,
    t_grid,
    *,
    tol_abs: float = TOL_ABS,
    tol_rel: float = TOL_REL,
    threads: int | None = None,
) -> SweepResult:
    """Eigenvalue trajectories of ``Q(t)`` over an increasing time grid.

    Spectra at consecutive samples are linked by nearest-neighbour assignment
    (falling back to an optimal assignment when nearest neighbours collide).
    The sample ``t = 0`` is flagged defective and counted as ``n`` real zeros.
    """
    w = coerce_word(w, n)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2:
        raise DomainError("time grid needs at least two points")
    if np.any(np.diff(t_grid) <= 0):
        raise DomainError("time grid must be strictly increasing")

    def solve(t):
        try:
            return eigenvalues(build_operator(n, w, t))
        except EigensolverError as exc:
            raise EigensolverError(f"at t={t!r}: {exc}") from exc

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            spectra = list(pool.map(solve, t_grid))
    else:
        spectra = [solve(t) for t in t_grid]

    paths = np.empty((n, t_grid.size), dtype=complex)
    counts = np.empty(t_grid.size, dtype=int)
    for i, (t, s) in enumerate(zip(t_grid, spectra)):
        ev = s.eigenvalues
        paths[:, i] = ev if i == 0 else ev[_match(paths[:, i - 1], ev)]
        counts[i] = n if t == 0 else classify(s, tol_abs, tol_rel).n_real
    abs_t = np.abs(t_grid)
    return SweepResult(
        n=n,
        word=w,
        t_grid=t_grid,
        trajectories=paths,
        real_count_per_t=counts,
        defective=t_grid == 0,
        low_confidence=(abs_t > 0) & (abs_t < LOW_CONFIDENCE_T),
    )


def unfolding_fit(sr: SweepResult, trajectory_ids=None, window=(1e-4, 1e-2)) -> UnfoldingFit:
    """Fit ``|q_n(t)| = c_n t**p`` on a window of positive times.

    Each selected trajectory is fitted by least squares in log-log
    coordinates; the shared exponent is the median of the individual slopes
    and the ``c_n`` are refitted with that exponent held fixed.  With
    ``trajectory_ids=None`` every trajectory that is real and non-zero on the
    window is used.
    """
    t_min, t_max = window
    if not 0 < t_min < t_max:
        raise DomainError(f"fit window must satisfy 0 < t_min < t_max, got {window}")
    sel = (sr.t_grid >= t_min) & (sr.t_grid <= t_max)
    if sel.sum() < 2:
        raise DomainError("fewer than two sweep samples inside the fit window")
    t = sr.t_grid[sel]
    values = sr.trajectories[:, sel]
    tol = TOL_ABS
    usable = np.all(np.abs(values.imag) <= tol, axis=1) & np.all(np.abs(values) > tol, axis=1)
    if trajectory_ids is None:
        ids = [int(i) for i in np.flatnonzero(usable)]
        if not ids:
            raise DomainError("no trajectory is real and non-zero on the window")
    else:
        ids = sorted(int(i) for i in trajectory_ids)
        bad = [i for i in ids if not usable[i]]
        if bad:
            raise DomainError(f"trajectories {bad} are not real and non-zero on the window")
    log_t = np.log(t)
    log_q = np.log(np.abs(values[ids].real))
    slopes = {i: float(np.polyfit(log_t, row, 1)[0]) for i, row in zip(ids, log_q)}
    p = float(np.median(list(slopes.values())))
    log_c = (log_q - p * log_t).mean(axis=1)
    resid = log_q - (log_c[:, None] + p * log_t)
    return UnfoldingFit(
        exponent=p,
        coefficients={i: float(np.exp(lc)) for i, lc in zip(ids, log_c)},
        slopes=slopes,
        fit_window=(float(t_min), float(t_max)),
        residual=float(np.sqrt(np.mean(resid**2))),
    )
