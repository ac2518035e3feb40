"""Resolvent norms and epsilon-pseudospectra on a rectangular grid.

The field stored everywhere is ``s(z) = sigma_min(zI - Q) = 1 / ||R(z)||``.
The epsilon-pseudospectrum is the open set ``{z : s(z) < eps}``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.linalg import lapack

from .errors import DomainError, GridResolutionError
from .model import LatticeOperator
from .spectral import Spectrum, classify, eigenvalues

DEFAULT_LADDER = tuple(10.0**-k for k in range(1, 9))
_CHUNK_BYTES = 32 * 2**20


class GridResolutionWarning(UserWarning):
    """Eigenvalue sits in a grid cell whose samples do not reach a ladder level."""


@dataclass(frozen=True)
class GridSpec:
    re_range: tuple = (-1.5, 1.5)
    im_range: tuple = (-1.5, 1.5)
    nx: int = 201
    ny: int = 201

    def __post_init__(self):
        for name, (lo, hi) in (("re_range", self.re_range), ("im_range", self.im_range)):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise DomainError(f"{name} must satisfy min < max, got {(lo, hi)}")
        if self.nx < 2 or self.ny < 2:
            raise DomainError("grid needs at least 2 samples per axis")

    @property
    def re_values(self) -> np.ndarray:
        return np.linspace(*self.re_range, self.nx)

    @property
    def im_values(self) -> np.ndarray:
        return np.linspace(*self.im_range, self.ny)

    @property
    def steps(self) -> tuple:
        return (
            (self.re_range[1] - self.re_range[0]) / (self.nx - 1),
            (self.im_range[1] - self.im_range[0]) / (self.ny - 1),
        )

    def contains(self, z: complex) -> bool:
        return (
            self.re_range[0] <= z.real <= self.re_range[1]
            and self.im_range[0] <= z.imag <= self.im_range[1]
        )

    def nearest(self, z: complex) -> tuple:
        dx, dy = self.steps
        i = int(np.clip(np.rint((z.real - self.re_range[0]) / dx), 0, self.nx - 1))
        j = int(np.clip(np.rint((z.imag - self.im_range[0]) / dy), 0, self.ny - 1))
        return i, j

    def to_dict(self) -> dict:
        return {
            "re_range": list(self.re_range),
            "im_range": list(self.im_range),
            "nx": self.nx,
            "ny": self.ny,
        }


@dataclass(frozen=True)
class ResolventField:
    grid: GridSpec
    s_values: np.ndarray  # shape (nx, ny); [i, j] <-> re_values[i] + 1j * im_values[j]
    descriptor: dict


@dataclass(frozen=True)
class ComponentReport:
    epsilon_ladder: tuple
    labels: list  # one (nx, ny) int array per ladder value
    component_counts: list  # grid components plus unresolved clusters, per ladder value
    clusters: list  # lists of indices into the spectrum
    cluster_centers: np.ndarray
    cluster_kinds: list  # "real", "ghost" or "mixed"
    cluster_labels: np.ndarray  # (len(ladder), n_clusters) component id, <0 if unresolved
    merge_epsilon: np.ndarray
    unresolved: list = field(default_factory=list)  # (cluster, eps) pairs
    grid_component_counts: list = field(default_factory=list)  # raw labelling only

    def real_ghost_merge_epsilon(self) -> float:
        """Largest ladder value at which every real cluster is apart from every ghost cluster.

        ``0.0`` when a real and a ghost eigenvalue share a cluster, ``nan``
        when one of the two kinds is absent.
        """
        if "mixed" in self.cluster_kinds:
            return 0.0
        real = [i for i, k in enumerate(self.cluster_kinds) if k == "real"]
        ghost = [i for i, k in enumerate(self.cluster_kinds) if k == "ghost"]
        if not real or not ghost:
            return float("nan")
        return float(self.merge_epsilon[np.ix_(real, ghost)].min())


def _shifted(q: LatticeOperator, z: complex) -> np.ndarray:
    return z * np.eye(q.n) - q.entries


def sigma_min_svd(q: LatticeOperator, z: complex) -> float:
    """Reference value from a full dense SVD."""
    return float(np.linalg.svd(_shifted(q, z), compute_uv=False)[-1])


def sigma_min_inverse(q: LatticeOperator, z: complex, *, max_iter: int | None = None, rtol: float = 1e-14):
    """Inverse Lanczos on ``(A^H A)^-1`` with ``A = zI - Q`` factored as a tridiagonal.

    Returns ``(sigma, converged)``; ``sigma`` is nan when the inverse
    overflows.  Each step costs two tridiagonal solves;
    the Krylov basis is fully reorthogonalised, so the iteration is exact
    after at most ``n`` steps.  It stops once the Ritz residual bound of
    the largest Ritz value ``theta`` drops below ``rtol`` relative, and
    reports ``sigma = theta**-0.5``.
    """
    z = complex(z)
    a = _shifted(q, z)
    if q.n >= 3:
        dl_f, d_f, du_f, du2, ipiv, info = lapack.zgttrf(
            (-q.sub).astype(complex), np.full(q.n, z, dtype=complex), (-q.sup).astype(complex)
        )

        def solve(b, trans):
            return lapack.zgttrs(dl_f, d_f, du_f, du2, ipiv, b, trans=trans)[0]

    else:
        # the banded LAPACK wrapper rejects n = 2
        lu, ipiv, info = lapack.zgetrf(a)

        def solve(b, trans):
            return lapack.zgetrs(lu, ipiv, b, trans={"N": 0, "C": 2}[trans])[0]

    if info > 0:
        return 0.0, True  # exactly singular shift
    steps = q.n if max_iter is None else min(max_iter, q.n)
    v = np.random.default_rng(0).standard_normal(q.n).astype(complex)
    basis = np.zeros((q.n, steps), dtype=complex)
    h = np.zeros((steps, steps), dtype=complex)
    basis[:, 0] = v / np.linalg.norm(v)
    for k in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            w = solve(solve(basis[:, k], "C"), "N")
            for _ in range(2):
                c = basis[:, : k + 1].conj().T @ w
                w -= basis[:, : k + 1] @ c
                h[: k + 1, k] += c
            beta = np.linalg.norm(w)
        if not (np.isfinite(beta) and np.all(np.isfinite(h[: k + 1, k]))):
            # (A^H A)^-1 overflows when sigma is below ~1e-154; leave it to the SVD
            return float("nan"), False
        hk = h[: k + 1, : k + 1]
        theta, y = np.linalg.eigh((hk + hk.conj().T) / 2)
        if theta[-1] <= 0:
            return float("nan"), False
        # 1/sqrt(theta) beats ||A u||, whose error grows like (sigma_{n-1}/sigma_n)^2
        sigma = float(1.0 / np.sqrt(theta[-1]))
        if beta * abs(y[-1, -1]) <= rtol * theta[-1] or k + 1 == q.n:
            return sigma, True
        if k + 1 < steps:
            basis[:, k + 1] = w / beta
            h[k + 1, k] = beta
    return sigma, False


def sigma_min(q: LatticeOperator, z: complex, method: str = "inverse") -> float:
    """Smallest singular value of ``zI - Q``.

    ``method="inverse"`` uses the tridiagonal inverse Lanczos iteration and
    falls back to the dense SVD if it has not converged; ``method="svd"`` always uses the
    dense SVD.
    """
    if not np.isfinite(complex(z)):
        raise DomainError(f"z must be finite, got {z!r}")
    if method == "svd":
        return sigma_min_svd(q, z)
    if method != "inverse":
        raise DomainError(f"unknown sigma_min method {method!r}")
    sigma, ok = sigma_min_inverse(q, z)
    return sigma if ok else sigma_min_svd(q, z)


def _field_rows(q: LatticeOperator, re_vals, im_vals) -> np.ndarray:
    eye = np.eye(q.n)
    z = re_vals[:, None] + 1j * im_vals[None, :]
    stack = z[..., None, None] * eye - q.entries
    return np.linalg.svd(stack, compute_uv=False)[..., -1]


def resolvent_field(q: LatticeOperator, grid: GridSpec | None = None, *, threads: int | None = None):
    """Evaluate ``s(z)`` on every grid sample.

    Each real-axis column block is an independent batched SVD, so the result
    does not depend on ``threads``.
    """
    grid = grid or GridSpec()
    re_vals, im_vals = grid.re_values, grid.im_values
    # chunking depends only on sizes, never on the thread count
    rows = max(1, _CHUNK_BYTES // (16 * grid.ny * q.n * q.n))
    work = [re_vals[i : i + rows] for i in range(0, grid.nx, rows)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: _field_rows(q, r, im_vals), work))
    else:
        parts = [_field_rows(q, r, im_vals) for r in work]
    return ResolventField(grid=grid, s_values=np.concatenate(parts, axis=0), descriptor=q.descriptor())


def _clusters(ev: np.ndarray, radius: float) -> list:
    parent = list(range(ev.size))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(ev.size):
        for j in range(i + 1, ev.size):
            if abs(ev[i] - ev[j]) < radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(ev.size):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _cluster_kinds(clusters, real_mask) -> list:
    kinds = []
    for g in clusters:
        flags = {bool(real_mask[i]) for i in g}
        kinds.append("mixed" if len(flags) == 2 else ("real" if flags == {True} else "ghost"))
    return kinds


def component_report(
    f: ResolventField,
    ladder=DEFAULT_LADDER,
    spectrum: Spectrum | None = None,
    *,
    real_mask=None,
    strict: bool = False,
) -> ComponentReport:
    """Connected components of the epsilon-regions and the pairwise merge levels.

    Components use 4-connectivity.  Eigenvalues closer than two grid steps
    are pre-merged into one cluster; each cluster is attached to the
    component holding its best-resolved member's nearest grid sample.  A
    cluster whose samples all satisfy ``s >= eps`` is still inside the
    true pseudospectrum but cannot be connected on the grid, so it is treated
    as an isolated component at that level and reported in ``unresolved``
    (with a :class:`GridResolutionWarning`, or an error when ``strict``).

    ``merge_epsilon[i, j]`` is the largest ladder value at which clusters
    ``i`` and ``j`` lie in different components (``0`` if never).
    """
    ladder = tuple(float(e) for e in ladder)
    if not ladder or any(e <= 0 for e in ladder) or any(np.diff(ladder) >= 0):
        raise DomainError("ladder must be non-empty, positive and strictly decreasing")
    if spectrum is None:
        raise DomainError("component_report needs the operator spectrum")
    ev = spectrum.eigenvalues
    grid = f.grid
    outside = [complex(z) for z in ev if not grid.contains(z)]
    if outside:
        shown = ", ".join(f"{z:.6g}" for z in outside[:4]) + (", ..." if len(outside) > 4 else "")
        raise DomainError(f"{len(outside)} eigenvalue(s) outside the grid rectangle: {shown}")
    if real_mask is None:
        real_mask = classify(spectrum).real_mask
    radius = 2 * max(grid.steps)
    clusters = _clusters(ev, radius)
    kinds = _cluster_kinds(clusters, real_mask)
    s = f.s_values

    seeds = []
    for g in clusters:
        cells = [grid.nearest(ev[i]) for i in g]
        seeds.append(min(cells, key=lambda c: s[c]))

    labels, counts, grid_counts, unresolved = [], [], [], []
    cl = np.empty((len(ladder), len(clusters)), dtype=int)
    for k, eps in enumerate(ladder):
        lab, ncomp = ndimage.label(s < eps)
        labels.append(lab)
        grid_counts.append(int(ncomp))
        missing = 0
        for c, cell in enumerate(seeds):
            if lab[cell] > 0:
                cl[k, c] = lab[cell]
            else:
                cl[k, c] = -(c + 1)
                unresolved.append((c, eps))
                missing += 1
        counts.append(int(ncomp) + missing)
    if unresolved:
        worst = max(e for _, e in unresolved)
        msg = (
            f"{len({c for c, _ in unresolved})} eigenvalue cluster(s) not resolved by the grid "
            f"at ladder values up to {worst:.3g}"
        )
        if strict:
            raise GridResolutionError(msg)
        warnings.warn(msg, GridResolutionWarning, stacklevel=2)

    nc = len(clusters)
    merge = np.zeros((nc, nc))
    for i in range(nc):
        for j in range(i + 1, nc):
            apart = [eps for k, eps in enumerate(ladder) if cl[k, i] != cl[k, j]]
            merge[i, j] = merge[j, i] = max(apart) if apart else 0.0
    centers = np.array([ev[g].mean() for g in clusters])
    return ComponentReport(
        epsilon_ladder=ladder,
        labels=labels,
        component_counts=counts,
        clusters=clusters,
        cluster_centers=centers,
        cluster_kinds=kinds,
        cluster_labels=cl,
        merge_epsilon=merge,
        unresolved=unresolved,
        grid_component_counts=grid_counts,
    )


def bottleneck_levels(f: ResolventField, points) -> np.ndarray:
    """Exact grid merge levels between the samples nearest to ``points``.

    Entry ``(i, j)`` is the smallest ``eps`` at which the two samples are
    joined by a 4-connected path with ``s < eps`` everywhere, i.e. the
    minimax of ``s`` over grid paths.  This is the continuous-ladder limit
    of :attr:`ComponentReport.merge_epsilon`.
    """
    grid = f.grid
    s = f.s_values
    nx, ny = s.shape
    ids = np.arange(nx * ny).reshape(nx, ny)
    a = np.concatenate([ids[:-1, :].ravel(), ids[:, :-1].ravel()])
    b = np.concatenate([ids[1:, :].ravel(), ids[:, 1:].ravel()])
    flat = s.ravel()
    weight = np.maximum(flat[a], flat[b])
    order = np.argsort(weight, kind="stable")

    seeds = [int(ids[grid.nearest(complex(p))]) for p in points]
    k = len(seeds)
    out = np.zeros((k, k))
    for i in range(k):
        out[i, i] = flat[seeds[i]]
    parent = np.arange(nx * ny)
    members = {}
    for idx, sd in enumerate(seeds):
        members.setdefault(sd, set()).add(idx)
    pending = k * (k - 1) // 2 - sum(len(m) * (len(m) - 1) // 2 for m in members.values())
    for m in members.values():
        for i in m:
            for j in m:
                if i != j:
                    out[i, j] = out[i, i]

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for e in order:
        if pending <= 0:
            break
        ra, rb = find(a[e]), find(b[e])
        if ra == rb:
            continue
        ma, mb = members.pop(ra, set()), members.pop(rb, set())
        for i in ma:
            for j in mb:
                out[i, j] = out[j, i] = weight[e]
                pending -= 1
        parent[ra] = rb
        if ma or mb:
            members[rb] = ma | mb
    return out


def contours(f: ResolventField, ladder=DEFAULT_LADDER) -> dict:
    """Level sets ``s = eps`` as polylines of ``(re, im)`` pairs, keyed by ``eps``.

    Marching squares runs on ``log10 s`` so that interpolation across the
    steep wells around eigenvalues stays reasonable.
    """
    from skimage.measure import find_contours

    grid = f.grid
    dx, dy = grid.steps
    logs = np.log10(np.maximum(f.s_values, np.finfo(float).tiny))
    out = {}
    for eps in ladder:
        lines = []
        for path in find_contours(logs, np.log10(eps)):
            re = grid.re_range[0] + path[:, 0] * dx
            im = grid.im_range[0] + path[:, 1] * dy
            lines.append(np.column_stack([re, im]))
        out[float(eps)] = lines
    return out


def separation_summary(q: LatticeOperator, grid: GridSpec | None = None, ladder=DEFAULT_LADDER):
    """Field, spectrum, component report and exact bottleneck levels for one operator."""
    spec = eigenvalues(q)
    cls = classify(spec)
    fld = resolvent_field(q, grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GridResolutionWarning)
        rep = component_report(fld, ladder, spec, real_mask=cls.real_mask)
    levels = bottleneck_levels(fld, rep.cluster_centers)
    real = [i for i, k in enumerate(rep.cluster_kinds) if k == "real"]
    ghost = [i for i, k in enumerate(rep.cluster_kinds) if k == "ghost"]
    exact = float(levels[np.ix_(real, ghost)].min()) if real and ghost else float("nan")
    return {
        "spectrum": spec,
        "classification": cls,
        "field": fld,
        "report": rep,
        "bottleneck": levels,
        "real_ghost_merge_epsilon": rep.real_ghost_merge_epsilon(),
        "real_ghost_bottleneck": exact,
    }
