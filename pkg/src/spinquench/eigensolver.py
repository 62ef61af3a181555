"""Eigensolver for real symmetric tridiagonal operators.

Algorithm choice: Sturm-sequence bisection for eigenvalues plus shifted
inverse iteration for eigenvectors, both written here and compiled with
numba.  Compared with an implicit-shift QL sweep this costs O(D) per
eigenpair, supports partial spectra (single extremal state, an index or
energy window) at the same unit cost, and decomposes the D = 5001 sector
of a 10^4-atom condensate in seconds.  Eigenvalues converge to machine
precision by construction; eigenvectors from close eigenvalues are
re-orthogonalized within gap clusters.

Determinism: bisection is exact-arithmetic-free but branch-deterministic,
inverse iteration starts from a fixed per-index pseudo-random vector, and
every eigenvector's sign is fixed so its largest-magnitude entry is
positive.  Identical inputs give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import EigensolverError
from .model import TridiagonalOperator

__all__ = ["EigenSystem", "decompose", "extremal_state", "eigenvalues",
           "eigenvalues_by_index", "index_range_for_energies", "eigenvectors_for"]

# Gap below which consecutive eigenvalues are treated as one cluster for
# re-orthogonalization, relative to the operator norm.
CLUSTER_TOL = 1e-5
# Gap below which a pair is flagged as numerically degenerate, relative to
# the operator norm.  Downstream long-time averages fold these pairs in.
DEGENERACY_TOL = 1e-12
# Residual bound ||H v - E v|| <= RESIDUAL_TOL * ||H|| enforced per pair.
RESIDUAL_TOL = 1e-9

_MAX_BISECT = 110


@njit(cache=True)
def _count_below(d, e2, x, pivmin):
    """Number of eigenvalues below x (negative pivots of LDL^T).

    A vanishing pivot counts as negative (the usual convention), so the
    count stays consistent when x hits an eigenvalue of a leading submatrix.
    """
    n = d.shape[0]
    count = 0
    t = d[0] - x
    for i in range(1, n):
        if abs(t) < pivmin:
            t = -pivmin
        if t < 0.0:
            count += 1
        t = d[i] - x - e2[i - 1] / t
    if abs(t) < pivmin:
        t = -pivmin
    if t < 0.0:
        count += 1
    return count


@njit(cache=True)
def _bisect_one(d, e2, j, lo, hi, pivmin):
    """Eigenvalue number j (0-based, ascending) inside the bracket [lo, hi]."""
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _count_below(d, e2, mid, pivmin) <= j:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def _bisect_block(d, e2, j_lo, j0, j1, glo, ghi, pivmin, abstol, out):
    """Lockstep bisection for indices j0..j1-1; the Sturm recurrence runs
    across the whole block per matrix row so it vectorizes."""
    n = d.shape[0]
    m = j1 - j0
    lo = np.full(m, glo)
    hi = np.full(m, ghi)
    mid = np.empty(m, dtype=np.float64)
    t = np.empty(m, dtype=np.float64)
    cnt = np.empty(m, dtype=np.int64)
    for _ in range(_MAX_BISECT):
        width = 0.0
        for j in range(m):
            w = hi[j] - lo[j]
            if w > width:
                width = w
            mid[j] = 0.5 * (lo[j] + hi[j])
        if width <= abstol:
            break
        for j in range(m):
            t[j] = d[0] - mid[j]
            cnt[j] = 0
        for i in range(1, n):
            di = d[i]
            e2i = e2[i - 1]
            for j in range(m):
                tj = t[j]
                if abs(tj) < pivmin:
                    tj = -pivmin
                if tj < 0.0:
                    cnt[j] += 1
                t[j] = di - mid[j] - e2i / tj
        for j in range(m):
            tj = t[j]
            if abs(tj) < pivmin:
                tj = -pivmin
            if tj < 0.0:
                cnt[j] += 1
            if cnt[j] <= j_lo + j0 + j:
                lo[j] = mid[j]
            else:
                hi[j] = mid[j]
    for j in range(m):
        out[j0 + j] = 0.5 * (lo[j] + hi[j])


@njit(cache=True, parallel=True)
def _bisect_many(d, e2, j_lo, j_hi, glo, ghi, pivmin, abstol):
    m = j_hi - j_lo + 1
    out = np.empty(m, dtype=np.float64)
    block = 1024
    n_blocks = (m + block - 1) // block
    for b in prange(n_blocks):
        j0 = b * block
        j1 = min(j0 + block, m)
        _bisect_block(d, e2, j_lo, j0, j1, glo, ghi, pivmin, abstol, out)
    return out


@njit(cache=True)
def _gershgorin(d, e):
    n = d.shape[0]
    lo = d[0]
    hi = d[0]
    for i in range(n):
        r = 0.0
        if i > 0:
            r += abs(e[i - 1])
        if i < n - 1:
            r += abs(e[i])
        if d[i] - r < lo:
            lo = d[i] - r
        if d[i] + r > hi:
            hi = d[i] + r
    pad = 2.0e-15 * max(abs(lo), abs(hi)) + 1e-300
    return lo - pad, hi + pad


@njit(cache=True)
def _factor_shifted(d, e, lam, pivmin, u, u1, u2, mult, piv):
    """Partial-pivot LU of (T - lam I); fill-in limited to two superdiagonals."""
    n = d.shape[0]
    b = d[0] - lam
    c = e[0] if n > 1 else 0.0
    for i in range(n - 1):
        a1 = e[i]
        b1 = d[i + 1] - lam
        c1 = e[i + 1] if i + 2 < n else 0.0
        if abs(b) >= abs(a1):
            piv[i] = False
            if abs(b) < pivmin:
                b = pivmin if b >= 0.0 else -pivmin
            m = a1 / b
            u[i] = b
            u1[i] = c
            u2[i] = 0.0
            mult[i] = m
            b = b1 - m * c
            c = c1
        else:
            piv[i] = True
            m = b / a1
            u[i] = a1
            u1[i] = b1
            u2[i] = c1
            mult[i] = m
            b = c - m * b1
            c = -m * c1
    if abs(b) < pivmin:
        b = pivmin if b >= 0.0 else -pivmin
    u[n - 1] = b
    if n > 1:
        u1[n - 1] = 0.0
        u2[n - 1] = 0.0


@njit(cache=True)
def _solve_factored(u, u1, u2, mult, piv, y):
    n = u.shape[0]
    for i in range(n - 1):
        if piv[i]:
            tmp = y[i]
            y[i] = y[i + 1]
            y[i + 1] = tmp
        y[i + 1] -= mult[i] * y[i]
    y[n - 1] /= u[n - 1]
    if n > 1:
        y[n - 2] = (y[n - 2] - u1[n - 2] * y[n - 1]) / u[n - 2]
    for i in range(n - 3, -1, -1):
        y[i] = (y[i] - u1[i] * y[i + 1] - u2[i] * y[i + 2]) / u[i]


@njit(cache=True)
def _fill_start(seed, y):
    # SplitMix64-style stream; fixed seed makes runs reproducible.
    x = np.uint64(seed)
    for i in range(y.shape[0]):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        z = x
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
        y[i] = (np.float64(z >> np.uint64(11)) / 9007199254740992.0) - 0.5


@njit(cache=True)
def _residual_norm(d, e, lam, y):
    n = d.shape[0]
    s = 0.0
    for i in range(n):
        r = (d[i] - lam) * y[i]
        if i > 0:
            r += e[i - 1] * y[i - 1]
        if i < n - 1:
            r += e[i] * y[i + 1]
        s += r * r
    return np.sqrt(s)


@njit(cache=True)
def _vectors_kernel(d, e, lams, cluster_tol, scale, vt, resid):
    """Inverse iteration for each lams[j]; eigenvectors go into rows of vt."""
    n = d.shape[0]
    m = lams.shape[0]
    u = np.empty(n, dtype=np.float64)
    u1 = np.empty(n, dtype=np.float64)
    u2 = np.empty(n, dtype=np.float64)
    mult = np.empty(n, dtype=np.float64)
    piv = np.empty(n, dtype=np.bool_)
    y = np.empty(n, dtype=np.float64)
    # pivot floor well above underflow so a singular shift cannot overflow
    # the back substitution; the perturbation stays at rounding level
    pivfloor = 2.3e-16 * scale
    cluster_start = 0
    for j in range(m):
        lam = lams[j]
        if j > 0 and lam - lams[j - 1] > cluster_tol:
            cluster_start = j
        _factor_shifted(d, e, lam, pivfloor, u, u1, u2, mult, piv)
        best = -1.0
        for attempt in range(4):
            _fill_start(np.uint64(j * 2654435761 + attempt * 40503 + n), y)
            nrm = np.sqrt(np.sum(y * y))
            for i in range(n):
                y[i] /= nrm
            n_iter = 2 + attempt
            for it in range(n_iter):
                _solve_factored(u, u1, u2, mult, piv, y)
                for p in range(cluster_start, j):
                    proj = 0.0
                    for i in range(n):
                        proj += vt[p, i] * y[i]
                    for i in range(n):
                        y[i] -= proj * vt[p, i]
                nrm = np.sqrt(np.sum(y * y))
                if nrm == 0.0 or not np.isfinite(nrm):
                    break
                for i in range(n):
                    y[i] /= nrm
            if nrm == 0.0 or not np.isfinite(nrm):
                continue
            best = _residual_norm(d, e, lam, y)
            if best <= 1e-11 * scale:
                break
        resid[j] = best if best >= 0.0 else np.inf
        imax = 0
        amax = -1.0
        for i in range(n):
            a = abs(y[i])
            if a > amax:
                amax = a
                imax = i
        if y[imax] < 0.0:
            for i in range(n):
                vt[j, i] = -y[i]
        else:
            for i in range(n):
                vt[j, i] = y[i]


@dataclass(frozen=True)
class EigenSystem:
    """Full decomposition of one tridiagonal operator.

    ``values`` ascend (index 0 is the ground state), ``vectors[:, a]`` is the
    unit eigenvector of ``values[a]`` with its largest-magnitude entry
    positive.  ``degenerate_pairs`` lists indices i whose gap to i+1 is
    below DEGENERACY_TOL * scale.
    """

    values: np.ndarray
    vectors: np.ndarray
    dim: int
    scale: float
    degenerate_pairs: np.ndarray

    @property
    def ground(self) -> tuple[float, np.ndarray]:
        return float(self.values[0]), self.vectors[:, 0]

    @property
    def most_excited(self) -> tuple[float, np.ndarray]:
        return float(self.values[-1]), self.vectors[:, -1]


def _prepare(op: TridiagonalOperator):
    """Operator data divided by a power of two near its norm.

    The division is exact, so eigenvectors and (after multiplying back)
    eigenvalues are unaffected; it keeps every intermediate of the solver
    near unit scale, so extreme operator norms can neither overflow the
    inverse-iteration growth nor underflow the Sturm pivots.
    """
    scale = max(op.norm_bound(), 1e-300)
    pow2 = float(np.ldexp(1.0, int(np.frexp(scale)[1])))
    d = np.ascontiguousarray(op.diagonal, dtype=np.float64) / pow2
    e = np.ascontiguousarray(op.offdiagonal, dtype=np.float64) / pow2
    e2 = e * e
    norm_scaled = scale / pow2  # in [0.5, 1]
    pivmin = max(e2.max() if e2.size else 0.0, 1.0) * 2.3e-308
    return d, e, e2, norm_scaled, pivmin, pow2


def eigenvalues_by_index(op: TridiagonalOperator, j_lo: int, j_hi: int) -> np.ndarray:
    """Eigenvalues with ascending indices j_lo..j_hi inclusive (0-based)."""
    d, e, e2, scale, pivmin, pow2 = _prepare(op)
    n = d.size
    if not (0 <= j_lo <= j_hi < n):
        raise EigensolverError(f"index range [{j_lo}, {j_hi}] outside [0, {n - 1}]")
    if n == 1:
        return d * pow2
    glo, ghi = _gershgorin(d, e)
    abstol = 2.3e-16 * scale
    return _bisect_many(d, e2, j_lo, j_hi, glo, ghi, pivmin, abstol) * pow2


def eigenvalues(op: TridiagonalOperator) -> np.ndarray:
    """All eigenvalues, ascending."""
    return eigenvalues_by_index(op, 0, op.dim - 1)


def index_range_for_energies(op: TridiagonalOperator, e_lo: float, e_hi: float):
    """(j_lo, j_hi) of eigenvalues inside [e_lo, e_hi], or None if empty."""
    d, e, e2, scale, pivmin, pow2 = _prepare(op)
    if d.size == 1:
        return (0, 0) if e_lo <= d[0] * pow2 <= e_hi else None
    n_below_lo = _count_below(d, e2, e_lo / pow2, pivmin)
    n_below_hi = _count_below(d, e2, np.nextafter(e_hi / pow2, np.inf), pivmin)
    if n_below_hi <= n_below_lo:
        return None
    return n_below_lo, n_below_hi - 1


def eigenvectors_for(op: TridiagonalOperator, values: np.ndarray) -> np.ndarray:
    """Unit eigenvectors (columns) for the given eigenvalues.

    ``values`` must be ascending eigenvalues of ``op``; close eigenvalues
    are expected to be passed together so cluster re-orthogonalization sees
    all members.
    """
    d, e, e2, scale, pivmin, pow2 = _prepare(op)
    values = np.ascontiguousarray(values, dtype=np.float64) / pow2
    n, m = d.size, values.size
    if n == 1:
        return np.ones((1, m), dtype=np.float64)
    vt = np.empty((m, n), dtype=np.float64)
    resid = np.empty(m, dtype=np.float64)
    _vectors_kernel(d, e, values, CLUSTER_TOL * scale, scale, vt, resid)
    bad = np.nonzero(~(resid <= RESIDUAL_TOL * scale))[0]
    if bad.size:
        j = int(bad[0])
        raise EigensolverError(
            f"inverse iteration residual {resid[j]:.3e} exceeds "
            f"{RESIDUAL_TOL * scale:.3e} at eigenvalue index {j}",
            index=j,
        )
    return vt.T


def decompose(op: TridiagonalOperator) -> EigenSystem:
    """Full spectrum and orthonormal eigenvectors of ``op``."""
    n = op.dim
    scale = max(op.norm_bound(), 1e-300)
    if n == 1:
        return EigenSystem(
            values=op.diagonal.copy(),
            vectors=np.ones((1, 1), dtype=np.float64),
            dim=1,
            scale=scale,
            degenerate_pairs=np.empty(0, dtype=np.int64),
        )
    vals = eigenvalues(op)
    vecs = eigenvectors_for(op, vals)
    gaps = np.diff(vals)
    degenerate = np.nonzero(gaps < DEGENERACY_TOL * scale)[0]
    return EigenSystem(values=vals, vectors=vecs, dim=n, scale=scale,
                       degenerate_pairs=degenerate)


def extremal_state(op: TridiagonalOperator, which: str = "ground"):
    """Lowest ("ground") or highest ("most_excited") eigenpair of ``op``."""
    if which not in ("ground", "most_excited"):
        raise ValueError(f"which must be 'ground' or 'most_excited', got {which!r}")
    j = 0 if which == "ground" else op.dim - 1
    vals = eigenvalues_by_index(op, j, j)
    vec = eigenvectors_for(op, vals)[:, 0]
    return float(vals[0]), vec
