"""Spin-1 condensate in the single-mode approximation, zero-magnetization sector.

The spin-changing interaction plus a quadratic Zeeman term acts on three
bosonic modes a_{-1}, a_0, a_{+1}:

    H = (c1/N) * ( a1'a1'a1 a1 + am'am'am am - 2 a1'am'a1 am
                   + 2 a1'a0'a0 a1 + 2 am'a0'a0 am
                   + 2 a0'a0'a1 am + 2 a1'am'a0 a0 ) - q a0'a0

(primes denote creation operators, am = a_{-1}).  The magnetization
n_1 - n_{-1} is conserved, so the zero-magnetization Fock states
|k, N-2k, k> with k = 0..N/2 close under H and the sector Hamiltonian is a
real symmetric tridiagonal matrix of dimension D = N/2 + 1.  Energies are
measured in units of |c1| and q is dimensionless in the same units, which
puts the ferromagnetic ground-state transitions at q = -4 and q = +4 and
the anti-ferromagnetic one at q = 0.

Matrix elements on |k, N-2k, k>:

    diagonal[k]    = (c1/N) * (2k(k-1) - 2k^2 + 4k(N-2k)) - q(N-2k)
    offdiagonal[k] = (c1/N) * 2(k+1) * sqrt((N-2k)(N-2k-1))      (k <-> k+1)

Read as a single particle hopping on a finite chain, ``offdiagonal`` is the
bond hopping J(i) and ``diagonal`` the onsite potential eta(i); q enters
only through eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError

__all__ = [
    "SpinorModel",
    "FockSector",
    "TridiagonalOperator",
    "build_hamiltonian",
    "build_observable_n0",
    "lattice_parameters",
]


@dataclass(frozen=True)
class SpinorModel:
    """Model parameters: atom number, interaction sign/scale, Zeeman strength.

    ``c1 = -1`` is the ferromagnetic condensate, ``c1 = +1`` the
    anti-ferromagnetic one; any nonzero value is accepted and simply scales
    the energy unit.
    """

    n_atoms: int
    c1: float = -1.0
    q: float = 0.0

    def __post_init__(self):
        n = self.n_atoms
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise ModelError(f"n_atoms must be an integer, got {n!r}")
        if n < 2 or n % 2 != 0:
            raise ModelError(
                f"n_atoms must be a positive even integer >= 2, got {n}"
            )
        if not np.isfinite(self.c1) or self.c1 == 0.0:
            raise ModelError(f"c1 must be finite and nonzero, got {self.c1}")
        if not np.isfinite(self.q):
            raise ModelError(f"q must be finite, got {self.q}")

    @property
    def dim(self) -> int:
        """Dimension D = N/2 + 1 of the zero-magnetization sector."""
        return self.n_atoms // 2 + 1


@dataclass(frozen=True)
class FockSector:
    """Zero-magnetization Fock basis |k, N-2k, k>, indexed by k = 0..N/2."""

    dim: int
    n0_values: np.ndarray  # N - 2k for k = 0..N/2, strictly decreasing to 0

    @classmethod
    def for_model(cls, model: SpinorModel) -> "FockSector":
        n0 = np.arange(model.n_atoms, -1, -2, dtype=np.float64)
        return cls(dim=model.dim, n0_values=n0)


@dataclass(frozen=True)
class TridiagonalOperator:
    """Real symmetric tridiagonal matrix, off-diagonal stored once."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diagonal, dtype=np.float64)
        e = np.asarray(self.offdiagonal, dtype=np.float64)
        if d.ndim != 1 or e.ndim != 1 or d.size < 1 or e.size != d.size - 1:
            raise ModelError(
                f"need diagonal length D >= 1 and offdiagonal length D - 1, "
                f"got {d.shape} and {e.shape}"
            )
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ModelError("operator entries must be finite")
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "offdiagonal", e)

    @property
    def dim(self) -> int:
        return self.diagonal.size

    def norm_bound(self) -> float:
        """Infinity-norm bound, used as the scale for tolerances."""
        d, e = self.diagonal, self.offdiagonal
        if d.size == 1:
            return abs(float(d[0]))
        row = np.abs(d).copy()
        row[:-1] += np.abs(e)
        row[1:] += np.abs(e)
        return float(row.max())

    def matvec(self, v: np.ndarray) -> np.ndarray:
        d, e = self.diagonal, self.offdiagonal
        out = d * v
        if e.size:
            out[:-1] += e * v[1:]
            out[1:] += e * v[:-1]
        return out

    def expectation(self, v: np.ndarray) -> float:
        """Quadratic form v . H v for a real vector."""
        return float(v @ self.matvec(v))

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diagonal)
        if self.offdiagonal.size:
            m += np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)
        return m

    def negated(self) -> "TridiagonalOperator":
        return TridiagonalOperator(-self.diagonal, -self.offdiagonal)


def build_hamiltonian(model: SpinorModel) -> TridiagonalOperator:
    """Sector Hamiltonian for ``model`` as a tridiagonal operator.

    Each normal-ordered term acts on |k, N-2k, k>; the only off-diagonal
    process converts a pair of m=0 atoms into a (+1, -1) pair and back.
    """
    n = float(model.n_atoms)
    c1 = model.c1
    q = model.q
    k = np.arange(model.dim, dtype=np.float64)
    diag = (c1 / n) * (2.0 * k * (k - 1.0) - 2.0 * k * k + 4.0 * k * (n - 2.0 * k))
    diag -= q * (n - 2.0 * k)
    kk = k[:-1]
    off = (c1 / n) * 2.0 * (kk + 1.0) * np.sqrt((n - 2.0 * kk) * (n - 2.0 * kk - 1.0))
    return TridiagonalOperator(diag, off)


def build_observable_n0(model: SpinorModel) -> np.ndarray:
    """Diagonal of the m=0 occupation N0 in the sector basis: entry k is N - 2k."""
    return FockSector.for_model(model).n0_values.copy()


def lattice_parameters(model: SpinorModel) -> tuple[np.ndarray, np.ndarray]:
    """Hopping J(i) and onsite potential eta(i) of the equivalent chain.

    The sector Hamiltonian read as a single particle hopping on D sites.
    J is independent of q; eta picks up the linear shift -q(N-2i).
    """
    op = build_hamiltonian(model)
    return op.offdiagonal.copy(), op.diagonal.copy()
