"""Dense operator algebra on multi-site Hilbert spaces.

Sites are indexed from 0. Site 0 is the most significant digit of the
mixed-radix basis index, so ``kron(a, b)`` puts ``a`` on the leading sites.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .numeric import TOL, NumericalError


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemShape:
    local_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.local_dims)
        if not dims:
            raise ValueError("a system needs at least one site")
        if any(d < 2 for d in dims):
            raise ValueError(f"local dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "local_dims", dims)

    @classmethod
    def uniform(cls, n: int, d: int = 2) -> "SystemShape":
        return cls((d,) * n)

    @property
    def n_sites(self) -> int:
        return len(self.local_dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.local_dims))

    def doubled(self) -> "SystemShape":
        return SystemShape(self.local_dims * 2)

    def sub(self, sites: Iterable[int]) -> "SystemShape":
        return SystemShape(tuple(self.local_dims[s] for s in sites))


def _as_shape(shape) -> SystemShape:
    return shape if isinstance(shape, SystemShape) else SystemShape(tuple(shape))


@dataclass(frozen=True, eq=False)
class Operator:
    matrix: np.ndarray
    shape: SystemShape

    def __post_init__(self):
        object.__setattr__(self, "shape", _as_shape(self.shape))
        m = _frozen(self.matrix)
        d = self.shape.total_dim
        if m.shape != (d, d):
            raise ValueError(f"matrix of shape {m.shape} does not match total dimension {d}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.shape.total_dim

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, tol: float = TOL.hermitian) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return self.hermiticity_error() <= tol * scale

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.shape)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    shape: SystemShape

    def __post_init__(self):
        object.__setattr__(self, "shape", _as_shape(self.shape))
        v = _frozen(np.ravel(self.amplitudes))
        if v.size != self.shape.total_dim:
            raise ValueError(f"vector of length {v.size} does not match total dimension {self.shape.total_dim}")
        if abs(np.linalg.norm(v) - 1.0) > TOL.norm:
            raise ValueError(f"state is not normalized (norm {np.linalg.norm(v)!r})")
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, vector, shape) -> "PureState":
        v = np.asarray(vector, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / nrm, shape)

    def density(self) -> "DensityState":
        v = self.amplitudes
        return DensityState(np.outer(v, v.conj()), self.shape)


@dataclass(frozen=True, eq=False)
class DensityState:
    matrix: np.ndarray
    shape: SystemShape

    def __post_init__(self):
        object.__setattr__(self, "shape", _as_shape(self.shape))
        m = _frozen(self.matrix)
        d = self.shape.total_dim
        if m.shape != (d, d):
            raise ValueError(f"matrix of shape {m.shape} does not match total dimension {d}")
        if np.max(np.abs(m - m.conj().T)) > TOL.hermitian:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL.trace:
            raise ValueError(f"density matrix has trace {tr!r}")
        if np.linalg.eigvalsh(m)[0] < -TOL.positivity:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def maximally_mixed(cls, shape) -> "DensityState":
        shape = _as_shape(shape)
        return cls(np.eye(shape.total_dim) / shape.total_dim, shape)

    @property
    def dim(self) -> int:
        return self.shape.total_dim


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    shape: SystemShape
    degeneracy_tolerance: float = field(default=TOL.degeneracy)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_energy(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def degeneracy(self) -> int:
        return int(np.sum(self.eigenvalues <= self.eigenvalues[0] + self.degeneracy_tolerance))

    def ground_state(self) -> PureState:
        """First eigenvector of the ground manifold (arbitrary within a degenerate manifold)."""
        return PureState.normalized(self.eigenvectors[:, 0], self.shape)

    def ground_manifold(self) -> np.ndarray:
        return self.eigenvectors[:, : self.degeneracy]

    def levels(self) -> list[tuple[float, int]]:
        """Distinct eigenvalues with multiplicities, grouped at the degeneracy tolerance."""
        out: list[tuple[float, int]] = []
        for e in self.eigenvalues:
            if out and e - out[-1][0] <= self.degeneracy_tolerance:
                out[-1] = (out[-1][0], out[-1][1] + 1)
            else:
                out.append((float(e), 1))
        return out

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


Tensorable = Union[Operator, PureState, DensityState]


def kron(a: Tensorable, b: Tensorable) -> Tensorable:
    if type(a) is not type(b):
        raise ValueError(f"cannot take kron of {type(a).__name__} and {type(b).__name__}")
    shape = SystemShape(a.shape.local_dims + b.shape.local_dims)
    if isinstance(a, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), shape)
    return type(a)(np.kron(a.matrix, b.matrix), shape)


def _check_sites(sites: Iterable[int], n: int) -> list[int]:
    out = sorted(set(int(s) for s in sites))
    if any(s < 0 or s >= n for s in out):
        raise ValueError(f"site indices {out} out of range for {n} sites")
    return out


def partial_trace(rho: DensityState, keep: Iterable[int]) -> DensityState:
    """Reduced state on ``keep`` (kept sites stay in ascending order)."""
    n = rho.shape.n_sites
    keep = _check_sites(keep, n)
    if not keep:
        raise ValueError("keep set must be non-empty")
    if len(keep) == n:
        return rho
    dims = rho.shape.local_dims
    t = rho.matrix.reshape(dims + dims)
    traced = [s for s in range(n) if s not in keep]
    # einsum labels: ket axes 0..n-1, bra axes n..2n-1; traced bra axes reuse ket labels
    bra_labels = [s if s in traced else n + s for s in range(n)]
    out_labels = keep + [n + s for s in keep]
    red = np.einsum(t, list(range(n)) + bra_labels, out_labels)
    sub = rho.shape.sub(keep)
    d = sub.total_dim
    return DensityState(red.reshape(d, d), sub)


def reduced_density_matrix(psi: PureState, keep: Iterable[int]) -> np.ndarray:
    """Marginal of a pure state on ``keep`` as a plain matrix, without forming |psi><psi|."""
    n = psi.shape.n_sites
    keep = _check_sites(keep, n)
    if not keep:
        raise ValueError("keep set must be non-empty")
    rest = [s for s in range(n) if s not in keep]
    t = psi.amplitudes.reshape(psi.shape.local_dims)
    m = np.transpose(t, keep + rest).reshape(psi.shape.sub(keep).total_dim, -1)
    return m @ m.conj().T


def eig_hermitian(h: Operator, tol=TOL) -> SpectralDecomposition:
    if not np.all(np.isfinite(h.matrix)):
        raise NumericalError("operator has non-finite entries")
    if not h.is_hermitian(tol.hermitian):
        raise ValueError(f"operator is not Hermitian (max |M - M^H| = {h.hermiticity_error():.3g})")
    m = 0.5 * (h.matrix + h.matrix.conj().T)
    w, v = np.linalg.eigh(m)
    scale = max(1.0, float(np.max(np.abs(w))))
    residual = np.max(np.linalg.norm(m @ v - v * w, axis=0)) if w.size else 0.0
    if residual > tol.eig_residual * scale:
        raise NumericalError(f"eigensolver residual {residual:.3g} exceeds tolerance")
    return SpectralDecomposition(w, v, h.shape, tol.degeneracy)


def _check_perm(perm: Sequence[int], n: int) -> list[int]:
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} sites")
    return perm


def permute_subsystems(x: Tensorable, perm: Sequence[int]) -> Tensorable:
    """Relabel sites so that new site ``i`` carries old site ``perm[i]``."""
    n = x.shape.n_sites
    perm = _check_perm(perm, n)
    dims = x.shape.local_dims
    shape = x.shape.sub(perm)
    if isinstance(x, PureState):
        t = np.transpose(x.amplitudes.reshape(dims), perm)
        return PureState(t.ravel(), shape)
    t = np.transpose(x.matrix.reshape(dims + dims), perm + [n + p for p in perm])
    d = shape.total_dim
    return type(x)(t.reshape(d, d), shape)


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    return [int(i) for i in np.argsort(perm)]


def copy_swap_permutation(n: int, swap_sites: Iterable[int]) -> list[int]:
    """Site permutation of a doubled system exchanging ``swap_sites`` between the two copies."""
    perm = list(range(2 * n))
    for s in _check_sites(swap_sites, n):
        perm[s], perm[n + s] = n + s, s
    return perm


def basis_state(shape, digits: Sequence[int]) -> PureState:
    shape = _as_shape(shape)
    if len(digits) != shape.n_sites or any(not 0 <= q < d for q, d in zip(digits, shape.local_dims)):
        raise ValueError(f"digits {list(digits)} invalid for local dims {shape.local_dims}")
    v = np.zeros(shape.total_dim, dtype=complex)
    v[np.ravel_multi_index(tuple(digits), shape.local_dims)] = 1.0
    return PureState(v, shape)


def two_copy_amplitude(rho: DensityState, bra: PureState, ket: PureState, swap_sites: Iterable[int]) -> complex:
    """<bra| P (rho (x) rho) P^H |ket> with P exchanging ``swap_sites`` between the copies."""
    doubled = rho.shape.doubled()
    if bra.shape != doubled or ket.shape != doubled:
        raise ValueError(f"bra/ket must live on the doubled system {doubled.local_dims}")
    n = rho.shape.n_sites
    perm = copy_swap_permutation(n, swap_sites)
    # P is an involution, so P^H|ket> is the relabelled ket
    pb = permute_subsystems(bra, perm).amplitudes
    pk = permute_subsystems(ket, perm).amplitudes
    d = rho.dim
    x = pk.reshape(d, d)
    # (rho (x) rho) vec(X) = vec(rho X rho^T) in row-major order
    y = rho.matrix @ x @ rho.matrix.T
    return complex(np.vdot(pb.reshape(d, d), y))


def two_copy_matrix_element(rho: DensityState, bra: PureState, ket: PureState, swap_sites: Iterable[int]) -> float:
    """Non-negative two-copy expression used by the Q criteria.

    For ``bra == ket`` this is a diagonal element of a positive operator; tiny
    negative rounding is clipped to zero. For distinct bra/ket the modulus is
    returned.
    """
    val = two_copy_amplitude(rho, bra, ket, swap_sites)
    if bra is ket or np.array_equal(bra.amplitudes, ket.amplitudes):
        return max(val.real, 0.0)
    return abs(val)
