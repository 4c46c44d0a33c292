"""Spin operators, lattices and the two model Hamiltonians.

Energies are in units of the exchange coupling and k_B = 1.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .tensor import Operator, SystemShape


@lru_cache(maxsize=None)
def _spin_matrices(spin: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if spin == 0.5:
        # Pauli matrices, not sigma/2
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
        sz = np.diag([1.0, -1.0]).astype(complex)
    elif spin == 1:
        r = 1 / np.sqrt(2)
        sx = r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
        sy = r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
        sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    else:
        raise ValueError(f"unsupported spin {spin!r}; expected 1/2 or 1")
    for m in (sx, sy, sz):
        m.setflags(write=False)
    return sx, sy, sz


def spin_operators(spin: float) -> tuple[Operator, Operator, Operator]:
    mats = _spin_matrices(float(spin))
    shape = SystemShape((mats[0].shape[0],))
    return tuple(Operator(m, shape) for m in mats)


def embed(op: np.ndarray, site: int, shape: SystemShape) -> np.ndarray:
    """Single-site matrix acting on ``site`` of ``shape``, identity elsewhere."""
    left = int(np.prod(shape.local_dims[:site]))
    right = int(np.prod(shape.local_dims[site + 1:]))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def embed_pair(a: np.ndarray, b: np.ndarray, i: int, j: int, shape: SystemShape) -> np.ndarray:
    return embed(a, i, shape) @ embed(b, j, shape)


@dataclass(frozen=True)
class Lattice:
    n_sites: int
    edges: tuple[tuple[int, int], ...]
    label: str = ""

    def __post_init__(self):
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-edge ({i}, {j})")
            if not (0 <= i < self.n_sites and 0 <= j < self.n_sites):
                raise ValueError(f"edge ({i}, {j}) out of range for {self.n_sites} sites")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)


def make_lattice(kind: str, dims: Sequence[int], boundary: str = "open") -> Lattice:
    """Nearest-neighbour lattice. Wrap-around bonds that would duplicate an edge are dropped."""
    dims = [int(d) for d in dims]
    if not dims or any(d <= 0 for d in dims):
        raise ValueError(f"lattice dims must be positive, got {dims}")
    if boundary not in ("open", "periodic"):
        raise ValueError(f"unknown boundary {boundary!r}")
    if kind == "chain":
        if len(dims) != 1:
            raise ValueError("a chain takes a single length")
    elif kind in ("square", "square-grid"):
        if len(dims) != 2:
            raise ValueError("a square grid takes two dims")
    else:
        raise ValueError(f"unknown lattice kind {kind!r}")

    n = int(np.prod(dims))
    edges: list[tuple[int, int]] = []
    seen = set()
    for coord in itertools.product(*(range(d) for d in dims)):
        site = int(np.ravel_multi_index(coord, dims))
        for axis, d in enumerate(dims):
            nxt = list(coord)
            nxt[axis] += 1
            if nxt[axis] == d:
                if boundary != "periodic":
                    continue
                nxt[axis] = 0
            other = int(np.ravel_multi_index(nxt, dims))
            key = (min(site, other), max(site, other))
            if site == other or key in seen:
                continue
            seen.add(key)
            edges.append((site, other))
    label = f"{'chain' if kind == 'chain' else 'square'}-{'x'.join(map(str, dims))}-{boundary}"
    return Lattice(n, tuple(edges), label)


@dataclass(frozen=True)
class HeisenbergParams:
    J: float = 1.0
    gamma: float = 0.0
    delta: float = 1.0
    h: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.gamma <= 1.0:
            warnings.warn(f"anisotropy gamma={self.gamma} outside [-1, 1]", stacklevel=3)


def heisenberg_hamiltonian(lattice: Lattice, p: HeisenbergParams) -> Operator:
    """XYZ-type Heisenberg model with Pauli operators and a -h field along z."""
    sx, sy, sz = _spin_matrices(0.5)
    shape = SystemShape.uniform(lattice.n_sites, 2)
    d = shape.total_dim
    H = np.zeros((d, d), dtype=complex)
    for i, j in lattice.edges:
        H += 0.5 * p.J * (
            (1 + p.gamma) * embed_pair(sx, sx, i, j, shape)
            + (1 - p.gamma) * embed_pair(sy, sy, i, j, shape)
            + 2 * p.delta * embed_pair(sz, sz, i, j, shape)
        )
    for i in range(lattice.n_sites):
        H -= p.h * embed(sz, i, shape)
    # sigma_y (x) sigma_y is real; drop the zero imaginary part exactly
    return Operator(H.real.astype(complex), shape)


@dataclass(frozen=True)
class Spin1ChainParams:
    n: int = 3
    beta: float = 1.0
    h: float = 0.0
    boundary: str = "open"


def spin1_chain_hamiltonian(p: Spin1ChainParams) -> Operator:
    """Bilinear-biquadratic spin-1 chain with a +h field along z."""
    if p.n < 2:
        raise ValueError(f"spin-1 chain needs n >= 2, got {p.n}")
    lattice = make_lattice("chain", [p.n], p.boundary)
    mats = _spin_matrices(1.0)
    shape = SystemShape.uniform(p.n, 3)
    d = shape.total_dim
    H = np.zeros((d, d), dtype=complex)
    for i, j in lattice.edges:
        ss = sum(embed_pair(s, s, i, j, shape) for s in mats)
        H += ss + p.beta * (ss @ ss)
    for i in range(p.n):
        H += p.h * embed(mats[2], i, shape)
    H = 0.5 * (H + H.conj().T)
    return Operator(H, shape)


def total_magnetization(shape: SystemShape) -> Operator:
    """Sum of the local z operators (Pauli for qubits, S^z for spin-1)."""
    d = shape.total_dim
    M = np.zeros((d, d), dtype=complex)
    for site, ld in enumerate(shape.local_dims):
        sz = _spin_matrices(0.5 if ld == 2 else 1.0)[2]
        M += embed(sz, site, shape)
    return Operator(M, shape)
