import numpy as np
import pytest

from gmegap import DensityState, HeisenbergParams, PureState, SystemShape, heisenberg_hamiltonian, make_lattice


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def dimer():
    return heisenberg_hamiltonian(make_lattice("chain", [2]), HeisenbergParams(J=1, gamma=0, delta=1, h=0))


@pytest.fixture
def square():
    return make_lattice("square", [2, 2], "open")


def random_pure(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(rng, shape, rank=None):
    d = shape.total_dim
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = a @ a.conj().T
    return DensityState(m / np.trace(m).real, shape)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def product_on_bipartition(rng, dims, block):
    """Random pure state that factorizes across (block, complement)."""
    n = len(dims)
    rest = [s for s in range(n) if s not in block]
    da = int(np.prod([dims[s] for s in block]))
    db = int(np.prod([dims[s] for s in rest]))
    v = np.kron(random_pure(rng, da), random_pure(rng, db))
    order = list(block) + rest
    t = v.reshape([dims[s] for s in order]).transpose(np.argsort(order))
    return t.ravel()


def random_biseparable(rng, dims, max_terms=8):
    """Mixture of up to ``max_terms`` pure states, each product over a random bipartition."""
    n = len(dims)
    d = int(np.prod(dims))
    terms = rng.integers(1, max_terms + 1)
    w = rng.dirichlet(np.ones(terms))
    rho = np.zeros((d, d), dtype=complex)
    for wi in w:
        size = rng.integers(1, n)
        block = sorted(rng.choice(n, size=size, replace=False).tolist())
        v = product_on_bipartition(rng, dims, block)
        rho += wi * np.outer(v, v.conj())
    rho = 0.5 * (rho + rho.conj().T)
    return DensityState(rho / np.trace(rho).real, SystemShape(tuple(dims)))


def ghz(n, d=2):
    v = np.zeros(d**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return PureState(v, SystemShape.uniform(n, d))


def w_state(n):
    v = np.zeros(2**n, dtype=complex)
    for i in range(n):
        v[1 << (n - 1 - i)] = 1 / np.sqrt(n)
    return PureState(v, SystemShape.uniform(n, 2))


def literal_two_copy(rho, bra, ket, swap_sites):
    """Brute force: build rho (x) rho and the explicit copy-swap permutation matrix."""
    dims = rho.shape.local_dims
    n = len(dims)
    big = np.kron(rho.matrix, rho.matrix)
    D = big.shape[0]
    all_dims = dims * 2
    P = np.zeros((D, D))
    for idx in range(D):
        digits = list(np.unravel_index(idx, all_dims))
        for s in swap_sites:
            digits[s], digits[n + s] = digits[n + s], digits[s]
        P[np.ravel_multi_index(digits, all_dims), idx] = 1.0
    return complex(bra.conj() @ P @ big @ P.conj().T @ ket)
