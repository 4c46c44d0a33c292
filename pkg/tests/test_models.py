import warnings

import numpy as np
import pytest

from gmegap import HeisenbergParams, Spin1ChainParams, eig_hermitian, heisenberg_hamiltonian, make_lattice, spin1_chain_hamiltonian
from gmegap.models import Lattice, spin_operators, total_magnetization

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0])


def dimer_by_hand(J, gamma, delta, h):
    I = np.eye(2)
    return (0.5 * J * ((1 + gamma) * np.kron(X, X) + (1 - gamma) * np.kron(Y, Y) + 2 * delta * np.kron(Z, Z))
            - h * (np.kron(Z, I) + np.kron(I, Z)))


@pytest.mark.parametrize("J,gamma,delta,h", [(1, 0, 1, 0), (0.7, 0.3, -1.2, 0.4), (2, -1, 0, -3), (1, 1, 1, 2)])
def test_dimer_matches_hand_built(J, gamma, delta, h):
    H = heisenberg_hamiltonian(make_lattice("chain", [2]), HeisenbergParams(J, gamma, delta, h))
    assert np.allclose(H.matrix, dimer_by_hand(J, gamma, delta, h), atol=1e-14)


def test_dimer_spectrum(dimer):
    assert np.allclose(eig_hermitian(dimer).eigenvalues, [-2, 0, 1, 1], atol=1e-12)


def test_square_edges(square):
    assert {tuple(sorted(e)) for e in square.edges} == {(0, 1), (2, 3), (0, 2), (1, 3)}
    assert square.n_sites == 4


def test_periodic_short_axes_do_not_double_bonds():
    assert len(make_lattice("square", [2, 2], "periodic").edges) == 4
    assert len(make_lattice("chain", [2], "periodic").edges) == 1
    assert {tuple(sorted(e)) for e in make_lattice("chain", [3], "periodic").edges} == {(0, 1), (1, 2), (0, 2)}
    assert len(make_lattice("square", [3, 3], "periodic").edges) == 18


@pytest.mark.parametrize("kind,dims,boundary", [("chain", [2, 2], "open"), ("square", [4], "open"), ("ring", [3], "open"),
                                                ("chain", [3], "twisted"), ("chain", [0], "open")])
def test_bad_lattices(kind, dims, boundary):
    with pytest.raises(ValueError):
        make_lattice(kind, dims, boundary)


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice(2, ((0, 0),))
    with pytest.raises(ValueError):
        Lattice(2, ((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        Lattice(2, ((0, 2),))


def test_gamma_outside_range_warns():
    with pytest.warns(UserWarning):
        HeisenbergParams(gamma=1.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        HeisenbergParams(gamma=-1.0)


def test_spin_one_commutators():
    sx, sy, sz = (o.matrix for o in spin_operators(1))
    assert np.allclose(sx @ sy - sy @ sx, 1j * sz)
    assert np.allclose(sx @ sx + sy @ sy + sz @ sz, 2 * np.eye(3))


def test_spin_one_pair_spectrum_clebsch_gordan():
    # S1.S2 = (S(S+1) - 4) / 2 for total spin S in {0, 1, 2}
    H = spin1_chain_hamiltonian(Spin1ChainParams(n=2, beta=0.0, h=0.0))
    ev = eig_hermitian(H).eigenvalues
    expected = sorted([-2.0] + [-1.0] * 3 + [1.0] * 5)
    assert np.allclose(ev, expected, atol=1e-12)
    beta = 0.4
    H = spin1_chain_hamiltonian(Spin1ChainParams(n=2, beta=beta, h=0.0))
    x = np.array(expected)
    assert np.allclose(eig_hermitian(H).eigenvalues, np.sort(x + beta * x**2), atol=1e-12)


def test_spin1_n_too_small():
    with pytest.raises(ValueError):
        spin1_chain_hamiltonian(Spin1ChainParams(n=1))


@pytest.mark.parametrize("builder", [
    lambda h: heisenberg_hamiltonian(make_lattice("square", [2, 2]), HeisenbergParams(1, 0, 1, h)),
    lambda h: spin1_chain_hamiltonian(Spin1ChainParams(3, 1.0, h, "periodic")),
    lambda h: spin1_chain_hamiltonian(Spin1ChainParams(3, 1.0, h, "open")),
])
def test_conserves_magnetization_and_field_sign_symmetry(builder):
    H = builder(1.3)
    M = total_magnetization(H.shape).matrix
    assert np.allclose(H.matrix @ M, M @ H.matrix, atol=1e-12)
    assert H.is_hermitian()
    assert np.allclose(eig_hermitian(H).eigenvalues, eig_hermitian(builder(-1.3)).eigenvalues, atol=1e-10)


def test_gamma_breaks_magnetization_conservation():
    H = heisenberg_hamiltonian(make_lattice("square", [2, 2]), HeisenbergParams(1, 1, 1, 0.5))
    M = total_magnetization(H.shape).matrix
    assert not np.allclose(H.matrix @ M, M @ H.matrix)


def test_heisenberg_is_real():
    H = heisenberg_hamiltonian(make_lattice("square", [2, 2]), HeisenbergParams(1, 0.3, 0.5, 1))
    assert np.all(H.matrix.imag == 0)
