import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmegap import HeisenbergParams, Operator, SystemShape, eig_hermitian, energy_expectation, heisenberg_hamiltonian, make_lattice, thermal_state, vn_entropy
from gmegap.thermal import boltzmann_weights
from tests.conftest import random_density, random_hermitian


@pytest.fixture(scope="module")
def square_spec():
    return eig_hermitian(heisenberg_hamiltonian(make_lattice("square", [2, 2]), HeisenbergParams(1, 1, 1, 1.0)))


def test_dimer_populations(dimer):
    kT = 1.0
    tp = thermal_state(eig_hermitian(dimer), kT)
    w = np.exp(-np.array([-2.0, 0.0, 1.0, 1.0]) / kT)
    assert np.allclose(tp.populations, w / w.sum(), atol=1e-14)


def test_zero_temperature_is_ground_manifold_mixture():
    H = np.diag([-1.0, -1.0, 0.5, 2.0]).astype(complex)
    tp = thermal_state(eig_hermitian(Operator(H, SystemShape.uniform(2, 2))), 0.0)
    assert np.allclose(np.diag(tp.state.matrix).real, [0.5, 0.5, 0, 0])
    assert tp.entropy == pytest.approx(np.log(2))


def test_negative_temperature_rejected(dimer):
    with pytest.raises(ValueError):
        thermal_state(eig_hermitian(dimer), -0.1)


def test_high_temperature_limit(square_spec):
    tp = thermal_state(square_spec, 1e9)
    assert np.max(np.abs(tp.state.matrix - np.eye(16) / 16)) < 1e-6
    assert tp.entropy == pytest.approx(np.log(16), abs=1e-6)


def test_no_overflow_at_tiny_temperature(square_spec):
    tp = thermal_state(square_spec, 1e-6)
    assert np.isfinite(tp.partition_function) and np.isfinite(tp.entropy)
    assert tp.energy == pytest.approx(square_spec.ground_energy, abs=1e-10)


def test_continuity_near_zero(square_spec):
    gap = square_spec.eigenvalues[square_spec.degeneracy] - square_spec.ground_energy
    a = thermal_state(square_spec, 0.0).state.matrix
    b = thermal_state(square_spec, 1e-8 * (square_spec.max_energy - square_spec.ground_energy)).state.matrix
    assert gap > 0
    assert np.max(np.abs(a - b)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.05, 20))
def test_gibbs_identity_random(seed, kT):
    rng = np.random.default_rng(seed)
    H = Operator(random_hermitian(rng, 8), SystemShape.uniform(3, 2))
    spec = eig_hermitian(H)
    tp = thermal_state(spec, kT)
    assert abs(np.trace(tp.state.matrix).real - 1) < 1e-12
    assert tp.log_partition_function == pytest.approx(tp.entropy - (tp.energy - spec.ground_energy) / kT, abs=1e-8)
    assert tp.entropy == pytest.approx(vn_entropy(tp.state), abs=1e-9)
    assert tp.energy == pytest.approx(energy_expectation(tp.state, H), abs=1e-9)


def test_monotone_in_temperature(square_spec):
    pts = [thermal_state(square_spec, kT) for kT in np.linspace(0.01, 5, 60)]
    assert np.all(np.diff([p.energy for p in pts]) >= -1e-12)
    assert np.all(np.diff([p.entropy for p in pts]) >= -1e-12)


def test_boltzmann_weights_degenerate_zero_temperature():
    w = boltzmann_weights(np.array([0.0, 1e-10, 1.0]), 0.0)
    assert list(w) == [1.0, 1.0, 0.0]


def test_vn_entropy_bounds():
    rng = np.random.default_rng(0)
    rho = random_density(rng, SystemShape((2, 3)))
    assert 0 <= vn_entropy(rho) <= np.log(6) + 1e-12
    pure = random_density(rng, SystemShape((2, 3)), rank=1)
    assert vn_entropy(pure) == pytest.approx(0, abs=1e-10)


def test_energy_expectation_shape_mismatch(dimer):
    rho = random_density(np.random.default_rng(0), SystemShape((4,)))
    with pytest.raises(ValueError):
        energy_expectation(rho, dimer)
