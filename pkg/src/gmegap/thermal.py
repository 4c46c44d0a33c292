"""Boltzmann states and thermodynamic scalars (k_B = 1)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric import TOL
from .tensor import DensityState, Operator, SpectralDecomposition


@dataclass(frozen=True, eq=False)
class ThermalPoint:
    kT: float
    state: DensityState
    populations: np.ndarray
    partition_function: float  # with energies shifted by E0
    energy: float
    entropy: float

    @property
    def log_partition_function(self) -> float:
        return float(np.log(self.partition_function))


def boltzmann_weights(energies: np.ndarray, kT: float, degeneracy_tol: float = TOL.degeneracy) -> np.ndarray:
    """Unnormalized shifted weights exp(-(E_i - E_0)/kT); kT = 0 gives the ground-manifold indicator."""
    if kT < 0:
        raise ValueError(f"temperature must be non-negative, got kT={kT}")
    shifted = np.asarray(energies, dtype=float) - float(np.min(energies))
    if kT == 0:
        return (shifted <= degeneracy_tol).astype(float)
    return np.exp(-shifted / kT)


def thermal_state(spec: SpectralDecomposition, kT: float) -> ThermalPoint:
    w = boltzmann_weights(spec.eigenvalues, kT, spec.degeneracy_tolerance)
    z = float(w.sum())
    p = w / z
    v = spec.eigenvectors
    rho = (v * p) @ v.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    nz = p[p > 0]
    return ThermalPoint(
        kT=float(kT),
        state=DensityState(rho, spec.shape),
        populations=p,
        partition_function=z,
        energy=float(p @ spec.eigenvalues),
        entropy=float(-(nz * np.log(nz)).sum()),
    )


def vn_entropy(rho: DensityState) -> float:
    lam = np.linalg.eigvalsh(rho.matrix)
    lam = lam[lam > TOL.zero_eigenvalue]
    return float(-(lam * np.log(lam)).sum())


def energy_expectation(rho: DensityState, h: Operator) -> float:
    if rho.shape != h.shape:
        raise ValueError(f"state shape {rho.shape.local_dims} does not match operator {h.shape.local_dims}")
    val = np.trace(rho.matrix @ h.matrix)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"Tr(rho H) has imaginary part {val.imag:.3g}; operator not Hermitian?")
    return float(val.real)
