"""Numeric tolerance policy shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    norm: float = 1e-12
    trace: float = 1e-10
    positivity: float = 1e-10
    eig_residual: float = 1e-10
    degeneracy: float = 1e-8
    gap_clamp: float = 1e-8
    detection_margin: float = 1e-9
    zero_eigenvalue: float = 1e-14
    consensus_energy: float = 1e-8
    consensus_fraction: float = 0.9


TOL = Tolerances()


class NumericalError(RuntimeError):
    """Raised when a numerical routine fails its own post-conditions."""
