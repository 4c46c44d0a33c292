"""Detect genuine multipartite entanglement and k-inseparability in small spin
lattices from the energy alone, via the k-entanglement gap."""

__version__ = "0.1.0"

from .models import (  # noqa: E402
    HeisenbergParams,
    Lattice,
    Spin1ChainParams,
    heisenberg_hamiltonian,
    make_lattice,
    spin1_chain_hamiltonian,
    spin_operators,
)
from .separability import (  # noqa: E402
    KsepResult,
    OptimizerConfig,
    Partition,
    ProductState,
    entanglement_gap,
    enumerate_partitions,
    ksep_chain,
    ksep_energy,
    max_energy_variant,
    min_energy_for_partition,
)
from .tensor import (  # noqa: E402
    DensityState,
    Operator,
    PureState,
    SpectralDecomposition,
    SystemShape,
    eig_hermitian,
    kron,
    partial_trace,
    permute_subsystems,
    two_copy_matrix_element,
)
from .thermal import ThermalPoint, energy_expectation, thermal_state, vn_entropy  # noqa: E402
from .witnesses import (  # noqa: E402
    DetectionVerdict,
    GmeConcurrenceReport,
    entropy_threshold_ksep,
    entropy_witness,
    gap_witness,
    gme_concurrence_pure,
    q0,
    qm,
    q_witness,
    relative_entropy,
)
