"""Collective photon emission of 1D emitter arrays with quantized trap motion.

The package computes collective decay rates, dipole-dipole energy shifts
and spin-phonon entanglement for chains of two-level emitters whose
vibrational motion couples to photon emission at second order in the
Lamb-Dicke parameter: closed-form two-atom results, finite-chain
eigenmodes, infinite-chain bands and a full master-equation engine.
"""

__version__ = "0.1.0"

from .band import BandPoint, band_scan, default_q_grid, lattice_sum
from .basis import (
    HybridBasis,
    HybridBasisState,
    apply_hop_and_phonon,
    center_of_mass_amplitudes,
    enumerate_basis,
    product_with_center_of_mass,
    sector_dimension,
)
from .entanglement import (
    EntropyPoint,
    ReducedSpinState,
    entropy_scan,
    mode_entropies,
    reduce_spin,
    von_neumann_entropy,
)
from .errors import (
    CapacityError,
    ConfigError,
    DegeneracyError,
    DomainError,
    HybridRadianceError,
    IntegrationError,
    NumericalError,
    RootNotFoundError,
)
from .geometry import GeometryConfig
from .heff import (
    EffectiveHamiltonian,
    TwoAtomMode,
    build_heff,
    separable_block,
    two_atom_spectrum,
)
from .kernels import (
    KernelMatrices,
    angular_coefficients,
    build_matrices,
    find_kappa0,
    find_magic_spacing,
    gamma_kernel,
    kernel_second_derivative,
    m_kernel,
    m_kernel_dd,
    v_kernel,
)
from .lindblad import (
    DensityOperator,
    JumpFamily,
    Trajectory,
    TruncatedSpace,
    build_jump_family,
    conditional_generator_check,
    density_from_state,
    evolve,
    excitation_state,
    ground_state,
    master_rhs,
)
from .spectra import EigenMode, eigendecompose, match_separable

__all__ = [name for name in dir() if not name.startswith("_")]
