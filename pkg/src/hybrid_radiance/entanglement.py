"""Spin-phonon entanglement of hybrid eigenmodes.

The phonon degrees of freedom are traced out of a pure hybrid state to
obtain the reduced spin density matrix; the von Neumann entropy of its
populations (natural log) quantifies the bipartite entanglement.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .basis import HybridBasis, enumerate_basis
from .errors import DomainError, NumericalError
from .geometry import GeometryConfig
from .heff import build_heff
from .kernels import build_matrices
from .spectra import eigendecompose

#: Reduced-matrix populations may undershoot 0 or overshoot 1 by this much
#: before an error is raised instead of clamping.
POPULATION_SLACK = 1e-10

NORM_TOL = 1e-10


@dataclass(frozen=True)
class ReducedSpinState:
    """Reduced spin density matrix with its population spectrum."""

    rho: np.ndarray
    populations: np.ndarray


@dataclass(frozen=True)
class EntropyPoint:
    n_atoms: int
    ln_n: float
    max_entropy: float


def reduce_spin(psi: np.ndarray, basis: HybridBasis) -> ReducedSpinState:
    """Trace the phonons out of a normalized hybrid-sector pure state."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (basis.dim,):
        raise DomainError(f"state vector must have length {basis.dim}, got {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise DomainError(f"state vector must be normalized, got |psi| = {norm}")
    # basis order is spin-major, so the partial trace is a row-space Gram matrix
    amplitudes = psi.reshape(basis.geom.n_atoms, basis.n_occupations)
    rho = amplitudes @ amplitudes.conj().T
    populations = np.linalg.eigvalsh(rho)
    if populations.min() < -POPULATION_SLACK or populations.max() > 1.0 + POPULATION_SLACK:
        raise NumericalError(
            f"reduced-state populations outside [0, 1] beyond slack: "
            f"[{populations.min():.3e}, {populations.max():.3e}]"
        )
    rho.flags.writeable = False
    populations.flags.writeable = False
    return ReducedSpinState(rho=rho, populations=populations)


def von_neumann_entropy(state: ReducedSpinState) -> float:
    """Entropy -sum p ln p in nats, with 0 ln 0 = 0.

    Populations are clamped to [0, 1] within a 1e-10 roundoff window
    before the log; anything further out raises instead of being hidden.
    """
    p = np.asarray(state.populations, dtype=float)
    if p.min() < -POPULATION_SLACK or p.max() > 1.0 + POPULATION_SLACK:
        raise NumericalError(
            f"populations outside [0, 1] beyond the clamping window: "
            f"[{p.min():.3e}, {p.max():.3e}]"
        )
    p = np.clip(p, 0.0, 1.0)
    p = p[p > 0.0]
    return float(-(p * np.log(p)).sum())


def mode_entropies(h, basis: HybridBasis) -> np.ndarray:
    """Entanglement entropy of every eigenmode of ``h``, in mode order."""
    modes = eigendecompose(h)
    return np.array([von_neumann_entropy(reduce_spin(m.vector, basis)) for m in modes])


def entropy_scan(geom: GeometryConfig, n_list: list[int]) -> list[EntropyPoint]:
    """Maximum eigenmode entropy for each chain length in ``n_list``.

    The remaining parameters (spacing, dipole angle, Lamb-Dicke parameter,
    phonon number) are taken from ``geom``.
    """
    points = []
    for n in n_list:
        g = replace(geom, n_atoms=int(n))
        basis = enumerate_basis(g)
        h = build_heff(g, build_matrices(g), basis)
        entropies = mode_entropies(h, basis)
        points.append(
            EntropyPoint(
                n_atoms=int(n),
                ln_n=math.log(n),
                max_entropy=float(entropies.max()),
            )
        )
    return points
