"""Effective non-Hermitian Hamiltonian of the single-excitation sector.

The matrix element for moving the spin excitation from site jp to site j is

    M_{j jp} + eta0^2 M''_{j jp} (1 - delta_{j jp}
                                  + n_j + n_jp - a^dag_j a_jp - a^dag_jp a_j)

with M = V - i Gamma / 2.  The operator combination multiplying the
curvature vanishes identically on the diagonal, so the diagonal reduces to
M_jj = -i gamma / 2 per site.  The resulting matrix is complex symmetric
(H = H^T, not Hermitian) and conserves the total phonon number.

For two atoms the spectrum is known in closed form: the symmetric and
antisymmetric spin states decouple from the symmetric/antisymmetric phonon
modes and the energies are

    E(+-, n_a) = -i gamma / 2  +-  (M_12 + eta0^2 (2 n_a + 1) M''_12),

with collective rates gamma +- Gamma_12 +- eta0^2 (2 n_a + 1) Gamma''_12,
where n_a counts phonons in the antisymmetric mode.

States built from the uniform (center-of-mass) phonon mode decouple from
the phonon-transfer terms for any N; their exact eigenvalues are those of
the N x N block returned by :func:`separable_block`.
"""

from dataclasses import dataclass

import numpy as np

from .basis import HybridBasis, apply_hop_and_phonon
from .errors import DomainError
from .geometry import GeometryConfig
from .kernels import KernelMatrices


@dataclass(frozen=True)
class EffectiveHamiltonian:
    geom: GeometryConfig
    basis: HybridBasis
    matrix: np.ndarray


@dataclass(frozen=True)
class TwoAtomMode:
    """One closed-form eigenmode of the two-atom chain."""

    parity: str  # "s" (symmetric) or "a" (antisymmetric)
    n_total: int
    n_antisym: int
    energy: complex
    rate: float
    shift: float


def _require_same_geometry(geom: GeometryConfig, *others: GeometryConfig) -> None:
    for other in others:
        if other != geom:
            raise DomainError("kernels and basis were built from different geometries")


def build_heff(
    geom: GeometryConfig, kernels: KernelMatrices, basis: HybridBasis
) -> EffectiveHamiltonian:
    """Assemble the dense hybrid-sector Hamiltonian."""
    _require_same_geometry(geom, kernels.geom, basis.geom)
    n = geom.n_atoms
    eta2 = geom.eta0**2
    m, mdd = kernels.m_mat, kernels.m_dd
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, state in enumerate(basis.states):
        jp = state.spin_site
        h[col, col] += m[jp, jp]
        for j in range(n):
            if j == jp:
                continue
            weights = (
                ("identity", m[j, jp] + eta2 * mdd[j, jp]),
                ("n_j", eta2 * mdd[j, jp]),
                ("n_jp", eta2 * mdd[j, jp]),
                ("adag_j_a_jp", -eta2 * mdd[j, jp]),
                ("adag_jp_a_j", -eta2 * mdd[j, jp]),
            )
            for action, weight in weights:
                if weight == 0:
                    continue
                for target, amplitude in apply_hop_and_phonon(state, j, jp, action):
                    h[basis.index_of(target), col] += weight * amplitude
    h.flags.writeable = False
    return EffectiveHamiltonian(geom, basis, h)


def two_atom_spectrum(geom: GeometryConfig, kernels: KernelMatrices) -> list[TwoAtomMode]:
    """Closed-form eigenmodes for N = 2, ordered (parity s then a, n_a ascending)."""
    if geom.n_atoms != 2:
        raise DomainError(f"two-atom spectrum requires n_atoms=2, got {geom.n_atoms}")
    _require_same_geometry(geom, kernels.geom)
    eta2 = geom.eta0**2
    m12 = kernels.m_mat[0, 1]
    mdd12 = kernels.m_dd[0, 1]
    diag = -0.5j * geom.gamma
    modes = []
    for parity, sign in (("s", 1.0), ("a", -1.0)):
        for n_a in range(geom.n_phonons + 1):
            energy = diag + sign * (m12 + eta2 * (2 * n_a + 1) * mdd12)
            modes.append(
                TwoAtomMode(
                    parity=parity,
                    n_total=geom.n_phonons,
                    n_antisym=n_a,
                    energy=energy,
                    rate=-2.0 * energy.imag,
                    shift=energy.real,
                )
            )
    return modes


def separable_block(geom: GeometryConfig, kernels: KernelMatrices) -> np.ndarray:
    """N x N block whose eigenvalues are the separable (center-of-mass) modes.

    B = M + eta0^2 M'' off the diagonal; its eigenvectors v yield exact
    eigenstates v (x) |center-of-mass phonons> of the full Hamiltonian.
    """
    _require_same_geometry(geom, kernels.geom)
    n = geom.n_atoms
    off = 1.0 - np.eye(n)
    return kernels.m_mat + geom.eta0**2 * kernels.m_dd * off
