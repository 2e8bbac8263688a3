"""Hybrid basis: one spin excitation tensored with a fixed total phonon number.

States are ordered deterministically: ascending spin site, and for each
site the phonon occupations in descending lexicographic order, e.g. for
two sites and one phonon: (site 0 | 10), (site 0 | 01), (site 1 | 10),
(site 1 | 01).  The sector dimension is N * C(N + n_ph - 1, n_ph).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError
from .geometry import GeometryConfig

#: Guard against accidental memory blowups from mistyped configurations.
DEFAULT_DIMENSION_CAP = 200_000

PHONON_ACTIONS = ("identity", "n_j", "n_jp", "adag_j_a_jp", "adag_jp_a_j")


@dataclass(frozen=True)
class HybridBasisState:
    """Single spin excitation at ``spin_site`` with per-site ``phonons``."""

    spin_site: int
    phonons: tuple[int, ...]


def _occupations(total: int, sites: int):
    """All occupation vectors summing to ``total``, descending lexicographic."""
    if sites == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _occupations(total - head, sites - 1):
            yield (head,) + rest


def sector_dimension(n_atoms: int, n_phonons: int) -> int:
    return n_atoms * math.comb(n_atoms + n_phonons - 1, n_phonons)


class HybridBasis:
    """Ordered, bidirectionally indexed enumeration of the hybrid sector."""

    def __init__(self, geom: GeometryConfig, cap: int = DEFAULT_DIMENSION_CAP):
        dim = sector_dimension(geom.n_atoms, geom.n_phonons)
        if dim > cap:
            raise CapacityError(
                f"hybrid sector for (n_atoms={geom.n_atoms}, n_phonons={geom.n_phonons}) "
                f"has dimension {dim}, above the cap {cap}"
            )
        self.geom = geom
        self.occupations = list(_occupations(geom.n_phonons, geom.n_atoms))
        self._occ_index = {occ: i for i, occ in enumerate(self.occupations)}
        self.states = [
            HybridBasisState(site, occ)
            for site in range(geom.n_atoms)
            for occ in self.occupations
        ]
        self._index = {state: i for i, state in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_occupations(self) -> int:
        return len(self.occupations)

    def index_of(self, state: HybridBasisState) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise DomainError(f"state {state} does not belong to this basis") from None

    def occupation_rank(self, occ: tuple[int, ...]) -> int:
        return self._occ_index[occ]

    def to_json(self) -> list[dict]:
        """Debug dump: list of {"spin_site", "phonons"} in basis order."""
        return [{"spin_site": s.spin_site, "phonons": list(s.phonons)} for s in self.states]


def enumerate_basis(geom: GeometryConfig, cap: int = DEFAULT_DIMENSION_CAP) -> HybridBasis:
    """Complete, duplicate-free, deterministically ordered hybrid basis."""
    return HybridBasis(geom, cap)


def apply_hop_and_phonon(
    state: HybridBasisState, j: int, jp: int, phonon_action: str
) -> list[tuple[HybridBasisState, float]]:
    """Apply the spin hop jp -> j combined with one phonon operator.

    ``phonon_action`` is one of ``identity`` (1), ``n_j`` / ``n_jp``
    (number operators) and ``adag_j_a_jp`` / ``adag_jp_a_j`` (one-phonon
    transfer, with the usual bosonic sqrt matrix elements).  The result is
    a list of (state, amplitude) pairs; it is empty when an annihilation
    operator meets a zero occupation.
    """
    n_sites = len(state.phonons)
    if not (0 <= j < n_sites and 0 <= jp < n_sites):
        raise DomainError(f"sites ({j}, {jp}) out of range for {n_sites} sites")
    if state.spin_site != jp:
        raise DomainError(
            f"hop jp={jp} -> j={j} requires the excitation at site {jp}, "
            f"found it at {state.spin_site}"
        )
    if phonon_action not in PHONON_ACTIONS:
        raise DomainError(f"unknown phonon_action {phonon_action!r}")

    occ = state.phonons
    if phonon_action == "identity":
        return [(HybridBasisState(j, occ), 1.0)]
    if phonon_action == "n_j":
        return [] if occ[j] == 0 else [(HybridBasisState(j, occ), float(occ[j]))]
    if phonon_action == "n_jp":
        return [] if occ[jp] == 0 else [(HybridBasisState(j, occ), float(occ[jp]))]

    src, dst = (jp, j) if phonon_action == "adag_j_a_jp" else (j, jp)
    if occ[src] == 0:
        return []
    moved = list(occ)
    moved[src] -= 1
    moved[dst] += 1
    amplitude = math.sqrt(occ[src] * (occ[dst] + 1))
    return [(HybridBasisState(j, tuple(moved)), amplitude)]


def center_of_mass_amplitudes(basis: HybridBasis) -> np.ndarray:
    """Amplitudes of the normalized center-of-mass phonon state.

    The uniform mode creation operator applied n_ph times to the vacuum
    produces, on occupation ``occ``, the amplitude
    n_ph! / (N^{n_ph/2} sqrt(prod occ_j!)), normalized here to unit norm.
    """
    n, nph = basis.geom.n_atoms, basis.geom.n_phonons
    amps = np.array(
        [
            math.sqrt(math.factorial(nph))
            / (n ** (nph / 2.0) * math.sqrt(math.prod(math.factorial(o) for o in occ)))
            for occ in basis.occupations
        ]
    )
    # already unit norm in exact arithmetic; renormalize to absorb rounding
    return amps / np.linalg.norm(amps)


def product_with_center_of_mass(spin_vector: np.ndarray, basis: HybridBasis) -> np.ndarray:
    """Hybrid-basis vector (spin_vector) x (center-of-mass phonon state)."""
    spin_vector = np.asarray(spin_vector, dtype=complex)
    if spin_vector.shape != (basis.geom.n_atoms,):
        raise DomainError(
            f"spin vector must have length {basis.geom.n_atoms}, got {spin_vector.shape}"
        )
    psi = np.kron(spin_vector, center_of_mass_amplitudes(basis))
    return psi / np.linalg.norm(psi)
