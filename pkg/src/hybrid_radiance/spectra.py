"""Dense eigendecomposition of the hybrid Hamiltonian and mode bookkeeping.

Eigenvalues encode energy shifts (real part) and collective decay rates
(gamma_m = -2 Im E_m).  Modes are sorted by ascending rate, ties broken by
shift and then by solver order; eigenvector phases are fixed by rotating
the largest-magnitude component onto the positive real axis so that
repeated runs produce identical output.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .basis import HybridBasis, product_with_center_of_mass
from .errors import DegeneracyError, NumericalError
from .heff import EffectiveHamiltonian

#: Residual bound for each eigenpair, relative to max|H| * dim.
RESIDUAL_TOL = 1e-8

#: Two eigenvalues closer than this are treated as degenerate when modes
#: are matched against the separable block.
MATCH_TOL = 1e-8


@dataclass
class EigenMode:
    """One eigenmode: complex energy, rate, shift, vector and residual."""

    index: int
    eigenvalue: complex
    rate: float
    shift: float
    vector: np.ndarray
    residual: float


def _matrix_of(h) -> np.ndarray:
    return h.matrix if isinstance(h, EffectiveHamiltonian) else np.asarray(h, dtype=complex)


def eigendecompose(h) -> list[EigenMode]:
    """All eigenmodes of ``h`` (an EffectiveHamiltonian or a square matrix)."""
    matrix = _matrix_of(h)
    try:
        values, vectors = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        fingerprint = hashlib.sha256(np.ascontiguousarray(matrix).tobytes()).hexdigest()[:16]
        raise NumericalError(f"eigensolver failed to converge (matrix {fingerprint})") from exc

    rates = -2.0 * values.imag
    order = np.lexsort((np.arange(values.size), values.real, rates))
    scale = np.abs(matrix).max() * matrix.shape[0]
    modes = []
    for rank, i in enumerate(order):
        vec = vectors[:, i]
        vec = vec / np.linalg.norm(vec)
        k = int(np.argmax(np.abs(vec)))
        phase = vec[k] / abs(vec[k])
        vec = vec * phase.conjugate()
        residual = float(np.linalg.norm(matrix @ vec - values[i] * vec))
        if residual > RESIDUAL_TOL * scale:
            raise NumericalError(
                f"eigenpair residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}*|H|*dim"
            )
        modes.append(
            EigenMode(
                index=rank,
                eigenvalue=complex(values[i]),
                rate=float(rates[i]),
                shift=float(values[i].real),
                vector=vec,
                residual=residual,
            )
        )
    return modes


def match_separable(
    modes: list[EigenMode], block: np.ndarray, basis: HybridBasis
) -> list[tuple[int, complex]]:
    """Locate the N separable (center-of-mass) modes in a full spectrum.

    For every eigenvalue of the separable block the matching full-spectrum
    mode is found within an absolute tolerance of 1e-8 and its eigenvector
    is verified against (block eigenvector) x (center-of-mass phonons).
    Near-degenerate candidates are compared through the projection onto
    their joint span instead of a single-vector overlap.
    """
    block_values, block_vectors = np.linalg.eig(np.asarray(block, dtype=complex))
    order = np.lexsort((block_values.real, -2.0 * block_values.imag))
    energies = np.array([m.eigenvalue for m in modes])
    matches: list[tuple[int, complex]] = []
    used: set[int] = set()
    for b in order:
        target = block_values[b]
        candidates = [i for i in np.nonzero(np.abs(energies - target) < MATCH_TOL)[0]]
        if not candidates:
            raise DegeneracyError(
                f"no full-spectrum eigenvalue within {MATCH_TOL} of block eigenvalue {target}"
            )
        product = product_with_center_of_mass(block_vectors[:, b], basis)
        span = np.column_stack([modes[i].vector for i in candidates])
        q, _ = np.linalg.qr(span)
        projection = float(np.linalg.norm(q.conj().T @ product))
        if projection <= 1.0 - MATCH_TOL:
            raise DegeneracyError(
                f"separable candidate for block eigenvalue {target} has subspace "
                f"overlap {projection:.12f}; near-degenerate modes "
                f"{[modes[i].eigenvalue for i in candidates]}"
            )
        overlaps = [abs(np.vdot(modes[i].vector, product)) for i in candidates]
        ranked = sorted(zip(overlaps, candidates), reverse=True)
        choice = next((i for _, i in ranked if i not in used), None)
        if choice is None:
            raise DegeneracyError(
                f"all candidate modes for block eigenvalue {target} already matched; "
                f"candidates {candidates}"
            )
        used.add(choice)
        matches.append((int(choice), complex(target)))
    return matches
