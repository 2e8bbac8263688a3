"""Full master-equation engine on a truncated per-site Fock space.

The density matrix evolves under

    drho/dt = sum_{m,m'} Gt_{mm'} (J_{m'} rho J_m^dag - {J_m^dag J_{m'}, rho}/2)
              + i sum_{m != m'} Vt_{mm'} [J_m^dag J_{m'}, rho]

with 4N jump operators J_m: sigma_j, sigma_j a_j, sigma_j a_j^dag and
sigma_j (1 + 2 a_j^dag a_j) for j = 1..N.  The coefficient matrices are
4N x 4N block matrices: Gt has blocks (1,1) = Gamma,
(2,2) = (3,3) = -eta0^2 Gamma'', (1,4) = (4,1) = eta0^2 Gamma'' / 2 and
zeros elsewhere; Vt has the same layout built from V and V''.

Note that Gt is not positive semidefinite, so complete positivity is not
guaranteed by the theory: positivity of rho is monitored, never enforced.
Expected violations are of order 10 eta0^4 (the first neglected order).

The no-jump (conditional) generator of this equation, projected onto the
single-excitation fixed-phonon-number sector, must reproduce the effective
Hamiltonian of :mod:`hybrid_radiance.heff`: imaginary parts coincide
exactly, real parts up to a global sign set by the commutator convention.
:func:`conditional_generator_check` performs that comparison and serves as
the cross-module oracle.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .basis import HybridBasis
from .errors import CapacityError, DomainError, IntegrationError
from .geometry import GeometryConfig
from .heff import build_heff
from .kernels import KernelMatrices

DEFAULT_SPACE_CAP = 4096

#: Trace drift beyond this aborts the integration.
TRACE_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class TruncatedSpace:
    """N two-level emitters, each with a phonon mode cut off at ``n_max``."""

    n_atoms: int
    n_max: int
    cap: int = DEFAULT_SPACE_CAP

    def __post_init__(self):
        if self.n_atoms < 1 or self.n_max < 0:
            raise DomainError("need n_atoms >= 1 and n_max >= 0")
        if self.dim > self.cap:
            raise CapacityError(
                f"truncated space for (n_atoms={self.n_atoms}, n_max={self.n_max}) "
                f"has dimension {self.dim}, above the cap {self.cap}"
            )

    @property
    def site_dim(self) -> int:
        return 2 * (self.n_max + 1)

    @property
    def dim(self) -> int:
        return self.site_dim**self.n_atoms

    def site_operator(self, spin_op: np.ndarray, phonon_op: np.ndarray) -> np.ndarray:
        return np.kron(spin_op, phonon_op)

    def embed(self, op: np.ndarray, site: int) -> np.ndarray:
        """Lift a single-site operator to the full tensor-product space."""
        if not 0 <= site < self.n_atoms:
            raise DomainError(f"site {site} out of range")
        out = np.eye(1, dtype=complex)
        for j in range(self.n_atoms):
            out = np.kron(out, op if j == site else np.eye(self.site_dim, dtype=complex))
        return out

    def spin_lower(self, site: int) -> np.ndarray:
        sigma = np.zeros((2, 2), dtype=complex)
        sigma[0, 1] = 1.0  # |down><up|, spin basis ordered (down, up)
        return self.embed(self.site_operator(sigma, np.eye(self.n_max + 1)), site)

    def phonon_lower(self, site: int) -> np.ndarray:
        a = np.diag(np.sqrt(np.arange(1, self.n_max + 1)), 1).astype(complex)
        return self.embed(self.site_operator(np.eye(2), a), site)

    def phonon_number(self, site: int) -> np.ndarray:
        a = self.phonon_lower(site)
        return a.conj().T @ a

    def excited_projector(self, site: int) -> np.ndarray:
        up = np.zeros((2, 2), dtype=complex)
        up[1, 1] = 1.0
        return self.embed(self.site_operator(up, np.eye(self.n_max + 1)), site)

    def state_index(self, spins: tuple[int, ...], phonons: tuple[int, ...]) -> int:
        """Flat index of the product state |spins, phonons>."""
        if len(spins) != self.n_atoms or len(phonons) != self.n_atoms:
            raise DomainError("spins and phonons must both have one entry per site")
        idx = 0
        for s, n in zip(spins, phonons):
            if s not in (0, 1) or not 0 <= n <= self.n_max:
                raise DomainError(f"invalid site state (spin={s}, phonons={n})")
            idx = idx * self.site_dim + s * (self.n_max + 1) + n
        return idx


def excitation_state(
    space: TruncatedSpace, amplitudes, phonons: tuple[int, ...]
) -> np.ndarray:
    """Pure state with one shared spin excitation and fixed phonon occupation.

    ``amplitudes[j]`` weights the configuration with the excitation at
    site j; the phonon occupation is common to every component.
    """
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.shape != (space.n_atoms,):
        raise DomainError(f"need {space.n_atoms} spin amplitudes")
    psi = np.zeros(space.dim, dtype=complex)
    for j, c in enumerate(amplitudes):
        spins = tuple(1 if k == j else 0 for k in range(space.n_atoms))
        psi[space.state_index(spins, tuple(phonons))] = c
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise DomainError("zero state")
    return psi / norm


def ground_state(space: TruncatedSpace) -> np.ndarray:
    psi = np.zeros(space.dim, dtype=complex)
    psi[space.state_index((0,) * space.n_atoms, (0,) * space.n_atoms)] = 1.0
    return psi


def density_from_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


@dataclass
class DensityOperator:
    """Dense density matrix with a time stamp and health diagnostics."""

    matrix: np.ndarray
    time: float = 0.0

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def min_eigenvalue(self) -> float:
        sym = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(sym)[0])


@dataclass(frozen=True)
class JumpFamily:
    """The 4N jump operators with their coefficient matrices.

    ``anticommutator_half`` caches K = A/2 - iW (A and W being the
    Gt- and Vt-weighted operator products), and ``jump_rates`` /
    ``jump_ops`` cache the spectral decomposition of Gt so that the
    recycling term is a plain sum of L rho L^dag contributions.  Both are
    algebraically identical to the defining double sum.
    """

    geom: GeometryConfig
    space: TruncatedSpace
    ops: list
    gamma_tilde: np.ndarray
    v_tilde: np.ndarray
    anticommutator_half: np.ndarray = field(repr=False)
    jump_rates: np.ndarray = field(repr=False)
    jump_ops: list = field(repr=False)


def _block_matrix(base: np.ndarray, curvature: np.ndarray, eta2: float) -> np.ndarray:
    n = base.shape[0]
    zero = np.zeros((n, n))
    return np.block(
        [
            [base, zero, zero, 0.5 * eta2 * curvature],
            [zero, -eta2 * curvature, zero, zero],
            [zero, zero, -eta2 * curvature, zero],
            [0.5 * eta2 * curvature, zero, zero, zero],
        ]
    )


def build_jump_family(
    geom: GeometryConfig, kernels: KernelMatrices, space: TruncatedSpace
) -> JumpFamily:
    """Explicit jump operators and coefficient blocks for ``geom``."""
    if kernels.geom != geom:
        raise DomainError("kernels were built from a different geometry")
    if space.n_atoms != geom.n_atoms:
        raise DomainError("space and geometry disagree on the number of atoms")
    n = geom.n_atoms
    eta2 = geom.eta0**2
    identity = np.eye(space.dim, dtype=complex)

    sigmas = [space.spin_lower(j) for j in range(n)]
    lowers = [space.phonon_lower(j) for j in range(n)]
    numbers = [space.phonon_number(j) for j in range(n)]
    ops = (
        sigmas
        + [sigmas[j] @ lowers[j] for j in range(n)]
        + [sigmas[j] @ lowers[j].conj().T for j in range(n)]
        + [sigmas[j] @ (identity + 2.0 * numbers[j]) for j in range(n)]
    )

    gamma_tilde = _block_matrix(kernels.gamma_mat, kernels.gamma_dd, eta2)
    v_tilde = _block_matrix(kernels.v_mat, kernels.v_dd, eta2)

    # cache K = A/2 - iW and the spectral form of the recycling term
    a_mat = np.zeros((space.dim, space.dim), dtype=complex)
    w_mat = np.zeros((space.dim, space.dim), dtype=complex)
    daggered = [op.conj().T for op in ops]
    for m in range(4 * n):
        for mp in range(4 * n):
            g = gamma_tilde[m, mp]
            v = v_tilde[m, mp] if m != mp else 0.0
            if g == 0.0 and v == 0.0:
                continue
            product = daggered[m] @ ops[mp]
            if g != 0.0:
                a_mat += g * product
            if v != 0.0:
                w_mat += v * product
    k_mat = 0.5 * a_mat - 1j * w_mat

    rates, vectors = np.linalg.eigh(gamma_tilde)
    jump_rates = []
    jump_ops = []
    for alpha in range(rates.size):
        if abs(rates[alpha]) < 1e-14:
            continue
        combo = sum(vectors[m, alpha] * ops[m] for m in range(4 * n))
        jump_rates.append(rates[alpha])
        jump_ops.append(combo)

    return JumpFamily(
        geom=geom,
        space=space,
        ops=ops,
        gamma_tilde=gamma_tilde,
        v_tilde=v_tilde,
        anticommutator_half=k_mat,
        jump_rates=np.array(jump_rates),
        jump_ops=jump_ops,
    )


def master_rhs(rho: np.ndarray, family: JumpFamily) -> np.ndarray:
    """Right-hand side drho/dt of the master equation."""
    rho = np.asarray(rho, dtype=complex)
    k = family.anticommutator_half
    out = -(k @ rho + rho @ k.conj().T)
    for rate, op in zip(family.jump_rates, family.jump_ops):
        out += rate * (op @ rho @ op.conj().T)
    return out


@dataclass
class Trajectory:
    """Sampled density-matrix evolution with health diagnostics."""

    times: np.ndarray
    states: list
    traces: np.ndarray
    hermiticity_defects: np.ndarray
    min_eigenvalues: np.ndarray
    excited_total: np.ndarray
    site_populations: np.ndarray
    positivity_threshold: float
    positivity_flags: np.ndarray


def evolve(
    rho0: np.ndarray,
    family: JumpFamily,
    t_final: float,
    dt: float,
    sample_every: int | None = None,
) -> Trajectory:
    """Fixed-step RK4 integration of the master equation.

    Samples every ``sample_every`` steps (default: about 100 samples over
    the run).  Raises IntegrationError when the trace drifts beyond 1e-6
    or the state stops being finite; both indicate that ``dt`` is too
    coarse for the generator.
    """
    if dt <= 0 or t_final < dt:
        raise DomainError("need dt > 0 and t_final >= dt")
    steps = int(round(t_final / dt))
    if sample_every is None:
        sample_every = max(1, steps // 100)

    space = family.space
    projectors = [space.excited_projector(j) for j in range(space.n_atoms)]
    threshold = max(10.0 * family.geom.eta0**4, 1e-10)

    rho = np.array(rho0, dtype=complex)
    if rho.shape != (space.dim, space.dim):
        raise DomainError(f"rho0 must be {space.dim} x {space.dim}")

    times, states = [], []
    traces, defects, mins, excited, flags = [], [], [], [], []
    site_pops = []

    def record(t, matrix):
        op = DensityOperator(matrix=matrix.copy(), time=t)
        trace = op.trace()
        if not np.isfinite(matrix).all() or abs(trace - 1.0) > TRACE_DRIFT_LIMIT:
            raise IntegrationError(
                f"trace drift {abs(trace - 1.0):.3e} at t={t}; reduce dt"
            )
        pops = [float(np.trace(p @ matrix).real) for p in projectors]
        min_eig = op.min_eigenvalue()
        if min_eig < -threshold:
            warnings.warn(
                f"positivity violation {min_eig:.3e} beyond {threshold:.3e} at t={t}",
                stacklevel=3,
            )
        times.append(t)
        states.append(op)
        traces.append(trace)
        defects.append(op.hermiticity_defect())
        mins.append(min_eig)
        excited.append(float(sum(pops)))
        site_pops.append(pops)
        flags.append(min_eig < -threshold)

    record(0.0, rho)
    for step in range(1, steps + 1):
        k1 = master_rhs(rho, family)
        k2 = master_rhs(rho + 0.5 * dt * k1, family)
        k3 = master_rhs(rho + 0.5 * dt * k2, family)
        k4 = master_rhs(rho + dt * k3, family)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % sample_every == 0 or step == steps:
            record(step * dt, rho)

    return Trajectory(
        times=np.array(times),
        states=states,
        traces=np.array(traces),
        hermiticity_defects=np.array(defects),
        min_eigenvalues=np.array(mins),
        excited_total=np.array(excited),
        site_populations=np.array(site_pops),
        positivity_threshold=threshold,
        positivity_flags=np.array(flags, dtype=bool),
    )


def conditional_generator_check(
    geom: GeometryConfig,
    kernels: KernelMatrices,
    basis: HybridBasis,
    n_max: int | None = None,
    cap: int = DEFAULT_SPACE_CAP,
) -> float:
    """Largest deviation between the projected no-jump generator and H_eff.

    Builds H_cond = -W - iA/2 from the coefficient blocks, projects it onto
    the hybrid basis and compares with the directly assembled effective
    Hamiltonian: imaginary parts entry by entry, real parts after flipping
    the global sign (the two standard commutator conventions differ there;
    decay rates are unaffected).  Returns the max over both comparisons.
    """
    if basis.geom != geom or kernels.geom != geom:
        raise DomainError("kernels and basis were built from different geometries")
    if n_max is None:
        n_max = max(geom.n_phonons, 1)
    if n_max < geom.n_phonons:
        raise DomainError(
            f"n_max={n_max} cannot embed the n_phonons={geom.n_phonons} sector"
        )
    space = TruncatedSpace(geom.n_atoms, n_max, cap=cap)
    family = build_jump_family(geom, kernels, space)
    h_cond = -1j * family.anticommutator_half  # -iK = -W - iA/2

    rows = [
        space.state_index(
            tuple(1 if k == s.spin_site else 0 for k in range(geom.n_atoms)),
            s.phonons,
        )
        for s in basis.states
    ]
    projected = h_cond[np.ix_(rows, rows)]
    h_eff = build_heff(geom, kernels, basis).matrix
    imag_dev = float(np.abs(projected.imag - h_eff.imag).max())
    real_dev = float(np.abs(projected.real + h_eff.real).max())
    return max(imag_dev, real_dev)
