"""Dipole-dipole decay and shift kernels and their curvature.

For two emitters at reduced distance ``kappa`` with dipole angle ``phi``
(angular weights ``f = sin^2 phi`` and ``g = 1 - 3 cos^2 phi``) the
collective decay and coherent-shift kernels are

    Gamma(kappa) = (3 gamma / 2) [ f sin(k)/k + g (cos(k)/k^2 - sin(k)/k^3) ]
    V(kappa)     = (3 gamma / 4) [ f cos(k)/k - g (sin(k)/k^2 + cos(k)/k^3) ]

The second derivatives with respect to ``kappa`` govern the change of the
collective rates under quantized trap motion and are implemented as exact
closed forms (differentiated once by hand, not numerically).  ``M`` denotes
the complex combination ``V - i Gamma / 2`` and ``M''`` the analogous
combination of the curvatures.

The "magic" distance, at which Gamma'' vanishes and the collective rates
become insensitive to the spin-motion coupling, is found by bracketed
bisection in :func:`find_kappa0`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RootNotFoundError
from .geometry import TWO_PI, GeometryConfig

#: Search window for the magic-distance root.  The lower edge excludes the
#: near-field region where the curvature changes character; the upper edge
#: comfortably covers the first physically relevant zero.
KAPPA0_WINDOW = (0.5, 12.0)

#: Bisection stops once |Gamma''| drops below this (in units of gamma).
KAPPA0_TOL = 1e-12


def _check_phi(phi: float) -> None:
    if not 0.0 <= phi <= math.pi:
        raise DomainError(f"phi must lie in [0, pi], got {phi}")


def _check_kappa(kappa) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise DomainError("kappa must be > 0; the matrix diagonal is handled by build_matrices")
    return kappa


def angular_coefficients(phi: float) -> tuple[float, float]:
    """Angular weights (f, g) = (sin^2 phi, 1 - 3 cos^2 phi)."""
    _check_phi(phi)
    return math.sin(phi) ** 2, 1.0 - 3.0 * math.cos(phi) ** 2


def gamma_kernel(kappa, phi: float, gamma: float = 1.0):
    """Collective decay kernel Gamma(kappa, phi) in units of ``gamma``.

    Continuously extends to the single-atom rate ``gamma`` as kappa -> 0,
    but the diagonal itself is excluded (kappa must be positive).
    Accepts scalar or array ``kappa``.
    """
    kappa = _check_kappa(kappa)
    f, g = angular_coefficients(phi)
    s, c = np.sin(kappa), np.cos(kappa)
    val = 1.5 * gamma * (f * s / kappa + g * (c / kappa**2 - s / kappa**3))
    return float(val) if val.ndim == 0 else val


def v_kernel(kappa, phi: float, gamma: float = 1.0):
    """Coherent dipole-dipole shift kernel V(kappa, phi) in units of ``gamma``.

    Diverges as kappa^-3 in the near field, which is physical.
    """
    kappa = _check_kappa(kappa)
    f, g = angular_coefficients(phi)
    s, c = np.sin(kappa), np.cos(kappa)
    val = 0.75 * gamma * (f * c / kappa - g * (s / kappa**2 + c / kappa**3))
    return float(val) if val.ndim == 0 else val


def _gamma_kernel_dd(kappa, f: float, g: float, gamma: float):
    s, c = np.sin(kappa), np.cos(kappa)
    return 1.5 * gamma * (
        f * (-s / kappa - 2 * c / kappa**2 + 2 * s / kappa**3)
        + g * (-c / kappa**2 + 5 * s / kappa**3 + 12 * c / kappa**4 - 12 * s / kappa**5)
    )


def _v_kernel_dd(kappa, f: float, g: float, gamma: float):
    s, c = np.sin(kappa), np.cos(kappa)
    return 0.75 * gamma * (
        f * (-c / kappa + 2 * s / kappa**2 + 2 * c / kappa**3)
        - g * (-s / kappa**2 - 5 * c / kappa**3 + 12 * s / kappa**4 + 12 * c / kappa**5)
    )


def kernel_second_derivative(kappa, phi: float, which: str, gamma: float = 1.0):
    """Closed-form second derivative of a kernel with respect to kappa.

    ``which`` selects the kernel: ``"gamma"`` for the decay kernel,
    ``"v"`` for the shift kernel.
    """
    kappa = _check_kappa(kappa)
    f, g = angular_coefficients(phi)
    if which == "gamma":
        val = _gamma_kernel_dd(kappa, f, g, gamma)
    elif which == "v":
        val = _v_kernel_dd(kappa, f, g, gamma)
    else:
        raise DomainError(f"which must be 'gamma' or 'v', got {which!r}")
    return float(val) if val.ndim == 0 else val


def m_kernel(kappa, phi: float, gamma: float = 1.0):
    """Complex kernel M = V - i Gamma / 2."""
    return v_kernel(kappa, phi, gamma) - 0.5j * gamma_kernel(kappa, phi, gamma)


def m_kernel_dd(kappa, phi: float, gamma: float = 1.0):
    """Complex curvature kernel M'' = V'' - i Gamma'' / 2."""
    return (
        kernel_second_derivative(kappa, phi, "v", gamma)
        - 0.5j * kernel_second_derivative(kappa, phi, "gamma", gamma)
    )


@dataclass(frozen=True)
class KernelMatrices:
    """Pairwise kernel matrices for a chain geometry.

    All real matrices are symmetric; ``gamma_mat`` carries the single-atom
    rate on its diagonal while ``v_mat`` has a zero diagonal.  The diagonal
    of both curvature matrices is set to zero: every consumer of the
    curvatures (effective Hamiltonian, jump-operator coefficients, lattice
    sums) multiplies the diagonal entry by an operator combination that
    vanishes identically, so the convention is exact.
    """

    geom: GeometryConfig
    gamma_mat: np.ndarray
    v_mat: np.ndarray
    gamma_dd: np.ndarray
    v_dd: np.ndarray
    m_mat: np.ndarray
    m_dd: np.ndarray


def build_matrices(geom: GeometryConfig) -> KernelMatrices:
    """Assemble the N x N kernel matrices for ``geom``."""
    n, gamma = geom.n_atoms, geom.gamma
    f, g = angular_coefficients(geom.phi)
    gamma_mat = np.eye(n) * gamma
    v_mat = np.zeros((n, n))
    gamma_dd = np.zeros((n, n))
    v_dd = np.zeros((n, n))
    if n > 1:
        kappas = TWO_PI * geom.spacing * np.arange(1, n)
        s, c = np.sin(kappas), np.cos(kappas)
        gam = 1.5 * gamma * (f * s / kappas + g * (c / kappas**2 - s / kappas**3))
        vee = 0.75 * gamma * (f * c / kappas - g * (s / kappas**2 + c / kappas**3))
        gdd = _gamma_kernel_dd(kappas, f, g, gamma)
        vdd = _v_kernel_dd(kappas, f, g, gamma)
        for j in range(n):
            for jp in range(j + 1, n):
                k = jp - j - 1
                gamma_mat[j, jp] = gamma_mat[jp, j] = gam[k]
                v_mat[j, jp] = v_mat[jp, j] = vee[k]
                gamma_dd[j, jp] = gamma_dd[jp, j] = gdd[k]
                v_dd[j, jp] = v_dd[jp, j] = vdd[k]
    m_mat = v_mat - 0.5j * gamma_mat
    m_dd = v_dd - 0.5j * gamma_dd
    for a in (gamma_mat, v_mat, gamma_dd, v_dd, m_mat, m_dd):
        a.flags.writeable = False
    return KernelMatrices(geom, gamma_mat, v_mat, gamma_dd, v_dd, m_mat, m_dd)


def find_kappa0(
    phi: float,
    gamma: float = 1.0,
    window: tuple[float, float] = KAPPA0_WINDOW,
    scan_step: float = 0.005,
) -> float:
    """Smallest reduced distance in ``window`` at which Gamma'' vanishes.

    Scans the window for a sign change of the decay-kernel curvature and
    refines the first bracket by bisection until |Gamma''| < 1e-12 * gamma.

    Raises
    ------
    RootNotFoundError
        If the curvature does not change sign anywhere in the window.
    """
    _check_phi(phi)
    f, g = angular_coefficients(phi)
    lo, hi = window

    def curv(k):
        return _gamma_kernel_dd(k, f, g, gamma)

    grid = np.arange(lo, hi + scan_step, scan_step)
    grid[-1] = min(grid[-1], hi)
    vals = curv(grid)
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    exact = np.nonzero(vals == 0.0)[0]
    if exact.size and (not sign_change.size or exact[0] <= sign_change[0]):
        return float(grid[exact[0]])
    if not sign_change.size:
        raise RootNotFoundError(
            f"Gamma'' has no sign change for phi={phi} in the scanned bracket ({lo}, {hi}]"
        )
    a, b = grid[sign_change[0]], grid[sign_change[0] + 1]
    fa = curv(a)
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = curv(mid)
        if abs(fm) < KAPPA0_TOL * gamma:
            return float(mid)
        if fa * fm < 0:
            b = mid
        else:
            a, fa = mid, fm
    return float(0.5 * (a + b))


def find_magic_spacing(phi: float, gamma: float = 1.0) -> float:
    """Magic lattice constant d0 in wavelength units: kappa0 / (2 pi)."""
    return find_kappa0(phi, gamma) / TWO_PI
