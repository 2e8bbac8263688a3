"""Infinite-chain band structure from accelerated lattice sums.

The Fourier transform of the complex kernel over an infinite chain,

    m(q)    = M(0) + 2 sum_{n>=1} cos(q n d) M(kappa_n),     M(0) = -i gamma / 2,
    m_dd(q) =        2 sum_{n>=1} cos(q n d) M''(kappa_n),

yields the separable-branch dispersion e(q) = m(q) + eta0^2 m_dd(q) with
collective rate -2 Im e(q).  The n = 0 term of the curvature sum is
excluded: the uniform-mode branch only ever involves the off-diagonal
curvature sum, so the (divergent for V'') diagonal never enters.

The 1/kappa parts of both kernels make the sums conditionally convergent;
plain truncation leaves an oscillatory tail.  The default estimator
therefore averages the trailing partial sums twice (pairwise means of the
last eleven, then their arithmetic mean), which damps the oscillation
without biasing the limit; raw truncation stays available via
``accelerate=False``.  The reported tail estimate is an analytic bound on
the truncated 1/kappa tail (via Abel summation) plus the absolutely
convergent remainder, and is valid for raw and averaged values alike.

Quasimomenta are dimensionless throughout: q is measured in radians per
wavelength, so the light line sits at |q| = 2 pi and the Brillouin zone
is |q| <= pi / spacing.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import TWO_PI, GeometryConfig
from .kernels import angular_coefficients, m_kernel, m_kernel_dd

DEFAULT_SHELLS = 100_000
DEFAULT_Q_POINTS = 801
MIN_SHELLS = 10

#: Number of trailing partial sums kept for the smoothing window.
_TRAIL = 11

_CHUNK_BUDGET = 4_000_000  # floats per cosine chunk


@dataclass(frozen=True)
class BandPoint:
    """Band data at one quasimomentum (units: radians per wavelength)."""

    q: float
    m_q: complex
    m_dd_q: complex
    e_q: complex
    rate: float
    rate_eta0_zero: float
    delta_rate: float
    shells: int
    tail_estimate: float


def _tail_bound(q: np.ndarray, geom: GeometryConfig, shells: int) -> np.ndarray:
    """Upper bound on the magnitude of the truncated lattice-sum tail.

    The 1/kappa part of M and M'' has amplitude (3 gamma / 4) f; by Abel
    summation its tail beyond n terms is bounded by
    2 amp / (b n |sin(alpha/2)|) for each exponential e^{i alpha n},
    alpha = (q -+ k0) d.  The 1/kappa^2 and steeper parts are bounded
    absolutely.  The bound diverges on the light line, where the sum
    genuinely converges arbitrarily slowly.
    """
    f, g = angular_coefficients(geom.phi)
    b = TWO_PI * geom.spacing  # k0 * d
    n_eff = max(shells - _TRAIL, 1)
    alpha_m = (q * geom.spacing - b) / 2.0
    alpha_p = (q * geom.spacing + b) / 2.0
    s_m = np.maximum(np.abs(np.sin(alpha_m)), 1e-300)
    s_p = np.maximum(np.abs(np.sin(alpha_p)), 1e-300)
    amp = 0.75 * geom.gamma * f
    oscillatory = (2.0 * amp / (b * n_eff)) * (1.0 / s_m + 1.0 / s_p)
    absolute = 3.0 * geom.gamma * (f + abs(g)) * (1.0 / b**2 + 1.0 / b**3) / n_eff
    return oscillatory + absolute


def _sums_on_grid(
    q: np.ndarray, geom: GeometryConfig, shells: int, accelerate: bool
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lattice sums (m, m_dd) and tail bound for every quasimomentum in q."""
    if shells < MIN_SHELLS:
        raise DomainError(f"shells must be >= {MIN_SHELLS}, got {shells}")
    q = np.asarray(q, dtype=float)
    n = np.arange(1, shells + 1)
    kappa = TWO_PI * geom.spacing * n
    kern_m = m_kernel(kappa, geom.phi, geom.gamma)
    kern_dd = m_kernel_dd(kappa, geom.phi, geom.gamma)

    full_m = np.zeros(q.size, dtype=complex)
    full_dd = np.zeros(q.size, dtype=complex)
    chunk = max(1, _CHUNK_BUDGET // max(q.size, 1))
    qd = q * geom.spacing
    for start in range(0, shells, chunk):
        stop = min(shells, start + chunk)
        cosines = np.cos(np.outer(qd, n[start:stop]))
        full_m += cosines @ (2.0 * kern_m[start:stop])
        full_dd += cosines @ (2.0 * kern_dd[start:stop])

    if accelerate:
        # trailing partial sums S_{shells-T+1} .. S_{shells}, per q
        tail_n = n[-_TRAIL:]
        tail_cos = np.cos(np.outer(qd, tail_n))
        values = []
        for full, kern in ((full_m, kern_m), (full_dd, kern_dd)):
            terms = tail_cos * (2.0 * kern[-_TRAIL:])
            suffix = np.cumsum(terms[:, ::-1], axis=1)[:, ::-1]
            partial = full[:, None] - np.concatenate(
                [suffix[:, 1:], np.zeros((q.size, 1), complex)], axis=1
            )
            pair_means = 0.5 * (partial[:, :-1] + partial[:, 1:])
            values.append(pair_means.mean(axis=1))
        sum_m, sum_dd = values
    else:
        sum_m, sum_dd = full_m, full_dd

    sum_m = sum_m - 0.5j * geom.gamma  # n = 0 term of the plain kernel sum
    return sum_m, sum_dd, _tail_bound(q, geom, shells)


def lattice_sum(
    q: float,
    geom: GeometryConfig,
    which: str,
    shells: int,
    accelerate: bool = True,
) -> tuple[complex, float]:
    """Lattice sum at one quasimomentum; returns (value, tail_estimate).

    ``which`` selects ``"m"`` (plain kernel, includes the -i gamma / 2
    on-site term) or ``"m_dd"`` (curvature kernel, off-diagonal only).
    """
    if which not in ("m", "m_dd"):
        raise DomainError(f"which must be 'm' or 'm_dd', got {which!r}")
    sum_m, sum_dd, tail = _sums_on_grid(np.array([q]), geom, shells, accelerate)
    value = sum_m[0] if which == "m" else sum_dd[0]
    return complex(value), float(tail[0])


def default_q_grid(geom: GeometryConfig, points: int = DEFAULT_Q_POINTS) -> np.ndarray:
    """Uniform grid across the first Brillouin zone."""
    edge = math.pi / geom.spacing
    return np.linspace(-edge, edge, points)


def band_scan(
    geom: GeometryConfig,
    q_grid=None,
    shells: int = DEFAULT_SHELLS,
    accelerate: bool = True,
) -> list[BandPoint]:
    """One BandPoint per quasimomentum of ``q_grid`` (default: full zone)."""
    if q_grid is None:
        q_grid = default_q_grid(geom)
    q_grid = np.asarray(q_grid, dtype=float)
    if np.any(np.abs(q_grid) * geom.spacing > math.pi * (1 + 1e-12)):
        raise DomainError("q_grid must lie within the first Brillouin zone |q| <= pi/spacing")
    sum_m, sum_dd, tail = _sums_on_grid(q_grid, geom, shells, accelerate)
    eta2 = geom.eta0**2
    points = []
    for i, q in enumerate(q_grid):
        e_q = sum_m[i] + eta2 * sum_dd[i]
        rate = -2.0 * e_q.imag
        rate0 = -2.0 * sum_m[i].imag
        points.append(
            BandPoint(
                q=float(q),
                m_q=complex(sum_m[i]),
                m_dd_q=complex(sum_dd[i]),
                e_q=complex(e_q),
                rate=float(rate),
                rate_eta0_zero=float(rate0),
                delta_rate=float(rate - rate0),
                shells=int(shells),
                tail_estimate=float(tail[i] * (1.0 + eta2)),
            )
        )
    return points
