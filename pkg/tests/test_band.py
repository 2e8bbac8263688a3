import math

import numpy as np
import pytest

from hybrid_radiance import (
    DomainError,
    GeometryConfig,
    band_scan,
    build_matrices,
    default_q_grid,
    lattice_sum,
)

TWO_PI = 2 * math.pi


def _geom(eta0=0.0, spacing=0.2, phi=math.pi / 2):
    return GeometryConfig(n_atoms=1, spacing=spacing, phi=phi, eta0=eta0)


def _closed_form_rate(q, spacing, phi):
    """Independent oracle: the infinite decay sum in closed form.

    Termwise Fourier series of sin(bn)/n, cos(bn)/n^2 and sin(bn)/n^3
    (b = 2 pi spacing) give the collective rate of the infinite chain
    exactly: a piecewise polynomial in |q| that vanishes identically
    beyond the light line for spacing < 1/2.
    """
    f = math.sin(phi) ** 2
    g = 1 - 3 * math.cos(phi) ** 2
    a = abs(q) * spacing
    b = TWO_PI * spacing
    if a > b:  # outside the light cone
        return 0.0
    return (
        1.0
        + 1.5 * f * (math.pi / b - 1.0)
        + 1.5 * g * (math.pi * (a * a - b * b) / (2 * b**3) + 1.0 / 3.0)
    )


def test_lattice_sum_validates_arguments():
    with pytest.raises(DomainError):
        lattice_sum(0.1, _geom(), "m", shells=5)
    with pytest.raises(DomainError):
        lattice_sum(0.1, _geom(), "bogus", shells=100)


def test_lattice_periodicity():
    geom = _geom()
    q = 1.3
    shifted = q + TWO_PI / geom.spacing
    a, _ = lattice_sum(q, geom, "m", shells=2000)
    b, _ = lattice_sum(shifted, geom, "m", shells=2000)
    assert a == pytest.approx(b, abs=1e-8)


def test_subradiant_window_small_shells():
    geom = _geom()
    for q in (1.05 * TWO_PI, 1.3 * TWO_PI, 2.0 * TWO_PI):
        value, tail = lattice_sum(q, geom, "m", shells=20_000)
        assert abs(-2 * value.imag) < 1e-2
        assert abs(-2 * value.imag) < 2 * tail + 1e-2


def test_rate_against_closed_form_inside_window():
    geom = _geom()
    for q in (0.0, 1.0, 2.5, 4.0, 5.5):
        value, tail = lattice_sum(q, geom, "m", shells=50_000)
        rate = -2 * value.imag
        assert rate == pytest.approx(_closed_form_rate(q, 0.2, math.pi / 2), abs=5e-3)


def test_closed_form_oracle_other_dipole_angle():
    geom = _geom(phi=0.9, spacing=0.25)
    for q in (0.5, 3.0, 1.1 * TWO_PI):
        value, _ = lattice_sum(q, geom, "m", shells=50_000)
        assert -2 * value.imag == pytest.approx(
            _closed_form_rate(q, 0.25, 0.9), abs=5e-3
        )


def test_doubling_convergence_within_tail_estimate():
    geom = _geom()
    for q in (1.7, 4.0, 5.5, 7.0):
        v1, t1 = lattice_sum(q, geom, "m_dd", shells=5_000)
        v2, _ = lattice_sum(q, geom, "m_dd", shells=10_000)
        assert abs(v1 - v2) < 2 * t1


def test_accelerated_beats_or_matches_raw_truncation():
    geom = _geom()
    reference, _ = lattice_sum(3.0, geom, "m", shells=400_000)
    raw, _ = lattice_sum(3.0, geom, "m", shells=3_000, accelerate=False)
    smooth, _ = lattice_sum(3.0, geom, "m", shells=3_000, accelerate=True)
    assert abs(smooth - reference) <= abs(raw - reference) * 1.5


def test_band_scan_symmetry_and_consistency():
    geom = _geom(eta0=0.3)
    q = np.linspace(-math.pi / 0.2, math.pi / 0.2, 41)
    points = band_scan(geom, q_grid=q, shells=2_000)
    by_q = {round(p.q, 9): p for p in points}
    for p in points:
        assert p.rate == pytest.approx(by_q[round(-p.q, 9)].rate, abs=1e-12)
        assert p.e_q == pytest.approx(p.m_q + 0.09 * p.m_dd_q, rel=1e-12)
        assert p.delta_rate == pytest.approx(p.rate - p.rate_eta0_zero, abs=1e-14)


def test_band_scan_rejects_out_of_zone_grid():
    geom = _geom()
    with pytest.raises(DomainError):
        band_scan(geom, q_grid=np.array([2 * math.pi / 0.2]), shells=100)


def test_eta0_scaling_exact_by_construction():
    geom1 = _geom(eta0=0.1)
    geom2 = _geom(eta0=0.3)
    p1 = band_scan(geom1, q_grid=np.array([1.0, 3.0]), shells=1_000)
    p2 = band_scan(geom2, q_grid=np.array([1.0, 3.0]), shells=1_000)
    for a, b in zip(p1, p2):
        d1 = (a.e_q - a.m_q) / 0.1**2
        d2 = (b.e_q - b.m_q) / 0.3**2
        assert d1 == pytest.approx(d2, rel=1e-10)


def test_coupling_shifts_rates_inside_window():
    geom = _geom(eta0=0.3)
    points = band_scan(geom, q_grid=np.array([0.0, 2.0]), shells=20_000)
    for p in points:
        assert p.rate_eta0_zero > 0.1
        assert abs(p.delta_rate) > 1e-3  # order eta0^2 renormalization


def test_default_grid_covers_zone():
    geom = _geom()
    grid = default_q_grid(geom, points=101)
    assert grid.size == 101
    assert grid[0] == pytest.approx(-math.pi / geom.spacing)
    assert grid[-1] == pytest.approx(math.pi / geom.spacing)


def test_ring_circulant_oracle():
    # periodic ring of 401 sites with the same kernel: its circulant
    # spectrum must match the lattice sums at the ring-allowed momenta
    n_ring = 401
    geom = _geom()
    ring_geom = GeometryConfig(n_atoms=n_ring, spacing=geom.spacing, phi=geom.phi)
    kernels = build_matrices(ring_geom)

    first_row = np.empty(n_ring, dtype=complex)
    first_row[0] = -0.5j
    for n in range(1, n_ring):
        shell = min(n, n_ring - n)
        first_row[n] = kernels.m_mat[0, shell]
    circulant = np.empty((n_ring, n_ring), dtype=complex)
    for j in range(n_ring):
        circulant[j] = np.roll(first_row, j)
    ring_values = np.linalg.eigvals(circulant)

    for m in (40, 80, 150, 170, 185):
        q = 2 * math.pi * m / (n_ring * geom.spacing)  # ring-allowed momentum
        # a 401-site ring is a 200-shell truncation of the chain: exact match
        raw, _ = lattice_sum(q, geom, "m", shells=(n_ring - 1) // 2, accelerate=False)
        assert np.abs(ring_values - raw).min() < 1e-9
    for m in (170, 185):
        # far enough from the light line the 200-shell ring truncation error
        # stays inside the combined tolerance against the converged sum
        q = 2 * math.pi * m / (n_ring * geom.spacing)
        converged, _ = lattice_sum(q, geom, "m", shells=100_000)
        ring_rate = -2 * ring_values.imag
        assert np.abs(ring_rate - (-2 * converged.imag)).min() < 1e-2
