import numpy as np
import pytest

from cohdesign import (
    UNITS,
    analytic_vacuum_merit,
    coherence_gradient,
    merit_density,
    merit_field_over_region,
    standard_dipoles,
    steady_coherence,
    vacuum_greens,
    vacuum_im_greens_equal,
    vacuum_merit_density,
)
from cohdesign.adjoint import chi
from cohdesign.core import frob
from cohdesign.geometry import OptimizationRegion

from conftest import random_pair, random_psd

PERP = standard_dipoles("perpendicular", 1.0, 1.0)
OMEGA = UNITS.omega0


def test_gradient_finite_difference_oracle():
    # predicted change 2 Re[grad . dG] vs actual |rho| difference
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 100:
        im_g = random_psd(rng)
        pair = random_pair(rng)
        rho0 = steady_coherence(im_g, pair)
        if abs(rho0) < 1e-3:  # stay clear of the subgradient branch
            continue
        grad = coherence_gradient(im_g, pair)
        assert not grad.at_zero
        h = 1e-6
        d_im = random_psd(rng) - random_psd(rng)
        d_im *= h / np.abs(d_im).max()
        dg = 1j * d_im  # perturb ImG through a purely imaginary dG
        predicted = 2.0 * np.real(frob(grad.matrix, dg))
        actual = abs(steady_coherence(im_g + d_im, pair)) - abs(rho0)
        assert predicted == pytest.approx(actual, rel=1e-4, abs=1e-12)
        checked += 1


def test_gradient_subgradient_at_zero():
    grad = coherence_gradient(np.eye(3), PERP)
    assert grad.at_zero
    # phase-free direction: gradient of Re rho_12 through the 1/(2i) half,
    # with the full complex K retained
    s = frob(PERP.N, np.eye(3)).real
    expected = -0.5j * (PERP.K / s)
    assert np.allclose(grad.matrix, expected, atol=1e-15)


def test_gradient_inverse_scaling():
    rng = np.random.default_rng(3)
    im_g = random_psd(rng)
    g1 = coherence_gradient(im_g, PERP).matrix
    g2 = coherence_gradient(5.0 * im_g, PERP).matrix
    assert np.allclose(g2, g1 / 5.0, rtol=1e-12)


def test_gradient_rejects_nonpositive_decay():
    with pytest.raises(ValueError):
        coherence_gradient(np.zeros((3, 3)), PERP)


def test_merit_density_zero_column():
    g_eq = 1j * vacuum_im_greens_equal(OMEGA)
    assert merit_density(g_eq, np.zeros((3, 3)), PERP) == 0.0


def test_vacuum_merit_on_axis_zero():
    for zx in (0.25, 0.8, 1.9):
        assert vacuum_merit_density([zx, 0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        vacuum_merit_density([0.0, 0.0, 0.0])


def test_vacuum_merit_swap_symmetry():
    # swapping zeta_y'' and zeta_z'' flips the second term only
    rng = np.random.default_rng(9)
    for _ in range(50):
        zx, a, b = rng.uniform(-1.5, 1.5, 3)
        x = chi([zx, a, b])
        c2, s2 = np.cos(2 * x), np.sin(2 * x)
        poly_a = x**4 + x**2 - 3.0
        poly_b = 2.0 * x * (x**2 + 3.0)
        first_term = 2.0 * (poly_a * c2 - poly_b * s2) * a * b
        total = vacuum_merit_density([zx, a, b]) + vacuum_merit_density([zx, b, a])
        assert total == pytest.approx(2.0 * first_term, rel=1e-10, abs=1e-9)


def test_vacuum_merit_diagonal_closed_form():
    for a in (0.2, 0.7, 1.3):
        x = np.pi * np.sqrt(2.0) * a
        expected = 2.0 * a**2 * (
            (x**4 + x**2 - 3.0) * np.cos(2 * x)
            - 2.0 * x * (x**2 + 3.0) * np.sin(2 * x)
        )
        assert vacuum_merit_density([0.0, a, a]) == pytest.approx(expected, rel=1e-12)


def test_merit_oracle_equivalence():
    # the adjoint composite with the analytic vacuum tensor, rescaled by the
    # single positive chi-dependent normalization, equals the closed form;
    # the constant is fitted on the first point and is 1 by construction
    rng = np.random.default_rng(23)
    pts = rng.uniform(-1.8, 1.8, size=(1000, 3))
    pts = pts[np.linalg.norm(pts, axis=1) > 0.05]
    ratio = None
    for zpp in pts:
        lhs = analytic_vacuum_merit(zpp, PERP)
        rhs = vacuum_merit_density(zpp)
        if ratio is None:
            ratio = lhs / rhs
            assert ratio > 0
        if abs(rhs) > 1e-6:
            assert lhs == pytest.approx(ratio * rhs, rel=1e-10)
        else:
            assert lhs == pytest.approx(ratio * rhs, abs=1e-8)


def test_raw_merit_normalization_relation():
    # raw adjoint merit and the closed chi-form differ by the positive
    # factor (3 pi^2/32) / chi^8 exactly
    g_eq = 1j * vacuum_im_greens_equal(OMEGA)
    rng = np.random.default_rng(31)
    for _ in range(100):
        zpp = rng.uniform(-1.5, 1.5, 3)
        x = chi(zpp)
        if x < 0.3:
            continue
        col = vacuum_greens(UNITS.length(zpp), np.zeros(3), OMEGA)
        raw = merit_density(g_eq, col, PERP)
        scaled = raw * (32.0 / (3.0 * np.pi**2)) * x**8
        assert scaled == pytest.approx(vacuum_merit_density(zpp), rel=1e-9, abs=1e-9)


def test_merit_scale_invariance_in_dipoles():
    g_eq = 1j * vacuum_im_greens_equal(OMEGA)
    col = vacuum_greens([0.2, 0.3, -0.4], np.zeros(3), OMEGA)
    base = merit_density(g_eq, col, PERP)
    scaled = merit_density(g_eq, col, standard_dipoles("perpendicular", 3.0, 3.0))
    assert np.sign(scaled) == np.sign(base)
    assert scaled / base > 0


class _AnalyticVacuumField:
    """Duck-typed stand-in for GreensField backed by the closed forms."""

    def __init__(self, step=1.0 / 12.0, half=3.0):
        self.step = step
        self.half = half

    def voxel_center_tensors(self, bounds):
        (xl, xh), (yl, yh), (zl, zh) = bounds
        out = []
        for x in np.arange(xl + self.step / 2, xh, self.step):
            for y in np.arange(yl + self.step / 2, yh, self.step):
                for z in np.arange(zl + self.step / 2, zh, self.step):
                    out.append(vacuum_greens([x, y, z], np.zeros(3), UNITS.omega0))
        return out


def test_merit_field_argmax_matches_dense_closed_form():
    region = OptimizationRegion(nx=6, ny=6, nz=1)
    field = _AnalyticVacuumField()
    g_eq = 1j * vacuum_im_greens_equal(OMEGA)
    mf = merit_field_over_region(field, g_eq, PERP, region)
    assert len(mf.values) == 36
    # closed-form block scores over the same voxel centers
    def block_score(idx):
        total = 0.0
        (xl, xh), (yl, yh), (zl, zh) = region.block_bounds(idx)
        for x in np.arange(xl + field.step / 2, xh, field.step):
            for y in np.arange(yl + field.step / 2, yh, field.step):
                for z in np.arange(zl + field.step / 2, zh, field.step):
                    total += vacuum_merit_density(UNITS.zeta([x, y, z])) * (
                        3.0 * np.pi**2 / 32.0
                    ) / chi(UNITS.zeta([x, y, z])) ** 8
        return total

    scores = [block_score(idx) for idx in mf.candidates]
    assert mf.argmax() == mf.candidates[int(np.argmax(scores))]
    # signs agree site by site
    for v, s in zip(mf.values, scores):
        if abs(s) > 1e-12:
            assert np.sign(v) == np.sign(s)


def test_merit_field_tie_break_lowest_lexicographic():
    region = OptimizationRegion(nx=2, ny=2, nz=1)

    class _Zero:
        def voxel_center_tensors(self, bounds):
            return [np.zeros((3, 3), dtype=complex)]

    mf = merit_field_over_region(_Zero(), 1j * np.eye(3) / 3.0, PERP, region)
    assert np.all(mf.values == 0.0)
    assert mf.argmax() == (0, 0, 0)
