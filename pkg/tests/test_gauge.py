import numpy as np
import pytest
from scipy.special import erf, roots_legendre

from hermite_nls.basis import analyze, synthesize, synthesize_at_nodes
from hermite_nls.gauge import DegreeTooSmallError, cumulative_mass, gauge_factor, smooth_step
from hermite_nls.operators import differentiate
from hermite_nls.quadrature import gauss_hermite_rule

from conftest import random_coeffs


def gauss_legendre_cdf(density, upper, lower=-40.0, panels=2000, order=8):
    """Composite Gauss-Legendre integral of ``density`` over [lower, upper]."""
    t, w = roots_legendre(order)
    edges = np.linspace(lower, upper, panels + 1)
    mid, half = (edges[1:] + edges[:-1]) / 2, (edges[1:] - edges[:-1]) / 2
    pts = (mid[:, None] + half[:, None] * t).ravel()
    return float(np.sum(density(pts).reshape(panels, order) * w * half[:, None]))


def test_smooth_step_values():
    assert smooth_step(0.0) == 0.5
    for x in (0.3, 1.7, 5.0):
        np.testing.assert_allclose(smooth_step(x) + smooth_step(-x), 1.0, atol=1e-15)
    oracle = gauss_legendre_cdf(lambda y: np.exp(-(y**2) / 2) / np.sqrt(2 * np.pi), 1.0, lower=-12.0, panels=200)
    np.testing.assert_allclose(smooth_step(1.0), oracle, atol=1e-14)
    np.testing.assert_allclose(smooth_step(1.0), 0.8413447460685429, rtol=1e-15)


def test_h0_cumulative_mass():
    rule = gauss_hermite_rule(64)
    cm = cumulative_mass(np.eye(64)[0], rule)
    np.testing.assert_allclose(cm.values, (1 + erf(rule.nodes)) / 2, atol=1e-8)
    np.testing.assert_allclose(cm.total_mass, 1.0, rtol=1e-14)
    # F off the nodes: decaying part from its coefficients plus the smooth step
    x = np.array([0.0, 1.0])
    F = synthesize(cm.corrected_coeffs, x).real + smooth_step(x) * cm.total_mass
    np.testing.assert_allclose(F, [0.5, 0.9213503964748575], atol=1e-8)


def test_h0_at_central_node():
    rule = gauss_hermite_rule(65)
    cm = cumulative_mass(np.eye(65)[0], rule)
    assert rule.nodes[32] == 0.0
    np.testing.assert_allclose(cm.values[32], 0.5, atol=1e-12)


def test_zero_field():
    rule = gauss_hermite_rule(16)
    cm = cumulative_mass(np.zeros(16), rule)
    assert cm.total_mass == 0.0
    np.testing.assert_array_equal(cm.values, 0.0)


def test_too_small_degree():
    with pytest.raises(DegreeTooSmallError):
        cumulative_mass(np.ones(3), gauss_hermite_rule(3))


def _smooth_random_field(rng, M):
    a = np.zeros(M, dtype=complex)
    a[: M // 2] = random_coeffs(rng, M // 2, decay=0.35)
    return a


@pytest.mark.parametrize("seed", range(5))
def test_agrees_with_dense_quadrature(seed):
    rng = np.random.default_rng(seed)
    M = 128
    rule = gauss_hermite_rule(M)
    a = _smooth_random_field(rng, M)
    cm = cumulative_mass(a, rule)
    density = lambda y: np.abs(synthesize(a, y)) ** 2  # noqa: E731
    idx = np.linspace(0, M - 1, 9).astype(int)
    oracle = [gauss_legendre_cdf(density, rule.nodes[i]) for i in idx]
    np.testing.assert_allclose(cm.values[idx], oracle, atol=1e-8)


def test_invariants_on_resolved_field(rng):
    M = 128
    rule = gauss_hermite_rule(M)
    cm = cumulative_mass(_smooth_random_field(rng, M), rule)
    assert np.all(cm.values >= -1e-9) and np.all(cm.values <= cm.total_mass + 1e-9)
    assert np.all(np.diff(cm.values) >= -1e-9)
    np.testing.assert_allclose(cm.values[-1], cm.total_mass, rtol=1e-8)
    assert abs(cm.corrected[0]) <= 1e-8 and abs(cm.corrected[-1]) <= 1e-8


def test_derivative_consistency():
    M = 128
    rule = gauss_hermite_rule(M)
    f = np.zeros(M)
    f[0], f[3] = 1.0, 0.5
    cm = cumulative_mass(f, rule)
    # F' = F~' + Phi' * mass, with F~ the decaying part
    phi_prime = np.exp(-rule.nodes**2 / 2) / np.sqrt(2 * np.pi)
    dF = synthesize_at_nodes(differentiate(cm.corrected_coeffs), rule).real + phi_prime * cm.total_mass
    density = np.abs(synthesize_at_nodes(f, rule)) ** 2
    np.testing.assert_allclose(dF[1:-1], density[1:-1], atol=1e-7)


def test_gauge_factor_properties(rng):
    M = 48
    rule = gauss_hermite_rule(M)
    u = _smooth_random_field(rng, M)
    np.testing.assert_array_equal(gauge_factor(np.zeros(M), 1.0, 1, rule), 1.0)
    for p in (-2, -1, 1, 2):
        np.testing.assert_allclose(np.abs(gauge_factor(u, 0.7, p, rule)), 1.0, atol=1e-15)
    prod = gauge_factor(u, 0.7, 2, rule) * gauge_factor(u, 0.7, -2, rule)
    np.testing.assert_allclose(prod, 1.0, atol=1e-15)


def test_gauge_factor_rejects_power():
    rule = gauss_hermite_rule(8)
    with pytest.raises(ValueError):
        gauge_factor(np.zeros(8), 1.0, 3, rule)
