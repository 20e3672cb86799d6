import numpy as np
import pytest

from solwave import soliton as sol
from solwave.grids import SQRT_4PI, lorentz_norm, make_grid


def test_static_profile_values():
    assert sol.phi_profile(1.0, np.array([0.0]))[0] == pytest.approx(
        3.0**0.25, abs=1e-12)
    assert sol.resonance_profile(1.0, np.array([0.0]))[0] == pytest.approx(
        0.25 * 3.0**0.25, abs=1e-12)
    assert sol.potential_profile(1.0, np.array([0.0]))[0] == pytest.approx(
        -15.0, abs=1e-12)


def test_scaling_relation(grid40):
    lam, a = 2.0, 1.0
    lhs = np.sqrt(lam) * sol.phi_profile(a, lam * grid40.r)
    rhs = sol.phi_profile(lam**2 * a, grid40.r)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_elliptic_residual(grid40):
    for a in (0.6, 1.0, 1.4):
        # 6th-order stencil isolates formula error from FD error
        assert sol.elliptic_residual(sol.SolitonParams(a), grid40, 6) < 1e-8


def test_resonance_central_difference_oracle(grid40):
    eps = 1e-4
    fd = (sol.phi_profile(1 + eps, grid40.r)
          - sol.phi_profile(1 - eps, grid40.r)) / (2 * eps)
    closed = sol.resonance_profile(1.0, grid40.r)
    assert np.max(np.abs(fd - closed)) < 5e-8  # O(eps^2)


def test_resonance_tail():
    r = np.linspace(30.0, 40.0, 21)
    tail = r * sol.resonance_profile(1.0, r)
    target = -0.25 * 3.0**0.25
    assert np.max(np.abs(tail / target - 1.0)) < 0.01


def test_resonance_residual(grid40):
    for a in (0.6, 1.0, 1.4):
        assert sol.resonance_residual(sol.SolitonParams(a), grid40, 4) < 1e-5


def test_potential_metadata(grid40):
    V = sol.potential(sol.SolitonParams(1.0), grid40)
    # tail model V ~ -15 / r^4 from the closed form
    sel = (grid40.r >= 10) & (grid40.r <= 40)
    sup = np.max(np.abs(grid40.r[sel] ** 4 * V.V.values[sel] + 15.0))
    assert sup < 0.5
    # derivative decay |V'| <r>^5 bounded
    Vp = np.gradient(V.V.values, grid40.r)
    assert np.max(np.abs(Vp) * (1 + grid40.r**2) ** 2.5) < 100.0


def test_nonlinearity_binomial_identity():
    rng = np.random.default_rng(11)
    x = rng.normal(size=100)
    y = rng.normal(size=100)
    direct = (x + y) ** 5 - y**5 - 5 * y**4 * x
    assert np.max(np.abs(sol.nonlinearity(x, y) - direct)) < 1e-10 * (
        1 + np.max(np.abs(direct)))
    assert np.all(sol.nonlinearity(np.zeros(5), y[:5]) == 0)
    assert np.allclose(sol.nonlinearity(x[:5], np.zeros(5)), x[:5] ** 5)


def test_corollary_weighted_soliton_norm(grid40):
    # <x>^alpha phi_a in L^{p,q} for alpha < 1 - 3/p (here p = 6, alpha = 0.4)
    alpha, p, q = 0.4, 6.0, 2.0
    sup = 0.0
    for a in (0.8, 1.0, 1.2):
        prof = sol.phi_profile(a, grid40.r) * (1 + grid40.r**2) ** (alpha / 2)
        u = SQRT_4PI * grid40.r * prof
        sup = max(sup, lorentz_norm(u, p, q, grid40))
    assert np.isfinite(sup) and sup < 50.0


def test_check_potential_difference_constant_path(grid40):
    ratio = sol.check_potential_difference(lambda t: 1.0, grid40, 0.5, 2.0, 2.0)
    assert ratio == 0.0


def test_check_potential_difference_moving_path(grid40):
    path = lambda t: 1.0 + 0.1 * (1.0 - np.exp(-t))
    r1 = sol.check_potential_difference(path, grid40, 0.5, 2.0, 2.0)
    g2 = make_grid(40.0, 4001, "uniform")
    r2 = sol.check_potential_difference(path, g2, 0.5, 2.0, 2.0)
    assert np.isfinite(r1)
    assert abs(r1 - r2) < 0.10 * r1  # refinement-stability oracle


def test_check_potential_difference_linearization(grid40):
    # ||V - V_{1+d}||_{L^2} / d -> ||d_a V|_{a=1}||_{L^2}: symbolic oracle
    # d_a V_a = -15 (1 - a r^2) / (1 + a r^2)^3   [by direct differentiation]
    dV = -15.0 * (1 - grid40.r**2) / (1 + grid40.r**2) ** 3
    target = np.sqrt(4 * np.pi * np.sum(grid40.w * grid40.r**2 * dV**2))
    for delta, tol in ((1e-3, 2e-3), (1e-4, 2e-4)):
        diff = (sol.potential_profile(1.0, grid40.r)
                - sol.potential_profile(1.0 + delta, grid40.r)) / delta
        val = np.sqrt(4 * np.pi * np.sum(grid40.w * grid40.r**2 * diff**2))
        assert abs(val - target) < tol * target


def test_window_validation(grid40):
    with pytest.raises(ValueError):
        sol.check_potential_difference(lambda t: 2.0, grid40, 0.5, 2.0, 2.0)
    with pytest.raises(ValueError):
        sol.check_potential_difference(lambda t: 1.0, grid40, 2.0, 2.0, 2.0)
