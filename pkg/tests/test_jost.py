import numpy as np
import pytest

from solwave import jost
from solwave.grids import make_frequency_grid, make_grid
from solwave.soliton import SolitonParams, potential


def test_free_case_identities(T_free, grid40, freqs):
    tab = T_free.jost
    assert np.max(np.abs(tab.m - 1.0)) < 1e-12
    target = np.sin(grid40.r[:, None] * freqs.rho[None, :])
    assert np.max(np.abs(tab.e_tilde - target)) < 1e-10
    assert np.max(np.abs(tab.c_plus - 1.0 / 2j)) < 1e-12


def test_gronwall_ceiling(T, V1):
    ceiling = jost.gronwall_ceiling(V1)
    # analytic value: exp(int r |V|) = exp(15/2)
    assert ceiling == pytest.approx(np.exp(7.5), rel=1e-3)
    assert np.max(np.abs(T.jost.m)) <= ceiling


def test_volterra_contraction_and_tail(T):
    tab = T.jost
    assert tab.contraction_factor < 1.0
    assert tab.tail_correction.max() < jost.TAIL_TOL


def test_tail_error_raised_for_low_rho(grid40, V1):
    # rho below the calibrated cutoff makes the analytic tail exceed 1e-4
    bad = make_frequency_grid(0.05, 1.0, 48)
    with pytest.raises(jost.JostTailError):
        jost.solve_m(V1, grid40, bad)


def test_c_plus_unimodularity(T):
    rep = jost.c_plus_report(T.jost)
    assert rep["abs_c_plus_max_defect"] < 1e-12
    # |f(0,rho)| stays well off the resonance-adjacent flag threshold
    assert rep["abs_f0_min"] > 0.1
    assert rep["resonance_adjacent_rho"].size == 0
    assert np.isfinite(rep["C_fit"])


def test_lower_bound_fit_refinement_stable(T, grid40, freqs, V1):
    rep1 = jost.c_plus_report(T.jost)
    g2 = make_grid(40.0, 4001, "uniform")
    V2 = potential(SolitonParams(1.0), g2)
    tab2 = jost.solve_m(V2, g2, freqs)
    rep2 = jost.c_plus_report(tab2)
    assert abs(rep1["C_fit"] - rep2["C_fit"]) < 0.02 * rep1["C_fit"]


def test_e_tilde_dirichlet(T):
    # e_tilde(0, rho) = c_+ f(0) - conj(f(0))/2i vanishes identically
    tab = T.jost
    e0 = tab.c_plus * tab.m0 - np.conj(tab.m0) / 2j
    assert np.max(np.abs(e0)) < 1e-8


def test_e_tilde_ode_residual(T):
    rng = np.random.default_rng(3)
    ir = rng.integers(10, T.grid.n - 10, 50)
    jr = rng.integers(4, T.freqs.n - 4, 50)
    res = jost.ode_residual(T.jost, ir, jr)
    assert res.max() < 5e-4  # normalized by rho^2


def test_e_tilde_asymptotic_amplitude(T):
    # phase-energy oracle: |e|^2 + |e'/rho|^2 = 1 where m ~ 1
    tab = T.jost
    h = T.grid.r[1] - T.grid.r[0]
    e = tab.e_tilde
    de = np.full_like(e, np.nan)
    de[2:-2] = (e[:-4] - 8 * e[1:-3] + 8 * e[3:-1] - e[4:]) / (12 * h)
    sel = (T.grid.r >= 30) & (T.grid.r <= 39)
    amp = (np.abs(e[sel]) ** 2
           + np.abs(de[sel] / T.freqs.rho[None, :]) ** 2)
    assert np.nanmax(np.abs(amp - 1.0)) < 0.02


def test_free_limit_linearity(grid40, freqs, V1, T):
    # e_tilde[eps V] - sin -> linear in eps
    from solwave.soliton import PotentialProfile
    from solwave.grids import RadialFunction

    target = np.sin(grid40.r[:, None] * freqs.rho[None, :])
    defects = []
    for scl in (0.02, 0.01):
        Vs = PotentialProfile(
            RadialFunction(scl * V1.V.values, grid40, is_real=True),
            1.0, scl * 15.0)
        tab = jost.solve_m(Vs, grid40, freqs)
        defects.append(np.max(np.abs(tab.e_tilde - target)))
    assert defects[0] == pytest.approx(2 * defects[1], rel=0.05)


def test_m_bounds_monotone_in_rho_star(T):
    b1 = jost.check_m_bounds(T.jost, rho_star=0.5)
    b2 = jost.check_m_bounds(T.jost, rho_star=2.0)
    for key in b1:
        assert b2[key] <= b1[key] + 1e-12


def test_m_bounds_free_case(T_free):
    b = jost.check_m_bounds(T_free.jost)
    assert all(v < 1e-10 for v in b.values())
