import numpy as np
import pytest

from solwave import randomize as rand


def test_ms_params_validation():
    with pytest.raises(ValueError):
        rand.MsParams(s=0.8)  # s must exceed 5/6
    with pytest.raises(ValueError):
        rand.MsParams(nu=0.4)  # violates s1 > 3 nu
    rand.MsParams()  # defaults valid


def test_seeded_determinism():
    d1 = rand.RandomDraw.from_seed(7, 9)
    d2 = rand.RandomDraw.from_seed(7, 9)
    assert np.array_equal(d1.g, d2.g) and np.array_equal(d1.h, d2.h)
    d3 = rand.RandomDraw.from_seed(8, 9)
    assert not np.array_equal(d1.g, d3.g)


def test_draw_moments():
    # entries standard normal: moment checks over a large batch
    gs = np.concatenate([rand.RandomDraw.from_seed(s, 9).g
                         for s in range(400)])
    assert abs(gs.mean()) < 0.05
    assert abs(gs.std() - 1.0) < 0.05
    assert abs(np.mean(gs**4) - 3.0) < 0.25


def test_split_lo_hi(data_pair, T):
    parts = rand.split_lo_hi(data_pair)
    g = T.grid
    # linearity: lo + hi recombine exactly
    assert g.l2_norm(parts["f0_lo"] + parts["f0_hi"] - data_pair.f0) < 1e-12
    # triangle inequality sanity
    assert (g.l2_norm(parts["f0_lo"]) + g.l2_norm(parts["f0_hi"])
            >= g.l2_norm(data_pair.f0) - 1e-12)
    # disjoint support: a state with sine content far above the low bump
    hi_only = np.sin(6.0 * g.r) * np.exp(-((g.r - 14) ** 2) / 18)
    lo_part = np.real(T.free.multiplier(hi_only, T.bumps.psi0))
    assert g.l2_norm(lo_part) < 1e-3 * g.l2_norm(hi_only)
    # idempotence on the psi0 plateau: splitting f_lo again returns f_lo
    plateau = np.sin(1.0 * g.r) * np.exp(-((g.r - 18) ** 2) / 18)
    lo1 = np.real(T.free.multiplier(plateau, T.bumps.psi0))
    lo2 = np.real(T.free.multiplier(lo1, T.bumps.psi0))
    assert g.l2_norm(lo2 - lo1) < 1e-3 * g.l2_norm(lo1)


def test_recomposition_and_unit_draw(data_pair, T):
    assert data_pair.recomposition_defect(0) < 1e-3
    assert data_pair.recomposition_defect(1) < 1e-3
    ones = rand.RandomDraw(0, np.ones(len(data_pair.ks)),
                           np.ones(len(data_pair.ks)))
    a, b = rand.randomize(data_pair, ones)
    g = T.grid
    assert g.l2_norm(a - data_pair.f0) < 1e-3 * g.l2_norm(data_pair.f0)
    assert g.l2_norm(b - data_pair.f1) < 1e-3 * g.l2_norm(data_pair.f1)
    zeros = rand.RandomDraw(0, np.zeros(len(data_pair.ks)),
                            np.zeros(len(data_pair.ks)))
    a0, b0 = rand.randomize(data_pair, zeros)
    assert np.allclose(a0, data_pair.deterministic_part(0))
    assert np.allclose(b0, data_pair.deterministic_part(1))


def test_orthogonality_preserved_across_draws(data_pair, T):
    g = T.grid
    kap = T.dec.eig.kappa
    y = T.dec.eig.Y.values
    yy = np.real(g.inner(y, y))
    base = data_pair.orthogonality_scalar(kap)
    worst = 0.0
    for s in range(100):
        d = rand.RandomDraw.from_seed(s, len(data_pair.ks))
        a, b = rand.randomize(data_pair, d)
        scal = kap * np.real(g.inner(y, a)) + np.real(g.inner(y, b))
        worst = max(worst, abs(scal - base * yy))
    assert worst < 1e-6


def test_no_regularization(data_pair, T):
    p = rand.MsParams()
    base = rand.norm_hs(data_pair, p.s)
    vals = []
    for s in range(200):
        d = rand.RandomDraw.from_seed(1000 + s, len(data_pair.ks))
        a, b = rand.randomize(data_pair, d)
        vals.append(rand.norm_hs(rand.DataPair(a, b, T), p.s))
    mean = np.mean(vals)
    assert 0.5 * base <= mean <= 2.0 * base
    # weighted norms stay finite for every draw
    xs = [rand.norm_Xs(rand.DataPair(*rand.randomize(
        data_pair, rand.RandomDraw.from_seed(2000 + s, len(data_pair.ks))),
        T), p) for s in range(20)]
    assert np.all(np.isfinite(xs))


def test_norm_xs_zero_and_monotonicity(T):
    p = rand.MsParams()
    zero = rand.DataPair(np.zeros(T.grid.n), np.zeros(T.grid.n), T)
    assert rand.norm_Xs(zero, p) == 0.0
    # the X_s norm dominates the homogeneous piece of its first component
    r = T.grid.r
    f0 = np.sin(3 * r) * np.exp(-((r - 12) ** 2) / 8)
    pair = rand.DataPair(f0, np.zeros(T.grid.n), T)
    full = rand.norm_Xs(pair, p)
    assert full >= rand.norm_hs(pair, p.s) - 1e-12


def test_norm_xs_refinement_stability(T, data_pair):
    from solwave.dft import build_transform
    from solwave.grids import make_frequency_grid, make_grid
    from solwave.soliton import SolitonParams, potential

    p = rand.MsParams()
    v1 = rand.norm_Xs(data_pair, p)
    g2 = make_grid(40.0, 4001, "uniform")
    T2 = build_transform(potential(SolitonParams(1.0), g2), g2,
                         make_frequency_grid(0.5, 12.0, 576), k0=2)
    r = g2.r
    f0 = (0.3 * np.sin(4.2 * r) * np.exp(-((r - 10) ** 2) / 6)
          + 0.06 * np.sin(1.5 * r) * np.exp(-((r - 18) ** 2) / 18))
    f1 = (0.2 * np.sin(4.0 * r) * np.exp(-((r - 12) ** 2) / 6)
          + 0.08 * np.sin(1.5 * r) * np.exp(-((r - 18) ** 2) / 18))
    v2 = rand.norm_Xs(rand.DataPair(f0, f1, T2), p)
    assert abs(v1 - v2) < 0.02 * v1


def test_membership(T):
    p = rand.MsParams(eps=1e-3)
    y = T.dec.eig.Y.values
    kap = T.dec.eig.kappa
    zero = rand.DataPair(np.zeros(T.grid.n), np.zeros(T.grid.n), T)
    assert rand.membership_Ms(zero, p, 1.0, 5.0)["member"]
    good = rand.DataPair(1e-6 * y, -kap * 1e-6 * y, T)
    assert rand.membership_Ms(good, p, 1.0, 5.0)["member"]
    bad = rand.DataPair(1e-8 * y, +kap * 1e-8 * y, T)
    rep = rand.membership_Ms(bad, p, 1.0, 5.0)
    assert not rep["member"]
    assert any("orthogonality" in reason for reason in rep["reasons"])
    assert rep["constants_are_empirical"]
