"""Fixed-point system for the modulated-soliton dynamics.

Unknowns: the perturbation field v(t) = (2 kappa)^{-1/2}(x_+ + x_-) Y
+ P_ac v, the scale path a(t) with a(0) = 1, and the scalar correction h
along the bound state.  One pass of the map evaluates, for the current
iterate (v, a):

  * the correction h that removes the exponentially growing part of x_+,
    from    2 h kappa <Y, Y> = int_0^inf e^{-s kappa}
            < -kappa a'(s)(res_{a(s)} - a(s)^{-5/4} res) + N2(v+F), Y > ds;
  * the bound-state coefficients x_+ (in the cancelled, integrate-to-the-
    horizon form) and x_-;
  * the projected field P_ac w by the band-limited spectral Duhamel
    formula, with the pure resonance direction handled through the exact
    zero-energy identity cos(t sqrt H) P_ac res = res;
  * the new scale path b from the free-flow pairing ODE.

All integrals over the paper's infinite horizon are truncated at the
window T with exp(-kappa T) tail bounds reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dft import DistortedTransform, build_transform
from .grids import (RadialGrid, SpaceTimeField, make_frequency_grid,
                    make_grid, mixed_norm, SQRT_4PI)
from .propagator import FlowConfig, RepOperators, _sin_over_rho
from .soliton import (SolitonParams, nonlinearity, phi_profile, potential,
                      potential_profile, resonance_profile)

A_WINDOW = (0.5, 1.5)


@dataclass(frozen=True)
class FixedPointConfig:
    eps: float = 1e-2
    max_iters: int = 25
    contraction_tol: float = 1e-9
    window_T: float = 16.0
    n_times: int = 161

    def __post_init__(self):
        if self.eps <= 0 or self.eps > 0.2:
            raise ValueError("eps must lie in (0, 0.2]")


@dataclass
class ModulationState:
    """Converged (or in-progress) fixed-point data."""

    v: SpaceTimeField            # full perturbation: eigen part + P_ac part
    a: np.ndarray
    a_dot: np.ndarray
    x_plus: np.ndarray
    x_minus: np.ndarray
    h: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if abs(self.a[0] - 1.0) > 1e-12:
            raise ValueError("scale path must start at a(0) = 1")
        if np.any((self.a <= A_WINDOW[0]) | (self.a >= A_WINDOW[1])):
            raise ValueError("scale path leaves the (1/2, 3/2) window")


class ModulationSession:
    """Grids, transform, and spectral scratch for the fixed-point solver.

    The session owns a wider domain (R_max = 64) and a lower band cutoff
    (rho_min ~ 0.12) than the default toolkit config: the Duhamel pieces
    are band-projected each pass, and the sub-band truncation floor must
    stay below the discretization error for the residual refinement
    checks to show clean second-order decay.
    """

    def __init__(self, R_max: float = 64.0, n: int = 2561,
                 rho_min: float = 0.12, rho_max: float = 8.0,
                 k0: int = 2, T: DistortedTransform | None = None):
        if T is None:
            n_rho = int(round((rho_max - rho_min) / 0.02)) + 1
            grid = make_grid(R_max, n, "uniform")
            freqs = make_frequency_grid(rho_min, rho_max, n_rho)
            V = potential(SolitonParams(1.0), grid)
            T = build_transform(V, grid, freqs, k0=k0)
        self.T = T
        self.grid = T.grid
        self.rep = RepOperators(T)
        self.kappa = T.dec.eig.kappa
        self.Y = T.dec.eig.Y.values
        self.Y_sq = float(np.real(self.grid.inner(self.Y, self.Y)))
        self.phi_u = SQRT_4PI * self.grid.r * phi_profile(1.0, self.grid.r)
        self.res_u = self.rep.res_u
        self.V1 = potential_profile(1.0, self.grid.r)
        # free-transform pieces for the scale ODE pairings
        self.free = T.free
        self.w_pair = self.rep.w_pair
        self.C_pair = self.rep.C_pair
        self._discrete_mode = None

    def discrete_unstable_mode(self) -> tuple[float, np.ndarray]:
        """Bound state of the 4th-order banded discretization.

        The grid corrector must filter the growing mode of its own
        discrete operator (which differs from the continuum Y at the
        1e-8 level, enough to seed e^{kappa T} growth over the window).
        """
        if self._discrete_mode is None:
            from scipy.linalg import eig_banded

            from .spectrum import _banded_hamiltonian
            ab = _banded_hamiltonian(self.V1, self.grid)
            evals, evecs = eig_banded(ab, lower=True, select="v",
                                      select_range=(-np.inf, -1e-10))
            kap_h = float(np.sqrt(-evals[0]))
            y = evecs[:, 0]
            y = y / self.grid.l2_norm(y)
            if y[0] < 0:
                y = -y
            self._discrete_mode = (kap_h, y)
        return self._discrete_mode

    # -- resonance-tail handling ----------------------------------------

    def resonance_split(self, u: np.ndarray) -> tuple[float, np.ndarray]:
        """Split u = c * res + decaying remainder by matching the 1/r tail.

        Flows of resonance-tailed profiles ring on a truncated grid; the
        zero-mode direction is evolved through the exact identities
        cos(t sqrt H) P_ac res = res and sin(t sqrt H)/sqrt H res = t res,
        so only the <r>^{-2} remainder ever reaches a transform.
        """
        sel = (self.grid.r >= 0.80 * self.grid.R_max) \
            & (self.grid.r <= 0.95 * self.grid.R_max)
        w = self.grid.w[sel]
        denom = float(np.sum(w * self.res_u[sel] ** 2))
        c = float(np.sum(w * self.res_u[sel] * np.real(u[sel])) / denom)
        return c, u - c * self.res_u

    def _odd_eval(self, u: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Odd extension of a grid profile, clamped to its tail value."""
        vals = np.interp(np.abs(x), self.grid.r, np.real(u),
                         left=0.0, right=float(np.real(u[-1])))
        return np.sign(x) * vals

    def dalembert_cos_pairing(self, g: np.ndarray, ts: np.ndarray) -> np.ndarray:
        """< cos_f(t) g, V res > by the half-line d'Alembert formula.

        Exact in the tails (the odd extension is clamped to the profile's
        asymptote), so resonance-tailed data is admissible.
        """
        wV = self.grid.w * self.V1 * self.res_u
        r = self.grid.r
        out = np.empty(ts.size)
        for j, t in enumerate(ts):
            out[j] = 0.5 * float(np.sum(
                wV * (self._odd_eval(g, r + t) + self._odd_eval(g, r - t))))
        return out

    def dalembert_sin_pairing(self, g: np.ndarray, ts: np.ndarray) -> np.ndarray:
        """< sin_f(t)/|nabla| g, V res > via the integrated d'Alembert form."""
        from scipy.integrate import cumulative_trapezoid

        r = self.grid.r
        cum = np.concatenate([[0.0], cumulative_trapezoid(np.real(g), r)])
        tail_val = float(np.real(g[-1]))

        def even_cum(x):
            ax = np.abs(x)
            inside = np.interp(ax, r, cum)
            beyond = cum[-1] + (ax - r[-1]) * tail_val
            return np.where(ax <= r[-1], inside, beyond)

        wV = self.grid.w * self.V1 * self.res_u
        out = np.empty(ts.size)
        for j, t in enumerate(ts):
            out[j] = 0.5 * float(np.sum(
                wV * (even_cum(r + t) - even_cum(r - t))))
        return out

    # -- closed-form modulation families -------------------------------

    def res_diff_u(self, a_vals: np.ndarray) -> np.ndarray:
        """u-rep of res_{a} - a^{-5/4} res, rows over the a-path.

        Decays like <r>^{-3}: the 1/r tails of the two resonances cancel,
        which is what makes the band-spectral treatment of this term
        accurate.
        """
        r = self.grid.r[None, :]
        a = np.asarray(a_vals, float)[:, None]
        prof = resonance_profile_path(a, r) - a**-1.25 * resonance_profile(
            1.0, self.grid.r)[None, :]
        return SQRT_4PI * r * prof

    def n2_field(self, u_field: np.ndarray, a_vals: np.ndarray) -> np.ndarray:
        """N2(u)(s, r) = (V - V_{a(s)}) u + N(u, phi_{a(s)}), u-rep rows."""
        r = self.grid.r[None, :]
        a = np.asarray(a_vals, float)[:, None]
        V_a = -15.0 * a / (1.0 + a * r**2) ** 2
        Vdiff = self.V1[None, :] - V_a
        u_prof = u_field / (SQRT_4PI * r)
        phi_a = (3.0 * a) ** 0.25 / np.sqrt(1.0 + a * r**2)
        lin = Vdiff * u_field
        nl = SQRT_4PI * r * nonlinearity(np.real(u_prof), phi_a)
        return lin + nl

    # -- band spectral flows --------------------------------------------

    def _band_field(self, spec: np.ndarray) -> np.ndarray:
        """Inverse transform of frequency rows, (nt, n_rho) -> (nt, n_r)."""
        return self.T.c_norm * ((spec * self.T.freqs.w[None, :])
                                @ self.T.jost.e_tilde.T)

    def band_flow(self, ts: np.ndarray, u: np.ndarray, kind: str) -> np.ndarray:
        g = self.T.forward(u)
        rho = self.T.freqs.rho
        if kind == "cos":
            spec = np.cos(ts[:, None] * rho[None, :]) * g[None, :]
        else:
            spec = _sin_over_rho(ts, rho) * g[None, :]
        return self._band_field(spec)

    def duhamel(self, ts: np.ndarray, forcing_hat: np.ndarray,
                kind: str) -> np.ndarray:
        """int_0^t flow(t-s) forcing(s) ds on the uniform time grid.

        forcing_hat holds the distorted transforms of the forcing rows;
        trapezoid in s.
        """
        nt = ts.size
        dt = ts[1] - ts[0]
        rho = self.T.freqs.rho
        out_spec = np.zeros_like(forcing_hat)
        for i in range(1, nt):
            tau = ts[i] - ts[: i + 1]
            if kind == "cos":
                ker = np.cos(tau[:, None] * rho[None, :])
            else:
                ker = _sin_over_rho(tau, rho)
            w = np.full(i + 1, dt)
            w[0] = w[-1] = dt / 2
            out_spec[i] = (w[:, None] * ker * forcing_hat[: i + 1]).sum(axis=0)
        return self._band_field(out_spec)

    def free_pairings(self, ts: np.ndarray, u: np.ndarray,
                      kind: str) -> np.ndarray:
        """<flow_free(t) u, V res> over the time grid."""
        rho = self.free.freqs.rho
        Su = self.free.forward(u)
        if kind == "cos":
            ker = np.cos(ts[:, None] * rho[None, :])
        else:
            ker = _sin_over_rho(ts, rho)
        return np.real((ker * (Su * self.w_pair)[None, :]) @ self.free.freqs.w)

    def free_duhamel_pairings(self, ts: np.ndarray, forcing_free_hat: np.ndarray,
                              kind: str) -> np.ndarray:
        """int_0^t <flow_free(t-s) forcing(s), V res> ds."""
        nt = ts.size
        dt = ts[1] - ts[0]
        rho = self.free.freqs.rho
        weighted = forcing_free_hat * self.w_pair[None, :]
        out = np.zeros(nt)
        for i in range(1, nt):
            tau = ts[i] - ts[: i + 1]
            if kind == "cos":
                ker = np.cos(tau[:, None] * rho[None, :])
            else:
                ker = _sin_over_rho(tau, rho)
            w = np.full(i + 1, dt)
            w[0] = w[-1] = dt / 2
            out[i] = np.real(((w[:, None] * ker * weighted[: i + 1])
                              .sum(axis=0)) @ self.free.freqs.w)
        return out


def resonance_profile_path(a: np.ndarray, r: np.ndarray) -> np.ndarray:
    """resonance profile for broadcast (a rows, r columns)."""
    s = 1.0 + a * r**2
    return (0.25 * 3.0**0.25 * a**-0.75 / np.sqrt(s)
            - 0.5 * r**2 * (3.0 * a) ** 0.25 * s**-1.5)


# ---------------------------------------------------------------------------
# Single-pass pieces
# ---------------------------------------------------------------------------

def compute_h(sess: ModulationSession, ts: np.ndarray, g_pair: np.ndarray,
              tail_frac_tol: float = 0.01) -> tuple[float, float]:
    """h and the horizon tail bound from the pairing series g(s).

    g_pair(s) = < -kappa a'(res_a - a^{-5/4} res) + N2(v+F), Y >.

    The sign follows the Riesz-projection dynamics of the bound-state
    pair: the growing coefficient is
    x_+(t) = e^{kappa t} [x_+(0) + pref int_0^inf e^{-kappa s} g ds] + ...,
    so the correction must satisfy 2 h kappa <Y,Y> = -int e^{-kappa s} g.
    """
    kap = sess.kappa
    dt = ts[1] - ts[0]
    w = np.full(ts.size, dt)
    w[0] = w[-1] = dt / 2
    integral = float(np.sum(w * np.exp(-kap * ts) * g_pair))
    h = -integral / (2.0 * kap * sess.Y_sq)
    tail = np.exp(-kap * ts[-1]) * np.max(np.abs(g_pair[-5:])) / kap
    tail_h = tail / (2.0 * kap * sess.Y_sq)
    if abs(h) > 0 and tail_h > tail_frac_tol * abs(h) + 1e-15:
        raise RuntimeError(
            f"h horizon tail {tail_h:.2e} exceeds {tail_frac_tol:.0%} of "
            f"h = {h:.2e}; enlarge the window")
    return h, tail_h


def step_x(sess: ModulationSession, ts: np.ndarray, g_plus: np.ndarray,
           g_minus: np.ndarray, q_t: np.ndarray, a_dot: np.ndarray,
           x_minus0: float, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Bound-state coefficients on the time grid.

    From the Riesz-projection dynamics (x_pm)' = pm kappa x_pm
    pm (2 kappa)^{-1/2} <G, Y> with G the full forcing, after integrating
    the soliton acceleration by parts:

        x_+(t) = e^{kappa t} x_+(0) - pref a'(t) q(t)
                 + pref int_0^t e^{kappa (t-s)} g_+(s) ds,
        x_-(t) = e^{-kappa t} x_-(0) + pref a'(t) q(t)
                 - pref int_0^t e^{-kappa (t-s)} g_-(s) ds,

    with pref = (2 kappa)^{-1/2}.  x_+ is evaluated in the cancelled form
    (the e^{+kappa t} prefactor vanishes by the choice of h):
        x_+(t) = -pref [ int_t^T e^{(t-s) kappa} g_+(s) ds + a'(t) q(t) ].
    """
    kap = sess.kappa
    nt = ts.size
    dt = ts[1] - ts[0]
    pref = (2.0 * kap) ** -0.5
    x_plus = np.empty(nt)
    x_minus = np.empty(nt)
    # reverse cumulative for x_plus: I(t) = int_t^T e^{(t-s) kappa} g ds
    I = 0.0
    x_plus[-1] = -pref * a_dot[-1] * q_t[-1]
    for i in range(nt - 2, -1, -1):
        e = np.exp(-kap * dt)
        I = e * I + 0.5 * dt * (g_plus[i] + e * g_plus[i + 1])
        x_plus[i] = -pref * (I + a_dot[i] * q_t[i])
    # forward cumulative for x_minus: J(t) = int_0^t e^{-(t-s) kappa} g ds
    J = 0.0
    x_minus[0] = pref * x_minus0
    for i in range(1, nt):
        e = np.exp(-kap * dt)
        J = e * J + 0.5 * dt * (g_minus[i] + e * g_minus[i - 1])
        x_minus[i] = pref * (np.exp(-kap * ts[i]) * x_minus0
                             + a_dot[i] * q_t[i] - J)
    if np.max(np.abs(x_plus)) > 10.0 * eps**2:
        raise RuntimeError(
            f"x_+ reached {np.max(np.abs(x_plus)):.2e} > 10 eps^2; "
            "the h-cancellation failed")
    return x_plus, x_minus


def step_pacv(sess: ModulationSession, ts: np.ndarray, psi0_t: np.ndarray,
              psi1_t: np.ndarray, n2: np.ndarray, res_diff: np.ndarray,
              a_vals: np.ndarray, a_dot: np.ndarray) -> np.ndarray:
    """Band-spectral Duhamel evaluation of the projected field.

    P_ac w(t) = C(t) P_ac(psi0_t - phi) + S(t) P_ac psi1_t
                + int_0^t S(t-s) N2 ds
                - int_0^t C(t-s) [a'(res_a - a^{-5/4} res)] ds
                - [int_0^t a' a^{-5/4} ds] res.

    The resonance components of the data and the pure-resonance Duhamel
    direction evolve through the exact zero-energy identities
    (cos-flow fixes res, sin-flow grows as t res); everything that reaches
    a transform decays at least like <r>^{-2} in u-representation.
    """
    dt = ts[1] - ts[0]
    c0, g0 = sess.resonance_split(sess.T.dec.p_ac(psi0_t - sess.phi_u))
    c1, g1 = sess.resonance_split(sess.T.dec.p_ac(psi1_t))
    lin = (sess.band_flow(ts, g0, "cos") + sess.band_flow(ts, g1, "sin")
           + (c0 + c1 * ts)[:, None] * sess.res_u[None, :])
    n2_hat = np.stack([sess.T.forward(n2[i]) for i in range(ts.size)])
    duh_s = sess.duhamel(ts, n2_hat, "sin")
    rd = a_dot[:, None] * res_diff
    rd_hat = np.stack([sess.T.forward(rd[i]) for i in range(ts.size)])
    duh_c = sess.duhamel(ts, rd_hat, "cos")
    drift = np.concatenate(
        [[0.0], np.cumsum(0.5 * dt * ((a_dot * a_vals**-1.25)[1:]
                                      + (a_dot * a_vals**-1.25)[:-1]))])
    return np.real(lin + duh_s - duh_c) - drift[:, None] * sess.res_u[None, :]


def step_a(sess: ModulationSession, ts: np.ndarray, psi0_t: np.ndarray,
           psi1_t: np.ndarray, n2_free_hat: np.ndarray,
           res_diff: np.ndarray, a_vals: np.ndarray,
           a_dot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale-path update b from the free-flow pairing formula.

    b'(t) = -(4 pi a^{5/4} / <V, res>^2) < cos_f(t)(psi0_t - phi)
            + sin_f(t)/|nabla| psi1_t + int_0^t sin_f N2
            - int_0^t cos_f a'(res_a - a^{-5/4} res), V res >.

    The overall sign and the sign of the last pairing follow the
    resonance-cancellation derivation (killing the zero-mode coefficient
    of the projected Duhamel field); with this orientation the scale path
    tracks a statically shifted soliton, which the opposite orientation
    drives away from.  The data pairings P1, P2 run through the
    d'Alembert form (resonance-tailed data admissible); the Duhamel
    pairings P3, P4 act on decaying forcings and stay spectral.
    """
    dt = ts[1] - ts[0]
    P1 = sess.dalembert_cos_pairing(psi0_t - sess.phi_u, ts)
    P2 = sess.dalembert_sin_pairing(psi1_t, ts)
    P3 = sess.free_duhamel_pairings(ts, n2_free_hat, "sin")
    rd = a_dot[:, None] * res_diff
    rd_free_hat = np.stack([sess.free.forward(rd[i]) for i in range(ts.size)])
    P4 = sess.free_duhamel_pairings(ts, rd_free_hat, "cos")
    pref = 4.0 * np.pi * a_vals**1.25 / sess.C_pair**2
    b_dot = -pref * (P1 + P2 + P3 - P4)
    b = 1.0 + np.concatenate(
        [[0.0], np.cumsum(0.5 * dt * (b_dot[1:] + b_dot[:-1]))])
    if np.any((b <= A_WINDOW[0]) | (b >= A_WINDOW[1])):
        raise RuntimeError("scale path left the (1/2, 3/2) window")
    return b, b_dot


# ---------------------------------------------------------------------------
# The fixed-point driver
# ---------------------------------------------------------------------------

def _x_distance(grid: RadialGrid, ts: np.ndarray, dv: np.ndarray,
                da_dot: np.ndarray) -> float:
    fld = SpaceTimeField(dv, ts, grid)
    dt = ts[1] - ts[0]
    return float(mixed_norm(fld, (6.0, 2.0), np.inf)
                 + mixed_norm(fld, (np.inf,), 2.0)
                 + mixed_norm(fld, (np.inf,), 1.0)
                 + np.max(np.abs(da_dot))
                 + np.trapezoid(np.abs(da_dot), ts))


def picard_solve(sess: ModulationSession, psi0: np.ndarray, psi1: np.ndarray,
                 F: np.ndarray | None, cfg: FixedPointConfig,
                 orth_tol: float = 1e-6) -> ModulationState:
    """Iterate the modulation map until the X-distance stalls.

    psi0, psi1 are the full initial data (soliton plus perturbation) in
    u-representation; F is the forcing field on the session time grid
    (rows) or None.  Each pass recomputes h.
    """
    grid = sess.grid
    kap = sess.kappa
    ts = np.linspace(0.0, cfg.window_T, cfg.n_times)
    if F is None:
        F = np.zeros((ts.size, grid.n))
    data_scale = max(grid.l2_norm(psi0 - sess.phi_u), grid.l2_norm(psi1), 1e-300)
    orth = kap * np.real(grid.inner(sess.Y, psi0 - sess.phi_u)) \
        + np.real(grid.inner(sess.Y, psi1))
    if abs(orth) > orth_tol * max(data_scale, 1e-12):
        raise ValueError(
            f"data violates the orthogonality condition: {orth:.2e}")

    v = np.zeros((ts.size, grid.n))
    a_vals = np.ones(ts.size)
    a_dot = np.zeros(ts.size)
    h = 0.0
    history = []
    contraction = []
    x_plus = np.zeros(ts.size)
    x_minus = np.zeros(ts.size)
    for it in range(1, cfg.max_iters + 1):
        u_field = v + F
        n2 = sess.n2_field(u_field, a_vals)
        res_diff = sess.res_diff_u(a_vals)
        rd_dot = a_dot[:, None] * res_diff
        # pairing series against Y
        gY = np.array([np.real(grid.inner(sess.Y, n2[i] - kap * rd_dot[i]))
                       for i in range(ts.size)])
        gY_minus = np.array([np.real(grid.inner(sess.Y, n2[i] + kap * rd_dot[i]))
                             for i in range(ts.size)])
        h, h_tail = compute_h(sess, ts, gY)
        psi0_t = psi0 + h * sess.Y
        psi1_t = psi1 + kap * h * sess.Y
        q_t = np.array([np.real(grid.inner(sess.Y, res_diff[i]))
                        for i in range(ts.size)])
        x_minus0 = kap * np.real(grid.inner(sess.Y, psi0_t - sess.phi_u)) \
            - np.real(grid.inner(sess.Y, psi1_t))
        x_plus, x_minus = step_x(sess, ts, gY, gY_minus, q_t, a_dot,
                                 x_minus0, cfg.eps)
        pac_w = step_pacv(sess, ts, psi0_t, psi1_t, n2, res_diff,
                          a_vals, a_dot)
        n2_free_hat = np.stack([sess.free.forward(n2[i])
                                for i in range(ts.size)])
        b, b_dot = step_a(sess, ts, psi0_t, psi1_t, n2_free_hat, res_diff,
                          a_vals, a_dot)
        eig_part = ((x_plus + x_minus) / np.sqrt(2.0 * kap))[:, None] \
            * sess.Y[None, :]
        w_field = eig_part + pac_w
        dist = _x_distance(grid, ts, w_field - v, b_dot - a_dot)
        prev = history[-1] if history else None
        history.append(dist)
        if prev is not None and prev > 0:
            contraction.append(dist / prev)
        v, a_vals, a_dot = w_field, b, b_dot
        if dist < cfg.contraction_tol:
            break
    else:
        raise RuntimeError(
            f"no convergence in {cfg.max_iters} passes; "
            f"last distance {history[-1]:.2e}")
    state = ModulationState(
        SpaceTimeField(v, ts, grid), a_vals, a_dot, x_plus, x_minus, h,
        diagnostics={
            "distances": np.array(history),
            "contraction_ratios": np.array(contraction),
            "h_tail": h_tail,
            "iterations": it,
        })
    return state


def forcing_remainder(sess: ModulationSession, state: ModulationState,
                      F: np.ndarray | None = None) -> np.ndarray:
    """Forcing the band + bound-state + resonance channels cannot carry.

    G_miss(s) = (1 - P_band - P_Y)[ N2(v+F) - d/dt(a' res_diff) ]; the
    pure-resonance acceleration is delivered exactly by the drift term and
    the Y channel by the coefficient ODEs, so this remainder is the whole
    model error of one converged pass.  Its size certifies how much
    spectrum the band calculus dropped.
    """
    ts = state.v.times
    u_field = np.real(state.v.values)
    if F is not None:
        u_field = u_field + np.real(F)
    n2 = sess.n2_field(u_field, state.a)
    rd = state.a_dot[:, None] * sess.res_diff_u(state.a)
    drd = np.gradient(rd, ts, axis=0)
    G = n2 - drd
    out = np.empty_like(G)
    Y = sess.Y
    for i in range(ts.size):
        band = np.real(sess.T.inverse(sess.T.forward(G[i])))
        out[i] = G[i] - band - np.real(sess.grid.inner(Y, G[i])) * Y
    return out


def solve_corrector(sess: ModulationSession, state: ModulationState,
                    G_miss: np.ndarray) -> np.ndarray:
    """Leapfrog solve of w_tt + H w = G_miss with zero data.

    The independent grid oracle carries the sub-band remainder the
    spectral channels drop; the result is added to the reconstruction so
    the full field solves the true equation up to discretization error.

    The growing bound-state component of the DISCRETE operator is
    filtered every step (that direction belongs to the coefficient ODEs,
    and e^{kappa T} would amplify even round-off into O(1) garbage).
    """
    ts = state.v.times
    grid = sess.grid
    h = grid.r[1] - grid.r[0]
    dt = 0.25 * h
    n_steps = int(np.ceil(ts[-1] / dt))
    dt = ts[-1] / n_steps
    kap_h, Y_h = sess.discrete_unstable_mode()
    wY = grid.w * Y_h
    e_up, e_dn = np.exp(kap_h * dt), np.exp(-kap_h * dt)

    def lap(u):
        up = np.concatenate([[-u[0], 0.0], u, [0.0, 0.0]])
        return (-up[:-4] + 16 * up[1:-3] - 30 * up[2:-2] + 16 * up[3:-1]
                - up[4:]) / (12 * h**2)

    # linear-in-time interpolation of the forcing rows, Y_h removed
    G_f = G_miss - (G_miss @ wY)[:, None] * Y_h[None, :]

    def G_at(t):
        x = np.clip(t / (ts[1] - ts[0]), 0, ts.size - 1)
        i = int(np.floor(x))
        if i >= ts.size - 1:
            return G_f[-1]
        w = x - i
        return (1 - w) * G_f[i] + w * G_f[i + 1]

    V = sess.V1
    u_prev = np.zeros(grid.n)
    u_curr = 0.5 * dt**2 * G_at(0.0)
    out = np.empty((ts.size, grid.n))
    out[0] = 0.0
    i_out = 1
    t_now = dt
    for _ in range(n_steps + 1):
        # remove the growing discrete-mode amplitude from the pair
        alpha = float(u_curr @ wY)
        alpha_prev = float(u_prev @ wY)
        A = (alpha * e_up - alpha_prev) / (e_up - e_dn)
        u_curr = u_curr - A * Y_h
        u_prev = u_prev - A * e_dn * Y_h
        accel = lap(u_curr) - V * u_curr + G_at(t_now)
        u_next = 2.0 * u_curr - u_prev + dt**2 * accel
        while i_out < ts.size and ts[i_out] <= t_now + dt / 2:
            w = (ts[i_out] - t_now) / dt + 1.0
            out[i_out] = (1 - w) * u_prev + w * u_curr if w <= 1.0 else \
                u_curr + (w - 1.0) * (u_next - u_curr)
            i_out += 1
        u_prev, u_curr = u_curr, u_next
        t_now += dt
        if i_out >= ts.size:
            break
    return out


def reconstruct_psi(sess: ModulationSession, state: ModulationState,
                    F: np.ndarray | None,
                    corrector: bool = True) -> SpaceTimeField:
    """psi(t) = phi_{a(t)} + v(t) + F(t) (+ sub-band corrector).

    The corrector carries the forcing remainder outside the band calculus
    through the grid oracle; pass corrector=False for the raw spectral
    reconstruction.
    """
    ts = state.v.times
    r = sess.grid.r[None, :]
    a = state.a[:, None]
    phi_a = SQRT_4PI * r * (3.0 * a) ** 0.25 / np.sqrt(1.0 + a * r**2)
    total = phi_a + np.real(state.v.values)
    if F is not None:
        total = total + np.real(F)
    if corrector:
        G_miss = forcing_remainder(sess, state, F)
        w_corr = solve_corrector(sess, state, G_miss)
        state.diagnostics["corrector_max"] = float(np.abs(w_corr).max())
        total = total + w_corr
    return SpaceTimeField(total, ts, sess.grid)


def pde_residual(sess: ModulationSession, psi: SpaceTimeField,
                 t_slice: slice = slice(2, -2),
                 r_slice: slice = slice(4, -4)) -> float:
    """Interior L^2 norm of -psi_tt + psi_rr + 4 pi r^... (u-rep quintic).

    4th-order differences in both t and r; the quintic term converts
    through the half-line weight: with psi = u/(sqrt(4 pi) r) the equation
    reads -u_tt + u_rr + (4 pi)^{-2} u^5 / r^4 = 0.
    """
    from .soliton import laplacian_u

    u = np.real(psi.values)
    ts = psi.times
    dt = ts[1] - ts[0]
    # 4th-order second time derivative on the uniform grid
    utt = np.full_like(u, np.nan)
    utt[2:-2] = (-u[:-4] + 16 * u[1:-3] - 30 * u[2:-2] + 16 * u[3:-1]
                 - u[4:]) / (12 * dt**2)
    urr = np.stack([laplacian_u(u[i], sess.grid, order=4)
                    for i in range(ts.size)])
    r = sess.grid.r[None, :]
    quintic = u**5 / ((4.0 * np.pi) ** 2 * r**4)
    resid = (-utt + urr + quintic)[t_slice, r_slice]
    w_r = sess.grid.w[r_slice]
    sub_t = ts[t_slice]
    val = np.trapezoid(np.nansum(np.abs(resid) ** 2 * w_r[None, :], axis=1),
                       sub_t)
    return float(np.sqrt(val))


def validate_solution(sess: ModulationSession, state: ModulationState,
                      F: np.ndarray | None, theta: float = 0.75) -> dict:
    """Norm report for a converged run."""
    ts = state.v.times
    fld = state.v
    cfg = FlowConfig(ts, float(ts[-1]), theta)
    l8 = mixed_norm(fld, (8.0,), 8.0)
    l62_inf = mixed_norm(fld, (6.0, 2.0), np.inf)
    linf_l2 = mixed_norm(fld, (np.inf,), 2.0)
    interp_bound = l62_inf ** 0.75 * linf_l2 ** 0.25
    psi = reconstruct_psi(sess, state, F)
    return {
        "a_dot_l1": float(np.trapezoid(np.abs(state.a_dot), ts)),
        "a_dot_linf": float(np.max(np.abs(state.a_dot))),
        "v_l8": l8,
        "l8_interpolation_bound": interp_bound,
        "l8_bound_satisfied": bool(l8 <= interp_bound * (1 + 1e-9)),
        "h": state.h,
        "max_x_plus": float(np.max(np.abs(state.x_plus))),
        "pde_residual": pde_residual(sess, psi),
        "contraction_ratios": state.diagnostics.get("contraction_ratios"),
    }
