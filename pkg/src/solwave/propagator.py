"""Linearized flow, representation operators, and probabilistic Z-norm runs.

The linearized evolution

    W(t)(f0, f1) = cos(t sqrt|H|) f0 + sin(t sqrt|H|)/sqrt|H| f1

acts diagonally on the distorted side over the absolutely continuous
subspace (multipliers cos(t rho), sin(t rho)/rho), while the bound-state
coefficients evolve hyperbolically (cosh/sinh of kappa t).  An independent
leapfrog time-stepper cross-validates the spectral flow.

The operators S(t) and C(t) are the dispersive remainders of the half-wave
flows after the rank-one resonance term is subtracted:

    sin(t sqrt H)/sqrt H P_ac = -(4 pi / <V, varphi>^2) (varphi (x) V varphi)
                                 int_0^t sin(s sqrt(-Delta))/sqrt(-Delta) ds
                                 + S(t),

and the cosine analogue; rearranged, S(t) = sin-flow + rank-one term.  The
free flows inside the rank-one pairing run on a sine-transform grid that
extends to essentially zero frequency (the distorted band cutoff must not
truncate them).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dft import DistortedTransform, FreeSineTransform
from .grids import (FrequencyGrid, RadialGrid, SpaceTimeField,
                    make_frequency_grid, mixed_norm)
from .soliton import SolitonParams, resonance

Z_THETA_DEFAULT = 0.75   # weight exponent in the Z norm; any theta > 1/2


@dataclass(frozen=True)
class FlowConfig:
    """Time grid and Z-norm weight for linearized evolutions."""

    times: np.ndarray
    T: float
    theta: float = Z_THETA_DEFAULT

    def __post_init__(self):
        if self.theta <= 0.5:
            raise ValueError("Z-norm weight requires theta > 1/2")
        t = np.asarray(self.times, float)
        if t[0] < 0 or np.any(np.diff(t) <= 0) or t[-1] > self.T + 1e-12:
            raise ValueError("times must increase inside [0, T]")


def default_times(T: float, n: int = 200) -> np.ndarray:
    """Uniform before t = 1, log-spaced after (sup-in-time norms need the
    early-time resolution)."""
    if T <= 1.0:
        return np.linspace(0.0, T, n)
    n_early = max(n // 4, 8)
    early = np.linspace(0.0, 1.0, n_early, endpoint=False)
    late = np.geomspace(1.0, T, n - n_early)
    return np.concatenate([early, late])


def make_flow_config(T: float, n: int = 200,
                     theta: float = Z_THETA_DEFAULT) -> FlowConfig:
    return FlowConfig(default_times(T, n), T, theta)


def _sin_over_rho(t: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """sin(t rho)/rho with the analytic t limit at rho -> 0."""
    return t[:, None] * np.sinc(t[:, None] * rho[None, :] / np.pi)


def evolve_W(f0: np.ndarray, f1: np.ndarray, cfg: FlowConfig,
             T: DistortedTransform, include_eigen: bool = True) -> SpaceTimeField:
    """Linearized flow on the time grid (u-representation rows)."""
    ts = np.asarray(cfg.times, float)
    rho = T.freqs.rho
    g0 = T.forward(f0)
    g1 = T.forward(f1)
    spec = (np.cos(ts[:, None] * rho[None, :]) * g0[None, :]
            + _sin_over_rho(ts, rho) * g1[None, :])
    field = T.c_norm * ((spec * T.freqs.w[None, :]) @ T.jost.e_tilde.T)
    if include_eigen:
        y = T.dec.eig.Y.values
        kap = T.dec.eig.kappa
        a0 = complex(T.grid.inner(y, f0))
        a1 = complex(T.grid.inner(y, f1))
        coef = a0 * np.cosh(kap * ts) + a1 * np.sinh(kap * ts) / kap
        field = field + coef[:, None] * y[None, :]
    return SpaceTimeField(field, ts, T.grid)


def evolve_direct(f0: np.ndarray, f1: np.ndarray, cfg: FlowConfig,
                  V_values: np.ndarray, grid: RadialGrid,
                  dt: float | None = None, sponge_points: int = 5,
                  filter_pair: tuple | None = None,
                  energy_out: list | None = None) -> SpaceTimeField:
    """Leapfrog integration of u_tt = u_rr - V u; the independent oracle.

    4th-order spatial stencil with Dirichlet (odd) closure at the origin
    and a short absorbing sponge at R_max.  dt defaults to 0.25 dr and the
    CFL guard rejects dt > 0.5 dr.

    ``filter_pair`` = (kappa_h, Y_h) removes the growing bound-state
    amplitude of the DISCRETE operator every step: e^{kappa t} reaches
    2e8 by t = 10, so stable-subspace cross-validation against the
    spectral flow is meaningless without it.
    """
    if grid.scheme != "uniform":
        raise ValueError("leapfrog requires a uniform grid")
    h = grid.r[1] - grid.r[0]
    if dt is None:
        dt = 0.25 * h
    if dt > 0.5 * h:
        raise ValueError(f"CFL violation: dt = {dt} exceeds 0.5 dr = {0.5*h}")
    ts = np.asarray(cfg.times, float)
    n = grid.n
    sigma = np.zeros(n)
    if sponge_points > 0:
        ramp = np.linspace(0.0, 1.0, sponge_points)
        sigma[-sponge_points:] = 3.0 * ramp**2
    denom = 1.0 + sigma * dt / 2.0
    numer = 1.0 - sigma * dt / 2.0
    if filter_pair is not None:
        kap_h, y_h = filter_pair
        wY = grid.w * y_h
        e_up, e_dn = np.exp(kap_h * dt), np.exp(-kap_h * dt)

    def lap(u):
        up = np.concatenate([[-u[0], 0.0], u, [0.0, 0.0]])
        return (-up[:-4] + 16 * up[1:-3] - 30 * up[2:-2] + 16 * up[3:-1]
                - up[4:]) / (12 * h**2)

    u_prev = np.array(f0, dtype=float)
    accel0 = lap(u_prev) - V_values * u_prev
    u_curr = u_prev + dt * np.asarray(f1, float) + 0.5 * dt**2 * accel0
    def d_dr(u):
        # odd extension: u(-h) = -u(h), u(0) = 0
        up = np.concatenate([[-u[0], 0.0], u, [0.0, 0.0]])
        return (up[:-4] - 8 * up[1:-3] + 8 * up[3:-1] - up[4:]) / (12 * h)

    out = np.empty((ts.size, n))
    if energy_out is not None:
        energy_out.append(0.5 * float(
            (np.asarray(f1, float) ** 2 + d_dr(u_prev) ** 2
             + V_values * u_prev**2) @ grid.w))
    t_now = dt
    i_out = 0
    while i_out < ts.size and ts[i_out] <= 1e-14:
        out[i_out] = u_prev
        i_out += 1
    n_steps = int(np.ceil((ts[-1] + dt) / dt)) + 1
    for step in range(n_steps):
        if filter_pair is not None:
            alpha = float(u_curr @ wY)
            alpha_prev = float(u_prev @ wY)
            A = (alpha * e_up - alpha_prev) / (e_up - e_dn)
            u_curr = u_curr - A * y_h
            u_prev = u_prev - A * e_dn * y_h
        accel = lap(u_curr) - V_values * u_curr
        u_next = (2.0 * u_curr - numer * u_prev + dt**2 * accel) / denom
        if energy_out is not None and step % 64 == 0:
            # native-step energy with the centered velocity
            dudt = (u_next - u_prev) / (2 * dt)
            energy_out.append(0.5 * float(
                (dudt**2 + d_dr(u_curr) ** 2 + V_values * u_curr**2)
                @ grid.w))
        while i_out < ts.size and ts[i_out] <= t_now + dt / 2:
            # linear interpolation between steps
            w = (ts[i_out] - t_now) / dt + 1.0
            out[i_out] = (1 - w) * u_prev + w * u_curr if w <= 1.0 else \
                u_curr + (w - 1.0) * (u_next - u_curr)
            i_out += 1
        u_prev, u_curr = u_curr, u_next
        t_now += dt
        if i_out >= ts.size:
            break
    return SpaceTimeField(out, ts, grid)


# ---------------------------------------------------------------------------
# Representation operators S(t), C(t)
# ---------------------------------------------------------------------------

@dataclass
class RepOperators:
    """Dispersive parts of the linearized half-wave flows.

    Only defined for the soliton linearization (the rank-one coefficient
    requires the zero resonance of V_a); the constructor guards this.
    """

    T: DistortedTransform
    a: float = 1.0

    def __post_init__(self):
        grid = self.T.grid
        if not (0.5 < self.a < 1.5):
            raise ValueError("representation operators need a in (1/2, 3/2)")
        self.res_u = resonance(SolitonParams(self.a), grid).values
        V = self.T.jost.V_values
        self.V_res = V * self.res_u
        # <V, varphi> as an R^3 pairing: sqrt(4 pi) int V u_res r dr
        self.C_pair = float(np.sqrt(4 * np.pi)
                            * np.sum(grid.w * V * self.res_u * grid.r))
        self.rank_coef = 4.0 * np.pi / self.C_pair**2
        # the transform's free grid already extends to essentially zero
        self.free_full = self.T.free
        self.w_pair = self.free_full.forward(self.V_res)

    def _rank_pairings(self, ts: np.ndarray, u: np.ndarray,
                       kind: str) -> np.ndarray:
        """<V varphi, int_0^t flow(s) u ds> for flow = free sin or cos."""
        rho = self.free_full.freqs.rho
        Su = self.free_full.forward(u)
        if kind == "sin":
            # int_0^t sin(s rho)/rho ds = (1 - cos(t rho))/rho^2
            x = ts[:, None] * rho[None, :]
            mult = 0.5 * ts[:, None] ** 2 * np.sinc(x / (2 * np.pi)) ** 2
        elif kind == "cos":
            mult = _sin_over_rho(ts, rho)
        else:
            raise ValueError(kind)
        integr = mult * (Su * self.w_pair)[None, :]
        return integr @ self.free_full.freqs.w

    def S_field(self, ts: np.ndarray, u: np.ndarray) -> np.ndarray:
        """S(t) u over the time array, (nt, n_r)."""
        ts = np.asarray(ts, float)
        rho = self.T.freqs.rho
        g = self.T.forward(u)
        spec = _sin_over_rho(ts, rho) * g[None, :]
        fld = self.T.c_norm * ((spec * self.T.freqs.w[None, :])
                               @ self.T.jost.e_tilde.T)
        pair = self._rank_pairings(ts, u, "sin")
        return fld + self.rank_coef * pair[:, None] * self.res_u[None, :]

    def C_field(self, ts: np.ndarray, u: np.ndarray) -> np.ndarray:
        """C(t) u over the time array, (nt, n_r)."""
        ts = np.asarray(ts, float)
        rho = self.T.freqs.rho
        g = self.T.forward(u)
        spec = np.cos(ts[:, None] * rho[None, :]) * g[None, :]
        fld = self.T.c_norm * ((spec * self.T.freqs.w[None, :])
                               @ self.T.jost.e_tilde.T)
        pair = self._rank_pairings(ts, u, "cos")
        return fld + self.rank_coef * pair[:, None] * self.res_u[None, :]

    def apply(self, t: float, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(S(t) u, C(t) u) at a single time."""
        ts = np.array([t])
        return self.S_field(ts, u)[0], self.C_field(ts, u)[0]

    def C_on_resonance(self, ts: np.ndarray) -> np.ndarray:
        """Scalar coefficient of C(t) applied to the zero resonance.

        cos(t sqrt H) P_ac res = res exactly (zero-energy mode), so
        C(t) res = [1 + (4 pi / C^2) int_0^t <V res, cos_f(s) res> ds] res.
        The free flow of the 1/r-tailed resonance runs through d'Alembert
        with the closed-form odd extension (a truncated-grid transform of
        a non-decaying profile would ring).
        """
        from .soliton import resonance_profile

        grid = self.T.grid
        wV = grid.w * self.V_res

        def ext(x):
            ax = np.abs(x)
            return np.sign(x) * np.sqrt(4 * np.pi) * ax \
                * resonance_profile(self.a, ax)

        ts = np.asarray(ts, float)
        fine = np.linspace(0.0, ts[-1], max(4 * ts.size, 64))
        p = np.array([0.5 * np.sum(wV * (ext(grid.r + s) + ext(grid.r - s)))
                      for s in fine])
        cum = np.concatenate([[0.0], np.cumsum(
            0.5 * np.diff(fine) * (p[1:] + p[:-1]))])
        P = np.interp(ts, fine, cum)
        return 1.0 + self.rank_coef * P


# ---------------------------------------------------------------------------
# Z norm and probabilistic tails
# ---------------------------------------------------------------------------

def z_norm(fld: SpaceTimeField, cfg: FlowConfig) -> float:
    """Sum of the Strichartz and weighted components of the Z norm."""
    return float(
        mixed_norm(fld, (6.0,), np.inf)
        + mixed_norm(fld, (36.0 / 5.0,), np.inf)
        + mixed_norm(fld, (36.0 / 5.0,), 6.0)
        + mixed_norm(fld, (9.0, 2.0), 3.0)
        + mixed_norm(fld, (2.0,), 1.0, weight_theta=cfg.theta)
        + mixed_norm(fld, (2.0,), 2.0, weight_theta=cfg.theta))


def z_norm_components(fld: SpaceTimeField, cfg: FlowConfig) -> dict:
    return {
        "L6x_Linf_t": mixed_norm(fld, (6.0,), np.inf),
        "L36o5x_Linf_t": mixed_norm(fld, (36.0 / 5.0,), np.inf),
        "L36o5x_L6t": mixed_norm(fld, (36.0 / 5.0,), 6.0),
        "L92x_L3t": mixed_norm(fld, (9.0, 2.0), 3.0),
        "weighted_L2x_L1t": mixed_norm(fld, (2.0,), 1.0,
                                       weight_theta=cfg.theta),
        "weighted_L2x_L2t": mixed_norm(fld, (2.0,), 2.0,
                                       weight_theta=cfg.theta),
    }


@dataclass(frozen=True)
class TailFit:
    """Gaussian-tail fit of Monte-Carlo Z-norm exceedance probabilities."""

    lambdas: np.ndarray
    empirical_tail: np.ndarray
    c_fit: float
    C_fit: float
    r_squared: float
    x_s_norm: float = 1.0
    norms: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if np.any(np.diff(self.empirical_tail) > 1e-12):
            raise ValueError("empirical tail must be non-increasing")


def band_flow_fields(f0_hi: np.ndarray, f1_hi: np.ndarray, cfg: FlowConfig,
                     T: DistortedTransform) -> tuple[np.ndarray, np.ndarray, list]:
    """Per-band linearized flows W(t) P_k of the two data components.

    Returns (A, B, ks): A[k] is the cosine flow of P_k f0_hi and B[k] the
    sine flow of P_k f1_hi, each (nt, n_r); the randomized field for a
    draw (g, h) is sum_k g_k A_k + h_k B_k.
    """
    ks = list(range(T.bumps.k0, T.bumps.k_max + 1))
    A = np.empty((len(ks), cfg.times.size, T.grid.n), dtype=complex)
    B = np.empty_like(A)
    for i, k in enumerate(ks):
        p0 = T.project_k(f0_hi, k)
        p1 = T.project_k(f1_hi, k)
        A[i] = evolve_W(p0, np.zeros_like(p0), cfg, T, include_eigen=False).values
        B[i] = evolve_W(np.zeros_like(p1), p1, cfg, T, include_eigen=False).values
    return A, B, ks


def tail_experiment(f0_hi: np.ndarray, f1_hi: np.ndarray, x_s_norm: float,
                    n_draws: int, cfg: FlowConfig, T: DistortedTransform,
                    seed: int = 0, single_mode: int | None = None,
                    chunk: int = 64) -> TailFit:
    """Monte-Carlo exceedance tail of ||W(t) f^omega_{>= k0}||_Z.

    Draws iid standard normals per band, evolves by superposition of the
    precomputed band flows, and fits log P(norm > lam) against
    -lam^2 / ||f||_{X_s}^2.  ``single_mode`` keeps a single band (the
    one-term sum is exactly Gaussian, the sanity case).
    """
    if n_draws < 200:
        raise ValueError("tail experiment needs at least 200 draws")
    A, B, ks = band_flow_fields(f0_hi, f1_hi, cfg, T)
    if single_mode is not None:
        keep = ks.index(single_mode)
        A = A[keep: keep + 1]
        B = B[keep: keep + 1]
        ks = [single_mode]
    rng = np.random.default_rng(seed)
    nk = len(ks)
    norms = np.empty(n_draws)
    nt, nr = cfg.times.size, T.grid.n
    for lo in range(0, n_draws, chunk):
        hi = min(lo + chunk, n_draws)
        g = rng.standard_normal((hi - lo, nk))
        h = rng.standard_normal((hi - lo, nk))
        fields = (np.tensordot(g, A, axes=(1, 0))
                  + np.tensordot(h, B, axes=(1, 0)))
        for i in range(hi - lo):
            fld = SpaceTimeField(fields[i], cfg.times, T.grid)
            norms[lo + i] = z_norm(fld, cfg)
    lam_lo = np.quantile(norms, 0.30)
    lam_hi = np.quantile(norms, 1.0 - 10.0 / n_draws)
    lams = np.linspace(lam_lo, lam_hi, 25)
    tail = np.array([np.mean(norms > lam) for lam in lams])
    keep = tail > 0
    x = lams[keep] ** 2 / x_s_norm**2
    y = np.log(tail[keep])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return TailFit(lams[keep], tail[keep], c_fit=float(-slope),
                   C_fit=float(np.exp(intercept)),
                   r_squared=1.0 - ss_res / ss_tot, x_s_norm=x_s_norm,
                   norms=norms)


def moment_route(norms: np.ndarray, p_values=(8, 16, 32)) -> dict:
    """||X||_{L^p_omega} / sqrt(p) for the recorded norm samples."""
    out = {}
    for p in p_values:
        out[p] = float(np.mean(norms**p) ** (1.0 / p) / np.sqrt(p))
    return out
