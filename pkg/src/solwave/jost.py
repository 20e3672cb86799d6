"""Jost functions, scattering coefficient, and generalized eigenfunctions.

The slowly varying Jost factor m(r, rho) = e^{-i r rho} f(r, rho) solves
the Volterra equation

    m(r, rho) = 1 + int_r^infty [ (e^{2 i rho (r'-r)} - 1) / (2 i rho) ]
                              V(r') m(r', rho) dr',

integrated inward from R_max.  The truncated tail int_{R_max}^infty is
applied in closed form from the r^{-4} model of the potential (sine/cosine
integral recursion), and the remaining finite-interval equation is solved
by global fixed-point iteration with cumulative Simpson quadrature, all
rho columns at once.

From the table: c_plus(rho) = (1/2i) conj(f(0,rho))/f(0,rho) and the
regular (Dirichlet) continuum eigenfunction

    e_tilde(r, rho) = c_plus(rho) f(r, rho) - (1/2i) conj(f(r, rho)),

which reduces to sin(r rho) when V = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import sici

from .grids import FrequencyGrid, RadialGrid
from .soliton import PotentialProfile

TAIL_TOL = 1e-4  # largest admissible |m(R_max) - 1|; beyond it R_max is too small


class VolterraError(RuntimeError):
    pass


class JostTailError(RuntimeError):
    pass


@dataclass(frozen=True)
class JostTable:
    """Jost data m(r_i, rho_j), c_plus(rho_j), and e_tilde(r_i, rho_j)."""

    grid: RadialGrid
    freqs: FrequencyGrid
    V_values: np.ndarray   # potential samples the table was built from
    m: np.ndarray          # (n_r, n_rho) complex
    m0: np.ndarray         # m(0, rho) by cubic extrapolation; equals f(0, rho)
    c_plus: np.ndarray     # (n_rho,)
    e_tilde: np.ndarray    # (n_r, n_rho)
    tail_correction: np.ndarray   # |m(R_max, rho) - 1|
    iterations: int
    contraction_factor: float     # measured late-stage ratio of changes
    _deriv_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def f0(self) -> np.ndarray:
        return self.m0

    def dr_m(self) -> np.ndarray:
        """4th-order centered d m / d r (edge columns one-sided, excluded
        from bound checks)."""
        if "dr" not in self._deriv_cache:
            self._deriv_cache["dr"] = np.gradient(
                self.m, self.grid.r, axis=0, edge_order=2)
            h = self.grid.r[1] - self.grid.r[0]
            m = self.m
            out = self._deriv_cache["dr"]
            out[2:-2] = (m[:-4] - 8 * m[1:-3] + 8 * m[3:-1] - m[4:]) / (12 * h)
        return self._deriv_cache["dr"]

    def drho_m(self, order: int = 1) -> np.ndarray:
        """Centered 4th-order d^order m / d rho^order, order = 1 or 2."""
        key = f"drho{order}"
        if key not in self._deriv_cache:
            h = self.freqs.rho[1] - self.freqs.rho[0]
            m = self.m
            out = np.full_like(m, np.nan)
            if order == 1:
                out[:, 2:-2] = (m[:, :-4] - 8 * m[:, 1:-3]
                                + 8 * m[:, 3:-1] - m[:, 4:]) / (12 * h)
            elif order == 2:
                out[:, 2:-2] = (-m[:, :-4] + 16 * m[:, 1:-3] - 30 * m[:, 2:-2]
                                + 16 * m[:, 3:-1] - m[:, 4:]) / (12 * h**2)
            else:
                raise ValueError("order must be 1 or 2")
            self._deriv_cache[key] = out
        return self._deriv_cache[key]


def _tail_moments(beta: np.ndarray, R: float) -> np.ndarray:
    """I_4(beta, R) = int_R^infty e^{i beta (r - R)} r^{-4} dr, exactly.

    Downward recursion I_n = R^{-(n-1)}/(n-1) + (i beta / (n-1)) I_{n-1}
    with I_1 = e^{-i beta R} [ -Ci(beta R) + i (pi/2 - Si(beta R)) ].
    """
    si, ci = sici(beta * R)
    I = np.exp(-1j * beta * R) * (-ci + 1j * (np.pi / 2 - si))
    for n in (2, 3, 4):
        I = R ** (-(n - 1)) / (n - 1) + 1j * beta * I / (n - 1)
    return I


def _cumulative_parabolic(y: np.ndarray, dx: float) -> np.ndarray:
    """Complex-safe cumulative integral along axis 0, uniform spacing.

    Each interval [x_i, x_{i+1}] is integrated from the parabola through
    its three nearest nodes (the cumulative-Simpson rule):
        first interval:  h (5 y_0 + 8 y_1 - y_2) / 12
        interval i >= 1: h (-y_{i-1} + 8 y_i + 5 y_{i+1}) / 12
    """
    inc = np.empty_like(y[:-1])
    inc[0] = dx * (5.0 * y[0] + 8.0 * y[1] - y[2]) / 12.0
    inc[1:] = dx * (-y[:-2] + 8.0 * y[1:-1] + 5.0 * y[2:]) / 12.0
    out = np.empty_like(y)
    out[0] = 0.0
    np.cumsum(inc, axis=0, out=out[1:])
    return out


def _reverse_cumulative(y: np.ndarray, dx: float) -> np.ndarray:
    """int_{r_i}^{R_max} y dr' along axis 0 for a uniform grid."""
    return _cumulative_parabolic(y[::-1], dx)[::-1]


def solve_m(V: PotentialProfile, grid: RadialGrid, freqs: FrequencyGrid,
            tol: float = 1e-12, max_iters: int = 200) -> JostTable:
    """Solve the Volterra equation for m on the (r, rho) grid.

    All rho columns are iterated simultaneously; convergence is declared
    when the sup change drops below ``tol``.  Raises VolterraError if any
    column fails to converge and JostTailError when the analytic tail
    correction exceeds TAIL_TOL (R_max too small for the requested rho).
    """
    if grid.scheme != "uniform":
        raise ValueError("solve_m requires a uniform radial grid")
    r = grid.r
    rho = freqs.rho
    h = r[1] - r[0]
    Vv = np.real(V.V.values)
    R = grid.R_max

    two_i_rho = 2j * rho[None, :]
    c4 = Vv[-1] * R**4  # fitted tail coefficient, V ~ c4 / r^4
    A = c4 * _tail_moments(2.0 * rho, R)          # int_R^inf e^{2i rho (r'-R)} V
    B = c4 / (3.0 * R**3)                         # int_R^inf V
    # T(r) = [ e^{2 i rho (R - r)} A - B ] / (2 i rho), the analytic tail
    T = (np.exp(two_i_rho * (R - r[:, None])) * A[None, :] - B) / two_i_rho
    tail_corr = np.abs(T[-1])
    if np.any(tail_corr > TAIL_TOL):
        bad = rho[tail_corr > TAIL_TOL]
        raise JostTailError(
            f"tail correction exceeds {TAIL_TOL:g} for rho in "
            f"[{bad.min():.3f}, {bad.max():.3f}]; increase R_max or rho_min")

    phase = np.exp(two_i_rho * r[:, None])        # e^{2 i rho r}
    m = 1.0 + T
    prev_change = np.inf
    contraction = 0.0
    for it in range(1, max_iters + 1):
        g = Vv[:, None] * m
        P = _reverse_cumulative(phase * g, h)
        Q = _reverse_cumulative(g, h)
        m_new = 1.0 + T + (P / phase - Q) / two_i_rho
        change = np.max(np.abs(m_new - m))
        m = m_new
        if change < tol:
            break
        if np.isfinite(prev_change) and prev_change > 0:
            contraction = change / prev_change
        prev_change = change
    else:
        worst = int(np.argmax(np.abs(m_new - m).max(axis=0)))
        raise VolterraError(
            f"Volterra iteration did not converge (rho ~ {rho[worst]:.3f})")

    m0 = 4 * m[0] - 6 * m[1] + 4 * m[2] - m[3]    # cubic extrapolation to r=0
    c_plus = np.conj(m0) / (2j * m0)
    e_phase = np.exp(1j * rho[None, :] * r[:, None])
    f = e_phase * m
    e_tilde = c_plus[None, :] * f - np.conj(f) / 2j
    return JostTable(grid, freqs, Vv, m, m0, c_plus, e_tilde, tail_corr, it,
                     float(contraction))


def c_plus_report(table: JostTable) -> dict:
    """Scattering coefficient diagnostics and the two-sided |f(0)| fit.

    C is the smallest constant with rho (1+rho)^{-1} / C < |f(0, rho)| < C
    over the table's frequency range; |c_plus| = 1/2 identically.
    """
    rho = table.freqs.rho
    absf0 = np.abs(table.f0)
    if np.any(absf0 <= 0):
        raise VolterraError("f(0, rho) vanished on the grid")
    C_upper = float(absf0.max())
    C_lower = float(np.max(rho / (1 + rho) / absf0))
    flagged = rho[absf0 < 1e-3]
    return {
        "abs_c_plus_max_defect": float(np.max(np.abs(np.abs(table.c_plus) - 0.5))),
        "C_fit": max(C_upper, C_lower),
        "abs_f0_min": float(absf0.min()),
        "resonance_adjacent_rho": flagged,
    }


def gronwall_ceiling(V: PotentialProfile) -> float:
    """exp( int_0^infty r |V| dr ), the a priori bound on sup |f| = sup |m|."""
    grid = V.V.grid
    Vv = np.abs(np.real(V.V.values))
    body = float(np.sum(grid.w * grid.r * Vv))
    c4 = abs(np.real(V.V.values[-1])) * grid.R_max**4
    tail = c4 / (2.0 * grid.R_max**2)  # int_R^inf r * c4/r^4
    return float(np.exp(body + tail))


def check_m_bounds(table: JostTable, rho_star: float = 0.5,
                   r_edge: int = 4, rho_edge: int = 4) -> dict:
    """Fitted constants of the large-rho symbol bounds of the Jost factor.

    Normalized sups over rho >= rho_star (grid interiors):
        |m - 1| rho <r>^3,   |d_r m| rho <r>^4,
        |d_rho m| rho <r>^3, |d^2_rho m| rho <r>^2.
    Each constant should be finite and stable under simultaneous grid
    refinement; monotone non-increasing as rho_star grows.
    """
    r = table.grid.r[:, None]
    rho = table.freqs.rho[None, :]
    sel = np.zeros_like(table.m, dtype=bool)
    sel[r_edge:-r_edge, rho_edge:-rho_edge] = True
    sel &= rho >= rho_star
    br = (1 + r**2) ** 0.5

    def _sup(arr, weight):
        vals = np.abs(arr) * weight
        return float(np.nanmax(np.where(sel, vals, np.nan)))

    return {
        "m_minus_1": _sup(table.m - 1.0, rho * br**3),
        "dr_m": _sup(table.dr_m(), rho * br**4),
        "drho_m": _sup(table.drho_m(1), rho * br**3),
        "drho2_m": _sup(table.drho_m(2), rho * br**2),
    }


def ode_residual(table: JostTable, indices_r: np.ndarray,
                 indices_rho: np.ndarray) -> np.ndarray:
    """(-d_r^2 + V - rho^2) e_tilde at selected interior grid points.

    Uses a 6th-order stencil in r; returns the residuals normalized by
    rho^2 (the natural scale of each term).
    """
    h = table.grid.r[1] - table.grid.r[0]
    c = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
    out = np.empty(len(indices_r), dtype=float)
    for k, (i, j) in enumerate(zip(indices_r, indices_rho)):
        if i < 3 or i > table.grid.n - 4:
            raise ValueError("residual indices must be interior (3 .. n-4)")
        e = table.e_tilde[i - 3: i + 4, j]
        d2 = np.dot(c, e) / h**2
        rho = table.freqs.rho[j]
        resid = -d2 + (table.V_values[i] - rho**2) * table.e_tilde[i, j]
        out[k] = np.abs(resid) / rho**2
    return out
