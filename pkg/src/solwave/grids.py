"""Radial and frequency grids, quadrature, and norm evaluation.

All spatial objects live on a half-line grid r in (0, R_max].  A radial
function f on R^3 is stored through its half-line reduction

    u(r) = sqrt(4 pi) * r * f(r),

so that ||f||_{L^2(R^3)} = ||u||_{L^2(0, infty)} and -Delta + V acts as
-d^2/dr^2 + V with a Dirichlet condition at r = 0.

Grid nodes are strictly positive; quadrature weights integrate over the
full interval [0, R_max] (the value at r = 0 is closed by polynomial
extrapolation folded into the first few weights, exact for cubics).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FOUR_PI = 4.0 * np.pi
SQRT_4PI = np.sqrt(4.0 * np.pi)


@dataclass(frozen=True)
class RadialGrid:
    """Discretization of (0, R_max] with positive quadrature weights."""

    r: np.ndarray
    w: np.ndarray
    R_max: float
    refinement_level: int = 0
    scheme: str = "uniform"

    def __post_init__(self):
        r, w = np.asarray(self.r, float), np.asarray(self.w, float)
        if r.ndim != 1 or r.size < 2:
            raise ValueError("grid needs at least two nodes")
        if not np.all(np.diff(r) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        if r[0] <= 0:
            raise ValueError("grid nodes must be strictly positive")
        # the [0, h] extrapolation closure makes up to the first 4 weights
        # signed; beyond the closure stencil weights must be positive
        if not np.all(w[4:] > 0) or w[:4].sum() <= 0:
            raise ValueError("quadrature weights must be positive")
        if abs(w.sum() - self.R_max) > 1e-10 * self.R_max:
            raise ValueError("weights do not integrate constants to R_max")

    @property
    def n(self) -> int:
        return self.r.size

    def cell_volumes(self) -> np.ndarray:
        """Positive R^3 volume elements from midpoint cell boundaries.

        Used by rearrangement-based (Lorentz) norms, where the distribution
        function must be a genuine measure; sums to (4 pi / 3) R_max^3.
        """
        b = np.concatenate([[0.0], 0.5 * (self.r[1:] + self.r[:-1]), [self.R_max]])
        return (FOUR_PI / 3.0) * np.diff(b**3)

    def integrate(self, values: np.ndarray) -> complex | float:
        """Quadrature of samples over [0, R_max] (axis -1 for stacked fields)."""
        return np.asarray(values) @ self.w

    def l2_norm(self, u: np.ndarray) -> float:
        """L^2(R^3) norm of a state given in u-representation."""
        return float(np.sqrt(np.real(self.integrate(np.abs(u) ** 2))))

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """L^2(R^3) pairing <u, v> = int conj(u) v dr of u-representations."""
        return complex(self.integrate(np.conj(u) * v))

    def refine(self) -> "RadialGrid":
        """Grid with doubled resolution (same R_max and scheme)."""
        if self.scheme == "uniform":
            return make_grid(self.R_max, 2 * self.n, "uniform",
                             refinement_level=self.refinement_level + 1)
        return make_grid(self.R_max, 2 * self.n, "graded",
                         refinement_level=self.refinement_level + 1)


@dataclass(frozen=True)
class FrequencyGrid:
    """Radial frequency grid rho in [rho_min, rho_max], rho_min > 0.

    The low-frequency cutoff is explicit: the Jost table below rho_min is
    not resolvable at finite R_max (the Volterra tail correction grows
    like 1/rho), so every distorted-side operation is band limited to
    [rho_min, rho_max].
    """

    rho: np.ndarray
    w: np.ndarray
    rho_min: float
    rho_max: float

    def __post_init__(self):
        rho = np.asarray(self.rho, float)
        if not np.all(np.diff(rho) > 0):
            raise ValueError("frequency nodes must be strictly increasing")
        if self.rho_min <= 0:
            raise ValueError("rho_min must be positive")

    @property
    def n(self) -> int:
        return self.rho.size

    def integrate(self, values: np.ndarray) -> complex | float:
        return np.asarray(values) @ self.w

    def refine(self) -> "FrequencyGrid":
        return make_frequency_grid(self.rho_min, self.rho_max, 2 * self.n)


@dataclass(frozen=True)
class RadialFunction:
    """Samples aligned with a RadialGrid.

    For states this is the half-line representation u(r) = sqrt(4 pi) r f(r);
    ``profile`` recovers the R^3 pointwise values f(r).  Potential profiles
    store plain pointwise samples V(r) instead (they are multiplication
    symbols, not states).
    """

    values: np.ndarray
    grid: RadialGrid
    is_real: bool = False

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.n,):
            raise ValueError("values must align with the grid")
        if self.is_real and np.iscomplexobj(v) and np.any(v.imag != 0):
            raise ValueError("is_real set but imaginary parts are nonzero")

    def profile(self) -> np.ndarray:
        """Pointwise R^3 values f(r) = u(r) / (sqrt(4 pi) r)."""
        return self.values / (SQRT_4PI * self.grid.r)

    def norm_l2(self) -> float:
        return self.grid.l2_norm(self.values)


@dataclass(frozen=True)
class SpaceTimeField:
    """Values indexed (time, radius) in u-representation."""

    values: np.ndarray
    times: np.ndarray
    grid: RadialGrid

    def __post_init__(self):
        v = np.asarray(self.values)
        t = np.asarray(self.times, float)
        if v.shape != (t.size, self.grid.n):
            raise ValueError("field shape inconsistent with time and radial grids")
        if t[0] < 0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be increasing and start at t >= 0")


def _closure_weights(h: float) -> np.ndarray:
    # int_0^h p(r) dr for the cubic p through (h,2h,3h,4h); exact for cubics,
    # closes the [0, h] panel without a node at the origin.
    # Lagrange-integrated coefficients for nodes {1,2,3,4}*h on [0, h]:
    return h * np.array([55.0, -59.0, 37.0, -9.0]) / 24.0


def make_grid(R_max: float, n: int, scheme: str = "uniform",
              refinement_level: int = 0) -> RadialGrid:
    """Build a radial grid with composite quadrature weights.

    Parameters
    ----------
    R_max : float
        Domain truncation radius.
    n : int
        Number of (strictly positive) nodes, n >= 16.
    scheme : {"uniform", "graded"}
        ``uniform``: equispaced nodes i*h with composite Simpson weights on
        [h, R_max] plus an extrapolated closure of [0, h].
        ``graded``: panelwise Gauss-Legendre with panel edges clustered
        near r = 0 by a power law.
    """
    if R_max <= 0:
        raise ValueError("R_max must be positive")
    if n < 16:
        raise ValueError("n must be at least 16")
    if scheme == "uniform":
        h = R_max / n
        r = h * np.arange(1, n + 1)
        w = np.zeros(n)
        # composite Simpson over [h, R_max] (n-1 intervals)
        m = n - 1
        simp = np.zeros(n)
        if m % 2 == 0:
            simp[0] = simp[-1] = 1.0
            simp[1:-1:2] = 4.0
            simp[2:-1:2] = 2.0
            w += simp * h / 3.0
        else:
            # even interval count fails; Simpson on the first m-3 intervals,
            # Simpson 3/8 on the last three
            k = m - 3
            simp[0] = simp[k] = 1.0
            simp[1:k:2] = 4.0
            simp[2:k:2] = 2.0
            w += simp * h / 3.0
            w[k:] += np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 * h / 8.0
        w[:4] += _closure_weights(h)
        return RadialGrid(r, w, R_max, refinement_level, "uniform")
    if scheme == "graded":
        # panels of 6-point Gauss-Legendre; edges ~ R_max*(j/M)^2 cluster at 0
        p = 6
        M = max(n // p, 3)
        edges = R_max * (np.arange(M + 1) / M) ** 2.0
        x, gw = np.polynomial.legendre.leggauss(p)
        r = np.concatenate([(0.5 * (b - a)) * x + 0.5 * (a + b)
                            for a, b in zip(edges[:-1], edges[1:])])
        w = np.concatenate([(0.5 * (b - a)) * gw
                            for a, b in zip(edges[:-1], edges[1:])])
        return RadialGrid(r, w, R_max, refinement_level, "graded")
    raise ValueError(f"unknown scheme {scheme!r}")


def make_frequency_grid(rho_min: float, rho_max: float, n: int) -> FrequencyGrid:
    """Uniform frequency grid with trapezoid weights.

    Spectral-side integrands are smooth and vanish at the band edges for
    admissible data, and they oscillate like e^{i (t +- r) rho}; the
    trapezoid rule preserves the translation structure and is spectrally
    accurate there, while panel rules (Simpson) leave an O((t+r)^4 h^4)
    phase error that grows along the flow.
    """
    if rho_min <= 0:
        raise ValueError("rho_min must be positive")
    if rho_max <= rho_min:
        raise ValueError("rho_max must exceed rho_min")
    rho = np.linspace(rho_min, rho_max, n)
    h = rho[1] - rho[0]
    w = np.full(n, h)
    w[0] = w[-1] = h / 2.0
    return FrequencyGrid(rho, w, rho_min, rho_max)


# ---------------------------------------------------------------------------
# Lorentz quasi-norms
# ---------------------------------------------------------------------------

def lorentz_norm(f: RadialFunction | np.ndarray, p: float, q: float,
                 grid: RadialGrid | None = None) -> float:
    """L^{p,q}(R^3) quasi-norm of a radial function.

    The input is a state in u-representation (the r-weight is undone
    internally).  The distribution function mu(lam) = |{|f| > lam}| of the
    sampled function (with midpoint cell volumes) is piecewise constant in
    lam, so the lambda integral

        ( p int_0^infty (lam mu(lam)^{1/p})^q dlam/lam )^{1/q}

    is summed segment by segment in closed form: exact for the grid
    function, with no lambda-quadrature error.  q = inf gives weak-L^p.
    """
    if p <= 1:
        raise ValueError("lorentz_norm requires p > 1")
    if q <= 0:
        raise ValueError("lorentz_norm requires q > 0")
    if isinstance(f, RadialFunction):
        grid = f.grid
        vals = f.values
    else:
        if grid is None:
            raise ValueError("grid required for raw arrays")
        vals = np.asarray(f)
    abs_f = np.abs(vals) / (SQRT_4PI * grid.r)
    if abs_f.max() == 0.0:
        return 0.0
    vol_w = grid.cell_volumes()
    order = np.argsort(abs_f)[::-1]
    v = abs_f[order]
    pos = v > 0
    v = v[pos]
    # mu on the segment (v[j], v[j-1]) equals the volume of samples >= v[j]
    mu = np.cumsum(vol_w[order][pos])
    if np.isinf(q):
        return float(np.max(v * mu ** (1.0 / p)))
    upper = v**q
    lower = np.concatenate([v[1:] ** q, [0.0]])
    total = (p / q) * np.sum(mu ** (q / p) * (upper - lower))
    return float(total ** (1.0 / q))


def lp_norm(f: RadialFunction | np.ndarray, p: float,
            grid: RadialGrid | None = None) -> float:
    """Direct L^p(R^3) quadrature norm of a state in u-representation."""
    if isinstance(f, RadialFunction):
        grid = f.grid
        vals = f.values
    else:
        vals = np.asarray(f)
    abs_f = np.abs(vals) / (SQRT_4PI * grid.r)
    if np.isinf(p):
        return float(abs_f.max())
    return float((FOUR_PI * np.sum(grid.w * grid.r**2 * abs_f**p)) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Mixed space-time norms
# ---------------------------------------------------------------------------

def _temporal_norm(vals: np.ndarray, times: np.ndarray, r_exp: float,
                   axis: int = 0) -> np.ndarray:
    a = np.abs(vals)
    if np.isinf(r_exp):
        return a.max(axis=axis)
    return np.trapezoid(a**r_exp, times, axis=axis) ** (1.0 / r_exp)


def mixed_norm(F: SpaceTimeField, spatial: tuple, temporal: float,
               order: str = "x-then-t", weight_theta: float | None = None) -> float:
    """Mixed norm of a space-time field.

    Parameters
    ----------
    spatial : tuple
        Either (p,) for L^p_x or (p, q) for the Lorentz space L^{p,q}_x.
    temporal : float
        Exponent of the time norm (np.inf for sup).
    order : {"x-then-t", "t-then-x"}
        "x-then-t" is L^{p,q}_x L^r_t (inner norm in time); "t-then-x" is
        L^r_t L^p_x (inner norm in space).
    weight_theta : float, optional
        When given, the field is multiplied pointwise by <x>^{-1-theta}
        before any norm is taken.
    """
    vals = F.values
    if weight_theta is not None:
        wgt = (1.0 + F.grid.r**2) ** (-(1.0 + weight_theta) / 2.0)
        vals = vals * wgt[None, :]
    if len(spatial) == 1:
        p, q = spatial[0], spatial[0]
    else:
        p, q = spatial
    if order == "x-then-t":
        g = _temporal_norm(vals, F.times, temporal, axis=0)
        if q == p:
            return lp_norm(g, p, F.grid)
        return lorentz_norm(g, p, q, F.grid)
    if order == "t-then-x":
        if q == p:
            gr = np.array([lp_norm(vals[i], p, F.grid)
                           for i in range(F.times.size)])
        else:
            gr = np.array([lorentz_norm(vals[i], p, q, F.grid)
                           for i in range(F.times.size)])
        if np.isinf(temporal):
            return float(gr.max())
        return float(np.trapezoid(gr**temporal, F.times) ** (1.0 / temporal))
    raise ValueError(f"unknown order {order!r}")
