"""Randomization of initial data in distorted frequency bands.

A data pair (f0, f1) is split into a standard-Fourier low part, the
distorted low block, the band pieces P_k f_hi, and the bound-state
coefficients.  The randomization multiplies each band piece by an
independent standard Gaussian:

    f0^omega = <f0, Y> Y + (P_ac f0_lo + P_0 f0_hi)
               + sum_{k0 <= k <= k_max} g_k P_k f0_hi,

and likewise for f1 with an independent family h_k.  Every non-band term
is orthogonal to Y, so the orthogonality scalar <kappa f0 + f1, Y> is
preserved draw by draw.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dft import DistortedTransform
from .grids import lorentz_norm


@dataclass(frozen=True)
class MsParams:
    """Membership-norm exponents: s > 5/6, s1 > 3 nu > 0, eps > 0."""

    s: float = 0.9
    s1: float = 0.9
    nu: float = 0.25
    eps: float = 0.01

    def __post_init__(self):
        if self.s <= 5.0 / 6.0:
            raise ValueError("s must exceed 5/6")
        if not (self.s1 > 3.0 * self.nu > 0.0):
            raise ValueError("need s1 > 3 nu > 0")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


@dataclass(frozen=True)
class RandomDraw:
    """Seeded Gaussian band coefficients (g for f0, h for f1)."""

    seed: int
    g: np.ndarray
    h: np.ndarray

    @classmethod
    def from_seed(cls, seed: int, n_bands: int) -> "RandomDraw":
        rng = np.random.default_rng(seed)
        return cls(seed, rng.standard_normal(n_bands),
                   rng.standard_normal(n_bands))


@dataclass
class DataPair:
    """Initial-data pair with its distorted-frequency decomposition."""

    f0: np.ndarray
    f1: np.ndarray
    T: DistortedTransform
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self):
        return self.T.grid

    @property
    def ks(self) -> list[int]:
        return list(range(self.T.bumps.k0, self.T.bumps.k_max + 1))

    def eigen_coeffs(self) -> tuple[float, float]:
        y = self.T.dec.eig.Y.values
        return (float(np.real(self.grid.inner(y, self.f0))),
                float(np.real(self.grid.inner(y, self.f1))))

    def lo_hi(self, which: int) -> tuple[np.ndarray, np.ndarray]:
        """Standard-Fourier split f = f_lo + f_hi via psi_0(-Delta)."""
        key = ("lohi", which)
        if key not in self._cache:
            f = (self.f0, self.f1)[which]
            lo = np.real(self.T.free.multiplier(f, self.T.bumps.psi0))
            self._cache[key] = (lo, f - lo)
        return self._cache[key]

    def deterministic_part(self, which: int) -> np.ndarray:
        """<f, Y> Y + (P_ac f_lo + P_0 f_hi)."""
        key = ("det", which)
        if key not in self._cache:
            f = (self.f0, self.f1)[which]
            lo, hi = self.lo_hi(which)
            y = self.T.dec.eig.Y.values
            part = (np.real(self.grid.inner(y, f)) * y
                    + np.real(self.T.dec.p_ac(lo))
                    + np.real(self.T.project_k(hi, 0)))
            self._cache[key] = part
        return self._cache[key]

    def band_pieces(self, which: int) -> np.ndarray:
        """P_k f_hi stacked over k, shape (n_bands, n_r)."""
        key = ("bands", which)
        if key not in self._cache:
            _, hi = self.lo_hi(which)
            self._cache[key] = np.stack(
                [np.real(self.T.project_k(hi, k)) for k in self.ks])
        return self._cache[key]

    def recomposition_defect(self, which: int) -> float:
        f = (self.f0, self.f1)[which]
        rec = self.deterministic_part(which) + self.band_pieces(which).sum(axis=0)
        return self.grid.l2_norm(rec - f) / max(self.grid.l2_norm(f), 1e-300)

    def orthogonality_scalar(self, kappa: float) -> float:
        a0, a1 = self.eigen_coeffs()
        return kappa * a0 + a1


def split_lo_hi(pair: DataPair) -> dict:
    """Materialize the low/high split of both components."""
    lo0, hi0 = pair.lo_hi(0)
    lo1, hi1 = pair.lo_hi(1)
    return {"f0_lo": lo0, "f0_hi": hi0, "f1_lo": lo1, "f1_hi": hi1}


def randomize(pair: DataPair, draw: RandomDraw,
              tail_tol: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Randomized pair (f0^omega, f1^omega) for one draw."""
    bands0 = pair.band_pieces(0)
    bands1 = pair.band_pieces(1)
    if draw.g.size != bands0.shape[0]:
        raise ValueError("draw size does not match the band count")
    for which in (0, 1):
        defect = pair.recomposition_defect(which)
        norm = pair.grid.l2_norm((pair.f0, pair.f1)[which])
        if norm > 0 and defect > tail_tol:
            raise ValueError(
                f"band truncation tail {defect:.2e} of component {which} "
                f"exceeds {tail_tol:g}")
    f0w = pair.deterministic_part(0) + draw.g @ bands0
    f1w = pair.deterministic_part(1) + draw.h @ bands1
    return f0w, f1w


def randomized_high_part(pair: DataPair,
                         draw: RandomDraw) -> tuple[np.ndarray, np.ndarray]:
    """f^omega_{>= k0}: the purely random band superposition."""
    return draw.g @ pair.band_pieces(0), draw.h @ pair.band_pieces(1)


# ---------------------------------------------------------------------------
# Membership norms
# ---------------------------------------------------------------------------

def _weighted_l2(grid, u: np.ndarray, weight_exp: float) -> float:
    wgt = (1.0 + grid.r**2) ** (weight_exp / 2.0)
    return grid.l2_norm(wgt * u)


def norm_hs(pair: DataPair, s: float) -> float:
    """||f||_{H^s} = ||f0||_{dot H^s} + ||f1||_{H^{s-1}} via the free
    transform."""
    free = pair.T.free
    rho = free.freqs.rho
    S0 = free.forward(pair.f0)
    S1 = free.forward(pair.f1)
    n0 = np.sqrt(np.real(free.freqs.integrate(np.abs(rho**s * S0) ** 2)))
    n1 = np.sqrt(np.real(free.freqs.integrate(
        np.abs((1 + rho**2) ** ((s - 1) / 2.0) * S1) ** 2)))
    return float(n0 + n1)


def norm_Xs(pair: DataPair, p: MsParams) -> float:
    """H^s norm plus the <x>^{1-nu}-weighted fractional pieces."""
    free = pair.T.free
    grid = pair.grid
    d0 = np.real(free.multiplier(pair.f0, lambda rho: rho**p.s1))
    d1 = np.real(free.multiplier(
        pair.f1, lambda rho: (1 + rho**2) ** ((p.s1 - 1) / 2.0)))
    return float(norm_hs(pair, p.s)
                 + _weighted_l2(grid, d0, 1.0 - p.nu)
                 + _weighted_l2(grid, d1, 1.0 - p.nu))


def norm_Xs_tilde(pair: DataPair, p: MsParams) -> float:
    """H^s norm plus the Lorentz L^{3/2,1} piece of the low blocks.

    The Lorentz condition applies to P_ac f_lo + P_0 f_hi only (not to f
    itself): first component through |nabla|^s, second through
    <nabla>^{s-1}.
    """
    free = pair.T.free
    grid = pair.grid
    lows = [pair.deterministic_part(0) - pair.eigen_coeffs()[0]
            * pair.T.dec.eig.Y.values,
            pair.deterministic_part(1) - pair.eigen_coeffs()[1]
            * pair.T.dec.eig.Y.values]
    d0 = np.real(free.multiplier(lows[0], lambda rho: rho**p.s))
    d1 = np.real(free.multiplier(
        lows[1], lambda rho: (1 + rho**2) ** ((p.s - 1) / 2.0)))
    lor = lorentz_norm(d0, 1.5, 1.0, grid) + lorentz_norm(d1, 1.5, 1.0, grid)
    return float(norm_hs(pair, p.s) + lor)


def membership_Ms(pair: DataPair, p: MsParams, tail_c: float, tail_C: float,
                  orth_tol: float = 1e-6) -> dict:
    """Membership test for the admissible-data set.

    Requires the orthogonality scalar to vanish, the Lorentz-augmented
    norm below eps, and the weighted norm below sqrt(c eps^2 / log C)
    with (c, C) taken from the acceptance-calibrated tail fit (the paper
    leaves these constants abstract; we flag that they are empirical).
    """
    kappa = pair.T.dec.eig.kappa
    reasons = []
    orth = pair.orthogonality_scalar(kappa)
    scale = max(pair.grid.l2_norm(pair.f0), pair.grid.l2_norm(pair.f1), 1e-300)
    if abs(orth) > orth_tol * scale:
        reasons.append(f"orthogonality scalar {orth:.2e} nonzero")
    xt = norm_Xs_tilde(pair, p)
    if xt >= p.eps:
        reasons.append(f"tilde norm {xt:.3e} >= eps {p.eps:g}")
    if tail_C <= 1.0:
        budget = np.inf  # tail constant C <= 1 puts no constraint
    else:
        budget = np.sqrt(tail_c * p.eps**2 / np.log(tail_C))
    xs = norm_Xs(pair, p)
    if xs >= budget:
        reasons.append(f"weighted norm {xs:.3e} >= budget {budget:.3e}")
    return {"member": not reasons, "reasons": reasons,
            "norm_Xs": xs, "norm_Xs_tilde": xt, "orthogonality": orth,
            "constants_are_empirical": True}
