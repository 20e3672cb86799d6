"""Shared session fixtures: the default transform bundle is expensive
(Volterra table + eigensolve), so it is built once and reused."""

import numpy as np
import pytest

from solwave.dft import build_transform
from solwave.grids import make_frequency_grid, make_grid
from solwave.soliton import SolitonParams, potential


@pytest.fixture(scope="session")
def grid40():
    return make_grid(40.0, 2001, "uniform")


@pytest.fixture(scope="session")
def freqs():
    return make_frequency_grid(0.5, 12.0, 576)


@pytest.fixture(scope="session")
def V1(grid40):
    return potential(SolitonParams(1.0), grid40)


@pytest.fixture(scope="session")
def T(V1, grid40, freqs):
    return build_transform(V1, grid40, freqs, k0=2)


@pytest.fixture(scope="session")
def T_free(grid40, freqs, T):
    """Distorted transform built on a vanishing potential (free control)."""
    from solwave.dft import C_NORM, DistortedTransform
    from solwave.grids import RadialFunction
    from solwave.jost import solve_m
    from solwave.soliton import PotentialProfile

    Vz = PotentialProfile(
        RadialFunction(np.full(grid40.n, -1e-300), grid40, is_real=True),
        1.0, 0.0)
    table = solve_m(Vz, grid40, freqs)
    return DistortedTransform(table, T.dec, T.bumps, T.free, C_NORM, 0.0)


@pytest.fixture(scope="session")
def data_pair(T):
    """Band-compliant data pair (spectrally inside the computable band
    with edge margins; low-frequency pieces supported away from the
    potential core where the zero resonance mixes bands)."""
    from solwave.randomize import DataPair

    r = T.grid.r
    f0 = (0.3 * np.sin(4.2 * r) * np.exp(-((r - 10) ** 2) / 6)
          + 0.06 * np.sin(1.5 * r) * np.exp(-((r - 18) ** 2) / 18))
    f1 = (0.2 * np.sin(4.0 * r) * np.exp(-((r - 12) ** 2) / 6)
          + 0.08 * np.sin(1.5 * r) * np.exp(-((r - 18) ** 2) / 18))
    return DataPair(f0, f1, T)
