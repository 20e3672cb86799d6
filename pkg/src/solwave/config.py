"""Run configuration: one flat key-value file holds every calibration.

The underlying theory fixes no numerical constants; every gap (domain
truncation, grid sizes, band cutoffs, thresholds, tolerances) is a
calibration decision and lives here so a run is auditable from a single
file.  Values are validated before any work starts.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # radial grid
    R_max: float = 40.0
    n_r: int = 2001
    grid_scheme: str = "uniform"
    # frequency band
    rho_min: float = 0.5
    rho_max: float = 12.0
    n_rho: int = 576
    k0: int = 2
    rho_star: float = 0.5          # large-rho threshold for symbol bounds
    eps_low: float = 0.25          # psi_0 spectral margin below zero (< kappa^2)
    # membership norms
    s: float = 0.9
    s1: float = 0.9
    nu: float = 0.25
    ms_eps: float = 0.01
    # flow / Z norm
    flow_T: float = 40.0
    n_times: int = 200
    theta: float = 0.75
    # tails experiment
    tails_n_r: int = 501
    tails_R_max: float = 30.0
    tails_rho_max: float = 9.0
    tails_T: float = 30.0
    tails_draws: int = 1000
    # modulation
    mod_R_max: float = 64.0
    mod_n_r: int = 2561
    mod_rho_min: float = 0.12
    mod_rho_max: float = 8.0
    mod_T: float = 16.0
    mod_n_times: int = 161
    fp_eps: float = 0.01
    fp_max_iters: int = 25
    fp_contraction_tol: float = 1e-9
    # randomness
    seed: int = 2026
    # outputs
    out_dir: str = "solwave_out"
    figures: bool = True

    def validate(self) -> None:
        if self.R_max <= 0 or self.mod_R_max <= 0:
            raise ConfigError("domain truncation radii must be positive")
        if self.n_r < 16 or self.mod_n_r < 16 or self.tails_n_r < 16:
            raise ConfigError("radial grids need at least 16 nodes")
        if not 0 < self.rho_min < self.rho_max:
            raise ConfigError("need 0 < rho_min < rho_max")
        if self.k0 < 1:
            raise ConfigError("k0 must be at least 1")
        if int(self.rho_max) - 2 < self.k0:
            raise ConfigError("rho_max too small for any band above k0")
        if self.s <= 5.0 / 6.0:
            raise ConfigError("membership exponent must satisfy s > 5/6")
        if not (self.s1 > 3.0 * self.nu > 0.0):
            raise ConfigError(
                f"membership constraint violated: need s1 > 3 nu > 0 "
                f"(s1 = {self.s1}, nu = {self.nu})")
        if self.ms_eps <= 0:
            raise ConfigError("ms_eps must be positive")
        if self.theta <= 0.5:
            raise ConfigError("Z-norm weight requires theta > 1/2")
        if self.fp_eps <= 0 or self.fp_eps > 0.2:
            raise ConfigError("fixed-point eps must lie in (0, 0.2]")
        if self.tails_draws < 200:
            raise ConfigError("tail experiments need at least 200 draws")

    @classmethod
    def from_file(cls, path: str | Path | None = None) -> "RunConfig":
        cfg = cls()
        parser = configparser.ConfigParser()
        if path is None:
            text = resources.files("solwave").joinpath("defaults.cfg").read_text()
            parser.read_string(text)
        else:
            read = parser.read(str(path))
            if not read:
                raise ConfigError(f"config file {path} not found")
        if not parser.has_section("run"):
            raise ConfigError("config must contain a [run] section")
        sec = parser["run"]
        for f in fields(cls):
            if f.name not in sec:
                continue
            raw = sec[f.name]
            try:
                if f.type == "bool" or isinstance(getattr(cfg, f.name), bool):
                    val = sec.getboolean(f.name)
                elif isinstance(getattr(cfg, f.name), int):
                    val = int(raw)
                elif isinstance(getattr(cfg, f.name), float):
                    val = float(raw)
                else:
                    val = raw
            except ValueError as exc:
                raise ConfigError(f"bad value for {f.name}: {raw}") from exc
            setattr(cfg, f.name, val)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
