"""Command line driver: experiment orchestration and artifact emission.

Subcommands mirror the module map; each writes schema-stable CSV/JSON to
the output directory (plus a rendered figure unless --no-figures) and the
``all`` command executes the suite in dependency order, finishing with a
manifest.  Exit codes: 0 success, 1 hard invariant failure, 2 bad config.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from . import report as rep


def thread_cap() -> int:
    cap = os.environ.get("SOLWAVE_THREADS")
    if cap:
        return max(1, int(cap))
    return os.cpu_count() or 1


class Toolkit:
    """Lazily-built shared objects for one configuration."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._cache = {}

    def transform(self):
        if "T" not in self._cache:
            from .dft import build_transform
            from .grids import make_frequency_grid, make_grid
            from .soliton import SolitonParams, potential

            grid = make_grid(self.cfg.R_max, self.cfg.n_r,
                             self.cfg.grid_scheme)
            freqs = make_frequency_grid(self.cfg.rho_min, self.cfg.rho_max,
                                        self.cfg.n_rho)
            V = potential(SolitonParams(1.0), grid)
            self._cache["T"] = build_transform(V, grid, freqs,
                                               k0=self.cfg.k0)
        return self._cache["T"]

    def data_pair(self):
        if "pair" not in self._cache:
            from .randomize import DataPair

            T = self.transform()
            r = T.grid.r
            f0 = (0.3 * np.sin(3.0 * r) * np.exp(-((r - 10) ** 2) / 6)
                  + 0.06 * np.sin(1.5 * r) * np.exp(-((r - 18) ** 2) / 18))
            f1 = (0.2 * np.sin(4.0 * r) * np.exp(-((r - 12) ** 2) / 6)
                  + 0.08 * np.sin(1.5 * r) * np.exp(-((r - 18) ** 2) / 18))
            # impose the bound-state orthogonality <kappa f0 + f1, Y> = 0
            y = T.dec.eig.Y.values
            kap = T.dec.eig.kappa
            orth = kap * np.real(T.grid.inner(y, f0)) \
                + np.real(T.grid.inner(y, f1))
            f1 = f1 - orth / np.real(T.grid.inner(y, y)) * y
            self._cache["pair"] = DataPair(f0, f1, T)
        return self._cache["pair"]


def cmd_spectrum(tk: Toolkit, out: Path, figures: bool) -> list[Path]:
    from .soliton import SolitonParams, potential, resonance
    from .spectrum import verify_zero_resonance

    T = tk.transform()
    eig = T.dec.eig
    V = potential(SolitonParams(1.0), T.grid)
    res = resonance(SolitonParams(1.0), T.grid)
    res_report = verify_zero_resonance(V, res)
    payload = {
        "kappa": eig.kappa,
        "kappa_squared": eig.kappa**2,
        "kappa_shooting": eig.kappa_shooting,
        "decay_fit": eig.decay_rate,
        "residuals": res_report,
    }
    files = [rep.emit_json(out / "spectrum.json", payload)]
    if figures:
        from .plots import spectrum_figure
        files.append(spectrum_figure(out, T.grid, V.V.values,
                                     eig.Y.values, eig.kappa))
    return files


def cmd_jost(tk: Toolkit, out: Path, figures: bool) -> list[Path]:
    from .jost import c_plus_report, check_m_bounds

    T = tk.transform()
    tab = T.jost
    bounds = check_m_bounds(tab, tk.cfg.rho_star)
    ratio_norm = np.abs(tab.m - 1.0) * tab.freqs.rho[None, :] \
        * (1 + tab.grid.r[:, None] ** 2) ** 1.5
    rows = [(rho, np.real(c), np.imag(c), absf, float(np.max(ratio_norm[:, j])))
            for j, (rho, c, absf) in enumerate(
                zip(tab.freqs.rho, tab.c_plus, np.abs(tab.f0)))]
    files = [rep.emit_csv(out / "jost.csv",
                          ["rho", "re_c_plus", "im_c_plus", "abs_f0",
                           "m_bound_ratio"], rows),
             rep.emit_json(out / "jost_bounds.json",
                           {"bounds": bounds, **c_plus_report(tab)})]
    if figures:
        from .plots import jost_figure
        files.append(jost_figure(out, tab.freqs.rho, np.abs(tab.f0), bounds))
    return files


def cmd_dft_check(tk: Toolkit, out: Path, figures: bool) -> list[Path]:
    from .dft import bernstein_fit, coercivity_ratios, lp_projection_constants

    T = tk.transform()
    bern = bernstein_fit(T)
    lp = lp_projection_constants(T)
    coer = coercivity_ratios(T)
    payload = {
        "plancherel_defect": T.plancherel_defect,
        "bernstein_exponents": {"fitted": bern["exponent"],
                                "predicted": bern["predicted"]},
        "coercivity_ratios": {str(s): v for s, v in coer.items()},
        "lp_projection_constants": lp,
    }
    files = [rep.emit_json(out / "dft_check.json", payload)]
    if figures:
        from .plots import dft_figure
        files.append(dft_figure(out, bern["ks"], bern["ratios"], lp))
    return files


def cmd_kernel_check(tk: Toolkit, out: Path, figures: bool,
                     sample_size: int = 2000) -> list[Path]:
    from .kernels import KernelEvaluator, certify_kernel_bound, \
        kernel_bound_rhs, sample_triples

    T = tk.transform()
    cert = certify_kernel_bound(T, sample_size=sample_size,
                                seed=tk.cfg.seed)
    ev = KernelEvaluator(T)
    t, r, rp = sample_triples(200, 100.0, T.grid.R_max, tk.cfg.seed)
    k0 = T.bumps.k0
    K = ev.eval_K(k0, t, r, rp)
    rows = [(k0, ti, ri, rpi, abs(Ki), abs(Ki) / bi)
            for ti, ri, rpi, Ki, bi in zip(
                t, r, rp, K, kernel_bound_rhs(k0, t, r, rp))]
    files = [rep.emit_csv(out / "kernel_check.csv",
                          ["k", "t", "r", "rp", "abs_K", "bound_ratio"],
                          rows),
             rep.emit_json(out / "kernel_cert.json", cert)]
    if figures:
        from .plots import kernel_figure
        files.append(kernel_figure(out, cert["per_k_sup"],
                                   cert["inside_cone_sup"]))
    return files


def cmd_randomize(tk: Toolkit, out: Path, figures: bool,
                  batch: int = 100) -> list[Path]:
    from .randomize import MsParams, RandomDraw, norm_hs, norm_Xs, DataPair, \
        randomize

    pair = tk.data_pair()
    T = pair.T
    params = MsParams(tk.cfg.s, tk.cfg.s1, tk.cfg.nu, tk.cfg.ms_eps)
    rows = []
    norms = []
    for i in range(batch):
        draw = RandomDraw.from_seed(tk.cfg.seed + i, len(pair.ks))
        f0w, f1w = randomize(pair, draw)
        pw = DataPair(f0w, f1w, T)
        hs = norm_hs(pw, params.s)
        xs = norm_Xs(pw, params)
        orth = pw.orthogonality_scalar(T.dec.eig.kappa)
        rows.append((draw.seed, hs, xs, orth))
        norms.append(hs)
    files = [rep.emit_csv(out / "randomize.csv",
                          ["seed", "norm_hs", "norm_Xs", "orthogonality"],
                          rows)]
    if figures:
        from .plots import randomize_figure
        files.append(randomize_figure(out, np.array(norms)))
    return files


def cmd_evolve(tk: Toolkit, out: Path, figures: bool) -> list[Path]:
    from .grids import SpaceTimeField, mixed_norm
    from .propagator import evolve_W, make_flow_config

    T = tk.transform()
    pair = tk.data_pair()
    cfg = make_flow_config(tk.cfg.flow_T, tk.cfg.n_times, tk.cfg.theta)
    f0, f1 = pair.band_pieces(0).sum(axis=0), pair.band_pieces(1).sum(axis=0)
    fld = evolve_W(f0, f1, cfg, T, include_eigen=False)
    l2 = np.sqrt(np.real(np.abs(fld.values) ** 2 @ T.grid.w))
    sup = np.array([np.max(np.abs(fld.values[i]) /
                           (np.sqrt(4 * np.pi) * T.grid.r))
                    for i in range(cfg.times.size)])
    rows = list(zip(cfg.times, l2, sup))
    files = [rep.emit_csv(out / "evolve.csv", ["t", "l2_norm", "sup_norm"],
                          rows)]
    if figures:
        from .plots import evolve_figure
        files.append(evolve_figure(out, cfg.times,
                                   {"L2": l2, "sup": sup}))
    return files


def cmd_tails(tk: Toolkit, out: Path, figures: bool,
              n_draws: int | None = None) -> list[Path]:
    from .dft import build_transform
    from .grids import make_frequency_grid, make_grid
    from .propagator import make_flow_config, moment_route, tail_experiment
    from .randomize import DataPair, MsParams, norm_Xs
    from .soliton import SolitonParams, potential

    cfg = tk.cfg
    n_draws = n_draws or cfg.tails_draws
    grid = make_grid(cfg.tails_R_max, cfg.tails_n_r, "uniform")
    freqs = make_frequency_grid(cfg.rho_min, cfg.tails_rho_max,
                                int((cfg.tails_rho_max - cfg.rho_min) / 0.02) + 1)
    V = potential(SolitonParams(1.0), grid)
    T = build_transform(V, grid, freqs, k0=cfg.k0)
    r = grid.r
    f0 = 0.3 * np.sin(3.0 * r) * np.exp(-((r - 10) ** 2) / 6)
    f1 = 0.2 * np.sin(4.0 * r) * np.exp(-((r - 12) ** 2) / 6)
    pair = DataPair(f0, f1, T)
    params = MsParams(cfg.s, cfg.s1, cfg.nu, cfg.ms_eps)
    xs = norm_Xs(pair, params)
    fcfg = make_flow_config(cfg.tails_T, 160, cfg.theta)
    hi0 = pair.band_pieces(0).sum(axis=0)
    hi1 = pair.band_pieces(1).sum(axis=0)
    fit = tail_experiment(hi0, hi1, xs, n_draws, fcfg, T, seed=cfg.seed)
    moments = moment_route(fit.norms)
    payload = {
        "C_fit": fit.C_fit, "c_fit": fit.c_fit, "r_squared": fit.r_squared,
        "x_s_norm": xs, "n_draws": n_draws,
        "moment_route": {str(p): v for p, v in moments.items()},
    }
    rows = list(zip(fit.lambdas, fit.empirical_tail))
    files = [rep.emit_json(out / "tails.json", payload),
             rep.emit_csv(out / "tails.csv", ["lambda", "tail_probability"],
                          rows)]
    if figures:
        from .plots import tails_figure
        files.append(tails_figure(out, fit))
    return files


def cmd_modulate(tk: Toolkit, out: Path, figures: bool,
                 eps: float | None = None, seed: int | None = None,
                 window: float | None = None) -> list[Path]:
    from .modulation import (FixedPointConfig, ModulationSession,
                             picard_solve, validate_solution)

    cfg = tk.cfg
    eps = eps if eps is not None else cfg.fp_eps
    window = window if window is not None else cfg.mod_T
    sess = ModulationSession(cfg.mod_R_max, cfg.mod_n_r, cfg.mod_rho_min,
                             cfg.mod_rho_max, cfg.k0)
    grid = sess.grid
    rng = np.random.default_rng(seed if seed is not None else cfg.seed)
    om0, om1 = rng.uniform(2.0, 4.0, 2)
    g0 = np.sin(om0 * grid.r) * np.exp(-((grid.r - 10) ** 2) / 8)
    g1 = np.sin(om1 * grid.r) * np.exp(-((grid.r - 12) ** 2) / 8)
    g0 /= grid.l2_norm(g0)
    g1 /= grid.l2_norm(g1)
    psi0 = sess.phi_u + eps * g0
    psi1 = eps * g1
    orth = sess.kappa * np.real(grid.inner(sess.Y, psi0 - sess.phi_u)) \
        + np.real(grid.inner(sess.Y, psi1))
    psi1 = psi1 - orth / sess.Y_sq * sess.Y
    fp = FixedPointConfig(eps=2 * eps, max_iters=cfg.fp_max_iters,
                          contraction_tol=cfg.fp_contraction_tol * eps / 1e-2,
                          window_T=window, n_times=cfg.mod_n_times)
    state = picard_solve(sess, psi0, psi1, None, fp)
    val = validate_solution(sess, state, None)
    ts = state.v.times
    v_l2 = np.sqrt(np.real(np.abs(state.v.values) ** 2 @ grid.w))
    rows = list(zip(ts, state.a, state.a_dot, state.x_plus, state.x_minus,
                    v_l2))
    files = [rep.emit_csv(out / "modulate.csv",
                          ["t", "a", "a_dot", "x_plus", "x_minus", "v_l2"],
                          rows),
             rep.emit_json(out / "modulate.json", {
                 "eps": eps, "h": state.h,
                 "iterations": state.diagnostics["iterations"],
                 "contraction_ratios":
                     state.diagnostics["contraction_ratios"],
                 "validation": {k: v for k, v in val.items()
                                if k != "contraction_ratios"},
             })]
    if figures:
        from .plots import modulate_figure
        files.append(modulate_figure(out, state))
    return files


def cmd_reproduce(manifest: str, tolerant: bool) -> int:
    from .report import verify_manifest

    manifest_path = Path(manifest)
    with open(manifest_path) as fh:
        import json
        stored = json.load(fh)
    cfg = RunConfig(**{k: v for k, v in stored["config"].items()})
    cfg.validate()
    rerun_dir = manifest_path.parent / "reproduce_rerun"
    run_subcommands(["spectrum"], cfg, rerun_dir, figures=False)
    result = verify_manifest(manifest_path, rerun_dir, tolerant=tolerant)
    for line in result["details"]:
        print(line)
    return 0 if result["match"] else 1


SUBCOMMANDS = {
    "spectrum": cmd_spectrum,
    "jost": cmd_jost,
    "dft-check": cmd_dft_check,
    "kernel-check": cmd_kernel_check,
    "randomize": cmd_randomize,
    "evolve": cmd_evolve,
    "tails": cmd_tails,
    "modulate": cmd_modulate,
}

DEPENDENCY_ORDER = ["spectrum", "jost", "dft-check", "kernel-check",
                    "randomize", "evolve", "tails", "modulate"]


def run_subcommands(names, cfg: RunConfig, out: Path, figures: bool,
                    quick: bool = False, **kwargs) -> list[Path]:
    tk = Toolkit(cfg)
    outputs = []
    for name in names:
        fn = SUBCOMMANDS[name]
        extra = {}
        if name == "tails" and quick:
            extra["n_draws"] = 200
        if name == "kernel-check" and quick:
            extra["sample_size"] = 500
        if name == "randomize" and quick:
            extra["batch"] = 25
        if name == "modulate":
            extra = {k: v for k, v in kwargs.items()
                     if k in ("eps", "seed", "window") and v is not None}
        print(f"[solwave] running {name} ...")
        outputs.extend(fn(tk, out, figures, **extra))
    return outputs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="solwave",
        description="numerical toolkit for modulated soliton scattering")
    parser.add_argument("--config", help="key-value config file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        if name == "randomize":
            p.add_argument("--seed", type=int)
            p.add_argument("--batch", type=int, default=100)
            p.add_argument("--params", help="override config file for norms")
        if name == "modulate":
            p.add_argument("--eps", type=float)
            p.add_argument("--seed", type=int)
            p.add_argument("--window", type=float)
        if name == "tails":
            p.add_argument("--draws", type=int)
    p_all = sub.add_parser("all")
    p_all.add_argument("--quick", action="store_true")
    p_rep = sub.add_parser("reproduce")
    p_rep.add_argument("manifest")
    p_rep.add_argument("--tolerant", action="store_true")

    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config)
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out or cfg.out_dir)
    figures = cfg.figures and not args.no_figures
    try:
        if args.command == "reproduce":
            return cmd_reproduce(args.manifest, args.tolerant)
        if args.command == "all":
            outputs = run_subcommands(DEPENDENCY_ORDER, cfg, out, figures,
                                      quick=args.quick)
            outputs.append(rep.write_manifest(out, cfg.to_dict(), cfg.seed,
                                              [p for p in outputs
                                               if p.suffix != ".png"]))
        else:
            kwargs = {}
            if args.command == "modulate":
                kwargs = {"eps": args.eps, "seed": args.seed,
                          "window": args.window}
            if args.command == "tails" and args.draws:
                kwargs = {"n_draws": args.draws}
            if args.command == "randomize":
                kwargs = {"batch": args.batch}
            outputs = run_subcommands([args.command], cfg, out, figures,
                                      **kwargs)
            outputs.append(rep.write_manifest(out, cfg.to_dict(), cfg.seed,
                                              [p for p in outputs
                                               if p.suffix != ".png"]))
        for p in outputs:
            print(f"  wrote {p}")
    except (RuntimeError, ValueError) as exc:
        print(f"hard failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
