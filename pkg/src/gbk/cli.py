"""Command-line experiment runner.

One command per process; every command reads a flat key-value config file,
writes its delimited output (CSV or JSON) with a reproducibility header, and
optionally renders figures next to it. Exit codes: 0 success, 1 compute
failure (structured error on stderr), 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .collisions import BathParams, WeightParams, theta_sharp
from .configio import (
    ConfigError,
    dump_ensemble,
    read_config,
    resolved_config_dict,
    sim_config_from_dict,
    write_csv,
    write_json,
)
from .engine import run
from .steady import Kick, SteadyStateError, alpha_sweep, compute_steady_state, perturbation_relaxation

__all__ = ["main"]


def _weight_from_cfg(cfg: dict) -> WeightParams:
    return WeightParams(
        b=float(cfg.get("weight_b", 0.1)),
        beta=float(cfg.get("weight_beta", 0.5)),
        q=int(cfg.get("weight_q", 1)),
    )


def _threads(cfg: dict) -> int:
    env = os.environ.get("GBK_THREADS")
    if env is not None:
        return int(env)
    return int(cfg.get("threads", 1))


def _series_rows(series, weight_norms):
    cols = ["t", "mass", "px", "py", "pz", "energy", "temperature"]
    for w in weight_norms:
        cols.append(f"wnorm_{w.q}_{w.b:g}_{w.beta:g}")
    rows = []
    for r in series:
        row = [r.t, r.mass, r.momentum[0], r.momentum[1], r.momentum[2],
               r.energy, r.temperature]
        for w in weight_norms:
            row.append(r.weighted_norms[(w.q, w.b, w.beta)])
        rows.append(row)
    return cols, rows


def cmd_simulate(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    config = sim_config_from_dict(cfg)
    result = run(config)
    meta = resolved_config_dict(result.config)
    meta["threads"] = _threads(cfg)
    cols, rows = _series_rows(result.series, config.weight_norms)
    write_csv(out, cols, rows, meta=meta, stamp=stamp)
    if cfg.get("ensemble_out"):
        dump_ensemble(cfg["ensemble_out"], result.final)
    if figures:
        from .figures import save_timeseries_figure
        save_timeseries_figure(out.with_suffix(".png"), result.series,
                               theta_target=theta_sharp(config.restitution.e,
                                                        config.bath.theta0))
    return 0


def cmd_steady(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    config = sim_config_from_dict(cfg)
    res = compute_steady_state(
        config,
        n_bins=int(cfg.get("n_bins", 64)),
        r_max=float(cfg["r_max"]) if "r_max" in cfg else None,
        t_average=float(cfg["t_average"]) if "t_average" in cfg else None,
    )
    meta = resolved_config_dict(config)
    meta["threads"] = _threads(cfg)
    payload = {
        "alpha": res.alpha,
        "e": res.e,
        "temperature": res.temperature,
        "temperature_stderr": res.temperature_stderr,
        "theta_sharp": theta_sharp(res.e, config.bath.theta0),
        "stationarity_pvalue_proxy": res.stationarity_pvalue_proxy,
        "n_particles": res.n_particles,
        "t_burn_in": res.t_burn_in,
        "t_average": res.t_average,
        "profile": {
            "bin_edges": res.profile.bin_edges,
            "density": res.profile.density,
            "center": res.profile.center,
            "total_mass": res.profile.total_mass,
            "excluded_fraction": res.profile.excluded_fraction,
        },
    }
    if res.rate is not None:
        payload["burn_in_rate"] = {"rate": res.rate.rate, "r_squared": res.rate.r_squared}
    write_json(out, payload, meta=meta, stamp=stamp)
    if figures:
        from .figures import save_profile_figure
        th = theta_sharp(res.e, config.bath.theta0)
        ref = lambda r: config.rho * (2 * np.pi * th) ** -1.5 * np.exp(-r**2 / (2 * th))
        save_profile_figure(out.with_suffix(".png"), res.profile, reference=ref)
    return 0


def cmd_sweep(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    config = sim_config_from_dict(cfg)
    alphas = [float(x) for x in cfg.get("alphas", "0.8,0.9,0.95,0.99").split(",")]
    w = _weight_from_cfg(cfg)
    rows = alpha_sweep(alphas, config, w=w,
                       n_bins=int(cfg.get("n_bins", 64)),
                       t_average=float(cfg["t_average"]) if "t_average" in cfg else None)
    meta = resolved_config_dict(config)
    meta.update(alphas=",".join(f"{a:g}" for a in alphas), threads=_threads(cfg),
                weight=f"{w.q}:{w.b:g}:{w.beta:g}")
    cols = ["alpha", "e", "temperature", "temperature_stderr", "distance",
            "rate", "rate_r2"]
    csv_rows = [[r["alpha"], r["e"], r.get("temperature", float("nan")),
                 r.get("temperature_stderr", float("nan")),
                 r.get("distance", float("nan")),
                 r.get("rate", float("nan")), r.get("rate_r2", float("nan"))]
                for r in rows]
    write_csv(out, cols, csv_rows, meta=meta, stamp=stamp)
    if figures:
        from .figures import save_sweep_figure
        save_sweep_figure(out.with_suffix(".png"), rows)
    return 0


def cmd_relax(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    config = sim_config_from_dict(cfg)
    steady_cfg = replace(config, t_end=float(cfg.get("steady_t_end", config.t_end)))
    steady = compute_steady_state(
        steady_cfg,
        n_bins=int(cfg.get("n_bins", 64)),
        t_average=float(cfg["t_average"]) if "t_average" in cfg else None,
    )
    kick = Kick(scale=float(cfg.get("kick_scale", 1.2)),
                shift=tuple(float(x) for x in
                            cfg.get("kick_shift", "0 0 0").replace(",", " ").split()))
    fit = perturbation_relaxation(steady, config, kick)
    meta = resolved_config_dict(config)
    meta["threads"] = _threads(cfg)
    payload = {
        "kick_scale": kick.scale,
        "kick_shift": list(kick.shift),
        "rate": fit.rate,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "window": list(fit.window),
        "steady_temperature": steady.temperature,
        "steady_temperature_stderr": steady.temperature_stderr,
    }
    write_json(out, payload, meta=meta, stamp=stamp)
    return 0


def _grid_from_cfg(cfg: dict, bath: BathParams, e: float):
    from .linop import grid_for_bath

    n = int(cfg.get("grid_n", 15))
    radius = float(cfg["grid_radius"]) if "grid_radius" in cfg else None
    return grid_for_bath(bath, e, n=n, radius=radius)


def _spectrum_payload(rep) -> dict:
    return {
        "kind": rep.kind,
        "alpha": rep.params.get("alpha"),
        "e": rep.params.get("e"),
        "grid": {"n": rep.params.get("grid_n"), "R": rep.params.get("grid_radius")},
        "eigenvalues": [[float(z.real), float(z.imag)] for z in rep.eigenvalues],
        "gap": rep.spectral_gap,
        "null_eigenvalue": [rep.null_eigenvalue.real, rep.null_eigenvalue.imag],
        "null_residual": rep.null_residual,
        "null_cosine": rep.null_cosine,
        "mass_residual": rep.mass_residual,
        "notes": rep.notes,
    }


def cmd_spectrum(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    from .linop import assemble_bath_operator, assemble_linearized, spectrum

    config = sim_config_from_dict(cfg)
    e = config.restitution.e
    alpha = config.restitution.alpha
    grid = _grid_from_cfg(cfg, config.bath, e)
    kind = cfg.get("operator", "bath")
    if kind == "bath":
        op = assemble_bath_operator(grid, e, config.bath,
                                    sphere_order=int(cfg.get("sphere_order", 5)),
                                    scatter=cfg.get("scatter", "spline"))
    elif kind == "linearized":
        op = assemble_linearized(grid, alpha, e, config.bath,
                                 sphere_order=int(cfg.get("sphere_order", 5)),
                                 scatter=cfg.get("scatter", "spline"))
    else:
        raise ConfigError(f"operator must be 'bath' or 'linearized', got {kind!r}")
    rep = spectrum(op)
    meta = resolved_config_dict(config)
    meta.update(operator=kind, grid_n=grid.n, grid_radius=grid.radius,
                threads=_threads(cfg))
    write_json(out, _spectrum_payload(rep), meta=meta, stamp=stamp)
    if cfg.get("matrix_out"):
        raw = Path(cfg["matrix_out"])
        op.entries.astype("<f8").tofile(raw)
        write_json(raw.with_suffix(".json"),
                   {"n": grid.n, "R": grid.radius, "center": list(grid.center),
                    "kind": op.kind, "layout": "row-major little-endian f64"},
                   meta=meta, stamp=stamp)
    if figures:
        from .figures import save_spectrum_figure
        save_spectrum_figure(out.with_suffix(".png"), rep)
    return 0


def cmd_split_probe(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    from .linop import SplitParams, assemble_split, split_probe_report

    config = sim_config_from_dict(cfg)
    e = config.restitution.e
    grid = _grid_from_cfg(cfg, config.bath, e)
    split = SplitParams(delta=float(cfg.get("delta", 0.5)))
    alpha = config.restitution.alpha if cfg.get("operator", "bath") == "linearized" else None
    a_part, b_part = assemble_split(grid, e, config.bath, split, alpha=alpha,
                                    sphere_order=int(cfg.get("sphere_order", 5)),
                                    scatter=cfg.get("scatter", "linear"))
    report = split_probe_report(a_part, b_part, e, config.bath, split)
    meta = resolved_config_dict(config)
    meta.update(delta=split.delta, grid_n=grid.n, grid_radius=grid.radius,
                threads=_threads(cfg))
    write_json(out, report, meta=meta, stamp=stamp)
    return 0


def cmd_freq(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    from .diagnostics import (collision_frequency_bounds, collision_frequency_nu,
                              collision_frequency_nu_quadrature)

    config = sim_config_from_dict(cfg)
    bath = config.bath
    r_max = float(cfg.get("r_max", 20.0))
    n_pts = int(cfg.get("n_points", 81))
    r = np.linspace(0.0, r_max, n_pts)
    nu = collision_frequency_nu(r, bath)
    quad_every = max(1, n_pts // 8)
    rows = []
    for k in range(n_pts):
        if k % quad_every == 0:
            q = collision_frequency_nu_quadrature(float(r[k]), bath)
            rel = abs(nu[k] - q) / q
        else:
            q, rel = float("nan"), float("nan")
        rows.append([r[k], nu[k], q, rel])
    nu0, nu1 = collision_frequency_bounds(bath, r_max=max(50.0, r_max))
    meta = resolved_config_dict(config)
    meta.update(nu_e0=f"{nu0:.17g}", nu_e1=f"{nu1:.17g}", threads=_threads(cfg))
    write_csv(out, ["r", "nu_e", "nu_e_quadrature", "rel_error"], rows,
              meta=meta, stamp=stamp)
    if figures:
        from .figures import save_freq_figure
        save_freq_figure(out.with_suffix(".png"), r, nu, nu0, nu1)
    return 0


def cmd_kernel_check(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    from .linop import kernel_bound_check

    config = sim_config_from_dict(cfg)
    w = _weight_from_cfg(cfg)
    radii = tuple(float(x) for x in cfg.get("radii_scale", "1,2,4,8").split(","))
    report = kernel_bound_check(w, config.restitution.e, config.bath,
                                radii_scale=radii,
                                c_e=float(cfg.get("kernel_c", 1.0)),
                                mu=float(cfg.get("kernel_mu", 1.0)))
    meta = resolved_config_dict(config)
    meta["threads"] = _threads(cfg)
    write_json(out, report, meta=meta, stamp=stamp)
    return 0


def cmd_verify(cfg: dict, out: Path, figures: bool, stamp: bool) -> int:
    from .verify import run_verification

    config = sim_config_from_dict(cfg)
    report = run_verification(seed=config.seed, bath=config.bath,
                              trials=int(cfg.get("trials", 100_000)))
    meta = resolved_config_dict(config)
    meta["threads"] = _threads(cfg)
    write_json(out, report, meta=meta, stamp=stamp)
    return 0 if report["passed"] else 1


_COMMANDS = {
    "simulate": cmd_simulate,
    "steady": cmd_steady,
    "sweep": cmd_sweep,
    "relax": cmd_relax,
    "spectrum": cmd_spectrum,
    "split-probe": cmd_split_probe,
    "freq": cmd_freq,
    "kernel-check": cmd_kernel_check,
    "verify": cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gbk",
        description="Granular-gas thermal-bath kinetics: particle solver, steady "
                    "states, and linearized spectral diagnostics.")
    p.add_argument("--version", action="version", version=f"gbk {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name, help=f"{name} experiment")
        sp.add_argument("config", type=Path, help="flat key = value config file")
        sp.add_argument("-o", "--output", type=Path, required=True,
                        help="output artifact path (.csv or .json)")
        sp.add_argument("--figures", action="store_true",
                        help="render PNG figures next to the output")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the header timestamp (byte-stable artifacts)")
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = read_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"gbk: config error: {exc}", file=sys.stderr)
        return 2
    t0 = time.time()
    try:
        code = _COMMANDS[args.command](cfg, args.output, args.figures,
                                       stamp=not args.no_timestamp)
    except (ConfigError, ValueError) as exc:
        print(f"gbk: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except (SteadyStateError, RuntimeError, np.linalg.LinAlgError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc),
               "command": args.command, "elapsed_s": round(time.time() - t0, 3)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
