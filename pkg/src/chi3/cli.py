"""``chi3`` command-line front end.

Exit codes: 0 success, 1 property failure, 2 physics/regime error, 64 usage.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, checks, export, invfree
from . import linearized as lin
from .errors import DomainError, StabilityError
from .params import MediumParams, load_params, model_reduction_check, susceptibilities
from .params import transparent, validate_regime
from .sde import LinearSDE, SimConfig, lyapunov_covariance, ou_spectrum_oracle
from .sde import simulate, welch_estimate

EXIT_OK, EXIT_PROPERTY, EXIT_PHYSICS, EXIT_USAGE = 0, 1, 2, 64
COMMANDS = ("spectrum", "compare", "simulate", "invfree", "check")
FORMATS = ("csv", "json", "svg")
DEFAULT_GRID = "-5:5:401"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    models: tuple
    params_path: str | None
    grid: np.ndarray          # omega_bar, or rad/s when ``scaled`` is False
    scaled: bool
    out: Path
    formats: tuple
    seed: int
    ntraj: int
    threads: int
    full: bool = False
    dump_raw: bool = False
    q0: float | None = None
    beta: float | None = None
    x: float | None = None
    a0: float | None = None


def parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"grid must look like MIN:MAX:N, got {spec!r}") from None
    if n < 2 or not hi > lo or not (math.isfinite(lo) and math.isfinite(hi)):
        raise UsageError("grid needs MIN < MAX and at least 2 points")
    return np.linspace(lo, hi, n)


def parse_models(spec: str, allowed=lin.MODELS) -> tuple:
    names = (m.strip().lower() for m in spec.split(",") if m.strip())
    models = tuple(dict.fromkeys("slm" if m == "lsm" else m for m in names))
    if not models:
        raise UsageError("empty model list")
    bad = [m for m in models if m not in allowed]
    if bad:
        raise UsageError(f"unknown model(s) {', '.join(bad)}; choose from {allowed}")
    return tuple(dict.fromkeys(models))


def parse_formats(spec: str) -> tuple:
    fmts = tuple(f.strip().lower() for f in spec.split(",") if f.strip())
    if not fmts or any(f not in FORMATS for f in fmts):
        raise UsageError(f"formats must be a non-empty subset of {FORMATS}")
    return tuple(dict.fromkeys(fmts))


def thread_cap() -> int:
    raw = os.environ.get("CHI3_THREADS")
    if raw is None or raw == "":
        return max(1, min(4, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"CHI3_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("CHI3_THREADS must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="chi3", description="Noise spectra and photon statistics of "
                 "light in a driven cavity with a Kerr medium.")
    ap.add_argument("--version", action="version", version=f"chi3 {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--params", metavar="FILE", help="flat TOML parameter file")
        sp.add_argument("--model", default=None, help="comma list of eha,hm,slm")
        sp.add_argument("--grid", default=None, metavar="MIN:MAX:N",
                        help=f"frequency grid (default {DEFAULT_GRID})")
        sp.add_argument("--unscaled", action="store_true",
                        help="grid is in rad/s instead of omega/A")
        sp.add_argument("--out", default=None, metavar="DIR")
        sp.add_argument("--format", default="csv", help="comma list of csv,json,svg")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--ntraj", type=int, default=200)
        if name == "check":
            sp.add_argument("--full", action="store_true",
                            help="also run the Monte Carlo and reproducibility checks")
        if name == "simulate":
            sp.add_argument("--dump-raw", action="store_true",
                            help="write raw trajectories (binary float64 pairs)")
        if name == "invfree":
            sp.add_argument("--q0", type=float, default=None,
                            help="generation parameter 2 f0 kappa2 / C")
            sp.add_argument("--beta", type=float, default=None)
            sp.add_argument("--x", type=float, default=None)
            sp.add_argument("--a0", type=float, default=None)
    return ap


def make_config(args) -> RunConfig:
    default_models = {"simulate": "hm"}.get(args.command, ",".join(lin.MODELS))
    default_grid = "0:5:64" if args.command == "simulate" else DEFAULT_GRID
    if args.ntraj < 2:
        raise UsageError("--ntraj must be at least 2")
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    return RunConfig(
        command=args.command,
        models=parse_models(args.model if args.model is not None else default_models),
        params_path=args.params,
        grid=parse_grid(args.grid or default_grid),
        scaled=not args.unscaled,
        out=Path(args.out) if args.out else Path("."),
        formats=parse_formats(args.format),
        seed=args.seed, ntraj=args.ntraj, threads=thread_cap(),
        full=getattr(args, "full", False), dump_raw=getattr(args, "dump_raw", False),
        q0=getattr(args, "q0", None), beta=getattr(args, "beta", None),
        x=getattr(args, "x", None), a0=getattr(args, "a0", None),
    )


def load(cfg: RunConfig) -> MediumParams:
    if cfg.params_path is None:
        return MediumParams()
    path = Path(cfg.params_path)
    if not path.is_file():
        raise UsageError(f"parameter file not found: {path}")
    try:
        return load_params(path)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    except DomainError:
        raise
    except Exception as exc:   # malformed TOML
        raise UsageError(f"cannot read {path}: {exc}") from None


def _omega_bar(cfg: RunConfig, A: float) -> np.ndarray:
    return cfg.grid if cfg.scaled else cfg.grid / A


def _meta(cfg: RunConfig, p: MediumParams, **extra) -> dict:
    return export.metadata(seed=cfg.seed, params=p.as_dict(), command=cfg.command,
                           **extra)


def _fan_out(cfg: RunConfig, fn, items):
    """Run ``fn`` per item on at most ``cfg.threads`` workers; results keep
    the input order."""
    if cfg.threads == 1 or len(items) == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=min(cfg.threads, len(items))) as pool:
        return list(pool.map(fn, items))


def _regime_guard(p: MediumParams, model: str, U: float, s) -> None:
    bad = validate_regime(p, U, s=s).hard_failures()
    if bad:
        raise DomainError(f"{model}: invalid regime: " + "; ".join(bad))


# spectrum ---------------------------------------------------------------------
def _spectrum_one(p: MediumParams, wb: np.ndarray, model: str) -> dict:
    s = transparent(susceptibilities(p))
    op = lin.operating_point(model, p, s)
    _regime_guard(p, model, op.U, s)
    if not op.dd.is_stable:
        raise StabilityError(f"{model}: fluctuations not stationary")
    gm, gp = lin.spectrum_optimal(model, p, s, op.U, p.eps, wb, k=op.k)
    return {
        "model": model, "U": op.U, "phi0": op.phi0, "coeffs": op.coeffs,
        "columns": {
            "omega_bar": wb,
            "g_amplitude": lin.spectrum_scaled(op.coeffs, p.eps, wb, "amplitude"),
            "g_phase": lin.spectrum_scaled(op.coeffs, p.eps, wb, "phase"),
            "g_opt_minus": gm, "g_opt_plus": gp,
        },
    }


def cmd_spectrum(cfg: RunConfig) -> int:
    p = load(cfg)
    wb = _omega_bar(cfg, p.A)
    results = _fan_out(cfg, lambda m: _spectrum_one(p, wb, m), list(cfg.models))
    cfg.out.mkdir(parents=True, exist_ok=True)
    for r in results:
        m = r["model"]
        meta = _meta(cfg, p, model=m, U=r["U"], phi0=r["phi0"], t=r["coeffs"].t,
                     convention="normally ordered, shot-noise relative; "
                                "omega_bar = omega / (C/2)")
        cols = r["columns"]
        if "csv" in cfg.formats:
            export.write_csv(cfg.out / f"spectrum_{m}.csv", export.SPECTRUM_COLUMNS,
                             cols, meta)
        if "json" in cfg.formats:
            export.write_json(cfg.out / f"spectrum_{m}.json",
                              {**{k: cols[k] for k in export.SPECTRUM_COLUMNS},
                               "scaled_coeffs": vars(r["coeffs"])}, meta)
        if "svg" in cfg.formats:
            export.write_svg(cfg.out / f"spectrum_{m}.svg", wb,
                             {k: cols[k] for k in export.SPECTRUM_COLUMNS[1:]},
                             title=f"{m}: normally ordered spectrum", ylabel="g",
                             reference=0.0, meta=meta)
    return EXIT_OK


# compare ----------------------------------------------------------------------
def _compare_one(p: MediumParams, wb: np.ndarray, model: str) -> dict:
    s = transparent(susceptibilities(p))
    try:
        op = lin.operating_point(model, p, s)
        _regime_guard(p, model, op.U, s)
        gm, gp = lin.spectrum_optimal(model, p, s, op.U, p.eps, np.array([0.0]), k=op.k)
        entry = {"U": op.U, "phi0": op.phi0, "scaled_coeffs": vars(op.coeffs),
                 "drift_diffusion": vars(op.dd),
                 "zero_frequency": {"minus": float(gm[0]), "plus": float(gp[0])}}
        if model == "eha":
            we, gmin = lin.eha_band_minimum(op.coeffs.t, C_norm=1 + p.eps)
            entry["eha_band_minimum"] = {"omega_bar": we, "g_min": gmin}
        dev = 0.0
        sde = LinearSDE.from_drift_diffusion(op.dd)
        for th in (0.0, math.pi / 2):
            th_abs = op.phi0 + th
            g = lin.spectrum_g_raw(op.dd, op.U, op.phi0, p.C_out, wb * p.A, th_abs)
            o = ou_spectrum_oracle(sde, wb * p.A,
                                   lin.quadrature_weights(op.U, op.phi0, th_abs), p.C_out)
            dev = max(dev, float(np.abs(g - o).max()))
        entry["oracle_max_abs_deviation"] = dev
        return {"model": model, "ok": True, **entry}
    except (DomainError, StabilityError) as exc:
        return {"model": model, "ok": False, "error": str(exc)}


def cmd_compare(cfg: RunConfig) -> int:
    p = load(cfg)
    wb = _omega_bar(cfg, p.A)
    results = _fan_out(cfg, lambda m: _compare_one(p, wb, m), list(cfg.models))
    ident = checks.check_reduction_identity(p)
    report = {"models": {r.pop("model"): r for r in results},
              "reduction_tags": vars(model_reduction_check(p)),
              "hm_eha_drift_identity": ident.passed}
    cfg.out.mkdir(parents=True, exist_ok=True)
    meta = _meta(cfg, p)
    export.write_json(cfg.out / "compare.json", report, meta)
    if "svg" in cfg.formats:
        s = transparent(susceptibilities(p))
        series = {}
        for m in cfg.models:
            if report["models"][m]["ok"]:
                op = lin.operating_point(m, p, s)
                series[f"{m} phase"] = lin.spectrum_scaled(op.coeffs, p.eps, wb, "phase")
        export.write_svg(cfg.out / "compare.svg", wb, series, ylabel="g",
                         title="phase-quadrature spectra", meta=meta)
    return EXIT_OK if all(r["ok"] for r in report["models"].values()) else EXIT_PHYSICS


# simulate ---------------------------------------------------------------------
def _sim_settings(sde: LinearSDE, w_max: float) -> dict:
    lam = sde.eigenvalues
    lam_max = float(np.abs(lam).max())
    width = float(np.abs(lam.real).min())
    dt = 0.01 / lam_max
    dts = min(0.1 / lam_max, math.pi / (10 * max(w_max, 1e-12)))
    every = max(1, int(round(dts / dt)))
    nper = int(math.ceil(64.0 / width / (dt * every)))
    return {"dt": dt, "record_every": every, "nperseg": nper, "linewidth": width,
            "t_max": 17 * (nper // 2) * dt * every}


def _simulate_one(cfg: RunConfig, p: MediumParams, wb: np.ndarray, model: str) -> dict:
    s = transparent(susceptibilities(p))
    op = lin.operating_point(model, p, s)
    _regime_guard(p, model, op.U, s)
    sde = LinearSDE.from_drift_diffusion(op.dd)
    if not sde.is_stable:
        raise StabilityError(f"{model}: fluctuations not stationary")
    st = _sim_settings(sde, float(np.abs(wb).max()) * p.A)
    ens = simulate(sde, SimConfig(n_traj=cfg.ntraj, dt=st["dt"], t_max=st["t_max"],
                                  seed=cfg.seed, record_every=st["record_every"]))
    cols = {"omega_bar": wb}
    for tag, th in (("amplitude", 0.0), ("phase", math.pi / 2)):
        w = lin.quadrature_weights(op.U, op.phi0, op.phi0 + th)
        est, se = welch_estimate(ens, w, wb * p.A, nperseg=st["nperseg"],
                                 linewidth=st["linewidth"], scale=p.C_out)
        cols[f"{tag}_estimate"] = est
        cols[f"{tag}_stderr"] = se
        cols[f"{tag}_closed"] = lin.spectrum_g_raw(op.dd, op.U, op.phi0, p.C_out,
                                                   wb * p.A, op.phi0 + th)
    mom = ens.moments()
    cov = lyapunov_covariance(sde)
    names = ("eps_eps", "eps_psi", "psi_psi")
    idx = ((0, 0), (0, 1), (1, 1))
    moments = {n: {"estimate": float(mom["m2"][i].real),
                   "stderr": float(mom["m2_se"][i].real),
                   "exact": float(cov[i].real)} for n, i in zip(names, idx)}
    return {"model": model, "columns": cols, "moments": moments, "ens": ens,
            "settings": st, "noise_mode": ens.noise_mode}


SIM_COLUMNS = ("omega_bar", "amplitude_estimate", "amplitude_stderr", "amplitude_closed",
               "phase_estimate", "phase_stderr", "phase_closed")


def cmd_simulate(cfg: RunConfig) -> int:
    p = load(cfg)
    wb = _omega_bar(cfg, p.A)
    results = _fan_out(cfg, lambda m: _simulate_one(cfg, p, wb, m), list(cfg.models))
    cfg.out.mkdir(parents=True, exist_ok=True)
    for r in results:
        m = r["model"]
        meta = _meta(cfg, p, model=m, n_traj=cfg.ntraj, noise_mode=r["noise_mode"],
                     scheme="euler-maruyama", settings=r["settings"],
                     welch="hann window, 50% overlap")
        if "csv" in cfg.formats:
            export.write_csv(cfg.out / f"simulate_{m}.csv", SIM_COLUMNS, r["columns"], meta)
            mcols = {"quantity": list(r["moments"]),
                     **{k: [v[k] for v in r["moments"].values()]
                        for k in ("estimate", "stderr", "exact")}}
            export.write_csv(cfg.out / f"simulate_{m}_moments.csv",
                             ("quantity", "estimate", "stderr", "exact"), mcols, meta)
        if "json" in cfg.formats:
            export.write_json(cfg.out / f"simulate_{m}.json",
                              {**r["columns"], "moments": r["moments"]}, meta)
        if "svg" in cfg.formats:
            c = r["columns"]
            export.write_svg(cfg.out / f"simulate_{m}.svg", wb,
                             {k: c[k] for k in SIM_COLUMNS if not k.endswith("stderr")
                              and k != "omega_bar"},
                             title=f"{m}: Welch estimate vs closed form", meta=meta)
        if cfg.dump_raw:
            export.dump_raw(cfg.out / f"simulate_{m}.raw", r["ens"])
    return EXIT_OK


# invfree ----------------------------------------------------------------------
def _invfree_coeffs(cfg: RunConfig, p: MediumParams):
    s = susceptibilities(p)
    if cfg.q0 is not None:
        beta = s.beta if cfg.beta is None else cfg.beta
        if cfg.q0 < 0 or beta < 0:
            raise DomainError("q0 and beta must be non-negative")
        x = 0.0 if cfg.x is None else cfg.x
        a0 = 0.0 if cfg.a0 is None else cfg.a0
        c = invfree.coeffs_from_generation(cfg.q0, beta, p.C, x=x, a0=a0)
        return c.check_stability(), cfg.q0, beta
    c = invfree.approx_fpe_coeffs(p, s)
    q0 = 2 * p.f1s * s.kappa2 / p.C
    return c, q0, s.beta


def cmd_invfree(cfg: RunConfig) -> int:
    p = load(cfg)
    c, q0, beta = _invfree_coeffs(cfg, p)
    m = invfree.steady_moments(c)
    A = -c.k.real
    wb = cfg.grid if cfg.scaled else cfg.grid / A
    cols = {"omega_bar": wb,
            "Y_amplitude": invfree.spectrum_Y(c, m, wb * A, 0.0),
            "Y_phase": invfree.spectrum_Y(c, m, wb * A, math.pi / 2)}
    gen = invfree.generation_stats(q0, beta, p.C)
    bq = np.logspace(-3, 3, 61)
    sweep = invfree.generation_stats(bq, np.ones_like(bq), 1.0)
    sweep_cols = {"beta_q0": bq, "beta_n": sweep.mean_n,
                  "xi_over_n": sweep.mandel_xi / sweep.mean_n,
                  "closure_xi_over_n2": invfree.closure_mandel_factor(bq, 1.0)}
    record = {"coefficients": vars(c), "moments": m.as_dict(),
              "generation": {"q0": q0, "beta": beta, "mean_n": gen.mean_n,
                             "linewidth": gen.linewidth, "mandel_xi": gen.mandel_xi},
              "stability": c.stability_violations() or "ok"}
    meta = _meta(cfg, p, q0=q0, beta=beta,
                 convention="normally ordered, shot-noise relative; "
                            "omega_bar = omega / (-Re k)")
    cfg.out.mkdir(parents=True, exist_ok=True)
    export.write_json(cfg.out / "invfree_moments.json", record, meta)
    if "csv" in cfg.formats:
        export.write_csv(cfg.out / "invfree_Y.csv", export.Y_COLUMNS, cols, meta)
        export.write_csv(cfg.out / "invfree_mandel.csv", tuple(sweep_cols), sweep_cols,
                         meta)
    if "json" in cfg.formats:
        export.write_json(cfg.out / "invfree_Y.json", cols, meta)
    if "svg" in cfg.formats:
        export.write_svg(cfg.out / "invfree_Y.svg", wb,
                         {"Theta=0": cols["Y_amplitude"], "Theta=pi/2": cols["Y_phase"]},
                         ylabel="Y", title="inversion-free medium", meta=meta)
        export.write_svg(cfg.out / "invfree_mandel.svg", np.log10(bq),
                         {"xi/<n>": sweep_cols["xi_over_n"]}, xlabel="log10 beta q0",
                         ylabel="xi/<n>", reference=None, meta=meta)
    return EXIT_OK


# check ------------------------------------------------------------------------
def cmd_check(cfg: RunConfig) -> int:
    p = load(cfg)
    results = checks.property_suite(p, full=cfg.full)
    for r in results:
        print(r.line(), file=sys.stderr)
    failed = [r for r in results if not r.ok]
    summary = {"version": __version__, "passed": not failed,
               "first_failure": failed[0].name if failed else None,
               "checks": [{"name": r.name, "passed": r.ok, "detail": r.detail,
                           "runtime_s": round(r.runtime, 3)} for r in results]}
    print(json.dumps(summary, indent=2))
    if failed:
        print(f"property failed: {failed[0].name}", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


HANDLERS = {"spectrum": cmd_spectrum, "compare": cmd_compare, "simulate": cmd_simulate,
            "invfree": cmd_invfree, "check": cmd_check}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = make_config(args)
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"chi3: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, StabilityError) as exc:
        print(f"chi3: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
