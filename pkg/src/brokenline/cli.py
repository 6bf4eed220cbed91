"""Command-line entry point: batch runs plus single-object probes."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__, probes
from .config import ConfigError, load_config
from .experiments import BY_ID, EXPERIMENTS, report_rows
from .model_operators import (CounterexampleSpec, HHParams, counterexample_image, ij_exponent,
                              tij_envelope)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def versions() -> str:
    return f"brokenline {__version__}; numpy {np.__version__}; scipy {scipy.__version__}"


def cell(v) -> str:
    """Text for one CSV cell; floats use ``repr`` so reruns are byte-identical."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def render_csv(columns, rows, header_lines=()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([cell(v) for v in row])
    return buf.getvalue()


def run_experiment(exp, cfg):
    """Collect rows; an exception keeps the rows produced before it."""
    rows, status, start = [], "ok", time.perf_counter()
    try:
        for row in exp.run(cfg):
            rows.append(row)
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        status = f"failed: {type(exc).__name__}: {exc}".replace("\n", " ")
        traceback.print_exc(file=sys.stderr)
    return rows, status, time.perf_counter() - start


def run(cfg, out_dir: Path, threads: int = 1) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = cfg.digest()
    selected = [BY_ID[e] for e in cfg.experiments]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run_experiment, exp, cfg) for exp in selected]
        results = [f.result() for f in futures]
    manifest = {"config_sha256": digest, "versions": versions(), "seed": cfg.seed, "config": cfg.echo(),
                "overrides": {f"{s}.{k}": v for (s, k), v in cfg.overrides.items()}, "experiments": []}
    failed = False
    for exp, (rows, status, wall) in zip(selected, results):
        header = (f"experiment: {exp.id}", f"config_sha256: {digest}", f"version: {versions()}",
                  f"seed: {cfg.seed}", f"status: {status}")
        path = out_dir / f"{exp.id}.csv"
        path.write_text(render_csv(exp.columns, rows, header), encoding="utf-8")
        failed |= status != "ok"
        manifest["experiments"].append({"id": exp.id, "file": path.name, "status": status, "rows": len(rows),
                                        "wall_seconds": round(wall, 3)})
        print(f"{exp.id}: {status} ({len(rows)} rows, {wall:.1f} s) -> {path}")
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return EXIT_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------- argument parsing


def _floats(text):
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="INI config file")
    p.add_argument("--out", metavar="DIR", help="output directory (run) or CSV file (probes)")
    p.add_argument("--threads", type=int, metavar="N", help="worker threads")
    p.add_argument("--seed", metavar="U64", help="base seed")
    return p


def _dims_args(p):
    p.add_argument("--d1", type=float, help="dimension of the negative end")
    p.add_argument("--d2", type=float, help="dimension of the positive end")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="brokenline", description="Numerical experiments on the broken line.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run the experiments named in the config")
    p.add_argument("--experiments", help="comma-separated ids, overriding [run] experiments")

    sub.add_parser("list-experiments", parents=[common], help="list experiment ids")

    p = sub.add_parser("specfun", parents=[common], help="Bessel spot values as CSV")
    p.add_argument("--orders", type=_floats)
    p.add_argument("--args", type=_floats)

    p = sub.add_parser("resolvent", parents=[common], help="resolvent kernel values as CSV")
    _dims_args(p)
    p.add_argument("--lam", type=_floats, default=[1.0])
    p.add_argument("--x", type=_floats, default=[-3.0, 2.0])
    p.add_argument("--y", type=_floats, default=[-2.0, 5.0])

    p = sub.add_parser("riesz-kernel", parents=[common], help="Riesz kernel parts at one point")
    _dims_args(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--part", choices=("TL", "TH", "KL", "FULL", "all"), default="all")

    p = sub.add_parser("fit-appendix", parents=[common], help="fit low-energy exponents of TL")
    _dims_args(p)
    p.add_argument("--quadrant", choices=("Q1", "Q2", "Q3", "Q4"))
    p.add_argument("--regime", choices=("x_small", "x_large"))
    p.add_argument("--eps", type=float)

    p = sub.add_parser("hh-probe", parents=[common], help="two-branch kernel norm ratios")
    for name in ("alpha", "beta", "alpha-p", "beta-p", "n1", "n2"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float)
    p.add_argument("--R", type=_floats, dest="R_list")
    p.add_argument("--mode", choices=("strong", "upper", "lower", "R1", "R2", "lorentz"), default="strong",
                   help="family sweep, divergent witness, or endpoint indicator test")

    p = sub.add_parser("tij-probe", parents=[common], help="envelope slope of T_ij and I_j")
    _dims_args(p)
    p.add_argument("--i", type=int, choices=(1, 2), required=True)
    p.add_argument("--j", type=int, choices=(1, 2), required=True)
    p.add_argument("--q", type=float, default=2.0)

    p = sub.add_parser("counterexample", parents=[common], help="Riesz ratios on the critical counterexample")
    _dims_args(p)
    p.add_argument("--R", type=_floats, dest="R_list")
    p.add_argument("--beta", type=float)
    return ap


def _overrides(args) -> dict:
    o = {}
    if getattr(args, "seed", None) is not None:
        o[("run", "seed")] = args.seed
    if getattr(args, "threads", None) is not None:
        o[("run", "threads")] = str(args.threads)
    if args.command == "run" and args.out is not None:
        o[("run", "out")] = args.out
    if getattr(args, "experiments", None):
        o[("run", "experiments")] = args.experiments
    for key in ("d1", "d2"):
        if getattr(args, key, None) is not None:
            o[("dims", key)] = repr(getattr(args, key))
    if getattr(args, "eps", None) is not None:
        o[("appendix", "eps")] = repr(args.eps)
    if getattr(args, "orders", None):
        o[("specfun", "orders")] = ",".join(map(repr, args.orders))
    if getattr(args, "args", None):
        o[("specfun", "args")] = ",".join(map(repr, args.args))
    return o


def _emit(args, columns, rows, cfg):
    text = render_csv(columns, rows, (f"config_sha256: {cfg.digest()}", f"version: {versions()}",
                                      f"seed: {cfg.seed}"))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _single(args, cfg) -> int:
    from .resolvent import csv_rows
    from .riesz_kernel import PARTS, appendix_check, riesz_kernel
    from .specfun import spot_rows

    cmd = args.command
    dims = cfg.dims
    if cmd == "specfun":
        _emit(args, ("nu", "x", "I", "K", "dI", "dK"),
              spot_rows(cfg.get("specfun", "orders"), cfg.get("specfun", "args")), cfg)
    elif cmd == "resolvent":
        _emit(args, ("lam", "x", "y", "kk", "kl", "kernel"), csv_rows(dims, args.lam, args.x, args.y), cfg)
    elif cmd == "riesz-kernel":
        parts = PARTS if args.part == "all" else (args.part,)
        rows = [(dims.d1, dims.d2, args.x, args.y, part, riesz_kernel(dims, args.x, args.y, part, cfg.tol))
                for part in parts]
        _emit(args, ("d1", "d2", "x", "y", "part", "value"), rows, cfg)
    elif cmd == "fit-appendix":
        rows = []
        for quad in [args.quadrant] if args.quadrant else ("Q1", "Q2", "Q3", "Q4"):
            for regime in [args.regime] if args.regime else ("x_small", "x_large"):
                res = appendix_check(dims, quad, regime, cfg.get("appendix", "eps"), tol=cfg.tol)
                rows.append((dims.d1, dims.d2, dims.case(), quad, regime, res.kind, res.predicted[0],
                             res.x_fit.slope, res.predicted[1], res.y_fit.slope, res.ok()))
        _emit(args, BY_ID["appendix-exponents"].columns, rows, cfg)
    elif cmd == "hh-probe":
        params = HHParams(args.alpha, args.beta, args.alpha_p, args.beta_p, args.n1, args.n2)
        per = cfg.get("hh", "per_decade")
        if args.mode in ("R1", "R2", "lorentz"):
            which = "R2" if args.mode == "R2" else "R1"
            target = "lorentz" if args.mode == "lorentz" else "weak"
            R_list = args.R_list or (1e2, 1e4, 1e6)
            rep = probes.hh_endpoint_probe(params, which, R_list, per, cfg.seed, cfg.sets, args.p, args.q, target)
        elif args.mode == "strong":
            rep = probes.hh_strong_probe(params, args.p, args.R_list or cfg.R_doubling, per, cfg.seed, cfg.family)
        else:
            rep = probes.hh_strong_probe(params, args.p, args.R_list or cfg.R_growth, per, witness=args.mode)
        _emit(args, probes.REPORT_COLUMNS, report_rows(rep, cfg.timing), cfg)
    elif cmd == "tij-probe":
        from .experiments import ij_slope, tij_slope

        slope, off, conv = tij_slope(dims, args.i, args.j, tol=cfg.tol)
        bound = tij_envelope(dims, args.i, args.j, args.q)
        dj = dims.d1 if args.j == 1 else dims.d2
        rows = [("T", dims.d1, dims.d2, dims.case(), f"{args.i}{args.j}", args.q, bound, slope, off,
                 conv and off == 0 and slope <= bound + 0.1)]
        e = ij_exponent(dj, args.q)
        s = ij_slope(dj, args.q)
        rows.append(("I", dims.d1, dims.d2, dims.case(), f"{args.j}", args.q, e, s, 0.0, abs(s - e) <= 0.05))
        _emit(args, BY_ID["tij-envelopes"].columns, rows, cfg)
    elif cmd == "counterexample":
        spec = CounterexampleSpec(dims, max(args.R_list or cfg.R_growth), args.beta)
        rep = probes.riesz_counterexample_probe(dims, args.R_list or cfg.R_growth, cfg.nodes, spec.beta)
        rows = list(report_rows(rep, cfg.timing))
        _emit(args, probes.REPORT_COLUMNS, rows, cfg)
        R = max(rep.R)
        print(f"# model image at x=1, R={cell(float(R))}: "
              f"{cell(counterexample_image(CounterexampleSpec(dims, R, spec.beta)))}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list-experiments":
        width = max(len(e.id) for e in EXPERIMENTS)
        for e in EXPERIMENTS:
            print(f"{e.id:<{width}}  {e.reference}")
        return EXIT_OK
    try:
        cfg = load_config(args.config, overrides=_overrides(args))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "run":
        return run(cfg, Path(cfg.get("run", "out")), cfg.get("run", "threads"))
    try:
        return _single(args, cfg)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
