"""Command-line interface.

One subcommand per experiment family:

* ``dist``   tabulate Gumbel / corrected CDFs and PDFs
* ``mc``     Monte Carlo maxima of AR(1)-correlated Gaussian chains
* ``graph``  timing-graph path enumeration, covariance, full analysis
* ``noniid`` maximum statistics under non-identical component parameters

Commands emit data files (CSV/JSON), never images; every run writes a
manifest sidecar recording the command, parameters, seed, and tool
version.  With a fixed seed, the data files are bitwise reproducible for
any worker count.  Exit codes: 0 success, 2 argument/validation error,
3 input parse error, 4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .corrections import (
    CorrelationSum,
    EpsilonMatrix,
    ar1_correlation_sum,
    corrected_cdf,
    corrected_pdf,
    correlation_sum,
    validity_check,
    ORDERS,
)
from .errors import (
    CorrmaxError,
    DomainError,
    GraphError,
    PathExplosionError,
)
from .gumbel import scaling_constants
from .montecarlo import (
    Ar1Model,
    McConfig,
    NonIidConfig,
    non_iid_experiment,
    sample_max_distribution,
    stats_dict,
    write_samples_csv,
)
from .timing_graph import (
    DEFAULT_PATH_CAP,
    accumulated_delay_params,
    enumerate_paths,
    graph_delay_analysis,
    load_graph,
    normalize_source_sink,
    path_covariance,
)

OUTDIR_ENV = "CORRMAX_OUTDIR"

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_PARSE = 3
_EXIT_CAP = 4


def _fmt(x: float) -> str:
    """17-significant-digit decimal; round-trips to the same float."""
    return format(float(x), ".17g")


def _outdir(args) -> Path:
    if args.outdir is not None:
        out = Path(args.outdir)
    else:
        out = Path(os.environ.get(OUTDIR_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(path: Path, command: str, args, seed) -> None:
    params = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in sorted(vars(args).items())
        if k not in ("func",) and v is not None
    }
    _write_json(path, {
        "command": command,
        "parameters": params,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    })


def _validity_dict(report) -> dict:
    return {
        "smallness_ok": report.smallness_ok,
        "max_abs_eps": report.max_abs_eps,
        "cdf_monotone": report.cdf_monotone,
        "cdf_bounded": report.cdf_bounded,
        "pdf_nonnegative": report.pdf_nonnegative,
        "z_violations": list(report.z_violations),
    }


def _load_epsilon(path: str) -> EpsilonMatrix:
    """Load an explicit matrix: zero diagonal taken as-is, unit diagonal
    treated as a covariance whose diagonal is stripped."""
    m = np.loadtxt(path, delimiter=None, ndmin=2)
    diag = np.diag(m)
    if np.all(diag == 0.0):
        return EpsilonMatrix(entries=m)
    if np.allclose(diag, 1.0, rtol=0.0, atol=1e-12):
        return EpsilonMatrix.from_covariance(m)
    raise DomainError(
        "--eps-file matrix must have an all-zero (epsilon) or all-one "
        "(covariance) diagonal"
    )


def _cmd_dist(args) -> int:
    outdir = _outdir(args)
    prefix = args.out or f"dist_{args.kind}_n{args.n}"
    if args.z_max <= args.z_min:
        print("error: --z-max must exceed --z-min", file=sys.stderr)
        return _EXIT_USAGE
    if args.steps < 2:
        print("error: --steps must be >= 2", file=sys.stderr)
        return _EXIT_USAGE

    params = scaling_constants(args.n)
    if args.kind == "gumbel":
        s, max_abs_eps = CorrelationSum(0.0), 0.0
        order = "first"  # any order: with S = 0 they all reduce to Gumbel
    else:
        order = args.kind
        if args.eps_file is not None:
            eps = _load_epsilon(args.eps_file)
            s, max_abs_eps = correlation_sum(eps), eps.max_abs()
        else:
            if args.rho is None:
                print(
                    "error: --rho or --eps-file required for corrected "
                    "distributions", file=sys.stderr,
                )
                return _EXIT_USAGE
            if not (0.0 <= args.rho < 1.0):
                print("error: --rho must lie in [0, 1)", file=sys.stderr)
                return _EXIT_USAGE
            # closed form: no n x n matrix for the AR(1) route
            s = ar1_correlation_sum(args.n, args.rho)
            max_abs_eps = args.rho

    z = np.linspace(args.z_min, args.z_max, args.steps)
    cdf = corrected_cdf(z, params, s, order)
    pdf = corrected_pdf(z, params, s, order)
    report = validity_check(params, s, max_abs_eps, z, order=order)
    if args.clamp:
        cdf = np.clip(cdf, 0.0, 1.0)
        pdf = np.clip(pdf, 0.0, None)

    csv_path = outdir / f"{prefix}.csv"
    with open(csv_path, "w") as fh:
        fh.write("z,cdf,pdf\n")
        for zi, ci, pi in zip(z, cdf, pdf):
            fh.write(f"{_fmt(zi)},{_fmt(ci)},{_fmt(pi)}\n")
    _write_json(outdir / f"{prefix}.json", {
        "kind": args.kind,
        "order": order,
        "n": params.n,
        "alpha": params.alpha,
        "beta": params.beta,
        "s": s.s,
        "clamped": bool(args.clamp),
        "validity": _validity_dict(report),
    })
    _write_manifest(outdir / f"{prefix}.manifest.json", "dist", args, None)
    print(f"wrote {csv_path}")
    return _EXIT_OK


def _parse_sweep(spec: str) -> list[float]:
    try:
        lo_s, hi_s, step_s = spec.split(":")
        lo, hi, step = float(lo_s), float(hi_s), float(step_s)
    except ValueError:
        raise DomainError("--rho-sweep must look like LO:HI:STEP")
    if step <= 0 or hi < lo:
        raise DomainError("--rho-sweep requires STEP > 0 and HI >= LO")
    values = []
    k = 0
    while True:
        v = lo + k * step
        if v > hi + 1e-12:
            break
        values.append(round(v, 12))
        k += 1
    return values


def _cmd_mc(args) -> int:
    outdir = _outdir(args)
    cfg = McConfig(seed=args.seed, reps=args.reps, workers=args.workers)

    if args.rho_sweep is not None:
        rhos = _parse_sweep(args.rho_sweep)
        for rho in rhos:
            if not (0.0 <= rho <= 1.0):
                print("error: --rho-sweep values must lie in [0, 1]",
                      file=sys.stderr)
                return _EXIT_USAGE
        prefix = args.out or f"mc_n{args.n}_sweep"
        csv_path = outdir / f"{prefix}.csv"
        with open(csv_path, "w") as fh:
            fh.write("rho,mean,std,stderr\n")
            for rho in rhos:
                res = sample_max_distribution(
                    Ar1Model(n=args.n, rho=rho, sigma=args.sigma), cfg
                )
                fh.write(
                    f"{_fmt(rho)},{_fmt(res.mean)},{_fmt(res.std)},"
                    f"{_fmt(res.stderr)}\n"
                )
        _write_manifest(outdir / f"{prefix}.manifest.json", "mc", args, args.seed)
        print(f"wrote {csv_path}")
        return _EXIT_OK

    if args.rho is None:
        print("error: --rho or --rho-sweep is required", file=sys.stderr)
        return _EXIT_USAGE
    if not (0.0 <= args.rho <= 1.0):
        print("error: --rho must lie in [0, 1]", file=sys.stderr)
        return _EXIT_USAGE
    prefix = args.out or f"mc_n{args.n}_rho{args.rho}"
    result = sample_max_distribution(
        Ar1Model(n=args.n, rho=args.rho, sigma=args.sigma), cfg
    )
    samples_path = outdir / f"{prefix}_samples.csv"
    write_samples_csv(result, samples_path)
    stats = stats_dict(result)
    stats.update({"n": args.n, "rho": args.rho, "sigma": args.sigma,
                  "seed": args.seed})
    _write_json(outdir / f"{prefix}_stats.json", stats)
    _write_manifest(outdir / f"{prefix}.manifest.json", "mc", args, args.seed)
    print(f"wrote {samples_path}")
    return _EXIT_OK


def _cmd_graph(args) -> int:
    outdir = _outdir(args)
    graph = load_graph(args.graph_file)
    stem = Path(args.graph_file).stem
    norm = normalize_source_sink(graph)

    if args.action == "paths":
        ps = enumerate_paths(norm, cap=args.cap)
        for i, path in enumerate(ps.paths):
            mean, std = accumulated_delay_params(norm, path)
            seq = " -> ".join(ps.node_sequence(i, norm))
            print(
                f"path {i}: length {ps.lengths[i]}, "
                f"mean {_fmt(mean)}, std {_fmt(std)}: {seq}"
            )
        return _EXIT_OK

    if args.action == "cov":
        ps = enumerate_paths(norm, cap=args.cap)
        pc = path_covariance(ps, norm)
        prefix = args.out or f"{stem}_cov"
        csv_path = outdir / f"{prefix}.csv"
        n = pc.matrix.shape[0]
        with open(csv_path, "w") as fh:
            fh.write(",".join(f"path_{j}" for j in range(n)) + "\n")
            for row in pc.matrix:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        _write_manifest(outdir / f"{prefix}.manifest.json", "graph", args, None)
        print(f"wrote {csv_path}")
        return _EXIT_OK

    # analyze
    cfg = McConfig(seed=args.seed, reps=args.reps, workers=args.workers)
    analysis = graph_delay_analysis(
        graph, cfg, order=args.order, cap=args.cap, z_steps=args.z_steps
    )
    prefix = args.out or f"{stem}_analysis"
    doc = {
        "n_paths": analysis.n_paths,
        "lengths": list(analysis.lengths),
        "path_means": [float(v) for v in analysis.path_means],
        "path_stds": [float(v) for v in analysis.path_stds],
        "covariance": [[float(v) for v in row]
                       for row in analysis.covariance.matrix],
        "s": analysis.s,
        "order": analysis.order,
        "nominal_mean": analysis.nominal_mean,
        "nominal_std": analysis.nominal_std,
        "gumbel": None if analysis.gumbel is None else {
            "n": analysis.gumbel.n,
            "alpha": analysis.gumbel.alpha,
            "beta": analysis.gumbel.beta,
        },
        "z": [float(v) for v in analysis.z_grid],
        "cdf": [float(v) for v in analysis.cdf],
        "pdf": [float(v) for v in analysis.pdf],
        "validity": None if analysis.validity is None
        else _validity_dict(analysis.validity),
        "analytic_mean": analysis.analytic_mean,
        "mc": stats_dict(analysis.mc),
        "mc_mean_gap": analysis.mc_mean_gap,
    }
    json_path = outdir / f"{prefix}.json"
    _write_json(json_path, doc)
    _write_manifest(outdir / f"{prefix}.manifest.json", "graph", args, args.seed)
    print(f"wrote {json_path}")
    return _EXIT_OK


def _cmd_noniid(args) -> int:
    outdir = _outdir(args)
    try:
        n_grid = tuple(int(tok) for tok in args.n_grid.split(","))
    except ValueError:
        print("error: --n-grid must be a comma-separated integer list",
              file=sys.stderr)
        return _EXIT_USAGE
    cfg = NonIidConfig(
        n_grid=n_grid, mu=args.mu, sigma=args.sigma,
        delta_mu=args.delta_mu, delta_sigma=args.delta_sigma,
        reps=args.reps, seed=args.seed, workers=args.workers,
        freeze_deviations=args.freeze_deviations,
    )
    rows = non_iid_experiment(cfg)
    prefix = args.out or "noniid"
    csv_path = outdir / f"{prefix}.csv"
    with open(csv_path, "w") as fh:
        fh.write("n,mean,std,stderr\n")
        for n, mean, std in rows:
            fh.write(
                f"{n},{_fmt(mean)},{_fmt(std)},"
                f"{_fmt(std / np.sqrt(cfg.reps))}\n"
            )
    _write_manifest(outdir / f"{prefix}.manifest.json", "noniid", args, args.seed)
    print(f"wrote {csv_path}")
    return _EXIT_OK


def _add_common_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output file prefix")
    p.add_argument("--outdir", help=f"output directory (or ${OUTDIR_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrmax",
        description="Correlated Gaussian extremes for path-based SSTA",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("dist", help="tabulate distribution curves")
    p_dist.add_argument("kind", choices=("gumbel",) + ORDERS)
    p_dist.add_argument("--n", type=int, required=True,
                        help="number of correlated variables")
    p_dist.add_argument("--rho", type=float,
                        help="AR(1) correlation coefficient in [0, 1)")
    p_dist.add_argument("--eps-file",
                        help="explicit epsilon/covariance matrix file")
    p_dist.add_argument("--z-min", type=float, default=-1.0)
    p_dist.add_argument("--z-max", type=float, default=6.0)
    p_dist.add_argument("--steps", type=int, default=701)
    p_dist.add_argument("--clamp", action="store_true",
                        help="clamp CSV cdf/pdf into range (plotting aid)")
    _add_common_output(p_dist)
    p_dist.set_defaults(func=_cmd_dist)

    p_mc = sub.add_parser("mc", help="Monte Carlo maxima of AR(1) chains")
    p_mc.add_argument("--n", type=int, required=True)
    p_mc.add_argument("--rho", type=float)
    p_mc.add_argument("--rho-sweep", help="LO:HI:STEP sweep over rho")
    p_mc.add_argument("--sigma", type=float, default=1.0)
    p_mc.add_argument("--reps", type=int, default=10_000)
    p_mc.add_argument("--seed", type=int, required=True)
    p_mc.add_argument("--workers", type=int, default=1)
    _add_common_output(p_mc)
    p_mc.set_defaults(func=_cmd_mc)

    p_graph = sub.add_parser("graph", help="timing-graph analysis")
    p_graph.add_argument("action", choices=("paths", "cov", "analyze"))
    p_graph.add_argument("graph_file")
    p_graph.add_argument("--cap", type=int, default=DEFAULT_PATH_CAP,
                         help="maximum number of enumerated paths")
    p_graph.add_argument("--order", choices=ORDERS, default="second")
    p_graph.add_argument("--reps", type=int, default=10_000)
    p_graph.add_argument("--seed", type=int, default=0)
    p_graph.add_argument("--workers", type=int, default=1)
    p_graph.add_argument("--z-steps", type=int, default=501)
    _add_common_output(p_graph)
    p_graph.set_defaults(func=_cmd_graph)

    p_non = sub.add_parser("noniid", help="non-identical components experiment")
    p_non.add_argument("--n-grid", required=True,
                       help="comma-separated list of n values")
    p_non.add_argument("--mu", type=float, default=0.0)
    p_non.add_argument("--sigma", type=float, default=1.0)
    p_non.add_argument("--delta-mu", type=float, default=0.0)
    p_non.add_argument("--delta-sigma", type=float, default=0.0)
    p_non.add_argument("--reps", type=int, default=10_000)
    p_non.add_argument("--seed", type=int, required=True)
    p_non.add_argument("--workers", type=int, default=1)
    p_non.add_argument("--freeze-deviations", action="store_true",
                       help="draw per-component deviations once per n")
    _add_common_output(p_non)
    p_non.set_defaults(func=_cmd_noniid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PathExplosionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CAP
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_PARSE
    except (DomainError, CorrmaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
