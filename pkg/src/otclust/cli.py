"""Command-line surface: balance, cluster, adapt, render, generate.

Exit codes: 0 on success, 1 on any input/validation problem, 2 when a
solve runs out of iterations (partial state is still written so the run
can be inspected).  All outputs are deterministic: rerunning a command
with the same inputs and seed reproduces every file byte for byte.
"""

import argparse
import os
import sys
from contextlib import ExitStack
from pathlib import Path

import numpy as np

from otclust.adaptation import LabeledMeasure, adapt, classify, evaluate, make_synthetic_pair
from otclust.clustering import ClusteringConfig, vwc
from otclust.diagram import power_diagram
from otclust.errors import (
    DegenerateClusterError,
    DegenerateConfigurationError,
    InvalidMeasureError,
    NonConvergenceError,
    UnsupportedModeError,
    UnsupportedRenderError,
)
from otclust.io import (
    load_json,
    read_capacities_csv,
    read_points_csv,
    write_json,
    write_plan_csv,
    write_points_csv,
)
from otclust.measures import CentroidSet, EmpiricalMeasure, bounding_domain
from otclust.render import render_svg
from otclust.solver import SolverConfig, solve_vot, solve_vot_gd

_THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports problems instead of calling sys.exit(2)."""

    def error(self, message):
        raise _UsageError(message)


def _apply_thread_cap():
    """Honor OTCLUST_THREADS (0 or unset = automatic) for BLAS pools."""
    raw = os.environ.get("OTCLUST_THREADS", "").strip()
    if not raw or raw == "0":
        return
    if not raw.isdigit():
        raise _UsageError(f"OTCLUST_THREADS must be a nonnegative integer, got {raw!r}")
    for var in _THREAD_ENV_VARS:
        os.environ[var] = raw


def build_parser():
    parser = _Parser(prog="otclust", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, mode_default="gd"):
        p.add_argument("--eps", type=float, default=1e-6, help="mass-balance tolerance")
        p.add_argument("--max-iter", type=int, default=1000, help="inner iteration cap")
        p.add_argument("--mode", choices=("newton", "gd"), default=mode_default,
                       help="inner solver (newton needs 2D data)")
        p.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--svg-size", type=int, default=640, help="SVG width in pixels")
        p.add_argument("--trace", action="store_true",
                       help="write per-iteration solver progress to trace.csv")

    p = sub.add_parser("solve-ot", help="balance one site set against a sample cloud")
    p.add_argument("--target", required=True, help="sample CSV (coordinates[,weight])")
    p.add_argument("--centroids", required=True, help="site CSV (coordinates)")
    p.add_argument("--nu", default="uniform",
                   help="'uniform' or a one-column capacities CSV")
    add_common(p)

    p = sub.add_parser("cluster", help="capacity-constrained clustering of a sample cloud")
    p.add_argument("--target", required=True, help="sample CSV (coordinates[,weight])")
    p.add_argument("--k", type=int, help="number of sites (seeded placement)")
    p.add_argument("--centroids", help="initial site CSV (overrides --k)")
    p.add_argument("--nu", default="uniform",
                   help="'uniform' or a one-column capacities CSV")
    add_common(p)

    p = sub.add_parser("adapt", help="transfer source labels onto an unlabeled target")
    p.add_argument("--source", required=True, help="labeled source CSV (needs a label column)")
    p.add_argument("--target", required=True,
                   help="target CSV; a label column, if present, is used for scoring only")
    add_common(p)

    p = sub.add_parser("render", help="draw a diagram for given sites (and samples)")
    p.add_argument("--target", help="sample CSV to scatter under the diagram")
    p.add_argument("--centroids", required=True, help="site CSV")
    p.add_argument("--offsets", help="JSON file with an 'offsets' array (default: zeros)")
    add_common(p)

    p = sub.add_parser("gen-synthetic", help="write the seeded two-class benchmark pair")
    add_common(p)
    return parser


def _load_measure(path):
    table = read_points_csv(path)
    weights = table.weights
    if weights is None:
        weights = np.full(table.points.shape[0], 1.0 / table.points.shape[0])
    return EmpiricalMeasure(table.points, weights), table


def _load_sites(path, nu_arg, total_mass):
    table = read_points_csv(path)
    k = table.points.shape[0]
    if nu_arg == "uniform":
        capacities = np.full(k, total_mass / k)
    else:
        capacities = read_capacities_csv(nu_arg)
    return CentroidSet(table.points, capacities)


def _maybe_render(out, m_points, positions, h, size, labels=None):
    if positions.shape[1] != 2:
        return
    domain = bounding_domain(np.vstack([m_points, positions]))
    diagram = power_diagram(positions, h, domain)
    render_svg(diagram, samples=m_points, path=out / "diagram.svg", size=size, labels=labels)


def _solver_payload(h, w, capacities, energy, iterations, mode, converged):
    return {
        "offsets": h,
        "masses": w,
        "capacities": capacities,
        "energy": float(energy),
        "iterations": int(iterations),
        "mode": mode,
        "converged": bool(converged),
    }


def _cmd_solve_ot(args, out, stack):
    m, _ = _load_measure(args.target)
    y = _load_sites(args.centroids, args.nu, m.total_mass)
    trace = None
    if args.trace:
        trace = stack.enter_context(open(out / "trace.csv", "w", encoding="utf-8", newline="\n"))
    cfg = SolverConfig(epsilon=args.eps, max_iter=args.max_iter, trace=trace)
    solve = solve_vot if args.mode == "newton" else solve_vot_gd
    try:
        result = solve(m, y, cfg)
    except NonConvergenceError as err:
        state = err.state
        if state is not None:
            write_json(out / "h.json", _solver_payload(
                state.h, state.w, y.capacities, state.energy,
                state.iteration, state.mode, False,
            ))
        print(f"error: {err}", file=sys.stderr)
        return 2
    write_json(out / "h.json", _solver_payload(
        result.h, result.w, y.capacities, result.energy,
        result.iterations, result.mode, True,
    ))
    write_plan_csv(out / "plan.csv", result.plan, m.weights)
    _maybe_render(out, m.points, y.positions, result.h, args.svg_size)
    return 0


def _cmd_cluster(args, out, stack):
    m, _ = _load_measure(args.target)
    y0 = None
    k = args.k
    nu = None
    if args.centroids:
        y0 = read_points_csv(args.centroids).points
        k = None
    elif k is None:
        raise _UsageError("cluster needs --k or --centroids")
    if args.nu != "uniform":
        nu = read_capacities_csv(args.nu)
    trace = None
    if args.trace:
        trace = stack.enter_context(open(out / "trace.csv", "w", encoding="utf-8", newline="\n"))
    cfg = ClusteringConfig(
        solver=SolverConfig(epsilon=args.eps, max_iter=args.max_iter, trace=trace),
        mode=args.mode,
        seed=args.seed,
    )
    try:
        result = vwc(m, k=k, y0=y0, config=cfg, nu=nu)
    except NonConvergenceError as err:
        state = err.state
        if state is not None:
            write_json(out / "result.json", _solver_payload(
                state.h, state.w, state.w, state.energy, state.iteration, state.mode, False,
            ))
        print(f"error: {err}", file=sys.stderr)
        return 2
    write_points_csv(out / "centroids.csv", result.centroids.positions,
                     weights=result.centroids.capacities, weight_name="weight")
    write_plan_csv(out / "plan.csv", result.plan, m.weights)
    write_json(out / "result.json", {
        "offsets": result.h,
        "masses": result.w,
        "capacities": result.centroids.capacities,
        "objective_trace": list(result.objective_trace),
        "w2_estimate": result.w2_estimate,
        "outer_iterations": result.outer_iterations,
        "termination": result.termination,
        "mode": args.mode,
        "converged": True,
    })
    _maybe_render(out, m.points, result.centroids.positions, result.h, args.svg_size)
    return 0


def _cmd_adapt(args, out, stack):
    src_m, src_table = _load_measure(args.source)
    if src_table.labels is None:
        raise _UsageError("adapt needs a 'label' column in the source CSV")
    source = LabeledMeasure(src_m, src_table.labels)
    tgt_m, tgt_table = _load_measure(args.target)
    cfg = ClusteringConfig(
        solver=SolverConfig(epsilon=args.eps, max_iter=args.max_iter),
        mode=args.mode,
        seed=args.seed,
    )
    try:
        model = adapt(source, tgt_m, cfg)
    except NonConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    predictions = classify(model, tgt_m.points)
    payload = {
        "k": model.centroids.k,
        "offsets": model.h,
        "objective_trace": list(model.clustering.objective_trace),
        "w2_estimate": model.clustering.w2_estimate,
        "termination": model.clustering.termination,
        "mode": args.mode,
    }
    if tgt_table.labels is not None:
        report = evaluate(predictions, tgt_table.labels)
        payload.update({
            "accuracy": report.accuracy,
            "sensitivity": report.sensitivity,
            "specificity": report.specificity,
            "tp": report.tp, "tn": report.tn, "fp": report.fp, "fn": report.fn,
        })
        print(report.table())
    write_json(out / "report.json", payload)
    write_points_csv(out / "transported.csv", model.centroids.positions,
                     weights=model.centroids.capacities, labels=model.labels,
                     weight_name="weight")
    write_plan_csv(out / "plan.csv", model.clustering.plan, tgt_m.weights)
    write_points_csv(out / "predictions.csv", tgt_m.points, labels=predictions)
    if tgt_m.dim == 2:
        _maybe_render(out, tgt_m.points, model.centroids.positions, model.h,
                      args.svg_size, labels=model.labels)
    return 0


def _cmd_render(args, out, stack):
    sites = read_points_csv(args.centroids)
    positions = sites.points
    if args.offsets:
        h = np.asarray(load_json(args.offsets)["offsets"], dtype=np.float64)
        if h.shape != (positions.shape[0],):
            raise ValueError(
                f"{args.offsets}: expected {positions.shape[0]} offsets, got {h.shape}"
            )
    else:
        h = np.zeros(positions.shape[0])
    samples = None
    cloud = positions
    if args.target:
        samples = read_points_csv(args.target).points
        cloud = np.vstack([samples, positions])
    if positions.shape[1] != 2:
        raise UnsupportedRenderError(f"can only draw 2D sites, got {positions.shape[1]}D")
    domain = bounding_domain(cloud)
    diagram = power_diagram(positions, h, domain)
    render_svg(diagram, samples=samples, path=out / "diagram.svg", size=args.svg_size)
    return 0


def _cmd_gen_synthetic(args, out, stack):
    source, target = make_synthetic_pair(seed=args.seed)
    write_points_csv(out / "source.csv", source.measure.points,
                     weights=source.measure.weights, labels=source.labels)
    write_points_csv(out / "target.csv", target.measure.points,
                     weights=target.measure.weights, labels=target.labels)
    write_json(out / "params.json", {
        "seed": args.seed,
        "n_source_per_class": source.measure.size // 2,
        "n_target_per_class": target.measure.size // 2,
        "classes": 2,
    })
    return 0


_HANDLERS = {
    "solve-ot": _cmd_solve_ot,
    "cluster": _cmd_cluster,
    "adapt": _cmd_adapt,
    "render": _cmd_render,
    "gen-synthetic": _cmd_gen_synthetic,
}


def run(argv):
    """Parse and dispatch; returns the process exit code."""
    try:
        _apply_thread_cap()
        args = build_parser().parse_args(argv)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with ExitStack() as stack:
            return _HANDLERS[args.command](args, out, stack)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (
        InvalidMeasureError,
        UnsupportedModeError,
        UnsupportedRenderError,
        DegenerateConfigurationError,
        DegenerateClusterError,
        ValueError,
        OSError,
    ) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except NonConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main(argv=None):
    return run(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":
    sys.exit(main())
