"""Command-line front end.

Subcommands: analytic (closed-form curve/field exports), optimize (iterative
or single-pass inverse design from a JSON config), validate (vacuum error
protocol + reflector benchmark), antinodes (mirror antinode table, optionally
scheduling one optimization per antinode), greens (Green's-field dump for a
geometry file).

Exit codes: 0 success, 1 runtime failure, 2 usage/configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .adjoint import chi, vacuum_merit_density
from .coherence import antinodes, reflector_coherence
from .fdtd import FdtdConfig, greens_field
from .geometry import OptimizationRegion, read_geometry, write_geometry
from .optimizer import (
    OptimizationConfig,
    run_optimization,
    single_pass,
    write_trace,
    _trace_header,
    _trace_row,
)
from .validation import (
    reflector_benchmark,
    vacuum_error_protocol,
    write_benchmark_table,
    write_budget_table,
)

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cohdesign",
        description="Environment-induced coherence: analysis, validation and "
        "inverse design of dielectric structures.",
    )
    p.add_argument("--threads", type=int, default=None,
                   help="cap the solver worker-thread count")
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analytic", help="export closed-form datasets")
    pa.add_argument("curve", choices=("reflector", "merit-slices"))
    pa.add_argument("--zeta-max", type=float, default=3.0)
    pa.add_argument("--step", type=float, default=0.005)
    pa.add_argument("--extent", type=float, default=1.5,
                    help="half-extent of the merit-slice window (zeta units)")
    pa.add_argument("--out", required=True,
                    help="output file (reflector) or file prefix (merit-slices)")

    po = sub.add_parser("optimize", help="run the inverse-design loop")
    po.add_argument("config", help="JSON run configuration")
    po.add_argument("--single-pass", action="store_true",
                    help="fill all positive-merit sites and evaluate once")
    po.add_argument("--workdir", default=None,
                    help="checkpoint/trace directory (overrides config)")

    pv = sub.add_parser("validate", help="vacuum error protocol + reflector benchmark")
    pv.add_argument("--resolutions", type=int, nargs="+", default=[12])
    pv.add_argument("--samples", type=int, default=50)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--zeta", type=float, nargs="+", default=None,
                    help="benchmark atom heights (default: node-aligned grid)")
    pv.add_argument("--out", default=None, help="output file prefix")

    pn = sub.add_parser("antinodes", help="mirror antinode table")
    pn.add_argument("--count", type=int, default=5)
    pn.add_argument("--optimize", action="store_true",
                    help="run one optimization per antinode")
    pn.add_argument("--iterations", type=int, default=20)
    pn.add_argument("--resolution", type=int, default=12)
    pn.add_argument("--workdir", default="antinode_runs")

    pg = sub.add_parser("greens", help="dump the Green's field of a geometry")
    pg.add_argument("geometry", help="geometry file")
    pg.add_argument("--resolution", type=int, default=12)
    pg.add_argument("--out", required=True)
    return p


def _cmd_analytic(args) -> int:
    if args.step <= 0 or args.zeta_max <= args.step or args.extent <= 0:
        raise ValueError("empty range: require step > 0 and zeta-max > step")
    if args.curve == "reflector":
        n = int(round(args.zeta_max / args.step))
        lines = ["# cohdesign reflector coherence v1",
                 "# columns: zeta rho abs_rho"]
        for k in range(1, n + 1):
            z = k * args.step
            r = reflector_coherence(z)
            lines.append(f"{z:.6f} {r:+.10e} {abs(r):.10e}")
        Path(args.out).write_text("\n".join(lines) + "\n")
        print(f"wrote {n} rows to {args.out}")
        return 0
    # merit-slices: the vacuum merit density on the three coordinate planes
    ticks = np.arange(-args.extent, args.extent + 0.5 * args.step, args.step)
    for plane, (ia, ib) in (("x", (1, 2)), ("y", (0, 2)), ("z", (0, 1))):
        lines = ["# cohdesign vacuum merit slice v1",
                 f"# plane: zeta_{plane} = 0",
                 "# columns: zeta_a zeta_b deltaF"]
        for a in ticks:
            for b in ticks:
                zpp = np.zeros(3)
                zpp[ia], zpp[ib] = a, b
                if chi(zpp) == 0.0:
                    continue
                lines.append(f"{a:.6f} {b:.6f} {vacuum_merit_density(zpp):+.10e}")
        path = f"{args.out}_{plane}plane.txt"
        Path(path).write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")
    return 0


_FDTD_KEYS = {
    "resolution", "box_half_extent", "pml_thickness", "courant_factor",
    "source_fractional_bandwidth", "decay_threshold", "max_steps",
}
_TOP_KEYS = {
    "scenario", "rotation", "atom_zeta", "max_iterations",
    "dipole_d", "dipole_mu", "region", "fdtd", "output",
}
_REGION_KEYS = {"nx", "ny", "nz"}
_OUTPUT_KEYS = {"workdir", "trace", "geometry"}


def _load_run_config(path):
    try:
        with open(path) as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    for section, allowed in (
        (doc, _TOP_KEYS),
        (doc.get("fdtd", {}), _FDTD_KEYS),
        (doc.get("region", {}), _REGION_KEYS),
        (doc.get("output", {}), _OUTPUT_KEYS),
    ):
        unknown = set(section) - allowed
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    fdtd = FdtdConfig(**doc.get("fdtd", {}))
    region = OptimizationRegion(**doc.get("region", {}))
    kwargs = {k: doc[k] for k in
              ("scenario", "rotation", "atom_zeta", "max_iterations",
               "dipole_d", "dipole_mu") if k in doc}
    try:
        config = OptimizationConfig(fdtd=fdtd, region=region, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: {exc}") from exc
    return config, doc.get("output", {})


def _cmd_optimize(args) -> int:
    config, output = _load_run_config(args.config)
    workdir = args.workdir or output.get("workdir")
    trace_path = output.get("trace", "trace.txt")
    geom_path = output.get("geometry", "geometry.txt")
    if workdir:
        Path(workdir).mkdir(parents=True, exist_ok=True)
        trace_path = str(Path(workdir) / trace_path)
        geom_path = str(Path(workdir) / geom_path)

    def report(rec):
        print(
            f"iter {rec.iteration:4d}  block {rec.block}  "
            f"|rho12| = {abs(rec.rho12):.6f}  dF_max = {rec.delta_f_max:+.3e}  "
            f"({rec.wall_time:.1f}s)",
            flush=True,
        )

    if args.single_pass:
        geometry, rec = single_pass(config)
        report(rec)
        write_geometry(geom_path, geometry,
                       extra_header={"scenario": config.scenario,
                                     "rotation": config.rotation,
                                     "mode": "single-pass"})
        with open(trace_path, "w") as f:
            f.write("\n".join(_trace_header(config)) + "\n")
            f.write(_trace_row(rec) + "\n")
        print(f"single-pass: {len(geometry.blocks)} blocks, "
              f"|rho12| = {abs(rec.rho12):.6f}")
        return 0

    trace = run_optimization(config, workdir=workdir, progress=report)
    write_trace(trace_path, trace)
    write_geometry(geom_path, trace.best_geometry(),
                   extra_header={"scenario": config.scenario,
                                 "rotation": config.rotation,
                                 "best_iteration": trace.best_iteration})
    print(f"best iteration {trace.best_iteration}: "
          f"peak |rho12| = {trace.peak_coherence:.6f}")
    return 0


def _cmd_validate(args) -> int:
    budgets, results = {}, []
    for res in args.resolutions:
        config = FdtdConfig(resolution=res)
        result = vacuum_error_protocol(config, n_samples=args.samples,
                                       seed=args.seed)
        budgets[res] = result.budget
        results.append(result)
        b = result.budget
        print(f"{res} ppw budget: systematic {b.systematic:.3e}  "
              f"random {b.random:.3e}  total {b.total:.3e}  "
              f"({b.n_samples} samples, {result.n_failures} failures)")
    points = reflector_benchmark(args.resolutions, budgets, zeta_grid=args.zeta)
    n_flagged = 0
    for p in points:
        mark = " FLAGGED" if p.flagged else ""
        n_flagged += p.flagged
        print(f"{p.resolution} ppw  zeta={p.zeta_snapped:.4f}  "
              f"fdtd {p.abs_rho_fdtd:.5f}  analytic {p.abs_rho_analytic:.5f}  "
              f"diff {p.difference:.2e} / budget {p.budget_total:.2e}{mark}")
    if args.out:
        write_budget_table(f"{args.out}_budget.txt", results)
        write_benchmark_table(f"{args.out}_benchmark.txt", points)
    print(f"{n_flagged} flagged point(s) out of {len(points)}")
    return 1 if n_flagged else 0


def _cmd_antinodes(args) -> int:
    if args.count < 1:
        raise ValueError("count must be at least 1")
    zs = antinodes(args.count)
    print("# n zeta_n abs_rho_analytic")
    for n, z in enumerate(zs, start=1):
        print(f"{n} {z:.5f} {abs(reflector_coherence(z)):.6f}")
    if args.optimize:
        for n, z in enumerate(zs, start=1):
            config = OptimizationConfig(
                scenario="backplate", rotation="perpendicular", atom_zeta=z,
                max_iterations=args.iterations,
                fdtd=FdtdConfig(resolution=args.resolution),
            )
            workdir = Path(args.workdir) / f"antinode_{n}"
            print(f"optimizing antinode {n} (zeta = {z:.5f}) in {workdir}")
            trace = run_optimization(config, workdir=workdir)
            print(f"antinode {n}: peak |rho12| = {trace.peak_coherence:.6f} "
                  f"at iteration {trace.best_iteration}")
    return 0


def _cmd_greens(args) -> int:
    geometry = read_geometry(args.geometry)
    gf = greens_field(geometry, FdtdConfig(resolution=args.resolution))
    gf.dump(args.out)
    print(f"wrote Green's field to {args.out}")
    return 0


_COMMANDS = {
    "analytic": _cmd_analytic,
    "optimize": _cmd_optimize,
    "validate": _cmd_validate,
    "antinodes": _cmd_antinodes,
    "greens": _cmd_greens,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None:
        import numba

        numba.set_num_threads(args.threads)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
