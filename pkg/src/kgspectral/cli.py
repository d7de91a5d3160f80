"""Command-line front end: ``kgspectral {run,sweep,exact,order}``.

Exit codes: 0 success, 2 usage or configuration error, 3 solver
non-convergence in ``run`` mode.
"""

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from . import bench, problems, spectral
from .errors import ContractError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3

log = logging.getLogger("kgspectral")


@contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            yield fh


def _cmd_run(args):
    values = bench.load_config(args.config, args.set)
    config = bench.RunConfig.from_mapping(values)
    outdir = args.output or config.output_path
    result = bench.run_single(config)
    bench.write_run(result, outdir)
    for t, eu, ev in sorted(result.errors):
        print(f"t={bench.fmt(t)} error_u={bench.fmt(eu)} error_v={bench.fmt(ev)}")
    if not result.converged:
        exc = result.failure
        print(
            f"non-convergence: N={result.grid.N} dt={bench.fmt(config.dt)} step={exc.step_index} "
            f"residual={bench.fmt(exc.residual)}",
            file=sys.stderr,
        )
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _cmd_sweep(args):
    values = bench.load_config(args.config, args.set)
    config = bench.SweepConfig.from_mapping(values)
    rows = bench.run_sweep(config, jobs=args.jobs)
    with _open_out(args.output) as fh:
        bench.write_sweep(rows, fh, timing=not args.no_timing)
    return EXIT_OK


def _cmd_exact(args):
    kwargs = {}
    if args.L is not None:
        kwargs["L"] = args.L
    prob = problems.make_problem(args.problem, **kwargs)
    grid = spectral.GridSpec(prob.L, args.N, args.J) if args.J else prob.default_grid(args.N)
    times = [bench.parse_number(t) for t in args.t.split(",") if t.strip()]
    rows = bench.exact_table(prob, grid, times)
    with _open_out(args.output) as fh:
        bench.write_exact(rows, fh)
    return EXIT_OK


def _cmd_order(args):
    try:
        with open(args.input, newline="") as fh:
            rows = bench.read_sweep(fh)
    except OSError as exc:
        raise bench.ConfigError(f"cannot read {args.input}: {exc}") from None
    with _open_out(args.output) as fh:
        bench.write_orders(bench.orders_from_sweep(rows), fh)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="kgspectral", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evolve one configuration and write snapshots/errors")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--output", help="output directory (default: output_path from config)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run every (N, dt) cell and write the error table")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--output", help="CSV path (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--no-timing", action="store_true", help="write wall_seconds as 0 for byte-stable output")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("exact", help="tabulate an exact solution on the collocation grid")
    p.add_argument("--problem", required=True, choices=sorted(n for n in problems.PROBLEMS if n != "custom-polynomial"))
    p.add_argument("--t", required=True, help="comma-separated times")
    p.add_argument("--N", type=int, default=32)
    p.add_argument("--J", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--output", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("order", help="observed convergence orders from a sweep CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_order)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
