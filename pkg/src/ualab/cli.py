"""Command-line front end: run, plot, validate.

Exit codes: 0 success, 2 invalid configuration, 3 numerical or I/O
failure inside an experiment.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import load_config
from .errors import ConfigInvalid, UALabError
from .runner import run
from .svg import emit_trajectory_svg
from .tables import read_csv
from .trajectories import TrajectoryBundle


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ualab",
        description="Numerical experiments on rank-one multiplicative "
                    "perturbations of Haar unitary matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--output-root", default=None,
                       help="override the default output root directory")

    p_plot = sub.add_parser("plot", help="render a trajectory CSV to SVG")
    p_plot.add_argument("csv", help="trajectories CSV emitted by a run")
    p_plot.add_argument("-o", "--output", required=True, help="SVG output path")

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("config", help="path to a JSON experiment config")
    return parser


def _bundle_from_csv(path) -> TrajectoryBundle:
    rows = read_csv(path, "trajectories")
    if not rows:
        raise UALabError(f"{path} contains no trajectory rows")
    by_path = {}
    for row in rows:
        by_path.setdefault(row["path"], []).append((row["t"], row["re"], row["im"]))
    ids = sorted(by_path)
    t_grid = np.array([t for t, _, _ in by_path[ids[0]]])
    paths = np.empty((len(ids), t_grid.size), dtype=complex)
    for j, pid in enumerate(ids):
        entries = by_path[pid]
        if len(entries) != t_grid.size or any(
                entries[k][0] != t_grid[k] for k in range(t_grid.size)):
            raise UALabError(f"path {pid} does not share the common time grid")
        paths[j] = [complex(re, im) for _, re, im in entries]
    return TrajectoryBundle(t_grid=t_grid, paths=paths,
                            matching_costs=np.empty(0), refinement_count=0,
                            ambiguous_steps=(), method="track")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            manifest = run(config, output_root=args.output_root)
            print(f"{manifest.experiment}: wrote {len(manifest.files)} file(s) "
                  f"to {manifest.output_dir}")
            for name, digest in sorted(manifest.files.items()):
                print(f"  {name}  sha256:{digest[:16]}")
            return 0
        if args.command == "plot":
            bundle = _bundle_from_csv(args.csv)
            with open(args.output, "w", encoding="utf-8") as handle:
                handle.write(emit_trajectory_svg(bundle))
            print(f"wrote {args.output} ({bundle.n} paths)")
            return 0
        if args.command == "validate":
            config = load_config(args.config)
            print(f"ok: {config.experiment} (N={config.n}, seed={config.seed})")
            return 0
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except UALabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
