"""Experiment orchestration with atomic, digest-inventoried output.

Every experiment writes into a temporary sibling directory which is
renamed over the destination only after the manifest is in place, so an
interrupted run leaves nothing behind. Data files are deterministic given
the config (seed included); the manifest additionally records wall-clock
timings, which are the only non-reproducible bytes a rerun changes.
"""

from __future__ import annotations

import hashlib
import os
import shutil
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import cuestats, tables
from .config import ExperimentConfig
from .errors import IoError
from .model import UAModel, spectrum
from .rng import OFFSET_RUNNER, stream
from .rouche import EnsembleConfig, critical_window_stats, timescale_sweep
from .svg import emit_trajectory_svg
from .trajectories import integrate_ode, track
from .version import __version__

ENV_OUTPUT_ROOT = "UALAB_OUTPUT_ROOT"


@dataclass(frozen=True)
class RunManifest:
    """What a run produced: config, digests, summary numbers, timings."""

    experiment: str
    config: dict
    version: str
    wall_time_s: float
    stage_timings: dict
    files: dict
    results: dict
    output_dir: str


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _model_for(config: ExperimentConfig) -> UAModel:
    rng = stream(config.seed, stream_id=0, offset=OFFSET_RUNNER)
    return UAModel.sample(config.n, rng, seed=config.seed)


def _drive_trajectories(config: ExperimentConfig, outdir: Path):
    timings = {}
    tick = time.perf_counter()
    model = _model_for(config)
    bundle = track(model, config.t_grid.to_array())
    timings["compute"] = time.perf_counter() - tick

    tick = time.perf_counter()
    tables.write_csv(tables.bundle_records(bundle), "trajectories",
                     outdir / "trajectories.csv")
    (outdir / "trajectories.svg").write_text(emit_trajectory_svg(bundle),
                                             encoding="utf-8")
    timings["serialize"] = time.perf_counter() - tick

    det_err = float(np.max(np.abs(
        np.abs(np.prod(bundle.paths, axis=0)) - np.abs(bundle.t_grid))))
    results = {
        "paths": bundle.n,
        "grid_points": int(bundle.t_grid.size),
        "refinement_count": bundle.refinement_count,
        "ambiguous_steps": len(bundle.ambiguous_steps),
        "det_modulus_max_error": det_err,
    }
    return ["trajectories.csv", "trajectories.svg"], results, timings


def _drive_ode_compare(config: ExperimentConfig, outdir: Path):
    timings = {}
    grid = config.t_grid.to_array()
    tick = time.perf_counter()
    model = _model_for(config)
    tracked = track(model, grid)
    timings["track"] = time.perf_counter() - tick

    tick = time.perf_counter()
    integrated = integrate_ode(model, float(grid.min()), t_eval=grid)
    timings["integrate"] = time.perf_counter() - tick

    # the tracked bundle may carry refinement points; compare on the
    # requested grid only
    idx = {float(t): i for i, t in enumerate(tracked.t_grid)}
    cols = [idx[float(t)] for t in grid]
    deviation = float(np.max(np.abs(tracked.paths[:, cols] - integrated.paths)))

    tick = time.perf_counter()
    tables.write_csv(tables.bundle_records(tracked), "trajectories",
                     outdir / "track.csv")
    tables.write_csv(tables.bundle_records(integrated), "trajectories",
                     outdir / "ode.csv")
    timings["serialize"] = time.perf_counter() - tick
    results = {"max_deviation": deviation,
               "refinement_count": tracked.refinement_count}
    return ["track.csv", "ode.csv"], results, timings


def _drive_sweep(config: ExperimentConfig, outdir: Path):
    timings = {}
    tick = time.perf_counter()
    ensemble = EnsembleConfig(n=config.n, seed=config.seed, eps=config.eps,
                              delta=config.delta, threshold=config.threshold)
    result = timescale_sweep(ensemble, config.alpha_grid, config.trials,
                             workers=config.workers)
    timings["compute"] = time.perf_counter() - tick

    tick = time.perf_counter()
    tables.write_csv(tables.sweep_records(result), "sweep", outdir / "sweep.csv")
    timings["serialize"] = time.perf_counter() - tick
    results = {
        "cells": len(result.cells),
        "above_threshold": sum(
            cell.pass_fraction >= config.threshold for cell in result.cells),
    }
    return ["sweep.csv"], results, timings


def _drive_critical(config: ExperimentConfig, outdir: Path):
    timings = {}
    tick = time.perf_counter()
    rows = critical_window_stats(config.n, config.mu_grid, config.trials,
                                 a=config.a, b=config.b, seed=config.seed,
                                 workers=config.workers)
    timings["compute"] = time.perf_counter() - tick

    tick = time.perf_counter()
    tables.write_jsonl(rows, outdir / "critical.jsonl")
    timings["serialize"] = time.perf_counter() - tick
    results = {
        "rows": len(rows),
        "max_freq_ge2_b": max(r.freq_ge2_b for r in rows),
        "min_freq_empty_a": min(r.freq_empty_a for r in rows),
    }
    return ["critical.jsonl"], results, timings


def _drive_identities(config: ExperimentConfig, outdir: Path):
    timings = {}
    tick = time.perf_counter()
    reports = cuestats.identity_suite(config.n, config.trials,
                                      seed=config.seed, z=config.z)
    timings["compute"] = time.perf_counter() - tick

    tick = time.perf_counter()
    tables.write_jsonl(tables.identity_records(reports, seed=config.seed),
                       outdir / "identities.jsonl")
    timings["serialize"] = time.perf_counter() - tick
    verdicts = [r.verdict for r in reports]
    results = {
        "claims": len(reports),
        "passed": sum(v is True for v in verdicts),
        "failed": sum(v is False for v in verdicts),
        "monitored": sum(v is None for v in verdicts),
    }
    return ["identities.jsonl"], results, timings


def _drive_poissonized(config: ExperimentConfig, outdir: Path):
    timings = {}
    tick = time.perf_counter()
    records = []
    smallest = np.empty(config.trials)
    for i in range(config.trials):
        rng = stream(config.seed, stream_id=i, offset=OFFSET_RUNNER)
        snap = cuestats.poissonized_spectrum(config.n, config.k, rng)
        smallest[i] = float(np.min(np.abs(snap.eigenvalues)))
        records.extend(tables.snapshot_records(snap, trial=i, seed=config.seed))
    timings["compute"] = time.perf_counter() - tick

    tick = time.perf_counter()
    tables.write_csv(records, "spectra", outdir / "spectra.csv")
    timings["serialize"] = time.perf_counter() - tick
    results = {"trials": config.trials, "k": config.k,
               "mean_smallest_modulus": float(np.mean(smallest))}
    return ["spectra.csv"], results, timings


_DRIVERS = {
    "trajectories": _drive_trajectories,
    "ode-compare": _drive_ode_compare,
    "sweep": _drive_sweep,
    "critical": _drive_critical,
    "identities": _drive_identities,
    "poissonized": _drive_poissonized,
}


def resolve_output_dir(config: ExperimentConfig, output_root=None) -> Path:
    if config.output_dir:
        return Path(config.output_dir)
    root = output_root or os.environ.get(ENV_OUTPUT_ROOT, "runs")
    return Path(root) / config.experiment


def run(config: ExperimentConfig, output_root=None) -> RunManifest:
    """Execute the configured experiment and persist its outputs atomically."""
    started = time.perf_counter()
    final_dir = resolve_output_dir(config, output_root)
    if final_dir.exists() and not (final_dir / "manifest.json").exists():
        raise IoError(f"{final_dir} exists and is not a previous run directory")
    final_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{final_dir.name}.", dir=final_dir.parent))
    try:
        files, results, timings = _DRIVERS[config.experiment](config, tmp)
        digests = {name: _sha256(tmp / name) for name in files}
        manifest = RunManifest(
            experiment=config.experiment,
            config=dict(config.raw) if config.raw else _config_snapshot(config),
            version=__version__,
            wall_time_s=time.perf_counter() - started,
            stage_timings=timings,
            files=digests,
            results=results,
            output_dir=str(final_dir),
        )
        tables.write_jsonl([asdict(manifest)], tmp / "manifest.json")
        if final_dir.exists():
            shutil.rmtree(final_dir)
        os.replace(tmp, final_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return manifest


def _config_snapshot(config: ExperimentConfig) -> dict:
    snap = asdict(config)
    snap.pop("raw", None)
    if snap.get("t_grid") is None:
        snap.pop("t_grid", None)
    return snap
