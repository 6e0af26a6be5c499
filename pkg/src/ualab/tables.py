"""CSV and JSONL persistence with fixed schemas.

Three CSV schemas cover the experiment outputs (spectra, trajectories,
sweep cells); identity verdicts go to a JSONL ledger. Floats are printed
with 17 significant digits so a parse-back reproduces the doubles
exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, is_dataclass

import numpy as np

from .errors import IoError, SchemaMismatch

# column name -> (type, nullable)
SCHEMAS = {
    "spectra": (
        ("trial", int, False), ("seed", int, True), ("t", float, False),
        ("index", int, False), ("re", float, False), ("im", float, False),
    ),
    "trajectories": (
        ("path", int, False), ("t", float, False),
        ("re", float, False), ("im", float, False),
    ),
    "sweep": (
        ("alpha", float, False), ("t", float, False), ("N", int, False),
        ("trials", int, False), ("pass_fraction", float, False),
        ("ci_low", float, False), ("ci_high", float, False),
    ),
}


def _format_value(value, kind) -> str:
    if value is None:
        return ""
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise SchemaMismatch(f"expected integer, got {value!r}")
        return str(int(value))
    value = float(value)
    if not np.isfinite(value):
        raise SchemaMismatch(f"non-finite value {value!r}")
    return f"{value:.17g}"


def write_csv(records, schema_id: str, path) -> None:
    """Write records (dicts keyed exactly by the schema columns) to path."""
    if schema_id not in SCHEMAS:
        raise SchemaMismatch(f"unknown schema {schema_id!r}")
    schema = SCHEMAS[schema_id]
    names = [name for name, _, _ in schema]
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(names)
            for i, record in enumerate(records):
                if set(record) != set(names):
                    raise SchemaMismatch(
                        f"record {i} keys {sorted(record)} != schema {sorted(names)}")
                row = []
                for name, kind, nullable in schema:
                    value = record[name]
                    if value is None and not nullable:
                        raise SchemaMismatch(f"record {i}: {name} may not be null")
                    row.append(_format_value(value, kind))
                writer.writerow(row)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_csv(path, schema_id: str) -> list:
    """Parse a CSV written by write_csv back into typed dicts."""
    if schema_id not in SCHEMAS:
        raise SchemaMismatch(f"unknown schema {schema_id!r}")
    schema = SCHEMAS[schema_id]
    names = [name for name, _, _ in schema]
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != names:
                raise SchemaMismatch(f"header {header} != schema {names}")
            out = []
            for row in reader:
                if len(row) != len(schema):
                    raise SchemaMismatch(f"row width {len(row)} != {len(schema)}")
                rec = {}
                for (name, kind, nullable), cell in zip(schema, row):
                    if cell == "":
                        if not nullable:
                            raise SchemaMismatch(f"{name} may not be empty")
                        rec[name] = None
                    else:
                        rec[name] = kind(cell)
                out.append(rec)
            return out
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _jsonable(value):
    """Recursively convert to JSON-encodable values; complex -> {re, im}."""
    if is_dataclass(value) and not isinstance(value, type):
        return _jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


def write_jsonl(records, path) -> None:
    """One sorted-key JSON object per line; complex values become re/im."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for record in records:
                handle.write(json.dumps(_jsonable(record), sort_keys=True))
                handle.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_jsonl(path) -> list:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return [json.loads(line) for line in handle if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Record builders for the domain objects


def snapshot_records(snapshot, trial: int = 0, seed=None) -> list:
    """Spectra rows for one snapshot, one per eigenvalue index."""
    seed = snapshot.seed if seed is None else seed
    trial = snapshot.trial if snapshot.trial is not None else trial
    return [
        {"trial": trial, "seed": seed, "t": snapshot.t, "index": j,
         "re": float(lam.real), "im": float(lam.imag)}
        for j, lam in enumerate(snapshot.eigenvalues)
    ]


def bundle_records(bundle) -> list:
    """Trajectories rows, path-major then time-major."""
    out = []
    for j in range(bundle.n):
        for t, lam in zip(bundle.t_grid, bundle.paths[j]):
            out.append({"path": j, "t": float(t),
                        "re": float(lam.real), "im": float(lam.imag)})
    return out


def sweep_records(result) -> list:
    """Sweep rows, one per cell, in the result's cell order."""
    return [
        {"alpha": cell.alpha, "t": cell.t, "N": cell.n, "trials": cell.trials,
         "pass_fraction": cell.pass_fraction, "ci_low": cell.ci_low,
         "ci_high": cell.ci_high}
        for cell in result.cells
    ]


def identity_records(reports, seed=None) -> list:
    """JSONL ledger dicts for a sequence of IdentityReports."""
    out = []
    for rep in reports:
        verdict = "info" if rep.verdict is None else ("pass" if rep.verdict else "fail")
        out.append({
            "name": rep.name,
            "kind": rep.kind,
            "claimed": rep.claimed,
            "value": rep.estimate.value,
            "stderr": rep.estimate.stderr,
            "n_samples": rep.estimate.n_samples,
            "z_score": rep.z_score,
            "ratio": rep.ratio,
            "verdict": verdict,
            "seed": rep.estimate.seed if seed is None else seed,
        })
    return out
