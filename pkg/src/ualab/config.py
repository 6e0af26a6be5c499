"""Experiment configuration: schema, validation, grid construction.

Configs are JSON documents validated against CONFIG_SCHEMA. Validation
collects every field-level problem before failing, and nothing is ever
silently clamped: an out-of-domain value is always an error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, IoError

EXPERIMENTS = ("trajectories", "ode-compare", "sweep", "critical",
               "identities", "poissonized")

GRID_KINDS = ("linear", "geometric")

# field -> (description, required-by experiments, optional-for experiments)
CONFIG_SCHEMA = {
    "experiment": ("one of " + ", ".join(EXPERIMENTS), EXPERIMENTS, ()),
    "n": ("matrix dimension, integer >= 1", EXPERIMENTS, ()),
    "seed": ("base RNG seed, integer >= 0", EXPERIMENTS, ()),
    "trials": ("trial count, integer >= 1",
               ("sweep", "critical", "identities", "poissonized"),
               ("trajectories", "ode-compare")),
    "t_grid": ("time grid {kind: linear|geometric, start, stop, count}",
               ("trajectories", "ode-compare"), ()),
    "alpha_grid": ("list of exponents in (0, 1/2)", ("sweep",), ()),
    "mu_grid": ("list of positive critical-window multipliers", ("critical",), ()),
    "eps": ("disk exponent in (0, 1)", (), EXPERIMENTS),
    "delta": ("annulus exponent in (0, 1)", (), EXPERIMENTS),
    "threshold": ("pass-fraction threshold in (0, 1]", (), EXPERIMENTS),
    "a": ("inner disk radius in (0, 1)", (), ("critical",)),
    "b": ("outer disk radius in (0, 1)", (), ("critical",)),
    "k": ("Poissonization order, integer >= 1", (), ("poissonized",)),
    "z": ("evaluation point modulus in (0, 1)", (), ("identities",)),
    "workers": ("thread count, integer >= 1", (), EXPERIMENTS),
    "output_dir": ("output directory path", (), EXPERIMENTS),
}

_DEFAULTS = {
    "trials": 200,
    "eps": 0.1,
    "delta": 0.6,
    "threshold": 0.9,
    "a": 0.2,
    "b": 0.9,
    "k": 1,
    "z": 0.5,
    "workers": 1,
}


@dataclass(frozen=True)
class GridSpec:
    """A one-dimensional grid, linear or geometric between its endpoints."""

    kind: str
    start: float
    stop: float
    count: int

    def to_array(self) -> np.ndarray:
        if self.kind == "linear":
            return np.linspace(self.start, self.stop, self.count)
        sign = np.sign(self.start)
        return sign * np.geomspace(abs(self.start), abs(self.stop), self.count)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment parameters (see CONFIG_SCHEMA)."""

    experiment: str
    n: int
    seed: int
    trials: int = 200
    t_grid: GridSpec | None = None
    alpha_grid: tuple = ()
    mu_grid: tuple = ()
    eps: float = 0.1
    delta: float = 0.6
    threshold: float = 0.9
    a: float = 0.2
    b: float = 0.9
    k: int = 1
    z: float = 0.5
    workers: int = 1
    output_dir: str | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _check_int(problems, raw, name, minimum):
    value = raw[name]
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append((name, f"must be an integer, got {value!r}"))
        return None
    if value < minimum:
        problems.append((name, f"must be >= {minimum}, got {value}"))
        return None
    return value


def _check_real(problems, raw, name, low, high, *, open_low=True, open_high=True):
    value = raw[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append((name, f"must be a number, got {value!r}"))
        return None
    value = float(value)
    ok_low = value > low if open_low else value >= low
    ok_high = value < high if open_high else value <= high
    if not (ok_low and ok_high):
        lo = "(" if open_low else "["
        hi = ")" if open_high else "]"
        problems.append((name, f"must lie in {lo}{low}, {high}{hi}, got {value}"))
        return None
    return value


def _check_grid_spec(problems, value):
    if not isinstance(value, dict):
        problems.append(("t_grid", f"must be an object, got {value!r}"))
        return None
    unknown = set(value) - {"kind", "start", "stop", "count"}
    if unknown:
        problems.append(("t_grid", f"unknown keys {sorted(unknown)}"))
        return None
    missing = {"kind", "start", "stop", "count"} - set(value)
    if missing:
        problems.append(("t_grid", f"missing keys {sorted(missing)}"))
        return None
    kind = value["kind"]
    if kind not in GRID_KINDS:
        problems.append(("t_grid", f"kind must be one of {GRID_KINDS}"))
        return None
    try:
        start = float(value["start"])
        stop = float(value["stop"])
    except (TypeError, ValueError):
        problems.append(("t_grid", "start/stop must be numbers"))
        return None
    count = value["count"]
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        problems.append(("t_grid", f"count must be a positive integer, got {count!r}"))
        return None
    if kind == "geometric":
        if start == 0.0 or stop == 0.0 or np.sign(start) != np.sign(stop):
            problems.append(("t_grid", "geometric grid endpoints must be "
                                       "nonzero with the same sign"))
            return None
    return GridSpec(kind=kind, start=start, stop=stop, count=count)


def validate_config(raw: dict) -> ExperimentConfig:
    """Validate a raw config dict, collecting every problem before failing."""
    problems = []
    if not isinstance(raw, dict):
        raise ConfigInvalid([("<root>", "config must be a JSON object")])
    unknown = set(raw) - set(CONFIG_SCHEMA)
    for name in sorted(unknown):
        problems.append((name, "unknown field"))

    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        problems.append(("experiment", f"must be one of {EXPERIMENTS}, "
                                       f"got {experiment!r}"))
        raise ConfigInvalid(problems)

    for name, (_, required_by, optional_for) in CONFIG_SCHEMA.items():
        if name == "experiment":
            continue
        if name in raw:
            if experiment not in required_by and experiment not in optional_for:
                problems.append((name, f"not accepted by {experiment!r}"))
        elif experiment in required_by:
            problems.append((name, f"required by {experiment!r}"))
    if problems:
        raise ConfigInvalid(problems)

    values = dict(_DEFAULTS)
    values["experiment"] = experiment
    values["n"] = _check_int(problems, raw, "n", 1)
    values["seed"] = _check_int(problems, raw, "seed", 0)
    if "trials" in raw:
        values["trials"] = _check_int(problems, raw, "trials", 1)
    if "workers" in raw:
        values["workers"] = _check_int(problems, raw, "workers", 1)
    if "k" in raw:
        values["k"] = _check_int(problems, raw, "k", 1)
    for name in ("eps", "delta", "a", "b", "z"):
        if name in raw:
            values[name] = _check_real(problems, raw, name, 0.0, 1.0)
    if "threshold" in raw:
        values["threshold"] = _check_real(problems, raw, "threshold", 0.0, 1.0,
                                          open_high=False)

    if "alpha_grid" in raw:
        grid = raw["alpha_grid"]
        if not isinstance(grid, (list, tuple)) or not grid:
            problems.append(("alpha_grid", "must be a non-empty list"))
        else:
            cleaned = []
            for i, alpha in enumerate(grid):
                if isinstance(alpha, bool) or not isinstance(alpha, (int, float)) \
                        or not 0.0 < float(alpha) < 0.5:
                    problems.append(("alpha_grid",
                                     f"entry {i} must lie in (0, 0.5), got {alpha!r}"))
                else:
                    cleaned.append(float(alpha))
            values["alpha_grid"] = tuple(cleaned)

    if "mu_grid" in raw:
        grid = raw["mu_grid"]
        if not isinstance(grid, (list, tuple)) or not grid:
            problems.append(("mu_grid", "must be a non-empty list"))
        else:
            cleaned = []
            for i, mu in enumerate(grid):
                if isinstance(mu, bool) or not isinstance(mu, (int, float)) \
                        or float(mu) <= 0.0:
                    problems.append(("mu_grid",
                                     f"entry {i} must be positive, got {mu!r}"))
                else:
                    cleaned.append(float(mu))
            values["mu_grid"] = tuple(cleaned)

    if "t_grid" in raw:
        spec = _check_grid_spec(problems, raw["t_grid"])
        if spec is not None:
            arr = spec.to_array()
            if experiment == "ode-compare":
                if arr.min() <= 0.0 or arr.max() > 1.0:
                    problems.append(("t_grid", "ode-compare grid must lie in (0, 1]"))
                elif arr.min() >= 1.0:
                    problems.append(("t_grid", "ode-compare grid needs a point "
                                               "below t = 1"))
            elif arr.min() <= -1.0 or arr.max() > 1.0:
                problems.append(("t_grid", "grid must lie in (-1, 1]"))
            if arr.max() != 1.0:
                problems.append(("t_grid", "grid must contain the anchor t = 1"))
            steps = np.diff(arr)
            if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
                problems.append(("t_grid", "grid must be strictly monotone"))
            values["t_grid"] = spec

    if "output_dir" in raw:
        out = raw["output_dir"]
        if not isinstance(out, str) or not out:
            problems.append(("output_dir", f"must be a non-empty string, got {out!r}"))
        else:
            values["output_dir"] = out

    if problems:
        raise ConfigInvalid(problems)
    return ExperimentConfig(raw=dict(raw), **values)


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid([("<file>", f"not valid JSON: {exc}")]) from exc
    return validate_config(raw)
