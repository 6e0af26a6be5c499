"""Disk separation of the outlier eigenvalue.

At sub-critical times |t| << N^{-1/2} one eigenvalue of G(t) detaches
toward the predicted location z_t while the rest stay away from the
origin; at super-critical times no eigenvalue remains near the center.
This module builds the disks that witness both regimes, classifies
spectral snapshots against them, and runs the Monte Carlo sweeps over the
timescale exponent and the critical window.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import UAModel, SpectrumSnapshot, omega1, outlier_location, spectrum
from .rng import OFFSET_ROUCHE, stream

_LABELS = ("D1", "D2", "D3", "custom")


@dataclass(frozen=True)
class DiskSpec:
    """A labeled closed disk D(center, radius) used for eigenvalue counting."""

    center: complex
    radius: float
    label: str = "custom"

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"negative radius {self.radius}")
        if self.label not in _LABELS:
            raise ValueError(f"label {self.label!r} not in {_LABELS}")

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius

    def count(self, values: np.ndarray) -> int:
        return int(np.sum(np.abs(np.asarray(values) - self.center) < self.radius))


@dataclass(frozen=True)
class SeparationReport:
    """Eigenvalue counts of one snapshot against a disk family.

    ``subcritical_pass`` records exactly one eigenvalue in D1 and exactly
    one inside D2; ``supercritical_pass`` records an empty intersection of
    D3 with the concentric disk of radius 1 - N^(-delta).
    """

    t: float
    n: int
    inside_d1: int
    inside_d2: int
    outside_d2: int
    inside_d3: int
    inside_d3_capped: int
    cap_radius: float
    subcritical_pass: bool
    supercritical_pass: bool
    seed: int | None = None
    trial: int | None = None


@dataclass(frozen=True)
class SweepCell:
    """One (alpha, branch) cell of a timescale sweep."""

    alpha: float
    t: float
    n: int
    branch: str
    trials: int
    passes: int
    excluded: int
    pass_fraction: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class SweepResult:
    n: int
    trials_requested: int
    seed: int
    cells: tuple


@dataclass(frozen=True)
class CriticalWindowRow:
    """Occupancy statistics of two concentric disks at t = mu N^(-1/2)."""

    mu: float
    t: float
    trials: int
    count_hist_b: tuple
    freq_ge2_b: float
    ge2_ci_low: float
    ge2_ci_high: float
    freq_empty_a: float
    empty_ci_low: float
    empty_ci_high: float


@dataclass(frozen=True)
class EnsembleConfig:
    """Sampling and threshold parameters shared by the sweep experiments.

    ``sampler`` plugs in a non-default matrix/vector law; it receives
    (n, generator) and must return a UAModel.
    """

    n: int
    seed: int
    eps: float = 0.1
    delta: float = 0.6
    threshold: float = 0.9
    sampler: Callable | None = field(default=None, compare=False)


def rouche_membership(om1: complex, z_t: complex, n: int, eta: float,
                      z: complex) -> bool:
    """Strict dominance inequality N^eta |z|^2/(1-|z|) < |omega1| |z - z_t|.

    Points satisfying it are where the outlier-counting contour argument
    applies. The dimension enters through N^eta and is a required argument
    even though the inequality is otherwise pointwise.
    """
    mod = abs(z)
    if mod >= 1.0:
        raise ValueError(f"|z| = {mod:.6f} is not inside the unit disk")
    return n ** eta * mod * mod / (1.0 - mod) < abs(om1) * abs(z - z_t)


def disk_boundary_membership(om1: complex, z_t: complex, n: int, eta: float,
                             disk: DiskSpec, points: int = 360) -> bool:
    """True when every sampled boundary point of the disk is in the domain.

    A boundary that leaves the open unit disk is simply not inside the
    domain, so the answer is False rather than an error.
    """
    angles = 2.0 * np.pi * np.arange(points) / points
    ring = disk.center + disk.radius * np.exp(1j * angles)
    if np.any(np.abs(ring) >= 1.0):
        return False
    return all(rouche_membership(om1, z_t, n, eta, z) for z in ring)


def theorem_disks(om1: complex, n: int, t: float, eps: float) -> dict:
    """Disk family with omega1-dependent radii.

    D1 = D(z_t, |z_t|^2 N^eps / |omega1|),
    D2 = D(0, (1 + N^eps/|omega1|)^(-1)),
    D3 = D(0, (1 + N^eps/(|omega1| |z_t|))^(-1)), radius 0 when z_t = 0.
    """
    z_t = outlier_location(om1, n, t)
    mod_om = abs(om1)
    mod_zt = abs(z_t)
    neps = n ** eps
    rho1 = mod_zt * mod_zt * neps / mod_om
    rho2 = 1.0 / (1.0 + neps / mod_om)
    rho3 = 0.0 if mod_zt == 0.0 else 1.0 / (1.0 + neps / (mod_om * mod_zt))
    return {"D1": DiskSpec(z_t, rho1, "D1"),
            "D2": DiskSpec(0.0, rho2, "D2"),
            "D3": DiskSpec(0.0, rho3, "D3")}


def simplified_disks(om1: complex, n: int, t: float, eps: float) -> dict:
    """Disk family with omega1-free radii.

    D1 = D(z_t, |z_t|^2 N^eps), D2 = D(0, N^(-eps)),
    D3 = D(0, 1 - N^eps/|z_t|) clamped at radius 0.
    """
    z_t = outlier_location(om1, n, t)
    mod_zt = abs(z_t)
    neps = n ** eps
    rho1 = mod_zt * mod_zt * neps
    rho3 = 0.0 if mod_zt == 0.0 else max(0.0, 1.0 - neps / mod_zt)
    return {"D1": DiskSpec(z_t, rho1, "D1"),
            "D2": DiskSpec(0.0, n ** -eps, "D2"),
            "D3": DiskSpec(0.0, rho3, "D3")}


def classify_snapshot(snapshot: SpectrumSnapshot, disks: dict,
                      delta: float = 0.6) -> SeparationReport:
    """Exact eigenvalue counts of a snapshot against a disk family."""
    values = snapshot.eigenvalues
    n = snapshot.n
    inside_d1 = disks["D1"].count(values)
    inside_d2 = disks["D2"].count(values)
    inside_d3 = disks["D3"].count(values)
    cap = 1.0 - n ** -delta
    capped_disk = DiskSpec(0.0, min(disks["D3"].radius, cap), "custom")
    inside_capped = capped_disk.count(values)
    return SeparationReport(
        t=snapshot.t, n=n,
        inside_d1=inside_d1, inside_d2=inside_d2, outside_d2=n - inside_d2,
        inside_d3=inside_d3, inside_d3_capped=inside_capped, cap_radius=cap,
        subcritical_pass=(inside_d1 == 1 and inside_d2 == 1),
        supercritical_pass=(inside_capped == 0),
        seed=snapshot.seed, trial=snapshot.trial,
    )


def _wilson_interval(successes: int, total: int, z: float = 1.959964):
    """95% Wilson score interval for a binomial proportion."""
    if total == 0:
        return 0.0, 1.0
    p = successes / total
    zz = z * z
    denom = 1.0 + zz / total
    center = (p + zz / (2.0 * total)) / denom
    half = (z / denom) * np.sqrt(p * (1.0 - p) / total + zz / (4.0 * total * total))
    return max(0.0, center - half), min(1.0, center + half)


def supercritical_guard(om1: complex, n: int, t: float) -> bool:
    """Hypothesis guard for the no-small-eigenvalue clause.

    Requires |omega1| < sqrt(N)/2 and |t| > 2|omega1|/sqrt(N); trials
    outside it are excluded from supercritical counting rather than
    classified.
    """
    mod = abs(om1)
    root = np.sqrt(n)
    return mod < 0.5 * root and abs(t) > 2.0 * mod / root


def _sweep_cells(n: int, alphas: np.ndarray):
    cells = []
    for a in alphas:
        cells.append((float(a), float(n ** (-0.5 - a)), "sub"))
        cells.append((float(a), float(-(n ** (-0.5 + a))), "sup"))
    return cells


def timescale_sweep(config: EnsembleConfig, alpha_grid, trials: int,
                    workers: int = 1) -> SweepResult:
    """Pass fractions of both separation clauses across the timescale grid.

    Each trial draws one fresh model per its own seeded stream and reuses
    it for every cell (common random numbers keep the pass fraction
    monotone in |t| up to per-cell exclusions). Subcritical cells sit at
    t = N^(-1/2-alpha) and count with the simplified one-eigenvalue
    clause; supercritical cells sit at t = -N^(-1/2+alpha), apply the
    hypothesis guard, and count with the empty-disk clause.
    """
    alphas = np.atleast_1d(np.asarray(alpha_grid, dtype=float))
    if alphas.size == 0:
        raise ValueError("empty alpha grid")
    if np.any(alphas <= 0.0) or np.any(alphas >= 0.5):
        raise ValueError("alpha grid must lie in (0, 1/2)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = config.n
    sampler = config.sampler if config.sampler is not None else UAModel.sample
    cells = _sweep_cells(n, alphas)

    def run_trial(i: int):
        rng = stream(config.seed, stream_id=i, offset=OFFSET_ROUCHE)
        model = sampler(n, rng)
        om1 = omega1(model)
        out = []
        for _, t, branch in cells:
            if branch == "sup" and not supercritical_guard(om1, n, t):
                out.append(None)
                continue
            disks = simplified_disks(om1, n, t, config.eps)
            report = classify_snapshot(spectrum(model, t, trial=i), disks,
                                       delta=config.delta)
            out.append(report.subcritical_pass if branch == "sub"
                       else report.supercritical_pass)
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(run_trial, range(trials)))
    else:
        per_trial = [run_trial(i) for i in range(trials)]

    out_cells = []
    for k, (alpha, t, branch) in enumerate(cells):
        flags = [row[k] for row in per_trial]
        counted = [f for f in flags if f is not None]
        passes = sum(counted)
        total = len(counted)
        frac = passes / total if total else 0.0
        lo, hi = _wilson_interval(passes, total)
        out_cells.append(SweepCell(alpha=alpha, t=t, n=n, branch=branch,
                                   trials=total, passes=passes,
                                   excluded=trials - total,
                                   pass_fraction=frac, ci_low=lo, ci_high=hi))
    return SweepResult(n=n, trials_requested=trials, seed=config.seed,
                       cells=tuple(out_cells))


def critical_window_stats(n: int, mu_grid, trials: int, a: float = 0.2,
                          b: float = 0.9, seed: int = 0,
                          workers: int = 1) -> tuple:
    """Disk occupancy at the critical times t = mu N^(-1/2).

    For each mu the same per-trial models report the number of eigenvalues
    in D(0, b) and whether D(0, a) is empty. Strong separation fails in
    the window, so the D(0, b) count exceeds 1 with substantial frequency.
    """
    mus = np.atleast_1d(np.asarray(mu_grid, dtype=float))
    if np.any(mus <= 0.0):
        raise ValueError("mu grid must be positive")
    t_values = mus / np.sqrt(n)
    if np.any(np.abs(t_values) >= 1.0):
        raise ValueError("mu grid exceeds the model's time domain")

    def run_trial(i: int):
        rng = stream(seed, stream_id=i, offset=OFFSET_ROUCHE)
        model = UAModel.sample(n, rng)
        row = []
        for t in t_values:
            moduli = np.abs(spectrum(model, float(t), trial=i).eigenvalues)
            row.append((int(np.sum(moduli < b)), bool(np.all(moduli >= a))))
        return row

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(run_trial, range(trials)))
    else:
        per_trial = [run_trial(i) for i in range(trials)]

    rows = []
    for k, mu in enumerate(mus):
        counts = np.array([row[k][0] for row in per_trial])
        empty = np.array([row[k][1] for row in per_trial])
        hist = np.bincount(counts)
        ge2 = int(np.sum(counts >= 2))
        nempty = int(np.sum(empty))
        ge2_lo, ge2_hi = _wilson_interval(ge2, trials)
        e_lo, e_hi = _wilson_interval(nempty, trials)
        rows.append(CriticalWindowRow(
            mu=float(mu), t=float(t_values[k]), trials=trials,
            count_hist_b=tuple(int(c) for c in hist),
            freq_ge2_b=ge2 / trials, ge2_ci_low=ge2_lo, ge2_ci_high=ge2_hi,
            freq_empty_a=nempty / trials, empty_ci_low=e_lo, empty_ci_high=e_hi))
    return tuple(rows)
