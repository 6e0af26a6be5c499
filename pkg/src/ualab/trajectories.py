"""Continuous eigenvalue paths of G(t).

Two independent constructions of the same object: continuation tracking,
which solves the eigenproblem on a grid and glues snapshots by optimal
assignment, and direct integration of the coupled ODE system the
eigenvalues satisfy on (0, 1]. Cross-validation of the two is the point;
they share no numerics beyond the eigendecomposition of U at the anchor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from .errors import (
    CollisionSingularity,
    MatchingAmbiguous,
    StepCollapse,
    TimeSingularity,
)
from .linalg import general_eigensystem
from .model import UAModel, assemble

# Global sign multiplying the product-form vector field below. The bare
# formula fails the N=1 sanity check: the exact scalar trajectory is
# lambda(t) = t e^{i theta}, with derivative e^{i theta}, while the formula
# evaluates to -e^{i theta}. calibrate_field_sign() reproduces this
# measurement against finite differences on N in {1, 2, 3}; the result is
# a global factor of -1, locked in here and asserted by the test suite.
CALIBRATED_FIELD_SIGN = -1

_TINY = float(np.finfo(float).tiny)


@dataclass(frozen=True)
class TrajectoryBundle:
    """Eigenvalue paths over a time grid, one row per path.

    ``paths[j]`` is anchored at e^{i theta_j} at t = 1. ``matching_costs``
    holds the total assignment cost of each accepted step (empty for ODE
    bundles), ``ambiguous_steps`` the (t_from, t_to, margin) triples where
    a two-path exchange came within the ambiguity tolerance of optimal.
    """

    t_grid: np.ndarray
    paths: np.ndarray
    matching_costs: np.ndarray
    refinement_count: int
    ambiguous_steps: tuple
    method: str

    @property
    def n(self) -> int:
        return self.paths.shape[0]

    def at(self, t: float) -> np.ndarray:
        """Path values at a grid point (exact match required)."""
        idx = np.flatnonzero(self.t_grid == t)
        if idx.size == 0:
            raise KeyError(f"t = {t} is not on the bundle grid")
        return self.paths[:, idx[0]]


@dataclass(frozen=True)
class DynamicsReport:
    """Agreement of three derivative evaluations at one (model, t)."""

    t: float
    fd_step: float
    pert_vs_fd: float
    field_vs_fd: float
    field_vs_pert: float
    min_pairwise_distance: float


@dataclass(frozen=True)
class SignCalibration:
    """Outcome of the empirical sign calibration of the vector field."""

    sign: int
    err_minus: float
    err_plus: float
    probes: tuple


def ode_vector_field(t, lambdas, sign: int = CALIBRATED_FIELD_SIGN,
                     eps_collision: float = 1e-10) -> np.ndarray:
    """Derivative vector of the coupled eigenvalue system at time t.

    Implements, up to the calibrated global sign,

        lambda_j' = (1 - |lambda_j|^2) / (t (t^2 - 1))
                    * (prod_k lambda_k)
                    * prod_{k != j} (lambda_j conj(lambda_k) - 1)
                                    / (lambda_j - lambda_k).

    The prefactor is 0/0 at t = 1 (removable; the limit is
    e^{i theta_j} |<u_j|v>|^2) and singular at t = 0, so integration is
    confined to (0, 1).
    """
    lam = np.asarray(lambdas, dtype=complex)
    scale = t * (t * t - 1.0)
    if abs(scale) < _TINY:
        raise TimeSingularity(f"t(t^2 - 1) underflows at t = {t}")
    n = lam.size
    if n > 1:
        diffs = lam[:, None] - lam[None, :]
        off = np.abs(diffs) + np.eye(n)
        gap = float(np.min(off))
        if gap < eps_collision:
            raise CollisionSingularity(
                f"min pairwise eigenvalue distance {gap:.3e} below {eps_collision:.1e}")
        ratio = (lam[:, None] * lam.conj()[None, :] - 1.0) / np.where(
            np.eye(n, dtype=bool), 1.0, diffs)
        np.fill_diagonal(ratio, 1.0)
        cross = np.prod(ratio, axis=1)
    else:
        cross = np.ones(1, dtype=complex)
    return sign * (1.0 - np.abs(lam) ** 2) / scale * np.prod(lam) * cross


def _assign(current: np.ndarray, candidates: np.ndarray):
    """Match candidates to current positions by minimum total distance."""
    cost = np.abs(current[:, None] - candidates[None, :])
    rows, cols = linear_sum_assignment(cost)
    total = float(cost[rows, cols].sum())
    return candidates[cols], total, cost, cols


def _swap_margin(cost: np.ndarray, cols: np.ndarray) -> float:
    """Smallest cost increase of exchanging two assigned columns."""
    n = cost.shape[0]
    if n < 2:
        return np.inf
    pair = cost[:, cols]
    assigned = np.diag(pair)
    excess = pair + pair.T - assigned[:, None] - assigned[None, :]
    np.fill_diagonal(excess, np.inf)
    return float(np.min(excess))


def track(model: UAModel, t_grid, delta_track: float = 0.05,
          max_depth: int = 20, ambig_tol: float = 1e-12) -> TrajectoryBundle:
    """Continuation tracking of all N eigenvalue paths from t = 1.

    The grid must be strictly monotone, lie in (-1, 1], and contain the
    anchor t = 1 as an endpoint. Steps whose maximum per-path displacement
    exceeds ``delta_track`` are bisected, up to ``max_depth`` levels; the
    inserted times appear in the output grid. A step whose optimal
    assignment beats some two-path exchange by less than ``ambig_tol`` is
    recorded (and warned about), not rejected.
    """
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty time grid")
    steps = np.diff(grid)
    if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("time grid must be strictly monotone")
    if grid.min() <= -1.0 or grid.max() > 1.0:
        raise ValueError("time grid must lie in (-1, 1]")
    increasing = steps.size > 0 and steps[0] > 0
    work = grid[::-1] if increasing else grid
    if work[0] != 1.0:
        raise ValueError("time grid must contain the anchor t = 1")

    anchors = model.eigensystem.eigenvalues
    times = [1.0]
    columns = [anchors]
    costs = []
    ambiguous = []
    refinements = 0
    current = anchors
    t_cur = 1.0
    for target in work[1:]:
        stack = [(float(target), 0)]
        while stack:
            t_next, depth = stack.pop()
            vals = np.linalg.eigvals(assemble(model, t_next))
            matched, total, cost, cols = _assign(current, vals)
            if depth < max_depth and float(np.max(np.abs(matched - current))) > delta_track:
                refinements += 1
                stack.append((t_next, depth + 1))
                stack.append((0.5 * (t_cur + t_next), depth + 1))
                continue
            margin = _swap_margin(cost, cols)
            if margin < ambig_tol:
                ambiguous.append((t_cur, t_next, margin))
                warnings.warn(MatchingAmbiguous(
                    f"assignment margin {margin:.3e} on step {t_cur} -> {t_next}"))
            times.append(t_next)
            columns.append(matched)
            costs.append(total)
            current = matched
            t_cur = t_next

    t_out = np.array(times)
    paths = np.column_stack(columns)
    cost_out = np.array(costs)
    if increasing:
        t_out = t_out[::-1]
        paths = paths[:, ::-1]
        cost_out = cost_out[::-1]
    return TrajectoryBundle(t_grid=t_out, paths=paths, matching_costs=cost_out,
                            refinement_count=refinements,
                            ambiguous_steps=tuple(ambiguous), method="track")


def integrate_ode(model: UAModel, t_end: float, t_eval=None,
                  rtol: float = 1e-12, atol: float = 1e-14,
                  seed_step: float = 1e-5,
                  sign: int = CALIBRATED_FIELD_SIGN) -> TrajectoryBundle:
    """Integrate the eigenvalue ODE system from t = 1 down to t_end.

    The field is 0/0 at the anchor, so the integration starts at
    ``1 - seed_step`` from one eigendecomposition of G(1 - seed_step)
    matched onto the anchors; adaptive eighth-order Runge-Kutta (DOP853)
    takes over from there. Error committed near the anchor is amplified
    along the flow, so a machine-precision start matters more than the
    integrator tolerance. ``t_eval``, if given, must be a monotone grid
    inside [t_end, 1]; times within the seed step of 1 are filled from
    the first-order expansion at the anchor.
    """
    if not 0.0 < t_end < 1.0:
        raise ValueError(f"t_end = {t_end} outside (0, 1)")
    h = seed_step
    anchors = model.eigensystem.eigenvalues
    init_deriv = anchors * model.overlaps
    seed_vals = np.linalg.eigvals(assemble(model, 1.0 - h))
    y0, _, _, _ = _assign(anchors, seed_vals)

    sol = solve_ivp(lambda t, y: ode_vector_field(t, y, sign=sign),
                    (1.0 - h, t_end), y0, method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:
        raise StepCollapse(f"integrator failed: {sol.message}")

    if t_eval is None:
        t_out = np.concatenate(([1.0], sol.t))
        paths = np.column_stack([anchors, sol.y])
    else:
        t_out = np.atleast_1d(np.asarray(t_eval, dtype=float))
        steps = np.diff(t_out)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("t_eval must be strictly monotone")
        if t_out.min() < t_end or t_out.max() > 1.0:
            raise ValueError(f"t_eval must lie in [{t_end}, 1]")
        cols = []
        for t in t_out:
            if t >= 1.0:
                cols.append(anchors)
            elif t > 1.0 - h:
                cols.append(anchors + (t - 1.0) * init_deriv)
            else:
                cols.append(sol.sol(t))
        paths = np.column_stack(cols)
    return TrajectoryBundle(t_grid=t_out, paths=paths,
                            matching_costs=np.empty(0), refinement_count=0,
                            ambiguous_steps=(), method="ode")


def _max_relative(a: np.ndarray, b: np.ndarray) -> float:
    """Max elementwise |a - b| relative to b, floored against tiny entries."""
    scale = float(np.max(np.abs(b))) if b.size else 1.0
    floor = 1e-12 * max(scale, 1.0)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


def _fd_spectrum_derivative(model: UAModel, t: float, fd_step: float,
                            reference: np.ndarray) -> np.ndarray:
    """Centered finite difference of the matched spectrum at t."""
    plus = np.linalg.eigvals(assemble(model, t + fd_step))
    minus = np.linalg.eigvals(assemble(model, t - fd_step))
    plus, _, _, _ = _assign(reference, plus)
    minus, _, _, _ = _assign(reference, minus)
    return (plus - minus) / (2.0 * fd_step)


def validate_dynamics(model: UAModel, t: float,
                      fd_step: float = 1e-6) -> DynamicsReport:
    """Cross-check three independent evaluations of lambda_j'(t).

    The candidates are (i) the per-eigenvalue identity
    lambda_j' = (lambda_j/t) <L_j|v><v|R_j> in the bi-orthogonal
    eigensystem of G(t), (ii) a centered finite difference of the
    eigensolver spectrum, and (iii) the product-form vector field. The
    report carries max elementwise relative discrepancies plus the minimum
    pairwise eigenvalue distance as a non-intersection diagnostic.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"t = {t} outside (0, 1)")
    es = general_eigensystem(assemble(model, t), want_left=True)
    lam = es.eigenvalues
    left_overlap = es.left_vectors.conj().T @ model.v
    right_overlap = model.v.conj() @ es.right_vectors
    pert = (lam / t) * left_overlap * right_overlap
    fd = _fd_spectrum_derivative(model, t, fd_step, lam)
    field = ode_vector_field(t, lam)
    diffs = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(diffs, np.inf)
    return DynamicsReport(
        t=float(t),
        fd_step=float(fd_step),
        pert_vs_fd=_max_relative(pert, fd),
        field_vs_fd=_max_relative(field, fd),
        field_vs_pert=_max_relative(field, pert),
        min_pairwise_distance=float(np.min(diffs)),
    )


def calibrate_field_sign(seed: int = 20240517, dims=(1, 2, 3),
                         t_probes=(0.45, 0.7), fd_step: float = 1e-6) -> SignCalibration:
    """Fix the global sign of the vector field against finite differences.

    For each dimension a fresh model is sampled and the product formula is
    evaluated with both signs at each probe time; the winner is the sign
    whose worst relative deviation from the centered finite difference of
    the tracked spectrum is smaller. Kept as a callable protocol so the
    build-time constant CALIBRATED_FIELD_SIGN stays reproducible.
    """
    rng = np.random.default_rng(seed)
    errs = {1: 0.0, -1: 0.0}
    probes = []
    for n in dims:
        model = UAModel.sample(n, rng)
        for t in t_probes:
            es = general_eigensystem(assemble(model, t))
            lam = es.eigenvalues
            fd = _fd_spectrum_derivative(model, t, fd_step, lam)
            for s in (1, -1):
                errs[s] = max(errs[s], _max_relative(
                    ode_vector_field(t, lam, sign=s), fd))
            probes.append((n, t))
    sign = -1 if errs[-1] < errs[1] else 1
    return SignCalibration(sign=sign, err_minus=errs[-1], err_plus=errs[1],
                           probes=tuple(probes))
