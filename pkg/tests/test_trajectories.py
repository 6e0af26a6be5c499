"""Trajectory tracking and the calibrated eigenvalue flow.

The N=1 model is the master oracle: G(t) = t e^{i theta}, so the single
path is the radial segment t -> t e^{i theta} and the velocity is e^{i
theta} for all t. Larger sizes are cross-checked method against method
(continuation tracking vs ODE integration, analytic field vs finite
differences of the tracked paths).
"""

import warnings

import numpy as np
import pytest

from ualab.errors import CollisionSingularity, MatchingAmbiguous, TimeSingularity
from ualab.model import UAModel, spectrum
from ualab.rng import OFFSET_MODEL, stream
from ualab.trajectories import (
    CALIBRATED_FIELD_SIGN,
    calibrate_field_sign,
    integrate_ode,
    ode_vector_field,
    track,
    validate_dynamics,
)


def _model(n, seed, sid=0):
    return UAModel.sample(n, stream(seed, sid, OFFSET_MODEL))


def _scalar_model(theta=0.9):
    return UAModel(np.array([[np.exp(1j * theta)]]), np.array([1.0 + 0j]))


def test_sign_calibration_is_decisive():
    cal = calibrate_field_sign()
    assert cal.sign == CALIBRATED_FIELD_SIGN == -1
    # The rejected sign has to be worse by orders of magnitude, otherwise
    # the calibration would be noise.
    assert cal.err_minus < 1e-6
    assert cal.err_plus > 1e3 * cal.err_minus


class TestVectorField:
    def test_scalar_velocity(self):
        theta = 0.7
        lam = np.array([0.5 * np.exp(1j * theta)])
        vel = ode_vector_field(0.5, lam)
        assert abs(vel[0] - np.exp(1j * theta)) < 1e-12

    def test_uncalibrated_sign_flips_scalar_velocity(self):
        theta = 0.7
        lam = np.array([0.5 * np.exp(1j * theta)])
        vel = ode_vector_field(0.5, lam, sign=+1)
        assert abs(vel[0] + np.exp(1j * theta)) < 1e-12

    def test_matches_initial_slope_near_t_one(self):
        m = _model(5, 1)
        anchors = m.eigensystem.eigenvalues
        t = 1.0 - 1e-7
        lam = spectrum(m, t).eigenvalues
        # Reorder the snapshot onto the anchors before comparing.
        order = np.argmin(np.abs(lam[:, None] - anchors[None, :]), axis=0)
        vel = ode_vector_field(t, lam[order])
        expected = anchors * m.overlaps
        assert np.max(np.abs(vel - expected)) < 1e-4

    def test_collision_guard(self):
        lam = np.array([0.4 + 0j, 0.4 + 1e-12j])
        with pytest.raises(CollisionSingularity):
            ode_vector_field(0.5, lam)

    def test_time_singularity_guard(self):
        lam = np.array([0.4 + 0j, -0.3 + 0.1j])
        with pytest.raises(TimeSingularity):
            ode_vector_field(1.0, lam)


class TestTracking:
    def test_scalar_radial_path(self):
        m = _scalar_model(theta=1.3)
        grid = np.array([1.0, 0.6, 0.2, 0.05])
        bundle = track(m, grid)
        expected = bundle.t_grid[None, :] * np.exp(1.3j)
        np.testing.assert_allclose(bundle.paths, expected, atol=1e-10)

    def test_anchor_column_is_exact(self):
        m = _model(6, 5)
        bundle = track(m, np.linspace(1.0, 0.3, 8))
        k = int(np.argmax(bundle.t_grid))
        assert np.array_equal(bundle.paths[:, k], m.eigensystem.eigenvalues)

    def test_refinement_keeps_steps_short(self):
        m = _model(8, 6)
        bundle = track(m, np.array([1.0, 0.1]), delta_track=0.05)
        assert bundle.refinement_count > 0
        steps = np.abs(np.diff(bundle.paths, axis=1))
        assert steps.max() <= 0.05 + 1e-12

    def test_determinant_modulus_along_bundle(self):
        m = _model(10, 7)
        bundle = track(m, np.linspace(1.0, 0.15, 12))
        mods = np.prod(np.abs(bundle.paths), axis=0)
        assert np.max(np.abs(mods - np.abs(bundle.t_grid))) < 1e-7

    def test_increasing_grid_accepted(self):
        m = _model(4, 8)
        down = track(m, np.linspace(1.0, 0.4, 7))
        up = track(m, np.linspace(0.4, 1.0, 7))
        np.testing.assert_allclose(
            down.paths, up.paths[:, ::-1], atol=1e-12
        )

    def test_negative_times_tracked(self):
        m = _model(5, 9)
        grid = np.array([1.0, 0.5, 0.0, -0.5, -0.9])
        bundle = track(m, grid)
        mods = np.prod(np.abs(bundle.paths), axis=0)
        assert np.max(np.abs(mods - np.abs(bundle.t_grid))) < 1e-7

    def test_terminal_assignment_stable_under_refinement(self):
        # A twice-finer grid must land every path on the same terminal
        # eigenvalue: the matching is a property of the curves, not of
        # the sampling.
        m = _model(12, 10)
        coarse = track(m, np.linspace(1.0, 0.2, 9))
        fine = track(m, np.linspace(1.0, 0.2, 17))
        k_c = int(np.argmin(coarse.t_grid))
        k_f = int(np.argmin(fine.t_grid))
        np.testing.assert_allclose(
            coarse.paths[:, k_c], fine.paths[:, k_f], atol=1e-9
        )

    def test_grid_validation(self):
        m = _model(3, 11)
        with pytest.raises(ValueError):
            track(m, np.array([0.9, 0.5]))  # no anchor at t = 1
        with pytest.raises(ValueError):
            track(m, np.array([1.0, 0.5, 0.7]))  # not monotone
        with pytest.raises(ValueError):
            track(m, np.array([1.0, -1.2]))  # leaves (-1, 1]

    def test_no_collision_at_grid_resolution(self):
        # Paths may approach each other near avoided crossings but should
        # never coincide at any sampled t.
        for trial in range(5):
            bundle = track(_model(30, 900, trial), np.linspace(1.0, 0.1, 19))
            for k in range(bundle.t_grid.size):
                col = bundle.paths[:, k]
                gaps = np.abs(col[:, None] - col[None, :])
                np.fill_diagonal(gaps, np.inf)
                assert gaps.min() > 0.0

    def test_ambiguity_is_warned_and_recorded(self):
        # An absurdly large tolerance flags every assignment as ambiguous;
        # the bundle must record the steps and a warning must be issued.
        m = _model(4, 3)
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            bundle = track(m, np.linspace(1.0, 0.5, 6), ambig_tol=10.0)
        assert len(bundle.ambiguous_steps) > 0
        assert any(isinstance(w.message, MatchingAmbiguous) for w in rec)


class TestIntegration:
    def test_scalar_integration(self):
        m = _scalar_model(theta=0.4)
        grid = np.linspace(1.0, 0.1, 10)
        bundle = integrate_ode(m, 0.1, t_eval=grid)
        expected = grid[None, :] * np.exp(0.4j)
        np.testing.assert_allclose(bundle.paths, expected, atol=1e-8)

    def test_matches_tracking_mid_size(self):
        m = _model(8, 12)
        grid = np.linspace(1.0, 0.2, 17)
        tracked = track(m, grid)
        integrated = integrate_ode(m, 0.2, t_eval=grid)
        idx = [int(np.argmin(np.abs(tracked.t_grid - t))) for t in grid]
        dev = max(
            np.max(np.abs(tracked.paths[:, i] - integrated.paths[:, k]))
            for k, i in enumerate(idx)
        )
        assert dev < 1e-5

    def test_matches_tracking_n16(self):
        m = _model(16, 5)
        grid = np.linspace(1.0, 0.2, 33)
        tracked = track(m, grid)
        integrated = integrate_ode(m, 0.2, t_eval=grid)
        idx = [int(np.argmin(np.abs(tracked.t_grid - t))) for t in grid]
        dev = max(
            np.max(np.abs(tracked.paths[:, i] - integrated.paths[:, k]))
            for k, i in enumerate(idx)
        )
        assert dev < 1e-5

    def test_determinant_invariant_under_flow(self):
        m = _model(2, 13)
        grid = np.linspace(1.0, 0.5, 11)
        bundle = integrate_ode(m, 0.5, t_eval=grid)
        mods = np.prod(np.abs(bundle.paths), axis=0)
        assert np.max(np.abs(mods - grid)) < 1e-8

    def test_rejects_bad_endpoint(self):
        m = _model(3, 14)
        with pytest.raises(ValueError):
            integrate_ode(m, 0.0)
        with pytest.raises(ValueError):
            integrate_ode(m, 1.5)


class TestPerturbativeIdentity:
    def test_scalar_case_is_exact(self):
        rep = validate_dynamics(_scalar_model(0.5), 0.6)
        assert rep.pert_vs_fd < 1e-9
        assert rep.field_vs_pert < 1e-12

    def test_mid_size_agreement(self):
        rep = validate_dynamics(_model(5, 15), 0.7)
        assert rep.pert_vs_fd < 1e-5
        assert rep.field_vs_fd < 1e-3
        assert rep.field_vs_pert < 1e-8

    def test_field_against_tracked_difference_quotient(self):
        # Centered difference of the tracked paths approximates the field
        # to O(h^2); at h = 1e-3 that is comfortably below 1e-3 relative.
        m = _model(6, 16)
        t, h = 0.55, 1e-3
        bundle = track(m, np.array([1.0, t + h, t, t - h]))
        grid = bundle.t_grid
        i_p = int(np.argmin(np.abs(grid - (t + h))))
        i_0 = int(np.argmin(np.abs(grid - t)))
        i_m = int(np.argmin(np.abs(grid - (t - h))))
        fd = (bundle.paths[:, i_p] - bundle.paths[:, i_m]) / (2 * h)
        vel = ode_vector_field(t, bundle.paths[:, i_0])
        rel = np.abs(fd - vel) / np.maximum(np.abs(vel), 1e-12)
        assert np.max(rel) < 1e-3
