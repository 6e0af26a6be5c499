"""Full-scale acceptance suite.

Twelve checks, each at its production size and tolerance, one test per
criterion. Every test registers its verdict with the terminal-summary
hook in conftest.py before asserting, so the run always ends with a
complete PASS/FAIL scorecard.

Criteria 10 and 11 encode asymptotic separation statements evaluated at
N=500. The subcritical clause of 10 and the empty-disk clause of 11
measure far from their asymptotic targets at this dimension; the tests
state the claimed thresholds verbatim and are expected to fail until the
claims themselves are revisited. See the repository notes for the
measured values.
"""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pytest
from conftest import record_criterion

from ualab.config import validate_config
from ualab.cuestats import (
    cue_phase_identities,
    eigvec_overlap_check,
    exact_var_w2,
    kostlan_check,
    mc_w2_moments,
)
from ualab.hyper import euler_transform, hyp2f1, partition_sum_identity
from ualab.model import (
    UAModel,
    omega1,
    spectrum,
    verify_characterization,
    verify_structure,
)
from ualab.rng import OFFSET_MODEL, stream
from ualab.rouche import DiskSpec, classify_snapshot, simplified_disks
from ualab.runner import run
from ualab.trajectories import integrate_ode, track, validate_dynamics


def _model(n, seed, sid=0):
    return UAModel.sample(n, stream(seed, sid, OFFSET_MODEL))


def test_criterion_01_interior_level_set():
    t_values = np.linspace(-0.9, 0.9, 22)[1:-1]
    worst = 0.0
    for trial in range(50):
        model = _model(50, 9001, trial)
        for t in t_values:
            rep = verify_characterization(model, float(t))
            worst = max(worst, rep.max_residual)
    ok = worst < 1e-6
    record_criterion(1, "interior level set", ok, f"max residual {worst:.2e}")
    assert ok


def test_criterion_02_structure():
    g = stream(9002)
    worst_inv = worst_sv = 0.0
    for trial in range(20):
        model = _model(12, 9002, trial)
        t = float(g.uniform(0.1, 0.95)) * (1 if trial % 2 else -1)
        rep = verify_structure(model, t)
        worst_inv = max(worst_inv, rep.inversion_error)
        worst_sv = max(worst_sv, rep.singular_value_error)
    ok = worst_inv < 1e-8 and worst_sv < 1e-9
    record_criterion(
        2, "structure", ok, f"inversion {worst_inv:.2e}, sv {worst_sv:.2e}"
    )
    assert ok


def test_criterion_03_dynamics_cross_validation():
    sizes = [2, 3, 4, 5, 6, 7, 8, 8, 6, 4]
    worst_dev = 0.0
    for i, n in enumerate(sizes):
        model = _model(n, 101, i)
        grid = np.linspace(1.0, 0.2, 17)
        tracked = track(model, grid)
        integrated = integrate_ode(model, 0.2, t_eval=grid)
        idx = [int(np.argmin(np.abs(tracked.t_grid - t))) for t in grid]
        dev = max(
            np.max(np.abs(tracked.paths[:, j] - integrated.paths[:, k]))
            for k, j in enumerate(idx)
        )
        worst_dev = max(worst_dev, dev)

    worst_pert = 0.0
    probes = 0
    for i in range(5):
        model = _model(2 + (i * 2) % 7, 1101, i)
        for t in np.linspace(0.25, 0.85, 4):
            rep = validate_dynamics(model, float(t))
            worst_pert = max(worst_pert, rep.pert_vs_fd)
            probes += 1
    assert probes == 20
    ok = worst_dev < 1e-5 and worst_pert < 1e-4
    record_criterion(
        3, "dynamics", ok, f"ode-vs-track {worst_dev:.2e}, identity-vs-fd {worst_pert:.2e}"
    )
    assert ok


def test_criterion_04_w2_variance():
    ok = True
    details = []
    for i, z in enumerate((0.3, 0.5, 0.8)):
        rep = mc_w2_moments(50, z, trials=10_000, seed=9004 + i)
        exact = exact_var_w2(50, z)
        strict = exact.lower_envelope < exact.value < exact.upper_envelope
        ok = ok and rep.variance.verdict and strict
        details.append(f"z={z}: {rep.variance.estimate.value:.2e}")
    record_criterion(4, "W2 variance", ok, "; ".join(details))
    assert ok


def test_criterion_05_trace_powers():
    batch = cue_phase_identities(
        20, trials=10_000, seed=9005, trace_ells=(1, 5, 20, 30), pair_ells=(),
        distinct_coeffs=(),
    )
    claims = {r.name: r.claimed for r in batch.reports}
    assert claims["trace_power_l1_n20"] == 1
    assert claims["trace_power_l5_n20"] == 5
    assert claims["trace_power_l20_n20"] == 20
    assert claims["trace_power_l30_n20"] == 20
    ok = batch.all_passed
    record_criterion(5, "trace powers", ok)
    assert ok


def test_criterion_06_eigenvector_overlaps():
    batch = eigvec_overlap_check(10, trials=10_000, seed=9006)
    claims = {r.name: r.claimed for r in batch.reports}
    assert claims["overlap_diagonal_n10"] == pytest.approx(2.0 / 110.0)
    assert claims["overlap_offdiagonal_n10"] == pytest.approx(1.0 / 110.0)
    ok = batch.all_passed
    record_criterion(6, "eigenvector overlaps", ok)
    assert ok


def test_criterion_07_distinct_phase_bounds():
    b10 = cue_phase_identities(
        10, trials=10_000, seed=9007, trace_ells=(), pair_ells=(),
        distinct_coeffs=((1, -2), (1, -2, 1)),
    )
    b20 = cue_phase_identities(
        20, trials=10_000, seed=9017, trace_ells=(), pair_ells=(),
        distinct_coeffs=((1, -2, 1),),
    )
    ok = b10.all_passed and b20.all_passed
    record_criterion(7, "distinct phase bounds", ok)
    assert ok


def test_criterion_08_hypergeometric():
    worst_euler = 0.0
    for m in range(1, 7):
        for x in np.arange(0.1, 0.95, 0.1):
            lhs = hyp2f1(m, m, 1.0, float(x))
            rhs = euler_transform(m, m, 1.0, float(x))
            worst_euler = max(worst_euler, abs(lhs - rhs) / abs(lhs))
    routes_ok = True
    for m in (1, 2, 3, 4):
        rep = partition_sum_identity(m, 0.3, l_max=40 if m < 4 else 30)
        routes_ok = routes_ok and rep.counts_match
        routes_ok = routes_ok and abs(rep.brute_force - rep.binomial_series) < 1e-10
        routes_ok = routes_ok and (
            abs(rep.binomial_series - rep.hypergeometric) <= rep.tail_bound + 1e-10
        )
    ok = worst_euler < 1e-12 and routes_ok
    record_criterion(8, "hypergeometric", ok, f"euler residual {worst_euler:.2e}")
    assert ok


def test_criterion_09_radial_order_statistics():
    rep = kostlan_check(30, 1, trials=5000, seed=9009)
    small = kostlan_check(2, 1, trials=5000, seed=9019)
    ok = (
        rep.max_ks < 0.05
        and small.all_above.claimed == pytest.approx(0.375)
        and small.all_above.verdict
    )
    record_criterion(
        9, "radial order statistics", ok,
        f"max KS {rep.max_ks:.4f}, small-case {small.all_above.estimate.value:.4f}",
    )
    assert ok


def test_criterion_10_outlier_timescales():
    n, eps, trials = 500, 0.1, 200
    t_sub = n**-0.75
    t_sup = n**-0.25

    def one(trial):
        model = _model(n, 9010, trial)
        om = omega1(model)
        sub_rep = classify_snapshot(
            spectrum(model, t_sub), simplified_disks(om, n, t_sub, eps)
        )
        sup_disks = simplified_disks(om, n, t_sup, eps)
        sup_ok = sup_disks["D3"].count(spectrum(model, t_sup).eigenvalues) == 0
        return sub_rep.subcritical_pass, sup_ok

    with ThreadPoolExecutor(max_workers=4) as pool:
        outcomes = list(pool.map(one, range(trials)))
    sub_frac = sum(s for s, _ in outcomes) / trials
    sup_frac = sum(s for _, s in outcomes) / trials
    ok = sub_frac >= 0.9 and sup_frac >= 0.9
    record_criterion(
        10, "outlier timescales", ok,
        f"subcritical {sub_frac:.3f}, supercritical {sup_frac:.3f}, need 0.90",
    )
    assert ok


def test_criterion_11_critical_window():
    from ualab.rouche import critical_window_stats

    rows = critical_window_stats(500, [1.0], trials=200, a=0.2, b=0.9,
                                 seed=9011, workers=4)
    row = rows[0]
    crowd_ok = row.freq_ge2_b > 0.5
    window_ok = 0.05 <= row.freq_empty_a <= 0.95
    ok = crowd_ok and window_ok
    record_criterion(
        11, "critical window", ok,
        f"P(>=2 in 0.9-disk) {row.freq_ge2_b:.3f}, P(empty 0.2-disk) {row.freq_empty_a:.3f}",
    )
    assert ok


def test_criterion_12_determinism(tmp_path):
    def once(name):
        cfg = validate_config(
            {
                "experiment": "trajectories",
                "n": 32,
                "seed": 77,
                "t_grid": {"kind": "linear", "start": 1.0, "stop": 0.2, "count": 12},
                "output_dir": str(tmp_path / name),
            }
        )
        manifest = run(cfg)
        payload = {
            p.name: p.read_bytes()
            for p in Path(manifest.output_dir).iterdir()
            if p.name != "manifest.json"
        }
        return manifest.files, payload

    digests1, bytes1 = once("a")
    digests2, bytes2 = once("b")
    ok = digests1 == digests2 and bytes1 == bytes2
    record_criterion(12, "determinism", ok)
    assert ok
