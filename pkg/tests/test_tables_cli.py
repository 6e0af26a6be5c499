"""Serialization, figures, config validation, and the experiment runner."""

import json
import os
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

import ualab.runner as runner_mod
from ualab.config import ExperimentConfig, GridSpec, load_config, validate_config
from ualab.errors import ConfigInvalid, IoError, SchemaMismatch
from ualab.cli import main
from ualab.model import UAModel, spectrum
from ualab.rng import OFFSET_MODEL, stream
from ualab.rouche import EnsembleConfig, timescale_sweep
from ualab.runner import ENV_OUTPUT_ROOT, run
from ualab.svg import emit_trajectory_svg
from ualab.tables import (
    bundle_records,
    identity_records,
    read_csv,
    read_jsonl,
    snapshot_records,
    sweep_records,
    write_csv,
    write_jsonl,
)
from ualab.trajectories import track


def _model(n, seed):
    return UAModel.sample(n, stream(seed, 0, OFFSET_MODEL))


class TestCsv:
    def test_spectra_roundtrip_full_precision(self, tmp_path):
        snap = spectrum(_model(2, 1), 0.7, trial=4)
        rows = snapshot_records(snap, trial=4, seed=123)
        path = tmp_path / "spectra.csv"
        write_csv(rows, "spectra", path)
        text = path.read_text().splitlines()
        assert text[0] == "trial,seed,t,index,re,im"
        assert len(text) == 3
        back = read_csv(path, "spectra")
        for a, b in zip(rows, back):
            assert a["re"] == b["re"]  # bit-exact through %.17g
            assert a["im"] == b["im"]
            assert b["seed"] == 123

    def test_nullable_seed(self, tmp_path):
        snap = spectrum(_model(2, 2), 0.5)
        rows = snapshot_records(snap)
        path = tmp_path / "s.csv"
        write_csv(rows, "spectra", path)
        assert read_csv(path, "spectra")[0]["seed"] is None

    def test_sweep_rows(self, tmp_path):
        sweep = timescale_sweep(EnsembleConfig(n=20, seed=3), [0.1, 0.2, 0.3], trials=4)
        rows = sweep_records(sweep)
        assert len(rows) == 6  # two branches per alpha
        path = tmp_path / "sweep.csv"
        write_csv(rows, "sweep", path)
        assert len(read_csv(path, "sweep")) == 6

    def test_schema_violations(self, tmp_path):
        path = tmp_path / "x.csv"
        with pytest.raises(SchemaMismatch):
            write_csv([{"trial": 0}], "spectra", path)
        with pytest.raises(SchemaMismatch):
            write_csv(
                [
                    {
                        "trial": 0,
                        "seed": None,
                        "t": float("nan"),
                        "index": 0,
                        "re": 0.0,
                        "im": 0.0,
                    }
                ],
                "spectra",
                path,
            )
        with pytest.raises(SchemaMismatch):
            write_csv([], "no_such_schema", path)

    def test_read_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(SchemaMismatch):
            read_csv(path, "spectra")


class TestJsonl:
    def test_complex_encoding(self, tmp_path):
        path = tmp_path / "r.jsonl"
        write_jsonl([{"z": 0.25 + 0.5j, "n": 3}], path)
        back = read_jsonl(path)
        assert back[0]["z"] == {"im": 0.5, "re": 0.25}
        assert back[0]["n"] == 3

    def test_identity_records_verdicts(self, tmp_path):
        from ualab.cuestats import cue_phase_identities

        batch = cue_phase_identities(3, trials=300, seed=1, trace_ells=(1,),
                                     pair_ells=(), distinct_coeffs=())
        rows = identity_records(batch.reports, seed=1)
        assert rows[0]["verdict"] in ("pass", "fail")
        path = tmp_path / "i.jsonl"
        write_jsonl(rows, path)
        assert read_jsonl(path)[0]["name"] == rows[0]["name"]


class TestSvg:
    def _bundle(self, n=5, seed=4):
        return track(_model(n, seed), np.linspace(1.0, 0.2, 9))

    def test_valid_xml_with_expected_structure(self):
        text = emit_trajectory_svg(self._bundle())
        root = ET.fromstring(text)
        assert root.tag.endswith("svg")
        ns = {"s": "http://www.w3.org/2000/svg"}
        groups = root.findall(".//s:g", ns)
        assert len(groups) == 5
        circles = root.findall(".//s:circle", ns)
        assert len(circles) >= 1 + 5  # unit circle plus anchor dots

    def test_scalar_model_draws_radial_path(self):
        theta = 0.6
        m = UAModel(np.array([[np.exp(1j * theta)]]), np.array([1.0 + 0j]))
        bundle = track(m, np.linspace(1.0, 0.1, 12))
        text = emit_trajectory_svg(bundle)
        root = ET.fromstring(text)
        ns = {"s": "http://www.w3.org/2000/svg"}
        lines = root.findall(".//s:g/s:line", ns)
        assert len(lines) == bundle.t_grid.size - 1
        # All segment endpoints sit on the ray of angle -theta (svg y is
        # flipped), so y/x is constant.
        for ln in lines:
            x, y = float(ln.get("x1")), float(ln.get("y1"))
            assert abs(y / x + np.tan(theta)) < 1e-3

    def test_unknown_style_key_rejected(self):
        with pytest.raises(ValueError):
            emit_trajectory_svg(self._bundle(), style={"line_width": 2})

    def test_path_count_scales(self):
        text = emit_trajectory_svg(self._bundle(n=20, seed=5))
        assert text.count('class="traj"') == 20


class TestConfig:
    def _raw(self, **over):
        raw = {
            "experiment": "trajectories",
            "n": 6,
            "seed": 1,
            "t_grid": {"kind": "linear", "start": 1.0, "stop": 0.2, "count": 9},
        }
        raw.update(over)
        return raw

    def test_valid_minimal(self):
        cfg = validate_config(self._raw())
        assert cfg.experiment == "trajectories"
        assert cfg.trials == 200  # default applied
        assert cfg.t_grid.to_array()[0] == 1.0

    def test_unknown_experiment(self):
        with pytest.raises(ConfigInvalid):
            validate_config(self._raw(experiment="frobnicate"))

    def test_problems_are_collected(self):
        raw = self._raw(n=-3, seed="x", bogus=1)
        with pytest.raises(ConfigInvalid) as exc:
            validate_config(raw)
        fields = [f for f, _ in exc.value.problems]
        assert "bogus" in fields

    def test_field_applicability(self):
        with pytest.raises(ConfigInvalid) as exc:
            validate_config(self._raw(alpha_grid=[0.1]))
        assert any("alpha_grid" == f for f, _ in exc.value.problems)

    def test_grid_domain_for_ode(self):
        raw = self._raw(experiment="ode-compare")
        raw["t_grid"] = {"kind": "linear", "start": 1.0, "stop": -0.5, "count": 5}
        with pytest.raises(ConfigInvalid):
            validate_config(raw)

    def test_anchor_required(self):
        raw = self._raw()
        raw["t_grid"] = {"kind": "linear", "start": 0.9, "stop": 0.2, "count": 5}
        with pytest.raises(ConfigInvalid):
            validate_config(raw)

    def test_geometric_grid(self):
        g = GridSpec(kind="geometric", start=1.0, stop=0.125, count=4)
        np.testing.assert_allclose(g.to_array(), [1.0, 0.5, 0.25, 0.125])

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        with pytest.raises(ConfigInvalid):
            load_config(path)


def _traj_config(tmp_path, **over):
    raw = {
        "experiment": "trajectories",
        "n": 5,
        "seed": 9,
        "t_grid": {"kind": "linear", "start": 1.0, "stop": 0.3, "count": 8},
        "output_dir": str(tmp_path / "out"),
    }
    raw.update(over)
    return validate_config(raw)


class TestRunner:
    def test_emits_files_and_manifest(self, tmp_path):
        manifest = run(_traj_config(tmp_path))
        out = Path(manifest.output_dir)
        assert (out / "trajectories.csv").exists()
        assert (out / "trajectories.svg").exists()
        assert (out / "manifest.json").exists()
        for name, digest in manifest.files.items():
            assert len(digest) == 64

    def test_rerun_is_byte_identical(self, tmp_path):
        m1 = run(_traj_config(tmp_path))
        data1 = {
            p.name: p.read_bytes()
            for p in Path(m1.output_dir).iterdir()
            if p.name != "manifest.json"
        }
        m2 = run(_traj_config(tmp_path))
        data2 = {
            p.name: p.read_bytes()
            for p in Path(m2.output_dir).iterdir()
            if p.name != "manifest.json"
        }
        assert data1 == data2
        assert m1.files == m2.files

    def test_env_var_points_the_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv(ENV_OUTPUT_ROOT, str(tmp_path / "root"))
        cfg = validate_config(
            {
                "experiment": "trajectories",
                "n": 4,
                "seed": 2,
                "t_grid": {"kind": "linear", "start": 1.0, "stop": 0.4, "count": 5},
            }
        )
        manifest = run(cfg)
        assert str(tmp_path / "root") in manifest.output_dir

    def test_refuses_to_clobber_foreign_dir(self, tmp_path):
        target = tmp_path / "out"
        target.mkdir()
        (target / "precious.txt").write_text("do not delete")
        with pytest.raises(IoError):
            run(_traj_config(tmp_path))
        assert (target / "precious.txt").exists()

    def test_failed_run_leaves_no_output(self, tmp_path, monkeypatch):
        def boom(config, out):
            raise RuntimeError("mid-run failure")

        monkeypatch.setitem(runner_mod._DRIVERS, "trajectories", boom)
        with pytest.raises(RuntimeError):
            run(_traj_config(tmp_path))
        assert not (tmp_path / "out").exists()
        leftovers = [p for p in tmp_path.iterdir()]
        assert leftovers == []


class TestCli:
    def test_validate_ok(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment": "trajectories",
                    "n": 4,
                    "seed": 3,
                    "t_grid": {"kind": "linear", "start": 1.0, "stop": 0.4, "count": 5},
                }
            )
        )
        assert main(["validate", str(cfg)]) == 0

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"experiment": "sweep", "n": 10, "seed": 0}))
        code = main(["validate", str(cfg)])
        assert code == 2
        err = capsys.readouterr().err
        assert "trials" in err

    def test_run_and_plot_roundtrip(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment": "trajectories",
                    "n": 4,
                    "seed": 3,
                    "t_grid": {"kind": "linear", "start": 1.0, "stop": 0.4, "count": 6},
                    "output_dir": str(tmp_path / "out"),
                }
            )
        )
        assert main(["run", str(cfg)]) == 0
        csv_path = tmp_path / "out" / "trajectories.csv"
        svg_path = tmp_path / "replot.svg"
        assert main(["plot", str(csv_path), "-o", str(svg_path)]) == 0
        ET.fromstring(svg_path.read_text())

    def test_runtime_failure_exits_3(self, tmp_path, capsys):
        target = tmp_path / "out"
        target.mkdir()
        (target / "somefile").write_text("x")
        cfg = tmp_path / "c.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment": "trajectories",
                    "n": 4,
                    "seed": 3,
                    "t_grid": {"kind": "linear", "start": 1.0, "stop": 0.4, "count": 6},
                    "output_dir": str(target),
                }
            )
        )
        assert main(["run", str(cfg)]) == 3
