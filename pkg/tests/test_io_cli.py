import json

import numpy as np
import pytest

from flowdim.bandlimited import Band, Signal
from flowdim.cli import main
from flowdim.dynamics import RoofFunction, SuspensionPoint, suspend
from flowdim.io import (
    load_sample,
    load_sample_json,
    load_signal,
    load_system,
    save_signal,
    write_table_csv,
    write_trajectory_csv,
    write_spectrum_csv,
)
from flowdim.metric import widim_upper


class TestSampleIO:
    def test_euclidean_points(self):
        sample = load_sample({"points": [[0, 0], [1, 0], [0, 1]],
                              "metric": "euclidean"})
        assert sample.distance((0, 0), (1, 0)) == pytest.approx(1.0)

    def test_sup_points(self):
        sample = load_sample({"points": [[0, 0], [0.3, 0.1]], "metric": "sup"})
        assert sample.distance((0, 0), (0.3, 0.1)) == pytest.approx(0.3)

    def test_circle_points(self):
        sample = load_sample({"points": [0.0, 0.9], "metric": "circle",
                              "period": 1.0})
        assert sample.dist[0, 1] == pytest.approx(0.1)

    def test_matrix_form(self):
        sample = load_sample({"ids": ["p", "q"],
                              "matrix": [[0.0, 2.0], [2.0, 0.0]]})
        assert sample.distance("p", "q") == 2.0

    def test_json_roundtrip(self, tmp_path):
        path = tmp_path / "sample.json"
        path.write_text(json.dumps({"points": [[0], [0.5], [1.0]],
                                    "metric": "euclidean"}))
        sample = load_sample_json(path)
        assert len(sample) == 3
        assert widim_upper(sample, 0.4) >= 0


class TestSystemIO:
    def test_manifest_with_roof(self):
        sys, roof = load_system({
            "points": [0.0, 0.25, 0.5, 0.75], "metric": "circle", "period": 1.0,
            "step": [1, 2, 3, 0], "roof": [1.0, 1.0, 2.0, 1.0]})
        assert roof.f_min == 1.0
        out = suspend(sys, roof, SuspensionPoint(0, 0.0), 1.0)
        assert out.state == 1

    def test_trajectory_csv(self, tmp_path):
        rows = [(0.0, 3, 0.0), (0.5, 3, 0.5), (1.0, 4, 0.0)]
        path = write_trajectory_csv(tmp_path / "traj.csv", rows)
        text = path.read_text().splitlines()
        assert text[0] == "t,state,height"
        assert len(text) == 4


class TestSignalIO:
    def test_save_load_roundtrip(self, tmp_path):
        sig = Signal.from_function(lambda t: np.exp(2j * np.pi * 0.5 * t),
                                   Band(0, 1), 10.0, 1 / 8, sup_bound=True)
        json_path, csv_path = save_signal(tmp_path / "tone", sig)
        back = load_signal(json_path)
        assert back.band == sig.band
        assert np.abs(back.values - sig.values).max() < 1e-15

    def test_spectrum_export(self, tmp_path):
        sig = Signal.from_function(lambda t: np.exp(2j * np.pi * 0.5 * t),
                                   Band(0, 1), 10.0, 1 / 8)
        path = write_spectrum_csv(tmp_path / "spec.csv", sig)
        header = path.read_text().splitlines()[0]
        assert header == "freq,power"


class TestCsvDeterminism:
    def test_reruns_are_byte_identical(self, tmp_path):
        rows = [(0.1, 1, 1 / 3), (0.2, 2, np.pi)]
        p1 = write_table_csv(tmp_path / "a.csv", rows)
        p2 = write_table_csv(tmp_path / "b.csv", rows)
        assert p1.read_bytes() == p2.read_bytes()


class TestCli:
    def test_periodic_dim_json(self, tmp_path):
        code = main(["--out", str(tmp_path), "periodic-dim", "--a", "1", "--r", "2.5"])
        assert code == 0
        payload = json.loads(next(p for p in tmp_path.glob("periodic-dim-*.json")
                                  if "manifest" not in p.name).read_text())
        assert payload == {"formula": 5, "rank": 5, "pass": True, "n_points": 16}

    def test_missing_parameters_usage_error(self, tmp_path):
        assert main(["--out", str(tmp_path), "periodic-dim"]) == 2

    def test_widim_sweep(self, tmp_path):
        manifest = tmp_path / "sample.json"
        pts = [[i / 20, j / 20] for i in range(21) for j in range(21)]
        manifest.write_text(json.dumps({"points": pts, "metric": "sup"}))
        code = main(["--out", str(tmp_path), "widim-sweep",
                     "--sample", str(manifest), "--eps-list", "0.3,0.5"])
        assert code == 0
        csv_path = next(p for p in tmp_path.glob("widim-sweep-*.csv"))
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "epsilon,N,value"
        values = {float(l.split(",")[0]): float(l.split(",")[2]) for l in lines[1:]}
        assert values[0.3] == 2.0

    def test_mdim_table_cube(self, tmp_path):
        code = main(["--out", str(tmp_path), "mdim-table", "--family", "cube",
                     "--D", "1", "--N-max", "2"])
        assert code == 0
        csv_path = next(p for p in tmp_path.glob("mdim-table-*.csv"))
        rows = csv_path.read_text().splitlines()[1:]
        assert all(float(r.split(",")[2]) == 1.0 for r in rows)

    def test_bw_metric_from_manifest(self, tmp_path):
        manifest = tmp_path / "system.json"
        manifest.write_text(json.dumps({
            "points": [0.0, 0.25, 0.5, 0.75], "metric": "circle", "period": 1.0,
            "step": [1, 2, 3, 0]}))
        code = main(["--out", str(tmp_path), "bw-metric", "--system", str(manifest),
                     "--height-grid", "4", "--max-segments", "4"])
        assert code == 0

    def test_config_file_with_overrides(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("a = 1\nr = 0.5\n")
        code = main(["--config", str(cfg), "--out", str(tmp_path), "periodic-dim"])
        assert code == 0
        payload = json.loads(next(p for p in tmp_path.glob("periodic-dim-*.json")
                                  if "manifest" not in p.name).read_text())
        assert payload["formula"] == 1

    def test_manifest_written(self, tmp_path):
        main(["--out", str(tmp_path), "periodic-dim", "--a", "1", "--r", "0.5"])
        manifest = json.loads(next(tmp_path.glob("*-manifest.json")).read_text())
        assert manifest["passed"] is True
        assert manifest["files"]

    def test_rerun_determinism(self, tmp_path):
        a, b = tmp_path / "one", tmp_path / "two"
        for out in (a, b):
            main(["--out", str(out), "mdim-table", "--family", "binary",
                  "--N-max", "2", "--eps-list", "0.1"])
        fa = next(a.glob("mdim-table-*.csv")).read_bytes()
        fb = next(b.glob("mdim-table-*.csv")).read_bytes()
        assert fa == fb

    def test_solenoid_demo(self, tmp_path):
        code = main(["--out", str(tmp_path), "solenoid-demo", "--depth", "3",
                     "--T", "800", "--n-points", "2", "--seed", "1"])
        assert code == 0
        payload = json.loads(next(p for p in tmp_path.glob("solenoid-demo-*.json")
                                  if "manifest" not in p.name).read_text())
        assert payload["pass"] is True

    def test_embed_pipeline(self, tmp_path):
        code = main(["--out", str(tmp_path), "embed-pipeline", "--base-size", "6",
                     "--heights", "5", "--seed", "3"])
        assert code == 0
        payload = json.loads(next(p for p in tmp_path.glob("embed-pipeline-*.json")
                                  if "manifest" not in p.name).read_text())
        assert payload["pass"] is True
        assert payload["verdict_passed"] is True
        assert payload["seed"] == 3
        assert payload["constants"]["K_dec"] > 0
