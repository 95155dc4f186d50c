import json

import numpy as np
import pytest

from ineqlab.cli import main


def run(argv):
    return main(argv)


@pytest.fixture
def two_point_file(tmp_path):
    doc = {
        "labels": ["a", "b"],
        "dist": [[0.0, 1.0], [1.0, 0.0]],
        "measure": {"weights": [0.5, 0.5]},
    }
    path = tmp_path / "space.json"
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def grid_file(tmp_path):
    doc = {
        "generator": {"kind": "grid1d", "count": 21, "spacing": 0.05},
        "measure": {"density": "exp(-x**2/2)"},
    }
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestConstantsCommand:
    def test_quadratic_bundle(self, tmp_path, capsys):
        code = run(["constants", "--alpha", "power:2,2", "--A", "1",
                    "--lambda", "0.5", "--output-dir", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "constants.json").read_text())
        res = report["result"]
        assert res["c_plus"] == 1.0
        assert res["c_minus"] == 1.0
        assert res["kappa"] == 4.0
        assert res["kappa_tilde"] == 16.0

    def test_bad_alpha_spec(self, tmp_path):
        assert run(["constants", "--alpha", "power:2", "--A", "1",
                    "--lambda", "0.5", "--output-dir", str(tmp_path)]) == 1


class TestXiTable:
    def test_agreement_column(self, tmp_path):
        code = run(["xi-table", "--alpha", "power:3,2",
                    "--grid", "0.01:10:60", "--output-dir", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "xi-table.json").read_text())
        assert report["result"]["agree_1e-5"] is True
        rows = (tmp_path / "xi-table.csv").read_text().strip().splitlines()
        assert rows[0] == "x,closed_form,numeric,rel_err"
        assert len(rows) == 61


class TestValidateSpace:
    def test_valid(self, two_point_file, tmp_path):
        assert run(["validate-space", "--space-file", two_point_file,
                    "--output-dir", str(tmp_path)]) == 0

    def test_invalid_triangle(self, tmp_path):
        doc = {"labels": ["a", "b", "c"],
               "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert run(["validate-space", "--space-file", str(path),
                    "--output-dir", str(tmp_path)]) == 1


class TestMeasureErrors:
    def test_unnormalized_weights_exit_one(self, tmp_path):
        doc = {"labels": ["a", "b"], "dist": [[0.0, 1.0], [1.0, 0.0]],
               "measure": {"weights": [0.5, 0.4]}}
        path = tmp_path / "bad_measure.json"
        path.write_text(json.dumps(doc))
        code = run(["estimate", "T", "--alpha", "power:2,2", "--seed", "1",
                    "--space-file", str(path), "--output-dir", str(tmp_path)])
        assert code == 1

    def test_missing_seed_exit_one(self, two_point_file, tmp_path):
        assert run(["estimate", "T", "--alpha", "power:2,2",
                    "--space-file", two_point_file,
                    "--output-dir", str(tmp_path)]) == 1


class TestRuns:
    def test_transport_and_plan_csv(self, tmp_path, two_point_file):
        cfg = {"source": {"weights": [0.9, 0.1]}}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        code = run(["transport", "--config", str(cfg_path), "--alpha",
                    "power:2,2", "--seed", "7", "--space-file", two_point_file,
                    "--output-dir", str(tmp_path)])
        assert code == 0
        rows = (tmp_path / "transport-plan.csv").read_text().strip().splitlines()
        assert rows[0] == "i,j,mass,cost_contrib"
        report = json.loads((tmp_path / "transport.json").read_text())
        assert report["result"]["cost"] == pytest.approx(0.4)  # |0.9-0.5| * 1

    def test_estimate_and_verify_exit_codes(self, tmp_path, two_point_file):
        assert run(["estimate", "T", "--alpha", "power:2,2", "--seed", "1",
                    "--space-file", two_point_file,
                    "--output-dir", str(tmp_path)]) == 0
        assert run(["verify", "T-to-tauLSI", "--alpha", "power:2,2",
                    "--seed", "1", "--space-file", two_point_file,
                    "--output-dir", str(tmp_path)]) == 0

    def test_verify_dual(self, tmp_path, two_point_file):
        assert run(["verify", "dual", "--alpha", "power:2,2", "--seed", "1",
                    "--level", "0.0001", "--space-file", two_point_file,
                    "--output-dir", str(tmp_path)]) == 0

    def test_concentration(self, tmp_path, two_point_file):
        assert run(["verify", "concentration", "--alpha", "power:2,2",
                    "--seed", "1", "--C", "300", "--p", "2",
                    "--space-file", two_point_file,
                    "--output-dir", str(tmp_path)]) == 0

    def test_lemma_bounds(self, tmp_path, two_point_file):
        assert run(["lemma-bounds", "--alpha", "power:3,2", "--seed", "3",
                    "--order", "2", "--t", "0.4",
                    "--space-file", two_point_file,
                    "--output-dir", str(tmp_path)]) == 0


class TestDeterminism:
    def test_reports_identical_modulo_timestamp(self, tmp_path, two_point_file):
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        for out in (out1, out2):
            assert run(["estimate", "T", "--alpha", "power:2,2", "--seed",
                        "42", "--space-file", two_point_file,
                        "--output-dir", str(out)]) == 0
        r1 = json.loads((out1 / "estimate-T.json").read_text())
        r2 = json.loads((out2 / "estimate-T.json").read_text())
        r1.pop("timestamp")
        r2.pop("timestamp")
        r1["config"].pop("output-dir")
        r2["config"].pop("output-dir")
        assert r1 == r2

    def test_report_embeds_config_and_schema(self, tmp_path, two_point_file):
        run(["estimate", "T", "--alpha", "power:2,2", "--seed", "42",
             "--space-file", two_point_file, "--output-dir", str(tmp_path)])
        report = json.loads((tmp_path / "estimate-T.json").read_text())
        assert report["schema"] == 1
        assert report["seed"] == 42
        assert report["config"]["alpha"] == "power:2,2"
