import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from bbviz.cli import main
from bbviz.data import load_csv


@pytest.fixture
def workdir(tmp_path, monkeypatch, wine_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("BBC_DATA_DIR", str(wine_path.parent))
    return tmp_path


def run(*argv) -> int:
    return main(list(argv))


class TestTrain:
    def test_wine_mlp(self, workdir, capsys):
        code = run("train", "--data", "wine", "--model", "mlp", "--hidden", "3",
                   "--iters", "30", "--restarts", "20", "--seed", "1",
                   "--out", "m.json")
        assert code == 0
        doc = json.loads((workdir / "m.json").read_text())
        assert doc["type"] == "mlp"
        report = json.loads((workdir / "m_report.json").read_text())
        assert report["training_errors"] == 0
        assert "0 training errors" in capsys.readouterr().out

    def test_rbf(self, workdir):
        code = run("train", "--model", "rbf", "--centers", "6", "--data", "wine",
                   "--seed", "1", "--restarts", "10", "--out", "rbf.json")
        assert code == 0
        report = json.loads((workdir / "rbf_report.json").read_text())
        assert report["training_errors"] <= 3

    def test_missing_file_exit_2(self, workdir, capsys):
        code = run("train", "--data", "/no/such/file.data", "--out", "m.json")
        assert code == 2
        assert "/no/such/file.data" in capsys.readouterr().err

    def test_bad_config_exit_2(self, workdir):
        assert run("train", "--data", "wine", "--iters", "0", "--out", "m.json") == 2

    def test_optimization_failure_exit_3(self, workdir, monkeypatch, capsys):
        from bbviz import cli

        def boom(server, method, path, payload=None):
            raise cli.ServiceError("optimization", "non-finite objective at iteration 3")

        monkeypatch.setattr(cli, "request", boom)
        code = run("train", "--data", "wine", "--out", "m.json")
        assert code == 3
        assert "iteration 3" in capsys.readouterr().err


class TestPipeline:
    def test_project_render_perturb_report(self, workdir):
        assert run("train", "--data", "wine", "--hidden", "2", "--iters", "60",
                   "--restarts", "5", "--seed", "1", "--out", "m.json") == 0
        assert run("project", "--model", "m.json", "--data", "wine",
                   "--out", "pts.json") == 0
        doc = json.loads((workdir / "pts.json").read_text())
        assert doc["k"] == 3
        assert len(doc["points"]) == 178

        assert run("render", "--points", "pts.json", "--hull",
                   "--out", "plot.svg") == 0
        svg = (workdir / "plot.svg").read_text()
        ET.fromstring(svg)

        assert run("perturb", "--data", "wine", "--fraction", "0.05",
                   "--per-point", "2", "--seed", "3", "--out", "noise.csv") == 0
        replicas = load_csv(workdir / "noise.csv", label_col=-1)
        assert replicas.n == 356

        assert run("project", "--model", "m.json", "--data", "noise.csv",
                   "--kind", "perturbed", "--out", "npts.json") == 0
        assert run("render", "--points", "pts.json", "--points", "npts.json",
                   "--out", "layered.svg") == 0
        ET.fromstring((workdir / "layered.svg").read_text())

        assert run("report", "--model", "m.json", "--data", "wine",
                   "--threshold", "0.9", "--out", "rep.json") == 0
        metrics = json.loads((workdir / "rep.json").read_text())
        kept = [row["kept"] for row in metrics["threshold_table"]]
        assert kept == sorted(kept, reverse=True)

    def test_perturb_select_indices(self, workdir):
        assert run("perturb", "--data", "wine", "--fraction", "0.02",
                   "--per-point", "10", "--select", "0,1,2",
                   "--out", "sel.csv") == 0
        assert load_csv(workdir / "sel.csv", label_col=-1).n == 30

    def test_format_flag_validation(self, workdir):
        assert run("perturb", "--data", "wine", "--fraction", "0.1",
                   "--format", "svg", "--out", "x.csv") == 2

    def test_render_without_points_exit_2(self, workdir):
        assert run("render", "--out", "x.svg") == 2


class TestReproduce:
    def test_underfit_writes_manifest(self, workdir):
        assert run("reproduce", "underfit", "--seed", "1", "--out", "out") == 0
        names = {p.name for p in (workdir / "out").iterdir()}
        assert {"underfit_best.svg", "underfit_worst.svg",
                "metrics.json", "manifest.json"} <= names
        manifest = json.loads((workdir / "out" / "manifest.json").read_text())
        assert set(manifest["artifacts"]) == names - {"manifest.json"}

    def test_unknown_scenario_lists_names(self, workdir, capsys):
        assert run("reproduce", "wat") == 2
        err = capsys.readouterr().err
        assert "regsweep" in err and "satimage" in err

    def test_scenarios_command(self, workdir, capsys):
        assert run("scenarios") == 0
        assert "underfit" in capsys.readouterr().out


class TestFetchData:
    def test_writes_wine_and_synthetic(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("BBC_DATA_DIR", str(tmp_path / "d"))
        assert run("fetch-data") == 0
        assert (tmp_path / "d" / "wine.data").exists()
        assert (tmp_path / "d" / "sat.synthetic.trn").exists()
        # wine file parses back to the canonical counts
        assert run("train", "--data", "wine", "--hidden", "1", "--iters", "5",
                   "--out", "m.json") == 0
