"""Command-line interface: subcommands, formats, exit codes, seeding."""

import json
import subprocess
import sys

import numpy as np
import pytest

from homotest.cli import main
from homotest.graph import Graph, write_edge_list


@pytest.fixture
def cliques_file(two_cliques, tmp_path):
    path = tmp_path / "cliques.txt"
    path.write_text(write_edge_list(two_cliques))
    return path


@pytest.fixture
def er_model_file(tmp_path):
    path = tmp_path / "er.json"
    path.write_text(json.dumps({"kind": "er", "n": 20, "p": 0.3}))
    return path


@pytest.fixture
def sbm_model_file(tmp_path):
    path = tmp_path / "sbm.json"
    path.write_text(
        json.dumps({"kind": "sbm", "n": 20, "k": 2, "p_in": 0.6, "p_out": 0.1})
    )
    return path


class TestTestCommand:
    def test_bootstrap_report(self, cliques_file, tmp_path):
        out = tmp_path / "report.json"
        code = main(
            [
                "test",
                str(cliques_file),
                "--null",
                "er",
                "-B",
                "49",
                "--seed",
                "0",
                "--output",
                str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["method"] == "bootstrap"
        assert report["null_kind"] == "er"
        assert report["t_obs"] == pytest.approx(190 / 90)
        assert report["reject"] is True
        assert len(report["bootstrap_samples"]) == 49

    def test_asymptotic_report(self, cliques_file, tmp_path):
        out = tmp_path / "report.json"
        code = main(
            ["test", str(cliques_file), "--method", "asymptotic", "--output", str(out)]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["method"] == "asymptotic"
        assert report["p_value"] is None
        assert report["threshold_c"] is not None
        assert report["reject"] is True

    def test_asymptotic_rejects_other_nulls(self, cliques_file):
        code = main(
            ["test", str(cliques_file), "--method", "asymptotic", "--null", "chung-lu"]
        )
        assert code == 2

    def test_fixed_labels(self, cliques_file, tmp_path):
        labels = tmp_path / "labels.txt"
        labels.write_text("\n".join(["1"] * 10 + ["2"] * 10) + "\n")
        out = tmp_path / "report.json"
        code = main(
            [
                "test",
                str(cliques_file),
                "--labels",
                str(labels),
                "-B",
                "19",
                "--output",
                str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["detector"] == "fixed_labels"

    def test_samples_csv_written(self, cliques_file, tmp_path):
        out = tmp_path / "report.json"
        csv_path = tmp_path / "samples.csv"
        code = main(
            [
                "test",
                str(cliques_file),
                "-B",
                "7",
                "--output",
                str(out),
                "--samples-csv",
                str(csv_path),
            ]
        )
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "t_star"
        assert len(lines) == 8

    def test_threads_do_not_change_output(self, cliques_file, tmp_path):
        outs = []
        for threads, name in ((1, "a.json"), (2, "b.json")):
            out = tmp_path / name
            code = main(
                [
                    "test",
                    str(cliques_file),
                    "-B",
                    "16",
                    "--seed",
                    "5",
                    "--threads",
                    str(threads),
                    "--output",
                    str(out),
                ]
            )
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_one_indexed_input(self, two_cliques, tmp_path):
        path = tmp_path / "one.txt"
        path.write_text(write_edge_list(two_cliques, indexing="one"))
        out = tmp_path / "report.json"
        code = main(
            [
                "test",
                str(path),
                "--indexing",
                "one",
                "--method",
                "asymptotic",
                "--output",
                str(out),
            ]
        )
        assert code == 0
        assert json.loads(out.read_text())["n"] == 20

    def test_missing_input_file(self, tmp_path):
        assert main(["test", str(tmp_path / "nope.txt")]) == 2

    def test_malformed_edge_list(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("0 1\nnot numbers\n")
        assert main(["test", str(bad)]) == 2

    def test_edgeless_graph_is_degenerate(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# no edges\n")
        assert main(["test", str(path), "-B", "5"]) == 3


class TestSeedResolution:
    def test_env_fallback(self, cliques_file, tmp_path, monkeypatch):
        out_env = tmp_path / "env.json"
        out_seed = tmp_path / "seed.json"
        monkeypatch.setenv("HOMOTEST_SEED", "11")
        assert main(["test", str(cliques_file), "-B", "9", "--output", str(out_env)]) == 0
        monkeypatch.delenv("HOMOTEST_SEED")
        assert (
            main(
                [
                    "test",
                    str(cliques_file),
                    "-B",
                    "9",
                    "--seed",
                    "11",
                    "--output",
                    str(out_seed),
                ]
            )
            == 0
        )
        assert out_env.read_bytes() == out_seed.read_bytes()

    def test_explicit_seed_beats_env(self, cliques_file, tmp_path, monkeypatch):
        monkeypatch.setenv("HOMOTEST_SEED", "11")
        out = tmp_path / "r.json"
        assert (
            main(
                [
                    "test",
                    str(cliques_file),
                    "-B",
                    "9",
                    "--seed",
                    "0",
                    "--output",
                    str(out),
                ]
            )
            == 0
        )
        assert json.loads(out.read_text())["seed"] == 0

    def test_bad_env_seed(self, cliques_file, monkeypatch):
        monkeypatch.setenv("HOMOTEST_SEED", "eleven")
        assert main(["test", str(cliques_file), "-B", "5"]) == 2


class TestDescribeCommand:
    def test_json_format(self, cliques_file, capsys):
        code = main(
            ["describe", str(cliques_file), "-B", "9", "--seed", "1"]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["n"] == 20 and doc["m"] == 90
        assert set(doc["nulls"]) == {"er", "chung-lu"}
        for entry in doc["nulls"].values():
            assert "p_value" in entry and "p_display" in entry
            assert len(entry["samples"]) == 9

    def test_csv_format_writes_files_and_figures(self, cliques_file, tmp_path):
        out_dir = tmp_path / "out"
        code = main(
            [
                "describe",
                str(cliques_file),
                "-B",
                "6",
                "--seed",
                "1",
                "--format",
                "csv",
                "--output",
                str(out_dir),
            ]
        )
        assert code == 0
        assert (out_dir / "samples_er.csv").exists()
        assert (out_dir / "samples_chung_lu.csv").exists()
        metadata = json.loads((out_dir / "metadata.json").read_text())
        assert "samples" not in next(iter(metadata["nulls"].values()))
        # figures land next to the delimited files by default
        assert (out_dir / "histogram.svg").exists()
        assert (out_dir / "adjacency.png").exists()
        assert (out_dir / "adjacency.csv").exists()

    def test_explicit_figures_dir_with_json(self, cliques_file, tmp_path, capsys):
        fig_dir = tmp_path / "figs"
        code = main(
            [
                "describe",
                str(cliques_file),
                "-B",
                "6",
                "--figures",
                str(fig_dir),
            ]
        )
        assert code == 0
        capsys.readouterr()
        assert (fig_dir / "histogram.svg").exists()
        assert (fig_dir / "adjacency.png").exists()

    def test_custom_null_list(self, cliques_file, capsys):
        code = main(["describe", str(cliques_file), "--nulls", "er", "-B", "5"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert list(doc["nulls"]) == ["er"]

    def test_empty_null_list(self, cliques_file):
        assert main(["describe", str(cliques_file), "--nulls", ","]) == 2


class TestGenerateCommand:
    def test_er_edge_list(self, er_model_file, tmp_path):
        out = tmp_path / "g.txt"
        code = main(
            ["generate", "--model", str(er_model_file), "--seed", "2", "--output", str(out)]
        )
        assert code == 0
        from homotest.graph import parse_edge_list

        g = parse_edge_list(out.read_text(), n=20)
        assert g.n == 20

    def test_deterministic_given_seed(self, er_model_file, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for out in (a, b):
            assert (
                main(
                    [
                        "generate",
                        "--model",
                        str(er_model_file),
                        "--seed",
                        "2",
                        "--output",
                        str(out),
                    ]
                )
                == 0
            )
        assert a.read_bytes() == b.read_bytes()

    def test_planted_labels_and_summary(self, sbm_model_file, tmp_path):
        out = tmp_path / "g.txt"
        labels = tmp_path / "labels.txt"
        summary = tmp_path / "summary.json"
        code = main(
            [
                "generate",
                "--model",
                str(sbm_model_file),
                "--seed",
                "3",
                "--output",
                str(out),
                "--labels-out",
                str(labels),
                "--summary",
                str(summary),
            ]
        )
        assert code == 0
        label_values = [int(x) for x in labels.read_text().split()]
        assert label_values == [1] * 10 + [2] * 10
        doc = json.loads(summary.read_text())
        assert doc["n"] == 20
        # population value under the exact block matrix: (p_in - p_out) / p_bar
        p_bar = (90 * 0.6 + 100 * 0.1) / 190
        assert doc["population_homophily"] == pytest.approx((0.6 - 0.1) / p_bar)

    def test_labels_out_without_planted_model(self, er_model_file, tmp_path):
        code = main(
            [
                "generate",
                "--model",
                str(er_model_file),
                "--labels-out",
                str(tmp_path / "l.txt"),
                "--output",
                str(tmp_path / "g.txt"),
            ]
        )
        assert code == 2

    def test_invalid_model_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"kind": "er", "n": 20}))  # p missing
        assert main(["generate", "--model", str(bad), "--output", str(tmp_path / "g.txt")]) == 2


class TestSimulateCommand:
    def test_smoke_scenario(self, tmp_path, data_dir):
        scenario = data_dir.parent / "scenarios" / "smoke.json"
        out = tmp_path / "rates.csv"
        fig_dir = tmp_path / "figs"
        code = main(
            [
                "simulate",
                "--scenario",
                str(scenario),
                "--output",
                str(out),
                "--figures",
                str(fig_dir),
            ]
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[4] == "point,rejection_rate,mc_se,n_mc,failed_runs"
        assert (fig_dir / "rejection_curve.png").exists()

    def test_threads_match(self, tmp_path, data_dir):
        scenario = data_dir.parent / "scenarios" / "smoke.json"
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for threads, out in ((1, a), (2, b)):
            assert (
                main(
                    [
                        "simulate",
                        "--scenario",
                        str(scenario),
                        "--threads",
                        str(threads),
                        "--output",
                        str(out),
                    ]
                )
                == 0
            )
        assert a.read_bytes() == b.read_bytes()

    def test_bad_scenario_field(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"name": "x", "bogus": 1}))
        assert main(["simulate", "--scenario", str(bad)]) == 2


class TestInstalledEntryPoint:
    def test_version_runs(self):
        result = subprocess.run(
            ["homotest", "--version"], capture_output=True, text=True, timeout=120
        )
        assert result.returncode == 0
        assert "homotest" in result.stdout

    def test_end_to_end_smoke(self, cliques_file, tmp_path):
        out = tmp_path / "r.json"
        result = subprocess.run(
            [
                "homotest",
                "test",
                str(cliques_file),
                "--method",
                "asymptotic",
                "--output",
                str(out),
            ],
            capture_output=True,
            text=True,
            timeout=300,
        )
        assert result.returncode == 0
        assert json.loads(out.read_text())["reject"] is True
