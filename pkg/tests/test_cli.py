from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from fedcast.cli import main

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def run_cli(*args):
    return main([str(a) for a in args])


def base_args(tmp_path, *extra):
    return ["--config", FIXTURES / "config.json", "--out", tmp_path / "out",
            "--no-figures", *extra]


class TestRunCommand:
    def test_artifacts_written(self, tmp_path, capsys):
        code = run_cli(*base_args(tmp_path), "run")
        assert code == 0
        out = tmp_path / "out"
        for name in ("report.json", "cv_folds.json", "confusion.csv",
                     "shap_summary.csv", "shap_long.csv", "model.json",
                     "feature_matrix.csv"):
            assert (out / name).is_file(), name
        summary = json.loads(capsys.readouterr().out)
        assert summary["method"] == "method1"
        report = json.loads((out / "report.json").read_text())
        assert report["seed"] == 42
        assert report["config_hash"]
        assert report["build"]

    def test_method3_requires_fnn(self, tmp_path, capsys):
        cfg = json.loads((FIXTURES / "config.json").read_text())
        cfg["method"] = "method3"
        cfg["model"] = "gbdt"
        for key in ("macro_dir", "documents_manifest", "decisions", "finbert"):
            cfg["data"][key] = str(FIXTURES / cfg["data"][key])
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(cfg))
        code = run_cli("--config", path, "--out", tmp_path / "out", "--no-figures", "run")
        assert code == 2
        assert "fnn" in capsys.readouterr().err

    def test_method2_without_finbert(self, tmp_path, capsys):
        cfg = json.loads((FIXTURES / "config.json").read_text())
        cfg["method"] = "method2"
        cfg["data"]["finbert"] = None
        for key in ("macro_dir", "documents_manifest", "decisions"):
            cfg["data"][key] = str(FIXTURES / cfg["data"][key])
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(cfg))
        code = run_cli("--config", path, "--out", tmp_path / "out", "--no-figures", "run")
        assert code == 2
        assert "finbert" in capsys.readouterr().err.lower()

    def test_missing_config_file(self, tmp_path, capsys):
        code = run_cli("--config", tmp_path / "absent.json", "run")
        assert code == 2

    def test_seed_flag_overrides_config(self, tmp_path):
        code = run_cli(*base_args(tmp_path), "--seed", "7", "run")
        assert code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["seed"] == 7

    def test_figures_rendered_when_enabled(self, tmp_path):
        code = run_cli("--config", FIXTURES / "config.json",
                       "--out", tmp_path / "out", "run")
        assert code == 0
        for name in ("confusion.png", "shap_summary.png", "cv_metrics.png"):
            assert (tmp_path / "out" / name).is_file(), name


class TestMethodVariants:
    @pytest.mark.parametrize("method,model", [
        ("macro_only", "gbdt"),
        ("method2", "gbdt"),
        ("method3", "fnn"),
        ("text_only", "naive_bayes"),
        ("text_only", "logreg"),
        ("method1", "random_forest"),
        ("method1", "extra_trees"),
    ])
    def test_method_model_combinations_run(self, tmp_path, method, model):
        cfg = json.loads((FIXTURES / "config.json").read_text())
        cfg["method"] = method
        cfg["model"] = model
        if model == "fnn":
            cfg["hyperparams"] = {"epochs": 8, "batch_size": 8}
        if model in ("random_forest", "extra_trees"):
            cfg["hyperparams"] = {"n_trees": 10, "max_depth": 3}
        for key in ("macro_dir", "documents_manifest", "decisions", "finbert"):
            cfg["data"][key] = str(FIXTURES / cfg["data"][key])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code = run_cli("--config", path, "--out", tmp_path / "out", "--no-figures", "run")
        assert code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["method"] == method
        shap_exists = (tmp_path / "out" / "shap_summary.csv").is_file()
        assert shap_exists == (model in ("gbdt", "random_forest", "extra_trees"))


class TestDateRange:
    def test_cropped_range_runs_and_shrinks_matrix(self, tmp_path):
        cfg = json.loads((FIXTURES / "config.json").read_text())
        cfg["date_range"] = {"start": "2019-06-01", "end": None}
        for key in ("macro_dir", "documents_manifest", "decisions", "finbert"):
            cfg["data"][key] = str(FIXTURES / cfg["data"][key])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code = run_cli("--config", path, "--out", tmp_path / "out", "--no-figures", "run")
        assert code == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["n_meetings"] < 40
        matrix_lines = (tmp_path / "out" / "feature_matrix.csv").read_text().splitlines()
        first_date = matrix_lines[1].split(",")[0]
        assert first_date >= "2019-06-01"


class TestNaiveBayesTune:
    def test_alpha_space_searchable(self, tmp_path):
        cfg = json.loads((FIXTURES / "config.json").read_text())
        cfg["method"] = "text_only"
        cfg["model"] = "naive_bayes"
        cfg["tuning"] = {"random_budget": 2, "grid_radius": 1}
        for key in ("macro_dir", "documents_manifest", "decisions", "finbert"):
            cfg["data"][key] = str(FIXTURES / cfg["data"][key])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code = run_cli("--config", path, "--out", tmp_path / "out", "--no-figures", "tune")
        assert code == 0
        payload = json.loads((tmp_path / "out" / "tuning.json").read_text())
        assert "alpha" in payload["best_params"]


class TestStatsCommand:
    def test_stats_artifacts(self, tmp_path):
        code = run_cli(*base_args(tmp_path), "stats")
        assert code == 0
        stats_text = (tmp_path / "out" / "stats.csv").read_text()
        assert "#doc_type_stats" in stats_text
        assert "#top_words" in stats_text
        sentiment = (tmp_path / "out" / "sentiment.csv").read_text().splitlines()
        assert sentiment[0].startswith("doc_id,date,doc_type,token_count")
        assert len(sentiment) == 1 + 60


class TestTuneCommand:
    def test_tuning_artifact(self, tmp_path, capsys):
        cfg = json.loads((FIXTURES / "config.json").read_text())
        cfg["method"] = "macro_only"
        cfg["tuning"] = {"random_budget": 2, "grid_radius": 0}
        for key in ("macro_dir", "documents_manifest", "decisions", "finbert"):
            cfg["data"][key] = str(FIXTURES / cfg["data"][key])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code = run_cli("--config", path, "--out", tmp_path / "out", "--no-figures", "tune")
        assert code == 0
        payload = json.loads((tmp_path / "out" / "tuning.json").read_text())
        assert len(payload["trail"]) >= 1
        assert payload["best_params"]


class TestPredictCommand:
    @pytest.fixture()
    def trained(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("--config", FIXTURES / "config.json", "--out", out,
                       "--no-figures", "run") == 0
        return out

    def test_prediction_on_simplex(self, trained, tmp_path, capsys):
        code = run_cli("--config", FIXTURES / "config.json", "--out", tmp_path / "p",
                       "--no-figures", "predict", "--model", trained / "model.json",
                       "--as-of", "2022-06-01")
        assert code == 0
        result = json.loads(capsys.readouterr().out)
        total = result["p_raise"] + result["p_hold"] + result["p_lower"]
        assert total == pytest.approx(1.0, abs=1e-9)
        assert result["argmax"] in ("Raise", "Hold", "Lower")
        assert len(result["top_shap_features"]) == 5

    def test_as_of_before_first_meeting(self, trained, tmp_path, capsys):
        code = run_cli("--config", FIXTURES / "config.json", "--out", tmp_path / "p",
                       "--no-figures", "predict", "--model", trained / "model.json",
                       "--as-of", "2017-06-01")
        assert code == 2
        assert "meetings" in capsys.readouterr().err.lower()

    def test_stale_model_feature_mismatch(self, trained, tmp_path, capsys):
        cfg = json.loads((FIXTURES / "config.json").read_text())
        cfg["data"]["macro_series"] = ["CPI", "UNRATE"]  # narrower macro block
        for key in ("macro_dir", "documents_manifest", "decisions", "finbert"):
            cfg["data"][key] = str(FIXTURES / cfg["data"][key])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code = run_cli("--config", path, "--out", tmp_path / "p", "--no-figures",
                       "predict", "--model", trained / "model.json",
                       "--as-of", "2022-06-01")
        assert code == 2
        assert "feature" in capsys.readouterr().err.lower()


class _Handler(BaseHTTPRequestHandler):
    body = {"observations": [{"date": "2020-01-01", "value": "1.0"},
                             {"date": "2020-02-01", "value": "2.0"}]}

    def do_GET(self):
        payload = json.dumps(self.body).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


class TestFetchCommand:
    def test_missing_api_key_exit_2(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("FRED_API_KEY", raising=False)
        code = run_cli(*base_args(tmp_path), "fetch")
        assert code == 2
        assert "FRED_API_KEY" in capsys.readouterr().err

    def test_mock_endpoint_writes_csvs(self, tmp_path, monkeypatch):
        server = HTTPServer(("127.0.0.1", 0), _Handler)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        try:
            cfg = json.loads((FIXTURES / "config.json").read_text())
            cfg["data"]["macro_dir"] = str(tmp_path / "macro")
            cfg["data"]["decisions"] = str(FIXTURES / "decisions.csv")
            cfg["data"]["documents_manifest"] = str(FIXTURES / "documents/manifest.json")
            cfg["data"]["finbert"] = str(FIXTURES / "finbert.csv")
            cfg["fred"] = {
                "endpoint": f"http://127.0.0.1:{server.server_port}/obs",
                "series": ["AAA", "BBB"],
                "start": "2020-01-01", "end": "2020-03-01",
                "timeout": 2.0, "max_retries": 2,
            }
            path = tmp_path / "cfg.json"
            path.write_text(json.dumps(cfg))
            monkeypatch.setenv("FRED_API_KEY", "testkey")
            code = run_cli("--config", path, "--no-figures", "fetch")
            assert code == 0
            assert (tmp_path / "macro" / "AAA.csv").is_file()
            assert (tmp_path / "macro" / "BBB.csv").is_file()
        finally:
            server.shutdown()

    def test_unreachable_host_exit_3(self, tmp_path, capsys, monkeypatch):
        cfg = json.loads((FIXTURES / "config.json").read_text())
        cfg["data"]["macro_dir"] = str(tmp_path / "macro")
        cfg["fred"] = {
            "endpoint": "http://127.0.0.1:9/obs",
            "series": ["AAA"],
            "start": "2020-01-01", "end": "2020-03-01",
            "timeout": 0.2, "max_retries": 2,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        monkeypatch.setenv("FRED_API_KEY", "testkey")
        code = run_cli("--config", path, "--no-figures", "fetch")
        assert code == 3
