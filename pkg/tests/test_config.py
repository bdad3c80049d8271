from __future__ import annotations

import json
from pathlib import Path

import pytest

from fedcast.config import DEFAULTS, PipelineConfig
from fedcast.errors import ConfigError

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


class TestPrecedence:
    def test_defaults_apply_without_file(self):
        config = PipelineConfig.from_file(None)
        assert config.method == DEFAULTS["method"]
        assert config.seed == DEFAULTS["seed"]
        assert config.macro_series == tuple(DEFAULTS["data"]["macro_series"])

    def test_file_overrides_defaults(self, tmp_path):
        path = write_config(tmp_path, {"seed": 7, "method": "macro_only"})
        config = PipelineConfig.from_file(path)
        assert config.seed == 7
        assert config.method == "macro_only"
        # untouched keys keep defaults through the deep merge
        assert config.split_settings["cv_folds"] == 5

    def test_flags_override_file(self, tmp_path):
        path = write_config(tmp_path, {"seed": 7, "threads": 2})
        config = PipelineConfig.from_file(path, {"seed": 99, "threads": None})
        assert config.seed == 99
        assert config.threads == 2  # None overrides are ignored

    def test_nested_merge_keeps_siblings(self, tmp_path):
        path = write_config(tmp_path, {"split": {"cv_folds": 3}})
        config = PipelineConfig.from_file(path)
        assert config.split_settings["cv_folds"] == 3
        assert config.split_settings["test_fraction"] == 0.2


class TestPathResolution:
    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        sub = tmp_path / "nested"
        sub.mkdir()
        path = write_config(sub, {"data": {"decisions": "my_decisions.csv"}})
        config = PipelineConfig.from_file(path)
        assert config.decisions_path == sub / "my_decisions.csv"

    def test_absolute_paths_pass_through(self, tmp_path):
        absolute = tmp_path / "elsewhere" / "d.csv"
        path = write_config(tmp_path, {"data": {"decisions": str(absolute)}})
        config = PipelineConfig.from_file(path)
        assert config.decisions_path == absolute

    def test_packaged_wordlists_are_defaults(self):
        config = PipelineConfig.from_file(None)
        assert config.lexicon_path.name == "lm_lexicon.csv"
        assert config.lexicon_path.is_file()
        assert config.stopwords_path.is_file()
        assert config.negators_path.is_file()


class TestValidation:
    def test_unknown_method(self, tmp_path):
        path = write_config(tmp_path, {"method": "method9"})
        with pytest.raises(ConfigError, match="method"):
            PipelineConfig.from_file(path).validate(require_data=False)

    def test_unknown_model(self, tmp_path):
        path = write_config(tmp_path, {"model": "svm"})
        with pytest.raises(ConfigError, match="model"):
            PipelineConfig.from_file(path).validate(require_data=False)

    def test_method3_demands_fnn(self, tmp_path):
        path = write_config(tmp_path, {"method": "method3", "model": "gbdt"})
        with pytest.raises(ConfigError, match="fnn"):
            PipelineConfig.from_file(path).validate(require_data=False)

    def test_naive_bayes_demands_text_only(self, tmp_path):
        path = write_config(tmp_path, {"method": "method1", "model": "naive_bayes"})
        with pytest.raises(ConfigError, match="text_only"):
            PipelineConfig.from_file(path).validate(require_data=False)

    def test_bad_test_fraction(self, tmp_path):
        path = write_config(tmp_path, {"split": {"test_fraction": 1.5}})
        with pytest.raises(ConfigError, match="test_fraction"):
            PipelineConfig.from_file(path).validate(require_data=False)

    def test_bad_date(self, tmp_path):
        path = write_config(tmp_path, {"date_range": {"start": "June 2020"}})
        with pytest.raises(ConfigError, match="ISO date"):
            PipelineConfig.from_file(path).validate(require_data=False)

    def test_missing_referenced_path(self, tmp_path):
        path = write_config(tmp_path, {"method": "macro_only"})
        with pytest.raises(ConfigError, match="does not exist"):
            PipelineConfig.from_file(path).validate(require_data=True)

    def test_config_not_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="JSON"):
            PipelineConfig.from_file(path)


class TestEcho:
    def test_echo_strips_execution_keys(self, tmp_path):
        path = write_config(tmp_path, {"seed": 3, "threads": 16, "output_dir": "/xyz"})
        echo = PipelineConfig.from_file(path).echo()
        assert "output_dir" not in echo
        assert "threads" not in echo
        assert "figures" not in echo
        assert echo["seed"] == 3

    def test_echo_is_volatile_free_and_stable(self, tmp_path):
        from fedcast.utils import config_hash

        p1 = write_config(tmp_path, {"seed": 3, "output_dir": "/a"}, name="a.json")
        p2 = write_config(tmp_path, {"seed": 3, "output_dir": "/b"}, name="b.json")
        p3 = write_config(tmp_path, {"seed": 4, "output_dir": "/a"}, name="c.json")
        h1 = config_hash(PipelineConfig.from_file(p1).echo())
        h2 = config_hash(PipelineConfig.from_file(p2).echo())
        h3 = config_hash(PipelineConfig.from_file(p3).echo())
        assert h1 == h2
        assert h1 != h3  # real config changes do move the hash
