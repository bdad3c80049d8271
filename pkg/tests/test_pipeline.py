from __future__ import annotations

from datetime import date
from pathlib import Path

import numpy as np
import pytest

from fedcast.config import PipelineConfig
from fedcast.errors import ConfigError
from fedcast.pipeline import (
    load_inputs,
    predict_pipeline,
    prepare_dataset,
    run_pipeline,
)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def config_for(tmp_path, **overrides):
    merged = {"output_dir": str(tmp_path / "out"), "figures": False}
    merged.update(overrides)
    return PipelineConfig.from_file(FIXTURES / "config.json", merged)


class TestPrepareDataset:
    def test_tfidf_fitted_on_training_documents_only(self, tmp_path):
        config = config_for(tmp_path)
        dataset = prepare_dataset(config)
        # the fitted corpus size must equal the number of documents
        # assigned to training meetings, never the full 60
        data = load_inputs(config)
        n_train = len(dataset.plan.train_indices)
        meetings = [rec.meeting_date for rec in dataset.cropped_decisions]
        train_cutoff = meetings[n_train - 1]
        docs_by_cutoff = [d for d in data.documents if d.date <= train_cutoff]
        assert dataset.featurizer.tfidf.n_docs <= len(docs_by_cutoff)
        assert dataset.featurizer.tfidf.n_docs < len(data.documents)

    def test_chronological_holdout_is_suffix(self, tmp_path):
        dataset = prepare_dataset(config_for(tmp_path))
        train, test = dataset.plan.train_indices, dataset.plan.test_indices
        assert max(train) < min(test)
        dates = dataset.matrix.meeting_dates
        assert dates == tuple(sorted(dates))

    def test_standardized_train_columns(self, tmp_path):
        dataset = prepare_dataset(config_for(tmp_path))
        train_rows = dataset.matrix.X[list(dataset.plan.train_indices)]
        means = train_rows.mean(axis=0)
        stds = train_rows.std(axis=0)
        # every non-degenerate column is centered and unit-scaled
        live = stds > 1e-9
        assert np.abs(means[live]).max() < 1e-9
        assert np.abs(stds[live] - 1.0).max() < 1e-9

    def test_naive_bayes_gets_raw_tfidf_block(self, tmp_path):
        config = config_for(tmp_path, method="text_only", model="naive_bayes")
        dataset = prepare_dataset(config)
        assert dataset.scaler is None
        assert all(n.startswith("tfidf_") for n in dataset.matrix.feature_names)
        assert (dataset.matrix.X >= 0).all()

    def test_meeting_count_and_folds(self, tmp_path):
        dataset = prepare_dataset(config_for(tmp_path))
        assert dataset.matrix.n_rows == 40
        assert len(dataset.plan.folds) == 5
        assert len(dataset.plan.test_indices) == 8  # ceil(40 * 0.2)


class TestRunReport:
    def test_report_metrics_structure(self, tmp_path):
        config = config_for(tmp_path)
        report = run_pipeline(config)
        assert set(report["metrics"]) == {"cv", "test"}
        cv = report["metrics"]["cv"]
        for metric in ("accuracy", "macro_f1", "ovr_macro_auc"):
            assert set(cv[metric]) == {"mean", "std"}
        test = report["metrics"]["test"]
        assert test["n_samples"] == 8
        cm = np.asarray(test["confusion_matrix"])
        assert cm.sum() == 8
        assert report["top_shap"][0]["rank"] == 1

    def test_no_writes_outside_output_dir(self, tmp_path):
        out = tmp_path / "only_here"
        config = config_for(tmp_path, output_dir=str(out))
        before = {p for p in tmp_path.rglob("*")}
        run_pipeline(config)
        new_files = {p for p in tmp_path.rglob("*")} - before
        assert new_files, "run produced nothing"
        assert all(out in p.parents or p == out for p in new_files)


class TestPredictConsistency:
    def test_bundle_reproduces_matrix_row_probabilities(self, tmp_path):
        config = config_for(tmp_path)
        run_pipeline(config)
        out = config.output_dir

        # an as-of one day before a test-window meeting sees exactly the
        # data the training-time assembly used for that row, so the
        # prediction must equal the model applied to that matrix row
        dataset = prepare_dataset(config)
        target_idx = 35
        target = dataset.matrix.meeting_dates[target_idx]
        as_of = date.fromordinal(target.toordinal() - 1)

        result = predict_pipeline(config, out / "model.json", as_of)
        assert result["meeting_date"] == target.isoformat()
        total = result["p_raise"] + result["p_hold"] + result["p_lower"]
        assert total == pytest.approx(1.0, abs=1e-9)

        import json as json_mod

        from fedcast.models import deserialize_model

        bundle = json_mod.loads((out / "model.json").read_text())
        model, _ = deserialize_model(bundle["model"])
        expected = model.predict_proba(dataset.matrix.X[target_idx : target_idx + 1])[0]
        by_class = dict(zip(model.classes, expected))
        assert result["p_raise"] == pytest.approx(by_class.get("Raise", 0.0), abs=1e-12)
        assert result["p_hold"] == pytest.approx(by_class.get("Hold", 0.0), abs=1e-12)
        assert result["p_lower"] == pytest.approx(by_class.get("Lower", 0.0), abs=1e-12)

    def test_stale_bundle_detected(self, tmp_path):
        config = config_for(tmp_path)
        run_pipeline(config)
        bundle_path = config.output_dir / "model.json"
        narrower = config_for(
            tmp_path, data={"macro_series": ["CPI", "UNRATE"]}
        )
        from fedcast.errors import ModelFeatureMismatch

        with pytest.raises(ModelFeatureMismatch):
            predict_pipeline(narrower, bundle_path, date(2022, 6, 1))

    def test_missing_bundle_is_config_error(self, tmp_path):
        config = config_for(tmp_path)
        with pytest.raises(ConfigError):
            predict_pipeline(config, tmp_path / "nope.json", date(2022, 6, 1))


class TestStatsEmission:
    def test_sentiment_csv_schema_and_figures(self, tmp_path):
        from fedcast.pipeline import stats_pipeline

        config = config_for(tmp_path, figures=True)
        stats_pipeline(config)
        out = config.output_dir
        assert (out / "stats.csv").is_file()
        assert (out / "sentiment.csv").is_file()
        assert (out / "sentiment_timeline.png").is_file()
        assert (out / "corpus_stats.png").is_file()
        header = (out / "sentiment.csv").read_text().splitlines()[0]
        assert header.split(",") == [
            "doc_id", "date", "doc_type", "token_count",
            "positive_density", "negative_density", "net_sentiment", "polarity",
        ]
