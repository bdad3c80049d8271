"""End-to-end orchestration behind the CLI subcommands.

The run path loads and validates inputs, builds the per-meeting matrix
for the configured method, applies the chronological holdout and
stratified folds, cross-validates, trains the final model, evaluates on
the held-out meetings, explains tree models, and writes the artifact
bundle (report.json, cv_folds.json, confusion.csv, shap CSVs,
model.json). Everything is deterministic given the config and seed:
JSON is emitted with sorted keys and floats round-trip by repr, so
reruns are byte-identical.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ingest, textfeat
from .config import TREE_MODELS, PipelineConfig
from .errors import (
    ConfigError,
    EmptyAfterCleaning,
    ModelFeatureMismatch,
    NoMeetingsInRange,
)
from .evaluation import CrossValResult, cross_validate, make_trainer, tune
from .explain import shap_summary, tree_shap
from .ingest import DecisionRecord, DocumentRecord, FinbertProbRecord, MacroSeries
from .macrofeat import (
    FeatureMatrix,
    FeatureScaler,
    align_documents_to_meetings,
    assemble_feature_matrix,
    label_decisions,
    standardize,
)
from .metrics import MetricsReport, classification_metrics, resolve_class_order
from .models import (
    deserialize_model,
    predict_proba,
    serialize_model,
)
from .sampling import SplitPlan, chronological_split, smote_resample, stratified_kfold
from .textfeat import TextFeaturizer, TfidfModel, TokenizedDocument
from .utils import build_describe, canonical_json, config_hash, parallel_map, write_text

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
CV_FOLDS_NAME = "cv_folds.json"
CONFUSION_NAME = "confusion.csv"
SHAP_SUMMARY_NAME = "shap_summary.csv"
SHAP_LONG_NAME = "shap_long.csv"
MODEL_NAME = "model.json"
TUNING_NAME = "tuning.json"
STATS_NAME = "stats.csv"
SENTIMENT_NAME = "sentiment.csv"
MATRIX_NAME = "feature_matrix.csv"

BUNDLE_VERSION = 1


@dataclass
class LoadedData:
    macro: dict[str, MacroSeries]
    decisions: list[DecisionRecord]
    documents: list[DocumentRecord]
    finbert: dict[str, FinbertProbRecord]


def load_inputs(config: PipelineConfig) -> LoadedData:
    """Load every input the configured method needs."""
    macro: dict[str, MacroSeries] = {}
    if config.needs_macro():
        macro = ingest.load_macro_dir(config.macro_dir, config.macro_series)
        extra = []
        taylor = config.assembly_config()
        if taylor.inflation_series not in macro:
            extra.append(taylor.inflation_series)
        if taylor.gap_series is None and taylor.unemployment_series not in macro:
            extra.append(taylor.unemployment_series)
        if taylor.gap_series is not None and taylor.gap_series not in macro:
            extra.append(taylor.gap_series)
        for sid in extra:
            macro[sid] = ingest.load_macro_csv(
                Path(config.macro_dir) / f"{sid}.csv", series_id=sid
            )
    decisions = ingest.load_decisions(config.decisions_path)
    documents: list[DocumentRecord] = []
    if config.needs_text() or config.needs_finbert():
        documents = ingest.load_documents(config.documents_manifest)
    finbert: dict[str, FinbertProbRecord] = {}
    if config.needs_finbert():
        finbert = {
            r.doc_id: r for r in ingest.load_finbert_probs(config.finbert_path)
        }
    return LoadedData(macro=macro, decisions=decisions, documents=documents, finbert=finbert)


def tokenize_all(
    documents: Sequence[DocumentRecord], stopwords: frozenset[str]
) -> dict[str, TokenizedDocument]:
    """Clean every document; ones that clean to nothing are dropped."""
    out: dict[str, TokenizedDocument] = {}
    for rec in documents:
        try:
            out[rec.doc_id] = textfeat.clean_and_tokenize(rec, stopwords)
        except EmptyAfterCleaning:
            logger.warning("document %s is empty after cleaning; skipped", rec.doc_id)
    return out


def _load_text_setup(config: PipelineConfig):
    lexicon = textfeat.load_lexicon(
        config.lexicon_path,
        negators=textfeat.load_wordlist(config.negators_path),
        categories=config.text_settings.get("lexicon_categories"),
    )
    protected = lexicon.all_terms() | lexicon.negators
    stopwords = textfeat.load_stopwords(config.stopwords_path, protect=protected)
    return lexicon, stopwords


@dataclass
class Dataset:
    """Everything the model stage needs, fully assembled."""

    matrix: FeatureMatrix
    scaler: FeatureScaler | None
    plan: SplitPlan
    featurizer: TextFeaturizer | None
    data: LoadedData
    cropped_decisions: list[DecisionRecord]

    @property
    def labels(self) -> list[str]:
        return list(self.matrix.labels)


def _crop_decisions(
    decisions: Sequence[DecisionRecord], date_range: tuple[date | None, date | None]
) -> list[DecisionRecord]:
    start, end = date_range
    cropped = [
        rec
        for rec in decisions
        if (start is None or rec.meeting_date >= start)
        and (end is None or rec.meeting_date <= end)
    ]
    if not cropped:
        raise NoMeetingsInRange("no meetings inside the configured date range")
    return cropped


def prepare_dataset(config: PipelineConfig, data: LoadedData | None = None) -> Dataset:
    """Assemble, split, fit text models on the training meetings only."""
    if data is None:
        data = load_inputs(config)
    cropped = _crop_decisions(data.decisions, config.date_range)
    n = len(cropped)
    train_idx, test_idx = chronological_split(
        n, float(config.split_settings["test_fraction"])
    )

    featurizer: TextFeaturizer | None = None
    text_vectors = None
    text_names = None
    if config.needs_text():
        lexicon, stopwords = _load_text_setup(config)
        tokenized = tokenize_all(data.documents, stopwords)
        meetings = [rec.meeting_date for rec in cropped]
        # align against the full calendar; fit only on documents whose
        # meeting falls in the training portion of the cropped range
        assignment = align_documents_to_meetings(
            [d for d in data.documents if d.doc_id in tokenized],
            [rec.meeting_date for rec in data.decisions],
        )
        train_dates = {meetings[i] for i in train_idx}
        train_docs = [
            tokenized[doc_id]
            for m in meetings
            if m in train_dates
            for doc_id in assignment.get(m, [])
        ]
        ts = config.text_settings
        featurizer = TextFeaturizer.fit(
            train_docs,
            lexicon,
            max_features=int(ts["max_features"]),
            negation_window=int(ts["negation_window"]),
            n_top_terms=int(ts["n_top_terms"]),
        )
        text_vectors = {
            doc_id: featurizer.transform(doc) for doc_id, doc in tokenized.items()
        }
        text_names = featurizer.feature_names

    matrix = assemble_feature_matrix(
        config.method,
        macro=data.macro,
        decisions=data.decisions,
        config=config.assembly_config(),
        documents=data.documents,
        text_vectors=text_vectors,
        finbert=data.finbert if config.needs_finbert() else None,
        text_feature_names=text_names,
        date_range=config.date_range,
    )

    scaler: FeatureScaler | None = None
    if config.model == "naive_bayes":
        # multinomial NB runs on the raw nonnegative TF-IDF block
        keep = [
            j for j, name in enumerate(matrix.feature_names) if name.startswith("tfidf_")
        ]
        if not keep:
            raise ConfigError("naive_bayes requires a TF-IDF block in the matrix")
        matrix = FeatureMatrix(
            X=matrix.X[:, keep],
            feature_names=tuple(matrix.feature_names[j] for j in keep),
            labels=matrix.labels,
            meeting_dates=matrix.meeting_dates,
            sources=matrix.sources,
        )
    else:
        mask = np.zeros(n, dtype=bool)
        mask[list(train_idx)] = True
        matrix, scaler = standardize(matrix, mask)

    train_labels = [matrix.labels[i] for i in train_idx]
    rel_folds = stratified_kfold(
        train_labels, k=int(config.split_settings["cv_folds"]), seed=config.seed
    )
    folds = tuple(
        (
            tuple(train_idx[i] for i in tr),
            tuple(train_idx[i] for i in va),
        )
        for tr, va in rel_folds
    )
    plan = SplitPlan(train_indices=train_idx, test_indices=test_idx, folds=folds)
    return Dataset(
        matrix=matrix,
        scaler=scaler,
        plan=plan,
        featurizer=featurizer,
        data=data,
        cropped_decisions=cropped,
    )


# --- run ----------------------------------------------------------------------


def _final_training_rows(
    dataset: Dataset, apply_smote: bool, seed: int
) -> tuple[np.ndarray, list[str]]:
    idx = list(dataset.plan.train_indices)
    X = dataset.matrix.X[idx]
    y = [dataset.matrix.labels[i] for i in idx]
    if apply_smote:
        X, y = smote_resample(X, y, seed=seed)
    return X, y


def _bundle_payload(config: PipelineConfig, dataset: Dataset, model) -> dict:
    featurizer = dataset.featurizer
    text_block = None
    if featurizer is not None:
        text_block = {
            "tfidf": {
                "vocabulary": list(featurizer.tfidf.vocabulary),
                "document_frequency": list(featurizer.tfidf.document_frequency),
                "n_docs": featurizer.tfidf.n_docs,
            },
            "top_terms": list(featurizer.top_terms),
            "negation_window": featurizer.negation_window,
        }
    scaler_block = None
    if dataset.scaler is not None:
        scaler_block = {
            "mean": dataset.scaler.mean.tolist(),
            "std": dataset.scaler.std.tolist(),
        }
    return {
        "bundle_version": BUNDLE_VERSION,
        "method": config.method,
        "model_family": config.model,
        "config_hash": config_hash(config.echo()),
        "model": serialize_model(model, dataset.matrix.feature_names),
        "scaler": scaler_block,
        "text": text_block,
        "seed": config.seed,
    }


def _metrics_block(cv: CrossValResult, test_report: MetricsReport) -> dict:
    return {
        "cv": cv.to_dict()["aggregate"],
        "test": test_report.to_dict(),
    }


def run_pipeline(config: PipelineConfig, out_dir: Path | None = None) -> dict:
    """Execute the configured method end to end; returns the report dict."""
    config.validate()
    out = out_dir if out_dir is not None else config.output_dir
    out.mkdir(parents=True, exist_ok=True)

    dataset = prepare_dataset(config)
    plan = dataset.plan
    apply_smote = bool(config.split_settings["apply_smote"])
    trainer = make_trainer(config.model, config.hyperparams)
    logger.info(
        "%s/%s: %d meetings, %d features, %d train / %d test",
        config.method, config.model, dataset.matrix.n_rows,
        len(dataset.matrix.feature_names),
        len(plan.train_indices), len(plan.test_indices),
    )

    fold_list = list(plan.folds)
    cv = cross_validate(
        trainer,
        dataset.matrix.X,
        dataset.labels,
        fold_list,
        apply_smote=apply_smote,
        seed=config.seed,
        threads=config.threads,
    )
    logger.info("cross-validation macro OvR AUC %.4f", cv.mean_auc)

    X_train, y_train = _final_training_rows(dataset, apply_smote, config.seed)
    model = trainer(X_train, y_train, config.seed)

    test_idx = list(plan.test_indices)
    X_test = dataset.matrix.X[test_idx]
    y_test = [dataset.matrix.labels[i] for i in test_idx]
    probs = predict_proba(model, X_test)
    classes = list(model.classes)
    y_pred = [classes[j] for j in probs.argmax(axis=1)]
    test_report = classification_metrics(
        y_test, y_pred, probs=probs, prob_classes=classes
    )

    top_shap = None
    if config.model in TREE_MODELS:
        from .explain import Attribution

        chunks = [
            np.asarray(c)
            for c in _chunk_indices(len(test_idx), config.threads)
        ]
        parts = parallel_map(
            lambda rows: tree_shap(
                model, X_test[rows], feature_names=dataset.matrix.feature_names
            ),
            chunks,
            threads=config.threads,
        )
        attr = Attribution(
            values=np.concatenate([p.values for p in parts], axis=0),
            base_values=parts[0].base_values,
            feature_names=parts[0].feature_names,
            class_names=parts[0].class_names,
        )
        summary = shap_summary(attr, X_test, top_n=20)
        write_text(out / SHAP_SUMMARY_NAME, summary.summary_csv_text())
        write_text(out / SHAP_LONG_NAME, summary.long_csv_text())
        top_shap = summary.to_dict()

    write_text(out / CONFUSION_NAME, test_report.confusion_csv_text())
    cv_payload = {
        "plan": json.loads(plan.to_json()),
        "folds": [r.to_dict() for r in cv.fold_reports],
        "aggregate": cv.to_dict()["aggregate"],
    }
    write_text(out / CV_FOLDS_NAME, canonical_json(cv_payload) + "\n")

    from .models.gbdt import GbdtModel

    report = {
        "build": build_describe(),
        "config": config.echo(),
        "config_hash": config_hash(config.echo()),
        "seed": config.seed,
        "method": config.method,
        "model_family": config.model,
        "n_meetings": dataset.matrix.n_rows,
        "n_train": len(plan.train_indices),
        "n_test": len(test_idx),
        "n_features": len(dataset.matrix.feature_names),
        "class_counts": {
            c: dataset.labels.count(c) for c in resolve_class_order(dataset.labels)
            if c in dataset.labels
        },
        "metrics": _metrics_block(cv, test_report),
        "top_shap": top_shap,
    }
    if isinstance(model, GbdtModel):
        report["train_deviance"] = list(model.train_deviance)

    write_text(out / REPORT_NAME, canonical_json(report) + "\n")

    bundle = _bundle_payload(config, dataset, model)
    write_text(out / MODEL_NAME, canonical_json(bundle) + "\n")
    dataset.matrix.to_csv(out / MATRIX_NAME)

    if config.figures:
        from . import report as report_mod

        report_mod.render_run_figures(out)
    return report


def _chunk_indices(n: int, threads: int) -> list[list[int]]:
    if n == 0:
        return [[]]
    n_chunks = max(1, min(threads, n))
    size = (n + n_chunks - 1) // n_chunks
    return [list(range(s, min(s + size, n))) for s in range(0, n, size)]


# --- tune -----------------------------------------------------------------------


def tune_pipeline(config: PipelineConfig, out_dir: Path | None = None) -> dict:
    """Two-stage hyperparameter search over the CV folds."""
    config.validate()
    out = out_dir if out_dir is not None else config.output_dir
    out.mkdir(parents=True, exist_ok=True)

    dataset = prepare_dataset(config)
    ts = config.tuning_settings
    result = tune(
        config.model,
        dataset.matrix.X,
        dataset.labels,
        list(dataset.plan.folds),
        random_budget=int(ts["random_budget"]),
        grid_radius=int(ts["grid_radius"]),
        seed=config.seed,
        apply_smote=bool(config.split_settings["apply_smote"]),
    )
    payload = result.to_dict()
    payload["config_hash"] = config_hash(config.echo())
    payload["seed"] = config.seed
    payload["model_family"] = config.model
    write_text(out / TUNING_NAME, canonical_json(payload) + "\n")

    if config.figures:
        from . import report as report_mod

        report_mod.render_tuning_figure(out)
    return payload


# --- stats ------------------------------------------------------------------------


def stats_pipeline(config: PipelineConfig, out_dir: Path | None = None) -> dict:
    """Corpus statistics plus per-document sentiment emission.

    Always reads the document corpus, whatever the configured method.
    """
    out = out_dir if out_dir is not None else config.output_dir
    out.mkdir(parents=True, exist_ok=True)

    documents = ingest.load_documents(config.documents_manifest)
    decisions = ingest.load_decisions(config.decisions_path)
    lexicon, stopwords = _load_text_setup(config)
    tokenized = tokenize_all(documents, stopwords)

    cropped = _crop_decisions(decisions, config.date_range)
    meetings = [rec.meeting_date for rec in cropped]
    labels = label_decisions(cropped)
    label_by_meeting = dict(zip(meetings, labels))
    assignment = align_documents_to_meetings(
        documents, [rec.meeting_date for rec in decisions]
    )
    doc_label: dict[str, str] = {}
    for meeting, doc_ids in assignment.items():
        if meeting not in label_by_meeting:
            continue  # document belongs to an out-of-range meeting
        for doc_id in doc_ids:
            doc_label[doc_id] = label_by_meeting[meeting]

    doc_types = {d.doc_id: d.doc_type for d in documents}
    stats = textfeat.corpus_stats(
        list(tokenized.values()), doc_types, labels=doc_label
    )
    write_text(out / STATS_NAME, stats.to_csv_text())

    ts = config.text_settings
    lines = [
        "doc_id,date,doc_type,token_count,positive_density,negative_density,net_sentiment,polarity"
    ]
    by_id = {d.doc_id: d for d in documents}
    for doc_id in sorted(tokenized):
        doc = tokenized[doc_id]
        rec = by_id[doc_id]
        lm = textfeat.score_lm_sentiment(
            doc, lexicon, negation_window=int(ts["negation_window"])
        )
        lines.append(
            ",".join(
                [
                    doc_id,
                    rec.date.isoformat(),
                    rec.doc_type,
                    str(doc.token_count),
                    repr(lm.densities["positive"]),
                    repr(lm.densities["negative"]),
                    repr(lm.net_sentiment),
                    repr(lm.polarity),
                ]
            )
        )
    write_text(out / SENTIMENT_NAME, "\n".join(lines) + "\n")

    if config.figures:
        from . import report as report_mod

        report_mod.render_stats_figures(out)
    return {"documents": len(documents), "tokenized": len(tokenized)}


# --- fetch -------------------------------------------------------------------------


def fetch_pipeline(config: PipelineConfig, api_key: str) -> list[Path]:
    """Download each configured FRED series into the macro directory."""
    fred = config.fred_settings
    series = list(fred.get("series") or config.macro_series)
    macro_dir = config.macro_dir
    macro_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for sid in series:
        series_obj = ingest.fetch_fred_series(
            sid,
            start=date.fromisoformat(fred["start"]),
            end=date.fromisoformat(fred["end"]),
            api_key=api_key,
            endpoint=fred["endpoint"],
            timeout=float(fred["timeout"]),
            max_retries=int(fred["max_retries"]),
        )
        path = macro_dir / f"{sid}.csv"
        series_obj.to_csv(path)
        written.append(path)
        logger.info("fetched %s (%d observations)", sid, len(series_obj))
    return written


# --- predict ----------------------------------------------------------------------


def _featurizer_from_bundle(bundle: dict, config: PipelineConfig) -> TextFeaturizer | None:
    text = bundle.get("text")
    if text is None:
        return None
    lexicon, _ = _load_text_setup(config)
    tfidf = TfidfModel(
        vocabulary=tuple(text["tfidf"]["vocabulary"]),
        document_frequency=tuple(text["tfidf"]["document_frequency"]),
        n_docs=int(text["tfidf"]["n_docs"]),
    )
    return TextFeaturizer(
        tfidf=tfidf,
        lexicon=lexicon,
        top_terms=tuple(text["top_terms"]),
        negation_window=int(text["negation_window"]),
    )


def predict_pipeline(config: PipelineConfig, model_path: Path, as_of: date) -> dict:
    """Probability forecast for the first meeting after ``as_of``.

    Only data dated on or before ``as_of`` feeds the feature row. The
    target is the earliest meeting strictly after ``as_of``; a prior
    meeting must exist to anchor the incumbent rate.

    Raises:
        NoMeetingsInRange: no prior meeting or no upcoming meeting.
        ModelFeatureMismatch: assembled features diverge from the
            model's stored feature names.
    """
    config.validate()
    if not Path(model_path).is_file():
        raise ConfigError(f"model file not found: {model_path}")
    bundle = json.loads(Path(model_path).read_text(encoding="utf-8"))
    if bundle.get("bundle_version") != BUNDLE_VERSION:
        raise ConfigError("unsupported model bundle version")
    model, stored_names = deserialize_model(bundle["model"])

    data = load_inputs(config)
    prior = [rec for rec in data.decisions if rec.meeting_date <= as_of]
    upcoming = [rec for rec in data.decisions if rec.meeting_date > as_of]
    if not prior or not upcoming:
        raise NoMeetingsInRange(
            f"as_of {as_of} is outside the span of known meetings"
        )
    target = upcoming[0]

    documents = [d for d in data.documents if d.date <= as_of]
    macro = {
        sid: _trim_series(series, as_of) for sid, series in data.macro.items()
    }

    featurizer = _featurizer_from_bundle(bundle, config)
    text_vectors = None
    text_names = None
    if config.needs_text():
        if featurizer is None:
            raise ModelFeatureMismatch("bundle lacks the text featurizer block")
        _, stopwords = _load_text_setup(config)
        tokenized = tokenize_all(documents, stopwords)
        text_vectors = {
            doc_id: featurizer.transform(doc) for doc_id, doc in tokenized.items()
        }
        text_names = featurizer.feature_names

    matrix = assemble_feature_matrix(
        config.method,
        macro=macro,
        decisions=data.decisions,
        config=config.assembly_config(),
        documents=documents,
        text_vectors=text_vectors,
        finbert=data.finbert if config.needs_finbert() else None,
        text_feature_names=text_names,
        date_range=(target.meeting_date, target.meeting_date),
    )
    if tuple(matrix.feature_names) != tuple(stored_names):
        raise ModelFeatureMismatch(
            f"{len(matrix.feature_names)} assembled vs {len(stored_names)} stored"
        )
    X = matrix.X
    if bundle.get("scaler") is not None:
        scaler = FeatureScaler(
            mean=np.asarray(bundle["scaler"]["mean"], dtype=float),
            std=np.asarray(bundle["scaler"]["std"], dtype=float),
        )
        X = scaler.apply(X.copy())

    probs = predict_proba(model, X)[0]
    classes = list(model.classes)
    by_class = {c: float(p) for c, p in zip(classes, probs)}
    result = {
        "as_of": as_of.isoformat(),
        "meeting_date": target.meeting_date.isoformat(),
        "p_raise": by_class.get("Raise", 0.0),
        "p_hold": by_class.get("Hold", 0.0),
        "p_lower": by_class.get("Lower", 0.0),
        "argmax": classes[int(np.argmax(probs))],
    }
    if bundle["model"]["model_kind"] in ("gbdt", "forest"):
        attr = tree_shap(model, X, feature_names=matrix.feature_names)
        strength = np.abs(attr.values[0]).sum(axis=0)  # over classes
        order = sorted(
            range(len(matrix.feature_names)),
            key=lambda j: (-strength[j], matrix.feature_names[j]),
        )[:5]
        result["top_shap_features"] = [
            {"feature": matrix.feature_names[j], "mean_abs_shap": float(strength[j] / len(classes))}
            for j in order
        ]
    return result


def _trim_series(series: MacroSeries, as_of: date) -> MacroSeries:
    keep = [(d, v) for d, v in zip(series.dates, series.values) if d <= as_of]
    if not keep:
        raise NoMeetingsInRange(f"series {series.series_id} has no data before {as_of}")
    return MacroSeries(
        series_id=series.series_id,
        dates=tuple(d for d, _ in keep),
        values=tuple(v for _, v in keep),
    )
