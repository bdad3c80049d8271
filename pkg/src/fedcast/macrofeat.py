"""Meeting-level feature engineering and matrix assembly.

Macro series become monthly and year-over-year difference features; a
Taylor-rule prescription and its gap to the incumbent rate are added;
documents (and their FinBERT probabilities) are aligned to the meeting
whose decision they precede. Per-meeting rows only ever use data
strictly before the meeting month, so no feature leaks the outcome.

The three hybrid methods plus the two unimodal ablations share one
assembly entry point; block layout per method:

    macro_only  macro
    text_only   text (tfidf+lm) + no_docs indicator
    method1     macro + text + no_docs
    method2     macro + finbert means + no_docs
    method3     same features as method2 (paired with the neural net)
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateTrainSplit,
    MissingMacroHistory,
    MissingModality,
    NoMeetingsInRange,
    TooShort,
)
from .ingest import DecisionRecord, DocumentRecord, FinbertProbRecord, MacroSeries
from .textfeat import TextFeatureVector

CLASSES = ("Raise", "Hold", "Lower")

METHODS = ("macro_only", "text_only", "method1", "method2", "method3")

FINBERT_NAMES = ("finbert_p_positive", "finbert_p_negative", "finbert_p_neutral")

NO_DOCS_COLUMN = "no_docs"

LABEL_EPSILON = 1e-9


def _month_index(d: date) -> int:
    return d.year * 12 + d.month - 1


def diff_transform(series: MacroSeries, kind: str) -> MacroSeries:
    """Difference a monthly series against its 1- or 12-month lag.

    ``kind="prev"`` yields v_t - v_{t-1 month}; ``kind="year"`` yields
    v_t - v_{t-12 months}. Months whose lag is absent are dropped.

    Raises:
        TooShort: no month has the required lag.
    """
    if kind not in ("prev", "year"):
        raise ValueError(f"kind must be 'prev' or 'year', got {kind!r}")
    lag = 1 if kind == "prev" else 12
    by_month = {_month_index(d): v for d, v in zip(series.dates, series.values)}
    out_dates: list[date] = []
    out_values: list[float] = []
    for d, v in zip(series.dates, series.values):
        lagged = by_month.get(_month_index(d) - lag)
        if lagged is not None:
            out_dates.append(d)
            out_values.append(v - lagged)
    if not out_dates:
        raise TooShort(f"{series.series_id}: no months with a {lag}-month lag")
    return MacroSeries(
        series_id=f"{series.series_id}_diff_{kind}",
        dates=tuple(out_dates),
        values=tuple(out_values),
    )


def taylor_rate(
    inflation_yoy: float,
    output_gap: float,
    neutral_real_rate: float = 2.0,
    inflation_target: float = 2.0,
) -> float:
    """Standard Taylor-rule prescription (percent).

    ``pi + r* + 0.5 (pi - pi*) + 0.5 gap`` with the conventional 0.5
    response coefficients.
    """
    return (
        inflation_yoy
        + neutral_real_rate
        + 0.5 * (inflation_yoy - inflation_target)
        + 0.5 * output_gap
    )


def inertia_diff(taylor: float, prev_target_rate: float) -> float:
    """Rule-implied rate minus the status-quo rate: the pressure to move."""
    return taylor - prev_target_rate


def label_decisions(
    decisions: Sequence[DecisionRecord], epsilon: float = LABEL_EPSILON
) -> list[str]:
    """Map each decision to Raise / Hold / Lower by the rate change."""
    labels = []
    for rec in decisions:
        delta = rec.target_rate - rec.prev_target_rate
        if delta > epsilon:
            labels.append("Raise")
        elif delta < -epsilon:
            labels.append("Lower")
        else:
            labels.append("Hold")
    return labels


def align_documents_to_meetings(
    docs: Sequence[DocumentRecord], meetings: Sequence[date]
) -> dict[date, list[str]]:
    """Assign each document to the first meeting on or after its date.

    A document dated d belongs to the earliest meeting m with
    previous_meeting < d <= m; documents after the last meeting stay
    unassigned. The result maps every meeting to its (possibly empty)
    doc_id list and partitions the assigned documents.
    """
    meeting_list = sorted(meetings)
    assignment: dict[date, list[str]] = {m: [] for m in meeting_list}
    for doc in docs:
        pos = bisect.bisect_left(meeting_list, doc.date)
        if pos < len(meeting_list):
            assignment[meeting_list[pos]].append(doc.doc_id)
    return assignment


@dataclass(frozen=True)
class MeetingFrame:
    """One meeting's assembled row: date, label, named features."""

    meeting_date: date
    label: str
    features: np.ndarray
    feature_names: tuple[str, ...]
    sources: Mapping[str, bool]


@dataclass(frozen=True)
class FeatureMatrix:
    """Rectangular per-meeting feature matrix with aligned labels."""

    X: np.ndarray
    feature_names: tuple[str, ...]
    labels: tuple[str, ...]
    meeting_dates: tuple[date, ...]
    sources: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        if self.X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        if self.X.shape[0] != len(self.labels) or self.X.shape[0] != len(self.meeting_dates):
            raise ValueError("rows must align with labels and dates")
        if self.X.shape[1] != len(self.feature_names):
            raise ValueError("columns must align with feature names")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature names must be unique")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("assembled matrix contains non-finite entries")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def frame(self, i: int) -> MeetingFrame:
        return MeetingFrame(
            meeting_date=self.meeting_dates[i],
            label=self.labels[i],
            features=self.X[i],
            feature_names=self.feature_names,
            sources=self.sources,
        )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("meeting_date,label," + ",".join(self.feature_names) + "\n")
            for i in range(self.n_rows):
                row = ",".join(repr(float(v)) for v in self.X[i])
                fh.write(f"{self.meeting_dates[i].isoformat()},{self.labels[i]},{row}\n")


@dataclass(frozen=True)
class FeatureScaler:
    """Train-split statistics used to standardize all rows."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        Z = X - self.mean
        ok = self.std >= 1e-12
        Z[:, ok] /= self.std[ok]
        return Z


def standardize(
    matrix: FeatureMatrix, train_row_mask: np.ndarray
) -> tuple[FeatureMatrix, FeatureScaler]:
    """Z-score every feature using training-row statistics.

    The standard deviation uses the population convention (divide by
    n). Features whose train std is below 1e-12 are centered but not
    scaled, leaving train rows at exactly 0. Test rows reuse the train
    statistics.

    Raises:
        DegenerateTrainSplit: fewer than 2 training rows selected.
    """
    mask = np.asarray(train_row_mask, dtype=bool)
    if mask.sum() < 2:
        raise DegenerateTrainSplit("need at least 2 training rows")
    train = matrix.X[mask]
    mean = train.mean(axis=0)
    std = train.std(axis=0)  # population convention
    scaler = FeatureScaler(mean=mean, std=std)
    return replace(matrix, X=scaler.apply(matrix.X.copy())), scaler


@dataclass(frozen=True)
class AssemblyConfig:
    """Settings controlling feature assembly."""

    macro_series: tuple[str, ...]
    inflation_series: str = "CPI"
    inflation_mode: str = "yoy_pct_change"  # or "level"
    gap_series: str | None = None
    unemployment_series: str = "UNRATE"
    okun_coefficient: float = 2.0
    neutral_real_rate: float = 2.0
    inflation_target: float = 2.0


def _latest_before_month(series: MacroSeries, meeting: date) -> tuple[date, float]:
    """Latest observation strictly before the meeting's month."""
    cutoff = meeting.replace(day=1)
    pos = bisect.bisect_left(series.dates, cutoff)
    if pos == 0:
        raise MissingMacroHistory(meeting, series.series_id)
    return series.dates[pos - 1], series.values[pos - 1]


def _inflation_yoy(series: MacroSeries, meeting: date, mode: str) -> float:
    if mode == "level":
        return _latest_before_month(series, meeting)[1]
    if mode != "yoy_pct_change":
        raise ValueError(f"unknown inflation_mode {mode!r}")
    by_month = {_month_index(d): v for d, v in zip(series.dates, series.values)}
    cutoff = _month_index(meeting.replace(day=1))
    candidates = [m for m in by_month if m < cutoff and (m - 12) in by_month]
    if not candidates:
        raise MissingMacroHistory(meeting, series.series_id)
    m = max(candidates)
    base = by_month[m - 12]
    if abs(base) < 1e-12:
        raise MissingMacroHistory(meeting, series.series_id)
    return 100.0 * (by_month[m] / base - 1.0)


def _output_gap(
    macro: Mapping[str, MacroSeries], meeting: date, config: AssemblyConfig
) -> float:
    if config.gap_series is not None:
        return _latest_before_month(macro[config.gap_series], meeting)[1]
    unemployment = macro.get(config.unemployment_series)
    if unemployment is None:
        raise MissingModality("taylor", f"gap proxy series {config.unemployment_series}")
    by_month = {_month_index(d): v for d, v in zip(unemployment.dates, unemployment.values)}
    cutoff = _month_index(meeting.replace(day=1))
    candidates = [m for m in by_month if m < cutoff and (m - 12) in by_month]
    if not candidates:
        raise MissingMacroHistory(meeting, unemployment.series_id)
    m = max(candidates)
    return -config.okun_coefficient * (by_month[m] - by_month[m - 12])


def assemble_feature_matrix(
    method: str,
    macro: Mapping[str, MacroSeries],
    decisions: Sequence[DecisionRecord],
    config: AssemblyConfig,
    documents: Sequence[DocumentRecord] = (),
    text_vectors: Mapping[str, TextFeatureVector] | None = None,
    finbert: Mapping[str, FinbertProbRecord] | None = None,
    text_feature_names: Sequence[str] | None = None,
    date_range: tuple[date | None, date | None] = (None, None),
) -> FeatureMatrix:
    """Build the per-meeting feature matrix for one method.

    Text and FinBERT blocks are the unweighted mean over the meeting's
    assigned documents; meetings with no documents get zero blocks and
    a ``no_docs`` indicator of 1. Macro features use the latest value
    strictly before the meeting month.

    Args:
        text_vectors: doc_id -> fused text vector (methods with text).
        finbert: doc_id -> probability record (methods 2/3).
        text_feature_names: names for the text block; required when a
            text method has meetings but some lack documents (so the
            block width is known even for all-zero rows).

    Raises:
        MissingModality: a required block's inputs are absent.
        NoMeetingsInRange: no meeting survives the date filter.
        MissingMacroHistory: a macro feature has no pre-meeting value.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")

    needs_macro = method != "text_only"
    needs_text = method in ("method1", "text_only")
    needs_finbert = method in ("method2", "method3")
    has_doc_block = needs_text or needs_finbert

    if needs_text and text_vectors is None:
        raise MissingModality(method, "text")
    if needs_finbert and finbert is None:
        raise MissingModality(method, "finbert")
    if has_doc_block and not documents:
        raise MissingModality(method, "documents")
    if needs_macro and not macro:
        raise MissingModality(method, "macro")

    start, end = date_range
    selected = [
        (rec, i)
        for i, rec in enumerate(decisions)
        if (start is None or rec.meeting_date >= start)
        and (end is None or rec.meeting_date <= end)
    ]
    if not selected:
        raise NoMeetingsInRange("no meetings inside the configured date range")
    labels_all = label_decisions(decisions)
    meetings = [rec.meeting_date for rec, _ in selected]

    # documents align against the FULL meeting calendar so that cropping
    # the range never pulls pre-range documents onto its first meeting
    assignment = (
        align_documents_to_meetings(documents, [r.meeting_date for r in decisions])
        if has_doc_block
        else {}
    )

    names: list[str] = []
    if needs_macro:
        diffed: dict[str, MacroSeries] = {}
        for sid in config.macro_series:
            if sid not in macro:
                raise MissingModality(method, f"macro series {sid}")
            for kind in ("prev", "year"):
                key = f"{sid}_diff_{kind}"
                diffed[key] = diff_transform(macro[sid], kind)
                names.append(key)
        names += ["Taylor_Rate", "Inertia_diff"]

    if needs_text:
        if text_feature_names is None:
            if text_vectors:
                text_feature_names = next(iter(text_vectors.values())).names
            else:
                raise MissingModality(method, "text feature names")
        names += list(text_feature_names)
    if needs_finbert:
        names += list(FINBERT_NAMES)
    if has_doc_block:
        names.append(NO_DOCS_COLUMN)

    rows: list[np.ndarray] = []
    labels: list[str] = []
    for rec, orig_idx in selected:
        parts: list[np.ndarray] = []
        if needs_macro:
            macro_vals = []
            for sid in config.macro_series:
                for kind in ("prev", "year"):
                    macro_vals.append(
                        _latest_before_month(diffed[f"{sid}_diff_{kind}"], rec.meeting_date)[1]
                    )
            pi = _inflation_yoy(
                macro[config.inflation_series], rec.meeting_date, config.inflation_mode
            )
            gap = _output_gap(macro, rec.meeting_date, config)
            taylor = taylor_rate(
                pi, gap, config.neutral_real_rate, config.inflation_target
            )
            macro_vals += [taylor, inertia_diff(taylor, rec.prev_target_rate)]
            parts.append(np.asarray(macro_vals, dtype=float))

        if has_doc_block:
            doc_ids = assignment.get(rec.meeting_date, [])
            if needs_text:
                width = len(text_feature_names)
                if doc_ids:
                    vecs = []
                    for did in doc_ids:
                        if did not in text_vectors:
                            raise MissingModality(method, f"text vector for doc {did}")
                        vecs.append(text_vectors[did].values)
                    parts.append(np.mean(vecs, axis=0))
                else:
                    parts.append(np.zeros(width))
            if needs_finbert:
                if doc_ids:
                    triples = []
                    for did in doc_ids:
                        if did not in finbert:
                            raise MissingModality(method, f"finbert probabilities for doc {did}")
                        p = finbert[did]
                        triples.append([p.p_positive, p.p_negative, p.p_neutral])
                    parts.append(np.mean(triples, axis=0))
                else:
                    parts.append(np.zeros(3))
            parts.append(np.asarray([0.0 if doc_ids else 1.0]))

        rows.append(np.concatenate(parts))
        labels.append(labels_all[orig_idx])

    return FeatureMatrix(
        X=np.vstack(rows),
        feature_names=tuple(names),
        labels=tuple(labels),
        meeting_dates=tuple(meetings),
        sources={
            "macro": needs_macro,
            "text": needs_text,
            "finbert": needs_finbert,
        },
    )
