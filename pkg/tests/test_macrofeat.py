from __future__ import annotations

from datetime import date

import numpy as np
import pytest

from fedcast.errors import (
    DegenerateTrainSplit,
    MissingMacroHistory,
    MissingModality,
    NoMeetingsInRange,
    TooShort,
)
from fedcast.ingest import DecisionRecord, DocumentRecord, FinbertProbRecord, MacroSeries
from fedcast.macrofeat import (
    AssemblyConfig,
    FeatureMatrix,
    align_documents_to_meetings,
    assemble_feature_matrix,
    diff_transform,
    inertia_diff,
    label_decisions,
    standardize,
    taylor_rate,
)
from fedcast.textfeat import TextFeatureVector


def series(sid, start_year, start_month, values):
    dates = []
    y, m = start_year, start_month
    for _ in values:
        dates.append(date(y, m, 1))
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return MacroSeries(series_id=sid, dates=tuple(dates), values=tuple(float(v) for v in values))


class TestDiffTransform:
    def test_prev_differences(self):
        out = diff_transform(series("X", 2020, 1, [1.0, 1.5, 2.5]), "prev")
        assert out.values == (0.5, 1.0)
        assert out.series_id == "X_diff_prev"

    def test_year_needs_thirteen_months(self):
        with pytest.raises(TooShort):
            diff_transform(series("X", 2020, 1, [3.0] * 12), "year")

    def test_year_difference_value(self):
        vals = [1.0 + 0.1 * i for i in range(13)]
        out = diff_transform(series("X", 2020, 1, vals), "year")
        assert len(out) == 1
        assert out.values[0] == pytest.approx(1.2)

    def test_gap_months_dropped(self):
        s = MacroSeries(
            series_id="X",
            dates=(date(2020, 1, 1), date(2020, 3, 1), date(2020, 4, 1)),
            values=(1.0, 5.0, 6.0),
        )
        out = diff_transform(s, "prev")
        assert out.dates == (date(2020, 4, 1),)
        assert out.values == (1.0,)

    def test_reintegration_recovers_tail(self):
        rng = np.random.default_rng(5)
        vals = rng.normal(size=20).cumsum()
        s = series("X", 2019, 1, vals)
        d = diff_transform(s, "prev")
        rebuilt = np.concatenate([[vals[0]], vals[0] + np.cumsum(d.values)])
        assert np.allclose(rebuilt, vals)


class TestStandardize:
    def matrix(self, X):
        X = np.asarray(X, dtype=float)
        return FeatureMatrix(
            X=X,
            feature_names=tuple(f"f{i}" for i in range(X.shape[1])),
            labels=tuple(["Hold"] * X.shape[0]),
            meeting_dates=tuple(date(2020, 1, 1 + i) for i in range(X.shape[0])),
        )

    def test_population_convention(self):
        out, scaler = standardize(self.matrix([[1.0], [3.0]]), np.array([True, True]))
        assert scaler.mean[0] == 2.0
        assert scaler.std[0] == 1.0  # population: sqrt(((1-2)^2+(3-2)^2)/2)
        assert out.X[:, 0].tolist() == [-1.0, 1.0]

    def test_constant_column_zeroed(self):
        out, _ = standardize(self.matrix([[5.0], [5.0], [5.0]]), np.array([True, True, True]))
        assert out.X[:, 0].tolist() == [0.0, 0.0, 0.0]

    def test_test_rows_use_train_stats(self):
        out, _ = standardize(
            self.matrix([[1.0], [3.0], [4.0]]), np.array([True, True, False])
        )
        assert out.X[2, 0] == pytest.approx(2.0)

    def test_too_few_train_rows(self):
        with pytest.raises(DegenerateTrainSplit):
            standardize(self.matrix([[1.0], [2.0]]), np.array([True, False]))


class TestTaylorAndInertia:
    def test_on_target(self):
        assert taylor_rate(2.0, 0.0) == pytest.approx(4.0)

    def test_hot_economy(self):
        assert taylor_rate(4.0, 2.0) == pytest.approx(8.0)

    def test_cold_economy(self):
        assert taylor_rate(0.0, -2.0) == pytest.approx(0.0)

    def test_inertia(self):
        assert inertia_diff(4.0, 1.0) == pytest.approx(3.0)
        assert inertia_diff(2.0, 2.0) == pytest.approx(0.0)
        assert inertia_diff(1.0, 5.0) == pytest.approx(-4.0)


class TestLabels:
    def test_all_three(self):
        recs = [
            DecisionRecord(date(2022, 1, 26), 0.50, 0.50),
            DecisionRecord(date(2022, 3, 16), 1.00, 0.50),
            DecisionRecord(date(2022, 5, 4), 1.00, 1.00),
            DecisionRecord(date(2022, 6, 15), 0.75, 1.00),
        ]
        assert label_decisions(recs) == ["Hold", "Raise", "Hold", "Lower"]


class TestAlignment:
    MEETINGS = [date(2022, 3, 16), date(2022, 5, 4)]

    def make_doc(self, doc_id, when):
        return DocumentRecord(doc_id=doc_id, date=when, doc_type="speech", text="x")

    def test_between_meetings_goes_to_next(self):
        out = align_documents_to_meetings(
            [self.make_doc("d", date(2022, 4, 10))], self.MEETINGS
        )
        assert out[date(2022, 5, 4)] == ["d"]

    def test_meeting_day_inclusive(self):
        out = align_documents_to_meetings(
            [self.make_doc("d", date(2022, 3, 16))], self.MEETINGS
        )
        assert out[date(2022, 3, 16)] == ["d"]

    def test_after_last_meeting_unassigned(self):
        out = align_documents_to_meetings(
            [self.make_doc("d", date(2022, 5, 5))], self.MEETINGS
        )
        assert all(doc_ids == [] for doc_ids in out.values())

    def test_partition(self):
        rng = np.random.default_rng(0)
        meetings = [date(2022, 1 + i, 15) for i in range(6)]
        docs = [
            self.make_doc(f"d{i}", date(2022, int(rng.integers(1, 7)), int(rng.integers(1, 28))))
            for i in range(40)
        ]
        out = align_documents_to_meetings(docs, meetings)
        assigned = [d for ids in out.values() for d in ids]
        assert len(assigned) == len(set(assigned))
        eligible = [d.doc_id for d in docs if d.date <= meetings[-1]]
        assert sorted(assigned) == sorted(eligible)


def make_assembly_inputs():
    """Two years of macro + 6 meetings + documents with blocks."""
    months = 30
    cpi = series("CPI", 2020, 1, [240 * (1.003) ** i for i in range(months)])
    unrate = series("UNRATE", 2020, 1, [4.0 + 0.05 * i for i in range(months)])
    spread = series("10YUST", 2020, 1, [1.0 + 0.01 * i for i in range(months)])
    macro = {"CPI": cpi, "UNRATE": unrate, "10YUST": spread}

    meetings = [date(2021, 3 + i, 15) for i in range(6)]
    rate = 1.0
    decisions = []
    prev = rate
    for i, m in enumerate(meetings):
        if i in (1, 2):
            rate = rate + 0.25
        elif i == 4:
            rate = rate - 0.25
        decisions.append(DecisionRecord(m, rate, prev))
        prev = rate

    docs = [
        DocumentRecord("d1", date(2021, 3, 10), "statement", "x"),
        DocumentRecord("d2", date(2021, 4, 2), "minutes", "x"),
        DocumentRecord("d3", date(2021, 4, 10), "speech", "x"),
        # meeting at index 2 (2021-05-15) gets nothing
        DocumentRecord("d4", date(2021, 6, 1), "testimony", "x"),
        DocumentRecord("d5", date(2021, 7, 3), "presconf", "x"),
        DocumentRecord("d6", date(2021, 8, 2), "statement", "x"),
    ]
    text_names = ("tfidf_alpha", "tfidf_beta", "tfidf_gamma", "tfidf_delta", "lm_count_positive")
    text_vectors = {
        d.doc_id: TextFeatureVector(
            values=np.asarray([float(i), 0.5, 0.25, 0.0, 1.0]), names=text_names
        )
        for i, d in enumerate(docs)
    }
    finbert = {
        "d1": FinbertProbRecord("d1", 0.2, 0.3, 0.5),
        "d2": FinbertProbRecord("d2", 0.2, 0.2, 0.6),
        "d3": FinbertProbRecord("d3", 0.4, 0.2, 0.4),
        "d4": FinbertProbRecord("d4", 0.1, 0.1, 0.8),
        "d5": FinbertProbRecord("d5", 0.3, 0.3, 0.4),
        "d6": FinbertProbRecord("d6", 0.5, 0.1, 0.4),
    }
    config = AssemblyConfig(macro_series=("CPI", "UNRATE", "10YUST"))
    return macro, decisions, docs, text_vectors, finbert, config


class TestAssembly:
    def test_macro_only_columns(self):
        macro, decisions, *_ , config = make_assembly_inputs()
        matrix = assemble_feature_matrix("macro_only", macro, decisions, config)
        assert matrix.feature_names == (
            "CPI_diff_prev", "CPI_diff_year",
            "UNRATE_diff_prev", "UNRATE_diff_year",
            "10YUST_diff_prev", "10YUST_diff_year",
            "Taylor_Rate", "Inertia_diff",
        )
        assert matrix.n_rows == 6

    def test_feature_naming_scheme_for_reported_series(self):
        # the column naming contract: <series>_diff_prev / _diff_year for
        # any configured id (mixed case and digit-leading included),
        # plus the two rule-based columns
        months = 30
        macro = {
            sid: series(sid, 2020, 1, [100 + i for i in range(months)])
            for sid in ("NFP", "10YUST", "UMich", "CPI", "UNRATE")
        }
        decisions = [DecisionRecord(date(2021, 6, 15), 1.0, 1.0)]
        config = AssemblyConfig(macro_series=("NFP", "10YUST", "UMich"))
        matrix = assemble_feature_matrix("macro_only", macro, decisions, config)
        for name in ("Taylor_Rate", "Inertia_diff", "NFP_diff_prev",
                     "10YUST_diff_prev", "UMich_diff_prev"):
            assert name in matrix.feature_names

    def test_method2_block_layout(self):
        macro, decisions, docs, _, finbert, config = make_assembly_inputs()
        matrix = assemble_feature_matrix(
            "method2", macro, decisions, config, documents=docs, finbert=finbert
        )
        assert matrix.feature_names[-4:] == (
            "finbert_p_positive", "finbert_p_negative", "finbert_p_neutral", "no_docs",
        )
        # meeting 1 (2021-04-15) holds d2 and d3 -> mean p_positive 0.3
        row = matrix.X[1]
        j = matrix.feature_names.index("finbert_p_positive")
        assert row[j] == pytest.approx(0.3)

    def test_no_docs_indicator_and_zero_block(self):
        macro, decisions, docs, text_vectors, _, config = make_assembly_inputs()
        matrix = assemble_feature_matrix(
            "method1", macro, decisions, config,
            documents=docs, text_vectors=text_vectors,
        )
        j = matrix.feature_names.index("no_docs")
        assert matrix.X[2, j] == 1.0  # the empty meeting
        assert matrix.X[0, j] == 0.0
        ja = matrix.feature_names.index("tfidf_alpha")
        assert matrix.X[2, ja] == 0.0

    def test_text_mean_over_assigned_docs(self):
        macro, decisions, docs, text_vectors, _, config = make_assembly_inputs()
        matrix = assemble_feature_matrix(
            "method1", macro, decisions, config,
            documents=docs, text_vectors=text_vectors,
        )
        ja = matrix.feature_names.index("tfidf_alpha")
        # meeting 1 holds d2 (value 1.0) and d3 (value 2.0)
        assert matrix.X[1, ja] == pytest.approx(1.5)

    def test_column_count_ordering_across_methods(self):
        macro, decisions, docs, text_vectors, finbert, config = make_assembly_inputs()
        widths = {}
        widths["macro_only"] = assemble_feature_matrix(
            "macro_only", macro, decisions, config
        ).X.shape[1]
        widths["method2"] = assemble_feature_matrix(
            "method2", macro, decisions, config, documents=docs, finbert=finbert
        ).X.shape[1]
        widths["method1"] = assemble_feature_matrix(
            "method1", macro, decisions, config, documents=docs, text_vectors=text_vectors
        ).X.shape[1]
        assert widths["macro_only"] < widths["method2"] < widths["method1"]
        assert widths["method2"] == widths["macro_only"] + 3 + 1

    def test_method3_same_features_as_method2(self):
        macro, decisions, docs, _, finbert, config = make_assembly_inputs()
        m2 = assemble_feature_matrix(
            "method2", macro, decisions, config, documents=docs, finbert=finbert
        )
        m3 = assemble_feature_matrix(
            "method3", macro, decisions, config, documents=docs, finbert=finbert
        )
        assert m2.feature_names == m3.feature_names
        assert np.array_equal(m2.X, m3.X)

    def test_text_only_has_no_macro(self):
        _, decisions, docs, text_vectors, _, config = make_assembly_inputs()
        matrix = assemble_feature_matrix(
            "text_only", {}, decisions, config,
            documents=docs, text_vectors=text_vectors,
        )
        assert matrix.feature_names == (
            "tfidf_alpha", "tfidf_beta", "tfidf_gamma", "tfidf_delta",
            "lm_count_positive", "no_docs",
        )

    def test_missing_modality(self):
        macro, decisions, docs, *_ , config = make_assembly_inputs()
        with pytest.raises(MissingModality):
            assemble_feature_matrix("method2", macro, decisions, config, documents=docs)

    def test_missing_finbert_row_for_assigned_doc(self):
        macro, decisions, docs, _, finbert, config = make_assembly_inputs()
        finbert = dict(finbert)
        del finbert["d2"]
        with pytest.raises(MissingModality):
            assemble_feature_matrix(
                "method2", macro, decisions, config, documents=docs, finbert=finbert
            )

    def test_no_meetings_in_range(self):
        macro, decisions, *_ , config = make_assembly_inputs()
        with pytest.raises(NoMeetingsInRange):
            assemble_feature_matrix(
                "macro_only", macro, decisions, config,
                date_range=(date(2030, 1, 1), None),
            )

    def test_insufficient_macro_history(self):
        macro, decisions, *_ , config = make_assembly_inputs()
        early = [DecisionRecord(date(2020, 2, 10), 1.0, 1.0)] + [
            DecisionRecord(d.meeting_date, d.target_rate, d.prev_target_rate)
            for d in decisions
        ]
        with pytest.raises(MissingMacroHistory):
            assemble_feature_matrix("macro_only", macro, early, config)

    def test_cropping_keeps_full_calendar_alignment(self):
        # documents belong to their own inter-meeting window even when
        # the assembled range starts later; the first in-range meeting
        # must not absorb earlier documents
        macro, decisions, docs, text_vectors, _, config = make_assembly_inputs()
        matrix = assemble_feature_matrix(
            "method1", macro, decisions, config,
            documents=docs, text_vectors=text_vectors,
            date_range=(date(2021, 6, 1), None),
        )
        assert matrix.meeting_dates[0] == date(2021, 6, 15)
        ja = matrix.feature_names.index("tfidf_alpha")
        # only d4 (value 3.0) falls in (2021-05-15, 2021-06-15]
        assert matrix.X[0, ja] == pytest.approx(3.0)

    def test_no_nan_anywhere(self):
        macro, decisions, docs, text_vectors, finbert, config = make_assembly_inputs()
        for method, kwargs in [
            ("macro_only", {}),
            ("method1", {"documents": docs, "text_vectors": text_vectors}),
            ("method2", {"documents": docs, "finbert": finbert}),
        ]:
            matrix = assemble_feature_matrix(method, macro, decisions, config, **kwargs)
            assert np.all(np.isfinite(matrix.X))

    def test_csv_roundtrip_layout(self, tmp_path):
        macro, decisions, *_ , config = make_assembly_inputs()
        matrix = assemble_feature_matrix("macro_only", macro, decisions, config)
        out = tmp_path / "matrix.csv"
        matrix.to_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0].startswith("meeting_date,label,CPI_diff_prev")
        assert len(lines) == 1 + matrix.n_rows
