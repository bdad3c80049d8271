"""Acceptance gate: every release criterion, timed, one line per result.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the
[PASS]/[FAIL] lines as they happen. Each criterion carries the wall
clock budget it must finish within; budgets are asserted.
"""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from fedcast.cli import main as cli_main
from fedcast.config import PipelineConfig
from fedcast.evaluation import cross_validate, make_trainer, tune
from fedcast.explain import brute_force_shapley, margin_scores, tree_shap
from fedcast.metrics import roc_auc_ovr
from fedcast.models import (
    FnnConfig,
    GbdtParams,
    deserialize_model,
    init_fnn,
    serialize_model,
    train_dummy,
    train_gbdt,
)
from fedcast.pipeline import prepare_dataset
from fedcast.sampling import smote_resample, stratified_kfold
from fedcast.textfeat import (
    Lexicon,
    TokenizedDocument,
    fit_tfidf,
    score_lm_sentiment,
    transform_tfidf,
)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@contextmanager
def criterion(name: str, budget_seconds: float):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.monotonic() - start
    if elapsed >= budget_seconds:
        print(f"[FAIL] {name} (too slow: {elapsed:.2f}s >= {budget_seconds}s)")
        raise AssertionError(f"{name} exceeded its {budget_seconds}s budget: {elapsed:.2f}s")
    print(f"[PASS] {name} ({elapsed:.2f}s)")


def fixture_config(tmp_path, **overrides):
    merged = {"output_dir": str(tmp_path / "out"), "figures": False}
    merged.update(overrides)
    return PipelineConfig.from_file(FIXTURES / "config.json", merged)


def doc(doc_id, tokens):
    return TokenizedDocument(doc_id=doc_id, tokens=tuple(tokens))


def test_tfidf_matches_formula_oracle():
    with criterion("TF-IDF transform matches the scripted formula to 1e-9", 1.0):
        corpus_tokens = [["inflation", "rises"], ["inflation", "falls"], ["rates", "hold"]]
        corpus = [doc(f"d{i}", toks) for i, toks in enumerate(corpus_tokens)]
        model = fit_tfidf(corpus)

        from collections import Counter

        df = Counter()
        for toks in corpus_tokens:
            for term in set(toks):
                df[term] += 1
        vocab = sorted(df, key=lambda t: (-df[t], t))
        assert list(model.vocabulary) == vocab

        probes = [
            ["inflation", "inflation"],
            ["inflation", "rises", "hold", "hold"],
            ["rates"],
            ["unseen"],
            [],
        ]
        for probe in probes:
            tf = Counter(probe)
            raw = [
                tf.get(t, 0) * (math.log((1 + 3) / (1 + df[t])) + 1.0) for t in vocab
            ]
            norm = math.sqrt(sum(v * v for v in raw))
            expected = [v / norm if norm else 0.0 for v in raw]
            got = transform_tfidf(model, doc("q", probe))
            assert np.abs(got - np.asarray(expected)).max() < 1e-9


def test_lm_scoring_matches_naive_rule():
    with criterion("LM negation scoring matches the naive tally exactly", 1.0):
        lex = Lexicon(
            categories={
                "positive": frozenset({"good", "growth", "w0"}),
                "negative": frozenset({"risks", "w1", "w0"}),
                "uncertainty": frozenset({"maybe", "w2"}),
                "litigious": frozenset({"sue"}),
                "strong_modal": frozenset({"must"}),
                "weak_modal": frozenset({"could", "w2"}),
            },
            negators=frozenset({"not", "never"}),
        )

        def naive(tokens, window):
            order = ("positive", "negative", "uncertainty", "litigious",
                     "strong_modal", "weak_modal")
            counts = {c: 0 for c in order}
            used = [False] * len(tokens)
            for i, tok in enumerate(tokens):
                for cat in order:
                    if tok not in lex.categories[cat]:
                        continue
                    if cat in ("positive", "negative"):
                        hit = None
                        for j in range(i - 1, max(-1, i - window - 1), -1):
                            if tokens[j] in lex.negators and not used[j]:
                                hit = j
                                break
                        if hit is not None:
                            used[hit] = True
                            counts["negative" if cat == "positive" else "positive"] += 1
                        else:
                            counts[cat] += 1
                    else:
                        counts[cat] += 1
            return counts

        # the documented worked example
        tokens = ["growth", "is", "not", "good", "and", "risks", "increase"]
        out = score_lm_sentiment(doc("ex", tokens), lex)
        assert out.counts["positive"] == 1
        assert out.counts["negative"] == 2
        assert out.net_sentiment == pytest.approx((1 - 2) / 7)

        rng = np.random.default_rng(777)
        pool = ["good", "growth", "risks", "maybe", "sue", "must", "could", "w0",
                "not", "never", "plain", "w0", "w1", "w2", "filler"]
        for trial in range(100):
            n = int(rng.integers(1, 60))
            tokens = [pool[int(rng.integers(0, len(pool)))] for _ in range(n)]
            window = int(rng.integers(1, 6))
            got = score_lm_sentiment(doc(f"r{trial}", tokens), lex, negation_window=window)
            assert dict(got.counts) == naive(tokens, window), tokens


def test_gbdt_sanity_tuned_auc_and_deviance(tmp_path):
    with criterion("tuned GBDT: fixture CV macro AUC >= 0.85, beats dummy by >= 0.25", 30.0):
        config = fixture_config(tmp_path, method="macro_only", seed=42)
        dataset = prepare_dataset(config)
        folds = list(dataset.plan.folds)

        result = tune(
            "gbdt", dataset.matrix.X, dataset.labels, folds,
            random_budget=6, grid_radius=1, seed=42, apply_smote=True,
        )
        assert result.mean_cv_auc >= 0.85, result.best_params

        dummy_cv = cross_validate(
            lambda X, y, s: train_dummy(X, y), dataset.matrix.X, dataset.labels, folds,
        )
        assert dummy_cv.mean_auc == pytest.approx(0.5)
        assert result.mean_cv_auc - dummy_cv.mean_auc >= 0.25

        train_rows = list(dataset.plan.train_indices)
        X_tr = dataset.matrix.X[train_rows]
        y_tr = [dataset.labels[i] for i in train_rows]
        for lr in (0.01, 0.1):
            model = train_gbdt(
                X_tr, y_tr,
                params=GbdtParams(n_estimators=30, learning_rate=lr,
                                  min_samples_leaf=2, min_samples_split=4),
                seed=42,
            )
            dev = model.train_deviance
            assert all(a >= b - 1e-12 for a, b in zip(dev, dev[1:])), f"lr={lr}"


def test_hybrid_beats_macro_only_across_seeds(tmp_path):
    with criterion("method1 CV AUC >= macro_only on >= 4 of 5 seeds", 120.0):
        wins = 0
        for seed in range(5):
            aucs = {}
            for method in ("method1", "macro_only"):
                config = fixture_config(tmp_path, method=method, seed=seed)
                dataset = prepare_dataset(config)
                cv = cross_validate(
                    make_trainer("gbdt", {}),
                    dataset.matrix.X,
                    dataset.labels,
                    list(dataset.plan.folds),
                    apply_smote=True,
                    seed=seed,
                )
                aucs[method] = cv.mean_auc
            if aucs["method1"] >= aucs["macro_only"]:
                wins += 1
        assert wins >= 4, f"hybrid won only {wins}/5 seeds"


def _random_scalar_tree(rng, d, depth):
    from fedcast.models.trees import LEAF, Tree

    feature, threshold, left, right, value, cover = [], [], [], [], [], []

    def build(level, node_cover):
        idx = len(feature)
        feature.append(LEAF)
        threshold.append(math.nan)
        left.append(LEAF)
        right.append(LEAF)
        value.append([float(rng.normal())])
        cover.append(node_cover)
        if level >= depth or rng.random() < 0.2:
            return idx
        feature[idx] = int(rng.integers(0, d))
        threshold[idx] = float(rng.normal())
        frac = float(rng.uniform(0.1, 0.9))
        left[idx] = build(level + 1, node_cover * frac)
        right[idx] = build(level + 1, node_cover * (1 - frac))
        return idx

    build(0, 1.0)
    return Tree(
        feature=np.asarray(feature),
        threshold=np.asarray(threshold),
        children_left=np.asarray(left),
        children_right=np.asarray(right),
        value=np.asarray(value),
        cover=np.asarray(cover),
        n_node_samples=np.ones(len(feature), dtype=np.int64),
    )


def test_treeshap_equals_brute_force_and_local_accuracy(tmp_path):
    with criterion("TreeSHAP == brute force on 200 random models; fixture local accuracy", 30.0):
        from fedcast.models import GbdtModel

        rng = np.random.default_rng(2025)
        worst = 0.0
        for _ in range(200):
            d = int(rng.integers(1, 11))
            depth = int(rng.integers(1, 4))
            stage = [_random_scalar_tree(rng, d, depth), _random_scalar_tree(rng, d, depth)]
            model = GbdtModel(
                classes=("a", "b"),
                f0=np.zeros(2),
                trees=[stage],
                params=GbdtParams(n_estimators=1, learning_rate=float(rng.uniform(0.05, 1.0)),
                                  min_samples_leaf=1, min_samples_split=2),
                feature_count=d,
                seed=0,
            )
            x = rng.normal(size=d)
            fast = tree_shap(model, x[None, :]).values[0]
            slow = brute_force_shapley(model, x)
            worst = max(worst, float(np.abs(fast - slow).max()))
        assert worst <= 1e-8, worst

        config = fixture_config(tmp_path, seed=42)
        dataset = prepare_dataset(config)
        train_rows = list(dataset.plan.train_indices)
        model = train_gbdt(
            dataset.matrix.X[train_rows],
            [dataset.labels[i] for i in train_rows],
            seed=42,
        )
        attr = tree_shap(model, dataset.matrix.X, feature_names=dataset.matrix.feature_names)
        margins = margin_scores(model, dataset.matrix.X)
        assert np.abs(attr.margins() - margins).max() <= 1e-8


def test_fnn_gradient_check():
    with criterion("FNN gradients match central differences (rel err < 1e-4)", 5.0):
        rng = np.random.default_rng(4242)
        X = rng.normal(size=(5, 4))
        y_idx = np.asarray([0, 1, 2, 1, 0])
        w = rng.uniform(0.5, 2.0, size=5)
        model = init_fnn(4, ("a", "b", "c"), FnnConfig(hidden=(8, 6), seed=99))
        grads_W, grads_b = model.gradients(X, y_idx, w)
        h = 1e-5
        worst = 0.0
        for arrays, grads in ((model.weights, grads_W), (model.biases, grads_b)):
            for arr, g in zip(arrays, grads):
                it = np.nditer(arr, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    orig = arr[idx]
                    arr[idx] = orig + h
                    up = model.loss(X, y_idx, w)
                    arr[idx] = orig - h
                    down = model.loss(X, y_idx, w)
                    arr[idx] = orig
                    fd = (up - down) / (2 * h)
                    denom = max(abs(fd), abs(float(g[idx])), 1e-8)
                    worst = max(worst, abs(fd - float(g[idx])) / denom)
        assert worst < 1e-4, worst


def test_smote_properties():
    with criterion("SMOTE: exact balance, segment membership, determinism", 1.0):
        rng = np.random.default_rng(31415)
        X = rng.normal(size=(26, 5))
        y = ["H"] * 14 + ["R"] * 7 + ["L"] * 5
        Xr, yr = smote_resample(X, y, seed=8)
        assert {c: yr.count(c) for c in set(yr)} == {"H": 14, "R": 14, "L": 14}
        assert np.array_equal(Xr[:26], X)

        def on_segment(p, a, b, tol=1e-9):
            ab, ap = b - a, p - a
            denom = float(np.dot(ab, ab))
            if denom < tol:
                return bool(np.linalg.norm(ap) < tol)
            t = float(np.dot(ap, ab)) / denom
            return -tol <= t <= 1 + tol and float(np.linalg.norm(ap - t * ab)) < 1e-9

        for i in range(26, len(yr)):
            members = X[[j for j in range(26) if y[j] == yr[i]]]
            assert any(
                on_segment(Xr[i], members[a], members[b])
                for a in range(len(members))
                for b in range(len(members))
            )

        X2, y2 = smote_resample(X, y, seed=8)
        assert np.array_equal(Xr, X2) and yr == y2


def test_stratified_kfold_balance_on_random_vectors():
    with criterion("stratified k-fold deviates < 1 on 1000 random label vectors", 5.0):
        rng = np.random.default_rng(161803)
        for trial in range(1000):
            n = int(rng.integers(6, 40))
            k = int(rng.integers(2, min(6, n) + 1))
            labels = [f"c{v}" for v in rng.integers(0, 3, size=n)]
            folds = stratified_kfold(labels, k=k, seed=trial)
            for cls in set(labels):
                share = labels.count(cls) / k
                for _, val in folds:
                    count = sum(1 for i in val if labels[i] == cls)
                    assert abs(count - share) < 1.0


def test_auc_matches_pairwise_enumeration():
    with criterion("macro OvR AUC equals pair enumeration on 500 instances", 5.0):
        rng = np.random.default_rng(271828)
        done = 0
        while done < 500:
            n = int(rng.integers(4, 20))
            K = int(rng.integers(2, 5))
            classes = [f"c{j}" for j in range(K)]
            y = [classes[int(rng.integers(0, K))] for _ in range(n)]
            if len(set(y)) < 2:
                continue
            probs = rng.random((n, K))
            if done % 2 == 0:
                probs = np.round(probs, 1)
            got = roc_auc_ovr(y, probs, classes=classes)
            col = {c: j for j, c in enumerate(classes)}
            aucs = []
            for cls in sorted(set(y)):
                scores = probs[:, col[cls]]
                pos = [s for s, lab in zip(scores, y) if lab == cls]
                neg = [s for s, lab in zip(scores, y) if lab != cls]
                hits = sum(
                    1.0 if p > q else (0.5 if p == q else 0.0) for p in pos for q in neg
                )
                aucs.append(hits / (len(pos) * len(neg)))
            assert abs(got - float(np.mean(aucs))) <= 1e-12
            done += 1


def test_end_to_end_determinism(tmp_path):
    with criterion("cmd_run byte-identical across reruns and thread counts", 60.0):
        outs = [tmp_path / f"run{i}" for i in range(3)]
        argsets = [
            ["--threads", "1"],
            ["--threads", "1"],
            ["--threads", "8"],
        ]
        for out, extra in zip(outs, argsets):
            code = cli_main(
                ["--config", str(FIXTURES / "config.json"), "--out", str(out),
                 "--no-figures", "--seed", "42", *extra, "run"]
            )
            assert code == 0
        ref = (outs[0] / "report.json").read_bytes()
        assert (outs[1] / "report.json").read_bytes() == ref, "rerun differs"
        assert (outs[2] / "report.json").read_bytes() == ref, "thread count changed bytes"
        for name in ("confusion.csv", "cv_folds.json", "shap_summary.csv",
                     "shap_long.csv", "model.json"):
            assert (outs[1] / name).read_bytes() == (outs[0] / name).read_bytes()
            assert (outs[2] / name).read_bytes() == (outs[0] / name).read_bytes()


def test_production_hyperparameters_roundtrip(tmp_path):
    with criterion("documented GBDT configuration round-trips unchanged", 1.0):
        configured = {
            "n_estimators": 10,
            "learning_rate": 0.01,
            "max_depth": 4,
            "max_features": "sqrt",
            "min_samples_leaf": 10,
            "min_samples_split": 10,
        }
        # direct model-level round trip
        rng = np.random.default_rng(55)
        X = rng.normal(size=(40, 6))
        y = ["a" if v > 0.3 else ("b" if v < -0.3 else "c") for v in X[:, 0]]
        model = train_gbdt(X, y, params=GbdtParams(**configured), seed=42)
        payload = json.loads(json.dumps(serialize_model(model, [f"f{i}" for i in range(6)])))
        assert payload["hyperparams"] == configured
        loaded, _ = deserialize_model(payload)
        assert loaded.params.to_dict() == configured
        assert np.array_equal(model.predict_proba(X), loaded.predict_proba(X))

    with criterion("same configuration survives the config -> run -> bundle path", 30.0):
        configured = {
            "n_estimators": 10,
            "learning_rate": 0.01,
            "max_depth": 4,
            "max_features": "sqrt",
            "min_samples_leaf": 10,
            "min_samples_split": 10,
        }
        from fedcast.pipeline import run_pipeline

        config = fixture_config(tmp_path, hyperparams=configured, method="macro_only")
        run_pipeline(config)
        bundle = json.loads((config.output_dir / "model.json").read_text())
        assert bundle["model"]["hyperparams"] == configured
        reloaded, _ = deserialize_model(bundle["model"])
        assert reloaded.params.to_dict() == configured
