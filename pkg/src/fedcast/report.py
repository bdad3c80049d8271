"""Figure rendering for the emitted artifacts.

Every chart is drawn from the delimited files the pipeline just wrote
(never from in-memory state), so the CSV/JSON outputs stay the source
of truth and the PNGs are reproducible afterwards from the artifacts
alone. matplotlib is imported lazily with the Agg backend; rendering is
skipped quietly for artifacts that were not produced.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

logger = logging.getLogger(__name__)


def _matplotlib():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _read_csv_rows(path: Path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [row for row in csv.reader(fh) if row]


def render_confusion(out_dir: Path) -> Path | None:
    src = out_dir / "confusion.csv"
    if not src.is_file():
        return None
    rows = _read_csv_rows(src)
    classes = rows[0][1:]
    matrix = [[int(v) for v in row[1:]] for row in rows[1:]]

    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(4.2, 3.8))
    im = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(classes)), classes)
    ax.set_yticks(range(len(classes)), classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    vmax = max(max(r) for r in matrix) or 1
    for i, row in enumerate(matrix):
        for j, v in enumerate(row):
            ax.text(j, i, str(v), ha="center", va="center",
                    color="white" if v > vmax / 2 else "black")
    ax.set_title("Held-out confusion matrix")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    dest = out_dir / "confusion.png"
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def render_shap_summary(out_dir: Path, top_n: int = 15) -> Path | None:
    src = out_dir / "shap_summary.csv"
    if not src.is_file():
        return None
    rows = _read_csv_rows(src)
    features = [r[1] for r in rows[1 : top_n + 1]]
    means = [float(r[2]) for r in rows[1 : top_n + 1]]

    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(6.4, 0.34 * len(features) + 1.2))
    ypos = range(len(features) - 1, -1, -1)
    ax.barh(list(ypos), means, color="#2a6fbb")
    ax.set_yticks(list(ypos), features, fontsize=8)
    ax.set_xlabel("mean |SHAP| (margin space)")
    ax.set_title("Top feature attributions")
    fig.tight_layout()
    dest = out_dir / "shap_summary.png"
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def render_cv_metrics(out_dir: Path) -> Path | None:
    src = out_dir / "cv_folds.json"
    if not src.is_file():
        return None
    payload = json.loads(src.read_text(encoding="utf-8"))
    folds = payload.get("folds", [])
    if not folds:
        return None
    aucs = [f.get("ovr_macro_auc") for f in folds]
    accs = [f.get("accuracy") for f in folds]

    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(5.4, 3.4))
    xs = range(1, len(folds) + 1)
    width = 0.38
    ax.bar([x - width / 2 for x in xs], [a or 0 for a in aucs], width, label="macro OvR AUC")
    ax.bar([x + width / 2 for x in xs], [a or 0 for a in accs], width, label="accuracy")
    ax.set_xticks(list(xs), [f"fold {x}" for x in xs])
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    ax.set_title("Cross-validation metrics by fold")
    fig.tight_layout()
    dest = out_dir / "cv_metrics.png"
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def render_run_figures(out_dir: Path) -> list[Path]:
    made = [render_confusion(out_dir), render_shap_summary(out_dir), render_cv_metrics(out_dir)]
    return [p for p in made if p is not None]


def render_sentiment_timeline(out_dir: Path) -> Path | None:
    src = out_dir / "sentiment.csv"
    if not src.is_file():
        return None
    rows = _read_csv_rows(src)[1:]
    if not rows:
        return None
    rows.sort(key=lambda r: r[1])
    dates = [r[1] for r in rows]
    net = [float(r[6]) for r in rows]

    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(7.2, 3.2))
    ax.plot(range(len(dates)), net, marker=".", lw=1, color="#333333")
    ax.axhline(0.0, color="#aa3333", lw=0.8, ls="--")
    step = max(1, len(dates) // 8)
    ax.set_xticks(range(0, len(dates), step), dates[::step], rotation=45, fontsize=7)
    ax.set_ylabel("net sentiment")
    ax.set_title("Document net sentiment over time")
    fig.tight_layout()
    dest = out_dir / "sentiment_timeline.png"
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def render_corpus_stats(out_dir: Path) -> Path | None:
    src = out_dir / "stats.csv"
    if not src.is_file():
        return None
    type_rows: list[list[str]] = []
    word_rows: list[list[str]] = []
    section = None
    for row in _read_csv_rows(src):
        if row[0].startswith("#"):
            section = row[0]
            continue
        if row[0] in ("doc_type", "class"):
            continue
        if section == "#doc_type_stats":
            type_rows.append(row)
        elif section == "#top_words":
            word_rows.append(row)
    if not type_rows:
        return None

    plt = _matplotlib()
    classes = sorted({r[0] for r in word_rows})
    fig, axes = plt.subplots(
        1, 1 + len(classes), figsize=(3.4 + 2.6 * len(classes), 3.6), squeeze=False
    )
    ax = axes[0][0]
    names = [r[0] for r in type_rows]
    medians = [float(r[3]) for r in type_rows]
    mins = [float(r[2]) for r in type_rows]
    maxs = [float(r[4]) for r in type_rows]
    ax.bar(names, medians, color="#88aacc")
    ax.errorbar(
        names,
        medians,
        yerr=[
            [m - lo for m, lo in zip(medians, mins)],
            [hi - m for m, hi in zip(medians, maxs)],
        ],
        fmt="none",
        ecolor="#333333",
        capsize=3,
    )
    ax.set_title("tokens per document type", fontsize=9)
    ax.tick_params(axis="x", rotation=30, labelsize=7)

    for k, cls in enumerate(classes, start=1):
        axc = axes[0][k]
        rows = [r for r in word_rows if r[0] == cls][:10]
        axc.barh(
            [r[2] for r in rows][::-1],
            [int(r[3]) for r in rows][::-1],
            color="#2a6fbb",
        )
        axc.set_title(f"top words: {cls}", fontsize=9)
        axc.tick_params(labelsize=7)
    fig.tight_layout()
    dest = out_dir / "corpus_stats.png"
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def render_stats_figures(out_dir: Path) -> list[Path]:
    made = [render_sentiment_timeline(out_dir), render_corpus_stats(out_dir)]
    return [p for p in made if p is not None]


def render_tuning_figure(out_dir: Path) -> Path | None:
    src = out_dir / "tuning.json"
    if not src.is_file():
        return None
    payload = json.loads(src.read_text(encoding="utf-8"))
    trail = payload.get("trail", [])
    if not trail:
        return None
    aucs = [t["mean_auc"] for t in trail]
    best = max(aucs)

    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.plot(range(1, len(aucs) + 1), aucs, marker="o", ms=4, lw=1)
    ax.axhline(best, color="#aa3333", lw=0.8, ls="--", label=f"best {best:.3f}")
    ax.set_xlabel("candidate")
    ax.set_ylabel("mean CV macro OvR AUC")
    ax.set_title("Hyperparameter search trail")
    ax.legend(fontsize=8)
    fig.tight_layout()
    dest = out_dir / "tuning_trail.png"
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest
