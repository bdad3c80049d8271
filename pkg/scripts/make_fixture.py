#!/usr/bin/env python3
"""Regenerate the synthetic fixture dataset under fixtures/.

The fixture plants a recoverable decision rule: a smooth monthly latent
state drives three macro series (a price index, an unemployment rate,
and a yield spread), and each meeting's decision comes from the latent
state at the preceding month plus noise. Documents attached to each
meeting sample their vocabulary from hawkish / dovish / neutral pools
with mixing driven by the same (noisy) meeting score, so text carries
signal beyond the macro block. FinBERT-style probabilities are mostly
neutral with a mild tilt, mirroring how such scores behave on formal
central-bank prose.

Deterministic: fixed seed, fixed file order. Rerunning rewrites
identical bytes.
"""

from __future__ import annotations

import json
import math
from datetime import date, timedelta
from pathlib import Path

import numpy as np

SEED = 31337
N_MEETINGS = 40
N_DOCS = 60
FIRST_MEETING = date(2018, 1, 31)
MEETING_GAP_DAYS = 45
MACRO_START = (2016, 9)
MACRO_END = (2023, 2)

RAISE_THRESHOLD = 0.5
LOWER_THRESHOLD = -0.4
SCORE_NOISE = 0.32

DOC_TYPES = ("statement", "minutes", "speech", "testimony", "presconf")

HAWKISH = """
inflation elevated robust strong strength gains tighten tightening
overheating boost accelerating momentum expansion solid persistent pressures
upside firm vigorous booming surged improvement improving strengthened
strengthening growth
""".split()

DOVISH = """
stress weakness weak deterioration downturn recession risks decline declining
strains turmoil drag slowdown accommodation easing soften fragile uncertainty
volatile disruptions losses unemployment contraction deteriorated slump
shortfall adverse
""".split()

NEUTRAL = """
committee policy economic outlook conditions federal rate target data labor
market assessment balance monitor members projections statement meeting
information development percent term range maintain path stance review
participants consistent objectives mandate measures indicators quarter
households business investment sector
""".split()

NEGATORS = ("not", "no")


def month_range(start: tuple[int, int], end: tuple[int, int]) -> list[date]:
    out = []
    y, m = start
    while (y, m) <= end:
        out.append(date(y, m, 1))
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return out


def sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def make_macro(rng: np.random.Generator, months: list[date]) -> dict[str, list[float]]:
    n = len(months)
    z = np.zeros(n)
    for i in range(1, n):
        z[i] = 0.75 * z[i - 1] + 0.6 * rng.normal()

    cpi = [240.0]
    for i in range(1, n):
        monthly_inflation = (2.0 + 1.6 * z[i]) / 100.0 / 12.0
        cpi.append(cpi[-1] * (1.0 + monthly_inflation + 0.0006 * rng.normal()))

    unrate = [float(np.clip(4.6 - 0.7 * z[i] + 0.08 * rng.normal(), 2.5, 9.5)) for i in range(n)]
    spread = [float(1.1 + 0.75 * z[i] + 0.10 * rng.normal()) for i in range(n)]

    return {
        "CPI": [round(v, 4) for v in cpi],
        "UNRATE": [round(v, 2) for v in unrate],
        "10YUST": [round(v, 3) for v in spread],
        "_z": z.tolist(),
    }


def write_macro_csv(path: Path, months: list[date], values: list[float]) -> None:
    lines = ["date,value"]
    for d, v in zip(months, values):
        lines.append(f"{d.isoformat()},{v}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def make_document_text(rng: np.random.Generator, p_hawk: float, n_tokens: int) -> str:
    words: list[str] = []
    while len(words) < n_tokens:
        u = rng.random()
        if u < 0.45:
            words.append(NEUTRAL[int(rng.integers(0, len(NEUTRAL)))])
        else:
            hawk = rng.random() < p_hawk
            pool = HAWKISH if hawk else DOVISH
            if rng.random() < 0.06:
                # negated mention of the opposite tone
                opp = DOVISH if hawk else HAWKISH
                words.append(NEGATORS[int(rng.integers(0, len(NEGATORS)))])
                words.append(opp[int(rng.integers(0, len(opp)))])
            else:
                words.append(pool[int(rng.integers(0, len(pool)))])
        if rng.random() < 0.05:
            words.append(f"{rng.integers(1, 5)}.{rng.integers(0, 9)}")

    sentences = []
    i = 0
    while i < len(words):
        span = int(rng.integers(8, 15))
        chunk = words[i : i + span]
        sentence = " ".join(chunk)
        sentences.append(sentence[0].upper() + sentence[1:] + ".")
        i += span
    return " ".join(sentences) + "\n"


def main() -> None:
    root = Path(__file__).resolve().parents[1] / "fixtures"
    (root / "macro").mkdir(parents=True, exist_ok=True)
    (root / "documents" / "docs").mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(SEED)
    months = month_range(MACRO_START, MACRO_END)
    macro = make_macro(rng, months)
    z = macro.pop("_z")
    month_index = {(d.year, d.month): i for i, d in enumerate(months)}

    for sid, values in macro.items():
        write_macro_csv(root / "macro" / f"{sid}.csv", months, values)

    # meetings every MEETING_GAP_DAYS
    meeting_dates = [FIRST_MEETING + timedelta(days=MEETING_GAP_DAYS * i) for i in range(N_MEETINGS)]

    # planted rule: latent state of the preceding month + noise
    scores = []
    for i, m in enumerate(meeting_dates):
        prev_month = (m.replace(day=1) - timedelta(days=1))
        zi = z[month_index[(prev_month.year, prev_month.month)]]
        noise = SCORE_NOISE * rng.normal()
        scores.append(float(zi + noise))

    labels = []
    for i, s in enumerate(scores):
        if i == 0:
            labels.append("Hold")  # first record is the no-change anchor
        elif s > RAISE_THRESHOLD:
            labels.append("Raise")
        elif s < LOWER_THRESHOLD:
            labels.append("Lower")
        else:
            labels.append("Hold")

    rate = 1.50
    rates = []
    for lab in labels:
        if lab == "Raise":
            rate = min(25.0, round(rate + 0.25, 2))
        elif lab == "Lower":
            rate = max(0.0, round(rate - 0.25, 2))
        rates.append(rate)

    lines = ["meeting_date,target_rate"]
    for m, r in zip(meeting_dates, rates):
        lines.append(f"{m.isoformat()},{r:.2f}")
    (root / "decisions.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # document allocation: three meetings deliberately get no documents
    empty_meetings = {7, 19, 31}
    eligible = [i for i in range(N_MEETINGS) if i not in empty_meetings]
    doc_counts = {i: 1 for i in eligible}
    extras = list(rng.permutation(eligible))[: N_DOCS - len(eligible)]
    for i in extras:
        doc_counts[i] += 1

    manifest = []
    finbert_lines = ["doc_id,p_positive,p_negative,p_neutral"]
    doc_no = 0
    for i in sorted(doc_counts):
        meeting = meeting_dates[i]
        prev_meeting = meeting_dates[i - 1] if i > 0 else None
        p_hawk = sigmoid(3.2 * scores[i])
        for j in range(doc_counts[i]):
            doc_no += 1
            doc_id = f"doc{doc_no:03d}"
            offset = int(rng.integers(2, min(MEETING_GAP_DAYS - 2, 21)))
            doc_date = meeting - timedelta(days=offset)
            if prev_meeting is not None and doc_date <= prev_meeting:
                doc_date = prev_meeting + timedelta(days=1)
            doc_type = DOC_TYPES[(doc_no - 1) % len(DOC_TYPES)]
            n_tokens = int(rng.integers(60, 140))
            text = make_document_text(rng, p_hawk, n_tokens)
            (root / "documents" / "docs" / f"{doc_id}.txt").write_text(text, encoding="utf-8")
            manifest.append(
                {
                    "doc_id": doc_id,
                    "date": doc_date.isoformat(),
                    "doc_type": doc_type,
                    "path": f"docs/{doc_id}.txt",
                }
            )

            tilt = 0.9 * scores[i] + 0.4 * rng.normal()
            e = np.exp([0.6 * tilt, -0.6 * tilt, 0.9])
            p = e / e.sum()
            finbert_lines.append(
                f"{doc_id},{float(p[0])!r},{float(p[1])!r},{float(p[2])!r}"
            )

    (root / "documents" / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    (root / "finbert.csv").write_text("\n".join(finbert_lines) + "\n", encoding="utf-8")

    config = {
        "data": {
            "macro_dir": "macro",
            "macro_series": ["CPI", "UNRATE", "10YUST"],
            "documents_manifest": "documents/manifest.json",
            "decisions": "decisions.csv",
            "finbert": "finbert.csv",
        },
        "method": "method1",
        "model": "gbdt",
        "split": {"test_fraction": 0.2, "cv_folds": 5, "apply_smote": True},
        "seed": 42,
        "output_dir": "out",
        "taylor": {
            "inflation_series": "CPI",
            "inflation_mode": "yoy_pct_change",
            "unemployment_series": "UNRATE",
        },
    }
    (root / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")

    counts = {c: labels.count(c) for c in ("Raise", "Hold", "Lower")}
    print(f"meetings: {N_MEETINGS}, labels: {counts}")
    print(f"documents: {doc_no}, empty meetings: {sorted(empty_meetings)}")
    print(f"test-window labels: {labels[-8:]}")


if __name__ == "__main__":
    main()
