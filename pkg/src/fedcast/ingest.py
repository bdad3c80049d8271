"""Loaders for all external data consumed by the pipeline.

Four kinds of input exist: macroeconomic time series (local CSV or the
St. Louis Fed HTTP API), central-bank communication documents, historical
rate-decision records, and precomputed FinBERT sentiment probabilities.
Everything is validated on the way in and returned as immutable domain
values; loaders are pure functions of file contents.

File formats:
    * Macro CSV:     header ``date,value``; ISO dates; ``.`` decimal point.
    * Doc manifest:  JSON array of ``{doc_id, date, doc_type, path}``;
                     each path resolves to a UTF-8 ``.txt`` file.
    * Decisions CSV: header ``meeting_date,target_rate`` (percent).
    * FinBERT CSV:   header ``doc_id,p_positive,p_negative,p_neutral``.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

from .errors import (
    AuthError,
    DuplicateDocId,
    DuplicateMonth,
    EmptySeries,
    HttpError,
    MalformedRow,
    MissingFile,
    NonMonotonicDates,
    NotAProbability,
    ParseError,
    SimplexViolation,
    UnknownDocType,
)

logger = logging.getLogger(__name__)

DOC_TYPES = frozenset({"statement", "minutes", "speech", "testimony", "presconf"})

FRED_ENDPOINT = "https://api.stlouisfed.org/fred/series/observations"

SIMPLEX_TOL = 1e-6


@dataclass(frozen=True)
class MacroSeries:
    """A named, dated univariate economic series.

    Observation dates are strictly increasing, one per calendar month
    (normalized to the first of the month), and all values are finite.
    """

    series_id: str
    dates: tuple[date, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.series_id:
            raise ValueError("series_id must be non-empty")
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values must align")
        if len(self.dates) == 0:
            raise EmptySeries(f"series {self.series_id} has no observations")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise DuplicateMonth(b) if b == a else NonMonotonicDates(
                    f"{self.series_id}: {b} after {a}"
                )
        for v in self.values:
            if v != v or v in (float("inf"), float("-inf")):
                raise ValueError(f"non-finite value in series {self.series_id}")

    def __len__(self) -> int:
        return len(self.dates)

    def value_map(self) -> dict[date, float]:
        return dict(zip(self.dates, self.values))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("date,value\n")
            for d, v in zip(self.dates, self.values):
                fh.write(f"{d.isoformat()},{v!r}\n")


@dataclass(frozen=True)
class DocumentRecord:
    """One central-bank communication document."""

    doc_id: str
    date: date
    doc_type: str
    text: str

    def __post_init__(self):
        if self.doc_type not in DOC_TYPES:
            raise UnknownDocType(self.doc_type)
        if not self.text:
            raise ValueError(f"document {self.doc_id!r} has empty text")


@dataclass(frozen=True)
class DecisionRecord:
    """One FOMC meeting outcome: new target rate and the incumbent rate."""

    meeting_date: date
    target_rate: float
    prev_target_rate: float

    def __post_init__(self):
        for r in (self.target_rate, self.prev_target_rate):
            if not 0.0 <= r <= 25.0:
                raise ValueError(f"rate {r} outside [0, 25]")


@dataclass(frozen=True)
class FinbertProbRecord:
    """Externally produced per-document sentiment probabilities."""

    doc_id: str
    p_positive: float
    p_negative: float
    p_neutral: float


def _month_start(d: date) -> date:
    return d.replace(day=1)


def _parse_iso_date(text: str, line_no: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise MalformedRow(line_no, f"bad date {text!r}") from None


def _parse_number(text: str, line_no: int) -> float:
    try:
        v = float(text.strip())
    except ValueError:
        raise MalformedRow(line_no, f"bad number {text!r}") from None
    if v != v or v in (float("inf"), float("-inf")):
        raise MalformedRow(line_no, f"non-finite value {text!r}")
    return v


def load_macro_csv(path: str | Path, series_id: str | None = None) -> MacroSeries:
    """Load one macro series from a ``date,value`` CSV.

    Monthly observations are normalized to the first of the month; rows
    within the same month raise :class:`DuplicateMonth`. For series
    sampled finer than monthly (e.g. a daily yield spread), the LAST
    observation of each month is kept (month-end collapse).

    Args:
        path: CSV file with header ``date,value``.
        series_id: identifier for the series; defaults to the file stem.

    Raises:
        MissingFile, MalformedRow, DuplicateMonth, EmptySeries.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingFile(p)
    sid = series_id if series_id is not None else p.stem

    rows: list[tuple[date, float]] = []
    with open(p, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1:
                if [c.strip().lower() for c in row[:2]] != ["date", "value"]:
                    raise MalformedRow(1, "expected header 'date,value'")
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2 or not row[1].strip():
                raise MalformedRow(line_no, "missing value field")
            d = _parse_iso_date(row[0], line_no)
            v = _parse_number(row[1], line_no)
            rows.append((d, v))

    if not rows:
        raise EmptySeries(f"{p} contains no observations")

    rows.sort(key=lambda r: r[0])
    monthly: dict[date, tuple[date, float]] = {}
    for d, v in rows:
        m = _month_start(d)
        if m in monthly:
            prev_exact, _ = monthly[m]
            if _month_start(prev_exact) == m and prev_exact.day == d.day:
                raise DuplicateMonth(m)
            # same month, different day: daily series collapses to month-end
            if d > prev_exact:
                monthly[m] = (d, v)
        else:
            monthly[m] = (d, v)

    months = sorted(monthly)
    return MacroSeries(
        series_id=sid,
        dates=tuple(months),
        values=tuple(monthly[m][1] for m in months),
    )


def fetch_fred_series(
    series_id: str,
    start: date,
    end: date,
    api_key: str,
    endpoint: str = FRED_ENDPOINT,
    timeout: float = 10.0,
    max_retries: int = 3,
) -> MacroSeries:
    """Fetch one series from the FRED observations endpoint.

    Placeholder ``"."`` observation values (FRED's missing marker) are
    dropped rather than interpolated. Transient request failures are
    retried at most ``max_retries`` times; on exhaustion the last error
    is raised and no partial series is ever returned.

    Raises:
        AuthError: the API rejected the key (HTTP 400 naming api_key, or 403).
        HttpError: any other non-200 status, or retry exhaustion.
        ParseError: response body not in the documented shape.
    """
    import requests

    if not api_key:
        raise AuthError("empty FRED API key")

    params = {
        "series_id": series_id,
        "observation_start": start.isoformat(),
        "observation_end": end.isoformat(),
        "file_type": "json",
        "api_key": api_key,
    }

    last_exc: Exception | None = None
    for attempt in range(max_retries):
        try:
            resp = requests.get(endpoint, params=params, timeout=timeout)
        except requests.RequestException as exc:
            last_exc = HttpError(0, f"request failed: {exc}")
            logger.warning("FRED request attempt %d failed: %s", attempt + 1, exc)
            time.sleep(0.0)
            continue
        if resp.status_code == 403:
            raise AuthError(f"FRED rejected the request (403) for {series_id}")
        if resp.status_code == 400 and "api_key" in resp.text.lower():
            raise AuthError(f"FRED rejected the API key for {series_id}")
        if resp.status_code != 200:
            last_exc = HttpError(resp.status_code, resp.text[:200])
            if 500 <= resp.status_code < 600:
                continue
            raise last_exc
        try:
            body = resp.json()
            observations = body["observations"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"unexpected FRED body shape: {exc}") from exc

        rows: list[tuple[date, float]] = []
        for obs in observations:
            try:
                value_text = obs["value"]
                d = date.fromisoformat(obs["date"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"unexpected observation shape: {exc}") from exc
            if value_text.strip() == ".":
                continue
            try:
                rows.append((d, float(value_text)))
            except ValueError as exc:
                raise ParseError(f"bad observation value {value_text!r}") from exc
        if not rows:
            raise EmptySeries(f"FRED returned no usable observations for {series_id}")

        monthly: dict[date, tuple[date, float]] = {}
        for d, v in sorted(rows, key=lambda r: r[0]):
            m = _month_start(d)
            if m not in monthly or d > monthly[m][0]:
                monthly[m] = (d, v)
        months = sorted(monthly)
        return MacroSeries(
            series_id=series_id,
            dates=tuple(months),
            values=tuple(monthly[m][1] for m in months),
        )

    assert last_exc is not None
    raise last_exc


def load_documents(manifest_path: str | Path) -> list[DocumentRecord]:
    """Load documents listed in a JSON manifest, in date order.

    The manifest is a JSON array of ``{doc_id, date, doc_type, path}``;
    paths are resolved relative to the manifest's directory.

    Raises:
        MissingFile, UnknownDocType, DuplicateDocId, ParseError.
    """
    mp = Path(manifest_path)
    if not mp.is_file():
        raise MissingFile(mp)
    try:
        entries = json.loads(mp.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise ParseError("manifest must be a JSON array")

    records: list[DocumentRecord] = []
    seen: set[str] = set()
    for entry in entries:
        try:
            doc_id = entry["doc_id"]
            doc_date = date.fromisoformat(entry["date"])
            doc_type = entry["doc_type"]
            rel_path = entry["path"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad manifest entry {entry!r}: {exc}") from exc
        if doc_type not in DOC_TYPES:
            raise UnknownDocType(doc_type)
        if doc_id in seen:
            raise DuplicateDocId(doc_id)
        seen.add(doc_id)
        body_path = mp.parent / rel_path
        if not body_path.is_file():
            raise MissingFile(body_path)
        text = body_path.read_text(encoding="utf-8")
        records.append(DocumentRecord(doc_id=doc_id, date=doc_date, doc_type=doc_type, text=text))

    records.sort(key=lambda r: (r.date, r.doc_id))
    return records


def load_decisions(path: str | Path) -> list[DecisionRecord]:
    """Load the decision history from a ``meeting_date,target_rate`` CSV.

    Each record's ``prev_target_rate`` is the preceding row's target;
    the first row's previous rate is its own target (no-change by
    convention). Rows must already be in date order.

    Raises:
        MissingFile, MalformedRow, NonMonotonicDates, EmptySeries.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingFile(p)

    parsed: list[tuple[date, float]] = []
    with open(p, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1:
                if [c.strip().lower() for c in row[:2]] != ["meeting_date", "target_rate"]:
                    raise MalformedRow(1, "expected header 'meeting_date,target_rate'")
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise MalformedRow(line_no, "missing target_rate field")
            d = _parse_iso_date(row[0], line_no)
            r = _parse_number(row[1], line_no)
            parsed.append((d, r))

    if not parsed:
        raise EmptySeries(f"{p} contains no decisions")
    for (a, _), (b, _) in zip(parsed, parsed[1:]):
        if b <= a:
            raise NonMonotonicDates(f"meeting {b} not after {a}")

    records: list[DecisionRecord] = []
    prev_rate = parsed[0][1]
    for d, r in parsed:
        records.append(DecisionRecord(meeting_date=d, target_rate=r, prev_target_rate=prev_rate))
        prev_rate = r
    return records


def load_finbert_probs(path: str | Path) -> list[FinbertProbRecord]:
    """Load precomputed FinBERT probabilities, validating the simplex.

    Each row must have probabilities in [0, 1] summing to 1 within
    ``SIMPLEX_TOL``.

    Raises:
        MissingFile, MalformedRow, NotAProbability, SimplexViolation,
        DuplicateDocId.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingFile(p)

    records: list[FinbertProbRecord] = []
    seen: set[str] = set()
    with open(p, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1:
                expected = ["doc_id", "p_positive", "p_negative", "p_neutral"]
                if [c.strip().lower() for c in row[:4]] != expected:
                    raise MalformedRow(1, "expected header 'doc_id,p_positive,p_negative,p_neutral'")
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 4:
                raise MalformedRow(line_no, "expected 4 fields")
            doc_id = row[0].strip()
            probs = [_parse_number(c, line_no) for c in row[1:4]]
            for v in probs:
                if not 0.0 <= v <= 1.0:
                    raise NotAProbability(line_no, v)
            total = sum(probs)
            if abs(total - 1.0) > SIMPLEX_TOL:
                raise SimplexViolation(line_no, total)
            if doc_id in seen:
                raise DuplicateDocId(doc_id)
            seen.add(doc_id)
            records.append(FinbertProbRecord(doc_id, *probs))
    return records


def load_macro_dir(
    macro_dir: str | Path, series_ids: Sequence[str]
) -> dict[str, MacroSeries]:
    """Load ``<id>.csv`` for each requested series id from a directory."""
    out: dict[str, MacroSeries] = {}
    for sid in series_ids:
        out[sid] = load_macro_csv(Path(macro_dir) / f"{sid}.csv", series_id=sid)
    return out
