"""Pipeline configuration: one JSON file, flag overrides, validation.

Precedence is flags > config file > defaults. Paths in the file resolve
relative to the file's own directory so a config can travel with its
data. Validation runs before any work starts and raises
:class:`~fedcast.errors.ConfigError` with an actionable message.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError
from .macrofeat import METHODS, AssemblyConfig
from .resources import (
    default_lexicon_path,
    default_negators_path,
    default_stopwords_path,
)

MODEL_CHOICES = ("gbdt", "random_forest", "extra_trees", "logreg", "naive_bayes", "fnn", "dummy")

TREE_MODELS = ("gbdt", "random_forest", "extra_trees")

DEFAULTS: dict[str, Any] = {
    "data": {
        "macro_dir": "macro",
        # the documented indicator set: inflation, labor, housing, the
        # 10y-3m spread, the policy rate itself, and consumer sentiment
        "macro_series": [
            "CPI", "PCE", "UNRATE", "NFP", "HOUST", "HPI",
            "10YUST", "FEDFUNDS", "UMich",
        ],
        "documents_manifest": "documents/manifest.json",
        "decisions": "decisions.csv",
        "finbert": None,
    },
    "method": "method1",
    "model": "gbdt",
    "hyperparams": {},
    "split": {"test_fraction": 0.2, "cv_folds": 5, "apply_smote": True},
    "seed": 42,
    "threads": 1,
    "output_dir": "out",
    "figures": True,
    "text": {
        "max_features": 500,
        "negation_window": 3,
        "n_top_terms": 36,
        "lexicon": None,
        "negators": None,
        "stopwords": None,
        # null keeps all six categories; a list restricts (e.g. the
        # four-category variant without the modal lists)
        "lexicon_categories": None,
    },
    "taylor": {
        "inflation_series": "CPI",
        "inflation_mode": "yoy_pct_change",
        "gap_series": None,
        "unemployment_series": "UNRATE",
        "okun_coefficient": 2.0,
        "neutral_real_rate": 2.0,
        "inflation_target": 2.0,
    },
    "date_range": {"start": None, "end": None},
    "tuning": {"random_budget": 10, "grid_radius": 1},
    "fred": {
        "endpoint": "https://api.stlouisfed.org/fred/series/observations",
        "series": [],
        "start": "2000-01-01",
        "end": "2025-01-01",
        "timeout": 10.0,
        "max_retries": 3,
    },
}


def _deep_merge(base: Mapping, override: Mapping) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _parse_date(text: str | None, label: str) -> date | None:
    if text is None:
        return None
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise ConfigError(f"{label} must be an ISO date, got {text!r}") from None


@dataclass(frozen=True)
class PipelineConfig:
    """Validated, effective configuration for one pipeline invocation."""

    raw: dict = field(repr=False)
    base_dir: Path

    # resolved fields
    method: str = field(init=False)
    model: str = field(init=False)
    seed: int = field(init=False)
    threads: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "method", self.raw["method"])
        object.__setattr__(self, "model", self.raw["model"])
        object.__setattr__(self, "seed", int(self.raw["seed"]))
        object.__setattr__(self, "threads", int(self.raw["threads"]))

    # --- construction ---------------------------------------------------

    @classmethod
    def from_file(
        cls, path: str | Path | None, overrides: Mapping[str, Any] | None = None
    ) -> "PipelineConfig":
        """Load and merge: defaults <- file <- overrides."""
        merged = dict(DEFAULTS)
        base_dir = Path.cwd()
        if path is not None:
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"config file not found: {p}")
            try:
                file_cfg = json.loads(p.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
            if not isinstance(file_cfg, dict):
                raise ConfigError("config root must be a JSON object")
            merged = _deep_merge(merged, file_cfg)
            base_dir = p.parent.resolve()
        if overrides:
            merged = _deep_merge(merged, {k: v for k, v in overrides.items() if v is not None})
        return cls(raw=merged, base_dir=base_dir)

    # --- resolved accessors ----------------------------------------------

    def path(self, relative: str | None) -> Path | None:
        if relative is None:
            return None
        p = Path(relative)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def macro_dir(self) -> Path:
        return self.path(self.raw["data"]["macro_dir"])

    @property
    def macro_series(self) -> tuple[str, ...]:
        return tuple(self.raw["data"]["macro_series"])

    @property
    def documents_manifest(self) -> Path:
        return self.path(self.raw["data"]["documents_manifest"])

    @property
    def decisions_path(self) -> Path:
        return self.path(self.raw["data"]["decisions"])

    @property
    def finbert_path(self) -> Path | None:
        return self.path(self.raw["data"]["finbert"])

    @property
    def output_dir(self) -> Path:
        p = Path(self.raw["output_dir"])
        return p if p.is_absolute() else Path.cwd() / p

    @property
    def figures(self) -> bool:
        return bool(self.raw["figures"])

    @property
    def lexicon_path(self) -> Path:
        return self.path(self.raw["text"]["lexicon"]) or default_lexicon_path()

    @property
    def negators_path(self) -> Path:
        return self.path(self.raw["text"]["negators"]) or default_negators_path()

    @property
    def stopwords_path(self) -> Path:
        return self.path(self.raw["text"]["stopwords"]) or default_stopwords_path()

    @property
    def text_settings(self) -> dict:
        return dict(self.raw["text"])

    @property
    def split_settings(self) -> dict:
        return dict(self.raw["split"])

    @property
    def tuning_settings(self) -> dict:
        return dict(self.raw["tuning"])

    @property
    def hyperparams(self) -> dict:
        return dict(self.raw["hyperparams"])

    @property
    def fred_settings(self) -> dict:
        return dict(self.raw["fred"])

    @property
    def date_range(self) -> tuple[date | None, date | None]:
        dr = self.raw["date_range"]
        return (
            _parse_date(dr.get("start"), "date_range.start"),
            _parse_date(dr.get("end"), "date_range.end"),
        )

    def assembly_config(self) -> AssemblyConfig:
        t = self.raw["taylor"]
        return AssemblyConfig(
            macro_series=self.macro_series,
            inflation_series=t["inflation_series"],
            inflation_mode=t["inflation_mode"],
            gap_series=t["gap_series"],
            unemployment_series=t["unemployment_series"],
            okun_coefficient=float(t["okun_coefficient"]),
            neutral_real_rate=float(t["neutral_real_rate"]),
            inflation_target=float(t["inflation_target"]),
        )

    def needs_text(self) -> bool:
        return self.method in ("method1", "text_only")

    def needs_finbert(self) -> bool:
        return self.method in ("method2", "method3")

    def needs_macro(self) -> bool:
        return self.method != "text_only"

    # --- validation --------------------------------------------------------

    def validate(self, require_data: bool = True) -> None:
        """Check method/model compatibility and referenced paths.

        Raises:
            ConfigError.
        """
        if self.method not in METHODS:
            raise ConfigError(
                f"method must be one of {METHODS}, got {self.method!r}"
            )
        if self.model not in MODEL_CHOICES:
            raise ConfigError(
                f"model must be one of {MODEL_CHOICES}, got {self.model!r}"
            )
        if self.method == "method3" and self.model != "fnn":
            raise ConfigError("method3 uses the neural net; set model to 'fnn'")
        if self.model == "naive_bayes" and self.method != "text_only":
            raise ConfigError(
                "naive_bayes needs nonnegative inputs and runs on the TF-IDF "
                "block; set method to 'text_only'"
            )
        sp = self.split_settings
        if not 0.0 < float(sp["test_fraction"]) < 1.0:
            raise ConfigError("split.test_fraction must be in (0, 1)")
        if int(sp["cv_folds"]) < 2:
            raise ConfigError("split.cv_folds must be >= 2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        self.date_range  # parses, may raise

        if not require_data:
            return
        if self.needs_finbert() and self.finbert_path is None:
            raise ConfigError(f"method {self.method!r} requires data.finbert")
        checks: list[tuple[str, Path | None]] = [
            ("data.decisions", self.decisions_path),
        ]
        if self.needs_macro():
            checks.append(("data.macro_dir", self.macro_dir))
        if self.needs_text() or self.needs_finbert():
            checks.append(("data.documents_manifest", self.documents_manifest))
        if self.needs_finbert():
            checks.append(("data.finbert", self.finbert_path))
        if self.needs_text():
            checks += [
                ("text.lexicon", self.lexicon_path),
                ("text.negators", self.negators_path),
                ("text.stopwords", self.stopwords_path),
            ]
        for label, p in checks:
            if p is None or not p.exists():
                raise ConfigError(f"{label} path does not exist: {p}")

    def echo(self) -> dict:
        """The effective configuration as written into reports.

        Execution-only keys (output directory, thread cap, figure
        toggle) are stripped: they change where and how fast artifacts
        appear, never their contents, and reports must be byte-stable
        across those knobs.
        """
        echo = json.loads(json.dumps(self.raw, sort_keys=True))
        for volatile in ("output_dir", "threads", "figures"):
            echo.pop(volatile, None)
        return echo
