"""Small shared helpers: deterministic parallelism, hashing, build id."""

from __future__ import annotations

import hashlib
import json
import subprocess
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map with optional threading; results always in input order.

    Work items must be independent and pure, so the thread count can
    never change the outcome, only the wall time.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def config_hash(obj) -> str:
    """Stable digest of a JSON-able configuration."""
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    ).hexdigest()[:16]


def build_describe() -> str:
    """git describe of the working tree, or the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).parent,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    from . import __version__

    return f"v{__version__}"


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def chunked(items: Sequence[T], n_chunks: int) -> Iterable[Sequence[T]]:
    """Split into at most n_chunks contiguous, order-preserving chunks."""
    n = len(items)
    n_chunks = max(1, min(n_chunks, n))
    size = (n + n_chunks - 1) // n_chunks
    for start in range(0, n, size):
        yield items[start : start + size]
