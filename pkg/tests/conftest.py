from __future__ import annotations

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    assert FIXTURES.is_dir(), "fixture dataset missing; run scripts/make_fixture.py"
    return FIXTURES


@pytest.fixture()
def fixture_config(fixture_dir, tmp_path):
    """Fixture pipeline config writing into a per-test tmp dir."""
    from fedcast.config import PipelineConfig

    def make(**overrides):
        merged = {"output_dir": str(tmp_path / "out"), "figures": False}
        merged.update(overrides)
        return PipelineConfig.from_file(fixture_dir / "config.json", merged)

    return make
