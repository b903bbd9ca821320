from __future__ import annotations

from pathlib import Path

import pytest

from leakprobe.corpus import load_manifest
from leakprobe.pronlex import load_lexicon

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def fixture_lexicon():
    return load_lexicon(DATA_DIR / "fixture.dict")


@pytest.fixture(scope="session")
def manifest12_path() -> Path:
    return DATA_DIR / "manifest12.jsonl"


@pytest.fixture(scope="session")
def manifest12(manifest12_path):
    items, report = load_manifest(manifest12_path)
    assert report.ok, report.violations
    return items
