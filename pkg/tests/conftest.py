from __future__ import annotations

from pathlib import Path

import pytest

import triplescore as ts
from triplescore.pipeline import BuiltStores, PipelineConfig, build_stores


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return ts.fixture_dir()


def make_config(fixture_dir: Path, tmp_dir: Path, **overrides) -> PipelineConfig:
    values = dict(
        sentences=fixture_dir / "wiki-sentences",
        persons=fixture_dir / "persons",
        stopwords=fixture_dir / "stopwords.txt",
        profession_kb=fixture_dir / "profession.kb",
        profession_train=fixture_dir / "profession.train",
        nationality_kb=fixture_dir / "nationality.kb",
        nationality_train=fixture_dir / "nationality.train",
        cache_dir=tmp_dir / "cache",
        out_dir=tmp_dir / "out",
        seed=7,
    )
    values.update(overrides)
    return PipelineConfig(**values)


@pytest.fixture(scope="session")
def fixture_config(fixture_dir, tmp_path_factory) -> PipelineConfig:
    return make_config(fixture_dir, tmp_path_factory.mktemp("stores"))


@pytest.fixture(scope="session")
def fixture_stores(fixture_config) -> BuiltStores:
    stores, _ = build_stores(fixture_config)
    return stores
