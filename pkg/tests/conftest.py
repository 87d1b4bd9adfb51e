"""Shared fixtures: the bundled 86-observation fixture sample."""

from importlib import resources

import pytest


def _fixture_path() -> str:
    return str(resources.files("capidx") / "data" / "atofina_additive.txt")


def _load_sample(path: str) -> list[float]:
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(float(line))
    return values


@pytest.fixture(scope="session")
def fixture_path() -> str:
    return _fixture_path()


@pytest.fixture(scope="session")
def fixture_sample(fixture_path) -> list[float]:
    sample = _load_sample(fixture_path)
    assert len(sample) == 86
    return sample
