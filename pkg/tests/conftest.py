import os

import pytest


@pytest.fixture(autouse=True)
def _no_seed_override(monkeypatch):
    # the env override must not leak into determinism-sensitive tests
    monkeypatch.delenv("PROXLAB_SEED", raising=False)
    yield


def pytest_configure(config):
    os.environ.pop("PROXLAB_SEED", None)
