"""Configure pytest for the project."""

import pytest


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep NHDP_* variables of the calling shell out of the tests."""
    for name in ("NHDP_OUTPUT_DIR", "NHDP_LOG_LEVEL", "NHDP_N_WORKERS", "NHDP_MOVES"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
