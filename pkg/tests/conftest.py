from __future__ import annotations

import importlib
import sys
from pathlib import Path
from typing import Iterator

import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
BACKEND_DIR = PROJECT_ROOT / "backend"
if str(BACKEND_DIR) not in sys.path:
    sys.path.insert(0, str(BACKEND_DIR))


@pytest.fixture(autouse=True)
def test_context(tmp_path, monkeypatch) -> Iterator[dict]:
    """每個測試使用獨立的日誌目錄，並清掉會影響列舉上限的環境變數。"""
    log_dir = tmp_path / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)
    monkeypatch.setenv("LOG_DIR", str(log_dir))
    for name in ("THRSAT_BUDGET_LEAVES", "THRSAT_ORACLE_MAX_VARS", "THRSAT_LONG_CLAUSE_FACTOR"):
        monkeypatch.delenv(name, raising=False)

    config = importlib.import_module("thrsat.core.config")
    importlib.reload(config)

    yield {"log_dir": log_dir, "tmp_path": tmp_path}
