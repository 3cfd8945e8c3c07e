from __future__ import annotations

import os
from pathlib import Path

# 專案根目錄（run_thrsat.py 同層）
PROJECT_ROOT = Path(__file__).resolve().parents[3]


def _load_env_file(env_path: Path) -> None:
    if not env_path.exists():
        return

    for line in env_path.read_text(encoding="utf-8", errors="ignore").splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or "=" not in stripped:
            continue
        key, value = stripped.split("=", 1)
        os.environ.setdefault(key.strip(), value.strip())


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    try:
        return int(raw) if raw else default
    except ValueError:
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    try:
        return float(raw) if raw else default
    except ValueError:
        return default


_load_env_file(PROJECT_ROOT / ".env")

DEFAULT_LOG_DIR = PROJECT_ROOT / "logs"
LOG_DIR = Path(os.getenv("LOG_DIR", DEFAULT_LOG_DIR))
LOG_LEVEL = (os.getenv("THRSAT_LOG_LEVEL") or "INFO").upper()

DEFAULT_BUDGET_LEAVES = 10_000_000
ORACLE_MAX_VARS = _env_int("THRSAT_ORACLE_MAX_VARS", 26)
TWO_LEVEL_MAX_VARS = _env_int("THRSAT_TWO_LEVEL_MAX_VARS", 22)
SUNFLOWER_MAX_CLAUSES = _env_int("THRSAT_SUNFLOWER_MAX_CLAUSES", 24)
LONG_CLAUSE_FACTOR = _env_int("THRSAT_LONG_CLAUSE_FACTOR", 1)
WITNESS_TIME_LIMIT = _env_float("THRSAT_WITNESS_TIME_LIMIT", 10.0)


def budget_leaves() -> int:
    """列舉上限；每次呼叫重新讀取環境變數，方便測試以 monkeypatch 調整。"""
    value = _env_int("THRSAT_BUDGET_LEAVES", DEFAULT_BUDGET_LEAVES)
    return value if value > 0 else DEFAULT_BUDGET_LEAVES
