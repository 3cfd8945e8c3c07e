from __future__ import annotations

import logging
import sys

from . import config

LOG_FILE_NAME = "thrsat.log"


def setup_logging() -> None:
    """設定分級日誌，避免重複註冊 handler。stdout 保留給 JSON / DIMACS 輸出。"""
    if getattr(setup_logging, "_configured", False):
        return

    config.LOG_DIR.mkdir(parents=True, exist_ok=True)

    fmt = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
    level = getattr(logging, config.LOG_LEVEL, logging.INFO)

    root = logging.getLogger()
    root.setLevel(level)
    root.handlers.clear()

    # console
    ch = logging.StreamHandler(sys.stderr)
    ch.setLevel(level)
    ch.setFormatter(logging.Formatter(fmt))
    root.addHandler(ch)

    # file
    fh = logging.FileHandler(str(config.LOG_DIR / LOG_FILE_NAME), encoding="utf-8")
    fh.setLevel(level)
    fh.setFormatter(logging.Formatter(fmt))
    root.addHandler(fh)

    setup_logging._configured = True
