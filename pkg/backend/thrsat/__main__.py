from __future__ import annotations

import logging

from thrsat.cli import main as cli_main
from thrsat.core.logging import setup_logging


def main() -> int:
    setup_logging()
    try:
        return cli_main()
    except Exception:
        logging.exception("thrsat 執行失敗，請檢查輸入或設定後重試。")
        raise


if __name__ == "__main__":
    raise SystemExit(main())
