"""Repository-root launcher.

Runs the ``thrsat`` command line without installing the package: it puts
``backend/`` on ``sys.path`` and hands the arguments to ``thrsat.__main__``.
"""

from __future__ import annotations

import sys
from pathlib import Path


def _ensure_backend_on_path() -> None:
    root = Path(__file__).resolve().parent
    backend_dir = root / "backend"
    if str(backend_dir) not in sys.path:
        sys.path.insert(0, str(backend_dir))


def main() -> int:
    _ensure_backend_on_path()

    from thrsat.__main__ import main as thrsat_main

    return thrsat_main()


if __name__ == "__main__":
    raise SystemExit(main())
