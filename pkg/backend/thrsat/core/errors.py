from __future__ import annotations

from typing import Any, Optional


class ThrsatError(Exception):
    """所有可預期錯誤的基底類別；code 與 exit_code 對外穩定。"""

    code = "thrsat_error"
    exit_code = 3

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


class ParseError(ThrsatError):
    """Malformed DIMACS input."""

    code = "parse_error"
    exit_code = 64

    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(message, {"line": line} if line is not None else {})
        self.line = line


class WidthViolation(ThrsatError):
    """A clause is wider than the algorithm allows."""

    code = "width_violation"


class BudgetExceeded(ThrsatError):
    """The configured enumeration cap would be crossed."""

    code = "budget_exceeded"
    exit_code = 2

    def __init__(self, stage: str, projected: int | None = None, cap: int | None = None) -> None:
        details: dict[str, Any] = {"stage": stage}
        if projected is not None:
            details["projected"] = projected
        if cap is not None:
            details["cap"] = cap
        super().__init__(f"budget exceeded at {stage}", details)
        self.stage = stage
        self.projected = projected
        self.cap = cap


class RoleMissing(ThrsatError):
    code = "role_missing"


class TooLarge(ThrsatError):
    code = "too_large"


class InvalidThreshold(ThrsatError):
    code = "invalid_threshold"


class TooManyLongClauses(ThrsatError):
    code = "too_many_long_clauses"


class InvalidConfig(ThrsatError):
    code = "invalid_config"


class CertificateMismatch(ThrsatError):
    """Two branches of a decider disagree, or a certificate fails its own check."""

    code = "certificate_mismatch"
    exit_code = 4
