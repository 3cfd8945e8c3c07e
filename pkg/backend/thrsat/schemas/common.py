from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class CliError(BaseModel):
    code: str
    message: str
    details: dict = Field(default_factory=dict)


class CliResponse(BaseModel):
    ok: bool = True
    data: Any = None
    error: Optional[CliError] = None


def ok(data: Any = None) -> dict:
    return CliResponse(ok=True, data=data).model_dump()


def err(code: str, message: str, details: Optional[dict] = None) -> dict:
    return CliResponse(ok=False, error=CliError(code=code, message=message, details=details or {})).model_dump()
