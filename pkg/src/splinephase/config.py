"""Library-wide numerical tolerance."""

from __future__ import annotations

import math
import os

RTOL_ENV = "SPLINEPHASE_RTOL"
DEFAULT_RTOL = 1e-10


def default_rtol() -> float:
    """Relative tolerance for rank decisions and coefficient snapping.

    Reads ``SPLINEPHASE_RTOL`` on every call so the override applies to a
    running process; falls back to ``1e-10``.
    """
    raw = os.environ.get(RTOL_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_RTOL
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{RTOL_ENV}={raw!r} is not a decimal number") from None
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{RTOL_ENV} must be a positive finite number, got {raw!r}")
    return value


def resolve_rtol(rtol: float | None) -> float:
    return default_rtol() if rtol is None else float(rtol)
