"""Input validation helpers shared by the public entry points."""

from __future__ import annotations

import math

from .plq import PLQFunction
from .zeta import ZetaSpec


def check_plq(u, *, allow_point: bool = True) -> PLQFunction:
    """Return ``u`` if it is a PLQ function, else raise ``TypeError``."""
    if not isinstance(u, PLQFunction):
        raise TypeError(f"expected PLQFunction, got {type(u).__name__}")
    if not allow_point and u.is_point:
        raise ValueError("function needs a non-degenerate domain")
    return u


def check_zeta(zeta) -> ZetaSpec:
    if not isinstance(zeta, ZetaSpec):
        raise TypeError(f"expected ZetaSpec, got {type(zeta).__name__}")
    return zeta


def check_positive(name: str, value, *, strict: bool = True) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0 or (strict and value == 0):
        bound = "> 0" if strict else ">= 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value}")
    return value


def check_positive_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return int(value)
