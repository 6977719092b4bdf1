"""Curvature densities: concave ``zeta`` with ``zeta(0) = 0`` and sublinear growth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["ZetaSpec", "BUILTIN_ZETAS", "parse_zeta", "conc_report", "conc_report_samples",
           "CONC_GRID"]

# Sampling grid for Conc-consistency checks: 100 log-spaced points on [1e-4, 1e6].
CONC_GRID = np.geomspace(1e-4, 1e6, 100)
CONCAVITY_SLACK = 1e-9
SUBLINEAR_RATIO = 1e-2


@dataclass(frozen=True)
class ZetaSpec:
    """A candidate density ``zeta: [0, inf) -> [0, inf)``.

    Use the classmethod factories rather than the raw constructor.  The value
    at 0 is pinned to 0 for every kind.
    """

    kind: str
    param: float | None = None
    func: Callable[[float], float] | None = field(default=None, compare=False)
    name: str | None = None

    @classmethod
    def power(cls, p: float) -> "ZetaSpec":
        if not 0.0 < p < 1.0:
            raise ValueError(f"power exponent must lie in (0, 1), got {p}")
        return cls("power", float(p))

    @classmethod
    def log1p(cls) -> "ZetaSpec":
        return cls("log1p")

    @classmethod
    def min_cap(cls, c: float) -> "ZetaSpec":
        if not c > 0:
            raise ValueError(f"cap must be positive, got {c}")
        return cls("min_cap", float(c))

    @classmethod
    def custom(cls, func: Callable[[float], float], name: str = "custom") -> "ZetaSpec":
        return cls("custom", None, func, name)

    @property
    def label(self) -> str:
        if self.kind == "power":
            return f"power({self.param:g})"
        if self.kind == "min_cap":
            return f"min_cap({self.param:g})"
        if self.kind == "custom":
            return self.name or "custom"
        return self.kind

    def __call__(self, t: float) -> float:
        if t < 0:
            raise ValueError(f"zeta is defined on [0, inf), got {t}")
        if t == 0:
            return 0.0
        if self.kind == "power":
            return t ** self.param
        if self.kind == "log1p":
            return math.log1p(t)
        if self.kind == "min_cap":
            return min(t, self.param)
        if self.kind == "custom":
            return float(self.func(t))
        raise ValueError(f"unknown zeta kind {self.kind!r}")

    def values(self, ts) -> np.ndarray:
        return np.array([self(float(t)) for t in np.ravel(ts)])

    def conc_report(self, grid=None) -> dict:
        return conc_report(self, grid)


BUILTIN_ZETAS = {
    "power13": ZetaSpec.power(1 / 3),
    "power23": ZetaSpec.power(2 / 3),
    "power12": ZetaSpec.power(1 / 2),
    "log1p": ZetaSpec.log1p(),
    "mincap1": ZetaSpec.min_cap(1.0),
}


def parse_zeta(name: str) -> ZetaSpec:
    """Resolve ``power13``-style names, ``power:P`` and ``min_cap:C``."""
    if name in BUILTIN_ZETAS:
        return BUILTIN_ZETAS[name]
    kind, sep, arg = name.partition(":")
    if sep:
        try:
            value = float(arg)
        except ValueError:
            raise ValueError(f"bad zeta parameter in {name!r}") from None
        if kind == "power":
            return ZetaSpec.power(value)
        if kind in ("min_cap", "mincap"):
            return ZetaSpec.min_cap(value)
    raise ValueError(f"unknown zeta {name!r}; choose from {sorted(BUILTIN_ZETAS)}, "
                     "power:P or min_cap:C")


def conc_report(zeta, grid=None) -> dict:
    """Sampled Conc-consistency of a callable ``zeta``.

    Checks non-negativity, midpoint concavity over all grid pairs and the
    ratio ``zeta(t)/t`` at the top of the grid.  A pass means "consistent
    with Conc at these samples", never a proof.
    """
    grid = CONC_GRID if grid is None else np.asarray(grid, dtype=float)
    vals = np.array([zeta(float(t)) for t in grid])
    nonneg = bool(np.all(vals >= 0))
    i, j = np.triu_indices(len(grid), k=1)
    mids = np.array([zeta(float(t)) for t in 0.5 * (grid[i] + grid[j])])
    defect = 0.5 * (vals[i] + vals[j]) - mids
    concave = bool(np.all(defect <= CONCAVITY_SLACK))
    top = grid[-1]
    ratio = vals[-1] / top
    sublinear = bool(ratio <= SUBLINEAR_RATIO * (1 + CONCAVITY_SLACK))
    return {
        "nonneg": nonneg,
        "concave": concave,
        "sublinear": sublinear,
        "max_concavity_defect": float(max(defect.max(), 0.0)),
        "ratio_at_top": float(ratio),
    }


def conc_report_samples(ts, values) -> dict:
    """Conc-consistency of sampled values: non-increasing secant slopes."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(ts)
    ts, values = ts[order], values[order]
    nonneg = bool(np.all(values >= -CONCAVITY_SLACK))
    slopes = np.diff(values) / np.diff(ts)
    rise = np.diff(slopes)
    scale = np.maximum(1.0, np.abs(slopes[:-1]))
    concave = bool(np.all(rise <= CONCAVITY_SLACK * scale)) if len(rise) else True
    positive = ts > 0
    ratios = values[positive] / ts[positive]
    # Decay proxy: ratio falls along the grid and ends well below its start.
    sublinear = bool(len(ratios) < 2 or (
        np.all(np.diff(ratios) <= CONCAVITY_SLACK * np.maximum(1.0, ratios[:-1]))
        and ratios[-1] <= SUBLINEAR_RATIO * max(ratios[0], 1.0) * (1 + CONCAVITY_SLACK)
        or np.all(ratios <= CONCAVITY_SLACK)))
    return {
        "nonneg": nonneg,
        "concave": concave,
        "sublinear": sublinear,
        "max_slope_rise": float(max(rise.max(), 0.0)) if len(rise) else 0.0,
        "ratio_at_top": float(ratios[-1]) if len(ratios) else 0.0,
    }
