"""Valuations on PLQ functions and extraction of their representing triple.

The closed-form valuation is ``c0 + c1 * V1(dom u) + integral of zeta(u'')``.
:func:`classify` goes the other way: from a black-box valuation it recovers
``c0`` (point indicators), ``c1`` (interval indicators) and samples of
``zeta`` (quadratic probes ``a * x**2 / 2`` on ``[-m, m]``).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_plq, check_zeta
from .errors import InconsistentC0, MDependent, MissingProbe, NotAdditive
from .plq import PLQFunction, indicator, plq_sum, point_indicator, quadratic
from .zeta import BUILTIN_ZETAS, ZetaSpec, conc_report_samples

__all__ = [
    "ValuationSpec",
    "BlackBoxValuation",
    "v1_of_domain",
    "zeta_integral",
    "closed_form_valuation",
    "theorem2_valuation",
    "shifted_valuation",
    "extract_c0",
    "extract_c1",
    "extract_zeta",
    "classify",
    "ClassificationReport",
    "ValuationClassifier",
    "probe_function",
    "required_probes",
    "make_probe_table",
    "ProbeTableValuation",
    "BUILTIN_SPECS",
    "DEFAULT_A_GRID",
]

C0_LOCATIONS = (0.0, -1.0, 0.5, 3.0)
C1_LENGTHS = (1.0, 2.0, 4.0)
PROBE_SCALES = (0.5, 1.0, 2.0)
C0_TOL = 1e-9
ADDITIVITY_TOL = 1e-8
M_TOL = 1e-8
DEFAULT_A_GRID = tuple([0.0] + [float(a) for a in np.geomspace(1e-3, 1e5, 19)])


def v1_of_domain(u: PLQFunction) -> float:
    """Length of ``dom u``."""
    return u.domain.length


def zeta_integral(u: PLQFunction, zeta: ZetaSpec) -> float:
    """``sum zeta(2 a_i) * length_i`` over the pieces of ``u``.

    Kinks and affine pieces contribute nothing because ``zeta(0) = 0``.
    """
    total = 0.0
    for p in u.pieces:
        if p.a > 0:
            total += zeta(2.0 * p.a) * p.length
    return total


@dataclass(frozen=True)
class ValuationSpec:
    """``Z(u) = c0 + c1 * V1(dom u) + zeta_integral(u, zeta)``."""

    c0: float
    c1: float
    zeta: ZetaSpec

    def breakdown(self, u: PLQFunction) -> tuple[float, float, float]:
        return (self.c0, self.c1 * v1_of_domain(u), zeta_integral(u, self.zeta))

    def __call__(self, u: PLQFunction) -> float:
        s0, s1, s2 = self.breakdown(u)
        return s0 + s1 + s2

    @property
    def label(self) -> str:
        return f"({self.c0:g},{self.c1:g},{self.zeta.label})"


def closed_form_valuation(u: PLQFunction, spec: ValuationSpec) -> float:
    return spec(u)


theorem2_valuation = closed_form_valuation


BUILTIN_SPECS = tuple(
    ValuationSpec(c0, c1, BUILTIN_ZETAS[name])
    for name in ("power13", "power23", "log1p", "mincap1")
    for c0, c1 in ((0.0, 0.0), (1.0, 2.0), (-3.0, 0.0))
)


@dataclass(frozen=True)
class BlackBoxValuation:
    """An opaque map from PLQ functions to reals.

    ``serial=True`` tells the harness not to call ``evaluator`` concurrently.
    """

    evaluator: Callable[[PLQFunction], float]
    name: str = "blackbox"
    serial: bool = False

    def __call__(self, u: PLQFunction) -> float:
        return float(self.evaluator(u))


def shifted_valuation(Z: Callable[[PLQFunction], float], w: PLQFunction) -> BlackBoxValuation:
    """``Z_w(u) = Z(u + w)``; the sum raises ``EmptyDomain`` if domains miss."""
    check_plq(w)
    return BlackBoxValuation(lambda u: Z(plq_sum(u, w)), name="shifted",
                             serial=getattr(Z, "serial", False))


# -- probes ---------------------------------------------------------------------

def probe_function(kind: str, **kw) -> PLQFunction:
    """The probe families used by extraction.

    ``point`` is the indicator of ``{x0}``, ``interval`` of ``[0, m]`` and
    ``quadratic`` is ``a * x**2 / 2`` restricted to ``[-m, m]``.
    """
    if kind == "point":
        return point_indicator(kw["x0"])
    if kind == "interval":
        return indicator(0.0, kw["m"])
    if kind == "quadratic":
        m = kw["m"]
        return quadratic(0.5 * kw["a"], 0.0, 0.0, -m, m)
    raise ValueError(f"unknown probe kind {kind!r}")


def probe_key(kind: str, **kw) -> str:
    if kind == "point":
        return f"point:x0={float(kw['x0'])!r}"
    if kind == "interval":
        return f"interval:m={float(kw['m'])!r}"
    return f"quadratic:a={float(kw['a'])!r},m={float(kw['m'])!r}"


def _identify_probe(u: PLQFunction) -> str | None:
    if len(u.pieces) != 1:
        return None
    p = u.pieces[0]
    if p.b != 0 or p.c != 0:
        return None
    if u.is_point:
        return probe_key("point", x0=p.left)
    if p.left == 0 and p.a == 0:
        return probe_key("interval", m=p.right)
    if p.left == -p.right:
        return probe_key("quadratic", a=2.0 * p.a, m=p.right)
    return None


def required_probes(a_grid: Sequence[float] = DEFAULT_A_GRID, m: float = 1.0) -> list[dict]:
    """Every probe :func:`classify` evaluates, as ``{"kind", ...params}`` dicts."""
    probes = [{"kind": "point", "x0": x0} for x0 in C0_LOCATIONS]
    probes += [{"kind": "interval", "m": L} for L in sorted(set(C1_LENGTHS) | {3.0})]
    scales = sorted(set(PROBE_SCALES) | {float(m)})
    probes += [{"kind": "quadratic", "a": float(a), "m": s} for a in a_grid for s in scales]
    return probes


def make_probe_table(Z: Callable[[PLQFunction], float], a_grid=DEFAULT_A_GRID,
                     m: float = 1.0) -> dict:
    """Evaluate ``Z`` on every required probe; the result is JSON-ready."""
    rows = []
    for pr in required_probes(a_grid, m):
        params = {k: v for k, v in pr.items() if k != "kind"}
        rows.append(dict(pr, value=float(Z(probe_function(pr["kind"], **params)))))
    return {"a_grid": [float(a) for a in a_grid], "m": float(m), "probes": rows}


class ProbeTableValuation:
    """A valuation known only on a finite table of probe functions."""

    serial = False

    def __init__(self, table: dict):
        self.a_grid = tuple(float(a) for a in table.get("a_grid", DEFAULT_A_GRID))
        self.m = float(table.get("m", 1.0))
        self._values = {}
        for row in table.get("probes", []):
            params = {k: v for k, v in row.items() if k not in ("kind", "value")}
            self._values[probe_key(row["kind"], **params)] = float(row["value"])

    def missing(self) -> list[str]:
        need = [probe_key(pr["kind"], **{k: v for k, v in pr.items() if k != "kind"})
                for pr in required_probes(self.a_grid, self.m)]
        return [k for k in need if k not in self._values]

    def __call__(self, u: PLQFunction) -> float:
        key = _identify_probe(u)
        if key is None:
            raise MissingProbe([repr(u)])
        if key not in self._values:
            raise MissingProbe([key])
        return self._values[key]


# -- extraction -----------------------------------------------------------------

def extract_c0(Z) -> float:
    """``Z`` on the indicator of ``{0}``, cross-checked at other locations."""
    vals = [Z(point_indicator(x0)) for x0 in C0_LOCATIONS]
    spread = max(vals) - min(vals)
    if spread > C0_TOL:
        raise InconsistentC0(f"point-indicator values {vals} spread by {spread:.3g}")
    return vals[0]


def _c1_with_residual(Z, c0: float) -> tuple[float, float]:
    g = {L: Z(indicator(0.0, L)) - c0 for L in sorted(set(C1_LENGTHS) | {3.0})}
    residual = abs(g[1.0] + g[2.0] - g[3.0])
    if residual > ADDITIVITY_TOL:
        raise NotAdditive(f"g(1) + g(2) - g(3) = {residual:.3g}")
    return float(np.mean([g[L] / L for L in C1_LENGTHS])), residual


def extract_c1(Z, c0: float) -> float:
    """Average of ``(Z(1_[0,m]) - c0) / m`` over ``m`` in ``{1, 2, 4}``."""
    return _c1_with_residual(Z, c0)[0]


def _zeta_with_spread(Z, c0, c1, a, m) -> tuple[float, float]:
    def at(s):
        return (Z(probe_function("quadratic", a=a, m=s)) - c0 - 2.0 * s * c1) / (2.0 * s)

    value = at(m)
    vals = [value] + [at(s) for s in PROBE_SCALES if s != m]
    spread = max(vals) - min(vals)
    if spread > M_TOL:
        raise MDependent(f"zeta({a}) varies by {spread:.3g} across m={PROBE_SCALES}")
    return value, spread


def extract_zeta(Z, c0: float, c1: float, a: float, m: float = 1.0) -> float:
    """``(Z(a q + 1_[-m,m]) - c0 - 2 m c1) / (2 m)`` with ``q = x**2 / 2``."""
    if a < 0 or m <= 0:
        raise ValueError("need a >= 0 and m > 0")
    return _zeta_with_spread(Z, c0, c1, a, m)[0]


@dataclass
class ClassificationReport:
    c0: float
    c1: float
    a_grid: list[float]
    zeta_values: list[float]
    conc_checks: dict
    residuals: dict = field(default_factory=dict)

    @property
    def zeta_samples(self) -> list[tuple[float, float]]:
        return list(zip(self.a_grid, self.zeta_values))

    def to_dict(self) -> dict:
        return {
            "c0": self.c0,
            "c1": self.c1,
            "zeta_samples": [[a, z] for a, z in self.zeta_samples],
            "conc_checks": self.conc_checks,
            "residuals": self.residuals,
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "zeta"])
        for a, z in self.zeta_samples:
            w.writerow([repr(a), repr(z)])
        return buf.getvalue()


def classify(Z, a_grid: Iterable[float] = DEFAULT_A_GRID, m: float = 1.0) -> ClassificationReport:
    """Recover ``(c0, c1, zeta on a_grid)`` from a valuation of the classified form.

    Raises whichever of :class:`InconsistentC0`, :class:`NotAdditive`,
    :class:`MDependent` or :class:`MissingProbe` the probes trigger.
    """
    a_grid = [float(a) for a in a_grid]
    vals = [Z(point_indicator(x0)) for x0 in C0_LOCATIONS]
    c0_spread = max(vals) - min(vals)
    c0 = extract_c0(Z)
    c1, additivity = _c1_with_residual(Z, c0)
    zetas, spreads = [], []
    for a in a_grid:
        z, s = _zeta_with_spread(Z, c0, c1, a, m)
        zetas.append(z)
        spreads.append(s)
    checks = conc_report_samples(a_grid, zetas)
    zero_at_zero = [abs(z) for a, z in zip(a_grid, zetas) if a == 0]
    checks["zero_at_origin"] = bool(not zero_at_zero or zero_at_zero[0] <= C0_TOL)
    residuals = {
        "c0_spread": c0_spread,
        "additivity": additivity,
        "max_m_spread": max(spreads) if spreads else 0.0,
    }
    return ClassificationReport(c0, c1, a_grid, zetas, checks, residuals)


class ValuationClassifier(BaseEstimator):
    """Estimator wrapper around :func:`classify`.

    ``fit`` takes a valuation (any callable on PLQ functions) in place of a
    design matrix; ``predict`` evaluates the recovered representation on a
    sequence of PLQ functions, interpolating ``zeta`` linearly between grid
    points and extending past the last point with the last secant slope.

    Parameters
    ----------
    a_grid : sequence of float, optional
        Curvatures at which ``zeta`` is sampled; defaults to ``DEFAULT_A_GRID``.
    m : float
        Probe half-width.
    """

    def __init__(self, a_grid=None, m=1.0):
        self.a_grid = a_grid
        self.m = m

    def fit(self, Z, y=None):
        grid = DEFAULT_A_GRID if self.a_grid is None else self.a_grid
        grid = sorted(set(float(a) for a in grid) | {0.0})
        report = classify(Z, grid, self.m)
        self.report_ = report
        self.c0_ = report.c0
        self.c1_ = report.c1
        self.zeta_grid_ = np.array(report.a_grid)
        self.zeta_values_ = np.array(report.zeta_values)
        return self

    def zeta(self, t: float) -> float:
        check_is_fitted(self, "zeta_values_")
        g, v = self.zeta_grid_, self.zeta_values_
        if t <= g[-1]:
            return float(np.interp(t, g, v))
        slope = (v[-1] - v[-2]) / (g[-1] - g[-2]) if len(g) > 1 else 0.0
        return float(v[-1] + slope * (t - g[-1]))

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "zeta_values_")
        out = []
        for u in X:
            check_plq(u)
            integral = sum(self.zeta(2.0 * p.a) * p.length for p in u.pieces if p.a > 0)
            out.append(self.c0_ + self.c1_ * v1_of_domain(u) + integral)
        return np.array(out)

    def to_spec(self, zeta: ZetaSpec | None = None) -> ValuationSpec:
        """A :class:`ValuationSpec` using the recovered constants."""
        check_is_fitted(self, "zeta_values_")
        zeta = check_zeta(zeta) if zeta is not None else ZetaSpec.custom(self.zeta, "sampled")
        return ValuationSpec(self.c0_, self.c1_, zeta)
