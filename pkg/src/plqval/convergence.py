"""Finite-sample checks for tau-convergence and semicontinuity along sequences.

All verdicts are statements at the truncation scale ``k_max``.  Epi-convergence
to a limit with non-degenerate domain is checked through uniform convergence
on a grid that stays a margin away from the domain boundary; for point-domain
limits a value/lower-bound surrogate is used instead.  Thresholds (``GAP_TOL``,
the 20% tail window) are artifact choices and are echoed in every report.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._validation import check_plq, check_positive_int
from .errors import NotSettled
from .plq import Interval, PLQFunction

__all__ = [
    "FunctionSequence",
    "SequenceRecord",
    "SequenceReport",
    "TauReport",
    "UscVerdict",
    "hausdorff_distance",
    "interval_kuratowski_limits",
    "tail_limit",
    "sup_gap",
    "sequence_report",
    "tau_convergence_check",
    "semicontinuity_probe",
]

GAP_TOL = 1e-3
CAUCHY_TOL = 1e-6
TAIL_FRACTION = 0.2
MARGIN_FRACTION = 1e-3
USC_TOL = 1e-6


@dataclass(frozen=True)
class FunctionSequence:
    """``k -> u_k`` for ``k = 1..k_max``."""

    generator: Callable[[int], PLQFunction]
    k_max: int
    name: str = "sequence"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        check_positive_int("k_max", self.k_max)

    def __getitem__(self, k: int) -> PLQFunction:
        if k not in self._cache:
            self._cache[k] = self.generator(k)
        return self._cache[k]

    def elements(self) -> list[PLQFunction]:
        return [check_plq(self[k]) for k in range(1, self.k_max + 1)]


def hausdorff_distance(A: Interval, B: Interval) -> float:
    """Exact Hausdorff distance between two closed intervals."""
    return max(abs(A.lo - B.lo), abs(A.hi - B.hi))


def _tail(n: int) -> slice:
    size = max(3, math.ceil(TAIL_FRACTION * n))
    return slice(max(0, n - size), n)


def tail_limit(values: Sequence[float], tol: float = CAUCHY_TOL) -> float | None:
    """Estimate ``lim_k values[k-1]`` from the tail window, or ``None``.

    A tail whose oscillation is within ``tol`` settles at its last value.  A
    monotone tail is otherwise fitted by a cubic polynomial in ``1/k``; the fit is
    accepted when its worst residual is within ``tol`` and ``L`` is returned.
    """
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n == 0:
        raise ValueError("empty sequence")
    sl = _tail(n)
    tail = v[sl]
    if not np.all(np.isfinite(tail)):
        return None
    scale = max(1.0, float(np.max(np.abs(tail))))
    if np.ptp(tail) <= tol * scale:
        return float(tail[-1])
    if len(tail) < 5:
        return None
    steps = np.diff(tail)
    if not (np.all(steps >= 0) or np.all(steps <= 0)):
        return None
    k = np.arange(1, n + 1, dtype=float)[sl]
    design = np.column_stack([k ** -j for j in range(4)])
    coef, *_ = np.linalg.lstsq(design, tail, rcond=None)
    resid = np.max(np.abs(design @ coef - tail))
    if resid > tol * scale:
        return None
    return float(coef[0])


def interval_kuratowski_limits(seq: Sequence[Interval], tol: float = CAUCHY_TOL):
    """Painleve-Kuratowski inner and outer limits of a sequence of intervals.

    Returns ``(liminf, limsup)``, each an :class:`Interval` or ``None`` when
    empty.  Raises :class:`NotSettled` when an endpoint sequence does not
    settle on the tail window.
    """
    if len(seq) == 0:
        raise ValueError("empty sequence")
    lo = tail_limit([I.lo for I in seq], tol)
    hi = tail_limit([I.hi for I in seq], tol)
    bad = [name for name, val in (("lower", lo), ("upper", hi)) if val is None]
    if bad:
        raise NotSettled(f"{' and '.join(bad)} endpoint(s) do not settle within {tol:g}")
    limit = Interval(lo, hi) if lo <= hi else None
    # With both endpoints convergent the inner and outer limits coincide.
    return limit, limit


def _interior_grid(u: PLQFunction, grid_size: int) -> np.ndarray:
    lo, hi = u.domain
    margin = MARGIN_FRACTION * (hi - lo)
    return np.linspace(lo + margin, hi - margin, grid_size)


def sup_gap(uk: PLQFunction, u: PLQFunction, grid_size: int = 401) -> float:
    """Sup of ``|u_k - u|`` on the interior probe grid of ``dom u``.

    For a point-domain ``u`` this is the gap at the point nearest to it in
    ``dom u_k``.
    """
    if u.is_point:
        x0 = u.domain.lo
        lo, hi = uk.domain
        return abs(uk.eval(min(max(x0, lo), hi)) - u.eval(x0))
    x = _interior_grid(u, grid_size)
    a, b = uk(x), u(x)
    if not np.all(np.isfinite(a)):
        return math.inf
    return float(np.max(np.abs(a - b)))


@dataclass(frozen=True)
class SequenceRecord:
    k: int
    lipschitz: float
    sup_gap: float
    hausdorff: float
    v1: float
    value: float | None = None


@dataclass
class SequenceReport:
    name: str
    records: list[SequenceRecord]

    def column(self, attr: str) -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.records], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "L_k", "sup_gap", "d_H", "V1", "Z"])
        for r in self.records:
            w.writerow([r.k, repr(r.lipschitz), repr(r.sup_gap), repr(r.hausdorff),
                        repr(r.v1), "" if r.value is None else repr(r.value)])
        return buf.getvalue()


def sequence_report(seq: FunctionSequence, u: PLQFunction, Z=None,
                    grid_size: int = 401) -> SequenceReport:
    recs = []
    du = u.domain
    for k, uk in enumerate(seq.elements(), start=1):
        recs.append(SequenceRecord(
            k=k,
            lipschitz=uk.lipschitz_constant(),
            sup_gap=sup_gap(uk, u, grid_size),
            hausdorff=hausdorff_distance(uk.domain, du),
            v1=uk.domain.length,
            value=None if Z is None else float(Z(uk)),
        ))
    return SequenceReport(seq.name, recs)


@dataclass
class TauReport:
    """Per-condition verdicts of :func:`tau_convergence_check`.

    ``epi`` covers conditions (i)+(ii) through the uniform-convergence
    surrogate, ``domain`` the Hausdorff convergence of domains and
    ``lipschitz`` condition (iii).
    """

    epi: bool
    domain: bool
    lipschitz: bool
    first_lipschitz_violation: int | None
    report: SequenceReport
    thresholds: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.epi and self.domain and self.lipschitz

    def to_dict(self) -> dict:
        return {
            "epi": self.epi,
            "domain": self.domain,
            "lipschitz": self.lipschitz,
            "tau": self.passed,
            "first_lipschitz_violation": self.first_lipschitz_violation,
            "thresholds": self.thresholds,
        }


def tau_convergence_check(seq: FunctionSequence, u: PLQFunction, grid_size: int = 401,
                          L_bound: float | None = None) -> TauReport:
    """Check tau-convergence of ``seq`` to ``u`` at scale ``k_max``.

    ``L_bound`` defaults to ``lipschitz_constant(u) + 1``.
    """
    check_plq(u)
    if L_bound is None:
        L_bound = u.lipschitz_constant() + 1.0
    rep = sequence_report(seq, u, grid_size=grid_size)
    L = rep.column("lipschitz")
    over = np.nonzero(L > L_bound + 1e-12)[0]
    first = int(over[0]) + 1 if len(over) else None
    sl = _tail(len(rep.records))
    gaps = rep.column("sup_gap")[sl]
    epi = bool(np.all(gaps < GAP_TOL))
    if u.is_point:
        # Lower bound surrogate for condition (i): no u_k dips below u(x0).
        c = u.eval(u.domain.lo)
        dips = [c - min(p.value(x) for p in uk.pieces for x in _piece_extrema(p))
                for uk in (seq[k] for k in range(sl.start + 1, sl.stop + 1))]
        epi = epi and max(dips) < GAP_TOL
    dh = rep.column("hausdorff")[sl]
    domain_ok = bool(np.all(dh <= GAP_TOL))
    return TauReport(
        epi=epi,
        domain=domain_ok,
        lipschitz=first is None,
        first_lipschitz_violation=first,
        report=rep,
        thresholds={"gap_tol": GAP_TOL, "tail_fraction": TAIL_FRACTION,
                    "margin_fraction": MARGIN_FRACTION, "L_bound": L_bound},
    )


def _piece_extrema(p):
    pts = [p.left, p.right]
    if p.a > 0:
        v = -p.b / (2 * p.a)
        if p.left < v < p.right:
            pts.append(v)
    return pts


@dataclass(frozen=True)
class UscVerdict:
    limsup: float
    z_limit: float
    verdict: str  # "usc-consistent", "violated" or "diverges"
    convergent: bool

    def to_dict(self) -> dict:
        return {"limsup": self.limsup, "z_limit": self.z_limit,
                "verdict": self.verdict, "convergent": self.convergent}


def semicontinuity_probe(seq: FunctionSequence, u: PLQFunction, Z,
                         tol: float = USC_TOL) -> UscVerdict:
    """Compare the tail-estimated ``limsup Z(u_k)`` with ``Z(u)``."""
    values = [float(Z(uk)) for uk in seq.elements()]
    z_u = float(Z(u))
    est = tail_limit(values, tol=1e-7)
    tail = np.array(values)[_tail(len(values))]
    if est is None:
        if np.all(np.diff(tail) > 0) and tail[-1] > z_u + tol:
            return UscVerdict(math.inf, z_u, "diverges", False)
        est = float(np.max(tail))
        convergent = False
    else:
        convergent = abs(est - z_u) <= tol
    verdict = "usc-consistent" if est <= z_u + tol else "violated"
    return UscVerdict(est, z_u, verdict, convergent)
