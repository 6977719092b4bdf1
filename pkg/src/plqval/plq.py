"""Piecewise linear-quadratic convex functions with compact domain.

A :class:`PLQFunction` is an ordered tuple of :class:`QuadraticPiece` objects
tiling one compact interval.  Each piece stores ``a x**2 + b x + c`` in global
coordinates.  Outside the domain the function is ``+inf`` (``math.inf``), so
indicator functions, restrictions and lattice operations behave as they do
for extended-real convex functions.

Values are immutable; every operation returns a new, validated function.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DisconnectedDomain,
    EmptyDomain,
    InvalidPLQ,
    NotConvex,
)

__all__ = [
    "Interval",
    "QuadraticPiece",
    "PLQFunction",
    "indicator",
    "point_indicator",
    "quadratic",
    "affine",
    "from_pieces",
    "evaluate",
    "domain",
    "lipschitz_constant",
    "second_derivative_profile",
    "add_affine",
    "translate",
    "pointwise_max",
    "pointwise_min",
    "plq_sum",
    "valuation_quadruple",
    "from_json",
    "to_json",
    "load",
    "dump",
]

JOIN_TOL = 1e-9
SLOPE_TOL = 1e-9
COEF_TOL = 1e-12
DISC_TOL = 1e-12
LENGTH_TOL = 1e-12


def _scaled(tol, *values):
    return tol * max(1.0, *(abs(v) for v in values))


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``; ``lo == hi`` is a point."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __iter__(self):
        yield self.lo
        yield self.hi


@dataclass(frozen=True)
class QuadraticPiece:
    """``a x**2 + b x + c`` on ``[left, right]``; ``u'' = 2a`` there."""

    left: float
    right: float
    a: float
    b: float
    c: float

    @property
    def length(self) -> float:
        return self.right - self.left

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    def value(self, x):
        return (self.a * x + self.b) * x + self.c

    def slope(self, x):
        return 2.0 * self.a * x + self.b

    def restrict(self, left: float, right: float) -> "QuadraticPiece":
        return QuadraticPiece(left, right, self.a, self.b, self.c)

    def to_dict(self) -> dict:
        return {"left": self.left, "right": self.right,
                "a": self.a, "b": self.b, "c": self.c}


def _validate(pieces: Sequence[QuadraticPiece]) -> None:
    if len(pieces) == 0:
        raise InvalidPLQ("function has no pieces")
    for i, p in enumerate(pieces):
        if not all(math.isfinite(v) for v in (p.left, p.right, p.a, p.b, p.c)):
            raise InvalidPLQ("non-finite field", i)
        if p.left > p.right:
            raise InvalidPLQ(f"left {p.left} > right {p.right}", i)
        if p.a < 0:
            raise InvalidPLQ(f"negative quadratic coefficient a={p.a}", i)
        if p.left == p.right:
            if len(pieces) != 1:
                raise InvalidPLQ("zero-length piece in a multi-piece function", i)
            if p.a != 0 or p.b != 0:
                raise InvalidPLQ("point-domain piece must have a = b = 0", i)
    for i in range(len(pieces) - 1):
        p, q = pieces[i], pieces[i + 1]
        x = p.right
        if q.left != x:
            raise InvalidPLQ(f"gap or overlap: right {x} != next left {q.left}", i)
        vp, vq = p.value(x), q.value(x)
        if abs(vp - vq) > _scaled(JOIN_TOL, vp, vq):
            raise InvalidPLQ(f"discontinuous at x={x}: {vp} vs {vq}", i)
        sp, sq = p.slope(x), q.slope(x)
        if sp > sq + _scaled(SLOPE_TOL, sp, sq):
            raise InvalidPLQ(f"slope decreases at x={x}: {sp} > {sq}", i)
        if all(abs(u - v) <= COEF_TOL for u, v in zip(p.coefficients, q.coefficients)):
            raise InvalidPLQ(f"not canonical: identical coefficients across x={x}", i)


def _canonical(pieces: Sequence[QuadraticPiece]) -> list[QuadraticPiece]:
    """Drop negligible pieces, re-tile, and merge equal neighbours."""
    pieces = list(pieces)
    lo, hi = pieces[0].left, pieces[-1].right
    if hi == lo:
        return [QuadraticPiece(lo, lo, 0.0, 0.0, pieces[0].value(lo))]
    kept = [p for p in pieces if p.length > LENGTH_TOL]
    if not kept:
        kept = [max(pieces, key=lambda p: p.length)]
    tiled = []
    for j, p in enumerate(kept):
        left = lo if j == 0 else tiled[-1].right
        right = hi if j == len(kept) - 1 else p.right
        tiled.append(p.restrict(left, right))
    merged = [tiled[0]]
    for p in tiled[1:]:
        last = merged[-1]
        if all(abs(u - v) <= COEF_TOL for u, v in zip(last.coefficients, p.coefficients)):
            merged[-1] = last.restrict(last.left, p.right)
        else:
            merged.append(p)
    return merged


class PLQFunction:
    """Convex piecewise linear-quadratic function with compact domain.

    Parameters
    ----------
    pieces : sequence of QuadraticPiece
        Must already satisfy every invariant; use :func:`from_pieces` to
        canonicalize a raw piece list first.

    Raises
    ------
    InvalidPLQ
        Naming the first violated invariant and its piece index.
    """

    __slots__ = ("_pieces", "_rights")

    def __init__(self, pieces: Iterable[QuadraticPiece]):
        pieces = tuple(pieces)
        _validate(pieces)
        self._pieces = pieces
        self._rights = [p.right for p in pieces]

    @property
    def pieces(self) -> tuple[QuadraticPiece, ...]:
        return self._pieces

    def __repr__(self):
        body = ", ".join(
            f"[{p.left:g},{p.right:g}]:({p.a:g},{p.b:g},{p.c:g})" for p in self._pieces)
        return f"PLQFunction({body})"

    def __eq__(self, other):
        return isinstance(other, PLQFunction) and self._pieces == other._pieces

    def __hash__(self):
        return hash(self._pieces)

    def __setattr__(self, name, value):
        if hasattr(self, "_rights"):
            raise AttributeError("PLQFunction is immutable")
        object.__setattr__(self, name, value)

    # -- queries ---------------------------------------------------------

    @property
    def domain(self) -> Interval:
        return Interval(self._pieces[0].left, self._pieces[-1].right)

    @property
    def is_point(self) -> bool:
        return self._pieces[0].left == self._pieces[-1].right

    @property
    def breakpoints(self) -> list[float]:
        return [self._pieces[0].left] + self._rights

    def piece_index(self, x: float) -> int:
        """Index of the piece containing ``x``; junctions go to the left piece."""
        i = bisect.bisect_left(self._rights, x)
        return min(i, len(self._pieces) - 1)

    def piece_at(self, x: float) -> QuadraticPiece:
        return self._pieces[self.piece_index(x)]

    def eval(self, x: float) -> float:
        lo, hi = self.domain
        if x < lo or x > hi or math.isnan(x):
            return math.inf
        return float(self.piece_at(x).value(x))

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self.eval(float(x))
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, math.inf)
        lo, hi = self.domain
        inside = (x >= lo) & (x <= hi)
        idx = np.minimum(np.searchsorted(self._rights, x[inside], side="left"),
                         len(self._pieces) - 1)
        coef = np.array([p.coefficients for p in self._pieces])
        xi = x[inside]
        out[inside] = (coef[idx, 0] * xi + coef[idx, 1]) * xi + coef[idx, 2]
        return out

    def right_slope(self, x: float) -> float:
        """One-sided derivative from the right (left slope at the right end)."""
        if self.is_point:
            return 0.0
        i = bisect.bisect_right(self._rights, x)
        i = min(i, len(self._pieces) - 1)
        return float(self._pieces[i].slope(x))

    def left_slope(self, x: float) -> float:
        if self.is_point:
            return 0.0
        i = bisect.bisect_left(self._rights, x)
        if x == self._pieces[0].left:
            i = 0
        return float(self._pieces[min(i, len(self._pieces) - 1)].slope(x))

    def lipschitz_constant(self) -> float:
        if self.is_point:
            return 0.0
        lo, hi = self.domain
        return max(abs(self._pieces[0].slope(lo)), abs(self._pieces[-1].slope(hi)))

    def second_derivative_profile(self) -> list[tuple[Interval, float]]:
        return [(Interval(p.left, p.right), 2.0 * p.a) for p in self._pieces]

    # -- affine maps -------------------------------------------------------

    def add_affine(self, p: float, q0: float = 0.0) -> "PLQFunction":
        if self.is_point:
            x0 = self._pieces[0].left
            return point_indicator(x0, self._pieces[0].c + p * x0 + q0)
        return PLQFunction(QuadraticPiece(s.left, s.right, s.a, s.b + p, s.c + q0)
                           for s in self._pieces)

    def translate(self, y: float) -> "PLQFunction":
        """``x -> u(x - y)``."""
        if self.is_point:
            return point_indicator(self._pieces[0].left + y, self._pieces[0].c)
        return PLQFunction(
            QuadraticPiece(s.left + y, s.right + y, s.a, s.b - 2.0 * s.a * y,
                           (s.a * y - s.b) * y + s.c)
            for s in self._pieces)

    def scale(self, k: float) -> "PLQFunction":
        """``k * u`` for ``k >= 0`` (``k = 0`` gives the domain indicator)."""
        if k < 0:
            raise ValueError("scale factor must be non-negative")
        return from_pieces(QuadraticPiece(s.left, s.right, k * s.a, k * s.b, k * s.c)
                           for s in self._pieces)

    def reflect(self) -> "PLQFunction":
        """``x -> u(-x)``."""
        return PLQFunction(QuadraticPiece(-s.right, -s.left, s.a, -s.b, s.c)
                           for s in reversed(self._pieces))

    def restrict(self, lo: float, hi: float) -> "PLQFunction":
        """``u + indicator([lo, hi])``."""
        return plq_sum(self, indicator(lo, hi))

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"pieces": [p.to_dict() for p in self._pieces]}

    @classmethod
    def from_dict(cls, data) -> "PLQFunction":
        if not isinstance(data, dict) or not isinstance(data.get("pieces"), list):
            raise InvalidPLQ("expected an object with a 'pieces' list")
        pieces = []
        for i, raw in enumerate(data["pieces"]):
            if not isinstance(raw, dict):
                raise InvalidPLQ("piece is not an object", i)
            try:
                fields = {k: raw[k] for k in ("left", "right", "a", "b", "c")}
            except KeyError as exc:
                raise InvalidPLQ(f"missing field {exc.args[0]!r}", i) from None
            for k, v in fields.items():
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise InvalidPLQ(f"field {k!r} is not a number", i)
            pieces.append(QuadraticPiece(**{k: float(v) for k, v in fields.items()}))
        return cls(pieces)


# -- constructors -------------------------------------------------------------

def from_pieces(pieces: Iterable[QuadraticPiece]) -> PLQFunction:
    """Canonicalize a raw tiling of pieces and validate it."""
    pieces = list(pieces)
    if not pieces:
        raise EmptyDomain("no pieces")
    return PLQFunction(_canonical(pieces))


def indicator(lo: float, hi: float) -> PLQFunction:
    if lo == hi:
        return point_indicator(lo)
    return PLQFunction([QuadraticPiece(float(lo), float(hi), 0.0, 0.0, 0.0)])


def point_indicator(x0: float, value: float = 0.0) -> PLQFunction:
    return PLQFunction([QuadraticPiece(float(x0), float(x0), 0.0, 0.0, float(value))])


def quadratic(a: float, b: float, c: float, lo: float, hi: float) -> PLQFunction:
    """``a x**2 + b x + c`` restricted to ``[lo, hi]``."""
    if lo == hi:
        return point_indicator(lo, (a * lo + b) * lo + c)
    return PLQFunction([QuadraticPiece(float(lo), float(hi), float(a), float(b), float(c))])


def affine(b: float, c: float, lo: float, hi: float) -> PLQFunction:
    return quadratic(0.0, b, c, lo, hi)


# -- functional aliases -------------------------------------------------------

def evaluate(u: PLQFunction, x: float) -> float:
    return u.eval(x)


def domain(u: PLQFunction) -> Interval:
    return u.domain


def lipschitz_constant(u: PLQFunction) -> float:
    return u.lipschitz_constant()


def second_derivative_profile(u: PLQFunction) -> list[tuple[Interval, float]]:
    return u.second_derivative_profile()


def add_affine(u: PLQFunction, p: float, q0: float = 0.0) -> PLQFunction:
    return u.add_affine(p, q0)


def translate(u: PLQFunction, y: float) -> PLQFunction:
    return u.translate(y)


# -- lattice operations -------------------------------------------------------

def _crossings(p: QuadraticPiece, q: QuadraticPiece, lo: float, hi: float) -> list[float]:
    """Sign changes of ``p - q`` strictly inside ``(lo, hi)``."""
    A, B, C = p.a - q.a, p.b - q.b, p.c - q.c
    if A == 0.0:
        roots = [] if B == 0.0 else [-C / B]
    else:
        disc = B * B - 4.0 * A * C
        if disc < 0 or abs(disc) < DISC_TOL:
            roots = []
        else:
            sq = math.sqrt(disc)
            t = -0.5 * (B + math.copysign(sq, B))
            roots = [t / A] + ([C / t] if t != 0.0 else [])
    return sorted(r for r in roots if lo + LENGTH_TOL < r < hi - LENGTH_TOL)


def _cuts(lo: float, hi: float, *funcs: PLQFunction) -> list[float]:
    pts = {lo, hi}
    for f in funcs:
        pts.update(x for x in f.breakpoints if lo < x < hi)
    return sorted(pts)


def _choose(pu: QuadraticPiece, pv: QuadraticPiece, l: float, r: float, pick_max: bool):
    out = []
    edges = [l] + _crossings(pu, pv, l, r) + [r]
    for a, b in zip(edges[:-1], edges[1:]):
        m = 0.5 * (a + b)
        du, dv = pu.value(m), pv.value(m)
        take_u = du >= dv if pick_max else du <= dv
        out.append((pu if take_u else pv).restrict(a, b))
    return out


def pointwise_max(u: PLQFunction, v: PLQFunction) -> PLQFunction:
    """``u v v``; its domain is ``dom u & dom v``.

    Raises
    ------
    EmptyDomain
        If the domains do not meet.
    """
    inter = u.domain.intersect(v.domain)
    if inter is None:
        raise EmptyDomain(f"domains {tuple(u.domain)} and {tuple(v.domain)} are disjoint")
    if inter.lo == inter.hi:
        x0 = inter.lo
        return point_indicator(x0, max(u.eval(x0), v.eval(x0)))
    pieces = []
    cuts = _cuts(inter.lo, inter.hi, u, v)
    for l, r in zip(cuts[:-1], cuts[1:]):
        m = 0.5 * (l + r)
        pieces.extend(_choose(u.piece_at(m), v.piece_at(m), l, r, pick_max=True))
    return from_pieces(pieces)


def _check_junctions(pieces: Sequence[QuadraticPiece]) -> None:
    for p, q in zip(pieces[:-1], pieces[1:]):
        x = p.right
        vp, vq = p.value(x), q.value(x)
        if abs(vp - vq) > _scaled(JOIN_TOL, vp, vq):
            raise NotConvex(f"minimum jumps at x={x}: {vp} -> {vq}")
        sp, sq = p.slope(x), q.slope(x)
        if sp > sq + _scaled(SLOPE_TOL, sp, sq):
            raise NotConvex(f"minimum has a concave kink at x={x}: slope {sp} -> {sq}")


def pointwise_min(u: PLQFunction, v: PLQFunction) -> PLQFunction:
    """``u ^ v`` when it is convex; its domain is ``dom u | dom v``.

    Raises
    ------
    DisconnectedDomain
        If the union of the domains is not an interval.
    NotConvex
        If the pointwise minimum fails continuity or slope monotonicity.
    """
    du, dv = u.domain, v.domain
    if du.intersect(dv) is None:
        raise DisconnectedDomain(f"domains {tuple(du)} and {tuple(dv)} do not meet")
    if u.is_point or v.is_point:
        pt, other = (u, v) if u.is_point else (v, u)
        x0, val = pt.domain.lo, pt.pieces[0].c
        if other.is_point:
            return point_indicator(x0, min(val, other.pieces[0].c))
        ref = other.eval(x0)
        if val < ref - _scaled(JOIN_TOL, val, ref):
            raise NotConvex(f"point value {val} below {ref} at x={x0}")
        return other
    hull = du.hull(dv)
    cuts = _cuts(hull.lo, hull.hi, u, v)
    pieces = []
    for l, r in zip(cuts[:-1], cuts[1:]):
        m = 0.5 * (l + r)
        in_u, in_v = du.contains(m), dv.contains(m)
        if in_u and in_v:
            pieces.extend(_choose(u.piece_at(m), v.piece_at(m), l, r, pick_max=False))
        else:
            pieces.append((u if in_u else v).piece_at(m).restrict(l, r))
    _check_junctions(pieces)
    return from_pieces(pieces)


def plq_sum(u: PLQFunction, w: PLQFunction) -> PLQFunction:
    """``u + w`` on ``dom u & dom w``."""
    inter = u.domain.intersect(w.domain)
    if inter is None:
        raise EmptyDomain(f"domains {tuple(u.domain)} and {tuple(w.domain)} are disjoint")
    if inter.lo == inter.hi:
        x0 = inter.lo
        return point_indicator(x0, u.eval(x0) + w.eval(x0))
    cuts = _cuts(inter.lo, inter.hi, u, w)
    pieces = []
    for l, r in zip(cuts[:-1], cuts[1:]):
        m = 0.5 * (l + r)
        p, q = u.piece_at(m), w.piece_at(m)
        pieces.append(QuadraticPiece(l, r, p.a + q.a, p.b + q.b, p.c + q.c))
    return from_pieces(pieces)


def valuation_quadruple(u: PLQFunction, v: PLQFunction) -> tuple[PLQFunction, PLQFunction]:
    """``(u ^ v, u v v)``, raising the first lattice error encountered."""
    return pointwise_min(u, v), pointwise_max(u, v)


# -- JSON ---------------------------------------------------------------------

def from_json(text: str) -> PLQFunction:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidPLQ(f"malformed JSON: {exc}") from None
    return PLQFunction.from_dict(data)


def to_json(u: PLQFunction, indent=None) -> str:
    return json.dumps(u.to_dict(), indent=indent)


def load(path) -> PLQFunction:
    with open(path, encoding="utf-8") as fh:
        return from_json(fh.read())


def dump(u: PLQFunction, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(u, indent=2) + "\n")
