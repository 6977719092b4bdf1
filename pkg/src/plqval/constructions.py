"""Executable versions of the approximation constructions.

* :func:`chord_approximation` - piecewise-affine interpolation on uniform nodes.
* :func:`stitch` - the tangent chain ``v_n`` of ``r``- and ``s``-curvature
  quadratics below ``a x**2`` on ``[-m, m]``.
* :func:`support_triangle`, :func:`positive_case_approximant`,
  :func:`zero_case_approximant` - local approximants around a point.
* :func:`lipschitz_bound_constant` and :func:`vitali_decompose` - the global
  covering argument turned into a certificate.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_plq, check_positive, check_positive_int, check_zeta
from .errors import (
    BudgetExceeded,
    EpsilonTooLarge,
    InvalidParams,
    ParallelSupportLines,
)
from .functionals import zeta_integral
from .plq import (
    LENGTH_TOL,
    Interval,
    PLQFunction,
    QuadraticPiece,
    from_pieces,
    pointwise_min,
    quadratic,
)
from .zeta import ZetaSpec

__all__ = [
    "chord_approximation",
    "exact_sup_gap",
    "StitchParams",
    "StitchResult",
    "stitch",
    "stitch_value_identity",
    "SupportTriangle",
    "support_triangle",
    "PositiveCase",
    "positive_case_approximant",
    "ZeroCase",
    "zero_case_approximant",
    "lipschitz_bound_constant",
    "check_lipschitz_bound",
    "shift_map",
    "shifted_copy",
    "VitaliResult",
    "vitali_decompose",
]

DELTA_MIN = 1e-6
# Relative width below which the apex counts as centred (left branch taken).
TIE_TOL = 1e-12


# -- chords -------------------------------------------------------------------

def chord_approximation(u: PLQFunction, n: int) -> PLQFunction:
    """Piecewise-affine interpolant of ``u`` at ``n + 1`` uniform nodes."""
    check_plq(u, allow_point=False)
    n = check_positive_int("n", n)
    lo, hi = u.domain
    nodes = [lo + (hi - lo) * i / n for i in range(n)] + [hi]
    vals = [u.eval(x) for x in nodes]
    pieces = []
    for x0, x1, v0, v1 in zip(nodes[:-1], nodes[1:], vals[:-1], vals[1:]):
        slope = (v1 - v0) / (x1 - x0)
        pieces.append(QuadraticPiece(x0, x1, 0.0, slope, v0 - slope * x0))
    return from_pieces(pieces)


def exact_sup_gap(v: PLQFunction, u: PLQFunction) -> float:
    """``max |v - u|`` over ``dom v & dom u``, exact up to rounding.

    The difference is quadratic between consecutive breakpoints, so its
    extremes sit at breakpoints or at the vertex of a piece.
    """
    inter = v.domain.intersect(u.domain)
    if inter is None:
        return math.inf
    pts = sorted({inter.lo, inter.hi} | {x for x in v.breakpoints + u.breakpoints
                                          if inter.lo < x < inter.hi})
    best = 0.0
    for l, r in zip(pts[:-1], pts[1:]) if len(pts) > 1 else [(pts[0], pts[0])]:
        m = 0.5 * (l + r)
        p, q = v.piece_at(m), u.piece_at(m)
        A, B, C = p.a - q.a, p.b - q.b, p.c - q.c
        cands = [l, r]
        if A != 0:
            t = -B / (2 * A)
            if l < t < r:
                cands.append(t)
        best = max(best, max(abs((A * t + B) * t + C) for t in cands))
    return best


# -- stitching ----------------------------------------------------------------

@dataclass(frozen=True)
class StitchParams:
    r: float
    a: float
    s: float
    m: float
    n: int

    def __post_init__(self):
        if not (0 <= self.r < self.a < self.s):
            raise InvalidParams(f"need 0 <= r < a < s, got r={self.r}, a={self.a}, s={self.s}")
        if not self.m > 0:
            raise InvalidParams(f"need m > 0, got {self.m}")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidParams(f"need a positive integer n, got {self.n}")

    @property
    def lam(self) -> float:
        return (self.a - self.r) / (self.s - self.r)

    def nodes(self) -> list[float]:
        m, n = self.m, self.n
        return [-m + (2 * m / n) * i for i in range(n)] + [m]


@dataclass(frozen=True)
class StitchResult:
    params: StitchParams
    v: PLQFunction
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    betas: tuple[float, ...]
    gammas: tuple[float, ...]

    def r_coefficients(self, i: int) -> tuple[float, float, float]:
        """``q_i^r(x) = r x**2 + (2a - 2r) p_i x - (a - r) p_i**2``."""
        P = self.params
        p = P.nodes()[i]
        return (P.r, 2 * (P.a - P.r) * p, -(P.a - P.r) * p * p)

    def s_coefficients(self, i: int) -> tuple[float, float, float]:
        """``q_i^s(x) = s x**2 + beta_i x + gamma_i`` for ``i = 1..n``."""
        return (self.params.s, self.betas[i - 1], self.gammas[i - 1])

    def tangency_residuals(self) -> float:
        """Worst value/slope mismatch at the tangency points ``x_i``, ``y_i``."""
        def val(c, x):
            return (c[0] * x + c[1]) * x + c[2]

        def der(c, x):
            return 2 * c[0] * x + c[1]

        worst = 0.0
        for i in range(1, self.params.n + 1):
            qs = self.s_coefficients(i)
            for qr, x in ((self.r_coefficients(i - 1), self.xs[i - 1]),
                          (self.r_coefficients(i), self.ys[i - 1])):
                worst = max(worst, abs(val(qs, x) - val(qr, x)), abs(der(qs, x) - der(qr, x)))
        return worst


def stitch(params: StitchParams) -> StitchResult:
    """Build ``v_n`` as the alternating minimum of restricted tangent quadratics.

    For each ``i`` the ``s``-quadratic is tangent to ``q_{i-1}^r`` at ``x_i``
    and to ``q_i^r`` at ``y_i``; the two tangency conditions give
    ``beta_i = (a - s)(p_{i-1} + p_i)``.
    """
    P = params
    r, a, s, m, n = P.r, P.a, P.s, P.m, P.n
    lam = P.lam
    p = P.nodes()
    betas, gammas, xs, ys = [], [], [], []
    for i in range(1, n + 1):
        beta = (a - s) * (p[i - 1] + p[i])
        gamma = (beta - 2 * (a - r) * p[i - 1]) ** 2 / (4 * (s - r)) - (a - r) * p[i - 1] ** 2
        betas.append(beta)
        gammas.append(gamma)
        xs.append(lam * p[i - 1] - beta / (2 * s - 2 * r))
        ys.append(lam * p[i] - beta / (2 * s - 2 * r))

    def qr(i, lo, hi):
        return quadratic(r, 2 * (a - r) * p[i], -(a - r) * p[i] ** 2, lo, hi)

    parts = [qr(0, -m, xs[0])]
    for i in range(1, n + 1):
        parts.append(quadratic(s, betas[i - 1], gammas[i - 1], xs[i - 1], ys[i - 1]))
        parts.append(qr(i, ys[i - 1], xs[i] if i < n else m))
    v = functools.reduce(pointwise_min, parts)
    return StitchResult(P, v, tuple(xs), tuple(ys), tuple(betas), tuple(gammas))


def stitch_value_identity(params: StitchParams, zeta: ZetaSpec) -> tuple[float, float]:
    """``(Z(v_n), lam 2m zeta(2s) + (1 - lam) 2m zeta(2r))`` with ``Z = zeta_integral``."""
    check_zeta(zeta)
    res = stitch(params)
    lam, m = params.lam, params.m
    predicted = lam * 2 * m * zeta(2 * params.s) + (1 - lam) * 2 * m * zeta(2 * params.r)
    return zeta_integral(res.v, zeta), predicted


# -- support triangles ----------------------------------------------------------

@dataclass(frozen=True)
class SupportTriangle:
    x: float
    y: float
    A: tuple[float, float]
    B: tuple[float, float]
    C: tuple[float, float]

    @property
    def area(self) -> float:
        (ax, ay), (bx, by), (cx, cy) = self.A, self.B, self.C
        return 0.5 * abs((bx - ax) * (cy - ay) - (cx - ax) * (by - ay))

    @property
    def degenerate(self) -> bool:
        return self.area == 0.0

    def chord_height(self) -> float:
        """Chord value minus apex value at the apex abscissa (>= 0)."""
        (ax, ay), (bx, by), (cx, cy) = self.A, self.B, self.C
        chord = ay + (by - ay) * (cx - ax) / (bx - ax)
        return chord - cy


def support_triangle(u: PLQFunction, x: float, y: float) -> SupportTriangle:
    """Triangle cut by the support lines at ``x``, ``y`` and the chord.

    At kinks the right slope is used at ``x`` and the left slope at ``y``.
    """
    check_plq(u, allow_point=False)
    dom = u.domain
    if not (x < y and dom.contains(x) and dom.contains(y)):
        raise ValueError(f"need x < y inside {tuple(dom)}, got x={x}, y={y}")
    ux, uy = u.eval(x), u.eval(y)
    sx, sy = u.right_slope(x), u.left_slope(y)
    chord_slope = (uy - ux) / (y - x)
    tol = 1e-12 * max(1.0, abs(sx), abs(sy))
    if sy - sx <= tol:
        inner = [t for t in u.breakpoints if x < t < y] + [0.5 * (x + y)]
        dev = max(abs(u.eval(t) - (ux + chord_slope * (t - x))) for t in inner)
        if dev > 1e-9 * max(1.0, abs(ux), abs(uy)):
            raise ParallelSupportLines(f"slopes {sx} and {sy} coincide but u is not affine")
        mid = 0.5 * (x + y)
        return SupportTriangle(x, y, (x, ux), (y, uy), (mid, 0.5 * (ux + uy)))
    t = (uy - ux + sx * x - sy * y) / (sx - sy)
    return SupportTriangle(x, y, (x, ux), (y, uy), (t, ux + sx * (t - x)))


@dataclass(frozen=True)
class PositiveCase:
    """Output of :func:`positive_case_approximant`.

    ``alpha, beta, gamma`` are the coefficients of the tangent quadratic,
    ``b1 >= b2`` its two tangency abscissas seen from ``B``, and ``ratio`` is
    ``(b1 - b2) / (b1 - (x0 - eps))``.  When ``mirrored`` is set the
    construction ran on ``x -> u(-x)`` (the apex sat closer to ``A``); the
    coefficients and abscissas are then reported in mirrored coordinates
    while ``v_T`` is mapped back.
    """

    alpha: float
    beta: float
    gamma: float
    b1: float
    b2: float
    ratio: float
    v_T: PLQFunction
    triangle: SupportTriangle
    mirrored: bool
    tie: bool


def _positive_core(u: PLQFunction, xa: float, xb: float, may_mirror: bool = True) -> PositiveCase:
    tri = support_triangle(u, xa, xb)
    c1 = tri.C[0]
    right, left = xb - c1, c1 - xa
    tie = abs(right - left) <= TIE_TOL * (xb - xa)
    if may_mirror and not tie and right > left:
        res = _positive_core(u.reflect(), -xb, -xa, may_mirror=False)
        return PositiveCase(res.alpha, res.beta, res.gamma, res.b1, res.b2, res.ratio,
                            res.v_T.reflect(), tri, True, False)
    yA, yB = tri.A[1], tri.B[1]
    sA, sB = u.right_slope(xa), u.left_slope(xb)
    if not sB > sA:
        raise ParallelSupportLines(f"curvature on [{xa}, {xb}] is below float resolution")
    b1_apex = 2 * c1 - xa
    alpha = (sB - sA) / (2 * (b1_apex - xa))
    beta = sA - 2 * alpha * xa
    gamma = yA - (alpha * xa + beta) * xa
    root = math.sqrt(max(xb * xb - (yB - beta * xb - gamma) / alpha, 0.0))
    b1, b2 = xb + root, xb - root
    ratio = (b1 - b2) / (b1 - xa)
    line_slope = 2 * alpha * b2 + beta
    pieces = []
    if b2 > xa:
        pieces.append(QuadraticPiece(xa, min(b2, xb), alpha, beta, gamma))
    if b2 < xb:
        pieces.append(QuadraticPiece(max(b2, xa), xb, 0.0, line_slope, yB - line_slope * xb))
    v_T = from_pieces(pieces)
    return PositiveCase(alpha, beta, gamma, b1, b2, ratio, v_T, tri, False, tie)


def positive_case_approximant(u: PLQFunction, x0: float, eps: float) -> PositiveCase:
    """Local approximant at a point of positive curvature.

    ``x0`` must be interior to a piece with ``a > 0``.  The window
    ``[x0 - eps, x0 + eps]`` must lie in ``dom u``; it may cross junctions,
    which is what makes the ratio non-zero.
    """
    check_plq(u, allow_point=False)
    eps = check_positive("eps", eps)
    piece = u.piece_at(x0)
    if not (piece.left < x0 < piece.right and piece.a > 0):
        raise ValueError(f"x0={x0} is not interior to a piece with positive curvature")
    xa, xb = x0 - eps, x0 + eps
    if not (u.domain.contains(xa) and u.domain.contains(xb)):
        raise EpsilonTooLarge(f"window [{xa}, {xb}] leaves dom u = {tuple(u.domain)}")
    return _positive_core(u, xa, xb)


@dataclass(frozen=True)
class ZeroCase:
    """Output of :func:`zero_case_approximant`: ``q~ = alpha x**2 + beta x + gamma``."""

    alpha: float
    beta: float
    gamma: float
    b1: float
    v_T: PLQFunction
    triangle: SupportTriangle


def zero_case_approximant(u: PLQFunction, x0: float, eps: float, alpha: float) -> ZeroCase:
    """Local approximant at a point of zero curvature.

    ``q~`` touches ``u`` at ``x0`` with matching slope; ``b1`` is the second
    tangency abscissa seen from the point of the support line above
    ``x0 + eps`` (it equals ``x0 + 2 eps``).  ``v_T`` is the chord of ``u``
    over ``[x0, x0 + eps]``.
    """
    check_plq(u, allow_point=False)
    eps = check_positive("eps", eps)
    alpha = check_positive("alpha", alpha)
    piece = u.piece_at(x0)
    if not (piece.left < x0 < piece.right and piece.a == 0):
        raise ValueError(f"x0={x0} is not interior to an affine piece")
    if x0 + eps > piece.right:
        raise EpsilonTooLarge(f"window [{x0}, {x0 + eps}] leaves the piece ending at {piece.right}")
    d, ux = piece.slope(x0), piece.value(x0)
    beta = d - 2 * alpha * x0
    gamma = ux + alpha * x0 * x0 - d * x0
    xc = x0 + eps
    yc = ux + d * eps
    b1 = xc + math.sqrt(max(xc * xc - (yc - beta * xc - gamma) / alpha, 0.0))
    yb = u.eval(xc)
    slope = (yb - ux) / eps
    v_T = from_pieces([QuadraticPiece(x0, xc, 0.0, slope, ux - slope * x0)])
    return ZeroCase(alpha, beta, gamma, b1, v_T, support_triangle(u, x0, xc))


# -- covering -------------------------------------------------------------------

def lipschitz_bound_constant(u: PLQFunction, m: float | None, zeta: ZetaSpec) -> float:
    """``(1 + 2 m zeta(2 L_u)) / m`` for ``dom u`` of length ``2m``.

    ``m = None`` takes the half-length of ``dom u``; a given ``m`` must match it.
    """
    check_plq(u, allow_point=False)
    check_zeta(zeta)
    half = 0.5 * u.domain.length
    if m is None:
        m = half
    elif abs(m - half) > 1e-12 * max(1.0, half):
        raise ValueError(f"dom u has half-length {half}, not m={m}")
    return (1.0 + 2.0 * m * zeta(2.0 * u.lipschitz_constant())) / m


def check_lipschitz_bound(u: PLQFunction, c: float, zeta: ZetaSpec, n: int = 100,
                          seed: int = 0) -> tuple[bool, float]:
    """Test ``zeta_integral(u + 1_J) <= c V1(J)`` on ``n`` random subintervals.

    Returns ``(all passed, worst ratio zeta_integral / V1(J))``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = u.domain
    worst = 0.0
    for _ in range(n):
        s, t = np.sort(rng.uniform(lo, hi, size=2))
        if t - s <= LENGTH_TOL:
            continue
        worst = max(worst, zeta_integral(u.restrict(float(s), float(t)), zeta) / (t - s))
    return worst <= c * (1 + 1e-12), worst


def shift_map(alpha: float, beta: float, y: float):
    """``(x, t) -> (x + y, t + alpha y**2 + beta y + 2 alpha y x)``.

    It maps the graph of ``alpha x**2 + beta x + gamma`` onto itself.
    """
    def phi(x, t):
        return x + y, t + alpha * y * y + beta * y + 2 * alpha * y * x
    return phi


def shifted_copy(v: PLQFunction, alpha: float, beta: float, y: float) -> PLQFunction:
    """Image of ``graph v`` under :func:`shift_map`, as a PLQ function."""
    return v.translate(y).add_affine(2 * alpha * y, beta * y - alpha * y * y)


@dataclass(frozen=True)
class Cell:
    kind: str  # "positive", "zero" or "residual"
    interval: Interval
    z_u: float
    z_v: float
    triangle: SupportTriangle | None = None
    mirrored: bool = False
    tie: bool = False


@dataclass
class VitaliResult:
    cells: list[Cell]
    residuals: list[Interval]
    v_T: PLQFunction
    certificate: dict = field(default_factory=dict)

    @property
    def triangles(self) -> list[SupportTriangle]:
        return [c.triangle for c in self.cells if c.triangle is not None]


def _chord_piece(u: PLQFunction, l: float, r: float) -> QuadraticPiece:
    vl, vr = u.eval(l), u.eval(r)
    slope = (vr - vl) / (r - l)
    return QuadraticPiece(l, r, 0.0, slope, vl - slope * l)


def _try_cell(u: PLQFunction, l: float, r: float, zeta: ZetaSpec):
    z_u = zeta_integral(u.restrict(l, r), zeta)
    mid = 0.5 * (l + r)
    if u.piece_at(mid).a > 0 and u.left_slope(r) > u.right_slope(l):
        pc = _positive_core(u, l, r)
        return Cell("positive", Interval(l, r), z_u, zeta_integral(pc.v_T, zeta),
                    pc.triangle, pc.mirrored, pc.tie), list(pc.v_T.pieces)
    tri = support_triangle(u, l, r)
    return Cell("zero", Interval(l, r), z_u, 0.0, tri), [_chord_piece(u, l, r)]


def vitali_decompose(u: PLQFunction, rho: float, delta: float, zeta: ZetaSpec) -> VitaliResult:
    """Cover ``dom u`` by support-triangle cells and certify the gap.

    Cells of width at most ``delta`` are laid left to right.  Each cell gets
    the positive- or zero-curvature approximant and must satisfy
    ``Z(u + 1_cell) <= Z(v_cell) + (rho/2) |cell|``; a failing cell is halved,
    or booked as a residual chord interval while the residual budget
    ``eta = min(delta, rho V1 / (2 c_L))`` lasts.  ``v_T`` is the minimum of
    all cell functions and the certificate asserts
    ``Z(u) - Z(v_T) <= rho V1(dom u)`` with ``Z = zeta_integral``.

    Raises
    ------
    BudgetExceeded
        If a cell would have to shrink below ``DELTA_MIN``.
    """
    check_plq(u)
    check_zeta(zeta)
    rho = check_positive("rho", rho)
    delta = check_positive("delta", delta)
    v1 = u.domain.length
    if u.is_point:
        cert = {"z_u": 0.0, "z_vt": 0.0, "gap": 0.0, "rho_times_v1": 0.0, "pass": True,
                "tie_convention": "left", "ties": 0, "mirrored": 0}
        return VitaliResult([], [], u, cert)
    c_L = lipschitz_bound_constant(u, None, zeta)
    eta = min(delta, rho * v1 / (2 * c_L))
    budget = eta
    lo, hi = u.domain
    cells, residuals, pieces = [], [], []
    x = lo
    while hi - x > LENGTH_TOL:
        width = min(delta, hi - x)
        if hi - (x + width) <= LENGTH_TOL:
            width = hi - x
        while True:
            r = hi if width == hi - x else x + width
            cell, cell_pieces = _try_cell(u, x, r, zeta)
            if cell.z_u <= cell.z_v + 0.5 * rho * (r - x) + 1e-15:
                cells.append(cell)
                pieces.extend(cell_pieces)
                break
            if r - x <= budget:
                budget -= r - x
                residuals.append(Interval(x, r))
                cells.append(Cell("residual", Interval(x, r), cell.z_u, 0.0))
                pieces.append(_chord_piece(u, x, r))
                break
            width *= 0.5
            if width < DELTA_MIN:
                raise BudgetExceeded(f"cell at x={x} still fails below width {DELTA_MIN}")
        x = r
    v_T = from_pieces(pieces)
    z_u, z_vt = zeta_integral(u, zeta), zeta_integral(v_T, zeta)
    gap = z_u - z_vt
    cert = {
        "z_u": z_u,
        "z_vt": z_vt,
        "gap": gap,
        "rho_times_v1": rho * v1,
        "pass": bool(gap <= rho * v1 + 1e-12),
        "eta": eta,
        "c_L": c_L,
        "tie_convention": "left",
        "ties": sum(c.tie for c in cells),
        "mirrored": sum(c.mirrored for c in cells),
    }
    if not cert["pass"]:
        raise BudgetExceeded(f"certificate gap {gap} exceeds {rho * v1}")
    return VitaliResult(cells, residuals, v_T, cert)
