"""Property-test orchestration for valuations on PLQ functions.

Generators emit lattice pairs ``(u, v)`` whose minimum is convex; the suites
measure additivity, invariance, semicontinuity along a corpus of
tau-convergent sequences, and round-trip classification.  Broken stub
valuations ship alongside as negative controls.

Cases run sequentially in index order, so a :class:`SuiteResult` depends only
on its inputs and seed and serializes byte-identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constructions import StitchParams, chord_approximation, stitch
from .convergence import (
    FunctionSequence,
    semicontinuity_probe,
    tau_convergence_check,
)
from .errors import (
    DisconnectedDomain,
    GeneratorStarved,
    NotConvex,
    PLQValError,
)
from .functionals import (
    BUILTIN_SPECS,
    DEFAULT_A_GRID,
    ValuationSpec,
    classify,
    v1_of_domain,
)
from .plq import (
    PLQFunction,
    QuadraticPiece,
    from_pieces,
    pointwise_min,
    quadratic,
    valuation_quadruple,
)
from .zeta import BUILTIN_ZETAS

__all__ = [
    "PairGeneratorConfig",
    "SuiteResult",
    "random_plq",
    "generate_valid_pairs",
    "acceptance_rate",
    "chord_targets",
    "run_valuation_suite",
    "run_invariance_suite",
    "run_usc_suite",
    "run_roundtrip_suite",
    "tau_corpus",
    "counterexample_sequence",
    "STUBS",
]

STRATEGIES = ("domain_split", "tangent_chain", "rejection")
VALUATION_TOL = 1e-9
INVARIANCE_TOL = 1e-12
ROUNDTRIP_C_TOL = 1e-10
ROUNDTRIP_ZETA_TOL = 1e-9
MIN_ACCEPTANCE = 1e-3
MAX_STORED_FAILURES = 20


@dataclass(frozen=True)
class PairGeneratorConfig:
    """Settings for :func:`generate_valid_pairs` and the random suites.

    ``strategy`` may also be ``"mixed"``, which splits ``count`` evenly over
    the three concrete strategies.
    """

    strategy: str = "mixed"
    seed: int = 0
    count: int = 1200
    curvature_range: tuple[float, float] = (0.0, 4.0)
    slope_range: tuple[float, float] = (-3.0, 3.0)
    offset_range: tuple[float, float] = (-3.0, 3.0)
    length_range: tuple[float, float] = (0.5, 3.0)
    max_pieces: int = 3
    max_draws: int = 10 ** 6

    def __post_init__(self):
        if self.strategy not in STRATEGIES + ("mixed",):
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from "
                             f"{', '.join(STRATEGIES + ('mixed',))}")
        if isinstance(self.count, bool) or int(self.count) != self.count or self.count <= 0:
            raise ValueError(f"count must be a positive integer, got {self.count}")
        for name in ("curvature_range", "slope_range", "offset_range", "length_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} must satisfy lo < hi, got {(lo, hi)}")
        if self.curvature_range[0] < 0 or self.length_range[0] <= 0:
            raise ValueError("curvatures must be >= 0 and lengths > 0")
        if self.max_pieces < 1 or self.max_draws < 1:
            raise ValueError("max_pieces and max_draws must be positive")


@dataclass
class SuiteResult:
    """Outcome of one suite.

    Only the first ``MAX_STORED_FAILURES`` counterexamples are kept;
    ``n_failures`` counts all of them.
    """

    name: str
    cases: int
    n_failures: int = 0
    failures: list[dict] = field(default_factory=list)
    max_residual: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.n_failures == 0

    def record(self, residual: float, failed: bool, payload: dict) -> None:
        if math.isfinite(residual):
            self.max_residual = max(self.max_residual, residual)
        else:
            self.max_residual = math.inf
        if failed:
            self.n_failures += 1
            if len(self.failures) < MAX_STORED_FAILURES:
                self.failures.append(payload)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "cases": self.cases,
            "passed": self.passed,
            "n_failures": self.n_failures,
            "failures": self.failures,
            "max_residual": self.max_residual if math.isfinite(self.max_residual) else "inf",
            "notes": self.notes,
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


# -- random functions -------------------------------------------------------------

def random_plq(rng: np.random.Generator, cfg: PairGeneratorConfig, lo: float | None = None,
               length: float | None = None) -> PLQFunction:
    """A random convex PLQ function with up to ``cfg.max_pieces`` pieces.

    Pieces are laid left to right with continuous values and non-decreasing
    slopes; each piece is affine with probability 1/3.
    """
    if lo is None:
        lo = float(rng.uniform(-2.0, 2.0))
    if length is None:
        length = float(rng.uniform(*cfg.length_range))
    k = int(rng.integers(1, cfg.max_pieces + 1))
    cuts = np.sort(rng.uniform(lo, lo + length, size=k - 1)) if k > 1 else np.array([])
    knots = [lo] + [float(c) for c in cuts] + [lo + length]
    value = float(rng.uniform(*cfg.offset_range))
    slope = float(rng.uniform(*cfg.slope_range))
    pieces = []
    for left, right in zip(knots[:-1], knots[1:]):
        a = 0.0 if rng.random() < 1 / 3 else float(rng.uniform(*cfg.curvature_range))
        # value + slope (x - left) + a (x - left)**2 in global coefficients
        pieces.append(QuadraticPiece(left, right, a, slope - 2 * a * left,
                                     value - slope * left + a * left * left))
        value = (a * (right - left) + slope) * (right - left) + value
        slope = slope + 2 * a * (right - left) + float(rng.uniform(0.0, 1.0)) * (rng.random() < 0.5)
    return from_pieces(pieces)


def _domain_split(rng, cfg):
    u = random_plq(rng, cfg)
    lo, hi = u.domain
    t1, t2 = np.sort(rng.uniform(lo, hi, size=2))
    return u.restrict(lo, float(t2)), u.restrict(float(t1), hi)


def _tangent_chain(rng, cfg):
    r = float(rng.uniform(0.0, 1.0))
    a = r + float(rng.uniform(0.1, 2.0))
    s = a + float(rng.uniform(0.1, 2.0))
    n = int(rng.integers(1, 6))
    res = stitch(StitchParams(r, a, s, 1.0, n))
    i = int(rng.integers(1, n + 1))
    nodes = res.params.nodes()
    xi, yi = res.xs[i - 1], res.ys[i - 1]
    s_coef = res.s_coefficients(i)
    if rng.random() < 0.5:
        lo = nodes[i - 1] - 0.5
        r_coef = res.r_coefficients(i - 1)
        t = float(rng.uniform(0.05, 1.0)) * (xi - lo)
        u = quadratic(*r_coef, lo, xi)
        v = quadratic(*s_coef, xi - t, yi)
    else:
        hi = nodes[i] + 0.5
        r_coef = res.r_coefficients(i)
        t = float(rng.uniform(0.05, 1.0)) * (hi - yi)
        u = quadratic(*s_coef, xi, yi + t)
        v = quadratic(*r_coef, yi, hi)
    p, q0 = float(rng.uniform(*cfg.slope_range)), float(rng.uniform(*cfg.offset_range))
    return u.add_affine(p, q0), v.add_affine(p, q0)


def _rejection_draw(rng, cfg):
    return random_plq(rng, cfg), random_plq(rng, cfg)


def _accepts(u, v) -> bool:
    try:
        pointwise_min(u, v)
    except (NotConvex, DisconnectedDomain):
        return False
    return True


def generate_valid_pairs(cfg: PairGeneratorConfig) -> list[tuple[PLQFunction, PLQFunction]]:
    """Pairs ``(u, v)`` for which ``u & v`` and ``u | v`` are both PLQ.

    Raises
    ------
    GeneratorStarved
        If the rejection strategy cannot fill ``count`` within
        ``max_draws`` draws, or accepts fewer than 0.1% of them.
    """
    if cfg.strategy == "mixed":
        share = [cfg.count // 3 + (i < cfg.count % 3) for i in range(3)]
        out = []
        for i, (strategy, count) in enumerate(zip(STRATEGIES, share)):
            if count:
                sub = PairGeneratorConfig(**{**cfg.__dict__, "strategy": strategy,
                                             "count": count, "seed": cfg.seed * 3 + i})
                out.extend(generate_valid_pairs(sub))
        return out
    rng = np.random.default_rng(cfg.seed)
    pairs = []
    if cfg.strategy == "rejection":
        draws = 0
        while len(pairs) < cfg.count and draws < cfg.max_draws:
            draws += 1
            u, v = _rejection_draw(rng, cfg)
            if _accepts(u, v):
                pairs.append((u, v))
            if draws >= 10_000 and len(pairs) / draws < MIN_ACCEPTANCE:
                break
        rate = len(pairs) / draws
        if len(pairs) < cfg.count or rate < MIN_ACCEPTANCE:
            raise GeneratorStarved(f"accepted {len(pairs)} of {draws} draws "
                                   f"(rate {rate:.2e}, need {cfg.count})")
        return pairs
    make = _domain_split if cfg.strategy == "domain_split" else _tangent_chain
    while len(pairs) < cfg.count:
        pairs.append(make(rng, cfg))
    return pairs


def acceptance_rate(cfg: PairGeneratorConfig, draws: int = 2000) -> float:
    """Fraction of raw rejection-strategy draws whose minimum is convex."""
    rng = np.random.default_rng(cfg.seed)
    return sum(_accepts(*_rejection_draw(rng, cfg)) for _ in range(draws)) / draws


# -- suites -----------------------------------------------------------------------

def _name(Z) -> str:
    return getattr(Z, "label", None) or getattr(Z, "name", None) or getattr(Z, "__name__", "Z")


def run_valuation_suite(Z: Callable[[PLQFunction], float], cfg: PairGeneratorConfig | None = None,
                        pairs=None, tol: float = VALUATION_TOL) -> SuiteResult:
    """Check ``Z(u & v) + Z(u | v) = Z(u) + Z(v)`` on generated pairs.

    The recorded residual is relative to ``1 + |Z(u)| + |Z(v)|``.
    """
    cfg = cfg or PairGeneratorConfig()
    pairs = generate_valid_pairs(cfg) if pairs is None else pairs
    res = SuiteResult(f"valuation:{_name(Z)}", len(pairs))
    for i, (u, v) in enumerate(pairs):
        lo, hi = valuation_quadruple(u, v)
        zu, zv = Z(u), Z(v)
        scale = 1.0 + abs(zu) + abs(zv)
        rel = abs(Z(lo) + Z(hi) - zu - zv) / scale
        res.record(rel, rel > tol,
                   {"case": i, "u": u.to_dict(), "v": v.to_dict(), "residual": rel})
    return res


def run_invariance_suite(Z: Callable[[PLQFunction], float], cfg: PairGeneratorConfig | None = None,
                         cases: int | None = None, tol: float = INVARIANCE_TOL) -> SuiteResult:
    """Translation and dual epi-translation invariance on random functions.

    Shifts ``y`` are drawn from ``[-5, 5]`` and affine terms ``(p, q0)`` from
    ``[-3, 3]**2``.  Residuals are relative to ``1 + |Z(u)|``.
    """
    cfg = cfg or PairGeneratorConfig()
    n = cfg.count if cases is None else cases
    rng = np.random.default_rng(cfg.seed)
    res = SuiteResult(f"invariance:{_name(Z)}", n)
    kinds = {"translation": 0, "affine": 0}
    for i in range(n):
        u = random_plq(rng, cfg)
        y = float(rng.uniform(-5, 5))
        p, q0 = (float(t) for t in rng.uniform(-3, 3, size=2))
        zu = Z(u)
        scale = 1.0 + abs(zu)
        rt = abs(Z(u.translate(y)) - zu) / scale
        ra = abs(Z(u.add_affine(p, q0)) - zu) / scale
        bad = []
        if rt > tol:
            bad.append("translation")
        if ra > tol:
            bad.append("affine")
        for k in bad:
            kinds[k] += 1
        res.record(max(rt, ra), bool(bad), {"case": i, "u": u.to_dict(), "y": y, "p": p,
                                            "q0": q0, "kinds": bad,
                                            "residual": max(rt, ra)})
    res.notes["failures_by_kind"] = kinds
    return res


def run_usc_suite(Z: Callable[[PLQFunction], float],
                  sequences: Sequence[tuple[FunctionSequence, PLQFunction]] | None = None,
                  tol: float = 1e-6) -> SuiteResult:
    """Aggregate semicontinuity verdicts along ``(sequence, limit)`` pairs.

    Sequences failing the tau-check are listed under ``notes["out_of_scope"]``
    and never count as violations.
    """
    if sequences is None:
        sequences = tau_corpus() + [counterexample_sequence()]
    res = SuiteResult(f"usc:{_name(Z)}", len(sequences))
    out_of_scope, verdicts = [], {}
    for i, (seq, u) in enumerate(sequences):
        tau = tau_convergence_check(seq, u)
        if not tau.passed:
            out_of_scope.append(seq.name)
            continue
        verdict = semicontinuity_probe(seq, u, Z, tol)
        verdicts[seq.name] = verdict.verdict
        excess = verdict.limsup - verdict.z_limit
        res.record(max(excess, 0.0), verdict.verdict != "usc-consistent",
                   {"case": i, "sequence": seq.name, "limit": u.to_dict(), **verdict.to_dict()})
    res.notes["out_of_scope"] = out_of_scope
    res.notes["verdicts"] = verdicts
    return res


def run_roundtrip_suite(specs: Sequence[ValuationSpec] = BUILTIN_SPECS,
                        a_grid=DEFAULT_A_GRID) -> SuiteResult:
    """``classify`` applied to each spec must return the spec itself.

    ``c0`` and ``c1`` are compared to 1e-10 absolute, ``zeta`` samples to
    1e-9 relative to ``max(1, |zeta(a)|)``.
    """
    res = SuiteResult("roundtrip", len(specs))
    for i, spec in enumerate(specs):
        try:
            rep = classify(spec, a_grid)
        except PLQValError as exc:
            res.record(math.inf, True, {"case": i, "spec": spec.label, "error": str(exc)})
            continue
        dc = max(abs(rep.c0 - spec.c0), abs(rep.c1 - spec.c1))
        dz = max(abs(z - spec.zeta(a)) / max(1.0, abs(spec.zeta(a)))
                 for a, z in rep.zeta_samples)
        failed = dc > ROUNDTRIP_C_TOL or dz > ROUNDTRIP_ZETA_TOL
        res.record(max(dc, dz), failed, {"case": i, "spec": spec.label, "c_error": dc,
                                         "zeta_error": dz})
    return res


# -- sequence corpus -----------------------------------------------------------------

def _two_piece() -> PLQFunction:
    return from_pieces([QuadraticPiece(0.0, 1.0, 0.0, -1.0, 1.0),
                        QuadraticPiece(1.0, 2.0, 1.0, -3.0, 2.0)])


def _mixed() -> PLQFunction:
    return from_pieces([QuadraticPiece(-1.0, 0.0, 0.5, 0.0, 0.0),
                        QuadraticPiece(0.0, 1.0, 0.0, 0.0, 0.0),
                        QuadraticPiece(1.0, 2.0, 1.0, -2.0, 1.0)])


def chord_targets() -> dict[str, PLQFunction]:
    """The five targets approximated by chords in the corpus."""
    return {
        "half_square": quadratic(0.5, 0.0, 0.0, -1.0, 1.0),
        "two_piece": _two_piece(),
        "steep": quadratic(4.0, 0.0, 0.0, 0.0, 1.0),
        "mixed": _mixed(),
        "shifted": quadratic(0.5, -2.0, 2.0, 1.0, 4.0),
    }


def tau_corpus(k_max: int = 64) -> list[tuple[FunctionSequence, PLQFunction]]:
    """Ten sequences that tau-converge to their paired limit by ``k_max``."""
    half = quadratic(0.5, 0.0, 0.0, -1.0, 1.0)
    two = _two_piece()
    out = [(FunctionSequence(lambda k: half.add_affine(0.0, 1.0 / k ** 2), k_max, "lift"), half)]
    for name, target in chord_targets().items():
        out.append((FunctionSequence(lambda k, t=target: chord_approximation(t, k), k_max,
                                     f"chord:{name}"), target))
    out.append((FunctionSequence(lambda k: half.restrict(-1 + 1 / k ** 2, 1 - 1 / k ** 2),
                                 k_max, "shrink:half_square"), half))
    out.append((FunctionSequence(lambda k: two.restrict(1 / k ** 2, 2 - 1 / k ** 2),
                                 k_max, "shrink:two_piece"), two))
    out.append((FunctionSequence(lambda k: half.scale(1 + 1 / k ** 2), k_max, "steepen"), half))
    out.append((FunctionSequence(lambda k: stitch(StitchParams(0.0, 1.0, 2.0, 1.0, k)).v,
                                 k_max, "stitch"), quadratic(1.0, 0.0, 0.0, -1.0, 1.0)))
    return out


def counterexample_sequence(k_max: int = 64) -> tuple[FunctionSequence, PLQFunction]:
    """``k x**2`` on ``[0, 1]``: epi-converges to the indicator of ``{0}``
    but with unbounded Lipschitz constants."""
    from .plq import point_indicator
    return (FunctionSequence(lambda k: quadratic(float(k), 0.0, 0.0, 0.0, 1.0), k_max,
                             "counterexample"), point_indicator(0.0))


# -- negative controls -----------------------------------------------------------------

_BASE = ValuationSpec(1.0, 2.0, BUILTIN_ZETAS["power13"])


def _v1_squared(u):
    return v1_of_domain(u) ** 2


def _plus_midpoint(u):
    return _BASE(u) + u.domain.midpoint


def _plus_center_value(u):
    return _BASE(u) + u.eval(u.domain.midpoint)


def _v1(u):
    return v1_of_domain(u)


_v1_squared.label = "stub:v1_squared"
_plus_midpoint.label = "stub:plus_midpoint"
_plus_center_value.label = "stub:plus_center_value"
_v1.label = "v1"

# Deliberately broken valuations; each must make at least one suite fail.
STUBS = {
    "v1_squared": _v1_squared,
    "plus_midpoint": _plus_midpoint,
    "plus_center_value": _plus_center_value,
}
