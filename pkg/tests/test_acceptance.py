"""Acceptance gate: twelve criteria, one PASS/FAIL line each.

Run under pytest (lines are printed even with capture on) or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import sys

import numpy as np
import pytest

from plqval.constructions import (
    StitchParams,
    chord_approximation,
    exact_sup_gap,
    positive_case_approximant,
    stitch,
    stitch_value_identity,
    vitali_decompose,
)
from plqval.convergence import FunctionSequence, tau_convergence_check
from plqval.functionals import BUILTIN_SPECS, v1_of_domain, zeta_integral
from plqval.harness import (
    STUBS,
    PairGeneratorConfig,
    chord_targets,
    counterexample_sequence,
    generate_valid_pairs,
    run_invariance_suite,
    run_roundtrip_suite,
    run_usc_suite,
    run_valuation_suite,
    tau_corpus,
)
from plqval.plotting import plot_sequence, plot_stitch
from plqval.convergence import sequence_report
from plqval.plq import QuadraticPiece, from_pieces, indicator, plq_sum, quadratic
from plqval.zeta import BUILTIN_ZETAS

HALF = quadratic(0.5, 0.0, 0.0, -1.0, 1.0)
TWO_CURV = from_pieces([QuadraticPiece(-1, 0, 0.5, 0, 0), QuadraticPiece(0, 1, 1, 0, 0)])


def criterion_1():
    pairs = generate_valid_pairs(PairGeneratorConfig(count=1200, seed=0))
    worst, bad = 0.0, []
    for spec in BUILTIN_SPECS:
        res = run_valuation_suite(spec, pairs=pairs, tol=1e-9)
        worst = max(worst, res.max_residual)
        if not res.passed:
            bad.append(spec.label)
    stub_passes = [name for name in ("v1_squared", "plus_center_value")
                   if run_valuation_suite(STUBS[name], pairs=pairs).passed]
    ok = len(pairs) >= 1000 and not bad and not stub_passes
    return ok, f"{len(pairs)} pairs x 12 specs, max rel residual {worst:.2e}, " \
               f"failing specs {bad}, stubs passing {stub_passes}"


def criterion_2():
    worst, bad = 0.0, []
    for spec in BUILTIN_SPECS:
        res = run_invariance_suite(spec, cases=1000, tol=1e-12)
        worst = max(worst, res.max_residual)
        if not res.passed:
            bad.append(spec.label)
    return not bad, f"1000 cases x 12 specs, max residual {worst:.2e}, failing {bad}"


def criterion_3():
    worst = 0.0
    for spec in BUILTIN_SPECS:
        for a in (0.0, 1.0, 8.0):
            for lo, hi in ((0, 1), (0, 2), (-3, -1)):
                u = plq_sum(quadratic(a / 2, 0, 0, lo, hi), indicator(lo, hi))
                lhs = spec(u) - spec.c0 - spec.c1 * (hi - lo)
                worst = max(worst, abs(lhs - spec.zeta(a) * (hi - lo)))
    golden = BUILTIN_ZETAS["power13"](8.0)
    ok = worst <= 1e-12 and golden == 2.0
    return ok, f"max |residual| {worst:.2e}, zeta(8) for t^(1/3) = {golden!r}"


def criterion_4():
    res = run_roundtrip_suite()
    return res.passed and res.cases == 12, \
        f"{res.cases} specs, {res.n_failures} failures, max deviation {res.max_residual:.2e}"


def criterion_5():
    zetas = list(BUILTIN_ZETAS.values())
    gaps_literal, gaps_formula, z_spread, z_pred_err, witness_ok = [], True, 0.0, 0.0, True
    for zeta in zetas:
        zs = []
        for n in (2, 4, 8, 16, 32):
            P = StitchParams(0, 1, 2, 1, n)
            res = stitch(P)
            g1, g2 = res.ys[0] - res.xs[0], res.xs[1] - res.ys[0]
            if zeta is zetas[0]:
                gaps_literal.append((n, g1, g2))
                gaps_formula &= math.isclose(g1, P.lam * 2 * P.m / n, abs_tol=1e-14) and \
                    math.isclose(g2, (1 - P.lam) * 2 * P.m / n, abs_tol=1e-14)
            z, predicted = stitch_value_identity(P, zeta)
            zs.append(z)
            z_pred_err = max(z_pred_err, abs(z - predicted))
            witness_ok &= 2 * P.m * zeta(2 * P.a) >= z - 1e-12
        z_spread = max(z_spread, max(zs) - min(zs))
    literal = all(g1 == 0.25 and g2 == 0.25 for _, g1, g2 in gaps_literal)
    ok = literal and gaps_formula and z_spread <= 1e-9 and z_pred_err <= 1e-9 and witness_ok
    gaps = ", ".join(f"n={n}: {g1:g}/{g2:g}" for n, g1, g2 in gaps_literal)
    return ok, (f"gaps y1-x1/x2-y1 [{gaps}] (0.25 at every n: {literal}; "
                f"equal lam*2m/n: {gaps_formula}), Z(v_n) spread {z_spread:.1e}, "
                f"|Z - prediction| {z_pred_err:.1e}, concavity witness {witness_ok}")


def criterion_6():
    seq, limit = counterexample_sequence(64)
    zeta = BUILTIN_ZETAS["power23"]
    z_exact = all(zeta_integral(seq[k], zeta) == pytest.approx((2 * k) ** (2 / 3), rel=1e-15)
                  for k in range(1, 65))
    L_ok = all(seq[k].lipschitz_constant() == 2 * k for k in range(1, 65))
    rep = tau_convergence_check(seq, limit)
    v1_seq = {v1_of_domain(seq[k]) for k in range(1, 65)}
    ok = z_exact and L_ok and not rep.lipschitz and v1_seq == {1.0} and v1_of_domain(limit) == 0.0
    return ok, (f"Z(u_k)=(2k)^(2/3): {z_exact}, L_k=2k: {L_ok}, Lipschitz condition fails: "
                f"{not rep.lipschitz}, V1(dom u_k)={sorted(v1_seq)}, "
                f"V1(dom limit)={v1_of_domain(limit)}")


def criterion_7():
    corpus = tau_corpus(64)
    worst, not_tau = 0.0, []
    for seq, u in corpus:
        if not tau_convergence_check(seq, u).passed:
            not_tau.append(seq.name)
        worst = max(worst, abs(v1_of_domain(seq[64]) - v1_of_domain(u)))
    ok = len(corpus) == 10 and not not_tau and worst <= 1e-3
    return ok, f"{len(corpus)} sequences, non-tau {not_tau}, max |V1 gap| at k=64 {worst:.2e}"


def criterion_8():
    corpus = tau_corpus(64)
    bad = [spec.label for spec in BUILTIN_SPECS if not run_usc_suite(spec, corpus).passed]
    return not bad, f"12 specs x {len(corpus)} sequences, violating specs {bad}"


def criterion_9():
    sym = positive_case_approximant(HALF, 0.0, 0.1).ratio
    ratios = [positive_case_approximant(TWO_CURV, 0.01, e).ratio for e in (0.1, 0.05, 0.025)]
    decreasing = all(x > y for x, y in zip(ratios, ratios[1:]))
    return sym == 0.0 and decreasing, \
        f"symmetric ratio {sym!r}, asymmetric ratios {[f'{r:.4g}' for r in ratios]}"


def criterion_10():
    res = vitali_decompose(HALF, 0.1, 0.25, BUILTIN_ZETAS["power13"])
    cert = res.certificate
    bound = 0.1 * v1_of_domain(HALF)
    ok = cert["pass"] and cert["gap"] <= bound
    return ok, f"gap {cert['gap']:.3e} <= {bound:g}, {len(res.cells)} cells, " \
               f"{len(res.residuals)} residual chords"


def criterion_11():
    gap = exact_sup_gap(chord_approximation(HALF, 2), HALF)
    over = []
    for name, u in chord_targets().items():
        for n in range(1, 65):
            if chord_approximation(u, n).lipschitz_constant() > u.lipschitz_constant() + 1e-12:
                over.append((name, n))
    ok = abs(gap - 0.125) <= 1e-12 and not over
    return ok, f"sup gap {gap!r}, Lipschitz exceedances {over}"


def _artifacts(seed):
    suite = run_valuation_suite(STUBS["v1_squared"], PairGeneratorConfig(count=200, seed=seed))
    svg1 = plot_stitch(stitch(StitchParams(0, 1, 2, 1, 8)))
    seq = FunctionSequence(lambda k: chord_approximation(HALF, k), 16, "chords")
    svg2 = plot_sequence(sequence_report(seq, HALF, BUILTIN_SPECS[1]))
    return suite.to_json().encode(), svg1.encode(), svg2.encode()


def criterion_12():
    a, b = _artifacts(11), _artifacts(11)
    same = [x == y for x, y in zip(a, b)]
    differs = _artifacts(12)[0] != a[0]
    return all(same) and differs, f"suite JSON, stitch SVG, sequence SVG identical: {same}; " \
                                  f"other seed differs: {differs}"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 13)}


def _line(n, ok, detail):
    return f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("n", list(CRITERIA))
def test_criterion(n, capsys):
    ok, detail = CRITERIA[n]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(_line(n, ok, detail))
    sys.exit(1 if failed else 0)
