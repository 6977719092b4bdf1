import json

import pytest

from plqval.errors import GeneratorStarved
from plqval.functionals import BUILTIN_SPECS, ValuationSpec, v1_of_domain
from plqval.harness import (
    STUBS,
    PairGeneratorConfig,
    SuiteResult,
    acceptance_rate,
    counterexample_sequence,
    generate_valid_pairs,
    run_invariance_suite,
    run_roundtrip_suite,
    run_usc_suite,
    run_valuation_suite,
    tau_corpus,
)
from plqval.plq import PLQFunction, quadratic, valuation_quadruple
from plqval.zeta import BUILTIN_ZETAS


@pytest.fixture(scope="module")
def pairs():
    return generate_valid_pairs(PairGeneratorConfig(count=300, seed=7))


class TestGenerators:
    @pytest.mark.parametrize("strategy", ["domain_split", "tangent_chain", "rejection"])
    def test_every_pair_is_valid(self, strategy):
        for u, v in generate_valid_pairs(PairGeneratorConfig(strategy=strategy, count=60)):
            valuation_quadruple(u, v)

    def test_domain_split_shape(self):
        u, v = generate_valid_pairs(PairGeneratorConfig(strategy="domain_split", count=1))[0]
        assert u.domain.lo < v.domain.lo < u.domain.hi < v.domain.hi

    def test_domain_split_on_half_square(self):
        u = quadratic(0.5, 0, 0, -5, 5)
        a, b = u.restrict(0, 2), u.restrict(1, 3)
        lo, hi = valuation_quadruple(a, b)
        assert tuple(lo.domain) == (0, 3) and tuple(hi.domain) == (1, 2)

    def test_rejection_rate_reported(self):
        rate = acceptance_rate(PairGeneratorConfig(strategy="rejection"), draws=500)
        assert 0.001 < rate < 1

    def test_forced_starvation(self):
        cfg = PairGeneratorConfig(strategy="rejection", count=5, length_range=(1e-9, 2e-9),
                                  max_draws=20_000)
        with pytest.raises(GeneratorStarved, match="accepted 0"):
            generate_valid_pairs(cfg)

    def test_mixed_count(self):
        assert len(generate_valid_pairs(PairGeneratorConfig(count=10))) == 10

    @pytest.mark.parametrize("kw", [{"count": 0}, {"strategy": "uniform"},
                                    {"length_range": (1.0, 1.0)}, {"curvature_range": (-1, 1)}])
    def test_bad_config(self, kw):
        with pytest.raises(ValueError):
            PairGeneratorConfig(**kw)


class TestValuationSuite:
    @pytest.mark.parametrize("spec", BUILTIN_SPECS, ids=lambda s: s.label)
    def test_builtins_pass(self, spec, pairs):
        res = run_valuation_suite(spec, pairs=pairs)
        assert res.passed and res.cases == 300

    def test_v1_passes(self, pairs):
        assert run_valuation_suite(v1_of_domain, pairs=pairs).passed

    def test_squared_length_fails_with_counterexample(self, pairs):
        res = run_valuation_suite(STUBS["v1_squared"], pairs=pairs)
        assert not res.passed and res.n_failures <= res.cases
        case = res.failures[0]
        u, v = PLQFunction.from_dict(case["u"]), PLQFunction.from_dict(case["v"])
        replay = run_valuation_suite(STUBS["v1_squared"], pairs=[(u, v)])
        assert replay.max_residual == pytest.approx(case["residual"], rel=1e-12)

    def test_failures_roundtrip_json(self, pairs):
        res = run_valuation_suite(STUBS["v1_squared"], pairs=pairs)
        back = json.loads(res.to_json())
        assert back["n_failures"] == res.n_failures
        for f in back["failures"]:
            PLQFunction.from_dict(f["u"])


class TestInvarianceSuite:
    def test_builtins_pass(self):
        for spec in BUILTIN_SPECS[:4]:
            assert run_invariance_suite(spec, cases=200).passed

    def test_midpoint_stub_fails_translation(self):
        res = run_invariance_suite(STUBS["plus_midpoint"], cases=100)
        assert res.notes["failures_by_kind"] == {"translation": 100, "affine": 0}

    def test_center_value_stub_fails_affine(self):
        res = run_invariance_suite(STUBS["plus_center_value"], cases=100)
        kinds = res.notes["failures_by_kind"]
        assert kinds["affine"] > 0 and kinds["translation"] == 0


@pytest.fixture(scope="module")
def corpus():
    return tau_corpus() + [counterexample_sequence()]


class TestUscSuite:
    def test_builtin_passes_and_counterexample_out_of_scope(self, corpus):
        res = run_usc_suite(ValuationSpec(1, 2, BUILTIN_ZETAS["power23"]), corpus)
        assert res.passed
        assert res.notes["out_of_scope"] == ["counterexample"]
        assert len(res.notes["verdicts"]) == 10

    def test_corpus_is_tau_passing(self, corpus):
        from plqval.convergence import tau_convergence_check
        for seq, u in corpus[:-1]:
            assert tau_convergence_check(seq, u).passed, seq.name


class TestRoundtrip:
    def test_all_builtins(self):
        res = run_roundtrip_suite()
        assert res.passed and res.cases == 12 and res.max_residual < 1e-10

    def test_detects_wrong_spec(self):
        wrong = ValuationSpec(1, 2, BUILTIN_ZETAS["power13"])

        class Liar:
            label = "liar"
            c0, c1, zeta = 1.0, 2.0, BUILTIN_ZETAS["power23"]

            def __call__(self, u):
                return wrong(u)

        assert not run_roundtrip_suite([Liar()]).passed


def test_determinism():
    a = run_valuation_suite(STUBS["v1_squared"], PairGeneratorConfig(count=90, seed=3))
    b = run_valuation_suite(STUBS["v1_squared"], PairGeneratorConfig(count=90, seed=3))
    assert a.to_json() == b.to_json()
    c = run_valuation_suite(STUBS["v1_squared"], PairGeneratorConfig(count=90, seed=4))
    assert c.to_json() != a.to_json()


def test_suite_result_counts():
    r = SuiteResult("x", 3)
    r.record(0.5, True, {})
    r.record(0.1, False, {})
    assert (r.n_failures, r.max_residual, r.passed) == (1, 0.5, False)
