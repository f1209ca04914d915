import json
import math

import numpy as np
import pytest
from scipy import optimize

from sobolab.harness import (
    CorpusError,
    CorpusSpec,
    ParameterError,
    Resources,
    aggregate,
    derive_params,
    evaluate_case,
    hedberg_chain,
    hedberg_check,
    members,
    parse_descriptor,
    perturb_beta,
    refinement_study,
    run_corpus,
    sample,
    scaling_check,
)
from sobolab.harness.report import dumps
from sobolab.rearrange import WeightProfile
from sobolab.spectral import GridFunction, build_grid


@pytest.fixture(scope="module")
def grid512():
    return build_grid(1, 512, 40.0)


# parameter algebra -------------------------------------------------------------

def test_thm1_derivation():
    c = derive_params("thm1", q=2, s=0)
    assert c.beta == 1.0 and c.theta == 0.5
    assert c.beta == pytest.approx(c.theta / (1 - c.theta))


def test_thm2_derivation():
    c = derive_params("thm2", s=1, beta=1, p=2, q=4)
    assert c.id == "thm2-lorentz"
    assert c.theta == 0.5 and c.s1 == 0.0
    assert -c.beta < c.s1 < c.s
    # default weight t^{p/q - 1}
    assert c.w.alpha == pytest.approx(-0.5)


@pytest.mark.parametrize(
    "cid,given,message",
    [
        ("thm1", dict(q=2, s=0.6), "s < 1/q violated"),
        ("thm1", dict(q=1, s=0), "1 < q violated"),
        ("thm2", dict(s=1, beta=1, p=4, q=2), "p < q violated"),
        ("thm2", dict(s=1, beta=-0.5, p=2, q=4), "beta > 0 violated"),
        ("thm2", dict(s=1, beta=1, p=2, q=4, w=WeightProfile.power(1.0, 1.5)), "w in B_p violated"),
        ("thm3", dict(s=1, beta=1, p=2, q=4, a=1.0), "0 <= a < n violated"),
        ("hedberg", dict(s=1, s1=1.2, beta=1), "0 <= s1 < s violated"),
        ("thm4", dict(q=2, s=0, omega_exponent=-1.5), "A_1 violated"),
        ("two-weight", dict(s=1, beta=1, p=2, q=4, q0=1.5), "two-weight condition violated"),
        ("nope", dict(), "unknown case id"),
    ],
)
def test_derivation_rejects(cid, given, message):
    with pytest.raises(ParameterError, match=message.replace("(", r"\(")):
        derive_params(cid, **given)


def test_hedberg_theta_inverts_s1_relation():
    c = derive_params("hedberg", s=1, s1=0.5, beta=1)
    assert c.theta == pytest.approx(0.75)
    assert c.theta * c.s - (1 - c.theta) * c.beta == pytest.approx(c.s1)


def test_two_weight_default_pair():
    c = derive_params("two-weight", s=1, beta=1, p=2, q=4)
    assert c.q0 == 2.0 and c.v.alpha == 0.0 and c.w.alpha == 0.0


def test_perturbed_case_is_marked():
    c = perturb_beta(derive_params("thm1", q=2, s=0), 0.5)
    assert c.control and c.beta == 1.5


# evaluation --------------------------------------------------------------------

def test_zero_function_flagged(grid512):
    case = derive_params("thm1", q=2, s=0)
    rec = evaluate_case(case, GridFunction.zeros(grid512))
    assert rec.lhs == rec.factor_A == rec.factor_B == 0.0
    assert math.isnan(rec.ratio) and rec.flagged and rec.note == "undefined 0/0"


@pytest.mark.parametrize(
    "cid,given",
    [
        ("thm1", dict(q=3, s=0.1)),
        ("thm2", dict(s=1, beta=1, p=2, q=4)),
        ("cor-weak", dict(s=1, beta=1, p=2, q=4)),
        ("two-weight", dict(s=1, beta=1, p=2, q=4)),
        ("thm3", dict(s=1, beta=1, p=2, q=4, a=0.5)),
        ("thm4", dict(q=2, s=0)),
        ("hedberg", dict(s=1, s1=0.5, beta=1)),
    ],
)
def test_ratio_amplitude_invariant(grid512, cid, given):
    case = derive_params(cid, **given)
    f, _ = sample(members(CorpusSpec("dgauss", 1, 3))[0], grid512)
    res = Resources.build(case, grid512)
    r1 = evaluate_case(case, f, res).ratio
    r2 = evaluate_case(case, f * 7.3, res).ratio
    assert math.isfinite(r1) and r1 > 0
    assert r2 == pytest.approx(r1, rel=1e-12)


def test_thm1_double_bump_against_distribution_oracle(grid512):
    g = grid512
    f = parse_descriptor("bumps:2,5,mz", g)
    case = derive_params("thm1", q=2, s=0)
    rec = evaluate_case(case, f)

    def layer_cake(values, p):
        # p ∫ α^{p-1} |{|v| > α}| dα over the sorted levels
        levels = np.concatenate([[0.0], np.sort(np.abs(values.ravel()))])
        counts = levels.size - 1 - np.arange(levels.size - 1)
        return (g.cell_volume * math.fsum((levels[1:] ** p - levels[:-1] ** p) * counts)) ** (1 / p)

    k = np.fft.fftfreq(g.G, d=g.spacing) * 2 * np.pi
    coeffs = np.fft.fft(f.values)
    deriv = np.fft.ifft(1j * k * np.where(np.arange(g.G) == g.G // 2, 0, 1) * coeffs).real

    def weighted_sup(log_t):
        t = math.exp(log_t)
        ht = np.fft.ifft(coeffs * np.exp(-t * k ** 2)).real
        return t ** (case.beta / 2) * np.max(np.abs(ht))

    grid_t = np.linspace(math.log(0.1 / g.lambda_max), math.log((g.L / 8) ** 2), 400)
    vals = [weighted_sup(u) for u in grid_t]
    i = int(np.argmax(vals))
    best = optimize.minimize_scalar(
        lambda u: -weighted_sup(u), bounds=(grid_t[max(i - 1, 0)], grid_t[min(i + 1, 399)]),
        method="bounded", options={"xatol": 1e-12},
    )
    B = max(-best.fun, max(vals))
    lhs = layer_cake(f.values, 2.0)
    A = layer_cake(deriv, 1.0)
    oracle = lhs / (A ** case.theta * B ** (1 - case.theta))
    assert rec.lhs == pytest.approx(lhs, rel=1e-9)
    assert rec.factor_A == pytest.approx(A, rel=1e-9)
    assert rec.factor_B == pytest.approx(B, rel=1e-9)
    assert rec.ratio == pytest.approx(oracle, rel=1e-9)


def test_weak_ratio_bounded_by_strong_ratio_and_gap(grid512):
    strong = derive_params("thm2", s=1, beta=1, p=2, q=4)
    weak = derive_params("cor-weak", s=1, beta=1, p=2, q=4)
    for m in members(CorpusSpec("dgauss", 4, 2)):
        f, _ = sample(m, grid512)
        rs, rw = evaluate_case(strong, f), evaluate_case(weak, f)
        gap = rs.factor_A / rw.factor_A
        assert rw.ratio <= rs.ratio * gap ** strong.theta * (1 + 1e-12)


def test_resources_grid_mismatch(grid512):
    case = derive_params("thm1", q=2, s=0)
    res = Resources.build(case, build_grid(1, 256, 40.0))
    with pytest.raises(ValueError):
        evaluate_case(case, GridFunction.zeros(grid512), res)


# corpus runs ------------------------------------------------------------------

def test_corpus_of_one(grid512):
    rep = run_corpus(derive_params("thm1", q=2, s=0), CorpusSpec("dgauss", 1, 0), grid512)
    assert rep.aggregate["max_ratio"] == rep.aggregate["mean_ratio"]


def test_permutation_invariance(grid512):
    case = derive_params("thm1", q=2, s=0)
    mems = members(CorpusSpec("bumps", 6, 4))
    a = run_corpus(case, mems, grid512).aggregate
    b = run_corpus(case, list(reversed(mems)), grid512).aggregate
    for key in ("max_ratio", "mean_ratio", "min_ratio"):
        assert a[key] == pytest.approx(b[key], rel=1e-15, abs=0)


def test_aggregate_is_order_free():
    from sobolab.harness.evaluate import Record
    recs = [Record(i, 0, 1.0, 1.0, 1.0, r) for i, r in enumerate([0.1, 1e-17, 3.0, 0.7])]
    assert aggregate(recs) == aggregate(recs[::-1])
    assert aggregate(recs)["max_ratio"] >= aggregate(recs)["mean_ratio"]


def test_thm1_corpus_deterministic():
    g = build_grid(1, 512, 40.0)
    case = derive_params("thm1", q=2, s=0)
    spec = CorpusSpec("gaussian", 24, 7)
    a = run_corpus(case, spec, g).to_json()
    b = run_corpus(case, spec, g).to_json()
    assert a == b
    rep = json.loads(a)
    assert all(r["ratio"] is not None and r["ratio"] > 0 for r in rep["records"])


def test_parallel_matches_serial(grid512):
    case = derive_params("thm1", q=2, s=0)
    spec = CorpusSpec("dgauss", 4, 1)
    assert run_corpus(case, spec, grid512, jobs=2).to_json() == run_corpus(case, spec, grid512, jobs=1).to_json()


def test_control_case_skips_gate_but_invalid_case_is_refused(grid512):
    case = derive_params("thm1", q=2, s=0)
    bad = case.__class__(**{**case.__dict__, "beta": 3.0})
    with pytest.raises(ParameterError):
        run_corpus(bad, CorpusSpec("dgauss", 1), grid512)
    run_corpus(perturb_beta(case, 0.5), CorpusSpec("dgauss", 1), grid512)


def test_report_csv_and_nulls(grid512):
    rep = run_corpus(derive_params("thm1", q=2, s=0), CorpusSpec("zero", 2), grid512)
    assert rep.flagged
    lines = rep.to_csv().splitlines()
    assert lines[0] == "case,seed,index,lhs,factor_A,factor_B,ratio"
    assert lines[1].endswith(",null")
    assert json.loads(rep.to_json())["records"][0]["ratio"] is None
    assert dumps([0.1, float("inf")], indent=None) == "[0.10000000000000001, null]"


# corpus generation ------------------------------------------------------------

def test_corpus_members_fit_and_are_mean_zero(grid512):
    for fam in ("gaussian", "dgauss", "bumps", "modulated"):
        for m in members(CorpusSpec(fam, 8, 11)):
            assert m.support_width(grid512.L) <= grid512.L / 8
            f, removed = sample(m, grid512)
            assert abs(f.mean()) < 1e-12 * max(1.0, f.max_abs())


def test_corpus_member_regenerates_identically():
    spec = CorpusSpec("bumps", 3, 9)
    assert members(spec)[2].params == members(spec)[2].params


def test_corpus_rejects_wide_support(grid512):
    m = members(CorpusSpec("gaussian", 1, 0))[0]
    with pytest.raises(CorpusError):
        sample(m, grid512, dilation=0.2)


def test_corpus_parse():
    spec = CorpusSpec.parse("bumps:5,raw", seed=3)
    assert spec.family == "bumps" and spec.count == 5 and not spec.mean_zero
    with pytest.raises(CorpusError):
        CorpusSpec.parse("bumps:x")
    with pytest.raises(CorpusError):
        CorpusSpec.parse("sawtooth:3")


def test_descriptors():
    g = build_grid(1, 64, 8.0)
    assert np.all(parse_descriptor("const:2", g).values == 2.0)
    assert abs(parse_descriptor("mode:1,3,mz", g).mean()) < 1e-15
    gauss = parse_descriptor("gauss:2,4,0.5", g)
    assert gauss.values[32] == 2.0
    for bad in ("gauss:1,2", "wave:1", "const", "const:x"):
        with pytest.raises(CorpusError):
            parse_descriptor(bad, g)


# scaling and refinement -------------------------------------------------------------

def test_scaling_unit_factor_has_zero_spread(grid512):
    case = derive_params("thm1", q=2, s=0)
    res = scaling_check(case, CorpusSpec("dgauss", 3), grid512, factors=(1.0,))
    assert res.spread == 0.0 and not res.flagged


def test_amplitude_scaling_spread(grid512):
    case = derive_params("thm2", s=1, beta=1, p=2, q=4)
    res = scaling_check(case, CorpusSpec("dgauss", 2), grid512, factors=(0.1, 1.0, 13.0), mode="amplitude")
    assert res.spread < 1e-12


def test_scaling_rejects_wide_dilation(grid512):
    case = derive_params("thm1", q=2, s=0)
    with pytest.raises(ParameterError, match="L/8"):
        scaling_check(case, CorpusSpec("dgauss", 2), grid512, factors=(0.1, 1.0))


def test_refinement_zero_corpus():
    res = refinement_study(derive_params("thm1", q=2, s=0), CorpusSpec("zero", 2), [128, 256])
    assert res.constants == [0.0, 0.0] and not res.flagged


def test_refinement_rejects_unsorted():
    with pytest.raises(ValueError):
        refinement_study(derive_params("thm1", q=2, s=0), CorpusSpec("zero", 1), [256, 128])


# Hedberg ------------------------------------------------------------------------------

def test_hedberg_zero_function(grid512):
    assert hedberg_check(GridFunction.zeros(grid512), 1.0, 0.5, 1.0)["constant"] == 0.0


def test_hedberg_homogeneous(grid512):
    f, _ = sample(members(CorpusSpec("dgauss", 1, 5))[0], grid512)
    a = hedberg_check(f, 1.0, 0.5, 1.0)["constant"]
    b = hedberg_check(f * 4.2, 1.0, 0.5, 1.0)["constant"]
    assert math.isfinite(a) and b == pytest.approx(a, rel=1e-12)


def test_hedberg_chain_holds_with_own_constant(grid512):
    f, _ = sample(members(CorpusSpec("dgauss", 1, 6))[0], grid512)
    hc = hedberg_check(f, 1.0, 0.5, 1.0)
    ok, worst = hedberg_chain(hc["h"], hc["Mg"], hc["besov"], hc["theta"], hc["constant"], 4.0)
    assert ok and worst <= 1.0 + 1e-12
    ok, _ = hedberg_chain(hc["h"], hc["Mg"], hc["besov"], hc["theta"], 0.5 * hc["constant"], 4.0)
    assert not ok


def test_hedberg_s1_zero_uses_identity(grid512):
    f, _ = sample(members(CorpusSpec("dgauss", 1, 5))[0], grid512)
    hc = hedberg_check(f, 1.0, 0.0, 1.0)
    assert np.array_equal(hc["h"].values, f.values)


# two dimensions ----------------------------------------------------------------------------

@pytest.mark.parametrize(
    "cid,given",
    [
        ("thm1", dict(q=2, s=0)),
        ("thm2", dict(s=1, beta=1, p=2, q=4)),
        ("thm3", dict(s=1, beta=1, p=2, q=4, a=1.0)),
        ("thm4", dict(q=2, s=0, omega_exponent=-1.0)),
        ("hedberg", dict(s=1, s1=0.5, beta=1)),
    ],
)
def test_two_dimensional_smoke(cid, given):
    g = build_grid(2, 128, 40.0)
    case = derive_params(cid, n=2, **given)
    rep = run_corpus(case, CorpusSpec("gaussian", 2, 1), g)
    assert rep.aggregate["finite"] == 2 and not rep.flagged
