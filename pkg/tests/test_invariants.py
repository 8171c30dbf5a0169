"""Cross-module invariants: consistency, scaling and refinement properties."""

import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratiomono.classifier import (
    RegionLabel,
    classify_region,
    find_turning_point,
    predict_series_ratio,
    predict_transform_ratio,
    psi_expression,
    q_function,
)
from ratiomono.cli import main
from ratiomono.kernels import CONTINUOUS_KERNELS, DISCRETE_KERNELS, GridSpec, eval_continuous, eval_discrete
from ratiomono.oracle import detect_pattern
from ratiomono.patterns import Pattern
from ratiomono.ratio_engine import (
    LOWER,
    SeriesRatioProblem,
    TransformRatioProblem,
    endpoint_limit_H,
    eval_H,
    eval_ratio,
    eval_series,
    eval_transform,
    ratio_derivative_via_H,
)
from ratiomono.sources import (
    ConstIntegrand,
    GammaPdf,
    PolyExpIntegrand,
    PolyGeometricCoefficients,
    ReciprocalGammaCoefficients,
    ScaledCoefficients,
    constant_sequence,
)
from ratiomono.stochastic import (
    X_LE_Y,
    Y_LE_X,
    exponential,
    gamma,
    geometric_rv,
    laplace_transform,
    lt_ratio_order,
    poisson_rv,
    size_biased_geometric_rv,
    uniform,
)

# -- kernels ------------------------------------------------------------------


def test_kernel_values_positive_on_default_grid():
    g = GridSpec()
    ts = np.geomspace(g.lo, g.hi, g.n)
    for kern in DISCRETE_KERNELS.values():
        for k in range(g.k_max + 1):
            assert all(eval_discrete(kern, k, t) > 0 for t in ts if t < 30.0)
    for kern in CONTINUOUS_KERNELS.values():
        for t in np.linspace(max(g.t_lo, 1e-3), g.t_hi, g.n_t):
            assert all(eval_continuous(kern, t, x) > 0 for x in ts if x < 30.0)


# -- ratio engine -------------------------------------------------------------


coef = st.lists(st.floats(0.1, 5.0), min_size=2, max_size=5)


@given(coef, st.floats(0.1, 3.0), st.sampled_from(["PowerK", "ExpDecayK"]))
def test_h_of_a_source_with_itself_vanishes(a, t, family):
    p = SeriesRatioProblem(a, a, family)
    assert abs(eval_H(p, t).normalized) < 1e-13


def test_truncation_honesty():
    loose = SeriesRatioProblem(ReciprocalGammaCoefficients(1.5, 0.7), ReciprocalGammaCoefficients(1, 1), "PowerK", tol=1e-8)
    tight = SeriesRatioProblem(ReciprocalGammaCoefficients(1.5, 0.7), ReciprocalGammaCoefficients(1, 1), "PowerK", tol=5e-9)
    for t in (0.5, 3.0, 12.0):
        coarse = eval_series(loose, "a", t)
        assert abs(eval_series(tight, "a", t).value - coarse.value) <= coarse.abs_error_bound
    f = GammaPdf(2.0, 1.0)
    loose = TransformRatioProblem(f, ConstIntegrand(1.0), "ExpDecayX", tol=1e-8)
    tight = TransformRatioProblem(f, ConstIntegrand(1.0), "ExpDecayX", tol=5e-9)
    for x in (0.2, 1.0, 7.0):
        coarse = eval_transform(loose, "f", x)
        assert abs(eval_transform(tight, "f", x).value - coarse.value) <= coarse.abs_error_bound


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=5), st.lists(st.floats(0.1, 3), min_size=2, max_size=5))
def test_converged_ladder_matches_closed_form(a, b):
    p = SeriesRatioProblem(a, b, "PowerK", r=2.0)
    lim = endpoint_limit_H(p, LOWER)
    cf = b[0] * (a[1] / b[1] - a[0] / b[0])
    if lim.confidence == "Converged" and abs(cf) > 1e-6:
        assert lim.sign == ("Positive" if cf > 0 else "Negative")


# -- classifier ---------------------------------------------------------------


def test_partition_is_stable_under_tiny_perturbations():
    rng = np.random.default_rng(11)
    for _ in range(10000):
        a, b, c, d = rng.uniform(0.05, 20, 4)
        region = classify_region(a, b, c, d)
        for delta in rng.choice([-1e-12, 1e-12], size=(2, 4)):
            q = np.array([a, b, c, d]) + delta
            moved = classify_region(*q)
            if moved == region:
                continue
            expr, band = psi_expression(a, b, c, d)
            moved_expr, _ = psi_expression(*q)
            near_band = abs(expr) <= band + abs(moved_expr - expr)
            near_edge = abs(a - c) < 1e-11 or abs(b - d) < 1e-11
            assert near_band or near_edge, (a, b, c, d, region, moved)


def test_q_decreases_across_the_d4_bracket():
    rng = np.random.default_rng(12)
    seen = 0
    while seen < 50:
        a, b, c, d = rng.uniform(0.05, 20, 4)
        if classify_region(a, b, c, d) != RegionLabel.D4:
            continue
        seen += 1
        t0 = find_turning_point(a, b, c, d)
        ts = np.linspace(0.0, 2.0 * t0 + 1.0, 200)
        qs = np.array([q_function(a, b, c, d, t) for t in ts])
        assert np.all(np.diff(qs) < 0)


@given(st.floats(0.01, 100.0))
def test_scaling_numerator_scales_h(lam):
    base = SeriesRatioProblem([1, 2, 1.5, 1, 0.6], constant_sequence(1.0), "ExpDecayK")
    scaled = SeriesRatioProblem(ScaledCoefficients(base.a, lam), constant_sequence(1.0), "ExpDecayK")
    for t in (0.3, 1.0, 4.0):
        assert eval_H(scaled, t).value == pytest.approx(lam * eval_H(base, t).value, rel=1e-12, abs=1e-300)
    v0, v1 = predict_series_ratio(base), predict_series_ratio(scaled)
    assert v0.pattern == v1.pattern
    assert v0.turning_point == pytest.approx(v1.turning_point, rel=1e-8)


# -- oracle -------------------------------------------------------------------


@pytest.mark.parametrize("fn,interval", [
    (np.exp, (0, 5)),
    (lambda t: -np.log1p(t), (0, 100)),
    (lambda t: t / (1 + t), (1e-3, 1e3)),
    (lambda t: np.arctan(t) ** 3, (0.01, 40)),
])
def test_refinement_keeps_monotone_patterns(fn, interval):
    coarse = detect_pattern(fn, interval, n=256)
    fine = detect_pattern(fn, interval, n=1024)
    assert coarse.pattern.monotone and coarse.pattern == fine.pattern


def _problems():
    return [
        (SeriesRatioProblem([1, 2, 1.5, 1, 0.6], constant_sequence(1.0), "ExpDecayK"), (0.05, 8)),
        (SeriesRatioProblem(ReciprocalGammaCoefficients(2, 0.1), ReciprocalGammaCoefficients(1, 5), "PowerK"), (0.05, 20)),
        (TransformRatioProblem(PolyExpIntegrand([1, 1], 0.5), ConstIntegrand(1.0), "ExpDecayX"), (0.05, 8)),
        (TransformRatioProblem(GammaPdf(2.0, 1.0), GammaPdf(3.0, 2.0), "ExpDecayX"), (0.05, 8)),
    ]


@pytest.mark.parametrize("problem,interval", _problems())
def test_derivative_sign_two_ways(problem, interval):
    h = lambda p: 1e-4 * p
    via_h = detect_pattern(lambda p: ratio_derivative_via_H(problem, p), interval, n=128, vectorized=False)
    direct = detect_pattern(
        lambda p: (eval_ratio(problem, p + h(p)) - eval_ratio(problem, p - h(p))) / (2 * h(p)),
        interval, n=128, vectorized=False)
    assert via_h.pattern == direct.pattern
    # sign of the derivative at each point
    for p in np.geomspace(*interval, 16):
        d = ratio_derivative_via_H(problem, p)
        fd = (eval_ratio(problem, p + h(p)) - eval_ratio(problem, p - h(p))) / (2 * h(p))
        if abs(d) > 1e-8 * abs(eval_ratio(problem, p)):
            assert np.sign(d) == np.sign(fd)


# -- stochastic ---------------------------------------------------------------

MODELS = [exponential(1.5), gamma(2.5, 1.0), uniform(3.0), geometric_rv(0.4), size_biased_geometric_rv(0.6),
          poisson_rv(3.0)]


@pytest.mark.parametrize("rv", MODELS, ids=lambda r: r.describe()["name"])
def test_transforms_positive_decreasing_convex(rv):
    xs = np.geomspace(1e-3, 30, 60)
    L = np.array([laplace_transform(rv, x).value for x in xs])
    assert np.all(L > 0)
    assert np.all(np.diff(L) < 0)
    # convexity on a log grid: slopes increase
    slopes = np.diff(L) / np.diff(xs)
    assert np.all(np.diff(slopes) > -1e-9)
    assert laplace_transform(rv, 1e-9).value == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("X,Y", [
    (exponential(1.0), exponential(3.0)),
    (gamma(2.0, 1.0), exponential(1.0)),
    (size_biased_geometric_rv(0.3), geometric_rv(0.3)),
    (geometric_rv(0.2), geometric_rv(0.7)),
])
def test_theorem_never_contradicted_by_fallback(X, Y):
    v = lt_ratio_order(X, Y, check=True)
    assert v.provenance.startswith("condition")
    assert v.diagnostics["fallback"]["relation"] in (v.relation, "Inconclusive")


def test_exponential_chain_is_transitive():
    l1, l2, l3 = 0.5, 1.5, 4.0
    r12 = lt_ratio_order(exponential(l1), exponential(l2)).relation
    r23 = lt_ratio_order(exponential(l2), exponential(l3)).relation
    r13 = lt_ratio_order(exponential(l1), exponential(l3)).relation
    assert r12 == r23 == r13 == Y_LE_X


# -- cli ------------------------------------------------------------------------


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    return main(list(argv), out, err), out.getvalue(), err.getvalue()


@pytest.mark.parametrize("argv", [
    ("classify-gamma", "2", "0.1", "1", "5", "--verify"),
    ("predict", "transform", "--kernel", "explace", "--f", "poly:t", "--g", "const:1", "--alpha", "1", "--beta", "2"),
    ("lt-order", "--x", "exp:1", "--y", "exp:1"),
])
def test_json_round_trip(argv):
    code, out, _ = _run(*argv)
    assert code == 0
    assert json.dumps(json.loads(out), sort_keys=True, indent=2) + "\n" == out


def test_disagreement_exits_2():
    # a noise floor this coarse flattens the observed ratio to a constant
    code, out, _ = _run("classify-gamma", "1", "1", "1", "2", "--verify", "--noise-floor", "10")
    assert code == 2
    assert json.loads(out)["crosscheck"]["status"] == "disagree"
