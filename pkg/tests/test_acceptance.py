"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import io
import math
import sys
import time

import numpy as np
from scipy.special import digamma as sp_digamma
from scipy.special import gammaln, logsumexp

from ratiomono.classifier import (
    RegionLabel,
    classify_region,
    gamma_ratio_pattern,
    predict_de_ratio,
    predict_series_ratio,
)
from ratiomono.cli import main
from ratiomono.kernels import CONTINUOUS_KERNELS, DISCRETE_KERNELS, verify_class_conditions
from ratiomono.oracle import crosscheck, detect_pattern, make_grid, observe
from ratiomono.ratio_engine import (
    LOWER,
    SeriesRatioProblem,
    TransformRatioProblem,
    endpoint_limit_H,
    eval_ratio,
    ratio_derivative_via_H,
)
from ratiomono.sources import (
    ConstIntegrand,
    FiniteCoefficients,
    GammaPdf,
    PolyExpIntegrand,
    PolyGeometricCoefficients,
    ReciprocalGammaCoefficients,
    ReciprocalGammaIntegrand,
    UniformPdf,
    constant_sequence,
    geometric,
)
from ratiomono.specfun import digamma, mittag_leffler
from ratiomono.stochastic import X_LE_Y, Y_LE_X, exponential, geometric_rv, lt_ratio_order, size_biased_geometric_rv

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:
    ACCEPTANCE_LINES = []

PARAM_BOX = (0.05, 20.0)


def report(number, ok, detail, elapsed, limit=None):
    within = limit is None or elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    budget = f" (limit {limit:g} s)" if limit is not None else ""
    line = f"criterion {number}: {status} - {detail}; {elapsed:.2f} s{budget}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok and within


# -- 1 ------------------------------------------------------------------------


def test_criterion_1_special_function_identities():
    start = time.perf_counter()
    worst = 0.0
    for t in np.geomspace(1e-3, 20.0, 50):
        for (a, b), exact in (
            ((1, 1), math.exp(t)),
            ((1, 2), math.expm1(t) / t),
            ((2, 1), math.cosh(math.sqrt(t))),
        ):
            worst = max(worst, abs(mittag_leffler(a, b, t).value - exact) / exact)
    rec = 0.0
    for x in np.geomspace(0.01, 100.0, 200):
        rec = max(rec, abs(digamma(x + 1).value - digamma(x).value - 1.0 / x))
    # independent check of the digamma values themselves
    xs = np.geomspace(0.01, 100.0, 200)
    vs = max(abs(digamma(x).value - sp_digamma(x)) for x in xs)
    ok = worst <= 1e-10 and rec <= 1e-10 and vs <= 1e-10
    detail = f"Mittag-Leffler max rel err {worst:.2e}, digamma recurrence max err {rec:.2e}, vs scipy {vs:.2e}"
    assert report(1, ok, detail, time.perf_counter() - start, 1.0)


# -- 2 ------------------------------------------------------------------------


def test_criterion_2_kernel_class_table():
    start = time.perf_counter()
    failures = []
    n = 0
    for table in (DISCRETE_KERNELS, CONTINUOUS_KERNELS):
        for kern in table.values():
            for cls in sorted(kern.declared):
                n += 1
                if not verify_class_conditions(kern, cls).passed:
                    failures.append(f"{kern.id}/{cls}")
    control = verify_class_conditions("PowerK", "DW12").passed
    ok = not failures and not control
    detail = f"{n - len(failures)}/{n} declared pairs pass, negative control PowerK/DW12 " + (
        "wrongly passes" if control else "fails as planted")
    if failures:
        detail += "; failing: " + ", ".join(failures)
    assert report(2, ok, detail, time.perf_counter() - start, 5.0)


# -- 3 ------------------------------------------------------------------------


def _identity_problems():
    series = [
        (SeriesRatioProblem([1, 2, 1.5, 1, 0.6], constant_sequence(1.0), "PowerK", r=0.9), (0.01, 0.89)),
        (SeriesRatioProblem([3, -1, 2, 0.5], [1, 2, 1], "PowerK", r=5.0), (0.05, 4.9)),
        (SeriesRatioProblem(ReciprocalGammaCoefficients(1, 2), ReciprocalGammaCoefficients(1, 1), "PowerK"), (0.05, 20)),
        (SeriesRatioProblem(ReciprocalGammaCoefficients(2, 0.1), ReciprocalGammaCoefficients(1, 5), "PowerK"), (0.05, 20)),
        (SeriesRatioProblem([1, 2, 1.5, 1, 0.6], constant_sequence(1.0), "ExpDecayK"), (0.05, 10)),
        (SeriesRatioProblem(PolyGeometricCoefficients([1, 1], 0.6), constant_sequence(1.0), "ExpDecayK"), (0.05, 10)),
        (SeriesRatioProblem(ReciprocalGammaCoefficients(1, 2), ReciprocalGammaCoefficients(1, 1), "ExpDecayK"), (0.05, 10)),
        (SeriesRatioProblem(geometric(0.5), PolyGeometricCoefficients([1, 2], 0.5), "InversePowerK"), (0.6, 20)),
        (SeriesRatioProblem([2, 1, 3], [1, 1, 1], "InversePowerK"), (0.1, 10)),
        (SeriesRatioProblem(ReciprocalGammaCoefficients(1, 1), ReciprocalGammaCoefficients(0.5, 1), "DirichletK"), (0.05, 8)),
    ]
    f1 = PolyExpIntegrand([1.0, 1.0], 0.5)
    transforms = [
        (TransformRatioProblem(f1, ConstIntegrand(1.0), "ExpDecayX"), (0.05, 10)),
        (TransformRatioProblem(PolyExpIntegrand([0, 1]), ConstIntegrand(1.0), "ExpDecayX", 1, 2), (0.05, 10)),
        (TransformRatioProblem(GammaPdf(2.0, 1.0), GammaPdf(3.0, 2.0), "ExpDecayX"), (0.05, 10)),
        (TransformRatioProblem(UniformPdf(2.0), UniformPdf(3.0), "ExpDecayX"), (0.05, 10)),
        (TransformRatioProblem(PolyExpIntegrand([0, 1]), ConstIntegrand(1.0), "PowerX", 0.5, 2.0), (0.05, 10)),
        (TransformRatioProblem(PolyExpIntegrand([1, 0, 1]), PolyExpIntegrand([2, 1]), "InversePowerX", 1.0, 3.0), (0.05, 10)),
        (TransformRatioProblem(PolyExpIntegrand([1.0], 2.0), PolyExpIntegrand([1.0], 1.0), "ShiftedPowerX"), (0.1, 10)),
        (TransformRatioProblem(GammaPdf(2.0, 1.0), PolyExpIntegrand([1.0], 1.0), "MellinX"), (0.2, 8)),
        (TransformRatioProblem(ReciprocalGammaIntegrand(2, 3), ReciprocalGammaIntegrand(1, 1), "ExpDecayX"), (0.05, 10)),
        (TransformRatioProblem(ReciprocalGammaIntegrand(1, 0.5), ReciprocalGammaIntegrand(2, 0.3), "ExpDecayX"), (0.05, 10)),
    ]
    return series + transforms


def _five_point(fn, p, h):
    return (fn(p - 2 * h) - 8 * fn(p - h) + 8 * fn(p + h) - fn(p + 2 * h)) / (12 * h)


def test_criterion_3_fundamental_identity():
    start = time.perf_counter()
    problems = _identity_problems()
    worst = 0.0
    bad = []
    checked = 0
    for problem, (lo, hi) in problems:
        tol = max(1e-6, 100 * problem.tol)
        pts = np.geomspace(lo, hi, 102)[1:-1]
        for p in pts:
            h = 1e-3 * p
            fd = _five_point(lambda s: eval_ratio(problem, s), p, h)
            via = ratio_derivative_via_H(problem, p)
            # derivative scale: |R'| itself, or |R| / p where R' is small
            scale = max(abs(via), abs(eval_ratio(problem, p)) / p)
            err = abs(fd - via) / scale
            worst = max(worst, err / tol)
            checked += 1
            if err > tol:
                bad.append((problem.describe(), float(p), err))
    ok = not bad and len(problems) == 20
    detail = f"{checked} points over {len(problems)} problems, worst error {worst:.2e} of tolerance"
    if bad:
        detail += f"; {len(bad)} failures, first {bad[0]}"
    assert report(3, ok, detail, time.perf_counter() - start, 30.0)


# -- 4 ------------------------------------------------------------------------


def test_criterion_4_power_series_endpoint():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    counted = mismatched = 0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        a = rng.uniform(-3, 3, n)
        b = rng.uniform(0.1, 3, n)
        cf = b[0] * (a[1] / b[1] - a[0] / b[0])
        if abs(cf) <= 1e-6:
            continue
        problem = SeriesRatioProblem(FiniteCoefficients(a), FiniteCoefficients(b), "PowerK", r=float(rng.uniform(0.5, 5)))
        ladder = endpoint_limit_H(problem, LOWER).sign
        counted += 1
        if ladder != ("Positive" if cf > 0 else "Negative"):
            mismatched += 1
    ok = mismatched == 0 and counted > 0
    detail = f"{counted - mismatched}/{counted} ladder signs match b0(a1/b1 - a0/b0)"
    assert report(4, ok, detail, time.perf_counter() - start, 10.0)


# -- 5 ------------------------------------------------------------------------


def _draw(rng, region):
    lo, hi = PARAM_BOX
    while True:
        a, b, c, d = (float(v) for v in rng.uniform(lo, hi, 4))
        if region == RegionLabel.D1:
            c = a
        if classify_region(a, b, c, d) == region:
            return a, b, c, d


def test_criterion_5_gamma_ratio_vs_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    pts, _ = make_grid((1e-3, 50.0), 4096, "log")
    total = agree = excluded = 0
    failures = []
    for region in RegionLabel:
        for _ in range(200):
            a, b, c, d = _draw(rng, region)
            obs = observe(pts, gammaln(c * pts + d) - gammaln(a * pts + b), spacing="log", interval=(1e-3, 50.0))
            if obs.pattern.value == "Other":
                excluded += 1
                continue
            total += 1
            rep = crosscheck(gamma_ratio_pattern(a, b, c, d), obs)
            if rep.agree:
                agree += 1
            else:
                failures.append((region.value, (a, b, c, d), rep.detail))
    ok = agree == total
    detail = f"{agree}/{total} agree ({100.0 * agree / total:.2f}%), {excluded} oracle-Other draws excluded"
    if failures:
        detail += f"; first disagreement {failures[0]}"
    assert report(5, ok, detail, time.perf_counter() - start, 180.0)


# -- 6 ------------------------------------------------------------------------


def _log_ml_ratio(a, b, c, d, ts, terms=20000):
    k = np.arange(terms, dtype=float)[:, None]
    lt = np.log(ts)[None, :]
    num = logsumexp(k * lt - gammaln(a * k + b), axis=0)
    den = logsumexp(k * lt - gammaln(c * k + d), axis=0)
    return num - den


def test_criterion_6_two_path_consistency():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    regions = list(RegionLabel)
    same = agree = 0
    failures = []
    pts, _ = make_grid((1e-3, 30.0), 512, "log")
    n = 50
    for i in range(n):
        region = regions[i % len(regions)]
        while True:
            a, c = (float(v) for v in rng.uniform(1.0, 5.0, 2))
            b, d = (float(v) for v in rng.uniform(*PARAM_BOX, 2))
            if region == RegionLabel.D1:
                c = a
            if classify_region(a, b, c, d) == region:
                break
        v1 = predict_de_ratio(a, b, c, d, "PowerK", r=30.0)
        problem = SeriesRatioProblem(ReciprocalGammaCoefficients(a, b), ReciprocalGammaCoefficients(c, d),
                                     "PowerK", r=30.0)
        v2 = predict_series_ratio(problem)
        paths = v1.pattern == v2.pattern and (
            not v1.pattern.unimodal or math.isclose(v1.turning_point, v2.turning_point, rel_tol=1e-6))
        same += paths
        obs = observe(pts, _log_ml_ratio(a, b, c, d, pts), spacing="log", interval=(1e-3, 30.0))
        ok_obs = crosscheck(v1, obs).agree and crosscheck(v2, obs).agree
        agree += ok_obs
        if not (paths and ok_obs):
            failures.append((region.value, (a, b, c, d), v1.pattern.value, v2.pattern.value, obs.pattern.value))
    ok = same == n and agree == n
    detail = f"paths agree {same}/{n}, oracle agrees {agree}/{n}"
    if failures:
        detail += f"; first failure {failures[0]}"
    assert report(6, ok, detail, time.perf_counter() - start, 120.0)


# -- 7 ------------------------------------------------------------------------


def test_criterion_7_laplace_order():
    start = time.perf_counter()
    lams = np.geomspace(0.2, 5.0, 10)
    off = match = 0
    for l1 in lams:
        for l2 in lams:
            if l1 == l2:
                continue
            off += 1
            # d/dx L_X/L_Y = l1 (l1 - l2) / (l2 (l1 + x)^2): increasing iff l1 > l2, so L_Y/L_X decreasing
            expected = X_LE_Y if l1 > l2 else Y_LE_X
            match += lt_ratio_order(exponential(l1), exponential(l2)).relation == expected
    geo = lt_ratio_order(size_biased_geometric_rv(0.4), geometric_rv(0.4))
    # p_k/q_k = (1 - rho)(k + 1) increases, so the size-biased variable dominates
    geo_ok = geo.relation == Y_LE_X and geo.provenance.startswith("condition (i)")
    ok = match == off and geo_ok
    detail = f"exponential grid {match}/{off} off-diagonal matches; size-biased vs plain geometric {geo.relation}"
    assert report(7, ok, detail, time.perf_counter() - start, 30.0)


# -- 8 ------------------------------------------------------------------------


def test_criterion_8_determinism():
    start = time.perf_counter()
    outs = []
    codes = []
    for _ in range(2):
        out, err = io.StringIO(), io.StringIO()
        codes.append(main(["verify-suite", "--seed", "42"], out, err))
        outs.append(out.getvalue())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    detail = f"two runs {'byte-identical' if ok else 'differ'} ({len(outs[0])} bytes), exit codes {codes}"
    assert report(8, ok, detail, time.perf_counter() - start)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
