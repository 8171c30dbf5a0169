import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratiomono.errors import DomainError
from ratiomono.stochastic import (
    INCONCLUSIVE,
    NEITHER,
    X_LE_Y,
    Y_LE_X,
    OrderVerdict,
    exponential,
    fallback_order,
    gamma,
    geometric_rv,
    laplace_transform,
    log_laplace_transform,
    lt_ratio_order,
    pmf_rv,
    poisson_rv,
    read_pmf_file,
    size_biased_geometric_rv,
    uniform,
)

x_st = st.floats(0.01, 20.0)


@given(st.floats(0.1, 10.0), x_st)
def test_exponential_transform(lam, x):
    assert laplace_transform(exponential(lam), x).value == pytest.approx(lam / (lam + x), rel=1e-10)


@given(st.floats(0.5, 5.0), st.floats(0.2, 5.0), x_st)
def test_gamma_transform(shape, rate, x):
    assert laplace_transform(gamma(shape, rate), x).value == pytest.approx((rate / (rate + x)) ** shape, rel=1e-9)


@given(st.floats(0.5, 8.0), x_st)
def test_uniform_transform(theta, x):
    exact = -math.expm1(-theta * x) / (theta * x)
    assert laplace_transform(uniform(theta), x).value == pytest.approx(exact, rel=1e-10)


@given(st.floats(0.05, 0.95), x_st)
def test_geometric_transforms(rho, x):
    z = rho * math.exp(-x)
    assert laplace_transform(geometric_rv(rho), x).value == pytest.approx((1 - rho) / (1 - z), rel=1e-11)
    assert laplace_transform(size_biased_geometric_rv(rho), x).value == pytest.approx(
        ((1 - rho) / (1 - z)) ** 2, rel=1e-11)


@given(st.floats(0.2, 30.0), x_st)
def test_poisson_transform(lam, x):
    assert log_laplace_transform(poisson_rv(lam), x) == pytest.approx(lam * math.expm1(-x), rel=1e-9, abs=1e-11)


def test_log_transform_below_underflow():
    assert log_laplace_transform(poisson_rv(2000.0), 5.0) == pytest.approx(2000.0 * math.expm1(-5.0), rel=1e-9)


@pytest.mark.parametrize("l1", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("l2", [0.7, 2.0, 5.0])
def test_exponential_pairs(l1, l2):
    # L_Y/L_X = l2 (l1 + x) / (l1 (l2 + x)) has the sign of l2 - l1
    v = lt_ratio_order(exponential(l1), exponential(l2))
    assert v.relation == (Y_LE_X if l2 > l1 else X_LE_Y)
    assert v.provenance.startswith("condition (i)")


def test_equal_laws_are_ordered_both_ways():
    v = lt_ratio_order(exponential(2.0), exponential(2.0))
    assert v.relation == X_LE_Y
    assert "symmetry" in v.diagnostics


def test_geometric_vs_size_biased():
    X, Y = size_biased_geometric_rv(0.4), geometric_rv(0.4)
    v = lt_ratio_order(X, Y, check=True)
    assert v.relation == Y_LE_X
    assert v.provenance == "condition (i): increasing density ratio"
    assert v.diagnostics["fallback"]["relation"] == Y_LE_X
    assert lt_ratio_order(Y, X).relation == X_LE_Y


def test_gamma_vs_exponential():
    assert lt_ratio_order(gamma(2.0, 1.0), exponential(1.0)).relation == Y_LE_X


def test_mixed_kinds_use_fallback():
    v = lt_ratio_order(geometric_rv(0.5), exponential(1.0))
    assert v.provenance == "numeric-fallback"
    assert v.relation in (X_LE_Y, Y_LE_X, NEITHER, INCONCLUSIVE)
    assert "mixed" in v.diagnostics["note"]


def test_fallback_matches_closed_form_for_exponentials():
    assert fallback_order(exponential(1.0), exponential(3.0)).relation == Y_LE_X


def test_neither_is_reserved_for_the_fallback():
    with pytest.raises(ValueError):
        OrderVerdict(NEITHER, "condition (i): increasing density ratio")
    with pytest.raises(ValueError):
        OrderVerdict("Sometimes", "numeric-fallback")


def test_pmf_file_roundtrip(tmp_path):
    rho = 0.3
    path = tmp_path / "geom.csv"
    probs = [(1 - rho) * rho ** k for k in range(40)]
    path.write_text("k,p\n" + "".join(f"{k},{p!r}\n" for k, p in enumerate(probs)))
    rv = read_pmf_file(str(path))
    assert rv.K <= 39
    assert laplace_transform(rv, 1.0).value == pytest.approx(
        laplace_transform(geometric_rv(rho), 1.0).value, rel=1e-10)


def test_pmf_file_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("k,p\n1,1.0\n")
    with pytest.raises(ValueError):
        read_pmf_file(str(bad))
    bad.write_text("x,y\n0,1.0\n")
    with pytest.raises(ValueError):
        read_pmf_file(str(bad))


def test_invalid_models():
    with pytest.raises(DomainError):
        pmf_rv([0.5, 0.2])
    with pytest.raises(DomainError):
        pmf_rv([1.2, -0.2])
    with pytest.raises(DomainError):
        geometric_rv(1.0)
    with pytest.raises(DomainError):
        laplace_transform(exponential(1.0), 0.0)
