import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratiomono.errors import NonConvergenceError
from ratiomono.quadrature import integrate


def log_form(*fns):
    def inner(t):
        vals = np.array([f(t) for f in fns])
        with np.errstate(divide="ignore"):
            return np.log(np.abs(vals)), np.sign(vals)
    return inner


@given(st.floats(0.05, 5.0), st.floats(0.3, 6.0))
def test_improper_integrals_closed_form(lam, x):
    f = lambda t: t ** (x - 1) * np.exp(-lam * t)
    res = integrate(log_form(f), 0.0, math.inf, 1)
    exact = math.gamma(x) / lam ** x
    assert res.value[0] == pytest.approx(exact, rel=1e-10)
    assert res.abs_error[0] <= 1e-9 * exact


@given(st.floats(0.5, 20.0))
def test_finite_interval_multi_component(b):
    res = integrate(log_form(np.sin, np.cos, lambda t: t ** 2 - 1), 0.0, b, 3)
    exact = (1 - math.cos(b), math.sin(b), b ** 3 / 3 - b)
    for got, ref in zip(res.value, exact):
        assert got == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_values_beyond_double_range_via_log_shift():
    # integral of exp(800 - t) over (0, inf) = e^800
    def integrand(t):
        return (800.0 - t)[None, :], np.ones((1, len(t)))
    res = integrate(integrand, 0.0, math.inf, 1)
    assert res.shift[0] + math.log(res.scaled[0]) == pytest.approx(800.0, rel=1e-13)


def test_breakpoint_for_discontinuous_integrand():
    f = lambda t: np.where(t < 1.3, 1.0, 0.5)
    res = integrate(log_form(f), 0.0, 3.0, 1, breakpoints=(1.3,))
    assert res.value[0] == pytest.approx(1.3 + 0.85, rel=1e-12)


def test_lost_narrow_peak_is_reported():
    def integrand(t):
        return (-1e12 * (t - 0.3123) ** 2)[None, :], np.ones((1, len(t)))
    with pytest.raises(NonConvergenceError):
        integrate(integrand, 0.0, math.inf, 1)


def test_bad_interval():
    with pytest.raises(ValueError):
        integrate(log_form(np.cos), 1.0, 1.0, 1)
