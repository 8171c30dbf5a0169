import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratiomono.errors import DomainError
from ratiomono.kernels import get_kernel
from ratiomono.sources import (
    ConstIntegrand,
    FiniteCoefficients,
    FunctionCoefficients,
    GammaPdf,
    PolyExpIntegrand,
    PolyGeometricCoefficients,
    ReciprocalGammaCoefficients,
    UniformPdf,
    constant_sequence,
    geometric,
)


def direct_sum(src, family, t, order, n=4000):
    k = np.arange(n, dtype=float)
    fam = get_kernel(family)
    w = np.array([fam.value(int(j), t, order) for j in k])
    return math.fsum(src.values(k) * w)


@given(
    st.lists(st.floats(-3, 3), min_size=1, max_size=4),
    st.floats(0.1, 0.8),
    st.sampled_from(["PowerK", "InversePowerK", "ExpDecayK"]),
    st.integers(0, 2),
)
def test_polygeometric_closed_form_matches_direct_sum(poly, rho, family, order):
    src = PolyGeometricCoefficients(poly, rho)
    t = {"PowerK": 0.9, "InversePowerK": 1.2, "ExpDecayK": 0.3}[family]
    value, err = src.closed_form(get_kernel(family), t, order)
    exact = direct_sum(src, family, t, order)
    scale = math.fsum(abs(c) for c in poly) + 1.0
    assert value == pytest.approx(exact, rel=1e-9, abs=1e-11 * scale)
    assert err >= 0


def test_closed_form_declines_outside_convergence():
    src = geometric(0.5)
    assert src.closed_form(get_kernel("PowerK"), 3.0, 0) is None
    assert src.closed_form(get_kernel("DirichletK"), 2.0, 0) is None


def test_finite_coefficients_pad_with_zero():
    src = FiniteCoefficients([1.0, -2.0, 0.5])
    k = np.arange(5)
    assert np.allclose(src.values(k), [1.0, -2.0, 0.5, 0.0, 0.0])
    assert src.length == 3
    with pytest.raises(ValueError):
        FiniteCoefficients([])
    with pytest.raises(ValueError):
        FiniteCoefficients([1.0, math.nan])


def test_reciprocal_gamma_coefficients():
    src = ReciprocalGammaCoefficients(2.0, 1.0)
    assert np.allclose(src.values(np.arange(4)), [1 / math.gamma(2 * k + 1) for k in range(4)])
    with pytest.raises(DomainError):
        ReciprocalGammaCoefficients(0.0, 1.0)


def test_named_sequences():
    assert constant_sequence(2.0).values(np.arange(3)).tolist() == [2.0, 2.0, 2.0]
    assert np.allclose(geometric(0.5).values(np.arange(3)), [1, 0.5, 0.25])


def test_function_coefficients_log_and_length():
    src = FunctionCoefficients(lambda k: -k, log=True, length=3)
    assert np.allclose(src.values(np.arange(5)), [1, math.exp(-1), math.exp(-2), 0, 0])


@given(st.floats(0.01, 30))
def test_integrands(t):
    assert float(GammaPdf(2.0, 3.0)(t)) == pytest.approx(9 * t * math.exp(-3 * t), rel=1e-12)
    assert float(PolyExpIntegrand([1.0, 1.0], 0.5)(t)) == pytest.approx((1 + t) * math.exp(-t / 2), rel=1e-12)
    assert float(ConstIntegrand(2.0)(t)) == 2.0
    u = UniformPdf(4.0)
    assert float(u(t)) == (0.25 if t <= 4.0 else 0.0)
    assert u.support_end == 4.0
