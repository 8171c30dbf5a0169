"""Coefficient sequences ``a_k`` and integrands ``f(t)`` in log-magnitude/sign form.

A coefficient source exposes ``log_abs(k)`` and ``sign(k)`` on integer arrays and
``length`` (``None`` for an infinite sequence). An integrand exposes the same pair
on real ``t`` arrays plus optional ``breakpoints`` and a ``support_end`` beyond
which it vanishes.
"""

import math

import numpy as np

from .errors import DomainError
from .specfun import ln_gamma_array


def _log_sign(values):
    values = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(values)), np.sign(values)


class CoefficientSource:
    length = None
    name = "coefficients"

    def log_abs(self, k):
        raise NotImplementedError

    def sign(self, k):
        return np.ones(np.shape(k))

    def values(self, k):
        k = np.asarray(k, dtype=float)
        return self.sign(k) * np.exp(self.log_abs(k))

    def closed_form(self, family, t, order):
        """Exact sum for special (source, family) pairs; ``None`` when unavailable."""
        return None

    def describe(self):
        return self.name

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()!r})"


class FiniteCoefficients(CoefficientSource):
    """Finitely many coefficients; every index beyond the list is zero."""

    def __init__(self, values, name=None):
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("need at least one coefficient")
        if not np.all(np.isfinite(values)):
            raise ValueError("coefficients must be finite")
        self._values = values
        self.length = values.size
        self.name = name or "seq:" + ",".join(f"{v:g}" for v in values)

    @property
    def array(self):
        return self._values.copy()

    def _take(self, k):
        k = np.asarray(k)
        idx = k.astype(np.int64)
        inside = (idx >= 0) & (idx < self.length)
        out = np.zeros(k.shape)
        out[inside] = self._values[idx[inside]]
        return out

    def log_abs(self, k):
        return _log_sign(self._take(k))[0]

    def sign(self, k):
        return np.sign(self._take(k))


class TruncatedCoefficients(CoefficientSource):
    """The first ``length`` terms of ``base``, held in log form so tiny terms survive."""

    def __init__(self, base, length, name=None):
        length = int(length)
        if length < 1:
            raise ValueError("length must be positive")
        k = np.arange(length, dtype=float)
        self._sign = np.asarray(base.sign(k), dtype=float)
        self._log = np.where(self._sign != 0, base.log_abs(k), -np.inf)
        self.length = length
        self.name = name or f"{base.describe()}[:{length}]"

    def _take(self, table, k, fill):
        idx = np.asarray(k).astype(np.int64)
        inside = (idx >= 0) & (idx < self.length)
        out = np.full(idx.shape, fill)
        out[inside] = table[idx[inside]]
        return out

    def log_abs(self, k):
        return self._take(self._log, k, -np.inf)

    def sign(self, k):
        return self._take(self._sign, k, 0.0)


class ReciprocalGammaCoefficients(CoefficientSource):
    """``1 / Gamma(a k + b)``."""

    def __init__(self, a, b):
        if not (a > 0 and b > 0):
            raise DomainError("recip-gamma parameters must be positive")
        self.a = float(a)
        self.b = float(b)
        self.name = f"recip-gamma:{self.a:g},{self.b:g}"

    def log_abs(self, k):
        return -ln_gamma_array(self.a * np.asarray(k, dtype=float) + self.b)


def _eulerian_rows(n):
    rows = [[1]]
    for j in range(1, n + 1):
        prev = rows[-1]
        row = []
        for m in range(j):
            left = prev[m] if m < len(prev) else 0
            right = prev[m - 1] if 0 <= m - 1 < len(prev) else 0
            row.append((m + 1) * left + (j - m) * right)
        rows.append(row)
    return rows


_EULERIAN = _eulerian_rows(12)


def _power_sums(z, one_minus_z, degree):
    """``S_j = sum_{k>=0} k^j z^k`` for ``j = 0..degree`` and ``0 <= z < 1``."""
    out = [1.0 / one_minus_z]
    for j in range(1, degree + 1):
        poly = sum(c * z ** m for m, c in enumerate(_EULERIAN[j]))
        out.append(z * poly / one_minus_z ** (j + 1))
    return out


class PolyGeometricCoefficients(CoefficientSource):
    """``(c_0 + c_1 k + ... + c_p k^p) * rho^k``.

    ``const-seq:c`` and ``geom:rho`` are the degree-0 cases. For the power,
    inverse-power and exponential families the series has an exact rational
    sum, which the ratio engine uses in place of direct summation.
    """

    def __init__(self, poly, rho, name=None):
        poly = [float(c) for c in np.atleast_1d(poly)]
        if not poly or not all(math.isfinite(c) for c in poly):
            raise ValueError("polynomial coefficients must be finite")
        if len(poly) > 8:
            raise ValueError("polynomial degree is limited to 7")
        if not rho > 0:
            raise DomainError("rho must be positive")
        self.poly = poly
        self.rho = float(rho)
        self.name = name or "polygeom:{:g};{}".format(self.rho, ",".join(f"{c:g}" for c in poly))

    def _poly(self, k):
        k = np.asarray(k, dtype=float)
        return np.polynomial.polynomial.polyval(k, self.poly)

    def log_abs(self, k):
        k = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self._poly(k))) + k * math.log(self.rho)

    def sign(self, k):
        return np.sign(self._poly(k))

    def closed_form(self, family, t, order):
        fid = getattr(family, "id", None)
        t = float(t)
        P = np.polynomial.Polynomial(self.poly)
        kpoly = np.polynomial.Polynomial([0.0, 1.0])
        if fid == "PowerK":
            # d^o/dt^o t^k = k(k-1)...(k-o+1) t^{k-o}
            log_z = math.log(self.rho) + math.log(t)
            factor = np.polynomial.Polynomial([1.0])
            for i in range(order):
                factor = factor * (kpoly - i)
            scale = t ** (-order)
        elif fid == "InversePowerK":
            log_z = math.log(self.rho) - math.log(t)
            factor = np.polynomial.Polynomial([1.0])
            for i in range(order):
                factor = factor * (kpoly + i)
            scale = (-1.0) ** order * t ** (-order)
        elif fid == "ExpDecayK":
            log_z = math.log(self.rho) - t
            factor = np.polynomial.Polynomial([1.0])
            for _ in range(order):
                factor = factor * kpoly
            scale = (-1.0) ** order
        else:
            return None
        if not log_z < 0:
            return None
        z = math.exp(log_z)
        one_minus_z = -math.expm1(log_z)
        q = (P * factor).coef
        sums = _power_sums(z, one_minus_z, len(q) - 1)
        value = scale * math.fsum(c * s for c, s in zip(q, sums))
        magnitude = abs(scale) * math.fsum(abs(c) * s for c, s in zip(q, sums))
        return value, 64.0 * np.finfo(float).eps * (magnitude + abs(value))


def geometric(rho, scale=1.0):
    return PolyGeometricCoefficients([scale], rho, name=f"geom:{rho:g}")


def constant_sequence(c):
    return PolyGeometricCoefficients([c], 1.0, name=f"const-seq:{c:g}")


class FunctionCoefficients(CoefficientSource):
    """Coefficients from a user callable.

    With ``log=True`` the callable returns ``log a_k`` (positive sequences);
    otherwise it returns ``a_k`` itself.
    """

    def __init__(self, fn, log=False, length=None, name="function"):
        self._fn = fn
        self._log = log
        self.length = length
        self.name = name

    def _raw(self, k):
        k = np.asarray(k, dtype=float)
        out = np.asarray(np.vectorize(self._fn, otypes=[float])(k), dtype=float)
        if self.length is not None:
            out = np.where(k < self.length, out, -np.inf if self._log else 0.0)
        return out

    def log_abs(self, k):
        raw = self._raw(k)
        return raw if self._log else _log_sign(raw)[0]

    def sign(self, k):
        raw = self._raw(k)
        if self._log:
            return np.where(np.isfinite(raw), 1.0, 0.0)
        return np.sign(raw)


class ScaledCoefficients(CoefficientSource):
    """``lam * a_k`` for a base source."""

    def __init__(self, base, lam):
        self.base = base
        self.lam = float(lam)
        self.length = base.length
        self.name = f"{lam:g}*{base.describe()}"

    def log_abs(self, k):
        with np.errstate(divide="ignore"):
            return self.base.log_abs(k) + math.log(abs(self.lam))

    def sign(self, k):
        return self.base.sign(k) * math.copysign(1.0, self.lam) * (self.lam != 0)

    def closed_form(self, family, t, order):
        cf = self.base.closed_form(family, t, order)
        if cf is None:
            return None
        return self.lam * cf[0], abs(self.lam) * cf[1]


# -- integrands ---------------------------------------------------------------


class Integrand:
    name = "integrand"
    breakpoints = ()
    support_end = math.inf

    def log_abs(self, t):
        raise NotImplementedError

    def sign(self, t):
        return np.ones(np.shape(t))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.sign(t) * np.exp(self.log_abs(t))

    def describe(self):
        return self.name

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()!r})"


class ConstIntegrand(Integrand):
    def __init__(self, c=1.0):
        self.c = float(c)
        self.name = f"const:{self.c:g}"

    def log_abs(self, t):
        with np.errstate(divide="ignore"):
            return np.full(np.shape(t), math.log(abs(self.c)) if self.c else -np.inf)

    def sign(self, t):
        return np.full(np.shape(t), math.copysign(1.0, self.c) if self.c else 0.0)


class PolyExpIntegrand(Integrand):
    """``(c_0 + c_1 t + ...) * exp(-lam t)``; ``lam = 0`` gives a plain polynomial."""

    def __init__(self, poly, lam=0.0, name=None):
        self.poly = [float(c) for c in np.atleast_1d(poly)]
        self.lam = float(lam)
        if name is None:
            coef = ",".join(f"{c:g}" for c in self.poly)
            name = f"poly:{coef}" if self.lam == 0 else f"polyexp:{self.lam:g};{coef}"
        self.name = name

    def _p(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), self.poly)

    def log_abs(self, t):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self._p(t))) - self.lam * np.asarray(t, dtype=float)

    def sign(self, t):
        return np.sign(self._p(t))


def exp_integrand(lam):
    return PolyExpIntegrand([1.0], lam, name=f"exp:{lam:g}")


class GammaPdf(Integrand):
    """Gamma density with ``shape`` and ``rate``."""

    def __init__(self, shape, rate):
        if not (shape > 0 and rate > 0):
            raise DomainError("gamma parameters must be positive")
        self.shape = float(shape)
        self.rate = float(rate)
        self._norm = self.shape * math.log(self.rate) - float(ln_gamma_array(self.shape))
        self.name = f"gamma:{self.shape:g},{self.rate:g}"

    def log_abs(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return self._norm + (self.shape - 1.0) * np.log(t) - self.rate * t


class ReciprocalGammaIntegrand(Integrand):
    """``1 / Gamma(a t + b)``."""

    def __init__(self, a, b):
        if not (a > 0 and b > 0):
            raise DomainError("recip-gamma parameters must be positive")
        self.a = float(a)
        self.b = float(b)
        self.name = f"recip-gamma:{self.a:g},{self.b:g}"

    def log_abs(self, t):
        return -ln_gamma_array(self.a * np.asarray(t, dtype=float) + self.b)


class UniformPdf(Integrand):
    """Density of the uniform law on ``(0, theta)``."""

    def __init__(self, theta):
        if not theta > 0:
            raise DomainError("theta must be positive")
        self.theta = float(theta)
        self.support_end = self.theta
        self.breakpoints = (self.theta,)
        self.name = f"uniform:{self.theta:g}"

    def log_abs(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= self.theta, -math.log(self.theta), -np.inf)

    def sign(self, t):
        return np.where(np.asarray(t) <= self.theta, 1.0, 0.0)


class ProductIntegrand(Integrand):
    def __init__(self, *factors):
        self.factors = factors
        self.breakpoints = tuple(sorted({b for f in factors for b in f.breakpoints}))
        self.support_end = min(f.support_end for f in factors)
        self.name = "*".join(f.describe() for f in factors)

    def log_abs(self, t):
        return sum(f.log_abs(t) for f in self.factors)

    def sign(self, t):
        out = np.ones(np.shape(t))
        for f in self.factors:
            out = out * f.sign(t)
        return out


class FunctionIntegrand(Integrand):
    """Integrand from a callable; ``log=True`` means it returns ``log f``."""

    def __init__(self, fn, log=False, name="function", support_end=math.inf, breakpoints=()):
        self._fn = fn
        self._log = log
        self.name = name
        self.support_end = support_end
        self.breakpoints = tuple(breakpoints)

    def _raw(self, t):
        t = np.asarray(t, dtype=float)
        try:
            out = np.asarray(self._fn(t), dtype=float)
            if out.shape != t.shape:
                raise ValueError
        except (TypeError, ValueError):
            out = np.vectorize(lambda s: float(self._fn(s)), otypes=[float])(t)
        return out

    def log_abs(self, t):
        raw = self._raw(t)
        return raw if self._log else _log_sign(raw)[0]

    def sign(self, t):
        raw = self._raw(t)
        if self._log:
            return np.where(np.isfinite(raw), 1.0, 0.0)
        return np.sign(raw)
