"""Log-gamma, reciprocal gamma, digamma and the two-parameter Mittag-Leffler function.

Everything here works for positive real arguments only. The scalar entry points
return an :class:`EvalResult` carrying an error bound; the ``*_array`` helpers are
the vectorised kernels used by the series and quadrature code.
"""

import math
import sys
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergenceError

_EPS = sys.float_info.epsilon
_LOG_TINY = math.log(sys.float_info.min)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Even Bernoulli numbers B_2 .. B_20.
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)
_N_ASYMPTOTIC = 8
_STIRLING = tuple(_BERNOULLI[j] / ((2 * j + 2) * (2 * j + 1)) for j in range(len(_BERNOULLI)))
_PSI_ASYM = tuple(_BERNOULLI[j] / (2 * j + 2) for j in range(len(_BERNOULLI)))

_LNGAMMA_SHIFT = 15.0
_DIGAMMA_SHIFT = 10.0

ML_MAX_TERMS = 100_000


@dataclass(frozen=True)
class EvalResult:
    """A numeric value with an absolute error bound.

    ``terms_used`` counts summed terms for series evaluations and is 0 for
    closed-form or quadrature-free evaluations.
    """

    value: float
    abs_error_bound: float
    terms_used: int = 0

    def __post_init__(self):
        if not self.abs_error_bound >= 0:
            raise ValueError("abs_error_bound must be nonnegative")
        if self.terms_used < 0:
            raise ValueError("terms_used must be nonnegative")


def _check_positive(x, name="x"):
    x = float(x)
    if not x > 0 or math.isnan(x):
        raise DomainError(f"{name} must be positive, got {x!r}")
    if math.isinf(x):
        raise DomainError(f"{name} must be finite")
    return x


def _stirling_tail(z):
    """Sum of the asymptotic correction terms of ln Gamma and the first omitted term."""
    inv = 1.0 / z
    inv2 = inv * inv
    acc = 0.0
    power = inv
    for c in _STIRLING[:_N_ASYMPTOTIC]:
        acc += c * power
        power *= inv2
    return acc, abs(_STIRLING[_N_ASYMPTOTIC]) * power


def ln_gamma(x):
    """Natural log of the gamma function for ``x > 0``.

    The argument is shifted up to at least 15 with the recurrence
    ``ln G(x) = ln G(x + n) - sum(ln(x + i))`` and the Stirling series is
    applied there. The reported bound covers the omitted asymptotic term plus
    floating-point rounding; for large ``x`` it is dominated by rounding of
    the result itself.
    """
    x = _check_positive(x)
    shift_terms = []
    z = x
    while z < _LNGAMMA_SHIFT:
        shift_terms.append(math.log(z))
        z += 1.0
    log_z = math.log(z)
    series, trunc = _stirling_tail(z)
    main = (z - 0.5) * log_z - z
    shift = math.fsum(shift_terms)
    value = main + _HALF_LOG_2PI + series - shift
    magnitude = abs(main) + z + _HALF_LOG_2PI + sum(abs(s) for s in shift_terms)
    bound = trunc + 8.0 * _EPS * (magnitude + len(shift_terms))
    return EvalResult(value, bound, 0)


def reciprocal_gamma(x):
    """``1 / Gamma(x)`` for ``x > 0``, computed as ``exp(-ln_gamma(x))``.

    Values below the smallest normal double underflow towards zero; the error
    bound then reports that threshold instead of a relative bound.
    """
    lg = ln_gamma(x)
    log_value = -lg.value
    value = math.exp(log_value) if log_value > -745.2 else 0.0
    if log_value < _LOG_TINY:
        return EvalResult(value, sys.float_info.min, 0)
    rel = lg.abs_error_bound + 2.0 * _EPS
    return EvalResult(value, value * math.expm1(rel), 0)


def digamma(x):
    """Digamma function ``psi(x) = Gamma'(x)/Gamma(x)`` for ``x > 0``.

    Upward recurrence to ``x >= 10`` followed by the asymptotic expansion.
    """
    x = _check_positive(x)
    shift_terms = []
    z = x
    while z < _DIGAMMA_SHIFT:
        shift_terms.append(1.0 / z)
        z += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = 0.0
    power = inv2
    for c in _PSI_ASYM[:_N_ASYMPTOTIC]:
        series += c * power
        power *= inv2
    trunc = abs(_PSI_ASYM[_N_ASYMPTOTIC]) * power
    log_z = math.log(z)
    shift = math.fsum(shift_terms)
    value = log_z - 0.5 * inv - series - shift
    magnitude = abs(log_z) + 0.5 * inv + abs(series) + shift
    bound = trunc + 4.0 * _EPS * magnitude
    return EvalResult(value, bound, 0)


def ln_gamma_array(x):
    """Vectorised ln Gamma for positive arrays (no error bounds)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("ln_gamma_array requires positive arguments")
    z = x.copy()
    acc = np.zeros_like(z)
    # Each pass lifts every element still below the threshold by one.
    for _ in range(int(_LNGAMMA_SHIFT) + 1):
        low = z < _LNGAMMA_SHIFT
        if not np.any(low):
            break
        acc[low] += np.log(z[low])
        z[low] += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    power = inv.copy()
    for c in _STIRLING[:_N_ASYMPTOTIC]:
        series += c * power
        power *= inv2
    return (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + series - acc


def digamma_array(x):
    """Vectorised digamma for positive arrays (no error bounds)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("digamma_array requires positive arguments")
    z = x.copy()
    acc = np.zeros_like(z)
    for _ in range(int(_DIGAMMA_SHIFT) + 1):
        low = z < _DIGAMMA_SHIFT
        if not np.any(low):
            break
        acc[low] += 1.0 / z[low]
        z[low] += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    power = inv2.copy()
    for c in _PSI_ASYM[:_N_ASYMPTOTIC]:
        series += c * power
        power *= inv2
    return np.log(z) - 0.5 * inv - series - acc


def _ml_log_terms(a, b, log_t, k):
    return k * log_t - ln_gamma_array(a * k + b)


def log_mittag_leffler(a, b, t, tol=1e-15, max_terms=ML_MAX_TERMS):
    """Return ``(log E_{a,b}(t), relative error bound, terms used)``.

    Works in log space so that the result stays finite where ``E`` itself
    would overflow.
    """
    a = _check_positive(a, "a")
    b = _check_positive(b, "b")
    t = float(t)
    if not t >= 0 or math.isinf(t):
        raise DomainError(f"t must be finite and nonnegative, got {t!r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if t == 0.0:
        lg = ln_gamma(b)
        return -lg.value, lg.abs_error_bound + _EPS, 1
    log_t = math.log(t)
    chunk = 64
    start = 0
    logs = np.empty(0)
    while True:
        stop = min(start + chunk, max_terms + 1)
        k = np.arange(start, stop, dtype=float)
        logs = np.concatenate([logs, _ml_log_terms(a, b, log_t, k)])
        # Successive ratios decrease in k because psi is increasing, so once a
        # ratio drops below 1/2 the remaining tail is at most twice the next term.
        diffs = np.diff(logs)
        shift = logs.max()
        terms = np.exp(logs - shift)
        partial = np.cumsum(terms)
        # K terms summed (indices < K); the tail starts at term K.
        K = np.arange(1, len(logs))
        ok = (diffs < -math.log(2.0)) & (2.0 * terms[1:] <= tol * partial[:-1])
        hits = np.nonzero(ok)[0]
        if hits.size:
            n_used = int(K[hits[0]])
            total = partial[n_used - 1]
            tail = 2.0 * terms[n_used]
            rel = (tail + 4.0 * n_used * _EPS * total) / total
            return float(shift + math.log(total)), float(rel), n_used
        if stop > max_terms:
            raise NonConvergenceError(
                f"Mittag-Leffler series for a={a}, b={b}, t={t} needs more than {max_terms} terms",
                terms_used=max_terms,
            )
        start = stop
        chunk *= 2


def mittag_leffler(a, b, t, tol=1e-15, max_terms=ML_MAX_TERMS):
    """Two-parameter Mittag-Leffler function ``sum_k t^k / Gamma(a k + b)``.

    ``tol`` is a relative bound on the discarded tail. The series is summed
    directly; a :class:`NonConvergenceError` is raised when more than
    ``max_terms`` terms would be needed.
    """
    log_value, rel, n_used = log_mittag_leffler(a, b, t, tol=tol, max_terms=max_terms)
    value = math.exp(log_value)
    return EvalResult(value, value * rel, n_used)
