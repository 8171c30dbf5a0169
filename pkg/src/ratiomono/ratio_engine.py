"""Series and transform ratios, their derivatives, the H function and its endpoint limits.

For ``A(t) = sum a_k w_k(t)`` and ``B(t) = sum b_k w_k(t)`` (or the integral
analogues ``F``/``G``), ``H = (A'/B') B - A`` satisfies
``(A/B)' = (B'/B^2) H``, so the sign of ``H`` together with the sign of ``B'``
decides where the ratio rises and falls.

Internally every sum is carried as ``(scaled, log_scale)`` so that values
such as ``E_{1,1}(4096) = e^4096`` never overflow on the way to a ratio.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DerivativeDegeneracyError,
    DivisionDomainError,
    DomainError,
    NonConvergenceError,
)
from .kernels import ContinuousKernel, DiscreteKernel, get_kernel
from .quadrature import integrate
from .sources import CoefficientSource, FiniteCoefficients, FunctionIntegrand, Integrand
from .specfun import EvalResult

_EPS = np.finfo(float).eps

SERIES_MAX_TERMS = 100_000
LADDER_STEPS = 12
ZERO_BAND = 1e-9
DEGENERACY_BAND = 1e-12
# Number of trailing ladder samples that must agree before a sign is declared.
SIGN_WINDOW = 4

LOWER = "LowerEnd"
UPPER = "UpperEnd"


def _as_source(src):
    if isinstance(src, CoefficientSource):
        return src
    return FiniteCoefficients(src)


def _as_integrand(fn):
    if isinstance(fn, Integrand):
        return fn
    if callable(fn):
        return FunctionIntegrand(fn)
    raise TypeError("integrand must be an Integrand or a callable")


@dataclass(frozen=True)
class Scaled:
    """``value = scaled * exp(log_scale)`` with absolute bound ``bound * exp(log_scale)``."""

    scaled: float
    log_scale: float
    bound: float
    abs_scaled: float
    terms_used: int = 0

    @property
    def value(self):
        with np.errstate(over="ignore"):
            return float(self.scaled * np.exp(self.log_scale))

    @property
    def abs_error(self):
        with np.errstate(over="ignore"):
            return float(self.bound * np.exp(self.log_scale))

    def to_result(self):
        return EvalResult(self.value, self.abs_error, self.terms_used)


class SeriesRatioProblem:
    """``A(t)/B(t)`` for two coefficient sequences over a discrete kernel family.

    ``r`` is the right end of the working domain ``(0, r)``; ``b`` must be
    nonnegative with at least one positive entry among the scanned indices.
    """

    kind = "series"

    def __init__(self, a, b, family, r=math.inf, tol=1e-13, scan=1024):
        self.a = _as_source(a)
        self.b = _as_source(b)
        self.family = get_kernel(family)
        if not isinstance(self.family, DiscreteKernel):
            raise TypeError("series problems need a discrete kernel family")
        r = float(r)
        if not r > 0:
            raise DomainError("r must be positive")
        if not tol > 0:
            raise ValueError("tol must be positive")
        self.r = r
        self.tol = float(tol)
        n = scan if self.b.length is None else min(self.b.length, scan)
        k = np.arange(max(n, 1), dtype=float)
        sb = self.b.sign(k)
        if np.any(sb < 0):
            raise DomainError("b coefficients must be nonnegative")
        if not np.any(sb > 0):
            raise DomainError("b coefficients must not all vanish")

    def side(self, name):
        if name == "a":
            return self.a
        if name == "b":
            return self.b
        raise ValueError("side must be 'a' or 'b'")

    def check_point(self, t):
        t = float(t)
        if not (0.0 < t < self.r) and not (t == self.r and math.isfinite(self.r)):
            raise DomainError(f"t={t} outside the domain (0, {self.r})")
        return t

    def describe(self):
        return {
            "kind": "series",
            "a": self.a.describe(),
            "b": self.b.describe(),
            "family": self.family.id,
            "r": self.r,
            "tol": self.tol,
        }


class TransformRatioProblem:
    """``F(x)/G(x)`` with ``F(x) = int_alpha^beta f(t) w(t, x) dt`` and likewise ``G``.

    ``beta = inf`` selects the improper upper limit; ``alpha = 0`` is the
    improper lower limit for kernels or integrands singular at zero.
    ``x_max`` bounds the working domain ``(0, x_max)`` for verdicts.
    """

    kind = "transform"

    def __init__(self, f, g, kernel, alpha=0.0, beta=math.inf, tol=1e-12, x_max=math.inf):
        self.f = _as_integrand(f)
        self.g = _as_integrand(g)
        self.kernel = get_kernel(kernel)
        if not isinstance(self.kernel, ContinuousKernel):
            raise TypeError("transform problems need a continuous kernel")
        alpha = float(alpha)
        beta = float(beta)
        if not (alpha >= 0 and beta > alpha):
            raise DomainError("need 0 <= alpha < beta")
        if self.kernel.t_min_open and alpha < 0:
            raise DomainError("kernel requires t > 0")
        if not tol > 0:
            raise ValueError("tol must be positive")
        self.alpha = alpha
        self.beta = beta
        self.tol = float(tol)
        self.x_max = float(x_max)
        self.upper = min(beta, max(self.f.support_end, self.g.support_end))
        g_end = min(beta, self.g.support_end)
        if self.f.support_end > g_end and self.upper > g_end:
            raise DomainError("f is supported where g vanishes")
        ts = self.sample_grid(256)
        if np.any(~(self.g.sign(ts) > 0)):
            raise DomainError("g must be positive on the integration interval")

    def sample_grid(self, n):
        lo = self.alpha
        hi = min(self.upper, self.g.support_end)
        if math.isfinite(hi):
            if lo > 0 and hi / lo > 100:
                return np.geomspace(lo, hi, n)
            pts = np.linspace(lo, hi, n + 2)[1:-1] if lo == 0 else np.linspace(lo, hi, n)
            if hi == self.g.support_end:
                pts = pts[pts < hi] if lo < hi else pts
            return pts
        base = max(lo, 0.0)
        return base + np.geomspace(1e-6, 1e6, n)

    def check_point(self, x):
        x = float(x)
        if not x > 0 or not math.isfinite(x):
            raise DomainError(f"x={x} must be positive and finite")
        return x

    @property
    def r(self):
        return self.x_max

    def describe(self):
        return {
            "kind": "transform",
            "f": self.f.describe(),
            "g": self.g.describe(),
            "kernel": self.kernel.id,
            "alpha": self.alpha,
            "beta": self.beta,
            "tol": self.tol,
        }


# -- series summation ---------------------------------------------------------


def _series_scaled(problem, source, t, order, max_terms=SERIES_MAX_TERMS):
    family = problem.family
    cf = source.closed_form(family, t, order)
    if cf is not None:
        value, bound = cf
        return Scaled(value, 0.0, bound, abs(value) + bound, 0)

    n_total = source.length if source.length is not None else None
    chunk = 256 if n_total is None else n_total
    start = 0
    logs = np.empty(0)
    signs = np.empty(0)
    tol = problem.tol
    while True:
        stop = start + chunk
        if n_total is not None:
            stop = min(stop, n_total)
        stop = min(stop, max_terms + 1)
        k = np.arange(start, stop, dtype=float)
        lc = source.log_abs(k)
        sc = source.sign(k)
        lw, sw = family.log_abs_sign(k, np.full_like(k, t), order)
        la = lc + lw
        sg = sc * sw
        la = np.where(sg == 0, -np.inf, la)
        logs = np.concatenate([logs, la])
        signs = np.concatenate([signs, sg])
        if n_total is not None and stop >= n_total:
            return _finish_sum(logs, signs, len(logs), None)
        hit = _tail_index(logs, tol)
        if hit is not None:
            n_used, tail_log = hit
            return _finish_sum(logs, signs, n_used, tail_log)
        if stop > max_terms:
            raise NonConvergenceError(
                f"series did not converge within {max_terms} terms at t={t}", terms_used=max_terms
            )
        start = stop
        chunk *= 2


def _tail_index(logs, tol):
    """First index K whose geometric tail bound is below ``tol`` times the partial sum.

    Requires the last few term ratios to be nonincreasing and below one, so the
    tail is dominated by ``|T_K| / (1 - rho_K)``. Returns ``(K, log tail)``.
    """
    n = len(logs)
    if n < SIGN_WINDOW + 2:
        return None
    finite = np.isfinite(logs)
    shift = logs[finite].max() if np.any(finite) else 0.0
    mags = np.where(finite, np.exp(logs - shift), 0.0)
    partial = np.cumsum(mags)
    with np.errstate(invalid="ignore"):
        d = np.diff(logs)
    K = np.arange(SIGN_WINDOW + 1, n)
    # window of ratios d[K-W .. K-1]; d[K-1] = log(T_K / T_{K-1})
    win = np.stack([d[K - SIGN_WINDOW + i] for i in range(SIGN_WINDOW)])
    ok = np.all(np.isfinite(win), axis=0)
    with np.errstate(invalid="ignore"):
        dd = np.diff(win, axis=0)
        ok &= np.all(dd <= 1e-12 * (1.0 + np.abs(win[1:])), axis=0)
        log_rho = win[-1]
        ok &= log_rho < 0
        tail = mags[K] / -np.expm1(np.where(log_rho < 0, log_rho, -1.0))
        ok &= partial[K - 1] > 0
        ok &= tail <= tol * partial[K - 1]
    hits = np.nonzero(ok)[0]
    if not hits.size:
        return None
    i = hits[0]
    tl = tail[i]
    return int(K[i]), (math.log(tl) + shift) if tl > 0 else None


def _finish_sum(logs, signs, n_used, tail_log):
    logs = logs[:n_used]
    signs = signs[:n_used]
    finite = np.isfinite(logs)
    if not np.any(finite):
        return Scaled(0.0, 0.0, 0.0, 0.0, n_used)
    shift = float(logs[finite].max())
    mags = np.where(finite, np.exp(logs - shift), 0.0)
    total = math.fsum(signs * mags)
    abs_total = math.fsum(mags)
    tail = math.exp(tail_log - shift) if tail_log is not None else 0.0
    bound = tail + 4.0 * n_used * _EPS * abs_total
    return Scaled(total, shift, bound, abs_total, n_used)


def eval_series(problem, side, t, order=0):
    """``sum_k c_k w_k^{(order)}(t)`` for ``side`` in ``{"a", "b"}``."""
    t = problem.check_point(t)
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    return _series_scaled(problem, problem.side(side), t, order).to_result()


def _series_bundle(problem, t, orders=(0, 1)):
    t = problem.check_point(t)
    return {
        (s, o): _series_scaled(problem, problem.side(s), t, o) for s in ("a", "b") for o in orders
    }


# -- transform quadrature -----------------------------------------------------


def _transform_scaled(problem, x, components):
    """Integrate ``[(side, order), ...]`` at ``x`` in one adaptive pass."""
    kernel = problem.kernel

    def log_integrand(t):
        rows_la = []
        rows_sg = []
        cache = {}
        for side, order in components:
            fn = problem.f if side == "f" else problem.g
            if order not in cache:
                cache[order] = kernel.log_abs_sign(t, np.full_like(t, x), order)
            lw, sw = cache[order]
            rows_la.append(fn.log_abs(t) + lw)
            rows_sg.append(fn.sign(t) * sw)
        return np.array(rows_la), np.array(rows_sg)

    breaks = list(problem.f.breakpoints) + list(problem.g.breakpoints)
    res = integrate(
        log_integrand,
        problem.alpha,
        problem.upper,
        len(components),
        rtol=problem.tol,
        breakpoints=breaks,
    )
    out = {}
    for i, comp in enumerate(components):
        out[comp] = Scaled(
            float(res.scaled[i]),
            float(res.shift[i]),
            float(res.error[i]),
            float(res.abs_scaled[i]),
            res.intervals,
        )
    return out


def eval_transform(problem, side, x, order=0):
    """``int f(t) d^order/dx^order w(t, x) dt`` for ``side`` in ``{"f", "g"}``."""
    x = problem.check_point(x)
    if side not in ("f", "g"):
        raise ValueError("side must be 'f' or 'g'")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    res = _transform_scaled(problem, x, [(side, order)])[(side, order)]
    return EvalResult(res.value, res.abs_error, 0)


def _bundle(problem, point, orders=(0, 1)):
    """Numerator/denominator values keyed ``("n"|"d", order)``."""
    if problem.kind == "series":
        raw = _series_bundle(problem, point, orders)
        return {("n" if s == "a" else "d", o): v for (s, o), v in raw.items()}
    point = problem.check_point(point)
    comps = [(s, o) for s in ("f", "g") for o in orders]
    raw = _transform_scaled(problem, point, comps)
    return {("n" if s == "f" else "d", o): v for (s, o), v in raw.items()}


# -- ratio, H and friends -----------------------------------------------------


def _ratio_from(num, den):
    """Ratio of two scaled sums and an absolute error bound for it."""
    if not den.scaled > 0:
        raise DivisionDomainError("denominator is not strictly positive")
    try:
        factor = math.exp(num.log_scale - den.log_scale) / den.scaled
    except OverflowError as exc:
        raise OverflowError("ratio exceeds the double range; use eval_log_ratio") from exc
    ratio = num.scaled * factor
    bound = (num.bound + abs(num.scaled) * den.bound / den.scaled) * factor
    return ratio, bound


def eval_series_ratio(problem, t):
    """``A(t)/B(t)``."""
    b = _series_bundle(problem, t, orders=(0,))
    return _ratio_from(b[("a", 0)], b[("b", 0)])[0]


def eval_transform_ratio(problem, x):
    """``F(x)/G(x)``."""
    b = _bundle(problem, x, orders=(0,))
    return _ratio_from(b[("n", 0)], b[("d", 0)])[0]


def eval_ratio(problem, point):
    if problem.kind == "series":
        return eval_series_ratio(problem, point)
    return eval_transform_ratio(problem, point)


def eval_log_side(problem, side, point, order=0):
    """``(log|S|, sign S)`` for one side (``"n"`` or ``"d"``) of the ratio."""
    b = _bundle(problem, point, orders=(order,))
    v = b[(side, order)]
    if v.scaled == 0:
        return -math.inf, 0.0
    return v.log_scale + math.log(abs(v.scaled)), math.copysign(1.0, v.scaled)


def eval_log_ratio(problem, point):
    """``(log|A/B|, sign(A/B))``; usable where the ratio itself overflows."""
    b = _bundle(problem, point, orders=(0,))
    num, den = b[("n", 0)], b[("d", 0)]
    if not den.scaled > 0:
        raise DivisionDomainError("denominator is not strictly positive")
    if num.scaled == 0:
        return -math.inf, 0.0
    log_abs = num.log_scale - den.log_scale + math.log(abs(num.scaled)) - math.log(den.scaled)
    return log_abs, math.copysign(1.0, num.scaled)


@dataclass(frozen=True)
class HValue:
    """``H`` at a point, as an absolute value and normalised by ``|A| + |A' B / B'|``."""

    value: float
    normalized: float
    ratio: float
    ratio_derivative: float


def _h_from_bundle(bundle):
    A, A1, B, B1 = bundle[("n", 0)], bundle[("n", 1)], bundle[("d", 0)], bundle[("d", 1)]
    if B1.scaled == 0.0 or abs(B1.scaled) <= DEGENERACY_BAND * B1.abs_scaled:
        raise DerivativeDegeneracyError("denominator derivative vanishes numerically")
    if not B.scaled > 0:
        raise DivisionDomainError("denominator is not strictly positive")
    # Work relative to exp(A.log_scale).
    q = A1.scaled / B1.scaled * math.exp(A1.log_scale - B1.log_scale + B.log_scale - A.log_scale)
    first = q * B.scaled
    second = A.scaled
    h_rel = first - second
    norm = abs(first) + abs(second)
    normalized = h_rel / norm if norm > 0 else 0.0
    with np.errstate(over="ignore"):
        value = float(h_rel * np.exp(A.log_scale)) if h_rel != 0 else 0.0
    with np.errstate(over="ignore"):
        ratio = float(A.scaled / B.scaled * np.exp(A.log_scale - B.log_scale)) if A.scaled else 0.0
    # (A/B)' = (B'/B^2) H
    log_pref = B1.log_scale - 2.0 * B.log_scale + A.log_scale
    with np.errstate(over="ignore"):
        deriv = float(B1.scaled / B.scaled ** 2 * h_rel * np.exp(log_pref)) if h_rel != 0 else 0.0
    return HValue(value, normalized, ratio, deriv)


def eval_H(problem, point):
    return _h_from_bundle(_bundle(problem, point))


def eval_H_series(problem, t):
    """``H_{A,B}(t) = (A'(t)/B'(t)) B(t) - A(t)``."""
    if problem.kind != "series":
        raise TypeError("expected a series problem")
    return eval_H(problem, t).value


def eval_H_transform(problem, x):
    """``H_{F,G}(x)`` for a transform problem."""
    if problem.kind != "transform":
        raise TypeError("expected a transform problem")
    return eval_H(problem, x).value


def ratio_derivative_via_H(problem, point):
    """``(B'/B^2) H`` at ``point``; equals the derivative of the ratio."""
    return eval_H(problem, point).ratio_derivative


# -- endpoint limits ----------------------------------------------------------


SIGNS = ("Positive", "Negative", "Zero", "Undetermined")
CONFIDENCES = ("Converged", "Extrapolated", "Failed")


@dataclass
class LimitEstimate:
    """Endpoint limit of ``H``.

    ``samples`` holds ``(point, H, normalised H)`` along the ladder. ``sign``
    is decided from the normalised samples; ``closed_form`` carries an exact
    value when one is known for the problem.
    """

    endpoint: str
    value: float
    sign: str
    samples: list
    confidence: str
    closed_form: float = None
    notes: list = field(default_factory=list)

    def decided_sign(self):
        """Sign to act on: the closed form when present, else the ladder sign."""
        if self.closed_form is not None:
            return sign_label(self.closed_form, ZERO_BAND * max(1.0, abs(self.closed_form)))
        return self.sign

    def to_dict(self):
        return {
            "endpoint": self.endpoint,
            "value": _json_float(self.value),
            "sign": self.sign,
            "confidence": self.confidence,
            "closed_form": _json_float(self.closed_form),
            "samples": [[_json_float(p), _json_float(v), _json_float(n)] for p, v, n in self.samples],
            "notes": list(self.notes),
        }


def _json_float(v):
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def sign_label(v, band=0.0):
    if v is None or math.isnan(v):
        return "Undetermined"
    if abs(v) <= band:
        return "Zero"
    return "Positive" if v > 0 else "Negative"


def ladder_points(problem, endpoint, steps=LADDER_STEPS):
    j = np.arange(1, steps + 1, dtype=float)
    r = problem.r
    if endpoint == LOWER:
        if problem.kind == "series":
            eps0 = min(1.0, 0.5 * r) / 16.0
        else:
            eps0 = min(1.0, 0.5 * r) / 256.0
        return eps0 * 2.0 ** (-j)
    if endpoint != UPPER:
        raise ValueError("endpoint must be LowerEnd or UpperEnd")
    if math.isfinite(r):
        return r * (1.0 - 2.0 ** (-j))
    return 2.0 ** j


def _aitken(vals):
    if len(vals) < 3:
        return vals[-1]
    x0, x1, x2 = vals[-3:]
    den = x2 - 2.0 * x1 + x0
    if den == 0 or not np.isfinite(den):
        return x2
    return x2 - (x2 - x1) ** 2 / den


def _decide(samples):
    """Sign and confidence from the trailing normalised samples."""
    norm = [s[2] for s in samples]
    if len(norm) < SIGN_WINDOW:
        return "Undetermined", "Failed"
    tail = norm[-SIGN_WINDOW:]
    labels = {sign_label(v, ZERO_BAND) for v in tail}
    if labels == {"Zero"}:
        return "Zero", "Converged"
    if len(labels) != 1:
        return "Undetermined", "Failed"
    mags = np.abs(tail)
    d = np.diff(mags)
    slack = 1e-12 * mags.max()
    monotone = np.all(d <= slack) or np.all(d >= -slack)
    return labels.pop(), "Converged" if monotone else "Extrapolated"


def _powerk_lower_closed_form(problem):
    if problem.kind != "series" or problem.family.id != "PowerK":
        return None
    a = problem.a.values(np.array([0.0, 1.0]))
    b = problem.b.values(np.array([0.0, 1.0]))
    if not (b[0] > 0 and b[1] > 0):
        return None
    return float(b[0] * (a[1] / b[1] - a[0] / b[0]))


def endpoint_limit_H(problem, endpoint, steps=LADDER_STEPS):
    """Estimate ``H(0+)`` (``LowerEnd``) or ``H(r-)`` (``UpperEnd``).

    ``H`` is sampled on a geometric ladder towards the endpoint. The ladder
    stops at the first point where the sums or integrals fail to converge.
    For a finite right end at which ``H`` can still be evaluated, that value
    is the limit by continuity.
    """
    points = ladder_points(problem, endpoint, steps)
    samples = []
    notes = []
    for p in points:
        try:
            h = eval_H(problem, p)
        except (NonConvergenceError, DerivativeDegeneracyError, DivisionDomainError, OverflowError) as exc:
            notes.append(f"ladder stopped at {p:.6g}: {type(exc).__name__}")
            break
        samples.append((float(p), h.value, h.normalized))

    closed = _powerk_lower_closed_form(problem) if endpoint == LOWER else None

    if endpoint == UPPER and math.isfinite(problem.r):
        try:
            h = eval_H(problem, problem.r)
            label = sign_label(h.normalized, ZERO_BAND)
            notes.append("value taken at the right end itself")
            return LimitEstimate(endpoint, h.value, label, samples + [(problem.r, h.value, h.normalized)],
                                 "Converged", None, notes)
        except (NonConvergenceError, DerivativeDegeneracyError, DivisionDomainError, OverflowError, DomainError):
            pass

    sign, confidence = _decide(samples)
    if samples:
        value = _aitken([s[1] for s in samples]) if confidence != "Failed" else samples[-1][1]
    else:
        value = math.nan
    if endpoint == UPPER and not math.isfinite(problem.r) and confidence == "Converged":
        # An infinite end is only ever probed up to a finite point.
        confidence = "Extrapolated"
        notes.append(f"limit at infinity inferred from samples up to {samples[-1][0]:.6g}")
    if closed is not None:
        if sign_label(closed, 1e-12) not in (sign, "Zero") and confidence == "Converged":
            notes.append("ladder sign disagrees with the closed form")
    return LimitEstimate(endpoint, float(value), sign, samples, confidence, closed, notes)


def endpoint_limit_H_series(problem, endpoint, steps=LADDER_STEPS):
    if problem.kind != "series":
        raise TypeError("expected a series problem")
    return endpoint_limit_H(problem, endpoint, steps)


def endpoint_limit_H_transform(problem, endpoint, steps=LADDER_STEPS):
    if problem.kind != "transform":
        raise TypeError("expected a transform problem")
    return endpoint_limit_H(problem, endpoint, steps)
