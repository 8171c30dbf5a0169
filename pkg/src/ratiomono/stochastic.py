"""Laplace transforms of nonnegative random variables and the Laplace-transform-ratio order.

``X <=_Lt-r Y`` holds when ``x -> L_Y(x)/L_X(x)`` is decreasing on ``(0, inf)``,
where ``L_Z(x) = E exp(-x Z)``.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .classifier import coefficient_ratio_shape, integrand_ratio_shape
from .errors import (
    DerivativeDegeneracyError,
    DivisionDomainError,
    DomainError,
    NonConvergenceError,
    OracleEvaluationError,
)
from .oracle import observe
from .patterns import Pattern, jsonable
from .quadrature import integrate
from .ratio_engine import (
    LOWER,
    SeriesRatioProblem,
    TransformRatioProblem,
    eval_log_side,
    eval_series,
    eval_transform,
    endpoint_limit_H,
)
from .sources import (
    ConstIntegrand,
    FiniteCoefficients,
    TruncatedCoefficients,
    FunctionCoefficients,
    GammaPdf,
    PolyExpIntegrand,
    PolyGeometricCoefficients,
    ProductIntegrand,
    ReciprocalGammaIntegrand,
    UniformPdf,
)
from .specfun import ln_gamma

TAIL_MASS = 1e-12
NORMALIZATION_TOL = 1e-6
FALLBACK_INTERVAL = (1e-4, 1e4)
FALLBACK_POINTS = 256
_MAX_SUPPORT = 1 << 20

X_LE_Y = "X_le_ltr_Y"
Y_LE_X = "Y_le_ltr_X"
NEITHER = "Neither"
INCONCLUSIVE = "Inconclusive"
RELATIONS = (X_LE_Y, Y_LE_X, NEITHER, INCONCLUSIVE)

_NUMERIC = (NonConvergenceError, DerivativeDegeneracyError, DivisionDomainError, OverflowError,
            OracleEvaluationError, DomainError)


# -- models -------------------------------------------------------------------


def _tail_certificate(source, eps):
    """Smallest ``K`` with ``sum_{k > K} p_k < eps``, plus the total mass.

    Terms are generated in doubling chunks until the last few term ratios are
    nonincreasing and below one; the remainder past that point is bounded by
    a geometric series.
    """
    n = 64
    while True:
        k = np.arange(n, dtype=float)
        logs = source.log_abs(k)
        p = np.where(source.sign(k) > 0, np.exp(logs), 0.0)
        d = np.diff(logs[-6:])
        tail_ok = np.all(np.isfinite(d)) and np.all(np.diff(d) <= 1e-12 * (1 + np.abs(d[1:]))) and d[-1] < 0
        if tail_ok or not np.all(np.isfinite(logs[-6:])):
            if tail_ok:
                remainder = p[-1] * math.exp(d[-1]) / -math.expm1(d[-1])
            else:
                remainder = 0.0  # the sequence has ended
            if remainder < 0.01 * eps:
                after = np.cumsum(p[::-1])[::-1]  # after[j] = sum_{k >= j} p_k
                tails = np.append(after[1:], 0.0) + remainder
                K = int(np.argmax(tails < eps))
                return K, float(after[0] + remainder), p[:K + 1]
        if n >= _MAX_SUPPORT:
            raise NonConvergenceError("pmf tail does not become negligible", terms_used=n)
        n *= 2


@dataclass
class DiscreteRV:
    """Nonnegative integer-valued random variable with pmf ``p_0, p_1, ...``.

    The support is truncated at the first ``K`` whose tail mass is below
    ``1e-12``; ``pmf`` holds ``p_0 .. p_K``.
    """

    source: object
    name: str = "pmf"
    tail_mass: float = TAIL_MASS
    kind: str = field(default="discrete", init=False)

    def __post_init__(self):
        src = self.source
        if src.length is not None:
            k = np.arange(src.length, dtype=float)
            p = src.values(k)
            if np.any(p < 0) or not np.all(np.isfinite(p)):
                raise DomainError("probabilities must be finite and nonnegative")
            after = np.cumsum(p[::-1])[::-1]
            tails = np.append(after[1:], 0.0)
            self.K = int(np.argmax(tails < self.tail_mass))
            total = float(math.fsum(p))
            pmf = p[:self.K + 1]
        else:
            k = np.arange(256, dtype=float)
            if np.any(src.sign(k) < 0):
                raise DomainError("probabilities must be nonnegative")
            self.K, total, pmf = _tail_certificate(src, self.tail_mass)
        self.normalization = total
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"probabilities sum to {total!r}, not 1")
        self.pmf = np.asarray(pmf, dtype=float)

    def truncated(self, K=None):
        """Coefficients ``p_0 .. p_K``, zero past a finite support."""
        K = self.K if K is None else int(K)
        return TruncatedCoefficients(self.source, K + 1, name=self.name)

    def describe(self):
        return {"kind": "discrete", "name": self.name, "support_max": self.K,
                "normalization": self.normalization}


@dataclass
class ContinuousRV:
    """Nonnegative continuous random variable given by a density on ``(0, support_end)``."""

    density: object
    name: str = "pdf"
    kind: str = field(default="continuous", init=False)

    def __post_init__(self):
        self.support_end = float(getattr(self.density, "support_end", math.inf))
        ts = np.concatenate([np.geomspace(1e-6, 1.0, 64), np.linspace(1.0, 50.0, 64)])
        ts = ts[ts < self.support_end]
        if np.any(self.density.sign(ts) < 0):
            raise DomainError("density must be nonnegative")
        res = integrate(lambda t: (self.density.log_abs(t)[None], self.density.sign(t)[None]),
                        0.0, self.support_end, 1, breakpoints=self.density.breakpoints)
        self.normalization = float(res.value[0])
        if abs(self.normalization - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"density integrates to {self.normalization!r}, not 1")

    def describe(self):
        return {"kind": "continuous", "name": self.name, "support_end": self.support_end,
                "normalization": self.normalization}


def _normalized_integrand(integrand, name):
    res = integrate(lambda t: (integrand.log_abs(t)[None], integrand.sign(t)[None]),
                    0.0, integrand.support_end, 1, breakpoints=integrand.breakpoints)
    z = float(res.value[0])
    out = ProductIntegrand(integrand, ConstIntegrand(1.0 / z))
    out.name = name
    return out


def exponential(lam):
    if not lam > 0:
        raise DomainError("rate must be positive")
    return ContinuousRV(PolyExpIntegrand([lam], lam, name=f"exp:{lam:g}"), f"exp:{lam:g}")


def gamma(shape, rate):
    return ContinuousRV(GammaPdf(shape, rate), f"gamma:{shape:g},{rate:g}")


def uniform(theta):
    return ContinuousRV(UniformPdf(theta), f"uniform:{theta:g}")


def reciprocal_gamma_weight(a, b):
    """Density proportional to ``1/Gamma(a t + b)`` on ``(0, inf)``."""
    name = f"recip-gamma:{a:g},{b:g}"
    return ContinuousRV(_normalized_integrand(ReciprocalGammaIntegrand(a, b), name), name)


def geometric_rv(rho):
    """``p_k = (1 - rho) rho^k``."""
    if not 0 < rho < 1:
        raise DomainError("rho must lie in (0, 1)")
    return DiscreteRV(PolyGeometricCoefficients([1.0 - rho], rho), f"geom:{rho:g}")


def size_biased_geometric_rv(rho):
    """``p_k = (1 - rho)^2 (k + 1) rho^k``."""
    if not 0 < rho < 1:
        raise DomainError("rho must lie in (0, 1)")
    c = (1.0 - rho) ** 2
    return DiscreteRV(PolyGeometricCoefficients([c, c], rho), f"sbgeom:{rho:g}")


def poisson_rv(lam):
    if not lam > 0:
        raise DomainError("mean must be positive")
    log_lam = math.log(lam)

    def log_p(k):
        return -lam + k * log_lam - ln_gamma(k + 1.0).value

    return DiscreteRV(FunctionCoefficients(log_p, log=True, name=f"poisson:{lam:g}"), f"poisson:{lam:g}")


def pmf_rv(values, name=None):
    values = [float(v) for v in values]
    return DiscreteRV(FiniteCoefficients(values), name or "pmf:" + ",".join(f"{v:g}" for v in values))


def read_pmf_file(path):
    """Read a two-column ``k,p`` CSV with a header and ``k`` ascending from 0."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip().lower() for c in rows[0]] != ["k", "p"]:
        raise ValueError(f"{path}: expected a 'k,p' header")
    probs = []
    for i, row in enumerate(rows[1:]):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ValueError(f"{path}: row {i + 2} must have two columns")
        k, p = int(row[0]), float(row[1])
        if k != len(probs):
            raise ValueError(f"{path}: k must run 0, 1, 2, ... (got {k} at row {i + 2})")
        probs.append(p)
    return pmf_rv(probs, name=f"pmf-file:{path}")


# -- transforms ---------------------------------------------------------------


def _self_problem(rv):
    if rv.kind == "discrete":
        src = rv.truncated()
        return SeriesRatioProblem(src, src, "ExpDecayK")
    return TransformRatioProblem(rv.density, rv.density, "ExpDecayX", 0.0, rv.support_end)


def laplace_transform(rv, x):
    """``E exp(-x Z)`` for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise DomainError("x must be positive")
    problem = _self_problem(rv)
    if rv.kind == "discrete":
        return eval_series(problem, "a", x)
    return eval_transform(problem, "f", x)


def log_laplace_transform(rv, x):
    """``log E exp(-x Z)``, usable where the transform underflows."""
    x = float(x)
    if not x > 0:
        raise DomainError("x must be positive")
    return eval_log_side(_self_problem(rv), "n", x)[0]


# -- the order ----------------------------------------------------------------


@dataclass
class OrderVerdict:
    relation: str
    provenance: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.relation == NEITHER and not self.provenance.startswith("numeric"):
            raise ValueError("Neither can only come from the numeric fallback")

    def to_dict(self):
        return jsonable({"relation": self.relation, "provenance": self.provenance,
                         "diagnostics": self.diagnostics})


def _ratio_problem(X, Y):
    """Problem for ``L_X / L_Y`` with the numerator built from ``X``."""
    if X.kind == "discrete":
        K = max(X.K, Y.K)
        return SeriesRatioProblem(X.truncated(K), Y.truncated(K), "ExpDecayK")
    beta = max(X.support_end, Y.support_end)
    return TransformRatioProblem(X.density, Y.density, "ExpDecayX", 0.0, beta)


def fallback_order(X, Y, interval=FALLBACK_INTERVAL, n=FALLBACK_POINTS):
    """Grid observation of ``L_Y/L_X``: decreasing gives ``X <= Y``, increasing ``Y <= X``."""

    def log_ratio(x):
        return log_laplace_transform(Y, x) - log_laplace_transform(X, x)

    pts = np.geomspace(interval[0], interval[1], n)
    try:
        logs = np.array([log_ratio(p) for p in pts])
    except _NUMERIC as exc:
        return OrderVerdict(INCONCLUSIVE, "numeric-fallback", {"error": str(exc)})
    if not np.all(np.isfinite(logs)):
        return OrderVerdict(INCONCLUSIVE, "numeric-fallback", {"error": "non-finite transform ratio"})
    # Observe the ratio itself when it fits in double range, its log otherwise.
    vals = np.exp(logs) if np.all(np.abs(logs) < 700) else logs
    obs = observe(pts, vals, spacing="log", interval=interval)
    diag = {"observed": obs.to_dict(), "grid_supported": True,
            "note": "decided on a finite log grid; not a proof"}
    if obs.pattern == Pattern.DECREASING:
        return OrderVerdict(X_LE_Y, "numeric-fallback", diag)
    if obs.pattern == Pattern.INCREASING:
        return OrderVerdict(Y_LE_X, "numeric-fallback", diag)
    if obs.pattern == Pattern.CONSTANT:
        diag["symmetry"] = "L_Y/L_X is constant, so both X <= Y and Y <= X hold"
        return OrderVerdict(X_LE_Y, "numeric-fallback", diag)
    return OrderVerdict(NEITHER, "numeric-fallback", diag)


def _from_theorems(X, Y):
    """Order from the shape of ``p_k/q_k`` (or ``f_X/f_Y``); ``None`` if undecided."""
    problem = _ratio_problem(X, Y)
    if problem.kind == "series":
        shape = coefficient_ratio_shape(problem)
    else:
        shape = integrand_ratio_shape(problem)
    diag = {"shape": shape.to_dict()}
    if shape.kind == Pattern.INCREASING:
        return OrderVerdict(Y_LE_X, "condition (i): increasing density ratio", diag)
    if shape.kind == Pattern.DECREASING:
        return OrderVerdict(X_LE_Y, "condition (i): decreasing density ratio", diag)
    if shape.kind.unimodal:
        est = endpoint_limit_H(problem, LOWER)
        diag["endpoint_H"] = est.to_dict()
        sign = est.decided_sign()
        if est.confidence == "Failed":
            return None, diag
        if shape.kind == Pattern.INC_THEN_DEC and sign in ("Positive", "Zero"):
            return OrderVerdict(Y_LE_X, "condition (ii): unimodal density ratio, H(0+) >= 0", diag)
        if shape.kind == Pattern.DEC_THEN_INC and sign in ("Negative", "Zero"):
            return OrderVerdict(X_LE_Y, "condition (ii): unimodal density ratio, H(0+) <= 0", diag)
    return None, diag


def lt_ratio_order(X, Y, check=False):
    """Decide the Laplace-transform-ratio order between ``X`` and ``Y``.

    The density-ratio conditions are tried first; when neither applies the
    transform ratio is observed on a log grid. With ``check=True`` the grid
    observation is attached to theorem-backed verdicts as well.
    """
    diag = {}
    if X.kind == Y.kind:
        try:
            out = _from_theorems(X, Y)
        except _NUMERIC as exc:
            out = None, {"theorem_error": str(exc)}
        if isinstance(out, OrderVerdict):
            if check:
                out.diagnostics["fallback"] = fallback_order(X, Y).to_dict()
            return out
        diag = out[1]
    else:
        diag = {"note": "mixed discrete and continuous models"}
    verdict = fallback_order(X, Y)
    verdict.diagnostics.update(diag)
    return verdict
