"""Decision layer: the D1-D7 partition, gamma-ratio patterns and rule dispatch.

Provenance strings name the rule that fired:

``monotone-coefficients:<class>``
    monotone ``a_k/b_k`` (or ``f/g``) transferred through a DW11/DW12/CW11/CW12 kernel;
``unimodal-coefficients:<class>:<endpoint sign>``
    unimodal ``a_k/b_k`` decided by the sign of ``H`` at the relevant end;
``gamma-ratio:<region>`` / ``gamma-sequence:<region>``
    the pattern of ``Gamma(ct+d)/Gamma(at+b)`` in ``t`` or over integers ``k``;
``reciprocal-gamma:<region>:<class>[:<endpoint sign>]``
    ratios of reciprocal-gamma series or transforms;
``numeric-only``
    no rule applies; the oracle's observation is attached for reference.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    BracketNotFoundError,
    DerivativeDegeneracyError,
    DivisionDomainError,
    DomainError,
    NonConvergenceError,
    OracleEvaluationError,
)
from .kernels import DiscreteKernel, get_kernel
from .oracle import detect_pattern, pattern_from_runs
from .patterns import MonotonicityVerdict, Pattern, jsonable
from .ratio_engine import (
    LOWER,
    UPPER,
    ZERO_BAND,
    SeriesRatioProblem,
    TransformRatioProblem,
    endpoint_limit_H,
    eval_H,
    eval_log_ratio,
    eval_ratio,
    ladder_points,
)
from .sources import ReciprocalGammaCoefficients, ReciprocalGammaIntegrand
from .specfun import digamma, digamma_array, ln_gamma

PSI_ZERO_BAND = 1e-10
PLATEAU_RTOL = 1e-12
DEFAULT_HORIZON = 64
MAX_HORIZON = 1024
BISECT_WIDTH = 1e-10
_BRACKET_LIMIT = 2.0 ** 60
# Positive zero of the digamma function.
PSI_ROOT = 1.4616321449683623
Q_SCAN_POINTS = 4096


class RegionLabel(str, Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    D5 = "D5"
    D6 = "D6"
    D7 = "D7"

    def __str__(self):
        return self.value


def _check_params(a, b, c, d):
    vals = tuple(float(v) for v in (a, b, c, d))
    if not all(v > 0 and math.isfinite(v) for v in vals):
        raise DomainError("a, b, c, d must be positive and finite")
    return vals


def psi_expression(a, b, c, d):
    """``c psi(d) - a psi(b)`` and the zero band applied to it."""
    cd = c * digamma(d).value
    ab = a * digamma(b).value
    return cd - ab, PSI_ZERO_BAND * (abs(cd) + abs(ab))


def classify_region(a, b, c, d):
    """Region of ``(a, b, c, d)`` among D1..D7."""
    a, b, c, d = _check_params(a, b, c, d)
    if a == c:
        return RegionLabel.D1
    if a > c:
        if d <= b:
            return RegionLabel.D2
        expr, band = psi_expression(a, b, c, d)
        return RegionLabel.D4 if expr > band else RegionLabel.D3
    if b <= d:
        return RegionLabel.D5
    expr, band = psi_expression(a, b, c, d)
    return RegionLabel.D7 if expr < -band else RegionLabel.D6


def q_function(a, b, c, d, t):
    """``Q(t) = c psi(ct + d) - a psi(at + b)``, the log-derivative of the gamma ratio."""
    return c * digamma(c * t + d).value - a * digamma(a * t + b).value


def _rises_first(a, b, c, d):
    """Sign of ``Q`` near zero when it differs from the sign at infinity, else 0.

    ``Q(inf)`` has the sign of ``c - a``. Returns +1 when the ratio rises
    before falling, -1 when it falls before rising, 0 when it is monotone.
    """
    if a == c:
        return 0
    expr, band = psi_expression(a, b, c, d)
    if a > c and expr > band:
        return 1
    if a < c and expr < -band:
        return -1
    return 0


def find_turning_point(a, b, c, d):
    """The positive root of ``Q`` where the gamma ratio changes direction, by bisection."""
    a, b, c, d = _check_params(a, b, c, d)
    bound = open_interval_bound(a, b, c, d)
    if bound is not None:
        roots, _ = q_sign_changes(a, b, c, d, bound)
        if len(roots) != 1:
            raise BracketNotFoundError(f"Q changes sign {len(roots)} times on (0, inf)")
        return roots[0]
    start_sign = _rises_first(a, b, c, d)
    if start_sign == 0:
        region = classify_region(a, b, c, d)
        raise BracketNotFoundError(f"Q keeps one sign on (0, inf) for these parameters ({region.value})")
    lo, hi = 0.0, 1.0
    while start_sign * q_function(a, b, c, d, hi) > 0:
        lo = hi
        hi *= 2.0
        if hi > _BRACKET_LIMIT:
            raise BracketNotFoundError("no sign change of Q found below 2^60")
    while hi - lo > max(BISECT_WIDTH, 4.0 * math.ulp(hi)):
        mid = 0.5 * (lo + hi)
        if start_sign * q_function(a, b, c, d, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def open_interval_bound(a, b, c, d):
    """``T`` beyond which ``Q`` keeps the sign of ``c - a``, or ``None`` if that holds on all of ``(0, inf)``.

    In D2, ``Q(t) <= (c - a) psi(at + b)``, which is negative once
    ``at + b`` passes the zero of digamma; D5 is the mirror image with
    ``ct + d``. Elsewhere ``Q`` changes sign at most once, decided by ``Q(0)``.
    """
    region = classify_region(a, b, c, d)
    if region == RegionLabel.D2 and b < PSI_ROOT:
        return (PSI_ROOT - b) / a
    if region == RegionLabel.D5 and d < PSI_ROOT:
        return (PSI_ROOT - d) / c
    return None


def _bisect_q(a, b, c, d, lo, hi, sign_lo):
    while hi - lo > max(BISECT_WIDTH * max(hi, 1e-300), 4.0 * math.ulp(hi)):
        mid = 0.5 * (lo + hi)
        if sign_lo * q_function(a, b, c, d, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def q_sign_changes(a, b, c, d, upper, n=Q_SCAN_POINTS):
    """Sign changes of ``Q`` on ``[0, upper]`` located on a dense grid and refined by bisection."""
    ts = np.concatenate([[0.0], np.geomspace(upper * 1e-12, upper, n)])
    q = c * digamma_array(c * ts + d) - a * digamma_array(a * ts + b)
    band = PSI_ZERO_BAND * (np.abs(c * digamma_array(c * ts + d)) + np.abs(a * digamma_array(a * ts + b)))
    sg = np.where(np.abs(q) <= band, 0, np.sign(q))
    roots = []
    last_i, last_s = None, 0
    for i, v in enumerate(sg):
        if v == 0:
            continue
        if last_s and v != last_s:
            roots.append(_bisect_q(a, b, c, d, float(ts[last_i]), float(ts[i]), last_s))
        last_i, last_s = i, v
    return roots, (int(sg[np.nonzero(sg)[0][0]]) if np.any(sg) else 0)


def gamma_ratio_pattern(a, b, c, d):
    """Shape of ``t -> Gamma(ct + d)/Gamma(at + b)`` on ``(0, inf)``.

    In D3, D4, D6 and D7, and in D2/D5 when ``b`` (resp. ``d``) is past the zero
    of digamma, the shape follows from the sign of ``Q(0) = c psi(d) - a psi(b)``
    against the sign of ``c - a``. For the remaining D2/D5 points ``Q`` is
    scanned on the finite interval outside which its sign is fixed; these can
    be unimodal against the expected direction, or change direction twice
    (reported as ``Other``).
    """
    a, b, c, d = _check_params(a, b, c, d)
    region = classify_region(a, b, c, d)
    prov = f"gamma-ratio:{region.value}"
    notes = []
    t0 = None
    final = Pattern.DECREASING if a > c else Pattern.INCREASING
    if region == RegionLabel.D1:
        pattern = Pattern.INCREASING if d > b else Pattern.DECREASING if d < b else Pattern.CONSTANT
        return MonotonicityVerdict(pattern, prov, None, domain=(0.0, math.inf))
    bound = open_interval_bound(a, b, c, d)
    if bound is None:
        first = _rises_first(a, b, c, d)
        if first == 0:
            pattern = final
        else:
            pattern = Pattern.INC_THEN_DEC if first > 0 else Pattern.DEC_THEN_INC
            t0 = find_turning_point(a, b, c, d)
        return MonotonicityVerdict(pattern, prov, t0, domain=(0.0, math.inf))
    prov += ":scanned"
    roots, _ = q_sign_changes(a, b, c, d, bound)
    notes.append(f"sign of Q scanned on [0, {bound:.6g}]; fixed beyond")
    if not roots:
        pattern = final
    elif len(roots) == 1:
        pattern = Pattern.INC_THEN_DEC if final == Pattern.DECREASING else Pattern.DEC_THEN_INC
        t0 = roots[0]
        notes.append(f"moves against its eventual direction before t={t0:.6g}")
    else:
        pattern = Pattern.OTHER
        notes.append("direction changes at " + ", ".join(f"{r:.6g}" for r in roots))
    return MonotonicityVerdict(pattern, prov, t0, domain=(0.0, math.inf), notes=notes)


# -- coefficient shapes -------------------------------------------------------


@dataclass
class CoefficientShape:
    kind: Pattern
    m: int = None
    scan_horizon: int = 0
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.kind = Pattern(self.kind)
        if self.kind.unimodal != (self.m is not None):
            raise ValueError("m is present exactly for unimodal shapes")

    def to_dict(self):
        return jsonable({"kind": self.kind, "m": self.m, "scan_horizon": self.scan_horizon,
                         "notes": self.notes})


def _shape_from_log_ratio(k, log_r, sign_r, horizon):
    """Shape of a ratio sequence given as sign and log-magnitude at indices ``k``."""
    if len(k) == 0:
        return CoefficientShape(Pattern.OTHER, None, horizon, ["no usable indices"])
    positive = np.all(sign_r > 0)
    if positive:
        vals = log_r
        d = np.diff(vals)
        flat = np.abs(d) <= PLATEAU_RTOL
    else:
        vals = sign_r * np.exp(log_r - np.max(log_r[np.isfinite(log_r)], initial=0.0))
        vals = np.where(sign_r == 0, 0.0, vals)
        d = np.diff(vals)
        flat = np.abs(d) <= PLATEAU_RTOL * np.maximum(np.abs(vals[1:]), np.abs(vals[:-1]))
    s = np.where(flat, 0, np.sign(d)).astype(int)
    runs = []
    for i, v in enumerate(s):
        if v == 0:
            continue
        if runs and runs[-1][0] == v:
            runs[-1][2] = i
        else:
            runs.append([v, i, i])
    kind = pattern_from_runs(runs)
    m = None
    if kind == Pattern.INC_THEN_DEC:
        m = int(k[int(np.argmax(vals))])
    elif kind == Pattern.DEC_THEN_INC:
        m = int(k[int(np.argmin(vals))])
    return CoefficientShape(kind, m, horizon)


def _midpoint(r):
    return 0.5 * r if math.isfinite(r) else 1.0


def coefficient_ratio_shape(problem, horizon=DEFAULT_HORIZON):
    """Shape of ``k -> a_k / b_k`` scanned over ``k < horizon``.

    Indices with ``a_k = b_k = 0`` are skipped; ``b_k = 0`` with ``a_k != 0``
    gives ``Other``. For infinite sequences the horizon doubles (up to 1024)
    until the terms at the middle of the domain are negligible.
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    a, b = problem.a, problem.b
    finite = a.length is not None and b.length is not None
    notes = []
    if finite:
        horizon = max(a.length, b.length)
    else:
        t_mid = _midpoint(problem.r)
        while True:
            k = np.arange(horizon, dtype=float)
            lw, _ = problem.family.log_abs_sign(k, np.full_like(k, t_mid), 0)
            la = a.log_abs(k) + lw
            lb = b.log_abs(k) + lw
            mags = np.logaddexp(la, lb)
            top = np.max(mags[np.isfinite(mags)]) if np.any(np.isfinite(mags)) else 0.0
            if mags[-1] - top <= math.log(problem.tol):
                break
            if horizon >= MAX_HORIZON:
                return CoefficientShape(Pattern.OTHER, None, horizon,
                                        ["terms not negligible by the largest scan horizon"])
            horizon = min(2 * horizon, MAX_HORIZON)
    k = np.arange(horizon, dtype=float)
    sa, sb = a.sign(k), b.sign(k)
    la, lb = a.log_abs(k), b.log_abs(k)
    both_zero = (sa == 0) & (sb == 0)
    bad = (sb == 0) & (sa != 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        return CoefficientShape(Pattern.OTHER, None, horizon, [f"b_{i} = 0 while a_{i} != 0"])
    keep = ~both_zero
    with np.errstate(invalid="ignore"):
        log_r = np.where(sa[keep] == 0, -np.inf, la[keep] - lb[keep])
    shape = _shape_from_log_ratio(k[keep], log_r, sa[keep], horizon)
    shape.notes.extend(notes)
    return shape


def gamma_sequence_pattern(a, b, c, d):
    """Shape of ``k -> Gamma(ck + d)/Gamma(ak + b)`` over integers ``k >= 0``.

    When the continuous ratio is unimodal, the sampled sequence shares its
    shape only if the first step already moves in the initial direction;
    otherwise the whole sequence is monotone.
    """
    a, b, c, d = _check_params(a, b, c, d)
    region = classify_region(a, b, c, d)

    def log_s(k):
        return ln_gamma(c * k + d).value - ln_gamma(a * k + b).value

    bound = open_interval_bound(a, b, c, d)
    if bound is not None:
        # Every step starting past the bound moves in the final direction, so
        # the terms up to two past it fix the shape exactly.
        n = int(math.floor(bound)) + 3
        k = np.arange(n, dtype=float)
        log_r = np.array([log_s(int(i)) for i in k])
        shape = _shape_from_log_ratio(k, log_r, np.ones(n), n)
        shape.notes.append(f"terms read up to k={n - 1}")
        return shape, region

    fn_verdict = gamma_ratio_pattern(a, b, c, d)
    if not fn_verdict.pattern.unimodal:
        return CoefficientShape(fn_verdict.pattern, None, 0), region
    t0 = fn_verdict.turning_point
    up = fn_verdict.pattern == Pattern.INC_THEN_DEC
    step = log_s(1) - log_s(0)
    moves_first = step > PLATEAU_RTOL if up else step < -PLATEAU_RTOL
    if not moves_first:
        kind = Pattern.DECREASING if up else Pattern.INCREASING
        return CoefficientShape(kind, None, 0, [f"continuous turning point {t0:.6g} precedes k=1"]), region
    lo_k = max(int(math.floor(t0)), 0)
    cands = [lo_k, lo_k + 1]
    vals = [log_s(k) for k in cands]
    m = cands[int(np.argmax(vals))] if up else cands[int(np.argmin(vals))]
    if vals[0] == vals[1]:
        m = cands[0]
    kind = Pattern.INC_THEN_DEC if up else Pattern.DEC_THEN_INC
    notes = [] if up else ["read as decreasing then increasing, the mirror of the D4 case"]
    return CoefficientShape(kind, max(m, 1), 0, notes), region


# -- turning points of H ------------------------------------------------------


def _h_sign(problem, p):
    h = eval_H(problem, p)
    if abs(h.normalized) <= ZERO_BAND:
        return 0
    return 1 if h.normalized > 0 else -1


def locate_h_root(problem, n_scan=64, rel_width=1e-10):
    """Point where ``H`` changes sign inside the working domain.

    Scans a log grid between the two ladder ends, then bisects the first
    bracket with opposite signs. Returns ``None`` when no change is found.
    """
    lo = float(ladder_points(problem, LOWER)[-1])
    if math.isfinite(problem.r):
        hi = float(problem.r)
    else:
        hi = float(ladder_points(problem, UPPER)[-1])
    grid = np.geomspace(lo, hi, n_scan)
    prev_p, prev_s = None, 0
    for p in grid:
        try:
            s = _h_sign(problem, p)
        except (NonConvergenceError, DerivativeDegeneracyError, DivisionDomainError):
            break
        if s == 0:
            continue
        if prev_s and s != prev_s:
            a_, b_ = prev_p, float(p)
            while b_ - a_ > rel_width * b_:
                mid = math.sqrt(a_ * b_) if b_ / a_ > 4 else 0.5 * (a_ + b_)
                sm = _h_sign(problem, mid)
                if sm == 0:
                    return mid
                if sm == prev_s:
                    a_ = mid
                else:
                    b_ = mid
            return 0.5 * (a_ + b_)
        prev_p, prev_s = float(p), s
    return None


# -- dispatch -----------------------------------------------------------------

_MONOTONE_CLASSES = {"same": ("DW11", "CW11"), "opposite": ("DW12", "CW12")}


def _domain(problem):
    return (0.0, problem.r)


def _numeric_only(problem, reason, notes=()):
    notes = list(notes) + [reason]
    try:
        lo, hi = _oracle_interval(problem)
        try:
            obs = detect_pattern(lambda p: eval_ratio(problem, p), (lo, hi), n=128, vectorized=False)
        except OracleEvaluationError:
            obs = detect_pattern(lambda p: _log_ratio_positive(problem, p), (lo, hi), n=128,
                                 vectorized=False)
        notes.append(f"oracle observed {obs.pattern.value} on [{lo:.3g}, {hi:.3g}]")
    except Exception as exc:  # the fallback is informational only
        notes.append(f"oracle fallback failed: {exc}")
    return MonotonicityVerdict(Pattern.INCONCLUSIVE, "numeric-only", None, [], _domain(problem), notes)


def _log_ratio_positive(problem, p):
    # log is monotone, so positive ratios may be observed on the log scale.
    lr, sg = eval_log_ratio(problem, p)
    if sg <= 0:
        raise DivisionDomainError("ratio is not positive")
    return lr


def _oracle_interval(problem):
    lo = 1e-3 * min(1.0, problem.r)
    hi = 0.999 * problem.r if math.isfinite(problem.r) else 30.0
    return lo, hi


def dispatch(problem, shape, classes, prefix):
    """Apply the monotone or unimodal rule for a ratio-of-coefficients ``shape``."""
    domain = _domain(problem)
    kind = shape.kind
    notes = ["uniform convergence of the differentiated sums is assumed, not verified"]
    if kind == Pattern.CONSTANT:
        return MonotonicityVerdict(Pattern.CONSTANT, f"{prefix}:constant", None, [], domain, notes, shape)
    if kind.monotone:
        for cls in classes:
            if cls in _MONOTONE_CLASSES["same"]:
                return MonotonicityVerdict(kind, f"monotone-{prefix}:{cls}", None, [], domain, notes, shape)
            if cls in _MONOTONE_CLASSES["opposite"]:
                return MonotonicityVerdict(kind.flipped(), f"monotone-{prefix}:{cls}", None, [], domain,
                                           notes, shape)
        return _numeric_only(problem, "no monotone-transfer class declared for this kernel", notes)
    if kind.unimodal:
        if "DW2" in classes or "CW2" in classes:
            cls = "DW2" if "DW2" in classes else "CW2"
            return _unimodal(problem, shape, cls, UPPER, prefix, notes)
        if "DW3" in classes or "CW3" in classes:
            cls = "DW3" if "DW3" in classes else "CW3"
            return _unimodal(problem, shape, cls, LOWER, prefix, notes)
        return _numeric_only(problem, "kernel has no class covering unimodal coefficient ratios", notes)
    return _numeric_only(problem, "coefficient ratio is neither monotone nor unimodal", notes)


def _unimodal(problem, shape, cls, endpoint, prefix, notes):
    domain = _domain(problem)
    est = endpoint_limit_H(problem, endpoint)
    sign = est.decided_sign()
    end = "r-" if endpoint == UPPER else "0+"
    if est.confidence == "Failed" or sign == "Undetermined":
        notes = notes + [f"sign of H({end}) could not be determined"]
        return MonotonicityVerdict(Pattern.INCONCLUSIVE, f"unimodal-{prefix}:{cls}", None, [est], domain,
                                   notes, shape)
    if est.confidence == "Extrapolated":
        notes = notes + [f"H({end}) sign extrapolated from a finite ladder"]
    inc_first = shape.kind == Pattern.INC_THEN_DEC
    nonneg = sign in ("Positive", "Zero")
    nonpos = sign in ("Negative", "Zero")
    if endpoint == UPPER:
        # DW2/CW2: B' > 0, ratio' has the sign of H.
        if inc_first:
            pattern = Pattern.INCREASING if nonneg else Pattern.INC_THEN_DEC
        else:
            pattern = Pattern.DECREASING if nonpos else Pattern.DEC_THEN_INC
    else:
        # DW3/CW3: B' < 0, ratio' has the opposite sign of H.
        if inc_first:
            pattern = Pattern.DECREASING if nonneg else Pattern.INC_THEN_DEC
        else:
            pattern = Pattern.INCREASING if nonpos else Pattern.DEC_THEN_INC
    tag = f"H({end})" + {"Positive": ">0", "Negative": "<0", "Zero": "=0"}[sign]
    prov = f"unimodal-{prefix}:{cls}:{tag}"
    t0 = None
    if pattern.unimodal:
        try:
            t0 = locate_h_root(problem)
        except (NonConvergenceError, DerivativeDegeneracyError, DivisionDomainError) as exc:
            notes = notes + [f"turning point search failed: {exc}"]
        if t0 is None:
            notes = notes + ["turning point could not be located"]
            return MonotonicityVerdict(Pattern.INCONCLUSIVE, prov, None, [est], domain, notes, shape)
    return MonotonicityVerdict(pattern, prov, t0, [est], domain, notes, shape)


def predict_series_ratio(problem, horizon=DEFAULT_HORIZON):
    """Predicted shape of ``A(t)/B(t)`` on ``(0, r)``."""
    shape = coefficient_ratio_shape(problem, horizon)
    classes = sorted(problem.family.declared)
    return dispatch(problem, shape, classes, "coefficients")


def integrand_ratio_shape(problem, n=1024):
    """Shape of ``t -> f(t)/g(t)`` over the integration interval, by grid scan."""
    ts = problem.sample_grid(n)
    sf, sg = problem.f.sign(ts), problem.g.sign(ts)
    lf, lg = problem.f.log_abs(ts), problem.g.log_abs(ts)
    with np.errstate(invalid="ignore"):
        log_r = np.where(sf == 0, -np.inf, lf - lg)
    shape = _shape_from_log_ratio(ts, log_r, sf, n)
    if shape.kind.unimodal:
        # m is an index for sequences; for functions keep the grid location in the notes.
        i = int(np.argmax(log_r)) if shape.kind == Pattern.INC_THEN_DEC else int(np.argmin(log_r))
        shape.notes.append(f"f/g turns near t={ts[i]:.6g}")
    return shape


def predict_transform_ratio(problem, n_shape=1024):
    """Predicted shape of ``F(x)/G(x)`` on ``(0, x_max)``."""
    shape = integrand_ratio_shape(problem, n_shape)
    classes = sorted(problem.kernel.declared)
    return dispatch(problem, shape, classes, "integrands")


def predict_de_ratio(a, b, c, d, kernel, r=math.inf, alpha=0.0, beta=math.inf, tol=None):
    """Shape of the ratio of reciprocal-gamma series or transforms.

    The numerator uses ``(a, b)``: coefficients ``1/Gamma(ak + b)`` over
    ``1/Gamma(ck + d)`` for a discrete family, integrands ``1/Gamma(at + b)``
    over ``1/Gamma(ct + d)`` for a continuous kernel. ``r`` is the right end
    of the working domain.
    """
    a, b, c, d = _check_params(a, b, c, d)
    kernel = get_kernel(kernel)
    if isinstance(kernel, DiscreteKernel):
        problem = SeriesRatioProblem(
            ReciprocalGammaCoefficients(a, b), ReciprocalGammaCoefficients(c, d), kernel, r=r,
            **({"tol": tol} if tol else {}),
        )
        shape, region = gamma_sequence_pattern(a, b, c, d)
        seq = "gamma-sequence"
    else:
        problem = TransformRatioProblem(
            ReciprocalGammaIntegrand(a, b), ReciprocalGammaIntegrand(c, d), kernel, alpha, beta,
            x_max=r, **({"tol": tol} if tol else {}),
        )
        region = classify_region(a, b, c, d)
        fn_verdict = gamma_ratio_pattern(a, b, c, d)
        kind = fn_verdict.restricted(alpha, beta)
        shape = CoefficientShape(kind, 0 if kind.unimodal else None, 0)
        if kind.unimodal:
            shape.notes.append(f"f/g turns at t={fn_verdict.turning_point:.6g}")
        seq = "gamma-ratio"
    shape.notes.append(f"{seq}:{region.value}")
    classes = sorted(kernel.declared)
    verdict = dispatch(problem, shape, classes, f"reciprocal-gamma:{region.value}")
    verdict.notes.append(f"region {region.value}")
    return verdict
