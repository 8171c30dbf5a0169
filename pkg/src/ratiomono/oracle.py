"""Brute-force monotonicity detection on a dense grid, independent of every rule.

The oracle never looks at coefficients, kernels or H: it samples a scalar
function, reads the signs of consecutive differences and compresses them.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OracleEvaluationError
from .patterns import PHASES, Pattern, jsonable

DEFAULT_NOISE_FLOOR = 1e-9
MIN_POINTS = 64


@dataclass
class ObservedPattern:
    pattern: Pattern
    change_points: list
    grid: dict
    noise_floor: float
    # Half-width of any plateau surrounding each change point.
    plateau_halfwidths: list = field(default_factory=list)
    # Extent of the flat stretches at either end, where direction is unresolved.
    edge_plateaus: tuple = (0.0, 0.0)
    points: np.ndarray = field(default=None, repr=False)
    values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.pattern = Pattern(self.pattern)
        expected = 1 if self.pattern.unimodal else None
        if expected is not None and len(self.change_points) != expected:
            raise ValueError("unimodal patterns carry exactly one change point")
        if self.pattern.monotone or self.pattern == Pattern.CONSTANT:
            if self.change_points:
                raise ValueError("monotone patterns carry no change points")

    @property
    def interval(self):
        return tuple(self.grid["interval"])

    def local_step(self, t):
        """Largest grid spacing next to ``t``."""
        pts = self.points
        i = int(np.clip(np.searchsorted(pts, t), 1, len(pts) - 1))
        lo = max(i - 1, 1)
        hi = min(i + 1, len(pts) - 1)
        return float(np.max(np.diff(pts[lo - 1:hi + 1])))

    def to_dict(self):
        return jsonable({
            "pattern": self.pattern,
            "change_points": self.change_points,
            "grid": self.grid,
            "noise_floor": self.noise_floor,
        })


def make_grid(interval, n, spacing="auto"):
    lo, hi = (float(v) for v in interval)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValueError("interval must be finite with hi > lo")
    if spacing == "auto":
        spacing = "log" if lo > 0 and hi / lo >= 100.0 else "linear"
    if spacing == "log":
        if lo <= 0:
            raise ValueError("log spacing needs a positive interval")
        pts = np.geomspace(lo, hi, n)
    elif spacing == "linear":
        pts = np.linspace(lo, hi, n)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    return pts, spacing


def _evaluate(fn, pts, vectorized):
    if vectorized is not False:
        try:
            vals = np.asarray(fn(pts), dtype=float)
            if vals.shape == pts.shape and np.all(np.isfinite(vals)):
                return vals
        except Exception:
            # Fall back to pointwise evaluation to locate the failing point.
            pass
    vals = np.empty_like(pts)
    for i, p in enumerate(pts):
        try:
            v = float(fn(float(p)))
        except Exception as exc:
            raise OracleEvaluationError(f"function raised at t={p!r}: {exc}", float(p)) from exc
        if not math.isfinite(v):
            raise OracleEvaluationError(f"non-finite value at t={p!r}", float(p))
        vals[i] = v
    return vals


def sign_structure(values, threshold):
    """Compressed sign runs of the first differences.

    Differences with magnitude ``<= threshold`` count as flat. Returns a list
    of ``(sign, first_diff_index, last_diff_index)`` runs.
    """
    d = np.diff(values)
    s = np.where(np.abs(d) <= threshold, 0, np.sign(d)).astype(int)
    runs = []
    for i, v in enumerate(s):
        if v == 0:
            continue
        if runs and runs[-1][0] == v:
            runs[-1][2] = i
        else:
            runs.append([v, i, i])
    return runs


def pattern_from_runs(runs):
    signs = tuple(r[0] for r in runs)
    return {
        (): Pattern.CONSTANT,
        (1,): Pattern.INCREASING,
        (-1,): Pattern.DECREASING,
        (1, -1): Pattern.INC_THEN_DEC,
        (-1, 1): Pattern.DEC_THEN_INC,
    }.get(signs, Pattern.OTHER)


def detect_pattern(fn, interval, n=256, noise_floor=DEFAULT_NOISE_FLOOR, spacing="auto",
                   vectorized=None):
    """Observe the monotonicity pattern of ``fn`` on ``interval`` from ``n`` samples.

    Differences smaller than ``noise_floor`` times the median absolute value
    are plateaus. More than one change of direction gives ``Other`` with all
    change points listed.
    """
    if n < MIN_POINTS:
        raise ValueError(f"n must be at least {MIN_POINTS}")
    if not noise_floor >= 0:
        raise ValueError("noise_floor must be nonnegative")
    pts, spacing = make_grid(interval, int(n), spacing)
    vals = _evaluate(fn, pts, vectorized)
    return observe(pts, vals, noise_floor, spacing, interval)


def observe(pts, vals, noise_floor=DEFAULT_NOISE_FLOOR, spacing="given", interval=None):
    """Pattern of already-sampled values ``vals`` at increasing ``pts``."""
    pts = np.asarray(pts, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if interval is None:
        interval = (pts[0], pts[-1])
    scale = float(np.median(np.abs(vals)))
    if scale == 0.0:
        scale = float(np.max(np.abs(vals)))
    runs = sign_structure(vals, noise_floor * scale)
    pattern = pattern_from_runs(runs)
    change_points = []
    halfwidths = []
    for prev, nxt in zip(runs[:-1], runs[1:]):
        # Plateau between the last step of one run and the first of the next.
        left = pts[prev[2] + 1]
        right = pts[nxt[1]]
        change_points.append(float(0.5 * (left + right)))
        halfwidths.append(float(0.5 * (right - left)))
    if runs:
        edges = (float(pts[runs[0][1]] - pts[0]), float(pts[-1] - pts[runs[-1][2] + 1]))
    else:
        edges = (float(pts[-1] - pts[0]),) * 2
    grid = {"n": int(len(pts)), "spacing": spacing, "interval": [float(interval[0]), float(interval[1])]}
    return ObservedPattern(pattern, change_points, grid, noise_floor, halfwidths, edges, pts, vals)


@dataclass
class AgreementReport:
    status: str
    predicted: Pattern
    observed: Pattern
    turning_predicted: float = None
    turning_observed: float = None
    tolerance: float = None
    detail: str = ""
    verdict: dict = None
    observation: dict = None

    @property
    def agree(self):
        return self.status == "agree"

    def to_dict(self):
        return jsonable({
            "status": self.status,
            "predicted": self.predicted,
            "observed": self.observed,
            "turning_predicted": self.turning_predicted,
            "turning_observed": self.turning_observed,
            "tolerance": self.tolerance,
            "detail": self.detail,
            "verdict": self.verdict,
            "observation": self.observation,
        })


def crosscheck(verdict, observed, turning_tol=0.0):
    """Compare a predicted verdict with an observed pattern on the observed interval.

    The verdict is first restricted to the sampled interval, so a turning
    point outside it turns into the matching monotone phase. A turning point
    within two grid steps of either end, or inside a flat stretch at that end,
    accepts both readings.
    """
    lo, hi = observed.interval
    pred = Pattern(verdict.pattern)
    obs = observed.pattern
    base = dict(verdict=verdict.to_dict(), observation=observed.to_dict())
    if pred == Pattern.INCONCLUSIVE:
        return AgreementReport("unadjudicated", pred, obs, detail="verdict is inconclusive", **base)

    acceptable = {verdict.restricted(lo, hi)}
    t0 = verdict.turning_point
    if pred.unimodal:
        first, second = PHASES[pred]
        left, right = observed.edge_plateaus
        if abs(t0 - lo) <= 2.0 * observed.local_step(lo) + left:
            acceptable |= {pred, second}
        if abs(t0 - hi) <= 2.0 * observed.local_step(hi) + right:
            acceptable |= {pred, first}

    if obs not in acceptable:
        return AgreementReport(
            "disagree", pred, obs, t0, None, None,
            f"predicted {pred.value} (on the grid: {'/'.join(sorted(p.value for p in acceptable))}),"
            f" observed {obs.value}",
            **base,
        )
    if obs.unimodal:
        t_obs = observed.change_points[0]
        tol = max(turning_tol, 2.0 * observed.local_step(t_obs) + observed.plateau_halfwidths[0])
        if t0 is None or abs(t0 - t_obs) > tol:
            return AgreementReport(
                "disagree", pred, obs, t0, t_obs, tol,
                f"turning points differ: predicted {t0}, observed {t_obs}", **base,
            )
        return AgreementReport("agree", pred, obs, t0, t_obs, tol, "patterns and turning points agree", **base)
    return AgreementReport("agree", pred, obs, t0, None, None, "patterns agree", **base)
