"""Discrete kernel families w_k(t), continuous kernels w(t, x), and class checks.

Every kernel evaluates in log-magnitude/sign form so that ratios such as
``w_k'(t)/w_k(t)`` stay finite far out on an endpoint ladder where the raw
values would under- or overflow.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

DISCRETE_CLASSES = ("DW11", "DW12", "DW2", "DW3")
CONTINUOUS_CLASSES = ("CW11", "CW12", "CW2", "CW3")

# Endpoint ratios must fall below this on the last ladder rung.
ENDPOINT_THRESHOLD = 1e-6
LADDER_RUNGS = 128
# Relative slack used when comparing neighbouring values for monotonicity.
_MONO_RTOL = 1e-12


def _log_abs_int(k):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(k))


class DiscreteKernel:
    """A family ``{w_k(t)}_{k>=0}`` with closed-form first and second derivatives."""

    id = None
    declared = frozenset()
    # The class endpoint conditions (ii) are taken at this end of (0, r).
    natural_r = math.inf

    def log_abs_sign(self, k, t, order=0):
        """Return ``(log|d^order w_k/dt^order (t)|, sign)`` as arrays."""
        raise NotImplementedError

    def _check(self, t, order, r):
        t = np.asarray(t, dtype=float)
        if order not in (0, 1, 2):
            raise ValueError("order must be 0, 1 or 2")
        if np.any(~(t > 0)) or np.any(~(t < r)):
            raise DomainError(f"t must lie in (0, {r}) for {self.id}")
        return t

    def value(self, k, t, order=0, r=math.inf):
        t = self._check(t, order, r)
        k = np.asarray(k, dtype=float)
        la, s = self.log_abs_sign(k, t, order)
        return s * np.exp(la)

    def __repr__(self):
        return f"{type(self).__name__}()"

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(self.id)


class PowerK(DiscreteKernel):
    """``w_k(t) = t^k`` (power series)."""

    id = "PowerK"
    declared = frozenset({"DW11", "DW2"})

    def log_abs_sign(self, k, t, order=0):
        k, log_t = np.broadcast_arrays(np.asarray(k, float), np.log(t))
        if order == 0:
            return k * log_t, np.ones_like(k)
        if order == 1:
            la = _log_abs_int(k) + (k - 1.0) * log_t
            return np.where(k >= 1, la, -np.inf), np.where(k >= 1, 1.0, 0.0)
        la = _log_abs_int(k * (k - 1.0)) + (k - 2.0) * log_t
        return np.where(k >= 2, la, -np.inf), np.where(k >= 2, 1.0, 0.0)


class InversePowerK(DiscreteKernel):
    """``w_k(t) = t^{-k}`` (Z-transform)."""

    id = "InversePowerK"
    declared = frozenset({"DW12", "DW3"})

    def log_abs_sign(self, k, t, order=0):
        k, log_t = np.broadcast_arrays(np.asarray(k, float), np.log(t))
        if order == 0:
            return -k * log_t, np.ones_like(k)
        if order == 1:
            la = _log_abs_int(k) - (k + 1.0) * log_t
            return np.where(k >= 1, la, -np.inf), np.where(k >= 1, -1.0, 0.0)
        la = _log_abs_int(k * (k + 1.0)) - (k + 2.0) * log_t
        return np.where(k >= 1, la, -np.inf), np.where(k >= 1, 1.0, 0.0)


class ExpDecayK(DiscreteKernel):
    """``w_k(t) = e^{-kt}`` (discrete Laplace transform)."""

    id = "ExpDecayK"
    declared = frozenset({"DW12", "DW3"})

    def log_abs_sign(self, k, t, order=0):
        k, t = np.broadcast_arrays(np.asarray(k, float), np.asarray(t, float))
        base = -k * t
        if order == 0:
            return base, np.ones_like(k)
        la = order * _log_abs_int(k) + base
        sign = (-1.0) ** order
        return np.where(k >= 1, la, -np.inf), np.where(k >= 1, sign, 0.0)


class DirichletK(DiscreteKernel):
    """``w_k(t) = (k+1)^{-t}`` (discrete Mellin / Dirichlet series)."""

    id = "DirichletK"
    declared = frozenset({"DW12", "DW3"})

    def log_abs_sign(self, k, t, order=0):
        k, t = np.broadcast_arrays(np.asarray(k, float), np.asarray(t, float))
        log_k1 = np.log1p(k)
        base = -t * log_k1
        if order == 0:
            return base, np.ones_like(k)
        with np.errstate(divide="ignore"):
            la = order * np.log(log_k1) + base
        sign = (-1.0) ** order
        return np.where(k >= 1, la, -np.inf), np.where(k >= 1, sign, 0.0)


class ContinuousKernel:
    """A kernel ``w(t, x)`` on ``[alpha, beta] x (0, inf)``; derivatives are in ``x``."""

    id = None
    declared = frozenset()
    t_min = 0.0
    t_min_open = False

    def log_abs_sign(self, t, x, order=0):
        raise NotImplementedError

    def _check(self, t, x, order):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        if order not in (0, 1, 2):
            raise ValueError("order must be 0, 1 or 2")
        if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
            raise DomainError(f"x must be positive and finite for {self.id}")
        bad = ~(t > self.t_min) if self.t_min_open else ~(t >= self.t_min)
        if np.any(bad) or np.any(~np.isfinite(t)):
            raise DomainError(f"t outside the domain of {self.id}")
        return t, x

    def value(self, t, x, order=0):
        t, x = self._check(t, x, order)
        la, s = self.log_abs_sign(t, x, order)
        return s * np.exp(la)

    def __repr__(self):
        return f"{type(self).__name__}()"

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(self.id)


def _log_abs_sign_of(v):
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(v)), np.sign(v)


class PowerX(ContinuousKernel):
    """``w(t, x) = x^t``."""

    id = "PowerX"
    declared = frozenset({"CW11", "CW2"})

    def log_abs_sign(self, t, x, order=0):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        log_x = np.log(x)
        if order == 0:
            return t * log_x, np.ones_like(t)
        if order == 1:
            la, s = _log_abs_sign_of(t)
            return la + (t - 1.0) * log_x, s
        la, s = _log_abs_sign_of(t * (t - 1.0))
        return la + (t - 2.0) * log_x, s


class InversePowerX(ContinuousKernel):
    """``w(t, x) = x^{-t}``."""

    id = "InversePowerX"
    declared = frozenset({"CW12", "CW3"})

    def log_abs_sign(self, t, x, order=0):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        log_x = np.log(x)
        if order == 0:
            return -t * log_x, np.ones_like(t)
        if order == 1:
            la, s = _log_abs_sign_of(t)
            return la - (t + 1.0) * log_x, -s
        la, s = _log_abs_sign_of(t * (t + 1.0))
        return la - (t + 2.0) * log_x, s


class ExpDecayX(ContinuousKernel):
    """``w(t, x) = e^{-tx}`` (Laplace transform)."""

    id = "ExpDecayX"
    declared = frozenset({"CW12", "CW3"})

    def log_abs_sign(self, t, x, order=0):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        base = -t * x
        if order == 0:
            return base, np.ones_like(t)
        la, s = _log_abs_sign_of(t)
        return order * la + base, s ** order * (-1.0) ** order


class ShiftedPowerX(ContinuousKernel):
    """``w(t, x) = (t+1)^{-x}``."""

    id = "ShiftedPowerX"
    declared = frozenset({"CW12", "CW3"})

    def log_abs_sign(self, t, x, order=0):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        log_t1 = np.log1p(t)
        base = -x * log_t1
        if order == 0:
            return base, np.ones_like(t)
        la, s = _log_abs_sign_of(log_t1)
        return order * la + base, s ** order * (-1.0) ** order


class MellinX(ContinuousKernel):
    """``w(t, x) = t^{x-1}`` (Mellin transform).

    Only the monotone-ratio rule applies to this kernel; it satisfies neither
    the CW2 nor the CW3 conditions.
    """

    id = "MellinX"
    declared = frozenset({"CW11"})
    t_min_open = True

    def log_abs_sign(self, t, x, order=0):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        log_t = np.log(t)
        base = (x - 1.0) * log_t
        if order == 0:
            return base, np.ones_like(t)
        la, s = _log_abs_sign_of(log_t)
        return order * la + base, s ** order


DISCRETE_KERNELS = {k.id: k for k in (PowerK(), InversePowerK(), ExpDecayK(), DirichletK())}
CONTINUOUS_KERNELS = {
    k.id: k for k in (PowerX(), InversePowerX(), ExpDecayX(), ShiftedPowerX(), MellinX())
}


def get_kernel(name):
    if isinstance(name, (DiscreteKernel, ContinuousKernel)):
        return name
    if name in DISCRETE_KERNELS:
        return DISCRETE_KERNELS[name]
    if name in CONTINUOUS_KERNELS:
        return CONTINUOUS_KERNELS[name]
    raise KeyError(f"unknown kernel {name!r}")


def eval_discrete(family, k, t, order=0, r=math.inf):
    """Closed-form ``w_k(t)``, ``w_k'(t)`` or ``w_k''(t)``.

    Raises :class:`DomainError` when ``t`` is outside ``(0, r)``.
    """
    family = get_kernel(family)
    if int(k) != k or k < 0:
        raise DomainError("k must be a nonnegative integer")
    return float(family.value(k, t, order, r=r))


def eval_continuous(kernel, t, x, order=0):
    """Closed-form ``d^order/dx^order w(t, x)``."""
    kernel = get_kernel(kernel)
    return float(kernel.value(t, x, order))


@dataclass
class ClassMembership:
    declared: frozenset
    verified: dict = field(default_factory=dict)


def declared_classes(kernel):
    """Class memberships the kernel is known to satisfy."""
    kernel = get_kernel(kernel)
    universe = DISCRETE_CLASSES if isinstance(kernel, DiscreteKernel) else CONTINUOUS_CLASSES
    return ClassMembership(
        declared=frozenset(kernel.declared),
        verified={c: "not-checked" for c in universe},
    )


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid for class verification.

    ``lo``/``hi`` bound the main variable (t for discrete families, x for
    continuous kernels). ``k_max`` is the largest index for discrete families;
    ``t_lo``/``t_hi``/``n_t`` describe the t-grid of continuous kernels.
    """

    n: int = 32
    lo: float = 1e-2
    hi: float = 1e2
    spacing: str = "log"
    k_max: int = 16
    n_t: int = 32
    t_lo: float = 0.0
    t_hi: float = 8.0
    t_spacing: str = "linear"

    @classmethod
    def from_mapping(cls, mapping):
        """Build from a flat mapping such as a parsed ``key=value`` config."""
        kwargs = {}
        for name, f in cls.__dataclass_fields__.items():
            if name in mapping:
                kwargs[name] = f.type(mapping[name]) if f.type in (int, float, str) else mapping[name]
        return cls(**kwargs)


def _spaced(lo, hi, n, spacing):
    if spacing == "log":
        if lo <= 0:
            raise ValueError("log spacing needs a positive lower end")
        return np.geomspace(lo, hi, n)
    if spacing == "linear":
        return np.linspace(lo, hi, n)
    raise ValueError(f"unknown spacing {spacing!r}")


def default_grid(kernel):
    kernel = get_kernel(kernel)
    if isinstance(kernel, MellinX):
        return GridSpec(t_lo=2.0 ** -4, t_hi=8.0, t_spacing="log")
    return GridSpec()


@dataclass
class ConditionResult:
    name: str
    passed: bool
    detail: str = ""
    witness: tuple = None


@dataclass
class VerificationReport:
    kernel: str
    cls: str
    conditions: list
    recorded: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.conditions)

    def condition(self, name):
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self):
        return [c.name for c in self.conditions if not c.passed]


def _monotone_along(values, axis, increasing):
    """Check non-strict monotonicity along ``axis``; return (ok, first bad index)."""
    d = np.diff(values, axis=axis)
    a = np.take(values, range(values.shape[axis] - 1), axis=axis)
    b = np.take(values, range(1, values.shape[axis]), axis=axis)
    slack = _MONO_RTOL * np.maximum(np.abs(a), np.abs(b))
    bad = d < -slack if increasing else d > slack
    bad |= ~np.isfinite(d)
    if np.any(bad):
        return False, tuple(int(i) for i in np.argwhere(bad)[0])
    return True, None


def _ladder(toward_zero, rungs=LADDER_RUNGS):
    j = np.arange(1, rungs + 1, dtype=float)
    return 2.0 ** (-j) if toward_zero else 2.0 ** j


def _decays(log_ratio):
    """``log_ratio`` has rungs on axis 0; require monotone decay to below the threshold."""
    d = np.diff(log_ratio, axis=0)
    nonincreasing = np.all(d <= 1e-9 * np.maximum(1.0, np.abs(log_ratio[1:])), axis=0)
    small = log_ratio[-1] < math.log(ENDPOINT_THRESHOLD)
    return nonincreasing & small


def _verify_discrete(kernel, cls, grid):
    t = _spaced(grid.lo, grid.hi, grid.n, grid.spacing)
    k = np.arange(grid.k_max + 1, dtype=float)
    K, T = np.meshgrid(k, t, indexing="ij")
    la = {o: kernel.log_abs_sign(K, T, o) for o in (0, 1, 2)}
    conds = []
    recorded = {}

    pos = (la[0][1] > 0) & np.isfinite(la[0][0])
    needed = (0, 1) if cls in ("DW11", "DW12") else (0, 1, 2)
    finite = np.all([np.all(np.isfinite(la[o][0]) | (la[o][1] == 0)) for o in needed])
    if np.all(pos) and finite:
        conds.append(ConditionResult("(i)", True, "positive with finite derivatives on grid"))
    else:
        bad = np.argwhere(~pos)
        w = (float(K[tuple(bad[0])]), float(T[tuple(bad[0])])) if bad.size else None
        conds.append(ConditionResult("(i)", False, "nonpositive or nonfinite value", w))

    if cls in ("DW11", "DW12"):
        ratio = la[1][1] * np.exp(la[1][0] - la[0][0])
        ok, idx = _monotone_along(ratio, 0, increasing=(cls == "DW11"))
        word = "increasing" if cls == "DW11" else "decreasing"
        w = None if ok else (float(K[idx]), float(T[idx]))
        conds.append(ConditionResult("(ii)", ok, f"w_k'/w_k {word} in k", w))
        return VerificationReport(kernel.id, cls, conds, recorded)

    at_zero = cls == "DW2"
    ladder = _ladder(at_zero)
    if at_zero:
        ladder = ladder * min(1.0, grid.hi)
    kk = k[:, None]
    lw = {o: kernel.log_abs_sign(kk, ladder[None, :], o) for o in (0, 1)}
    w0 = lw[0][0][0]
    c_val = float(np.exp(w0[-1]))
    recorded["c"] = c_val
    c_ok = np.isfinite(c_val) and c_val > 0 and abs(w0[-1] - w0[-2]) < 1e-6
    r0 = (lw[0][0][1:] - w0[None, :]).T
    r1 = (lw[1][0][2:] - lw[1][0][1][None, :]).T
    dec0 = _decays(r0)
    dec1 = _decays(r1)
    ok = bool(c_ok and np.all(dec0) and np.all(dec1))
    end = "0+" if at_zero else "r-"
    if ok:
        conds.append(ConditionResult("(ii)", True, f"w_k/w_0 and w_k'/w_1' vanish at {end}"))
    else:
        if not c_ok:
            w = (0.0, float(ladder[-1]))
        elif not np.all(dec0):
            w = (float(np.argmin(dec0) + 1), float(ladder[-1]))
        else:
            w = (float(np.argmin(dec1) + 2), float(ladder[-1]))
        conds.append(ConditionResult("(ii)", False, f"endpoint ratio does not vanish at {end}", w))

    s1 = la[1][1]
    zero0 = np.all(s1[0] == 0)
    want = 1.0 if cls == "DW2" else -1.0
    signs_ok = np.all((s1[1:] == want) | (s1[1:] == 0))
    if zero0 and signs_ok:
        conds.append(ConditionResult("(iii)", True, "w_0' = 0 and w_k' has the required sign"))
    else:
        bad = np.argwhere(s1[1:] != want)
        w = (float(bad[0][0] + 1), float(t[bad[0][1]])) if bad.size else (0.0, float(t[0]))
        conds.append(ConditionResult("(iii)", False, "derivative sign condition violated", w))

    ratio2 = la[2][1][1:] * la[1][1][1:] * np.exp(la[2][0][1:] - la[1][0][1:])
    ok, idx = _monotone_along(ratio2, 0, increasing=(cls == "DW2"))
    w = None if ok else (float(idx[0] + 1), float(t[idx[1]]))
    word = "increasing" if cls == "DW2" else "decreasing"
    conds.append(ConditionResult("(iv)", ok, f"w_k''/w_k' {word} in k", w))
    return VerificationReport(kernel.id, cls, conds, recorded)


def _verify_continuous(kernel, cls, grid):
    x = _spaced(grid.lo, grid.hi, grid.n, grid.spacing)
    t = _spaced(grid.t_lo, grid.t_hi, grid.n_t, grid.t_spacing)
    T, X = np.meshgrid(t, x, indexing="ij")
    la = {o: kernel.log_abs_sign(T, X, o) for o in (0, 1, 2)}
    conds = []
    recorded = {}

    pos = (la[0][1] > 0) & np.isfinite(la[0][0])
    if np.all(pos):
        conds.append(ConditionResult("(i)", True, "positive on grid"))
    else:
        bad = np.argwhere(~pos)[0]
        conds.append(
            ConditionResult("(i)", False, "nonpositive value", (float(T[tuple(bad)]), float(X[tuple(bad)])))
        )

    if cls in ("CW11", "CW12"):
        ratio = la[1][1] * np.exp(la[1][0] - la[0][0])
        ok, idx = _monotone_along(ratio, 0, increasing=(cls == "CW11"))
        w = None if ok else (float(T[idx]), float(X[idx]))
        word = "increasing" if cls == "CW11" else "decreasing"
        conds.append(ConditionResult("(ii)", ok, f"w_x/w {word} in t", w))
        return VerificationReport(kernel.id, cls, conds, recorded)

    at_zero = cls == "CW2"
    ladder = _ladder(at_zero)
    tt = t[:, None]
    lw = {o: kernel.log_abs_sign(tt, ladder[None, :], o) for o in (0, 1)}
    w_alpha = lw[0][0][0]
    c_val = float(np.exp(w_alpha[-1]))
    recorded["c"] = c_val
    c_ok = np.isfinite(c_val) and c_val > 0 and abs(w_alpha[-1] - w_alpha[-2]) < 1e-6
    r0 = (lw[0][0][1:] - w_alpha[None, :]).T
    dec0 = _decays(r0)
    # w_x(alpha, .) vanishes identically, so the derivative part of the
    # endpoint condition is read as w_x(t, .)/w_x(s, .) -> 0 for alpha < s < t.
    lx = lw[1][0][1:]
    i, j = np.triu_indices(lx.shape[0], k=1)
    r1 = (lx[j] - lx[i]).T
    dec1 = _decays(r1) if r1.size else np.array([True])
    ok = bool(c_ok and np.all(dec0) and np.all(dec1))
    end = "0+" if at_zero else "inf"
    if ok:
        conds.append(ConditionResult("(ii)", True, f"w(t,.)/w(alpha,.) and w_x ratios vanish at x -> {end}"))
    else:
        if not c_ok:
            w = (float(t[0]), float(ladder[-1]))
        elif not np.all(dec0):
            w = (float(t[np.argmin(dec0) + 1]), float(ladder[-1]))
        else:
            bad = int(np.argmin(dec1))
            w = (float(t[j[bad] + 1]), float(ladder[-1]))
        conds.append(ConditionResult("(ii)", False, f"endpoint ratio does not vanish at x -> {end}", w))

    s1 = la[1][1]
    zero0 = np.all(s1[0] == 0)
    want = 1.0 if cls == "CW2" else -1.0
    signs_ok = np.all(s1[1:] == want)
    if zero0 and signs_ok:
        conds.append(ConditionResult("(iii)", True, "w_x(alpha, x) = 0 and w_x has the required sign"))
    else:
        if not zero0:
            bad = np.argwhere(s1[0] != 0)[0]
            w = (float(t[0]), float(x[bad[0]]))
        else:
            bad = np.argwhere(s1[1:] != want)[0]
            w = (float(t[bad[0] + 1]), float(x[bad[1]]))
        conds.append(ConditionResult("(iii)", False, "derivative sign condition violated", w))

    ratio2 = la[2][1][1:] * la[1][1][1:] * np.exp(la[2][0][1:] - la[1][0][1:])
    ok, idx = _monotone_along(ratio2, 0, increasing=(cls == "CW2"))
    w = None if ok else (float(t[idx[0] + 1]), float(x[idx[1]]))
    word = "increasing" if cls == "CW2" else "decreasing"
    conds.append(ConditionResult("(iv)", ok, f"w_xx/w_x {word} in t", w))
    return VerificationReport(kernel.id, cls, conds, recorded)


def verify_class_conditions(kernel, cls, grid=None):
    """Check each numbered condition of a kernel class on a finite grid.

    Failures are returned in the report, never raised. Endpoint limits are
    probed on a geometric ladder of points approaching the endpoint.
    """
    kernel = get_kernel(kernel)
    if grid is None:
        grid = default_grid(kernel)
    elif not isinstance(grid, GridSpec):
        grid = GridSpec.from_mapping(grid)
    if isinstance(kernel, DiscreteKernel):
        if cls not in DISCRETE_CLASSES:
            raise ValueError(f"{cls!r} is not a discrete kernel class")
        return _verify_discrete(kernel, cls, grid)
    if cls not in CONTINUOUS_CLASSES:
        raise ValueError(f"{cls!r} is not a continuous kernel class")
    return _verify_continuous(kernel, cls, grid)
