"""Command-line interface: ``ratiomono <command> ...``.

Exit codes: 0 success or agreement, 1 usage error, 2 verification
disagreement, 3 numerical nonconvergence. Reports go to stdout, diagnostics
to stderr.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import stochastic
from .classifier import (
    RegionLabel,
    classify_region,
    gamma_ratio_pattern,
    predict_series_ratio,
    predict_transform_ratio,
)
from .errors import (
    DerivativeDegeneracyError,
    DivisionDomainError,
    DomainError,
    NonConvergenceError,
    OracleEvaluationError,
)
from .kernels import get_kernel, verify_class_conditions
from .oracle import crosscheck, detect_pattern
from .patterns import Pattern, jsonable
from .ratio_engine import SeriesRatioProblem, TransformRatioProblem, eval_log_ratio, eval_ratio
from .sources import (
    ConstIntegrand,
    FiniteCoefficients,
    GammaPdf,
    PolyExpIntegrand,
    PolyGeometricCoefficients,
    ReciprocalGammaCoefficients,
    ReciprocalGammaIntegrand,
    UniformPdf,
    constant_sequence,
    exp_integrand,
    geometric,
)
from .specfun import ln_gamma_array

EXIT_OK, EXIT_USAGE, EXIT_DISAGREE, EXIT_NONCONVERGENCE = 0, 1, 2, 3

SUITE_COLUMNS = ("region", "a", "b", "c", "d", "predicted", "observed", "turning_pred", "turning_obs", "agree")
SUITE_BOX = (0.05, 20.0)
GAMMA_ORACLE_INTERVAL = (1e-3, 50.0)


class UsageError(Exception):
    pass


# -- configuration ------------------------------------------------------------


@dataclass
class RunConfig:
    series_tol: float = 1e-13
    quad_tol: float = 1e-12
    noise_floor: float = 1e-9
    oracle_points: int = 4096
    predict_oracle_points: int = 256
    scan_horizon: int = 64
    seed: int = 42
    draws_per_region: int = 200
    format: str = "json"

    def validate(self):
        for name in ("series_tol", "quad_tol", "noise_floor"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        for name in ("oracle_points", "predict_oracle_points", "scan_horizon"):
            if getattr(self, name) < 64:
                raise UsageError(f"{name} must be at least 64")
        if self.draws_per_region < 1:
            raise UsageError("draws_per_region must be at least 1")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        return self

    def update(self, mapping):
        names = {f.name for f in fields(self)}
        for key, raw in mapping.items():
            key = key.strip().replace("-", "_")
            if key not in names:
                raise UsageError(f"unknown config key {key!r}")
            conv = type(getattr(self, key))
            try:
                setattr(self, key, conv(raw.strip() if isinstance(raw, str) else raw))
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {raw!r}") from exc
        return self


def read_config_file(path):
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


# -- vocabulary ---------------------------------------------------------------

SERIES_KERNELS = {
    "power": "PowerK",
    "inverse-power": "InversePowerK",
    "z": "InversePowerK",
    "expdecay": "ExpDecayK",
    "exp": "ExpDecayK",
    "dirichlet": "DirichletK",
}
TRANSFORM_KERNELS = {
    "power": "PowerX",
    "inverse-power": "InversePowerX",
    "explace": "ExpDecayX",
    "laplace": "ExpDecayX",
    "expdecay": "ExpDecayX",
    "shifted-power": "ShiftedPowerX",
    "mellin": "MellinX",
}


def _floats(text, n=None, what="parameters"):
    try:
        vals = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad {what}: {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} {what}, got {text!r}")
    return vals


def _split(spec):
    if ":" not in spec:
        raise UsageError(f"expected name:params, got {spec!r}")
    return spec.split(":", 1)


def parse_kernel(name, table):
    key = name.strip().lower()
    if key in table:
        return get_kernel(table[key])
    try:
        kern = get_kernel(name)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"unknown kernel {name!r}; choose from {sorted(table)}") from exc
    if kern.id not in table.values():
        raise UsageError(f"kernel {name!r} does not fit this command")
    return kern


def parse_coefficients(spec):
    """``recip-gamma:a,b``, ``seq:v0,v1,...``, ``const-seq:c``, ``geom:rho``, ``polygeom:rho;c0,c1,...``."""
    name, args = _split(spec)
    if name == "recip-gamma":
        return ReciprocalGammaCoefficients(*_floats(args, 2))
    if name == "seq":
        return FiniteCoefficients(_floats(args, what="coefficients"))
    if name == "const-seq":
        return constant_sequence(*_floats(args, 1))
    if name == "geom":
        return geometric(*_floats(args, 1))
    if name == "polygeom":
        rho, _, poly = args.partition(";")
        return PolyGeometricCoefficients(_floats(poly, what="coefficients"), *_floats(rho, 1))
    raise UsageError(f"unknown coefficient family {name!r}")


def parse_integrand(spec):
    """``poly:t`` or ``poly:c0,c1,...``, ``const:c``, ``exp:lam``, ``polyexp:lam;c0,...``,
    ``gamma:shape,rate``, ``uniform:theta``, ``recip-gamma:a,b``."""
    name, args = _split(spec)
    if name == "poly":
        if args.strip() == "t":
            return PolyExpIntegrand([0.0, 1.0], 0.0, name="poly:t")
        return PolyExpIntegrand(_floats(args, what="coefficients"), 0.0)
    if name == "const":
        return ConstIntegrand(*_floats(args, 1))
    if name == "exp":
        return exp_integrand(*_floats(args, 1))
    if name == "polyexp":
        lam, _, poly = args.partition(";")
        return PolyExpIntegrand(_floats(poly, what="coefficients"), *_floats(lam, 1))
    if name == "gamma":
        return GammaPdf(*_floats(args, 2))
    if name == "uniform":
        return UniformPdf(*_floats(args, 1))
    if name == "recip-gamma":
        return ReciprocalGammaIntegrand(*_floats(args, 2))
    raise UsageError(f"unknown integrand {name!r}")


def parse_random_variable(spec):
    """``exp:lam``, ``gamma:shape,rate``, ``uniform:theta``, ``recip-gamma:a,b``,
    ``pmf:p0,p1,...``, ``pmf-file:path``, ``geom:rho``, ``sbgeom:rho``, ``poisson:lam``."""
    name, args = _split(spec)
    if name == "pmf-file":
        try:
            return stochastic.read_pmf_file(args)
        except OSError as exc:
            raise UsageError(str(exc)) from exc
    builders = {
        "exp": (stochastic.exponential, 1),
        "gamma": (stochastic.gamma, 2),
        "uniform": (stochastic.uniform, 1),
        "recip-gamma": (stochastic.reciprocal_gamma_weight, 2),
        "geom": (stochastic.geometric_rv, 1),
        "sbgeom": (stochastic.size_biased_geometric_rv, 1),
        "poisson": (stochastic.poisson_rv, 1),
    }
    if name == "pmf":
        return stochastic.pmf_rv(_floats(args, what="probabilities"))
    if name not in builders:
        raise UsageError(f"unknown distribution {name!r}")
    fn, n = builders[name]
    return fn(*_floats(args, n))


# -- output -------------------------------------------------------------------


def dump_json(obj):
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def dump_csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(jsonable(v))


def emit(report, cfg, out):
    if cfg.format == "json":
        out.write(dump_json(report))
        return
    flat = {k: v for k, v in jsonable(report).items() if not isinstance(v, (dict, list))}
    out.write(dump_csv([flat], sorted(flat)))


# -- oracles ------------------------------------------------------------------


def gamma_log_ratio(a, b, c, d):
    def fn(t):
        t = np.asarray(t, dtype=float)
        return ln_gamma_array(c * t + d) - ln_gamma_array(a * t + b)
    return fn


def _ratio_oracle_fn(problem):
    """Ratio at a point; its logarithm if the ratio is positive everywhere sampled."""

    def fn(p):
        lr, sg = eval_log_ratio(problem, p)
        if sg <= 0:
            raise DivisionDomainError("ratio not positive")
        return lr

    return fn


def _observe_ratio(problem, interval, n, noise_floor):
    try:
        return detect_pattern(_ratio_oracle_fn(problem), interval, n=n, noise_floor=noise_floor,
                              vectorized=False)
    except OracleEvaluationError as exc:
        if not isinstance(exc.__cause__, DivisionDomainError):
            raise
    return detect_pattern(lambda p: eval_ratio(problem, p), interval, n=n, noise_floor=noise_floor,
                          vectorized=False)


# -- commands -----------------------------------------------------------------


def cmd_classify_gamma(args, cfg, out):
    a, b, c, d = args.a, args.b, args.c, args.d
    region = classify_region(a, b, c, d)
    verdict = gamma_ratio_pattern(a, b, c, d)
    report = {"region": region.value, "pattern": verdict.pattern.value,
              "turning_point": verdict.turning_point, "verdict": verdict.to_dict()}
    code = EXIT_OK
    if args.verify:
        obs = detect_pattern(gamma_log_ratio(a, b, c, d), GAMMA_ORACLE_INTERVAL, n=cfg.oracle_points,
                             noise_floor=cfg.noise_floor, spacing="log")
        rep = crosscheck(verdict, obs)
        report["crosscheck"] = rep.to_dict()
        if rep.status == "disagree":
            code = EXIT_DISAGREE
    emit(report, cfg, out)
    return code


def _default_oracle_interval(problem):
    r = problem.r
    lo = 1e-3 * min(1.0, r)
    hi = 0.999 * r if math.isfinite(r) else 30.0
    return lo, hi


def cmd_predict(args, cfg, out):
    if args.kind == "series":
        kernel = parse_kernel(args.kernel, SERIES_KERNELS)
        problem = SeriesRatioProblem(parse_coefficients(args.a), parse_coefficients(args.b), kernel,
                                     r=args.r, tol=cfg.series_tol)
        verdict = predict_series_ratio(problem, horizon=cfg.scan_horizon)
    else:
        kernel = parse_kernel(args.kernel, TRANSFORM_KERNELS)
        problem = TransformRatioProblem(parse_integrand(args.f), parse_integrand(args.g), kernel,
                                        args.alpha, args.beta, tol=cfg.quad_tol, x_max=args.x_max)
        verdict = predict_transform_ratio(problem)
    report = {"pattern": verdict.pattern.value, "turning_point": verdict.turning_point,
              "provenance": verdict.provenance, "problem": problem.describe(), "verdict": verdict.to_dict()}
    code = EXIT_OK
    if args.verify:
        lo, hi = _default_oracle_interval(problem)
        lo = args.oracle_lo if args.oracle_lo is not None else lo
        hi = args.oracle_hi if args.oracle_hi is not None else hi
        obs = _observe_ratio(problem, (lo, hi), cfg.predict_oracle_points, cfg.noise_floor)
        rep = crosscheck(verdict, obs)
        report["crosscheck"] = rep.to_dict()
        if rep.status == "disagree":
            code = EXIT_DISAGREE
    emit(report, cfg, out)
    return code


def cmd_lt_order(args, cfg, out):
    X = parse_random_variable(args.x)
    Y = parse_random_variable(args.y)
    verdict = stochastic.lt_ratio_order(X, Y, check=args.check)
    report = {"relation": verdict.relation, "provenance": verdict.provenance,
              "diagnostics": verdict.diagnostics, "x": X.describe(), "y": Y.describe()}
    emit(report, cfg, out)
    return EXIT_OK


# -- verify suite ---------------------------------------------------------------


def _draw_region(rng, region, max_tries=100000):
    lo, hi = SUITE_BOX
    for _ in range(max_tries):
        a, b, c, d = rng.uniform(lo, hi, 4)
        if region == RegionLabel.D1:
            c = a
        if classify_region(a, b, c, d) == region:
            return float(a), float(b), float(c), float(d)
    raise NonConvergenceError(f"could not draw parameters in {region.value}")


def suite_draws(seed, per_region):
    rng = np.random.default_rng(seed)
    return [(region, _draw_region(rng, region)) for region in RegionLabel for _ in range(per_region)]


def _suite_row(job):
    (region, params), n, noise_floor = job
    verdict = gamma_ratio_pattern(*params)
    obs = detect_pattern(gamma_log_ratio(*params), GAMMA_ORACLE_INTERVAL, n=n, noise_floor=noise_floor,
                         spacing="log")
    row = dict(zip("abcd", params))
    row.update(region=region.value, predicted=verdict.pattern.value, observed=obs.pattern.value,
               turning_pred=verdict.turning_point,
               turning_obs=obs.change_points[0] if obs.pattern.unimodal else None)
    if obs.pattern == Pattern.OTHER:
        row["agree"] = "excluded"
    else:
        row["agree"] = "yes" if crosscheck(verdict, obs).agree else "no"
    return row


def _suite_side_checks():
    """Kernel class table and a few fixed rule checks; returns (name, ok) pairs."""
    from .kernels import CONTINUOUS_KERNELS, DISCRETE_KERNELS

    checks = []
    for table in (DISCRETE_KERNELS, CONTINUOUS_KERNELS):
        for kern in table.values():
            for cls in sorted(kern.declared):
                checks.append((f"class {kern.id}/{cls}", verify_class_conditions(kern, cls).passed))
    checks.append(("negative control PowerK/DW12", not verify_class_conditions("PowerK", "DW12").passed))
    fixed = [
        (SeriesRatioProblem(ReciprocalGammaCoefficients(1, 2), ReciprocalGammaCoefficients(1, 1), "PowerK"),
         Pattern.DECREASING),
        (SeriesRatioProblem(ReciprocalGammaCoefficients(1, 2), ReciprocalGammaCoefficients(1, 1), "ExpDecayK"),
         Pattern.INCREASING),
        (TransformRatioProblem(PolyExpIntegrand([0, 1]), ConstIntegrand(1), "ExpDecayX", 1, 2),
         Pattern.DECREASING),
    ]
    for problem, expected in fixed:
        fn = predict_series_ratio if problem.kind == "series" else predict_transform_ratio
        checks.append((f"rule {problem.describe()}", fn(problem).pattern == expected))
    return checks


def cmd_verify_suite(args, cfg, out, err):
    draws = suite_draws(cfg.seed, cfg.draws_per_region)
    jobs = [(d, cfg.oracle_points, cfg.noise_floor) for d in draws]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_suite_row, jobs, chunksize=16))
    else:
        rows = [_suite_row(j) for j in jobs]
    out.write(dump_csv(rows, SUITE_COLUMNS))
    disagreements = sum(r["agree"] == "no" for r in rows)
    side = [] if args.skip_side_checks else _suite_side_checks()
    failed = [name for name, ok in side if not ok]
    excluded = sum(r["agree"] == "excluded" for r in rows)
    err.write(f"region draws: {len(rows)}, disagreements: {disagreements}, excluded (oracle Other): {excluded}\n")
    err.write(f"side checks: {len(side) - len(failed)}/{len(side)} passed\n")
    for name in failed:
        err.write(f"  FAILED {name}\n")
    return EXIT_OK if disagreements == 0 and not failed else EXIT_DISAGREE


# -- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _positive(text):
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _extended(text):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return _positive(text)


def build_parser():
    p = _Parser(prog="ratiomono", description="Monotonicity of ratios of series and transforms.")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--config", metavar="FILE", help="key=value file of run settings")
    common.add_argument("--series-tol", type=_positive)
    common.add_argument("--quad-tol", type=_positive)
    common.add_argument("--noise-floor", type=_positive)
    common.add_argument("--oracle-points", type=int)
    common.add_argument("--scan-horizon", type=int)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("classify-gamma", parents=[common], help="region and shape of Gamma(ct+d)/Gamma(at+b)")
    for name in "abcd":
        g.add_argument(name, type=_positive)
    g.add_argument("--verify", action="store_true", help="crosscheck against the grid oracle")

    pr = sub.add_parser("predict", help="predict the shape of a series or transform ratio")
    psub = pr.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    ps = psub.add_parser("series", parents=[common])
    ps.add_argument("--kernel", required=True)
    ps.add_argument("--a", required=True, help="numerator coefficients")
    ps.add_argument("--b", required=True, help="denominator coefficients")
    ps.add_argument("--r", type=_extended, default=math.inf, help="right end of the domain")
    pt = psub.add_parser("transform", parents=[common])
    pt.add_argument("--kernel", required=True)
    pt.add_argument("--f", required=True, help="numerator integrand")
    pt.add_argument("--g", required=True, help="denominator integrand")
    pt.add_argument("--alpha", type=float, default=0.0)
    pt.add_argument("--beta", type=_extended, default=math.inf)
    pt.add_argument("--x-max", type=_extended, default=math.inf)
    for q in (ps, pt):
        q.add_argument("--verify", action="store_true")
        q.add_argument("--oracle-lo", type=_positive)
        q.add_argument("--oracle-hi", type=_positive)

    lt = sub.add_parser("lt-order", parents=[common], help="Laplace-transform-ratio order of X and Y")
    lt.add_argument("--x", required=True)
    lt.add_argument("--y", required=True)
    lt.add_argument("--check", action="store_true", help="also run the grid fallback")

    vs = sub.add_parser("verify-suite", parents=[common], help="randomized region draws against the oracle")
    vs.add_argument("--seed", type=int)
    vs.add_argument("--draws-per-region", type=int)
    vs.add_argument("--workers", type=int, default=1)
    vs.add_argument("--skip-side-checks", action="store_true")
    return p


def _config_from(args):
    cfg = RunConfig()
    if args.command == "verify-suite":
        cfg.format = "csv"
    if getattr(args, "config", None):
        try:
            cfg.update(read_config_file(args.config))
        except OSError as exc:
            raise UsageError(str(exc)) from exc
    overrides = {}
    for name in ("format", "series_tol", "quad_tol", "noise_floor", "oracle_points", "scan_horizon",
                 "seed", "draws_per_region"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    return cfg.update(overrides).validate()


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = _config_from(args)
        if args.command == "classify-gamma":
            return cmd_classify_gamma(args, cfg, out)
        if args.command == "predict":
            return cmd_predict(args, cfg, out)
        if args.command == "lt-order":
            return cmd_lt_order(args, cfg, out)
        if args.workers < 1:
            raise UsageError("workers must be at least 1")
        return cmd_verify_suite(args, cfg, out, err)
    except (UsageError, DomainError, ValueError, TypeError) as exc:
        err.write(f"ratiomono: error: {exc}\n")
        return EXIT_USAGE
    except (NonConvergenceError, DerivativeDegeneracyError, DivisionDomainError, OracleEvaluationError,
            OverflowError) as exc:
        err.write(f"ratiomono: numerical failure: {exc}\n")
        return EXIT_NONCONVERGENCE


def _entry():
    sys.exit(main())


if __name__ == "__main__":
    _entry()
