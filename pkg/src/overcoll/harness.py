"""Config-driven convergence studies.

A study sweeps the spline dimension N, builds a collocation grid for every
method from its rule, solves, and measures the density error in Sobolev norms
and the field error at points off the boundary.  Records come back in config
order (N outer, then methods, then seeds, then metrics) whatever the thread
count, so the CSV bytes only depend on the config.

Config files are TOML.  See ``configs/`` and the README for the schema.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .basis import PsiBasisSpec, SplineSpace, hs_projection
from .colloc import CollocationGrid, equispaced, max_spacing, offset, random, refined
from .errors import ConfigError, InsufficientPoints, IoError, OvercollError
from .geometry import BoundaryCurve, Circle, make_curve
from .operators import (OperatorSpec, apply_pseudodiff, field_matrix, layer_matrix,
                        pseudodiff_symbol)
from .oracle import (ModelProblem, circle_reference, circle_single_layer_field,
                     manufactured_exterior_solution, plane_wave, plane_wave_trace)
from .solver import (MODIFIED, SQUARE, DiscreteSystem, assemble, galerkin_nodes,
                     solve_bubnov_galerkin, solve_galerkin, solve_least_squares,
                     solve_modified, solve_square)
from .spectral import FourierVector, fourier_coefficients, sobolev_norm

THREADS_ENV = "OVERCOLL_NUM_THREADS"
CSV_COLUMNS = ("method", "N", "M", "metric", "s_or_point", "error", "cond", "seed", "wall_ms")
FIELD_STANDOFF = 0.1

METHODS = ("least_squares", "modified", "galerkin", "bubnov_galerkin",
           "square_collocation", "hs_projection")
GRID_METHODS = ("least_squares", "modified", "square_collocation")


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class GridRule:
    """How M and the points follow from N.

    fixed:  M given.           linear: M = J N.
    power:  M = round(N^beta), or N * round(N^beta) with ``times_n``;
            ``rounding`` is "ceil" (default) or "floor".
    offset: the points delta/N + m/M of a base rule's M.
    random: M uniform points from a base rule's M, one grid per seed.
    """

    rule: str = "linear"
    M: int | None = None
    J: int = 1
    beta: float = 1.0
    times_n: bool = False
    rounding: str = "ceil"
    delta: float = 0.5
    seeds: tuple = ()
    base: "GridRule | None" = None

    @classmethod
    def from_dict(cls, d: dict | None) -> "GridRule":
        if d is None:
            return cls()
        d = dict(d)
        rule = str(d.pop("rule", "linear")).lower()
        base = d.pop("of", None)
        seeds = d.pop("seeds", None)
        if "seed" in d:
            seeds = [d.pop("seed")]
        unknown = set(d) - {"M", "J", "beta", "times_n", "rounding", "delta"}
        if unknown:
            raise ConfigError(f"unknown grid keys {sorted(unknown)}")
        g = cls(rule=rule, base=cls.from_dict(base) if base is not None else None,
                seeds=tuple(int(s) for s in seeds) if seeds is not None else (), **d)
        g.validate()
        return g

    def validate(self):
        if self.rule not in ("fixed", "linear", "power", "offset", "random"):
            raise ConfigError(f"unknown grid rule {self.rule!r}")
        if self.rule == "fixed" and (self.M is None or self.M < 1):
            raise ConfigError("fixed grid rule needs M >= 1")
        if self.rule == "linear" and self.J < 1:
            raise ConfigError("linear grid rule needs J >= 1")
        if self.rule == "power":
            # the effective exponent of M in N must not undersample
            if self.beta + (1.0 if self.times_n else 0.0) < 1.0:
                raise ConfigError("power rule needs beta >= 1 (beta >= 0 with times_n)")
            if self.rounding not in ("ceil", "floor"):
                raise ConfigError("rounding must be 'ceil' or 'floor'")
        if self.rule == "random" and not self.seeds:
            raise ConfigError("random grid rule needs seed or seeds")
        if self.rule in ("offset", "random") and self.base is not None and \
                self.base.rule in ("offset", "random"):
            raise ConfigError("offset and random rules take a plain base rule")

    def count(self, N) -> int:
        if self.rule == "fixed":
            return int(self.M)
        if self.rule == "linear":
            return int(self.J) * N
        if self.rule == "power":
            p = float(N) ** self.beta
            # guard against N^beta landing a hair above an integer
            r = math.ceil(p - 1e-9) if self.rounding == "ceil" else math.floor(p + 1e-9)
            return N * r if self.times_n else r
        return (self.base or GridRule()).count(N)

    def grid(self, N, seed=None) -> CollocationGrid:
        M = self.count(N)
        if self.rule == "offset":
            return offset(N, M, self.delta)
        if self.rule == "random":
            return random(M, seed)
        if self.rule == "linear":
            return refined(N, self.J)
        return equispaced(M)

    def tag(self) -> str:
        if self.rule == "fixed":
            return f"M={self.M}"
        if self.rule == "linear":
            return "M=N" if self.J == 1 else f"M={self.J}N"
        if self.rule == "power":
            op = "ceil" if self.rounding == "ceil" else "floor"
            inner = f"{op}(N^{self.beta:g})"
            return f"M=N*{inner}" if self.times_n else f"M={inner}"
        base = (self.base or GridRule()).tag()
        if self.rule == "offset":
            return f"{base},offset={self.delta:g}/N"
        return f"{base},random"


@dataclass(frozen=True)
class MethodSpec:
    kind: str
    grid: GridRule | None = None
    s: float | None = None
    label: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "MethodSpec":
        d = dict(d)
        kind = str(d.pop("kind", "")).lower()
        if kind not in METHODS:
            raise ConfigError(f"unknown method {kind!r}; expected one of {METHODS}")
        grid = d.pop("grid", None)
        s = d.pop("s", None)
        label = d.pop("label", None)
        if d:
            raise ConfigError(f"unknown method keys {sorted(d)}")
        if kind in GRID_METHODS:
            grid = GridRule.from_dict(grid)
        elif grid is not None:
            raise ConfigError(f"{kind} does not take a collocation grid")
        if kind == "hs_projection" and s is None:
            raise ConfigError("hs_projection needs the Sobolev order s")
        return cls(kind, grid, None if s is None else float(s), label)

    @property
    def tag(self) -> str:
        if self.label:
            return self.label
        if self.kind == "hs_projection":
            return f"hs_projection[s={self.s:g}]"
        if self.grid is not None:
            return f"{self.kind}[{self.grid.tag()}]"
        return self.kind

    @property
    def seeds(self):
        if self.grid is not None and self.grid.rule == "random":
            return self.grid.seeds
        return (None,)


@dataclass(frozen=True)
class MetricSpec:
    """``sobolev`` (order s), ``field_point`` (point) or ``residual`` (the
    L^2 norm of V u_N - f on Gauss nodes, a computable stand-in for the
    H^{-1}-like error when no reference density exists)."""

    kind: str
    s: float | None = None
    point: tuple | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSpec":
        kind = str(d.get("kind", "")).lower()
        if kind == "sobolev":
            if "s" not in d:
                raise ConfigError("sobolev metric needs s")
            return cls(kind, s=float(d["s"]))
        if kind == "field_point":
            p = d.get("point")
            if p is None or len(p) != 2:
                raise ConfigError("field_point metric needs a 2D point")
            return cls(kind, point=(float(p[0]), float(p[1])))
        if kind == "residual":
            return cls(kind)
        raise ConfigError(f"unknown metric {kind!r}")

    @property
    def where(self) -> str:
        if self.kind == "sobolev":
            return repr(self.s)
        if self.kind == "field_point":
            return f"{self.point[0]!r};{self.point[1]!r}"
        return "L2"


@dataclass(frozen=True)
class DataSpec:
    kind: str
    theta: float = 0.0
    point: tuple | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "DataSpec":
        kind = str(d.get("kind", "")).lower()
        if kind in ("plane_wave", "circle_bessel"):
            return cls(kind, theta=float(d.get("theta", 0.0)))
        if kind == "interior_source":
            p = d.get("point")
            if p is None or len(p) != 2:
                raise ConfigError("interior_source needs a 2D point")
            return cls(kind, point=(float(p[0]), float(p[1])))
        raise ConfigError(f"unknown data kind {kind!r}")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    name: str
    curve: BoundaryCurve
    operator: OperatorSpec
    degree: int
    Ns: tuple
    methods: tuple
    data: DataSpec
    metrics: tuple
    output: str | None = None
    format: str = "csv"
    band_factor: int = 8
    timing: bool = False
    quad_order: int = 16
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, name=None) -> "ExperimentConfig":
        try:
            return cls._parse(raw, name)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def _parse(cls, raw, name):
        for key in ("geometry", "operator", "basis", "data", "methods", "metrics"):
            if key not in raw:
                raise ConfigError(f"config is missing [{key}]")
        curve = make_curve(raw["geometry"])
        op = dict(raw["operator"])
        spec = OperatorSpec(op.pop("kind"), k=float(op.pop("k", 0.0)),
                            side=op.pop("side", "exterior"))
        if op:
            raise ConfigError(f"unknown operator keys {sorted(op)}")
        if not spec.helmholtz:
            raise ConfigError("studies run Helmholtz operators; use the oracle for the model operator")
        basis = raw["basis"]
        degree = int(basis.get("degree", 1))
        Ns = tuple(int(n) for n in basis["N"])
        if not Ns:
            raise ConfigError("basis.N is empty")
        if list(Ns) != sorted(set(Ns)):
            raise ConfigError("basis.N must be strictly ascending")
        if Ns[0] < degree + 1:
            raise ConfigError(f"N must be at least degree + 1 = {degree + 1}")
        methods = tuple(MethodSpec.from_dict(m) for m in raw["methods"])
        metrics = tuple(MetricSpec.from_dict(m) for m in raw["metrics"])
        if not methods or not metrics:
            raise ConfigError("need at least one method and one metric")
        tags = [m.tag for m in methods]
        if len(set(tags)) != len(tags):
            raise ConfigError(f"method tags must be unique, got {tags}; set label")
        for m in metrics:
            if m.kind == "field_point":
                dist = curve.distance(m.point)
                if dist < FIELD_STANDOFF:
                    raise ConfigError(f"field point {m.point} is {dist:.3g} from the boundary")
                if curve.contains(m.point) != (spec.side == "interior"):
                    raise ConfigError(f"field point {m.point} is not on the {spec.side} side")
        data = DataSpec.from_dict(raw["data"])
        if data.kind == "circle_bessel" and not isinstance(curve, Circle):
            raise ConfigError("circle_bessel data needs a circle")
        if data.kind == "interior_source":
            if not curve.contains(data.point):
                raise ConfigError(f"source {data.point} is not inside the curve")
            if spec.side != "exterior":
                raise ConfigError("interior_source data only defines an exterior problem")
        out = dict(raw.get("output", {}))
        fmt = str(out.get("format", "csv")).lower()
        if fmt not in ("csv", "json"):
            raise ConfigError("output.format must be csv or json")
        band_factor = int(raw.get("spectral_band_factor", out.get("spectral_band_factor", 8)))
        if band_factor < 2:
            raise ConfigError("spectral_band_factor must be at least 2")
        return cls(name or str(raw.get("name", "study")), curve, spec, degree, Ns, methods, data,
                   metrics, out.get("path"), fmt, band_factor, bool(out.get("timing", False)),
                   int(raw.get("quadrature", {}).get("order", 16)), raw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise IoError(str(exc)) from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(raw, name=raw.get("name", os.path.splitext(os.path.basename(path))[0]))

    @property
    def band(self) -> int:
        return self.band_factor * self.Ns[-1]


# ---------------------------------------------------------------- records

@dataclass(frozen=True)
class ConvergenceRecord:
    """One (method, N, seed, metric) measurement.  ``error`` is NaN and
    ``status`` holds the exception when the case failed."""

    method: str
    N: int
    M: int
    metric: str
    s_or_point: str
    error: float
    cond: float
    seed: int | None = None
    wall_ms: float = 0.0
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"


def select(records, method=None, metric=None, where=None, seed=None, ok=True):
    """Records of one curve, in their original order."""
    out = []
    for r in records:
        if method is not None and r.method != method:
            continue
        if metric is not None and r.metric != metric:
            continue
        if where is not None and r.s_or_point != where:
            continue
        if seed is not None and r.seed != seed:
            continue
        if ok and not r.ok:
            continue
        out.append(r)
    return out


# ---------------------------------------------------------------- references

class Reference:
    """Boundary data and whatever exact quantities the setup admits."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        curve, spec, data = cfg.curve, cfg.operator, cfg.data
        self.density: FourierVector | None = None
        self._field = None
        if data.kind == "interior_source":
            fdata, ffield = manufactured_exterior_solution(curve, spec.k, data.point)
            self.data = fdata
            self._field = ffield
        else:
            pw = plane_wave(spec.k, data.theta)
            self.data = lambda t: pw(curve.point(t))
            if spec.side == "interior":
                self._field = pw
        if isinstance(curve, Circle):
            self.density = self._circle_density()
            if self._field is None and spec.kind == "single_layer":
                dens, c, R = self.density, curve.center, curve.radius
                self._field = lambda x: np.array(
                    [circle_single_layer_field(spec, R, dens, p - c) for p in np.atleast_2d(x)])

    def _circle_density(self):
        curve, spec, data = self.cfg.curve, self.cfg.operator, self.cfg.data
        if data.kind == "interior_source":
            ratio = np.hypot(*(np.asarray(data.point) - curve.center)) / curve.radius
            K = 64 if ratio == 0 else max(64, int(np.ceil(np.log(1e-17) / np.log(ratio))) + 16)
            f = fourier_coefficients(self.data, K)
        else:
            dvec = np.array([np.cos(data.theta), np.sin(data.theta)])
            f = plane_wave_trace(spec.k, curve.radius, data.theta) * \
                np.exp(1j * spec.k * float(dvec @ curve.center))
        return circle_reference(spec, curve.radius, f)

    def field(self, points):
        if self._field is None:
            raise ConfigError("no exact field for this geometry/data pair")
        return np.asarray(self._field(np.atleast_2d(points)), dtype=complex)


# ---------------------------------------------------------------- runner

@dataclass
class _Case:
    method: MethodSpec
    N: int
    seed: int | None


def _solve(cfg: ExperimentConfig, ref: Reference, case: _Case, space: SplineSpace):
    m, spec, curve = case.method, cfg.operator, cfg.curve
    kw = {"n": cfg.quad_order}
    if m.kind == "galerkin":
        sol = solve_galerkin(spec, curve, space, ref.data, **kw)
        return sol.coefficients, sol.cond, 0, None
    if m.kind == "bubnov_galerkin":
        sol = solve_bubnov_galerkin(spec, curve, space, ref.data, **kw)
        return sol.coefficients, sol.cond, 0, None
    if m.kind == "hs_projection":
        if ref.density is None:
            raise ConfigError("hs_projection needs a reference density (circle geometry)")
        a, info = hs_projection(ref.density, space, m.s, band=cfg.band, return_info=True)
        return a, info["cond"], 0, None
    grid = m.grid.grid(case.N, case.seed)
    if m.kind == "square_collocation":
        if grid.M != case.N:
            raise ConfigError(f"square collocation needs M = N, rule gives M = {grid.M}")
        sol = solve_square(assemble(spec, curve, space, grid, ref.data, method=SQUARE, **kw))
    elif m.kind == "modified":
        sol = solve_modified(assemble(spec, curve, space, grid, ref.data, method=MODIFIED, **kw))
    else:
        sol = solve_least_squares(assemble(spec, curve, space, grid, ref.data, **kw))
    return sol.coefficients, sol.cond, grid.M, grid


def _metric(cfg, ref, space, coeffs, metric: MetricSpec):
    if metric.kind == "sobolev":
        if ref.density is None:
            raise ConfigError("Sobolev errors need a reference density (circle geometry)")
        err = space.fourier(coeffs, cfg.band) - ref.density.rebanded(cfg.band)
        return sobolev_norm(err, metric.s)
    if metric.kind == "field_point":
        exact = ref.field(metric.point)[0]
        approx = field_matrix(cfg.operator, cfg.curve, space, np.array([metric.point]),
                              standoff=FIELD_STANDOFF) @ coeffs
        return float(abs(approx[0] - exact))
    t, w = galerkin_nodes(space, cfg.curve, per_panel=16)
    r = layer_matrix(cfg.operator, cfg.curve, space, t, n=cfg.quad_order) @ coeffs - ref.data(t)
    return float(np.sqrt(np.sum(w * np.abs(r) ** 2)))


def _spacing_diagnostic(case: _Case):
    """d(Delta_M)^3 M N^3 for random grids; it only depends on the points."""
    rule = case.method.grid
    if rule is None or rule.rule != "random":
        return None
    grid = rule.grid(case.N, case.seed)
    return max_spacing(grid) ** 3 * grid.M * float(case.N) ** 3


def _run_case(cfg: ExperimentConfig, ref: Reference, case: _Case):
    m = case.method
    tag = m.tag
    space = SplineSpace.uniform_mesh(case.N, cfg.degree)
    M_rule = m.grid.count(case.N) if m.grid is not None else 0
    diag = _spacing_diagnostic(case)
    t0 = time.perf_counter()
    try:
        coeffs, cond, M, grid = _solve(cfg, ref, case, space)
    except (OvercollError, ArithmeticError, np.linalg.LinAlgError) as exc:
        status = f"{type(exc).__name__}: {exc}"
        out = [ConvergenceRecord(tag, case.N, M_rule, mt.kind, mt.where, math.nan, math.nan,
                                 case.seed, 0.0, status) for mt in cfg.metrics]
        if diag is not None:
            # the points exist even when the solve does not
            out.append(ConvergenceRecord(tag, case.N, M_rule, "spacing_diagnostic", "",
                                         float(diag), math.nan, case.seed, 0.0))
        return out
    wall = (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0
    out = []
    for mt in cfg.metrics:
        try:
            err, status = _metric(cfg, ref, space, coeffs, mt), "ok"
        except (OvercollError, ArithmeticError) as exc:
            err, status = math.nan, f"{type(exc).__name__}: {exc}"
        out.append(ConvergenceRecord(tag, case.N, M, mt.kind, mt.where, float(err), float(cond),
                                     case.seed, round(wall, 3), status))
    if diag is not None:
        out.append(ConvergenceRecord(tag, case.N, M, "spacing_diagnostic", "", float(diag),
                                     float(cond), case.seed, round(wall, 3)))
    return out


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    return max(1, n)


def run_study(config: ExperimentConfig | dict | str, threads=None) -> list[ConvergenceRecord]:
    """Run every (N, method, seed) case and return records in config order."""
    cfg = _as_config(config)
    ref = Reference(cfg)
    cases = [_Case(m, N, seed) for N in cfg.Ns for m in cfg.methods for seed in m.seeds]
    threads = thread_count() if threads is None else max(1, int(threads))
    if threads == 1:
        chunks = [_run_case(cfg, ref, c) for c in cases]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda c: _run_case(cfg, ref, c), cases))
    return [r for chunk in chunks for r in chunk]


def _as_config(config) -> ExperimentConfig:
    if isinstance(config, ExperimentConfig):
        return config
    if isinstance(config, dict):
        return ExperimentConfig.from_dict(config)
    return ExperimentConfig.load(config)


# ---------------------------------------------------------------- slopes

def fit_slope(records, y=None, x="N") -> dict:
    """Least-squares line through (log x, log error).

    ``records`` is a list of ConvergenceRecord (x taken from N, M or J = M/N)
    or, with ``y`` given, an array of abscissae.
    """
    if y is None:
        recs = list(records)
        if x == "N":
            xs = [r.N for r in recs]
        elif x == "M":
            xs = [r.M for r in recs]
        elif x == "J":
            xs = [r.M / r.N for r in recs]
        else:
            raise ValueError("x must be 'N', 'M' or 'J'")
        ys = [r.error for r in recs]
    else:
        xs, ys = records, y
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("x and y lengths differ")
    if len(np.unique(xs)) < 3:
        raise InsufficientPoints(f"need at least 3 distinct abscissae, got {len(np.unique(xs))}")
    if not np.all(np.isfinite(ys)) or np.any(ys <= 0) or np.any(xs <= 0):
        raise ValueError("slope fit needs positive finite values")
    X, Y = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2, "n": int(len(xs))}


# ---------------------------------------------------------------- output

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(records: Sequence[ConvergenceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def to_json(records: Sequence[ConvergenceRecord], config: Any = None) -> str:
    if isinstance(config, ExperimentConfig):
        config = config.raw
    doc = {
        "tool": "overcoll",
        "version": __version__,
        "config": config,
        "records": [asdict(r) for r in records],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit(records, path, format="csv", config=None) -> str:
    """Write records as CSV or JSON; returns the path."""
    fmt = str(format).lower()
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "json":
        text = to_json(records, config)
    else:
        raise ValueError("format must be 'csv' or 'json'")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return str(path)


def load_json(path):
    """Records and config echo from a JSON file written by ``emit``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return [ConvergenceRecord(**r) for r in doc["records"]], doc.get("config")


# ---------------------------------------------------------------- model problem

def model_solver_errors(problem: ModelProblem, n=16) -> np.ndarray:
    """a_mu - u_mu over Lambda_N from the assembled least-squares solver.

    Subtracting the collocated image of sum_mu u_mu psi_mu from the data
    leaves V(u - P u) + D u_Lambda, where P u is the Lambda_N part of u and
    column mu of D is what V psi_mu misses of V e_mu.  Least squares on that
    right-hand side returns a - u_Lambda directly, so no O(1) coefficients
    cancel and 1e-8 relative agreement with the oracle is resolvable.
    """
    P = problem
    if not P.d > P.two_alpha:
        raise ValueError("consistency needs d > 2 alpha")
    u = P.u_true
    K = u.K
    ps = PsiBasisSpec(P.N, P.d)
    lam = ps.Lambda_N
    high = u.coeffs.copy()
    inband = np.abs(lam) <= K
    high[lam[inband] + K] = 0.0
    high = apply_pseudodiff(FourierVector(high), P.two_alpha)
    spec = OperatorSpec("pseudodiff", two_alpha=P.two_alpha)
    space = SplineSpace.uniform_mesh(P.N, P.d)
    sys = assemble(spec, None, space, refined(P.N, P.J), high.synthesize, n=n)
    x = sys.points
    T = ps.to_bspline()
    nz = lam != 0
    # V psi_mu minus its trial-space image: exactly the modes outside Lambda_N
    D = pseudodiff_symbol(lam[nz], P.two_alpha) * np.exp(2j * np.pi * np.outer(x, lam[nz])) \
        - sys.G @ T[:, nz]
    rhs = sys.rhs + D @ u[lam[nz]]
    sol = solve_least_squares(DiscreteSystem(sys.G, sys.W, rhs))
    return ps.from_bspline(sol.coefficients)


__all__ = [
    "GridRule", "MethodSpec", "MetricSpec", "DataSpec", "ExperimentConfig", "ConvergenceRecord",
    "Reference", "run_study", "fit_slope", "select", "emit", "to_csv", "to_json", "load_json",
    "model_solver_errors", "thread_count", "CSV_COLUMNS", "THREADS_ENV",
]
