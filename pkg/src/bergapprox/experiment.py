"""Experiment configuration, the k-sweep pipeline and report emission."""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import jsonschema
import numpy as np

from . import bergman, comparators, estimates, geometry, weights
from .estimates import CSV_COLUMNS, RateFit, RatioReport, fit_rate, spread

log = logging.getLogger(__name__)

SCENARIOS = (
    "theorem_1_1", "theorem_1_2", "theorem_1_3", "theorem_2_1",
    "eq_2_3", "gaussian_compare", "polynomial_mode",
)

DEFAULTS = {
    "weight": {"name": "flat_line", "params": {}},
    "domain": {"center": [0.0, 0.0], "half_width_x": 1.0, "half_width_y": 1.0},
    "resolution": [256, 256],
    "k_values": [16, 32, 64, 128, 256],
    "margin": 0.25,
    "basis_policy": {
        "initial_degree_rule": {"factor": 2.0, "offset": 4},
        "stabilization_threshold": 0.02,
        "max_degree": 160,
    },
    "eigen_floor": 1e-12,
    "test_function": "standard_bump",
    "agmon_centers": [[0.0, 0.0], [0.4, 0.3]],
    "local_center": [0.0, 0.0],
    "bm_k": 64,
    "zero_set_samples": 301,
    "polynomial_weight": {"name": "log_growth", "params": {"m": 1.0}},
    "scenarios": {name: True for name in SCENARIOS},
    "thresholds": {
        "max_slope": -0.45,
        "min_r_squared": 0.9,
        "max_spread": 5.0,
        "max_slope_gap": 0.3,
        "bm_tolerance": 5e-3,
    },
    "output": {"csv_path": "report.csv", "json_path": "report.json"},
}

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_WEIGHT = {
    "type": "object",
    "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
    "required": ["name"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["weight", "k_values"],
    "properties": {
        "weight": {"oneOf": [{"type": "string"}, _WEIGHT]},
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "center": _COMPLEX,
                "half_width_x": {"type": "number", "exclusiveMinimum": 0},
                "half_width_y": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "resolution": {
            "type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 2, "maxItems": 2,
        },
        "k_values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "margin": {"type": "number", "minimum": 0},
        "basis_policy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "initial_degree_rule": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "factor": {"type": "number", "minimum": 0},
                        "offset": {"type": "integer", "minimum": 0},
                    },
                },
                "stabilization_threshold": {"type": "number", "exclusiveMinimum": 0},
                "max_degree": {"type": "integer", "minimum": 1},
            },
        },
        "eigen_floor": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "test_function": {"type": "string"},
        "agmon_centers": {"type": "array", "items": _COMPLEX},
        "local_center": _COMPLEX,
        "bm_k": {"type": "number", "exclusiveMinimum": 0},
        "zero_set_samples": {"type": "integer", "minimum": 3},
        "polynomial_weight": {"oneOf": [{"type": "string"}, _WEIGHT]},
        "scenarios": {
            "type": "object",
            "additionalProperties": False,
            "properties": {name: {"type": "boolean"} for name in SCENARIOS},
        },
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                name: {"type": "number"} for name in DEFAULTS["thresholds"]
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"csv_path": {"type": "string"}, "json_path": {"type": "string"}},
        },
    },
}


class ConfigError(ValueError):
    pass


class RunError(RuntimeError):
    pass


def _to_complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)


def _complex_pair(z: complex) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("params",):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


@dataclass
class ExperimentConfig:
    weight: dict
    domain: geometry.Rect
    resolution: tuple
    k_values: List[float]
    margin: float
    basis_policy: dict
    eigen_floor: float
    test_function: str
    agmon_centers: List[complex]
    local_center: complex
    bm_k: float
    zero_set_samples: int
    polynomial_weight: dict
    scenarios: Dict[str, bool]
    thresholds: Dict[str, float]
    output: Dict[str, str]

    def to_dict(self) -> dict:
        return {
            "weight": copy.deepcopy(self.weight),
            "domain": {
                "center": _complex_pair(self.domain.center),
                "half_width_x": self.domain.half_width_x,
                "half_width_y": self.domain.half_width_y,
            },
            "resolution": list(self.resolution),
            "k_values": list(self.k_values),
            "margin": self.margin,
            "basis_policy": copy.deepcopy(self.basis_policy),
            "eigen_floor": self.eigen_floor,
            "test_function": self.test_function,
            "agmon_centers": [_complex_pair(a) for a in self.agmon_centers],
            "local_center": _complex_pair(self.local_center),
            "bm_k": self.bm_k,
            "zero_set_samples": self.zero_set_samples,
            "polynomial_weight": copy.deepcopy(self.polynomial_weight),
            "scenarios": dict(self.scenarios),
            "thresholds": dict(self.thresholds),
            "output": dict(self.output),
        }

    def with_scenarios(self, enabled) -> "ExperimentConfig":
        new = copy.deepcopy(self)
        new.scenarios = {name: name in enabled for name in SCENARIOS}
        return new


def required_resolution(rect: geometry.Rect, k_max: float):
    """Smallest (nx, ny) with grid spacing h <= 1/(4 sqrt(k_max))."""
    h_max = 1.0 / (4.0 * math.sqrt(k_max))
    return (
        int(math.ceil(2 * rect.half_width_x / h_max - 1e-9)),
        int(math.ceil(2 * rect.half_width_y / h_max - 1e-9)),
    )


def config_from_dict(raw: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {path}: {exc.message}") from None
    data = _merge(DEFAULTS, raw)
    for key in ("weight", "polynomial_weight"):
        if isinstance(data[key], str):
            data[key] = {"name": data[key], "params": {}}
        data[key].setdefault("params", {})
        if data[key]["name"] not in weights.MODEL_WEIGHTS:
            raise ConfigError(f"config error at {key}/name: unknown weight {data[key]['name']!r}")
    if data["weight"]["name"] == "flat_plane":
        raise ConfigError("config error at weight/name: the experiment runner handles n = 1 weights only")
    ks = [float(k) for k in data["k_values"]]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError(f"config error at k_values: must be strictly increasing, got {ks}")
    d = data["domain"]
    rect = geometry.Rect(_to_complex(d["center"]), float(d["half_width_x"]), float(d["half_width_y"]))
    nx, ny = data["resolution"]
    need = required_resolution(rect, max(ks))
    if nx < need[0] or ny < need[1]:
        raise ConfigError(
            f"config error at resolution: {nx}x{ny} is too coarse for k_max={max(ks):g} "
            f"(h <= 1/(4 sqrt(k_max))); need nx >= {need[0]}, ny >= {need[1]}"
        )
    if data["margin"] >= min(rect.half_width_x, rect.half_width_y):
        raise ConfigError("config error at margin: collapses the domain")
    if data["test_function"] not in bergman.TEST_FUNCTIONS and not data["test_function"].startswith("monomial_"):
        raise ConfigError(f"config error at test_function: unknown {data['test_function']!r}")
    return ExperimentConfig(
        weight=data["weight"],
        domain=rect,
        resolution=(int(nx), int(ny)),
        k_values=ks,
        margin=float(data["margin"]),
        basis_policy=data["basis_policy"],
        eigen_floor=float(data["eigen_floor"]),
        test_function=data["test_function"],
        agmon_centers=[_to_complex(a) for a in data["agmon_centers"]],
        local_center=_to_complex(data["local_center"]),
        bm_k=float(data["bm_k"]),
        zero_set_samples=int(data["zero_set_samples"]),
        polynomial_weight=data["polynomial_weight"],
        scenarios={name: bool(data["scenarios"][name]) for name in SCENARIOS},
        thresholds={k: float(v) for k, v in data["thresholds"].items()},
        output=dict(data["output"]),
    )


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config error: {path} is not valid JSON ({exc})") from None
    return config_from_dict(raw)


# --------------------------------------------------------------------------
# report


def _fit_to_dict(fit: RateFit) -> dict:
    return asdict(fit)


def _ratio_to_dict(r: RatioReport) -> dict:
    d = asdict(r)
    for key in ("agmon_ratios", "agmon_chi_ratios"):
        d[key] = [{"center": _complex_pair(a), "ratio": v} for a, v in getattr(r, key)]
    for key in ("bm_value", "v_at_center"):
        if d[key] is not None:
            d[key] = _complex_pair(d[key])
    return d


def _ratio_from_dict(d: dict) -> RatioReport:
    d = dict(d)
    for key in ("agmon_ratios", "agmon_chi_ratios"):
        d[key] = [(_to_complex(e["center"]), e["ratio"]) for e in d[key]]
    for key in ("bm_value", "v_at_center"):
        if d[key] is not None:
            d[key] = _to_complex(d[key])
    return RatioReport(**d)


@dataclass
class ExperimentReport:
    config: dict
    per_k: List[RatioReport] = field(default_factory=list)
    fits: Dict[str, RateFit] = field(default_factory=dict)
    verdicts: Dict[str, dict] = field(default_factory=dict)
    comparison: List[dict] = field(default_factory=list)
    polynomial: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "per_k": [_ratio_to_dict(r) for r in self.per_k],
            "fits": {name: _fit_to_dict(f) for name, f in self.fits.items()},
            "verdicts": self.verdicts,
            "comparison": self.comparison,
            "polynomial": self.polynomial,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(
            config=d["config"],
            per_k=[_ratio_from_dict(r) for r in d["per_k"]],
            fits={name: RateFit(**f) for name, f in d["fits"].items()},
            verdicts=d["verdicts"],
            comparison=d["comparison"],
            polynomial=d["polynomial"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @property
    def passed(self) -> bool:
        return all(v["passed"] is not False for v in self.verdicts.values())


# --------------------------------------------------------------------------
# pipeline


@dataclass
class _Setup:
    w: weights.Weight
    q: geometry.Quadrature
    K: geometry.CompactK
    u: bergman.TestFunction
    E: Optional[geometry.ZeroSetSample]


def _prepare(cfg: ExperimentConfig) -> _Setup:
    rect = cfg.domain
    w = weights.make_model_weight(cfg.weight["name"], cfg.weight["params"], rect)
    q = geometry.build_grid(rect, *cfg.resolution)
    K = geometry.shrink_to_compact(rect, cfg.margin)
    u = bergman.make_test_function(cfg.test_function, rect)
    try:
        E = geometry.sample_zero_set(w, rect, cfg.zero_set_samples).restrict(K)
    except geometry.EmptyZeroSet:
        E = None
    if E is not None and len(E) == 0:
        E = None
    return _Setup(w, q, K, u, E)


def _adaptive(cfg, setup: _Setup, w, k, probe) -> bergman.AdaptiveResult:
    pol = cfg.basis_policy
    rule = pol["initial_degree_rule"]
    return bergman.project_adaptive(
        setup.u, cfg.domain, setup.q, w, k, probe,
        start_degree=bergman.initial_degree(k, rule["factor"], rule["offset"]),
        threshold=pol["stabilization_threshold"],
        max_degree=pol["max_degree"],
        eigen_floor=cfg.eigen_floor,
    )


def _row_for_k(cfg: ExperimentConfig, setup: _Setup, k: float) -> RatioReport:
    sc = cfg.scenarios
    row = RatioReport(k=k)
    q, w, u, K = setup.q, setup.w, setup.u, setup.K
    needs_projection = any(sc[s] for s in ("theorem_1_1", "theorem_1_2", "theorem_1_3", "eq_2_3", "gaussian_compare"))
    if not (needs_projection or sc["theorem_2_1"]):
        return row
    if setup.E is None:
        raise RunError("zero set E does not meet K")
    probe = setup.E.points
    f_nodes = u.dbar(q.nodes)

    if needs_projection:
        res = _adaptive(cfg, setup, w, k, probe)
        p = res.projection
        v = bergman.residual(u, p)
        v_nodes = v(q.nodes)
        row.basis_degree = res.degree
        row.gram_condition = p.factor.condition
        row.effective_rank = p.factor.effective_rank
        row.sup_err_E = estimates.sup_error_on_E(u, p, setup.E, K)
        if sc["theorem_1_2"]:
            row.l2_ratio = estimates.l2_ratio(v_nodes, f_nodes, q, w, k)
        if sc["theorem_1_3"]:
            row.sup_ratio = estimates.weighted_sup_on_K(v_nodes, f_nodes, K, q, w, k)
        if sc["eq_2_3"]:
            a = cfg.local_center
            loc = estimates.local_estimate_check(v, u.dbar, k, a, q)
            row.bm_lhs, row.bm_rhs_l2_term, row.bm_rhs_f_term = loc.lhs, loc.rhs_l2, loc.rhs_f
            row.bm_value = estimates.bm_reconstruct(v, k, a, q)
            row.v_at_center = complex(v(np.array([a]))[0])
            row.bm_ball_sup = estimates.ball_sup(v, k, a, q)

    if sc["theorem_2_1"]:
        w5, _ = weights.rescale_for_agmon(w)
        res5 = _adaptive(cfg, setup, w5, k, probe)
        v5_nodes = u(q.nodes) - res5.projection(q.nodes)
        row.agmon_degree = res5.degree
        for a in cfg.agmon_centers:
            row.agmon_ratios.append((a, estimates.agmon_ratio(v5_nodes, f_nodes, q, w5, k, a, "distance")))
            row.agmon_chi_ratios.append((a, estimates.agmon_ratio(v5_nodes, f_nodes, q, w5, k, a, "chi")))
    return row


def _verdict(passed, detail: str) -> dict:
    return {"passed": passed, "detail": detail}


def _scenario_verdicts(cfg: ExperimentConfig, report: ExperimentReport):
    th = cfg.thresholds
    rows = report.per_k
    ks = [r.k for r in rows]
    sc = cfg.scenarios

    if sc["theorem_1_1"]:
        errs = [r.sup_err_E for r in rows]
        if len(rows) < 3 or min(errs) <= 0:
            report.verdicts["theorem_1_1"] = _verdict(False, "need >= 3 k values with positive errors")
        else:
            fit = fit_rate(ks, errs)
            report.fits["theorem_1_1"] = fit
            decreasing = all(b < a for a, b in zip(errs, errs[1:]))
            ok = decreasing and fit.slope <= th["max_slope"] and fit.r_squared >= th["min_r_squared"]
            report.verdicts["theorem_1_1"] = _verdict(
                ok, f"slope={fit.slope:.4f} r2={fit.r_squared:.4f} strictly_decreasing={decreasing}"
            )

    for name, attr in (("theorem_1_2", "l2_ratio"), ("theorem_1_3", "sup_ratio")):
        if sc[name]:
            vals = [r.k * getattr(r, attr) for r in rows]
            s = spread(vals)
            report.verdicts[name] = _verdict(s <= th["max_spread"], f"spread of k*ratio = {s:.4f}")

    if sc["theorem_2_1"]:
        parts, ok = [], True
        for i, a in enumerate(cfg.agmon_centers):
            vals = [r.k * r.agmon_ratios[i][1] for r in rows]
            s = spread(vals)
            ok &= s <= th["max_spread"]
            gap = max(
                max(r.agmon_ratios[i][1] / r.agmon_chi_ratios[i][1], r.agmon_chi_ratios[i][1] / r.agmon_ratios[i][1])
                for r in rows
            )
            ok &= gap <= math.e
            parts.append(f"a={a}: spread={s:.4f} variant_gap={gap:.4f}")
        report.verdicts["theorem_2_1"] = _verdict(bool(ok), "; ".join(parts))

    if sc["eq_2_3"]:
        ratios = [r.bm_lhs / (r.bm_rhs_l2_term + r.bm_rhs_f_term) for r in rows]
        finite = all(math.isfinite(x) for x in ratios)
        s = spread(ratios) if finite else math.inf
        ok = finite and s <= th["max_spread"]
        detail = f"spread of lhs/rhs = {s:.4f}"
        bm_rows = [r for r in rows if r.k == cfg.bm_k]
        if bm_rows:
            r = bm_rows[0]
            rel = abs(r.bm_value - r.v_at_center) / r.bm_ball_sup if r.bm_ball_sup > 0 else abs(r.bm_value - r.v_at_center)
            ok = ok and rel <= th["bm_tolerance"]
            detail += f"; bm error at k={cfg.bm_k:g}: {rel:.3e} of sup_ball|v|"
        else:
            detail += f"; bm check skipped (k={cfg.bm_k:g} not in k_values)"
        report.verdicts["eq_2_3"] = _verdict(bool(ok), detail)


def _gaussian_compare(cfg: ExperimentConfig, setup: _Setup, report: ExperimentReport):
    th = cfg.thresholds
    if cfg.weight["name"] != "flat_line":
        report.verdicts["gaussian_compare"] = _verdict(None, "not applicable: requires the flat_line weight")
        return
    pts = setup.E.points
    u = setup.u
    sr = u.support_rect
    support = (sr.xmin, sr.xmax)
    bergman_err = {r.k: r.sup_err_E for r in report.per_k}
    cmp = comparators.compare_model_case(
        cfg.k_values,
        lambda k: bergman_err[k],
        lambda k: comparators.gaussian_sup_error(u, k, support, pts),
    )
    report.comparison = cmp.per_k
    if cmp.degenerate:
        report.verdicts["gaussian_compare"] = _verdict(None, "degenerate: u is reproduced exactly by P_k")
        return
    report.fits["gaussian_compare.bergman"] = cmp.bergman_fit
    if cmp.gaussian_fit is not None:
        report.fits["gaussian_compare.gaussian"] = cmp.gaussian_fit
    gs = cmp.gaussian_slope if cmp.gaussian_slope is not None else math.nan
    gap = abs(cmp.bergman_slope - gs)
    ok = cmp.bergman_slope <= th["max_slope"] and gs <= th["max_slope"] and gap <= th["max_slope_gap"]
    report.verdicts["gaussian_compare"] = _verdict(
        bool(ok), f"bergman_slope={cmp.bergman_slope:.4f} gaussian_slope={gs:.4f} gap={gap:.4f}"
    )


def _polynomial_mode(cfg: ExperimentConfig, setup: _Setup, report: ExperimentReport):
    pw = cfg.polynomial_weight
    rect = cfg.domain
    w = weights.make_model_weight(pw["name"], pw["params"], rect)
    try:
        E = geometry.sample_zero_set(w, rect, cfg.zero_set_samples).restrict(setup.K)
    except geometry.EmptyZeroSet as exc:
        raise RunError(f"scenario polynomial_mode: {exc}") from None
    if len(E) == 0:
        raise RunError("scenario polynomial_mode: E does not meet K")
    max_deg = cfg.basis_policy["max_degree"]
    rows = []
    for k in cfg.k_values:
        degree = min(int(math.ceil(k)), max_deg)
        try:
            p = bergman.project_fixed(
                setup.u(setup.q.nodes), rect, setup.q, w, k, degree,
                kind="polynomials_deg_k", eigen_floor=cfg.eigen_floor,
            )
            err = estimates.sup_error_on_E(setup.u, p, E, setup.K)
        except ValueError as exc:
            raise RunError(f"scenario polynomial_mode, k={k:g}: {exc}") from None
        rows.append({"k": k, "degree": degree, "sup_err_E": err})
    report.polynomial = rows
    errs = [r["sup_err_E"] for r in rows]
    if len(rows) < 3 or min(errs) <= 0:
        report.verdicts["polynomial_mode"] = _verdict(None, "rate not fitted (need >= 3 positive errors)")
        return
    fit = fit_rate(cfg.k_values, errs)
    report.fits["polynomial_mode"] = fit
    report.verdicts["polynomial_mode"] = _verdict(
        fit.slope <= cfg.thresholds["max_slope"], f"slope={fit.slope:.4f} r2={fit.r_squared:.4f} (1/sqrt(k) is -0.5)"
    )


def run(cfg: ExperimentConfig) -> ExperimentReport:
    """Execute every enabled scenario over the k grid."""
    report = ExperimentReport(config=cfg.to_dict())
    setup = _prepare(cfg)
    for k in cfg.k_values:
        log.info("k = %g", k)
        try:
            report.per_k.append(_row_for_k(cfg, setup, k))
        except (ValueError, RunError) as exc:
            enabled = [s for s in SCENARIOS if cfg.scenarios[s]]
            raise RunError(f"run aborted at k={k:g} (scenarios {', '.join(enabled)}): {exc}") from None
    _scenario_verdicts(cfg, report)
    if cfg.scenarios["gaussian_compare"]:
        _gaussian_compare(cfg, setup, report)
    if cfg.scenarios["polynomial_mode"]:
        _polynomial_mode(cfg, setup, report)
    return report


# --------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def report_csv(report: ExperimentReport) -> str:
    return _csv_text(CSV_COLUMNS, [r.csv_row() for r in report.per_k])


def plot_tables(report: ExperimentReport) -> Dict[str, str]:
    tables = {}
    if report.per_k and report.per_k[0].sup_err_E is not None:
        tables["theorem_1_1"] = _csv_text(("k", "sup_err_E"), [(r.k, r.sup_err_E) for r in report.per_k])
    if report.comparison:
        tables["gaussian_compare"] = _csv_text(
            ("k", "bergman_err", "gaussian_err"),
            [(r["k"], r["bergman_err"], r["gaussian_err"]) for r in report.comparison],
        )
    if report.polynomial:
        tables["polynomial_mode"] = _csv_text(("k", "sup_err_E"), [(r["k"], r["sup_err_E"]) for r in report.polynomial])
    return tables


def emit(report: ExperimentReport, cfg: ExperimentConfig, out_dir=".") -> List[Path]:
    """Write the per-k CSV, the JSON report and one plot-data CSV per scenario."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def write(path: Path, text: str):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(path)

    write(out / cfg.output["csv_path"], report_csv(report))
    write(out / cfg.output["json_path"], report.to_json())
    for name, text in plot_tables(report).items():
        write(out / f"plot_{name}.csv", text)
    return written
