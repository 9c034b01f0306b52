"""Config parsing, command dispatch, and report/plot serialization.

One JSON document drives every mode, so a run is reproducible from its
report: the report embeds the resolved configuration, thresholds, seed and
package version.  Modes:

* ``analyze``  -- stability verdict for a (sequence-level) expression
* ``fsm``      -- finite section applicability for a concrete operator
* ``simulate`` -- condition sweeps and truncated solves, CSV tables
* ``spectrum`` -- eigenvalue cloud of the discretized operator, CSV + SVG

Exit codes: 0 when a verdict or table was produced (an "unstable" verdict
is still exit 0), 1 when the analysis ends inconclusive, 2 on input errors.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .analyzer import AnalyzerConfig, StabilityReport, analyze_stability, fsm_check
from .expr import Conv, Ident, Mult, OperatorExpr, Prod, ProjSeq, Scale, Sum
from .geometry import ArcCurve, arc_points, lens_boundary
from .numerics import (
    Grid,
    cond_sweep,
    discretize,
    empirical_spectrum,
    instantiate,
    solve_fsm,
)
from .symbols import (
    CircleCluster,
    FiniteCluster,
    PCSOSymbol,
    PointCluster,
    SampledCluster,
    SOGenerator,
    StepFunction,
    chi_minus,
    chi_plus,
    so_sqrt_log,
    so_phase,
    so_with_limit,
)

__all__ = ["Config", "ConfigError", "ReportDocument", "parse_config", "run",
           "emit_plot_data", "main"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


_NUMBER = {"type": "number"}
_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"},
         "minItems": 2, "maxItems": 2},
    ]
}
_STEP = {
    "type": "object",
    "additionalProperties": False,
    "required": ["values"],
    "properties": {
        "breakpoints": {"type": "array", "items": _NUMBER},
        "values": {"type": "array", "items": _COMPLEX, "minItems": 1},
    },
}
_CLUSTER = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["point", "circle", "finite", "sampled"]},
        "value": _COMPLEX,
        "center": _COMPLEX,
        "radius": _NUMBER,
        "points": {"type": "array", "items": _COMPLEX},
        "tau0": _NUMBER,
        "rho": _NUMBER,
        "count": {"type": "integer", "minimum": 1},
    },
}
_GENERATOR = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["sqrt_log", "constant", "limit", "phase"]},
        "k": {"type": "integer", "minimum": 1},
        "value": _COMPLEX,
        "expr": {"type": "string"},
        "limit": _COMPLEX,
        "even": {"type": "boolean"},
        "psi": {"type": "string"},
        "cluster": _CLUSTER,
    },
}
_TERM = {
    "type": "object",
    "additionalProperties": False,
    "required": ["step"],
    "properties": {
        "step": _STEP,
        "so": {"type": "array", "items": {"type": "string"}},
    },
}
_SYMBOL = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "step": _STEP,
        "terms": {"type": "array", "items": _TERM, "minItems": 1},
    },
}
_EXPR = {
    "type": "object",
    "additionalProperties": False,
    "required": ["op"],
    "properties": {
        "op": {"enum": ["mult", "conv", "projseq", "sum", "prod", "scale", "ident"]},
        "symbol": {"type": "string"},
        "factor": _COMPLEX,
        "child": {"$ref": "#/$defs/expr"},
        "children": {"type": "array", "items": {"$ref": "#/$defs/expr"},
                     "minItems": 1},
    },
}

CONFIG_SCHEMA = {
    "$defs": {"expr": _EXPR},
    "type": "object",
    "additionalProperties": False,
    "required": ["p", "mode", "expression"],
    "properties": {
        "p": {"type": "number", "exclusiveMinimum": 1},
        "mode": {"enum": ["analyze", "fsm", "simulate", "spectrum"]},
        "expression": {"$ref": "#/$defs/expr"},
        "generators": {"type": "object",
                       "additionalProperties": _GENERATOR},
        "symbols": {"type": "object", "additionalProperties": _SYMBOL},
        "fiber": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "strategy": {"enum": ["product", "trajectory"]},
                "resolution": {"type": "integer", "minimum": 1},
                "tau0": _NUMBER,
                "rho": _NUMBER,
            },
        },
        "tau_list": {"type": "array", "items": {"type": "number",
                                                "exclusiveMinimum": 0},
                     "minItems": 1},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 8},
                "padding": {"type": "integer", "minimum": 2},
                "tau_factor": {"type": "number", "exclusiveMinimum": 1},
                "tau": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "membership": _NUMBER,
                "min_modulus": _NUMBER,
                "det": _NUMBER,
            },
        },
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "cond_ratio": _NUMBER,
                "sigma_decay": _NUMBER,
                "spectrum_distance": _NUMBER,
            },
        },
        "eta_grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "per_unit": {"type": "integer", "minimum": 8},
                "tail_doublings": {"type": "integer", "minimum": 0},
            },
        },
        "rhs": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["gaussian"]},
                "width": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "seed": {"type": "integer"},
        "threads": {"type": "integer", "minimum": 0},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "report": {"type": "string"},
                "sweep": {"type": "string"},
                "convergence": {"type": "string"},
                "spectrum": {"type": "string"},
                "lens": {"type": "string"},
            },
        },
    },
}

_DEFAULTS = {
    "generators": {},
    "symbols": {},
    "fiber": {"strategy": "product", "resolution": 16, "tau0": 2.0, "rho": 1.5},
    "tau_list": [10.0, 20.0, 40.0, 80.0],
    "grid": {"n": 512, "padding": 4, "tau_factor": 2.0},
    "tolerances": {"membership": 1e-9, "min_modulus": 1e-9, "det": 1e-9},
    "thresholds": {"cond_ratio": 3.0, "sigma_decay": 10.0,
                   "spectrum_distance": 0.15},
    "eta_grid": {"per_unit": 512, "tail_doublings": 12},
    "rhs": None,
    "seed": 0,
    "threads": 0,
    "output": {},
}

_SAFE_CALLS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "atan": math.atan,
    "tanh": math.tanh, "exp": math.exp, "log": math.log, "log1p": math.log1p,
    "sqrt": math.sqrt, "abs": abs,
}
_SAFE_NAMES = {"pi": math.pi, "e": math.e}


def _compile_expr(text: str):
    """Compile a one-variable arithmetic expression string safely."""
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _SAFE_CALLS):
                raise ConfigError(f"disallowed call in expression: {text!r}")
        elif isinstance(node, ast.Name):
            if node.id not in _SAFE_CALLS and node.id not in _SAFE_NAMES \
                    and node.id != "t":
                raise ConfigError(f"unknown name {node.id!r} in expression {text!r}")
        elif not isinstance(node, (ast.Expression, ast.BinOp, ast.UnaryOp,
                                   ast.Constant, ast.operator, ast.unaryop,
                                   ast.Load)):
            raise ConfigError(f"disallowed syntax in expression: {text!r}")
    code = compile(tree, "<config>", "eval")
    env = {**_SAFE_CALLS, **_SAFE_NAMES}

    def fn(t: float) -> float:
        return eval(code, {"__builtins__": {}}, {**env, "t": float(t)})

    return fn


def _as_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def _build_step(node: dict) -> StepFunction:
    bp = tuple(node.get("breakpoints", ()))
    vals = tuple(_as_complex(v) for v in node["values"])
    try:
        return StepFunction(bp, vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_cluster(node: dict):
    kind = node["kind"]
    if kind == "point":
        return PointCluster(_as_complex(node.get("value", 0.0)))
    if kind == "circle":
        return CircleCluster(_as_complex(node.get("center", 0.0)),
                             float(node.get("radius", 1.0)))
    if kind == "finite":
        return FiniteCluster(tuple(_as_complex(v) for v in node.get("points", [])))
    return SampledCluster(float(node.get("tau0", 2.0)),
                          float(node.get("rho", 1.5)),
                          int(node.get("count", 64)))


def _build_generator(name: str, node: dict) -> SOGenerator:
    kind = node["kind"]
    if kind == "sqrt_log":
        gen = so_sqrt_log(int(node.get("k", 1)))
        return SOGenerator(name, gen.evaluator, gen.cluster, even=True)
    if kind == "constant":
        c = _as_complex(node.get("value", 1.0))
        return SOGenerator(name, lambda t, c=c: c, PointCluster(c), even=True)
    if kind == "limit":
        fn = _compile_expr(node["expr"])
        return so_with_limit(name, lambda t, fn=fn: complex(fn(t)),
                             _as_complex(node.get("limit", 0.0)),
                             even=bool(node.get("even", False)))
    psi = _compile_expr(node["psi"])
    cluster = _build_cluster(node["cluster"]) if "cluster" in node else None
    return so_phase(name, psi, cluster, even=bool(node.get("even", False)))


def _build_symbol(node: dict, gens: dict[str, SOGenerator]) -> PCSOSymbol:
    if "step" in node and "terms" not in node:
        return PCSOSymbol.from_step(_build_step(node["step"]))
    if "terms" not in node:
        raise ConfigError("symbol needs either 'step' or 'terms'")
    terms = []
    for term in node["terms"]:
        ids = tuple(term.get("so", ()))
        for gid in ids:
            if gid not in gens:
                raise ConfigError(f"symbol references undefined generator {gid!r}")
        terms.append((_build_step(term["step"]), ids))
    used = {gid: gens[gid] for _, ids in terms for gid in ids}
    return PCSOSymbol(tuple(terms), used)


_BUILTIN_STEPS = {"chi_plus": chi_plus, "chi_minus": chi_minus,
                  "one": StepFunction((), (1.0,))}


def _build_expr(node: dict, symbols: dict[str, PCSOSymbol]) -> OperatorExpr:
    op = node["op"]
    if op == "ident":
        return Ident()
    if op == "projseq":
        return ProjSeq()
    if op == "mult":
        name = node.get("symbol")
        if name is None:
            raise ConfigError("mult node needs a 'symbol' name")
        if name in _BUILTIN_STEPS:
            return Mult(_BUILTIN_STEPS[name])
        if name not in symbols:
            raise ConfigError(f"expression references undefined symbol {name!r}")
        sym = symbols[name]
        if not sym.is_pure_step():
            raise ConfigError(
                f"mult coefficient {name!r} must be piecewise constant"
            )
        return Mult(sym.as_step())
    if op == "conv":
        name = node.get("symbol")
        if name is None:
            raise ConfigError("conv node needs a 'symbol' name")
        if name in _BUILTIN_STEPS:
            return Conv(PCSOSymbol.from_step(_BUILTIN_STEPS[name]))
        if name not in symbols:
            raise ConfigError(f"expression references undefined symbol {name!r}")
        return Conv(symbols[name])
    if op == "scale":
        if "child" not in node:
            raise ConfigError("scale node needs a 'child'")
        return Scale(_as_complex(node.get("factor", 1.0)),
                     _build_expr(node["child"], symbols))
    children = tuple(_build_expr(c, symbols) for c in node.get("children", ()))
    if not children:
        raise ConfigError(f"{op} node needs 'children'")
    return Sum(children) if op == "sum" else Prod(children)


@dataclass(frozen=True)
class Config:
    """Validated configuration with defaults applied."""

    raw: dict
    p: float
    mode: str
    expression: OperatorExpr
    symbols: dict[str, PCSOSymbol]
    generators: dict[str, SOGenerator]
    fiber: dict
    tau_list: list[float]
    grid: dict
    tolerances: dict
    thresholds: dict
    eta_grid: dict
    rhs: dict | None
    seed: int
    threads: int
    output: dict

    def analyzer_config(self) -> AnalyzerConfig:
        return AnalyzerConfig(
            membership_tol=self.tolerances["membership"],
            min_modulus_tol=self.tolerances["min_modulus"],
            det_tol=self.tolerances["det"],
            eta_per_unit=self.eta_grid["per_unit"],
            eta_tail_doublings=self.eta_grid["tail_doublings"],
            fiber_strategy=self.fiber["strategy"],
            fiber_resolution=self.fiber["resolution"],
            fiber_tau0=self.fiber["tau0"],
            fiber_rho=self.fiber["rho"],
            sigma_decay=self.thresholds["sigma_decay"],
            cond_ratio=self.thresholds["cond_ratio"],
            seed=self.seed,
            threads=self.threads,
        )


def parse_config(text: str) -> Config:
    """Parse and validate a JSON configuration document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema error at {exc.json_path}: "
                          f"{exc.message}") from exc

    merged = {}
    for key, default in _DEFAULTS.items():
        if isinstance(default, dict) and key in raw:
            merged[key] = {**default, **raw[key]}
        else:
            merged[key] = raw.get(key, default)

    gens = {name: _build_generator(name, node)
            for name, node in merged["generators"].items()}
    symbols = {name: _build_symbol(node, gens)
               for name, node in raw.get("symbols", {}).items()}
    expression = _build_expr(raw["expression"], symbols)
    return Config(
        raw=raw,
        p=float(raw["p"]),
        mode=raw["mode"],
        expression=expression,
        symbols=symbols,
        generators=gens,
        fiber=merged["fiber"],
        tau_list=[float(t) for t in merged["tau_list"]],
        grid=merged["grid"],
        tolerances=merged["tolerances"],
        thresholds=merged["thresholds"],
        eta_grid=merged["eta_grid"],
        rhs=merged["rhs"],
        seed=int(merged["seed"]),
        threads=int(merged["threads"]),
        output=merged["output"],
    )


# ---------------------------------------------------------------------------
# report document
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReportDocument:
    """Everything a run produced, serializable losslessly to JSON."""

    mode: str
    environment: dict
    verdicts: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "environment": self.environment,
            "verdicts": self.verdicts,
            "records": self.records,
            "tables": self.tables,
            "notes": self.notes,
        }

    @staticmethod
    def from_dict(d: dict) -> "ReportDocument":
        return ReportDocument(
            mode=d["mode"],
            environment=d["environment"],
            verdicts=d["verdicts"],
            records=d["records"],
            tables=d["tables"],
            notes=d["notes"],
        )


def _environment(config: Config) -> dict:
    return {
        "version": __version__,
        "seed": config.seed,
        "threads": config.threads,
        "thresholds": config.thresholds,
        "tolerances": config.tolerances,
        "resolved": {
            "p": config.p,
            "fiber": config.fiber,
            "tau_list": config.tau_list,
            "grid": config.grid,
            "eta_grid": config.eta_grid,
        },
        "config": config.raw,
    }


# ---------------------------------------------------------------------------
# plot and table emission
# ---------------------------------------------------------------------------

def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _curve_rows(curve: ArcCurve, samples: int = 256):
    rows = []
    mus = np.linspace(0.0, 1.0, samples)
    for k, arc in enumerate(curve.arcs):
        pts = arc_points(arc, mus)
        rows += [[k, float(m), float(z.real), float(z.imag)]
                 for m, z in zip(mus, pts)]
    return rows


def emit_plot_data(kind: str, payload: dict, path: str | Path) -> Path:
    """Write plot data as CSV; spectrum and curve kinds also get an SVG.

    kinds: "lens" (boundary polyline of the region for payload["p"]),
    "curve" (payload["curve"]: ArcCurve), "spectrum" (payload["eigs"],
    payload["p"]), "sweep" (payload["rows"]), "convergence"
    (payload["rows"]).
    """
    path = Path(path)
    if kind == "lens":
        rows = _curve_rows(lens_boundary(payload["p"]))
        _write_csv(path, ["curve_id", "mu", "re", "im"], rows)
        return path
    if kind == "curve":
        curve = payload["curve"]
        rows = _curve_rows(curve)
        _write_csv(path, ["curve_id", "mu", "re", "im"], rows)
        _svg_curve(curve, path.with_suffix(".svg"))
        return path
    if kind == "spectrum":
        eigs = np.asarray(payload["eigs"])
        _write_csv(path, ["re", "im"],
                   [[float(z.real), float(z.imag)] for z in eigs])
        _svg_spectrum(eigs, payload["p"], path.with_suffix(".svg"))
        return path
    if kind == "sweep":
        _write_csv(path, ["tau", "n", "sigma_min", "cond2", "condp"],
                   payload["rows"])
        return path
    if kind == "convergence":
        _write_csv(path, ["tau", "diff_norm", "residual"], payload["rows"])
        return path
    raise ValueError(f"unknown plot kind {kind!r}")


def _svg_curve(curve: ArcCurve, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 5))
    mus = np.linspace(0.0, 1.0, 256)
    for arc in curve.arcs:
        pts = arc_points(arc, mus)
        ax.plot(pts.real, pts.imag, "-", lw=1.2)
    ax.plot([0], [0], "r+", markersize=10)
    ax.set_aspect("equal")
    ax.grid(alpha=0.3)
    fig.savefig(path, format="svg")
    plt.close(fig)


def _svg_spectrum(eigs: np.ndarray, p: float, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(eigs.real, eigs.imag, ".", ms=3, alpha=0.6, label="eigenvalues")
    mus = np.linspace(0.0, 1.0, 256)
    for arc in lens_boundary(p).arcs:
        pts = arc_points(arc, mus)
        ax.plot(pts.real, pts.imag, "k-", lw=1.0)
    ax.plot([0], [0], "r+", markersize=8)
    ax.set_aspect("equal")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.savefig(path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _report_verdict(report: StabilityReport, config: Config,
                    mode: str) -> ReportDocument:
    verdicts = {"verdict": report.verdict, "certified": report.certified,
                "worst_margin": report.worst_margin,
                "fiber_strategy": report.fiber_strategy,
                "fiber_attainable": report.fiber_attainable}
    if mode == "fsm":
        applies = {"stable": "applies", "unstable": "does not apply",
                   "inconclusive": "inconclusive"}[report.verdict]
        verdicts["finite_section_method"] = applies
    return ReportDocument(
        mode=mode,
        environment=_environment(config),
        verdicts=verdicts,
        records=[r.to_dict() for r in report.records],
        notes=list(report.notes),
    )


def run(config: Config, out_dir: str | Path = ".") -> int:
    """Execute the configured mode; returns the process exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    acfg = config.analyzer_config()
    mode = config.mode

    if mode in ("analyze", "fsm"):
        if mode == "analyze":
            report = analyze_stability(config.expression, config.p, acfg)
        else:
            try:
                report = fsm_check(config.expression, config.p, acfg)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
        doc = _report_verdict(report, config, mode)
        _write_report(doc, out / config.output.get("report", "report.json"))
        _print_summary(doc)
        return 1 if report.verdict == "inconclusive" else 0

    if mode == "simulate":
        sweep = cond_sweep(config.expression, config.tau_list, config.p,
                           n=config.grid["n"], tau_factor=config.grid["tau_factor"],
                           padding=config.grid["padding"], seed=config.seed,
                           threads=config.threads)
        tables = {"sweep": sweep.to_rows()}
        emit_plot_data("sweep", {"rows": sweep.to_rows()},
                       out / config.output.get("sweep", "sweep.csv"))
        notes = []
        if any(r.get("singular") for r in sweep.rows):
            notes.append("singular truncation encountered; records flagged")
        if config.rhs is not None:
            rhsfun = _rhs_function(config.rhs)
            conv = solve_fsm(config.expression, rhsfun, config.tau_list,
                             config.p, n=config.grid["n"],
                             tau_factor=config.grid["tau_factor"],
                             padding=config.grid["padding"])
            rows = [[r["tau"], r["diff_norm"], r["residual"]] for r in conv]
            tables["convergence"] = rows
            emit_plot_data("convergence", {"rows": rows},
                           out / config.output.get("convergence", "convergence.csv"))
            if any(r.get("singular") for r in conv):
                notes.append("singular solve encountered; records flagged")
        doc = ReportDocument(mode=mode, environment=_environment(config),
                             verdicts={"cond_variation": sweep.cond_variation,
                                       "sigma_min_decay": sweep.sigma_min_decay},
                             tables=tables, notes=notes)
        _write_report(doc, out / config.output.get("report", "report.json"))
        _print_summary(doc)
        return 0

    # spectrum
    tau = config.grid.get("tau") or config.grid["tau_factor"] * max(config.tau_list)
    grid = Grid(tau=float(tau), n=config.grid["n"], padding=config.grid["padding"])
    op = discretize(instantiate(config.expression, grid.tau / 2.0), grid)
    eigs = empirical_spectrum(op)
    emit_plot_data("spectrum", {"eigs": eigs, "p": config.p},
                   out / config.output.get("spectrum", "spectrum.csv"))
    emit_plot_data("lens", {"p": config.p},
                   out / config.output.get("lens", "lens.csv"))
    doc = ReportDocument(mode=mode, environment=_environment(config),
                         verdicts={"eigenvalues": len(eigs)},
                         tables={"spectrum": [[float(z.real), float(z.imag)]
                                              for z in eigs]})
    _write_report(doc, out / config.output.get("report", "report.json"))
    _print_summary(doc)
    return 0


def _rhs_function(node: dict):
    width = float(node.get("width", 8.0))
    return lambda x: np.exp(-(np.asarray(x) / width) ** 2 / 2.0)


def _write_report(doc: ReportDocument, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc.to_dict(), indent=2, allow_nan=True),
                    encoding="utf-8")


def _print_summary(doc: ReportDocument) -> None:
    print(f"finsec {doc.mode}: ", end="")
    if "verdict" in doc.verdicts:
        v = doc.verdicts
        extra = v.get("finite_section_method")
        tail = f" ({extra})" if extra else ""
        cert = "certified" if v.get("certified") else "numeric support"
        print(f"verdict={v['verdict']}{tail} [{cert}], "
              f"worst margin {v['worst_margin']:.3e}")
        for rec in doc.records:
            mark = "ok " if rec["status"] == "pass" else "FAIL"
            print(f"  [{mark}] ({rec['condition']}) {rec['label']} "
                  f"margin={rec['margin']:.3e} ({rec['method']})")
    else:
        for key, val in doc.verdicts.items():
            print(f"{key}={val}", end="  ")
        print()
    for note in doc.notes:
        print(f"  note: {note}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="finsec",
        description="Finite section stability analysis for convolution "
                    "type operators.",
    )
    parser.add_argument("mode", choices=["analyze", "fsm", "simulate", "spectrum"])
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: FINSEC_THREADS or 0)")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized estimators")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("FINSEC_THREADS", "0") or 0)
    updates = dict(config.__dict__)
    updates["mode"] = args.mode
    updates["threads"] = threads
    if args.seed is not None:
        updates["seed"] = args.seed
    config = Config(**updates)

    try:
        return run(config, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
