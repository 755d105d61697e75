"""Scenario files: schema, validation, sweep grids and per-cell evaluation."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from jsonschema import Draft202012Validator

from .channel import BranchParams, FormatIIParams, format2_to_format1
from .contour import ContourSpec
from .errors import DomainError
from .hypergeo import SeriesControls
from .metrics import (CapacityFit, asymptotic_ser, capacity_fd, fit_error_bound, modulation_preset,
                      ser_fd)
from .montecarlo import SimConfig, estimate_capacity, estimate_outage, estimate_ser
from .sumstats import MrcChannel, asymptotic_cdf, sum_cdf, sum_pdf

__all__ = [
    "SCENARIO_SCHEMA",
    "Diagnostic",
    "Scenario",
    "load_document",
    "validate_document",
    "validate_scenario",
    "parse_scenario",
    "sweep_grid",
    "evaluate_cell",
    "metric_columns",
    "format_value",
    "render_csv",
    "channel_at",
    "db_to_linear",
]

METRICS = ("pdf", "cdf", "outage", "ser", "capacity")
SWEEP_VARIABLES = ("common-gbar-dB", "eta", "p", "mu", "snr-dB")
DEFAULT_SEED = 0
DEFAULT_REPLICAS = 100_000

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}

_BRANCH_I = {
    "type": "object",
    "properties": {
        "format": {"const": "I"},
        "mu": _positive, "eta": _positive, "p": _positive,
        "gbar": _positive, "gbar_db": _number,
    },
    "required": ["format", "mu", "eta", "p"],
    "additionalProperties": False,
}
_BRANCH_II = {
    "type": "object",
    "properties": {
        "format": {"const": "II"},
        "mu": _positive,
        "eta2": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
        "p2": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
        "gbar": _positive, "gbar_db": _number,
    },
    "required": ["format", "mu", "eta2", "p2"],
    "additionalProperties": False,
}
_AXIS = {
    "type": "object",
    "properties": {
        "variable": {"enum": list(SWEEP_VARIABLES)},
        "start": _number, "stop": _number,
        "points": {"type": "integer", "minimum": 2},
        "spacing": {"enum": ["linear", "log"]},
        "values": {"type": "array", "items": _number, "minItems": 2},
    },
    "required": ["variable"],
    "oneOf": [{"required": ["start", "stop", "points"]}, {"required": ["values"]}],
    "additionalProperties": False,
}

SCENARIO_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "MRC link scenario",
    "type": "object",
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "channel": {
            "type": "object",
            "properties": {
                "branches": {
                    "type": "array", "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {"format": {"enum": ["I", "II"]}},
                        "required": ["format"],
                        "if": {"properties": {"format": {"const": "II"}}},
                        "then": _BRANCH_II,
                        "else": _BRANCH_I,
                    },
                },
                "replicate": {"type": "integer", "minimum": 1},
            },
            "required": ["branches"],
            "additionalProperties": False,
        },
        "sweep": {"type": "array", "minItems": 1, "maxItems": 2, "items": _AXIS},
        "metrics": {"type": "array", "minItems": 1, "uniqueItems": True, "items": {"enum": list(METRICS)}},
        "options": {
            "type": "object",
            "properties": {
                "threshold_db": _number,
                "snr_db": _number,
                "modulation": {"type": "string"},
                "capacity_fit": {
                    "type": "object",
                    "properties": {
                        "deltas": {"type": "array", "items": _number, "minItems": 1},
                        "sigmas": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                    },
                    "required": ["deltas", "sigmas"],
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "sim": {
            "type": "object",
            "properties": {
                "enabled": {"type": "boolean"},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
                "replicas": {"type": "integer", "minimum": 1},
                "stream_count": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "controls": {
            "type": "object",
            "properties": {
                "contour": {
                    "type": "object",
                    "properties": {
                        "node_count": {"type": "integer", "minimum": 8},
                        "order": {"type": "integer", "minimum": 4},
                        "tolerance": _positive,
                    },
                    "additionalProperties": False,
                },
                "series": {
                    "type": "object",
                    "properties": {
                        "rel_tol": _positive,
                        "max_total_degree": {"type": "integer", "minimum": 1},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "output": {"type": "string", "minLength": 1},
    },
    "required": ["channel", "sweep", "metrics"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "notice"
    field: str
    message: str

    def __str__(self):
        return f"{self.level}: {self.field or '<root>'}: {self.message}"


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def load_document(path) -> Any:
    """Parse a YAML or JSON scenario file (JSON is a YAML subset)."""
    text = Path(path).read_text(encoding="utf-8")
    return yaml.safe_load(text)


def _field(err) -> str:
    return ".".join(str(p) for p in err.absolute_path)


def _schema_diagnostics(doc) -> List[Diagnostic]:
    v = Draft202012Validator(SCENARIO_SCHEMA)
    out = []
    for err in sorted(v.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        # report the most specific cause of a oneOf/if-then failure
        leaves = [e for e in err.context] if err.context else []
        if leaves:
            best = min(leaves, key=lambda e: len(list(e.schema_path)))
            msg = best.message
            path = _field(best) or _field(err)
        else:
            msg, path = err.message, _field(err)
        out.append(Diagnostic("error", path, msg))
    return out


def _semantic_diagnostics(doc: dict) -> List[Diagnostic]:
    out = []
    metrics = doc.get("metrics", [])
    sweep = doc.get("sweep", [])
    opts = doc.get("options", {}) or {}
    names = [a.get("variable") for a in sweep if isinstance(a, dict)]
    if len(set(names)) != len(names):
        out.append(Diagnostic("error", "sweep", "each sweep variable may appear once"))
    if "snr-dB" in names and any(m not in ("pdf", "cdf") for m in metrics):
        out.append(Diagnostic("error", "sweep", "an snr-dB axis only applies to pdf and cdf metrics"))
    for i, axis in enumerate(sweep):
        if not isinstance(axis, dict):
            continue
        if axis.get("spacing") == "log" and "start" in axis and not (axis["start"] > 0 and axis.get("stop", 0) > 0):
            out.append(Diagnostic("error", f"sweep.{i}", "log spacing needs positive start and stop"))
        if axis.get("variable") in ("eta", "p", "mu"):
            vals = axis.get("values", [axis.get("start", 1), axis.get("stop", 1)])
            if any(isinstance(v, (int, float)) and v <= 0 for v in vals):
                out.append(Diagnostic("error", f"sweep.{i}", f"{axis['variable']} values must be > 0"))
    branches = (doc.get("channel") or {}).get("branches", [])
    swept_gbar = "common-gbar-dB" in names
    for i, br in enumerate(branches):
        if isinstance(br, dict) and not swept_gbar and "gbar" not in br and "gbar_db" not in br:
            out.append(Diagnostic("error", f"channel.branches.{i}", "gbar or gbar_db is required unless common-gbar-dB is swept"))
        if isinstance(br, dict) and "gbar" in br and "gbar_db" in br:
            out.append(Diagnostic("error", f"channel.branches.{i}", "give gbar or gbar_db, not both"))
    if "ser" in metrics:
        if "modulation" not in opts:
            out.append(Diagnostic("notice", "options.modulation", "default-applied: BPSK"))
        else:
            try:
                modulation_preset(opts["modulation"])
            except DomainError as exc:
                out.append(Diagnostic("error", "options.modulation", str(exc)))
    if "outage" in metrics and "threshold_db" not in opts:
        out.append(Diagnostic("notice", "options.threshold_db", "default-applied: 0 dB"))
    if any(m in ("pdf", "cdf") for m in metrics) and "snr-dB" not in names and "snr_db" not in opts:
        out.append(Diagnostic("notice", "options.snr_db", "default-applied: 0 dB"))
    fit = opts.get("capacity_fit")
    if isinstance(fit, dict) and len(fit.get("deltas", [])) != len(fit.get("sigmas", [])):
        out.append(Diagnostic("error", "options.capacity_fit", "deltas and sigmas must have equal length"))
    sim = doc.get("sim")
    if isinstance(sim, dict) and sim.get("enabled", True):
        if "seed" not in sim:
            out.append(Diagnostic("notice", "sim.seed", f"default-applied: {DEFAULT_SEED}"))
        if "replicas" not in sim:
            out.append(Diagnostic("notice", "sim.replicas", f"default-applied: {DEFAULT_REPLICAS}"))
    return out


def validate_document(doc) -> List[Diagnostic]:
    """All schema and semantic violations of a parsed scenario, plus notices."""
    if not isinstance(doc, dict):
        return [Diagnostic("error", "", "scenario must be a mapping")]
    diags = _schema_diagnostics(doc)
    try:
        diags += _semantic_diagnostics(doc)
    except (TypeError, AttributeError, KeyError) as exc:
        # malformed structure already reported by the schema pass
        if not diags:
            diags.append(Diagnostic("error", "", f"malformed scenario: {exc}"))
    if not any(d.level == "error" for d in diags):
        # constructor checks the schema cannot express (contour/series controls etc.)
        try:
            parse_scenario(doc)
        except (DomainError, ValueError) as exc:
            diags.append(Diagnostic("error", "", str(exc)))
    return diags


def validate_scenario(path) -> List[Diagnostic]:
    try:
        doc = load_document(path)
    except OSError as exc:
        return [Diagnostic("error", "", f"cannot read scenario: {exc}")]
    except yaml.YAMLError as exc:
        return [Diagnostic("error", "", f"parse error: {exc}")]
    return validate_document(doc)


@dataclass(frozen=True)
class Axis:
    variable: str
    values: Tuple[float, ...]

    @property
    def column(self) -> str:
        return {"common-gbar-dB": "gbar_db", "snr-dB": "snr_db"}.get(self.variable, self.variable)


@dataclass(frozen=True)
class Scenario:
    name: str
    branches: Tuple[BranchParams, ...]
    axes: Tuple[Axis, ...]
    metrics: Tuple[str, ...]
    threshold: float
    snr: float
    modulation: str
    fit: CapacityFit
    sim: Optional[SimConfig]
    contour: ContourSpec
    series: SeriesControls
    output: str


def _axis(spec: dict) -> Axis:
    if "values" in spec:
        vals = [float(v) for v in spec["values"]]
    elif spec.get("spacing", "linear") == "log":
        vals = np.geomspace(spec["start"], spec["stop"], spec["points"]).tolist()
    else:
        vals = np.linspace(spec["start"], spec["stop"], spec["points"]).tolist()
    return Axis(spec["variable"], tuple(vals))


def _branch(spec: dict, default_gbar: float) -> BranchParams:
    if "gbar" in spec:
        gbar = float(spec["gbar"])
    elif "gbar_db" in spec:
        gbar = db_to_linear(float(spec["gbar_db"]))
    else:
        gbar = default_gbar
    if spec["format"] == "II":
        return format2_to_format1(FormatIIParams(spec["mu"], spec["eta2"], spec["p2"], gbar))
    return BranchParams(spec["mu"], spec["eta"], spec["p"], gbar)


def parse_scenario(doc: dict, default_name: str = "scenario") -> Scenario:
    """Build a :class:`Scenario` from a document that passed validation."""
    ch = doc["channel"]
    branches = tuple(_branch(b, 1.0) for b in ch["branches"]) * int(ch.get("replicate", 1))
    opts = doc.get("options", {}) or {}
    sim = doc.get("sim")
    cfg = None
    if isinstance(sim, dict) and sim.get("enabled", True):
        cfg = SimConfig(int(sim.get("seed", DEFAULT_SEED)), int(sim.get("replicas", DEFAULT_REPLICAS)),
                        int(sim.get("stream_count", 1)))
    ctl = doc.get("controls", {}) or {}
    c = ctl.get("contour", {}) or {}
    s = ctl.get("series", {}) or {}
    fit = opts.get("capacity_fit")
    return Scenario(
        name=doc.get("name", default_name),
        branches=branches,
        axes=tuple(_axis(a) for a in doc["sweep"]),
        metrics=tuple(doc["metrics"]),
        threshold=db_to_linear(float(opts.get("threshold_db", 0.0))),
        snr=db_to_linear(float(opts.get("snr_db", 0.0))),
        modulation=opts.get("modulation", "BPSK"),
        fit=CapacityFit(tuple(fit["deltas"]), tuple(fit["sigmas"])) if fit else CapacityFit(),
        sim=cfg,
        contour=ContourSpec(node_count=int(c.get("node_count", 64)), order=int(c.get("order", 32)),
                            tolerance=float(c.get("tolerance", 1e-10))),
        series=SeriesControls(rel_tol=float(s.get("rel_tol", 1e-15)),
                              max_total_degree=int(s.get("max_total_degree", 20000))),
        output=doc.get("output", "."),
    )


def sweep_grid(scn: Scenario) -> List[Tuple[float, ...]]:
    """Grid points in row-major order (last axis fastest)."""
    return list(itertools.product(*(a.values for a in scn.axes)))


def channel_at(scn: Scenario, point: Sequence[float]) -> Tuple[MrcChannel, float]:
    """Channel and evaluation SNR at one grid point."""
    branches = list(scn.branches)
    snr = scn.snr
    for axis, v in zip(scn.axes, point):
        if axis.variable == "common-gbar-dB":
            branches = [b.with_gbar(db_to_linear(v)) for b in branches]
        elif axis.variable == "snr-dB":
            snr = db_to_linear(v)
        else:
            branches = [replace(b, **{axis.variable: v}) for b in branches]
    return MrcChannel(tuple(branches)), snr


def metric_columns(scn: Scenario, metric: str) -> List[str]:
    cols = [a.column for a in scn.axes] + ["analytic"]
    if metric != "capacity":
        cols.append("asymptotic")
    if scn.sim is not None and metric != "pdf":
        cols += ["mc", "mc_halfwidth"]
    if metric == "capacity":
        cols.append("eps_fit")
    return cols


def format_value(v: float) -> str:
    return "%.12g" % v


def _na(exc: Exception) -> str:
    return f"NA({type(exc).__name__})"


def _cell(fn) -> str:
    try:
        return format_value(fn())
    except (ArithmeticError, DomainError, ValueError) as exc:
        return _na(exc)


def _asymptotic_pdf(ch: MrcChannel, snr: float) -> float:
    total = ch.total_mu
    return math.exp(ch.log_prefactor + (total - 1.0) * math.log(snr) - math.lgamma(total))


def evaluate_cell(scn: Scenario, metric: str, point: Sequence[float]) -> List[str]:
    """One CSV row (already formatted) for ``metric`` at grid ``point``."""
    row = [format_value(v) for v in point]
    try:
        ch, snr = channel_at(scn, point)
    except DomainError as exc:
        return row + [_na(exc)] * (len(metric_columns(scn, metric)) - len(row))
    kw = dict(contour=scn.contour, ctl=scn.series)
    mc = None
    if metric == "pdf":
        row += [_cell(lambda: sum_pdf(ch, snr, **kw)), _cell(lambda: _asymptotic_pdf(ch, snr))]
    elif metric in ("cdf", "outage"):
        x = snr if metric == "cdf" else scn.threshold
        row += [_cell(lambda: sum_cdf(ch, x, **kw)), _cell(lambda: asymptotic_cdf(ch, x))]
        mc = lambda: estimate_outage(ch, x, scn.sim)  # noqa: E731
    elif metric == "ser":
        mod = modulation_preset(scn.modulation)
        row += [_cell(lambda: ser_fd(ch, mod)), _cell(lambda: asymptotic_ser(ch, mod))]
        mc = lambda: estimate_ser(ch, mod, scn.sim)  # noqa: E731
    elif metric == "capacity":
        row.append(_cell(lambda: capacity_fd(ch, scn.fit)))
        mc = lambda: estimate_capacity(ch, scn.sim, exact_log=False, fit=scn.fit)  # noqa: E731
    else:
        raise DomainError(f"unknown metric {metric!r}")
    if scn.sim is not None and mc is not None:
        try:
            est, hw = mc()
            row += [format_value(est), format_value(hw)]
        except (ArithmeticError, DomainError, ValueError) as exc:
            row += [_na(exc)] * 2
    if metric == "capacity":
        row.append(format_value(_eps_fit(scn.fit)))
    return row


_EPS_CACHE: Dict[CapacityFit, float] = {}


def _eps_fit(fit: CapacityFit) -> float:
    if fit not in _EPS_CACHE:
        _EPS_CACHE[fit] = fit_error_bound(fit)
    return _EPS_CACHE[fit]


def render_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
