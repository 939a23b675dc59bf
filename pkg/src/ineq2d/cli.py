"""Command-line front end: check, scan, sharpness, and integrate jobs.

Reports carry the tool version and the fully resolved job parameters so runs
are reproducible; floats are serialized with 17 significant digits and JSON
keys are sorted, making reports byte-identical across worker counts (modulo
the timestamp field).

Exit codes: 0 clean; 1 input error; 2 a VIOLATED row with satisfied
hypotheses (or inconclusive quadrature) exists; 3 only hypothesis failures
and --strict-exit was given.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Any

from . import __version__
from .bounds import InequalityId, Status
from .expr import EvalPoint, ParseError, parse
from .quad import QuadConfig, RectDomain, integrate, ordered_map
from .sharpness import (
    ExtremalSpec,
    ScanResult,
    achieved_ratio,
    build_extremal,
    compliant_family,
    compliant_family_1d,
    constant_scan,
    run_bound,
)

_COMMANDS = ("check", "scan", "sharpness", "integrate")
_PAIR_INEQS = (
    InequalityId.CHEBYSHEV_L2,
    InequalityId.CHEBYSHEV_L2_AREA_VARIANT,
    InequalityId.CHEBYSHEV_MIXED,
    InequalityId.LUPAS_1D,
)
_1D_INEQS = (InequalityId.DIAZ_METCALF_1D, InequalityId.LUPAS_1D)

CSV_COLUMNS = ("ineq", "variant", "a", "b", "c", "d", "fid", "gid",
               "lhs", "rhs", "ratio", "eps", "status")


class ConfigError(ValueError):
    """Config or flag validation error, message prefixed with the field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class JobSpec:
    command: str
    ineq: str | None = None
    variant: str | None = None
    f_source: str | None = None
    g_source: str | None = None
    domain: tuple[float, float, float, float] | None = None
    domains: tuple[tuple[float, float, float, float], ...] | None = None
    anchor: tuple[float, float] | None = None
    point: tuple[float, float] | None = None
    side: str = "left"
    hypothesis: str = "weak"
    gl_points: int = 20
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_panels: int = 4096
    initial_splits: int = 1
    family: tuple[str, ...] | None = None


_FIELD_BY_KEY = {
    "command": "command",
    "inequality-id": "ineq",
    "variant": "variant",
    "f-source": "f_source",
    "g-source": "g_source",
    "domain": "domain",
    "domains": "domains",
    "anchor": "anchor",
    "point": "point",
    "side": "side",
    "hypothesis": "hypothesis",
    "gl-points": "gl_points",
    "abs-tol": "abs_tol",
    "rel-tol": "rel_tol",
    "max-panels": "max_panels",
    "initial-splits": "initial_splits",
    "family": "family",
}
_KEY_BY_FIELD = {v: k for k, v in _FIELD_BY_KEY.items()}


def _resolved_dict(job: JobSpec) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(JobSpec):
        out[_KEY_BY_FIELD[f.name]] = getattr(job, f.name)
    return out


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _as_numbers(value: Any, count: int, path: str) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = value.split(",")
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise ConfigError(path, f"expected {count} numbers")
    if len(parts) != count:
        raise ConfigError(path, f"expected {count} numbers, got {len(parts)}")
    try:
        return tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected {count} numbers") from None


def _as_point(value: Any, path: str) -> tuple[float, float]:
    if isinstance(value, str):
        parts = value.split(",")
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise ConfigError(path, "expected 1 or 2 numbers")
    if len(parts) not in (1, 2):
        raise ConfigError(path, "expected 1 or 2 numbers")
    try:
        nums = [float(p) for p in parts]
    except (TypeError, ValueError):
        raise ConfigError(path, "expected numbers") from None
    return (nums[0], nums[1] if len(nums) == 2 else 0.0)


def _inequality(name: str, path: str) -> InequalityId:
    for ineq in InequalityId:
        if ineq.value == name:
            return ineq
    known = ", ".join(i.value for i in InequalityId)
    raise ConfigError(path, f"unknown inequality {name!r} (known: {known})")


def build_job(data: dict[str, Any], path: str = "job") -> JobSpec:
    """Validate a kebab-case mapping and produce a JobSpec."""
    if not isinstance(data, dict):
        raise ConfigError(path, "expected an object")
    for key in data:
        if key not in _FIELD_BY_KEY:
            raise ConfigError(f"{path}.{key}", "unknown field")
    command = data.get("command")
    if command not in _COMMANDS:
        raise ConfigError(f"{path}.command", f"expected one of {_COMMANDS}, got {command!r}")
    job = JobSpec(command=command)

    if "inequality-id" in data:
        job.ineq = _inequality(str(data["inequality-id"]), f"{path}.inequality-id").value
    for key, attr in (("variant", "variant"), ("f-source", "f_source"), ("g-source", "g_source")):
        if key in data:
            if not isinstance(data[key], str):
                raise ConfigError(f"{path}.{key}", "expected a string")
            setattr(job, attr, data[key])
    if "domain" in data:
        job.domain = _as_numbers(data["domain"], 4, f"{path}.domain")
    if "domains" in data:
        if not isinstance(data["domains"], (list, tuple)) or not data["domains"]:
            raise ConfigError(f"{path}.domains", "expected a nonempty list of domains")
        job.domains = tuple(
            _as_numbers(d, 4, f"{path}.domains[{i}]") for i, d in enumerate(data["domains"])
        )
    for key, attr in (("anchor", "anchor"), ("point", "point")):
        if key in data:
            setattr(job, attr, _as_point(data[key], f"{path}.{key}"))
    if "side" in data:
        if data["side"] not in ("left", "right"):
            raise ConfigError(f"{path}.side", "expected 'left' or 'right'")
        job.side = data["side"]
    if "hypothesis" in data:
        if data["hypothesis"] not in ("weak", "strict"):
            raise ConfigError(f"{path}.hypothesis", "expected 'weak' or 'strict'")
        job.hypothesis = data["hypothesis"]
    for key, attr in (("gl-points", "gl_points"), ("max-panels", "max_panels"),
                      ("initial-splits", "initial_splits")):
        if key in data:
            if not isinstance(data[key], int) or isinstance(data[key], bool):
                raise ConfigError(f"{path}.{key}", "expected an integer")
            setattr(job, attr, data[key])
    for key, attr in (("abs-tol", "abs_tol"), ("rel-tol", "rel_tol")):
        if key in data:
            if not isinstance(data[key], (int, float)) or isinstance(data[key], bool):
                raise ConfigError(f"{path}.{key}", "expected a number")
            setattr(job, attr, float(data[key]))
    if "family" in data:
        fam = data["family"]
        if not isinstance(fam, (list, tuple)) or not all(isinstance(s, str) for s in fam):
            raise ConfigError(f"{path}.family", "expected a list of expression strings")
        job.family = tuple(fam)

    _check_required(job, path)
    return job


def _check_required(job: JobSpec, path: str) -> None:
    def need(cond: bool, key: str, msg: str) -> None:
        if not cond:
            raise ConfigError(f"{path}.{key}", msg)

    if job.command == "integrate":
        need(job.f_source is not None, "f-source", "required for integrate")
        need(job.domain is not None, "domain", "required for integrate")
        return
    need(job.ineq is not None, "inequality-id", f"required for {job.command}")
    ineq = InequalityId(job.ineq)
    if job.command in ("check",):
        need(job.f_source is not None, "f-source", "required for check")
        need(job.domain is not None, "domain", "required for check")
        if ineq in _PAIR_INEQS:
            need(job.g_source is not None, "g-source", f"required for {ineq.value}")
        if ineq == InequalityId.POINTWISE_2D:
            need(job.anchor is not None, "anchor", "required for pointwise2d")
    if job.command == "scan":
        need(job.domain is not None or job.domains is not None, "domain", "required for scan")
    if job.command == "sharpness":
        need(job.domain is not None, "domain", "required for sharpness")
        if ineq == InequalityId.POINTWISE_2D:
            need(job.anchor is not None, "anchor", "required for pointwise2d")
    if job.variant is not None:
        if ineq in (InequalityId.CHEBYSHEV_L2, InequalityId.CHEBYSHEV_L2_AREA_VARIANT):
            need(job.variant in ("as-stated", "area-variant"), "variant",
                 "expected 'as-stated' or 'area-variant'")
        elif ineq == InequalityId.WIRTINGER_2D:
            need(job.variant in ("left", "right"), "variant", "expected 'left' or 'right'")


def load_config(path: str) -> list[JobSpec]:
    """Load a batch config: JSON object with a top-level "jobs" array."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(path, f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or "jobs" not in data:
        raise ConfigError("jobs", "top-level object must contain a 'jobs' array")
    if not isinstance(data["jobs"], list) or not data["jobs"]:
        raise ConfigError("jobs", "expected a nonempty array")
    return [build_job(j, f"jobs[{i}]") for i, j in enumerate(data["jobs"])]


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def _quad_config(job: JobSpec) -> QuadConfig:
    return QuadConfig(
        points=job.gl_points,
        abs_tol=job.abs_tol,
        rel_tol=job.rel_tol,
        max_panels=job.max_panels,
        initial_splits=job.initial_splits,
    )


def _domain(job: JobSpec) -> RectDomain:
    assert job.domain is not None
    return RectDomain(*job.domain)


def run(job: JobSpec) -> tuple[dict[str, Any], list[Status]]:
    """Execute one job; returns (result payload, statuses for exit-code logic)."""
    cfg = _quad_config(job)
    if job.command == "integrate":
        f = parse(job.f_source)
        q = integrate(f, _domain(job), cfg)
        statuses = [] if q.converged else [Status.INCONCLUSIVE]
        return {"type": "quadrature", "quadrature": _plain(q)}, statuses

    ineq = InequalityId(job.ineq)
    if job.command == "check":
        f = parse(job.f_source)
        g = parse(job.g_source) if job.g_source is not None else None
        dom = _domain(job)
        anchor_pt = EvalPoint(*job.anchor) if job.anchor is not None else None
        if ineq == InequalityId.OSTROWSKI_2D:
            anchor_pt = EvalPoint(*job.point) if job.point is not None else dom.midpoint
        t = job.point[0] if job.point is not None else None
        report = run_bound(
            ineq, job.variant, f, g, dom, cfg,
            anchor=anchor_pt, t=t, side=job.side, hypothesis=job.hypothesis,
        )
        return {"type": "bound", "bound": _plain(report)}, [report.status]

    if job.command == "scan":
        domains = [RectDomain(*d) for d in (job.domains or (job.domain,))]
        scans: list[ScanResult] = []
        if job.family is not None:
            named = [(f"u{i:02d}", parse(src)) for i, src in enumerate(job.family)]
            scans.append(constant_scan(ineq, job.variant, named, domains, cfg))
        else:
            for dom in domains:
                fam = (
                    compliant_family_1d((dom.a, dom.b))
                    if ineq in _1D_INEQS
                    else compliant_family(dom)
                )
                scans.append(constant_scan(ineq, job.variant, fam, [dom], cfg))
        statuses = [row.status for sc in scans for row in sc.rows]
        return {"type": "scan", "scans": [_plain(s) for s in scans]}, statuses

    if job.command == "sharpness":
        dom = _domain(job)
        spec = ExtremalSpec(
            target=ineq, domain=dom, side=job.side,
            anchor=EvalPoint(*job.anchor) if job.anchor is not None else None,
        )
        built = build_extremal(spec)
        f, g = built if isinstance(built, tuple) else (built, None)
        ratio = achieved_ratio(spec, job.variant, cfg)
        report = run_bound(
            ineq, job.variant, f, g, dom, cfg,
            anchor=spec.anchor, t=spec.anchor.x if spec.anchor else None, side=job.side,
        )
        payload = {
            "type": "sharpness",
            "extremal-f": str(f),
            "extremal-g": str(g) if g is not None else None,
            "ratio": ratio,
            "bound": _plain(report),
        }
        return payload, [report.status]

    raise ConfigError("command", f"unknown command {job.command!r}")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _plain(obj: Any) -> Any:
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _float_repr(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        return "null"
    return format(v, ".17g")


def _emit_json(obj: Any, depth: int, parts: list[str]) -> None:
    pad = "  " * (depth + 1)
    close_pad = "  " * depth
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(_float_repr(obj))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            parts.append(f"{pad}{json.dumps(str(k))}: ")
            _emit_json(obj[k], depth + 1, parts)
            parts.append(",\n" if i + 1 < len(keys) else "\n")
        parts.append(close_pad + "}")
    elif isinstance(obj, list):
        if not obj:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, v in enumerate(obj):
            parts.append(pad)
            _emit_json(v, depth + 1, parts)
            parts.append(",\n" if i + 1 < len(obj) else "\n")
        parts.append(close_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, 17-significant-digit floats."""
    parts: list[str] = []
    _emit_json(_plain(report), 0, parts)
    parts.append("\n")
    return "".join(parts)


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return _float_repr(v)
    return str(v)


def _csv_rows(results: list[dict[str, Any]], jobs: list[JobSpec]) -> list[list[str]]:
    rows: list[list[str]] = []
    for job, result in zip(jobs, results):
        if result["type"] == "bound":
            b = result["bound"]
            a, bb, c, d = job.domain
            rows.append([b["inequality"], b.get("variant") or "", _csv_cell(a), _csv_cell(bb),
                         _csv_cell(c), _csv_cell(d), job.f_source or "", job.g_source or "",
                         _csv_cell(b["lhs"]), _csv_cell(b["rhs"]), _csv_cell(b["ratio"]),
                         _csv_cell(b["eps"]), b["status"]])
        elif result["type"] == "scan":
            for sc in result["scans"]:
                for r in sc["rows"]:
                    a, bb, c, d = r["domain"]
                    rows.append([sc["inequality"], sc.get("variant") or "", _csv_cell(a),
                                 _csv_cell(bb), _csv_cell(c), _csv_cell(d), r["fid"],
                                 r.get("gid") or "", _csv_cell(r["lhs"]), _csv_cell(r["rhs"]),
                                 _csv_cell(r["ratio"]), _csv_cell(r["eps"]), r["status"]])
        elif result["type"] == "sharpness":
            b = result["bound"]
            a, bb, c, d = job.domain
            rows.append([b["inequality"], b.get("variant") or "", _csv_cell(a), _csv_cell(bb),
                         _csv_cell(c), _csv_cell(d), "extremal", "extremal-g" if result["extremal-g"] else "",
                         _csv_cell(b["lhs"]), _csv_cell(b["rhs"]), _csv_cell(b["ratio"]),
                         _csv_cell(b["eps"]), b["status"]])
        else:  # quadrature
            q = result["quadrature"]
            a, bb, c, d = job.domain
            rows.append(["integrate", "", _csv_cell(a), _csv_cell(bb), _csv_cell(c), _csv_cell(d),
                         job.f_source or "", "", _csv_cell(q["value"]), "", "",
                         _csv_cell(q["error_estimate"]),
                         "OK" if q["converged"] else "INCONCLUSIVE"])
    return rows


def emit_csv(results: list[dict[str, Any]], jobs: list[JobSpec]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(_csv_rows(results, jobs))
    return buf.getvalue()


def _fmt_num(v: float | None) -> str:
    return "n/a" if v is None else format(v, ".6g")


def emit_text(results: list[dict[str, Any]], jobs: list[JobSpec]) -> str:
    lines: list[str] = []
    for job, result in zip(jobs, results):
        if result["type"] == "bound":
            b = result["bound"]
            lines.append(
                f"{b['inequality']} on {job.domain}: lhs={_fmt_num(b['lhs'])} "
                f"rhs={_fmt_num(b['rhs'])} ratio={_fmt_num(b['ratio'])} "
                f"eps={_fmt_num(b['eps'])} status={b['status']}"
            )
            for caveat in b.get("caveats", ()):
                lines.append(f"  note: {caveat}")
        elif result["type"] == "quadrature":
            q = result["quadrature"]
            lines.append(
                f"integrate on {job.domain}: value={_fmt_num(q['value'])} "
                f"error={_fmt_num(q['error_estimate'])} panels={q['panels_used']} "
                f"converged={q['converged']}"
            )
        elif result["type"] == "sharpness":
            lines.append(
                f"{job.ineq} extremal on {job.domain}: ratio={_fmt_num(result['ratio'])}"
            )
            lines.append(f"  f = {result['extremal-f']}")
            if result["extremal-g"]:
                lines.append(f"  g = {result['extremal-g']}")
        elif result["type"] == "scan":
            for sc in result["scans"]:
                lines.append(
                    f"scan {sc['inequality']}"
                    + (f" [{sc['variant']}]" if sc.get("variant") else "")
                    + f": rows={len(sc['rows'])} max-ratio={_fmt_num(sc['max_ratio'])}"
                    f" constant-estimate={_fmt_num(sc['constant_estimate'])}"
                )
                for r in sc["rows"]:
                    lines.append(
                        f"  {r['fid']}"
                        + (f" x {r['gid']}" if r.get("gid") else "")
                        + f" on {tuple(r['domain'])}: lhs={_fmt_num(r['lhs'])}"
                        f" rhs={_fmt_num(r['rhs'])} ratio={_fmt_num(r['ratio'])}"
                        f" status={r['status']}"
                    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", default=None)
    p.add_argument("--side", default="left", choices=["left", "right"])
    p.add_argument("--hypothesis", default="weak", choices=["weak", "strict"])
    p.add_argument("--gl-points", type=int, default=20)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--max-panels", type=int, default=4096)
    p.add_argument("--initial-splits", type=int, default=1)
    p.add_argument("--format", default="json", choices=["text", "json", "csv"])
    p.add_argument("--out", default=None)
    p.add_argument("--strict-exit", action="store_true")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ineq2d",
        description="Numerical certificates for sharp double-integral inequalities.",
    )
    parser.add_argument("--version", action="version", version=f"ineq2d {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("check", "sharpness"):
        p = sub.add_parser(name)
        p.add_argument("--ineq", required=True)
        p.add_argument("--f", dest="f_source", default=None)
        p.add_argument("--g", dest="g_source", default=None)
        p.add_argument("--domain", required=True)
        p.add_argument("--anchor", default=None)
        p.add_argument("--point", default=None)
        _add_common_flags(p)

    p = sub.add_parser("scan")
    p.add_argument("--ineq", required=True)
    p.add_argument("--domain", action="append", required=True)
    _add_common_flags(p)

    p = sub.add_parser("integrate")
    p.add_argument("--f", dest="f_source", required=True)
    p.add_argument("--domain", required=True)
    _add_common_flags(p)

    p = sub.add_parser("batch")
    p.add_argument("config")
    p.add_argument("--format", default=None, choices=["text", "json", "csv"])
    p.add_argument("--out", default=None)
    p.add_argument("--strict-exit", action="store_true")
    return parser


def _job_from_args(args: argparse.Namespace) -> JobSpec:
    data: dict[str, Any] = {"command": args.command}
    if getattr(args, "ineq", None):
        data["inequality-id"] = args.ineq
    if getattr(args, "f_source", None):
        data["f-source"] = args.f_source
    if getattr(args, "g_source", None):
        data["g-source"] = args.g_source
    if args.command == "scan":
        if len(args.domain) == 1:
            data["domain"] = args.domain[0]
        else:
            data["domains"] = args.domain
    elif getattr(args, "domain", None):
        data["domain"] = args.domain
    for key in ("anchor", "point", "variant"):
        if getattr(args, key, None) is not None:
            data[key] = getattr(args, key)
    data["side"] = args.side
    data["hypothesis"] = args.hypothesis
    data["gl-points"] = args.gl_points
    data["abs-tol"] = args.abs_tol
    data["rel-tol"] = args.rel_tol
    data["max-panels"] = args.max_panels
    data["initial-splits"] = args.initial_splits
    return build_job(data, "flags")


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _exit_code(statuses: list[Status], strict_exit: bool) -> int:
    if Status.VIOLATED in statuses or Status.INCONCLUSIVE in statuses:
        return 2
    if strict_exit and Status.ASSUMPTIONS_UNMET in statuses:
        return 3
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "batch":
            jobs = load_config(args.config)
            fmt = args.format or "json"
            out_path = args.out
        else:
            jobs = [_job_from_args(args)]
            fmt = args.format
            out_path = args.out

        outcomes = ordered_map(run, jobs)
    except (ConfigError, ParseError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    results = [payload for payload, _ in outcomes]
    statuses = [s for _, st in outcomes for s in st]

    if fmt == "json":
        report = {
            "version": __version__,
            "timestamp": _timestamp(),
            "config": {"jobs": [_resolved_dict(j) for j in jobs]},
            "results": results,
        }
        text = dumps_report(report)
    elif fmt == "csv":
        text = emit_csv(results, jobs)
    else:
        text = emit_text(results, jobs)

    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return _exit_code(statuses, args.strict_exit)


if __name__ == "__main__":
    raise SystemExit(main())
