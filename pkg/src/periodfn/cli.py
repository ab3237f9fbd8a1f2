"""Command-line front end.

Subcommands: ``period``, ``derivative``, ``criterion``, ``classify``,
``verify``, ``examples``.  Exit codes: 0 success, 1 negative finding,
2 invalid input, 3 partial results, 4 indeterminate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from . import gallery
from .criterion import sign_certificate
from .errors import (ConfigError, InvalidGeometry, NonPositiveLinearPart, PeriodFnError,
                     UnknownExample)
from .functions import function_from_spec
from .hamiltonian import SeparableHamiltonian, validate_center
from .period import METHODS, period, period_derivative, sample_period_curve
from .polyfamily import FamilyParams, NormalizationInput, classify, normalize

__all__ = ["RunConfig", "ResolvedSystem", "main", "run", "resolve_system", "load_config"]

EXIT_OK, EXIT_NEGATIVE, EXIT_INVALID, EXIT_PARTIAL, EXIT_INDETERMINATE = 0, 1, 2, 3, 4
CSV_COLUMNS = ("E", "T", "dTdE", "method", "err")

FD_ENERGIES = 10
CROSS_ENERGIES = 5
CROSS_RTOL = 1e-6


@dataclass
class RunConfig:
    system: object = None
    batch: list | None = None
    emin: float | None = None
    emax: float | None = None
    n: int = 11
    e0: float | None = None
    resolution: int = 512
    depth: int = 4
    tol: float = 1e-10
    method: str = "theta"
    format: str = "csv"
    out: str | None = None
    jobs: int = 1

    def validate(self, command):
        if command == "classify":
            if (self.system is None) == (self.batch is None):
                raise ConfigError("give exactly one of a system or a batch list")
        elif command != "examples" and self.system is None:
            raise ConfigError("a system spec is required")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, not {self.format!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ConfigError("tol must be positive")
        if self.resolution < 2 or self.depth < 0 or self.jobs < 1 or self.n < 1:
            raise ConfigError("resolution >= 2, depth >= 0, jobs >= 1, n >= 1 required")
        if self.e0 is not None and not self.e0 > 0:
            raise ConfigError("e0 must be positive")
        if self.emin is not None and self.emax is not None and not 0 < self.emin < self.emax:
            if not (self.n == 1 and self.emin == self.emax and self.emin > 0):
                raise ConfigError("need 0 < emin < emax")

    def grid(self):
        if self.emin is None or self.emax is None:
            raise ConfigError("--emin and --emax are required for an energy grid")
        if self.n == 1:
            return np.array([self.emin])
        return np.linspace(self.emin, self.emax, self.n)


_KEYS = {f.name for f in fields(RunConfig)}


def load_config(path):
    """Read a JSON or YAML mapping (JSON parses as YAML)."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid JSON/YAML: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(doc) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return doc


# ------------------------------------------------------------------ systems

@dataclass
class ResolvedSystem:
    label: str
    H: SeparableHamiltonian
    family: FamilyParams | None = None
    example: gallery.ExampleSystem | None = None
    raw: NormalizationInput | None = None
    info: dict = field(default_factory=dict)


def _numbers(text):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        return None


def resolve_system(spec, tol=1e-10) -> ResolvedSystem:
    """Builtin name, ``a,b,c``, ``a1,a2,a3,b1,b2``, a list of 3 or 5 numbers,
    or a mapping ``{"F": function-spec, "G": function-spec}``."""
    if isinstance(spec, dict):
        if set(spec) != {"F", "G"}:
            raise ConfigError("explicit system needs exactly the keys F and G")
        H = SeparableHamiltonian(function_from_spec(spec["F"]), function_from_spec(spec["G"]))
        report = validate_center(H)
        if not report.passed:
            raise ConfigError(f"not a nondegenerate center: {report.failed()}")
        return ResolvedSystem("explicit", H, info={"system": H.to_dict()})
    if isinstance(spec, (list, tuple)):
        vals = [float(v) for v in spec]
    elif isinstance(spec, str):
        vals = _numbers(spec)
        if vals is None:
            ex = gallery.builtin(spec)
            return ResolvedSystem(ex.name, ex.H, example=ex, info={"example": ex.to_dict()})
    else:
        raise ConfigError(f"cannot interpret system spec {spec!r}")
    if len(vals) == 3:
        p = FamilyParams(*vals)
        return ResolvedSystem(f"family({p.a:g},{p.b:g},{p.c:g})", p.hamiltonian(), family=p,
                              info={"family": p.to_dict()})
    if len(vals) == 5:
        raw = NormalizationInput(*vals)
        p = normalize(raw)
        return ResolvedSystem(f"raw({','.join(f'{v:g}' for v in vals)})", raw.hamiltonian(),
                              family=p, raw=raw,
                              info={"raw": list(vals), "family": p.to_dict(),
                                    "time_scale": raw.time_scale, "energy_scale": raw.a1})
    raise ConfigError(f"system spec needs 3 or 5 numbers, got {len(vals)}")


# ------------------------------------------------------------------- output

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_text(rows, fmt, extra=None):
    if fmt == "json":
        doc = {"rows": [dict(zip(CSV_COLUMNS, r)) for r in rows]}
        if extra:
            doc.update(extra)
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _doc_text(doc, fmt, flat=None):
    """Documents are JSON; ``csv`` gives a key,value listing of ``flat`` items."""
    if fmt == "json" or flat is None:
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in flat:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# ----------------------------------------------------------------- commands

def _curve(cfg, rs, derivative):
    grid = cfg.grid()
    curve = sample_period_curve(rs.H, grid, method=cfg.method, tol=cfg.tol,
                                derivative=derivative, workers=cfg.jobs)
    rows = []
    for s, d in zip(curve.samples, curve.derivatives):
        if derivative:
            rows.append((s.E, s.T, None if d is None else d.value, s.method,
                         None if d is None else d.err))
        else:
            rows.append((s.E, s.T, None, s.method, s.err))
    # gap rows keep the table aligned with the requested grid
    rows.extend((e, None, None, "gap", None) for e, _ in curve.gaps)
    rows.sort(key=lambda r: r[0])
    partial = bool(curve.gaps) or (derivative and any(d is None for d in curve.derivatives))
    extra = {"system": rs.label, "gaps": [{"E": e, "reason": r} for e, r in curve.gaps]}
    return rows, partial, extra


def cmd_period(cfg, rs):
    rows, partial, extra = _curve(cfg, rs, derivative=False)
    return (EXIT_PARTIAL if partial else EXIT_OK), _rows_text(rows, cfg.format, extra)


def cmd_derivative(cfg, rs):
    rows, partial, extra = _curve(cfg, rs, derivative=True)
    return (EXIT_PARTIAL if partial else EXIT_OK), _rows_text(rows, cfg.format, extra)


def _default_e0(rs):
    if rs.example is not None:
        return rs.example.expected.certify_at
    if rs.family is not None:
        cl = classify(rs.family)
        if cl.E0 is not None and math.isfinite(cl.E0):
            return cl.E0 if rs.raw is None else cl.E0 * rs.raw.a1
    E_star = rs.H.annulus.E_star
    return E_star if math.isfinite(E_star) else 1.0


def cmd_criterion(cfg, rs):
    E0 = cfg.e0 if cfg.e0 is not None else _default_e0(rs)
    cert = sign_certificate(rs.H, E0, resolution=cfg.resolution, refinement_depth=cfg.depth)
    doc = {"system": rs.label, "certificate": cert.to_dict()}
    code = {"NonNegative": EXIT_OK, "NonPositive": EXIT_OK, "Mixed": EXIT_NEGATIVE,
            "Indeterminate": EXIT_INDETERMINATE}[cert.verdict]
    flat = [("key", "value"), ("system", rs.label), ("verdict", cert.verdict), ("E0", cert.E0),
            ("vanishes", cert.vanishes), ("margin", cert.margin), ("reason", cert.reason)]
    return code, _doc_text(doc, cfg.format, flat)


def _classify_one(spec, tol):
    rs = resolve_system(spec, tol)
    if rs.family is None:
        raise ConfigError(f"{rs.label}: classify needs family parameters")
    rec = classify(rs.family).to_dict()
    if rs.raw is not None:
        rec["normalized_from"] = rs.info["raw"]
    return rec


def cmd_classify(cfg, rs=None):
    specs = cfg.batch if cfg.batch is not None else [cfg.system]
    if cfg.jobs > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(lambda s: _classify_one(s, cfg.tol), specs))
    else:
        records = [_classify_one(s, cfg.tol) for s in specs]
    code = EXIT_INDETERMINATE if any(
        r["verdict"] == "indeterminate-near-origin" for r in records) else EXIT_OK
    doc = records[0] if cfg.batch is None else {"records": records}
    flat = [("a", "b", "c", "case", "verdict", "E0")] + [
        (r["a"], r["b"], r["c"], r["case"], r["verdict"],
         None if r["interval"] is None else r["interval"][1]) for r in records]
    return code, _doc_text(doc, cfg.format, flat)


def _expectation(cfg, rs):
    """``(sign, E_hi, certify_at, source)``; sign 0 means constant."""
    if rs.example is not None:
        ex = rs.example.expected
        E_hi = cfg.emax if cfg.emax is not None else ex.E_hi
        at = cfg.emax if cfg.emax is not None else ex.certify_at
        return ex.sign, E_hi, at, "registry"
    if rs.family is None:
        raise ConfigError("verify needs a builtin example or family parameters")
    cl = classify(rs.family)
    scale = 1.0 if rs.raw is None else rs.raw.a1
    if cl.classified:
        sign = {"constant": 0, "increasing": 1, "decreasing": -1}[cl.verdict]
        E_hi = cl.E0 * scale
        src = f"case {cl.case}"
    elif cl.remark and cl.remark.get("E_c") is not None:
        sign = 1 if cl.remark["expected"] == "increasing" else -1
        E_hi = cl.remark["E_c"] * scale
        src = f"{cl.case}: sub-interval below the sigma root"
    else:
        raise ConfigError(f"no verifiable claim for {rs.label}: verdict {cl.verdict}")
    if cfg.emax is not None:
        E_hi = cfg.emax
    at = E_hi if math.isfinite(E_hi) else 10.0
    return sign, E_hi, at, src


def _check(name, ok, **detail):
    return {"check": name, "pass": bool(ok), **detail}


def cmd_verify(cfg, rs):
    sign, E_hi, at, source = _expectation(cfg, rs)
    H = rs.H
    E_star = H.annulus.E_star
    top = min(at, E_star * (1 - 1e-6)) if math.isfinite(E_star) else at
    checks = []

    cert = sign_certificate(H, at, resolution=cfg.resolution, refinement_depth=cfg.depth)
    if sign == 0:
        ok = cert.vanishes
    else:
        ok = cert.supports(sign)
    checks.append(_check("sign certificate", ok, verdict=cert.verdict, E0=at,
                         vanishes=cert.vanishes))

    if rs.family is not None:
        cl = classify(rs.family)
        want = {0: "constant", 1: "increasing", -1: "decreasing"}[sign]
        ok = cl.verdict == want or (cl.remark is not None and cl.remark.get("expected") == want)
        checks.append(_check("classification", ok, case=cl.case, verdict=cl.verdict))

    energies = np.geomspace(top * 1e-3, top * 0.95, FD_ENERGIES)
    fd = []
    for E in energies:
        try:
            d = period_derivative(H, E)
        except PeriodFnError as exc:
            fd.append({"E": E, "error": str(exc), "pass": False})
            continue
        if sign == 0:
            ok, flat = abs(d.value) <= max(3 * d.err, 1e-6), False
        else:
            flat = d.sign == 0
            ok = flat or d.sign == sign
        fd.append({"E": E, "dTdE": d.value, "err": d.err, "flat": flat, "pass": ok})
    checks.append(_check("finite-difference signs", all(r["pass"] for r in fd), samples=fd))

    agree = []
    for E in np.geomspace(top * 1e-2, top * 0.9, CROSS_ENERGIES):
        try:
            t1 = period(H, E, method="theta", tol=cfg.tol).T
            t2 = period(H, E, method="ode").T
            rel = abs(t1 - t2) / abs(t2)
            agree.append({"E": E, "theta": t1, "ode": t2, "rel": rel, "pass": rel <= CROSS_RTOL})
        except PeriodFnError as exc:
            agree.append({"E": E, "error": str(exc), "pass": False})
    checks.append(_check("theta/ode agreement", all(r["pass"] for r in agree), samples=agree))

    passed = all(c["pass"] for c in checks)
    doc = {"system": rs.label, "claim": {"sign": sign, "interval": [0.0, E_hi], "source": source},
           "checks": checks, "passed": passed}
    flat = [("check", "pass")] + [(c["check"], c["pass"]) for c in checks]
    return (EXIT_OK if passed else EXIT_NEGATIVE), _doc_text(doc, cfg.format, flat)


def cmd_examples(cfg, action, name):
    if action == "list":
        rows = [("name", "verdict", "E_hi", "provenance")]
        docs = []
        for n in gallery.names():
            ex = gallery.builtin(n)
            rows.append((n, ex.expected.verdict, ex.expected.E_hi, ex.provenance))
            docs.append({"name": n, **ex.expected.to_dict(), "provenance": ex.provenance})
        return EXIT_OK, _doc_text({"examples": docs}, cfg.format, rows)
    if name is None:
        raise ConfigError("examples run needs a name")
    cfg.system = name
    return cmd_verify(cfg, resolve_system(name, cfg.tol))


# --------------------------------------------------------------------- main

def _parser():
    p = argparse.ArgumentParser(prog="periodfn",
                                description="Period function of separable Hamiltonian centers.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML file; flags override its values")
    common.add_argument("--system", help="builtin name | a,b,c | a1,a2,a3,b1,b2")
    common.add_argument("--emin", type=float)
    common.add_argument("--emax", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--e0", type=float)
    common.add_argument("--resolution", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--method", choices=sorted(METHODS))
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out")
    common.add_argument("--jobs", type=int)
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("period", "T(E) on an energy grid"),
                       ("derivative", "T and dT/dE on an energy grid"),
                       ("criterion", "sampled sign certificate of M on {H <= E0}"),
                       ("verify", "end-to-end consistency checks")):
        sub.add_parser(name, parents=[common], help=text)
    c = sub.add_parser("classify", parents=[common], help="case and verdict for (a,b,c)")
    c.add_argument("--batch", help="file with a list of parameter triples or quintuples")
    e = sub.add_parser("examples", parents=[common], help="list or run builtin examples")
    e.add_argument("action", choices=("list", "run"))
    e.add_argument("name", nargs="?")
    return p


def _build_config(args):
    values = load_config(args.config) if args.config else {}
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None and key != "batch":
            values[key] = v
    if getattr(args, "batch", None):
        doc = load_config_list(args.batch)
        values["batch"] = doc
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config_list(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read batch file {path}: {exc}") from exc
    if not isinstance(doc, list) or not doc:
        raise ConfigError("batch file must hold a non-empty list")
    return doc


_INVALID = (ConfigError, UnknownExample, InvalidGeometry, NonPositiveLinearPart,
            ValueError, TypeError)


def run(argv=None):
    """Parse ``argv``; return ``(exit_code, text, out_path)`` without writing anything."""
    args = _parser().parse_args(argv)
    cfg = _build_config(args)
    if args.command == "examples":
        if args.action == "run":
            cfg.system = args.name
        cfg.validate("examples" if args.action == "list" else "verify")
        return (*cmd_examples(cfg, args.action, args.name), cfg.out)
    cfg.validate(args.command)
    if args.command == "classify":
        return (*cmd_classify(cfg), cfg.out)
    rs = resolve_system(cfg.system, cfg.tol)
    handler = {"period": cmd_period, "derivative": cmd_derivative,
               "criterion": cmd_criterion, "verify": cmd_verify}[args.command]
    return (*handler(cfg, rs), cfg.out)


def main(argv=None):
    try:
        code, text, out = run(argv)
    except SystemExit as exc:  # argparse
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    except _INVALID as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    try:
        _emit(text, out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return code


if __name__ == "__main__":
    sys.exit(main())
