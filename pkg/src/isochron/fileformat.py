"""JSON system files and report files.

System file::

    {"name": "...", "form": "real" | "complex", "orientation": 1 | -1,
     "parameters": [{"name": "c0", "real": true, "nonzero": true}, ...],
     "d": "<expr>",
     "equations": {"dx"|"dz": [TermRec], "dy"|"dw": [TermRec], "du": [TermRec]}}

with TermRec = {"k": int, "j": int, "l": int, "c": "<expr>"}.  Each list
gives the full right-hand side (linear part included) as coefficients of
x^k y^j u^l (real form) or z^k w^j u^l (complex form).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from importlib import resources
from pathlib import Path

from . import series
from .expr import ExprError, parse_scalar, print_poly, print_scalar
from .scalar import GaussianRational, Param, ParamSet, Scalar
from .sysmodel import ComplexSystemSpec, RealSystemSpec, SpecError, validate

I = GaussianRational(0, 1)
FIXTURES = ("moon_rand", "quad_complex", "linear")


class SystemFileError(SpecError):
    pass


def _params(raw) -> ParamSet:
    if not isinstance(raw, list):
        raise SystemFileError("'parameters' must be a list")
    out = []
    for p in raw:
        if not isinstance(p, dict) or "name" not in p:
            raise SystemFileError(f"bad parameter record {p!r}")
        out.append(Param(p["name"], bool(p.get("real", False)), bool(p.get("nonzero", False))))
    try:
        return ParamSet(out)
    except ValueError as exc:
        raise SystemFileError(str(exc)) from None


def _expr(text, ps: ParamSet, where: str) -> Scalar:
    if not isinstance(text, str):
        raise SystemFileError(f"{where}: expression must be a string")
    try:
        return parse_scalar(text, ps)
    except ExprError as exc:
        raise SystemFileError(f"{where}: {exc}") from None


def _terms(recs, ps: ParamSet, label: str) -> dict:
    if not isinstance(recs, list):
        raise SystemFileError(f"equation {label!r} must be a list of terms")
    out: dict = {}
    for n, r in enumerate(recs):
        try:
            key = (int(r["k"]), int(r["j"]), int(r["l"]))
            text = r["c"]
        except (KeyError, TypeError, ValueError):
            raise SystemFileError(f"{label}[{n}]: term needs integer k, j, l and expression c") from None
        if min(key) < 0:
            raise SystemFileError(f"{label}[{n}]: negative exponent")
        c = _expr(text, ps, f"{label}[{n}]")
        out = series.add(out, {key: c})
    return out


def _take_linear(poly: dict, expected: dict, label: str) -> dict:
    for key in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0)]:
        want = expected.get(key)
        have = poly.get(key)
        if (want is None) != (have is None) or (want is not None and want != have):
            shown = "0" if have is None else print_scalar(have)
            wanted = "0" if want is None else print_scalar(want)
            raise SystemFileError(f"{label}: linear part mismatch at {key}: got {shown}, expected {wanted}")
    return {k: v for k, v in poly.items() if sum(k) >= 2}


def parse_system(doc: dict):
    if not isinstance(doc, dict):
        raise SystemFileError("system file must hold a JSON object")
    form = doc.get("form")
    ps = _params(doc.get("parameters", []))
    d = _expr(doc.get("d"), ps, "d")
    eqs = doc.get("equations")
    if not isinstance(eqs, dict):
        raise SystemFileError("'equations' must be an object")
    name = doc.get("name", "")
    one = Scalar.const(ps, 1)
    if form == "real":
        s = doc.get("orientation", 1)
        if s not in (1, -1):
            raise SystemFileError("orientation must be 1 or -1")
        names = ("dx", "dy", "du")
        if set(eqs) != set(names):
            raise SystemFileError(f"real form needs equations {names}")
        X, Y, U = (_terms(eqs[n], ps, n) for n in names)
        x = _take_linear(X, {(0, 1, 0): one * -s}, "dx")
        y = _take_linear(Y, {(1, 0, 0): one * s}, "dy")
        u = _take_linear(U, {(0, 0, 1): -d}, "du")
        spec = RealSystemSpec(ps, d, s, x, y, u, name=name)
    elif form == "complex":
        names = ("dz", "dw", "du")
        if set(eqs) != set(names):
            raise SystemFileError(f"complex form needs equations {names}")
        Z, W, U = (_terms(eqs[n], ps, n) for n in names)
        z = _take_linear(Z, {(1, 0, 0): one}, "dz")
        w = _take_linear(W, {(0, 1, 0): -one}, "dw")
        u = _take_linear(U, {(0, 0, 1): d * I}, "du")
        # file holds dw/dT coefficients of z^k w^j u^l; the spec wants b of w^k z^j u^l
        b = {(j, k, l): -c for (k, j, l), c in w.items()}
        spec = ComplexSystemSpec(ps, d, z, b, u, name=name, orientation=int(doc.get("orientation", 1)))
    else:
        raise SystemFileError("'form' must be 'real' or 'complex'")
    report = validate(spec)
    if not report.ok:
        raise SystemFileError("; ".join(report.issues))
    return spec


def _term_list(poly: dict) -> list:
    return [{"k": k, "j": j, "l": l, "c": print_scalar(c)} for (k, j, l), c in sorted(poly.items(), reverse=True)]


def system_to_doc(spec) -> dict:
    ps = spec.params
    doc = {
        "name": spec.name,
        "parameters": [{"name": p.name, "real": p.real, "nonzero": p.nonzero} for p in ps.params],
        "d": print_scalar(spec.d),
    }
    if isinstance(spec, RealSystemSpec):
        X, Y, U = spec.full_equations()
        doc.update(form="real", orientation=spec.orientation,
                   equations={"dx": _term_list(X), "dy": _term_list(Y), "du": _term_list(U)})
    else:
        dz, dw, du = spec.full_equations()
        doc.update(form="complex", equations={"dz": _term_list(dz), "dw": _term_list(dw), "du": _term_list(du)})
        if spec.orientation != 1:
            doc["orientation"] = spec.orientation
    return doc


def resolve_input(path: str) -> Path:
    """A filesystem path, or the name of a bundled fixture (with or without .json)."""
    p = Path(path)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in FIXTURES and p.parent == Path("."):
        return Path(str(resources.files("isochron") / "data" / f"{stem}.json"))
    raise FileNotFoundError(path)


def read_system(path: str):
    """(spec, sha256 of the file bytes)."""
    raw = resolve_input(path).read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SystemFileError(f"{path}: not valid JSON ({exc})") from None
    return parse_system(doc), hashlib.sha256(raw).hexdigest()


def load_fixture(name: str):
    return read_system(name)[0]


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_doc(report, input_hash: str, conditions=None) -> dict:
    doc = {
        "input_sha256": input_hash,
        "subs": report.subs_chain,
        "reduced_under": report.reduced_under,
        "records": [
            {"m": r.m, "p": print_scalar(r.p), "q": print_scalar(r.q), "tau": print_scalar(r.tau), "mu": print_scalar(r.mu)}
            for r in report.records
        ],
        "caveat": report.caveat,
    }
    if conditions is not None:
        doc["conditions"] = [{"m": m, "polys": [print_poly(p) for p in polys]} for m, polys in conditions]
    return doc
