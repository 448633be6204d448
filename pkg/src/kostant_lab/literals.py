"""JSON literals for series, functions, forms, grids and problem documents.

Parsing validates against JSON Schemas (``jsonschema``) so that errors carry
the offending field path; emission produces the canonical literal that the
parsers accept back.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import ModelError, ParseError, SchemaError
from .functions import (
    FlatFactor,
    FlatHomotopy,
    HRational,
    PairFactor,
    QuadrantKernel,
    SeparableFunction,
    SeparableTerm,
)
from .kostant import PolarizedForm
from .normal_forms import HYPERBOLIC, WilliamsonSpec, build_model
from .series import TruncatedSeries
from .verify import GridSpec

SCHEMA_ID = "kostant-lab/1"

KINDS = ("solve2d", "solve_h1", "solve_top", "solve_h2_dim6", "flat_section", "verify", "expand_jets")
SOLVER_KINDS = ("solve2d", "solve_h1", "solve_top", "solve_h2_dim6", "flat_section", "expand_jets")

_num = {"type": "number"}
_nat = {"type": "integer", "minimum": 0}
_pos = {"type": "integer", "minimum": 1}
_cplx = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_poly_h = {"type": "array", "items": _cplx}
_den = {"type": "array", "items": {"type": "array", "prefixItems": [{"type": "integer", "not": {"const": 0}}, _pos],
                                   "minItems": 2, "maxItems": 2}}
_profile = {
    "oneOf": [
        {"type": "null"},
        {"type": "object", "additionalProperties": False, "required": ["c"],
         "properties": {"c": {"type": "number", "exclusiveMinimum": 0}, "pre": _poly_h}},
    ]
}
_parts = {"type": "array", "items": _profile, "minItems": 4, "maxItems": 4}
_coef = {"re": _num, "im": _num}
_mono = {
    "type": "object", "additionalProperties": False, "required": ["exponents"],
    "properties": {"exponents": {"type": "array", "items": _nat, "minItems": 2}, **_coef},
}


def _placed(extra_props: dict, required: list) -> dict:
    return {
        "type": "object", "additionalProperties": False, "required": required,
        "properties": {"pair": _pos, "exponents": {"type": "array", "items": _nat, "minItems": 2},
                       **_coef, **extra_props},
    }


_extra = {
    "oneOf": [
        {"type": "null"},
        {"type": "object", "additionalProperties": False, "required": ["kind", "c"],
         "properties": {"kind": {"const": "gauss_flat"}, "c": {"type": "number", "exclusiveMinimum": 0}}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "parts"],
         "properties": {"kind": {"const": "quadrant_kernel"}, "parts": _parts}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "c", "m"],
         "properties": {"kind": {"const": "homotopy"}, "c": {"type": "number", "exclusiveMinimum": 0},
                        "m": {"type": "integer"}}},
    ]
}
_factor = {
    "type": "object", "additionalProperties": False, "required": ["a", "b", "num"],
    "properties": {"a": _nat, "b": _nat, "num": _poly_h, "den": _den, "extra": _extra},
}

FUNCTION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "type": {"const": "function"},
        "arity": _pos,
        "poly": {"type": "array", "items": _mono},
        "rational_term": {"type": "array", "items": _placed({"num": _poly_h, "den": _den}, ["den"])},
        "gauss_flat": {"type": "array", "items": _placed(
            {"c": {"type": "number", "exclusiveMinimum": 0}, "pre": _poly_h}, ["c"])},
        "quadrant_kernel": {"type": "array", "items": _placed({"parts": _parts}, ["parts"])},
        "terms": {"type": "array", "items": {
            "type": "object", "additionalProperties": False, "required": ["factors"],
            "properties": {**_coef, "factors": {"type": "array", "items": _factor, "minItems": 1}},
        }},
    },
}
SERIES_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["arity", "order", "coeffs"],
    "properties": {"type": {"const": "series"}, "arity": _pos, "order": _nat,
                   "coeffs": {"type": "array", "items": _mono}},
}
FORM_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["degree", "arity", "coeffs"],
    "properties": {
        "type": {"const": "form"},
        "degree": _nat, "arity": _pos, "mode": {"enum": ["formal", "exact"]}, "order": _nat,
        "coeffs": {"type": "array", "items": {
            "type": "object", "additionalProperties": False, "required": ["tuple", "fn"],
            "properties": {"tuple": {"type": "array", "items": _pos},
                           "fn": {"oneOf": [SERIES_SCHEMA, FUNCTION_SCHEMA]}},
        }},
    },
}
GRID_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["box", "points"],
    "properties": {
        "box": {"type": "array", "minItems": 2, "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}},
        "points": {"type": "integer", "minimum": 2},
        "exclude_abs_h_below": {"type": "number", "minimum": 0},
    },
}
_OPTIONS = {
    "type": "object", "additionalProperties": False,
    "properties": {"order": _nat, "mode": {"enum": ["formal", "exact"]},
                   "tolerance": {"type": "number", "exclusiveMinimum": 0}, "grid": GRID_SCHEMA},
}
PROBLEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "model", "data"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "kind": {"enum": list(KINDS)},
        "model": {"type": "object", "additionalProperties": False, "required": ["ke", "kh", "kf"],
                  "properties": {"ke": _nat, "kh": _nat, "kf": _nat}},
        "data": {"type": "object"},
        "options": _OPTIONS,
    },
}
_DATA_SCHEMAS = {
    "solve2d": FUNCTION_SCHEMA,
    "expand_jets": {"oneOf": [FUNCTION_SCHEMA, SERIES_SCHEMA]},
    "solve_h1": FORM_SCHEMA,
    "solve_top": FORM_SCHEMA,
    "solve_h2_dim6": FORM_SCHEMA,
    "flat_section": {"type": "object", "additionalProperties": False, "required": ["parts"],
                     "properties": {"parts": _parts}},
    "verify": {
        "type": "object", "additionalProperties": False, "required": ["G"],
        "properties": {
            "G": FUNCTION_SCHEMA,
            "F": {"oneOf": [{"type": "null"}, FUNCTION_SCHEMA]},
            "pair": _pos,
            "probe": {"type": "object", "additionalProperties": False,
                      "properties": {"step": {"type": "number", "exclusiveMinimum": 0}, "order": {"enum": [2, 4]}}},
        },
    },
}


def validate(instance, schema, path=()):
    """Raise :class:`SchemaError` for the most relevant violation."""
    validator = jsonschema.Draft202012Validator(schema)
    err = jsonschema.exceptions.best_match(validator.iter_errors(instance))
    if err is not None:
        raise SchemaError(err.message, path=tuple(path) + tuple(err.absolute_path))


# ---------------------------------------------------------------- primitives

def _c(rec) -> complex:
    return complex(rec.get("re", 0.0), rec.get("im", 0.0))


def _cl(pairs) -> tuple:
    return tuple(complex(re, im) for re, im in pairs)


def _emit_c(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _emit_cl(vals) -> list:
    return [[float(v.real), float(v.imag)] for v in vals]


def _exps(rec, arity: int, path) -> tuple:
    e = tuple(rec["exponents"])
    if len(e) != 2 * arity:
        raise SchemaError(f"expected {2 * arity} exponents, got {len(e)}", path=tuple(path) + ("exponents",))
    return e


def _pair(rec, arity: int, path) -> int:
    j = rec.get("pair", 1)
    if j > arity:
        raise SchemaError(f"pair {j} outside 1..{arity}", path=tuple(path) + ("pair",))
    return j


def _profile_obj(p):
    if p is None:
        return None
    return FlatFactor(p["c"], _cl(p.get("pre", [[1.0, 0.0]])))


def _emit_profile(p):
    if p is None:
        return None
    return {"c": p.c, "pre": _emit_cl(p.pre)}


# ---------------------------------------------------------------- series

def parse_series(doc, path=()) -> TruncatedSeries:
    validate(doc, SERIES_SCHEMA, path)
    arity = doc["arity"]
    coeffs = {}
    for i, rec in enumerate(doc["coeffs"]):
        key = _exps(rec, arity, tuple(path) + ("coeffs", i))
        coeffs[key] = coeffs.get(key, 0) + _c(rec)
    return TruncatedSeries(arity, doc["order"], coeffs)


def emit_series(s: TruncatedSeries) -> dict:
    return {
        "type": "series",
        "arity": s.arity,
        "order": s.order,
        "coeffs": [{"exponents": list(k), **_emit_c(v)} for k, v in sorted(s.items())],
    }


# ---------------------------------------------------------------- functions

def _placed_term(arity: int, rec, path, factor_at_pair) -> SeparableTerm:
    exps = _exps(rec, arity, path) if "exponents" in rec else (0,) * (2 * arity)
    j = _pair(rec, arity, path)
    facs = [PairFactor(exps[2 * i], exps[2 * i + 1]) for i in range(arity)]
    base = facs[j - 1]
    facs[j - 1] = factor_at_pair(base.a, base.b, base.rat)
    coeff = _c(rec) if ("re" in rec or "im" in rec) else 1 + 0j
    return SeparableTerm(coeff, tuple(facs))


def parse_function(doc, arity: int | None = None, path=()) -> SeparableFunction:
    """Parse a function literal; ``arity`` supplies the default when the literal omits it."""
    validate(doc, FUNCTION_SCHEMA, path)
    path = tuple(path)
    n = doc.get("arity", arity)
    if n is None:
        raise SchemaError("arity is required", path=path)
    if arity is not None and n != arity:
        raise SchemaError(f"arity {n} does not match the model arity {arity}", path=path + ("arity",))
    terms = []
    for i, rec in enumerate(doc.get("poly", [])):
        e = _exps(rec, n, path + ("poly", i))
        terms.append(SeparableTerm(_c(rec), tuple(PairFactor(e[2 * q], e[2 * q + 1]) for q in range(n))))
    for i, rec in enumerate(doc.get("rational_term", [])):
        rat = HRational(_cl(rec.get("num", [[1.0, 0.0]])), tuple(map(tuple, rec["den"])))
        terms.append(_placed_term(n, rec, path + ("rational_term", i),
                                  lambda a, b, r, rat=rat: PairFactor(a, b, r * rat)))
    for i, rec in enumerate(doc.get("gauss_flat", [])):
        ff = FlatFactor(rec["c"], _cl(rec.get("pre", [[1.0, 0.0]])))
        terms.append(_placed_term(n, rec, path + ("gauss_flat", i),
                                  lambda a, b, r, ff=ff: PairFactor(a, b, r, ff)))
    for i, rec in enumerate(doc.get("quadrant_kernel", [])):
        kern = QuadrantKernel(tuple(_profile_obj(p) for p in rec["parts"]))
        terms.append(_placed_term(n, rec, path + ("quadrant_kernel", i),
                                  lambda a, b, r, kern=kern: PairFactor(a, b, r, kern)))
    for i, rec in enumerate(doc.get("terms", [])):
        tpath = path + ("terms", i)
        if len(rec["factors"]) != n:
            raise SchemaError(f"expected {n} factors, got {len(rec['factors'])}", path=tpath + ("factors",))
        facs = []
        for q, f in enumerate(rec["factors"]):
            rat = HRational(_cl(f["num"]), tuple(map(tuple, f.get("den", []))))
            facs.append(PairFactor(f["a"], f["b"], rat, _parse_extra(f.get("extra"))))
        terms.append(SeparableTerm(_c(rec) if ("re" in rec or "im" in rec) else 1 + 0j, tuple(facs)))
    return SeparableFunction(n, terms)


def _parse_extra(e):
    if e is None:
        return None
    if e["kind"] == "gauss_flat":
        return FlatFactor(e["c"])
    if e["kind"] == "quadrant_kernel":
        return QuadrantKernel(tuple(_profile_obj(p) for p in e["parts"]))
    return FlatHomotopy(float(e["c"]), int(e["m"]))


def _emit_extra(e):
    if e is None:
        return None
    if isinstance(e, FlatFactor):
        return {"kind": "gauss_flat", "c": e.c}
    if isinstance(e, QuadrantKernel):
        return {"kind": "quadrant_kernel", "parts": [_emit_profile(p) for p in e.parts]}
    return {"kind": "homotopy", "c": e.c, "m": e.m}


def emit_function(f: SeparableFunction) -> dict:
    terms = []
    for t in f.terms:
        terms.append({
            **_emit_c(t.coeff),
            "factors": [
                {"a": p.a, "b": p.b, "num": _emit_cl(p.rat.num), "den": [list(d) for d in p.rat.den],
                 "extra": _emit_extra(p.extra)}
                for p in t.factors
            ],
        })
    return {"type": "function", "arity": f.arity, "terms": terms}


def emit_value(v) -> dict:
    if isinstance(v, TruncatedSeries):
        return emit_series(v)
    if isinstance(v, SeparableFunction):
        return emit_function(v)
    if isinstance(v, PolarizedForm):
        return emit_form(v)
    raise TypeError(f"cannot emit {type(v).__name__}")


# ---------------------------------------------------------------- forms

def parse_form(doc, mode: str | None = None, order: int | None = None, path=()) -> PolarizedForm:
    """Parse a polarised form literal.

    In formal mode function literals are expanded to series of ``order``
    (falling back to the literal's own ``order``); flat parts are rejected
    since they have no jets.
    """
    validate(doc, FORM_SCHEMA, path)
    path = tuple(path)
    n, k = doc["arity"], doc["degree"]
    mode = mode or doc.get("mode", "formal")
    if order is None:
        order = doc.get("order")
    coeffs = {}
    for i, rec in enumerate(doc["coeffs"]):
        cpath = path + ("coeffs", i)
        tup = tuple(rec["tuple"])
        if len(tup) != k or any(b <= a for a, b in zip(tup, tup[1:])) or any(t > n for t in tup):
            raise SchemaError(f"index tuple {list(tup)} invalid for degree {k}, arity {n}", path=cpath + ("tuple",))
        fn = rec["fn"]
        if "coeffs" in fn:
            s = parse_series(fn, cpath + ("fn",))
            if s.arity != n:
                raise SchemaError(f"series arity {s.arity} in a form of arity {n}", path=cpath + ("fn", "arity"))
            if mode == "exact":
                val = SeparableFunction.from_series(s)
            else:
                if order is not None and s.order < order:
                    raise SchemaError(f"series order {s.order} below form order {order}", path=cpath + ("fn", "order"))
                val = s.truncate(order) if order is not None else s
                order = val.order
        else:
            f = parse_function(fn, n, cpath + ("fn",))
            if mode == "exact":
                val = f
            else:
                if f.has_transcendental():
                    raise SchemaError("formal mode accepts polynomial/rational data only", path=cpath + ("fn",))
                if order is None:
                    raise SchemaError("formal mode needs an order (form literal or options)", path=path)
                val = f.taylor(order)
        if tup in coeffs:
            coeffs[tup] = coeffs[tup] + val
        else:
            coeffs[tup] = val
    return PolarizedForm(k, n, coeffs, mode, order if mode == "formal" else None)


def emit_form(form: PolarizedForm) -> dict:
    out = {"type": "form", "degree": form.degree, "arity": form.arity, "mode": form.mode,
           "coeffs": [{"tuple": list(t), "fn": emit_value(v)} for t, v in sorted(form._coeffs.items())]}
    if form.order is not None:
        out["order"] = form.order
    return out


# ---------------------------------------------------------------- grids

def parse_grid(doc, path=()) -> GridSpec:
    validate(doc, GRID_SCHEMA, path)
    try:
        return GridSpec(tuple(tuple(b) for b in doc["box"]), doc["points"], doc.get("exclude_abs_h_below", 0.0))
    except ValueError as exc:
        raise SchemaError(str(exc), path=tuple(path)) from exc


# ---------------------------------------------------------------- problems

@dataclass
class Problem:
    kind: str
    model: WilliamsonSpec
    data: dict
    options: dict = field(default_factory=dict)
    document: dict = field(default_factory=dict)

    @property
    def arity(self) -> int:
        return self.model.n


def _loads(text: str):
    def reject(tok):
        raise ParseError(f"non-finite number {tok} is not allowed")

    try:
        return json.loads(text, parse_constant=reject)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc


def parse_problem(source) -> Problem:
    """Parse and fully validate a problem document from a path, JSON text or dict."""
    if isinstance(source, dict):
        doc = source
    else:
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            try:
                source = Path(source).read_bytes()
            except OSError as exc:
                raise ParseError(f"cannot read problem file: {exc}") from exc
        if isinstance(source, bytes):
            try:
                source = source.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"problem document is not UTF-8: {exc}") from exc
        doc = _loads(source)
    validate(doc, PROBLEM_SCHEMA)
    kind = doc["kind"]
    m = doc["model"]
    try:
        spec = WilliamsonSpec(m["ke"], m["kh"], m["kf"])
    except Exception as exc:
        raise ModelError(str(exc)) from exc
    if kind in SOLVER_KINDS and not spec.purely_hyperbolic:
        raise ModelError(f"kind {kind} needs a purely hyperbolic model, got {m}")
    if kind in ("solve2d", "flat_section", "expand_jets") and spec.n != 1:
        raise ModelError(f"kind {kind} needs a single hyperbolic pair, got {m}")
    if kind == "solve_h2_dim6" and spec.n != 3:
        raise ModelError(f"kind {kind} needs three hyperbolic pairs, got {m}")
    validate(doc["data"], _DATA_SCHEMAS[kind], ("data",))
    if kind == "verify":
        j = doc["data"].get("pair", 1)
        if j <= spec.n and build_model(spec).kind(j) != HYPERBOLIC:
            raise ModelError(f"verification pair {j} is not a hyperbolic component of {m}")
    problem = Problem(kind, spec, doc["data"], dict(doc.get("options", {})), doc)
    # structural checks of the payload that need the model arity
    build_payload(problem)
    return problem


def build_payload(problem: Problem):
    """Domain objects for a problem's data section (raises SchemaError with paths)."""
    kind, n, data, opts = problem.kind, problem.arity, problem.data, problem.options
    if kind in ("solve2d", "expand_jets"):
        if "coeffs" in data:
            s = parse_series(data, ("data",))
            if s.arity != n:
                raise SchemaError(f"series arity {s.arity} vs model arity {n}", path=("data", "arity"))
            return s
        return parse_function(data, n, ("data",))
    if kind in ("solve_h1", "solve_top", "solve_h2_dim6"):
        mode = opts.get("mode") or data.get("mode", "formal")
        order = None
        if mode == "formal" and "order" in opts:
            loss = {"solve_h1": 2 * n, "solve_top": 2, "solve_h2_dim6": 4}[kind]
            order = opts["order"] + loss
        form = parse_form(data, mode, order, ("data",))
        if form.arity != n:
            raise ModelError(f"form arity {form.arity} does not match model arity {n}")
        want = {"solve_h1": 1, "solve_top": n, "solve_h2_dim6": 2}[kind]
        if form.degree != want:
            raise SchemaError(f"{kind} needs degree {want}, got {form.degree}", path=("data", "degree"))
        return form
    if kind == "flat_section":
        return QuadrantKernel(tuple(_profile_obj(p) for p in data["parts"]))
    # verify
    G = parse_function(data["G"], n, ("data", "G"))
    F = parse_function(data["F"], n, ("data", "F")) if data.get("F") is not None else None
    j = data.get("pair", 1)
    if j > n:
        raise SchemaError(f"pair {j} outside 1..{n}", path=("data", "pair"))
    return G, F, j


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=False)
