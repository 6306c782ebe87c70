"""Problem configuration files.

A configuration is a JSON object (see ``configs/`` for samples)::

    {
      "format_version": 1,
      "timescale": [0, 0.25, [0.5, 1]],      # numbers are isolated points
      "n": 2,
      "A": [[1, 0], [0, 1]],
      "form": "explicit" | "sigma" | "linear",
      "field": "example1" | {"builtin": ...} | {"expr": [["1 + p_11^2", ...], ...]},
      "bound": [[2, 0], [0, 2]] | {"expr": [[...]]} | {"builtin": "example2" | "example3"},
      "curves": {"builtin": "example2_curves", "u": "1 + t", "w": "t/2"} | {"P": ..., "Q": ...},
      "domain_set": {"kind": "rectangle", "radius": 1.4142, "center": ..., "structure": "bisymmetric"},
      "theorem": "exis2",
      "grid": {"dense_step": 0.001},
      "solver": {"newton_tol": 1e-10, "max_iter": 50},
      "tolerances": {"psd_tol": 1e-10, "eq_tol": 1e-9},
      "seed": 0, "samples": 500, "nodes": 50, "trials": 20,
      "a": 0, "b": 1
    }

Only ``timescale``, ``n``, ``A`` and ``field`` (or ``curves``) are required.
Unknown keys are errors.  :func:`print_config` emits the canonical form with
every default filled in, so that parse, print, parse is the identity.
"""
from __future__ import annotations

import json
import math
import re

import numpy as np

from .. import fixtures
from ..certifier import THEOREMS, DomainSet, Problem
from ..curves import MatrixCurve, MatrixField
from ..errors import ConfigError, ExpressionError
from ..matrixops import Tolerances
from ..timescale import GridSpec, TimeScale
from .expr import FieldExpression, evaluate, parse_expression, variables

FORMAT_VERSION = 1
FORMS = ("explicit", "sigma", "linear")
FIELD_BUILTINS = ("example1", "example3", "linear", "scalar_nonunique")
BOUND_BUILTINS = ("example2", "example3")
TOP_KEYS = ("format_version", "timescale", "n", "A", "a", "b", "form", "field", "bound", "curves",
            "domain_set", "theorem", "grid", "solver", "tolerances", "seed", "samples", "nodes", "trials")


def _locate(text, path):
    """Best-effort (line, column) of the value at ``path`` inside the JSON text."""
    pos, found = 0, None
    for key in path:
        if isinstance(key, str):
            m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
            if not m:
                break
            pos, found = m.start(), m.start()
    if found is None:
        return None, None
    line = text.count("\n", 0, found) + 1
    col = found - (text.rfind("\n", 0, found) + 1) + 1
    return line, col


class _Ctx:
    def __init__(self, text):
        self.text = text

    def fail(self, msg, path):
        line, col = _locate(self.text, path)
        raise ConfigError(msg, line, col, path)


def _keys(ctx, obj, allowed, path):
    if not isinstance(obj, dict):
        ctx.fail("expected an object", path)
    for k in obj:
        if k not in allowed:
            ctx.fail(f"unknown key {k!r}", path + [k])


def _number(ctx, v, path, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        ctx.fail("expected a finite number", path)
    if integer and int(v) != v:
        ctx.fail("expected an integer", path)
    if positive and not v > 0:
        ctx.fail("expected a positive number", path)
    return int(v) if integer else float(v)


def _matrix(ctx, v, n, path):
    if not isinstance(v, list) or len(v) != n or any(not isinstance(r, list) or len(r) != n for r in v):
        ctx.fail(f"expected a {n}x{n} matrix (list of {n} rows)", path)
    return [[_number(ctx, x, path) for x in row] for row in v]


def _expr_table(ctx, v, n, path, time_only=False):
    if not isinstance(v, list) or len(v) != n or any(not isinstance(r, list) or len(r) != n for r in v):
        ctx.fail(f"expected a {n}x{n} table of expressions", path)
    for i, row in enumerate(v):
        for j, src in enumerate(row):
            if not isinstance(src, str):
                ctx.fail("expression entries must be strings", path)
            try:
                tree = parse_expression(src, n)
            except ExpressionError as exc:
                ctx.fail(f"entry ({i + 1},{j + 1}): {exc}", path)
            if time_only and variables(tree) - {"t"}:
                bad = sorted(variables(tree) - {"t"})[0]
                ctx.fail(f"entry ({i + 1},{j + 1}): variable {bad!r} is not allowed here (only t)", path)
    return [list(row) for row in v]


def _matrix_spec(ctx, v, n, path):
    """Constant matrix or time-dependent expression table."""
    if isinstance(v, dict):
        _keys(ctx, v, ("expr",), path)
        if "expr" not in v:
            ctx.fail("missing key 'expr'", path)
        return {"expr": _expr_table(ctx, v["expr"], n, path + ["expr"], time_only=True)}
    return _matrix(ctx, v, n, path)


def _scalar_expr(ctx, v, path):
    if not isinstance(v, str):
        ctx.fail("expected an expression string in t", path)
    try:
        tree = parse_expression(v, 1)
    except ExpressionError as exc:
        ctx.fail(str(exc), path)
    if variables(tree) - {"t"}:
        ctx.fail("only the variable t is allowed here", path)
    return v


def _field(ctx, v, n, path):
    if isinstance(v, str):
        if v in FIELD_BUILTINS:
            v = {"builtin": v}
        elif n == 1:
            v = {"expr": [[v]]}
        else:
            ctx.fail(f"unknown builtin field {v!r}; expected one of {FIELD_BUILTINS} or an expression table", path)
    if isinstance(v, list):
        v = {"expr": v}
    if not isinstance(v, dict):
        ctx.fail("field must be a builtin name, an object or an expression table", path)
    if "expr" in v:
        _keys(ctx, v, ("expr",), path)
        return {"expr": _expr_table(ctx, v["expr"], n, path + ["expr"])}
    if "builtin" not in v:
        ctx.fail("field object needs 'builtin' or 'expr'", path)
    name = v["builtin"]
    if name not in FIELD_BUILTINS:
        ctx.fail(f"unknown builtin field {name!r}; expected one of {FIELD_BUILTINS}", path + ["builtin"])
    if name == "example1":
        _keys(ctx, v, ("builtin",), path)
        if n != 2:
            ctx.fail("builtin 'example1' needs n = 2", path)
        return {"builtin": name}
    if name == "scalar_nonunique":
        _keys(ctx, v, ("builtin",), path)
        if n != 1:
            ctx.fail("builtin 'scalar_nonunique' needs n = 1", path)
        return {"builtin": name}
    if name == "example3":
        _keys(ctx, v, ("builtin", "K"), path)
        if "K" not in v:
            ctx.fail("builtin 'example3' needs K", path)
        K = _matrix(ctx, v["K"], n, path + ["K"])
        if np.count_nonzero(np.array(K) - np.diag(np.diag(K))) or min(np.diag(K)) <= 0:
            ctx.fail("example3 needs a diagonal K with positive entries", path + ["K"])
        return {"builtin": name, "K": K}
    _keys(ctx, v, ("builtin", "V", "G"), path)
    for k in ("V", "G"):
        if k not in v:
            ctx.fail(f"builtin 'linear' needs {k}", path)
    return {"builtin": name, "V": _matrix_spec(ctx, v["V"], n, path + ["V"]),
            "G": _matrix_spec(ctx, v["G"], n, path + ["G"])}


def _bound(ctx, v, n, path):
    if isinstance(v, dict) and "builtin" in v:
        _keys(ctx, v, ("builtin",), path)
        if v["builtin"] not in BOUND_BUILTINS:
            ctx.fail(f"unknown builtin bound {v['builtin']!r}; expected one of {BOUND_BUILTINS}", path + ["builtin"])
        return {"builtin": v["builtin"]}
    return _matrix_spec(ctx, v, n, path)


def _curves(ctx, v, n, path):
    if not isinstance(v, dict):
        ctx.fail("expected an object", path)
    if "builtin" in v:
        _keys(ctx, v, ("builtin", "u", "w"), path)
        if v["builtin"] != "example2_curves":
            ctx.fail(f"unknown builtin curves {v['builtin']!r}; expected 'example2_curves'", path + ["builtin"])
        if n != 2:
            ctx.fail("example2_curves needs n = 2", path)
        return {"builtin": "example2_curves", "u": _scalar_expr(ctx, v.get("u", "1 + t"), path + ["u"]),
                "w": _scalar_expr(ctx, v.get("w", "t/2"), path + ["w"])}
    _keys(ctx, v, ("P", "Q"), path)
    for k in ("P", "Q"):
        if k not in v:
            ctx.fail(f"curves need {k}", path)
    return {"P": _matrix_spec(ctx, v["P"], n, path + ["P"]), "Q": _matrix_spec(ctx, v["Q"], n, path + ["Q"])}


def _domain(ctx, v, n, path):
    _keys(ctx, v, ("kind", "radius", "center", "structure"), path)
    kind = v.get("kind", "rectangle")
    if kind not in ("rectangle", "strip", "pd_cone"):
        ctx.fail(f"unknown domain kind {kind!r}", path + ["kind"])
    structure = v.get("structure", "general")
    if structure not in ("general", "symmetric", "diagonal", "bisymmetric"):
        ctx.fail(f"unknown structure {structure!r}", path + ["structure"])
    out = {"kind": kind, "radius": _number(ctx, v.get("radius", 1.0), path + ["radius"], positive=True),
           "center": _matrix(ctx, v.get("center", np.zeros((n, n)).tolist()), n, path + ["center"]),
           "structure": structure}
    try:
        DomainSet(n, kind, out["radius"], np.array(out["center"]), structure)
    except ValueError as exc:
        ctx.fail(str(exc), path)
    return out


def _section(ctx, v, defaults, path, integer=()):
    _keys(ctx, v, tuple(defaults), path)
    return {k: _number(ctx, v.get(k, d), path + [k], positive=True, integer=k in integer)
            for k, d in defaults.items()}


def parse_config(text: str) -> dict:
    """Validate a configuration text; returns the canonical dictionary.

    Raises :class:`ConfigError` with a key path and, where possible, a line
    and column for the first problem found.
    """
    ctx = _Ctx(text)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    _keys(ctx, raw, TOP_KEYS, [])
    version = raw.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        ctx.fail(f"unsupported format_version {version!r}; expected {FORMAT_VERSION}", ["format_version"])
    for k in ("timescale", "n", "A"):
        if k not in raw:
            ctx.fail(f"missing required key {k!r}", [])
    n = _number(ctx, raw["n"], ["n"], positive=True, integer=True)
    entries = raw["timescale"]
    if not isinstance(entries, list) or not entries:
        ctx.fail("timescale must be a nonempty list of points and [l, r] intervals", ["timescale"])
    for e in entries:
        if not (isinstance(e, (int, float)) and not isinstance(e, bool)) and not (
                isinstance(e, list) and len(e) == 2 and all(isinstance(x, (int, float)) for x in e)):
            ctx.fail(f"malformed interval {e!r}; expected a number or [l, r]", ["timescale"])
    try:
        ts = TimeScale.from_config(entries)
    except ValueError as exc:
        ctx.fail(str(exc), ["timescale"])
    cfg = {"format_version": FORMAT_VERSION, "timescale": ts.to_config(), "n": n,
           "A": _matrix(ctx, raw["A"], n, ["A"])}
    for k, default in (("a", ts.min), ("b", ts.max)):
        cfg[k] = _number(ctx, raw.get(k, default), [k])
        if cfg[k] not in ts:
            ctx.fail(f"{k} = {cfg[k]!r} is not in the time scale", [k])
    if not cfg["a"] < cfg["b"]:
        ctx.fail("need a < b", ["b"])
    form = raw.get("form", "explicit")
    if form not in FORMS:
        ctx.fail(f"unknown form {form!r}; expected one of {FORMS}", ["form"])
    cfg["form"] = form
    if "field" not in raw and "curves" not in raw:
        ctx.fail("missing required key 'field' (or 'curves' for the inverse results)", [])
    cfg["field"] = _field(ctx, raw["field"], n, ["field"]) if "field" in raw else None
    if form == "linear" and (cfg["field"] is None or cfg["field"].get("builtin") not in ("linear", "example3")):
        ctx.fail("form 'linear' needs the 'linear' or 'example3' builtin field", ["form"])
    cfg["bound"] = _bound(ctx, raw["bound"], n, ["bound"]) if "bound" in raw else None
    if cfg["bound"] == {"builtin": "example3"} and (cfg["field"] or {}).get("builtin") != "example3":
        ctx.fail("bound 'example3' needs the example3 field", ["bound"])
    cfg["curves"] = _curves(ctx, raw["curves"], n, ["curves"]) if "curves" in raw else None
    if cfg["bound"] == {"builtin": "example2"} and (cfg["curves"] or {}).get("builtin") != "example2_curves":
        ctx.fail("bound 'example2' needs example2_curves", ["bound"])
    cfg["domain_set"] = _domain(ctx, raw["domain_set"], n, ["domain_set"]) if "domain_set" in raw else None
    theorem = raw.get("theorem")
    if theorem is not None and theorem not in THEOREMS:
        ctx.fail(f"unknown theorem {theorem!r}; expected one of {sorted(THEOREMS)}", ["theorem"])
    cfg["theorem"] = theorem
    cfg["grid"] = _section(ctx, raw.get("grid", {}), {"dense_step": 1e-3}, ["grid"])
    cfg["solver"] = _section(ctx, raw.get("solver", {}), {"newton_tol": 1e-10, "max_iter": 50}, ["solver"],
                             integer=("max_iter",))
    cfg["tolerances"] = _section(ctx, raw.get("tolerances", {}), {"psd_tol": 1e-10, "eq_tol": 1e-9},
                                 ["tolerances"])
    for k, d in (("seed", 0), ("samples", 500), ("nodes", 50), ("trials", 20)):
        v = raw.get(k, d)
        cfg[k] = _number(ctx, v, [k], integer=True)
        if cfg[k] < (0 if k == "seed" else 1):
            ctx.fail(f"{k} must be {'non-negative' if k == 'seed' else 'positive'}", [k])
    return cfg


def print_config(cfg: dict) -> str:
    """Canonical text of a parsed configuration (unset optional keys are omitted)."""
    return json.dumps({k: v for k, v in cfg.items() if v is not None}, indent=2) + "\n"


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# -- building runtime objects -------------------------------------------------------

def timescale(cfg) -> TimeScale:
    return TimeScale.from_config(cfg["timescale"])


def grid(cfg) -> GridSpec:
    return GridSpec(cfg["grid"]["dense_step"])


def tolerances(cfg) -> Tolerances:
    return Tolerances(**cfg["tolerances"])


def _scalar_fn(src):
    tree = parse_expression(src, 1)
    return lambda t: evaluate(tree, {"t": float(t)})


def matrix_curve(spec, n) -> MatrixCurve:
    if isinstance(spec, list):
        return MatrixCurve.const(spec)
    table = FieldExpression.parse(spec["expr"], n)
    return MatrixCurve(lambda t: table(t, np.zeros((n, n))), n)


def build_field(cfg) -> MatrixField:
    spec, n = cfg["field"], cfg["n"]
    ts = timescale(cfg)
    if "expr" in spec:
        return FieldExpression.parse(spec["expr"], n).field()
    name = spec["builtin"]
    if name == "example1":
        return fixtures.example1_field()
    if name == "scalar_nonunique":
        return fixtures.scalar_nonunique()
    if name == "example3":
        return fixtures.example3_field(np.array(spec["K"]), ts, cfg["a"])
    return fixtures.linear_field(matrix_curve(spec["V"], n), matrix_curve(spec["G"], n))


def linear_parts(cfg):
    """(V, G) curves of a linear sigma-form problem."""
    spec, n = cfg["field"], cfg["n"]
    if spec.get("builtin") == "example3":
        ts = timescale(cfg)
        K = np.array(spec["K"])
        return fixtures.example3_V(K, ts), fixtures.example3_G(K, ts, cfg["a"])
    return matrix_curve(spec["V"], n), matrix_curve(spec["G"], n)


def build_curves(cfg):
    spec = cfg["curves"]
    if spec is None:
        return None, None
    if spec.get("builtin") == "example2_curves":
        return fixtures.example2_curves(_scalar_fn(spec["u"]), _scalar_fn(spec["w"]))
    return matrix_curve(spec["P"], cfg["n"]), matrix_curve(spec["Q"], cfg["n"])


def build_bound(cfg):
    spec = cfg["bound"]
    if spec is None:
        return None
    if isinstance(spec, list):
        return np.array(spec)
    ts = timescale(cfg)
    if spec.get("builtin") == "example2":
        return fixtures.example2_bound(ts, _scalar_fn(cfg["curves"]["u"]))
    if spec.get("builtin") == "example3":
        return fixtures.example3_bound(np.array(cfg["field"]["K"]), ts)
    return matrix_curve(spec, cfg["n"])


def build_problem(cfg) -> Problem:
    if cfg["bound"] is None:
        raise ConfigError("certify needs a 'bound'", path=["bound"])
    d = cfg["domain_set"]
    domain = None if d is None else DomainSet(cfg["n"], d["kind"], d["radius"], np.array(d["center"]), d["structure"])
    P, Q = build_curves(cfg)
    return Problem(timescale(cfg), build_bound(cfg), build_field(cfg) if cfg["field"] else None, domain,
                   P, Q, cfg["a"], cfg["b"], cfg["samples"], cfg["nodes"], seed=cfg["seed"],
                   tol=tolerances(cfg), grid=grid(cfg))
