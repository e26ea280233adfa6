"""Scene files: JSON documents naming a space, W, patches and a sample plan."""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import sympy
from sympy.parsing.sympy_parser import parse_expr

from .. import corpus
from ..config import DEFAULT, Config
from ..core import SpaceForm, TotallyGeodesic
from ..errors import GeometryError, SceneError, UnknownEntry
from ..horosphere import IdealPoint
from ..immersion import ImmersedPatch, SamplePlan, ball_exclusion
from ..levelset import busemann_field, distance_to_points, distance_to_W

SCHEMA_VERSION = 1

_FUNCTIONS = {
    name: getattr(sympy, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "asin", "acos", "atan",
                 "asinh", "acosh", "atanh", "Abs")
}
_CONSTANTS = {"pi": sympy.pi, "E": sympy.E}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("scene_schema.json").read_text(encoding="utf-8"))


def _path(err: jsonschema.ValidationError) -> str:
    parts = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
    return "scene" + parts


def _reject_constant(name):
    raise SceneError(f"non-finite number {name} in scene")


def parse_scene_text(text: str) -> dict:
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene is not valid JSON: {exc}") from None
    validate(raw)
    return raw


def validate(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise SceneError(f"{_path(err)}: {err.message}")


def scene_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# -- building objects --------------------------------------------------------


def _space(raw) -> SpaceForm:
    return SpaceForm(raw["space"]["n"], raw["space"]["c"])


def _W(sp: SpaceForm, spec: dict, where: str) -> TotallyGeodesic:
    try:
        if "basis" in spec:
            if sp.c == 0:
                raise SceneError(f"{where}: use origin/frame for c = 0")
            for i, r in enumerate(spec["basis"]):
                _check_len(r, sp.ambient_dim, f"{where}.basis[{i}]")
            return TotallyGeodesic.from_span(sp, np.array(spec["basis"], dtype=float))
        origin = np.array(spec["origin"], dtype=float)
        _check_len(origin, sp.ambient_dim, f"{where}.origin")
        frame = [np.array(r, dtype=float) for r in spec.get("frame", [])]
        for i, r in enumerate(frame):
            _check_len(r, sp.ambient_dim, f"{where}.frame[{i}]")
        return TotallyGeodesic.through(sp, origin, frame)
    except (GeometryError, ValueError) as exc:
        if isinstance(exc, SceneError):
            raise
        raise SceneError(f"{where}: {exc}") from None


def _check_len(vec, dim, where):
    if len(vec) != dim:
        raise SceneError(f"{where}: expected {dim} coordinates, got {len(vec)}")


def _parse(expr: str, symbols: dict, where: str):
    for name in _IDENT.findall(expr):
        if name not in symbols and name not in _FUNCTIONS and name not in _CONSTANTS:
            raise SceneError(f"{where}: unknown name {name!r} in expression {expr!r}")
    try:
        return parse_expr(expr, local_dict={**symbols, **_FUNCTIONS, **_CONSTANTS}, global_dict={"__builtins__": {}, **{
            k: getattr(sympy, k) for k in ("Integer", "Float", "Rational", "Symbol")}})
    except Exception as exc:  # sympy raises a variety of parse errors
        raise SceneError(f"{where}: cannot parse {expr!r}: {exc}") from None


def expression_patch(sp: SpaceForm, spec: dict, where: str) -> ImmersedPatch:
    names = spec["params"]
    syms = {n: sympy.Symbol(n, real=True) for n in names}
    if len(spec["coords"]) != sp.ambient_dim:
        raise SceneError(f"{where}.coords: expected {sp.ambient_dim} coordinates, got {len(spec['coords'])}")
    exprs = [_parse(e, syms, f"{where}.coords[{i}]") for i, e in enumerate(spec["coords"])]
    args = [syms[n] for n in names]
    F = sympy.Matrix(exprs)
    J = F.jacobian(args)
    f_num = sympy.lambdify([args], list(F), modules="math")
    j_num = sympy.lambdify([args], J.tolist(), modules="math")

    def f(u):
        return np.array(f_num(list(u)), dtype=float)

    def jac(u):
        return np.array(j_num(list(u)), dtype=float)

    lower, upper = _domain(spec, len(names), where)
    patch = ImmersedPatch(sp, lower, upper, f, jac, excluded=_exclusions(spec, len(names), where), name=spec["id"])
    mid = 0.5 * (np.array(lower) + np.array(upper))
    try:
        x = f(mid)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise SceneError(f"{where}: patch cannot be evaluated at the domain centre: {exc}") from None
    if sp.model_residual(x) > 1e-6:
        raise SceneError(f"{where}: patch does not lie on the model surface (residual {sp.model_residual(x):.2e})")
    return patch


def _domain(spec, m, where):
    d = spec["domain"]
    if len(d["lower"]) != m or len(d["upper"]) != m:
        raise SceneError(f"{where}.domain: expected {m} bounds per side")
    if any(a >= b for a, b in zip(d["lower"], d["upper"])):
        raise SceneError(f"{where}.domain: lower must be below upper in every coordinate")
    return tuple(d["lower"]), tuple(d["upper"])


def _exclusions(spec, m, where):
    preds = []
    for i, ex in enumerate(spec.get("exclusions", [])):
        if len(ex["center"]) != m:
            raise SceneError(f"{where}.exclusions[{i}].center: expected {m} coordinates")
        preds.append(ball_exclusion(ex["center"], ex["radius"]))
    if not preds:
        return None
    return lambda u: any(p(u) for p in preds)


def _expectations(spec) -> tuple:
    return tuple(corpus.Expectation(k, v, "scene") for k, v in sorted(spec.get("expect", {}).items()))


def _field(raw, sp, W, where="scene.field"):
    fs = raw.get("field")
    if fs is None:
        return distance_to_W(W) if W is not None else None
    kind = fs["kind"]
    if kind == "distance_W":
        if W is None:
            raise SceneError(f"{where}: distance_W needs W")
        fld = distance_to_W(W)
    elif kind == "distance_points":
        if "points" not in fs:
            raise SceneError(f"{where}.points: required for distance_points")
        for i, r in enumerate(fs["points"]):
            _check_len(r, sp.ambient_dim, f"{where}.points[{i}]")
        fld = distance_to_points(sp, np.array(fs["points"], dtype=float))
    else:
        xi = _ideal(raw, sp)
        if xi is None:
            raise SceneError(f"{where}: busemann fields need scene.ideal")
        fld = busemann_field(xi)
    return fld.scaled(fs["scale"]) if "scale" in fs else fld


def _ideal(raw, sp):
    if "ideal" not in raw:
        return None
    if sp.c >= 0:
        raise SceneError("scene.ideal: ideal points need c < 0")
    d = np.array(raw["ideal"]["direction"], dtype=float)
    _check_len(d, sp.ambient_dim, "scene.ideal.direction")
    try:
        return IdealPoint.from_direction(sp, d)
    except (GeometryError, ValueError, ZeroDivisionError) as exc:
        raise SceneError(f"scene.ideal: {exc}") from None


def build_targets(raw: dict) -> list[corpus.CorpusEntry]:
    """Corpus-style entries for every patch of a validated scene."""
    sp = _space(raw) if "space" in raw else None
    W = _W(sp, raw["W"], "scene.W") if (sp is not None and "W" in raw) else None
    ideal = _ideal(raw, sp) if sp is not None else None
    fld = _field(raw, sp, W) if sp is not None else None
    out, seen = [], set()
    for i, spec in enumerate(raw["patches"]):
        where = f"scene.patches[{i}]"
        if spec["id"] in seen:
            raise SceneError(f"{where}.id: duplicate patch id {spec['id']!r}")
        seen.add(spec["id"])
        if spec["kind"] == "corpus":
            try:
                e = corpus.entry(spec["entry"], **spec.get("options", {}))
            except UnknownEntry as exc:
                raise SceneError(f"{where}.entry: {exc.args[0]}") from None
            except TypeError as exc:
                raise SceneError(f"{where}.options: {exc}") from None
            patch = e.patch
            if "domain" in spec:
                lower, upper = _domain(spec, patch.param_dim, where)
                patch = patch.restricted(lower, upper)
            if "exclusions" in spec:
                extra = _exclusions(spec, patch.param_dim, where)
                base = patch.excluded
                patch = replace(patch, excluded=lambda u, b=base, x=extra: (b is not None and b(u)) or x(u))
            expected = _expectations(spec) if "expect" in spec else e.expected
            out.append(replace(e, id=spec["id"], patch=patch, expected=expected, params={"entry": spec["entry"]}))
        else:
            if sp is None:
                raise SceneError(f"{where}: expression patches need scene.space")
            patch = expression_patch(sp, spec, where)
            out.append(corpus.CorpusEntry(spec["id"], sp, W, patch, _expectations(spec), "scene expression patch",
                                          field=fld, ideal=ideal))
    return out


def plan_and_config(raw: dict, overrides: dict | None = None) -> tuple[SamplePlan, Config]:
    p = raw["plan"]
    plan = SamplePlan(grid=p.get("grid", 128), random=p.get("random", 128), seed=p["seed"])
    tols = dict(p.get("tolerances", {}))
    tols.update(overrides or {})
    for k, v in tols.items():
        if not math.isfinite(v) or v <= 0:
            raise SceneError(f"scene.plan.tolerances.{k}: must be a positive finite number")
    try:
        config = DEFAULT.with_overrides(**tols)
    except KeyError as exc:
        raise SceneError(f"scene.plan.tolerances: {exc.args[0]}") from None
    return plan, config


@dataclass
class Scene:
    raw: dict
    targets: list
    plan: SamplePlan
    config: Config
    hash: str


def load_scene(path, overrides: dict | None = None) -> Scene:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneError(f"cannot read scene file: {exc}") from None
    raw = parse_scene_text(text)
    plan, config = plan_and_config(raw, overrides)
    return Scene(raw, build_targets(raw), plan, config, scene_hash(raw))


def corpus_scene(entry_ids=None, seed: int = 0) -> dict:
    """Scene document listing shipped corpus entries (round-trips through :func:`build_targets`)."""
    ids = list(corpus.ENTRY_IDS) if entry_ids is None else list(entry_ids)
    patches = [{"id": i, "kind": "corpus", "entry": i} for i in ids]
    for i, opts in corpus.VARIANTS:
        if i in ids:
            tag = ",".join(f"{k}={v}" for k, v in sorted(opts.items()))
            patches.append({"id": f"{i}[{tag}]", "kind": "corpus", "entry": i, "options": dict(opts)})
    return {"schema_version": SCHEMA_VERSION, "patches": patches, "plan": {"seed": seed}}
