"""JSON documents for cones, measures, pseudo cones, families and zoo scenarios.

Every document carries ``"schema"`` (its kind) and ``"version"``.  Vectors
are written in user coordinates; the library works in the internal frame in
which ``u_* = -e_1`` and converts on the way in and out.  Planar offsets are
additionally written as exact fractions so that a planar solution survives a
round trip bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cone import Cone
from .errors import ConeminkError
from .families import LayerFamily, TailFamily
from .mink2d import AngularMeasure
from .pseudocone import PseudoCone, slice_at
from .sam import DiscreteMeasure

VERSION = 1


class InputError(ConeminkError, ValueError):
    """A document is malformed; ``location`` says where."""

    def __init__(self, message: str, location: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise InputError("expected an object", where)
    if key not in d:
        raise InputError(f"missing field {key!r}", where)
    return d[key]


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError("expected a number", where)
    return float(x)


def _vectors(x, where: str) -> np.ndarray:
    try:
        a = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        raise InputError("expected a list of numeric vectors", where) from None
    if a.ndim != 2:
        raise InputError("expected a list of numeric vectors", where)
    return a


def _check_header(doc, schema: str, where: str = "$") -> None:
    got = _need(doc, "schema", where)
    if got != schema:
        raise InputError(f"expected schema {schema!r}, found {got!r}", f"{where}.schema")
    ver = _need(doc, "version", where)
    if ver != VERSION:
        raise InputError(f"unsupported version {ver!r}", f"{where}.version")


def load_json(path) -> dict:
    """Parse a file, turning syntax errors into :class:`InputError` with line and column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# cones


def cone_to_json(c: Cone) -> dict:
    if c.is_circular:
        return {"kind": "circular", "beta": c.beta, "axis": c.user_axis.tolist()}
    if c.dim == 2 and np.array_equal(c.frame, np.eye(2)):
        return {"kind": "planar", "beta0": c.beta0}
    return {"kind": "rays", "rays": c.user_rays.tolist(), "axis": c.user_axis.tolist()}


def cone_from_json(d, where: str = "$.cone") -> Cone:
    kind = _need(d, "kind", where)
    try:
        if kind == "planar":
            return Cone.planar(_number(_need(d, "beta0", where), f"{where}.beta0"))
        if kind == "circular":
            return Cone.circular(_number(d.get("beta", math.pi / 4), f"{where}.beta"), d.get("axis"))
        if kind == "rays":
            return Cone.from_rays(_vectors(_need(d, "rays", where), f"{where}.rays"), d.get("axis"))
        if kind == "dual_normals":
            return Cone.from_dual_normals(_vectors(_need(d, "normals", where), f"{where}.normals"),
                                          d.get("axis"))
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc), where) from None
    raise InputError(f"unknown cone kind {kind!r}", f"{where}.kind")


# ---------------------------------------------------------------------------
# measures


def measure_to_json(mu) -> dict:
    if isinstance(mu, AngularMeasure):
        return {"schema": "measure", "version": VERSION, "cone": {"kind": "planar", "beta0": mu.beta0},
                "atoms": [{"theta": float(t), "weight": float(w)} for t, w in zip(mu.thetas, mu.weights)]}
    atoms = []
    user = mu.directions @ mu.cone.frame if len(mu) else np.zeros((0, mu.cone.dim))
    for i, (v, w) in enumerate(zip(user, mu.weights)):
        a = {"direction": v.tolist(), "weight": float(w)}
        if mu.exact_deltas is not None:
            a["delta"] = float(mu.exact_deltas[i])
        atoms.append(a)
    return {"schema": "measure", "version": VERSION, "cone": cone_to_json(mu.cone), "atoms": atoms}


def measure_from_json(doc, where: str = "$"):
    """A planar document with ``theta`` atoms gives an :class:`AngularMeasure`, otherwise a :class:`DiscreteMeasure`."""
    _check_header(doc, "measure", where)
    cone = cone_from_json(_need(doc, "cone", where), f"{where}.cone")
    atoms = _need(doc, "atoms", where)
    if not isinstance(atoms, list):
        raise InputError("expected a list", f"{where}.atoms")
    try:
        if atoms and all(isinstance(a, dict) and "theta" in a for a in atoms):
            if cone.dim != 2:
                raise InputError("theta atoms need a planar cone", f"{where}.atoms")
            pairs = [(_number(a["theta"], f"{where}.atoms[{i}].theta"),
                      _number(_need(a, "weight", f"{where}.atoms[{i}]"), f"{where}.atoms[{i}].weight"))
                     for i, a in enumerate(atoms)]
            return AngularMeasure.from_atoms(cone.beta0, pairs)
        dirs, wts, dls = [], [], []
        for i, a in enumerate(atoms):
            loc = f"{where}.atoms[{i}]"
            v = np.asarray(_need(a, "direction", loc), dtype=float)
            if v.shape != (cone.dim,):
                raise InputError(f"direction must have {cone.dim} entries", f"{loc}.direction")
            dirs.append(cone.frame @ v)
            wts.append(_number(_need(a, "weight", loc), f"{loc}.weight"))
            if "delta" in a:
                dls.append(_number(a["delta"], f"{loc}.delta"))
        if not dirs:
            if cone.dim == 2:
                return AngularMeasure.from_atoms(cone.beta0, [])
            return DiscreteMeasure.empty(cone)
        exact = dls if len(dls) == len(dirs) else None
        return DiscreteMeasure.from_atoms(cone, np.array(dirs), np.array(wts), deltas=exact)
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc), f"{where}.atoms") from None


# ---------------------------------------------------------------------------
# pseudo cones


def pseudocone_to_json(k: PseudoCone, report: dict | None = None) -> dict:
    cuts = []
    user = k.normals @ k.cone.frame if len(k.normals) else np.zeros((0, k.dim))
    for v, h in zip(user, k.offsets):
        c = {"normal": v.tolist(), "offset": float(h)}
        if isinstance(h, Fraction):
            c["offset_exact"] = f"{h.numerator}/{h.denominator}"
        cuts.append(c)
    doc = {"schema": "pseudocone", "version": VERSION, "cone": cone_to_json(k.cone), "cuts": cuts}
    if report is not None:
        doc["report"] = report
    return doc


def pseudocone_from_json(doc, where: str = "$") -> PseudoCone:
    _check_header(doc, "pseudocone", where)
    cone = cone_from_json(_need(doc, "cone", where), f"{where}.cone")
    cuts = _need(doc, "cuts", where)
    if not isinstance(cuts, list):
        raise InputError("expected a list", f"{where}.cuts")
    normals, offsets = [], []
    for i, c in enumerate(cuts):
        loc = f"{where}.cuts[{i}]"
        v = np.asarray(_need(c, "normal", loc), dtype=float)
        if v.shape != (cone.dim,):
            raise InputError(f"normal must have {cone.dim} entries", f"{loc}.normal")
        normals.append(cone.frame @ v)
        if "offset_exact" in c:
            try:
                offsets.append(Fraction(c["offset_exact"]))
            except (ValueError, ZeroDivisionError):
                raise InputError("not a fraction", f"{loc}.offset_exact") from None
        else:
            offsets.append(_number(_need(c, "offset", loc), f"{loc}.offset"))
    try:
        return PseudoCone.from_cuts(cone, np.array(normals).reshape(-1, cone.dim), offsets)
    except ValueError as exc:
        raise InputError(str(exc), f"{where}.cuts") from None


# ---------------------------------------------------------------------------
# families and scenarios


def family_from_json(doc, where: str = "$"):
    _check_header(doc, "family", where)
    kind = _need(doc, "kind", where)
    try:
        if kind == "tail":
            return TailFamily.from_dict(doc)
        if kind == "layer":
            return LayerFamily.from_dict(doc)
    except KeyError as exc:
        raise InputError(f"missing field {exc.args[0]!r}", where) from None
    except ValueError as exc:
        raise InputError(str(exc), where) from None
    raise InputError(f"unknown family kind {kind!r}", f"{where}.kind")


def family_to_json(f) -> dict:
    kind = "tail" if isinstance(f, TailFamily) else "layer"
    return dict(f.to_dict(), schema="family", version=VERSION, kind=kind)


def scenario_from_json(doc, where: str = "$") -> dict:
    _check_header(doc, "zoo", where)
    kind = _need(doc, "kind", where)
    if kind not in ("a_set", "facet", "layered", "divergent"):
        raise InputError(f"unknown scenario kind {kind!r}", f"{where}.kind")
    out = {"kind": kind}
    for key, default in (("depth", 3), ("m", 0.5 if kind == "layered" else 2.0), ("q", 256),
                         ("alpha", math.pi / 4), ("t", 1.0)):
        val = doc.get(key, default)
        out[key] = int(val) if key in ("depth", "q") else _number(val, f"{where}.{key}")
    for key in ("alphas", "radii", "eps0"):
        if key in doc:
            out[key] = doc[key]
    return out


def to_jsonable(x):
    """Recursively convert numpy values and fractions for :func:`json.dumps`."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items() if not str(k).startswith("_")}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, Fraction)):
        return float(x)
    return x


# ---------------------------------------------------------------------------
# OBJ export


def export_obj(k: PseudoCone, height: float) -> str:
    """Wavefront OBJ of the truncation ``K ∩ {<x, u_*> <= height}`` in user coordinates.

    Planar sets are written as a closed polyline.
    """
    sl = slice_at(k, height)
    frame = k.cone.frame
    lines = [f"# truncation at height {height!r}"]
    if k.dim == 2:
        for p in sl.vertices @ frame:
            lines.append(f"v {float(p[0])!r} {float(p[1])!r} 0.0")
        n = len(sl.vertices)
        lines.append("l " + " ".join(str(i + 1) for i in range(n)) + " 1")
        return "\n".join(lines) + "\n"
    if k.dim != 3:
        raise ValueError("OBJ export covers dimensions 2 and 3")
    count = 0
    faces = []
    for poly in sl.facets:
        if len(poly) < 3:
            continue
        idx = []
        for p in np.asarray(poly) @ frame:
            lines.append(f"v {float(p[0])!r} {float(p[1])!r} {float(p[2])!r}")
            count += 1
            idx.append(count)
        faces.append("f " + " ".join(map(str, idx)))
    return "\n".join(lines + faces) + "\n"
