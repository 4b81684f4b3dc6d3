"""Domain specs, mesh export and deterministic result files.

Domain spec JSON::

    {"type": "polygon", "vertices": [[x, y], ...]}
    {"type": "rectangle", "a": 2.0, "b": 1.0}
    {"type": "triangle_moduli", "p": [x, y]}
    {"type": "graph", "L": 1.0, "epsilon": 0.1, "profile": "const" | "sin2" | "weight_file",
     "samples": [...] | "path": "w.csv", "value": 1.0, "kinks": [...]}

Result files carry the tool version, the echoed configuration and the seed.
Nothing time- or host-dependent is written, so equal configs give equal bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .domains import Domain, GraphDomain, Polygon, Simplex, TriMesh, make_triangle_from_moduli, rectangle
from .oned import load_profile_csv

__all__ = ["SpecError", "domain_from_spec", "load_domain", "export_mesh", "plain", "result_document",
           "write_json", "write_csv", "dumps_json"]


class SpecError(ValueError):
    """Malformed domain spec."""


def _need(spec, key):
    if key not in spec:
        raise SpecError("domain spec of type %r needs %r" % (spec.get("type"), key))
    return spec[key]


def domain_from_spec(spec: dict, base_dir=None) -> Domain:
    if not isinstance(spec, dict) or "type" not in spec:
        raise SpecError("domain spec must be an object with a 'type'")
    kind = spec["type"]
    try:
        if kind == "polygon":
            return Polygon(np.asarray(_need(spec, "vertices"), dtype=float))
        if kind == "rectangle":
            return rectangle(float(_need(spec, "a")), float(_need(spec, "b")))
        if kind == "triangle_moduli":
            return make_triangle_from_moduli(_need(spec, "p"))
        if kind == "graph":
            return _graph(spec, base_dir)
    except SpecError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc)) from exc
    raise SpecError("unknown domain type %r" % kind)


def _graph(spec, base_dir):
    L = float(_need(spec, "L"))
    eps = float(_need(spec, "epsilon"))
    profile = spec.get("profile", "const")
    kinks = tuple(float(k) for k in spec.get("kinks", ()))
    if profile == "const":
        w = np.full(2, float(spec.get("value", 1.0)))
    elif profile == "sin2":
        def w(x):
            return np.sin(np.pi * np.asarray(x) / L) ** 2
    elif profile == "weight_file":
        if "samples" in spec:
            w = np.asarray(spec["samples"], dtype=float)
        else:
            path = Path(_need(spec, "path"))
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            prof = load_profile_csv(path)
            if not math.isclose(prof.R, L, rel_tol=1e-9):
                raise SpecError("weight file spans [0, %g] but L = %g" % (prof.R, L))
            w = np.asarray(prof.samples)
    else:
        raise SpecError("unknown graph profile %r" % profile)
    return GraphDomain(L, w, eps, kinks)


def load_domain(path) -> Domain:
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError("%s: %s" % (path, exc)) from exc
    return domain_from_spec(spec, path.parent)


def export_mesh(mesh: TriMesh, path=None) -> str:
    """Plain text: a count line, then one vertex per line, then one triangle per line."""
    out = io.StringIO()
    out.write("vertices %d\n" % mesh.n_vertices)
    for (x, y), b in zip(mesh.vertices, mesh.boundary):
        out.write("%r %r %d\n" % (float(x), float(y), int(b)))
    out.write("triangles %d\n" % mesh.n_triangles)
    for t in mesh.triangles:
        out.write("%d %d %d\n" % tuple(int(i) for i in t))
    text = out.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def plain(obj):
    """Recursively convert numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def result_document(command: str, config: dict, seed: int, results, tolerances=None) -> dict:
    return {
        "tool": "fundgap",
        "version": __version__,
        "command": command,
        "config": plain(config),
        "seed": int(seed),
        "tolerances": plain(tolerances or {}),
        "results": plain(results),
    }


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path, doc: dict) -> None:
    Path(path).write_text(dumps_json(doc))


def write_csv(path, columns, rows, doc: dict | None = None) -> None:
    """CSV with ``#`` header lines echoing version, command, seed and config."""
    out = io.StringIO()
    if doc is not None:
        out.write("# fundgap %s %s seed=%d\n" % (doc["version"], doc["command"], doc["seed"]))
        out.write("# config %s\n" % json.dumps(doc["config"], sort_keys=True))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else plain(v) for v in r])
    Path(path).write_text(out.getvalue())
