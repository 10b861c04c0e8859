"""File formats: target specs, insertion specs, twist specs.

Target spec (JSON): either a builder expression

    {"builder": "projective_space", "n": 2, "weights": [[[0,0],0], ...]}
    {"builder": "product", "factors": [<spec>, <spec>]}
    {"builder": "projective_bundle", "base": <spec>,
     "summands": [{"weights": [[[0,0,0],0], [[−1,1,0],0]]}, ...]}

(a weight is [lattice coordinates, auxiliary coordinate]), or an explicit
moment graph

    {"rank": 2, "points": ["p0", ...], "lattice_rank": 1,
     "edges": [{"ends": ["p0","p1"], "character": [[1,0],0], "class": [1]}]}

Insertion spec: {"insertions": [{"class": "h^2*b", "psi": 0}, ...]} with
class expressions over the target's generator classes (or "delta:p0", "1").

Twist spec: {"summands": [{"weights": {"p0": [[0,1],0], ...},
"orientation": "convex"}], "auxiliary": false}.
"""

from __future__ import annotations

import json
from pathlib import Path

from .exact import Character
from .graphsum import InsertionSpec, TwistSpec
from .targets import (
    CurveClass,
    EquivariantLineBundle,
    GkmEdge,
    GkmTarget,
    SplitBundle,
    build_product,
    build_projective_bundle,
    build_projective_space,
)


class SpecError(Exception):
    pass


def _character(data) -> Character:
    try:
        coeffs, aux = data
        return Character(tuple(int(c) for c in coeffs), int(aux))
    except (TypeError, ValueError) as exc:
        raise SpecError(f"bad character {data!r}") from exc


def target_from_spec(spec: dict) -> GkmTarget:
    if not isinstance(spec, dict):
        raise SpecError("target spec must be a JSON object")
    builder = spec.get("builder")
    try:
        if builder == "projective_space":
            return build_projective_space(
                int(spec["n"]), [_character(w) for w in spec["weights"]]
            )
        if builder == "product":
            a, b = spec["factors"]
            return build_product(target_from_spec(a), target_from_spec(b), check=False)
        if builder == "projective_bundle":
            base = target_from_spec(spec["base"])
            summands = tuple(
                EquivariantLineBundle(tuple(_character(w) for w in s["weights"]))
                for s in spec["summands"]
            )
            return build_projective_bundle(base, SplitBundle(summands), check=False)
        if builder is not None:
            raise SpecError(f"unknown builder {builder!r}")
        points = tuple(str(p) for p in spec["points"])
        edges = []
        for e in spec["edges"]:
            p, q = (points.index(str(x)) if not isinstance(x, int) else x for x in e["ends"])
            edges.append(
                GkmEdge(p, q, _character(e["character"]), CurveClass(tuple(int(c) for c in e["class"])))
            )
        return GkmTarget(
            int(spec["rank"]),
            points,
            tuple(edges),
            int(spec["lattice_rank"]),
            name=spec.get("name", "explicit"),
            spec=spec,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed target spec: {exc}") from exc


def load_target(path: str | Path) -> GkmTarget:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read target spec {path}: {exc}") from exc
    return target_from_spec(spec)


def save_target(target: GkmTarget, path: str | Path):
    with open(path, "w") as fh:
        json.dump(target.to_spec(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def parse_class_vector(text: str, lattice_rank: int) -> CurveClass:
    try:
        coords = tuple(int(c) for c in text.replace("(", "").replace(")", "").split(","))
    except ValueError as exc:
        raise SpecError(f"malformed class vector {text!r}") from exc
    if len(coords) != lattice_rank:
        raise SpecError(
            f"class vector {text!r} has {len(coords)} coordinates, "
            f"target lattice has rank {lattice_rank}"
        )
    return CurveClass(coords)


def insertion_class(target: GkmTarget, expr: str):
    expr = expr.strip()
    if expr.startswith("delta:"):
        return target.delta(expr.split(":", 1)[1])
    return target.class_expression(expr)


def insertions_from_spec(target: GkmTarget, spec: dict) -> InsertionSpec:
    try:
        items = spec["insertions"]
        classes = tuple(insertion_class(target, item["class"]) for item in items)
        psis = tuple(int(item.get("psi", 0)) for item in items)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed insertion spec: {exc}") from exc
    return InsertionSpec(classes, psis)


def load_insertions(target: GkmTarget, path: str | Path) -> InsertionSpec:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read insertion spec {path}: {exc}") from exc
    return insertions_from_spec(target, spec)


def twist_from_spec(target: GkmTarget, spec: dict) -> TwistSpec:
    try:
        summands = []
        orientations = []
        for s in spec["summands"]:
            table = s["weights"]
            weights = tuple(_character(table[p]) for p in target.points)
            summands.append(EquivariantLineBundle(weights))
            orientations.append(s.get("orientation", "convex"))
        return TwistSpec(
            SplitBundle(tuple(summands)),
            tuple(orientations),
            bool(spec.get("auxiliary", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed twist spec: {exc}") from exc


def load_twist(target: GkmTarget, path: str | Path) -> TwistSpec:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read twist spec {path}: {exc}") from exc
    return twist_from_spec(target, spec)
