"""Operation registry and the built-in operations.

Group semantics shared by all ops:

* ``from`` names the groups an op reads. Unless the op keeps its input
  (``keep: true``; the default for Modify ops working in place and for
  ``mirror``), the primitives it reads are removed from those groups.
* Results are appended to the ``out`` groups. A missing group reads as empty.
* Select ops never keep: they only move primitives between groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from ..errors import DegenerateInsetError
from ..seeding import child_seed, uniform
from ..transform import axis_angle_quaternion, quaternion_matrix3
from .primitives import Path, Point, Surface, is_convex, unit_normal

GROUPS = ("Create", "Extend", "Modify", "Select", "Utility")


@dataclass(frozen=True)
class Param:
    kind: str  # number | int | vec3 | string | bool | ops | list | matrix23 | cond | vec3list
    required: bool = False
    default: Any = None


@dataclass(frozen=True)
class OpSpec:
    name: str
    group: str
    fn: Callable
    params: dict
    needs_from: bool = True
    needs_out: bool = True
    max_out: int = 1
    default_keep: bool = False
    doc: str = ""


REGISTRY: dict = {}


def operation(name, group, params=None, *, needs_from=True, needs_out=True, max_out=1, default_keep=False):
    """Register ``fn(ctx, op)`` under ``name``."""
    if group not in GROUPS:
        raise ValueError(f"unknown op group {group!r}")

    def deco(fn):
        spec_params = {"keep": Param("bool", default=default_keep)} if needs_from else {}
        spec_params.update(params or {})
        REGISTRY[name] = OpSpec(
            name, group, fn, spec_params, needs_from, needs_out, max_out, default_keep, (fn.__doc__ or "").strip()
        )
        return fn

    return deco


@dataclass
class Op:
    type: str
    sources: tuple
    outputs: tuple
    params: dict
    condition: Optional[dict] = None

    def __getitem__(self, key):
        return self.params[key]


@dataclass
class Context:
    """Mutable evaluation state threaded through a program run."""

    store: dict
    seed: int
    counter: int = 0
    path: str = ""
    errors: list = field(default_factory=list)

    def read(self, names, keep: bool) -> list:
        out = []
        for n in names:
            out.extend(self.store.get(n, []))
            if not keep and n in self.store:
                self.store[n] = []
        return out

    def write(self, name: str, prims) -> None:
        self.store.setdefault(name, []).extend(prims)

    def draw(self, tag: str, lo=0.0, hi=1.0) -> float:
        self.counter += 1
        return uniform(self.seed, f"{self.path}:{tag}", lo, hi, self.counter)


def _outs(op: Op, n: int) -> list:
    """Output names for ``n`` result slots; missing slots reuse the last name."""
    outs = list(op.outputs) or list(op.sources)
    return [outs[min(k, len(outs) - 1)] for k in range(n)]


# =========================================================================== Create


def _rect_points(w, h, center):
    c = np.asarray(center, dtype=np.float64)
    return np.array([[-w / 2, -h / 2, 0.0], [w / 2, -h / 2, 0.0], [w / 2, h / 2, 0.0], [-w / 2, h / 2, 0.0]]) + c


@operation(
    "create_rect", "Create",
    {"width": Param("number", default=1.0), "height": Param("number", default=1.0),
     "center": Param("vec3", default=(0.0, 0.0, 0.0)), "material": Param("string", default="default")},
    needs_from=False,
)
def create_rect(ctx, op):
    """Axis-aligned rectangle in the XY plane, facing +Z."""
    w, h = op["width"], op["height"]
    if not (w > 0 and h > 0):
        raise ValueError("width and height must be > 0")
    ctx.write(op.outputs[0], [Surface.from_points(_rect_points(w, h, op["center"]), op["material"])])


@operation(
    "create_ngon", "Create",
    {"sides": Param("int", required=True), "radius": Param("number", default=1.0),
     "center": Param("vec3", default=(0.0, 0.0, 0.0)), "material": Param("string", default="default")},
    needs_from=False,
)
def create_ngon(ctx, op):
    """Regular polygon with a vertex on +X, in the XY plane facing +Z."""
    n, r = op["sides"], op["radius"]
    if n < 3 or not r > 0:
        raise ValueError("need sides >= 3 and radius > 0")
    ang = 2.0 * math.pi * np.arange(n) / n
    pts = np.stack([r * np.cos(ang), r * np.sin(ang), np.zeros(n)], axis=1) + np.asarray(op["center"])
    ctx.write(op.outputs[0], [Surface.from_points(pts, op["material"])])


@operation(
    "create_path", "Create",
    {"points": Param("vec3list", required=True), "loop": Param("bool", default=False)},
    needs_from=False,
)
def create_path(ctx, op):
    ctx.write(op.outputs[0], [Path(tuple(map(tuple, op["points"])), op["loop"])])


@operation(
    "create_point_grid", "Create",
    {"nx": Param("int", required=True), "ny": Param("int", required=True),
     "spacing": Param("number", default=1.0), "center": Param("vec3", default=(0.0, 0.0, 0.0)),
     "jitter": Param("number", default=0.0)},
    needs_from=False,
)
def create_point_grid(ctx, op):
    """``nx * ny`` points on an XY grid; ``jitter`` adds seeded in-plane noise."""
    nx, ny, s, j = op["nx"], op["ny"], op["spacing"], op["jitter"]
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    cx, cy, cz = op["center"]
    pts = []
    for iy in range(ny):
        for ix in range(nx):
            x = cx + (ix - (nx - 1) / 2.0) * s
            y = cy + (iy - (ny - 1) / 2.0) * s
            if j:
                x += ctx.draw("jx", -j, j)
                y += ctx.draw("jy", -j, j)
            pts.append(Point((x, y, cz)))
    ctx.write(op.outputs[0], pts)


# =========================================================================== Extend


def inset_polygon(surface: Surface, amount: float, extrude: float):
    """Offset every edge inward by ``amount`` and lift by ``extrude``.

    Returns ``(center, sides)``; ``sides[k]`` joins original edge ``k`` to
    its offset copy.
    """
    if amount < 0:
        raise DegenerateInsetError(f"inset amount must be >= 0, got {amount!r}")
    pts = surface.array()
    if not is_convex(pts):
        raise DegenerateInsetError("inset needs a convex polygon")
    n = unit_normal(pts)
    if not np.any(n):
        raise DegenerateInsetError("inset needs a polygon with non-zero area")
    d = np.roll(pts, -1, axis=0) - pts
    lengths = np.linalg.norm(d, axis=1)
    if np.any(lengths == 0.0):
        raise DegenerateInsetError("inset polygon has a zero-length edge")
    d = d / lengths[:, None]
    inward = np.cross(n, d)
    prev = np.roll(inward, 1, axis=0)
    bis = (prev + inward) / (1.0 + np.sum(prev * inward, axis=1))[:, None]
    inner = pts + amount * bis + extrude * n
    new_d = np.roll(inner, -1, axis=0) - inner
    if np.any(np.sum(new_d * d, axis=1) <= 1e-12 * lengths) and amount > 0:
        raise DegenerateInsetError(f"inset amount {amount!r} reaches the polygon's inradius")
    center = surface.map_points(lambda _: inner)
    sides = []
    k = len(pts)
    for i in range(k):
        j = (i + 1) % k
        quad = np.array([pts[i], pts[j], inner[j], inner[i]])
        sides.append(Surface.from_points(quad, surface.material, surface.uv_matrix))
    return center, sides


@operation(
    "inset", "Extend",
    {"amount": Param("number", required=True), "extrude": Param("number", default=0.0)},
    max_out=2,
)
def inset(ctx, op):
    """Centers go to ``out[0]``, edge quads to ``out[1]``."""
    prims = ctx.read(op.sources, op["keep"])
    o_center, o_sides = _outs(op, 2)
    centers, sides = [], []
    for p in prims:
        if not isinstance(p, Surface):
            continue
        c, s = inset_polygon(p, op["amount"], op["extrude"])
        centers.append(c)
        sides.extend(s)
    ctx.write(o_center, centers)
    ctx.write(o_sides, sides)


@operation("extrude", "Extend", {"distance": Param("number", required=True)}, max_out=2)
def extrude(ctx, op):
    """Prism along the surface normal: caps to ``out[0]``, walls to ``out[1]``."""
    prims = ctx.read(op.sources, op["keep"])
    o_cap, o_side = _outs(op, 2)
    caps, walls = [], []
    for p in prims:
        if not isinstance(p, Surface):
            continue
        pts = p.array()
        off = op["distance"] * p.normal()
        caps.append(p.map_points(lambda a: a + off))
        k = len(pts)
        for i in range(k):
            j = (i + 1) % k
            walls.append(Surface.from_points([pts[i], pts[j], pts[j] + off, pts[i] + off], p.material, p.uv_matrix))
    ctx.write(o_cap, caps)
    ctx.write(o_side, walls)


@operation("loft", "Extend", {"material": Param("string", default="default")})
def loft(ctx, op):
    """Skin paths from ``from[0]`` to the matching paths of ``from[1]`` with quads."""
    if len(op.sources) != 2:
        raise ValueError("loft reads exactly two groups")
    a = [p for p in ctx.read(op.sources[:1], op["keep"]) if isinstance(p, Path)]
    b = [p for p in ctx.read(op.sources[1:], op["keep"]) if isinstance(p, Path)]
    if len(a) != len(b):
        raise ValueError(f"loft needs equal path counts, got {len(a)} and {len(b)}")
    quads = []
    for pa, pb in zip(a, b):
        if len(pa.points) != len(pb.points):
            raise ValueError("lofted paths need equal point counts")
        m = len(pa.points)
        segs = m if pa.loop else m - 1
        for i in range(segs):
            j = (i + 1) % m
            quads.append(Surface.from_points([pa.points[i], pa.points[j], pb.points[j], pb.points[i]], op["material"]))
    ctx.write(op.outputs[0], quads)


@operation(
    "mirror", "Extend",
    {"axis": Param("string", default="x"), "offset": Param("number", default=0.0)},
    default_keep=True,
)
def mirror(ctx, op):
    """Reflected copies across the plane ``axis = offset`` (surface winding reversed)."""
    k = "xyz".index(op["axis"]) if op["axis"] in ("x", "y", "z") else None
    if k is None:
        raise ValueError(f"mirror axis must be x, y or z, got {op['axis']!r}")
    prims = ctx.read(op.sources, op["keep"])

    def fn(a):
        a = a.copy()
        a[:, k] = 2.0 * op["offset"] - a[:, k]
        return a

    out = []
    for p in prims:
        out.append(p.map_points(fn, reverse=True) if isinstance(p, Surface) else p.map_points(fn))
    ctx.write(op.outputs[0], out)


# =========================================================================== Modify


def _modify(ctx, op, fn, surf_fn=None):
    keep = op["keep"]
    outputs = list(op.outputs) or list(op.sources)
    if outputs == list(op.sources):
        # in place, group by group
        for name in op.sources:
            ctx.store[name] = [_apply(p, fn, surf_fn) for p in ctx.store.get(name, [])]
        return
    prims = ctx.read(op.sources, keep)
    ctx.write(outputs[0], [_apply(p, fn, surf_fn) for p in prims])


def _apply(p, fn, surf_fn):
    if isinstance(p, Surface) and surf_fn is not None:
        return surf_fn(p)
    if fn is None:
        return p
    return p.map_points(fn)


MODIFY = dict(needs_out=False)


@operation("translate", "Modify", {"offset": Param("vec3", required=True)}, **MODIFY)
def translate(ctx, op):
    off = np.asarray(op["offset"])
    _modify(ctx, op, lambda a: a + off)


@operation(
    "rotate", "Modify",
    {"axis": Param("vec3", default=(0.0, 0.0, 1.0)), "angle": Param("number", required=True),
     "pivot": Param("vec3", default=(0.0, 0.0, 0.0))},
    **MODIFY,
)
def rotate(ctx, op):
    """Right-handed rotation by ``angle`` radians about ``axis`` through ``pivot``."""
    if not np.any(op["axis"]):
        raise ValueError("rotation axis must be non-zero")
    r = quaternion_matrix3(axis_angle_quaternion(op["axis"], op["angle"]))
    piv = np.asarray(op["pivot"])
    _modify(ctx, op, lambda a: (a - piv) @ r + piv)


@operation(
    "scale", "Modify",
    {"factor": Param("vec3", required=True), "pivot": Param("vec3", default=(0.0, 0.0, 0.0))},
    **MODIFY,
)
def scale(ctx, op):
    f = np.asarray(op["factor"])
    if np.any(f == 0.0):
        raise ValueError("scale factors must be non-zero")
    piv = np.asarray(op["pivot"])
    flip = bool(np.prod(f) < 0)

    def surf(p):
        return p.map_points(lambda a: (a - piv) * f + piv, reverse=flip)

    _modify(ctx, op, lambda a: (a - piv) * f + piv, surf)


@operation("set_material", "Modify", {"material": Param("string", required=True)}, **MODIFY)
def set_material(ctx, op):
    from dataclasses import replace

    _modify(ctx, op, None, lambda s: replace(s, material=op["material"]))


@operation("set_uv", "Modify", {"matrix": Param("matrix23", required=True)}, **MODIFY)
def set_uv(ctx, op):
    """Replace each surface's 2x3 uv matrix (applied to plane-local ``[x, y, 1]``)."""
    from dataclasses import replace

    m = tuple(tuple(r) for r in op["matrix"])
    _modify(ctx, op, None, lambda s: replace(s, uv_matrix=m))


# =========================================================================== Select


def _partition(ctx, op, pred):
    prims = ctx.read(op.sources, keep=False)
    hit = [p for p in prims if pred(p)]
    miss = [p for p in prims if not pred(p)]
    ctx.write(op.outputs[0], hit)
    rest = op.outputs[1] if len(op.outputs) > 1 else op.sources[0]
    ctx.write(rest, miss)


SELECT = dict(max_out=2)


@operation(
    "filter_by_normal", "Select",
    {"direction": Param("vec3", required=True), "min_dot": Param("number", default=0.5)},
    **SELECT,
)
def filter_by_normal(ctx, op):
    """Surfaces whose unit normal has ``dot(n, direction) >= min_dot``."""
    d = np.asarray(op["direction"], dtype=np.float64)
    d = d / np.linalg.norm(d)
    _partition(ctx, op, lambda p: isinstance(p, Surface) and float(p.normal() @ d) >= op["min_dot"])


@operation(
    "filter_by_area", "Select",
    {"min": Param("number", default=0.0), "max": Param("number", default=math.inf)},
    **SELECT,
)
def filter_by_area(ctx, op):
    _partition(ctx, op, lambda p: isinstance(p, Surface) and op["min"] <= p.area() <= op["max"])


@operation(
    "split_by_index", "Select",
    {"indices": Param("list", default=None), "every": Param("int", default=None),
     "start": Param("int", default=0)},
    **SELECT,
)
def split_by_index(ctx, op):
    """Select by position in the concatenated source list: explicit ``indices``
    or every ``every``-th item from ``start``."""
    prims = ctx.read(op.sources, keep=False)
    if op["indices"] is not None:
        chosen = {int(i) % len(prims) for i in op["indices"]} if prims else set()
    elif op["every"]:
        chosen = set(range(op["start"], len(prims), op["every"]))
    else:
        raise ValueError("split_by_index needs 'indices' or 'every'")
    ctx.write(op.outputs[0], [p for i, p in enumerate(prims) if i in chosen])
    rest = op.outputs[1] if len(op.outputs) > 1 else op.sources[0]
    ctx.write(rest, [p for i, p in enumerate(prims) if i not in chosen])


@operation("group_rename", "Select")
def group_rename(ctx, op):
    ctx.write(op.outputs[0], ctx.read(op.sources, keep=False))


# =========================================================================== Utility
# Control ops receive an ``exec_ops(ctx, ops)`` callback through the context.

UTILITY = dict(needs_from=False, needs_out=False)


@operation("repeat", "Utility", {"count": Param("int", required=True), "ops": Param("ops", required=True)}, **UTILITY)
def repeat(ctx, op):
    if not 0 <= op["count"] <= 10_000:
        raise ValueError("repeat count must lie in 0..10000")
    for k in range(op["count"]):
        ctx.exec_ops(ctx, op["ops"], f"repeat[{k}]")


@operation(
    "if", "Utility",
    {"test": Param("cond", required=True), "then": Param("ops", default=()), "else": Param("ops", default=())},
    **UTILITY,
)
def if_(ctx, op):
    branch = "then" if evaluate_condition(ctx, op["test"]) else "else"
    ctx.exec_ops(ctx, op[branch], branch)


@operation("seed_fork", "Utility", {"salt": Param("string", default=""), "ops": Param("ops", required=True)}, **UTILITY)
def seed_fork(ctx, op):
    """Run ``ops`` with a seed derived from the current seed and ``salt``."""
    saved = ctx.seed, ctx.counter
    ctx.seed = child_seed(ctx.seed, ctx.counter, "fork:" + op["salt"])
    ctx.counter = 0
    try:
        ctx.exec_ops(ctx, op["ops"], "fork")
    finally:
        ctx.seed, ctx.counter = saved[0], saved[1] + 1


_CMP = {
    "==": lambda a, b: a == b, "!=": lambda a, b: a != b, "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b, ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}
CONDITION_KEYS = ("group_nonempty", "group_count", "chance", "not", "all", "any")


def validate_condition(c) -> None:
    if not isinstance(c, dict) or len(c) != 1:
        raise ValueError(f"condition must be a one-key object, got {c!r}")
    (key, val), = c.items()
    if key not in CONDITION_KEYS:
        raise ValueError(f"unknown condition {key!r}")
    if key == "group_nonempty" and not isinstance(val, str):
        raise ValueError("group_nonempty takes a group name")
    if key == "group_count":
        if not (isinstance(val, list) and len(val) == 3 and val[1] in _CMP):
            raise ValueError("group_count takes [group, comparator, number]")
    if key == "chance" and not (isinstance(val, (int, float)) and 0.0 <= val <= 1.0):
        raise ValueError("chance takes a probability in [0, 1]")
    if key == "not":
        validate_condition(val)
    if key in ("all", "any"):
        if not isinstance(val, list):
            raise ValueError(f"{key} takes a list of conditions")
        for sub in val:
            validate_condition(sub)


def evaluate_condition(ctx, c) -> bool:
    (key, val), = c.items()
    if key == "group_nonempty":
        return bool(ctx.store.get(val))
    if key == "group_count":
        name, cmp, k = val
        return _CMP[cmp](len(ctx.store.get(name, [])), k)
    if key == "chance":
        return ctx.draw("chance") < val
    if key == "not":
        return not evaluate_condition(ctx, val)
    if key == "all":
        return all(evaluate_condition(ctx, s) for s in val)
    return any(evaluate_condition(ctx, s) for s in val)
