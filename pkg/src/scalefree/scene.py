"""Scene graph: bounded, sized, seeded nodes forming one tree per world.

A node's ``position``/``rotation``/``scale`` place it inside its parent (in
parent units); ``absolute_size`` says how many meters one local unit spans.
A node without a parent is a world node.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Union

import numpy as np

from .errors import CannotDetachError, ComponentError, LimitError, StructureError
from .seeding import MASK64, child_seed  # noqa: F401  (re-exported)
from .transform import MAX_NESTING, Placement, normalize_quaternion, vec3

MAX_CHILDREN = 4096

_auto_ids = itertools.count(1)


# --------------------------------------------------------------------------- bounds


@dataclass(frozen=True)
class Sphere:
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"sphere radius must be > 0, got {self.radius!r}")

    def contains(self, p) -> bool:
        x, y, z = (float(c) for c in p)
        return x * x + y * y + z * z <= self.radius * self.radius


@dataclass(frozen=True)
class Box:
    half_extents: tuple

    def __post_init__(self):
        if len(self.half_extents) != 3 or any(not h > 0.0 for h in self.half_extents):
            raise ValueError(f"box half-extents must all be > 0, got {self.half_extents!r}")

    def contains(self, p) -> bool:
        return all(abs(float(c)) <= h for c, h in zip(p, self.half_extents))


@dataclass(frozen=True)
class Compound:
    """Union of member shapes, each shifted by an offset."""

    members: tuple  # of (shape, offset) pairs

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return any(shape.contains(p - np.asarray(off)) for shape, off in self.members)


Bounds = Union[Sphere, Box, Compound]


def contains_point(bounds: Optional[Bounds], p) -> bool:
    """Point-in-shape test in the bounds' own node units.

    A node without bounds contains everything.
    """
    if bounds is None:
        return True
    return bounds.contains(p)


def bounds_to_json(b: Optional[Bounds]):
    if b is None:
        return None
    if isinstance(b, Sphere):
        return {"shape": "sphere", "radius": b.radius}
    if isinstance(b, Box):
        return {"shape": "box", "half_extents": list(b.half_extents)}
    return {
        "shape": "compound",
        "members": [{"bounds": bounds_to_json(s), "offset": list(o)} for s, o in b.members],
    }


def bounds_from_json(d) -> Optional[Bounds]:
    if d is None:
        return None
    shape = d["shape"]
    if shape == "sphere":
        return Sphere(float(d["radius"]))
    if shape == "box":
        return Box(tuple(float(h) for h in d["half_extents"]))
    if shape == "compound":
        return Compound(
            tuple((bounds_from_json(m["bounds"]), tuple(float(c) for c in m["offset"])) for m in d["members"])
        )
    raise ValueError(f"unknown bounds shape {shape!r}")


# --------------------------------------------------------------------------- components

COMPONENT_KINDS = ("orbit", "partition2d", "partition3d", "procedural", "surface-mod", "custom")
PARTITION_KINDS = ("partition2d", "partition3d")


@dataclass
class Component:
    """Tagged parameter record attached to a node.

    Behaviour lives in the owning systems (orbital update, horizon system,
    generators), which dispatch on ``kind``.
    """

    kind: str
    payload: Any = None

    def __post_init__(self):
        if self.kind not in COMPONENT_KINDS:
            raise ComponentError(f"unknown component kind {self.kind!r}")

    def to_json(self) -> dict:
        payload = self.payload.to_json() if hasattr(self.payload, "to_json") else self.payload
        return {"kind": self.kind, "payload": payload}

    @classmethod
    def from_json(cls, d: dict) -> "Component":
        kind = d["kind"]
        payload = d.get("payload")
        if kind == "orbit":
            from .orbit import OrbitParams

            payload = OrbitParams.from_json(payload)
        elif kind in PARTITION_KINDS:
            from .partition import PartitionTree

            payload = PartitionTree.from_json(payload)
        return cls(kind, payload)


# --------------------------------------------------------------------------- nodes

CUSTOM_VAR_TYPES = (bool, int, float, str)


class Node:
    """One element of a world tree."""

    def __init__(
        self,
        type_name: str,
        absolute_size: float = 1.0,
        *,
        bounds: Optional[Bounds] = None,
        position=(0.0, 0.0, 0.0),
        rotation=(0.0, 0.0, 0.0, 1.0),
        scale=(1.0, 1.0, 1.0),
        seed: int = 0,
        id: Optional[int] = None,
        components=(),
        custom_vars: Optional[dict] = None,
        velocity=(0.0, 0.0, 0.0),
        angular_velocity=(0.0, 0.0, 0.0),
        transferable: bool = False,
    ):
        if not (absolute_size > 0.0 and math.isfinite(absolute_size)):
            raise ValueError(f"absolute_size must be finite and > 0, got {absolute_size!r}")
        self.id = next(_auto_ids) if id is None else int(id) & MASK64
        self.type_name = type_name
        self.absolute_size = float(absolute_size)
        self.bounds = bounds
        self.position = vec3(position)
        self.rotation = normalize_quaternion(rotation)
        self.scale = vec3(scale)
        self.seed = int(seed) & MASK64
        self.parent: Optional[Node] = None
        self.children: list[Node] = []
        self.components: list[Component] = []
        self.custom_vars: dict = {}
        self.velocity = vec3(velocity)
        self.angular_velocity = vec3(angular_velocity)
        self.transferable = bool(transferable)
        for c in components:
            self.add_component(c)
        for k, v in (custom_vars or {}).items():
            self.set_var(k, v)

    def __repr__(self) -> str:
        return f"Node({self.type_name!r}, id={self.id})"

    # placement ---------------------------------------------------------

    def placement(self) -> Placement:
        return Placement(tuple(self.scale), tuple(self.rotation), tuple(self.position))

    @property
    def depth(self) -> int:
        d = 0
        cur = self.parent
        while cur is not None:
            d += 1
            cur = cur.parent
        return d

    @property
    def world(self) -> "Node":
        cur = self
        while cur.parent is not None:
            cur = cur.parent
        return cur

    def is_world(self) -> bool:
        return self.parent is None

    # components & vars -------------------------------------------------

    def add_component(self, comp: Component) -> Component:
        if comp.kind in PARTITION_KINDS and self.partition() is not None:
            raise ComponentError(f"{self!r} already has a partition component")
        self.components.append(comp)
        return comp

    def component(self, kind: str) -> Optional[Component]:
        for c in self.components:
            if c.kind == kind:
                return c
        return None

    def partition(self) -> Optional[Component]:
        for c in self.components:
            if c.kind in PARTITION_KINDS:
                return c
        return None

    def set_var(self, key: str, value) -> None:
        if isinstance(value, (tuple, list, np.ndarray)):
            value = tuple(float(c) for c in vec3(value))
        elif not isinstance(value, CUSTOM_VAR_TYPES):
            raise TypeError(f"custom var {key!r}: unsupported type {type(value).__name__}")
        self.custom_vars[key] = value

    # traversal ---------------------------------------------------------

    def walk(self) -> Iterator["Node"]:
        """Pre-order, children in insertion order."""
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def subtree_size(self) -> int:
        return sum(1 for _ in self.walk())

    def subtree_height(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.subtree_height() for c in self.children)

    def ancestors(self) -> Iterator["Node"]:
        cur = self.parent
        while cur is not None:
            yield cur
            cur = cur.parent


def attach(parent: Node, child: Node, *, max_depth: int = MAX_NESTING, max_children: int = MAX_CHILDREN) -> Node:
    """Append ``child`` (which must be parentless) to ``parent``."""
    if child.parent is not None:
        raise StructureError(f"{child!r} already has a parent")
    if child is parent or any(a is child for a in parent.ancestors()):
        raise StructureError(f"attaching {child!r} under {parent!r} would create a cycle")
    if len(parent.children) >= max_children:
        raise LimitError(f"{parent!r} already holds {max_children} children")
    if parent.depth + 1 + child.subtree_height() > max_depth:
        raise LimitError(f"attaching {child!r} would exceed nesting depth {max_depth}")
    child.parent = parent
    parent.children.append(child)
    return child


def detach(node: Node) -> Node:
    """Remove ``node`` (and its subtree) from its parent."""
    if node.parent is None:
        raise CannotDetachError(f"{node!r} is a world node")
    node.parent.children.remove(node)
    node.parent = None
    return node


def find_by_id(root: Node, node_id: int) -> Optional[Node]:
    for n in root.walk():
        if n.id == node_id:
            return n
    return None


def resolve_path(world: Node, path: str) -> Node:
    """Resolve ``/0/2/starsystem:1``-style paths.

    Each segment is a child index, or ``type:k`` for the k-th child of that
    type. ``/`` alone is the world node.
    """
    cur = world
    for seg in (s for s in path.strip().split("/") if s):
        if ":" in seg:
            type_name, _, idx = seg.rpartition(":")
            pool = [c for c in cur.children if c.type_name == type_name]
        else:
            idx, pool = seg, cur.children
        try:
            k = int(idx)
            cur = pool[k]
        except (ValueError, IndexError):
            raise KeyError(f"path segment {seg!r} does not resolve under {cur!r}") from None
    return cur


# --------------------------------------------------------------------------- snapshot


def node_to_json(node: Node) -> dict:
    return {
        "id": node.id,
        "type": node.type_name,
        "size": node.absolute_size,
        "seed": node.seed,
        "position": [float(c) for c in node.position],
        "rotation": [float(c) for c in node.rotation],
        "scale": [float(c) for c in node.scale],
        "bounds": bounds_to_json(node.bounds),
        "components": [c.to_json() for c in node.components],
        "custom_vars": {k: list(v) if isinstance(v, tuple) else v for k, v in node.custom_vars.items()},
        "transferable": node.transferable,
        "velocity": [float(c) for c in node.velocity],
        "angular_velocity": [float(c) for c in node.angular_velocity],
        "children": [node_to_json(c) for c in node.children],
    }


def node_from_json(d: dict) -> Node:
    n = Node(
        d["type"],
        float(d["size"]),
        id=int(d["id"]),
        seed=int(d.get("seed", 0)),
        bounds=bounds_from_json(d.get("bounds")),
        position=d.get("position", (0.0, 0.0, 0.0)),
        rotation=d.get("rotation", (0.0, 0.0, 0.0, 1.0)),
        scale=d.get("scale", (1.0, 1.0, 1.0)),
        components=[Component.from_json(c) for c in d.get("components", [])],
        custom_vars=d.get("custom_vars") or {},
        velocity=d.get("velocity", (0.0, 0.0, 0.0)),
        angular_velocity=d.get("angular_velocity", (0.0, 0.0, 0.0)),
        transferable=d.get("transferable", False),
    )
    # Bypass attach(): snapshots come from valid trees and may be wide.
    for cd in d.get("children", []):
        child = node_from_json(cd)
        child.parent = n
        n.children.append(child)
    return n


def _encode(obj, indent: str, step: str) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite float in snapshot")
        return f"{obj:.17g}" if obj != int(obj) or abs(obj) >= 1e16 else f"{obj:.1f}"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    inner = indent + step
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, inner, step)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + indent + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_encode(x, inner, step) for x in obj) + "]"
        return "[\n" + ",\n".join(inner + _encode(x, inner, step) for x in obj) + "\n" + indent + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    """JSON text with every float written at 17 significant digits."""
    return _encode(obj, "", " " * indent) + "\n"


def scene_to_json(world: Node) -> str:
    return dumps(node_to_json(world))


def scene_from_json(text: str) -> Node:
    return node_from_json(json.loads(text))
