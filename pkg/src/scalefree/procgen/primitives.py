"""Points, paths and surfaces, plus the polygon geometry the ops share."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

IDENTITY_UV = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
PLANARITY_TOL = 1e-6


def _pt(p) -> tuple:
    t = tuple(float(c) for c in p)
    if len(t) != 3 or not all(math.isfinite(c) for c in t):
        raise ValueError(f"bad point {p!r}")
    return t


@dataclass(frozen=True)
class Point:
    position: tuple

    def __post_init__(self):
        object.__setattr__(self, "position", _pt(self.position))

    def map_points(self, fn) -> "Point":
        return Point(fn(np.array([self.position]))[0])


@dataclass(frozen=True)
class Path:
    points: tuple
    loop: bool = False

    def __post_init__(self):
        pts = tuple(_pt(p) for p in self.points)
        if len(pts) < 2:
            raise ValueError("a path needs at least 2 points")
        object.__setattr__(self, "points", pts)

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.float64)

    def map_points(self, fn) -> "Path":
        return Path(tuple(map(tuple, fn(self.array()))), self.loop)


@dataclass(frozen=True)
class Surface:
    edge: Path
    material: str = "default"
    uv_matrix: tuple = IDENTITY_UV

    def __post_init__(self):
        if not isinstance(self.edge, Path):
            object.__setattr__(self, "edge", Path(tuple(self.edge), True))
        if len(self.edge.points) < 3 or not self.edge.loop:
            raise ValueError("a surface edge needs >= 3 points and loop = true")
        uv = tuple(tuple(float(c) for c in row) for row in self.uv_matrix)
        if len(uv) != 2 or any(len(r) != 3 for r in uv):
            raise ValueError("uv_matrix must be 2x3")
        object.__setattr__(self, "uv_matrix", uv)
        pts = self.edge.array()
        n = newell_normal(pts)
        nn = np.linalg.norm(n)
        if nn > 0.0:
            off = np.abs((pts - pts.mean(axis=0)) @ (n / nn))
            if off.max() > PLANARITY_TOL * max(diameter(pts), 1e-300):
                raise ValueError("surface edge is not planar")

    @classmethod
    def from_points(cls, pts, material="default", uv_matrix=IDENTITY_UV) -> "Surface":
        return cls(Path(tuple(map(tuple, np.asarray(pts, dtype=np.float64))), True), material, uv_matrix)

    def array(self) -> np.ndarray:
        return self.edge.array()

    def map_points(self, fn, reverse: bool = False) -> "Surface":
        pts = fn(self.array())
        if reverse:
            pts = pts[::-1]
        return replace(self, edge=Path(tuple(map(tuple, pts)), True))

    def normal(self) -> np.ndarray:
        return unit_normal(self.array())

    def area(self) -> float:
        return polygon_area(self.array())


# --------------------------------------------------------------------------- geometry


def newell_normal(pts: np.ndarray) -> np.ndarray:
    """Area-weighted normal (length = 2 * area) of a closed polygon."""
    nxt = np.roll(pts, -1, axis=0)
    return np.array(
        [
            np.sum((pts[:, 1] - nxt[:, 1]) * (pts[:, 2] + nxt[:, 2])),
            np.sum((pts[:, 2] - nxt[:, 2]) * (pts[:, 0] + nxt[:, 0])),
            np.sum((pts[:, 0] - nxt[:, 0]) * (pts[:, 1] + nxt[:, 1])),
        ]
    )


def unit_normal(pts: np.ndarray) -> np.ndarray:
    n = newell_normal(pts)
    nn = np.linalg.norm(n)
    if nn == 0.0:
        return np.zeros(3)
    return n / nn


def polygon_area(pts: np.ndarray) -> float:
    return 0.5 * float(np.linalg.norm(newell_normal(pts)))


def diameter(pts: np.ndarray) -> float:
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((d * d).sum(axis=-1)).max())


def plane_frame(pts: np.ndarray):
    """``(origin, u, v, n)``: origin at the first vertex, ``u`` along the first
    non-degenerate edge, ``v = n x u``."""
    n = unit_normal(pts)
    origin = pts[0]
    u = None
    for k in range(1, len(pts)):
        d = pts[k] - origin
        d = d - (d @ n) * n
        if np.linalg.norm(d) > 0.0:
            u = d / np.linalg.norm(d)
            break
    if u is None or not np.any(n):
        return origin, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    return origin, u, np.cross(n, u), n


def to_plane(pts: np.ndarray):
    origin, u, v, _ = plane_frame(pts)
    rel = pts - origin
    return np.stack([rel @ u, rel @ v], axis=1)


def is_convex(pts: np.ndarray, tol: float = 1e-12) -> bool:
    """No reflex turn relative to the polygon's own normal.

    Zero-area loops (a bowtie, collinear points) have no normal and are
    never convex.
    """
    n = unit_normal(pts)
    if not np.any(n):
        return False
    d = np.roll(pts, -1, axis=0) - pts
    turns = np.cross(np.roll(d, 1, axis=0), d) @ n
    scale = max(diameter(pts), 1e-300) ** 2
    return bool(np.all(turns >= -tol * scale))


# --------------------------------------------------------------------------- store

GroupStore = dict  # name -> list of primitives


def primitive_to_json(p) -> dict:
    if isinstance(p, Point):
        return {"point": list(p.position)}
    if isinstance(p, Path):
        return {"path": [list(q) for q in p.points], "loop": p.loop}
    return {
        "surface": [list(q) for q in p.edge.points],
        "material": p.material,
        "uv": [list(r) for r in p.uv_matrix],
    }


def primitive_from_json(d: dict):
    if "point" in d:
        return Point(tuple(d["point"]))
    if "path" in d:
        return Path(tuple(map(tuple, d["path"])), bool(d.get("loop", False)))
    return Surface(
        Path(tuple(map(tuple, d["surface"])), True),
        d.get("material", "default"),
        tuple(map(tuple, d.get("uv", IDENTITY_UV))),
    )


def store_to_json(store: GroupStore) -> str:
    """Canonical text form (sorted groups, 17-digit floats) for replay checks."""
    from ..scene import dumps

    return dumps({k: [primitive_to_json(p) for p in store[k]] for k in sorted(store)})


def store_from_json(text: str) -> GroupStore:
    import json

    return {k: [primitive_from_json(p) for p in v] for k, v in json.loads(text).items()}
