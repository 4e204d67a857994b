"""Observer-driven quadtree / octree partitioning.

Cells are addressed by their path from the root: a tuple of child indices,
where bit ``k`` of an index selects the upper half along the k-th axis.
The tree keeps the set of split (interior) cells; the active cells are the
leaves. A cell splits when the observer comes closer than
``split_factor * edge`` and an existing split only collapses once the
observer is farther than ``merge_factor * edge``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CellPath = tuple


def path_to_str(path: CellPath) -> str:
    return "".join(str(i) for i in path)


def path_from_str(s: str) -> CellPath:
    return tuple(int(c) for c in s)


@dataclass
class PartitionTree:
    arity: int
    max_depth: int
    half_size: float = 1.0
    center: tuple = None
    split_factor: float = 1.5
    merge_factor: float = 2.0
    axes: tuple = None
    split: set = field(default_factory=set)

    def __post_init__(self):
        if self.arity not in (4, 8):
            raise ValueError(f"arity must be 4 or 8, got {self.arity!r}")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if not self.split_factor < self.merge_factor:
            raise ValueError("split_factor must be strictly below merge_factor (hysteresis)")
        if self.axes is None:
            self.axes = (0, 1) if self.arity == 4 else (0, 1, 2)
        self.axes = tuple(self.axes)
        if len(self.axes) != self.dims:
            raise ValueError(f"{self.dims} axes required, got {self.axes!r}")
        if self.center is None:
            self.center = (0.0,) * self.dims
        self.center = tuple(float(c) for c in self.center)
        self.split = {tuple(p) for p in self.split}

    @property
    def dims(self) -> int:
        return 2 if self.arity == 4 else 3

    # geometry -----------------------------------------------------------

    def edge(self, depth: int) -> float:
        return 2.0 * self.half_size / (1 << depth)

    def split_threshold(self, depth: int) -> float:
        return self.split_factor * self.edge(depth)

    def merge_threshold(self, depth: int) -> float:
        return self.merge_factor * self.edge(depth)

    def _box(self, path: CellPath):
        c = list(self.center)
        h = self.half_size
        dims = len(c)
        for idx in path:
            h *= 0.5
            for k in range(dims):
                c[k] += h if (idx >> k) & 1 else -h
        return c, h

    def cell_box(self, path: CellPath):
        """``(center, half_size)`` of a cell in the host frame's partition axes."""
        c, h = self._box(path)
        return np.array(c, dtype=np.float64), h

    def distance(self, path: CellPath, observer) -> float:
        """Euclidean distance from the observer to the nearest point of the cell."""
        return self._distance(path, self._project(observer))

    def _distance(self, path: CellPath, obs) -> float:
        # plain floats: this runs for every visited cell on every update
        if not all(math.isfinite(v) for v in obs):
            return math.inf
        c, h = self._box(path)
        acc = 0.0
        for o, ck in zip(obs, c):
            d = abs(o - ck) - h
            if d > 0.0:
                acc += d * d
        return math.sqrt(acc)

    def _project(self, observer) -> tuple:
        o = np.asarray(observer, dtype=np.float64).reshape(-1)
        if o.size != self.dims:
            o = o[list(self.axes)]
        return tuple(float(v) for v in o)

    # structure ----------------------------------------------------------

    def children(self, path: CellPath):
        return [path + (i,) for i in range(self.arity)]

    def leaves(self) -> list:
        return sorted(self._leaf_set(), key=_path_key)

    def _leaf_set(self) -> set:
        out = set()
        stack = [()]
        while stack:
            p = stack.pop()
            if p in self.split:
                stack.extend(self.children(p))
            else:
                out.add(p)
        return out

    def all_cells(self):
        """Every cell of the complete tree down to ``max_depth`` (brute force)."""
        level = [()]
        for _ in range(self.max_depth + 1):
            yield from level
            level = [c for p in level for c in self.children(p)]

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "max_depth": self.max_depth,
            "half_size": self.half_size,
            "center": list(self.center),
            "split_factor": self.split_factor,
            "merge_factor": self.merge_factor,
            "axes": list(self.axes),
            "split": [path_to_str(p) for p in sorted(self.split, key=_path_key)],
        }

    @classmethod
    def from_json(cls, d: dict) -> "PartitionTree":
        d = dict(d)
        d["split"] = {path_from_str(s) for s in d.get("split", [])}
        return cls(**d)


def _path_key(p: CellPath):
    return (len(p), p)


def partition_update(tree: PartitionTree, observer) -> tuple:
    """Refine/coarsen ``tree`` around ``observer``; returns ``(created, destroyed)`` leaf paths."""
    old_leaves = tree._leaf_set()
    obs = tree._project(observer)
    finite = all(math.isfinite(v) for v in obs)
    new_split, new_leaves = set(), set()
    # carry each cell's box down the walk; same arithmetic as cell_box
    stack = [((), list(tree.center), tree.half_size)]
    while stack:
        p, c, h = stack.pop()
        if len(p) >= tree.max_depth:
            new_leaves.add(p)
            continue
        d = math.inf
        if finite:
            acc = 0.0
            for o, ck in zip(obs, c):
                g = abs(o - ck) - h
                if g > 0.0:
                    acc += g * g
            d = math.sqrt(acc)
        edge = 2.0 * h
        keep = p in tree.split and d <= tree.merge_factor * edge
        if d < tree.split_factor * edge or keep:
            new_split.add(p)
            hc = 0.5 * h
            for i in range(tree.arity):
                stack.append((p + (i,), [ck + (hc if (i >> k) & 1 else -hc) for k, ck in enumerate(c)], hc))
        else:
            new_leaves.add(p)
    tree.split = new_split
    created = sorted(new_leaves - old_leaves, key=_path_key)
    destroyed = sorted(old_leaves - new_leaves, key=_path_key)
    return created, destroyed
