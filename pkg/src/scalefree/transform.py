"""Transform algebra for arbitrary-scale hierarchies.

Row-vector convention throughout: a point ``v`` (as ``[x, y, z, 1]``) maps
through a matrix as ``v @ M`` and the translation lives in the bottom row.
Products read left to right in application order.

A node stores its placement (scale, rotation, position) in parent units and
its absolute size in meters per unit. Relative transforms are accumulated only
along the sub-chains that meet at the common ancestor of two nodes, so no
product ever sees coordinates larger than the common ancestor's extent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    InvalidRotationError,
    InvalidScaleError,
    LevelOutOfRangeError,
    NoCommonAncestorError,
)

MAX_NESTING = 64
# |1 - |q|^2| tolerated before a quaternion is rejected outright.
QUAT_RENORM_TOL = 1e-6

IDENTITY_QUAT = np.array([0.0, 0.0, 0.0, 1.0])


def vec3(v: Sequence[float]) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite vector component in {v!r}")
    return a


def normalize_quaternion(q: Sequence[float]) -> np.ndarray:
    """Return ``q`` as a unit (x, y, z, w) array.

    Quaternions within ``QUAT_RENORM_TOL`` of unit norm are renormalised;
    anything further away is rejected. Values already unit to rounding
    precision pass through unchanged, which keeps reloads bit-stable.
    """
    a = np.asarray(q, dtype=np.float64).reshape(4)
    if not np.all(np.isfinite(a)):
        raise InvalidRotationError(f"non-finite quaternion {q!r}")
    n2 = float(a @ a)
    if abs(1.0 - n2) > QUAT_RENORM_TOL:
        raise InvalidRotationError(f"quaternion {q!r} is not unit (|q|^2 = {n2!r})")
    if abs(1.0 - n2) > 8.0 * np.finfo(np.float64).eps:
        a = a / math.sqrt(n2)
    return a


def quaternion_matrix3(q: Sequence[float]) -> np.ndarray:
    """3x3 rotation block for unit quaternion ``q = (x, y, z, w)``."""
    x, y, z, w = (float(c) for c in q)
    return np.array(
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y + z * w), 2.0 * (z * x - y * w)],
            [2.0 * (x * y - z * w), 1.0 - 2.0 * (z * z + x * x), 2.0 * (y * z + x * w)],
            [2.0 * (z * x + y * w), 2.0 * (y * z - x * w), 1.0 - 2.0 * (y * y + x * x)],
        ]
    )


def matrix3_quaternion(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`quaternion_matrix3` for a proper rotation block.

    Returns the representative with ``w >= 0``.
    """
    # Transpose to the column-vector layout, where the textbook extraction applies.
    r = np.asarray(m, dtype=np.float64).T
    tr = r[0, 0] + r[1, 1] + r[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = [(r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s, 0.25 * s]
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = [0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s, (r[2, 1] - r[1, 2]) / s]
    elif r[1, 1] > r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = [(r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s, (r[0, 2] - r[2, 0]) / s]
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = [(r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s, (r[1, 0] - r[0, 1]) / s]
    q = np.array(q)
    q /= np.linalg.norm(q)
    return -q if q[3] < 0 else q


def quaternion_multiply(a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    """Hamilton product ``a * b`` on (x, y, z, w) arrays."""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return np.array(
        [
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        ]
    )


def axis_angle_quaternion(axis: Sequence[float], angle: float) -> np.ndarray:
    ax = np.asarray(axis, dtype=np.float64)
    ax = ax / np.linalg.norm(ax)
    s = math.sin(angle / 2.0)
    return np.array([ax[0] * s, ax[1] * s, ax[2] * s, math.cos(angle / 2.0)])


def scale_matrix(s: Sequence[float]) -> np.ndarray:
    m = np.eye(4)
    m[0, 0], m[1, 1], m[2, 2] = s
    return m


def rotation_matrix(q: Sequence[float]) -> np.ndarray:
    m = np.eye(4)
    m[:3, :3] = quaternion_matrix3(q)
    return m


def translation_matrix(p: Sequence[float]) -> np.ndarray:
    m = np.eye(4)
    m[3, :3] = p
    return m


def _check_scale(scale) -> np.ndarray:
    s = np.asarray(scale, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(s)) or np.any(s <= 0.0):
        raise InvalidScaleError(f"scale components must be finite and > 0, got {scale!r}")
    return s


def compose_world_matrix(scale, rotation, position) -> np.ndarray:
    """``W = scale(S) @ rotation(R) @ translation(P)``."""
    s = _check_scale(scale)
    q = normalize_quaternion(rotation)
    p = vec3(position)
    return scale_matrix(s) @ rotation_matrix(q) @ translation_matrix(p)


@dataclass(frozen=True)
class Placement:
    """Scale, rotation and position of a node inside its parent."""

    scale: tuple = (1.0, 1.0, 1.0)
    rotation: tuple = (0.0, 0.0, 0.0, 1.0)
    position: tuple = (0.0, 0.0, 0.0)

    def matrix(self) -> np.ndarray:
        return compose_world_matrix(self.scale, self.rotation, self.position)

    def inverse_matrix(self) -> np.ndarray:
        # (S R T)^-1 = T^-1 R^T S^-1
        s = _check_scale(self.scale)
        q = normalize_quaternion(self.rotation)
        p = vec3(self.position)
        return translation_matrix(-p) @ rotation_matrix(q).T @ scale_matrix(1.0 / s)


@dataclass(frozen=True)
class TransformChain:
    """Sizes and placements from a node (level 0) up to some ancestor.

    ``sizes[i]`` is the absolute size (m/unit) of the level-i node and
    ``placements[i - 1]`` places the level-(i-1) node inside level i, so
    ``len(sizes) == len(placements) + 1``. ``len(chain)`` is the number of
    steps, i.e. the highest valid level.
    """

    sizes: tuple
    placements: tuple

    def __post_init__(self):
        if len(self.sizes) != len(self.placements) + 1:
            raise ValueError("a chain needs exactly one more size than placements")
        if any(not (s > 0.0 and math.isfinite(s)) for s in self.sizes):
            raise InvalidScaleError(f"absolute sizes must be finite and > 0: {self.sizes!r}")
        if len(self.placements) > MAX_NESTING:
            raise LevelOutOfRangeError(
                f"chain of {len(self.placements)} steps exceeds nesting limit {MAX_NESTING}"
            )

    def __len__(self) -> int:
        return len(self.placements)


def _ratio(r: float) -> np.ndarray:
    return scale_matrix((r, r, r))


def _check_level(chain: TransformChain, level: int) -> None:
    if not 0 <= level <= len(chain):
        raise LevelOutOfRangeError(f"level {level} outside 0..{len(chain)}")


def hierarchical_matrix(chain: TransformChain, level: int) -> np.ndarray:
    """``H_i = H_{i-1} @ (S_{i-1}/S_i) @ W_i`` with ``H_0 = Id``.

    ``H_level`` maps level-0 local coordinates into level-``level`` units.
    The size ratio converts child units to parent units and is applied as
    ``diag(r, r, r, 1)`` in front of ``W_i``, so it touches the 3x3 block of
    ``W_i`` but not its translation row (positions are already in parent
    units).
    """
    _check_level(chain, level)
    h = np.eye(4)
    for i in range(1, level + 1):
        r = chain.sizes[i - 1] / chain.sizes[i]
        h = h @ _ratio(r) @ chain.placements[i - 1].matrix()
    return h


def hierarchical_matrix_inverse(chain: TransformChain, level: int) -> np.ndarray:
    """Closed-form inverse of :func:`hierarchical_matrix`."""
    _check_level(chain, level)
    h = np.eye(4)
    for i in range(1, level + 1):
        r = chain.sizes[i - 1] / chain.sizes[i]
        h = chain.placements[i - 1].inverse_matrix() @ _ratio(1.0 / r) @ h
    return h


# --- node-level helpers; nodes are duck-typed (parent, absolute_size, placement) ---


def root_path(node) -> list:
    """``[node, parent, ..., world]``."""
    path = []
    cur = node
    while cur is not None:
        path.append(cur)
        if len(path) > MAX_NESTING + 1:
            raise LevelOutOfRangeError("root path exceeds the nesting limit (cycle?)")
        cur = cur.parent
    return path


def find_common_ancestor(a, b):
    """Deepest node on both root paths, with the distance of each argument to it."""
    path_a = root_path(a)
    index_b = {id(n): d for d, n in enumerate(root_path(b))}
    for depth_a, n in enumerate(path_a):
        depth_b = index_b.get(id(n))
        if depth_b is not None:
            return n, depth_a, depth_b
    raise NoCommonAncestorError("nodes belong to different world trees")


def chain_to_ancestor(node, steps: int) -> TransformChain:
    """Transform chain from ``node`` up ``steps`` levels."""
    sizes = [node.absolute_size]
    placements = []
    cur = node
    for _ in range(steps):
        placements.append(cur.placement())
        cur = cur.parent
        sizes.append(cur.absolute_size)
    return TransformChain(tuple(sizes), tuple(placements))


def local_world_matrix(current, target) -> np.ndarray:
    """Matrix mapping ``target``-local coordinates into ``current``'s frame.

    Both chains stop at the closest common ancestor ``T``:
    ``LW = H_target @ inv(H_current)`` with each ``H`` rooted at ``T``.
    """
    _, d_cur, d_tgt = find_common_ancestor(current, target)
    h_tgt = hierarchical_matrix(chain_to_ancestor(target, d_tgt), d_tgt)
    h_cur_inv = hierarchical_matrix_inverse(chain_to_ancestor(current, d_cur), d_cur)
    return h_tgt @ h_cur_inv


def transform_point(p, m: np.ndarray) -> np.ndarray:
    return np.append(np.asarray(p, dtype=np.float64), 1.0) @ m[:, :3]


def transform_vector(v, m: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=np.float64) @ m[:3, :3]


def rotation_to_ancestor(node, steps: int) -> np.ndarray:
    """Pure rotation (no scale) of ``node``'s axes expressed ``steps`` levels up."""
    r = np.eye(3)
    cur = node
    for _ in range(steps):
        r = r @ quaternion_matrix3(cur.rotation)
        cur = cur.parent
    return r


def relative_rotation(current, target) -> np.ndarray:
    """Rotation block taking ``target`` axes to ``current`` axes."""
    _, d_cur, d_tgt = find_common_ancestor(current, target)
    return rotation_to_ancestor(target, d_tgt) @ rotation_to_ancestor(current, d_cur).T


def format_matrix(m: np.ndarray) -> str:
    """Row-major dump, one row per line, 17 significant digits."""
    return "\n".join(" ".join(f"{float(x):.17g}" for x in row) for row in m)
