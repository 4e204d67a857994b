"""Triangulation of surface groups and OBJ export."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TriangulationError
from .primitives import Surface, is_convex, to_plane


@dataclass
class TriangleMesh:
    vertices: list = field(default_factory=list)   # (x, y, z)
    uvs: list = field(default_factory=list)        # (u, v), one per vertex
    triangles: list = field(default_factory=list)  # (i, j, k) vertex indices
    materials: list = field(default_factory=list)  # material per triangle

    def area(self) -> float:
        v = np.asarray(self.vertices, dtype=np.float64)
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(t) == 0:
            return 0.0
        cr = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        return float(0.5 * np.linalg.norm(cr, axis=1).sum())


def _segments_cross(p1, p2, q1, q2) -> bool:
    """Proper or touching intersection of two closed 2D segments."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 and d2 and d3 and d4:
        return True
    return (
        (d1 == 0 and on_seg(q1, q2, p1)) or (d2 == 0 and on_seg(q1, q2, p2))
        or (d3 == 0 and on_seg(p1, p2, q1)) or (d4 == 0 and on_seg(p1, p2, q2))
    )


def is_simple(poly2d: np.ndarray) -> bool:
    n = len(poly2d)
    for i in range(n):
        a1, a2 = poly2d[i], poly2d[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_cross(a1, a2, poly2d[j], poly2d[(j + 1) % n]):
                return False
    return True


def ear_clip(poly2d: np.ndarray) -> list:
    """Triangulate a simple counter-clockwise polygon; returns index triples."""
    idx = list(range(len(poly2d)))
    tris = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * len(poly2d) ** 2:
            raise TriangulationError("ear clipping made no progress")
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            a, b, c = poly2d[i0], poly2d[i1], poly2d[i2]
            if cross(a, b, c) <= 0.0:
                continue
            inside = False
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                p = poly2d[j]
                if cross(a, b, p) >= 0 and cross(b, c, p) >= 0 and cross(c, a, p) >= 0:
                    inside = True
                    break
            if not inside:
                tris.append((i0, i1, i2))
                del idx[k]
                break
        else:
            raise TriangulationError("no ear found (degenerate polygon)")
    tris.append(tuple(idx))
    return tris


def triangulate_surface(s: Surface, name: str = "surface") -> list:
    """Local index triples for one surface, wound like the surface itself."""
    pts = s.array()
    n = len(pts)
    if is_convex(pts):
        return [(0, k, k + 1) for k in range(1, n - 1)]
    poly = to_plane(pts)
    if not is_simple(poly):
        raise TriangulationError(f"{name} has a self-intersecting edge loop")
    return ear_clip(poly)


def surface_uvs(s: Surface) -> np.ndarray:
    pts = s.array()
    plane = to_plane(pts)
    homog = np.concatenate([plane, np.ones((len(pts), 1))], axis=1)
    return homog @ np.asarray(s.uv_matrix).T


def emit_mesh(store: dict, groups=None) -> TriangleMesh:
    """Triangulate the surfaces of ``groups`` (default: every group, sorted)."""
    names = sorted(store) if groups is None else list(groups)
    mesh = TriangleMesh()
    for g in names:
        for k, prim in enumerate(store.get(g, [])):
            if not isinstance(prim, Surface):
                if groups is None:
                    continue
                raise TriangulationError(f"group {g!r} item {k} is not a surface")
            base = len(mesh.vertices)
            tris = triangulate_surface(prim, f"{g}[{k}]")
            mesh.vertices.extend(tuple(float(c) for c in row) for row in prim.array())
            mesh.uvs.extend(tuple(float(c) for c in row) for row in surface_uvs(prim))
            for t in tris:
                mesh.triangles.append(tuple(base + i for i in t))
                mesh.materials.append(prim.material)
    return mesh


def write_obj(mesh: TriangleMesh, fh) -> None:
    """``v``/``vt``/``f`` records with one ``usemtl`` block per material."""
    fh.write("# scalefree procedural mesh\n")
    for v in mesh.vertices:
        fh.write(f"v {v[0]!r} {v[1]!r} {v[2]!r}\n")
    for uv in mesh.uvs:
        fh.write(f"vt {uv[0]!r} {uv[1]!r}\n")
    order = list(dict.fromkeys(mesh.materials))
    for mat in order:
        fh.write(f"usemtl {mat}\n")
        for t, m in zip(mesh.triangles, mesh.materials):
            if m == mat:
                a, b, c = (i + 1 for i in t)
                fh.write(f"f {a}/{a} {b}/{b} {c}/{c}\n")

