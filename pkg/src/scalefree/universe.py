"""Seeded generation of the default world hierarchy and planet surfaces.

Levels: world_sol > spacecluster > galaxy > starsystem > star > planet >
planet_surface > planet_surface_node > camera. Every node is a pure function
of its own seed (and, for partition-driven children, the cell path), so any
subtree can be regenerated from its root seed alone.

Galaxies host an octree whose leaf cells own the star systems; each
planet_surface_node is one cube-sphere face and hosts a quadtree over the
face's ``[-1, 1]^2`` parameter square.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import RecipeError
from .noise import fbm
from .orbit import G_SI, OrbitParams, orbital_position
from .partition import PartitionTree, partition_update, path_to_str
from .procgen.mesh import TriangleMesh
from .scene import Box, Component, Node, Sphere, attach, detach
from .seeding import child_seed, derive, log_uniform, randint, uniform, unit_vector

LEVEL_TYPES = (
    "world_sol", "spacecluster", "galaxy", "starsystem", "star",
    "planet", "planet_surface", "planet_surface_node", "camera",
)
MAX_GEN_DEPTH = len(LEVEL_TYPES) - 1


@dataclass
class GenConfig:
    # children per parent, inclusive ranges
    clusters_per_world: tuple = (1, 3)
    galaxies_per_cluster: tuple = (1, 3)
    systems_per_cell: tuple = (2, 4)
    stars_per_system: tuple = (1, 2)
    planets_per_star: tuple = (1, 4)
    # meters per node unit
    world_size: float = 4.4e26
    cluster_size: tuple = (3e22, 1e23)
    galaxy_size: tuple = (3e20, 1e21)
    system_size: tuple = (1e15, 5e15)
    star_size: tuple = (1e13, 5e13)
    planet_radius: tuple = (2e6, 7e7)
    camera_size: float = 1.0
    camera_altitude: float = 2.0
    # orbits: a in star units, masses in solar masses
    planet_a: tuple = (0.05, 0.3)
    planet_e: tuple = (0.0, 0.3)
    planet_inclination: tuple = (0.0, 0.2)
    star_mass: tuple = (0.3, 3.0)
    planet_mass: tuple = (1e-7, 1e-3)
    gravity: float = G_SI
    # partitions
    galaxy_octree_depth: int = 3
    surface_quadtree_depth: int = 10
    # surface noise
    octaves: int = 6
    lacunarity: float = 2.0
    gain: float = 0.5
    base_frequency: float = 2.0
    height_amplitude: float = 8000.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = tuple(v)
                setattr(self, f.name, v)
            if isinstance(v, tuple) and not v[0] <= v[1]:
                raise ValueError(f"{f.name}: empty range {v!r}")
        if self.octaves < 1:
            raise ValueError("octaves must be >= 1")
        if self.planet_e[1] >= 1.0 or self.planet_e[0] < 0.0:
            raise ValueError("planet_e must lie inside [0, 1)")
        if self.planet_a[1] * (2.0 + self.planet_e[1]) > 1.0:
            raise ValueError("largest planet orbit would leave its star's bounds")

    @classmethod
    def from_json(cls, d: dict) -> "GenConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown GenConfig key(s): {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "GenConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))

    def to_json(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------- helpers


def _random_quaternion(seed: int, tag: str) -> tuple:
    u1, u2, u3 = (uniform(seed, tag, counter=k) for k in range(3))
    a, b = math.sqrt(1.0 - u1), math.sqrt(u1)
    return (
        a * math.sin(2 * math.pi * u2),
        a * math.cos(2 * math.pi * u2),
        b * math.sin(2 * math.pi * u3),
        b * math.cos(2 * math.pi * u3),
    )


def _in_ball(seed: int, tag: str, max_radius: float) -> tuple:
    d = unit_vector(seed, tag + ":dir")
    r = max_radius * uniform(seed, tag + ":r") ** (1.0 / 3.0)
    return tuple(r * c for c in d)


def _count(seed: int, tag: str, rng: tuple) -> int:
    return randint(seed, tag, int(rng[0]), int(rng[1]))


def _quat_from_y(d) -> tuple:
    """Rotation taking local +Y onto unit direction ``d``."""
    d = np.asarray(d, dtype=np.float64)
    c = float(d[1])
    axis = np.array([d[2], 0.0, -d[0]])  # Y x d
    s = float(np.linalg.norm(axis))
    if s < 1e-15:
        return (0.0, 0.0, 0.0, 1.0) if c > 0 else (1.0, 0.0, 0.0, 0.0)
    axis /= s
    half = 0.5 * math.atan2(s, c)
    sh = math.sin(half)
    return (axis[0] * sh, axis[1] * sh, axis[2] * sh, math.cos(half))


def _sphere_node(type_name, seed, size, position, **kw) -> Node:
    return Node(type_name, size, bounds=Sphere(1.0), seed=seed, id=seed, position=position, **kw)


# --------------------------------------------------------------------------- recipes

RECIPES = {}


def recipe(type_name):
    def deco(fn):
        RECIPES[type_name] = fn
        return fn

    return deco


def make_world(seed: int, config: GenConfig | None = None) -> Node:
    config = config or GenConfig()
    return _sphere_node("world_sol", seed, config.world_size, (0.0, 0.0, 0.0))


def _placed_children(parent, type_name, n, size_range, max_frac, extra=None):
    out = []
    for k in range(n):
        s = child_seed(parent.seed, k, type_name)
        size = log_uniform(s, "size", *size_range)
        extent = size / parent.absolute_size
        pos = _in_ball(s, "pos", max(0.0, max_frac - extent))
        node = _sphere_node(type_name, s, size, pos, rotation=_random_quaternion(s, "rot"))
        if extra:
            extra(node)
        out.append(node)
    return out


@recipe("world_sol")
def _world_children(parent, config, cell=None):
    n = _count(parent.seed, "clusters", config.clusters_per_world)
    return _placed_children(parent, "spacecluster", n, config.cluster_size, 0.9)


@recipe("spacecluster")
def _cluster_children(parent, config, cell=None):
    n = _count(parent.seed, "galaxies", config.galaxies_per_cluster)

    def add_octree(g):
        g.add_component(Component("partition3d", PartitionTree(8, config.galaxy_octree_depth)))

    return _placed_children(parent, "galaxy", n, config.galaxy_size, 0.9, add_octree)


def cell_seed(parent_seed: int, path: tuple) -> int:
    s = parent_seed
    for idx in path:
        s = child_seed(s, idx, "cell")
    return s


@recipe("galaxy")
def _galaxy_children(parent, config, cell=()):
    """Star systems owned by one octree cell, placed inside the cell box."""
    tree = parent.partition().payload
    center, half = tree.cell_box(cell)
    cs = cell_seed(parent.seed, cell)
    n = _count(cs, "systems", config.systems_per_cell)
    out = []
    for k in range(n):
        s = child_seed(cs, k, "starsystem")
        size = log_uniform(s, "size", *config.system_size)
        extent = size / parent.absolute_size
        limit = 0.9 - extent
        # cells beyond the galaxy body stay empty; failed samples are dropped
        near = np.maximum(np.abs(center) - half, 0.0)
        if float(near @ near) > limit * limit:
            continue
        pos = None
        for attempt in range(16):
            p = center + half * np.array([uniform(s, "pos", -1.0, 1.0, 3 * attempt + j) for j in range(3)])
            if np.linalg.norm(p) <= limit:
                pos = p
                break
        if pos is None:
            continue
        node = _sphere_node("starsystem", s, size, tuple(float(c) for c in pos))
        node.set_var("cell", path_to_str(cell))
        out.append(node)
    return out


@recipe("starsystem")
def _system_children(parent, config, cell=None):
    n = _count(parent.seed, "stars", config.stars_per_system)

    def star_props(st):
        st.set_var("mass", log_uniform(st.seed, "mass", *config.star_mass))
        t = uniform(st.seed, "color")
        st.set_var("color", (1.0, 0.6 + 0.4 * t, 0.3 + 0.7 * t))

    return _placed_children(parent, "star", n, config.star_size, 0.05, star_props)


@recipe("star")
def _star_children(parent, config, cell=None):
    n = _count(parent.seed, "planets", config.planets_per_star)
    star_mass = parent.custom_vars.get("mass", 1.0)
    out = []
    for k in range(n):
        s = child_seed(parent.seed, k, "planet")
        radius = log_uniform(s, "radius", *config.planet_radius)
        params = OrbitParams.from_elements(
            uniform(s, "a", *config.planet_a),
            uniform(s, "e", *config.planet_e),
            p=uniform(s, "p", 0.0, 2 * math.pi),
            i=uniform(s, "i", *config.planet_inclination),
            l=uniform(s, "l", 0.0, 2 * math.pi),
            m_node=log_uniform(s, "mass", *config.planet_mass),
            m_parent=star_mass,
            G=config.gravity,
        )
        pos = orbital_position(params, 0.0)
        # Node extent covers the planet plus near space; bounds radius 1 = 2 R.
        node = _sphere_node("planet", s, 2.0 * radius, tuple(float(c) for c in pos))
        node.set_var("radius_m", radius)
        node.add_component(Component("orbit", params))
        out.append(node)
    return out


@recipe("planet")
def _planet_children(parent, config, cell=None):
    s = child_seed(parent.seed, 0, "planet_surface")
    radius = parent.custom_vars["radius_m"]
    size = radius + 2.0 * config.height_amplitude
    node = _sphere_node("planet_surface", s, size, (0.0, 0.0, 0.0))
    node.set_var("radius_m", radius)
    node.add_component(Component("surface-mod", {"height_amplitude": config.height_amplitude}))
    return [node]


@recipe("planet_surface")
def _surface_children(parent, config, cell=None):
    """One node per cube face, sitting on the terrain at the face centre."""
    radius = parent.custom_vars["radius_m"]
    height_seed = parent.parent.seed if parent.parent is not None else parent.seed
    out = []
    for face in range(6):
        s = child_seed(parent.seed, face, "planet_surface_node")
        d = face_point(face, 0.0, 0.0)
        h = float(surface_heights(height_seed, d[None, :], config)[0])
        pos = d * (radius + h) / parent.absolute_size
        node = Node(
            "planet_surface_node", radius, bounds=Box((1.0, 1.0, 1.0)), seed=s, id=s,
            position=tuple(float(c) for c in pos), rotation=_quat_from_y(d),
        )
        node.set_var("face", face)
        node.add_component(Component("partition2d", PartitionTree(4, config.surface_quadtree_depth)))
        out.append(node)
    return out


@recipe("planet_surface_node")
def _surface_node_children(parent, config, cell=None):
    s = child_seed(parent.seed, 0, "camera")
    cam = _sphere_node("camera", s, config.camera_size, (0.0, config.camera_altitude / parent.absolute_size, 0.0))
    cam.transferable = True
    return [cam]


def generate_level(parent: Node, config: GenConfig | None = None, cell=None) -> list:
    """Create and attach the children of ``parent``.

    Partition hosts generate for ``cell`` (default: every active leaf).
    """
    config = config or GenConfig()
    fn = RECIPES.get(parent.type_name)
    if fn is None:
        raise RecipeError(f"no generation recipe for node type {parent.type_name!r}")
    part = parent.partition() if parent.type_name == "galaxy" else None
    if part is not None:
        cells = [cell] if cell is not None else part.payload.leaves()
        kids = [k for c in cells for k in fn(parent, config, c)]
    else:
        kids = fn(parent, config)
    for k in kids:
        attach(parent, k)
    return kids


def generate_tree(seed: int, depth: int, config: GenConfig | None = None, root: Node | None = None) -> Node:
    """Expand levels breadth-first down to ``depth`` below the root."""
    config = config or GenConfig()
    if not 0 <= depth <= MAX_GEN_DEPTH:
        raise ValueError(f"depth must lie in 0..{MAX_GEN_DEPTH}")
    world = root if root is not None else make_world(seed, config)
    frontier = [world]
    for _ in range(depth):
        nxt = []
        for n in frontier:
            if n.type_name in RECIPES:
                nxt.extend(generate_level(n, config))
        frontier = nxt
    return world


def sync_partition(host: Node, observer_local, config: GenConfig | None = None) -> tuple:
    """Update the host's partition and (re)generate children for changed cells.

    Only galaxies own cell-bound children; other hosts just update the tree.
    """
    config = config or GenConfig()
    comp = host.partition()
    created, destroyed = partition_update(comp.payload, observer_local)
    if host.type_name == "galaxy":
        gone = {path_to_str(c) for c in destroyed}
        for child in list(host.children):
            if child.custom_vars.get("cell") in gone:
                detach(child)
        for c in created:
            generate_level(host, config, cell=c)
    return created, destroyed


# --------------------------------------------------------------------------- surfaces

# (normal, u direction, v direction) per cube face, with u x v = normal so
# every face winds counter-clockwise seen from outside.
_FACES = (
    ((1, 0, 0), (0, 0, -1), (0, 1, 0)),
    ((-1, 0, 0), (0, 0, 1), (0, 1, 0)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    ((0, -1, 0), (1, 0, 0), (0, 0, 1)),
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((0, 0, -1), (-1, 0, 0), (0, 1, 0)),
)


def face_point(face: int, u, v) -> np.ndarray:
    """Unit direction for face-parameter ``(u, v)`` in ``[-1, 1]^2``.

    Each cube coordinate is exactly one of ``+-1``, ``+-u`` or ``+-v``, so
    faces meeting at an edge produce identical points there.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nrm, ud, vd = (np.array(x, dtype=np.float64) for x in _FACES[face])
    p = nrm + u[..., None] * ud + v[..., None] * vd
    n = np.sqrt(p[..., 0] * p[..., 0] + p[..., 1] * p[..., 1] + p[..., 2] * p[..., 2])
    return p / n[..., None]


def surface_heights(planet_seed: int, dirs: np.ndarray, config: GenConfig) -> np.ndarray:
    hs = child_seed(planet_seed, 0, "height-noise") & 0xFFFFFFFF
    return config.height_amplitude * fbm(
        hs, dirs, config.octaves, config.lacunarity, config.gain, config.base_frequency
    )


@dataclass(frozen=True)
class SurfaceSample:
    height: float
    temperature: float
    moisture: float


def latlon_direction(lat: float, lon: float) -> np.ndarray:
    return np.array([math.cos(lat) * math.cos(lon), math.sin(lat), math.cos(lat) * math.sin(lon)])


def sample_surface(planet_seed: int, lat: float, lon: float, config: GenConfig | None = None) -> SurfaceSample:
    config = config or GenConfig()
    d = latlon_direction(lat, lon)[None, :]
    h = float(surface_heights(planet_seed, d, config)[0])
    ms = child_seed(planet_seed, 0, "moisture-noise") & 0xFFFFFFFF
    moist = float(fbm(ms, d, 3, 2.0, 0.5, config.base_frequency)[0])
    rel = h / config.height_amplitude if config.height_amplitude > 0 else 0.0
    temp = 1.0 - abs(lat) / (0.5 * math.pi) - 0.3 * max(rel, 0.0)
    return SurfaceSample(h, min(max(temp, 0.0), 1.0), min(max(0.5 + 0.5 * moist, 0.0), 1.0))


def face_cell_index(path: tuple) -> tuple:
    """Integer ``(ix, iy)`` of a quadtree cell at its depth (bit 0 = u, bit 1 = v)."""
    ix = iy = 0
    for idx in path:
        ix = 2 * ix + (idx & 1)
        iy = 2 * iy + ((idx >> 1) & 1)
    return ix, iy


def cell_from_index(depth: int, ix: int, iy: int) -> tuple:
    path = []
    for level in range(depth - 1, -1, -1):
        path.append(((ix >> level) & 1) | (((iy >> level) & 1) << 1))
    return tuple(path)


def build_surface_patch(planet: Node, cell, resolution: int, config: GenConfig | None = None) -> TriangleMesh:
    """Triangulated ``(resolution + 1)^2`` vertex grid over one face cell.

    ``cell`` is ``(face, path)``. Vertices are planet-centred, in meters.
    Grid coordinates are built from global integer indices, so neighbouring
    cells at equal depth produce bit-identical shared edge vertices.
    """
    config = config or GenConfig()
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    face, path = cell
    radius = planet.custom_vars["radius_m"]
    ix, iy = face_cell_index(path)
    n = (1 << len(path)) * resolution
    k = np.arange(resolution + 1)
    gu = (2 * (ix * resolution + k) - n) / n
    gv = (2 * (iy * resolution + k) - n) / n
    uu, vv = np.meshgrid(gu, gv)  # rows follow v
    dirs = face_point(face, uu, vv)
    h = surface_heights(planet.seed, dirs.reshape(-1, 3), config).reshape(uu.shape)
    verts = dirs * (radius + h)[..., None]
    mesh = TriangleMesh()
    mesh.vertices = [tuple(float(c) for c in p) for p in verts.reshape(-1, 3)]
    mesh.uvs = [(float(a), float(b)) for a, b in zip(((uu + 1) / 2).ravel(), ((vv + 1) / 2).ravel())]
    row = resolution + 1
    for j in range(resolution):
        for i in range(resolution):
            a = j * row + i
            b, c, d = a + 1, a + row + 1, a + row
            mesh.triangles += [(a, b, c), (a, c, d)]
            mesh.materials += ["terrain", "terrain"]
    return mesh
