import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scalefree.errors import RecipeError
from scalefree.scene import Node, dumps, node_to_json, scene_to_json
from scalefree.universe import (
    LEVEL_TYPES,
    GenConfig,
    build_surface_patch,
    cell_from_index,
    face_cell_index,
    generate_level,
    generate_tree,
    make_world,
    sample_surface,
    sync_partition,
)


@pytest.fixture(scope="module")
def world6():
    return generate_tree(42, 6)


def planets(world):
    return [n for n in world.walk() if n.type_name == "planet"]


def test_level_types_follow_hierarchy():
    w = generate_tree(1, 8)
    for n in w.walk():
        assert n.type_name == LEVEL_TYPES[n.depth]


def test_sizes_span_many_orders():
    w = generate_tree(1, 8)
    sizes = [n.absolute_size for n in w.walk()]
    assert max(sizes) >= 1e20 and min(sizes) == 1.0


def test_generate_level_deterministic():
    a = make_world(5)
    b = make_world(5)
    ka, kb = generate_level(a), generate_level(b)
    assert [dumps(node_to_json(n)) for n in ka] == [dumps(node_to_json(n)) for n in kb]


def test_unknown_type_has_no_recipe():
    with pytest.raises(RecipeError):
        generate_level(Node("teapot"))


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(planets_per_star=(3, 1))
    with pytest.raises(ValueError):
        GenConfig(octaves=0)
    with pytest.raises(ValueError):
        GenConfig.from_json({"unknown": 1})
    cfg = GenConfig.from_json({"planets_per_star": [2, 2]})
    assert cfg.planets_per_star == (2, 2)


def test_orbits_valid_and_inside_star_bounds():
    cfg = GenConfig(planets_per_star=(1, 6))
    for seed in range(1000):
        star = Node("star", 1e13, seed=seed)
        star.set_var("mass", 1.0)
        for p in generate_level(star, cfg):
            o = p.component("orbit").payload
            assert 0.0 <= o.e < 1.0
            assert o.b == pytest.approx(o.a * math.sqrt(1 - o.e * o.e), rel=1e-15)
            assert np.linalg.norm(p.position) + o.a * (1 + o.e) <= 1.0


def test_stars_inside_system_bounds(world6):
    for n in world6.walk():
        if n.parent is not None and n.type_name != "planet_surface_node":
            extent = n.absolute_size / n.parent.absolute_size
            assert np.linalg.norm(n.position) + extent <= 1.0 + 1e-12, n.type_name


def test_subtree_regeneration_is_local(world6):
    for node in [world6.children[0], planets(world6)[0]]:
        depth_left = 6 - node.depth
        fresh = Node(node.type_name, node.absolute_size, seed=node.seed, id=node.id,
                     bounds=node.bounds, position=node.position, rotation=node.rotation,
                     components=node.components, custom_vars=dict(node.custom_vars))
        generate_tree(0, depth_left, root=fresh)
        assert scene_to_json(fresh) == scene_to_json(_detached_copy(node))


def _detached_copy(node):
    from scalefree.scene import node_from_json

    return node_from_json(node_to_json(node))


def test_octree_collapse_and_reexpand_is_identical():
    w = generate_tree(11, 3)
    gal = next(n for n in w.walk() if n.type_name == "galaxy")
    first = dumps(node_to_json(gal))
    obs = np.array([0.2, -0.1, 0.05])
    created, destroyed = sync_partition(gal, obs)
    assert created and destroyed == [()]
    expanded = dumps(node_to_json(gal))
    sync_partition(gal, obs * 1e3)
    assert dumps(node_to_json(gal)) == first
    sync_partition(gal, obs)
    assert dumps(node_to_json(gal)) == expanded


def test_systems_lie_in_their_cells():
    from scalefree.partition import path_from_str

    w = generate_tree(11, 3)
    gal = next(n for n in w.walk() if n.type_name == "galaxy")
    sync_partition(gal, np.zeros(3))
    tree = gal.partition().payload
    for s in gal.children:
        c, h = tree.cell_box(path_from_str(s.custom_vars["cell"]))
        assert np.all(np.abs(s.position - c) <= h + 1e-15)


def test_sample_surface_deterministic_and_clamped():
    cfg = GenConfig()
    a = sample_surface(3, 0.3, -2.0, cfg)
    assert a == sample_surface(3, 0.3, -2.0, cfg)
    assert abs(a.height) <= cfg.height_amplitude
    assert 0.0 <= a.temperature <= 1.0 and 0.0 <= a.moisture <= 1.0


def test_single_octave_amplitude_bound():
    cfg = GenConfig(octaves=1, height_amplitude=500.0)
    rng = np.random.default_rng(0)
    for lat, lon in zip(rng.uniform(-math.pi / 2, math.pi / 2, 2000), rng.uniform(-math.pi, math.pi, 2000)):
        assert abs(sample_surface(8, lat, lon, cfg).height) <= 500.0


@settings(max_examples=50)
@given(st.floats(-1.5, 1.5))
def test_dateline_continuity(lat):
    cfg = GenConfig()
    d = 1e-6
    h1 = sample_surface(4, lat, math.pi - d, cfg).height
    h2 = sample_surface(4, lat, -math.pi + d, cfg).height
    assert abs(h1 - h2) < 1e-3 * 2 * cfg.height_amplitude


def test_poles_have_no_longitude_dependence():
    cfg = GenConfig()
    hs = {sample_surface(4, math.pi / 2, lon, cfg).height for lon in np.linspace(-3, 3, 7)}
    assert max(hs) - min(hs) < 1e-6


def test_patch_resolution_one_has_two_triangles(world6):
    m = build_surface_patch(planets(world6)[0], (0, ()), 1)
    assert len(m.triangles) == 2 and len(m.vertices) == 4


def test_patch_rejects_bad_resolution(world6):
    with pytest.raises(ValueError):
        build_surface_patch(planets(world6)[0], (0, ()), 0)


def test_zero_amplitude_is_a_sphere(world6):
    p = planets(world6)[0]
    m = build_surface_patch(p, (2, (1, 3)), 6, GenConfig(height_amplitude=0.0))
    r = np.linalg.norm(np.array(m.vertices), axis=1)
    np.testing.assert_allclose(r, p.custom_vars["radius_m"], rtol=1e-9)


def test_cell_index_roundtrip():
    for path in [(), (0,), (3, 1), (2, 2, 1, 0)]:
        ix, iy = face_cell_index(path)
        assert cell_from_index(len(path), ix, iy) == path


def test_adjacent_cells_share_edges(world6):
    p = planets(world6)[0]
    res = 4
    a = np.array(build_surface_patch(p, (1, cell_from_index(3, 2, 5)), res).vertices).reshape(res + 1, res + 1, 3)
    b = np.array(build_surface_patch(p, (1, cell_from_index(3, 3, 5)), res).vertices).reshape(res + 1, res + 1, 3)
    assert a[:, -1].tobytes() == b[:, 0].tobytes()


def test_faces_meet_without_cracks(world6):
    from collections import Counter

    p = planets(world6)[0]
    count = Counter()
    for f in range(6):
        for v in build_surface_patch(p, (f, ()), 5).vertices:
            count[v] += 1
    # 8 cube corners shared by 3 faces, 12 edges x 4 interior points by 2
    assert Counter(count.values()) == Counter({1: 6 * 16, 2: 12 * 4, 3: 8})


def test_patch_faces_point_outward(world6):
    p = planets(world6)[0]
    for f in range(6):
        m = build_surface_patch(p, (f, (0,)), 2)
        v = np.array(m.vertices)
        for a, b, c in m.triangles:
            assert np.cross(v[b] - v[a], v[c] - v[a]) @ v[a] > 0
