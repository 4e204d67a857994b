import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scalefree.errors import CannotDetachError, LimitError, StructureError
from scalefree.scene import (
    Box,
    Component,
    Compound,
    Node,
    Sphere,
    attach,
    contains_point,
    detach,
    dumps,
    find_by_id,
    resolve_path,
    scene_from_json,
    scene_to_json,
)
from scalefree.universe import generate_tree


def small_world():
    w = Node("world_sol", 1e9, bounds=Sphere(1.0), id=1)
    s = attach(w, Node("star", 1e6, bounds=Sphere(1.0), id=2, position=(0.1, 0.0, 0.0)))
    attach(s, Node("planet", 1e3, bounds=Sphere(1.0), id=3, position=(0.5, 0.0, 0.0)))
    attach(s, Node("planet", 1e3, bounds=Box((1.0, 2.0, 1.0)), id=4, position=(-0.5, 0.0, 0.0)))
    return w


def test_world_node_properties():
    w = small_world()
    assert w.is_world and w.depth == 0
    p = find_by_id(w, 4)
    assert p.depth == 2 and p.world is w


def test_cycle_rejected():
    w = small_world()
    star = w.children[0]
    detach(star)
    with pytest.raises(StructureError):
        attach(star.children[0], star)


def test_second_parent_rejected():
    w = small_world()
    with pytest.raises(StructureError):
        attach(w, w.children[0].children[0])


def test_world_cannot_detach():
    with pytest.raises(CannotDetachError):
        detach(Node("w"))


def test_depth_limit():
    root = Node("w")
    cur = root
    for _ in range(5):
        cur = attach(cur, Node("n"), max_depth=5)
    with pytest.raises(LimitError):
        attach(cur, Node("n"), max_depth=5)


def test_child_limit():
    root = Node("w")
    for _ in range(3):
        attach(root, Node("n"), max_children=3)
    with pytest.raises(LimitError):
        attach(root, Node("n"), max_children=3)


def test_at_most_one_partition():
    from scalefree.errors import ComponentError
    from scalefree.partition import PartitionTree

    n = Node("g")
    n.add_component(Component("partition3d", PartitionTree(8, 2)))
    with pytest.raises(ComponentError):
        n.add_component(Component("partition2d", PartitionTree(4, 2)))


def test_bounds_shapes():
    assert Sphere(1.0).contains((0.6, 0.6, 0.5))
    assert not Sphere(1.0).contains((0.8, 0.8, 0.0))
    assert Box((1.0, 2.0, 1.0)).contains((1.0, -2.0, 0.0))
    c = Compound(((Sphere(0.5), (1.0, 0.0, 0.0)), (Box((0.1, 0.1, 0.1)), (0.0, 0.0, 0.0))))
    assert c.contains((1.4, 0.0, 0.0)) and c.contains((0.05, 0.0, 0.0))
    assert not c.contains((0.3, 0.0, 0.0))
    assert contains_point(None, (1e300, 0.0, 0.0))


def test_resolve_path():
    w = small_world()
    assert resolve_path(w, "/") is w
    assert resolve_path(w, "/0/1").id == 4
    assert resolve_path(w, "/star:0/planet:1").id == 4
    with pytest.raises(KeyError):
        resolve_path(w, "/0/7")


def test_snapshot_roundtrip_small():
    w = small_world()
    w.children[0].set_var("mass", 2.0)
    text = scene_to_json(w)
    assert scene_to_json(scene_from_json(text)) == text


def test_snapshot_roundtrip_generated():
    text = scene_to_json(generate_tree(9, 6))
    again = scene_to_json(scene_from_json(text))
    assert again == text
    json.loads(text)  # plain JSON


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_encoding_is_exact(x):
    assert json.loads(dumps([x]))[0] == x


def test_custom_var_types():
    n = Node("n")
    n.set_var("k", 3)
    n.set_var("v", (1.0, 2.0, 3.0))
    with pytest.raises((TypeError, ValueError)):
        n.set_var("bad", {"nested": 1})


def test_walk_is_preorder():
    w = small_world()
    assert [n.id for n in w.walk()] == [1, 2, 3, 4]
    assert w.subtree_size() == 4 and w.subtree_height() == 2


def test_placement_matches_fields():
    n = Node("n", position=(1.0, 2.0, 3.0))
    np.testing.assert_array_equal(n.placement().matrix()[3, :3], [1.0, 2.0, 3.0])
