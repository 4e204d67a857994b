import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scalefree.partition import PartitionTree, partition_update, path_from_str, path_to_str


def brute_leaves(tree, observer):
    """Leaves of the split set grown from scratch (no hysteresis history)."""
    out = []

    def rec(p):
        if len(p) < tree.max_depth and tree.distance(p, observer) < tree.split_threshold(len(p)):
            for c in tree.children(p):
                rec(c)
        else:
            out.append(p)

    rec(())
    return sorted(out)


def test_far_observer_keeps_root():
    t = PartitionTree(8, 4)
    created, destroyed = partition_update(t, (100.0, 0.0, 0.0))
    assert created == [] and destroyed == []
    assert t.leaves() == [()]


def test_leaves_tile_the_domain():
    t = PartitionTree(4, 5)
    partition_update(t, (0.1, 0.3))
    area = sum((2 * t.cell_box(p)[1]) ** 2 for p in t.leaves())
    assert area == pytest.approx(4.0)


def test_fresh_update_matches_brute_force():
    t = PartitionTree(8, 4)
    obs = (0.2, -0.4, 0.7)
    partition_update(t, obs)
    assert sorted(t.leaves()) == brute_leaves(t, obs)


@settings(max_examples=40)
@given(st.tuples(*[st.floats(-3, 3)] * 3))
def test_static_observer_is_stable(obs):
    t = PartitionTree(8, 3)
    partition_update(t, obs)
    for _ in range(100):
        assert partition_update(t, obs) == ([], [])


def test_hysteresis_band_keeps_split():
    t = PartitionTree(4, 1)
    edge = t.edge(0)
    # split: root box distance below 1.5 edges
    partition_update(t, (0.0, 0.0))
    assert () in t.split
    # between 1.5 and 2.0 edges away: no new split, but existing split kept
    obs = (1.0 + 1.75 * edge, 0.0)
    assert partition_update(t, obs) == ([], [])
    fresh = PartitionTree(4, 1)
    partition_update(fresh, obs)
    assert () not in fresh.split
    # beyond the merge threshold the split goes away
    created, destroyed = partition_update(t, (1.0 + 2.5 * edge, 0.0))
    assert created == [()] and len(destroyed) == 4


def test_oscillating_observer_between_thresholds():
    t = PartitionTree(8, 3)
    partition_update(t, (0.0, 0.0, 0.0))
    edge = t.edge(0)
    changes = [partition_update(t, (1.0 + f * edge, 0.0, 0.0)) for f in (1.6, 1.9, 1.6, 1.9)]
    assert all(c[0] == [] or c == changes[0] for c in changes[1:])


def test_child_order_and_boxes():
    t = PartitionTree(4, 2)
    kids = t.children(())
    assert kids == [(0,), (1,), (2,), (3,)]
    c1, h = t.cell_box((1,))
    np.testing.assert_array_equal(c1, [0.5, -0.5])
    assert h == 0.5


def test_path_text_roundtrip():
    for p in [(), (0,), (3, 1, 7)]:
        assert path_from_str(path_to_str(p)) == p


def test_json_roundtrip():
    t = PartitionTree(8, 3)
    partition_update(t, (0.1, 0.1, 0.1))
    back = PartitionTree.from_json(t.to_json())
    assert back.split == t.split and back.leaves() == t.leaves()


def test_all_cells_count():
    t = PartitionTree(4, 2)
    assert len(list(t.all_cells())) == 1 + 4 + 16


def test_invalid_config():
    with pytest.raises(ValueError):
        PartitionTree(6, 2)
    with pytest.raises(ValueError):
        PartitionTree(4, 2, split_factor=2.0, merge_factor=1.5)


def test_nonfinite_observer_collapses():
    t = PartitionTree(4, 3)
    partition_update(t, (0.0, 0.0))
    created, destroyed = partition_update(t, (float("nan"), 0.0))
    assert created == [()] and destroyed
