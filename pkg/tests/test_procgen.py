import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from programs import random_program_text
from scalefree.errors import DegenerateInsetError, OpError, ProgramSyntaxError, ProgramValidationError
from scalefree.procgen import (
    REGISTRY,
    Surface,
    emit_mesh,
    inset_polygon,
    parse_program,
    run_program,
    store_from_json,
    store_to_json,
    write_obj,
)

INSET_PROGRAM = [
    {"type": "create_rect", "out": "bt_base"},
    {"type": "inset", "from": "bt_base", "out": ["bt_base", "bt_sides"], "extrude": 0.4, "amount": 0.25},
]


def run(ops, seed=0, initial=None):
    return run_program(parse_program(json.dumps(ops)), seed, initial)


def test_inset_square_analytic():
    store = run(INSET_PROGRAM)
    (center,) = store["bt_base"]
    expect = [[-0.25, -0.25, 0.4], [0.25, -0.25, 0.4], [0.25, 0.25, 0.4], [-0.25, 0.25, 0.4]]
    np.testing.assert_allclose(center.array(), expect, atol=1e-12)
    assert len(store["bt_sides"]) == 4
    side0 = store["bt_sides"][0].array()
    np.testing.assert_allclose(side0, [[-0.5, -0.5, 0], [0.5, -0.5, 0], [0.25, -0.25, 0.4], [-0.25, -0.25, 0.4]],
                               atol=1e-12)


def test_inset_reaching_inradius_is_degenerate():
    sq = Surface.from_points([[-0.5, -0.5, 0], [0.5, -0.5, 0], [0.5, 0.5, 0], [-0.5, 0.5, 0]])
    with pytest.raises(DegenerateInsetError):
        inset_polygon(sq, 0.5, 0.4)
    with pytest.raises(OpError) as info:
        run([{"type": "create_rect", "out": "b"}, {"type": "inset", "from": "b", "out": ["b", "s"], "amount": 0.5}])
    assert info.value.index == 1
    assert len(info.value.store["b"]) == 1  # state before the failing op


@settings(max_examples=50)
@given(st.integers(3, 12), st.floats(0.0, 0.8), st.floats(-1, 1))
def test_inset_regular_polygon_offsets_edges(sides, frac, lift):
    r = 1.0
    ang = np.arange(sides) * 2 * math.pi / sides
    poly = Surface.from_points(np.c_[r * np.cos(ang), r * np.sin(ang), np.zeros(sides)])
    inradius = r * math.cos(math.pi / sides)
    amount = frac * inradius
    center, _ = inset_polygon(poly, amount, lift)
    pts = center.array()
    # every inner edge sits exactly `amount` closer to the centre
    mids = (pts + np.roll(pts, -1, axis=0)) / 2
    np.testing.assert_allclose(np.linalg.norm(mids[:, :2], axis=1), inradius - amount, atol=1e-9)
    np.testing.assert_allclose(pts[:, 2], lift, atol=1e-12)


def test_inset_rejects_concave():
    l_shape = Surface.from_points([[0, 0, 0], [2, 0, 0], [2, 1, 0], [1, 1, 0], [1, 2, 0], [0, 2, 0]])
    with pytest.raises(DegenerateInsetError):
        inset_polygon(l_shape, 0.1, 0.0)


def test_mesh_triangle_count_for_inset_example():
    mesh = emit_mesh(run(INSET_PROGRAM))
    assert len(mesh.triangles) == 10  # 2 for the centre + 2 per side quad
    assert mesh.area() == pytest.approx(0.25 + 4 * 0.5 * (1.0 + 0.5) * math.hypot(0.25, 0.4))


def test_obj_output():
    buf = io.StringIO()
    write_obj(emit_mesh(run(INSET_PROGRAM)), buf)
    lines = buf.getvalue().splitlines()
    assert sum(line.startswith("v ") for line in lines) == 20
    assert sum(line.startswith("vt ") for line in lines) == 20
    assert sum(line.startswith("f ") for line in lines) == 10
    assert lines.count("usemtl default") == 1


def test_from_group_is_consumed_unless_kept():
    s = run([{"type": "create_rect", "out": "a"}, {"type": "extrude", "from": "a", "out": ["c", "w"], "distance": 1}])
    assert s["a"] == [] and len(s["c"]) == 1 and len(s["w"]) == 4
    s = run([{"type": "create_rect", "out": "a"},
             {"type": "extrude", "from": "a", "out": ["c", "w"], "distance": 1, "keep": True}])
    assert len(s["a"]) == 1


def test_modify_in_place_and_mirror_keeps_source():
    s = run([{"type": "create_rect", "out": "a"}, {"type": "translate", "from": "a", "offset": [1, 0, 0]},
             {"type": "mirror", "from": "a", "out": "m", "axis": "x"}])
    np.testing.assert_allclose(s["a"][0].array()[:, 0].mean(), 1.0)
    np.testing.assert_allclose(s["m"][0].array()[:, 0].mean(), -1.0)
    # reflected surface keeps an outward (+z) normal thanks to reversed winding
    np.testing.assert_allclose(s["m"][0].normal(), [0, 0, 1], atol=1e-15)


def test_select_conserves_primitives():
    s = run([{"type": "create_rect", "out": "a"},
             {"type": "extrude", "from": "a", "out": ["a", "a"], "distance": 1},
             {"type": "filter_by_normal", "from": "a", "out": ["up", "rest"], "direction": [0, 0, 1]}])
    assert len(s["up"]) == 1 and len(s["rest"]) == 4 and s["a"] == []


def test_missing_group_reads_empty():
    s = run([{"type": "translate", "from": "nothing", "offset": [1, 1, 1]}])
    assert s.get("nothing", []) == []


def test_conditions_and_repeat():
    s = run([{"type": "repeat", "count": 3, "ops": [{"type": "create_rect", "out": "r"}]},
             {"type": "if", "test": {"group_count": ["r", ">=", 3]},
              "then": [{"type": "create_ngon", "out": "yes", "sides": 5}]}])
    assert len(s["r"]) == 3 and len(s["yes"]) == 1


def test_seeded_ops_depend_on_seed_only():
    ops = [{"type": "create_point_grid", "out": "p", "nx": 3, "ny": 3, "jitter": 0.2}]
    a, b, c = run(ops, 1), run(ops, 1), run(ops, 2)
    assert store_to_json(a) == store_to_json(b) != store_to_json(c)


def test_syntax_error_location():
    with pytest.raises(ProgramSyntaxError) as info:
        parse_program('[\n {"type": "create_rect",, }\n]')
    assert info.value.line == 2


@pytest.mark.parametrize(
    "doc, index",
    [
        ('[{"type": "nope"}]', 0),
        ('[{"type": "create_rect", "out": "a"}, {"type": "inset", "from": "a", "out": "b"}]', 1),
        ('[{"type": "create_rect", "out": "a", "colour": 3}]', 0),
        ('[{"type": "extrude", "out": "a", "distance": 1}]', 0),
    ],
)
def test_validation_errors_name_op(doc, index):
    with pytest.raises(ProgramValidationError) as info:
        parse_program(doc)
    assert info.value.index == index


def test_lone_object_is_one_op_program():
    assert len(parse_program('{"type": "create_rect", "out": "a"}')) == 1


def test_initial_store_not_mutated():
    init = run([{"type": "create_rect", "out": "a"}])
    snap = store_to_json(init)
    run([{"type": "translate", "from": "a", "offset": [1, 2, 3]}], initial=init)
    assert store_to_json(init) == snap


def test_store_json_roundtrip():
    s = run(INSET_PROGRAM)
    text = store_to_json(s)
    assert store_to_json(store_from_json(text)) == text


def test_registry_groups():
    groups = {spec.group for spec in REGISTRY.values()}
    assert groups == {"Create", "Extend", "Modify", "Select", "Utility"}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_random_programs_are_deterministic(seed):
    text = random_program_text(seed)

    def outcome():
        try:
            return store_to_json(run_program(parse_program(text), seed))
        except OpError as exc:
            return f"error {exc.index}: {exc}"

    assert outcome() == outcome()
