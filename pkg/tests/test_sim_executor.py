import pytest

from ragplan.plan_dsl import parse_plan
from ragplan.sim.executor import execute_plan
from ragplan.sim.scene import Scene, SceneObject, center_inside, scene_to_text


def _obj(oid, name, color, shape, cx, cy, size=40.0, props=None):
    h = size / 2.0
    base = {"orientation": "0"} if name in ("block", "cube") else {}
    base.update(props or {})
    return SceneObject(id=oid, name=name, color=color, shape=shape,
                       bbox=(cx - h, cy - h, cx + h, cy + h), properties=base)


def _scene():
    return Scene(
        objects=(
            _obj("blk-r", "block", "red", "heart", 200, 200),
            _obj("blk-b", "block", "blue", "round", 400, 200),
            _obj("blk-b2", "block", "blue", "star", 600, 200),
            _obj("bowl-g", "bowl", "green", "hollow", 300, 500, size=120),
            _obj("bowl-y", "bowl", "yellow", "hollow", 700, 500, size=120),
        ),
        containers=frozenset({"bowl-g", "bowl-y"}),
    )


def test_pick_place_moves_center_into_container():
    scene = _scene()
    final, log = execute_plan(scene, parse_plan('pick_place(obj="the red heart block", target="the green bowl")'))
    assert log.aborted is None
    assert center_inside(final.get("blk-r"), final.get("bowl-g"))
    assert log.placements() == [("blk-r", "bowl-g")]


def test_pick_place_moves_every_match_in_id_order():
    scene = _scene()
    final, log = execute_plan(scene, parse_plan('pick_place(obj="the blue block", target="the yellow bowl")'))
    assert log.steps[0].moved == ("blk-b", "blk-b2")
    assert center_inside(final.get("blk-b"), final.get("bowl-y"))
    assert center_inside(final.get("blk-b2"), final.get("bowl-y"))


def test_absent_object_aborts_episode():
    scene = _scene()
    final, log = execute_plan(scene, parse_plan('pick_place(obj="the magenta dodecahedron", target="the green bowl")'))
    assert log.aborted == "UnresolvableReference"
    assert scene_to_text(final) == scene_to_text(scene)  # nothing moved


def test_non_container_target_aborts():
    scene = _scene()
    final, log = execute_plan(scene, parse_plan('pick_place(obj="the red heart block", target="the blue round block")'))
    assert log.aborted == "UnresolvableReference"


def test_input_scene_not_mutated():
    scene = _scene()
    before = scene_to_text(scene)
    execute_plan(scene, parse_plan('pick_place(obj="the red heart block", target="the green bowl")'))
    assert scene_to_text(scene) == before


def test_rotate_accumulates_modulo_360():
    scene = _scene()
    plan = parse_plan('rotate(obj="the red heart block", degrees=90)\nrotate(obj="the red heart block", degrees=300)')
    final, log = execute_plan(scene, plan)
    assert final.get("blk-r").orientation() == 30.0
    assert final.get("blk-b").orientation() == 0.0


def test_push_moves_and_clamps_at_table_edge():
    scene = _scene()
    final, _ = execute_plan(scene, parse_plan('push(obj="the red heart block", direction="left")'))
    assert final.get("blk-r").center[0] == pytest.approx(140.0)
    final2, _ = execute_plan(scene, parse_plan('push(obj="the red heart block", direction="left", distance=5000)'))
    x0, _, _, _ = final2.get("blk-r").bbox
    assert x0 == pytest.approx(0.0)


def test_detect_logs_without_mutation():
    scene = _scene()
    final, log = execute_plan(scene, parse_plan('detect(obj="the blue block")'))
    assert scene_to_text(final) == scene_to_text(scene)
    assert log.steps[0].resolved == ("blk-b", "blk-b2")
    assert "blk-b@" in log.steps[0].detail


def test_distract_parks_outside_containers():
    scene = _scene()
    final, log = execute_plan(scene, parse_plan('distract(obj="the red heart block")'))
    parked = final.get("blk-r")
    assert parked.center[1] < 100
    for cont_id in final.containers:
        assert not center_inside(parked, final.get(cont_id))
    assert log.steps[0].moved == ("blk-r",)


def test_distract_uses_distinct_parking_slots():
    scene = _scene()
    final, _ = execute_plan(scene, parse_plan('distract(obj="the blue block")'))
    a, b = final.get("blk-b"), final.get("blk-b2")
    assert a.center != b.center


def test_sweep_logs_placements_like_pick_place():
    scene = _scene()
    final, log = execute_plan(scene, parse_plan('sweep(obj="the red heart block", target="the green bowl")'))
    assert log.steps[0].api == "sweep"
    assert log.placements() == [("blk-r", "bowl-g")]


def test_execution_is_deterministic():
    plan = parse_plan(
        'pick_place(obj="the blue block", target="the green bowl")\n'
        'rotate(obj="the red heart block", degrees=30)\n'
        'distract(obj="the red heart block")'
    )
    f1, _ = execute_plan(_scene(), plan)
    f2, _ = execute_plan(_scene(), plan)
    assert scene_to_text(f1) == scene_to_text(f2)


def test_multiple_objects_packed_inside_same_container():
    scene = _scene()
    plan = parse_plan(
        'pick_place(obj="the red heart block", target="the green bowl")\n'
        'pick_place(obj="the blue block", target="the green bowl")'
    )
    final, _ = execute_plan(scene, plan)
    for oid in ("blk-r", "blk-b", "blk-b2"):
        assert center_inside(final.get(oid), final.get("bowl-g"))
    centers = {final.get(oid).center for oid in ("blk-r", "blk-b", "blk-b2")}
    assert len(centers) == 3  # distinct packing slots
