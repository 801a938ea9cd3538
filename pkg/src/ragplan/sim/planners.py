"""Reference planners: the scripted oracle (upper bound) and a seeded random
planner (lower bound). Both emit programs in the plan language."""

from __future__ import annotations

import random

from ..plan_dsl import PlanProgram, parse_plan
from .scene import Scene
from .tasks import COLORS, CONTAINER_CATS, ROTATIONS, SHAPES, TaskSpec


def oracle_plan(task: TaskSpec) -> PlanProgram:
    """The family's reference solution, carried in the task params."""
    return parse_plan("\n".join(task.params["oracle_steps"]))


def oracle_plan_text(task: TaskSpec) -> str:
    return "\n".join(task.params["oracle_steps"]) + "\n"


def random_plan(scene: Scene, task: TaskSpec, seed: int) -> PlanProgram:
    """A syntactically valid but semantically arbitrary plan."""
    rng = random.Random(f"{task.family}:{seed}:random")
    colors = sorted({o.color for o in scene.objects}) or list(COLORS)
    shapes = sorted({o.shape for o in scene.objects if o.shape != "hollow"}) or list(SHAPES)
    cats = sorted({o.name for o in scene.objects if scene.is_container(o.id)}) or list(CONTAINER_CATS)

    def obj_ref() -> str:
        kind = rng.random()
        if kind < 0.5:
            return f"the {rng.choice(colors)} {rng.choice(shapes)} block"
        if kind < 0.8:
            return f"the {rng.choice(colors)} block"
        return "the block"

    def target_ref() -> str:
        if rng.random() < 0.7:
            return f"the {rng.choice(colors)} {rng.choice(cats)}"
        return f"the {rng.choice(cats)}"

    lines = []
    for _ in range(rng.randint(1, 3)):
        api = rng.choices(
            ["pick_place", "rotate", "sweep", "push", "distract", "detect"],
            weights=[45, 15, 10, 10, 15, 5],
        )[0]
        if api in ("pick_place", "sweep"):
            lines.append(f'{api}(obj="{obj_ref()}", target="{target_ref()}")')
        elif api == "rotate":
            lines.append(f'rotate(obj="{obj_ref()}", degrees={rng.choice(ROTATIONS)})')
        elif api == "push":
            direction = rng.choice(["left", "right", "up", "down"])
            lines.append(f'push(obj="{obj_ref()}", direction="{direction}")')
        else:
            lines.append(f'{api}(obj="{obj_ref()}")')
    return parse_plan("\n".join(lines))
