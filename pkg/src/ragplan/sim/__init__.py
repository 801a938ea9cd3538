"""Deterministic tabletop simulator: scenes, references, execution, tasks."""

from .executor import ActionLog, StepEvent, execute_plan
from .planners import oracle_plan, oracle_plan_text, random_plan
from .references import ReferenceExpr, parse_reference, resolve_reference
from .scene import Scene, SceneObject, render_scene, scene_to_text
from .tasks import FAMILIES, TaskSpec, generate_task, is_success

__all__ = [
    "ActionLog",
    "StepEvent",
    "execute_plan",
    "oracle_plan",
    "oracle_plan_text",
    "random_plan",
    "ReferenceExpr",
    "parse_reference",
    "resolve_reference",
    "Scene",
    "SceneObject",
    "render_scene",
    "scene_to_text",
    "FAMILIES",
    "TaskSpec",
    "generate_task",
    "is_success",
]
