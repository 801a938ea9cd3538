"""Sequential plan execution over a scene; pure transition function.

Execution never raises past the episode boundary: reference failures abort
the episode with the reason recorded in the log, and the partially modified
scene is returned. The input scene value is never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..errors import AmbiguousAnchor, UnresolvableReference
from ..plan_dsl import PlanProgram
from .references import resolve_reference
from .scene import PARK_DX, PARK_X0, PARK_Y, Scene, clamp_center, move_to

# Offsets (mm) packing multiple objects around a container center; the cycle
# keeps a 40 mm object's center inside a 120 mm container.
_PACK_OFFSETS = [(0.0, 0.0), (-24.0, -24.0), (24.0, -24.0), (-24.0, 24.0), (24.0, 24.0), (0.0, -24.0), (0.0, 24.0)]

_PUSH_DIRS = {"left": (-1.0, 0.0), "right": (1.0, 0.0), "up": (0.0, -1.0), "down": (0.0, 1.0)}
_DEFAULT_PUSH = 60.0


@dataclass
class StepEvent:
    index: int
    api: str
    args: dict
    resolved: tuple[str, ...] = ()
    moved: tuple[str, ...] = ()
    placements: tuple[tuple[str, str], ...] = ()  # (object id, container id)
    detail: str = ""


@dataclass
class ActionLog:
    steps: list[StepEvent] = field(default_factory=list)
    aborted: str | None = None

    def placements(self) -> list[tuple[str, str]]:
        out = []
        for ev in self.steps:
            out.extend(ev.placements)
        return out

    def first_move_index(self, obj_id: str) -> int | None:
        for i, ev in enumerate(self.steps):
            if obj_id in ev.moved:
                return i
        return None

    def first_placement_index(self, obj_id: str, container_id: str) -> int | None:
        for i, ev in enumerate(self.steps):
            if (obj_id, container_id) in ev.placements:
                return i
        return None


def execute_plan(scene: Scene, program: PlanProgram) -> tuple[Scene, ActionLog]:
    """Apply the plan step by step, returning the final scene and the log."""
    log = ActionLog()
    current = scene
    pack_counts: dict[str, int] = {}
    park_slots = 0

    for index, step in enumerate(program, start=1):
        ev = StepEvent(index=index, api=step.api, args=dict(step.args))
        try:
            if step.api in ("pick_place", "sweep"):
                objs = resolve_reference(current, str(step.args["obj"]))
                targets = [
                    o for o in resolve_reference(current, str(step.args["target"]))
                    if current.is_container(o.id)
                ]
                if not targets:
                    raise UnresolvableReference(f"{step.args['target']} (no container matches)")
                target = min(targets, key=lambda o: o.id)
                tx, ty = target.center
                moved, placed = [], []
                for o in sorted(objs, key=lambda o: o.id):
                    slot = pack_counts.get(target.id, 0)
                    pack_counts[target.id] = slot + 1
                    dx, dy = _PACK_OFFSETS[slot % len(_PACK_OFFSETS)]
                    current = current.with_object(move_to(current.get(o.id), tx + dx, ty + dy))
                    moved.append(o.id)
                    placed.append((o.id, target.id))
                ev.resolved = tuple(o.id for o in objs)
                ev.moved = tuple(moved)
                ev.placements = tuple(placed)
                ev.detail = f"into {target.id}"

            elif step.api == "rotate":
                objs = resolve_reference(current, str(step.args["obj"]))
                degrees = float(step.args["degrees"])
                for o in objs:
                    live = current.get(o.id)
                    new_orient = (live.orientation() + degrees) % 360.0
                    props = dict(live.properties)
                    props["orientation"] = f"{new_orient:g}"
                    current = current.with_object(replace(live, properties=props))
                ev.resolved = tuple(o.id for o in objs)
                ev.detail = f"by {degrees:g} degrees"

            elif step.api == "push":
                objs = resolve_reference(current, str(step.args["obj"]))
                direction = str(step.args["direction"])
                distance = float(step.args.get("distance", _DEFAULT_PUSH))
                dx, dy = _PUSH_DIRS[direction]
                moved = []
                for o in objs:
                    live = current.get(o.id)
                    cx, cy = live.center
                    x0, y0, x1, y1 = live.bbox
                    ncx, ncy = clamp_center(cx + dx * distance, cy + dy * distance, x1 - x0, y1 - y0)
                    current = current.with_object(move_to(live, ncx, ncy))
                    moved.append(o.id)
                ev.resolved = tuple(o.id for o in objs)
                ev.moved = tuple(moved)
                ev.detail = f"{direction} {distance:g}mm"

            elif step.api == "detect":
                objs = resolve_reference(current, str(step.args["obj"]))
                ev.resolved = tuple(o.id for o in objs)
                ev.detail = "; ".join(
                    f"{o.id}@({o.bbox[0]:.0f},{o.bbox[1]:.0f},{o.bbox[2]:.0f},{o.bbox[3]:.0f})" for o in objs
                )

            elif step.api == "distract":
                objs = resolve_reference(current, str(step.args["obj"]))
                moved = []
                for o in sorted(objs, key=lambda o: o.id):
                    live = current.get(o.id)
                    x0, y0, x1, y1 = live.bbox
                    cx = PARK_X0 + PARK_DX * park_slots
                    cx, cy = clamp_center(cx, PARK_Y, x1 - x0, y1 - y0)
                    park_slots += 1
                    current = current.with_object(move_to(live, cx, cy))
                    moved.append(o.id)
                ev.resolved = tuple(o.id for o in objs)
                ev.moved = tuple(moved)
                ev.detail = "parked"

            else:
                raise UnresolvableReference(f"api {step.api!r} has no executor")

        except UnresolvableReference as exc:
            ev.detail = str(exc)
            log.steps.append(ev)
            log.aborted = "UnresolvableReference"
            return current, log
        except AmbiguousAnchor as exc:
            ev.detail = str(exc)
            log.steps.append(ev)
            log.aborted = "AmbiguousAnchor"
            return current, log

        log.steps.append(ev)

    return current, log
