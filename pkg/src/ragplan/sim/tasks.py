"""Built-in task families: scene generators and success predicates.

Every family is deterministic in (family, seed). Generated TaskSpecs carry a
params dict with the ground-truth object ids, a canonical restatement of the
instruction, and the steps of a reference plan that solves the episode.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

from ..errors import UnknownFamily
from .executor import ActionLog
from .scene import Scene, SceneObject, center_inside

FAMILIES = (
    "visual_manipulation",
    "scene_understanding",
    "rotate",
    "rearrange",
    "pick_in_order_then_restore",
    "manipulate_old_neighbor",
    "same_color",
    "same_shape",
    "interfering_manipulation",
)

COLORS = ("red", "green", "blue", "yellow", "orange", "purple", "pink", "cyan", "brown", "white")
SHAPES = ("square", "round", "triangle", "star", "heart", "l-shaped", "ring", "cross", "diamond", "hexagon")
CONTAINER_CATS = ("bowl", "pan", "box")
ROTATIONS = (30, 60, 90, 120, 150, 180)

BLOCK_SIZE = 40.0
CONTAINER_SIZE = 120.0

# Center-coordinate sampling regions; the parking strip (y < 100) stays clear.
BLOCK_REGION = (70.0, 150.0, 930.0, 320.0)
CONTAINER_REGION = (110.0, 440.0, 890.0, 590.0)

Predicate = Callable[[Scene, Scene, ActionLog], bool]


@dataclass
class TaskSpec:
    family: str
    instruction: str
    success: Predicate
    distractors: int = 0
    params: dict = field(default_factory=dict)


class _Builder:
    def __init__(self, rng: random.Random, seed: int):
        self.rng = rng
        self.seed = seed
        self.objects: list[SceneObject] = []
        self.containers: set[str] = set()
        self._n = 0

    def _next_id(self) -> str:
        oid = f"o{self._n:02d}"
        self._n += 1
        return oid

    def _sample_center(self, region, size, margin=16.0, constraint=None):
        x0, y0, x1, y1 = region
        half = size / 2.0
        for _ in range(600):
            cx = self.rng.uniform(x0, x1)
            cy = self.rng.uniform(y0, y1)
            if constraint is not None and not constraint(cx, cy):
                continue
            box = (cx - half, cy - half, cx + half, cy + half)
            if all(not _overlap(box, o.bbox, margin) for o in self.objects):
                return cx, cy
        raise RuntimeError("could not place object without overlap")

    def add_block(self, color, shape, region=BLOCK_REGION, name="block", constraint=None, center=None):
        size = BLOCK_SIZE
        if center is None:
            cx, cy = self._sample_center(region, size, constraint=constraint)
        else:
            cx, cy = center
        half = size / 2.0
        obj = SceneObject(
            id=self._next_id(), name=name, color=color, shape=shape,
            bbox=(cx - half, cy - half, cx + half, cy + half),
            properties={"orientation": "0"},
        )
        self.objects.append(obj)
        return obj

    def add_container(self, cat, color, region=CONTAINER_REGION):
        cx, cy = self._sample_center(region, CONTAINER_SIZE, margin=24.0)
        half = CONTAINER_SIZE / 2.0
        obj = SceneObject(
            id=self._next_id(), name=cat, color=color, shape="hollow",
            bbox=(cx - half, cy - half, cx + half, cy + half),
        )
        self.objects.append(obj)
        self.containers.add(obj.id)
        return obj

    def add_prop(self, name, color, shape, properties=None, region=BLOCK_REGION):
        cx, cy = self._sample_center(region, BLOCK_SIZE)
        half = BLOCK_SIZE / 2.0
        obj = SceneObject(
            id=self._next_id(), name=name, color=color, shape=shape,
            bbox=(cx - half, cy - half, cx + half, cy + half),
            properties=dict(properties or {}),
        )
        self.objects.append(obj)
        return obj

    def scene(self) -> Scene:
        return Scene(objects=tuple(self.objects), containers=frozenset(self.containers), rng_seed=self.seed)


def _overlap(a, b, margin):
    return not (a[2] + margin <= b[0] or b[2] + margin <= a[0] or a[3] + margin <= b[1] or b[3] + margin <= a[1])


def _distinct_pairs(rng: random.Random, n: int) -> list[tuple[str, str]]:
    pool = list(itertools.product(COLORS, SHAPES))
    return rng.sample(pool, n)


def _in(final: Scene, obj_id: str, cont_id: str) -> bool:
    return center_inside(final.get(obj_id), final.get(cont_id))


# --- family generators ---

def _gen_visual_manipulation(rng, b: _Builder):
    pairs = _distinct_pairs(rng, 5)
    (tc, ts), *rest = pairs
    target = b.add_block(tc, ts)
    others = [b.add_block(c, s) for c, s in rest[:3]]
    cat1, cat2 = rng.sample(CONTAINER_CATS, 2)
    cc1, cc2 = rng.sample(COLORS, 2)
    cont = b.add_container(cat1, cc1)
    b.add_container(cat2, cc2)
    instruction = f"Please place the {tc} {ts} block into the {cc1} {cat1}."
    params = {
        "target": target.id,
        "container": cont.id,
        "other_blocks": [o.id for o in others],
        "canonical": f"pick up the {tc} {ts} block. place it into the {cc1} {cat1}",
        "oracle_steps": [f'pick_place(obj="the {tc} {ts} block", target="the {cc1} {cat1}")'],
    }

    def pred(initial, final, log):
        return _in(final, params["target"], params["container"]) and all(
            not _in(final, o, params["container"]) for o in params["other_blocks"]
        )

    return instruction, pred, 3, params


def _gen_scene_understanding(rng, b: _Builder):
    pairs = _distinct_pairs(rng, 5)
    (ac, ash), (tc, ts), *rest = pairs
    anchor = b.add_block(ac, ash, constraint=lambda x, y: 420 <= x <= 660)
    ax = anchor.center[0]
    target = b.add_block(tc, ts, constraint=lambda x, y: x < ax - 70)
    others = [b.add_block(c, s, constraint=lambda x, y: x > ax + 70) for c, s in rest[:2]]
    cat = rng.choice(CONTAINER_CATS)
    cc = rng.choice(COLORS)
    cont = b.add_container(cat, cc)
    instruction = f"Put the block on the left of the {ac} {ash} block into the {cc} {cat}."
    params = {
        "target": target.id,
        "anchor": anchor.id,
        "container": cont.id,
        "other_blocks": [anchor.id] + [o.id for o in others],
        "canonical": f"pick up the block on the left of the {ac} {ash} block. place it into the {cc} {cat}",
        "oracle_steps": [
            f'pick_place(obj="the block on the left of the {ac} {ash} block", target="the {cc} {cat}")'
        ],
    }

    def pred(initial, final, log):
        return _in(final, params["target"], params["container"]) and all(
            not _in(final, o, params["container"]) for o in params["other_blocks"]
        )

    return instruction, pred, 2, params


def _gen_rotate(rng, b: _Builder):
    pairs = _distinct_pairs(rng, 4)
    (tc, ts), *rest = pairs
    target = b.add_block(tc, ts)
    others = [b.add_block(c, s) for c, s in rest]
    degrees = rng.choice(ROTATIONS)
    instruction = f"Please rotate the {tc} {ts} block by {degrees} degrees."
    params = {
        "target": target.id,
        "degrees": degrees,
        "others": [o.id for o in others],
        "canonical": f"rotate the {tc} {ts} block by {degrees} degrees",
        "oracle_steps": [f'rotate(obj="the {tc} {ts} block", degrees={degrees})'],
    }

    def pred(initial, final, log):
        if abs(final.get(params["target"]).orientation() - float(params["degrees"])) % 360.0 > 1e-9:
            return False
        return all(final.get(o).orientation() == 0.0 for o in params["others"])

    return instruction, pred, 3, params


def _gen_rearrange(rng, b: _Builder):
    colors = rng.sample(COLORS, 4)
    shapes = rng.sample(SHAPES, 3)
    blocks = [b.add_block(c, s) for c, s in zip(colors[:3], shapes)]
    bowls = [b.add_container("bowl", c) for c in colors[:3]]
    b.add_prop("sponge", colors[3], "flat")
    c1, c2, c3 = colors[:3]
    instruction = f"Rearrange the blocks: the {c1}, {c2} and {c3} blocks each go into the bowl of the same color."
    params = {
        "pairs": [(blk.id, bwl.id) for blk, bwl in zip(blocks, bowls)],
        "canonical": "pick up each block. place it into the bowl of the same color",
        "oracle_steps": [
            f'pick_place(obj="the {c} block", target="the {c} bowl")' for c in colors[:3]
        ],
    }

    def pred(initial, final, log):
        return all(_in(final, blk, bwl) for blk, bwl in params["pairs"])

    return instruction, pred, 1, params


def _gen_pick_in_order_then_restore(rng, b: _Builder):
    tc, ts = _distinct_pairs(rng, 1)[0]
    ca, cb, cc_ = rng.sample(COLORS, 3)
    bowl_a = b.add_container("bowl", ca)
    bowl_b = b.add_container("bowl", cb)
    bowl_c = b.add_container("bowl", cc_)
    target = b.add_block(tc, ts, center=bowl_a.center)
    extra = _distinct_pairs(rng, 3)
    others = [b.add_block(c, s) for c, s in extra if (c, s) != (tc, ts)][:2]
    instruction = (
        f"Put the {tc} {ts} block into the {cb} bowl, then into the {cc_} bowl, "
        f"and finally restore it to the {ca} bowl."
    )
    params = {
        "target": target.id,
        "sequence": [bowl_b.id, bowl_c.id, bowl_a.id],
        "home": bowl_a.id,
        "canonical": (
            f"pick up the {tc} {ts} block. place it into the {cb} bowl. "
            f"place it into the {cc_} bowl. place it into the {ca} bowl"
        ),
        "oracle_steps": [
            f'pick_place(obj="the {tc} {ts} block", target="the {cb} bowl")',
            f'pick_place(obj="the {tc} {ts} block", target="the {cc_} bowl")',
            f'pick_place(obj="the {tc} {ts} block", target="the {ca} bowl")',
        ],
    }

    def pred(initial, final, log):
        seq = [c for o, c in log.placements() if o == params["target"]]
        return seq == params["sequence"] and _in(final, params["target"], params["home"])

    return instruction, pred, len(others), params


def _gen_manipulate_old_neighbor(rng, b: _Builder):
    pairs = _distinct_pairs(rng, 4)
    (xc, xs), (yc, ys), *rest = pairs
    side = rng.choice(("left", "right", "top", "bottom"))
    off = {"left": (-70, 0), "right": (70, 0), "top": (0, -70), "bottom": (0, 70)}[side]
    x_obj = b.add_block(xc, xs, constraint=lambda x, y: 200 <= x <= 800 and 220 <= y <= 260)
    xx, xy = x_obj.center
    y_obj = b.add_block(yc, ys, center=(xx + off[0], xy + off[1]))
    others = [
        b.add_block(c, s, constraint=lambda x, y: abs(x - xx) > 160 or abs(y - xy) > 160)
        for c, s in rest[:2]
    ]
    cat = rng.choice(CONTAINER_CATS)
    cc = rng.choice(COLORS)
    cont = b.add_container(cat, cc)
    instruction = (
        f"Put the {xc} {xs} block into the {cc} {cat}, then put the object "
        f"that sat on its {side} side into the same {cat}."
    )
    params = {
        "first": x_obj.id,
        "neighbor": y_obj.id,
        "container": cont.id,
        "side": side,
        "other_blocks": [o.id for o in others],
        "canonical": (
            f"pick up the {xc} {xs} block. place it into the {cc} {cat}. "
            f"then pick up the object that sat on its {side} side. place it into the same {cat}"
        ),
        "oracle_steps": [
            f'pick_place(obj="the {xc} {xs} block", target="the {cc} {cat}")',
            f'pick_place(obj="the {yc} {ys} block", target="the {cc} {cat}")',
        ],
    }

    def pred(initial, final, log):
        c = params["container"]
        i_first = log.first_placement_index(params["first"], c)
        i_second = log.first_placement_index(params["neighbor"], c)
        return (
            _in(final, params["first"], c)
            and _in(final, params["neighbor"], c)
            and all(not _in(final, o, c) for o in params["other_blocks"])
            and i_first is not None
            and i_second is not None
            and i_first < i_second
        )

    return instruction, pred, 2, params


def _gen_same_color(rng, b: _Builder):
    ca = rng.choice(COLORS)
    other_colors = [c for c in COLORS if c != ca]
    shapes = rng.sample(SHAPES, 6)
    anchor = b.add_block(ca, "cube", name="cube")
    matches = [b.add_block(ca, s) for s in shapes[:2]]
    rng_colors = rng.sample(other_colors, 4)
    others = [b.add_block(c, s) for c, s in zip(rng_colors[:2], shapes[2:4])]
    cat = rng.choice(CONTAINER_CATS)
    cont = b.add_container(cat, rng_colors[2])
    b.add_container(rng.choice([c for c in CONTAINER_CATS if c != cat]), rng_colors[3])
    instruction = f"Move all the objects with the same color as the {ca} cube into the {rng_colors[2]} {cat}."
    params = {
        "anchor": anchor.id,
        "matches": [m.id for m in matches],
        "container": cont.id,
        "canonical": (
            f"pick up all the objects with the same color as the {ca} cube. "
            f"place them into the {rng_colors[2]} {cat}"
        ),
        "oracle_steps": [
            f'pick_place(obj="all the objects with the same color as the {ca} cube", '
            f'target="the {rng_colors[2]} {cat}")'
        ],
    }

    def pred(initial, final, log):
        c = params["container"]
        return all(_in(final, m, c) for m in params["matches"]) and not _in(final, params["anchor"], c)

    return instruction, pred, 2, params


def _gen_same_shape(rng, b: _Builder):
    sa = rng.choice([s for s in SHAPES if s != "cube"])
    colors = rng.sample(COLORS, 7)
    anchor = b.add_block(colors[0], sa)
    matches = [b.add_block(c, sa) for c in colors[1:3]]
    other_shapes = rng.sample([s for s in SHAPES if s != sa], 2)
    others = [b.add_block(c, s) for c, s in zip(colors[3:5], other_shapes)]
    cat = rng.choice(CONTAINER_CATS)
    cont = b.add_container(cat, colors[5])
    instruction = f"Move all the objects with the same shape as the {colors[0]} {sa} block into the {colors[5]} {cat}."
    params = {
        "anchor": anchor.id,
        "matches": [m.id for m in matches],
        "container": cont.id,
        "canonical": (
            f"pick up all the objects with the same shape as the {colors[0]} {sa} block. "
            f"place them into the {colors[5]} {cat}"
        ),
        "oracle_steps": [
            f'pick_place(obj="all the objects with the same shape as the {colors[0]} {sa} block", '
            f'target="the {colors[5]} {cat}")'
        ],
    }

    def pred(initial, final, log):
        c = params["container"]
        return all(_in(final, m, c) for m in params["matches"]) and not _in(final, params["anchor"], c)

    return instruction, pred, 2, params


def _gen_interfering_manipulation(rng, b: _Builder):
    pairs = _distinct_pairs(rng, 4)
    (tc, ts), (dc, ds), *rest = pairs
    cat = rng.choice(CONTAINER_CATS)
    cc = rng.choice(COLORS)
    cont = b.add_container(cat, cc)
    target = b.add_block(tc, ts)
    blocker = b.add_block(dc, ds, center=cont.center)
    others = [b.add_block(c, s) for c, s in rest[:2]]
    instruction = (
        f"A {dc} {ds} block is sitting in the {cc} {cat}. Move it out of the way first, "
        f"then put the {tc} {ts} block into the {cc} {cat}."
    )
    params = {
        "target": target.id,
        "blocker": blocker.id,
        "container": cont.id,
        "canonical": (
            f"move the {dc} {ds} block out of the {cc} {cat}. "
            f"then pick up the {tc} {ts} block. place it into the {cc} {cat}"
        ),
        "oracle_steps": [
            f'distract(obj="the {dc} {ds} block")',
            f'pick_place(obj="the {tc} {ts} block", target="the {cc} {cat}")',
        ],
    }

    def pred(initial, final, log):
        c = params["container"]
        i_clear = log.first_move_index(params["blocker"])
        i_place = log.first_placement_index(params["target"], c)
        return (
            _in(final, params["target"], c)
            and not _in(final, params["blocker"], c)
            and i_clear is not None
            and i_place is not None
            and i_clear <= i_place
        )

    return instruction, pred, 2, params


_GENERATORS = {
    "visual_manipulation": _gen_visual_manipulation,
    "scene_understanding": _gen_scene_understanding,
    "rotate": _gen_rotate,
    "rearrange": _gen_rearrange,
    "pick_in_order_then_restore": _gen_pick_in_order_then_restore,
    "manipulate_old_neighbor": _gen_manipulate_old_neighbor,
    "same_color": _gen_same_color,
    "same_shape": _gen_same_shape,
    "interfering_manipulation": _gen_interfering_manipulation,
}


def generate_task(family: str, seed: int) -> tuple[Scene, TaskSpec]:
    """Build the seeded scene and its TaskSpec; (family, seed) fixes both."""
    if family not in _GENERATORS:
        raise UnknownFamily(family)
    rng = random.Random(f"{family}:{seed}")
    builder = _Builder(rng, seed)
    instruction, pred, n_distractors, params = _GENERATORS[family](rng, builder)
    scene = builder.scene()
    task = TaskSpec(
        family=family,
        instruction=instruction,
        success=pred,
        distractors=n_distractors,
        params=params,
    )
    return scene, task


def is_success(task: TaskSpec, initial: Scene, final: Scene, log: ActionLog) -> bool:
    return bool(task.success(initial, final, log))
