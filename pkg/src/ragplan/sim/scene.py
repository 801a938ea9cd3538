"""Deterministic 2D tabletop world state.

Millimeter coordinates on a fixed table, axis-aligned bounding boxes, no
physics: placement means bbox containment. The y axis points down, matching
the top-down raster render, so "above" is smaller y.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

TABLE_W = 1000.0
TABLE_H = 700.0

# Strip along the top edge where distracted objects get parked; task
# generators keep containers and goal objects out of it.
PARK_Y = 40.0
PARK_X0 = 30.0
PARK_DX = 70.0

PALETTE = {
    "red": (220, 50, 47),
    "green": (62, 142, 52),
    "blue": (38, 89, 218),
    "yellow": (235, 199, 23),
    "orange": (232, 126, 4),
    "purple": (118, 66, 200),
    "pink": (231, 130, 170),
    "cyan": (42, 161, 179),
    "brown": (139, 94, 60),
    "white": (238, 232, 213),
    "gray": (131, 148, 150),
    "black": (30, 30, 30),
}

Bbox = tuple[float, float, float, float]


@dataclass(frozen=True)
class SceneObject:
    id: str
    name: str           # category: block, cube, bowl, pan, box, sponge, ...
    color: str
    shape: str
    bbox: Bbox
    properties: dict[str, str] = field(default_factory=dict)

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)

    def orientation(self) -> float:
        return float(self.properties.get("orientation", "0"))


@dataclass(frozen=True)
class Scene:
    objects: tuple[SceneObject, ...]
    containers: frozenset[str] = frozenset()
    rng_seed: int = 0

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(ids) != len(set(ids)):
            raise ValueError("scene object ids must be unique")
        for o in self.objects:
            x0, y0, x1, y1 = o.bbox
            if not (0 <= x0 < x1 <= TABLE_W and 0 <= y0 < y1 <= TABLE_H):
                raise ValueError(f"object {o.id} bbox {o.bbox} outside table bounds")

    def get(self, obj_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == obj_id:
                return o
        raise KeyError(obj_id)

    def is_container(self, obj_id: str) -> bool:
        return obj_id in self.containers

    def with_object(self, new_obj: SceneObject) -> "Scene":
        objs = tuple(new_obj if o.id == new_obj.id else o for o in self.objects)
        return replace(self, objects=objs)


def move_to(obj: SceneObject, cx: float, cy: float) -> SceneObject:
    """Return a copy of obj with its bbox centered at (cx, cy)."""
    x0, y0, x1, y1 = obj.bbox
    w, h = (x1 - x0) / 2.0, (y1 - y0) / 2.0
    return replace(obj, bbox=(cx - w, cy - h, cx + w, cy + h))


def center_inside(obj: SceneObject, container: SceneObject) -> bool:
    cx, cy = obj.center
    x0, y0, x1, y1 = container.bbox
    return x0 <= cx <= x1 and y0 <= cy <= y1


def clamp_center(cx: float, cy: float, w: float, h: float) -> tuple[float, float]:
    cx = min(max(cx, w / 2.0), TABLE_W - w / 2.0)
    cy = min(max(cy, h / 2.0), TABLE_H - h / 2.0)
    return cx, cy


def scene_to_text(scene: Scene) -> str:
    """Stable structured snapshot, one line per object sorted by id."""
    lines = [f"table {TABLE_W:.0f}x{TABLE_H:.0f}mm seed={scene.rng_seed}"]
    for o in sorted(scene.objects, key=lambda o: o.id):
        props = " ".join(f"{k}={v}" for k, v in sorted(o.properties.items()))
        kind = "container" if scene.is_container(o.id) else "object"
        x0, y0, x1, y1 = o.bbox
        lines.append(
            f"{kind} id={o.id} name={o.name} color={o.color} shape={o.shape} "
            f"bbox=({x0:.1f},{y0:.1f},{x1:.1f},{y1:.1f})" + (f" {props}" if props else "")
        )
    return "\n".join(lines) + "\n"


def render_scene(scene: Scene, scale: float = 0.5) -> bytes:
    """Top-down raster of the scene as PNG bytes (fixed palette, no text)."""
    from PIL import Image, ImageDraw

    w, h = int(TABLE_W * scale), int(TABLE_H * scale)
    img = Image.new("RGB", (w, h), (214, 196, 158))  # tabletop wood tone
    draw = ImageDraw.Draw(img)

    def to_px(b: Bbox) -> tuple[int, int, int, int]:
        return (int(b[0] * scale), int(b[1] * scale), int(b[2] * scale), int(b[3] * scale))

    containers = sorted((o for o in scene.objects if scene.is_container(o.id)), key=lambda o: o.id)
    others = sorted((o for o in scene.objects if not scene.is_container(o.id)), key=lambda o: o.id)
    for o in containers:
        rgb = PALETTE.get(o.color, (90, 90, 90))
        light = tuple(min(255, c + 70) for c in rgb)
        draw.rectangle(to_px(o.bbox), fill=light, outline=rgb, width=3)
    for o in others:
        rgb = PALETTE.get(o.color, (90, 90, 90))
        draw.rectangle(to_px(o.bbox), fill=rgb, outline=(20, 20, 20), width=1)

    buf = io.BytesIO()
    img.save(buf, format="PNG", compress_level=6)
    return buf.getvalue()
