"""Rule-based resolution of referential expressions against a scene.

Expressions fall into four kinds, decided by grammar rules in fixed
precedence: capability lookups ("capable of repairing the television"),
attribute comparisons ("same color as the blue cube"), spatial relations
("the block on the left of the red star block", "in the middle of the blue
blocks"), and plain name references ("the red heart block"). Resolution
returns every matching object; an empty match raises UnresolvableReference
and a singular anchor matching several objects raises AmbiguousAnchor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import AmbiguousAnchor, UnresolvableReference
from ..lexical import tokenize
from .scene import Scene, SceneObject

COLOR_WORDS = {
    "red", "green", "blue", "yellow", "orange", "purple", "pink", "cyan",
    "brown", "white", "gray", "grey", "black", "magenta",
}

SHAPE_WORDS = {
    "square", "round", "triangle", "star", "heart", "ring", "cross",
    "diamond", "hexagon", "cube", "flat", "hollow",
}

# Category nouns (singular form); plurals are normalized below. "object",
# "thing", and "item" are wildcards matching any category.
CATEGORY_WORDS = {
    "block": "block", "blocks": "block",
    "cube": "cube", "cubes": "cube",
    "bowl": "bowl", "bowls": "bowl",
    "pan": "pan", "pans": "pan",
    "box": "box", "boxes": "box",
    "sponge": "sponge", "sponges": "sponge",
    "screwdriver": "screwdriver", "screwdrivers": "screwdriver",
    "television": "television", "televisions": "television", "tv": "television",
    "remote": "remote", "remotes": "remote",
    "hammer": "hammer", "hammers": "hammer",
    "cloth": "cloth", "cloths": "cloth",
    "container": "*container*", "containers": "*container*",
    "object": "*", "objects": "*",
    "thing": "*", "things": "*",
    "item": "*", "items": "*",
}

_ARTICLES = {"the", "a", "an"}
_LEADING_FILLER = {"all", "every", "each", "please"}

# Spatial relation phrases, longest first so e.g. "on top of" wins over "top".
_REL_PHRASES: list[tuple[tuple[str, ...], str]] = [
    (("in", "middle", "of"), "middle"),
    (("middle", "of"), "middle"),
    (("between",), "middle"),
    (("at", "bottom", "of"), "below"),
    (("on", "bottom", "of"), "below"),
    (("bottom", "of"), "below"),
    (("below",), "below"),
    (("under",), "below"),
    (("beneath",), "below"),
    (("on", "top", "of"), "above"),
    (("top", "of"), "above"),
    (("above",), "above"),
    (("over",), "above"),
    (("on", "left", "of"), "left"),
    (("to", "left", "of"), "left"),
    (("left", "of"), "left"),
    (("on", "right", "of"), "right"),
    (("to", "right", "of"), "right"),
    (("right", "of"), "right"),
    (("nearest", "to"), "nearest"),
    (("closest", "to"), "nearest"),
    (("next", "to"), "nearest"),
    (("nearest",), "nearest"),
]

# Capability verbs: query surface form -> lemma -> property keys to test.
_ING_TO_LEMMA = {
    "repairing": "repair", "fixing": "repair", "mending": "repair",
    "cleaning": "clean", "wiping": "clean",
    "cutting": "cut",
    "watering": "water",
    "heating": "heat", "warming": "heat",
    "opening": "open",
    "stirring": "stir",
    "serving": "serve",
}
_BARE_LEMMAS = {"repair", "fix", "mend", "clean", "wipe", "cut", "water", "heat", "warm", "open", "stir", "serve"}
_BARE_TO_LEMMA = {
    "repair": "repair", "fix": "repair", "mend": "repair",
    "clean": "clean", "wipe": "clean",
    "cut": "cut", "water": "water",
    "heat": "heat", "warm": "heat",
    "open": "open", "stir": "stir", "serve": "serve",
}
_LEMMA_TO_KEYS = {
    "repair": ("fixes", "repairs"),
    "clean": ("cleans",),
    "cut": ("cuts",),
    "water": ("waters",),
    "heat": ("heats",),
    "open": ("opens",),
    "stir": ("stirs",),
    "serve": ("serves",),
}

MIDDLE_LATERAL_TOL = 10.0  # mm


@dataclass(frozen=True)
class NameFilter:
    category: str = "*"   # "*" any, "*container*" any flagged container
    color: str | None = None
    shape: str | None = None


@dataclass(frozen=True)
class ReferenceExpr:
    text: str
    kind: str  # by_name | by_attribute | by_spatial | by_knowledge
    name: NameFilter | None = None
    attribute: str | None = None       # by_attribute: color | shape
    relation: str | None = None        # by_spatial relation
    anchor_text: str | None = None     # by_attribute / by_spatial
    capability: str | None = None      # by_knowledge lemma
    patient: str | None = None         # by_knowledge object of the capability


def _normalize(text: str) -> list[str]:
    tokens = [t for t in tokenize(text) if t not in _ARTICLES]
    while tokens and tokens[0] in _LEADING_FILLER:
        tokens = tokens[1:]
    # canonicalize the two-token shape "l shaped" -> "l-shaped"
    out: list[str] = []
    i = 0
    while i < len(tokens):
        if tokens[i] == "l" and i + 1 < len(tokens) and tokens[i + 1] == "shaped":
            out.append("l-shaped")
            i += 2
        else:
            out.append(tokens[i])
            i += 1
    return out


def _parse_name(tokens: list[str], text: str) -> NameFilter:
    color = None
    shape = None
    category = None
    for tok in tokens:
        if tok in COLOR_WORDS and color is None:
            color = "gray" if tok == "grey" else tok
        elif (tok in SHAPE_WORDS or tok == "l-shaped") and tok != "cube" and shape is None:
            shape = tok
        elif tok in CATEGORY_WORDS and category is None:
            category = CATEGORY_WORDS[tok]
        elif tok in CATEGORY_WORDS and CATEGORY_WORDS[tok] == category:
            continue
        else:
            raise UnresolvableReference(f"{text} (cannot interpret {tok!r})")
    if category is None:
        # a bare color or shape implies "object"
        if color is None and shape is None:
            raise UnresolvableReference(text)
        category = "*"
    return NameFilter(category=category, color=color, shape=shape)


def _find_phrase(tokens: list[str]) -> tuple[int, int, str] | None:
    """Earliest, longest spatial-relation phrase; returns (start, end, relation)."""
    best: tuple[int, int, str] | None = None
    for i in range(len(tokens)):
        for phrase, rel in _REL_PHRASES:
            if tuple(tokens[i : i + len(phrase)]) == phrase:
                if best is None or i < best[0]:
                    best = (i, i + len(phrase), rel)
                break
    return best


def parse_reference(text: str) -> ReferenceExpr:
    """Classify an expression; the category is decided by grammar rules alone."""
    tokens = _normalize(text)
    if not tokens:
        raise UnresolvableReference(text)

    # knowledge: "... capable of V ..." / "... that can V ..." / "... for V-ing ..."
    for i, tok in enumerate(tokens):
        trigger = None
        if tok == "capable" and i + 1 < len(tokens) and tokens[i + 1] == "of":
            trigger = i + 2
        elif tok == "can" and i + 1 < len(tokens):
            trigger = i + 1
        if trigger is not None and trigger < len(tokens):
            verb = tokens[trigger]
            lemma = _ING_TO_LEMMA.get(verb) or _BARE_TO_LEMMA.get(verb)
            if lemma is None:
                raise UnresolvableReference(f"{text} (unknown capability {verb!r})")
            patient_tokens = [t for t in tokens[trigger + 1 :] if t not in ("that", "this")]
            if not patient_tokens:
                raise UnresolvableReference(f"{text} (capability without an object)")
            head_tokens = [t for t in tokens[:i] if t not in ("that", "which", "is")]
            head = _parse_name(head_tokens, text) if head_tokens else NameFilter()
            return ReferenceExpr(
                text=text, kind="by_knowledge", name=head,
                capability=lemma, patient=" ".join(patient_tokens),
            )

    # attribute: "... same (color|shape) (as|of) <anchor>"
    for i, tok in enumerate(tokens):
        if tok == "same" and i + 2 < len(tokens) and tokens[i + 1] in ("color", "colour", "shape"):
            if tokens[i + 2] in ("as", "of"):
                attr = "color" if tokens[i + 1] in ("color", "colour") else "shape"
                anchor = " ".join(tokens[i + 3 :])
                if not anchor:
                    raise UnresolvableReference(f"{text} (attribute without an anchor)")
                head_tokens = [t for t in tokens[:i] if t not in ("with", "of", "that", "having", "have", "has", "sharing")]
                head = _parse_name(head_tokens, text) if head_tokens else NameFilter()
                return ReferenceExpr(
                    text=text, kind="by_attribute", name=head,
                    attribute=attr, anchor_text=anchor,
                )

    # spatial: "<head> <relation> <anchor>"
    hit = _find_phrase(tokens)
    if hit is not None:
        start, end, rel = hit
        head_tokens = [t for t in tokens[:start] if t not in ("that", "which", "is", "was", "sat", "sitting", "lying", "one")]
        anchor = " ".join(tokens[end:])
        if not anchor:
            raise UnresolvableReference(f"{text} (spatial relation without an anchor)")
        head = _parse_name(head_tokens, text) if head_tokens else NameFilter()
        return ReferenceExpr(text=text, kind="by_spatial", name=head, relation=rel, anchor_text=anchor)

    return ReferenceExpr(text=text, kind="by_name", name=_parse_name(tokens, text))


def _match_name(scene: Scene, f: NameFilter) -> list[SceneObject]:
    out = []
    for o in scene.objects:
        if f.category == "*container*":
            if not scene.is_container(o.id):
                continue
        elif f.category != "*" and o.name != f.category:
            continue
        if f.color is not None and o.color != f.color:
            continue
        if f.shape is not None and o.shape != f.shape:
            continue
        out.append(o)
    return sorted(out, key=lambda o: o.id)


def _resolve_single_anchor(scene: Scene, anchor_text: str) -> SceneObject:
    matches = resolve_reference(scene, anchor_text)
    if len(matches) > 1:
        raise AmbiguousAnchor(anchor_text, len(matches))
    return matches[0]


def _resolve_anchor_set(scene: Scene, anchor_text: str) -> list[SceneObject]:
    return resolve_reference(scene, anchor_text)


def resolve_reference(scene: Scene, expr: str | ReferenceExpr) -> list[SceneObject]:
    """Resolve an expression to the objects it denotes, sorted by id."""
    parsed = parse_reference(expr) if isinstance(expr, str) else expr
    text = parsed.text

    if parsed.kind == "by_name":
        matches = _match_name(scene, parsed.name)
        if not matches:
            raise UnresolvableReference(text)
        return matches

    if parsed.kind == "by_knowledge":
        keys = _LEMMA_TO_KEYS[parsed.capability]
        matches = [
            o for o in _match_name(scene, parsed.name)
            if any(o.properties.get(k) == parsed.patient for k in keys)
        ]
        if not matches:
            raise UnresolvableReference(text)
        return matches

    if parsed.kind == "by_attribute":
        anchor = _resolve_single_anchor(scene, parsed.anchor_text)
        value = getattr(anchor, parsed.attribute)
        matches = [
            o for o in _match_name(scene, parsed.name)
            if o.id != anchor.id and getattr(o, parsed.attribute) == value
        ]
        if not matches:
            raise UnresolvableReference(text)
        return matches

    # spatial
    candidates = _match_name(scene, parsed.name)
    rel = parsed.relation
    if rel == "middle":
        anchors = _resolve_anchor_set(scene, parsed.anchor_text)
        if len(anchors) < 2:
            raise UnresolvableReference(f"{text} (middle-of needs at least two anchors)")
        anchor_ids = {a.id for a in anchors}
        xs = [a.center[0] for a in anchors]
        ys = [a.center[1] for a in anchors]
        dominant_x = (max(xs) - min(xs)) >= (max(ys) - min(ys))
        matches = []
        for o in candidates:
            if o.id in anchor_ids:
                continue
            cx, cy = o.center
            if dominant_x:
                between = min(xs) < cx < max(xs)
                lateral = abs(cy - sum(ys) / len(ys)) <= MIDDLE_LATERAL_TOL
            else:
                between = min(ys) < cy < max(ys)
                lateral = abs(cx - sum(xs) / len(xs)) <= MIDDLE_LATERAL_TOL
            if between and lateral:
                matches.append(o)
        if not matches:
            raise UnresolvableReference(text)
        return matches

    anchor = _resolve_single_anchor(scene, parsed.anchor_text)
    ax, ay = anchor.center
    pool = [o for o in candidates if o.id != anchor.id]
    if rel == "nearest":
        if not pool:
            raise UnresolvableReference(text)
        best = min(pool, key=lambda o: (math.dist(o.center, (ax, ay)), o.id))
        return [best]
    preds = {
        "left": lambda o: o.center[0] < ax,
        "right": lambda o: o.center[0] > ax,
        "above": lambda o: o.center[1] < ay,
        "below": lambda o: o.center[1] > ay,
    }
    matches = [o for o in pool if preds[rel](o)]
    if not matches:
        raise UnresolvableReference(text)
    return matches
