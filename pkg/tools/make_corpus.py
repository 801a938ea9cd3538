#!/usr/bin/env python3
"""Author the shipped corpora deterministically.

Writes src/ragplan/data/corpus.jsonl (the seed corpus: working programs for
every task family, spread over 12 sources) and corpus_distractor.jsonl (the
seed corpus plus 56 irrelevant programs: verbose junk and reranker-bait
entries whose instruction register mimics rewritten queries while sharing
almost no distinctive keywords with raw ones).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

DATA = ROOT / "src" / "ragplan" / "data"

SOURCES = [
    "kitchen-demos", "workshop-logs", "lab-notebook", "tutorial-set",
    "field-tests", "warehouse-suite", "assembly-line", "home-robotics",
    "classroom-kit", "maintenance-crew", "sorting-station", "showroom-pilots",
]


def entry(eid, instruction, code, source, tags):
    return {"id": eid, "instruction": instruction, "code": code, "source": source, "tags": tags}


def seed_entries():
    out = []
    n_src = 0

    def src():
        nonlocal n_src
        s = SOURCES[n_src % len(SOURCES)]
        n_src += 1
        return s

    vm = [
        ("blue", "round", "yellow", "bowl"),
        ("red", "star", "green", "pan"),
        ("white", "triangle", "purple", "box"),
        ("cyan", "heart", "brown", "bowl"),
        ("orange", "hexagon", "black", "pan"),
        ("pink", "cross", "gray", "box"),
    ]
    for i, (c, s, cc, cat) in enumerate(vm):
        out.append(entry(
            f"visman-{i:02d}",
            f"Pick up the {c} {s} block and place it into the {cc} {cat}.",
            f'pick_place(obj="the {c} {s} block", target="the {cc} {cat}")\n',
            src(), ["visual_manipulation"],
        ))

    scene = [
        ("green", "diamond", "red", "box"),
        ("purple", "ring", "cyan", "bowl"),
        ("brown", "square", "white", "pan"),
        ("yellow", "l-shaped", "blue", "box"),
        ("black", "heart", "orange", "bowl"),
        ("gray", "star", "pink", "pan"),
    ]
    for i, (ac, ash, cc, cat) in enumerate(scene):
        out.append(entry(
            f"scene-{i:02d}",
            f"Put the block on the left of the {ac} {ash} block into the {cc} {cat}.",
            f'pick_place(obj="the block on the left of the {ac} {ash} block", target="the {cc} {cat}")\n',
            src(), ["scene_understanding"],
        ))

    rot = [
        ("purple", "l-shaped", 120),
        ("green", "square", 90),
        ("yellow", "ring", 30),
        ("red", "hexagon", 150),
        ("cyan", "triangle", 60),
        ("white", "diamond", 180),
    ]
    for i, (c, s, d) in enumerate(rot):
        out.append(entry(
            f"rotate-{i:02d}",
            f"Rotate the {c} {s} block by {d} degrees.",
            f'rotate(obj="the {c} {s} block", degrees={d})\n',
            src(), ["rotate"],
        ))

    rearr = [
        ("red", "green", "blue"),
        ("yellow", "purple", "cyan"),
        ("orange", "white", "pink"),
        ("brown", "blue", "gray"),
        ("green", "cyan", "red"),
        ("purple", "yellow", "white"),
    ]
    for i, (c1, c2, c3) in enumerate(rearr):
        code = "".join(f'pick_place(obj="the {c} block", target="the {c} bowl")\n' for c in (c1, c2, c3))
        out.append(entry(
            f"rearr-{i:02d}",
            f"Rearrange the blocks: the {c1}, {c2} and {c3} blocks each go into the bowl of the same color.",
            code,
            src(), ["rearrange"],
        ))

    order = [
        ("cyan", "round", "white", "pink", "brown"),
        ("red", "square", "yellow", "green", "blue"),
        ("green", "heart", "purple", "orange", "white"),
        ("blue", "cross", "gray", "cyan", "yellow"),
        ("pink", "star", "brown", "white", "green"),
        ("orange", "l-shaped", "blue", "red", "purple"),
    ]
    for i, (c, s, cb, cc, ca) in enumerate(order):
        code = (
            f'pick_place(obj="the {c} {s} block", target="the {cb} bowl")\n'
            f'pick_place(obj="the {c} {s} block", target="the {cc} bowl")\n'
            f'pick_place(obj="the {c} {s} block", target="the {ca} bowl")\n'
        )
        out.append(entry(
            f"order-{i:02d}",
            f"Put the {c} {s} block into the {cb} bowl, then into the {cc} bowl, "
            f"and finally restore it to the {ca} bowl.",
            code,
            src(), ["pick_in_order_then_restore"],
        ))

    neigh = [
        ("orange", "cross", "red", "pan", "left", "white", "ring"),
        ("blue", "triangle", "green", "box", "right", "purple", "round"),
        ("white", "hexagon", "cyan", "bowl", "top", "red", "diamond"),
        ("gray", "heart", "yellow", "pan", "bottom", "blue", "square"),
        ("green", "star", "pink", "box", "left", "orange", "triangle"),
        ("purple", "square", "brown", "bowl", "right", "yellow", "heart"),
    ]
    for i, (xc, xs, cc, cat, side, yc, ys) in enumerate(neigh):
        code = (
            f'pick_place(obj="the {xc} {xs} block", target="the {cc} {cat}")\n'
            f'pick_place(obj="the {yc} {ys} block", target="the {cc} {cat}")\n'
        )
        out.append(entry(
            f"neigh-{i:02d}",
            f"Put the {xc} {xs} block into the {cc} {cat}, then put the object "
            f"that sat on its {side} side into the same {cat}.",
            code,
            src(), ["manipulate_old_neighbor"],
        ))

    samec = [
        ("green", "white", "box"),
        ("red", "cyan", "bowl"),
        ("blue", "orange", "pan"),
        ("yellow", "gray", "box"),
        ("purple", "brown", "bowl"),
        ("cyan", "pink", "pan"),
    ]
    for i, (ca, cc, cat) in enumerate(samec):
        out.append(entry(
            f"samec-{i:02d}",
            f"Move all the objects with the same color as the {ca} cube into the {cc} {cat}.",
            f'pick_place(obj="all the objects with the same color as the {ca} cube", target="the {cc} {cat}")\n',
            src(), ["same_color"],
        ))

    sames = [
        ("yellow", "ring", "blue", "pan"),
        ("red", "round", "white", "box"),
        ("cyan", "star", "green", "bowl"),
        ("white", "cross", "brown", "box"),
        ("orange", "diamond", "cyan", "box"),
        ("pink", "triangle", "red", "bowl"),
    ]
    for i, (ac, ash, cc, cat) in enumerate(sames):
        out.append(entry(
            f"sames-{i:02d}",
            f"Move all the objects with the same shape as the {ac} {ash} block into the {cc} {cat}.",
            f'pick_place(obj="all the objects with the same shape as the {ac} {ash} block", target="the {cc} {cat}")\n',
            src(), ["same_shape"],
        ))

    intf = [
        ("pink", "square", "cyan", "bowl", "white", "diamond"),
        ("brown", "ring", "red", "box", "green", "star"),
        ("gray", "heart", "cyan", "box", "blue", "ring"),
        ("white", "round", "green", "bowl", "orange", "l-shaped"),
        ("cyan", "triangle", "pink", "box", "gray", "hexagon"),
        ("blue", "diamond", "orange", "pan", "red", "square"),
    ]
    for i, (dc, ds, cc, cat, tc, ts) in enumerate(intf):
        code = (
            f'distract(obj="the {dc} {ds} block")\n'
            f'pick_place(obj="the {tc} {ts} block", target="the {cc} {cat}")\n'
        )
        out.append(entry(
            f"intf-{i:02d}",
            f"A {dc} {ds} block is sitting in the {cc} {cat}. Move it out of the way first, "
            f"then put the {tc} {ts} block into the {cc} {cat}.",
            code,
            src(), ["interfering_manipulation"],
        ))

    return out


# Bait entries: instruction text concentrated on the verb frame of rewritten
# queries ("pick up ... place it into ...") with no colors, shapes, or other
# high-IDF words, so keyword scoring ranks them low while bag-of-words
# semantic similarity ranks them high. Their code references objects that
# never exist, so parroting them always fails an episode.
_BAIT_CODE = 'pick_place(obj="the ivory dodecahedron", target="the velvet drawer")\n'

BAITS = [
    "pick up the block. place it into the bowl. pick up the block. place it into the bowl. pick up the block. place it into the bowl.",
    "pick up the block. place it into the pan. pick up the block. place it into the pan. pick up the block. place it into the pan.",
    "pick up the block. place it into the box. pick up the block. place it into the box. pick up the block. place it into the box.",
    "pick up the block. place it into the bowl. place it into the bowl. place it into the bowl. pick up the block. place it into the bowl. place it into the bowl.",
    "pick up the block. place it into the box. then pick up the object. place it into the same box. pick up the block. place it into the same box.",
    "pick up the block. place it into the pan. then pick up the object. place it into the same pan.",
    "pick up each block. place it into the bowl. pick up each block. place it into the bowl. place it into the bowl.",
    "pick up the block. place it. pick up the block. place it. pick up the block. place it into the bowl.",
]

JUNK = [
    ("Water the fern on the windowsill every second morning before sunrise.",
     'water_plant(plant="fern", schedule="alternate-mornings")\n'),
    ("Fold the laundry pile and stack the towels on the wooden shelf.",
     "for towel in laundry_pile:\n    fold(towel)\n    stack(towel, shelf)\n"),
    ("Descale the espresso machine and rinse the portafilter twice.",
     'descale(machine="espresso")\nrinse(part="portafilter", times=2)\n'),
    ("Charge the vacuum robot overnight and empty its dust bin at dawn.",
     'dock(robot="vacuum")\nschedule(task="empty_bin", at="dawn")\n'),
    ("Alphabetize the paperback novels on the second shelf of the corner case.",
     "books.sort(key=title)\n"),
    ("Wind the grandfather clock eleven turns and level its pendulum.",
     'wind(clock="grandfather", turns=11)\n'),
    ("Polish the silver candlesticks until the tarnish lifts completely.",
     'polish(item="candlesticks", until="shiny")\n'),
    ("Brew a pot of oolong tea and preheat the ceramic cups.",
     'brew(tea="oolong")\npreheat(vessel="cups")\n'),
    ("Mist the orchids twice and rotate their pots a quarter turn toward the light.",
     'mist(plant="orchids", times=2)\n'),
    ("Sharpen the chisels on the whetstone at a twenty degree bevel.",
     'sharpen(tool="chisels", bevel=20)\n'),
    ("Calibrate the bathroom scale against the reference weights.",
     'calibrate(device="scale")\n'),
    ("Sweep the porch steps and shake out the doormat near the railing.",
     "sweep_porch()\nshake(doormat)\n"),
    ("Inflate the bicycle tires to sixty psi and oil the chain lightly.",
     'inflate(tire="both", psi=60)\noil(part="chain")\n'),
    ("Defrost the freezer drawer and wipe the gasket with vinegar.",
     'defrost(compartment="drawer")\n'),
    ("Replace the smoke detector batteries in the upstairs hallway.",
     'replace_battery(device="smoke_detector", location="hallway")\n'),
    ("Prune the rosemary bush back to the second node on each stem.",
     'prune(plant="rosemary", node=2)\n'),
    ("Archive last quarter's invoices into the fireproof cabinet.",
     "archive(invoices, cabinet)\n"),
    ("Tune the ukulele to open tuning and wipe the fretboard.",
     'tune(instrument="ukulele", tuning="open")\n'),
    ("Season the cast iron skillet and hang it above the stove.",
     'season(pan="cast_iron")\nhang(pan, hook="stove")\n'),
    ("Refill the stapler and the tape dispenser on the reception desk.",
     "refill(stapler)\nrefill(tape_dispenser)\n"),
    ("Label the spice jars and arrange them by cuisine on the rack.",
     "for jar in spices:\n    label(jar)\n",),
    ("Bleed the radiator valves starting from the one farthest from the boiler.",
     'bleed(radiator="all", order="farthest-first")\n'),
    ("Hem the curtains two centimeters and press the pleats flat.",
     'hem(curtains, amount="2cm")\n'),
    ("Back up the workstation to the external drive and verify checksums.",
     "backup(src=workstation, dst=external)\nverify(checksums)\n"),
    ("Glaze the ceramic mugs and load the kiln for a slow bisque firing.",
     'glaze(mugs)\nfire(kiln, profile="slow-bisque")\n'),
    ("Reseat the graphics card and tidy the case cables with velcro ties.",
     "reseat(gpu)\ntidy(cables)\n"),
    ("Soak the paint brushes in turpentine and dry them bristle up.",
     'soak(brushes, solvent="turpentine")\n'),
    ("Proof the sourdough starter overnight at room temperature.",
     "proof(starter, hours=10)\n"),
    ("Wax the surfboard deck in overlapping circles from nose to tail.",
     "wax(board, pattern=circles)\n"),
    ("Hang the framed botanical prints level above the reading chair.",
     "hang(prints, level=True)\n"),
    ("Degauss the old monitor and recycle it at the depot on Fifth Street.",
     "degauss(monitor)\nrecycle(monitor)\n"),
    ("Reorganize the pantry so the oldest cans face forward.",
     'rotate_stock(pantry, policy="fifo")\n'),
    ("Lubricate the garage door rollers and tighten the track bolts.",
     "lubricate(rollers)\ntighten(bolts)\n"),
    ("Steam the wrinkles out of the linen tablecloth before the banquet.",
     "steam(tablecloth)\n"),
    ("Balance the ceiling fan blades with the clip-on weights.",
     "balance(fan, weights)\n"),
    ("Catalog the vinyl records by label and pressing year.",
     "catalog(records, keys=[label, year])\n"),
    ("Flush the water heater sediment through the drain spigot.",
     "flush(heater)\n"),
    ("Re-pot the basil into the terracotta planter with fresh compost.",
     'repot(plant="basil", pot="terracotta")\n'),
    ("Stitch the torn canvas tote along the seam with waxed thread.",
     "stitch(tote, thread=waxed)\n"),
    ("Grease the stand mixer gears and test the lowest speed.",
     "grease(mixer)\ntest(mixer, speed=1)\n"),
    ("Scrub the grill grates with the wire brush and burn off the residue.",
     "scrub(grates)\nburnoff(grill)\n"),
    ("Update the firmware on the thermostat and restore the schedule.",
     "update(thermostat)\nrestore(schedule)\n"),
    ("Organize the junk drawer with the bamboo dividers.",
     "organize(drawer, dividers)\n"),
    ("Bind the loose manuscript pages with the brass fasteners.",
     "bind(pages, fasteners)\n"),
    ("Whittle a replacement peg for the coat rack from the oak dowel.",
     "whittle(dowel, shape=peg)\n"),
    ("Silence the squeaky stair tread with powdered graphite.",
     "apply(graphite, tread)\n"),
    ("Rotate the mattress head to foot and air the duvet by the window.",
     "rotate(mattress)\nair(duvet)\n"),
    ("Decant the olive oil into the dark glass cruet for the counter.",
     "decant(oil, cruet)\n"),
]


def distractor_entries():
    out = []
    for i, text in enumerate(BAITS):
        out.append(entry(
            f"zz-bait-{i:02d}", text, _BAIT_CODE,
            "scraped-logs", ["junk"],
        ))
    for i, (text, code) in enumerate(JUNK):
        out.append(entry(
            f"zz-junk-{i:02d}", text, code,
            "forum-dump" if i % 2 else "wiki-snippets", ["junk"],
        ))
    return out


def write_jsonl(path: Path, entries):
    entries = sorted(entries, key=lambda e: e["id"])
    lines = [json.dumps(e, ensure_ascii=False, sort_keys=True) for e in entries]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(entries)} entries)")


def main():
    seeds = seed_entries()
    write_jsonl(DATA / "corpus.jsonl", seeds)
    write_jsonl(DATA / "corpus_distractor.jsonl", seeds + distractor_entries())

    from ragplan.corpus import load_codebase
    cb = load_codebase(DATA / "corpus.jsonl")
    sources = {e.source for e in cb}
    assert len(cb) >= 50, len(cb)
    assert len(sources) >= 10, sources
    cb2 = load_codebase(DATA / "corpus_distractor.jsonl")
    junk = [e for e in cb2 if "junk" in e.tags]
    assert len(junk) >= 50, len(junk)
    print(f"seed corpus: {len(cb)} entries across {len(sources)} sources; "
          f"distractor corpus: {len(cb2)} entries ({len(junk)} junk)")


if __name__ == "__main__":
    main()
