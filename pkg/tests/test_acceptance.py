"""Acceptance suite: one test per release criterion, at the stated tolerance.

Each test prints a PASS line so a -s run reads as a checklist.
"""

import json
import math
import random
import time

import pytest

from conftest import make_entry
from ragplan import lexical
from ragplan.cli import main as cli_main
from ragplan.config import DEFAULT_CORPUS_PATH, DEFAULT_DISTRACTOR_CORPUS_PATH, DEFAULT_CASSETTE_PATH
from ragplan.corpus import load_codebase
from ragplan.embedding import CachingProvider, HashEmbedder
from ragplan.evaluation import (
    DetectionFixture,
    EpisodeRecord,
    mean_ap,
    render_sr_report,
    run_ablation,
    success_rate,
)
from ragplan.gateway import Gateway
from ragplan.lexical import Bm25Params, build_stats, idf_bm25, idf_tfidf, score_bm25, score_tfidf
from ragplan.prompting import assemble, load_template
from ragplan.retrieval import Query, RankedCandidate, RetrievalConfig, fuse_and_rank
from ragplan.sim.executor import execute_plan
from ragplan.sim.planners import oracle_plan, random_plan
from ragplan.sim.references import resolve_reference
from ragplan.sim.scene import Scene, SceneObject
from ragplan.sim.tasks import FAMILIES, generate_task, is_success


def _report(num, text):
    print(f"ACCEPTANCE {num:02d} PASS: {text}")


# --- 1. scoring oracle equivalence ---

def _oracle_tfidf(q, doc, all_docs):
    n = len(all_docs)
    total = 0.0
    for term in set(q):
        if term in doc:
            df = sum(1 for d in all_docs.values() if term in d)
            total += math.log(n / (df + 1)) * (q.count(term) / len(q))
    return total


def _oracle_bm25(q, doc_id, all_docs, k1=1.2, b=0.75):
    n = len(all_docs)
    avg = sum(len(d) for d in all_docs.values()) / n
    doc = all_docs[doc_id]
    total = 0.0
    for term in set(q):
        if term in doc:
            df = sum(1 for d in all_docs.values() if term in d)
            idf = math.log((n - df + 0.5) / (df + 0.5) + 1)
            t = q.count(term) / len(q)
            w = t * (k1 + 1) / (t + k1 * (1 - b + b * len(q) / avg))
            total += idf * w
    return total


def test_acceptance_01_scoring_oracle_equivalence():
    rng = random.Random(20240501)
    params = Bm25Params(k1=1.2, b=0.75)
    vocab = [f"w{i}" for i in range(15)]
    start = time.perf_counter()
    checked = 0
    for _ in range(200):
        docs = {
            f"d{i}": [rng.choice(vocab) for _ in range(rng.randint(1, 20))]
            for i in range(rng.randint(1, 10))
        }
        stats = build_stats(docs)
        q = [rng.choice(vocab) for _ in range(rng.randint(1, 20))]
        for doc_id, doc in docs.items():
            got_t, want_t = score_tfidf(q, doc, stats), _oracle_tfidf(q, doc, docs)
            assert got_t == pytest.approx(want_t, rel=1e-9, abs=1e-12)
            got_b, want_b = score_bm25(q, doc_id, stats, params), _oracle_bm25(q, doc_id, docs)
            assert got_b == pytest.approx(want_b, rel=1e-9, abs=1e-12)
            checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"oracle sweep took {elapsed:.2f}s"
    _report(1, f"tfidf/bm25 match brute force on 200 corpora ({checked} doc scores) in {elapsed:.2f}s")


# --- 2. formula spot values ---

def test_acceptance_02_idf_spot_values():
    stats = lexical.CorpusStats(doc_count=4, doc_freq={"t": 1}, avg_len=1.0)
    assert abs(idf_tfidf("t", stats) - math.log(2)) <= 1e-12
    assert abs(idf_bm25("t", stats) - math.log(10 / 3)) <= 1e-12
    _report(2, "idf spot values ln 2 and ln(10/3) at |C|=4, df=1 within 1e-12")


# --- 3. fusion degeneracy ---

def test_acceptance_03_fusion_degeneracy():
    rng = random.Random(777)
    for trial in range(100):
        n = rng.randint(2, 12)
        cands = []
        for i in range(n):
            c = RankedCandidate(entry=make_entry(f"c{i:02d}", f"text {i}"))
            c.score_cr = rng.choice([rng.uniform(-3, 3), round(rng.uniform(0, 1), 1)])
            c.score_fr = rng.choice([rng.uniform(0.01, 0.99), round(rng.uniform(0, 1), 1)])
            cands.append(c)
        k = rng.randint(1, n)
        got1 = fuse_and_rank(list(cands), RetrievalConfig(coarse_k=n, final_k=k, fuse_lambda=1.0))
        want1 = sorted(cands, key=lambda c: (-c.score_cr, c.entry.id))[:k]
        assert [c.entry.id for c in got1] == [c.entry.id for c in want1]
        got0 = fuse_and_rank(list(cands), RetrievalConfig(coarse_k=n, final_k=k, fuse_lambda=0.0))
        want0 = sorted(cands, key=lambda c: (-c.score_fr, c.entry.id))[:k]
        assert [c.entry.id for c in got0] == [c.entry.id for c in want0]
    _report(3, "lambda=1 equals coarse and lambda=0 equals fine ranking on 100 random sets")


# --- 4. reverse demonstration order ---

def test_acceptance_04_reverse_order_property():
    template = load_template()
    cb = load_codebase(DEFAULT_CORPUS_PATH)
    rng = random.Random(4242)
    entries = list(cb.entries)
    for fixture in range(50):
        k = rng.randint(1, 4)
        picked = rng.sample(entries, k)
        ranked = []
        for rank, e in enumerate(picked, start=1):
            c = RankedCandidate(entry=e)
            c.rank = rank
            ranked.append(c)
        bundle = assemble(template, Query(raw=f"fixture query {fixture}"), ranked)
        assert bundle.demo_order[-1] == picked[0].id  # rank 1 placed last
        assert bundle.demo_order == tuple(e.id for e in reversed(picked))
        positions = [bundle.text.index(e.code.rstrip("\n")) for e in picked]
        assert positions == sorted(positions, reverse=True)
    _report(4, "rank-1 demonstration is the final block in all 50 assembled prompts")


# --- 5. defaults and prompt budget ---

def test_acceptance_05_defaults_and_token_budget():
    cfg = RetrievalConfig()
    assert (cfg.coarse_k, cfg.final_k, cfg.fuse_lambda, cfg.metric) == (5, 2, 0.25, "tfidf")
    template = load_template()
    cb = load_codebase(DEFAULT_CORPUS_PATH)
    ranked = []
    for rank, e in enumerate(cb.entries[:2], start=1):
        c = RankedCandidate(entry=e)
        c.rank = rank
        ranked.append(c)
    bundle = assemble(template, Query(raw="Please place the red heart block into the green bowl."), ranked)
    assert abs(bundle.token_estimate - 8000) <= 0.25 * 8000, bundle.token_estimate
    _report(5, f"defaults K=5 k=2 lambda=0.25 tfidf; full prompt estimates {bundle.token_estimate} tokens")


# --- 6. reference resolver scenarios ---

def _blk(oid, color, shape, cx, cy, name="block", size=40.0, props=None):
    h = size / 2.0
    return SceneObject(id=oid, name=name, color=color, shape=shape,
                       bbox=(cx - h, cy - h, cx + h, cy + h), properties=dict(props or {}))


def _middle_scene(rng):
    y = rng.uniform(150, 500)
    x1 = rng.uniform(80, 300)
    x2 = x1 + rng.uniform(250, 400)
    mid = _blk("y-mid", "yellow", "square", (x1 + x2) / 2 + rng.uniform(-30, 30), y + rng.uniform(-8, 8))
    off_line = _blk("y-off", "yellow", "square", (x1 + x2) / 2, y + rng.choice([-1, 1]) * rng.uniform(60, 90))
    outside = _blk("y-out", "yellow", "square", x2 + rng.uniform(80, 150), y + rng.uniform(-5, 5))
    scene = Scene(objects=(
        _blk("b1", "blue", "square", x1, y),
        _blk("b2", "blue", "square", x2, y),
        mid, off_line, outside,
        _blk("d1", "green", "round", rng.uniform(60, 900), rng.uniform(580, 660)),
    ))
    return scene, "the yellow block in the middle of the blue blocks", {"y-mid"}


def _same_color_scene(rng):
    n_blue = rng.randint(1, 3)
    objs = [_blk("cube", "blue", "cube", rng.uniform(100, 900), rng.uniform(150, 300), name="cube")]
    expected = set()
    for i in range(n_blue):
        oid = f"blue-{i}"
        objs.append(_blk(oid, "blue", rng.choice(["round", "star", "heart"]), 100 + 120 * i, 450))
        expected.add(oid)
    for i in range(rng.randint(1, 3)):
        objs.append(_blk(f"other-{i}", rng.choice(["red", "green", "yellow"]), "square", 150 + 130 * i, 600))
    return Scene(objects=tuple(objs)), "all the objects with the same color of the blue cube", expected


def _bottom_scene(rng):
    px = rng.uniform(200, 800)
    py = rng.uniform(250, 400)
    lower = _blk("o-low", "orange", "square", px + rng.uniform(-40, 40), py + rng.uniform(80, 200))
    upper = _blk("o-up", "orange", "square", px + rng.uniform(-40, 40), py - rng.uniform(80, 180))
    scene = Scene(objects=(
        _blk("purple", "purple", "square", px, py),
        lower, upper,
        _blk("d", "cyan", "round", rng.uniform(60, 900), rng.uniform(60, 100)),
    ))
    return scene, "the orange block at the bottom of the purple block", {"o-low"}


def _repair_scene(rng):
    objs = [
        _blk("tv", "black", "flat", rng.uniform(100, 400), rng.uniform(150, 300), name="television", size=80),
        _blk("sd", rng.choice(["gray", "red"]), "flat", rng.uniform(500, 900), rng.uniform(150, 300),
             name="screwdriver", props={"fixes": "television"}),
        _blk("sp", "yellow", "flat", rng.uniform(100, 900), rng.uniform(450, 600),
             name="sponge", props={"cleans": "television"}),
        _blk("hm", "brown", "flat", rng.uniform(100, 900), rng.uniform(620, 680), name="hammer"),
    ]
    return Scene(objects=tuple(objs)), "an object capable of repairing the television", {"sd"}


def test_acceptance_06_reference_resolver_scenarios():
    builders = [_middle_scene, _same_color_scene, _bottom_scene, _repair_scene]
    total = 0
    for builder in builders:
        for seed in range(20):
            rng = random.Random(f"{builder.__name__}:{seed}")
            scene, expr, expected = builder(rng)
            got = {o.id for o in resolve_reference(scene, expr)}
            assert got == expected, (builder.__name__, seed, got, expected)
            total += 1
    _report(6, f"all {total} seeded resolver scenarios resolve to the exact expected sets")


# --- 7. simulator calibration ---

def test_acceptance_07_simulator_calibration():
    start = time.perf_counter()
    oracle_records, random_records = [], []
    for family in FAMILIES:
        for seed in range(50):
            scene, task = generate_task(family, seed)
            final, log = execute_plan(scene, oracle_plan(task))
            oracle_records.append(EpisodeRecord(family, seed, "oracle",
                                                "success" if is_success(task, scene, final, log) else "failure:x", len(log.steps)))
            scene2, task2 = generate_task(family, seed)
            final2, log2 = execute_plan(scene2, random_plan(scene2, task2, seed))
            random_records.append(EpisodeRecord(family, seed, "random",
                                                "success" if is_success(task2, scene2, final2, log2) else "failure:x", len(log2.steps)))
    elapsed = time.perf_counter() - start
    _, oracle_sr = success_rate(oracle_records)
    _, random_sr = success_rate(random_records)
    assert oracle_sr == 100.0
    assert random_sr < 30.0
    assert elapsed < 60.0
    _report(7, f"oracle SR 100.0, random SR {random_sr:.1f} on 9x50 grid in {elapsed:.1f}s")


# --- 8. published-average arithmetic ---

def test_acceptance_08_family_mean_arithmetic():
    values = {"fam1": 90, "fam2": 90, "fam3": 90, "fam4": 70, "fam5": 80, "fam6": 55}
    records = []
    for fam, pct in values.items():
        records += [
            EpisodeRecord(fam, i, "t", "success" if i < pct else "failure:x", 1)
            for i in range(100)
        ]
    _, overall = success_rate(records)
    assert overall == pytest.approx(475 / 6, abs=1e-12)
    report = render_sr_report(records)
    assert report.rstrip().splitlines()[-1].split()[-1] == "79.2"
    _report(8, "family means {90,90,90,70,80,55} aggregate to 79.2 at report precision")


# --- 9. ablation direction on the distractor corpus ---

def test_acceptance_09_ablation_direction():
    cb = load_codebase(DEFAULT_DISTRACTOR_CORPUS_PATH)
    junk = [e for e in cb if "junk" in e.tags]
    assert len(junk) >= 50, "distractor corpus must ship 50+ irrelevant programs"
    gateway = Gateway(mode="replay", cassette=DEFAULT_CASSETTE_PATH)
    provider = CachingProvider(HashEmbedder())
    suite = [(f, s) for f in ("rearrange", "pick_in_order_then_restore", "manipulate_old_neighbor") for s in range(5)]
    results = run_ablation(suite, RetrievalConfig(), gateway, provider, cb, load_template())
    full = results["full"]["sr"]
    wo_ramp = results["no-retrieval"]["sr"]
    wo_cr = results["no-coarse"]["sr"]
    assert full is not None and wo_ramp is not None and wo_cr is not None
    assert full > wo_ramp, f"full {full} must strictly exceed random demos {wo_ramp}"
    assert wo_cr < full, f"dropping coarse recall must degrade: {wo_cr} vs {full}"
    _report(9, f"replayed ablation SRs: full {full:.1f} > no-retrieval {wo_ramp:.1f}; no-coarse {wo_cr:.1f} < full")


# --- 10. mAP harness ---

def test_acceptance_10_map_harness():
    f1 = DetectionFixture("a", ((0, 0, 10, 10),), (((0, 0, 10, 10), 0.9),))
    f2 = DetectionFixture("b", ((0, 0, 10, 10),), (((50, 50, 60, 60), 0.8),))
    f3 = DetectionFixture(
        "c",
        ((0, 0, 10, 10), (20, 0, 30, 10)),
        (((0, 0, 10, 10), 0.9), ((25, 0, 35, 10), 0.8), ((20, 0, 30, 10), 0.7)),
    )
    fixtures = [f1, f2, f3]
    # manual PR integration: thr .5/.75 -> (1 + 0 + 5/6)/3; thr .3 -> (1 + 0 + 1)/3
    assert mean_ap(fixtures, 0.5) == pytest.approx(11 / 18, abs=1e-9)
    assert mean_ap(fixtures, 0.75) == pytest.approx(11 / 18, abs=1e-9)
    assert mean_ap(fixtures, 0.3) == pytest.approx(2 / 3, abs=1e-9)

    rng = random.Random(10)
    for _ in range(100):
        fxs = []
        for i in range(rng.randint(1, 4)):
            gts = tuple(
                (x, y, x + rng.uniform(2, 10), y + rng.uniform(2, 10))
                for x, y in ((rng.uniform(0, 80), rng.uniform(0, 80)) for _ in range(rng.randint(1, 4)))
            )
            preds = []
            for gt in gts:
                if rng.random() < 0.75:
                    dx, dy = rng.uniform(-4, 4), rng.uniform(-4, 4)
                    preds.append(((gt[0] + dx, gt[1] + dy, gt[2] + dx, gt[3] + dy), rng.random()))
            for _ in range(rng.randint(0, 2)):
                x, y = rng.uniform(0, 80), rng.uniform(0, 80)
                preds.append(((x, y, x + 6, y + 6), rng.random()))
            fxs.append(DetectionFixture(f"r{i}", gts, tuple(preds)))
        m3, m5, m7 = (mean_ap(fxs, t) for t in (0.3, 0.5, 0.75))
        assert m3 >= m5 >= m7
    _report(10, "mAP matches manual PR integration and is threshold-monotone on 100 random sets")


# --- 11. end-to-end replay determinism ---

def test_acceptance_11_replay_determinism(tmp_path):
    outs = []
    for name in ("one", "two"):
        out = tmp_path / name
        code = cli_main([
            "run", "--planner", "gateway", "--llm-mode", "replay",
            "--seeds", "0..4", "--out", str(out),
        ])
        assert code == 0
        outs.append(out)
    a, b = outs
    assert (a / "results.jsonl").read_bytes() == (b / "results.jsonl").read_bytes()
    assert (a / "summary.txt").read_bytes() == (b / "summary.txt").read_bytes()
    records = [json.loads(l) for l in (a / "results.jsonl").read_text().splitlines()]
    assert len(records) == len(FAMILIES) * 5
    assert all(r["outcome"] == "success" for r in records)
    _report(11, f"two replay runs over {len(records)} episodes produced byte-identical results files")
