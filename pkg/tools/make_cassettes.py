#!/usr/bin/env python3
"""Author the shipped replay cassette and verify it end to end.

The recorded "model" is a deterministic heuristic standing in for a real
generator: it answers with the task's reference plan when the most relevant
demonstration in the prompt (the final one) comes from the same task family,
and otherwise parrots that demonstration's code. This mirrors how in-context
plan generation degrades when retrieval feeds it irrelevant examples, which
is exactly what the ablation suite measures.

Cells recorded:
  run cells      seed corpus, full config, all families x seeds 0..4
  ablation cells distractor corpus, 5 configurations x 3 families x seeds 0..4
  sweep cells    distractor corpus, 3 metrics x 5 lambdas x 3 families x seeds 0..2

The rewriter is recorded as the task's canonical instruction form.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from ragplan.config import DEFAULT_CORPUS_PATH, DEFAULT_DISTRACTOR_CORPUS_PATH
from ragplan.corpus import load_codebase
from ragplan.embedding import CachingProvider, HashEmbedder
from ragplan.evaluation import ABLATION_CONFIGS, _episode_seed, run_ablation, run_suite, RunContext, success_rate
from ragplan.gateway import Gateway, build_messages, request_hash
from ragplan.prompting import assemble, load_template, render_rewrite_prompt
from ragplan.retrieval import Query, RetrievalConfig, run_pipeline
from ragplan.sim.planners import oracle_plan_text
from ragplan.sim.scene import render_scene
from ragplan.sim.tasks import FAMILIES, generate_task

CASSETTE = ROOT / "src" / "ragplan" / "data" / "cassettes" / "replay.jsonl"
MODEL = "gpt-4o"
TEMPERATURE = 0.0

RUN_FAMILIES = list(FAMILIES)
RUN_SEEDS = range(0, 5)
ABLATION_FAMILIES = ["rearrange", "pick_in_order_then_restore", "manipulate_old_neighbor"]
ABLATION_SEEDS = range(0, 5)
SWEEP_FAMILIES = ABLATION_FAMILIES
SWEEP_SEEDS = range(0, 3)
SWEEP_LAMBDAS = [0.0, 0.25, 0.5, 0.75, 1.0]
SWEEP_METRICS = ["tfidf", "bm25", "embedding"]


class _CanonicalRewriter:
    """Stands in for the rewrite gateway while authoring: returns the
    canonical form of the episode currently being recorded."""

    def __init__(self):
        self.canonical = ""

    def complete_text(self, prompt: str) -> str:
        return self.canonical


class _Recorder:
    def __init__(self):
        self.exchanges: dict[str, dict] = {}

    def add(self, model: str, text: str, image: bytes | None, response: str):
        h = request_hash(model, text, image, TEMPERATURE)
        if h in self.exchanges:
            if self.exchanges[h]["response_text"] != response:
                raise RuntimeError(f"hash collision with conflicting responses: {h}")
            return
        self.exchanges[h] = {
            "request_hash": h,
            "request": {"model": model, "temperature": TEMPERATURE, "messages": build_messages(text, image)},
            "response_text": response,
            "timestamp": "1970-01-01T00:00:00+00:00",
        }

    def write(self, path: Path):
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps(self.exchanges[h], ensure_ascii=True, sort_keys=True) for h in sorted(self.exchanges)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(lines)} exchanges)")


def record_cell(rec, cb, template, provider, family, seed, cfg, stats=None):
    """Record the rewrite + generation exchanges for one episode cell."""
    scene, task = generate_task(family, seed)
    if not cfg.ramp_enabled:
        cfg = replace(cfg, sample_seed=_episode_seed(family, seed, cfg.sample_seed))
    image = render_scene(scene)
    q = Query(raw=task.instruction, scene_image=image)
    rewriter = _CanonicalRewriter()
    rewriter.canonical = task.params["canonical"]
    ranked = run_pipeline(q, cb, cfg, rewriter, provider)
    if cfg.ramp_enabled and cfg.rewrite_enabled:
        rec.add(MODEL, render_rewrite_prompt(task.instruction), None, task.params["canonical"])
    bundle = assemble(template, q, ranked)
    rank1 = cb.get(bundle.demo_order[-1])
    if task.family in rank1.tags:
        response = oracle_plan_text(task)
        hit = True
    else:
        response = rank1.code
        hit = False
    rec.add(MODEL, bundle.text, bundle.image, response)
    if stats is not None:
        stats.append((family, seed, rank1.id, hit))
    return hit


def main():
    seed_cb = load_codebase(DEFAULT_CORPUS_PATH)
    dist_cb = load_codebase(DEFAULT_DISTRACTOR_CORPUS_PATH)
    template = load_template()
    provider = CachingProvider(HashEmbedder())
    base = RetrievalConfig()
    rec = _Recorder()

    # run cells: seed corpus, full config
    run_stats = []
    for family in RUN_FAMILIES:
        for seed in RUN_SEEDS:
            record_cell(rec, seed_cb, template, provider, family, seed, base, run_stats)
    misses = [s for s in run_stats if not s[3]]
    print(f"run cells: {len(run_stats)} episodes, rank-1 family hits: {len(run_stats) - len(misses)}")
    for family, seed, rank1, _hit in misses:
        print(f"  MISS {family}:{seed} rank1={rank1}")

    # ablation cells: distractor corpus, all five configurations
    abl_hits = {}
    for name, overrides in ABLATION_CONFIGS:
        cfg = replace(base, **overrides)
        hits = 0
        for family in ABLATION_FAMILIES:
            for seed in ABLATION_SEEDS:
                hits += record_cell(rec, dist_cb, template, provider, family, seed, cfg)
        abl_hits[name] = hits
    print(f"ablation rank-1 family hits per config (of {len(ABLATION_FAMILIES) * len(ABLATION_SEEDS)}):")
    print(f"  {abl_hits}")

    # sweep cells: distractor corpus, metric x lambda grid
    for metric in SWEEP_METRICS:
        for lam in SWEEP_LAMBDAS:
            cfg = replace(base, metric=metric, fuse_lambda=lam)
            for family in SWEEP_FAMILIES:
                for seed in SWEEP_SEEDS:
                    record_cell(rec, dist_cb, template, provider, family, seed, cfg)

    rec.write(CASSETTE)

    # --- verification with the real replay gateway ---
    gateway = Gateway(mode="replay", cassette=CASSETTE, model=MODEL)
    ctx = RunContext(codebase=seed_cb, retrieval=base, template=template,
                     gateway=gateway, provider=provider, fingerprint="verify")
    suite = [(f, s) for f in RUN_FAMILIES for s in RUN_SEEDS]
    records = run_suite(suite, "gateway", ctx)
    per_family, overall = success_rate(records)
    print(f"verify run cells: overall SR {overall:.1f}")
    bad = [r for r in records if not r.ok]
    for r in bad[:10]:
        print(f"  FAIL {r.family}:{r.seed} {r.outcome}")

    abl_suite = [(f, s) for f in ABLATION_FAMILIES for s in ABLATION_SEEDS]
    results = run_ablation(abl_suite, base, gateway, provider, dist_cb, template)
    srs = {name: res["sr"] for name, res in results.items()}
    print(f"verify ablation: {srs}")
    assert srs["full"] is not None and srs["no-retrieval"] is not None
    assert srs["full"] > srs["no-retrieval"], "full must beat random demos"
    assert srs["no-coarse"] is not None and srs["no-coarse"] < srs["full"], "dropping coarse recall must degrade"
    assert overall == 100.0, "run cells must all succeed"
    print("cassette verification passed")


if __name__ == "__main__":
    main()
