"""Command-line entry point: index, retrieve, rewrite, plan, run, eval,
ablate, and sweep subcommands over one engine configuration.

Exit codes: 0 success, 2 configuration error, 3 runtime pipeline error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import evaluation
from .config import (
    DEFAULT_DISTRACTOR_CORPUS_PATH,
    EngineConfig,
    apply_cli_overrides,
    config_fingerprint,
    load_config,
    parse_seed_range,
)
from .corpus import load_codebase
from .embedding import CachingProvider, HashEmbedder, RemoteEmbedder
from .errors import ConfigError, RagplanError
from .evaluation import RunContext, run_suite
from .gateway import Gateway
from .plan_dsl import parse_plan, render_plan, validate_plan
from .prompting import assemble, load_template
from .retrieval import Query, run_pipeline
from .sim.scene import render_scene
from .sim.tasks import FAMILIES, generate_task


def _provider(cfg: EngineConfig):
    if cfg.embedding.provider == "hash":
        return CachingProvider(HashEmbedder(cfg.embedding.dim))
    if cfg.embedding.provider == "remote":
        if not cfg.embedding.endpoint:
            raise ConfigError("remote embedding provider needs an endpoint")
        return CachingProvider(RemoteEmbedder(cfg.embedding.endpoint, cfg.embedding.model, cfg.embedding.dim))
    raise ConfigError(f"unknown embedding provider {cfg.embedding.provider!r}")


def _gateway(cfg: EngineConfig, model: str | None = None) -> Gateway:
    g = cfg.gateway
    return Gateway(
        mode=g.mode,
        endpoint=g.endpoint,
        model=model or g.model,
        cassette=g.cassette or None,
        temperature=g.temperature,
        timeout=g.timeout,
        max_retries=g.max_retries,
    )


# families covered by the shipped replay cassette for ablate/sweep
SUITE_FAMILIES = ("rearrange", "pick_in_order_then_restore", "manipulate_old_neighbor")


def _families(args, default=FAMILIES) -> list[str]:
    if getattr(args, "families", None):
        fams = []
        for chunk in args.families:
            fams.extend(f for f in chunk.split(",") if f)
        return fams
    return list(default)


def _suite(args, default=FAMILIES) -> list[tuple[str, int]]:
    seeds = parse_seed_range(getattr(args, "seeds", "0..9"))
    return [(f, s) for f in _families(args, default) for s in seeds]


# --- subcommands ---

def cmd_index(args, cfg: EngineConfig) -> int:
    cb = load_codebase(cfg.corpus)
    sources = sorted({e.source for e in cb})
    tags = sorted({t for e in cb for t in e.tags})
    print(f"ok: {len(cb)} entries, {len(sources)} sources, {len(tags)} tags")
    if args.verbose:
        for e in cb:
            print(f"  {e.id:<28} [{e.source}] {e.instruction[:60]}")
    return 0


def cmd_retrieve(args, cfg: EngineConfig) -> int:
    cb = load_codebase(cfg.corpus)
    provider = _provider(cfg)
    gateway = _gateway(cfg, model=cfg.gateway.rewriter_model) if cfg.retrieval.rewrite_enabled and cfg.retrieval.ramp_enabled else None
    q = Query(raw=args.query)
    ranked = run_pipeline(q, cb, cfg.retrieval, gateway, provider)
    print(f"{'rank':>4} {'id':<28} {'score_cr':>10} {'score_fr':>10} {'fused':>10}")
    for c in ranked:
        fr = f"{c.score_fr:.4f}" if c.score_fr is not None else "-"
        fused = f"{c.fused:.4f}" if c.fused is not None else "-"
        print(f"{c.rank:>4} {c.entry.id:<28} {c.score_cr:>10.4f} {fr:>10} {fused:>10}")
    return 0


def cmd_rewrite(args, cfg: EngineConfig) -> int:
    gateway = _gateway(cfg, model=cfg.gateway.rewriter_model)
    from .retrieval import rewrite_instruction

    q = rewrite_instruction(Query(raw=args.query), gateway)
    print(q.rewritten)
    return 0


def cmd_plan(args, cfg: EngineConfig) -> int:
    cb = load_codebase(cfg.corpus)
    provider = _provider(cfg)
    template = load_template(cfg.template)
    scene, task = generate_task(args.family, args.plan_seed)
    raw = args.query or task.instruction
    q = Query(raw=raw, scene_image=render_scene(scene))
    gateway = _gateway(cfg, model=cfg.gateway.rewriter_model) if cfg.retrieval.rewrite_enabled and cfg.retrieval.ramp_enabled else None
    ranked = run_pipeline(q, cb, cfg.retrieval, gateway, provider)
    bundle = assemble(template, q, ranked)
    if args.show_prompt:
        print(bundle.text)
        return 0
    if args.dry_run:
        print(f"demos: {', '.join(bundle.demo_order)}")
        print(f"token_estimate: {bundle.token_estimate}")
        return 0
    gen = _gateway(cfg)
    text = gen.complete_multimodal(bundle)
    program = parse_plan(text)
    for warning in validate_plan(program):
        print(f"warning: {warning}", file=sys.stderr)
    print(render_plan(program), end="")
    return 0


def cmd_run(args, cfg: EngineConfig) -> int:
    cb = load_codebase(cfg.corpus)
    provider = _provider(cfg)
    template = load_template(cfg.template)
    gateway = _gateway(cfg) if args.planner == "gateway" else None
    ctx = RunContext(
        codebase=cb,
        retrieval=cfg.retrieval,
        template=template,
        gateway=gateway,
        provider=provider,
        fingerprint=config_fingerprint(cfg, args.planner),
    )
    if args.seeds is None:
        args.seeds = cfg.simulator.seeds
    suite = _suite(args, default=cfg.simulator.families or FAMILIES)
    records = run_suite(suite, args.planner, ctx, jobs=args.jobs)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    evaluation.write_results(records, out / "results.jsonl")
    report = evaluation.render_sr_report(records)
    (out / "summary.txt").write_text(report, encoding="utf-8")
    print(report, end="")
    print(f"results written to {out}")
    return 0


def cmd_eval(args, cfg: EngineConfig) -> int:
    did_something = False
    if args.records:
        records = []
        for path in args.records:
            records.extend(evaluation.load_results(path))
        report = evaluation.render_sr_report(records)
        print(report, end="")
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "sr_report.txt").write_text(report, encoding="utf-8")
        did_something = True
    if args.detections:
        fixtures = evaluation.load_fixtures(args.detections)
        lines = [f"{'threshold':>9} {'mAP':>8}"]
        for thr in args.thresholds:
            lines.append(f"{thr:>9.2f} {evaluation.mean_ap(fixtures, thr):>8.4f}")
        report = "\n".join(lines) + "\n"
        print(report, end="")
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "map_report.txt").write_text(report, encoding="utf-8")
        did_something = True
    if not did_something:
        raise ConfigError("eval needs --records and/or --detections")
    return 0


def cmd_ablate(args, cfg: EngineConfig) -> int:
    cb = load_codebase(cfg.corpus)
    provider = _provider(cfg)
    template = load_template(cfg.template)
    gateway = _gateway(cfg)
    suite = _suite(args, default=SUITE_FAMILIES)
    results = evaluation.run_ablation(
        suite, cfg.retrieval, gateway, provider, cb, template,
        jobs=args.jobs, fingerprint=config_fingerprint(cfg, "gateway"),
    )
    report = evaluation.render_ablation_report(results)
    print(report, end="")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ablation.txt").write_text(report, encoding="utf-8")
    all_records = [r for res in results.values() for r in res["records"]]
    evaluation.write_results(all_records, out / "ablation_records.jsonl")
    print(f"results written to {out}")
    return 0


def cmd_sweep(args, cfg: EngineConfig) -> int:
    cb = load_codebase(cfg.corpus)
    provider = _provider(cfg)
    template = load_template(cfg.template)
    gateway = _gateway(cfg)
    suite = _suite(args, default=SUITE_FAMILIES)
    lambdas = [float(v) for v in args.lambdas.split(",") if v != ""]
    metrics = [m for m in args.metrics.split(",") if m]
    sweep = evaluation.sweep_lambda(
        suite, lambdas, metrics, cfg.retrieval, gateway, provider, cb, template,
        jobs=args.jobs, fingerprint=config_fingerprint(cfg, "gateway"),
    )
    report = evaluation.render_sweep_report(sweep)
    print(report, end="")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.txt").write_text(report, encoding="utf-8")
    evaluation.write_results(sweep["records"], out / "sweep_records.jsonl")
    print(f"results written to {out}")
    return 0


# --- parser ---

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="engine config file (JSON)")
    p.add_argument("--corpus", help="corpus file path")
    p.add_argument("--template", help="prompt template path")
    p.add_argument("--metric", choices=["tfidf", "bm25", "embedding"])
    p.add_argument("--K", dest="coarse_k", type=int, help="coarse recall size")
    p.add_argument("--k", dest="final_k", type=int, help="demonstrations kept")
    p.add_argument("--lambda", dest="fuse_lambda", type=float, help="fusion weight on the coarse score")
    p.add_argument("--no-rewrite", action="store_true", help="disable the instruction rewriter")
    p.add_argument("--no-rerank", action="store_true", help="disable the fine reranker")
    p.add_argument("--no-reorder", action="store_true", help="disable reordering by the fused score")
    p.add_argument("--no-coarse", action="store_true", help="disable coarse recall (rerank the whole corpus)")
    p.add_argument("--no-ramp", action="store_true", help="disable retrieval entirely; sample demos at random")
    p.add_argument("--seed", type=int, help="seed for random demo sampling")
    p.add_argument("--llm-mode", choices=["live", "replay", "record"], help="gateway mode")
    p.add_argument("--cassette", help="cassette file for replay/record")
    p.add_argument("--endpoint", help="chat-completions endpoint base URL")
    p.add_argument("--model", help="generator model identifier")
    p.add_argument("--jobs", type=int, default=1, help="parallel episode workers")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ragplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="validate and summarize a corpus file")
    p.add_argument("--validate", action="store_true", help="validate the corpus (default behavior)")
    p.add_argument("--verbose", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="rank demonstrations for a query")
    p.add_argument("query")
    _add_common(p)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("rewrite", help="rewrite an instruction to its core form")
    p.add_argument("query")
    _add_common(p)
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("plan", help="generate a plan for a seeded task scene")
    p.add_argument("query", nargs="?", help="override the task instruction")
    p.add_argument("--family", default="visual_manipulation", choices=FAMILIES)
    p.add_argument("--plan-seed", type=int, default=0, help="task scene seed")
    p.add_argument("--show-prompt", action="store_true")
    p.add_argument("--dry-run", action="store_true", help="stop after prompt assembly")
    _add_common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="run episodes and write results")
    p.add_argument("--family", "--families", dest="families", action="append", help="family or comma list (repeatable)")
    p.add_argument("--seeds", default=None, help="seed range like 0..9 (default from config)")
    p.add_argument("--planner", default="gateway", choices=["gateway", "scripted", "random"])
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="aggregate results files / detection fixtures")
    p.add_argument("--records", action="append", help="results.jsonl path (repeatable)")
    p.add_argument("--detections", help="detection fixtures JSON")
    p.add_argument("--thresholds", type=lambda s: [float(x) for x in s.split(",")], default=[0.3, 0.5, 0.75])
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="run the component ablation grid")
    p.add_argument("--family", "--families", dest="families", action="append")
    p.add_argument("--seeds", default="0..4")
    _add_common(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="run the lambda x metric sweep grid")
    p.add_argument("--family", "--families", dest="families", action="append")
    p.add_argument("--seeds", default="0..4")
    p.add_argument("--lambdas", default="0,0.25,0.5,0.75,1")
    p.add_argument("--metrics", default="tfidf,bm25,embedding")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if getattr(args, "config", None) else EngineConfig()
        cfg = apply_cli_overrides(cfg, args)
        cfg.retrieval.validate()
        if args.command in ("ablate", "sweep") and not getattr(args, "corpus", None) and cfg.corpus == EngineConfig().corpus:
            # retrieval experiments are meaningful against the distractor corpus
            cfg = replace(cfg, corpus=str(DEFAULT_DISTRACTOR_CORPUS_PATH))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RagplanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
