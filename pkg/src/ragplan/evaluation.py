"""Experimental protocol: success-rate aggregation, detection mAP, the
episode loop, and the ablation / lambda-sweep runners with report emission.

Reports are byte-deterministic for identical inputs: records are sorted
canonically, floats use fixed formatting, and the machine-readable results
file omits volatile timing fields.
"""

from __future__ import annotations

import concurrent.futures
import json
import time
import zlib
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import Codebase
from .errors import (
    ArgError,
    CassetteMiss,
    EmptyInput,
    GatewayError,
    PipelineError,
    PlanSyntaxError,
    UnknownApi,
)
from .plan_dsl import parse_plan
from .prompting import PromptTemplate, assemble
from .retrieval import Query, RetrievalConfig, run_pipeline
from .sim.executor import execute_plan
from .sim.planners import oracle_plan, random_plan
from .sim.scene import render_scene
from .sim.tasks import generate_task, is_success

PLANNERS = ("gateway", "scripted", "random")

ABLATION_CONFIGS: tuple[tuple[str, dict], ...] = (
    ("full", {}),
    ("no-coarse", {"coarse_enabled": False}),
    ("no-rewrite", {"rewrite_enabled": False}),
    ("no-reorder", {"rerank_enabled": False, "reorder_enabled": False}),
    ("no-retrieval", {"ramp_enabled": False}),
)

DEFAULT_SWEEP_LAMBDAS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_SWEEP_METRICS = ("tfidf", "bm25", "embedding")


@dataclass(frozen=True)
class EpisodeRecord:
    family: str
    seed: int
    config_fingerprint: str
    outcome: str  # "success" or "failure:<reason>"
    steps: int
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.outcome == "success"

    def to_record(self) -> dict:
        # wall_time is intentionally excluded: results files must be
        # byte-identical across runs of the same configuration.
        return {
            "family": self.family,
            "seed": self.seed,
            "config_fingerprint": self.config_fingerprint,
            "outcome": self.outcome,
            "steps": self.steps,
        }

    @classmethod
    def from_record(cls, raw: dict) -> "EpisodeRecord":
        return cls(
            family=raw["family"],
            seed=int(raw["seed"]),
            config_fingerprint=raw["config_fingerprint"],
            outcome=raw["outcome"],
            steps=int(raw["steps"]),
        )


# --- success rate ---

def success_rate(records: list[EpisodeRecord]) -> tuple[dict[str, float], float]:
    """Per-family SR (percent) and overall SR as the unweighted family mean."""
    if not records:
        raise EmptyInput("no episode records")
    by_family: dict[str, list[EpisodeRecord]] = {}
    for r in records:
        by_family.setdefault(r.family, []).append(r)
    per_family = {
        fam: 100.0 * sum(r.ok for r in recs) / len(recs)
        for fam, recs in sorted(by_family.items())
    }
    overall = sum(per_family.values()) / len(per_family)
    return per_family, overall


# --- detection metrics ---

Bbox = tuple[float, float, float, float]


@dataclass(frozen=True)
class DetectionFixture:
    ref_exp: str
    ground_truth: tuple[Bbox, ...]
    predicted: tuple[tuple[Bbox, float], ...]  # (bbox, confidence)


def iou(a: Bbox, b: Bbox) -> float:
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    iw, ih = max(0.0, ix1 - ix0), max(0.0, iy1 - iy0)
    inter = iw * ih
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def average_precision(fixture: DetectionFixture, threshold: float) -> float:
    """All-point PR integration with greedy confidence-ordered matching;
    each ground-truth box is matchable once."""
    n_gt = len(fixture.ground_truth)
    preds = sorted(fixture.predicted, key=lambda p: (-p[1], p[0]))
    if n_gt == 0:
        return 1.0 if not preds else 0.0
    if not preds:
        return 0.0
    matched = [False] * n_gt
    tp = []
    for box, _conf in preds:
        best_iou, best_j = 0.0, -1
        for j, gt in enumerate(fixture.ground_truth):
            if matched[j]:
                continue
            v = iou(box, gt)
            if v > best_iou:
                best_iou, best_j = v, j
        if best_j >= 0 and best_iou >= threshold:
            matched[best_j] = True
            tp.append(1)
        else:
            tp.append(0)
    precisions, recalls = [], []
    cum_tp = 0
    for i, hit in enumerate(tp, start=1):
        cum_tp += hit
        precisions.append(cum_tp / i)
        recalls.append(cum_tp / n_gt)
    # precision envelope, then sum over recall increments
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    ap = 0.0
    prev_r = 0.0
    for p, r in zip(precisions, recalls):
        if r > prev_r:
            ap += (r - prev_r) * p
            prev_r = r
    return ap


def mean_ap(fixtures: list[DetectionFixture], threshold: float) -> float:
    if not fixtures:
        raise EmptyInput("no detection fixtures")
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return sum(average_precision(f, threshold) for f in fixtures) / len(fixtures)


def load_fixtures(path: str | Path) -> list[DetectionFixture]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    out = []
    for item in raw:
        out.append(
            DetectionFixture(
                ref_exp=item["ref_exp"],
                ground_truth=tuple(tuple(b) for b in item["ground_truth"]),
                predicted=tuple((tuple(p["bbox"]), float(p["confidence"])) for p in item["predicted"]),
            )
        )
    return out


# --- episode loop ---

@dataclass
class RunContext:
    codebase: Codebase
    retrieval: RetrievalConfig
    template: PromptTemplate
    gateway: object | None = None
    provider: object | None = None
    fingerprint: str = "unconfigured"


def _episode_seed(family: str, seed: int, base_seed: int = 0) -> int:
    return zlib.crc32(f"{family}:{seed}:{base_seed}".encode("utf-8")) & 0xFFFF


def run_episode(family: str, seed: int, planner: str, ctx: RunContext) -> EpisodeRecord:
    """Run one (family, seed) episode; failures become outcomes, not raises."""
    start = time.perf_counter()
    scene, task = generate_task(family, seed)
    steps = 0
    try:
        if planner == "scripted":
            program = oracle_plan(task)
        elif planner == "random":
            program = random_plan(scene, task, seed)
        elif planner == "gateway":
            cfg = ctx.retrieval
            if not cfg.ramp_enabled:
                # vary the draw per episode while honoring the configured seed
                cfg = replace(cfg, sample_seed=_episode_seed(family, seed, cfg.sample_seed))
            q = Query(raw=task.instruction, scene_image=render_scene(scene))
            ranked = run_pipeline(q, ctx.codebase, cfg, ctx.gateway, ctx.provider)
            bundle = assemble(ctx.template, q, ranked)
            text = ctx.gateway.complete_multimodal(bundle)
            program = parse_plan(text)
        else:
            raise ValueError(f"unknown planner {planner!r}")
    except CassetteMiss:
        outcome = "failure:CassetteMiss"
        return EpisodeRecord(family, seed, ctx.fingerprint, outcome, 0, time.perf_counter() - start)
    except (PlanSyntaxError, UnknownApi, ArgError):
        outcome = "failure:PlanParse"
        return EpisodeRecord(family, seed, ctx.fingerprint, outcome, 0, time.perf_counter() - start)
    except PipelineError as exc:
        if isinstance(exc.cause, CassetteMiss):
            outcome = "failure:CassetteMiss"
        else:
            outcome = f"failure:Pipeline:{exc.stage}"
        return EpisodeRecord(family, seed, ctx.fingerprint, outcome, 0, time.perf_counter() - start)
    except GatewayError as exc:
        outcome = f"failure:Gateway:{type(exc).__name__}"
        return EpisodeRecord(family, seed, ctx.fingerprint, outcome, 0, time.perf_counter() - start)

    steps = len(program)
    final, log = execute_plan(scene, program)
    if log.aborted:
        outcome = f"failure:{log.aborted}"
    elif is_success(task, scene, final, log):
        outcome = "success"
    else:
        outcome = "failure:GoalNotReached"
    return EpisodeRecord(family, seed, ctx.fingerprint, outcome, steps, time.perf_counter() - start)


def run_suite(
    episodes: list[tuple[str, int]],
    planner: str,
    ctx: RunContext,
    jobs: int = 1,
) -> list[EpisodeRecord]:
    """Run episodes (in parallel when jobs > 1) and return canonically sorted records."""
    if jobs <= 1:
        records = [run_episode(f, s, planner, ctx) for f, s in episodes]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda fs: run_episode(fs[0], fs[1], planner, ctx), episodes))
    return sorted(records, key=lambda r: (r.family, r.seed, r.config_fingerprint))


# --- ablation and sweep runners ---

def _cell_sr(records: list[EpisodeRecord]) -> float | None:
    """SR for one grid cell; None when any episode missed its cassette."""
    if any(r.outcome == "failure:CassetteMiss" for r in records):
        return None
    _, overall = success_rate(records)
    return overall


def run_ablation(
    suite: list[tuple[str, int]],
    base: RetrievalConfig,
    gateway,
    provider,
    codebase: Codebase,
    template: PromptTemplate,
    jobs: int = 1,
    fingerprint: str = "ablation",
) -> dict[str, dict]:
    """SR per configuration in {full, no-coarse, no-rewrite, no-reorder, no-retrieval}."""
    results: dict[str, dict] = {}
    for name, overrides in ABLATION_CONFIGS:
        cfg = replace(base, **overrides)
        ctx = RunContext(
            codebase=codebase, retrieval=cfg, template=template,
            gateway=gateway, provider=provider, fingerprint=f"{fingerprint}:{name}",
        )
        records = run_suite(suite, "gateway", ctx, jobs=jobs)
        results[name] = {"sr": _cell_sr(records), "records": records}
    return results


def sweep_lambda(
    suite: list[tuple[str, int]],
    values: list[float],
    metrics: list[str],
    base: RetrievalConfig,
    gateway,
    provider,
    codebase: Codebase,
    template: PromptTemplate,
    jobs: int = 1,
    fingerprint: str = "sweep",
) -> dict:
    """SR grid over (metric, lambda) cells plus the argmax cell."""
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"lambda {v} outside [0, 1]")
    grid: dict[tuple[str, float], float | None] = {}
    all_records: list[EpisodeRecord] = []
    for metric in metrics:
        for lam in values:
            cfg = replace(base, metric=metric, fuse_lambda=lam)
            ctx = RunContext(
                codebase=codebase, retrieval=cfg, template=template,
                gateway=gateway, provider=provider,
                fingerprint=f"{fingerprint}:{metric}:{lam:g}",
            )
            records = run_suite(suite, "gateway", ctx, jobs=jobs)
            grid[(metric, lam)] = _cell_sr(records)
            all_records.extend(records)
    best = None
    for key, sr in grid.items():
        if sr is not None and (best is None or sr > grid[best]):
            best = key
    return {"grid": grid, "argmax": best, "records": all_records, "metrics": list(metrics), "lambdas": list(values)}


# --- reports ---

def render_sr_report(records: list[EpisodeRecord]) -> str:
    per_family, overall = success_rate(records)
    lines = [f"{'family':<30} {'episodes':>8} {'success':>8} {'SR%':>7}"]
    by_family: dict[str, list[EpisodeRecord]] = {}
    for r in records:
        by_family.setdefault(r.family, []).append(r)
    for fam in sorted(per_family):
        recs = by_family[fam]
        lines.append(f"{fam:<30} {len(recs):>8} {sum(r.ok for r in recs):>8} {per_family[fam]:>7.1f}")
    lines.append(f"{'overall (family mean)':<30} {len(records):>8} {sum(r.ok for r in records):>8} {overall:>7.1f}")
    return "\n".join(lines) + "\n"


def render_ablation_report(results: dict[str, dict]) -> str:
    lines = [f"{'configuration':<16} {'SR%':>8}"]
    for name, _ in ABLATION_CONFIGS:
        if name not in results:
            continue
        sr = results[name]["sr"]
        lines.append(f"{name:<16} {('n/a' if sr is None else f'{sr:.1f}'):>8}")
    return "\n".join(lines) + "\n"


def render_sweep_report(sweep: dict) -> str:
    metrics, lambdas = sweep["metrics"], sweep["lambdas"]
    grid, best = sweep["grid"], sweep["argmax"]
    header = f"{'metric':<12}" + "".join(f" {('l=' + format(lam, 'g')):>10}" for lam in lambdas)
    lines = [header]
    for metric in metrics:
        row = [f"{metric:<12}"]
        for lam in lambdas:
            sr = grid[(metric, lam)]
            cell = "n/a" if sr is None else f"{sr:.1f}"
            if best == (metric, lam):
                cell += "*"
            row.append(f" {cell:>10}")
        lines.append("".join(row))
    lines.append("(* marks the best cell)")
    return "\n".join(lines) + "\n"


def write_results(records: list[EpisodeRecord], path: str | Path) -> None:
    """Machine-readable results: one canonical JSON record per episode."""
    ordered = sorted(records, key=lambda r: (r.family, r.seed, r.config_fingerprint))
    lines = [json.dumps(r.to_record(), sort_keys=True, ensure_ascii=True) for r in ordered]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_results(path: str | Path) -> list[EpisodeRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(EpisodeRecord.from_record(json.loads(line)))
    return records
