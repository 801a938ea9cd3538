"""Coarse-to-fine demonstration retrieval.

Stages: keyword/embedding coarse recall of K candidates, an LLM rewrite of the
task instruction, a semantic rerank of (rewritten query, candidate) pairs, and
a convex fusion of the two scores that picks the final k demonstrations. Each
stage can be switched off independently for ablations, and the whole selection
can be replaced by a seeded random draw.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, replace

from . import lexical
from .corpus import Codebase, PolicyEntry
from .embedding import cosine
from .errors import ConfigError, EmptyCorpus, GatewayError, InsufficientCorpus, PipelineError

log = logging.getLogger(__name__)

METRICS = ("tfidf", "bm25", "embedding")


@dataclass(frozen=True)
class Query:
    raw: str
    rewritten: str | None = None
    scene_image: bytes | None = None

    def effective_text(self) -> str:
        return self.rewritten if self.rewritten is not None else self.raw


@dataclass
class RankedCandidate:
    entry: PolicyEntry
    score_cr: float = 0.0
    score_fr: float | None = None
    fused: float | None = None
    rank: int | None = None


TOKENIZERS = ("lowercase-alnum",)


@dataclass(frozen=True)
class RetrievalConfig:
    metric: str = "tfidf"
    coarse_k: int = 5          # K: coarse recall size
    final_k: int = 2           # k: demonstrations kept
    fuse_lambda: float = 0.25  # weight on the (normalized) coarse score
    rewrite_enabled: bool = True
    rerank_enabled: bool = True
    reorder_enabled: bool = True
    coarse_enabled: bool = True
    ramp_enabled: bool = True  # False: skip retrieval, sample k seeded-random demos
    sample_seed: int = 0
    tau: float = 5.0           # temperature scaling the rerank cosine before sigmoid
    rerank_include_code: bool = False
    embedding_score: str = "cosine"  # coarse embedding metric: cosine | dot
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    tokenizer: str = "lowercase-alnum"

    def validate(self) -> None:
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.final_k < 1:
            raise ConfigError(f"k must be >= 1, got {self.final_k}")
        if self.final_k > self.coarse_k:
            raise ConfigError(f"k exceeds K ({self.final_k} > {self.coarse_k})")
        if not 0.0 <= self.fuse_lambda <= 1.0:
            raise ConfigError(f"lambda must lie in [0, 1], got {self.fuse_lambda}")
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.embedding_score not in ("cosine", "dot"):
            raise ConfigError(f"embedding_score must be cosine or dot, got {self.embedding_score!r}")
        if self.bm25_k1 <= 0:
            raise ConfigError(f"bm25_k1 must be positive, got {self.bm25_k1}")
        if not 0.0 <= self.bm25_b <= 1.0:
            raise ConfigError(f"bm25_b must lie in [0, 1], got {self.bm25_b}")
        if self.tokenizer not in TOKENIZERS:
            raise ConfigError(f"tokenizer must be one of {TOKENIZERS}, got {self.tokenizer!r}")


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _coarse_scores(query_text: str, cb: Codebase, cfg: RetrievalConfig, provider) -> list[RankedCandidate]:
    q_tokens = lexical.tokenize(query_text)
    if cfg.metric in ("tfidf", "bm25"):
        docs = {e.id: lexical.tokenize(e.instruction) for e in cb}
        stats = lexical.build_stats(docs)
        if cfg.metric == "tfidf":
            scored = [(e, lexical.score_tfidf(q_tokens, docs[e.id], stats)) for e in cb]
        else:
            params = lexical.Bm25Params(k1=cfg.bm25_k1, b=cfg.bm25_b)
            scored = [(e, lexical.score_bm25(q_tokens, e.id, stats, params)) for e in cb]
    else:
        if provider is None:
            raise ConfigError("embedding metric requires an embedding provider")
        q_vec = provider.embed(query_text)
        scored = []
        for e in cb:
            d_vec = provider.embed(e.instruction)
            if cfg.embedding_score == "dot":
                s = float(q_vec @ d_vec)
            else:
                s = cosine(q_vec, d_vec)
            scored.append((e, s))
    return [RankedCandidate(entry=e, score_cr=s) for e, s in scored]


def coarse_retrieve(q: Query, cb: Codebase, cfg: RetrievalConfig, provider=None) -> list[RankedCandidate]:
    """Recall the K highest-scoring entries for q.raw; ties break by entry id."""
    if len(cb) == 0:
        raise EmptyCorpus("cannot retrieve from an empty codebase")
    if len(cb) < cfg.coarse_k:
        raise InsufficientCorpus(len(cb), cfg.coarse_k)
    cands = _coarse_scores(q.raw, cb, cfg, provider)
    cands.sort(key=lambda c: (-c.score_cr, c.entry.id))
    return cands[: cfg.coarse_k]


def rewrite_instruction(q: Query, gateway, template: str | None = None) -> Query:
    """Distill q.raw to its core action/object form through the gateway.

    An empty model response falls back to the raw query so a degenerate
    rewrite never fails a batch run.
    """
    from .prompting import render_rewrite_prompt

    prompt = render_rewrite_prompt(q.raw, template)
    try:
        text = gateway.complete_text(prompt)
    except GatewayError as exc:
        exc.stage = exc.stage or "rewriter"
        raise
    text = text.strip()
    if not text:
        log.warning("rewriter returned empty output for %r; falling back to raw query", q.raw)
        return replace(q, rewritten=q.raw)
    return replace(q, rewritten=text)


def fine_rerank(q: Query, cands: list[RankedCandidate], provider, cfg: RetrievalConfig | None = None) -> list[RankedCandidate]:
    """Score each candidate as sigmoid(tau * cosine(query vec, candidate vec)).

    Uses the rewritten query when present, else the raw text. Candidate text is
    the stored instruction, optionally concatenated with the code body.
    """
    cfg = cfg or RetrievalConfig()
    q_vec = provider.embed(q.effective_text())
    out = []
    for c in cands:
        text = c.entry.instruction
        if cfg.rerank_include_code:
            text = f"{text}\n{c.entry.code}"
        sim = cosine(q_vec, provider.embed(text))
        out.append(replace(c, score_fr=_sigmoid(cfg.tau * sim)))
    return out


def normalize_coarse(cands: list[RankedCandidate]) -> list[float]:
    """Min-max normalize coarse scores over the candidate set; all-equal -> 0.5."""
    scores = [c.score_cr for c in cands]
    lo, hi = min(scores), max(scores)
    if hi == lo:
        return [0.5] * len(scores)
    return [(s - lo) / (hi - lo) for s in scores]


def fuse_and_rank(cands: list[RankedCandidate], cfg: RetrievalConfig) -> list[RankedCandidate]:
    """Fuse lambda*norm(coarse) + (1-lambda)*fine and keep the top k."""
    norm = normalize_coarse(cands)
    fused = []
    for c, n in zip(cands, norm):
        if c.score_fr is None:
            raise ValueError(f"candidate {c.entry.id} has no fine score; run fine_rerank first")
        f = cfg.fuse_lambda * n + (1.0 - cfg.fuse_lambda) * c.score_fr
        fused.append(replace(c, fused=f))
    fused.sort(key=lambda c: (-c.fused, c.entry.id))
    top = fused[: cfg.final_k]
    for i, c in enumerate(top, start=1):
        c.rank = i
    return top


def _random_pick(q: Query, cb: Codebase, cfg: RetrievalConfig) -> list[RankedCandidate]:
    rng = random.Random(cfg.sample_seed)
    picked = rng.sample(list(cb.entries), cfg.final_k)
    out = []
    for i, e in enumerate(picked, start=1):
        c = RankedCandidate(entry=e)
        c.rank = i
        out.append(c)
    return out


def run_pipeline(q: Query, cb: Codebase, cfg: RetrievalConfig, gateway=None, provider=None) -> list[RankedCandidate]:
    """Run coarse recall, rewrite, rerank, and fusion per the config switches.

    With reranking (and reordering) off, the final k keep the coarse order.
    With the whole retriever off, k entries are sampled uniformly (seeded).
    """
    cfg.validate()
    if len(cb) < cfg.final_k:
        raise InsufficientCorpus(len(cb), cfg.final_k)

    if not cfg.ramp_enabled:
        return _random_pick(q, cb, cfg)

    if cfg.coarse_enabled:
        try:
            cands = coarse_retrieve(q, cb, cfg, provider)
        except (EmptyCorpus, InsufficientCorpus):
            raise
        except Exception as exc:
            raise PipelineError("coarse", exc) from exc
    else:
        # Every entry becomes a candidate with a flat coarse score; the
        # all-equal normalization (0.5) leaves ordering to the reranker.
        cands = [RankedCandidate(entry=e, score_cr=0.0) for e in cb]

    if cfg.rewrite_enabled:
        if gateway is None:
            raise ConfigError("rewrite stage requires a gateway")
        q = rewrite_instruction(q, gateway)
    else:
        q = replace(q, rewritten=q.raw)

    if cfg.rerank_enabled:
        if provider is None:
            raise ConfigError("rerank stage requires an embedding provider")
        try:
            cands = fine_rerank(q, cands, provider, cfg)
        except Exception as exc:
            raise PipelineError("rerank", exc) from exc
        if cfg.reorder_enabled:
            return fuse_and_rank(cands, cfg)
        # Scores computed but ordering untouched: keep the coarse order.
        top = [replace(c) for c in cands[: cfg.final_k]]
    else:
        top = [replace(c) for c in cands[: cfg.final_k]]

    for i, c in enumerate(top, start=1):
        c.rank = i
    return top
