"""Engine configuration: strict JSON file plus CLI overrides.

Unknown keys are rejected at load so typos fail at startup instead of
silently running with defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .prompting import DEFAULT_TEMPLATE_PATH
from .retrieval import RetrievalConfig

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_CORPUS_PATH = DATA_DIR / "corpus.jsonl"
DEFAULT_DISTRACTOR_CORPUS_PATH = DATA_DIR / "corpus_distractor.jsonl"
DEFAULT_CASSETTE_PATH = DATA_DIR / "cassettes" / "replay.jsonl"


@dataclass(frozen=True)
class GatewaySettings:
    mode: str = "replay"
    endpoint: str = ""
    model: str = "gpt-4o"
    rewriter_model: str = "gpt-4o"
    cassette: str = str(DEFAULT_CASSETTE_PATH)
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3


@dataclass(frozen=True)
class EmbeddingSettings:
    provider: str = "hash"  # hash | remote
    dim: int = 512
    endpoint: str = ""
    model: str = ""


@dataclass(frozen=True)
class SimulatorSettings:
    families: tuple[str, ...] = ()
    seeds: str = "0..9"


@dataclass(frozen=True)
class EngineConfig:
    corpus: str = str(DEFAULT_CORPUS_PATH)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    template: str = str(DEFAULT_TEMPLATE_PATH)
    gateway: GatewaySettings = field(default_factory=GatewaySettings)
    embedding: EmbeddingSettings = field(default_factory=EmbeddingSettings)
    simulator: SimulatorSettings = field(default_factory=SimulatorSettings)
    output_dir: str = "results"


_RETRIEVAL_KEYS = {
    "metric": "metric",
    "K": "coarse_k",
    "k": "final_k",
    "lambda": "fuse_lambda",
    "rewrite": "rewrite_enabled",
    "rerank": "rerank_enabled",
    "reorder": "reorder_enabled",
    "coarse": "coarse_enabled",
    "ramp": "ramp_enabled",
    "seed": "sample_seed",
    "tau": "tau",
    "rerank_include_code": "rerank_include_code",
    "embedding_score": "embedding_score",
    "bm25_k1": "bm25_k1",
    "bm25_b": "bm25_b",
    "tokenizer": "tokenizer",
}


def _build(cls, raw: dict, section: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {section!r} section: {exc}") from exc


def _build_retrieval(raw: dict) -> RetrievalConfig:
    unknown = set(raw) - set(_RETRIEVAL_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys in 'retrieval': {sorted(unknown)}")
    kwargs = {_RETRIEVAL_KEYS[k]: v for k, v in raw.items()}
    try:
        cfg = RetrievalConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad 'retrieval' section: {exc}") from exc
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> EngineConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    known = {"corpus", "retrieval", "prompt", "gateway", "embedding", "simulator", "output_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    prompt = raw.get("prompt", {})
    unknown_prompt = set(prompt) - {"template"}
    if unknown_prompt:
        raise ConfigError(f"unknown keys in 'prompt': {sorted(unknown_prompt)}")
    sim_raw = dict(raw.get("simulator", {}))
    if isinstance(sim_raw.get("families"), list):
        sim_raw["families"] = tuple(sim_raw["families"])
    cfg = EngineConfig(
        corpus=raw.get("corpus", str(DEFAULT_CORPUS_PATH)),
        retrieval=_build_retrieval(raw.get("retrieval", {})),
        template=prompt.get("template", str(DEFAULT_TEMPLATE_PATH)),
        gateway=_build(GatewaySettings, raw.get("gateway", {}), "gateway"),
        embedding=_build(EmbeddingSettings, raw.get("embedding", {}), "embedding"),
        simulator=_build(SimulatorSettings, sim_raw, "simulator"),
        output_dir=raw.get("output_dir", "results"),
    )
    return cfg


def apply_cli_overrides(cfg: EngineConfig, args) -> EngineConfig:
    """Fold parsed argparse values into the engine config."""
    r = cfg.retrieval
    if getattr(args, "metric", None):
        r = replace(r, metric=args.metric)
    if getattr(args, "coarse_k", None) is not None:
        r = replace(r, coarse_k=args.coarse_k)
    if getattr(args, "final_k", None) is not None:
        r = replace(r, final_k=args.final_k)
    if getattr(args, "fuse_lambda", None) is not None:
        r = replace(r, fuse_lambda=args.fuse_lambda)
    if getattr(args, "no_rewrite", False):
        r = replace(r, rewrite_enabled=False)
    if getattr(args, "no_rerank", False):
        r = replace(r, rerank_enabled=False)
    if getattr(args, "no_reorder", False):
        r = replace(r, reorder_enabled=False)
    if getattr(args, "no_coarse", False):
        r = replace(r, coarse_enabled=False)
    if getattr(args, "no_ramp", False):
        r = replace(r, ramp_enabled=False)
    if getattr(args, "seed", None) is not None:
        r = replace(r, sample_seed=args.seed)
    g = cfg.gateway
    if getattr(args, "llm_mode", None):
        g = replace(g, mode=args.llm_mode)
    if getattr(args, "cassette", None):
        g = replace(g, cassette=args.cassette)
    if getattr(args, "endpoint", None):
        g = replace(g, endpoint=args.endpoint)
    if getattr(args, "model", None):
        g = replace(g, model=args.model)
    out = replace(cfg, retrieval=r, gateway=g)
    if getattr(args, "corpus", None):
        out = replace(out, corpus=args.corpus)
    if getattr(args, "template", None):
        out = replace(out, template=args.template)
    if getattr(args, "out", None):
        out = replace(out, output_dir=args.out)
    return out


def _file_hash(path: str | Path) -> str:
    p = Path(path)
    if not p.exists():
        return "absent"
    return hashlib.sha256(p.read_bytes()).hexdigest()[:16]


def config_fingerprint(cfg: EngineConfig, planner: str) -> str:
    """Digest identifying (retrieval config, template hash, cassette hash)."""
    payload = {
        "retrieval": {
            "metric": cfg.retrieval.metric,
            "K": cfg.retrieval.coarse_k,
            "k": cfg.retrieval.final_k,
            "lambda": cfg.retrieval.fuse_lambda,
            "rewrite": cfg.retrieval.rewrite_enabled,
            "rerank": cfg.retrieval.rerank_enabled,
            "reorder": cfg.retrieval.reorder_enabled,
            "coarse": cfg.retrieval.coarse_enabled,
            "ramp": cfg.retrieval.ramp_enabled,
            "tau": cfg.retrieval.tau,
        },
        "template_hash": _file_hash(cfg.template),
        "cassette_hash": _file_hash(cfg.gateway.cassette),
        "planner": planner,
        "model": cfg.gateway.model,
        "temperature": cfg.gateway.temperature,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def parse_seed_range(spec: str) -> list[int]:
    """Parse '0..9' or '3' or '1,4,7' into a seed list."""
    spec = spec.strip()
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError as exc:
            raise ConfigError(f"bad seed range {spec!r}") from exc
    if "," in spec:
        try:
            return [int(s) for s in spec.split(",") if s.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad seed list {spec!r}") from exc
    try:
        return [int(spec)]
    except ValueError as exc:
        raise ConfigError(f"bad seed {spec!r}") from exc
