import json

import pytest

from ragplan import lexical
from ragplan.config import EngineConfig, config_fingerprint, load_config, parse_seed_range
from ragplan.corpus import Codebase
from ragplan.errors import ConfigError
from ragplan.retrieval import Query, RetrievalConfig, coarse_retrieve
from conftest import make_codebase


def _write(tmp_path, payload):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(payload), encoding="utf-8")
    return p


def test_load_full_config(tmp_path):
    cfg = load_config(_write(tmp_path, {
        "corpus": "my.jsonl",
        "retrieval": {"metric": "bm25", "K": 7, "k": 3, "lambda": 0.5, "bm25_k1": 1.6, "bm25_b": 0.6},
        "prompt": {"template": "tmpl.txt"},
        "gateway": {"mode": "replay", "cassette": "c.jsonl"},
        "embedding": {"provider": "hash", "dim": 128},
        "simulator": {"families": ["rotate"], "seeds": "0..3"},
        "output_dir": "outdir",
    }))
    assert cfg.corpus == "my.jsonl"
    assert cfg.retrieval.metric == "bm25"
    assert cfg.retrieval.coarse_k == 7 and cfg.retrieval.final_k == 3
    assert cfg.retrieval.bm25_k1 == 1.6 and cfg.retrieval.bm25_b == 0.6
    assert cfg.template == "tmpl.txt"
    assert cfg.simulator.families == ("rotate",)
    assert cfg.output_dir == "outdir"


def test_unknown_keys_rejected_everywhere(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, {"nope": 1}))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, {"retrieval": {"mystery": 1}}))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, {"prompt": {"weird": 1}}))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, {"gateway": {"volume": 11}}))


def test_retrieval_validation_through_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, {"retrieval": {"k": 9, "K": 2}})).retrieval.validate()
    with pytest.raises(ConfigError):
        RetrievalConfig(tokenizer="stemming").validate()
    with pytest.raises(ConfigError):
        RetrievalConfig(bm25_k1=-1).validate()


def test_bm25_params_flow_into_coarse_scoring():
    cb = make_codebase("red block here", "blue block there", "green bowl", "red bowl")
    q = Query(raw="red block")
    loose = coarse_retrieve(q, cb, RetrievalConfig(metric="bm25", coarse_k=4, bm25_k1=1.2, bm25_b=0.75))
    tight = coarse_retrieve(q, cb, RetrievalConfig(metric="bm25", coarse_k=4, bm25_k1=0.3, bm25_b=0.0))
    docs = {e.id: lexical.tokenize(e.instruction) for e in cb}
    stats = lexical.build_stats(docs)
    for cand in tight:
        want = lexical.score_bm25(lexical.tokenize(q.raw), cand.entry.id, stats, lexical.Bm25Params(k1=0.3, b=0.0))
        assert cand.score_cr == pytest.approx(want, rel=1e-12)
    assert any(a.score_cr != b.score_cr for a, b in zip(loose, tight))


def test_config_fingerprint_tracks_inputs(tmp_path):
    base = EngineConfig()
    assert config_fingerprint(base, "gateway") == config_fingerprint(base, "gateway")
    assert config_fingerprint(base, "gateway") != config_fingerprint(base, "scripted")
    from dataclasses import replace

    changed = replace(base, retrieval=replace(base.retrieval, fuse_lambda=0.9))
    assert config_fingerprint(base, "gateway") != config_fingerprint(changed, "gateway")


def test_parse_seed_range_forms():
    assert parse_seed_range("0..3") == [0, 1, 2, 3]
    assert parse_seed_range("5") == [5]
    assert parse_seed_range("1,4,7") == [1, 4, 7]
    with pytest.raises(ConfigError):
        parse_seed_range("x..y")
