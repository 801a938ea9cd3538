import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ragplan.embedding import CachingProvider, HashEmbedder, cosine, dot
from ragplan.errors import DimMismatch


def test_empty_string_embeds_to_zeros():
    e = HashEmbedder(64)
    assert not e.embed("").any()


def test_embedding_deterministic():
    e = HashEmbedder(64)
    a = e.embed("rotate the block by 90 degrees")
    b = e.embed("rotate the block by 90 degrees")
    assert np.array_equal(a, b)


def test_similar_sentences_score_higher():
    e = HashEmbedder(256)
    close = cosine(e.embed("rotate block"), e.embed("rotate the block"))
    far = cosine(e.embed("rotate block"), e.embed("open drawer"))
    assert close > far


def test_token_bag_permutation_invariance():
    e = HashEmbedder(128)
    a = e.embed("put the red block into the bowl")
    b = e.embed("bowl the into block red the put")
    assert np.array_equal(a, b)


def test_dot_examples():
    assert dot(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
    assert dot(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0


def test_dot_self_nonnegative():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.normal(size=16)
        assert dot(a, a) >= 0.0


def test_dot_dim_mismatch():
    with pytest.raises(DimMismatch):
        dot(np.zeros(3), np.zeros(4))


def test_cosine_examples():
    a = np.array([2.0, 1.0, 0.0])
    assert cosine(a, a) == pytest.approx(1.0)
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
    assert cosine(np.zeros(4), np.ones(4)) == 0.0


def test_cosine_dim_mismatch():
    with pytest.raises(DimMismatch):
        cosine(np.zeros(3), np.zeros(4))


def test_cosine_scale_invariance():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b = rng.normal(size=8), rng.normal(size=8)
        for alpha in (0.5, 3.0, 1e6):
            assert cosine(alpha * a, b) == pytest.approx(cosine(a, b), abs=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_cosine_bounded_and_symmetric(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=12), rng.normal(size=12)
    c = cosine(a, b)
    assert -1.0 - 1e-12 <= c <= 1.0 + 1e-12
    assert c == pytest.approx(cosine(b, a), abs=1e-12)


class _CountingEmbedder:
    name = "counting"
    dim = 8

    def __init__(self):
        self.calls = 0

    def embed(self, text):
        self.calls += 1
        return np.ones(8)


def test_cache_avoids_repeat_embeds():
    inner = _CountingEmbedder()
    cached = CachingProvider(inner)
    cached.embed("hello")
    cached.embed("hello")
    cached.embed("world")
    assert inner.calls == 2


def test_remote_embedder_wire_shape():
    import json
    import threading
    from http.server import BaseHTTPRequestHandler, HTTPServer

    from ragplan.embedding import RemoteEmbedder
    from ragplan.errors import ProviderUnavailable

    seen = []

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
            seen.append((self.path, body))
            data = json.dumps({"data": [{"embedding": [0.5] * 4}]}).encode()
            self.send_response(200)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        e = RemoteEmbedder(f"http://127.0.0.1:{server.server_port}/v1/embeddings", "embed-model", dim=4, api_key="tok")
        vec = e.embed("some sentence")
        assert vec.tolist() == [0.5, 0.5, 0.5, 0.5]
        path, body = seen[0]
        assert path == "/v1/embeddings"
        assert body == {"model": "embed-model", "input": ["some sentence"]}
        bad = RemoteEmbedder(f"http://127.0.0.1:{server.server_port}/v1/embeddings", "m", dim=9)
        with pytest.raises(ProviderUnavailable):
            bad.embed("dim mismatch")
    finally:
        server.shutdown()
