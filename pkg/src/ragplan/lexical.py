"""Keyword similarity scoring: normalized term frequency, TF-IDF, and BM25.

Both scores treat term frequency as a property of the *query*: a document
contributes only through term membership and corpus-level document
frequencies. Scores are therefore invariant under permutation of tokens on
either side.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import EmptyCorpus, UnknownDoc

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace/punctuation runs."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.k1 <= 0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")


@dataclass(frozen=True)
class CorpusStats:
    """Corpus-level counts needed by the keyword scorers.

    doc_freq[t] is the number of documents containing term t at least once;
    doc_terms keeps per-document term sets so BM25 can test membership.
    """

    doc_count: int
    doc_freq: dict[str, int] = field(default_factory=dict)
    avg_len: float = 0.0
    per_doc_len: dict[str, int] = field(default_factory=dict)
    doc_terms: dict[str, frozenset[str]] = field(default_factory=dict)


def build_stats(docs: dict[str, list[str]]) -> CorpusStats:
    """Build CorpusStats from tokenized documents keyed by document id."""
    doc_freq: dict[str, int] = {}
    doc_terms: dict[str, frozenset[str]] = {}
    per_doc_len: dict[str, int] = {}
    for doc_id, tokens in docs.items():
        terms = frozenset(tokens)
        doc_terms[doc_id] = terms
        per_doc_len[doc_id] = len(tokens)
        for t in terms:
            doc_freq[t] = doc_freq.get(t, 0) + 1
    n = len(docs)
    avg_len = (sum(per_doc_len.values()) / n) if n else 0.0
    return CorpusStats(
        doc_count=n,
        doc_freq=doc_freq,
        avg_len=avg_len,
        per_doc_len=per_doc_len,
        doc_terms=doc_terms,
    )


def tf(term: str, query: list[str]) -> float:
    """Normalized term frequency of `term` within the query token list."""
    if not query:
        return 0.0
    return query.count(term) / len(query)


def idf_tfidf(term: str, stats: CorpusStats) -> float:
    """ln(|C| / (df + 1)); negative when the term is in every document."""
    if stats.doc_count == 0:
        raise EmptyCorpus("cannot compute IDF over an empty corpus")
    df = stats.doc_freq.get(term, 0)
    return math.log(stats.doc_count / (df + 1))


def idf_bm25(term: str, stats: CorpusStats) -> float:
    """ln((|C| - df + 0.5) / (df + 0.5) + 1); strictly positive for df <= |C|."""
    if stats.doc_count == 0:
        raise EmptyCorpus("cannot compute IDF over an empty corpus")
    df = stats.doc_freq.get(term, 0)
    return math.log((stats.doc_count - df + 0.5) / (df + 0.5) + 1.0)


def score_tfidf(query: list[str], doc: list[str], stats: CorpusStats) -> float:
    """Sum of idf(t) * tf(t, query) over distinct query terms present in doc."""
    if stats.doc_count == 0:
        raise EmptyCorpus("cannot score against an empty corpus")
    doc_terms = set(doc)
    total = 0.0
    for term in sorted(set(query)):
        if term in doc_terms:
            total += idf_tfidf(term, stats) * tf(term, query)
    return total


def bm25_weight(term: str, query: list[str], stats: CorpusStats, params: Bm25Params) -> float:
    """Saturating query-side term weight: tf*(k1+1) / (tf + k1*(1-b+b*|q|/L_avg))."""
    t = tf(term, query)
    if t == 0.0:
        return 0.0
    norm = 1.0 - params.b + params.b * (len(query) / stats.avg_len)
    return t * (params.k1 + 1.0) / (t + params.k1 * norm)


def score_bm25(query: list[str], doc_id: str, stats: CorpusStats, params: Bm25Params | None = None) -> float:
    """Sum of idf_bm25(t) * bm25_weight(t) over distinct query terms in the doc."""
    if stats.doc_count == 0:
        raise EmptyCorpus("cannot score against an empty corpus")
    if doc_id not in stats.doc_terms:
        raise UnknownDoc(doc_id)
    params = params or Bm25Params()
    doc_terms = stats.doc_terms[doc_id]
    total = 0.0
    for term in sorted(set(query)):
        if term in doc_terms:
            total += idf_bm25(term, stats) * bm25_weight(term, query, stats, params)
    return total
