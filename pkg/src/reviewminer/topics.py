"""LDA by collapsed Gibbs sampling, fit diagnostics and the topic-count sweep.

Typical use::

    corpora = {order: build_corpus(raw, stop, NGramConfig(order)) for order in (1, 2, 3)}
    result = sweep(corpora, range(5, 16), LdaConfig(num_topics=5, seed=42))
    summary = top_words(result.best_model, 10)
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from ._gibbs import gibbs_sweep, gibbs_sweep_fast, init_counts
from .seeds import derive_seed
from .term_stats import doc_term_matrix
from .text import TokenizedCorpus

logger = logging.getLogger(__name__)

MODEL_FORMAT = "reviewminer.lda/1"


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class LdaConfig:
    num_topics: int = 10
    alpha: float | None = None  # None -> 50 / num_topics
    beta: float = 0.01
    iterations: int = 1000
    seed: int = 42
    coherence_top_n: int = 10

    def __post_init__(self):
        if self.num_topics < 2:
            raise ValueError(f"num_topics must be >= 2, got {self.num_topics}")
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def doc_prior(self) -> float:
        return 50.0 / self.num_topics if self.alpha is None else self.alpha


@dataclass
class LdaModel:
    topic_word_counts: np.ndarray  # K x V
    doc_topic_counts: np.ndarray  # D x K
    topic_totals: np.ndarray  # K
    assignments: list[np.ndarray]  # per doc, topic id per token
    config: LdaConfig
    tokens: list[str]

    @property
    def num_topics(self) -> int:
        return self.topic_word_counts.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.topic_word_counts.shape[1]

    def phi(self) -> np.ndarray:
        """Smoothed topic-word distributions, K x V."""
        beta = self.config.beta
        return (self.topic_word_counts + beta) / (self.topic_totals[:, None] + self.vocab_size * beta)

    def theta(self) -> np.ndarray:
        """Smoothed document-topic distributions, D x K."""
        alpha = self.config.doc_prior
        lengths = self.doc_topic_counts.sum(axis=1)
        return (self.doc_topic_counts + alpha) / (lengths[:, None] + self.num_topics * alpha)

    def save(self, path: str | Path) -> None:
        lengths = np.array([len(a) for a in self.assignments], dtype=np.int64)
        np.savez_compressed(
            path,
            format=np.array(MODEL_FORMAT),
            config=np.array(json.dumps(asdict(self.config))),
            tokens=np.array(json.dumps(self.tokens, ensure_ascii=False)),
            topic_word_counts=self.topic_word_counts,
            doc_topic_counts=self.doc_topic_counts,
            assignments=np.concatenate(self.assignments) if self.assignments else np.zeros(0, np.int64),
            doc_lengths=lengths,
        )

    @classmethod
    def load(cls, path: str | Path) -> "LdaModel":
        with np.load(path) as f:
            if str(f["format"]) != MODEL_FORMAT:
                raise ValueError(f"unsupported model format {str(f['format'])!r}")
            nkw = f["topic_word_counts"]
            splits = np.cumsum(f["doc_lengths"])[:-1]
            return cls(
                topic_word_counts=nkw,
                doc_topic_counts=f["doc_topic_counts"],
                topic_totals=nkw.sum(axis=1),
                assignments=list(np.split(f["assignments"], splits)),
                config=LdaConfig(**json.loads(str(f["config"]))),
                tokens=json.loads(str(f["tokens"])),
            )


def check_invariants(model: LdaModel, corpus: TokenizedCorpus) -> None:
    """Raise AssertionError if count bookkeeping is inconsistent with ``corpus``."""
    nkw, ndk = model.topic_word_counts, model.doc_topic_counts
    assert (nkw >= 0).all() and (ndk >= 0).all(), "negative counts"
    assert np.array_equal(nkw.sum(axis=1), model.topic_totals), "topic totals drifted"
    lengths = np.array([len(d) for d in corpus.docs])
    assert np.array_equal(ndk.sum(axis=1), lengths), "doc-topic rows do not match doc lengths"
    assert int(nkw.sum()) == int(lengths.sum())


def _flatten(corpus: TokenizedCorpus) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.fromiter((len(d) for d in corpus.docs), dtype=np.int64, count=len(corpus.docs))
    words = np.fromiter((t for d in corpus.docs for t in d), dtype=np.int64, count=int(lengths.sum()))
    docs = np.repeat(np.arange(len(corpus.docs), dtype=np.int64), lengths)
    return words, docs


def lda_fit(corpus: TokenizedCorpus, cfg: LdaConfig, *, debug: bool = False, compiled: bool = True) -> LdaModel:
    """Fit LDA with ``cfg.iterations`` collapsed Gibbs sweeps.

    Topics are initialized uniformly at random, then every token is
    resampled in corpus order on each sweep. The random stream is numpy's
    PCG64 seeded with ``cfg.seed``, so a fit is bit-reproducible.
    ``compiled=False`` runs the same kernel as plain Python.
    """
    words, docs = _flatten(corpus)
    if len(words) == 0:
        raise ValueError("cannot fit LDA on a corpus with no tokens")
    n_topics, n_words = cfg.num_topics, len(corpus.vocab)
    nonempty = len(corpus) - len(corpus.empty_docs)
    if nonempty < n_topics:
        logger.warning("only %d non-empty documents for %d topics", nonempty, n_topics)

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    z = rng.integers(0, n_topics, size=len(words), dtype=np.int64)
    ndk, nkw, nk = init_counts(words, docs, z, len(corpus), n_topics, n_words)
    kernel = gibbs_sweep_fast if compiled else gibbs_sweep
    alpha, beta = float(cfg.doc_prior), float(cfg.beta)
    scratch = np.empty(n_topics)

    def snapshot() -> LdaModel:
        lengths = np.array([len(d) for d in corpus.docs])
        assignments = np.split(z.copy(), np.cumsum(lengths)[:-1])
        return LdaModel(nkw.copy(), ndk.copy(), nk.copy(), assignments, cfg, list(corpus.vocab.token_of))

    for _ in range(cfg.iterations):
        kernel(words, docs, z, ndk, nkw, nk, alpha, beta, n_words * beta, rng.random(len(words)), scratch)
        if debug:
            check_invariants(snapshot(), corpus)
    return snapshot()


def perplexity(model: LdaModel, corpus: TokenizedCorpus) -> float:
    """exp of the negative mean per-token log P(w|d), P(w|d) = sum_k theta[d,k] phi[k,w]."""
    words, docs = _flatten(corpus)
    if len(words) == 0:
        raise ValueError("perplexity needs a non-empty corpus")
    if words.max() >= model.vocab_size or len(corpus) != model.doc_topic_counts.shape[0]:
        raise ValueError("corpus does not match the model's vocabulary/documents")
    phi, theta = model.phi(), model.theta()
    p_wd = np.einsum("ik,ki->i", theta[docs], phi[:, words])
    return math.exp(-np.log(p_wd).sum() / len(words))


def _top_ids(phi_row: np.ndarray, tokens: np.ndarray, n: int) -> np.ndarray:
    return np.lexsort((tokens, -phi_row))[:n]


def coherence(model: LdaModel, corpus: TokenizedCorpus, top_n: int | None = None) -> float:
    """Mean UMass coherence over topics and all top-word pairs.

    Pair score is ln((D(w_i, w_j) + 1) / D(w_j)) with ``w_j`` the higher
    ranked word and D counting documents of ``corpus``.
    """
    top_n = model.config.coherence_top_n if top_n is None else top_n
    if top_n < 2:
        raise ValueError("top_n must be >= 2")
    n = min(top_n, model.vocab_size)
    if n < 2:
        raise ValueError("vocabulary too small for pairwise coherence")
    occ = (doc_term_matrix(corpus) > 0).astype(np.int64).tocsc()
    tokens = np.array(model.tokens)
    phi = model.phi()
    scores = []
    for k in range(model.num_topics):
        ids = _top_ids(phi[k], tokens, n)
        sub = occ[:, ids]
        co = (sub.T @ sub).toarray()
        df = np.diag(co)
        if (df == 0).any():
            raise ValueError(f"topic {k} top word never occurs in the corpus")
        total = 0.0
        for i in range(1, n):
            for j in range(i):
                total += math.log((co[i, j] + 1) / df[j])
        scores.append(total / (n * (n - 1) / 2))
    return float(np.mean(scores))


def combined_score(p: float, c: float) -> float:
    return 0.5 * (1 - p) + 0.5 * c


@dataclass
class TopicSummary:
    topics: list[list[tuple[str, float]]]

    def __len__(self) -> int:
        return len(self.topics)


def top_words(model: LdaModel, n: int) -> TopicSummary:
    """Top ``n`` terms per topic by phi, ties by ascending token."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tokens = np.array(model.tokens)
    phi = model.phi()
    topics = []
    for k in range(model.num_topics):
        ids = _top_ids(phi[k], tokens, n)
        topics.append([(model.tokens[i], float(phi[k, i])) for i in ids])
    return TopicSummary(topics)


@dataclass(frozen=True)
class SweepEntry:
    ngram_order: int
    num_topics: int
    perplexity: float
    coherence: float
    score: float
    seed: int


@dataclass
class SweepResult:
    entries: list[SweepEntry]
    best: int
    best_model: LdaModel | None = field(default=None, repr=False)
    skipped_orders: list[int] = field(default_factory=list)

    @property
    def best_entry(self) -> SweepEntry:
        return self.entries[self.best]


def _selection_key(e: SweepEntry):
    return (-e.score, e.num_topics, e.ngram_order)


def select_best(entries: list[SweepEntry]) -> int:
    """Index of the max-score entry; ties go to fewer topics, then lower order."""
    if not entries:
        raise ValueError("no sweep entries to select from")
    return min(range(len(entries)), key=lambda i: _selection_key(entries[i]))


def _fit_one(corpus, cfg, order):
    try:
        model = lda_fit(corpus, cfg)
        p = perplexity(model, corpus)
        c = coherence(model, corpus, cfg.coherence_top_n)
    except Exception as exc:
        raise SweepError(f"fit failed for n-gram order {order}, K={cfg.num_topics}: {exc}") from exc
    return SweepEntry(order, cfg.num_topics, p, c, combined_score(p, c), cfg.seed), model


def sweep(
    corpora: Mapping[int, TokenizedCorpus],
    k_range: Iterable[int],
    base: LdaConfig,
    *,
    stage: str = "global",
    workers: int = 1,
) -> SweepResult:
    """Fit every (order, K) pair and pick the best by combined score.

    Seeds derive from (base seed, stage, order, K), so results do not depend
    on ``workers``. Orders whose corpus has no tokens are skipped and listed
    in ``skipped_orders``.
    """
    k_values = list(k_range)
    if not k_values:
        raise ValueError("empty topic-count range")
    grid, skipped = [], []
    for order in sorted(corpora):
        corpus = corpora[order]
        if corpus.num_tokens == 0:
            logger.warning("stage %s: n-gram order %d has no tokens, skipped", stage, order)
            skipped.append(order)
            continue
        for k in k_values:
            cfg = replace(base, num_topics=k, seed=derive_seed(base.seed, stage, order, k))
            grid.append((corpus, cfg, order))
    if not grid:
        raise SweepError(f"stage {stage}: nothing to fit")

    entries: list[SweepEntry] = []
    best_model = None
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(lambda args: _fit_one(*args), grid)
            for entry, model in results:
                if not entries or _selection_key(entry) < _selection_key(entries[select_best(entries)]):
                    best_model = model
                entries.append(entry)
    else:
        for args in grid:
            entry, model = _fit_one(*args)
            if not entries or _selection_key(entry) < _selection_key(entries[select_best(entries)]):
                best_model = model
            entries.append(entry)
            logger.info(
                "stage %s order %d K=%d: p=%.4f c=%.4f score=%.4f",
                stage, entry.ngram_order, entry.num_topics, entry.perplexity, entry.coherence, entry.score,
            )
    return SweepResult(entries, select_best(entries), best_model, skipped)
