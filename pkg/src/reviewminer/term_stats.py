"""Corpus word counts and TF-IDF importance.

TF(t, d) = count(t, d) / len(d), IDF(t) = ln(N / df(t)) with N the number of
non-empty documents. A term's corpus importance is the sum of its per-document
TF-IDF scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .text import TokenizedCorpus


@dataclass
class TermStats:
    tokens: list[str]
    count_of: np.ndarray
    df_of: np.ndarray
    tfidf_total_of: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.tokens)


def doc_term_matrix(corpus: TokenizedCorpus) -> sp.csr_matrix:
    """Sparse D x V matrix of raw term counts."""
    lengths = np.fromiter((len(d) for d in corpus.docs), dtype=np.int64, count=len(corpus.docs))
    indptr = np.concatenate(([0], np.cumsum(lengths)))
    indices = np.fromiter((t for d in corpus.docs for t in d), dtype=np.int64, count=int(indptr[-1]))
    data = np.ones(len(indices), dtype=np.int64)
    m = sp.csr_matrix((data, indices, indptr), shape=(len(corpus.docs), len(corpus.vocab)))
    m.sum_duplicates()
    return m


def word_counts(corpus: TokenizedCorpus) -> TermStats:
    x = doc_term_matrix(corpus)
    count = np.asarray(x.sum(axis=0)).ravel()
    df = np.asarray((x > 0).sum(axis=0)).ravel().astype(np.int64)
    return TermStats(list(corpus.vocab.token_of), count, df)


def tfidf(corpus: TokenizedCorpus, stats: TermStats | None = None) -> TermStats:
    """Populate ``tfidf_total_of``; raises on a corpus with no tokens."""
    x = doc_term_matrix(corpus)
    lengths = np.asarray(x.sum(axis=1)).ravel()
    n_docs = int(np.count_nonzero(lengths))
    if n_docs == 0:
        raise ValueError("TF-IDF needs at least one non-empty document")
    if stats is None:
        stats = word_counts(corpus)
    df = stats.df_of
    with np.errstate(divide="ignore"):
        idf = np.where(df > 0, np.log(n_docs / np.maximum(df, 1)), 0.0)
    # a term present in every document must score exactly zero
    idf[df == n_docs] = 0.0
    nonempty = lengths > 0
    inv_len = np.zeros(len(lengths))
    inv_len[nonempty] = 1.0 / lengths[nonempty]
    tf = sp.diags(inv_len) @ x
    stats.tfidf_total_of = np.asarray(tf.sum(axis=0)).ravel() * idf
    return stats


def top_k(stats: TermStats, k: int, by: str = "count") -> list[tuple[str, float]]:
    """Top ``k`` terms, descending by value, ties by ascending token."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if by == "count":
        values = stats.count_of
    elif by == "tfidf":
        if stats.tfidf_total_of is None:
            raise ValueError("TF-IDF totals not computed; call tfidf() first")
        values = stats.tfidf_total_of
    else:
        raise ValueError(f"unknown ranking {by!r}")
    order = sorted(range(len(stats.tokens)), key=lambda i: (-values[i], stats.tokens[i]))
    return [(stats.tokens[i], values[i].item()) for i in order[:k]]
