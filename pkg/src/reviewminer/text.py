"""Text cleaning and n-gram tokenization.

Pipeline per review: title + body -> normalize -> split -> drop stop words ->
Porter stem -> n-gram windows -> intern into a shared vocabulary.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from nltk.stem.porter import PorterStemmer

logger = logging.getLogger(__name__)

NGRAM_ORDERS = (1, 2, 3)

# anything but letters, digits and apostrophes; letters/digits via [^\W_]
_NON_WORD = re.compile(r"[^\w']|_")
_EDGE_APOSTROPHES = re.compile(r"(?<![^\W_])'+|'+(?![^\W_])")
_SPACES = re.compile(r"\s+")

_porter = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


class EmptyCorpusError(ValueError):
    """Every document came out empty after cleaning."""


def _read_token_file(lines: Iterable[str]) -> set[str]:
    tokens = set()
    for line in lines:
        line = line.split("#", 1)[0].strip().lower()
        if not line:
            continue
        if any(ch.isspace() for ch in line):
            raise ValueError(f"stop-word entry contains whitespace: {line!r}")
        tokens.add(line)
    return tokens


def _data_lines(name: str) -> list[str]:
    return resources.files("reviewminer").joinpath("data").joinpath(name).read_text(encoding="utf-8").splitlines()


@dataclass(frozen=True)
class StopList:
    tokens: frozenset[str]
    domain_extensions: frozenset[str] = frozenset()

    @property
    def effective(self) -> frozenset[str]:
        return self.tokens | self.domain_extensions

    def __contains__(self, token: str) -> bool:
        return token in self.tokens or token in self.domain_extensions

    @classmethod
    def load(cls, path: str | Path | None = None, extensions: str | Path | None = None) -> "StopList":
        """Load stop words from files; ``None`` selects the bundled lists."""
        base = _read_token_file(
            Path(path).read_text(encoding="utf-8").splitlines() if path else _data_lines("stopwords_en.txt")
        )
        ext = _read_token_file(
            Path(extensions).read_text(encoding="utf-8").splitlines()
            if extensions
            else _data_lines("domain_stopwords.txt")
        )
        return cls(frozenset(base), frozenset(ext))

    @classmethod
    def default(cls) -> "StopList":
        return cls.load()


@dataclass(frozen=True)
class NGramConfig:
    order: int = 1

    def __post_init__(self):
        if self.order not in NGRAM_ORDERS:
            raise ValueError(f"n-gram order must be one of {NGRAM_ORDERS}, got {self.order}")


@dataclass
class Vocabulary:
    id_of: dict[str, int] = field(default_factory=dict)
    token_of: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.token_of)

    def intern(self, token: str) -> int:
        idx = self.id_of.get(token)
        if idx is None:
            idx = len(self.token_of)
            self.id_of[token] = idx
            self.token_of.append(token)
        return idx


@dataclass(frozen=True)
class DocMeta:
    review_id: str
    rating: int | None = None
    label: str | None = None


@dataclass
class TokenizedCorpus:
    docs: list[list[int]]
    vocab: Vocabulary
    ngram: NGramConfig
    doc_meta: list[DocMeta]

    def __post_init__(self):
        if len(self.doc_meta) != len(self.docs):
            raise ValueError("doc_meta must be parallel to docs")

    def __len__(self) -> int:
        return len(self.docs)

    @property
    def num_tokens(self) -> int:
        return sum(len(d) for d in self.docs)

    @property
    def empty_docs(self) -> list[int]:
        return [i for i, d in enumerate(self.docs) if not d]

    def tokens(self, i: int) -> list[str]:
        return [self.vocab.token_of[t] for t in self.docs[i]]

    def subset(self, indices: Sequence[int]) -> "TokenizedCorpus":
        """Documents at ``indices`` over a freshly interned vocabulary."""
        return from_token_lists(
            [self.tokens(i) for i in indices], self.ngram, [self.doc_meta[i] for i in indices]
        )

    def dump_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for i, meta in enumerate(self.doc_meta):
                fh.write(json.dumps({"id": meta.review_id, "tokens": self.tokens(i)}, ensure_ascii=False) + "\n")


def normalize(text: str) -> str:
    """Lowercase and reduce to words, digits and word-internal apostrophes."""
    text = text.lower().replace("’", "'")
    text = _NON_WORD.sub(" ", text)
    text = _EDGE_APOSTROPHES.sub(" ", text)
    return _SPACES.sub(" ", text).strip()


def tokenize_words(text: str) -> list[str]:
    return text.split(" ") if text else []


def remove_stopwords(tokens: Sequence[str], stop: StopList) -> list[str]:
    return [t for t in tokens if t not in stop]


@lru_cache(maxsize=200_000)
def stem(token: str) -> str:
    return _porter.stem(token)


def build_ngrams(tokens: Sequence[str], cfg: NGramConfig) -> list[str]:
    n = cfg.order
    return ["_".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def prepare_tokens(text: str, stop: StopList) -> list[str]:
    """Cleaned, stopped and stemmed unigram tokens of one text."""
    return [stem(t) for t in remove_stopwords(tokenize_words(normalize(text)), stop)]


def from_token_lists(
    token_lists: Iterable[Sequence[str]],
    cfg: NGramConfig,
    meta: Sequence[DocMeta] | None = None,
) -> TokenizedCorpus:
    """Intern already-final token lists; ids follow first occurrence."""
    vocab = Vocabulary()
    docs = [[vocab.intern(t) for t in tokens] for tokens in token_lists]
    if meta is None:
        meta = [DocMeta(str(i)) for i in range(len(docs))]
    return TokenizedCorpus(docs=docs, vocab=vocab, ngram=cfg, doc_meta=list(meta))


def build_corpus(raw, stop: StopList, cfg: NGramConfig) -> TokenizedCorpus:
    """Run the full cleaning pipeline over a :class:`~reviewminer.ingest.RawCorpus`."""
    if not raw.reviews:
        raise EmptyCorpusError("cannot build a corpus from zero reviews")
    token_lists = [build_ngrams(prepare_tokens(r.text, stop), cfg) for r in raw.reviews]
    meta = [DocMeta(r.id, r.rating) for r in raw.reviews]
    corpus = from_token_lists(token_lists, cfg, meta)
    empty = len(corpus.empty_docs)
    if empty == len(corpus):
        raise EmptyCorpusError(
            f"all {empty} documents are empty after cleaning with n-gram order {cfg.order}"
        )
    if empty:
        logger.info("order %d: %d of %d documents empty after cleaning", cfg.order, empty, len(corpus))
    return corpus
