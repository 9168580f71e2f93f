"""Three-way sentiment labels: rating rule, lexicon scores, multinomial Naive Bayes."""

from __future__ import annotations

import enum
import logging
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)


class SentimentLabel(str, enum.Enum):
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    POSITIVE = "positive"

    def __str__(self) -> str:
        return self.value


# fixed order; also the tie-break order for prediction
LABELS = (SentimentLabel.NEGATIVE, SentimentLabel.NEUTRAL, SentimentLabel.POSITIVE)


@dataclass(frozen=True)
class RatingStats:
    mean: float
    sd: float


def rating_stats(ratings: Sequence[int]) -> RatingStats:
    """Mean and population standard deviation of star ratings."""
    ratings = [getattr(r, "rating", r) for r in ratings]
    if len(ratings) < 2:
        raise ValueError("rating statistics need at least two reviews")
    stats = RatingStats(statistics.fmean(ratings), statistics.pstdev(ratings))
    if stats.sd == 0:
        logger.warning("all ratings equal (%.2f); every review will be labeled neutral", stats.mean)
    return stats


def auto_label(rating: int, stats: RatingStats) -> SentimentLabel:
    """Positive at or above mean + sd, negative at or below mean - sd."""
    if stats.sd == 0:
        return SentimentLabel.NEUTRAL
    if rating >= stats.mean + stats.sd:
        return SentimentLabel.POSITIVE
    if rating <= stats.mean - stats.sd:
        return SentimentLabel.NEGATIVE
    return SentimentLabel.NEUTRAL


# -- lexicon scoring -------------------------------------------------------

def _data_text(name: str) -> str:
    return resources.files("reviewminer").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def _entries(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


@dataclass
class ValenceLexicon:
    valence_of: dict[str, float]
    negators: frozenset[str] = frozenset()
    boosters: dict[str, float] = field(default_factory=dict)

    @classmethod
    def load(cls, lexicon=None, negators=None, boosters=None) -> "ValenceLexicon":
        """Read lexicon files; any path left as ``None`` uses the bundled data."""

        def read(path, default):
            return Path(path).read_text(encoding="utf-8") if path else _data_text(default)

        valence = {}
        for line in _entries(read(lexicon, "valence.tsv")):
            token, value = line.split("\t")[:2]
            v = float(value)
            if not (math.isfinite(v) and -4 <= v <= 4):
                raise ValueError(f"valence for {token!r} outside [-4, 4]: {v}")
            valence[token.strip().lower()] = v
        neg = frozenset(t.lower() for t in _entries(read(negators, "negators.txt")))
        boost = {}
        for line in _entries(read(boosters, "boosters.tsv")):
            token, value = line.split("\t")[:2]
            boost[token.strip().lower()] = float(value)
        return cls(valence, neg, boost)


def _adjusted_valences(tokens: Sequence[str], lex: ValenceLexicon) -> list[float]:
    out = []
    negate = False
    boost = 0.0
    for tok in tokens:
        if tok in lex.negators:
            negate = True
            continue
        if tok in lex.boosters and tok not in lex.valence_of:
            boost += lex.boosters[tok]
            continue
        v = lex.valence_of.get(tok)
        if v is None:
            continue
        if boost and v != 0:
            v += math.copysign(boost, v)
        if negate:
            v = -v
        out.append(max(-4.0, min(4.0, v)))
        negate, boost = False, 0.0
    return out


def polarity_score(tokens: Sequence[str], lex: ValenceLexicon) -> float:
    """Mean adjusted valence of lexicon hits, scaled to [-1, 1]; 0 without hits."""
    vals = _adjusted_valences(tokens, lex)
    if not vals:
        return 0.0
    return sum(vals) / len(vals) / 4.0


def compound_score(tokens: Sequence[str], lex: ValenceLexicon) -> float:
    """Sum s of adjusted valences squashed as s / sqrt(s^2 + 15)."""
    s = sum(_adjusted_valences(tokens, lex))
    return s / math.sqrt(s * s + 15.0)


def polarity_to_label(score: float) -> SentimentLabel:
    if score <= -1 / 3:
        return SentimentLabel.NEGATIVE
    if score >= 1 / 3:
        return SentimentLabel.POSITIVE
    return SentimentLabel.NEUTRAL


def compound_to_label(compound: float, threshold: float = 0.05) -> SentimentLabel:
    if compound < -threshold:
        return SentimentLabel.NEGATIVE
    if compound > threshold:
        return SentimentLabel.POSITIVE
    return SentimentLabel.NEUTRAL


# -- train/test split -------------------------------------------------------

@dataclass
class TrainTestSplit:
    train: list[int]
    test: list[int]
    train_proportions: dict[str, float] = field(default_factory=dict)
    test_proportions: dict[str, float] = field(default_factory=dict)


def label_proportions(labels: Sequence[SentimentLabel]) -> dict[str, float]:
    counts = Counter(labels)
    n = len(labels)
    return {lab.value: (counts[lab] / n if n else 0.0) for lab in LABELS}


def split_train_test(n_docs: int, fraction: float = 0.8, seed: int = 42, labels=None) -> TrainTestSplit:
    """Seeded shuffle of ``range(n_docs)``; the first floor(fraction * n) go to training."""
    if not 0 < fraction < 1:
        raise ValueError("fraction must be strictly between 0 and 1")
    n_train = math.floor(fraction * n_docs)
    if n_train == 0 or n_train == n_docs:
        raise ValueError(f"split of {n_docs} documents at {fraction} leaves one side empty")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n_docs)
    split = TrainTestSplit(sorted(perm[:n_train].tolist()), sorted(perm[n_train:].tolist()))
    if labels is not None:
        split.train_proportions = label_proportions([labels[i] for i in split.train])
        split.test_proportions = label_proportions([labels[i] for i in split.test])
    return split


# -- multinomial Naive Bayes --------------------------------------------------

@dataclass
class NbModel:
    labels: list[SentimentLabel]
    class_log_prior: np.ndarray
    token_log_likelihood: np.ndarray  # labels x V
    alpha: float
    vocab: dict[str, int]


def nb_fit(docs: Sequence[Sequence[str]], labels: Sequence[SentimentLabel], alpha: float = 1.0) -> NbModel:
    """Fit on token lists with add-``alpha`` smoothing over the training vocabulary."""
    if len(docs) != len(labels):
        raise ValueError("docs and labels differ in length")
    if not docs:
        raise ValueError("no training documents")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    vocab: dict[str, int] = {}
    for doc in docs:
        for tok in doc:
            vocab.setdefault(tok, len(vocab))
    present = [lab for lab in LABELS if lab in set(labels)]
    missing = [lab.value for lab in LABELS if lab not in present]
    if missing:
        logger.warning("classes absent from training data, omitted from model: %s", ", ".join(missing))
    row = {lab: i for i, lab in enumerate(present)}
    counts = np.zeros((len(present), len(vocab)))
    doc_counts = np.zeros(len(present))
    for doc, lab in zip(docs, labels):
        r = row[lab]
        doc_counts[r] += 1
        for tok in doc:
            counts[r, vocab[tok]] += 1
    prior = np.log(doc_counts / doc_counts.sum())
    totals = counts.sum(axis=1, keepdims=True)
    likelihood = np.log(counts + alpha) - np.log(totals + alpha * len(vocab))
    return NbModel(present, prior, likelihood, alpha, vocab)


def nb_predict(model: NbModel, doc: Sequence[str]) -> tuple[SentimentLabel, dict[str, float]]:
    """Most probable label and normalized per-class log-posteriors; unseen tokens are ignored."""
    joint = model.class_log_prior.copy()
    for tok in doc:
        j = model.vocab.get(tok)
        if j is not None:
            joint += model.token_log_likelihood[:, j]
    # np.argmax keeps the first maximum, i.e. the fixed label order
    best = model.labels[int(np.argmax(joint))]
    m = joint.max()
    log_norm = m + math.log(np.exp(joint - m).sum())
    return best, {lab.value: float(v - log_norm) for lab, v in zip(model.labels, joint)}


# -- evaluation -------------------------------------------------------------

def evaluate(predicted: Sequence[SentimentLabel], actual: Sequence[SentimentLabel]) -> tuple[float, np.ndarray]:
    """Accuracy and a 3x3 confusion matrix (rows actual, columns predicted)."""
    if len(predicted) != len(actual):
        raise ValueError(f"length mismatch: {len(predicted)} predicted vs {len(actual)} actual")
    idx = {lab: i for i, lab in enumerate(LABELS)}
    confusion = np.zeros((3, 3), dtype=np.int64)
    for p, a in zip(predicted, actual):
        confusion[idx[SentimentLabel(a)], idx[SentimentLabel(p)]] += 1
    total = confusion.sum()
    accuracy = float(np.trace(confusion) / total) if total else 0.0
    return accuracy, confusion


def split_by_sentiment(items: Sequence, labels: Sequence[SentimentLabel]) -> dict[SentimentLabel, list]:
    """Partition ``items`` by label, keeping order within each class."""
    if len(items) != len(labels):
        raise ValueError("items and labels differ in length")
    out = {lab: [] for lab in LABELS}
    for item, lab in zip(items, labels):
        out[SentimentLabel(lab)].append(item)
    return out
