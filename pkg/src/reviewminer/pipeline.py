"""End-to-end run: ingest, clean, term statistics, topic sweeps, sentiment, per-sentiment sweeps."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import __version__
from .ingest import filter_language, ingest
from .report import Report, emit_report
from .seeds import derive_seed
from .sentiment import (
    LABELS,
    SentimentLabel,
    ValenceLexicon,
    auto_label,
    compound_score,
    compound_to_label,
    evaluate,
    nb_fit,
    nb_predict,
    polarity_score,
    polarity_to_label,
    rating_stats,
    split_train_test,
)
from .term_stats import tfidf, top_k, word_counts
from .text import NGramConfig, StopList, build_corpus, normalize, tokenize_words
from .topics import LdaConfig, SweepResult, sweep, top_words

logger = logging.getLogger(__name__)

METHODS = ("auto", "polarity", "compound", "nb", "all")


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException, report: Report):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.report = report


@dataclass
class PipelineConfig:
    input: str = ""
    format: str | None = None
    stopwords: str | None = None
    extensions: str | None = None
    lexicon: str | None = None
    negators: str | None = None
    boosters: str | None = None
    orders: tuple[int, ...] = (1, 2, 3)
    topics_min: int = 5
    topics_max: int = 15
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 1000
    top_n: int = 10
    method: str = "all"
    threshold: float = 0.05
    split: float = 0.8
    seed: int = 42
    nb_alpha: float = 1.0
    lang_threshold: float = 0.15
    top_terms: int = 20
    workers: int = 1
    output: str | None = field(default=None, metadata={"report": False})

    def validate(self) -> None:
        for name in ("input", "stopwords", "extensions", "lexicon", "negators", "boosters"):
            value = getattr(self, name)
            if name == "input" and not value:
                raise ConfigError("no input file given")
            if value and not Path(value).is_file():
                raise ConfigError(f"{name}: file not found: {value}")
        if not self.orders or any(o not in (1, 2, 3) for o in self.orders):
            raise ConfigError(f"n-gram orders must be a non-empty subset of 1,2,3: {self.orders}")
        if self.topics_min < 2 or self.topics_max < self.topics_min:
            raise ConfigError(f"bad topic range {self.topics_min}..{self.topics_max}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if not 0 < self.split < 1:
            raise ConfigError("split must be in (0, 1)")
        if self.iterations < 1 or self.top_n < 2 or self.top_terms < 1:
            raise ConfigError("iterations >= 1, top_n >= 2 and top_terms >= 1 required")

    @property
    def k_range(self) -> range:
        return range(self.topics_min, self.topics_max + 1)

    def report_view(self) -> dict:
        out = {}
        for f in fields(self):
            if f.metadata.get("report", True):
                value = getattr(self, f.name)
                out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


def _sweep_section(result: SweepResult, excluded: bool = False) -> dict:
    entries = [
        {
            "ngram_order": e.ngram_order,
            "num_topics": e.num_topics,
            "perplexity": e.perplexity,
            "coherence": e.coherence,
            "score": e.score,
            "seed": e.seed,
        }
        for e in result.entries
    ]
    return {
        "entries": entries,
        "best": result.best,
        "chosen": entries[result.best],
        "skipped_orders": list(result.skipped_orders),
        "excluded_from_interpretation": excluded,
    }


def _topic_section(result: SweepResult, n: int) -> list:
    summary = top_words(result.best_model, n)
    return [
        {"topic": k + 1, "terms": [{"token": t, "probability": p} for t, p in terms]}
        for k, terms in enumerate(summary.topics)
    ]


def _label_reviews(cfg, method, reviews, unigram_docs, lex, nb_model):
    if method == "nb":
        return [nb_predict(nb_model, doc)[0] for doc in unigram_docs]
    surface = [tokenize_words(normalize(r.text)) for r in reviews]
    if method == "polarity":
        return [polarity_to_label(polarity_score(t, lex)) for t in surface]
    return [compound_to_label(compound_score(t, lex), cfg.threshold) for t in surface]


def run_pipeline(cfg: PipelineConfig) -> Report:
    """Run every stage; raises :class:`PipelineError` carrying the partial report."""
    cfg.validate()
    report = Report(config=cfg.report_view())
    report.config["version"] = __version__
    stage = "setup"
    try:
        stop = StopList.load(cfg.stopwords, cfg.extensions)
        lex = ValenceLexicon.load(cfg.lexicon, cfg.negators, cfg.boosters)
        lda_base = LdaConfig(
            num_topics=cfg.topics_min, alpha=cfg.alpha, beta=cfg.beta,
            iterations=cfg.iterations, seed=cfg.seed, coherence_top_n=cfg.top_n,
        )

        stage = "ingest"
        raw = ingest(cfg.input, cfg.format)
        stage = "filter"
        kept, removed = filter_language(raw, stop, cfg.lang_threshold)
        reviews = kept.reviews
        stage = "rating_stats"
        stats = rating_stats(reviews)
        report.corpus = {
            "rows": raw.source_meta["rows"],
            "malformed": len(raw.errors),
            "removed_non_english": removed,
            "kept": len(reviews),
            "rating_mean": stats.mean,
            "rating_sd": stats.sd,
            "errors": [{"line": e.line, "field": e.field, "message": e.message} for e in raw.errors],
        }

        stage = "corpus"
        corpora = {order: build_corpus(kept, stop, NGramConfig(order)) for order in sorted(set(cfg.orders) | {1})}
        report.corpus["orders"] = [
            {"order": o, "docs": len(c), "empty_docs": len(c.empty_docs), "tokens": c.num_tokens,
             "vocab_size": len(c.vocab)}
            for o, c in corpora.items()
            if o in cfg.orders
        ]

        stage = "term_stats"
        for order in sorted(cfg.orders):
            ts = tfidf(corpora[order], word_counts(corpora[order]))
            idx = {t: i for i, t in enumerate(ts.tokens)}
            for rank, (tok, count) in enumerate(top_k(ts, cfg.top_terms, "count"), start=1):
                report.top_terms.append({
                    "order": order, "rank": rank, "token": tok, "count": int(count),
                    "tfidf_total": float(ts.tfidf_total_of[idx[tok]]),
                })

        topic_corpora = {o: corpora[o] for o in cfg.orders}
        stage = "sweep:global"
        result = sweep(topic_corpora, cfg.k_range, lda_base, stage="global", workers=cfg.workers)
        report.sweeps["global"] = _sweep_section(result)
        report.topics["global"] = _topic_section(result, cfg.top_n)

        stage = "sentiment"
        if stats.sd == 0:
            report.warnings.append("rating standard deviation is 0; all reviews auto-labeled neutral")
        auto = [auto_label(r.rating, stats) for r in reviews]
        unigram_docs = [corpora[1].tokens(i) for i in range(len(reviews))]
        split = split_train_test(len(reviews), cfg.split, derive_seed(cfg.seed, "split"), labels=auto)
        methods = ["polarity", "compound", "nb"] if cfg.method == "all" else [cfg.method]
        evaluations, nb_model = [], None
        if cfg.method != "auto":
            if "nb" in methods:
                nb_model = nb_fit([unigram_docs[i] for i in split.train], [auto[i] for i in split.train],
                                  cfg.nb_alpha)
                if len(nb_model.labels) < 3:
                    report.warnings.append(
                        "classes absent from training split: "
                        + ", ".join(lab.value for lab in LABELS if lab not in nb_model.labels)
                    )
            test_reviews = [reviews[i] for i in split.test]
            test_docs = [unigram_docs[i] for i in split.test]
            truth = [auto[i] for i in split.test]
            for m in methods:
                predicted = _label_reviews(cfg, m, test_reviews, test_docs, lex, nb_model)
                acc, confusion = evaluate(predicted, truth)
                evaluations.append({"method": m, "accuracy": acc, "confusion": confusion.tolist()})
            # first listed wins ties
            chosen = max(evaluations, key=lambda e: e["accuracy"])["method"]
            labels = _label_reviews(cfg, chosen, reviews, unigram_docs, lex, nb_model)
        else:
            chosen, labels = "auto", auto

        counts = {lab.value: sum(1 for x in labels if x is lab) for lab in LABELS}
        report.sentiment = {
            "method": cfg.method,
            "chosen_method": chosen,
            "split": {
                "train": len(split.train), "test": len(split.test),
                "train_proportions": split.train_proportions, "test_proportions": split.test_proportions,
            },
            "evaluations": evaluations,
            "auto_label_counts": {lab.value: sum(1 for x in auto if x is lab) for lab in LABELS},
            "label_counts": counts,
            "disagreements_with_auto": sum(1 for a, b in zip(auto, labels) if a is not b),
        }
        report.labels = [
            {"id": r.id, "rating": r.rating, "auto_label": a.value, "label": lab.value}
            for r, a, lab in zip(reviews, auto, labels)
        ]

        for lab in (SentimentLabel.NEGATIVE, SentimentLabel.POSITIVE, SentimentLabel.NEUTRAL):
            stage = f"sweep:{lab.value}"
            idx = [i for i, x in enumerate(labels) if x is lab]
            subsets = {o: c.subset(idx) for o, c in topic_corpora.items()}
            if not idx or all(c.num_tokens == 0 for c in subsets.values()):
                report.warnings.append(f"{lab.value} subset is empty; sweep skipped")
                report.sweeps[lab.value] = {"skipped": True, "entries": [], "reviews": len(idx)}
                report.topics[lab.value] = []
                continue
            result = sweep(subsets, cfg.k_range, lda_base, stage=lab.value, workers=cfg.workers)
            section = _sweep_section(result, excluded=lab is SentimentLabel.NEUTRAL)
            section["reviews"] = len(idx)
            report.sweeps[lab.value] = section
            report.topics[lab.value] = _topic_section(result, cfg.top_n)
    except Exception as exc:
        report.status = "failed"
        report.failed_stage = stage
        report.error = f"{type(exc).__name__}: {exc}"
        if cfg.output:
            emit_report(report, cfg.output)
        raise PipelineError(stage, exc, report) from exc

    if cfg.output:
        emit_report(report, cfg.output)
    return report
