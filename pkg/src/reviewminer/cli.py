"""Command-line entry point: ``reviewminer ingest|stats|topics|sentiment|pipeline|report``.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .ingest import IngestFormatError, filter_language, ingest, write_error_report
from .pipeline import METHODS, ConfigError, PipelineConfig, PipelineError, run_pipeline
from .report import SWEEP_HEADER, TOPIC_HEADER, emit_report, load_report, sweep_rows, topic_rows
from .seeds import derive_seed
from .sentiment import (
    LABELS,
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
from .topics import LdaConfig, sweep, top_words

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

_INT_KEYS = {"topics_min", "topics_max", "iterations", "top_n", "seed", "top_terms", "workers"}
_FLOAT_KEYS = {"alpha", "beta", "threshold", "split", "nb_alpha", "lang_threshold"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines ('#' comments) into PipelineConfig field values."""
    known = {f.name for f in fields(PipelineConfig)}
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "iters":
            key = "iterations"
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key: str, value):
    try:
        if key == "orders":
            return _parse_orders(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def _parse_orders(value) -> tuple[int, ...]:
    if isinstance(value, (tuple, list)):
        return tuple(int(v) for v in value)
    value = str(value).strip()
    if value == "all":
        return (1, 2, 3)
    return tuple(int(v) for v in value.replace(",", " ").split())


def _add_common(p: argparse.ArgumentParser, input_required: bool = True) -> None:
    p.add_argument("input", nargs=None if input_required else "?", help="reviews file (.csv or .jsonl)")
    p.add_argument("--config", help="key = value file overriding defaults")
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.add_argument("--stopwords", help="stop-word file (one token per line)")
    p.add_argument("--extensions", help="domain stop-word extension file")
    p.add_argument("--lang-threshold", dest="lang_threshold", type=float)


def _add_lda(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ngram", dest="orders", help="1, 2, 3 or all")
    p.add_argument("--topics-min", dest="topics_min", type=int)
    p.add_argument("--topics-max", dest="topics_max", type=int)
    p.add_argument("--alpha", type=float, help="document-topic prior (default 50/K)")
    p.add_argument("--beta", type=float)
    p.add_argument("--iters", dest="iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--top-n", dest="top_n", type=int)
    p.add_argument("--workers", type=int)


def _add_sentiment(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--threshold", type=float)
    p.add_argument("--split", type=float)
    p.add_argument("--nb-alpha", dest="nb_alpha", type=float)
    p.add_argument("--lexicon")
    p.add_argument("--negators")
    p.add_argument("--boosters")
    if not any(a.dest == "seed" for a in p._actions):
        p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reviewminer", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate and filter a review file")
    _add_common(p)
    p.add_argument("--errors", help="write malformed-row report (JSONL) here")
    p.add_argument("--dump", help="write tokenized corpus (JSONL) here")
    p.add_argument("--ngram", type=int, default=1, choices=[1, 2, 3])

    p = sub.add_parser("stats", help="word counts and TF-IDF")
    _add_common(p)
    p.add_argument("--ngram", type=int, default=1, choices=[1, 2, 3])
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--by", choices=["count", "tfidf"], default="count")
    p.add_argument("-o", "--out", help="TSV path (default stdout)")

    p = sub.add_parser("topics", help="LDA sweep over n-gram orders and topic counts")
    _add_common(p)
    _add_lda(p)
    p.add_argument("--out", help="directory for sweep.tsv and topics.tsv (default stdout)")
    p.add_argument("--save-model", dest="save_model", help="write the chosen model (.npz)")

    p = sub.add_parser("sentiment", help="label reviews and evaluate a method")
    _add_common(p)
    _add_sentiment(p)
    p.add_argument("--labels", help="label CSV path (default stdout)")

    p = sub.add_parser("pipeline", help="run every stage and write a report directory")
    _add_common(p, input_required=False)
    _add_lda(p)
    _add_sentiment(p)
    p.add_argument("--top-terms", dest="top_terms", type=int)
    p.add_argument("--out", dest="output", help="output directory")

    p = sub.add_parser("report", help="re-emit tables from a report.json")
    p.add_argument("report_json")
    p.add_argument("--out", required=True)
    p.add_argument("--validate", action="store_true", help="check against the bundled JSON schema")
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, then the --config file, then explicit flags."""
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for f in fields(PipelineConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = _parse_orders(v) if f.name == "orders" else v
    try:
        return PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _load_filtered(cfg: PipelineConfig):
    if not cfg.input:
        raise ConfigError("no input file given")
    stop = StopList.load(cfg.stopwords, cfg.extensions)
    raw = ingest(cfg.input, cfg.format)
    kept, removed = filter_language(raw, stop, cfg.lang_threshold)
    return raw, kept, removed, stop


def _open_out(path):
    if path:
        return open(path, "w", encoding="utf-8", newline="")
    return open(sys.stdout.fileno(), "w", encoding="utf-8", newline="", closefd=False)


def cmd_ingest(args, cfg) -> int:
    raw, kept, removed, stop = _load_filtered(cfg)
    if args.errors:
        write_error_report(raw.errors, args.errors)
    if args.dump:
        build_corpus(kept, stop, NGramConfig(args.ngram)).dump_jsonl(args.dump)
    summary = {"rows": raw.source_meta["rows"], "malformed": len(raw.errors),
               "removed_non_english": removed, "kept": len(kept)}
    print(json.dumps(summary))
    for e in raw.errors:
        print(f"line {e.line}: {e.field}: {e.message}", file=sys.stderr)
    return EXIT_OK


def cmd_stats(args, cfg) -> int:
    _, kept, _, stop = _load_filtered(cfg)
    corpus = build_corpus(kept, stop, NGramConfig(args.ngram))
    stats = tfidf(corpus, word_counts(corpus))
    idx = {t: i for i, t in enumerate(stats.tokens)}
    with _open_out(args.out) as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["rank", "token", "count", "tfidf_total"])
        for rank, (tok, _) in enumerate(top_k(stats, args.top, args.by), start=1):
            i = idx[tok]
            w.writerow([rank, tok, int(stats.count_of[i]), repr(float(stats.tfidf_total_of[i]))])
    return EXIT_OK


def cmd_topics(args, cfg) -> int:
    cfg.validate()
    _, kept, _, stop = _load_filtered(cfg)
    corpora = {o: build_corpus(kept, stop, NGramConfig(o)) for o in cfg.orders}
    base = LdaConfig(num_topics=cfg.topics_min, alpha=cfg.alpha, beta=cfg.beta, iterations=cfg.iterations,
                     seed=cfg.seed, coherence_top_n=cfg.top_n)
    result = sweep(corpora, cfg.k_range, base, workers=cfg.workers)
    section = {"entries": [vars(e) for e in result.entries], "best": result.best}
    summary = top_words(result.best_model, cfg.top_n)
    topics = [{"topic": k + 1, "terms": [{"token": t, "probability": p} for t, p in terms]}
              for k, terms in enumerate(summary.topics)]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        files = [(out / "sweep.tsv", SWEEP_HEADER, sweep_rows(section)),
                 (out / "topics.tsv", TOPIC_HEADER, topic_rows(topics))]
        for path, header, rows in files:
            with path.open("w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, delimiter="\t", lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
    else:
        with _open_out(None) as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(SWEEP_HEADER)
            w.writerows(sweep_rows(section))
            fh.write("\n")
            w.writerow(TOPIC_HEADER)
            w.writerows(topic_rows(topics))
    if args.save_model:
        result.best_model.save(args.save_model)
    return EXIT_OK


def cmd_sentiment(args, cfg) -> int:
    cfg.validate()
    _, kept, _, stop = _load_filtered(cfg)
    reviews = kept.reviews
    stats = rating_stats(reviews)
    auto = [auto_label(r.rating, stats) for r in reviews]
    method = cfg.method
    evaluation = []
    if method == "auto":
        labels = auto
    else:
        lex = ValenceLexicon.load(cfg.lexicon, cfg.negators, cfg.boosters)
        corpus = build_corpus(kept, stop, NGramConfig(1))
        docs = [corpus.tokens(i) for i in range(len(corpus))]
        surface = [tokenize_words(normalize(r.text)) for r in reviews]
        split = split_train_test(len(reviews), cfg.split, derive_seed(cfg.seed, "split"), labels=auto)
        model = nb_fit([docs[i] for i in split.train], [auto[i] for i in split.train], cfg.nb_alpha)

        def label_all(m):
            if m == "nb":
                return [nb_predict(model, d)[0] for d in docs]
            if m == "polarity":
                return [polarity_to_label(polarity_score(t, lex)) for t in surface]
            return [compound_to_label(compound_score(t, lex), cfg.threshold) for t in surface]

        candidates = ["polarity", "compound", "nb"] if method == "all" else [method]
        predictions = {m: label_all(m) for m in candidates}
        truth = [auto[i] for i in split.test]
        for m in candidates:
            acc, conf = evaluate([predictions[m][i] for i in split.test], truth)
            evaluation.append((m, acc, conf))
        chosen = max(evaluation, key=lambda e: e[1])[0]
        labels = predictions[chosen]

    with _open_out(args.labels) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "rating", "auto_label", "method_label"])
        for r, a, lab in zip(reviews, auto, labels):
            w.writerow([r.id, r.rating, a.value, lab.value])
    for m, acc, conf in evaluation:
        print(f"method={m} accuracy={acc:.4f}", file=sys.stderr)
        print("confusion (rows actual, cols predicted: " + ", ".join(l.value for l in LABELS) + ")",
              file=sys.stderr)
        for row in conf:
            print("  " + " ".join(f"{v:6d}" for v in row), file=sys.stderr)
    return EXIT_OK


def cmd_pipeline(args, cfg) -> int:
    if not cfg.output:
        raise ConfigError("pipeline needs --out DIR (or output = DIR in the config file)")
    report = run_pipeline(cfg)
    best = report.sweeps["global"]["chosen"]
    print(f"report written to {cfg.output}; global best: order {best['ngram_order']}, "
          f"K={best['num_topics']}, score={best['score']:.4f}")
    return EXIT_OK


def cmd_report(args) -> int:
    report = load_report(args.report_json)
    if args.validate:
        import jsonschema

        from .report import load_schema

        jsonschema.validate(report.to_dict(), load_schema())
    emit_report(report, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            return cmd_report(args)
        cfg = resolve_config(args)
        handler = {"ingest": cmd_ingest, "stats": cmd_stats, "topics": cmd_topics,
                   "sentiment": cmd_sentiment, "pipeline": cmd_pipeline}[args.command]
        return handler(args, cfg)
    except (ConfigError, IngestFormatError, FileNotFoundError) as exc:
        print(f"reviewminer: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PipelineError as exc:
        print(f"reviewminer: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        print(f"reviewminer: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
