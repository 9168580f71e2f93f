"""Report container and its on-disk form (report.json plus TSV/CSV tables)."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

SCHEMA_VERSION = "reviewminer.report/1"
SENTIMENT_SUFFIX = {"global": "global", "negative": "neg", "positive": "pos", "neutral": "neu"}


@dataclass
class Report:
    schema: str = SCHEMA_VERSION
    status: str = "ok"
    failed_stage: str | None = None
    error: str | None = None
    config: dict = field(default_factory=dict)
    corpus: dict = field(default_factory=dict)
    top_terms: list = field(default_factory=list)
    sentiment: dict = field(default_factory=dict)
    sweeps: dict = field(default_factory=dict)
    topics: dict = field(default_factory=dict)
    labels: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def to_json(self) -> str:
        return dumps(self.to_dict())


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, no NaN."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def load_schema() -> dict:
    text = resources.files("reviewminer").joinpath("data").joinpath("report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_report(path: str | Path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _write_table(path: Path, header: list[str], rows, delimiter: str = "\t") -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def sweep_rows(sweep: dict):
    best = sweep.get("best")
    for i, e in enumerate(sweep.get("entries", [])):
        yield [e["ngram_order"], e["num_topics"], repr(e["perplexity"]), repr(e["coherence"]),
               repr(e["score"]), int(i == best)]


def topic_rows(topics: list):
    for t in topics:
        for rank, term in enumerate(t["terms"], start=1):
            yield [t["topic"], rank, term["token"], repr(term["probability"])]


SWEEP_HEADER = ["order", "K", "perplexity", "coherence", "score", "chosen"]
TOPIC_HEADER = ["topic", "rank", "token", "probability"]
LABEL_HEADER = ["id", "rating", "auto_label", "method_label"]


def emit_report(report: Report, directory: str | Path) -> list[Path]:
    """Write report.json and the derived tables into ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "report.json"
    path.write_text(report.to_json(), encoding="utf-8")
    written.append(path)

    path = out / "top_terms.tsv"
    _write_table(path, ["order", "rank", "token", "count", "tfidf_total"],
                 ([t["order"], t["rank"], t["token"], t["count"], repr(t["tfidf_total"])] for t in report.top_terms))
    written.append(path)

    for name, suffix in SENTIMENT_SUFFIX.items():
        path = out / f"sweep_{suffix}.tsv"
        _write_table(path, SWEEP_HEADER, sweep_rows(report.sweeps.get(name, {})))
        written.append(path)
        path = out / f"topics_{suffix}.tsv"
        _write_table(path, TOPIC_HEADER, topic_rows(report.topics.get(name, [])))
        written.append(path)

    path = out / "labels.csv"
    _write_table(path, LABEL_HEADER,
                 ([r["id"], r["rating"], r["auto_label"], r["label"]] for r in report.labels), delimiter=",")
    written.append(path)

    failed = out / "FAILED"
    if report.status == "failed":
        failed.write_text(f"stage: {report.failed_stage}\nerror: {report.error}\n", encoding="utf-8")
        written.append(failed)
    elif failed.exists():
        failed.unlink()
    return written
