"""Read review records from CSV or JSONL files into an in-memory corpus.

Malformed rows never disappear silently: each one becomes an
:class:`IngestError` on the returned corpus, so that

    len(corpus.reviews) + len(corpus.errors) == corpus.source_meta["rows"]
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

PLATFORMS = ("ios", "google")
REQUIRED_FIELDS = ("id", "app", "platform", "rating", "body")
FIELDS = ("id", "app", "platform", "rating", "title", "body", "date", "language")


class IngestFormatError(ValueError):
    """The input file cannot be read under the declared format."""


@dataclass(frozen=True)
class Review:
    id: str
    app: str
    platform: str
    rating: int
    body: str
    title: str | None = None
    date: str | None = None
    language: str | None = None

    @property
    def text(self) -> str:
        """Title and body joined by a single space (title omitted when absent)."""
        if self.title:
            return f"{self.title} {self.body}"
        return self.body


@dataclass(frozen=True)
class IngestError:
    line: int
    field: str
    message: str


@dataclass
class RawCorpus:
    reviews: list[Review]
    source_meta: dict[str, str] = field(default_factory=dict)
    errors: list[IngestError] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.reviews)

    def with_reviews(self, reviews: list[Review]) -> "RawCorpus":
        return replace(self, reviews=list(reviews))


def _clean_optional(value) -> str | None:
    if value is None:
        return None
    value = str(value)
    return value if value.strip() else None


def _parse_rating(value) -> int:
    if isinstance(value, bool):
        raise ValueError(f"rating must be an integer, got {value!r}")
    if isinstance(value, int):
        rating = value
    elif isinstance(value, float) and value.is_integer():
        rating = int(value)
    elif isinstance(value, str) and value.strip().lstrip("+-").isdigit():
        rating = int(value.strip())
    else:
        raise ValueError(f"rating must be an integer, got {value!r}")
    if not 1 <= rating <= 5:
        raise ValueError(f"rating {rating} outside 1..5")
    return rating


def _build_review(record: dict, line: int, seen: set[str]) -> Review | IngestError:
    for name in REQUIRED_FIELDS:
        value = record.get(name)
        if value is None or (isinstance(value, str) and value == ""):
            return IngestError(line, name, f"missing required field {name!r}")
    try:
        rating = _parse_rating(record["rating"])
    except ValueError as exc:
        return IngestError(line, "rating", str(exc))

    platform = str(record["platform"]).strip().lower()
    if platform not in PLATFORMS:
        return IngestError(line, "platform", f"unknown platform {record['platform']!r}")

    body = str(record["body"])
    if not body.strip():
        return IngestError(line, "body", "body is empty after trimming whitespace")

    date = _clean_optional(record.get("date"))
    if date is not None:
        try:
            dt.date.fromisoformat(date.strip()[:10])
        except ValueError:
            return IngestError(line, "date", f"not an ISO-8601 date: {date!r}")

    review_id = str(record["id"])
    if review_id in seen:
        return IngestError(line, "id", f"duplicate id {review_id!r}")
    seen.add(review_id)

    return Review(
        id=review_id,
        app=str(record["app"]),
        platform=platform,
        rating=rating,
        body=body,
        title=_clean_optional(record.get("title")),
        date=date,
        language=_clean_optional(record.get("language")),
    )


def _csv_records(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestFormatError(f"{path}: CSV header row required")
        missing = [c for c in REQUIRED_FIELDS if c not in reader.fieldnames]
        if missing:
            raise IngestFormatError(f"{path}: missing required columns {missing}")
        start = reader.line_num + 1
        for row in reader:
            yield start, row
            start = reader.line_num + 1


def _jsonl_records(path: Path) -> Iterator[tuple[int, dict | IngestError]]:
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                yield lineno, IngestError(lineno, "", f"invalid JSON: {exc.msg}")
                continue
            if not isinstance(obj, dict):
                yield lineno, IngestError(lineno, "", "line is not a JSON object")
                continue
            yield lineno, obj


def ingest(path: str | Path, format: str | None = None) -> RawCorpus:
    """Parse a review file.

    ``format`` is ``"csv"`` or ``"jsonl"``; when omitted it is inferred from
    the file suffix. Unreadable files raise; bad rows are collected in
    ``RawCorpus.errors``.
    """
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix.lower() in (".jsonl", ".json", ".ndjson") else "csv"
    if format not in ("csv", "jsonl"):
        raise IngestFormatError(f"unsupported format {format!r}")
    if not path.is_file():
        raise IngestFormatError(f"{path}: no such file")

    records: Iterable = _csv_records(path) if format == "csv" else _jsonl_records(path)
    reviews: list[Review] = []
    errors: list[IngestError] = []
    seen: set[str] = set()
    rows = 0
    try:
        for line, record in records:
            rows += 1
            item = record if isinstance(record, IngestError) else _build_review(record, line, seen)
            (errors if isinstance(item, IngestError) else reviews).append(item)
    except (UnicodeDecodeError, csv.Error) as exc:
        raise IngestFormatError(f"{path}: {exc}") from exc

    logger.info("ingested %d rows from %s: %d ok, %d malformed", rows, path, len(reviews), len(errors))
    meta = {"path": str(path), "format": format, "rows": rows}
    return RawCorpus(reviews=reviews, source_meta=meta, errors=errors)


def write_reviews(reviews: Iterable[Review], path: str | Path, format: str = "csv") -> None:
    """Serialize reviews so that :func:`ingest` reads them back unchanged."""
    path = Path(path)
    if format == "csv":
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=FIELDS)
            writer.writeheader()
            for r in reviews:
                row = asdict(r)
                writer.writerow({k: "" if row[k] is None else row[k] for k in FIELDS})
    elif format == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for r in reviews:
                fh.write(json.dumps({k: getattr(r, k) for k in FIELDS}, ensure_ascii=False) + "\n")
    else:
        raise IngestFormatError(f"unsupported format {format!r}")


def write_error_report(errors: Iterable[IngestError], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for e in errors:
            fh.write(json.dumps(asdict(e), ensure_ascii=False) + "\n")


def filter_language(corpus: RawCorpus, stop_list, threshold: float = 0.15) -> tuple[RawCorpus, int]:
    """Drop reviews that do not look English.

    An explicit ``language`` tag decides on its own (kept iff it starts with
    ``en``). Untagged reviews are kept when the share of their tokens found
    in the base English stop list reaches ``threshold``.
    """
    # imported here to keep ingest free of text-prep import cycles
    from .text import normalize, tokenize_words

    english = stop_list.tokens
    kept = []
    for review in corpus.reviews:
        if review.language is not None:
            if review.language.strip().lower().startswith("en"):
                kept.append(review)
            continue
        tokens = tokenize_words(normalize(review.text))
        if tokens and sum(t in english for t in tokens) / len(tokens) >= threshold:
            kept.append(review)
    removed = len(corpus.reviews) - len(kept)
    return corpus.with_reviews(kept), removed
