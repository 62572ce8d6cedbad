"""Machine-readable representations of parsed/cleaned logs.

TF-IDF matrices over bodies or template strings, per-partition event-id
sequences, quantitative count vectors, categorical encodings of
structured fields, and bucketed time-series counters.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import EmptyCorpus, LogLensError, MissingTimestamps, UnknownField
from .parsing import ParseResult
from .preprocess import PartitionSet
from .records import LogRecordBatch

# record columns usable as categorical fields alongside attribute names
_RECORD_COLUMNS = {
    "severity_text": "severity_texts",
    "resource": "resources",
    "scope": "scopes",
    "entity_id": "entity_ids",
    "trace_id": "trace_ids",
    "span_id": "span_ids",
}


@dataclass
class FeatureMatrix:
    row_ids: list[str]
    column_names: list[str]
    values: np.ndarray
    value_maps: dict[str, list[str]] | None = None  # decode tables for coded fields

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.row_ids), len(self.column_names)):
            raise LogLensError(
                f"matrix shape {self.values.shape} does not match "
                f"{len(self.row_ids)} rows x {len(self.column_names)} columns"
            )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row_id"] + self.column_names)
            for rid, row in zip(self.row_ids, self.values):
                writer.writerow([rid] + [repr(v) for v in row.tolist()])

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureMatrix":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            row_ids, rows = [], []
            for row in reader:
                row_ids.append(row[0])
                rows.append([float(v) for v in row[1:]])
        values = np.array(rows, dtype=float) if rows else np.zeros((0, len(header) - 1))
        return cls(row_ids, header[1:], values)


@dataclass
class EventSequenceSet:
    partition_ids: list[str]
    sequences: list[list[int]]
    vocabulary_size: int

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["partition_id", "ids"])
            for pid, seq in zip(self.partition_ids, self.sequences):
                writer.writerow([pid, " ".join(str(i) for i in seq)])


@dataclass
class CounterSeries:
    bucket_start: list[datetime]
    counts: np.ndarray  # (buckets,) or (buckets, templates)
    bucket_seconds: float
    template_ids: list[int] | None = None

    def total(self) -> np.ndarray:
        return self.counts.sum(axis=1) if self.counts.ndim == 2 else self.counts


def _tokenize(doc: str) -> list[str]:
    return doc.split()


def vectorize_tfidf(corpus: list[str], vocab_limit: int | None = None) -> FeatureMatrix:
    """Raw-count tf, smoothed idf ln((1+N)/(1+df))+1, L2-normalized rows.

    Vocabulary is lexicographic; when vocab_limit is set, the highest-df
    terms are kept (ties favor lexicographically earlier terms).
    """
    if not corpus:
        raise EmptyCorpus("tf-idf needs at least one document")
    docs = [_tokenize(doc) for doc in corpus]
    df: dict[str, int] = {}
    for tokens in docs:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    vocabulary = sorted(df)
    if vocab_limit is not None and len(vocabulary) > vocab_limit:
        by_df = sorted(vocabulary, key=lambda t: (-df[t], t))[:vocab_limit]
        vocabulary = sorted(by_df)
    index = {t: j for j, t in enumerate(vocabulary)}

    n = len(docs)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1 for t in vocabulary])
    values = np.zeros((n, len(vocabulary)))
    for i, tokens in enumerate(docs):
        for token in tokens:
            j = index.get(token)
            if j is not None:
                values[i, j] += 1
    values *= idf
    norms = np.linalg.norm(values, axis=1)
    nonzero = norms > 0
    values[nonzero] /= norms[nonzero, None]
    return FeatureMatrix([str(i) for i in range(n)], vocabulary, values)


def vocabulary_size_of(parsed: ParseResult) -> int:
    return max(parsed.templates) + 1 if parsed.templates else 1


def encode_sequential(parsed: ParseResult, parts: PartitionSet) -> EventSequenceSet:
    """Template-id sequence per partition, in member order."""
    ids = parsed.line_template_ids
    return EventSequenceSet(
        partition_ids=[pid for pid, _ in parts.partitions],
        sequences=[[ids[i] for i in members] for _, members in parts.partitions],
        vocabulary_size=vocabulary_size_of(parsed),
    )


def encode_quantitative(parsed: ParseResult, parts: PartitionSet,
                        weighting: str = "count") -> FeatureMatrix:
    """Per-partition template count vectors, optionally idf-weighted."""
    if weighting not in ("count", "tfidf"):
        raise LogLensError(f"unknown weighting {weighting!r}")
    template_ids = sorted(parsed.templates)
    column_of = {tid: j for j, tid in enumerate(template_ids)}
    values = np.zeros((len(parts.partitions), len(template_ids)))
    for r, (_, members) in enumerate(parts.partitions):
        for i in members:
            values[r, column_of[parsed.line_template_ids[i]]] += 1
    if weighting == "tfidf":
        n = len(parts.partitions)
        df = (values > 0).sum(axis=0)
        idf = np.log((1 + n) / (1 + df)) + 1
        values *= idf
        norms = np.linalg.norm(values, axis=1)
        nonzero = norms > 0
        values[nonzero] /= norms[nonzero, None]
    return FeatureMatrix(
        [pid for pid, _ in parts.partitions],
        [f"t{tid}" for tid in template_ids],
        values,
    )


def _field_values(batch: LogRecordBatch, name: str) -> list[str | None]:
    if name in _RECORD_COLUMNS:
        return list(getattr(batch, _RECORD_COLUMNS[name]))
    values = [attrs.get(name) for attrs in batch.attributes]
    if all(v is None for v in values):
        raise UnknownField(name)
    return values


def encode_categorical(batch: LogRecordBatch, fields: list[str],
                       scheme: str = "label") -> FeatureMatrix:
    """Integer or one-hot encodings of structured fields.

    label codes by first appearance, ordinal by lexicographic value
    order; missing values encode as -1 (or an all-zero one-hot segment).
    """
    if scheme not in ("label", "one_hot", "ordinal"):
        raise LogLensError(f"unknown scheme {scheme!r}")
    if not fields:
        raise UnknownField("(no fields given)")
    columns: list[str] = []
    segments: list[np.ndarray] = []
    value_maps: dict[str, list[str]] = {}
    n = len(batch)
    for name in fields:
        raw = _field_values(batch, name)
        if scheme == "one_hot":
            distinct = sorted({v for v in raw if v is not None})
            seg = np.zeros((n, len(distinct)))
            pos = {v: j for j, v in enumerate(distinct)}
            for i, v in enumerate(raw):
                if v is not None:
                    seg[i, pos[v]] = 1.0
            columns.extend(f"{name}={v}" for v in distinct)
            segments.append(seg)
            value_maps[name] = distinct
            continue
        if scheme == "label":
            ordered: list[str] = []
            code: dict[str, int] = {}
            for v in raw:
                if v is not None and v not in code:
                    code[v] = len(ordered)
                    ordered.append(v)
        else:  # ordinal
            ordered = sorted({v for v in raw if v is not None})
            code = {v: j for j, v in enumerate(ordered)}
        seg = np.array([[code[v] if v is not None else -1] for v in raw], dtype=float)
        columns.append(name)
        segments.append(seg)
        value_maps[name] = ordered
    values = np.hstack(segments) if segments else np.zeros((n, 0))
    return FeatureMatrix([str(i) for i in range(n)], columns, values, value_maps=value_maps)


def extract_counters(batch: LogRecordBatch, bucket_seconds: float,
                     per_template: bool = False,
                     parsed: ParseResult | None = None) -> CounterSeries:
    """Counts per epoch-aligned time bucket, gaps filled with zeros."""
    if bucket_seconds <= 0:
        raise LogLensError("bucket_seconds must be positive")
    if len(batch) == 0:
        return CounterSeries([], np.zeros(0, dtype=int), bucket_seconds)
    if any(ts is None for ts in batch.timestamps):
        raise MissingTimestamps("counter extraction needs a timestamp on every record")
    if per_template and parsed is None:
        raise LogLensError("per_template counters need a parse result")

    buckets = [math.floor(ts.timestamp() / bucket_seconds) for ts in batch.timestamps]
    first, last = min(buckets), max(buckets)
    n_buckets = last - first + 1
    starts = [
        datetime.fromtimestamp(b * bucket_seconds, tz=timezone.utc)
        for b in range(first, last + 1)
    ]
    if per_template:
        template_ids = sorted(parsed.templates)
        column_of = {tid: j for j, tid in enumerate(template_ids)}
        counts = np.zeros((n_buckets, len(template_ids)), dtype=int)
        for i, b in enumerate(buckets):
            counts[b - first, column_of[parsed.line_template_ids[i]]] += 1
        return CounterSeries(starts, counts, bucket_seconds, template_ids)
    counts = np.zeros(n_buckets, dtype=int)
    for b in buckets:
        counts[b - first] += 1
    return CounterSeries(starts, counts, bucket_seconds)
