"""Unified log record model, columnar batches, file loaders and dataset adapters.

Records follow the OpenTelemetry log data model: a required body plus
optional timestamp, attributes, trace/span ids, severity, resource, scope,
and two analysis fields (entity_id, label). Batches are columnar and
treated as immutable; transformations return new batches.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

from .errors import BadPattern, LabelFileMissing, LogLensError, MissingFile

# Canonical column order for batch CSV persistence.
BATCH_CSV_HEADER = [
    "index", "timestamp", "body", "attributes", "trace_id", "span_id",
    "severity_text", "severity_number", "resource", "scope", "entity_id", "label",
]

# Fields a loader field_map may target ("attributes" collects leftovers).
RECORD_FIELDS = (
    "timestamp", "body", "trace_id", "span_id", "severity_text",
    "severity_number", "resource", "scope", "entity_id", "label",
)


@dataclass
class LogRecord:
    """A single log record. body is required and never None."""

    body: str
    timestamp: datetime | None = None
    attributes: dict[str, str] = field(default_factory=dict)
    trace_id: str | None = None
    span_id: str | None = None
    severity_text: str | None = None
    severity_number: int | None = None
    resource: str | None = None
    scope: str | None = None
    entity_id: str | None = None
    label: int | None = None

    def __post_init__(self):
        if self.body is None:
            raise ValueError("body must be a string, not None")
        if self.severity_number is not None and not 1 <= self.severity_number <= 24:
            raise ValueError(f"severity_number {self.severity_number} outside [1, 24]")
        if self.label is not None and self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


class LogRecordBatch:
    """Columnar collection of log records.

    Columns are parallel lists indexed by record position. Batches compare
    equal when every column and the source descriptor match; the stats
    dict (row rejection counts and similar bookkeeping) is not part of
    equality.
    """

    __slots__ = (
        "timestamps", "bodies", "attributes", "trace_ids", "span_ids",
        "severity_texts", "severity_numbers", "resources", "scopes",
        "entity_ids", "labels", "source_descriptor", "stats",
    )

    def __init__(self, records: list[LogRecord] | None = None,
                 source_descriptor: str = "", stats: dict | None = None):
        records = records or []
        self.timestamps: list[datetime | None] = [r.timestamp for r in records]
        self.bodies: list[str] = [r.body for r in records]
        self.attributes: list[dict[str, str]] = [dict(r.attributes) for r in records]
        self.trace_ids: list[str | None] = [r.trace_id for r in records]
        self.span_ids: list[str | None] = [r.span_id for r in records]
        self.severity_texts: list[str | None] = [r.severity_text for r in records]
        self.severity_numbers: list[int | None] = [r.severity_number for r in records]
        self.resources: list[str | None] = [r.resource for r in records]
        self.scopes: list[str | None] = [r.scope for r in records]
        self.entity_ids: list[str | None] = [r.entity_id for r in records]
        self.labels: list[int | None] = [r.label for r in records]
        self.source_descriptor = source_descriptor
        self.stats: dict = stats if stats is not None else {}

    _COLUMNS = (
        "timestamps", "bodies", "attributes", "trace_ids", "span_ids",
        "severity_texts", "severity_numbers", "resources", "scopes",
        "entity_ids", "labels",
    )

    def __len__(self) -> int:
        return len(self.bodies)

    def record(self, i: int) -> LogRecord:
        return LogRecord(
            body=self.bodies[i], timestamp=self.timestamps[i],
            attributes=dict(self.attributes[i]), trace_id=self.trace_ids[i],
            span_id=self.span_ids[i], severity_text=self.severity_texts[i],
            severity_number=self.severity_numbers[i], resource=self.resources[i],
            scope=self.scopes[i], entity_id=self.entity_ids[i], label=self.labels[i],
        )

    def __iter__(self) -> Iterator[LogRecord]:
        return (self.record(i) for i in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LogRecordBatch):
            return NotImplemented
        if self.source_descriptor != other.source_descriptor:
            return False
        return all(getattr(self, c) == getattr(other, c) for c in self._COLUMNS)

    def replace_columns(self, **columns) -> "LogRecordBatch":
        """Return a new batch sharing every column except the given ones."""
        out = LogRecordBatch(source_descriptor=self.source_descriptor)
        for c in self._COLUMNS:
            setattr(out, c, columns.get(c, getattr(self, c)))
            if len(getattr(out, c)) != len(self):
                raise LogLensError(f"column {c} has wrong length")
        out.stats = dict(self.stats)
        return out

    # -- persistence ------------------------------------------------------

    def to_csv(self, path: str | Path) -> None:
        """Write the batch in the canonical CSV layout.

        None is encoded as an empty cell, so optional string fields that
        are empty strings are read back as None. Every cell is quoted so
        embedded newlines and carriage returns survive; NUL characters
        cannot be represented and are rejected.
        """
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_ALL)
            writer.writerow(BATCH_CSV_HEADER)
            for i in range(len(self)):
                ts = self.timestamps[i]
                cells = [
                    i,
                    ts.isoformat() if ts is not None else "",
                    self.bodies[i],
                    encode_attributes(self.attributes[i]),
                    self.trace_ids[i] or "",
                    self.span_ids[i] or "",
                    self.severity_texts[i] or "",
                    "" if self.severity_numbers[i] is None else self.severity_numbers[i],
                    self.resources[i] or "",
                    self.scopes[i] or "",
                    self.entity_ids[i] or "",
                    "" if self.labels[i] is None else self.labels[i],
                ]

                try:
                    writer.writerow(cells)
                except csv.Error as exc:
                    raise LogLensError(
                        f"record {i} is not CSV-serializable "
                        f"(NUL characters are unsupported): {exc}") from exc

    @classmethod
    def from_csv(cls, path: str | Path, source_descriptor: str | None = None) -> "LogRecordBatch":
        path = Path(path)
        if not path.is_file():
            raise MissingFile(str(path))
        records = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != BATCH_CSV_HEADER:
                raise LogLensError(f"unexpected batch CSV header in {path}")
            for row in reader:
                (_, ts, body, attrs, trace_id, span_id, sev_text, sev_num,
                 resource, scope, entity_id, label) = row
                records.append(LogRecord(
                    body=body,
                    timestamp=datetime.fromisoformat(ts) if ts else None,
                    attributes=decode_attributes(attrs),
                    trace_id=trace_id or None,
                    span_id=span_id or None,
                    severity_text=sev_text or None,
                    severity_number=int(sev_num) if sev_num else None,
                    resource=resource or None,
                    scope=scope or None,
                    entity_id=entity_id or None,
                    label=int(label) if label else None,
                ))
        return cls(records, source_descriptor=source_descriptor or str(path))


def encode_attributes(attrs: dict[str, str]) -> str:
    """Serialize attributes as k1=v1;k2=v2 with backslash escaping."""

    def esc(s: str) -> str:
        return s.replace("\\", "\\\\").replace(";", "\\;").replace("=", "\\=")

    return ";".join(f"{esc(k)}={esc(v)}" for k, v in attrs.items())


def decode_attributes(text: str) -> dict[str, str]:
    """Inverse of encode_attributes."""
    if not text:
        return {}
    attrs: dict[str, str] = {}
    key, buf, in_value = None, [], False
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            buf.append(text[i + 1])
            i += 2
            continue
        if ch == "=" and not in_value:
            key, buf, in_value = "".join(buf), [], True
        elif ch == ";":
            if key is None:
                raise LogLensError(f"attribute pair without '=': {text!r}")
            attrs[key] = "".join(buf)
            key, buf, in_value = None, [], False
        else:
            buf.append(ch)
        i += 1
    if key is None:
        raise LogLensError(f"attribute pair without '=': {text!r}")
    attrs[key] = "".join(buf)
    return attrs


# -- loading ---------------------------------------------------------------

LOADER_FORMATS = ("log", "csv", "tsv", "json")


@dataclass
class LoaderConfig:
    """How to read a raw file into a batch.

    field_map sends source keys (named regex groups, CSV headers, JSON
    keys) to record fields or to "attributes". Source keys that already
    match a record field name map automatically. Unmapped values are
    space-joined into body when body itself is unmapped, otherwise they
    are kept as attributes.
    """

    path: str
    format: str = "log"
    field_map: dict[str, str] = field(default_factory=dict)
    timestamp_format: str | None = None
    line_pattern: str | None = None

    def validate(self) -> list[str]:
        errors = []
        if self.format not in LOADER_FORMATS:
            errors.append(f"loader.format: unknown format {self.format!r}")
        for src, dst in self.field_map.items():
            if dst not in RECORD_FIELDS and dst != "attributes":
                errors.append(f"loader.field_map.{src}: unknown target field {dst!r}")
        if self.line_pattern is not None:
            try:
                re.compile(self.line_pattern)
            except re.error as exc:
                errors.append(f"loader.line_pattern: {exc}")
        return errors


def _parse_timestamp(value: str, fmt: str | None) -> datetime:
    if fmt is not None:
        ts = datetime.strptime(value, fmt)
    else:
        try:
            ts = datetime.fromisoformat(value)
        except ValueError:
            ts = datetime.fromtimestamp(float(value), tz=timezone.utc)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_label_value(value: str) -> int | None:
    """Map common label spellings to 0/1 (None when empty)."""
    value = value.strip()
    if not value:
        return None
    if value == "-" or value.lower() in ("normal", "false", "success"):
        return 0
    try:
        return 1 if int(value) != 0 else 0
    except ValueError:
        return 1  # any alert/anomaly word


def _build_record(pairs: list[tuple[str, str]], config: LoaderConfig,
                  raw_line: str | None, stats: dict, row_index: int) -> LogRecord:
    """Assemble one record from (source key, value) pairs."""
    fields: dict = {}
    attributes: dict[str, str] = {}
    leftovers: list[tuple[str, str]] = []
    for key, value in pairs:
        target = config.field_map.get(key) or (key if key in RECORD_FIELDS else None)
        if target is None:
            leftovers.append((key, value))
        elif target == "attributes":
            attributes[key] = value
        elif target == "timestamp":
            try:
                fields["timestamp"] = _parse_timestamp(value, config.timestamp_format)
            except (ValueError, OverflowError):
                stats["bad_timestamps"].append(row_index)
        elif target == "severity_number":
            try:
                fields["severity_number"] = int(value)
            except ValueError:
                stats["bad_values"].append(row_index)
        elif target == "label":
            fields["label"] = parse_label_value(value)
        else:
            fields[target] = value
    if "body" not in fields:
        if raw_line is not None and not leftovers:
            fields["body"] = raw_line
        else:
            fields["body"] = " ".join(v for _, v in leftovers)
            leftovers = []
    attributes.update(leftovers)
    fields["attributes"] = attributes
    try:
        return LogRecord(**fields)
    except ValueError:
        stats["bad_values"].append(row_index)
        fields.pop("severity_number", None)
        fields.pop("label", None)
        return LogRecord(**fields)


def _flatten_json(obj: dict, prefix: str = "") -> list[tuple[str, str]]:
    pairs = []
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            pairs.extend(_flatten_json(value, prefix=f"{name}."))
        elif isinstance(value, (list, tuple)):
            pairs.append((name, json.dumps(value)))
        elif isinstance(value, bool):
            pairs.append((name, "true" if value else "false"))
        elif value is None:
            pairs.append((name, ""))
        else:
            pairs.append((name, str(value)))
    return pairs


def load_file(config: LoaderConfig) -> LogRecordBatch:
    """Read a raw log/csv/tsv/json-lines file into a LogRecordBatch.

    Every non-empty input line yields a record unless it is structurally
    malformed (wrong column count, invalid JSON), in which case its index
    is recorded in batch.stats["malformed_rows"] and the row is skipped.
    """
    errors = config.validate()
    if errors:
        raise LogLensError("; ".join(errors))
    path = Path(config.path)
    if not path.is_file():
        raise MissingFile(str(path))

    stats: dict = {"rows_read": 0, "malformed_rows": [], "bad_timestamps": [], "bad_values": []}
    records: list[LogRecord] = []
    pattern = re.compile(config.line_pattern) if config.line_pattern else None

    with open(path, encoding="utf-8", errors="replace", newline="") as fh:
        if config.format in ("csv", "tsv"):
            delim = "," if config.format == "csv" else "\t"
            reader = csv.reader(fh, delimiter=delim)
            header = next(reader, None)
            if header is None:
                return LogRecordBatch([], source_descriptor=str(path), stats=stats)
            for row in reader:
                if not row:
                    continue
                stats["rows_read"] += 1
                idx = stats["rows_read"] - 1
                if len(row) != len(header):
                    stats["malformed_rows"].append(idx)
                    continue
                records.append(_build_record(list(zip(header, row)), config, None, stats, idx))
        else:
            for line in fh:
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                stats["rows_read"] += 1
                idx = stats["rows_read"] - 1
                if config.format == "json":
                    try:
                        obj = json.loads(line)
                    except json.JSONDecodeError:
                        stats["malformed_rows"].append(idx)
                        continue
                    if not isinstance(obj, dict):
                        stats["malformed_rows"].append(idx)
                        continue
                    records.append(_build_record(_flatten_json(obj), config, None, stats, idx))
                else:  # free-form log line
                    if pattern is None:
                        records.append(_build_record([], config, line, stats, idx))
                        continue
                    match = pattern.match(line)
                    if match is None:
                        records.append(_build_record([], config, line, stats, idx))
                    else:
                        pairs = [(k, v) for k, v in match.groupdict().items() if v is not None]
                        records.append(_build_record(pairs, config, line, stats, idx))

    return LogRecordBatch(records, source_descriptor=str(path), stats=stats)


# -- dataset adapters ------------------------------------------------------

LABEL_SOURCES = ("column", "sidecar_file", "severity_prefix")


@dataclass
class DatasetAdapter:
    """Dataset-specific derivation of entity ids and binary labels.

    id_pattern: regex whose first match in the body becomes entity_id.
    label_source:
      column          -- parse attributes[label_column] on each record
      sidecar_file    -- join entity_id against a (entity, label) CSV
      severity_prefix -- first body token "-" means normal, else anomalous
    Applying an adapter twice is a no-op because every rule recomputes
    from content rather than consuming it.
    """

    name: str = "generic"
    id_pattern: str | None = None
    label_source: str | None = None
    label_column: str = "label"
    sidecar_path: str | None = None

    def validate(self) -> list[str]:
        errors = []
        if self.label_source is not None and self.label_source not in LABEL_SOURCES:
            errors.append(f"adapter.label_source: unknown source {self.label_source!r}")
        if self.id_pattern is not None:
            try:
                re.compile(self.id_pattern)
            except re.error as exc:
                errors.append(f"adapter.id_pattern: {exc}")
        if self.label_source == "sidecar_file" and not self.sidecar_path:
            errors.append("adapter.sidecar_path: required for sidecar_file labels")
        return errors


def hdfs_adapter(sidecar_path: str | None = None) -> DatasetAdapter:
    """Block-id entities; labels joined from the usual sidecar CSV."""
    return DatasetAdapter(
        name="hdfs", id_pattern=r"blk_-?\d+",
        label_source="sidecar_file" if sidecar_path else None,
        sidecar_path=sidecar_path,
    )


def bgl_adapter() -> DatasetAdapter:
    """Alert-tag labels ('-' prefix is normal); node id as entity."""
    return DatasetAdapter(name="bgl", id_pattern=None, label_source="severity_prefix")


def _read_sidecar_labels(path: str) -> dict[str, int]:
    p = Path(path)
    if not p.is_file():
        raise LabelFileMissing(str(p))
    labels: dict[str, int] = {}
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [r for r in reader if r]
    if not rows:
        return labels
    start = 0
    if len(rows[0]) >= 2 and rows[0][1].strip().lower() == "label":
        start = 1
    for row in rows[start:]:
        if len(row) < 2:
            continue
        parsed = parse_label_value(row[1])
        if parsed is not None:
            labels[row[0].strip()] = parsed
    return labels


def adapt_dataset(batch: LogRecordBatch, adapter: DatasetAdapter) -> LogRecordBatch:
    """Return a new batch with entity_id and label columns filled in."""
    errors = adapter.validate()
    if errors:
        raise LogLensError("; ".join(errors))

    entity_ids = list(batch.entity_ids)
    if adapter.id_pattern:
        pattern = re.compile(adapter.id_pattern)
        for i, body in enumerate(batch.bodies):
            match = pattern.search(body)
            if match is not None:
                entity_ids[i] = match.group(0)

    labels = list(batch.labels)
    unlabeled: set[str] = set()
    if adapter.label_source == "column":
        for i, attrs in enumerate(batch.attributes):
            value = attrs.get(adapter.label_column)
            if value is None:
                continue
            labels[i] = parse_label_value(value)
    elif adapter.label_source == "sidecar_file":
        table = _read_sidecar_labels(adapter.sidecar_path)
        for i, entity in enumerate(entity_ids):
            if entity is None:
                continue
            if entity in table:
                labels[i] = table[entity]
            else:
                unlabeled.add(entity)
    elif adapter.label_source == "severity_prefix":
        for i, body in enumerate(batch.bodies):
            tokens = body.split()
            if tokens:
                labels[i] = 0 if tokens[0] == "-" else 1

    out = batch.replace_columns(entity_ids=entity_ids, labels=labels)
    if unlabeled:
        out.stats["unlabeled_entities"] = sorted(unlabeled)
    return out
