"""Logline cleaning and batch partitioning.

Cleaning normalizes configured delimiter patterns to spaces and replaces
extraction patterns with placeholders, remembering what was extracted.
Partitioning groups record indices into analysis units (fixed, sliding or
time windows, or per-entity groups).
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BadPattern, LogLensError, MissingEntityIds, MissingTimestamps
from .records import LogRecordBatch

ExtractionTable = dict[tuple[int, str], list[str]]


@dataclass
class PreprocessorConfig:
    """Regex cleanup rules applied to record bodies, in order.

    custom_delimiters_regex patterns are each replaced by a single space;
    custom_replace_list (pattern, placeholder) pairs substitute matches
    with the placeholder verbatim (no auto-bracketing).
    """

    custom_delimiters_regex: list[str] = field(default_factory=list)
    custom_replace_list: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.custom_replace_list = [tuple(pair) for pair in self.custom_replace_list]

    def compile(self) -> tuple[list[re.Pattern], list[tuple[re.Pattern, str]]]:
        delimiters = []
        for pos, pattern in enumerate(self.custom_delimiters_regex):
            try:
                delimiters.append(re.compile(pattern))
            except re.error as exc:
                raise BadPattern(pos, pattern, str(exc)) from None
        replacements = []
        for pos, (pattern, placeholder) in enumerate(self.custom_replace_list):
            try:
                replacements.append((re.compile(pattern), placeholder))
            except re.error as exc:
                raise BadPattern(len(self.custom_delimiters_regex) + pos, pattern, str(exc)) from None
        return delimiters, replacements

    def validate(self) -> list[str]:
        try:
            self.compile()
        except BadPattern as exc:
            return [f"preprocessor: {exc}"]
        return []


def clean(batch: LogRecordBatch, config: PreprocessorConfig) -> tuple[LogRecordBatch, ExtractionTable]:
    """Normalize delimiters to spaces, then apply replacement patterns.

    Returns the cleaned batch and a table mapping (record index,
    placeholder) to the list of original substrings that were replaced.
    Only bodies change.
    """
    delimiters, replacements = config.compile()
    if not delimiters and not replacements:
        return batch, {}

    extraction: ExtractionTable = {}
    bodies = []
    for i, body in enumerate(batch.bodies):
        for pattern in delimiters:
            body = pattern.sub(" ", body)
        for pattern, placeholder in replacements:
            matches = pattern.findall(body)
            if matches:
                # findall returns tuples when the pattern has groups; keep full matches
                found = [m if isinstance(m, str) else m[0] for m in matches]
                extraction.setdefault((i, placeholder), []).extend(found)
                body = pattern.sub(placeholder, body)
        bodies.append(body)
    return batch.replace_columns(bodies=bodies), extraction


# -- partitioning ------------------------------------------------------------

PARTITION_STRATEGIES = ("fixed_window", "sliding_window", "time_window", "identifier")


@dataclass
class PartitionConfig:
    """How to group batch indices into analysis units.

    duration is in seconds (time_window). Sliding windows emit only full
    windows; fixed windows may end with a short tail partition.
    """

    strategy: str = "fixed_window"
    window_size: int = 100
    step: int = 1
    duration: float = 3600.0
    min_partition_len: int = 0

    def validate(self) -> list[str]:
        errors = []
        if self.strategy not in PARTITION_STRATEGIES:
            errors.append(f"partition.strategy: unknown strategy {self.strategy!r}")
        if self.strategy in ("fixed_window", "sliding_window") and self.window_size < 1:
            errors.append("partition.window_size: must be a positive integer")
        if self.strategy == "sliding_window":
            if self.step < 1:
                errors.append("partition.step: must be a positive integer")
            elif self.window_size >= 1 and self.step > self.window_size:
                errors.append("partition.step: must not exceed window_size")
        if self.strategy == "time_window" and not self.duration > 0:
            errors.append("partition.duration: must be a positive time span")
        if self.min_partition_len < 0:
            errors.append("partition.min_partition_len: must be non-negative")
        return errors


@dataclass
class PartitionSet:
    """Ordered (partition_id, member_indices) groups plus the config used."""

    partitions: list[tuple[str, list[int]]]
    strategy_echo: PartitionConfig
    skipped_records: int = 0

    def __len__(self) -> int:
        return len(self.partitions)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["partition_id", "member_indices"])
            for pid, members in self.partitions:
                writer.writerow([pid, " ".join(str(m) for m in members)])

    @classmethod
    def from_csv(cls, path: str | Path, config: PartitionConfig | None = None) -> "PartitionSet":
        partitions = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["partition_id", "member_indices"]:
                raise LogLensError(f"unexpected partition CSV header in {path}")
            for pid, members in reader:
                partitions.append((pid, [int(m) for m in members.split()] if members else []))
        return cls(partitions, config or PartitionConfig())


def partition(batch: LogRecordBatch, config: PartitionConfig) -> PartitionSet:
    """Group record indices per the configured strategy."""
    errors = config.validate()
    if errors:
        raise LogLensError("; ".join(errors))

    n = len(batch)
    parts: list[tuple[str, list[int]]] = []
    skipped = 0

    if config.strategy == "fixed_window":
        w = config.window_size
        for start in range(0, n, w):
            members = list(range(start, min(start + w, n)))
            parts.append((f"window_{start // w}", members))
    elif config.strategy == "sliding_window":
        w, step = config.window_size, config.step
        count = (n - w) // step + 1 if n >= w else 0
        for j in range(count):
            start = j * step
            parts.append((f"window_{j}", list(range(start, start + w))))
    elif config.strategy == "time_window":
        if any(ts is None for ts in batch.timestamps):
            raise MissingTimestamps("time_window partitioning needs a timestamp on every record")
        buckets: dict[int, list[int]] = {}
        for i, ts in enumerate(batch.timestamps):
            bucket = math.floor(ts.timestamp() / config.duration)
            buckets.setdefault(bucket, []).append(i)
        for bucket in sorted(buckets):
            parts.append((f"bucket_{bucket}", buckets[bucket]))
    else:  # identifier
        if all(e is None for e in batch.entity_ids) and n > 0:
            raise MissingEntityIds("identifier partitioning needs entity ids")
        groups: dict[str, list[int]] = {}
        for i, entity in enumerate(batch.entity_ids):
            if entity is None:
                skipped += 1
                continue
            groups.setdefault(entity, []).append(i)
        parts.extend(groups.items())  # dict preserves first-appearance order

    if config.min_partition_len > 0:
        kept = []
        for pid, members in parts:
            if len(members) >= config.min_partition_len:
                kept.append((pid, members))
            else:
                skipped += len(members) if config.strategy != "sliding_window" else 0
        parts = kept

    return PartitionSet(parts, config, skipped_records=skipped)


def bucket_start_epoch(bucket_id: str, duration: float) -> float:
    """Epoch seconds at which a time_window partition's bucket begins."""
    return int(bucket_id.removeprefix("bucket_")) * duration
