"""Forecasting-based sequence anomaly detection.

A count-based next-event model is fit on normal event-id sequences; at
detection time an event is anomalous when it is absent from the k most
probable next events predicted from its preceding context.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyTraining, LogLensError, UnknownAllContexts
from .detect_stat import AnomalyResult
from .represent import EventSequenceSet


@dataclass
class NextEventModel:
    """Context -> next-event counts for every context length up to order."""

    order: int
    counts: dict[tuple[int, ...], dict[int, int]]
    vocabulary_size: int
    backoff: bool = True


@dataclass
class TopKConfig:
    k: int = 10
    window: int | None = None  # context length; defaults to the model order
    flag_level: str = "partition"  # or "event"

    def validate(self, vocabulary_size: int | None = None) -> list[str]:
        errors = []
        if self.k < 1:
            errors.append("analysis.top_k: must be >= 1")
        if vocabulary_size is not None and self.k > vocabulary_size:
            errors.append(f"analysis.top_k: exceeds vocabulary size {vocabulary_size}")
        if self.window is not None and self.window < 1:
            errors.append("analysis.window: must be >= 1")
        if self.flag_level not in ("partition", "event"):
            errors.append(f"analysis.flag_level: unknown level {self.flag_level!r}")
        return errors


def ngram_fit(train: EventSequenceSet, order: int = 2) -> NextEventModel:
    """Count (context of length j <= order -> next event) at every position."""
    if order < 1:
        raise LogLensError("order must be >= 1")
    if not train.sequences or all(len(s) == 0 for s in train.sequences):
        raise EmptyTraining("no training sequences")
    counts: dict[tuple[int, ...], dict[int, int]] = {}
    for seq in train.sequences:
        for i, event in enumerate(seq):
            for j in range(0, min(i, order) + 1):
                context = tuple(seq[i - j:i])
                table = counts.setdefault(context, {})
                table[event] = table.get(event, 0) + 1
    return NextEventModel(order, counts, train.vocabulary_size)


def predict_topk(model: NextEventModel, context: list[int], k: int) -> list[int]:
    """Most probable next events for a context.

    Candidates are ranked by count under the longest matching context
    suffix (ties by ascending id). With backoff, shorter suffixes down to
    the unigram table append further candidates until k are collected.
    """
    unigram = model.counts.get(())
    if not unigram:
        raise UnknownAllContexts("model has no unigram counts")
    longest = min(model.order, len(context))
    ranked: list[int] = []
    seen: set[int] = set()
    for j in range(longest, -1, -1):
        table = model.counts.get(tuple(context[len(context) - j:]))
        if table:
            for event in sorted(table, key=lambda e: (-table[e], e)):
                if event not in seen:
                    ranked.append(event)
                    seen.add(event)
                    if len(ranked) == k:
                        return ranked
        if not model.backoff:
            break
    return ranked


def detect_sequence(model: NextEventModel, test: EventSequenceSet,
                    config: TopKConfig) -> AnomalyResult:
    """Flag events absent from the top-k prediction of their context.

    Partition-level rows score the fraction of anomalous positions and
    flag when at least one event is anomalous (threshold 0). Event-level
    rows score 0/1 per position.
    """
    errors = config.validate()
    if errors:
        raise LogLensError("; ".join(errors))
    window = config.window if config.window is not None else model.order

    row_ids: list[str] = []
    scores: list[float] = []
    for pid, seq in zip(test.partition_ids, test.sequences):
        event_flags = []
        for i, event in enumerate(seq):
            context = seq[max(0, i - window):i]
            event_flags.append(event not in predict_topk(model, context, config.k))
        if config.flag_level == "event":
            for i, bad in enumerate(event_flags):
                row_ids.append(f"{pid}:{i}")
                scores.append(1.0 if bad else 0.0)
        else:
            row_ids.append(pid)
            scores.append(sum(event_flags) / len(seq) if seq else 0.0)
    return AnomalyResult(row_ids, np.array(scores), threshold=0.0, method="ngram_topk")


# -- persistence -------------------------------------------------------------


def save_model(model: NextEventModel, path: str | Path) -> None:
    """Text format: header line, then `context_ids>next_id:count` lines."""
    lines = [f"#order={model.order},vocab={model.vocabulary_size},backoff={int(model.backoff)}"]
    for context in sorted(model.counts, key=lambda c: (len(c), c)):
        table = model.counts[context]
        prefix = " ".join(str(i) for i in context)
        for event in sorted(table):
            lines.append(f"{prefix}>{event}:{table[event]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> NextEventModel:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0]
    if not header.startswith("#"):
        raise LogLensError("model file lacks a header line")
    meta = dict(part.split("=") for part in header[1:].split(","))
    counts: dict[tuple[int, ...], dict[int, int]] = {}
    for line in lines[1:]:
        ctx_part, rest = line.split(">", 1)
        event_part, count_part = rest.rsplit(":", 1)
        context = tuple(int(t) for t in ctx_part.split()) if ctx_part.strip() else ()
        counts.setdefault(context, {})[int(event_part)] = int(count_part)
    return NextEventModel(
        order=int(meta["order"]),
        counts=counts,
        vocabulary_size=int(meta["vocab"]),
        backoff=bool(int(meta["backoff"])),
    )
