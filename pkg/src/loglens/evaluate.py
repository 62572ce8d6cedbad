"""Dataset split protocol and detection metrics."""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, LogLensError, SingleClass


@dataclass
class SplitProtocol:
    """All anomalies go to test; normals top it up to test_fraction."""

    test_fraction: float = 0.2
    dev_fraction_of_train: float = 0.1
    normal_only_training: bool = True
    seed: int = 0

    def validate(self) -> list[str]:
        errors = []
        if not 0 < self.test_fraction < 1:
            errors.append("evaluation.test_fraction: must lie in (0, 1)")
        if not 0 < self.dev_fraction_of_train < 1:
            errors.append("evaluation.dev_fraction_of_train: must lie in (0, 1)")
        return errors


@dataclass
class SplitResult:
    train: list[int]
    dev: list[int]
    test: list[int]
    actual_test_fraction: float
    warning: str | None = None


def split_dataset(labels: list[int], protocol: SplitProtocol) -> SplitResult:
    """Split instance indices per the protocol; deterministic under seed."""
    errors = protocol.validate()
    if errors:
        raise LogLensError("; ".join(errors))
    if any(label is None for label in labels):
        raise LogLensError("split needs a 0/1 label on every instance")
    n = len(labels)
    if n == 0:
        return SplitResult([], [], [], 0.0)
    rng = random.Random(protocol.seed)
    target_test = int(n * protocol.test_fraction + 0.5)

    if protocol.normal_only_training:
        anomalies = [i for i, label in enumerate(labels) if label == 1]
        normals = [i for i, label in enumerate(labels) if label != 1]
        rng.shuffle(normals)
        warning = None
        if len(anomalies) > target_test:
            warning = (
                f"NotEnoughNormals: {len(anomalies)} anomalies exceed the "
                f"{target_test}-instance test target; test holds anomalies only"
            )
        top_up = max(0, target_test - len(anomalies))
        test = anomalies + normals[:top_up]
        remaining = normals[top_up:]
    else:
        order = list(range(n))
        rng.shuffle(order)
        test = order[:target_test]
        remaining = order[target_test:]
        warning = None

    dev_count = int(len(remaining) * protocol.dev_fraction_of_train + 0.5)
    dev = remaining[:dev_count]
    train = remaining[dev_count:]
    return SplitResult(sorted(train), sorted(dev), sorted(test), len(test) / n, warning)


@dataclass
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    auroc: float | None = None

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int,
                    auroc: float | None = None) -> "MetricsReport":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp, fp, fn, tn, precision, recall, f1, auroc)

    def rows(self) -> list[tuple[str, str]]:
        out = [
            ("tp", str(self.tp)), ("fp", str(self.fp)),
            ("fn", str(self.fn)), ("tn", str(self.tn)),
            ("precision", f"{self.precision:.6f}"),
            ("recall", f"{self.recall:.6f}"),
            ("f1", f"{self.f1:.6f}"),
        ]
        if self.auroc is not None:
            out.append(("auroc", f"{self.auroc:.6f}"))
        return out


def confusion_and_f1(flags, labels, scores=None) -> MetricsReport:
    """Confusion counts and P/R/F1; AUROC attached when scores given."""
    flags = list(flags)
    labels = list(labels)
    if len(flags) != len(labels):
        raise LengthMismatch(f"{len(flags)} flags vs {len(labels)} labels")
    tp = sum(1 for f, y in zip(flags, labels) if f and y == 1)
    fp = sum(1 for f, y in zip(flags, labels) if f and y != 1)
    fn = sum(1 for f, y in zip(flags, labels) if not f and y == 1)
    tn = sum(1 for f, y in zip(flags, labels) if not f and y != 1)
    area = None
    if scores is not None and len(set(labels)) == 2:
        area = auroc(scores, labels)
    return MetricsReport.from_counts(tp, fp, fn, tn, area)


def auroc(scores, labels) -> float:
    """P(random positive outscores random negative), ties counted half."""
    scores = np.asarray(list(scores), dtype=float)
    labels = np.asarray(list(labels), dtype=int)
    if len(scores) != len(labels):
        raise LengthMismatch(f"{len(scores)} scores vs {len(labels)} labels")
    n_pos = int((labels == 1).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUROC needs both classes present")
    # average ranks with ties shared
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1  # 1-based average rank
        i = j + 1
    rank_sum = ranks[labels == 1].sum()
    u = rank_sum - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def shuffle_instances(items: list, seed: int) -> list:
    """Seeded shuffle utility for partition-level experimentation."""
    out = list(items)
    random.Random(seed).shuffle(out)
    return out


def run_benchmark(spec) -> "object":
    """Full pipeline benchmark (delegates to the application runner)."""
    from .apps import execute_job
    return execute_job(spec)
