from __future__ import annotations

import datetime as dt

import pytest

from loglens.records import LogRecord, LogRecordBatch


def utc(seconds: float) -> dt.datetime:
    return dt.datetime.fromtimestamp(seconds, tz=dt.timezone.utc)


def make_batch(bodies, *, timestamps=None, entity_ids=None, labels=None,
               severity_texts=None, attributes=None) -> LogRecordBatch:
    n = len(bodies)
    records = []
    for i in range(n):
        records.append(LogRecord(
            body=bodies[i],
            timestamp=None if timestamps is None else timestamps[i],
            entity_id=None if entity_ids is None else entity_ids[i],
            label=None if labels is None else labels[i],
            severity_text=None if severity_texts is None else severity_texts[i],
            attributes={} if attributes is None else attributes[i],
        ))
    return LogRecordBatch(records)


def naive_topk_flags(train_seqs, test_seqs, order, k):
    """Recount-and-rank next-event oracle, one partition flag per test sequence.

    Deliberately naive: for every query it rescans the training sequences for
    occurrences of each context suffix, longest first, ranking candidates by
    (-count, id) and topping up from shorter suffixes down to the unigram.
    """
    def ranked_for(suffix):
        counts = {}
        for seq in train_seqs:
            for i in range(len(seq)):
                if tuple(seq[max(0, i - len(suffix)):i]) == suffix and i >= len(suffix):
                    counts[seq[i]] = counts.get(seq[i], 0) + 1
        return sorted(counts, key=lambda e: (-counts[e], e))

    flags = []
    for seq in test_seqs:
        anomalous = False
        for i, event in enumerate(seq):
            context = tuple(seq[max(0, i - order):i])
            top = []
            for j in range(len(context), -1, -1):
                for candidate in ranked_for(context[len(context) - j:]):
                    if candidate not in top:
                        top.append(candidate)
                        if len(top) == k:
                            break
                if len(top) == k:
                    break
            if event not in top:
                anomalous = True
                break
        flags.append(anomalous)
    return flags


def pairwise_auroc(scores, labels):
    """Definition-level AUROC: P(pos outscores neg), ties worth half."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y != 1]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else (0.5 if p == q else 0.0)
    return total / (len(pos) * len(neg))


def trapezoid_auroc(scores, labels):
    """Second independent AUROC: trapezoidal area under the explicit ROC curve."""
    pairs = sorted(zip(scores, labels), key=lambda t: -t[0])
    n_pos = sum(1 for _, y in pairs if y == 1)
    n_neg = len(pairs) - n_pos
    area = tp = fp = prev_tp = prev_fp = 0.0
    i = 0
    while i < len(pairs):
        j = i
        while j + 1 < len(pairs) and pairs[j + 1][0] == pairs[i][0]:
            j += 1
        for t in range(i, j + 1):
            if pairs[t][1] == 1:
                tp += 1
            else:
                fp += 1
        area += (fp - prev_fp) / n_neg * (tp + prev_tp) / (2 * n_pos)
        prev_tp, prev_fp = tp, fp
        i = j + 1
    return area


@pytest.fixture(scope="session")
def template_fixture():
    from loglens.testing import template_corpus

    return template_corpus(seed=7, n_lines=10_000)


@pytest.fixture(scope="session")
def markov_fixture():
    from loglens.testing import markov_sequences

    return markov_sequences(seed=11)
