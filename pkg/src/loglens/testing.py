"""Seeded fixture generators for tests, benchmarks and demos.

Everything here is deterministic under its seed: a template corpus with
known ground-truth assignments, Markov event sequences with shuffled
anomalies, and two small labeled fixture files (session-id logs with a
label sidecar, and alert-tagged timestamped logs for time windowing).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

# Ground-truth templates for the synthetic corpus. Parameters are marked
# <N> (numeric-ish pools) or <W> (word pool). Within a token-length
# class, templates never share a constant at any position, keep distinct
# leading tokens, and align on fewer than half of their parameter slots,
# so none of the mining algorithms is forced to conflate them.
_TEMPLATES = [
    "session opened for user <W> from host <N>",
    "session closed for peer node <N> cleanly",
    "heartbeat missed by replica <N> during epoch <N>",
    "cache entry <N> evicted after <N> seconds idle",
    "scheduler assigned task <N> to executor slot <N>",
    "packet dropped on interface eth <N>",
    "disk scrub finished on volume <N> with <N> errors found",
    "replication of chunk <N> to node <N> completed in <N> ms",
    "authentication failure for account <W> at terminal <N> retry",
    "lease renewal requested by client <N> ttl <N>",
    "queue depth on broker <N> reached <N> messages pending flush now",
    "compaction merged <N> segments into level <N> within <N> ms budget",
    "snapshot <N> uploaded",
    "watchdog restarted process <N> after <N> missed pings in a row total",
    "metrics flush took <N> ms for <N> series across <N> shards overall",
    "index rebuild progressed to <N> percent on table <W> partition <N> done",
    "proxy cache evicted key <N> shard <N> ok",
    "worker pool resized from <N> to <N> now",
    "rollback applied to txn <N> by coordinator <N> after conflict on row <N>",
    "quorum vote for term <N> granted by member <N> within <N> ms limit here",
]

_WORDS = [
    "alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi",
    "ivan", "judy", "mallory", "oscar", "peggy", "trent", "victor", "walter",
]


@dataclass
class TemplateCorpus:
    bodies: list[str]
    truth_ids: list[int]
    templates: list[str]


def _numeric_value(rng: random.Random) -> str:
    kind = rng.randrange(4)
    if kind == 0:
        return str(rng.randrange(10000))
    if kind == 1:
        return f"10.0.{rng.randrange(256)}.{rng.randrange(256)}"
    if kind == 2:
        return f"0x{rng.randrange(1 << 24):06x}"
    return f"{rng.randrange(1, 900)}ms"


def template_corpus(seed: int = 7, n_lines: int = 10_000) -> TemplateCorpus:
    """Lines drawn from the fixed template set with random parameters."""
    rng = random.Random(seed)
    weights = [rng.uniform(0.5, 2.0) for _ in _TEMPLATES]
    bodies, truth = [], []
    for _ in range(n_lines):
        tid = rng.choices(range(len(_TEMPLATES)), weights=weights)[0]
        tokens = []
        for token in _TEMPLATES[tid].split():
            if token == "<N>":
                tokens.append(_numeric_value(rng))
            elif token == "<W>":
                tokens.append(rng.choice(_WORDS))
            else:
                tokens.append(token)
        bodies.append(" ".join(tokens))
        truth.append(tid)
    return TemplateCorpus(bodies, truth, list(_TEMPLATES))


def grouping_accuracy(predicted_ids: list[int], truth_ids: list[int]) -> float:
    """Fraction of lines whose group's majority ground truth is their own."""
    from collections import Counter, defaultdict

    per_group: dict[int, Counter] = defaultdict(Counter)
    for pred, truth in zip(predicted_ids, truth_ids):
        per_group[pred][truth] += 1
    majority = {g: counts.most_common(1)[0][0] for g, counts in per_group.items()}
    hits = sum(1 for pred, truth in zip(predicted_ids, truth_ids) if majority[pred] == truth)
    return hits / len(truth_ids)


# -- Markov sequence fixture ---------------------------------------------


@dataclass
class SequenceFixture:
    sequences: list[list[int]]
    labels: list[int]
    n_states: int


def markov_sequences(seed: int = 11, n_states: int = 5, n_normal: int = 500,
                     length: int = 50, n_anomalies: int = 25) -> SequenceFixture:
    """Normal chains walk s -> s+1/s+2/s+3 (mod n); anomalies are shuffles."""
    rng = random.Random(seed)
    offsets = [1, 2, 3]
    offset_weights = [0.85, 0.10, 0.05]

    def walk() -> list[int]:
        state = 0
        seq = [state]
        for _ in range(length - 1):
            state = (state + rng.choices(offsets, offset_weights)[0]) % n_states
            seq.append(state)
        return seq

    sequences, labels = [], []
    for _ in range(n_normal):
        sequences.append(walk())
        labels.append(0)
    for _ in range(n_anomalies):
        seq = walk()
        rng.shuffle(seq)
        sequences.append(seq)
        labels.append(1)
    return SequenceFixture(sequences, labels, n_states)


# -- file fixtures --------------------------------------------------------

_SESSION_EVENTS = [
    "Receiving block {blk} src /10.251.{a}.{b} dest /10.251.{c}.{d}",
    "PacketResponder for block {blk} terminating",
    "Received block {blk} of size {size} from /10.251.{a}.{b}",
    "Verification succeeded for block {blk}",
    "Adding an already existing block {blk}",
    "Deleting block {blk} file /mnt/data/current/subdir/{size}.meta",
]
_ALIEN_EVENTS = [
    "Exception in receiveBlock for block {blk} java.io.IOException broken pipe",
    "writeBlock {blk} received java.io.IOException connection reset by peer",
]


def write_session_fixture(directory: str | Path, seed: int = 3,
                          n_sessions: int = 25, lines_per_session: int = 8
                          ) -> tuple[Path, Path]:
    """Session-id log file plus a (entity, label) sidecar CSV.

    Normal sessions repeat the stock event order; anomalous sessions mix
    in alien events in scrambled order. 25 x 8 = 200 lines by default.
    """
    rng = random.Random(seed)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    log_path = directory / "sessions.log"
    sidecar_path = directory / "session_labels.csv"

    anomalous = set(rng.sample(range(n_sessions), max(3, n_sessions // 8)))
    lines, label_rows = [], []
    for s in range(n_sessions):
        blk = f"blk_{6000 + s}"
        label_rows.append((blk, "Anomaly" if s in anomalous else "Normal"))
        fills = {
            "blk": blk, "size": str(rng.randrange(1 << 20, 1 << 26)),
            "a": str(rng.randrange(256)), "b": str(rng.randrange(256)),
            "c": str(rng.randrange(256)), "d": str(rng.randrange(256)),
        }
        if s in anomalous:
            pool = _SESSION_EVENTS + _ALIEN_EVENTS
            events = [rng.choice(pool) for _ in range(lines_per_session)]
        else:
            events = [
                _SESSION_EVENTS[i % len(_SESSION_EVENTS)]
                for i in range(lines_per_session)
            ]
        for event in events:
            lines.append(event.format(**fills))
    log_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar_rows = ["BlockId,Label"] + [f"{blk},{label}" for blk, label in label_rows]
    sidecar_path.write_text("\n".join(sidecar_rows) + "\n", encoding="utf-8")
    return log_path, sidecar_path


_NODE_EVENTS = [
    "instruction cache parity error corrected",
    "generating core file",
    "program interrupt detected",
    "data TLB error interrupt",
]


def write_windowed_fixture(directory: str | Path, seed: int = 5,
                           n_buckets: int = 160, bucket_seconds: int = 21_600,
                           burst_bucket: int = 120, burst_size: int = 40) -> Path:
    """Alert-tagged timestamped lines: one quiet line per 6-hour bucket,
    plus a labeled burst inside one bucket. First token '-' means normal."""
    rng = random.Random(seed)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "alerts.log"
    base = 1_117_800_000  # anchor epoch, aligned afterwards per bucket
    lines = []
    for b in range(n_buckets):
        ts = base + b * bucket_seconds + rng.randrange(bucket_seconds)
        node = f"R{rng.randrange(64):02d}-M{rng.randrange(2)}-N{rng.randrange(16)}"
        lines.append(f"- {ts} {node} {rng.choice(_NODE_EVENTS)}")
        if b == burst_bucket:
            for _ in range(burst_size):
                ts2 = base + b * bucket_seconds + rng.randrange(bucket_seconds)
                lines.append(f"KERNDTLB {ts2} {node} data TLB error interrupt storm")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
