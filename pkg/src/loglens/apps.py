"""Config-driven end-to-end applications.

Every application (summarize, cluster, detect_anomaly, benchmark) runs
the same staged pipeline -- load, adapt, clean, parse, partition,
represent -- then its own analysis, and emits a JobReport whose rendered
document is byte-stable for a fixed spec and input. Wall-clock timings
are kept out of the report body and rendered separately.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import cluster as cluster_mod
from . import detect_seq, detect_stat, evaluate, parsing, preprocess, records, represent
from .config import JobSpec, spec_to_yaml
from .errors import LogLensError
from .evaluate import MetricsReport, SplitProtocol


@dataclass
class JobReport:
    application: str
    spec_text: str
    dataset: list[tuple[str, str]]
    sections: list[tuple[str, list[str], list[list[str]]]]  # (name, header, rows)
    metrics: MetricsReport | None = None
    timings_ms: list[tuple[str, float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def render(self) -> str:
        """Deterministic report document (timings excluded by design)."""
        lines = ["# loglens job report", f"application={self.application}", ""]
        lines.append("[spec]")
        lines.extend("  " + ln for ln in self.spec_text.rstrip("\n").split("\n"))
        lines.append("")
        lines.append("[dataset]")
        lines.extend(f"{key}={value}" for key, value in self.dataset)
        for warning in self.warnings:
            lines.append(f"warning={warning}")
        for name, header, rows in self.sections:
            lines.append("")
            lines.append(f"[{name}]")
            lines.append(",".join(header))
            lines.extend(",".join(str(v) for v in row) for row in rows)
        if self.metrics is not None:
            lines.append("")
            lines.append("[metrics]")
            lines.extend(f"{key}={value}" for key, value in self.metrics.rows())
        return "\n".join(lines) + "\n"

    def render_timings(self) -> str:
        lines = ["# stage timings (milliseconds)"]
        lines.extend(f"{name}={ms:.3f}" for name, ms in self.timings_ms)
        return "\n".join(lines) + "\n"

    def metrics_csv(self) -> str:
        lines = ["metric,value"]
        if self.metrics is not None:
            lines.extend(f"{key},{value}" for key, value in self.metrics.rows())
        return "\n".join(lines) + "\n"


class _Timer:
    def __init__(self):
        self.timings: list[tuple[str, float]] = []

    def run(self, name: str, fn):
        start = time.perf_counter()
        out = fn()
        self.timings.append((name, (time.perf_counter() - start) * 1000.0))
        return out


@dataclass
class _PipelineState:
    batch: records.LogRecordBatch
    cleaned: records.LogRecordBatch
    parsed: parsing.ParseResult | None
    parts: preprocess.PartitionSet | None
    timer: _Timer


def _run_stages(spec: JobSpec, workers: int) -> _PipelineState:
    timer = _Timer()
    batch = timer.run("load", lambda: records.load_file(spec.loader))
    if spec.adapter is not None:
        batch = timer.run("adapt", lambda: records.adapt_dataset(batch, spec.adapter))
    cleaned, _ = timer.run("clean", lambda: preprocess.clean(batch, spec.preprocessor))
    parsed = None
    if spec.parser is not None:
        parsed = timer.run("parse", lambda: parsing.parse(cleaned, spec.parser, workers=workers))
    parts = None
    if spec.partition is not None:
        parts = timer.run("partition", lambda: preprocess.partition(cleaned, spec.partition))
    return _PipelineState(batch, cleaned, parsed, parts, timer)


def _dataset_stats(state: _PipelineState) -> list[tuple[str, str]]:
    batch = state.cleaned
    stats = [
        ("source", batch.source_descriptor),
        ("records", str(len(batch))),
        ("malformed_rows", str(len(batch.stats.get("malformed_rows", [])))),
        ("bad_timestamps", str(len(batch.stats.get("bad_timestamps", [])))),
    ]
    labeled = sum(1 for label in batch.labels if label is not None)
    anomalies = sum(1 for label in batch.labels if label == 1)
    stats.append(("labeled_records", str(labeled)))
    stats.append(("anomalous_records", str(anomalies)))
    if state.parsed is not None:
        stats.append(("templates", str(len(state.parsed.templates))))
    if state.parts is not None:
        stats.append(("partitions", str(len(state.parts.partitions))))
    return stats


def _labels_complete(batch: records.LogRecordBatch) -> bool:
    return len(batch) > 0 and all(label is not None for label in batch.labels)


def _partition_labels(batch: records.LogRecordBatch,
                      parts: preprocess.PartitionSet) -> list[int]:
    return [
        1 if any(batch.labels[i] == 1 for i in members) else 0
        for _, members in parts.partitions
    ]


def _body_event_ids(batch: records.LogRecordBatch) -> tuple[list[int], int]:
    """Dense first-seen event ids straight from cleaned bodies (no parser)."""
    code: dict[str, int] = {}
    ids = []
    for body in batch.bodies:
        if body not in code:
            code[body] = len(code)
        ids.append(code[body])
    return ids, max(len(code), 1)


def _sequences(state: _PipelineState) -> represent.EventSequenceSet:
    if state.parts is None:
        raise LogLensError("sequence analysis needs a partition section")
    if state.parsed is not None:
        return represent.encode_sequential(state.parsed, state.parts)
    ids, vocab = _body_event_ids(state.cleaned)
    return represent.EventSequenceSet(
        partition_ids=[pid for pid, _ in state.parts.partitions],
        sequences=[[ids[i] for i in members] for _, members in state.parts.partitions],
        vocabulary_size=vocab,
    )


def _features(state: _PipelineState, spec: JobSpec) -> represent.FeatureMatrix:
    rep = spec.representation
    if rep.kind == "quantitative":
        if state.parsed is None or state.parts is None:
            raise LogLensError("quantitative representation needs parser and partition")
        return represent.encode_quantitative(state.parsed, state.parts, rep.weighting)
    if rep.kind == "tfidf":
        if rep.tfidf_unit == "template":
            if state.parsed is None:
                raise LogLensError("template tf-idf needs a parser section")
            corpus = [
                state.parsed.templates[tid].template_string
                for tid in state.parsed.line_template_ids
            ]
        else:
            corpus = list(state.cleaned.bodies)
        return represent.vectorize_tfidf(corpus, rep.vocab_limit)
    if rep.kind == "categorical":
        return represent.encode_categorical(state.cleaned, rep.fields, rep.scheme)
    raise LogLensError(f"representation kind {rep.kind!r} yields no feature matrix")


def _row_record_indices(X: represent.FeatureMatrix, state: _PipelineState) -> list[list[int]]:
    """Record indices behind each matrix row (partition rows or record rows)."""
    if _rows_are_partitions(X, state):
        members = dict(state.parts.partitions)
        return [members[rid] for rid in X.row_ids]
    return [[int(rid)] for rid in X.row_ids]


def _rows_are_partitions(X: represent.FeatureMatrix, state: _PipelineState) -> bool:
    if state.parts is None:
        return False
    partition_ids = {pid for pid, _ in state.parts.partitions}
    return all(rid in partition_ids for rid in X.row_ids) and len(X.row_ids) == len(
        state.parts.partitions
    )


def _row_labels(X: represent.FeatureMatrix, state: _PipelineState) -> list[int] | None:
    if not _labels_complete(state.cleaned):
        return None
    groups = _row_record_indices(X, state)
    return [
        1 if any(state.cleaned.labels[i] == 1 for i in members) else 0
        for members in groups
    ]


# -- applications ------------------------------------------------------------


def run_summarization(spec: JobSpec, workers: int = 1,
                      out_dir: str | Path | None = None) -> JobReport:
    state = _run_stages(spec, workers)
    catalog = parsing.template_catalog(state.parsed)
    have_ts = all(ts is not None for ts in state.cleaned.timestamps) and len(state.cleaned) > 0

    occurrences: dict[int, list[int]] = {}
    for i, tid in enumerate(state.parsed.line_template_ids):
        occurrences.setdefault(tid, []).append(i)

    rows = []
    for entry in catalog:
        members = occurrences.get(entry.template_id, [])
        if have_ts and members:
            stamps = [state.cleaned.timestamps[i] for i in members]
            first, last = min(stamps).isoformat(), max(stamps).isoformat()
        elif members:
            first, last = str(members[0]), str(members[-1])
        else:
            first = last = "-"
        examples = " | ".join(" ".join(p) for p in entry.example_parameters if p) or "-"
        rows.append([
            entry.template_id, _quote(entry.template_string), entry.count, first, last,
            _quote(examples),
        ])

    report = JobReport(
        application=spec.application,
        spec_text=spec_to_yaml(spec),
        dataset=_dataset_stats(state),
        sections=[(
            "summary",
            ["template_id", "template", "count", "first_seen", "last_seen", "examples"],
            rows,
        )],
        timings_ms=state.timer.timings,
    )
    _write_outputs(report, state, spec, out_dir)
    return report


def run_clustering(spec: JobSpec, workers: int = 1,
                   out_dir: str | Path | None = None) -> JobReport:
    state = _run_stages(spec, workers)
    X = state.timer.run("represent", lambda: _features(state, spec))
    analysis = spec.analysis
    if analysis.algorithm == "kmeans":
        assignment = state.timer.run("cluster", lambda: cluster_mod.kmeans_fit(
            X, analysis.k, seed=spec.seed, distance=analysis.distance))
    else:
        assignment = state.timer.run("cluster", lambda: cluster_mod.dbscan_fit(
            X, analysis.eps, analysis.min_pts))

    row_records = _row_record_indices(X, state)
    by_label: dict[int, list[int]] = {}
    for row, label in enumerate(assignment.labels):
        by_label.setdefault(label, []).append(row)
    rows = []
    for label in sorted(by_label):
        member_rows = by_label[label]
        top = "-"
        if state.parsed is not None:
            counts: dict[int, int] = {}
            for row in member_rows:
                for i in row_records[row]:
                    tid = state.parsed.line_template_ids[i]
                    counts[tid] = counts.get(tid, 0) + 1
            ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:3]
            top = " | ".join(
                f"{state.parsed.templates[tid].template_string} ({n})" for tid, n in ranked
            )
        rows.append([label, len(member_rows), _quote(top)])

    report = JobReport(
        application=spec.application,
        spec_text=spec_to_yaml(spec),
        dataset=_dataset_stats(state),
        sections=[("clusters", ["cluster", "size", "top_templates"], rows)],
        timings_ms=state.timer.timings,
    )
    _write_outputs(report, state, spec, out_dir, matrix=X, assignment=assignment)
    return report


def _override_threshold(result: detect_stat.AnomalyResult,
                        threshold: float | None) -> detect_stat.AnomalyResult:
    if threshold is None:
        return result
    return detect_stat.AnomalyResult(result.row_ids, result.scores, threshold, result.method)


def _counter_route(state: _PipelineState, spec: JobSpec):
    rep, analysis = spec.representation, spec.analysis
    series = state.timer.run("represent", lambda: represent.extract_counters(
        state.cleaned, rep.bucket_seconds))
    config = detect_stat.BaselineConfig(analysis.alpha, analysis.z_threshold, analysis.warmup)
    result = state.timer.run("detect", lambda: detect_stat.baseline_detect(
        series, config, mode=analysis.algorithm))
    result = _override_threshold(result, analysis.threshold)
    labels = None
    if _labels_complete(state.cleaned):
        first = math.floor(series.bucket_start[0].timestamp() / series.bucket_seconds)
        labels = [0] * len(series.bucket_start)
        for ts, label in zip(state.cleaned.timestamps, state.cleaned.labels):
            b = math.floor(ts.timestamp() / series.bucket_seconds) - first
            if label == 1:
                labels[b] = 1
    return result, labels, series


def _feature_route(state: _PipelineState, spec: JobSpec):
    analysis = spec.analysis
    X = state.timer.run("represent", lambda: _features(state, spec))
    if analysis.algorithm == "iforest":
        config = detect_stat.IForestConfig(analysis.n_trees, analysis.subsample, seed=spec.seed)
        result = state.timer.run("detect", lambda: detect_stat.iforest_fit_score(X, config))
        result = _override_threshold(result, analysis.threshold)
    else:
        result = state.timer.run("detect", lambda: detect_stat.lof_score(
            X, k=analysis.lof_k,
            threshold=analysis.threshold if analysis.threshold is not None else 1.5))
    return result, _row_labels(X, state), X


def _subset(seqs: represent.EventSequenceSet, indices: list[int]) -> represent.EventSequenceSet:
    return represent.EventSequenceSet(
        [seqs.partition_ids[i] for i in indices],
        [seqs.sequences[i] for i in indices],
        seqs.vocabulary_size,
    )


def _sequence_route(state: _PipelineState, spec: JobSpec):
    analysis = spec.analysis
    sequences = state.timer.run("represent", lambda: _sequences(state))
    topk = detect_seq.TopKConfig(
        k=analysis.top_k, window=analysis.window, flag_level=analysis.flag_level)

    labels = (
        _partition_labels(state.cleaned, state.parts)
        if _labels_complete(state.cleaned) else None
    )
    split_rows: list[tuple[str, str]] = []
    if labels is not None:
        protocol = spec.evaluation or SplitProtocol(seed=spec.seed)
        split = evaluate.split_dataset(labels, protocol)
        train_set = _subset(sequences, split.train)
        test_set = _subset(sequences, split.test)
        test_labels = [labels[i] for i in split.test]
        model = state.timer.run("fit", lambda: detect_seq.ngram_fit(train_set, analysis.order))
        result = state.timer.run("detect", lambda: detect_seq.detect_sequence(
            model, test_set, topk))
        split_rows = [
            ("train", str(len(split.train))), ("dev", str(len(split.dev))),
            ("test", str(len(split.test))),
            ("actual_test_fraction", f"{split.actual_test_fraction:.6f}"),
        ]
        warning = [split.warning] if split.warning else []
        return result, test_labels, model, split_rows, warning
    model = state.timer.run("fit", lambda: detect_seq.ngram_fit(sequences, analysis.order))
    result = state.timer.run("detect", lambda: detect_seq.detect_sequence(
        model, sequences, topk))
    return result, None, model, split_rows, []


def run_anomaly_detection(spec: JobSpec, workers: int = 1,
                          out_dir: str | Path | None = None) -> JobReport:
    state = _run_stages(spec, workers)
    analysis = spec.analysis
    benchmark = spec.application == "benchmark"
    model = None
    series = None
    X = None
    split_rows: list[tuple[str, str]] = []
    warnings: list[str] = []

    if analysis.algorithm in ("ewma", "ets_additive"):
        result, labels, series = _counter_route(state, spec)
    elif analysis.algorithm in ("iforest", "lof"):
        result, labels, X = _feature_route(state, spec)
    else:
        result, labels, model, split_rows, warnings = _sequence_route(state, spec)

    metrics = None
    if labels is not None and analysis.flag_level != "event":
        if benchmark and analysis.algorithm in ("iforest", "lof", "ewma", "ets_additive"):
            # protocol metrics: restrict to the test split over scored rows
            protocol = spec.evaluation or SplitProtocol(seed=spec.seed)
            split = evaluate.split_dataset(labels, protocol)
            flags = [bool(result.flags[i]) for i in split.test]
            truth = [labels[i] for i in split.test]
            scores = [float(result.scores[i]) for i in split.test]
            split_rows = [
                ("train", str(len(split.train))), ("dev", str(len(split.dev))),
                ("test", str(len(split.test))),
                ("actual_test_fraction", f"{split.actual_test_fraction:.6f}"),
            ]
            if split.warning:
                warnings.append(split.warning)
            metrics = evaluate.confusion_and_f1(flags, truth, scores)
        else:
            metrics = evaluate.confusion_and_f1(
                list(map(bool, result.flags)), labels, result.scores)

    sections = []
    if split_rows:
        sections.append(("split", ["key", "value"], [[k, v] for k, v in split_rows]))
    sections.append((
        "anomalies",
        ["row_id", "score", "flag"],
        [
            [rid, f"{score:.6f}", int(flag)]
            for rid, score, flag in zip(result.row_ids, result.scores, result.flags)
        ],
    ))

    report = JobReport(
        application=spec.application,
        spec_text=spec_to_yaml(spec),
        dataset=_dataset_stats(state),
        sections=sections,
        metrics=metrics,
        timings_ms=state.timer.timings,
        warnings=warnings,
    )
    _write_outputs(report, state, spec, out_dir, matrix=X, anomalies=result,
                   model=model, series=series)
    return report


def run_benchmark(spec: JobSpec, workers: int = 1,
                  out_dir: str | Path | None = None) -> JobReport:
    return run_anomaly_detection(spec, workers=workers, out_dir=out_dir)


def execute_job(spec: JobSpec, out_dir: str | Path | None = None,
                workers: int = 1) -> JobReport:
    """Run the application selected by the spec and return its report."""
    if spec.application == "summarize":
        return run_summarization(spec, workers, out_dir)
    if spec.application == "cluster":
        return run_clustering(spec, workers, out_dir)
    if spec.application in ("detect_anomaly", "benchmark"):
        return run_anomaly_detection(spec, workers, out_dir)
    raise LogLensError(f"unknown application {spec.application!r}")


def _quote(value: str) -> str:
    """Keep report table cells single-line and comma-free."""
    return value.replace(",", ";").replace("\n", " ")


def _write_outputs(report: JobReport, state: _PipelineState, spec: JobSpec,
                   out_dir: str | Path | None, matrix=None, assignment=None,
                   anomalies=None, model=None, series=None) -> None:
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.render(), encoding="utf-8")
    (out / "timings.txt").write_text(report.render_timings(), encoding="utf-8")
    (out / "metrics.csv").write_text(report.metrics_csv(), encoding="utf-8")
    artifacts = out / "artifacts"
    artifacts.mkdir(exist_ok=True)
    if state.parsed is not None:
        parsing.write_result(state.parsed, artifacts)
    if state.parts is not None:
        state.parts.to_csv(artifacts / "partitions.csv")
    if matrix is not None:
        matrix.to_csv(artifacts / "features.csv")
    if assignment is not None:
        assignment.to_csv(artifacts / "assignment.csv")
    if anomalies is not None:
        anomalies.to_csv(artifacts / "anomalies.csv")
    if model is not None:
        detect_seq.save_model(model, artifacts / "model.txt")
    if series is not None:
        with open(artifacts / "counters.csv", "w", encoding="utf-8") as fh:
            fh.write("bucket_start,count\n")
            for ts, count in zip(series.bucket_start, series.total()):
                fh.write(f"{ts.isoformat()},{int(count)}\n")
