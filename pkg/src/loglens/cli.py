"""Command-line interface.

`loglens run` executes a full job spec file; summarize/cluster/detect are
shorthands that assemble a spec from flags. Exit codes: 0 success, 1
spec/validation error, 2 runtime error.
"""

from __future__ import annotations

import sys

import click

from .apps import execute_job
from .config import (
    AnalysisConfig, JobSpec, RepresentationConfig, load_spec, spec_to_yaml,
)
from .errors import LogLensError, SpecValidation
from .parsing import ParserConfig
from .preprocess import PartitionConfig
from .records import DatasetAdapter, LoaderConfig


def _execute(spec: JobSpec, out_dir: str | None, workers: int, echo_spec: bool) -> None:
    errors = spec.validate()
    if errors:
        raise SpecValidation(errors)
    if echo_spec:
        click.echo(spec_to_yaml(spec), nl=False)
    report = execute_job(spec, out_dir=out_dir, workers=workers)
    click.echo(report.render(), nl=False)


def _guarded(fn):
    try:
        fn()
    except SpecValidation as exc:
        for message in exc.field_errors:
            click.echo(f"spec error: {message}", err=True)
        sys.exit(1)
    except LogLensError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


@click.group()
def main():
    """Log analytics engine: templates, clusters, anomalies."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="Job spec file (yaml).")
@click.option("--out", "out_dir", default=None, help="Directory for report and artifacts.")
@click.option("--seed", default=None, type=int, help="Override the spec seed.")
@click.option("--workers", default=1, type=int, show_default=True,
              help="Worker threads for parsing.")
def run(config_path, out_dir, seed, workers):
    """Run a job spec end to end and print its report."""

    def body():
        spec = load_spec(config_path)
        if seed is not None:
            spec.seed = seed
        _execute(spec, out_dir, workers, echo_spec=False)

    _guarded(body)


def _loader_options(fn):
    fn = click.option("--format", "format_", default="log", show_default=True,
                      type=click.Choice(["log", "csv", "tsv", "json"]))(fn)
    fn = click.option("--input", "input_path", required=True, type=click.Path(exists=False))(fn)
    return fn


@main.command()
@_loader_options
@click.option("--algorithm", default="drain", show_default=True,
              type=click.Choice(["drain", "iplom", "ael"]))
@click.option("--mask-digits", is_flag=True, help="Pre-mask digit-bearing tokens.")
@click.option("--out", "out_dir", default=None)
@click.option("--seed", default=0, type=int)
def summarize(input_path, format_, algorithm, mask_digits, out_dir, seed):
    """Mine templates and print the summary table."""

    def body():
        spec = JobSpec(
            application="summarize",
            loader=LoaderConfig(path=input_path, format=format_),
            parser=ParserConfig(algorithm=algorithm, mask_digits=mask_digits),
            seed=seed,
        )
        _execute(spec, out_dir, 1, echo_spec=False)

    _guarded(body)


@main.command()
@_loader_options
@click.option("--algorithm", default="kmeans", show_default=True,
              type=click.Choice(["kmeans", "dbscan"]))
@click.option("--representation", "kind", default="tfidf", show_default=True,
              type=click.Choice(["tfidf", "quantitative"]))
@click.option("--k", default=3, show_default=True, type=int)
@click.option("--eps", default=0.5, show_default=True, type=float)
@click.option("--min-pts", default=5, show_default=True, type=int)
@click.option("--window-size", default=100, show_default=True, type=int,
              help="Fixed-window size for quantitative rows.")
@click.option("--out", "out_dir", default=None)
@click.option("--seed", default=0, type=int)
def cluster(input_path, format_, algorithm, kind, k, eps, min_pts, window_size, out_dir, seed):
    """Cluster log feature rows and print per-cluster summaries."""

    def body():
        spec = JobSpec(
            application="cluster",
            loader=LoaderConfig(path=input_path, format=format_),
            parser=ParserConfig(),
            partition=(
                PartitionConfig(strategy="fixed_window", window_size=window_size)
                if kind == "quantitative" else None
            ),
            representation=RepresentationConfig(kind=kind),
            analysis=AnalysisConfig(algorithm=algorithm, k=k, eps=eps, min_pts=min_pts),
            seed=seed,
        )
        _execute(spec, out_dir, 1, echo_spec=False)

    _guarded(body)


@main.command()
@_loader_options
@click.option("--analysis", default="ngram_topk", show_default=True,
              type=click.Choice(["ngram_topk", "iforest", "lof", "ewma", "ets_additive"]))
@click.option("--strategy", default="fixed_window", show_default=True,
              type=click.Choice(["fixed_window", "sliding_window", "time_window", "identifier"]))
@click.option("--window-size", default=100, show_default=True, type=int)
@click.option("--duration", default=3600.0, show_default=True, type=float,
              help="Time-window length in seconds.")
@click.option("--entity-pattern", default=None,
              help="Regex extracting entity ids from bodies (identifier strategy).")
@click.option("--sidecar", default=None, type=click.Path(exists=False),
              help="Entity,label CSV attaching ground-truth labels.")
@click.option("--timestamp-format", default=None)
@click.option("--line-pattern", default=None)
@click.option("--order", default=2, show_default=True, type=int)
@click.option("--top-k", default=10, show_default=True, type=int)
@click.option("--bucket-seconds", default=60.0, show_default=True, type=float)
@click.option("--out", "out_dir", default=None)
@click.option("--seed", default=0, type=int)
def detect(input_path, format_, analysis, strategy, window_size, duration, entity_pattern,
           sidecar, timestamp_format, line_pattern, order, top_k, bucket_seconds,
           out_dir, seed):
    """Detect anomalies with a counter, outlier, or sequence detector."""

    def body():
        if analysis == "ngram_topk":
            kind = "sequential"
        elif analysis in ("ewma", "ets_additive"):
            kind = "counters"
        else:
            kind = "quantitative"
        adapter = None
        if entity_pattern or sidecar:
            adapter = DatasetAdapter(
                id_pattern=entity_pattern,
                label_source="sidecar_file" if sidecar else None,
                sidecar_path=sidecar,
            )
        needs_partition = kind in ("sequential", "quantitative")
        spec = JobSpec(
            application="detect_anomaly",
            loader=LoaderConfig(path=input_path, format=format_,
                                timestamp_format=timestamp_format,
                                line_pattern=line_pattern),
            adapter=adapter,
            parser=ParserConfig(),
            partition=(
                PartitionConfig(strategy=strategy, window_size=window_size,
                                duration=duration)
                if needs_partition else None
            ),
            representation=RepresentationConfig(kind=kind, bucket_seconds=bucket_seconds),
            analysis=AnalysisConfig(algorithm=analysis, order=order, top_k=top_k),
            seed=seed,
        )
        _execute(spec, out_dir, 1, echo_spec=False)

    _guarded(body)


@main.command()
@click.option("--workspace", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--max-workers", default=2, show_default=True, type=int,
              help="Concurrent job limit.")
def serve(workspace, host, port, max_workers):
    """Start the HTTP job service."""
    from .service import serve as serve_app

    serve_app(workspace, host=host, port=port, max_workers=max_workers)


if __name__ == "__main__":
    main()
