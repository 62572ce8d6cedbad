#!/usr/bin/env python3
"""Compare the three template miners on a corpus.

By default runs on the seeded 10,000-line synthetic corpus, where ground
truth is known and grouping accuracy can be reported. Point --input at
any plain log file to benchmark on real data (accuracy column is then
omitted). Prints one row per (algorithm, workers) combination.
"""

import time
from pathlib import Path

import click

from loglens import parsing
from loglens.parsing import ParserConfig
from loglens.records import LoaderConfig, LogRecord, LogRecordBatch, load_file
from loglens.testing import grouping_accuracy, template_corpus


@click.command()
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Log file to parse (default: synthetic corpus).")
@click.option("--seed", type=int, default=7, show_default=True,
              help="Seed for the synthetic corpus.")
@click.option("--workers", "worker_counts", type=int, multiple=True,
              default=(1, 4), show_default=True)
@click.option("--repeats", type=int, default=3, show_default=True,
              help="Timing repeats; the best run is reported.")
def main(input_path, seed, worker_counts, repeats) -> None:
    if input_path is None:
        corpus = template_corpus(seed=seed)
        batch = LogRecordBatch([LogRecord(body=body) for body in corpus.bodies])
        truth = corpus.truth_ids
        click.echo(f"corpus: synthetic, {len(corpus.bodies)} lines, "
                   f"{len(corpus.templates)} true templates")
    else:
        batch = load_file(LoaderConfig(path=str(input_path)))
        truth = None
        click.echo(f"corpus: {input_path}, {len(batch)} lines")

    header = ["algorithm", "workers", "templates", "best_ms"]
    if truth is not None:
        header.append("accuracy")
    click.echo("  ".join(f"{h:>10}" for h in header))

    for algorithm in ("drain", "iplom", "ael"):
        for workers in worker_counts:
            best = None
            for _ in range(repeats):
                start = time.perf_counter()
                result = parsing.parse(batch, ParserConfig(algorithm=algorithm),
                                       workers=workers)
                elapsed = (time.perf_counter() - start) * 1000
                best = elapsed if best is None else min(best, elapsed)
            row = [algorithm, str(workers), str(len(result.templates)), f"{best:.1f}"]
            if truth is not None:
                row.append(f"{grouping_accuracy(result.line_template_ids, truth):.4f}")
            click.echo("  ".join(f"{v:>10}" for v in row))


if __name__ == "__main__":
    main()
