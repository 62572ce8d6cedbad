#!/usr/bin/env python3
"""Write the bundled synthetic corpora to disk for experimentation.

Produces four datasets under the output directory:

  templates/corpus.log + truth.csv   10,000 lines from 20 templates
  sequences/events.csv               labeled Markov event sequences
  sessions/sessions.log + labels.csv session-id log with a label sidecar
  windows/alerts.log                 alert-tagged lines with one burst

Each is small enough to inspect by hand and is accepted directly by the
`loglens` CLI (see the spec files this script prints at the end).
"""

import csv
from pathlib import Path

import click

from loglens.testing import (
    markov_sequences, template_corpus, write_session_fixture,
    write_windowed_fixture,
)


@click.command()
@click.option("--out", type=click.Path(path_type=Path), default=Path("fixtures"),
              show_default=True, help="Directory to write datasets into.")
@click.option("--seed", type=int, default=7, show_default=True)
def main(out: Path, seed: int) -> None:
    template_dir = out / "templates"
    template_dir.mkdir(parents=True, exist_ok=True)
    corpus = template_corpus(seed=seed)
    (template_dir / "corpus.log").write_text(
        "\n".join(corpus.bodies) + "\n", encoding="utf-8")
    with open(template_dir / "truth.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["line", "template_id", "template"])
        for i, tid in enumerate(corpus.truth_ids):
            writer.writerow([i, tid, corpus.templates[tid]])
    click.echo(f"wrote {len(corpus.bodies)} lines, "
               f"{len(corpus.templates)} templates -> {template_dir}")

    seq_dir = out / "sequences"
    seq_dir.mkdir(parents=True, exist_ok=True)
    fixture = markov_sequences(seed=seed + 4)
    with open(seq_dir / "events.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ts", "body", "entity", "label"])
        ts = 0
        for sid, (seq, label) in enumerate(zip(fixture.sequences, fixture.labels)):
            for state in seq:
                writer.writerow([ts, f"event e{state} observed", f"s{sid:04d}", label])
                ts += 1
    click.echo(f"wrote {len(fixture.sequences)} sequences "
               f"({sum(fixture.labels)} anomalous) -> {seq_dir}")

    log_path, sidecar = write_session_fixture(out / "sessions", seed=seed)
    click.echo(f"wrote session log -> {log_path} (labels: {sidecar})")

    alerts = write_windowed_fixture(out / "windows", seed=seed)
    click.echo(f"wrote windowed alert log -> {alerts}")


if __name__ == "__main__":
    main()
