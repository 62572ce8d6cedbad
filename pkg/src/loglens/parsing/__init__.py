"""Template extraction from cleaned loglines.

Three interchangeable algorithms (drain, iplom, ael) sit behind parse().
All of them group lines by token count first, so the engine shards work
by token length and reassigns template ids in a deterministic first-seen
pass afterwards; results are identical for any worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import LogLensError
from ..records import LogRecordBatch

WILDCARD = "<*>"

# One discovered group within a token-length class: a template over the
# class token count plus the (increasing) batch indices of its members.
Cluster = tuple[list[str], list[int]]


@dataclass
class DrainParams:
    depth: int = 4
    sim_threshold: float = 0.4
    max_children: int = 100


@dataclass
class IplomParams:
    ct: float = 0.35
    lower_bound: float = 0.25


@dataclass
class AelParams:
    min_event_count: int = 2
    merge_percent: float = 0.5


PARSER_ALGORITHMS = ("drain", "iplom", "ael")


@dataclass
class ParserConfig:
    algorithm: str = "drain"
    mask_digits: bool = False
    drain: DrainParams = field(default_factory=DrainParams)
    iplom: IplomParams = field(default_factory=IplomParams)
    ael: AelParams = field(default_factory=AelParams)

    def validate(self) -> list[str]:
        errors = []
        if self.algorithm not in PARSER_ALGORITHMS:
            errors.append(f"parser.algorithm: unknown algorithm {self.algorithm!r}")
        if self.drain.depth < 3:
            errors.append("parser.drain.depth: must be >= 3")
        if not 0 < self.drain.sim_threshold <= 1:
            errors.append("parser.drain.sim_threshold: must lie in (0, 1]")
        if not 0 < self.iplom.ct < 1:
            errors.append("parser.iplom.ct: must lie in (0, 1)")
        if not 0 < self.iplom.lower_bound < 1:
            errors.append("parser.iplom.lower_bound: must lie in (0, 1)")
        if not 0 < self.ael.merge_percent < 1:
            errors.append("parser.ael.merge_percent: must lie in (0, 1)")
        if self.ael.min_event_count < 1:
            errors.append("parser.ael.min_event_count: must be >= 1")
        return errors


@dataclass(frozen=True)
class Template:
    template_id: int
    tokens: tuple[str, ...]
    count: int

    @property
    def template_string(self) -> str:
        return " ".join(self.tokens)

    @property
    def wildcard_positions(self) -> tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.tokens) if t == WILDCARD)


@dataclass
class ParseResult:
    line_template_ids: list[int]
    templates: dict[int, Template]
    parameter_lists: list[list[str]]


@dataclass(frozen=True)
class CatalogEntry:
    template_id: int
    template_string: str
    count: int
    example_parameters: tuple[tuple[str, ...], ...]


def _has_digit(token: str) -> bool:
    return any(c.isdigit() for c in token)


def parse(batch: LogRecordBatch, config: ParserConfig, workers: int = 1) -> ParseResult:
    """Assign every record a template id and extract wildcard parameters.

    Records with empty bodies get the reserved template id 0. Template
    ids are dense, assigned by first appearance in the batch, so output
    is byte-stable across runs and worker counts.
    """
    errors = config.validate()
    if errors:
        raise LogLensError("; ".join(errors))

    token_lists = [body.split() for body in batch.bodies]
    if config.mask_digits:
        work_tokens = [[WILDCARD if _has_digit(t) else t for t in toks] for toks in token_lists]
    else:
        work_tokens = token_lists

    by_length: dict[int, list[tuple[int, list[str]]]] = {}
    empty_indices = []
    for i, toks in enumerate(work_tokens):
        if not toks:
            empty_indices.append(i)
        else:
            by_length.setdefault(len(toks), []).append((i, toks))

    if config.algorithm == "drain":
        from .drain import cluster_length_class
        backend = lambda lines: cluster_length_class(lines, config.drain)
    elif config.algorithm == "iplom":
        from .iplom import cluster_length_class
        backend = lambda lines: cluster_length_class(lines, config.iplom)
    else:
        from .ael import cluster_length_class
        backend = lambda lines: cluster_length_class(lines, config.ael)

    lengths = sorted(by_length)
    if workers > 1 and len(lengths) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            shards = list(pool.map(lambda L: backend(by_length[L]), lengths))
    else:
        shards = [backend(by_length[L]) for L in lengths]

    clusters: list[Cluster] = [c for shard in shards for c in shard]
    for template, members in clusters:
        if len(template) == 0 or not members:
            raise LogLensError("parser backend produced an empty cluster")
    # Dense ids by first appearance in the batch; 0 is the empty template.
    clusters.sort(key=lambda c: c[1][0])

    n = len(batch)
    line_template_ids = [0] * n
    templates: dict[int, Template] = {}
    parameter_lists: list[list[str]] = [[] for _ in range(n)]
    if empty_indices:
        templates[0] = Template(0, (), len(empty_indices))

    for offset, (template, members) in enumerate(clusters, start=1):
        tpl = Template(offset, tuple(template), len(members))
        templates[offset] = tpl
        positions = tpl.wildcard_positions
        for i in members:
            line_template_ids[i] = offset
            original = token_lists[i]
            if len(original) != len(tpl.tokens):
                raise LogLensError("template length does not match line length")
            parameter_lists[i] = [original[p] for p in positions]

    return ParseResult(line_template_ids, templates, parameter_lists)


def template_catalog(result: ParseResult) -> list[CatalogEntry]:
    """Templates by descending count (ties by id) with example parameters."""
    examples: dict[int, list[tuple[str, ...]]] = {tid: [] for tid in result.templates}
    for i, tid in enumerate(result.line_template_ids):
        bucket = examples[tid]
        if len(bucket) >= 3:
            continue
        params = tuple(result.parameter_lists[i])
        if params not in bucket:
            bucket.append(params)
    order = sorted(result.templates.values(), key=lambda t: (-t.count, t.template_id))
    return [
        CatalogEntry(t.template_id, t.template_string, t.count, tuple(examples[t.template_id]))
        for t in order
    ]


# -- serialization -----------------------------------------------------------

PARAM_SEPARATOR = "\x1f"


def _escape_param(value: str) -> str:
    return value.replace("\\", "\\\\").replace(PARAM_SEPARATOR, "\\u")


def _unescape_param(value: str) -> str:
    out, i = [], 0
    while i < len(value):
        if value[i] == "\\" and i + 1 < len(value):
            out.append(PARAM_SEPARATOR if value[i + 1] == "u" else value[i + 1])
            i += 2
        else:
            out.append(value[i])
            i += 1
    return "".join(out)


def write_result(result: ParseResult, directory: str | Path) -> None:
    """Write templates.csv and parsed_lines.csv under directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "templates.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["template_id", "template", "count"])
        for tid in sorted(result.templates):
            t = result.templates[tid]
            writer.writerow([tid, t.template_string, t.count])
    with open(directory / "parsed_lines.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "template_id", "parameters"])
        for i, tid in enumerate(result.line_template_ids):
            params = PARAM_SEPARATOR.join(_escape_param(p) for p in result.parameter_lists[i])
            writer.writerow([i, tid, params])


def read_result(directory: str | Path) -> ParseResult:
    directory = Path(directory)
    templates: dict[int, Template] = {}
    with open(directory / "templates.csv", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for tid, template, count in reader:
            tokens = tuple(template.split(" ")) if template else ()
            templates[int(tid)] = Template(int(tid), tokens, int(count))
    line_template_ids, parameter_lists = [], []
    with open(directory / "parsed_lines.csv", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for _, tid, params in reader:
            line_template_ids.append(int(tid))
            parameter_lists.append(
                [_unescape_param(p) for p in params.split(PARAM_SEPARATOR)] if params else []
            )
    return ParseResult(line_template_ids, templates, parameter_lists)
