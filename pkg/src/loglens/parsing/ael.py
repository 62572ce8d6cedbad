"""Abstraction of execution-log lines by anonymize / categorize / merge.

Dynamic tokens (anything carrying a digit: counts, hex ids, dotted
addresses) are anonymized to the wildcard, lines are grouped by their
anonymized token sequence, and groups that differ only where a wildcard
is involved get merged when similar enough. Groups rarer than
min_event_count get a relaxed second chance to join their most similar
group. Anonymization is whole-token so that wildcard substitution always
reproduces the original line.
"""

from __future__ import annotations

from . import WILDCARD, AelParams, Cluster, _has_digit


class _Group:
    __slots__ = ("template", "members", "count")

    def __init__(self, template: list[str]):
        self.template = template
        self.members: list[int] = []
        self.count = 0


def _similarity(a: list[str], b: list[str]) -> float:
    return sum(1 for x, y in zip(a, b) if x == y) / len(a)


def _mergeable(a: list[str], b: list[str]) -> bool:
    return all(x == y or x == WILDCARD or y == WILDCARD for x, y in zip(a, b))


def _merged(a: list[str], b: list[str]) -> list[str]:
    return [x if x == y else WILDCARD for x, y in zip(a, b)]


def cluster_length_class(lines: list[tuple[int, list[str]]], params: AelParams) -> list[Cluster]:
    groups: dict[tuple[str, ...], _Group] = {}
    for index, tokens in lines:
        anonymized = tuple(WILDCARD if _has_digit(t) else t for t in tokens)
        group = groups.get(anonymized)
        if group is None:
            group = groups[anonymized] = _Group(list(anonymized))
        group.members.append(index)
        group.count += 1

    # merge pass: fold each group into the most similar earlier survivor
    # that differs only at wildcard-involving positions
    survivors: list[_Group] = []
    for group in groups.values():
        best, best_sim = None, -1.0
        for other in survivors:
            if not _mergeable(group.template, other.template):
                continue
            sim = _similarity(group.template, other.template)
            if sim >= params.merge_percent and sim > best_sim:
                best, best_sim = other, sim
        if best is None:
            survivors.append(group)
        else:
            best.template = _merged(best.template, group.template)
            best.members.extend(group.members)
            best.count += group.count

    # relaxed pass: rare groups may also merge across non-wildcard
    # mismatches, into their most similar live peer
    absorbed: set[int] = set()
    for group in survivors:
        if id(group) in absorbed or group.count >= params.min_event_count:
            continue
        best, best_sim = None, -1.0
        for other in survivors:
            if other is group or id(other) in absorbed:
                continue
            sim = _similarity(group.template, other.template)
            if sim >= params.merge_percent and sim > best_sim:
                best, best_sim = other, sim
        if best is not None:
            best.template = _merged(best.template, group.template)
            best.members.extend(group.members)
            best.count += group.count
            absorbed.add(id(group))

    clusters: list[Cluster] = []
    for group in survivors:
        if id(group) in absorbed:
            continue
        group.members.sort()
        clusters.append((group.template, group.members))
    return clusters
