"""Iterative partitioning template miner.

Within a token-length class, lines are split by the token position with
the fewest distinct values, then partitions that are not yet coherent
(share of constant positions <= ct) are split once more using the
mapping between the two most promising positions (1-1 / 1-M / M-1 / M-M
relations, with lower_bound deciding whether a many-side is variable).
Each leaf partition yields a template: constant positions keep their
token, the rest become wildcards.
"""

from __future__ import annotations

from collections import Counter

from . import WILDCARD, Cluster, IplomParams

_Lines = list[tuple[int, list[str]]]


def _distinct_per_position(lines: _Lines, length: int) -> list[set[str]]:
    values = [set() for _ in range(length)]
    for _, tokens in lines:
        for p, token in enumerate(tokens):
            values[p].add(token)
    return values


def _split_by_fewest_distinct(lines: _Lines, length: int) -> list[_Lines]:
    values = _distinct_per_position(lines, length)
    pos = min(range(length), key=lambda p: (len(values[p]), p))
    groups: dict[str, _Lines] = {}
    for index, tokens in lines:
        groups.setdefault(tokens[pos], []).append((index, tokens))
    return list(groups.values())


def _goodness(lines: _Lines, length: int) -> float:
    values = _distinct_per_position(lines, length)
    return sum(1 for v in values if len(v) == 1) / length


def _mapping_positions(lines: _Lines, length: int) -> tuple[int, int] | None:
    """Pick the two positions whose value cardinality is most common.

    Cardinality 1 (constant positions) is excluded. When no cardinality
    repeats across two positions, fall back to the two positions with the
    lowest cardinality above 1.
    """
    cards = [len(v) for v in _distinct_per_position(lines, length)]
    candidates = [(c, p) for p, c in enumerate(cards) if c > 1]
    if len(candidates) < 2:
        return None
    freq = Counter(c for c, _ in candidates)
    best_card, best_freq = None, 0
    for card in sorted(freq):
        if freq[card] > best_freq and freq[card] >= 2:
            best_card, best_freq = card, freq[card]
    if best_card is not None:
        positions = [p for c, p in candidates if c == best_card]
        return positions[0], positions[1]
    candidates.sort()
    return candidates[0][1], candidates[1][1]


def _split_by_bijection(lines: _Lines, p1: int, p2: int, lower_bound: float) -> list[_Lines]:
    forward: dict[str, set[str]] = {}
    backward: dict[str, set[str]] = {}
    count1: Counter = Counter()
    count2: Counter = Counter()
    for _, tokens in lines:
        a, b = tokens[p1], tokens[p2]
        forward.setdefault(a, set()).add(b)
        backward.setdefault(b, set()).add(a)
        count1[a] += 1
        count2[b] += 1

    groups: dict[tuple, _Lines] = {}
    for index, tokens in lines:
        a, b = tokens[p1], tokens[p2]
        fan_out, fan_in = len(forward[a]), len(backward[b])
        if fan_out == 1 and fan_in == 1:
            key = ("one_one", a)
        elif fan_out > 1 and fan_in == 1:
            # one p1 value to many p2 values: split by p2 only when its
            # values look structural (few distinct relative to lines)
            if fan_out / count1[a] <= lower_bound:
                key = ("one_many", a, b)
            else:
                key = ("one_many", a)
        elif fan_out == 1 and fan_in > 1:
            if fan_in / count2[b] <= lower_bound:
                key = ("many_one", b, a)
            else:
                key = ("many_one", b)
        else:
            key = ("many_many",)
        groups.setdefault(key, []).append((index, tokens))
    return list(groups.values())


def _template(lines: _Lines, length: int) -> list[str]:
    values = _distinct_per_position(lines, length)
    return [next(iter(v)) if len(v) == 1 else WILDCARD for v in values]


def cluster_length_class(lines: _Lines, params: IplomParams) -> list[Cluster]:
    length = len(lines[0][1])
    leaves: list[_Lines] = []
    for part in _split_by_fewest_distinct(lines, length):
        if len(part) <= 2 or length < 2 or _goodness(part, length) > params.ct:
            leaves.append(part)
            continue
        positions = _mapping_positions(part, length)
        if positions is None:
            leaves.append(part)
            continue
        leaves.extend(_split_by_bijection(part, positions[0], positions[1], params.lower_bound))
    return [(_template(part, length), [index for index, _ in part]) for part in leaves]
