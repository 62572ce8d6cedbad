"""Fixed-depth prefix-tree template miner.

Lines (already grouped by token count) descend a tree keyed by their
leading tokens; leaves hold candidate groups. A line joins the most
similar group when the fraction of position-wise equal tokens reaches
the threshold, otherwise it starts a new group. Group templates evolve
by wildcarding mismatched positions, so a position is either constant
across all members or the wildcard.
"""

from __future__ import annotations

from . import WILDCARD, Cluster, DrainParams, _has_digit


class _Group:
    __slots__ = ("template", "members")

    def __init__(self, tokens: list[str], index: int):
        self.template = list(tokens)
        self.members = [index]


class _Node:
    __slots__ = ("children", "groups")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.groups: list[_Group] = []


def _similarity(template: list[str], tokens: list[str]) -> tuple[float, int]:
    equal = 0
    wildcards = 0
    for a, b in zip(template, tokens):
        if a == WILDCARD:
            wildcards += 1
        elif a == b:
            equal += 1
    return equal / len(template), wildcards


def cluster_length_class(lines: list[tuple[int, list[str]]], params: DrainParams) -> list[Cluster]:
    token_levels = params.depth - 2  # root and length levels are implicit here
    root = _Node()

    for index, tokens in lines:
        # descend by leading tokens
        node = root
        for level in range(min(token_levels, len(tokens))):
            token = tokens[level]
            child = node.children.get(token)
            if child is None and not _has_digit(token) and token != WILDCARD:
                if WILDCARD in node.children:
                    if len(node.children) < params.max_children:
                        child = node.children[token] = _Node()
                    else:
                        child = node.children[WILDCARD]
                else:
                    if len(node.children) + 1 < params.max_children:
                        child = node.children[token] = _Node()
                    else:
                        child = node.children.setdefault(WILDCARD, _Node())
            elif child is None:  # digit-bearing or wildcard tokens share one branch
                child = node.children.setdefault(WILDCARD, _Node())
            node = child

        best, best_sim, best_wild = None, -1.0, -1
        for group in node.groups:
            sim, wild = _similarity(group.template, tokens)
            if sim > best_sim or (sim == best_sim and wild > best_wild):
                best, best_sim, best_wild = group, sim, wild

        if best is not None and best_sim >= params.sim_threshold:
            best.members.append(index)
            best.template = [
                a if a == b else WILDCARD for a, b in zip(best.template, tokens)
            ]
        else:
            node.groups.append(_Group(tokens, index))

    clusters: list[Cluster] = []
    stack = [root]
    while stack:
        node = stack.pop()
        for group in node.groups:
            clusters.append((group.template, group.members))
        stack.extend(node.children.values())
    return clusters
