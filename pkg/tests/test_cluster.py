import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loglens.cluster import dbscan_fit, kmeans_fit
from loglens.errors import EmptyMatrix, KTooLarge
from loglens.represent import FeatureMatrix


def matrix(rows):
    rows = [[float(v) for v in row] for row in rows]
    return FeatureMatrix([str(i) for i in range(len(rows))],
                         [f"c{j}" for j in range(len(rows[0]))],
                         np.array(rows))


def best_two_partition_inertia(points):
    """Exhaustive optimum over every 2-labeling of the points."""
    n = len(points)
    best = math.inf
    for mask in range(1, 2 ** n - 1):
        groups = ([p for i, p in enumerate(points) if mask >> i & 1],
                  [p for i, p in enumerate(points) if not mask >> i & 1])
        inertia = 0.0
        for group in groups:
            arr = np.array(group)
            inertia += ((arr - arr.mean(axis=0)) ** 2).sum()
        best = min(best, inertia)
    return best


def induced_partition(values, labels):
    clusters = {}
    for value, label in zip(values, labels):
        clusters.setdefault(label, []).append(tuple(value))
    return {frozenset(members) for members in clusters.values()}


# -- k-means -----------------------------------------------------------------

def test_kmeans_four_point_oracle():
    points = [[0.0], [1.0], [10.0], [11.0]]
    result = kmeans_fit(matrix(points), k=2, seed=0)
    assert result.labels[0] == result.labels[1]
    assert result.labels[2] == result.labels[3]
    assert result.labels[0] != result.labels[2]
    assert sorted(c[0] for c in result.centroids) == [0.5, 10.5]
    assert result.inertia == pytest.approx(1.0, abs=1e-12)
    assert result.inertia == pytest.approx(best_two_partition_inertia(points), abs=1e-9)


def test_kmeans_k_equals_n():
    points = [[0.0], [3.0], [7.0], [40.0]]
    result = kmeans_fit(matrix(points), k=4, seed=1)
    assert sorted(result.labels) == [0, 1, 2, 3]
    assert result.inertia == pytest.approx(0.0, abs=1e-12)


def test_kmeans_duplicated_dataset_same_centroids():
    single = kmeans_fit(matrix([[0.0], [1.0], [10.0], [11.0]]), k=2, seed=3)
    doubled = kmeans_fit(matrix([[0.0], [1.0], [10.0], [11.0]] * 2), k=2, seed=3)
    assert sorted(c[0] for c in doubled.centroids) == sorted(c[0] for c in single.centroids)


def test_kmeans_k_too_large_counts_distinct_rows():
    with pytest.raises(KTooLarge):
        kmeans_fit(matrix([[1.0], [1.0], [2.0]]), k=3, seed=0)
    kmeans_fit(matrix([[1.0], [1.0], [2.0]]), k=2, seed=0)


def test_kmeans_empty_matrix():
    m = FeatureMatrix([], ["c0"], np.zeros((0, 1)))
    with pytest.raises(EmptyMatrix):
        kmeans_fit(m, k=1, seed=0)


def test_kmeans_converged_inertia_not_above_initial():
    points = [[float(v)] for v in [0, 1, 2, 9, 10, 11, 30, 31]]
    for seed in range(5):
        init = kmeans_fit(matrix(points), k=3, seed=seed, max_iter=0)
        final = kmeans_fit(matrix(points), k=3, seed=seed)
        assert final.inertia <= init.inertia + 1e-12


def test_kmeans_permutation_changes_only_label_numbering():
    base = [[0.0], [0.1], [0.2], [5.0], [5.1], [5.2]]
    reference = kmeans_fit(matrix(base), k=2, seed=0)
    expected = induced_partition(base, reference.labels)
    for perm_seed in range(4):
        rng = np.random.default_rng(perm_seed)
        order = rng.permutation(len(base))
        shuffled = [base[i] for i in order]
        result = kmeans_fit(matrix(shuffled), k=2, seed=7)
        assert induced_partition(shuffled, result.labels) == expected


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=2, max_size=7, unique=True))
def test_kmeans_never_beats_exhaustive_optimum(values):
    points = [[float(v)] for v in values]
    result = kmeans_fit(matrix(points), k=2, seed=0)
    assert result.inertia >= best_two_partition_inertia(points) - 1e-9


def test_kmeans_cosine_distance_groups_by_direction():
    points = [[1.0, 0.0], [5.0, 0.0], [0.0, 2.0]]
    result = kmeans_fit(matrix(points), k=2, seed=0, distance="cosine")
    assert result.labels[0] == result.labels[1]
    assert result.labels[0] != result.labels[2]


# -- dbscan ------------------------------------------------------------------

def dbscan_reference(points, eps, min_pts):
    """Order-free density-reachability oracle."""
    n = len(points)
    nbrs = [
        {j for j in range(n) if math.dist(points[i], points[j]) <= eps}
        for i in range(n)
    ]
    cores = {i for i in range(n) if len(nbrs[i]) >= min_pts}
    comp = {c: c for c in cores}

    def find(x):
        while comp[x] != x:
            x = comp[x]
        return x

    for a, b in itertools.combinations(sorted(cores), 2):
        if b in nbrs[a]:
            comp[find(a)] = find(b)
    groups: dict[int, set] = {}
    for c in cores:
        groups.setdefault(find(c), set()).add(c)
    core_partition = {frozenset(g) for g in groups.values()}
    noise = {i for i in range(n) if i not in cores and not (nbrs[i] & cores)}
    return cores, core_partition, noise


def check_against_reference(points, eps, min_pts):
    result = dbscan_fit(matrix(points), eps=eps, min_pts=min_pts)
    cores, core_partition, noise = dbscan_reference(points, eps, min_pts)
    assert {i for i, l in enumerate(result.labels) if l == -1} == noise
    got_cores = {}
    for i, label in enumerate(result.labels):
        if label != -1 and i in cores:
            got_cores.setdefault(label, set()).add(i)
    assert {frozenset(g) for g in got_cores.values()} == core_partition
    for i, label in enumerate(result.labels):
        if label != -1 and i not in cores:
            # border point: reachable from a core of its own cluster
            assert any(
                math.dist(points[i], points[c]) <= eps and result.labels[c] == label
                for c in cores)
    return result


def test_dbscan_line_example():
    points = [[0.0], [1.0], [2.0], [10.0]]
    result = check_against_reference(points, eps=1.5, min_pts=2)
    assert result.labels == [0, 0, 0, -1]


def test_dbscan_huge_eps_single_cluster():
    points = [[0.0], [5.0], [9.0]]
    result = dbscan_fit(matrix(points), eps=100.0, min_pts=3)
    assert result.labels == [0, 0, 0]


def test_dbscan_min_pts_one_gives_components():
    rng = np.random.default_rng(5)
    points = rng.uniform(0, 10, size=(6, 2)).tolist()
    check_against_reference(points, eps=2.0, min_pts=1)


def test_dbscan_border_point_attaches_to_reaching_cluster():
    # point 2 is border between two cores; index-order expansion attaches
    # it to the cluster grown from point 0 first
    points = [[0.0], [1.0], [2.0], [3.0], [4.0]]
    result = check_against_reference(points, eps=1.0, min_pts=3)
    assert result.labels[2] == result.labels[0]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)),
                min_size=1, max_size=8),
       st.sampled_from([1.0, 1.5, 2.5]), st.integers(1, 4))
def test_dbscan_matches_brute_force(raw, eps, min_pts):
    points = [[float(x), float(y)] for x, y in raw]
    check_against_reference(points, eps, min_pts)


def test_dbscan_core_partition_shuffle_invariant():
    rng = np.random.default_rng(9)
    base = rng.uniform(0, 8, size=(8, 2)).tolist()
    ref_result = dbscan_fit(matrix(base), eps=2.0, min_pts=2)
    cores, _, _ = dbscan_reference(base, 2.0, 2)
    expected = {
        frozenset(tuple(base[i]) for i in range(8)
                  if i in cores and ref_result.labels[i] == label)
        for label in set(ref_result.labels) if label != -1
    }
    for perm_seed in range(4):
        order = np.random.default_rng(perm_seed).permutation(8)
        shuffled = [base[i] for i in order]
        result = dbscan_fit(matrix(shuffled), eps=2.0, min_pts=2)
        s_cores, _, _ = dbscan_reference(shuffled, 2.0, 2)
        got = {
            frozenset(tuple(shuffled[i]) for i in range(8)
                      if i in s_cores and result.labels[i] == label)
            for label in set(result.labels) if label != -1
        }
        assert got == expected


def test_dbscan_empty_matrix():
    m = FeatureMatrix([], ["c0"], np.zeros((0, 1)))
    with pytest.raises(EmptyMatrix):
        dbscan_fit(m, eps=1.0, min_pts=1)
