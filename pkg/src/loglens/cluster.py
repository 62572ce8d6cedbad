"""Clustering of log feature rows: seeded k-means++ and DBSCAN."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyMatrix, KTooLarge, LogLensError
from .represent import FeatureMatrix


@dataclass
class ClusterAssignment:
    row_ids: list[str]
    labels: list[int]  # -1 marks noise (dbscan)
    centroids: np.ndarray | None = None
    inertia: float | None = None

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row_id", "label"])
            for rid, label in zip(self.row_ids, self.labels):
                writer.writerow([rid, label])


def _as_cosine(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1)
    out = X.copy()
    nonzero = norms > 0
    out[nonzero] /= norms[nonzero, None]
    return out


def kmeans_fit(X: FeatureMatrix, k: int, seed: int = 0, max_iter: int = 300,
               tol: float = 1e-6, distance: str = "euclidean") -> ClusterAssignment:
    """Lloyd iterations from k-means++ seeding.

    Ties in nearest-centroid assignment break toward the lowest centroid
    index. distance="cosine" clusters the row-normalized matrix, which is
    rank-equivalent to cosine distance on unit-norm rows.
    """
    values = np.asarray(X.values, dtype=float)
    if values.shape[0] == 0:
        raise EmptyMatrix("k-means needs at least one row")
    if distance == "cosine":
        values = _as_cosine(values)
    elif distance != "euclidean":
        raise LogLensError(f"unknown distance {distance!r}")
    n = values.shape[0]
    distinct = np.unique(values, axis=0).shape[0]
    if k < 1 or k > distinct:
        raise KTooLarge(f"k={k} with {distinct} distinct rows")

    rng = np.random.default_rng(seed)

    # k-means++ seeding
    centroids = np.empty((k, values.shape[1]))
    centroids[0] = values[rng.integers(n)]
    closest = ((values - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        # the distinct-rows guard keeps some positive mass available here
        r = rng.random() * closest.sum()
        centroids[j] = values[int(np.searchsorted(np.cumsum(closest), r))]
        closest = np.minimum(closest, ((values - centroids[j]) ** 2).sum(axis=1))

    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        # squared distances, argmin takes the lowest index on ties
        d2 = ((values[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        new_centroids = centroids.copy()
        for j in range(k):
            members = values[labels == j]
            if len(members):
                new_centroids[j] = members.mean(axis=0)
        shift = np.linalg.norm(new_centroids - centroids, axis=1).max()
        centroids = new_centroids
        if shift < tol:
            break
    d2 = ((values[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    return ClusterAssignment(list(X.row_ids), labels.tolist(), centroids, inertia)


def dbscan_fit(X: FeatureMatrix, eps: float, min_pts: int) -> ClusterAssignment:
    """Density clustering with closed-ball Euclidean neighborhoods.

    A point is core iff its eps-neighborhood (itself included) holds at
    least min_pts points. Expansion proceeds in ascending row order, so
    border points join the first core cluster that reaches them.
    """
    values = np.asarray(X.values, dtype=float)
    n = values.shape[0]
    if n == 0:
        raise EmptyMatrix("dbscan needs at least one row")
    if eps <= 0 or min_pts < 1:
        raise LogLensError("dbscan needs eps > 0 and min_pts >= 1")

    d2 = ((values[:, None, :] - values[None, :, :]) ** 2).sum(axis=2)
    neighbors = [np.nonzero(row <= eps * eps)[0] for row in d2]
    core = np.array([len(nb) >= min_pts for nb in neighbors])

    labels = np.full(n, -1, dtype=int)
    cluster = 0
    for start in range(n):
        if labels[start] != -1 or not core[start]:
            continue
        labels[start] = cluster
        frontier = [start]
        while frontier:
            point = frontier.pop(0)
            for nb in neighbors[point]:
                if labels[nb] == -1:
                    labels[nb] = cluster
                    if core[nb]:
                        frontier.append(nb)
        cluster += 1
    return ClusterAssignment(list(X.row_ids), labels.tolist())
