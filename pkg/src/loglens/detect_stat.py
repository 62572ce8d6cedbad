"""Statistical anomaly scoring.

Feature-vector detectors (isolation forest, local outlier factor,
distribution divergence) and counter-series detectors (EWMA residuals
and additive exponential smoothing with trend).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InfiniteKL, KTooLarge, LogLensError, SeriesTooShort, SupportMismatch, TooFewRows,
)
from .represent import CounterSeries, FeatureMatrix

EULER_GAMMA = 0.5772156649015329


@dataclass
class AnomalyResult:
    """Per-row anomaly scores; flags are exactly score > threshold."""

    row_ids: list[str]
    scores: np.ndarray
    threshold: float
    method: str

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if not np.all(np.isfinite(self.scores)):
            raise LogLensError(f"{self.method}: non-finite anomaly scores")
        if len(self.scores) != len(self.row_ids):
            raise LogLensError(f"{self.method}: scores and row_ids length mismatch")

    @property
    def flags(self) -> np.ndarray:
        return self.scores > self.threshold

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row_id", "score", "flag"])
            for rid, score, flag in zip(self.row_ids, self.scores, self.flags):
                writer.writerow([rid, repr(float(score)), int(flag)])


# -- isolation forest --------------------------------------------------------


@dataclass
class IForestConfig:
    n_trees: int = 100
    subsample: int = 256
    seed: int = 0


def average_path_length(n: int) -> float:
    """Average unsuccessful-search path length in a BST of n nodes."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * (math.log(n - 1) + EULER_GAMMA) - 2.0 * (n - 1) / n


class _ITree:
    __slots__ = ("feature", "value", "left", "right", "size")

    def __init__(self, size: int):
        self.feature: int | None = None
        self.value = 0.0
        self.left: _ITree | None = None
        self.right: _ITree | None = None
        self.size = size


def _grow(X: np.ndarray, rows: np.ndarray, depth: int, limit: int, rng) -> _ITree:
    node = _ITree(len(rows))
    if depth >= limit or len(rows) <= 1:
        return node
    spans = X[rows].max(axis=0) - X[rows].min(axis=0)
    candidates = np.nonzero(spans > 0)[0]
    if len(candidates) == 0:
        return node
    feature = int(rng.choice(candidates))
    lo = X[rows, feature].min()
    hi = X[rows, feature].max()
    value = rng.uniform(lo, hi)
    mask = X[rows, feature] < value
    node.feature, node.value = feature, value
    node.left = _grow(X, rows[mask], depth + 1, limit, rng)
    node.right = _grow(X, rows[~mask], depth + 1, limit, rng)
    return node


def _path_length(node: _ITree, x: np.ndarray, depth: int) -> float:
    while node.feature is not None:
        node = node.left if x[node.feature] < node.value else node.right
        depth += 1
    return depth + average_path_length(node.size)


def iforest_fit_score(X: FeatureMatrix, config: IForestConfig) -> AnomalyResult:
    """Isolation forest scores 2^(-E[h]/c(m)); default threshold 0.5."""
    values = np.asarray(X.values, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise TooFewRows("isolation forest needs at least 2 rows")
    if config.subsample < 2:
        raise LogLensError("subsample must be >= 2")
    m = min(config.subsample, n)
    limit = math.ceil(math.log2(m))
    rng = np.random.default_rng(config.seed)
    trees = []
    for _ in range(config.n_trees):
        rows = rng.choice(n, size=m, replace=False)
        trees.append(_grow(values, rows, 0, limit, rng))
    c_m = average_path_length(m)
    scores = np.empty(n)
    for i in range(n):
        mean_path = sum(_path_length(t, values[i], 0) for t in trees) / len(trees)
        scores[i] = 2.0 ** (-mean_path / c_m)
    return AnomalyResult(list(X.row_ids), scores, threshold=0.5, method="iforest")


# -- local outlier factor ----------------------------------------------------


def lof_score(X: FeatureMatrix, k: int = 10, threshold: float = 1.5) -> AnomalyResult:
    """Classical LOF with tie-inclusive k-neighborhoods."""
    values = np.asarray(X.values, dtype=float)
    n = values.shape[0]
    if n <= k:
        raise KTooLarge(f"LOF needs more than k={k} rows, got {n}")
    d2 = ((values[:, None, :] - values[None, :, :]) ** 2).sum(axis=2)
    dist = np.sqrt(np.maximum(d2, 0.0))
    np.fill_diagonal(dist, np.inf)

    k_dist = np.sort(dist, axis=1)[:, k - 1]
    neighborhoods = [np.nonzero(dist[i] <= k_dist[i])[0] for i in range(n)]

    # the tiny additive guard keeps lrd finite on duplicate-heavy data;
    # duplicate clusters then score 1.0 as two guards cancel
    lrd = np.empty(n)
    for i in range(n):
        reach = np.maximum(k_dist[neighborhoods[i]], dist[i, neighborhoods[i]])
        lrd[i] = 1.0 / (reach.mean() + 1e-10)

    scores = np.array([lrd[neighborhoods[i]].mean() / lrd[i] for i in range(n)])
    return AnomalyResult(list(X.row_ids), scores, threshold=threshold, method="lof")


# -- distribution divergence -------------------------------------------------


def divergence(P, Q, kind: str = "kl") -> float:
    """KL or Jensen-Shannon divergence of two aligned distributions."""
    p = np.asarray(P, dtype=float)
    q = np.asarray(Q, dtype=float)
    if p.shape != q.shape:
        raise SupportMismatch(f"supports differ: {p.shape} vs {q.shape}")
    for name, d in (("P", p), ("Q", q)):
        if abs(d.sum() - 1.0) > 1e-9 or (d < 0).any():
            raise LogLensError(f"{name} is not a probability distribution")
    if kind == "kl":
        positive = p > 0
        if np.any(positive & (q == 0)):
            raise InfiniteKL("q has zero mass where p does not")
        return float(np.sum(p[positive] * np.log(p[positive] / q[positive])))
    if kind == "js":
        m = (p + q) / 2
        return 0.5 * divergence(p, m, "kl") + 0.5 * divergence(q, m, "kl")
    raise LogLensError(f"unknown divergence kind {kind!r}")


# -- counter-series baselines ------------------------------------------------


@dataclass
class BaselineConfig:
    alpha: float = 0.3
    z_threshold: float = 3.0
    warmup: int = 10


def baseline_detect(series: CounterSeries, config: BaselineConfig,
                    mode: str = "ewma") -> AnomalyResult:
    """Residual z-scores against a smoothed baseline.

    ewma tracks a level only; ets_additive adds a trend term updated with
    the same smoothing factor. Residual std is the Bessel-corrected std
    of the trailing warmup residual window, floored at 1e-9. The first
    warmup buckets score 0.
    """
    if mode not in ("ewma", "ets_additive"):
        raise LogLensError(f"unknown baseline mode {mode!r}")
    if config.warmup < 2:
        raise LogLensError("warmup must be >= 2")
    if not 0 < config.alpha < 1:
        raise LogLensError("alpha must lie in (0, 1)")
    y = series.total().astype(float)
    n = len(y)
    if n <= config.warmup:
        raise SeriesTooShort(f"series length {n} must exceed warmup {config.warmup}")

    alpha = config.alpha
    level = y[0]
    trend = 0.0
    residuals = np.zeros(n)
    scores = np.zeros(n)
    for t in range(1, n):
        forecast = level + trend if mode == "ets_additive" else level
        residuals[t] = y[t] - forecast
        if t >= config.warmup:
            window = residuals[t - config.warmup:t]
            std = max(float(np.std(window, ddof=1)), 1e-9)
            scores[t] = abs(residuals[t]) / std
        new_level = alpha * y[t] + (1 - alpha) * forecast
        if mode == "ets_additive":
            trend = alpha * (new_level - level) + (1 - alpha) * trend
        level = new_level

    row_ids = [ts.isoformat() for ts in series.bucket_start]
    return AnomalyResult(row_ids, scores, threshold=config.z_threshold, method=mode)
