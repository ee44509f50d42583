"""Linear-algebraic k-means machinery.

The clustering objective is evaluated in two provably equal ways: the
centroid sum ``sum_i ||p_i - mu(p_i)||^2`` (used for computation) and the
matrix form ``||A - X X.T A||_F^2`` through the scaled indicator matrix
``X`` (asserted against the centroid form when assertions are enabled).
Backends: seeded k-means++ plus Lloyd refinement, and an exhaustive
optimal search for small instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ContractViolationError, ResourceLimitError
from .linalg import as_matrix

DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-10
BRUTE_FORCE_MAX_POINTS = 12
_PARTITION_BATCH = 4096


@dataclass(frozen=True)
class Clustering:
    """Assignment of ``num_points`` points to ``num_clusters`` non-empty clusters.

    ``assignment`` holds one 1-based label per point; every label in
    ``1..num_clusters`` must occur at least once.
    """

    num_points: int
    num_clusters: int
    assignment: tuple

    def __post_init__(self):
        m, k = self.num_points, self.num_clusters
        if m < 1 or k < 1 or k > m:
            raise ArgumentError(f"invalid clustering shape: m={m}, k={k}")
        if len(self.assignment) != m:
            raise ArgumentError("assignment must have one label per point")
        labels = np.asarray(self.assignment, dtype=int)
        if labels.min() < 1 or labels.max() > k:
            raise ContractViolationError("labels must lie in 1..num_clusters")
        if np.unique(labels).size != k:
            raise ContractViolationError("every cluster must be non-empty")

    def labels0(self) -> np.ndarray:
        """Assignment as a 0-based integer array."""
        return np.asarray(self.assignment, dtype=int) - 1

    def to_dict(self, objective_value: float) -> dict:
        return {
            "k": self.num_clusters,
            "assignment": [int(x) for x in self.assignment],
            "objective": float(objective_value),
        }


def from_labels(labels, num_clusters: int | None = None) -> Clustering:
    """Build a Clustering from an iterable of 1-based labels."""
    labels = [int(x) for x in labels]
    k = max(labels) if num_clusters is None else int(num_clusters)
    return Clustering(num_points=len(labels), num_clusters=k, assignment=tuple(labels))


def indicator(c: Clustering) -> np.ndarray:
    """Scaled cluster indicator matrix X with ``X[i, j] = 1/sqrt(s_j)``.

    X is m x k with exactly one nonzero per row and orthonormal columns.
    """
    labels = c.labels0()
    sizes = np.bincount(labels, minlength=c.num_clusters)
    x = np.zeros((c.num_points, c.num_clusters))
    x[np.arange(c.num_points), labels] = 1.0 / np.sqrt(sizes[labels])
    return x


def objective(a, c: Clustering) -> float:
    """k-means cost of clustering the rows of *a* with *c*.

    Computed as the sum of squared distances of points to their cluster
    centroids; equal to ``||a - x @ x.T @ a||_F^2`` for the indicator
    matrix ``x`` (the agreement is asserted when assertions are enabled).
    """
    a = as_matrix(a)
    if a.shape[0] != c.num_points:
        raise ArgumentError(
            f"matrix has {a.shape[0]} rows but the clustering covers {c.num_points} points"
        )
    labels = c.labels0()
    k = c.num_clusters
    sizes = np.bincount(labels, minlength=k).astype(float)
    sums = np.zeros((k, a.shape[1]))
    np.add.at(sums, labels, a)
    centroids = sums / sizes[:, None]
    value = float(np.square(a - centroids[labels]).sum())
    if __debug__:
        x = indicator(c)
        matrix_form = float(np.square(a - x @ (x.T @ a)).sum())
        assert abs(value - matrix_form) <= 1e-9 * max(1.0, value), (
            f"objective forms disagree: {value} vs {matrix_form}"
        )
    return value


def kmeanspp_init(a, k: int, seed: int) -> np.ndarray:
    """k-means++ seeding: k rows of *a*, returned as a k x n array.

    The first centroid is uniform; each later one is drawn with probability
    proportional to the squared distance to the nearest centroid so far.
    When all residual distances vanish (duplicate data), the draw falls
    back to uniform over the not-yet-chosen points, so ``k == m`` selects
    every point exactly once.
    """
    a = as_matrix(a)
    m = a.shape[0]
    if not 1 <= k <= m:
        raise ArgumentError(f"need 1 <= k <= m, got k={k}, m={m}")
    rng = np.random.default_rng(seed)
    chosen = np.empty(k, dtype=int)
    chosen[0] = rng.integers(m)
    d2 = np.square(a - a[chosen[0]]).sum(axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(m, p=d2 / total))
        else:
            remaining = np.setdiff1d(np.arange(m), chosen[:j])
            idx = int(rng.choice(remaining))
        chosen[j] = idx
        d2 = np.minimum(d2, np.square(a - a[idx]).sum(axis=1))
    return a[chosen].copy()


def _assign(a: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # squared distances m x k; argmin breaks ties toward the smallest index
    d2 = (
        np.square(a).sum(axis=1)[:, None]
        - 2.0 * a @ centroids.T
        + np.square(centroids).sum(axis=1)[None, :]
    )
    return d2.argmin(axis=1), d2


def _repair_empty(labels: np.ndarray, d2: np.ndarray, k: int) -> np.ndarray:
    sizes = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(sizes == 0):
        donors = np.flatnonzero(sizes[labels] >= 2)
        own_dist = d2[donors, labels[donors]]
        moved = donors[int(own_dist.argmax())]
        sizes[labels[moved]] -= 1
        labels[moved] = j
        sizes[j] = 1
    return labels


def lloyd(
    a,
    k: int,
    init: np.ndarray | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    seed: int | None = None,
) -> Clustering:
    """Lloyd refinement from *init* centroids (k-means++ seeded if omitted).

    Alternates assignment and centroid steps until the objective decrease
    drops below *tol* or *max_iter* is reached.  The objective is
    non-increasing across iterations; clusters emptied by an assignment
    step are repaired by reseeding them with the point farthest from its
    current centroid (taken from a cluster of size at least two).
    """
    a = as_matrix(a)
    m = a.shape[0]
    if not 1 <= k <= m:
        raise ArgumentError(f"need 1 <= k <= m, got k={k}, m={m}")
    if init is None:
        centroids = kmeanspp_init(a, k, 0 if seed is None else seed)
    else:
        centroids = np.asarray(init, dtype=float).copy()
        if centroids.shape != (k, a.shape[1]):
            raise ArgumentError(
                f"init must be a {k}x{a.shape[1]} array, got {centroids.shape}"
            )
    prev_obj = np.inf
    prev_labels = None
    labels = None
    for _ in range(max_iter):
        labels, d2 = _assign(a, centroids)
        labels = _repair_empty(labels, d2, k)
        sizes = np.bincount(labels, minlength=k).astype(float)
        sums = np.zeros((k, a.shape[1]))
        np.add.at(sums, labels, a)
        centroids = sums / sizes[:, None]
        obj = float(np.square(a - centroids[labels]).sum())
        assert obj <= prev_obj + 1e-9 * max(1.0, prev_obj if np.isfinite(prev_obj) else 1.0), (
            f"objective increased: {prev_obj} -> {obj}"
        )
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        if np.isfinite(prev_obj) and prev_obj - obj < tol:
            break
        prev_obj = obj
        prev_labels = labels
    return Clustering(m, k, tuple(int(x) + 1 for x in labels))


def lloyd_best(
    a,
    k: int,
    restarts: int = 20,
    seed: int | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> Clustering:
    """Best of *restarts* seeded k-means++/Lloyd runs (ties keep the earliest)."""
    a = as_matrix(a)
    if restarts < 1:
        raise ArgumentError(f"need at least one restart, got {restarts}")
    base = 0 if seed is None else seed
    best = None
    best_obj = np.inf
    for t in range(restarts):
        c = lloyd(a, k, init=None, max_iter=max_iter, tol=tol, seed=base + t)
        obj = objective(a, c)
        if obj < best_obj:
            best, best_obj = c, obj
    return best


def _partition_batches(m: int, k: int):
    """Yield all assignments of m items into exactly k non-empty blocks.

    Produces (batch, m) arrays of 0-based labels in restricted-growth
    order, streamed in bounded batches so the Stirling-sized enumeration
    never lives in memory at once.
    """
    labels = np.zeros(m, dtype=np.int64)
    buffer: list[np.ndarray] = []
    # depth-first frames: [position, blocks used so far, next label to try]
    frames = [[0, 0, 0]]
    while frames:
        i, used, lab = frames[-1]
        if i == m:
            if used == k:
                buffer.append(labels.copy())
                if len(buffer) >= _PARTITION_BATCH:
                    yield np.vstack(buffer)
                    buffer.clear()
            frames.pop()
            continue
        if used + (m - i) < k or lab > min(used, k - 1):
            frames.pop()
            continue
        frames[-1][2] += 1
        labels[i] = lab
        frames.append([i + 1, used + 1 if lab == used else used, 0])
    if buffer:
        yield np.vstack(buffer)


def _batch_objectives(a: np.ndarray, label_batch: np.ndarray, k: int, total_sq: float) -> np.ndarray:
    onehot = (label_batch[:, :, None] == np.arange(k)).astype(float)
    counts = onehot.sum(axis=1)
    sums = np.einsum("pmk,mn->pkn", onehot, a)
    return total_sq - (np.square(sums).sum(axis=2) / counts).sum(axis=1)


def brute_force_optimal(a, k: int) -> Clustering:
    """Globally optimal clustering by exhaustive search over all k-partitions.

    Guarded to at most 12 points; the count of partitions grows as a
    Stirling number.  Ties keep the first partition in enumeration order.
    """
    a = as_matrix(a)
    m = a.shape[0]
    if not 1 <= k <= m:
        raise ArgumentError(f"need 1 <= k <= m, got k={k}, m={m}")
    if m > BRUTE_FORCE_MAX_POINTS:
        raise ResourceLimitError(
            f"exhaustive search is limited to {BRUTE_FORCE_MAX_POINTS} points, got {m}"
        )
    total_sq = float(np.square(a).sum())
    best_labels = None
    best_obj = np.inf
    for batch in _partition_batches(m, k):
        objs = _batch_objectives(a, batch, k, total_sq)
        j = int(objs.argmin())
        if objs[j] < best_obj:
            best_obj = float(objs[j])
            best_labels = batch[j]
    return Clustering(m, k, tuple(int(x) + 1 for x in best_labels))
