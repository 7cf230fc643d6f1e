"""Distance-weighted k-nearest-neighbour voting with an optional KD-tree index."""
from __future__ import annotations

import heapq

import numpy as np

from ..errors import DimensionMismatch, EmptyTrain, KTooLarge

# above this dimensionality a KD-tree prunes almost nothing
KD_TREE_MAX_DIM = 16


def minkowski(X, x, p=2.0):
    diff = np.abs(X - x)
    if p == 2:
        return np.sqrt((diff * diff).sum(axis=-1))
    if p == 1:
        return diff.sum(axis=-1)
    return (diff ** p).sum(axis=-1) ** (1.0 / p)


def weighted_vote(dist, labels) -> tuple[int, float]:
    """Inverse-distance vote; returns (label, share of weight for class 1).

    Neighbours at distance zero win outright and vote by count among
    themselves. Ties resolve to 0.
    """
    dist = np.asarray(dist, dtype=float)
    labels = np.asarray(labels)
    zero = dist == 0
    if zero.any():
        ones = int(np.count_nonzero(labels[zero] == 1))
        zeros = int(np.count_nonzero(zero)) - ones
        share = ones / (ones + zeros)
        return int(ones > zeros), share
    w = 1.0 / dist
    w1 = float(w[labels == 1].sum())
    w0 = float(w[labels == 0].sum())
    return int(w1 > w0), w1 / (w0 + w1)


class KDTree:
    """Exact k-nearest-neighbour index; leaves hold at most ``leaf_size`` points.

    Neighbours are ordered by (distance, training index) so results match an
    exhaustive scan exactly, including ties.
    """

    def __init__(self, X, leaf_size=30, p=2.0):
        self.X = np.asarray(X, dtype=float)
        self.leaf_size = int(leaf_size)
        self.p = p
        # node: [lo_bounds, hi_bounds, idx or None, left, right]
        self.nodes = []
        self._build(np.arange(len(self.X)))

    def _build(self, idx):
        pts = self.X[idx]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        node_id = len(self.nodes)
        self.nodes.append([lo, hi, None, -1, -1])
        spread = hi - lo
        dim = int(np.argmax(spread))
        if len(idx) <= self.leaf_size or spread[dim] == 0:
            self.nodes[node_id][2] = idx
            return node_id
        order = np.argsort(pts[:, dim], kind="stable")
        half = len(idx) // 2
        left = self._build(idx[order[:half]])
        right = self._build(idx[order[half:]])
        self.nodes[node_id][3] = left
        self.nodes[node_id][4] = right
        return node_id

    def _bound(self, node, x):
        lo, hi = node[0], node[1]
        gap = np.maximum(lo - x, 0.0) + np.maximum(x - hi, 0.0)
        return minkowski(gap[None, :], np.zeros_like(x), self.p)[0]

    def query(self, x, k):
        """Indices and distances of the k nearest points, nearest first."""
        x = np.asarray(x, dtype=float)
        heap = []  # max-heap on (dist, idx) via negation

        def worst():
            return (-heap[0][0], -heap[0][1])

        todo = [(self._bound(self.nodes[0], x), 0)]
        while todo:
            bound, nid = heapq.heappop(todo)
            if len(heap) == k and bound > worst()[0]:
                break
            node = self.nodes[nid]
            if node[2] is not None:
                idx = node[2]
                dist = minkowski(self.X[idx], x, self.p)
                for d, i in zip(dist.tolist(), idx.tolist()):
                    if len(heap) < k:
                        heapq.heappush(heap, (-d, -i))
                    elif (d, i) < worst():
                        heapq.heapreplace(heap, (-d, -i))
                continue
            for child in (node[3], node[4]):
                heapq.heappush(todo, (self._bound(self.nodes[child], x), child))
        found = sorted((-d, -i) for d, i in heap)
        return np.array([i for _, i in found]), np.array([d for d, _ in found])


class KnnModel:
    """Lazy learner: stores the training set, votes at prediction time."""

    kind = "knn"

    def __init__(self, k=5, p=2.0, leaf_size=30, algorithm="auto"):
        if algorithm not in ("auto", "brute", "kd_tree"):
            raise ValueError(f"unknown algorithm {algorithm!r}")
        self.k = int(k)
        self.p = p
        self.leaf_size = int(leaf_size)
        self.algorithm = algorithm
        self.X = None
        self.y = None
        self._index = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) == 0:
            raise EmptyTrain("kNN needs at least one training sample")
        if self.k < 1 or self.k > len(X):
            raise KTooLarge(f"k={self.k} but only {len(X)} training samples")
        self.X = X.copy()
        self.y = y.copy()
        self.X.setflags(write=False)
        self.y.setflags(write=False)
        self._index = None
        if self.uses_index:
            self._index = KDTree(self.X, self.leaf_size, self.p)
        return self

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def uses_index(self):
        if self.algorithm == "auto":
            return self.X.shape[1] <= KD_TREE_MAX_DIM and len(self.X) > self.leaf_size
        return self.algorithm == "kd_tree"

    def kneighbors(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise DimensionMismatch(f"expected {self.n_features} features, got {x.shape}")
        if self._index is not None:
            return self._index.query(x, self.k)
        return brute_kneighbors(self.X, x, self.k, self.p)

    def predict(self, X):
        """Labels and class-1 vote shares for each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        labels = np.empty(len(X), dtype=np.int64)
        scores = np.empty(len(X))
        for r, x in enumerate(X):
            idx, dist = self.kneighbors(x)
            labels[r], scores[r] = weighted_vote(dist, self.y[idx])
        return labels, scores

    def payload(self):
        return {
            "k": self.k,
            "p": self.p,
            "leaf_size": self.leaf_size,
            "algorithm": self.algorithm,
            "X": self.X.tolist(),
            "y": self.y.tolist(),
        }

    @classmethod
    def from_payload(cls, d):
        model = cls(d["k"], d["p"], d["leaf_size"], d["algorithm"])
        return model.fit(np.asarray(d["X"], dtype=float), np.asarray(d["y"], dtype=np.int64))


def brute_kneighbors(X, x, k, p=2.0):
    dist = minkowski(X, x, p)
    order = np.lexsort((np.arange(len(X)), dist))[:k]
    return order, dist[order]
