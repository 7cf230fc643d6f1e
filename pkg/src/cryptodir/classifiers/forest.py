"""Bagged gini trees with per-node random feature subsets."""
from __future__ import annotations

import math

import numpy as np

from ..errors import DimensionMismatch, EmptyTrain
from .tree import CartTree, Gini, grow_tree


def tree_rng(seed: int, b: int) -> np.random.Generator:
    """Generator driving feature subsets of tree ``b``."""
    return np.random.default_rng([seed, b])


def bootstrap_rng(seed: int, b: int) -> np.random.Generator:
    return np.random.default_rng([seed, b, 1])


def bootstrap_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.sort(rng.integers(0, n, size=n))


class ForestModel:
    kind = "rf"

    def __init__(self, n_trees=700, max_depth=None, min_split=2, max_features="sqrt",
                 bootstrap=True, seed=0):
        self.n_trees = int(n_trees)
        self.max_depth = max_depth
        self.min_split = int(min_split)
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = int(seed)
        self.trees: list[CartTree] = []
        self.n_features = None

    def _subset_size(self, d):
        if self.max_features == "sqrt":
            return max(1, math.isqrt(d))
        if self.max_features is None:
            return d
        return int(self.max_features)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) == 0:
            raise EmptyTrain("forest needs at least one training sample")
        n, d = X.shape
        self.n_features = d
        crit = Gini()
        S = crit.stats(y)
        m = self._subset_size(d)
        self.trees = []
        for b in range(self.n_trees):
            idx = bootstrap_indices(n, bootstrap_rng(self.seed, b)) if self.bootstrap else np.arange(n)
            tree = grow_tree(X, S, crit, self.max_depth, self.min_split, m, tree_rng(self.seed, b), idx)
            self.trees.append(tree)
        return self

    def votes(self, X) -> np.ndarray:
        """(n_rows, n_trees) matrix of per-tree class votes."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        return np.column_stack([t.predict_class(X) for t in self.trees])

    def predict(self, X):
        """Majority labels (ties vote 0) and the mean vote (1/B) sum f_b(x)."""
        v = self.votes(X)
        mean_vote = v.mean(axis=1)
        ones = v.sum(axis=1)
        labels = (2 * ones > v.shape[1]).astype(np.int64)
        return labels, mean_vote

    def payload(self):
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_split": self.min_split,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_payload(cls, d):
        model = cls(d["n_trees"], d["max_depth"], d["min_split"], d["max_features"],
                    d["bootstrap"], d["seed"])
        model.n_features = d["n_features"]
        model.trees = [CartTree.from_dict(t) for t in d["trees"]]
        return model
