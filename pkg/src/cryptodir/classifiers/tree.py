"""Binary decision trees grown by exhaustive best-split search.

One grower serves three criteria. Each criterion maps two per-sample
statistics (a, b) to a node score such that the improvement of a split is
``score(left) + score(right) - score(parent)`` on summed statistics:

* gini      (a, b) = class-0 / class-1 indicators, score = (A^2 + B^2) / (A + B)
* variance  (a, b) = (1, y),                       score = B^2 / A
* newton    (a, b) = (g, h),                       score = T(A)^2 / (2 (B + lambda)),
            T the L1 soft-threshold; the leaf weight is -T(A) / (B + lambda)

Subtracting the parent's score turns the first two into the usual weighted
impurity decrease; the third is the second-order boosting gain.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyTrain
from . import _kernels

LEAF = -1
_CHUNK_ELEMS = 4_000_000


class Gini:
    name = "gini"
    code = _kernels.GINI
    lam = alpha = 0.0
    min_gain = None  # any valid split is accepted, even a zero decrease

    def stats(self, y, **_):
        y = np.asarray(y, dtype=np.int64)
        return np.column_stack([(y == 0).astype(float), (y == 1).astype(float)])

    def score(self, a, b):
        # both children of a valid split are nonempty, so a + b > 0
        return (a * a + b * b) / (a + b)

    def leaf_value(self, total):
        return total.copy()

    def is_pure(self, total):
        return np.count_nonzero(total) <= 1


class Variance:
    name = "variance"
    code = _kernels.VARIANCE
    lam = alpha = 0.0
    min_gain = None

    def stats(self, y, **_):
        y = np.asarray(y, dtype=float)
        return np.column_stack([np.ones(len(y)), y])

    def score(self, a, b):
        return b * b / a

    def leaf_value(self, total):
        return np.array([total[1] / total[0]])

    def is_pure(self, total):
        return False


class Newton:
    """Second-order gain with L2 (``lam``), L1 (``alpha``) and split penalty ``gamma``."""

    name = "newton"
    code = _kernels.NEWTON

    def __init__(self, lam=1.0, alpha=0.0, gamma=0.0):
        self.lam = float(lam)
        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.min_gain = 0.0

    def stats(self, grad, hess=None, **_):
        return np.column_stack([np.asarray(grad, float), np.asarray(hess, float)])

    def _threshold(self, g):
        if self.alpha == 0:
            return g
        return np.sign(g) * np.maximum(np.abs(g) - self.alpha, 0.0)

    def score(self, a, b):
        g = self._threshold(a)
        return 0.5 * g * g / (b + self.lam)

    def split_gain(self, improvement):
        return improvement - self.gamma

    def leaf_value(self, total):
        return np.array([-self._threshold(total[0]) / (total[1] + self.lam)])

    def is_pure(self, total):
        return False


CRITERIA = {"gini": Gini, "variance": Variance}


@dataclass
class CartTree:
    """Flat-array tree. ``feature[i] == -1`` marks a leaf; ``x <= threshold`` goes left."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    criterion: str

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        node = np.zeros(len(X), dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict_value(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def predict_class(self, X) -> np.ndarray:
        """Majority class per leaf; a tied leaf votes 0."""
        counts = self.predict_value(X)
        return (counts[:, 1] > counts[:, 0]).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> CartTree:
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=float),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=float).reshape(len(d["feature"]), -1),
            d["criterion"],
        )


def _midpoint(lo, hi):
    mid = lo + (hi - lo) / 2.0
    return mid if lo <= mid < hi else lo


def _scan(xs, sa, sb, criterion):
    """Best split over rows of feature-major sorted values ``xs`` with stats ``sa``, ``sb``.

    Returns (improvement, row, threshold) or None if every row is constant.
    """
    ta, tb = np.cumsum(sa[0])[-1], np.cumsum(sb[0])[-1]
    parent = criterion.score(ta, tb)
    la = np.cumsum(sa[:, :-1], axis=1)
    lb = np.cumsum(sb[:, :-1], axis=1)
    imp = criterion.score(la, lb)
    imp += criterion.score(ta - la, tb - lb)
    imp -= parent
    imp[xs[:, 1:] <= xs[:, :-1]] = -np.inf
    pos = np.argmax(imp, axis=1)
    col_best = imp[np.arange(len(imp)), pos]
    j = int(np.argmax(col_best))
    if not np.isfinite(col_best[j]):
        return None
    p = pos[j]
    return float(col_best[j]), j, _midpoint(xs[j, p], xs[j, p + 1])


def _chunk_size(n):
    return max(1, _CHUNK_ELEMS // max(1, n))


def best_split(X, S, idx, features, criterion):
    """Best (improvement, feature, threshold) over ``features`` at the node ``idx``.

    ``features`` must be sorted ascending; among equal improvements the lowest
    feature index wins, then the lowest threshold. Returns None when every
    candidate feature is constant on the node.
    """
    a, b = S[idx, 0], S[idx, 1]
    chunk = _chunk_size(len(idx))
    best = None
    for start in range(0, len(features), chunk):
        feats = features[start:start + chunk]
        xn = X[np.ix_(idx, feats)].T
        order = np.argsort(xn, axis=1, kind="stable")
        xs = np.take_along_axis(xn, order, axis=1)
        found = _scan(xs, a[order], b[order], criterion)
        if found is not None and (best is None or found[0] > best[0]):
            best = (found[0], int(feats[found[1]]), found[2])
    return best


def grow_tree(
    X,
    S,
    criterion,
    max_depth=None,
    min_split=2,
    feature_subset_size=None,
    rng=None,
    sample_idx=None,
) -> CartTree:
    """Depth-first greedy growth on per-sample statistics ``S``."""
    X = np.asarray(X, dtype=float)
    n_features = X.shape[1]
    if sample_idx is None:
        sample_idx = np.arange(len(X))
    if len(sample_idx) == 0:
        raise EmptyTrain("cannot grow a tree on zero samples")
    m = n_features if feature_subset_size is None else min(int(feature_subset_size), n_features)
    if m < 1:
        raise ValueError("feature_subset_size must be >= 1")
    if m < n_features and rng is None:
        raise ValueError("feature subsetting needs an rng")
    all_features = np.arange(n_features)

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(criterion.leaf_value(S[idx].sum(axis=0)))
        return len(feature) - 1

    root = new_node(sample_idx)
    stack = [(root, sample_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        if len(idx) < min_split or (max_depth is not None and depth >= max_depth):
            continue
        if criterion.is_pure(S[idx].sum(axis=0)):
            continue

        if m < n_features:
            feats = np.sort(rng.choice(n_features, size=m, replace=False))
            found = best_split(X, S, idx, feats, criterion)
            if found is None:
                # every drawn feature is flat here; fall back to the rest
                rest = np.setdiff1d(all_features, feats)
                found = best_split(X, S, idx, rest, criterion)
        else:
            found = best_split(X, S, idx, all_features, criterion)
        if found is None:
            continue
        gain, f, thr = found
        if criterion.min_gain is not None:
            if criterion.split_gain(gain) <= criterion.min_gain:
                continue

        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # right pushed first so the left subtree is expanded first
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return CartTree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.vstack(value),
        criterion.name,
    )


class Presorted:
    """Column-wise stable sort of a training matrix, reusable across many trees."""

    def __init__(self, X):
        self.X = np.asarray(X, dtype=float)
        Xt = np.ascontiguousarray(self.X.T)
        self.order = np.argsort(Xt, axis=1, kind="stable").astype(np.int32)
        self.values = np.take_along_axis(Xt, self.order, axis=1)


def _node_split_numpy(order, xs, sa, sb, criterion):
    d, n = order.shape
    found = None
    chunk = _chunk_size(n)
    for start in range(0, d, chunk):
        rows = order[start:start + chunk]
        hit = _scan(xs[start:start + chunk], sa[rows], sb[rows], criterion)
        if hit is not None and (found is None or hit[0] > found[0]):
            found = (hit[0], start + hit[1], hit[2])
    return found


def _node_split_compiled(order, xs, sa, sb, criterion):
    gain, f, p = _kernels.scan(order, xs, sa, sb, criterion.code, criterion.lam, criterion.alpha)
    if f < 0:
        return None
    return float(gain), int(f), _midpoint(xs[f, p], xs[f, p + 1])


def _partition_numpy(order, xs, go_left, n_left):
    d, n = order.shape
    mask = go_left[order]
    lo = (order[mask].reshape(d, n_left), xs[mask].reshape(d, n_left))
    mask = ~mask
    return lo + (order[mask].reshape(d, n - n_left), xs[mask].reshape(d, n - n_left))


def grow_tree_presorted(pre: Presorted, S, criterion, max_depth=None, min_split=2,
                        compiled=None) -> CartTree:
    """Same trees as ``grow_tree`` over all features, without re-sorting per node.

    Each node keeps, per feature, its sample ids and values in sorted order;
    children inherit a stable filter of both.
    """
    X = pre.X
    if compiled is None:
        compiled = _kernels.AVAILABLE
    node_split = _node_split_compiled if compiled else _node_split_numpy
    partition = _kernels.partition if compiled else _partition_numpy
    sa, sb = np.ascontiguousarray(S[:, 0]), np.ascontiguousarray(S[:, 1])
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(ids):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        # sum in index order so leaf values match grow_tree bit for bit
        value.append(criterion.leaf_value(S[np.sort(ids)].sum(axis=0)))
        return len(feature) - 1

    go_left = np.zeros(len(X), dtype=bool)
    root = new_node(pre.order[0])
    stack = [(root, pre.order, pre.values, 0)]
    while stack:
        node, order, xs, depth = stack.pop()
        d, n = order.shape
        ids = order[0]
        if n < min_split or (max_depth is not None and depth >= max_depth):
            continue
        if criterion.is_pure(S[ids].sum(axis=0)):
            continue

        found = node_split(order, xs, sa, sb, criterion)
        if found is None:
            continue
        gain, f, thr = found
        if criterion.min_gain is not None and criterion.split_gain(gain) <= criterion.min_gain:
            continue

        go_left[ids] = X[ids, f] <= thr
        n_left = int(np.count_nonzero(go_left[ids]))
        lo_o, lo_x, hi_o, hi_x = partition(order, xs, go_left, n_left)
        lo, hi = (lo_o, lo_x), (hi_o, hi_x)
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(lo[0][0])
        right[node] = new_node(hi[0][0])
        stack.append((right[node], *hi, depth + 1))
        stack.append((left[node], *lo, depth + 1))

    return CartTree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.vstack(value),
        criterion.name,
    )


def cart_fit(
    X,
    y,
    criterion: str = "gini",
    max_depth=None,
    min_split: int = 2,
    feature_subset_size=None,
    rng=None,
    sample_idx=None,
) -> CartTree:
    """Fit a classification (gini) or regression (variance) tree."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise EmptyTrain("training matrix is empty")
    crit = CRITERIA[criterion]()
    S = crit.stats(y)
    return grow_tree(X, S, crit, max_depth, min_split, feature_subset_size, rng, sample_idx)
