"""Gradient-boosted trees on the logistic loss with Newton leaf weights."""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import DimensionMismatch, EmptyTrain, SingleClass
from .tree import CartTree, Newton, Presorted, grow_tree_presorted


def log_loss(y, score) -> np.ndarray:
    """Per-sample logistic loss of raw scores: log(1 + e^F) - y F."""
    y = np.asarray(y, dtype=float)
    score = np.asarray(score, dtype=float)
    return np.logaddexp(0.0, score) - y * score


def gradient_hessian(y, score):
    """First and second derivative of the logistic loss w.r.t. the score."""
    p = expit(score)
    return p - np.asarray(y, dtype=float), p * (1.0 - p)


def squared_error_residual(y, score):
    """Negative gradient of (y - F)^2 / 2, i.e. the plain residual."""
    return np.asarray(y, dtype=float) - np.asarray(score, dtype=float)


class GbtModel:
    kind = "gbt"

    def __init__(self, rounds=100, eta=0.3, max_depth=6, lam=1.0, alpha=0.0, gamma=0.0):
        self.rounds = int(rounds)
        self.eta = float(eta)
        self.max_depth = int(max_depth)
        self.lam = float(lam)
        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.base_score = 0.0
        self.trees: list[CartTree] = []
        self.n_features = None
        self.train_loss: list[float] = []

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) == 0:
            raise EmptyTrain("boosting needs at least one training sample")
        pos = int(y.sum())
        neg = len(y) - pos
        if pos == 0 or neg == 0:
            raise SingleClass("both classes must be present to boost")
        self.n_features = X.shape[1]
        self.base_score = float(np.log(pos / neg))
        crit = Newton(self.lam, self.alpha, self.gamma)

        pre = Presorted(X)
        score = np.full(len(y), self.base_score)
        self.trees = []
        self.train_loss = [float(log_loss(y, score).mean())]
        for _ in range(self.rounds):
            g, h = gradient_hessian(y, score)
            tree = grow_tree_presorted(pre, crit.stats(g, h), crit, self.max_depth, min_split=2)
            self.trees.append(tree)
            score = score + self.eta * tree.predict_value(X)[:, 0]
            self.train_loss.append(float(log_loss(y, score).mean()))
        return self

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict_value(X)[:, 0]
        return self.base_score + self.eta * total

    def predict(self, X):
        """Labels (1 iff probability > 0.5) and probabilities."""
        prob = expit(self.decision_function(X))
        return (prob > 0.5).astype(np.int64), prob

    def payload(self):
        return {
            "rounds": self.rounds,
            "eta": self.eta,
            "max_depth": self.max_depth,
            "lambda": self.lam,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "base_score": self.base_score,
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_payload(cls, d):
        model = cls(d["rounds"], d["eta"], d["max_depth"], d["lambda"], d["alpha"], d["gamma"])
        model.base_score = d["base_score"]
        model.n_features = d["n_features"]
        model.trees = [CartTree.from_dict(t) for t in d["trees"]]
        return model
