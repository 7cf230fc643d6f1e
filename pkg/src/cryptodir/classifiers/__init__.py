"""Direction classifiers: kNN, random forest and gradient-boosted trees.

The array-level models live in the submodules; the functions here take
``Sample`` lists and ``Hyperparams`` and return fitted models.
"""
from __future__ import annotations

import json

import numpy as np

from ..dataset import COLUMNS, Sample, stack
from ..errors import Empty, EmptyTrain, LengthMismatch, ModelFormatError
from .boosting import GbtModel
from .forest import ForestModel
from .knn import KnnModel
from .params import Hyperparams
from .tree import CartTree
from .tree import cart_fit as _cart_fit_arrays

FORMAT_VERSION = 1
MODEL_KINDS = {"knn": KnnModel, "rf": ForestModel, "gbt": GbtModel}

__all__ = [
    "CartTree",
    "ForestModel",
    "GbtModel",
    "Hyperparams",
    "KnnModel",
    "accuracy",
    "cart_fit",
    "fit_model",
    "gbt_fit",
    "gbt_predict",
    "knn_fit",
    "knn_predict",
    "load_model",
    "model_from_json",
    "model_to_json",
    "rf_fit",
    "rf_predict",
    "save_model",
]


def _arrays(train):
    if isinstance(train, tuple):
        X, y = train
        return np.asarray(X, dtype=float), np.asarray(y, dtype=np.int64)
    if not train:
        raise EmptyTrain("training set is empty")
    return stack(train)


def _row(x):
    if isinstance(x, Sample):
        return x.features
    return np.asarray(x, dtype=float)


def knn_fit(train, hp: Hyperparams = Hyperparams()) -> KnnModel:
    X, y = _arrays(train)
    return KnnModel(hp.knn_k, hp.knn_minkowski_p, hp.knn_leaf_size, hp.knn_algorithm).fit(X, y)


def knn_predict(model: KnnModel, x) -> tuple[int, float]:
    labels, scores = model.predict(_row(x)[None, :])
    return int(labels[0]), float(scores[0])


def cart_fit(train, criterion="gini", max_depth=None, min_split=2,
             feature_subset_size=None, rng=None) -> CartTree:
    X, y = _arrays(train)
    return _cart_fit_arrays(X, y, criterion, max_depth, min_split, feature_subset_size, rng)


def rf_fit(train, hp: Hyperparams = Hyperparams()) -> ForestModel:
    X, y = _arrays(train)
    model = ForestModel(hp.rf_trees, hp.rf_max_depth, hp.rf_min_split, "sqrt", hp.rf_bootstrap, hp.seed)
    return model.fit(X, y)


def rf_predict(model: ForestModel, x) -> tuple[int, float]:
    labels, mean_vote = model.predict(_row(x)[None, :])
    return int(labels[0]), float(mean_vote[0])


def gbt_fit(train, hp: Hyperparams = Hyperparams()) -> GbtModel:
    X, y = _arrays(train)
    model = GbtModel(hp.gbt_rounds, hp.gbt_eta, hp.gbt_max_depth, hp.gbt_lambda, hp.gbt_alpha, hp.gbt_gamma)
    return model.fit(X, y)


def gbt_predict(model: GbtModel, x) -> tuple[int, float]:
    labels, prob = model.predict(_row(x)[None, :])
    return int(labels[0]), float(prob[0])


FITTERS = {"knn": knn_fit, "rf": rf_fit, "gbt": gbt_fit}


def fit_model(kind: str, train, hp: Hyperparams = Hyperparams()):
    try:
        return FITTERS[kind](train, hp)
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r}; choose from {sorted(FITTERS)}") from None


def accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape} predictions vs {truth.shape} labels")
    if pred.size == 0:
        raise Empty("accuracy of zero predictions is undefined")
    return float(np.count_nonzero(pred == truth)) / pred.size


# -- persistence ---------------------------------------------------------------


def model_to_json(model, hp: Hyperparams | None = None, scaling=None, columns=COLUMNS,
                  config_hash: str | None = None) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "hyperparams": hp.to_dict() if hp is not None else None,
        "scaling": scaling,
        "columns": list(columns),
        "config_hash": config_hash,
        "payload": model.payload(),
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def model_from_json(text: str):
    """Returns (model, document) so callers can read the metadata."""
    doc = json.loads(text)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format {doc.get('format_version')!r}")
    try:
        cls = MODEL_KINDS[doc["kind"]]
    except KeyError:
        raise ModelFormatError(f"unknown model kind {doc.get('kind')!r}") from None
    return cls.from_payload(doc["payload"]), doc


def save_model(path, model, **meta):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model, **meta))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_json(fh.read())
