"""Compiled inner loops for presorted split search (numba, when available)."""
from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

GINI, VARIANCE, NEWTON = 0, 1, 2


def _score(kind, a, b, lam, alpha):
    if kind == GINI:
        return (a * a + b * b) / (a + b)
    if kind == VARIANCE:
        return b * b / a
    if alpha != 0.0:
        mag = abs(a) - alpha
        if mag < 0.0:
            mag = 0.0
        a = mag if a > 0 else (-mag if a < 0 else 0.0)
    return 0.5 * a * a / (b + lam)


def _scan(order, xs, sa, sb, kind, lam, alpha):
    d, n = order.shape
    ta = 0.0
    tb = 0.0
    for i in range(n):
        ta += sa[order[0, i]]
        tb += sb[order[0, i]]
    parent = _score(kind, ta, tb, lam, alpha)
    best = -np.inf
    best_f = -1
    best_p = -1
    for f in range(d):
        la = 0.0
        lb = 0.0
        for i in range(n - 1):
            r = order[f, i]
            la += sa[r]
            lb += sb[r]
            if xs[f, i + 1] > xs[f, i]:
                gain = (_score(kind, la, lb, lam, alpha)
                        + _score(kind, ta - la, tb - lb, lam, alpha)) - parent
                if gain > best:
                    best = gain
                    best_f = f
                    best_p = i
    return best, best_f, best_p


def _partition(order, xs, go_left, n_left):
    d, n = order.shape
    lo_o = np.empty((d, n_left), dtype=order.dtype)
    lo_x = np.empty((d, n_left), dtype=xs.dtype)
    hi_o = np.empty((d, n - n_left), dtype=order.dtype)
    hi_x = np.empty((d, n - n_left), dtype=xs.dtype)
    for f in range(d):
        a = 0
        b = 0
        for i in range(n):
            r = order[f, i]
            if go_left[r]:
                lo_o[f, a] = r
                lo_x[f, a] = xs[f, i]
                a += 1
            else:
                hi_o[f, b] = r
                hi_x[f, b] = xs[f, i]
                b += 1
    return lo_o, lo_x, hi_o, hi_x


if njit is not None:
    _score = njit(cache=True)(_score)
    scan = njit(cache=True)(_scan)
    partition = njit(cache=True)(_partition)
    AVAILABLE = True
else:
    scan = partition = None
    AVAILABLE = False
