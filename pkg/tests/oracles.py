"""Slow reference implementations written with plain loops.

These share no code with the package; they restate each formula directly so
the vectorized implementations can be checked against them.
"""
import math


def nan():
    return float("nan")


def typical(h, l, c):
    return [(h[i] + l[i] + c[i]) / 3.0 for i in range(len(h))]


def sma(x, p):
    out = [nan()] * len(x)
    for i in range(p - 1, len(x)):
        s = 0.0
        for j in range(i - p + 1, i + 1):
            s += x[j]
        out[i] = s / p
    return out


def ema(x, p):
    out = [nan()] * len(x)
    if len(x) < p:
        return out
    a = 2.0 / (p + 1)
    prev = sum(x[:p]) / p
    out[p - 1] = prev
    for i in range(p, len(x)):
        prev = a * x[i] + (1 - a) * prev
        out[i] = prev
    return out


def cci(h, l, c, p):
    tp = typical(h, l, c)
    out = [nan()] * len(tp)
    for i in range(p - 1, len(tp)):
        w = tp[i - p + 1:i + 1]
        ma = sum(w) / p
        md = sum(abs(v - ma) for v in w) / p
        if max(w) == min(w):
            out[i] = 0.0
        else:
            out[i] = (tp[i] - ma) / (0.015 * md)
    return out


def rsi(c, p):
    out = [nan()] * len(c)
    gains = [max(c[i] - c[i - 1], 0.0) for i in range(1, len(c))]
    losses = [max(c[i - 1] - c[i], 0.0) for i in range(1, len(c))]

    def value(g, l):
        if l == 0:
            return 100.0
        if g == 0:
            return 0.0
        return 100.0 - 100.0 / (1.0 + g / l)

    g = sum(gains[:p]) / p
    l = sum(losses[:p]) / p
    out[p] = value(g, l)
    for i in range(p + 1, len(c)):
        g = (g * (p - 1) + gains[i - 1]) / p
        l = (l * (p - 1) + losses[i - 1]) / p
        out[i] = value(g, l)
    return out


def dmi(h, l, c, p):
    n = len(h)
    pdm, mdm, tr = [0.0] * n, [0.0] * n, [0.0] * n
    for i in range(1, n):
        up = h[i] - h[i - 1]
        down = l[i - 1] - l[i]
        pdm[i] = up if (up > down and up > 0) else 0.0
        mdm[i] = down if (down > up and down > 0) else 0.0
        tr[i] = max(h[i] - l[i], abs(h[i] - c[i - 1]), abs(l[i] - c[i - 1]))
    dip, dim, dx = [nan()] * n, [nan()] * n, [nan()] * n
    sp = sm = st = 0.0
    for i in range(1, n):
        if i <= p:
            sp += pdm[i]
            sm += mdm[i]
            st += tr[i]
        else:
            sp = sp - sp / p + pdm[i]
            sm = sm - sm / p + mdm[i]
            st = st - st / p + tr[i]
        if i >= p:
            a = 100.0 * sp / st if st > 0 else 0.0
            b = 100.0 * sm / st if st > 0 else 0.0
            dip[i], dim[i] = a, b
            dx[i] = 100.0 * abs(a - b) / (a + b) if a + b > 0 else 0.0
    return dip, dim, dx


def bollinger(h, l, c, n, m):
    tp = typical(h, l, c)
    up, lo, mid = [nan()] * len(tp), [nan()] * len(tp), [nan()] * len(tp)
    for i in range(n - 1, len(tp)):
        w = tp[i - n + 1:i + 1]
        ma = sum(w) / n
        sd = 0.0 if max(w) == min(w) else math.sqrt(sum((v - ma) ** 2 for v in w) / n)
        up[i] = ma + m * sd
        lo[i] = ma - m * sd
        mid[i] = (up[i] + lo[i]) / 2
    return mid, up, lo


def knn_vote(X, y, x, k):
    """Sort every training point by (distance, index) and re-vote."""
    dists = []
    for i, row in enumerate(X):
        d = math.sqrt(sum((a - b) ** 2 for a, b in zip(row, x)))
        dists.append((d, i))
    dists.sort()
    near = dists[:k]
    zero = [i for d, i in near if d == 0]
    if zero:
        ones = sum(1 for i in zero if y[i] == 1)
        return 1 if ones > len(zero) - ones else 0
    w1 = sum(1 / d for d, i in near if y[i] == 1)
    w0 = sum(1 / d for d, i in near if y[i] == 0)
    return 1 if w1 > w0 else 0


def gini_impurity_total(labels_groups):
    """Sum over groups of n_g * gini_g."""
    total = 0.0
    for g in labels_groups:
        n = len(g)
        if n == 0:
            continue
        p1 = sum(g) / n
        total += n * (1 - p1 ** 2 - (1 - p1) ** 2)
    return total


def best_root_split_impurity(X, y):
    """Smallest weighted gini over every single (feature, threshold) split."""
    best = gini_impurity_total([list(y)])
    for f in range(len(X[0])):
        values = sorted(set(row[f] for row in X))
        for a, b in zip(values, values[1:]):
            thr = (a + b) / 2
            left = [y[i] for i, row in enumerate(X) if row[f] <= thr]
            right = [y[i] for i, row in enumerate(X) if row[f] > thr]
            best = min(best, gini_impurity_total([left, right]))
    return best
