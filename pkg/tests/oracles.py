"""Slow, obviously-correct reference implementations used as test oracles."""

import math
from fractions import Fraction

import numpy as np


def entropy_bits(counts):
    total = sum(counts)
    return -sum((c / total) * math.log2(c / total) for c in counts if c > 0)


def exhaustive_root_split(X, y):
    """Best (gain, feature, threshold) by trying every midpoint of every feature.

    Ties (within 1e-12) go to the lowest feature index, then the lowest
    threshold. Returns None for a pure node or when no feature varies.
    """
    n = len(y)
    pos = int(sum(y))
    if pos == 0 or pos == n:
        return None
    parent = entropy_bits([n - pos, pos])
    best = None
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2.0
            left = [y[i] for i in range(n) if X[i, f] <= t]
            right = [y[i] for i in range(n) if X[i, f] > t]
            g = parent
            for part in (left, right):
                k = int(sum(part))
                g -= len(part) / n * entropy_bits([len(part) - k, k])
            if best is None or g > best[0] + 1e-12:
                best = (g, f, t)
    return best


def fuzzy_memberships(a, b, c, x):
    """Direct piecewise definition of the left/mid/right shoulder-triangle sets."""
    if x <= a:
        return 1.0, 0.0, 0.0
    if x >= c:
        return 0.0, 0.0, 1.0
    if x <= b:
        left = (b - x) / (b - a)
        return left, (x - a) / (b - a), 0.0
    right = (x - b) / (c - b)
    return 0.0, (c - x) / (c - b), right


def fuzzy_partition_bruteforce(values, weights, labels, n_bins):
    """(gain, b) for every interior candidate via an explicit membership matrix."""
    a, c = min(v for v, w in zip(values, weights) if w > 0), max(v for v, w in zip(values, weights) if w > 0)
    out = []
    for j in range(n_bins):
        b = a + (c - a) * (j + 0.5) / n_bins
        if not a < b < c:
            continue
        sums = np.zeros((3, 2))
        for v, w, yv in zip(values, weights, labels):
            mu = fuzzy_memberships(a, b, c, v)
            for k in range(3):
                sums[k, int(yv)] += w * mu[k]
        total = sums.sum()
        g = entropy_bits(sums.sum(axis=0))
        for k in range(3):
            if sums[k].sum() > 0:
                g -= sums[k].sum() / total * entropy_bits(sums[k])
        out.append((g, b))
    return a, c, out


def binomial_cdf(k, n, p):
    """P[Bin(n, p) <= k] summed exactly in rationals."""
    p = Fraction(p)
    return float(sum(math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(k + 1)))


def cp_upper_by_binomial(k, n, cl, tol=1e-12):
    """Upper bound as the p where P[Bin(n, p) <= k] falls to 1 - cl (bisection)."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if binomial_cdf(k, n, mid) > 1 - cl:
            lo = mid
        else:
            hi = mid
    return hi


def brute_force_decomposition(f, y):
    """Murphy terms with one group per distinct forecast, in plain Python loops."""
    n = len(f)
    pbar = sum(y) / n
    groups = {}
    for fi, yi in zip(f, y):
        groups.setdefault(fi, []).append(yi)
    res = sum(len(g) * (sum(g) / len(g) - pbar) ** 2 for g in groups.values()) / n
    unr = sum(len(g) * (fk - sum(g) / len(g)) ** 2 for fk, g in groups.items()) / n
    oconf = sum(len(g) * (fk - sum(g) / len(g)) ** 2 for fk, g in groups.items() if fk < sum(g) / len(g)) / n
    bs = sum((fi - yi) ** 2 for fi, yi in zip(f, y)) / n
    return {"bs": bs, "var": pbar * (1 - pbar), "res": res, "unr": unr, "oconf": oconf}
