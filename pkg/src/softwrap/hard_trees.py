"""CART-style decision trees and random forests with entropy splits."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import entr

from . import rng
from .core import EncodedDataset, UncertaintyEstimate
from .errors import InconsistentWeights, ZeroWeight
from .trees import (
    GAIN_TIE,
    LEAF,
    SPLIT,
    Node,
    QualityImpactModel,
    Tree,
    TreeHyperparams,
    check_training_data,
    leaf_stats,
    train_ensemble,
)

_LN2 = math.log(2.0)


def entropy(weight_per_class: Sequence[float]) -> float:
    """Shannon entropy in bits of a class-weight vector."""
    w = [float(v) for v in weight_per_class]
    if any(v < 0 for v in w):
        raise ZeroWeight("class weights must be nonnegative")
    total = sum(w)
    if not total > 0:
        raise ZeroWeight("entropy of zero total weight")
    h = 0.0
    for v in w:
        q = v / total
        if q > 0:
            h -= q * math.log2(q)
    return h


def info_gain(parent: Sequence[float], children: Sequence[Sequence[float]]) -> float:
    parent = [float(v) for v in parent]
    total = sum(parent)
    summed = [sum(float(c[k]) for c in children) for k in range(len(parent))]
    if any(abs(s - p) > 1e-9 for s, p in zip(summed, parent)):
        raise InconsistentWeights(f"children {summed} do not sum to parent {parent}")
    gain = entropy(parent)
    for c in children:
        wc = sum(float(v) for v in c)
        if wc > 0:
            gain -= (wc / total) * entropy(c)
    return gain


def binary_entropy(q: np.ndarray) -> np.ndarray:
    """Vectorized two-class entropy in bits of the positive-class share ``q``."""
    q = np.clip(q, 0.0, 1.0)
    return (entr(q) + entr(1.0 - q)) / _LN2


def best_threshold(x: np.ndarray, y: np.ndarray, w: np.ndarray, min_child: float):
    """Best (gain, threshold) for ``x <= threshold`` splits of one column, or None.

    Candidates are midpoints between consecutive distinct values; among
    (near-)equal gains the lowest threshold wins.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    distinct = np.flatnonzero(xs[1:] > xs[:-1])
    if distinct.size == 0:
        return None
    ws = w[order]
    cw = np.cumsum(ws)
    cwy = np.cumsum(ws * y[order])
    W, Wy = cw[-1], cwy[-1]
    WL, WLy = cw[distinct], cwy[distinct]
    WR, WRy = W - WL, Wy - WLy
    valid = (WL >= min_child) & (WR >= min_child) & (WL > 0) & (WR > 0)
    if not valid.any():
        return None
    WL, WLy, WR, WRy, distinct = WL[valid], WLy[valid], WR[valid], WRy[valid], distinct[valid]
    gain = binary_entropy(Wy / W) - (WL / W) * binary_entropy(WLy / WL) - (WR / W) * binary_entropy(WRy / WR)
    best = gain.max()
    i = int(np.flatnonzero(gain >= best - GAIN_TIE)[0])
    return float(gain[i]), float((xs[distinct[i]] + xs[distinct[i] + 1]) / 2.0)


def best_split(X: np.ndarray, y: np.ndarray, w: np.ndarray, features: Sequence[int], min_child: float):
    """Best (gain, feature, threshold) over ``features``; ties go to the lower index."""
    best = None
    for f in features:
        r = best_threshold(X[:, f], y, w, min_child)
        if r is None:
            continue
        if best is None or r[0] > best[0] + GAIN_TIE:
            best = (r[0], f, r[1])
    return best


def grow_hard_tree(ds: EncodedDataset, hp: TreeHyperparams, weights: np.ndarray, seed: int | None = None) -> Tree:
    """Greedy recursive induction; ``seed`` enables per-node feature subsampling."""
    X, y = ds.X, ds.y
    d = X.shape[1]
    k = hp.subset_size(d) if seed is not None else d
    nodes: list[Node] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        nid = len(nodes)
        nodes.append(Node(nid, LEAF))
        w = weights[idx]
        stats = leaf_stats(y[idx], w)
        W = stats.weight_correct + stats.weight_incorrect
        if depth >= hp.max_depth or stats.weight_incorrect <= 0 or stats.weight_correct <= 0 or W < 2 * hp.min_leaf_weight:
            nodes[nid].stats = stats
            return nid
        feats = rng.choose_subset(rng.derive_seed(seed, nid), d, k) if seed is not None else range(d)
        best = best_split(X[idx], y[idx], w, feats, hp.min_leaf_weight)
        if best is None or best[0] < hp.min_gain:
            nodes[nid].stats = stats
            return nid
        _, f, t = best
        go_left = X[idx, f] <= t
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        nodes[nid] = Node(nid, SPLIT, feature=f, threshold=t, children=(left, right))
        return nid

    grow(np.flatnonzero(weights > 0), 0)
    return Tree(nodes)


def train_dt(ds: EncodedDataset, hp: TreeHyperparams | None = None, weights=None) -> QualityImpactModel:
    hp = hp or TreeHyperparams()
    w = check_training_data(ds, hp, weights)
    return QualityImpactModel("dt", ds.schema, hp, [grow_hard_tree(ds, hp, w)], [])


def train_rf(ds: EncodedDataset, hp: TreeHyperparams | None = None, seed: int = 0) -> QualityImpactModel:
    hp = hp or TreeHyperparams()
    return train_ensemble(ds, hp, seed, grow_hard_tree, "rf")


def predict_dt(m: QualityImpactModel, x: np.ndarray) -> UncertaintyEstimate:
    return m.explain(x)


predict_rf = predict_dt
