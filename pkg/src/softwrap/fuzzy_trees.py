"""Fuzzy decision trees and fuzzy random forests.

Continuous columns split into three children through a triangular/shoulder
partition anchored at (a, b, c); one-hot columns split crisply in two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .core import EncodedDataset, UncertaintyEstimate
from .errors import BadArguments, NoValidSplit
from .hard_trees import binary_entropy, entropy
from .trees import (
    CRISP,
    FUZZY,
    GAIN_TIE,
    LEAF,
    PRUNE_WEIGHT,
    Node,
    QualityImpactModel,
    Tree,
    TreeHyperparams,
    check_training_data,
    leaf_stats,
    train_ensemble,
)


@dataclass(frozen=True)
class FuzzyPartition:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a < self.b < self.c):
            raise BadArguments(f"partition anchors must ascend strictly, got {self.astuple()}")

    def astuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


def membership_arrays(p, x: np.ndarray):
    """(left, mid, right) memberships; they sum to one for every real x."""
    a, b, c = p.astuple() if isinstance(p, FuzzyPartition) else p
    x = np.asarray(x, dtype=np.float64)
    left = np.clip((b - x) / (b - a), 0.0, 1.0)
    right = np.clip((x - b) / (c - b), 0.0, 1.0)
    mid = np.where(x <= b, 1.0 - left, 1.0 - right)
    return left, mid, right


def membership(p: FuzzyPartition, x: float) -> tuple[float, float, float]:
    left, mid, right = membership_arrays(p, np.array([x]))
    return float(left[0]), float(mid[0]), float(right[0])


fuzzy_entropy = entropy


def find_fuzzy_partition(
    values: np.ndarray,
    point_weights: np.ndarray,
    labels: np.ndarray,
    n_bins: int,
    min_gain: float = 0.0,
    min_child_weight: float = 0.0,
) -> tuple[FuzzyPartition, float]:
    """Gain-maximizing middle anchor among equal-width bin midpoints.

    ``a`` and ``c`` are the extreme values carrying positive weight. Ties go
    to the smaller ``b``. Raises NoValidSplit if nothing reaches ``min_gain``.
    """
    values = np.asarray(values, dtype=np.float64)
    w = np.asarray(point_weights, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    pos = w > 0
    values, w, y = values[pos], w[pos], y[pos]
    if values.size == 0:
        raise NoValidSplit("no weighted points")
    a, c = float(values.min()), float(values.max())
    if not a < c:
        raise NoValidSplit("all values identical")
    cand = a + (c - a) * (np.arange(n_bins) + 0.5) / n_bins
    cand = cand[(cand > a) & (cand < c)]
    if cand.size == 0:
        raise NoValidSplit("no candidate strictly inside the range")
    # Membership-weighted child sums from prefix sums over the sorted values:
    # sum_{x<b} w (b-x)/(b-a) = (b*S0 - S1)/(b-a), mirrored for the right set;
    # the middle set takes the remainder since memberships sum to one on [a, c].
    order = np.argsort(values, kind="stable")
    xs, ws, wys = values[order], w[order], (w * y)[order]
    W, Wy = float(ws.sum()), float(wys.sum())
    pre = [np.concatenate(([0.0], np.cumsum(v))) for v in (ws, ws * xs, wys, wys * xs)]
    cut = np.searchsorted(xs, cand, side="left")
    below = [p[cut] for p in pre]
    above = [p[-1] - q for p, q in zip(pre, below)]
    WL = (cand * below[0] - below[1]) / (cand - a)
    WLy = (cand * below[2] - below[3]) / (cand - a)
    WR = (above[1] - cand * above[0]) / (c - cand)
    WRy = (above[3] - cand * above[2]) / (c - cand)
    WM = np.maximum(W - WL - WR, 0.0)
    WMy = np.clip(Wy - WLy - WRy, 0.0, WM)
    gain = np.full(cand.size, binary_entropy(np.array([Wy / W]))[0])
    valid = np.ones(cand.size, dtype=bool)
    for Wc, Wcy in ((WL, WLy), (WM, WMy), (WR, WRy)):
        valid &= Wc >= min_child_weight
        q = np.divide(Wcy, Wc, out=np.zeros_like(Wc), where=Wc > 0)
        gain -= (Wc / W) * binary_entropy(q)
    if not valid.any():
        raise NoValidSplit("every candidate leaves a child below the minimum weight")
    gain = np.where(valid, gain, -np.inf)
    best = gain.max()
    if best < min_gain:
        raise NoValidSplit(f"best gain {best:g} below {min_gain:g}")
    i = int(np.flatnonzero(gain >= best - GAIN_TIE)[0])
    return FuzzyPartition(a, float(cand[i]), c), float(gain[i])


def _crisp_gain(x: np.ndarray, y: np.ndarray, w: np.ndarray, min_child: float):
    one = x > 0.5
    W, Wy = w.sum(), w @ y
    W1, W1y = w[one].sum(), w[one] @ y[one]
    W0, W0y = W - W1, Wy - W1y
    if W0 < min_child or W1 < min_child or W0 <= 0 or W1 <= 0:
        return None
    h = binary_entropy(np.array([Wy / W, W0y / W0, W1y / W1]))
    return float(h[0] - (W0 / W) * h[1] - (W1 / W) * h[2])


def grow_fuzzy_tree(ds: EncodedDataset, hp: TreeHyperparams, weights: np.ndarray, seed: int | None = None) -> Tree:
    X, y = ds.X, ds.y
    d = X.shape[1]
    onehot = [c.kind == "onehot" for c in ds.columns]
    k = hp.subset_size(d) if seed is not None else d
    nodes: list[Node] = []

    def grow(idx: np.ndarray, w: np.ndarray, depth: int) -> int:
        nid = len(nodes)
        nodes.append(Node(nid, LEAF))
        yy = y[idx]
        stats = leaf_stats(yy, w)
        W = stats.weight_correct + stats.weight_incorrect
        if depth >= hp.max_depth or stats.weight_incorrect <= 0 or stats.weight_correct <= 0 or W < 2 * hp.min_leaf_weight:
            nodes[nid].stats = stats
            return nid
        feats = rng.choose_subset(rng.derive_seed(seed, nid), d, k) if seed is not None else range(d)
        best = None
        for f in feats:
            x = X[idx, f]
            if onehot[f]:
                g = _crisp_gain(x, yy, w, hp.min_leaf_weight)
                cand = None if g is None else (g, f, None)
            else:
                try:
                    p, g = find_fuzzy_partition(x, w, yy, hp.n_bins, 0.0, hp.min_leaf_weight)
                    cand = (g, f, p)
                except NoValidSplit:
                    cand = None
            if cand is not None and (best is None or cand[0] > best[0] + GAIN_TIE):
                best = cand
        if best is None or best[0] < hp.min_gain:
            nodes[nid].stats = stats
            return nid
        _, f, p = best
        x = X[idx, f]
        if p is None:
            one = x > 0.5
            zero_child = grow(idx[~one], w[~one], depth + 1)
            one_child = grow(idx[one], w[one], depth + 1)
            nodes[nid] = Node(nid, CRISP, feature=f, threshold=0.5, children=(zero_child, one_child))
            return nid
        children = []
        for mu in membership_arrays(p, x):
            cw = w * mu
            keep = cw >= PRUNE_WEIGHT
            children.append(grow(idx[keep], cw[keep], depth + 1))
        nodes[nid] = Node(nid, FUZZY, feature=f, partition=p.astuple(), children=tuple(children))
        return nid

    pos = np.flatnonzero(weights > 0)
    grow(pos, weights[pos], 0)
    return Tree(nodes)


def train_fuzzy_dt(ds: EncodedDataset, hp: TreeHyperparams | None = None, seed: int = 0, weights=None) -> QualityImpactModel:
    """Single fuzzy tree; ``seed`` is accepted for interface symmetry and unused."""
    hp = hp or TreeHyperparams()
    w = check_training_data(ds, hp, weights)
    return QualityImpactModel("fuzzy-dt", ds.schema, hp, [grow_fuzzy_tree(ds, hp, w)], [])


def train_fuzzy_rf(ds: EncodedDataset, hp: TreeHyperparams | None = None, seed: int = 0) -> QualityImpactModel:
    hp = hp or TreeHyperparams()
    return train_ensemble(ds, hp, seed, grow_fuzzy_tree, "fuzzy-rf")


def predict_fuzzy_dt(m: QualityImpactModel, x: np.ndarray) -> UncertaintyEstimate:
    return m.explain(x)


predict_fuzzy_rf = predict_fuzzy_dt
