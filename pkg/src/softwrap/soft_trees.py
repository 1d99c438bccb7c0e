"""Soft decision trees with univariate sigmoid gates, and bagged ensembles.

Each inner node picks its feature and a starting threshold exactly like a
hard tree, then fits the gate's slope and offset by gradient descent on the
weighted cross-entropy of the two-leaf soft mixture at that node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import EncodedDataset, UncertaintyEstimate
from .errors import BadArguments, DegenerateLeaves
from .hard_trees import best_split
from .trees import (
    LEAF,
    PRUNE_WEIGHT,
    SOFT,
    SPLIT,
    Node,
    QualityImpactModel,
    Tree,
    TreeHyperparams,
    check_training_data,
    leaf_stats,
    train_ensemble,
)

PROB_EPS = 1e-6


@dataclass(frozen=True)
class SoftGate:
    feature_index: int
    slope: float
    offset: float

    @property
    def crossing(self) -> float:
        return -self.offset / self.slope if self.slope != 0 else float("nan")

    def display_triple(self) -> tuple[float, float, float]:
        """(crossing - 2/|slope|, crossing, crossing + 2/|slope|): where g is about 0.12, 0.5, 0.88."""
        t = self.crossing
        h = 2.0 / abs(self.slope) if self.slope != 0 else float("inf")
        return (t - h, t, t + h)


def gate(gt: SoftGate, x) -> np.ndarray | float:
    """Weight routed to the right child; ``x`` is an encoded point or matrix."""
    x = np.asarray(x, dtype=np.float64)
    xf = x[..., gt.feature_index] if x.ndim else x
    g = expit(gt.slope * xf + gt.offset)
    return float(g) if np.ndim(g) == 0 else g


def node_loss_and_gradient(a: float, b: float, x, w, y, p_left: float, p_right: float):
    """Weighted cross-entropy of the gated two-leaf mixture and its (a, b) gradient."""
    for p in (p_left, p_right):
        if not (PROB_EPS <= p <= 1.0 - PROB_EPS):
            raise BadArguments(f"leaf probability {p} outside [{PROB_EPS}, {1 - PROB_EPS}]")
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not w.sum() > 0:
        raise BadArguments("total weight must be positive")
    return _loss_and_gradient(expit(a * x + b), x, w, w * y, p_left, p_right)


def _loss_and_gradient(g, x, w, wy, p_left, p_right):
    p = p_left + g * (p_right - p_left)
    loss = -float(np.dot(wy, np.log(p)) + np.dot(w - wy, np.log1p(-p)))
    r = (w * p - wy) / (p * (1.0 - p)) * (p_right - p_left) * (g * (1.0 - g))
    return loss, float(np.dot(r, x)), float(np.sum(r))


def _leaf_rates(g: np.ndarray, w: np.ndarray, wy: np.ndarray) -> tuple[float, float]:
    wr = w * g
    sr, sry = float(wr.sum()), float(np.dot(wy, g))
    sl, sly = float(w.sum()) - sr, float(wy.sum()) - sry
    if not (sl > 0 and sr > 0):
        raise DegenerateLeaves("a gate child receives no weight")
    p_left = min(max(sly / sl, PROB_EPS), 1.0 - PROB_EPS)
    p_right = min(max(sry / sr, PROB_EPS), 1.0 - PROB_EPS)
    if abs(p_right - p_left) < 1e-12:
        raise DegenerateLeaves("both gate children have the same incorrect rate")
    return p_left, p_right


def fit_gate(
    x,
    w,
    y,
    threshold: float,
    hp: TreeHyperparams | None = None,
    feature_index: int = 0,
    history: list | None = None,
) -> SoftGate:
    """Fit slope and offset starting from a step at ``threshold``.

    Descent runs on the feature rescaled to [0, 1] over the node's weighted
    range so one learning rate suits every feature. Steps that would raise
    the loss are halved, so the recorded losses never increase.
    """
    hp = hp or TreeHyperparams()
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pos = w > 0
    x, w, y = x[pos], w[pos], y[pos]
    if x.size == 0 or not (np.any(y > 0.5) and np.any(y < 0.5)):
        raise BadArguments("gate fitting needs both labels among weighted points")
    lo, hi = float(x.min()), float(x.max())
    if not lo < threshold < hi:
        raise BadArguments(f"threshold {threshold} not strictly inside [{lo}, {hi}]")
    span = hi - lo
    a0 = hp.init_steepness if hp.init_steepness is not None else 4.0 / span
    b0 = -a0 * threshold
    z = (x - lo) / span

    wy = w * y

    def evaluate(A: float, B: float):
        g = expit(A * z + B)
        p_left, p_right = _leaf_rates(g, w, wy)
        return _loss_and_gradient(g, z, w, wy, p_left, p_right)

    A, B = a0 * span, b0 + a0 * lo
    loss, ga, gb = evaluate(A, B)
    if history is not None:
        history.append(loss)
    moved = False
    for _ in range(int(hp.max_iters)):
        norm = math.hypot(ga, gb)
        if norm == 0.0:
            break
        step = hp.learning_rate / (1.0 + norm)
        accepted = None
        for _ in range(40):
            A2, B2 = A - step * ga, B - step * gb
            try:
                cand = evaluate(A2, B2)
            except DegenerateLeaves:
                cand = None
            if cand is not None and cand[0] <= loss:
                accepted = (A2, B2) + cand
                break
            step *= 0.5
        if accepted is None:
            break
        improvement = loss - accepted[2]
        A, B, loss, ga, gb = accepted
        moved = True
        if history is not None:
            history.append(loss)
        if improvement < hp.tol:
            break
    if not moved:
        return SoftGate(feature_index, a0, b0)
    a = A / span
    return SoftGate(feature_index, a, B - a * lo)


def grow_soft_tree(ds: EncodedDataset, hp: TreeHyperparams, weights: np.ndarray, seed: int | None = None) -> Tree:
    """Every feature is a split candidate; ``seed`` is unused (bagging only resamples rows)."""
    X, y = ds.X, ds.y
    features = range(X.shape[1])
    nodes: list[Node] = []

    def grow(idx: np.ndarray, w: np.ndarray, depth: int) -> int:
        nid = len(nodes)
        nodes.append(Node(nid, LEAF))
        yy = y[idx]
        stats = leaf_stats(yy, w)
        W = stats.weight_correct + stats.weight_incorrect
        nodes[nid].stats = stats
        if depth >= hp.max_depth or stats.weight_incorrect <= 0 or stats.weight_correct <= 0 or W < 2 * hp.min_leaf_weight:
            return nid
        Xn = X[idx]
        best = best_split(Xn, yy, w, features, hp.min_leaf_weight)
        if best is None or best[0] < hp.min_gain:
            return nid
        _, f, t = best
        try:
            gt = fit_gate(Xn[:, f], w, yy, t, hp, f)
        except (DegenerateLeaves, BadArguments):
            return nid
        g = expit(gt.slope * Xn[:, f] + gt.offset)
        wl, wr = w * (1.0 - g), w * g
        if wl.sum() < hp.min_leaf_weight or wr.sum() < hp.min_leaf_weight:
            return nid
        kl, kr = wl >= PRUNE_WEIGHT, wr >= PRUNE_WEIGHT
        left = grow(idx[kl], wl[kl], depth + 1)
        right = grow(idx[kr], wr[kr], depth + 1)
        nodes[nid] = Node(nid, SOFT, feature=f, slope=gt.slope, offset=gt.offset, children=(left, right))
        return nid

    pos = np.flatnonzero(weights > 0)
    grow(pos, weights[pos], 0)
    return Tree(nodes)


def train_soft_dt(ds: EncodedDataset, hp: TreeHyperparams | None = None, seed: int = 0, weights=None) -> QualityImpactModel:
    hp = hp or TreeHyperparams()
    w = check_training_data(ds, hp, weights)
    return QualityImpactModel("soft-dt", ds.schema, hp, [grow_soft_tree(ds, hp, w)], [])


def train_bagged_soft_dt(ds: EncodedDataset, hp: TreeHyperparams | None = None, seed: int = 0) -> QualityImpactModel:
    hp = hp or TreeHyperparams()
    return train_ensemble(ds, hp, seed, grow_soft_tree, "bagged-soft-dt")


def predict_soft_dt(m: QualityImpactModel, x: np.ndarray) -> UncertaintyEstimate:
    return m.explain(x)


predict_bagged_soft_dt = predict_soft_dt


def hard_limit(m: QualityImpactModel) -> QualityImpactModel:
    """Copy of a soft model with every gate replaced by a step at its crossing."""
    trees = []
    for tree in m.trees:
        nodes = []
        for n in tree.nodes:
            if n.kind != SOFT:
                nodes.append(n)
                continue
            t = -n.offset / n.slope
            children = n.children if n.slope > 0 else n.children[::-1]
            nodes.append(Node(n.id, SPLIT, feature=n.feature, threshold=t, children=children))
        trees.append(Tree(nodes))
    return QualityImpactModel(m.approach, m.schema, m.hyperparams, trees, list(m.member_seeds), m.calibration)
