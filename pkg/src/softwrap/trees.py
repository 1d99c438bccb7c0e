"""Tree arena, routing and the ensemble model shared by every approach.

A tree is a list of nodes in depth-first preorder with node 0 as the root.
Each internal node routes an input to its children with nonnegative weights
summing to one: hard splits and crisp one-hot splits send everything one way,
fuzzy nodes use a three-set triangular partition, soft nodes a sigmoid gate.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterator

import numpy as np
from scipy.special import expit

from . import rng
from .core import EncodedColumn, EncodedDataset, FeatureSchema, TraceEntry, UncertaintyEstimate, encoded_columns
from .errors import ArityMismatch, BadArguments, InsufficientData

LEAF, SPLIT, CRISP, FUZZY, SOFT = "leaf", "split", "crisp", "fuzzy", "soft"

APPROACHES = ("dt", "rf", "fuzzy-dt", "fuzzy-rf", "soft-dt", "bagged-soft-dt")
DISPLAY_NAMES = {
    "dt": "DT",
    "rf": "RF",
    "fuzzy-dt": "Fuzzy DT",
    "fuzzy-rf": "Fuzzy RF",
    "soft-dt": "Soft DT",
    "bagged-soft-dt": "Bagged Soft DT",
}

# child weights below this are dropped while growing fuzzy and soft trees
PRUNE_WEIGHT = 1e-9
# gains closer than this count as ties
GAIN_TIE = 1e-12


@dataclass(frozen=True)
class TreeHyperparams:
    """Hyperparameters for all six approaches; each uses the subset it needs."""

    max_depth: int = 8
    min_leaf_weight: float = 50.0
    min_gain: float = 1e-6
    n_trees: int = 20
    feature_subset: int | None = None  # None: ceil(sqrt(encoded arity))
    bootstrap: bool = True
    n_bins: int = 32
    learning_rate: float = 0.1
    max_iters: int = 200
    tol: float = 1e-7
    init_steepness: float | None = None  # None: 4 / node-local feature range

    def __post_init__(self):
        if int(self.max_depth) < 1:
            raise BadArguments("max_depth must be >= 1")
        if not self.min_leaf_weight > 0:
            raise BadArguments("min_leaf_weight must be > 0")
        if not self.min_gain >= 0:
            raise BadArguments("min_gain must be >= 0")
        if int(self.n_trees) < 1:
            raise BadArguments("n_trees must be >= 1")
        if self.feature_subset is not None and int(self.feature_subset) < 1:
            raise BadArguments("feature_subset must be >= 1")
        if int(self.n_bins) < 2:
            raise BadArguments("n_bins must be >= 2")
        if not self.learning_rate > 0 or int(self.max_iters) < 0 or not self.tol >= 0:
            raise BadArguments("bad gradient-descent parameters")
        if self.init_steepness is not None and not self.init_steepness > 0:
            raise BadArguments("init_steepness must be > 0")

    def subset_size(self, d: int) -> int:
        k = self.feature_subset if self.feature_subset is not None else math.ceil(math.sqrt(d))
        return min(int(k), d)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "TreeHyperparams":
        return cls(**obj)

    def updated(self, **changes) -> "TreeHyperparams":
        return replace(self, **changes)


@dataclass
class LeafStats:
    weight_correct: float
    weight_incorrect: float
    calibrated_u: float | None = None
    calibration_n: float | None = None
    calibration_incorrect: float | None = None

    @property
    def raw_u(self) -> float:
        total = self.weight_correct + self.weight_incorrect
        return self.weight_incorrect / total if total > 0 else 1.0

    def value(self, calibrated: bool) -> float:
        if calibrated and self.calibrated_u is not None:
            return self.calibrated_u
        return self.raw_u

    def to_json(self) -> dict:
        return {
            "weight_correct": self.weight_correct,
            "weight_incorrect": self.weight_incorrect,
            "raw_u": self.raw_u,
            "calibrated_u": self.calibrated_u,
            "calibration_n": self.calibration_n,
            "calibration_incorrect": self.calibration_incorrect,
        }


@dataclass
class Node:
    id: int
    kind: str
    feature: int = -1
    threshold: float = 0.0  # split / crisp: left iff x <= threshold
    partition: tuple[float, float, float] | None = None  # fuzzy anchors (a, b, c)
    slope: float = 0.0  # soft gate g = sigmoid(slope * x + offset), weight g goes right
    offset: float = 0.0
    children: tuple[int, ...] = ()
    stats: LeafStats | None = None

    @property
    def is_leaf(self) -> bool:
        return self.kind == LEAF

    def route(self, x: np.ndarray) -> list[np.ndarray]:
        """Child weights for a vector of values of this node's feature."""
        if self.kind in (SPLIT, CRISP):
            left = (x <= self.threshold).astype(np.float64)
            return [left, 1.0 - left]
        if self.kind == FUZZY:
            from .fuzzy_trees import membership_arrays

            return list(membership_arrays(self.partition, x))
        if self.kind == SOFT:
            g = expit(self.slope * x + self.offset)
            return [1.0 - g, g]
        raise ValueError(f"cannot route through {self.kind} node")


@dataclass
class Tree:
    nodes: list[Node]

    @property
    def leaves(self) -> list[Node]:
        return [n for n in self.nodes if n.is_leaf]

    def iter_leaf_weights(self, X: np.ndarray) -> Iterator[tuple[Node, np.ndarray, np.ndarray]]:
        """Yield (leaf, row indices, path weights) in preorder; zero weights are skipped."""
        n = X.shape[0]
        stack = [(0, np.arange(n), np.ones(n))]
        while stack:
            nid, idx, w = stack.pop()
            node = self.nodes[nid]
            if node.is_leaf:
                yield node, idx, w
                continue
            parts = node.route(X[idx, node.feature])
            for child, mu in reversed(list(zip(node.children, parts))):
                cw = w * mu
                keep = cw > 0
                if keep.any():
                    stack.append((child, idx[keep], cw[keep]))

    def predict(self, X: np.ndarray, calibrated: bool) -> np.ndarray:
        out = np.zeros(X.shape[0])
        for leaf, idx, w in self.iter_leaf_weights(X):
            out[idx] += w * leaf.stats.value(calibrated)
        return out

    def structure_key(self) -> tuple:
        return tuple(
            (n.kind, n.feature, n.threshold, n.partition, n.slope, n.offset, n.children) for n in self.nodes
        )


def describe_branch(node: Node, branch: int, columns: tuple[EncodedColumn, ...], mu: float) -> str:
    col = columns[node.feature]
    if node.kind in (SPLIT, CRISP) and col.kind == "onehot":
        op = "!=" if branch == 0 else "=="
        return f"{col.feature} {op} {col.category}"
    if node.kind in (SPLIT, CRISP):
        op = "<=" if branch == 0 else ">"
        return f"{col.name} {op} {node.threshold:.6g}"
    if node.kind == FUZZY:
        a, b, c = node.partition
        label = ("low", "mid", "high")[branch]
        return f"{col.name} is {label}[{a:.6g}, {b:.6g}, {c:.6g}] (mu={mu:.6g})"
    crossing = -node.offset / node.slope if node.slope != 0 else float("nan")
    side = "left" if branch == 0 else "right"
    return f"{col.name} gate {side} of {crossing:.6g} (slope={node.slope:.6g}, g={mu:.6g})"


@dataclass(eq=False)
class QualityImpactModel:
    """Tree-family estimator mapping quality factors to an uncertainty in [0, 1].

    Single-tree approaches hold one member; ensembles average their members.
    """

    approach: str
    schema: FeatureSchema
    hyperparams: TreeHyperparams
    trees: list[Tree]
    member_seeds: list[int] = field(default_factory=list)
    calibration: dict | None = None

    @property
    def columns(self) -> tuple[EncodedColumn, ...]:
        return encoded_columns(self.schema)

    @property
    def calibrated(self) -> bool:
        return self.calibration is not None

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.columns):
            raise ArityMismatch(f"expected {len(self.columns)} encoded columns, got {X.shape[1]}")
        return X

    def member_predictions(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        return np.stack([t.predict(X, self.calibrated) for t in self.trees])

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Uncertainty estimates for an encoded matrix (or a single encoded row)."""
        X = self._check(X)
        total = np.zeros(X.shape[0])
        for t in self.trees:
            total += t.predict(X, self.calibrated)
        return total / len(self.trees)

    def explain(self, x: np.ndarray) -> UncertaintyEstimate:
        """Estimate for one encoded point with the weighted leaves that produced it."""
        X = self._check(x)
        cols = self.columns
        n = len(self.trees)
        trace: list[TraceEntry] = []
        total = 0.0
        for m, tree in enumerate(self.trees):
            member = 0.0
            stack = [(0, 1.0, ())]
            while stack:
                nid, w, conds = stack.pop()
                node = tree.nodes[nid]
                if node.is_leaf:
                    u = node.stats.value(self.calibrated)
                    member += w * u
                    trace.append(TraceEntry(f"t{m}/n{nid}", w / n, u, " AND ".join(conds) or "(root)"))
                    continue
                parts = node.route(X[:, node.feature])
                for branch in reversed(range(len(node.children))):
                    mu = float(parts[branch][0])
                    if w * mu > 0:
                        cond = describe_branch(node, branch, cols, mu)
                        stack.append((node.children[branch], w * mu, conds + (cond,)))
            total += member
        return UncertaintyEstimate(total / n, trace, self.calibrated)


def check_training_data(ds: EncodedDataset, hp: TreeHyperparams, weights: np.ndarray | None = None) -> np.ndarray:
    if ds.y is None:
        raise InsufficientData("training data needs labels")
    w = np.ones(len(ds)) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (len(ds),) or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise BadArguments("weights must be finite, nonnegative, one per point")
    if w.sum() < 2 * hp.min_leaf_weight:
        raise InsufficientData(
            f"total weight {w.sum():g} below 2 * min_leaf_weight = {2 * hp.min_leaf_weight:g}"
        )
    return w


def leaf_stats(y: np.ndarray, w: np.ndarray) -> LeafStats:
    wi = float(np.dot(w, y))
    return LeafStats(float(w.sum()) - wi, wi)


def thread_count() -> int:
    env = os.environ.get("SOFTWRAP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def train_ensemble(
    ds: EncodedDataset,
    hp: TreeHyperparams,
    seed: int,
    grow: Callable[[EncodedDataset, TreeHyperparams, np.ndarray, int], Tree],
    approach: str,
    n_trees: int | None = None,
) -> QualityImpactModel:
    """Train members on bootstrap resamples with per-member seeds derived up front."""
    check_training_data(ds, hp)
    n = len(ds)
    n_trees = hp.n_trees if n_trees is None else n_trees
    seeds = [rng.derive_seed(seed, i) for i in range(n_trees)]

    def build(member_seed: int) -> Tree:
        if hp.bootstrap:
            w = rng.bootstrap_counts(rng.derive_seed(member_seed, 0xB007), n)
        else:
            w = np.ones(n)
        return grow(ds, hp, w, member_seed)

    workers = min(thread_count(), n_trees)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            trees = list(pool.map(build, seeds))
    else:
        trees = [build(s) for s in seeds]
    return QualityImpactModel(approach, ds.schema, hp, trees, seeds)
