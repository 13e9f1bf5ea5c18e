"""Random forest of Gini decision trees for the binary ictal/inter-ictal task.

Split thresholds are observed training values (``x <= threshold`` goes left),
so a strictly increasing transform of a feature, applied to training and test
data alike, leaves every prediction unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, FitError

LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray  # LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (nodes, 2) class counts of the training rows reaching each node

    def leaf_index(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] != LEAF
        while active.any():
            r = rows[active]
            n = node[r]
            go_left = X[r, self.feature[n]] <= self.threshold[n]
            node[r] = np.where(go_left, self.left[n], self.right[n])
            active[r] = self.feature[node[r]] != LEAF
        return node

    def votes(self, X: np.ndarray) -> np.ndarray:
        """1 where the leaf majority is ictal; a tied leaf votes inter-ictal."""
        c = self.counts[self.leaf_index(X)]
        return (c[:, 1] > c[:, 0]).astype(np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


def _best_split(x: np.ndarray, y: np.ndarray) -> tuple[float, float, int] | None:
    """Best Gini cut over the columns of ``x`` (n, k).

    Returns (weighted impurity, threshold, column), or None when every column
    is constant. Ties go to the earliest column, then the lowest threshold.
    """
    n = len(x)
    # sort each column as a contiguous row; order within equal values never
    # matters because only cuts between distinct values are scored
    xt = np.ascontiguousarray(x.T)
    order = np.argsort(xt, axis=1)
    xs = np.take_along_axis(xt, order, axis=1)
    ys = y[order]
    valid = xs[:, :-1] < xs[:, 1:]
    if not valid.any():
        return None
    ones = np.cumsum(ys, axis=1)[:, :-1].astype(np.float64)
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    ones_right = ys.sum(axis=1, keepdims=True) - ones
    zeros_left = n_left - ones
    zeros_right = n_right - ones_right
    # n_l * gini_l + n_r * gini_r, up to the constant n
    score = -(ones ** 2 + zeros_left ** 2) / n_left - (ones_right ** 2 + zeros_right ** 2) / n_right
    score[~valid] = np.inf
    pos = np.argmin(score, axis=1)
    best = score[np.arange(len(score)), pos]
    col = int(np.argmin(best))
    return float(best[col]), float(xs[col, pos[col]]), col


def grow_tree(X: np.ndarray, y: np.ndarray, max_features: int, rng: np.random.Generator,
              min_leaf: int = 1) -> Tree:
    """Grow an unpruned tree, drawing ``max_features`` candidate features per node.

    If none of the drawn features can split the node, the remaining features
    are tried in random order before the node becomes a leaf.
    """
    d = X.shape[1]
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        ones = int(y[idx].sum())
        counts.append((len(idx) - ones, ones))
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)))]
    while stack:
        node, idx = stack.pop()
        c0, c1 = counts[node]
        if c0 == 0 or c1 == 0 or len(idx) < 2 * min_leaf:
            continue
        order = rng.permutation(d)
        yi = y[idx]
        found = _best_split(X[np.ix_(idx, order[:max_features])], yi)
        if found is None and max_features < d:
            found = _best_split(X[np.ix_(idx, order[max_features:])], yi)
            if found is not None:
                found = (found[0], found[1], found[2] + max_features)
        if found is None:
            continue
        _, thr, col = found
        f = int(order[col])
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        if len(li) < min_leaf or len(ri) < min_leaf:
            continue
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(counts, dtype=np.int64).reshape(-1, 2))


@dataclass
class RandomForest:
    n_trees: int = 100
    max_features: int | None = None  # default floor(sqrt(d))
    bootstrap: bool = True
    min_leaf: int = 1
    seed: int = 0
    trees: list[Tree] = field(default_factory=list)
    n_features: int = 0

    def fit(self, X, y) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y).astype(np.int64)
        if X.ndim != 2 or len(X) != len(y):
            raise DimensionError(f"features {X.shape} and labels {y.shape} do not conform")
        if not np.isin(y, (0, 1)).all():
            raise FitError("labels must be 0 (inter-ictal) or 1 (ictal)")
        if len(np.unique(y)) < 2:
            raise FitError("training set contains a single class")
        n, d = X.shape
        self.n_features = d
        mtry = self.max_features or max(1, math.isqrt(d))
        # one child seed per tree, so the forest does not depend on build order
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        self.trees = []
        for seq in seeds:
            rng = np.random.default_rng(seq)
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            while len(np.unique(y[rows])) < 2:
                rows = rng.integers(0, n, size=n)
            self.trees.append(grow_tree(X[rows], y[rows], mtry, rng, self.min_leaf))
        return self

    def _check(self, X) -> np.ndarray:
        if not self.trees:
            raise FitError("forest has not been fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise DimensionError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def predict_proba(self, X) -> np.ndarray:
        """Fraction of trees voting ictal."""
        X = self._check(X)
        votes = np.zeros(len(X), dtype=np.int64)
        for t in self.trees:
            votes += t.votes(X)
        return votes / len(self.trees)

    def predict(self, X) -> np.ndarray:
        """1 (ictal) on a strict majority; a split vote goes to inter-ictal."""
        return (self.predict_proba(X) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees, "max_features": self.max_features, "seed": self.seed,
            "bootstrap": self.bootstrap, "min_leaf": self.min_leaf, "n_features": self.n_features,
            "trees": [{"feature": t.feature.tolist(), "threshold": t.threshold.tolist(),
                       "left": t.left.tolist(), "right": t.right.tolist(),
                       "counts": t.counts.tolist()} for t in self.trees],
        }
