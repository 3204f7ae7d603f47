"""Random forest of Gini-impurity CART trees with seeded bootstrap sampling.

Trees are grown greedily: at each node ceil(sqrt(d)) features are sampled
without replacement and the split minimizing weighted Gini impurity is taken
(midpoint thresholds; cost ties break to the lower feature index, then the
lower threshold). If none of the sampled features admits a split the search
widens to all features, so a node only becomes a leaf when it is pure, hits
the depth cap, or holds duplicate feature vectors. Scores are the mean of
per-tree leaf severe-fractions.

Bootstrap index draws depend only on (seed, n_trees, n), never on row values.
Trees are stored as flat node lists (child links by index), which keeps both
growth and JSON serialization iteration-based regardless of depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _gini_split_cost(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float] | None:
    """Best (cost, threshold) for one feature column, or None if unsplittable."""
    n = len(xs)
    order = np.argsort(xs, kind="stable")
    xs_sorted = xs[order]
    ys_sorted = ys[order]
    cut = np.nonzero(xs_sorted[:-1] < xs_sorted[1:])[0]
    if len(cut) == 0:
        return None
    pos_left = np.cumsum(ys_sorted)[cut]
    n_left = cut + 1.0
    n_right = n - n_left
    pos_right = ys_sorted.sum() - pos_left
    gini_left = 1.0 - (pos_left / n_left) ** 2 - (1.0 - pos_left / n_left) ** 2
    gini_right = 1.0 - (pos_right / n_right) ** 2 - (1.0 - pos_right / n_right) ** 2
    cost = (n_left * gini_left + n_right * gini_right) / n
    j = int(np.argmin(cost))
    threshold = 0.5 * (xs_sorted[cut[j]] + xs_sorted[cut[j] + 1])
    return float(cost[j]), float(threshold)


def _best_split(
    X: np.ndarray, y: np.ndarray, idx: np.ndarray, features: np.ndarray
) -> tuple[int, float] | None:
    best_cost = math.inf
    best = None
    for f in features:
        found = _gini_split_cost(X[idx, f], y[idx])
        if found is not None and found[0] < best_cost:
            best_cost = found[0]
            best = (int(f), found[1])
    return best


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    root_idx: np.ndarray,
    max_depth: int | None,
    n_candidates: int,
    rng: np.random.Generator,
) -> list[dict]:
    """Grow one tree iteratively; returns its flat node list (root at 0)."""
    d = X.shape[1]
    nodes: list[dict] = [{}]
    stack = [(0, root_idx, 0)]  # (node slot, row indices, depth)
    while stack:
        slot, idx, depth = stack.pop()
        n_pos = int(y[idx].sum())
        at_cap = max_depth is not None and depth >= max_depth
        split = None
        if 0 < n_pos < len(idx) and not at_cap:
            features = np.sort(rng.choice(d, size=n_candidates, replace=False))
            split = _best_split(X, y, idx, features)
            if split is None and n_candidates < d:
                split = _best_split(X, y, idx, np.arange(d))
        if split is None:
            nodes[slot] = {"value": n_pos / len(idx)}
            continue
        feature, threshold = split
        go_left = X[idx, feature] < threshold
        left_slot = len(nodes)
        nodes.append({})
        right_slot = len(nodes)
        nodes.append({})
        nodes[slot] = {
            "feature": feature,
            "threshold": threshold,
            "left": left_slot,
            "right": right_slot,
        }
        # Push right first so the left child is grown first (fixed rng order).
        stack.append((right_slot, idx[~go_left], depth + 1))
        stack.append((left_slot, idx[go_left], depth + 1))
    return nodes


def _apply_tree(nodes: list[dict], X: np.ndarray, out: np.ndarray) -> None:
    stack = [(0, np.arange(len(X)))]
    while stack:
        slot, idx = stack.pop()
        node = nodes[slot]
        if "value" in node:
            out[idx] = node["value"]
            continue
        go_left = X[idx, node["feature"]] < node["threshold"]
        stack.append((node["left"], idx[go_left]))
        stack.append((node["right"], idx[~go_left]))


@dataclass
class RandomForestModel:
    trees: list[list[dict]]
    n_features: int

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        seed: int,
        n_trees: int = 100,
        max_depth: int | None = None,
        bootstrap: bool = True,
    ):
        n, d = X.shape
        n_candidates = math.ceil(math.sqrt(d))
        boot_rng = np.random.default_rng([seed, 0x626F6F74])
        boot_idx = boot_rng.integers(0, n, size=(n_trees, n))
        trees = []
        for t in range(n_trees):
            idx = boot_idx[t] if bootstrap else np.arange(n)
            tree_rng = np.random.default_rng([seed, t])
            trees.append(_grow_tree(X, y, idx, max_depth, n_candidates, tree_rng))
        return cls(trees=trees, n_features=d)

    def raw_score(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(len(X))
        buffer = np.empty(len(X))
        for nodes in self.trees:
            _apply_tree(nodes, X, buffer)
            total += buffer
        return total / len(self.trees)

    def to_dict(self) -> dict:
        return {"trees": self.trees, "n_features": self.n_features}

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForestModel":
        return cls(trees=d["trees"], n_features=int(d["n_features"]))
