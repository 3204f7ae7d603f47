"""Gradient boosting for logistic loss over depth-limited regression trees.

The ensemble starts at the log-odds of the training base rate. Each round
fits a least-squares tree to the current residuals (label minus predicted
probability), then sets each leaf to the Newton step
sum(residual) / sum(p(1-p)) and adds the shrunken tree to the ensemble.
Split ties break to the lower feature index, then the lower threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._shared import sigmoid

HESSIAN_FLOOR = 1e-12


def _sse_split(xs: np.ndarray, r: np.ndarray) -> tuple[float, float] | None:
    """Best (cost, threshold) minimizing summed squared error, or None."""
    n = len(xs)
    order = np.argsort(xs, kind="stable")
    xs_sorted = xs[order]
    r_sorted = r[order]
    cut = np.nonzero(xs_sorted[:-1] < xs_sorted[1:])[0]
    if len(cut) == 0:
        return None
    sums = np.cumsum(r_sorted)[cut]
    squares = np.cumsum(r_sorted**2)[cut]
    n_left = cut + 1.0
    n_right = n - n_left
    total_sum = r_sorted.sum()
    total_sq = float(np.sum(r_sorted**2))
    sse_left = squares - sums**2 / n_left
    sse_right = (total_sq - squares) - (total_sum - sums) ** 2 / n_right
    cost = sse_left + sse_right
    j = int(np.argmin(cost))
    threshold = 0.5 * (xs_sorted[cut[j]] + xs_sorted[cut[j] + 1])
    return float(cost[j]), float(threshold)


def _grow_regression_tree(
    X: np.ndarray,
    residual: np.ndarray,
    hessian: np.ndarray,
    depth_limit: int,
) -> list[dict]:
    """Flat node list; leaves carry the Newton-step value for logistic loss."""
    nodes: list[dict] = [{}]
    stack = [(0, np.arange(len(X)), 0)]
    while stack:
        slot, idx, depth = stack.pop()
        split = None
        if depth < depth_limit:
            best_cost = np.inf
            for f in range(X.shape[1]):
                found = _sse_split(X[idx, f], residual[idx])
                if found is not None and found[0] < best_cost:
                    best_cost = found[0]
                    split = (f, found[1])
        if split is None:
            denominator = max(float(hessian[idx].sum()), HESSIAN_FLOOR)
            nodes[slot] = {"value": float(residual[idx].sum()) / denominator}
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
class GradientBoostingModel:
    base_log_odds: float
    learning_rate: float
    trees: list[list[dict]]
    train_log_loss: list[float]  # per round, starting before the first tree

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        seed: int,
        n_rounds: int = 100,
        learning_rate: float = 0.1,
        depth: int = 1,
    ):
        base_rate = float(y.mean())
        base_log_odds = float(np.log(base_rate / (1.0 - base_rate)))
        margin = np.full(len(y), base_log_odds)
        trees = []
        losses = [_logistic_loss(margin, y)]
        for _ in range(n_rounds):
            p = sigmoid(margin)
            residual = y - p
            hessian = p * (1.0 - p)
            nodes = _grow_regression_tree(X, residual, hessian, depth)
            step = np.empty(len(y))
            _apply_tree(nodes, X, step)
            margin = margin + learning_rate * step
            trees.append(nodes)
            losses.append(_logistic_loss(margin, y))
        return cls(
            base_log_odds=base_log_odds,
            learning_rate=learning_rate,
            trees=trees,
            train_log_loss=losses,
        )

    def raw_score(self, X: np.ndarray) -> np.ndarray:
        margin = np.full(len(X), self.base_log_odds)
        buffer = np.empty(len(X))
        for nodes in self.trees:
            _apply_tree(nodes, X, buffer)
            margin += self.learning_rate * buffer
        return sigmoid(margin)

    def to_dict(self) -> dict:
        return {
            "base_log_odds": self.base_log_odds,
            "learning_rate": self.learning_rate,
            "trees": self.trees,
            "train_log_loss": self.train_log_loss,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradientBoostingModel":
        return cls(
            base_log_odds=float(d["base_log_odds"]),
            learning_rate=float(d["learning_rate"]),
            trees=d["trees"],
            train_log_loss=[float(v) for v in d["train_log_loss"]],
        )


def _logistic_loss(margin: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))
