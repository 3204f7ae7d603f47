"""K-nearest-neighbors scoring by severe-fraction among the k closest rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, seed: int, k: int = 5):
        if k < 1 or k > len(X):
            raise ValueError(f"k must be in 1..{len(X)}, got {k}")
        return cls(X=X.copy(), y=y.copy(), k=int(k))

    def raw_score(self, Q: np.ndarray) -> np.ndarray:
        # Stable argsort breaks distance ties by training-row index.
        d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return self.y[order].mean(axis=1)

    def to_dict(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist(), "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "KnnModel":
        return cls(
            X=np.asarray(d["X"], dtype=np.float64),
            y=np.asarray(d["y"], dtype=np.int64),
            k=int(d["k"]),
        )
