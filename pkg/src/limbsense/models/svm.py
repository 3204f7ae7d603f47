"""Linear SVM trained by the Pegasos subgradient schedule.

Epoch-ordered single-example updates with step 1/(reg * t); the example
order is reshuffled every epoch by a generator seeded only from the run
seed, so the visit order depends on (seed, n) alone. The bias is updated
on margin violations but not regularized. Scores are raw signed margins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_EPOCHS = 100


@dataclass
class LinearSvmModel:
    w: np.ndarray
    b: float
    reg: float

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        seed: int,
        reg: float = 0.1,
        n_epochs: int = DEFAULT_EPOCHS,
    ):
        signs = 2.0 * y - 1.0
        w = np.zeros(X.shape[1])
        b = 0.0
        rng = np.random.default_rng([seed, 0x706567])
        t = 0
        for _ in range(n_epochs):
            for i in rng.permutation(len(X)):
                t += 1
                eta = 1.0 / (reg * t)
                violated = signs[i] * (X[i] @ w + b) < 1.0
                w *= 1.0 - eta * reg
                if violated:
                    w += eta * signs[i] * X[i]
                    b += eta * signs[i]
        return cls(w=w, b=float(b), reg=reg)

    def raw_score(self, X: np.ndarray) -> np.ndarray:
        return X @ self.w + self.b

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "b": self.b, "reg": self.reg}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearSvmModel":
        return cls(
            w=np.asarray(d["w"], dtype=np.float64),
            b=float(d["b"]),
            reg=float(d["reg"]),
        )
