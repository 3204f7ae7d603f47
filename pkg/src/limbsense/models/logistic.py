"""L2-regularized logistic regression fit by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._shared import sigmoid

MAX_ITERATIONS = 10_000
GRADIENT_TOLERANCE = 1e-6
ARMIJO_C = 1e-4
MIN_STEP = 1e-18


def loss_and_gradient(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, reg: float
) -> tuple[float, np.ndarray, float]:
    """Mean log-loss plus (reg/2)||w||^2 and its exact gradient.

    The bias is not regularized. y holds 0/1 labels.
    """
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * reg * float(w @ w)
    residual = (sigmoid(z) - y) / len(y)
    grad_w = X.T @ residual + reg * w
    grad_b = float(np.sum(residual))
    return loss, grad_w, grad_b


@dataclass
class LogisticModel:
    w: np.ndarray
    b: float
    reg: float
    converged: bool
    n_iterations: int
    grad_max_norm: float

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, seed: int, reg: float = 0.1):
        w = np.zeros(X.shape[1])
        b = 0.0
        step = 1.0
        loss, grad_w, grad_b = loss_and_gradient(w, b, X, y, reg)
        iterations = 0
        grad_max = max(float(np.max(np.abs(grad_w))), abs(grad_b))
        while grad_max >= GRADIENT_TOLERANCE and iterations < MAX_ITERATIONS:
            g_sq = float(grad_w @ grad_w) + grad_b**2
            # Backtracking line search with step growth between iterations.
            step = min(step * 2.0, 1e8)
            while step > MIN_STEP:
                w_new = w - step * grad_w
                b_new = b - step * grad_b
                loss_new, gw_new, gb_new = loss_and_gradient(w_new, b_new, X, y, reg)
                if loss_new <= loss - ARMIJO_C * step * g_sq:
                    break
                step *= 0.5
            w, b = w_new, b_new
            loss, grad_w, grad_b = loss_new, gw_new, gb_new
            grad_max = max(float(np.max(np.abs(grad_w))), abs(grad_b))
            iterations += 1
        return cls(
            w=w,
            b=b,
            reg=reg,
            converged=grad_max < GRADIENT_TOLERANCE,
            n_iterations=iterations,
            grad_max_norm=grad_max,
        )

    def raw_score(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(X @ self.w + self.b)

    def to_dict(self) -> dict:
        return {
            "w": self.w.tolist(),
            "b": self.b,
            "reg": self.reg,
            "converged": self.converged,
            "n_iterations": self.n_iterations,
            "grad_max_norm": self.grad_max_norm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        return cls(
            w=np.asarray(d["w"], dtype=np.float64),
            b=float(d["b"]),
            reg=float(d["reg"]),
            converged=bool(d["converged"]),
            n_iterations=int(d["n_iterations"]),
            grad_max_norm=float(d["grad_max_norm"]),
        )
