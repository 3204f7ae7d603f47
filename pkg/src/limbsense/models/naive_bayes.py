"""Gaussian naive Bayes with a per-dimension variance floor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VARIANCE_FLOOR = 1e-9


@dataclass
class NaiveBayesModel:
    means: np.ndarray  # (2, d), row c = class c
    variances: np.ndarray  # (2, d), floored
    log_priors: np.ndarray  # (2,)

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, seed: int):
        means = np.empty((2, X.shape[1]))
        variances = np.empty((2, X.shape[1]))
        log_priors = np.empty(2)
        for c in (0, 1):
            rows = X[y == c]
            means[c] = rows.mean(axis=0)
            variances[c] = np.maximum(rows.var(axis=0), VARIANCE_FLOOR)
            log_priors[c] = np.log(len(rows) / len(X))
        return cls(means=means, variances=variances, log_priors=log_priors)

    def _joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        ll = np.empty((len(X), 2))
        for c in (0, 1):
            gauss = -0.5 * (
                np.log(2.0 * np.pi * self.variances[c])
                + (X - self.means[c]) ** 2 / self.variances[c]
            )
            ll[:, c] = self.log_priors[c] + gauss.sum(axis=1)
        return ll

    def raw_score(self, X: np.ndarray) -> np.ndarray:
        """Posterior probability of the severe class, computed in log domain."""
        ll = self._joint_log_likelihood(X)
        return np.exp(ll[:, 1] - np.logaddexp(ll[:, 0], ll[:, 1]))

    def to_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "log_priors": self.log_priors.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveBayesModel":
        return cls(
            means=np.asarray(d["means"], dtype=np.float64),
            variances=np.asarray(d["variances"], dtype=np.float64),
            log_priors=np.asarray(d["log_priors"], dtype=np.float64),
        )
