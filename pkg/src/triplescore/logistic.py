"""L2-regularized logistic regression trained by damped Newton iterations.

Objective (labels s_i in {-1, +1}, bias unpenalized):

    f(w, b) = 0.5 * ||w||^2 + cost * sum_i log(1 + exp(-s_i (w . x_i + b)))

The objective is smooth and strictly convex in (w, b) for cost > 0, so
Newton steps with a backtracking line search converge to the unique
optimum; iteration stops once the full gradient norm drops to `tol`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import TrainingError

FEATURE_MODES = ("counts", "binary")


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def objective(w: np.ndarray, b: float, X: np.ndarray, s: np.ndarray, cost: float) -> float:
    z = X @ w + b
    return 0.5 * float(w @ w) + cost * float(np.logaddexp(0.0, -s * z).sum())


def gradient(
    w: np.ndarray, b: float, X: np.ndarray, s: np.ndarray, cost: float
) -> tuple[np.ndarray, float]:
    z = X @ w + b
    miss = sigmoid(-s * z)
    grad_w = w - cost * (X.T @ (s * miss))
    grad_b = -cost * float((s * miss).sum())
    return grad_w, grad_b


def train_logistic(
    X: np.ndarray,
    y: Sequence[int],
    cost: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> tuple[np.ndarray, float]:
    """Fit weights and bias; y holds binary class labels (0/1).

    Requires at least one example of each class. Raises TrainingError if the
    gradient norm has not reached *tol* within *max_iter* Newton steps.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-D with one row per label")
    n, d = X.shape
    n_pos = int((y == 1).sum())
    if n_pos == 0 or n_pos == n:
        raise TrainingError("training needs at least one positive and one negative row")
    s = np.where(y == 1, 1.0, -1.0)

    w = np.zeros(d)
    b = 0.0
    f = objective(w, b, X, s, cost)
    for _ in range(max_iter):
        grad_w, grad_b = gradient(w, b, X, s, cost)
        grad_norm = float(np.sqrt(grad_w @ grad_w + grad_b * grad_b))
        if grad_norm <= tol:
            return w, b

        z = X @ w + b
        p = sigmoid(z)
        curv = cost * p * (1.0 - p)
        A = np.hstack([X, np.ones((n, 1))])
        hess = A.T @ (A * curv[:, None])
        hess[:d, :d] += np.eye(d)
        g = np.append(grad_w, grad_b)
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            hess[np.diag_indices_from(hess)] += 1e-10
            step = np.linalg.solve(hess, -g)

        # Backtracking line search (Armijo) on the convex objective.
        slope = float(g @ step)
        alpha = 1.0
        for _ in range(60):
            w_new = w + alpha * step[:d]
            b_new = b + alpha * step[d]
            f_new = objective(w_new, b_new, X, s, cost)
            if f_new <= f + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
        else:
            raise TrainingError("line search failed; objective not decreasing")
        w, b, f = w_new, b_new, f_new

    grad_w, grad_b = gradient(w, b, X, s, cost)
    grad_norm = float(np.sqrt(grad_w @ grad_w + grad_b * grad_b))
    if grad_norm <= tol:
        return w, b
    raise TrainingError(
        f"no convergence in {max_iter} Newton steps (gradient norm {grad_norm:.3e})"
    )


@dataclass
class LogisticModel:
    """Per-label binary classifier over the label's top keyword counts.

    ``keyword_terms`` are the label's leading keywords in rank order; a
    person's input vector holds the occurrence counts of those terms in the
    person's document (or presence indicators under the binary mode). A
    model with no terms is the intercept-only degenerate case.
    """

    label: str
    keyword_terms: list[str] = field(default_factory=list)
    weights: list[float] = field(default_factory=list)
    bias: float = 0.0
    cost: float = 1.0

    def input_vector(
        self, term_counts: Mapping[str, int], feature_mode: str = "counts"
    ) -> list[float]:
        if feature_mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature mode {feature_mode!r}")
        counts = [float(term_counts.get(t, 0)) for t in self.keyword_terms]
        if feature_mode == "binary":
            counts = [1.0 if c > 0 else 0.0 for c in counts]
        return counts

    def estimate(
        self, term_counts: Mapping[str, int], feature_mode: str = "counts"
    ) -> float:
        x = self.input_vector(term_counts, feature_mode)
        z = sum(wi * xi for wi, xi in zip(self.weights, x)) + self.bias
        return float(sigmoid(np.array([z]))[0])
