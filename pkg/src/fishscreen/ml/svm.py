"""Linear soft-margin SVM trained by SMO.

Solves the dual

    min_a  1/2 a'Qa - sum(a)   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j x_i.x_j

with maximal-violating-pair selection refined by second-order gain, then
sets the bias by exact one-dimensional minimisation of the primal objective
over the hinge breakpoints. The inner loop is compiled with numba; it is
sequential, so results do not depend on threading.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .scaling import ScalerParams

TOL = 1e-8
MAX_ITER = 100_000
TAU = 1e-12


class DegenerateLabels(ValueError):
    """Training labels contain a single class."""


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray
    bias: float
    C: float
    selected_indices: tuple = ()
    scaler: ScalerParams = None
    feature_names: tuple = ()
    iterations: int = 0

    def decision(self, X) -> np.ndarray:
        """Decision values for rows already restricted to the selected columns
        and scaled."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.weights):
            raise DimensionMismatch(f"expected {len(self.weights)} features, got {X.shape[1]}")
        return X @ self.weights + self.bias


def primal_objective(w, b, X, y, C) -> float:
    margins = y * (X @ w + b)
    return float(0.5 * np.dot(w, w) + C * np.sum(np.maximum(0.0, 1.0 - margins)))


def best_bias(w, X, y, C, b0: float) -> float:
    """Exact minimiser over b of the primal with ``w`` fixed.

    The objective is convex piecewise linear in b with breakpoints at
    b = y_i - w.x_i, so its minimum sits on one of them. ``b0`` is kept
    when it is already optimal to within rounding.
    """
    s = X @ w
    cands = y - s
    # hinge sum at every candidate, vectorised: (n_cand, n)
    loss = np.maximum(0.0, 1.0 - y[None, :] * (s[None, :] + cands[:, None])).sum(axis=1)
    best = int(np.argmin(loss))
    loss0 = np.maximum(0.0, 1.0 - y * (s + b0)).sum()
    if loss0 <= loss[best] + 1e-12 * max(1.0, loss[best]):
        return float(b0)
    return float(cands[best])


@njit(cache=True)
def _smo_loop(Q, y, C, tol, max_iter, alpha, grad):
    n = len(y)
    it = 0
    while it < max_iter:
        # maximal violating index i in I_up, smallest value over I_low
        i = -1
        m_up = -np.inf
        m_low = np.inf
        for t in range(n):
            yg = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if yg > m_up:
                    m_up = yg
                    i = t
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if yg < m_low:
                    m_low = yg
        if i < 0 or m_up - m_low < tol:
            break
        # second-order choice of j
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                b = m_up + y[t] * grad[t]
                if b > 0:
                    a = Q[i, i] + Q[t, t] - 2.0 * y[i] * y[t] * Q[i, t]
                    if a <= 0:
                        a = TAU
                    g = -(b * b) / a
                    if g < best:
                        best = g
                        j = t
        if j < 0:
            break

        ai_old = alpha[i]
        aj_old = alpha[j]
        if y[i] != y[j]:
            quad = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
            if quad <= 0:
                quad = TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            if quad <= 0:
                quad = TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
                if aj > C:
                    aj = C
                    ai = total - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = total
                if ai < 0:
                    ai = 0.0
                    aj = total
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - ai_old
        daj = aj - aj_old
        for t in range(n):
            grad[t] += Q[i, t] * dai + Q[j, t] * daj
        it += 1
    return it


def smo_dual(K: np.ndarray, y: np.ndarray, C: float, tol: float = TOL, max_iter: int = MAX_ITER):
    """Return ``(alpha, bias, iterations)`` for a precomputed kernel matrix."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = len(y)
    Q = np.ascontiguousarray((y[:, None] * y[None, :]) * K, dtype=np.float64)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = _smo_loop(Q, y, float(C), float(tol), int(max_iter), alpha, grad)

    # bias from free vectors, else the midpoint of the feasible interval
    yg = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(np.mean(yg[free]))
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = np.max(yg[up]) if up.any() else np.min(yg[low])
        lo = np.min(yg[low]) if low.any() else hi
        bias = float((hi + lo) / 2.0)
    return alpha, bias, it


def fit_linear_svm(X, y, C: float = 1.0, tol: float = TOL, max_iter: int = MAX_ITER):
    """Return ``(w, b, iterations)`` for labels in {+1, -1}."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if C <= 0:
        raise ValueError("C must be positive")
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("training labels contain a single class")
    alpha, b, it = smo_dual(X @ X.T, y, C, tol, max_iter)
    w = (alpha * y) @ X
    b = best_bias(w, X, y, C, b)
    return w, b, it


def train_svm(X, y, C: float = 1.0, selected_indices=(), scaler: ScalerParams = None,
              feature_names=()) -> SvmModel:
    """Fit on an already scaled matrix; labels +1 (ADHD) / -1 (Control)."""
    w, b, it = fit_linear_svm(X, y, C)
    return SvmModel(w, b, C, tuple(selected_indices), scaler, tuple(feature_names), it)


def predict(model: SvmModel, X) -> np.ndarray:
    """Labels in {+1, -1}; a zero decision value is Control (-1)."""
    return np.where(model.decision(X) > 0, 1, -1)
