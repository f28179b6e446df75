"""Brute-force reference for the soft-margin linear SVM on tiny problems.

At the optimum every point is either outside the margin (alpha = 0), on it
(0 < alpha < C) or inside it (alpha = C). For each such partition with at
most ``max_free`` on-margin points, the on-margin equalities together with
sum(alpha * y) = 0 form a small linear system. Its solution gives w; the
bias is then chosen by scanning every hinge breakpoint. Every candidate is a
feasible primal point, so the smallest objective found is an upper bound on
the optimum, and it is exact once the optimal partition is enumerated. With
d features, a generic optimum has at most d + 1 free points.

Nothing here is shared with the package implementation.
"""
from itertools import combinations, product

import numpy as np


def objective(w, b, X, y, C):
    hinge = 0.0
    for xi, yi in zip(X, y):
        hinge += max(0.0, 1.0 - yi * (float(np.dot(w, xi)) + b))
    return 0.5 * float(np.dot(w, w)) + C * hinge


def exact_bias(w, X, y, C):
    best = None
    for xi, yi in zip(X, y):
        b = yi - float(np.dot(w, xi))
        val = objective(w, b, X, y, C)
        if best is None or val < best[0]:
            best = (val, b)
    return best


def solve(X, y, C, max_free=3):
    """Return ``(objective, w, b)`` of the best enumerated candidate."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    best = (np.inf, None, None)
    for k in range(max_free + 1):
        for free in combinations(range(n), k):
            rest = [i for i in range(n) if i not in free]
            for upper_mask in product((0, 1), repeat=len(rest)):
                upper = [i for i, u in zip(rest, upper_mask) if u]
                alpha = np.zeros(n)
                alpha[upper] = C
                if k:
                    F = list(free)
                    G = X[F] @ X[F].T * np.outer(y[F], y[F])
                    A = np.zeros((k + 1, k + 1))
                    A[:k, :k] = G
                    A[:k, k] = y[F]
                    A[k, :k] = y[F]
                    rhs = np.ones(k + 1)
                    rhs[:k] -= y[F] * (X[F] @ ((alpha * y) @ X))
                    rhs[k] = -np.dot(alpha, y)
                    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
                    alpha[F] = sol[:k]
                w = (alpha * y) @ X
                val, b = exact_bias(w, X, y, C)
                if val < best[0]:
                    best = (val, w, b)
    return best


def corpus(n_instances=25, seed=20240601):
    """Fixed random instances: 4 to 8 points, 2 features, both classes."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n_instances:
        n = int(rng.integers(4, 9))
        X = rng.uniform(0.0, 1.0, size=(n, 2))
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        if len(set(y)) < 2:
            continue
        C = float(rng.choice([0.5, 1.0, 10.0]))
        out.append((X, y, C))
    return out
