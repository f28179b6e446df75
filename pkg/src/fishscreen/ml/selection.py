"""Feature selection: correlation filter, wrapper forward/backward search and
a voting consensus.

Wrapper methods score a candidate subset by seeded stratified k-fold
cross-validated accuracy of the linear SVM on the (already scaled) training
matrix. Accuracies are compared as integer hit counts, so ties are exact and
are broken towards the lower feature index.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .svm import fit_linear_svm

N_FOLDS = 5
CORRELATION_THRESHOLD = 0.9


class Method(str, enum.Enum):
    CORRELATION = "Correlation"
    FORWARD = "Forward"
    BACKWARD = "Backward"


@dataclass(frozen=True)
class SelectionResult:
    method: Method
    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ValueError("selected indices must be unique")
        object.__setattr__(self, "indices", idx)


def fold_ids(y, k: int = N_FOLDS, seed: int = 0) -> np.ndarray:
    """Stratified fold assignment: each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    folds = np.empty(len(y), dtype=int)
    offset = 0
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        perm = members[rng.permutation(len(members))]
        folds[perm] = (np.arange(len(perm)) + offset) % k
        offset += len(perm)
    return folds


def cv_hits(X, y, folds, C: float = 1.0) -> int:
    """Number of rows classified correctly across all held-out folds."""
    hits = 0
    for f in np.unique(folds):
        te = folds == f
        tr = ~te
        if len(np.unique(y[tr])) < 2:
            continue  # fold without both classes in training scores nothing
        w, b, _ = fit_linear_svm(X[tr], y[tr], C)
        pred = np.where(X[te] @ w + b > 0, 1, -1)
        hits += int(np.sum(pred == y[te]))
    return hits


def cv_accuracy(X, y, C: float = 1.0, seed: int = 0, k: int = N_FOLDS) -> float:
    y = np.asarray(y)
    return cv_hits(np.asarray(X, dtype=float), y, fold_ids(y, k, seed), C) / len(y)


def _pearson_matrix(X: np.ndarray) -> np.ndarray:
    D = X - X.mean(axis=0)
    norms = np.sqrt(np.sum(D * D, axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        R = (D.T @ D) / np.outer(norms, norms)
    return np.nan_to_num(R, nan=0.0, posinf=0.0, neginf=0.0)


def correlation_filter(X, threshold: float = CORRELATION_THRESHOLD) -> SelectionResult:
    """Greedy scan in column order: every surviving column removes all later
    columns with |r| >= threshold. Constant columns correlate with nothing."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    X = np.asarray(X, dtype=float)
    R = np.abs(_pearson_matrix(X))
    n = X.shape[1]
    dropped = np.zeros(n, dtype=bool)
    for i in range(n):
        if dropped[i]:
            continue
        later = np.arange(i + 1, n)
        # small tolerance so an exact duplicate always reaches threshold 1.0
        dropped[later[R[i, later] >= threshold - 1e-12]] = True
    return SelectionResult(Method.CORRELATION, tuple(np.flatnonzero(~dropped)))


def forward_select(X, y, max_k: int = 10, seed: int = 0, C: float = 1.0,
                   k_folds: int = N_FOLDS) -> SelectionResult:
    """Greedy forward search; stops when no feature adds a correct CV hit."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    folds = fold_ids(y, k_folds, seed)
    chosen = []
    current = 0
    while len(chosen) < max_k:
        best_f, best_hits = None, current
        for f in range(X.shape[1]):
            if f in chosen:
                continue
            hits = cv_hits(X[:, chosen + [f]], y, folds, C)
            if hits > best_hits:
                best_f, best_hits = f, hits
        if best_f is None:
            break
        chosen.append(best_f)
        current = best_hits
    return SelectionResult(Method.FORWARD, tuple(chosen))


def backward_eliminate(X, y, seed: int = 0, C: float = 1.0,
                       k_folds: int = N_FOLDS) -> SelectionResult:
    """Greedy backward search from the full set.

    Each round removes the feature whose removal gives the highest CV hit
    count, provided that count does not fall below the current one.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    folds = fold_ids(y, k_folds, seed)
    kept = list(range(X.shape[1]))
    current = cv_hits(X[:, kept], y, folds, C) if kept else 0
    while len(kept) > 1:
        best_f, best_hits = None, -1
        for f in kept:
            hits = cv_hits(X[:, [g for g in kept if g != f]], y, folds, C)
            if hits > best_hits:
                best_f, best_hits = f, hits
        if best_hits < current:
            break
        kept.remove(best_f)
        current = best_hits
    return SelectionResult(Method.BACKWARD, tuple(kept))


@dataclass(frozen=True)
class Consensus:
    indices: tuple
    empty: bool
    votes: dict


def consensus_select(results, min_votes: int = 2) -> Consensus:
    """Indices picked by at least ``min_votes`` methods, in index order.

    An empty consensus is flagged, not raised; callers usually fall back to
    the forward-selection result (see :func:`with_fallback`).
    """
    results = list(results)
    if len(results) < 2:
        raise ValueError("consensus needs at least two selection results")
    votes = {}
    for r in results:
        for i in r.indices:
            votes[i] = votes.get(i, 0) + 1
    chosen = tuple(sorted(i for i, v in votes.items() if v >= min_votes))
    return Consensus(chosen, not chosen, dict(sorted(votes.items())))


def with_fallback(consensus: Consensus, results) -> tuple:
    if not consensus.empty:
        return consensus.indices
    for r in results:
        if r.method is Method.FORWARD:
            return tuple(sorted(r.indices))
    return ()
