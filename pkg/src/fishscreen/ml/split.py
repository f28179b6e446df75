"""Seeded stratified train/test split."""
from __future__ import annotations

import math

import numpy as np

from ..model import Dataset


class InsufficientClass(ValueError):
    """A class has fewer than two members, so it cannot appear on both sides."""


def stratified_indices(y, ratio: float = 0.5, seed: int = 0):
    """Return sorted ``(train_idx, test_idx)`` preserving class proportions.

    Each class contributes ``n_c * ratio`` rows to training. When that is not
    an integer a seeded coin picks floor or ceil, independently per class;
    the result is then clamped so both sides keep at least one member.
    """
    y = np.asarray(y)
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    train, test = [], []
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        if len(members) < 2:
            raise InsufficientClass(f"class {cls} has {len(members)} member(s); need at least 2")
        exact = len(members) * ratio
        k = math.floor(exact)
        if k != exact and rng.random() < 0.5:
            k += 1
        k = min(max(k, 1), len(members) - 1)
        perm = members[rng.permutation(len(members))]
        train.extend(perm[:k])
        test.extend(perm[k:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def stratified_split(dataset: Dataset, ratio: float = 0.5, seed: int = 0):
    tr, te = stratified_indices(dataset.labels, ratio, seed)
    s = dataset.sessions
    return Dataset(tuple(s[i] for i in tr)), Dataset(tuple(s[i] for i in te))
