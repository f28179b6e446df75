"""Confusion counts and the derived screening metrics (ADHD positive)."""
from __future__ import annotations

import numpy as np

from ..model import EvalReport
from .svm import SvmModel, predict


def confusion(y_true, y_pred) -> EvalReport:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays differ in shape")
    pos_t, pos_p = y_true > 0, y_pred > 0
    return EvalReport(tp=int(np.sum(pos_t & pos_p)), fp=int(np.sum(~pos_t & pos_p)),
                      tn=int(np.sum(~pos_t & ~pos_p)), fn=int(np.sum(pos_t & ~pos_p)))


def evaluate(model: SvmModel, X, y) -> EvalReport:
    """Confusion report of ``model`` on scaled, column-selected rows."""
    return confusion(y, predict(model, X))
