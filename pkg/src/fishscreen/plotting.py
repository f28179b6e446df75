"""Report figures: per-mode confusion matrices and a metric comparison."""
from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 10,
    "axes.titlesize": 11,
    "axes.labelsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.bbox": "tight",
    "svg.hashsalt": "fishscreen",
}
MODE_TITLES = {1: "in-game", 2: "movement", 3: "combined"}
# no Software/Date metadata, so reruns produce identical files
_META = {"Software": None}


def _save(fig, path, provenance=None):
    meta = dict(_META)
    if provenance is not None:
        meta["Description"] = json.dumps(provenance, sort_keys=True)
    fig.savefig(path, metadata=meta)
    plt.close(fig)


def plot_confusion(counts: dict, path, title: str = "", provenance=None) -> None:
    """Draw a 2x2 matrix; rows are true labels, columns predictions, ADHD first."""
    m = np.array([[counts["tp"], counts["fn"]], [counts["fp"], counts["tn"]]])
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(3.2, 3.0))
        ax.imshow(m, cmap="Blues", vmin=0, vmax=max(int(m.max()), 1))
        for (i, j), v in np.ndenumerate(m):
            ax.text(j, i, str(v), ha="center", va="center",
                    color="white" if v > m.max() / 2 else "black", fontsize=14)
        ax.set_xticks([0, 1], ["ADHD", "Control"])
        ax.set_yticks([0, 1], ["ADHD", "Control"])
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        if title:
            ax.set_title(title)
        _save(fig, path, provenance)


def plot_mode_metrics(modes: dict, path, provenance=None) -> None:
    """Grouped bars of the five metrics for each mode; undefined metrics are skipped."""
    metrics = ("accuracy", "sensitivity", "specificity", "precision", "f1")
    keys = sorted(modes, key=int)
    width = 0.8 / max(len(keys), 1)
    x = np.arange(len(metrics))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6.0, 3.2))
        for k, mode in enumerate(keys):
            vals = [modes[mode].get(name) for name in metrics]
            heights = [v if v is not None else 0.0 for v in vals]
            ax.bar(x + (k - (len(keys) - 1) / 2) * width, heights, width,
                   label=f"mode {mode} ({MODE_TITLES.get(int(mode), '')})")
        ax.set_xticks(x, metrics)
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("test-set value")
        ax.legend(frameon=False, fontsize=8, loc="lower right")
        _save(fig, path, provenance)
