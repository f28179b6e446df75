"""In-game behavioural scales computed from the main-section trial log.

Nine scales per modality, visual block first, 18 values in total. Scale
functions take the main trials of a single modality in presentation order.
Windows that refer to main-section position (stamina, persistence, vigilance)
use ``stimulus.index`` and ``stimulus.part``, so they are unaffected by the
other modality's trials.

When a scale cannot be computed (for example no correct responses) the value
is 0 and the scale name is reported in the degeneracy flags.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Kind, Modality, Session

SCALES = ("prudence", "consistency", "stamina", "vigilance", "focus",
          "speed", "comprehension", "persistence", "sensory")
MODALITY_PREFIX = {Modality.VISUAL: "visual", Modality.AUDITORY: "auditory"}
INGAME_MANIFEST = tuple(f"{MODALITY_PREFIX[m]}_{s}"
                        for m in (Modality.VISUAL, Modality.AUDITORY) for s in SCALES)

MAIN_LENGTH = 400
STAMINA_WINDOW = 200
ANTICIPATORY_MS = 100.0
FREQUENT_PARTS = (1, 3, 5, 7)
RARE_PARTS = (2, 4, 6, 8)


def _correct_rts(trials) -> np.ndarray:
    return np.array([t.rt_ms for t in trials if t.stimulus.kind is Kind.TARGET and t.responded],
                    dtype=float)


def consistency(trials):
    """Coefficient of variation (sample sd / mean) of correct RTs.

    Returns ``(value, degenerate)``; fewer than two correct RTs gives 0.
    """
    rts = _correct_rts(trials)
    if len(rts) < 2:
        return 0.0, True
    return float(np.std(rts, ddof=1) / np.mean(rts)), False


def stamina(trials, window: int = STAMINA_WINDOW, total: int = MAIN_LENGTH):
    """Mean correct RT in the last ``window`` main positions minus the first."""
    early = _correct_rts([t for t in trials if t.stimulus.index < window])
    late = _correct_rts([t for t in trials if t.stimulus.index >= total - window])
    if not len(early) or not len(late):
        return 0.0, True
    return float(np.mean(late) - np.mean(early)), False


def _omission_rate(trials):
    targets = [t for t in trials if t.stimulus.kind is Kind.TARGET]
    if not targets:
        return 0.0, True
    return sum(not t.responded for t in targets) / len(targets), False


def vigilance_components(trials):
    """Omission rates in target-frequent and target-rare parts, plus a flag."""
    freq, d1 = _omission_rate([t for t in trials if t.stimulus.part in FREQUENT_PARTS])
    rare, d2 = _omission_rate([t for t in trials if t.stimulus.part in RARE_PARTS])
    return freq, rare, d1 or d2


def vigilance(trials):
    freq, rare, degenerate = vigilance_components(trials)
    return (freq + rare) / 2.0, degenerate


def comprehension(trials):
    """Share of trials that are isolated errors.

    An error is isolated when every existing neighbour (previous and next
    trial of the same modality) is correct; the first and last trial have
    only one neighbour.
    """
    n = len(trials)
    if n == 0:
        return 0.0, True
    ok = [t.correct for t in trials]
    isolated = 0
    for i in range(n):
        if ok[i]:
            continue
        if (i == 0 or ok[i - 1]) and (i == n - 1 or ok[i + 1]):
            isolated += 1
    return isolated / n, False


def prudence(trials):
    sharks = [t for t in trials if t.stimulus.kind is Kind.NON_TARGET]
    if not sharks:
        return 1.0, True
    return 1.0 - sum(t.responded for t in sharks) / len(sharks), False


def speed(trials):
    rts = _correct_rts(trials)
    if not len(rts):
        return 0.0, True
    return float(np.mean(rts)), False


def focus(trials):
    rts = np.array([t.rt_ms for t in trials if t.responded], dtype=float)
    if len(rts) < 2:
        return 0.0, True
    return float(np.var(rts)), False


def persistence(trials):
    """Omission rate in the last main part minus the first part of the same
    parity (part 8 minus part 2)."""
    last, d1 = _omission_rate([t for t in trials if t.stimulus.part == 8])
    first, d2 = _omission_rate([t for t in trials if t.stimulus.part == 2])
    return last - first, d1 or d2


def sensory(trials):
    if not trials:
        return 0.0, True
    return sum(t.responded and t.rt_ms < ANTICIPATORY_MS for t in trials) / len(trials), False


SCALE_FUNCS = {
    "prudence": prudence, "consistency": consistency, "stamina": stamina,
    "vigilance": vigilance, "focus": focus, "speed": speed,
    "comprehension": comprehension, "persistence": persistence, "sensory": sensory,
}


@dataclass(frozen=True)
class InGameFeatureVector:
    values: tuple
    degenerate: frozenset = frozenset()
    extras: tuple = ()  # (name, value) pairs not part of the manifest

    names = INGAME_MANIFEST

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))

    def __getitem__(self, name: str) -> float:
        return self.values[self.names.index(name)]

    def __len__(self) -> int:
        return len(self.values)


def extract_ingame_features(session: Session) -> InGameFeatureVector:
    values, flags, extras = [], set(), []
    for mod in (Modality.VISUAL, Modality.AUDITORY):
        trials = session.main_trials(mod)
        prefix = MODALITY_PREFIX[mod]
        for scale in SCALES:
            v, bad = SCALE_FUNCS[scale](trials)
            values.append(float(v))
            if bad:
                flags.add(f"{prefix}_{scale}")
        freq, rare, _ = vigilance_components(trials)
        extras += [(f"{prefix}_vigilance_frequent", freq), (f"{prefix}_vigilance_rare", rare)]
    return InGameFeatureVector(tuple(values), frozenset(flags), tuple(extras))
