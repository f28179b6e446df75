"""Stimulus schedule generation and the combo scoring automaton."""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .model import (Kind, Modality, ProtocolConfig, Section, Session,
                    StimulusEvent, StimulusSchedule, TrialRecord)

__all__ = ["ProtocolConfig", "StimulusSchedule", "ScoreState", "AlignmentError",
           "build_schedule", "score_event", "replay_score", "write_schedule_csv",
           "MAIN_PARTS", "PART_TRIALS", "ratio_changes", "COMBO_MAX", "DIAMOND_RT_MS"]

MAIN_PARTS = 8
PART_TRIALS = 50
FREQUENT_TARGETS = 42      # target count in odd parts; even parts are reversed
PRACTICE_TRIALS = 32
ONE_MODALITY_TRIALS = 10
MAX_MINORITY_RUN = 3
COMBO_MAX = 5
DIAMOND_RT_MS = 400.0


def _constrained_order(rng: np.random.Generator, n_target: int, n_non: int) -> list:
    """Shuffle target/non-target kinds so the minority kind never runs longer
    than ``MAX_MINORITY_RUN``.

    Rejection sampling; with the counts used here a valid order is usually
    found within a handful of draws.
    """
    kinds = np.array([Kind.TARGET] * n_target + [Kind.NON_TARGET] * n_non, dtype=object)
    minority = Kind.NON_TARGET if n_non <= n_target else Kind.TARGET
    for _ in range(10_000):
        order = kinds[rng.permutation(len(kinds))]
        run = longest = 0
        for k in order:
            run = run + 1 if k is minority else 0
            longest = max(longest, run)
        if longest <= MAX_MINORITY_RUN:
            return list(order)
    raise RuntimeError("could not satisfy run constraint")  # unreachable for the shipped counts


def _alternating(rng: np.random.Generator, n: int) -> list:
    offset = int(rng.integers(2))
    mods = (Modality.VISUAL, Modality.AUDITORY)
    return [mods[(offset + i) % 2] for i in range(n)]


def build_schedule(config: ProtocolConfig = ProtocolConfig()) -> StimulusSchedule:
    """Build the six-section trial plan.

    Initial and final sections hold fish only in one modality. Practice mixes
    ``practice_target_count`` fish with sharks; the main section has eight
    50-trial parts, 42:8 fish:shark in odd parts and 8:42 in even parts.
    Modality alternates trial by trial within practice and every main part
    from a seeded starting modality. Identical configs give identical schedules.
    """
    rng = np.random.default_rng(config.seed & 0xFFFFFFFFFFFFFFFF)
    blocks = []  # (section, part, kinds, modalities)
    blocks.append((Section.INITIAL_VISUAL, 0, [Kind.TARGET] * ONE_MODALITY_TRIALS,
                   [Modality.VISUAL] * ONE_MODALITY_TRIALS))
    blocks.append((Section.INITIAL_AUDITORY, 0, [Kind.TARGET] * ONE_MODALITY_TRIALS,
                   [Modality.AUDITORY] * ONE_MODALITY_TRIALS))
    n_t = config.practice_target_count
    blocks.append((Section.PRACTICE, 0,
                   _constrained_order(rng, n_t, PRACTICE_TRIALS - n_t),
                   _alternating(rng, PRACTICE_TRIALS)))
    for part in range(1, MAIN_PARTS + 1):
        n_t = FREQUENT_TARGETS if part % 2 else PART_TRIALS - FREQUENT_TARGETS
        blocks.append((Section.MAIN, part,
                       _constrained_order(rng, n_t, PART_TRIALS - n_t),
                       _alternating(rng, PART_TRIALS)))
    blocks.append((Section.FINAL_VISUAL, 0, [Kind.TARGET] * ONE_MODALITY_TRIALS,
                   [Modality.VISUAL] * ONE_MODALITY_TRIALS))
    blocks.append((Section.FINAL_AUDITORY, 0, [Kind.TARGET] * ONE_MODALITY_TRIALS,
                   [Modality.AUDITORY] * ONE_MODALITY_TRIALS))

    events = []
    isi_s = config.isi_ms / 1000.0
    counters = {}
    for section, part, kinds, mods in blocks:
        for kind, mod in zip(kinds, mods):
            idx = counters.get(section, 0)
            counters[section] = idx + 1
            events.append(StimulusEvent(section, part, idx, mod, kind, round(len(events) * isi_s, 9)))
    return StimulusSchedule(tuple(events), config)


def ratio_changes(schedule: StimulusSchedule) -> int:
    """Count how often the fish:shark ratio changes across the mixed blocks
    (practice followed by the eight main parts)."""
    ratios = []
    prac = schedule.section(Section.PRACTICE)
    if prac:
        ratios.append(sum(e.kind is Kind.TARGET for e in prac) / len(prac))
    for part in range(1, MAIN_PARTS + 1):
        evs = [e for e in schedule.section(Section.MAIN) if e.part == part]
        ratios.append(sum(e.kind is Kind.TARGET for e in evs) / len(evs))
    return sum(a != b for a, b in zip(ratios, ratios[1:]))


def write_schedule_csv(schedule: StimulusSchedule, path, header_comment: str = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["section", "part", "index", "modality", "kind", "onset_s"])
        for e in schedule.events:
            w.writerow([e.section.value, e.part, e.index, e.modality.value, e.kind.value, repr(e.onset_s)])


@dataclass(frozen=True)
class ScoreState:
    combo: int = 1
    fish: int = 0
    sharks_released: int = 0
    diamonds: int = 0
    points: int = 0
    base_point: int = 10


class AlignmentError(ValueError):
    pass


def score_event(state: ScoreState, trial: TrialRecord):
    """Advance the scoring automaton by one finished trial.

    Returns ``(new_state, awarded_points)``. A correct fish release pays
    ``base_point * combo`` and then bumps the combo (capped at 5); a release
    faster than 400 ms also earns a diamond. Releasing a shark or missing a
    fish resets the combo to 1. Withholding on a shark changes nothing.
    """
    kind = trial.stimulus.kind
    if kind is Kind.TARGET and trial.responded:
        awarded = state.base_point * state.combo
        fast = trial.rt_ms is not None and trial.rt_ms < DIAMOND_RT_MS
        return replace(state, combo=min(state.combo + 1, COMBO_MAX), fish=state.fish + 1,
                       diamonds=state.diamonds + int(fast), points=state.points + awarded), awarded
    if kind is Kind.NON_TARGET and trial.responded:
        return replace(state, combo=1, sharks_released=state.sharks_released + 1), 0
    if kind is Kind.TARGET:
        return replace(state, combo=1), 0
    return state, 0


def replay_score(session: Session) -> ScoreState:
    if len(session.trials) != len(session.schedule.events):
        raise AlignmentError(
            f"{len(session.trials)} trials for {len(session.schedule.events)} scheduled events")
    state = ScoreState(base_point=session.schedule.config.base_point)
    for tr in session.trials:
        state, _ = score_event(state, tr)
    return state
