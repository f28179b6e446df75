import dataclasses
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import main_event, with_trials
from fishscreen.model import Kind, Modality, Section, TrialRecord
from fishscreen.protocol import (AlignmentError, ProtocolConfig, ScoreState, build_schedule,
                                 ratio_changes, replay_score, score_event, write_schedule_csv)

EXPECTED_COUNTS = {
    Section.INITIAL_VISUAL: 10, Section.INITIAL_AUDITORY: 10, Section.PRACTICE: 32,
    Section.MAIN: 400, Section.FINAL_VISUAL: 10, Section.FINAL_AUDITORY: 10,
}


def _part_counts(schedule, part):
    return Counter(e.kind for e in schedule.section(Section.MAIN) if e.part == part)


def _longest_run(kinds, kind):
    best = run = 0
    for k in kinds:
        run = run + 1 if k is kind else 0
        best = max(best, run)
    return best


@pytest.mark.parametrize("seed", [0, 1, 42, 2**40 + 3])
def test_section_counts_and_part_ratios(seed):
    s = build_schedule(ProtocolConfig(seed=seed))
    assert len(s) == 472
    assert Counter(e.section for e in s.events) == EXPECTED_COUNTS
    for part in range(1, 9):
        c = _part_counts(s, part)
        if part % 2:
            assert (c[Kind.TARGET], c[Kind.NON_TARGET]) == (42, 8)
        else:
            assert (c[Kind.TARGET], c[Kind.NON_TARGET]) == (8, 42)
    prac = Counter(e.kind for e in s.section(Section.PRACTICE))
    assert (prac[Kind.TARGET], prac[Kind.NON_TARGET]) == (24, 8)


def test_single_modality_sections(schedule):
    for sec, mod in ((Section.INITIAL_VISUAL, Modality.VISUAL),
                     (Section.INITIAL_AUDITORY, Modality.AUDITORY),
                     (Section.FINAL_VISUAL, Modality.VISUAL),
                     (Section.FINAL_AUDITORY, Modality.AUDITORY)):
        evs = schedule.section(sec)
        assert all(e.modality is mod and e.kind is Kind.TARGET for e in evs)


def test_modality_alternates_inside_parts(schedule):
    for part in range(1, 9):
        mods = [e.modality for e in schedule.section(Section.MAIN) if e.part == part]
        assert all(a is not b for a, b in zip(mods, mods[1:]))
        assert Counter(mods) == {Modality.VISUAL: 25, Modality.AUDITORY: 25}


@pytest.mark.parametrize("seed", range(20))
def test_minority_runs_are_short(seed):
    s = build_schedule(ProtocolConfig(seed=seed))
    for part in range(1, 9):
        kinds = [e.kind for e in s.section(Section.MAIN) if e.part == part]
        minority = Kind.NON_TARGET if part % 2 else Kind.TARGET
        assert _longest_run(kinds, minority) <= 3
    assert _longest_run([e.kind for e in s.section(Section.PRACTICE)], Kind.NON_TARGET) <= 3


def test_same_seed_same_schedule(tmp_path):
    a = build_schedule(ProtocolConfig(seed=42))
    b = build_schedule(ProtocolConfig(seed=42))
    assert a == b
    write_schedule_csv(a, tmp_path / "a.csv")
    write_schedule_csv(b, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert build_schedule(ProtocolConfig(seed=43)) != a


def test_ratio_changes_eight_times(schedule):
    assert ratio_changes(schedule) == 8
    dominant = [_part_counts(schedule, p)[Kind.TARGET] > 25 for p in range(1, 9)]
    assert sum(a != b for a, b in zip(dominant, dominant[1:])) == 7


def test_onsets_and_duration(schedule):
    onsets = np.array([e.onset_s for e in schedule.events])
    assert np.allclose(np.diff(onsets), 1.5)
    assert schedule.duration_s == pytest.approx(708.0)
    assert all(e.feedback == (e.section is Section.PRACTICE) for e in schedule.events)


def test_config_validation():
    with pytest.raises(ValueError):
        ProtocolConfig(isi_ms=1000, stimulus_duration_ms=1200)
    with pytest.raises(ValueError):
        ProtocolConfig(practice_target_count=40)


# --- scoring ---------------------------------------------------------------

FISH = main_event(0, Kind.TARGET)
SHARK = main_event(1, Kind.NON_TARGET)


def test_combo_caps_at_five():
    st5, pts = score_event(ScoreState(combo=5), TrialRecord(FISH, True, 500.0))
    assert st5.combo == 5 and pts == 50


def test_shark_release_resets_combo():
    s, pts = score_event(ScoreState(combo=5), TrialRecord(SHARK, True, 300.0))
    assert (s.combo, pts, s.sharks_released) == (1, 0, 1)


def test_fast_release_earns_diamond():
    s, _ = score_event(ScoreState(combo=1), TrialRecord(FISH, True, 350.0))
    assert s.diamonds == 1


def test_multiplier_award_without_diamond():
    s, pts = score_event(ScoreState(combo=3, base_point=10), TrialRecord(FISH, True, 500.0))
    assert pts == 30 and s.diamonds == 0 and s.combo == 4


def test_withheld_shark_changes_nothing():
    s0 = ScoreState(combo=4, points=70)
    s, pts = score_event(s0, TrialRecord(SHARK, False, None))
    assert s == s0 and pts == 0


def test_omission_resets_combo():
    s, pts = score_event(ScoreState(combo=3), TrialRecord(FISH, False, None))
    assert s.combo == 1 and pts == 0


# (kind, responded, rt)
events = st.lists(st.tuples(st.sampled_from([Kind.TARGET, Kind.NON_TARGET]), st.booleans(),
                            st.floats(20.0, 1500.0)), max_size=60)


def _streak_oracle(seq):
    streak = 0
    for kind, responded, _ in seq:
        if kind is Kind.TARGET and responded:
            streak += 1
        elif responded or kind is Kind.TARGET:
            streak = 0
    return min(5, 1 + streak)


@settings(max_examples=300, deadline=None)
@given(events)
def test_combo_matches_streak_oracle(seq):
    state = ScoreState()
    for i, (kind, responded, rt) in enumerate(seq):
        ev = main_event(i % 400, kind)
        prev = state
        state, pts = score_event(state, TrialRecord(ev, responded, rt if responded else None))
        assert 1 <= state.combo <= 5
        assert state.points >= prev.points
        assert state.points - prev.points == pts
        if state.diamonds > prev.diamonds:
            assert rt < 400
    assert state.combo == _streak_oracle(seq)


def test_combo_oracle_ten_thousand_sequences():
    rng = np.random.default_rng(2024)
    kinds = (Kind.TARGET, Kind.NON_TARGET)
    for _ in range(10_000):
        n = int(rng.integers(0, 30))
        seq = [(kinds[int(rng.integers(2))], bool(rng.integers(2)), float(rng.uniform(20, 1500)))
               for _ in range(n)]
        state = ScoreState()
        for i, (kind, responded, rt) in enumerate(seq):
            state, _ = score_event(state, TrialRecord(main_event(i, kind), responded,
                                                      rt if responded else None))
        assert state.combo == _streak_oracle(seq)


# --- replay ----------------------------------------------------------------

def _perfect(schedule, rt=600.0):
    return tuple(TrialRecord(e, e.kind is Kind.TARGET, rt if e.kind is Kind.TARGET else None)
                 for e in schedule.events)


def _fold_oracle(trials, base=10):
    points, combo = 0, 1
    for t in trials:
        if t.stimulus.kind is Kind.TARGET and t.responded:
            points += base * combo
            combo = min(combo + 1, 5)
        elif t.responded or t.stimulus.kind is Kind.TARGET:
            combo = 1
    return points


def test_all_correct_replay(session, schedule):
    s = replay_score(with_trials(session, _perfect(schedule)))
    assert s.combo == 5 and s.diamonds == 0
    assert s.fish == sum(e.kind is Kind.TARGET for e in schedule.events)


def test_all_omitted_replay(session, schedule):
    trials = tuple(TrialRecord(e, False, None) for e in schedule.events)
    s = replay_score(with_trials(session, trials))
    assert s.points == 0 and s.combo == 1


@pytest.mark.parametrize("k", [0, 5, 100, 300, 471])
def test_one_mistake_matches_fold(session, schedule, k):
    trials = list(_perfect(schedule))
    e = trials[k].stimulus
    trials[k] = TrialRecord(e, not trials[k].responded, None if trials[k].responded else 450.0)
    s = replay_score(with_trials(session, trials))
    assert s.points == _fold_oracle(trials)


def test_replay_of_simulated_session_matches_fold(session):
    assert replay_score(session).points == _fold_oracle(session.trials)


def test_replay_alignment(session):
    with pytest.raises(AlignmentError):
        replay_score(with_trials(session, session.trials[:-2]))
