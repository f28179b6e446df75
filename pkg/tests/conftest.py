import numpy as np
import pytest

from fishscreen.model import (ImuStream, Kind, Label, Modality, Section, Session,
                              StimulusEvent, TrialRecord)
from fishscreen.protocol import ProtocolConfig, build_schedule
from fishscreen.simulator import SubjectProfile, simulate_session


@pytest.fixture(scope="session")
def schedule():
    return build_schedule(ProtocolConfig(seed=11))


@pytest.fixture(scope="session")
def session(schedule):
    return simulate_session(SubjectProfile(), schedule, seed=5, subject_id="S001",
                            label=Label.ADHD)


def main_event(index, kind=Kind.TARGET, modality=Modality.VISUAL, part=None):
    """A Main-section event at pooled position ``index``."""
    if part is None:
        part = index // 50 + 1
    return StimulusEvent(Section.MAIN, part, index, modality, kind, 1.5 * index)


def trial(index, kind=Kind.TARGET, responded=True, rt=500.0, modality=Modality.VISUAL, part=None):
    return TrialRecord(main_event(index, kind, modality, part), responded,
                       rt if responded else None)


def stream(columns, rate_hz=25):
    """ImuStream from a dict of channel -> array; missing channels are zero."""
    n = len(next(iter(columns.values())))
    data = np.zeros((n, 6))
    for name, values in columns.items():
        data[:, ("ax", "ay", "az", "gx", "gy", "gz").index(name)] = values
    return ImuStream(np.arange(n) / rate_hz, data, rate_hz)


def with_trials(session: Session, trials) -> Session:
    return Session(session.subject_id, session.schedule, tuple(trials), session.imu,
                   session.label, session.meta)


# --- acceptance summary ------------------------------------------------------

ACCEPTANCE = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (passed, detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")
