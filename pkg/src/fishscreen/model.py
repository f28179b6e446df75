"""Domain types shared across the pipeline, plus session validation.

Everything here is immutable after construction. Sensor values are kept in
raw device units; no gravity removal or unit conversion is ever applied.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

IMU_RATE_HZ = 25
IMU_CHANNELS = ("ax", "ay", "az", "gx", "gy", "gz")


class Section(str, enum.Enum):
    INITIAL_VISUAL = "InitialVisual"
    INITIAL_AUDITORY = "InitialAuditory"
    PRACTICE = "Practice"
    MAIN = "Main"
    FINAL_VISUAL = "FinalVisual"
    FINAL_AUDITORY = "FinalAuditory"


class Modality(str, enum.Enum):
    VISUAL = "Visual"
    AUDITORY = "Auditory"


class Kind(str, enum.Enum):
    TARGET = "Target"        # fish
    NON_TARGET = "NonTarget"  # shark


class Label(str, enum.Enum):
    ADHD = "ADHD"
    CONTROL = "Control"

    @property
    def sign(self) -> int:
        return 1 if self is Label.ADHD else -1


@dataclass(frozen=True)
class StimulusEvent:
    section: Section
    part: int
    index: int
    modality: Modality
    kind: Kind
    onset_s: float

    @property
    def feedback(self) -> bool:
        """Practice trials give immediate error feedback in the game."""
        return self.section is Section.PRACTICE


def is_correct(kind: Kind, responded: bool) -> bool:
    """A release is correct on a fish, a withhold is correct on a shark."""
    return responded if kind is Kind.TARGET else not responded


@dataclass(frozen=True)
class TrialRecord:
    stimulus: StimulusEvent
    responded: bool
    rt_ms: Optional[float] = None

    @property
    def correct(self) -> bool:
        return is_correct(self.stimulus.kind, self.responded)

    @property
    def omission(self) -> bool:
        return self.stimulus.kind is Kind.TARGET and not self.responded

    @property
    def commission(self) -> bool:
        return self.stimulus.kind is Kind.NON_TARGET and self.responded


@dataclass(frozen=True)
class ImuSample:
    t_s: float
    ax: float
    ay: float
    az: float
    gx: float
    gy: float
    gz: float


@dataclass(frozen=True, eq=False)
class ImuStream:
    """Timestamped 6-axis samples held column-wise.

    ``t`` has shape (n,) and ``data`` shape (n, 6) in ``IMU_CHANNELS`` order.
    Both arrays are made read-only on construction.
    """

    t: np.ndarray
    data: np.ndarray
    rate_hz: int = IMU_RATE_HZ

    def __post_init__(self):
        t = np.array(self.t, dtype=float).reshape(-1)
        data = np.array(self.data, dtype=float).reshape(-1, 6)
        if len(t) != len(data):
            raise ValueError(f"timestamp count {len(t)} != sample count {len(data)}")
        t.setflags(write=False)
        data.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_samples(cls, samples, rate_hz: int = IMU_RATE_HZ) -> "ImuStream":
        rows = [(s.t_s, s.ax, s.ay, s.az, s.gx, s.gy, s.gz) for s in samples]
        arr = np.array(rows, dtype=float).reshape(-1, 7)
        return cls(arr[:, 0], arr[:, 1:], rate_hz)

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[ImuSample]:
        for ti, row in zip(self.t, self.data):
            yield ImuSample(float(ti), *map(float, row))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImuStream):
            return NotImplemented
        return (self.rate_hz == other.rate_hz
                and np.array_equal(self.t, other.t)
                and np.array_equal(self.data, other.data))

    __hash__ = None

    @property
    def duration_s(self) -> float:
        return len(self) / self.rate_hz

    @property
    def accel(self) -> np.ndarray:
        return self.data[:, :3]

    @property
    def gyro(self) -> np.ndarray:
        return self.data[:, 3:]

    @property
    def amplitude_a(self) -> np.ndarray:
        return np.sqrt(np.sum(self.accel ** 2, axis=1))

    @property
    def amplitude_g(self) -> np.ndarray:
        return np.sqrt(np.sum(self.gyro ** 2, axis=1))

    def slice(self, start: int, stop: Optional[int] = None) -> "ImuStream":
        return ImuStream(self.t[start:stop], self.data[start:stop], self.rate_hz)


@dataclass(frozen=True)
class ProtocolConfig:
    """Timing and composition knobs for schedule generation.

    ``isi_ms`` is the onset-to-onset spacing; ``stimulus_duration_ms`` is the
    response window and must not exceed it.
    """

    seed: int = 0
    isi_ms: float = 1500.0
    stimulus_duration_ms: float = 1500.0
    practice_target_count: int = 24
    base_point: int = 10

    def __post_init__(self):
        if self.isi_ms <= 0 or self.stimulus_duration_ms <= 0:
            raise ValueError("intervals must be positive")
        if self.stimulus_duration_ms > self.isi_ms:
            raise ValueError("stimulus_duration_ms must not exceed isi_ms")
        if not 0 <= self.practice_target_count <= 32:
            raise ValueError("practice_target_count must be in [0, 32]")


@dataclass(frozen=True)
class StimulusSchedule:
    events: tuple
    config: ProtocolConfig = ProtocolConfig()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def section(self, section: Section) -> list:
        return [e for e in self.events if e.section is section]

    @property
    def duration_s(self) -> float:
        """Session length: last onset plus one stimulus interval."""
        if not self.events:
            return 0.0
        return self.events[-1].onset_s + self.config.isi_ms / 1000.0


@dataclass(frozen=True)
class Session:
    subject_id: str
    schedule: StimulusSchedule
    trials: tuple
    imu: ImuStream
    label: Optional[Label] = None
    meta: dict = field(default_factory=dict)

    def main_trials(self, modality: Optional[Modality] = None) -> list:
        return [tr for tr in self.trials
                if tr.stimulus.section is Section.MAIN
                and (modality is None or tr.stimulus.modality is modality)]


@dataclass(frozen=True)
class Dataset:
    sessions: tuple

    def __post_init__(self):
        object.__setattr__(self, "sessions", tuple(self.sessions))
        ids = [s.subject_id for s in self.sessions]
        if len(set(ids)) != len(ids):
            raise ValueError("subject ids must be unique")
        if any(s.label is None for s in self.sessions):
            raise ValueError("every session in a Dataset must be labeled")

    def __len__(self) -> int:
        return len(self.sessions)

    def __iter__(self):
        return iter(self.sessions)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label.sign for s in self.sessions], dtype=int)


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class EvalReport:
    """Confusion counts with ADHD as the positive class.

    Metrics with a zero denominator are ``None`` rather than NaN.
    """

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> Optional[float]:
        return _ratio(self.tp + self.tn, self.n)

    @property
    def sensitivity(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def specificity(self) -> Optional[float]:
        return _ratio(self.tn, self.tn + self.fp)

    @property
    def precision(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def f1(self) -> Optional[float]:
        return _ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn)

    METRICS = ("accuracy", "sensitivity", "specificity", "precision", "f1")

    def metrics(self) -> dict:
        return {name: getattr(self, name) for name in self.METRICS}

    def undefined(self) -> list:
        return [name for name, v in self.metrics().items() if v is None]

    def to_dict(self) -> dict:
        d = {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}
        d.update(self.metrics())
        return d


@dataclass(frozen=True)
class Violation:
    invariant: str
    index: Optional[int]
    detail: str

    def __str__(self) -> str:
        where = "" if self.index is None else f" at {self.index}"
        return f"{self.invariant}{where}: {self.detail}"


def validate_session(s: Session) -> list:
    """Check every structural invariant of a session.

    Returns a list of :class:`Violation`; an empty list means the session is
    well formed. Never raises on malformed data.
    """
    out = []
    events = s.schedule.events
    if len(s.trials) != len(events):
        out.append(Violation("trial-alignment", None,
                             f"{len(s.trials)} trials for {len(events)} scheduled events"))
    prev = -math.inf
    for i, ev in enumerate(events):
        if not ev.onset_s > prev:
            out.append(Violation("onset-increasing", i, f"onset {ev.onset_s} <= {prev}"))
        prev = ev.onset_s
        if (ev.section is Section.MAIN) != (1 <= ev.part <= 8):
            out.append(Violation("part-range", i, f"part {ev.part} in section {ev.section.value}"))
        if ev.section is not Section.MAIN and ev.part != 0:
            out.append(Violation("part-range", i, f"part {ev.part} outside Main must be 0"))
    for i, tr in enumerate(s.trials):
        if i < len(events) and tr.stimulus != events[i]:
            out.append(Violation("trial-alignment", i, "trial does not reference schedule event"))
        if tr.responded and tr.rt_ms is None:
            out.append(Violation("rt-presence", i, "responded without rt_ms"))
        elif not tr.responded and tr.rt_ms is not None:
            out.append(Violation("rt-presence", i, "rt_ms set but responded is false"))
        elif tr.rt_ms is not None and not (math.isfinite(tr.rt_ms) and tr.rt_ms > 0):
            out.append(Violation("rt-positive", i, f"rt_ms={tr.rt_ms}"))
    imu = s.imu
    if imu.rate_hz != IMU_RATE_HZ:
        out.append(Violation("imu-rate", None, f"rate {imu.rate_hz} Hz, expected {IMU_RATE_HZ}"))
    if len(imu):
        if imu.t[0] < 0:
            out.append(Violation("imu-time", 0, "negative timestamp"))
        bad = np.flatnonzero(np.diff(imu.t) <= 0)
        if len(bad):
            out.append(Violation("imu-time", int(bad[0]) + 1, "timestamps not increasing"))
        if not np.all(np.isfinite(imu.data)):
            out.append(Violation("imu-finite", int(np.flatnonzero(~np.isfinite(imu.data).all(axis=1))[0]),
                                 "non-finite sensor value"))
    return out
