"""Synthetic subjects: CPT responses and a 25 Hz IMU stream per session.

The generative model is deliberately small. Responses come from per-kind
Bernoulli draws with lognormal reaction times that drift with trial count;
movement is Gaussian sensor noise plus damped-sinusoid bursts arriving as a
Poisson process whose rate is multiplied in the second half of the session.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .model import (IMU_RATE_HZ, Dataset, ImuStream, Kind, Label, ProtocolConfig,
                    Session, StimulusSchedule, TrialRecord)
from .protocol import build_schedule

MASK64 = 0xFFFFFFFFFFFFFFFF
ANTICIPATORY_RT_MS = (20.0, 100.0)
MIN_RT_MS = 100.0
BURST_WINDOW_S = 4.0
GRAVITY = (0.0, 0.0, 9.81)


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer, used to derive per-subject seeds."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, stream: int) -> int:
    return splitmix64((master & MASK64) ^ splitmix64(stream))


@dataclass(frozen=True)
class SubjectProfile:
    omission_p: float = 0.05
    commission_p: float = 0.05
    rt_mean_ms: float = 450.0
    rt_sd_ms: float = 90.0
    fatigue_slope: float = 5.0
    imu_noise_sd: float = 0.05
    burst_rate_hz: float = 0.02
    burst_amp: float = 0.5
    second_half_burst_gain: float = 1.0
    anticipatory_p: float = 0.02

    def __post_init__(self):
        for name in ("omission_p", "commission_p", "anticipatory_p"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.rt_mean_ms <= 0:
            raise ValueError("rt_mean_ms must be positive")
        for name in ("rt_sd_ms", "imu_noise_sd", "burst_rate_hz", "burst_amp",
                     "second_half_burst_gain"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def jittered(self, rng: np.random.Generator, spread: float = 0.10) -> "SubjectProfile":
        """Scale every parameter by an independent U(1-spread, 1+spread) factor."""
        values = {}
        for f in fields(self):
            v = getattr(self, f.name) * rng.uniform(1.0 - spread, 1.0 + spread)
            if f.name.endswith("_p"):
                v = min(max(v, 0.0), 1.0)
            values[f.name] = v
        return SubjectProfile(**values)


def load_profiles(path=None) -> dict:
    """Read ``[section]`` blocks of ``key = value`` pairs into profiles.

    With no path the calibrated defaults shipped with the package are used.
    Unknown keys are rejected.
    """
    cp = configparser.ConfigParser()
    if path is None:
        cp.read_string(resources.files("fishscreen").joinpath("profiles.ini").read_text())
    else:
        with open(path) as fh:
            cp.read_file(fh)
    known = {f.name for f in fields(SubjectProfile)}
    out = {}
    for name in cp.sections():
        kv = dict(cp[name])
        unknown = set(kv) - known
        if unknown:
            raise ValueError(f"unknown profile keys in [{name}]: {sorted(unknown)}")
        out[name] = SubjectProfile(**{k: float(v) for k, v in kv.items()})
    return out


def default_profiles():
    p = load_profiles()
    return p["adhd"], p["control"]


def _draw_rt(rng, mean_ms: float, sd_ms: float) -> float:
    if sd_ms <= 0:
        return mean_ms
    sigma2 = math.log1p((sd_ms / mean_ms) ** 2)
    mu = math.log(mean_ms) - sigma2 / 2.0
    return float(rng.lognormal(mu, math.sqrt(sigma2)))


def _simulate_trials(profile: SubjectProfile, schedule: StimulusSchedule, rng) -> tuple:
    window = schedule.config.stimulus_duration_ms
    trials = []
    for i, ev in enumerate(schedule.events):
        p_respond = 1.0 - profile.omission_p if ev.kind is Kind.TARGET else profile.commission_p
        if rng.random() >= p_respond:
            trials.append(TrialRecord(ev, False, None))
            continue
        if rng.random() < profile.anticipatory_p:
            rt = rng.uniform(*ANTICIPATORY_RT_MS)
        else:
            mean = max(profile.rt_mean_ms + profile.fatigue_slope * i / 100.0, 1.0)
            rt = min(max(_draw_rt(rng, mean, profile.rt_sd_ms), MIN_RT_MS), window)
        trials.append(TrialRecord(ev, True, float(rt)))
    return tuple(trials)


def _poisson_times(rng, rate_hz: float, start: float, stop: float) -> np.ndarray:
    if rate_hz <= 0 or stop <= start:
        return np.empty(0)
    n = rng.poisson(rate_hz * (stop - start))
    return np.sort(rng.uniform(start, stop, size=n))


def _unit(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def simulate_imu(profile: SubjectProfile, duration_s: float, rng) -> ImuStream:
    n = math.ceil(duration_s * IMU_RATE_HZ)
    t = np.arange(n) / IMU_RATE_HZ
    data = rng.normal(0.0, profile.imu_noise_sd, size=(n, 6))
    data[:, :3] += GRAVITY
    half = duration_s / 2.0
    onsets = np.concatenate([
        _poisson_times(rng, profile.burst_rate_hz, 0.0, half),
        _poisson_times(rng, profile.burst_rate_hz * profile.second_half_burst_gain, half, duration_s),
    ])
    width = int(BURST_WINDOW_S * IMU_RATE_HZ)
    for t0 in onsets:
        i0 = math.ceil(t0 * IMU_RATE_HZ)
        seg = slice(i0, min(i0 + width, n))
        dt = t[seg] - t0
        freq = rng.uniform(1.0, 4.0)
        tau = rng.uniform(0.3, 1.0)
        amp = profile.burst_amp * rng.uniform(0.5, 1.5)
        wave = amp * np.exp(-dt / tau) * np.sin(2 * np.pi * freq * dt + rng.uniform(0, 2 * np.pi))
        direction = np.concatenate([_unit(rng), _unit(rng)])
        data[seg] += wave[:, None] * direction[None, :]
    return ImuStream(t, data)


def simulate_session(profile: SubjectProfile, schedule: StimulusSchedule, seed: int,
                     subject_id: str = "S000", label: Label = None, meta: dict = None) -> Session:
    """Draw one subject's responses and movement for a fixed schedule.

    The same ``(profile, schedule, seed)`` always yields the same session.
    """
    rng = np.random.default_rng(seed & MASK64)
    trials = _simulate_trials(profile, schedule, rng)
    imu = simulate_imu(profile, schedule.duration_s, rng)
    return Session(subject_id, schedule, trials, imu, label, dict(meta or {}))


def make_cohort(n_adhd: int = 26, n_control: int = 26, adhd_profile: SubjectProfile = None,
                control_profile: SubjectProfile = None, seed: int = 0,
                protocol: ProtocolConfig = None, jitter: float = 0.10) -> Dataset:
    """Simulate a labeled cohort with per-subject profile jitter.

    Subject ``k`` (0-based, ADHD first) draws everything from
    ``derive_seed(seed, k)``, so subjects are independent of cohort size.
    """
    if n_adhd < 1 or n_control < 1:
        raise ValueError("each class needs at least one subject")
    if adhd_profile is None or control_profile is None:
        d_adhd, d_ctrl = default_profiles()
        adhd_profile = adhd_profile or d_adhd
        control_profile = control_profile or d_ctrl
    base = protocol or ProtocolConfig()
    sessions = []
    plan = [(Label.ADHD, adhd_profile, "A")] * n_adhd + [(Label.CONTROL, control_profile, "C")] * n_control
    counts = {"A": 0, "C": 0}
    for k, (label, profile, tag) in enumerate(plan):
        s = derive_seed(seed, k)
        rng = np.random.default_rng(s)
        subj_profile = profile.jittered(rng, jitter)
        schedule = build_schedule(replace(base, seed=int(rng.integers(2 ** 63))))
        counts[tag] += 1
        sid = f"{tag}{counts[tag]:03d}"
        sessions.append(simulate_session(subj_profile, schedule, int(rng.integers(2 ** 63)), sid, label))
    return Dataset(tuple(sessions))


def write_profiles(profiles: dict, path) -> None:
    cp = configparser.ConfigParser()
    for name, prof in profiles.items():
        cp[name] = {k: repr(v) for k, v in asdict(prof).items()}
    with open(Path(path), "w") as fh:
        cp.write(fh)
