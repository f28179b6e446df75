"""Movement features from the smartphone IMU stream.

The stream is trimmed (first 15 s, last 60 s), reduced to its second half
and summarised into a fixed 91-value vector: 41 time-domain statistics,
36 spectral features of the accelerometer and 14 oscillation features of
the gyroscope.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import skew

from .model import IMU_RATE_HZ, ImuStream

MANIFEST_VERSION = "1"
TRIM_HEAD_S = 15
TRIM_TAIL_S = 60
N_PEAKS = 5
AXES = ("x", "y", "z")


class TooShort(ValueError):
    """The stream does not outlast the trimmed head and tail."""


def preprocess(imu: ImuStream) -> ImuStream:
    """Drop 15 s from the start and 60 s from the end, then keep the second
    half of what remains (indices >= floor(n / 2)). Timestamps are kept."""
    head = TRIM_HEAD_S * imu.rate_hz
    tail = TRIM_TAIL_S * imu.rate_hz
    if len(imu) <= head + tail:
        raise TooShort(f"IMU stream of {imu.duration_s:.2f} s is not longer than "
                       f"{TRIM_HEAD_S + TRIM_TAIL_S} s")
    trimmed = imu.slice(head, len(imu) - tail)
    return trimmed.slice(len(trimmed) // 2)


# --- manifest -------------------------------------------------------------

_ACC_STATS = ("variance", "mean", "max", "min", "range", "median", "sum", "skewness")
_GYRO_STATS = ("amplitude", "abs_mean", "abs_sd")


def _build_manifest():
    rows = []

    def add(name, group):
        rows.append((name, group))

    for stat in _ACC_STATS:
        for ax in AXES:
            add(f"acc_{ax}_{stat}", "time")
    for stat in _GYRO_STATS:
        for ax in AXES:
            add(f"gyro_{ax}_{stat}", "time")
    for sensor in ("acc", "gyro"):
        for ax in AXES + ("amplitude",):
            add(f"{sensor}_{ax}_sd", "time")
    for ax in AXES:
        for k in range(1, N_PEAKS + 1):
            add(f"acc_{ax}_fft_freq{k}", "frequency")
        for k in range(1, N_PEAKS + 1):
            add(f"acc_{ax}_fft_amp{k}", "frequency")
        add(f"acc_{ax}_energy", "frequency")
    for a, b in (("x", "y"), ("x", "z"), ("y", "z")):
        add(f"acc_corr_{a}{b}", "frequency")
    for ax in AXES:
        add(f"gyro_{ax}_active", "proposed")
    for ax in AXES:
        add(f"gyro_{ax}_inactive", "proposed")
    for ax in AXES + ("amplitude",):
        add(f"gyro_{ax}_big", "proposed")
    for name in ("active_max", "active_mean", "big_max", "big_mean"):
        add(f"gyro_{name}", "proposed")
    return tuple(rows)


MOVEMENT_MANIFEST_ROWS = _build_manifest()
MOVEMENT_MANIFEST = tuple(name for name, _ in MOVEMENT_MANIFEST_ROWS)
assert len(MOVEMENT_MANIFEST) == 91


# --- time domain -----------------------------------------------------------

def _skewness(x: np.ndarray) -> float:
    """Adjusted Fisher-Pearson skewness; 0 for constant or too-short input."""
    if len(x) < 3 or np.ptp(x) == 0:
        return 0.0
    return float(skew(x, bias=False))


def time_domain_features(stream: ImuStream) -> dict:
    out = {}
    acc, gyro = stream.accel, stream.gyro
    for i, ax in enumerate(AXES):
        x = acc[:, i]
        out[f"acc_{ax}_variance"] = float(np.var(x))
        out[f"acc_{ax}_mean"] = float(np.mean(x))
        out[f"acc_{ax}_max"] = float(np.max(x))
        out[f"acc_{ax}_min"] = float(np.min(x))
        out[f"acc_{ax}_range"] = float(np.ptp(x))
        out[f"acc_{ax}_median"] = float(np.median(x))
        out[f"acc_{ax}_sum"] = float(np.sum(x))
        out[f"acc_{ax}_skewness"] = _skewness(x)
    for i, ax in enumerate(AXES):
        g = gyro[:, i]
        out[f"gyro_{ax}_amplitude"] = float(np.ptp(g))
        out[f"gyro_{ax}_abs_mean"] = float(np.mean(np.abs(g)))
        out[f"gyro_{ax}_abs_sd"] = float(np.std(np.abs(g)))
    for sensor, block, amp in (("acc", acc, stream.amplitude_a), ("gyro", gyro, stream.amplitude_g)):
        for i, ax in enumerate(AXES):
            out[f"{sensor}_{ax}_sd"] = float(np.std(block[:, i]))
        out[f"{sensor}_amplitude_sd"] = float(np.std(amp))
    return out


# --- frequency domain ------------------------------------------------------

def dominant_peaks(x: np.ndarray, rate_hz: float = IMU_RATE_HZ, k: int = N_PEAKS):
    """Frequencies and N-normalised magnitudes of the ``k`` largest positive
    frequency bins of the mean-removed signal, strongest first.

    Bins 1..N//2 are candidates; equal magnitudes keep ascending frequency.
    """
    n = len(x)
    spec = np.abs(np.fft.rfft(x - np.mean(x)))[1:n // 2 + 1] / n
    freqs = np.arange(1, n // 2 + 1) * rate_hz / n
    order = np.argsort(-spec, kind="stable")[:k]
    return freqs[order], spec[order]


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da, db = a - a.mean(), b - b.mean()
    den = np.sqrt(np.dot(da, da) * np.dot(db, db))
    return float(np.dot(da, db) / den) if den > 0 else 0.0


def freq_domain_features(stream: ImuStream) -> dict:
    out = {}
    acc = stream.accel
    for i, ax in enumerate(AXES):
        x = acc[:, i]
        freqs, amps = dominant_peaks(x, stream.rate_hz)
        for k in range(N_PEAKS):
            out[f"acc_{ax}_fft_freq{k + 1}"] = float(freqs[k])
        for k in range(N_PEAKS):
            out[f"acc_{ax}_fft_amp{k + 1}"] = float(amps[k])
        d = x - np.mean(x)
        out[f"acc_{ax}_energy"] = float(np.dot(d, d) / len(x))
    for (a, ia), (b, ib) in ((("x", 0), ("y", 1)), (("x", 0), ("z", 2)), (("y", 1), ("z", 2))):
        out[f"acc_corr_{a}{b}"] = _pearson(acc[:, ia], acc[:, ib])
    return out


# --- proposed oscillation features ----------------------------------------

@dataclass(frozen=True)
class ProposedFeatureConfig:
    """Thresholds for the oscillation features.

    ``None`` means data-adaptive: ``active_sd_mult`` (resp. ``big_sd_mult``)
    times the channel standard deviation of the preprocessed segment.
    """

    active_threshold: Optional[float] = None
    big_amplitude: Optional[float] = None
    active_sd_mult: float = 1.0
    big_sd_mult: float = 2.0

    def __post_init__(self):
        for name in ("active_threshold", "big_amplitude", "active_sd_mult", "big_sd_mult"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")

    def active_for(self, x: np.ndarray) -> float:
        return self.active_threshold if self.active_threshold is not None else self.active_sd_mult * float(np.std(x))

    def big_for(self, x: np.ndarray) -> float:
        return self.big_amplitude if self.big_amplitude is not None else self.big_sd_mult * float(np.std(x))


def big_oscillations(x: np.ndarray, amplitude: float) -> int:
    """Count oscillations whose peak-to-trough swing exceeds ``amplitude``.

    The signal is split at mean crossings into runs of constant sign. Every
    crossing whose two adjacent runs span more than ``amplitude`` (max - min
    over both runs) is a qualifying half cycle; two half cycles make one
    oscillation, rounded up. The count is unchanged by time reversal.
    """
    if len(x) < 2:
        return 0
    above = (x - np.mean(x)) > 0
    edges = np.flatnonzero(above[1:] != above[:-1]) + 1
    if not len(edges):
        return 0
    bounds = np.concatenate([[0], edges, [len(x)]])
    run_max = np.maximum.reduceat(x, bounds[:-1])
    run_min = np.minimum.reduceat(x, bounds[:-1])
    swing = np.maximum(run_max[:-1], run_max[1:]) - np.minimum(run_min[:-1], run_min[1:])
    q = int(np.sum(swing > amplitude))
    return (q + 1) // 2


def proposed_features(stream: ImuStream, config: ProposedFeatureConfig = ProposedFeatureConfig()) -> dict:
    out = {}
    gyro = stream.gyro
    n = len(stream)
    active = []
    for i, ax in enumerate(AXES):
        g = gyro[:, i]
        thr = config.active_for(g)
        n_active = int(np.sum(np.abs(g) > thr))
        pct = 100.0 * n_active / n
        active.append(pct)
        out[f"gyro_{ax}_active"] = pct
        out[f"gyro_{ax}_inactive"] = 100.0 * (n - n_active) / n
    big = []
    for i, ax in enumerate(AXES + ("amplitude",)):
        sig = gyro[:, i] if i < 3 else stream.amplitude_g
        b = big_oscillations(sig, config.big_for(sig))
        big.append(b)
        out[f"gyro_{ax}_big"] = float(b)
    out["gyro_active_max"] = float(max(active))
    out["gyro_active_mean"] = float(np.mean(active))
    out["gyro_big_max"] = float(max(big))
    out["gyro_big_mean"] = float(np.mean(big))
    return out


@dataclass(frozen=True)
class MovementFeatureVector:
    values: tuple

    names = MOVEMENT_MANIFEST

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))

    def __getitem__(self, name: str) -> float:
        return self.values[self.names.index(name)]

    def __len__(self) -> int:
        return len(self.values)


def movement_features_of(stream: ImuStream, config: ProposedFeatureConfig = ProposedFeatureConfig()) -> MovementFeatureVector:
    """Feature vector of an already-preprocessed stream."""
    feats = {}
    feats.update(time_domain_features(stream))
    feats.update(freq_domain_features(stream))
    feats.update(proposed_features(stream, config))
    return MovementFeatureVector(tuple(feats[name] for name in MOVEMENT_MANIFEST))


def extract_movement_features(imu: ImuStream, config: ProposedFeatureConfig = ProposedFeatureConfig()) -> MovementFeatureVector:
    return movement_features_of(preprocess(imu), config)
