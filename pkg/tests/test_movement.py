import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import stream
from dft_oracle import naive_dft_features
from fishscreen.ml.pipeline import PAPER_PRESET_MOVEMENT
from fishscreen.model import ImuStream
from fishscreen.movement import (MOVEMENT_MANIFEST, MOVEMENT_MANIFEST_ROWS, ProposedFeatureConfig,
                                 TooShort, big_oscillations, dominant_peaks,
                                 extract_movement_features, freq_domain_features,
                                 movement_features_of, preprocess, proposed_features,
                                 time_domain_features)
from fishscreen.simulator import SubjectProfile, simulate_imu


def _zeros(n):
    return ImuStream(np.arange(n) / 25, np.zeros((n, 6)))


@pytest.mark.parametrize("n,expected", [(30000, 14063), (1900, 13)])
def test_preprocess_lengths(n, expected):
    out = preprocess(_zeros(n))
    assert len(out) == expected
    # timestamps are kept, so the output ends where the tail trim begins
    assert out.t[-1] == pytest.approx((n - 1500 - 1) / 25)


def test_preprocess_too_short():
    with pytest.raises(TooShort):
        preprocess(_zeros(1500))
    with pytest.raises(TooShort):
        preprocess(_zeros(1875))


def test_time_domain_textbook_values():
    f = time_domain_features(stream({"ax": [1.0, 2.0, 3.0], "gx": [-1.0, 1.0, -1.0]}))
    assert f["acc_x_mean"] == 2 and f["acc_x_range"] == 2
    assert f["acc_x_sum"] == 6 and f["acc_x_median"] == 2
    assert f["acc_x_variance"] == pytest.approx(2 / 3)
    assert f["gyro_x_abs_mean"] == 1 and f["gyro_x_abs_sd"] == 0
    assert f["acc_y_variance"] == 0 and f["acc_y_skewness"] == 0


def test_skewness_sign():
    f = time_domain_features(stream({"ax": [0.0, 0.0, 0.0, 0.0, 10.0]}))
    assert f["acc_x_skewness"] > 0


def test_sine_peak_within_one_bin():
    t = np.arange(256) / 25
    freqs, amps = dominant_peaks(np.sin(2 * np.pi * 5.0 * t))
    assert abs(freqs[0] - 5.0) <= 25 / 256


def test_constant_and_identical_channels():
    x = np.sin(np.arange(64) * 0.7)
    f = freq_domain_features(stream({"ax": x, "ay": x, "az": np.full(64, 3.0)}))
    assert f["acc_corr_xy"] == pytest.approx(1.0)
    assert f["acc_z_energy"] == 0
    assert all(f[f"acc_z_fft_amp{k}"] == 0 for k in range(1, 6))
    assert f["acc_corr_xz"] == 0


def test_matches_naive_dft():
    rng = np.random.default_rng(31)
    for n in (32, 33, 100, 257, 512):
        acc = rng.normal(size=(n, 3)) + [0, 0, 9.81]
        got = freq_domain_features(stream({"ax": acc[:, 0], "ay": acc[:, 1], "az": acc[:, 2]}))
        ref = naive_dft_features(acc)
        for name, v in ref.items():
            assert got[name] == pytest.approx(v, rel=1e-9, abs=1e-12), name


def _active_stream(fractions, n=100):
    cols = {}
    for ax, frac in zip(("gx", "gy", "gz"), fractions):
        g = np.zeros(n)
        g[: int(frac * n)] = 1.0
        cols[ax] = g
    return stream(cols)


def test_active_max_and_mean():
    f = proposed_features(_active_stream((0.1, 0.2, 0.6)), ProposedFeatureConfig(active_threshold=0.5))
    assert (f["gyro_x_active"], f["gyro_y_active"], f["gyro_z_active"]) == (10.0, 20.0, 60.0)
    assert f["gyro_active_max"] == 60 and f["gyro_active_mean"] == pytest.approx(30)


def test_zero_signal_is_inactive():
    f = proposed_features(_zeros(50), ProposedFeatureConfig(active_threshold=0.5))
    for ax in "xyz":
        assert f[f"gyro_{ax}_active"] == 0 and f[f"gyro_{ax}_inactive"] == 100
    assert f["gyro_big_max"] == 0


def test_square_wave_big_count():
    sq = np.tile(np.r_[np.full(10, 2.0), np.full(10, -2.0)], 10)
    assert big_oscillations(sq, 1.0) == 10
    assert big_oscillations(sq, 4.0) == 0
    f = proposed_features(stream({"gx": sq}), ProposedFeatureConfig(big_amplitude=1.0))
    assert f["gyro_x_big"] == 10


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(2, 200), elements=st.floats(-50, 50)),
       st.floats(0.0, 60.0))
def test_active_plus_inactive_is_100(x, thr):
    f = proposed_features(stream({"gx": x, "gy": -x, "gz": x * 0.5}),
                          ProposedFeatureConfig(active_threshold=thr))
    for ax in "xyz":
        assert f[f"gyro_{ax}_active"] + f[f"gyro_{ax}_inactive"] == 100.0


REVERSAL_SAFE = ("variance", "mean", "max", "min", "range", "median", "sum", "energy", "skewness")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(40, 300))
def test_time_reversal_invariance(seed, n):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(n, 6)) * rng.uniform(0.1, 3, size=6)
    data[:, 3:] = np.round(data[:, 3:], 1)  # exact ties exercise the crossing logic
    fwd = ImuStream(np.arange(n) / 25, data)
    rev = ImuStream(np.arange(n) / 25, data[::-1])
    a = movement_features_of(fwd).as_dict()
    b = movement_features_of(rev).as_dict()
    for name in MOVEMENT_MANIFEST:
        stat = name.rsplit("_", 1)[1]
        if name.startswith("acc_") and stat in REVERSAL_SAFE:
            assert b[name] == pytest.approx(a[name], rel=1e-9, abs=1e-9), name
        if name.endswith("_big") or name.startswith("gyro_big"):
            assert b[name] == a[name], name


def test_manifest_and_preset():
    assert len(MOVEMENT_MANIFEST) == 91 == len(set(MOVEMENT_MANIFEST))
    groups = [g for _, g in MOVEMENT_MANIFEST_ROWS]
    assert (groups.count("time"), groups.count("frequency"), groups.count("proposed")) == (41, 36, 14)
    assert len(PAPER_PRESET_MOVEMENT) == 5
    assert all(name in MOVEMENT_MANIFEST for name in PAPER_PRESET_MOVEMENT)


def test_simulated_vector(session):
    v = extract_movement_features(session.imu)
    assert len(v) == 91 and np.all(np.isfinite(v.values))
    assert extract_movement_features(session.imu) == v


@pytest.mark.slow
def test_more_bursts_more_accel_variance():
    base = SubjectProfile(burst_rate_hz=0.03, burst_amp=1.0)
    busy = SubjectProfile(burst_rate_hz=0.09, burst_amp=1.0)
    lo, hi = [], []
    for seed in range(20):
        lo.append(extract_movement_features(simulate_imu(base, 708.0, np.random.default_rng(seed))))
        hi.append(extract_movement_features(simulate_imu(busy, 708.0, np.random.default_rng(seed))))
    for ax in "xyz":
        name = f"acc_{ax}_variance"
        assert np.median([v[name] for v in hi]) > np.median([v[name] for v in lo])
