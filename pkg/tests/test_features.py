import math

import numpy as np
import pytest

from speechstyle import (
    AudioClip,
    FrameConfig,
    estimate_pitch,
    extract_features,
    stress_contour,
)
from speechstyle.errors import ClipTooShort

CFG = FrameConfig()


def _tone(freq, sr=16000, seconds=1.0, amp=0.8):
    t = np.arange(int(round(sr * seconds))) / sr
    return AudioClip(amp * np.sin(2 * np.pi * freq * t), sr)


def test_frame_count_one_second_16k():
    bundle = extract_features(_tone(220.0), CFG)
    assert bundle.frame_count == 98  # floor((16000 - 400) / 160) + 1


def test_frame_count_formula_random_lengths():
    rng = np.random.default_rng(11)
    win, hop = 400, 160
    for _ in range(25):
        n = int(rng.integers(win, 5 * 16000))
        clip = AudioClip(rng.uniform(-0.5, 0.5, n), 16000)
        expected = (n - win) // hop + 1
        assert extract_features(clip, CFG).frame_count == expected


def test_single_window_clip_gives_one_frame():
    clip = AudioClip(np.random.default_rng(1).uniform(-0.5, 0.5, 400), 16000)
    assert extract_features(clip, CFG).frame_count == 1


def test_clip_shorter_than_window_rejected():
    with pytest.raises(ClipTooShort):
        extract_features(AudioClip(np.ones(399) * 0.1, 16000), CFG)


def test_streams_share_one_frame_grid():
    bundle = extract_features(_tone(150.0, seconds=0.73), CFG)
    assert bundle.spectral.shape == (bundle.frame_count, CFG.n_ceps)
    assert bundle.pitch.shape == (bundle.frame_count,)
    assert bundle.stress.shape == (bundle.frame_count,)


def test_stress_zero_frame_hits_floor():
    assert stress_contour(np.zeros((1, 400)))[0] == -120.0


def test_stress_full_scale_square_wave_is_zero_db():
    frame = np.ones((1, 400))
    frame[0, ::2] = -1.0
    assert stress_contour(frame)[0] == 0.0


def test_stress_tenth_amplitude_sine():
    n, sr, freq = 400, 16000, 200.0  # exactly 5 periods per frame
    frame = 0.1 * np.sin(2 * np.pi * freq * np.arange(n) / sr)
    value = stress_contour(frame[np.newaxis, :])[0]
    assert value == pytest.approx(10.0 * math.log10(0.005), abs=1e-9)


def test_stress_scaling_shifts_by_six_db():
    rng = np.random.default_rng(2)
    frames = rng.uniform(-0.8, 0.8, (5, 400))
    shift = stress_contour(frames) - stress_contour(0.5 * frames)
    assert np.allclose(shift, 10.0 * math.log10(4.0), atol=1e-9)


@pytest.mark.parametrize("freq", [100.0, 150.0, 220.0, 330.0, 440.0])
def test_pitch_pure_tones_within_two_percent(freq):
    bundle = extract_features(_tone(freq), CFG)
    voiced = bundle.pitch[~np.isnan(bundle.pitch)]
    assert voiced.size > 0
    assert np.all(np.abs(voiced - freq) <= 0.02 * freq)


def test_pitch_single_frame_call_matches_tone():
    frame = 0.6 * np.sin(2 * np.pi * 220.0 * np.arange(400) / 16000)
    f0 = estimate_pitch(frame, 16000, CFG)
    assert f0 is not None
    assert abs(f0 - 220.0) <= 0.02 * 220.0


def test_pitch_zero_frame_is_unvoiced():
    assert estimate_pitch(np.zeros(400), 16000, CFG) is None


def test_pitch_white_noise_is_unvoiced():
    rng = np.random.default_rng(17)
    frame = 0.3 * rng.standard_normal(400)
    # independent check that the normalized autocorrelation peak really
    # sits below the voicing threshold for this seed
    full = np.correlate(frame, frame, mode="full")[frame.size - 1 :]
    lag_min, lag_max = math.ceil(16000 / CFG.pitch_fmax), math.floor(16000 / CFG.pitch_fmin)
    peak = np.max(full[lag_min : lag_max + 1]) / full[0]
    assert peak < CFG.voicing_threshold
    assert estimate_pitch(frame, 16000, CFG) is None


def test_pitch_short_frame_skips_out_of_range_lags():
    # 120 samples cannot hold a 50 Hz period at 16 kHz; a 400 Hz tone
    # still fits and must be found
    frame = 0.7 * np.sin(2 * np.pi * 400.0 * np.arange(120) / 16000)
    f0 = estimate_pitch(frame, 16000, CFG)
    assert f0 is not None
    assert abs(f0 - 400.0) <= 0.02 * 400.0


def test_voiced_estimates_stay_in_configured_band():
    rng = np.random.default_rng(3)
    for _ in range(10):
        freq = float(rng.uniform(80, 450))
        bundle = extract_features(_tone(freq, seconds=0.3), CFG)
        voiced = bundle.pitch[~np.isnan(bundle.pitch)]
        assert np.all((voiced >= CFG.pitch_fmin) & (voiced <= CFG.pitch_fmax))


def test_amplitude_invariance_of_pitch_and_voicing():
    rng = np.random.default_rng(4)
    base = _tone(180.0, seconds=0.5)
    noisy = AudioClip(base.samples + 0.05 * rng.standard_normal(base.samples.size), 16000)
    a = extract_features(noisy, CFG)
    b = extract_features(AudioClip(noisy.samples * 0.5, 16000), CFG)
    assert np.array_equal(np.isnan(a.pitch), np.isnan(b.pitch))
    voiced = ~np.isnan(a.pitch)
    assert np.all(np.abs(a.pitch[voiced] - b.pitch[voiced]) <= 0.1)


def test_scaling_touches_only_cepstral_coefficient_zero():
    rng = np.random.default_rng(5)
    clip = AudioClip(rng.uniform(-0.6, 0.6, 8000), 16000)
    a = extract_features(clip, CFG)
    b = extract_features(AudioClip(clip.samples * 0.5, 16000), CFG)
    assert np.allclose(a.spectral[:, 1:], b.spectral[:, 1:], atol=1e-9)
    c0_shift = a.spectral[:, 0] - b.spectral[:, 0]
    assert np.all(c0_shift > 0)
    assert np.allclose(c0_shift, c0_shift[0], atol=1e-9)


def test_frame_config_validation():
    with pytest.raises(ValueError):
        FrameConfig(hop_ms=30.0)  # hop larger than window
    with pytest.raises(ValueError):
        FrameConfig(preemphasis=1.0)
    with pytest.raises(ValueError):
        FrameConfig(n_ceps=25)  # more cepstra than filters
    with pytest.raises(ValueError):
        FrameConfig(pitch_fmin=500.0, pitch_fmax=100.0)
    with pytest.raises(ValueError):
        FrameConfig(voicing_threshold=0.0)


def test_frame_config_dict_round_trip():
    cfg = FrameConfig(window_ms=20.0, n_ceps=10)
    assert FrameConfig.from_dict(cfg.to_dict()) == cfg
