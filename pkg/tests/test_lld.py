"""Per-frame descriptor checks.

MFCCs are compared against a double-loop DCT-II, spectral descriptors
against hand-built point-mass spectra, and the regression delta against
a direct evaluation of its formula. The tone tests rely on closed-form
properties of a pure sine (centroid at the tone, two sign flips per
period), not on stored reference values.
"""

import math

import numpy as np
import pytest

from oracles import make_sine, naive_dct2_orthonormal
from serkit import dsp
from serkit.audio import AudioClip, condition
from serkit.lld import (
    CONTRAST_ALPHA,
    CONTRAST_EDGES_HZ,
    FEATURE_NAMES,
    LOG_FLOOR,
    NUM_FEATURES,
    NUM_MEL_FILTERS,
    delta,
    extract_llds,
    load_lld_csv,
    mfcc,
    save_lld_csv,
    spectral_contrast,
    spectral_descriptors,
    zcr_rms,
)

BIN_HZ = 16000 / 2048


def spectrum_from(mags):
    return dsp.Spectrum(magnitudes=np.asarray(mags, dtype=np.float64),
                        fft_size=2048, bin_hz=BIN_HZ)


def delta_by_hand(track, width=2):
    # direct transcription of the regression formula with clamped edges
    x = np.asarray(track, dtype=np.float64)
    t_len = len(x)
    denom = 2.0 * sum(n * n for n in range(1, width + 1))
    out = np.zeros_like(x)
    for t in range(t_len):
        acc = np.zeros_like(x[0])
        for n in range(1, width + 1):
            hi = x[min(t + n, t_len - 1)]
            lo = x[max(t - n, 0)]
            acc = acc + n * (hi - lo)
        out[t] = acc / denom
    return out


class TestFeatureNames:
    def test_exactly_52_columns(self):
        assert NUM_FEATURES == 52
        assert len(FEATURE_NAMES) == 52
        assert len(set(FEATURE_NAMES)) == 52

    def test_frozen_block_order(self):
        names = list(FEATURE_NAMES)
        assert names[0] == "mfcc_01"
        assert names[12] == "mfcc_13"
        assert names[13] == "mfcc_d_01"
        assert names[25] == "mfcc_d_13"
        assert names[26] == "mfcc_dd_01"
        assert names[38] == "mfcc_dd_13"
        assert names[39:45] == ["spectral_centroid", "spectral_bandwidth",
                                "spectral_rolloff", "spectral_flatness",
                                "rms_energy", "zcr"]
        assert names[45] == "spectral_contrast_1"
        assert names[51] == "spectral_contrast_7"


class TestMfcc:
    def test_matches_naive_dct_on_random_energies(self):
        rng = np.random.default_rng(21)
        mags = np.abs(rng.standard_normal(1025)) + 0.05
        spec = spectrum_from(mags)
        got = mfcc(spec)
        energies = dsp.mel_filterbank(spec, NUM_MEL_FILTERS, 0.0, 8000.0)
        logs = np.log(np.maximum(energies, LOG_FLOOR))
        want = naive_dct2_orthonormal(logs, 13)
        assert got.shape == (13,)
        err = np.max(np.abs(got - want)) / max(1.0, np.max(np.abs(want)))
        assert err < 1e-9

    def test_scaling_shifts_only_the_first_coefficient(self):
        # scaling magnitudes by a shifts each log energy by 2*ln(a); the
        # DCT of that constant vector is sqrt(26)*2*ln(a) in slot 0 alone
        rng = np.random.default_rng(22)
        mags = np.abs(rng.standard_normal(1025)) + 0.05
        a = 3.0
        base = mfcc(spectrum_from(mags))
        scaled = mfcc(spectrum_from(a * mags))
        diff = scaled - base
        assert diff[0] == pytest.approx(math.sqrt(26.0) * 2.0 * math.log(a), abs=1e-9)
        assert np.max(np.abs(diff[1:])) < 1e-9

    def test_zero_spectrum_hits_the_floor_and_stays_finite(self):
        got = mfcc(spectrum_from(np.zeros(1025)))
        assert np.all(np.isfinite(got))
        # floored energies are constant, so only slot 0 is nonzero
        assert got[0] == pytest.approx(math.sqrt(26.0) * math.log(LOG_FLOOR), rel=1e-12)
        assert np.max(np.abs(got[1:])) < 1e-9


class TestSpectralDescriptors:
    def test_point_mass(self):
        mags = np.zeros(1025)
        mags[256] = 1.0  # bin 256 * 7.8125 Hz = 2000 Hz
        c, b, r, f = spectral_descriptors(spectrum_from(mags))
        assert c == pytest.approx(2000.0)
        assert b == pytest.approx(0.0, abs=1e-9)
        assert r == pytest.approx(2000.0)

    def test_symmetric_two_point_mass(self):
        mags = np.zeros(1025)
        mags[128] = 1.0  # 1000 Hz
        mags[384] = 1.0  # 3000 Hz
        c, b, r, f = spectral_descriptors(spectrum_from(mags))
        assert c == pytest.approx(2000.0)
        assert b == pytest.approx(1000.0)

    def test_flat_spectrum_flatness_is_one(self):
        c, b, r, f = spectral_descriptors(spectrum_from(np.full(1025, 0.7)))
        assert f == pytest.approx(1.0, abs=1e-9)

    def test_zero_spectrum_convention(self):
        c, b, r, f = spectral_descriptors(spectrum_from(np.zeros(1025)))
        assert (c, b, r, f) == (0.0, 0.0, 0.0, 0.0)

    def test_rolloff_is_smallest_bin_reaching_085(self):
        # mass spread over 10 equal bins: cumulative hits 0.85 at the 9th
        mags = np.zeros(1025)
        mags[100:110] = 1.0
        _, _, r, _ = spectral_descriptors(spectrum_from(mags))
        assert r == pytest.approx(108 * BIN_HZ)

    def test_descriptors_are_scale_invariant(self):
        rng = np.random.default_rng(23)
        mags = np.abs(rng.standard_normal(1025)) + 0.01
        one = spectral_descriptors(spectrum_from(mags))
        two = spectral_descriptors(spectrum_from(5.0 * mags))
        assert np.allclose(one, two, rtol=1e-12)


class TestSpectralContrast:
    def test_flat_spectrum_gives_zero_contrast(self):
        got = spectral_contrast(spectrum_from(np.full(1025, 2.0)))
        assert got.shape == (7,)
        assert np.allclose(got, 0.0, atol=1e-12)

    def test_zero_spectrum_gives_zero_contrast(self):
        got = spectral_contrast(spectrum_from(np.zeros(1025)))
        assert np.allclose(got, 0.0, atol=1e-12)

    def test_top_fifth_at_ten_gives_log_ten(self):
        freqs = np.arange(1025) * BIN_HZ
        mags = np.ones(1025)
        lo, hi = CONTRAST_EDGES_HZ[2], CONTRAST_EDGES_HZ[3]  # 400..800 Hz band
        band_bins = np.flatnonzero((freqs >= lo) & (freqs < hi))
        k = int(np.ceil(CONTRAST_ALPHA * len(band_bins)))
        mags[band_bins[:k]] = 10.0
        got = spectral_contrast(spectrum_from(mags))
        assert got[2] == pytest.approx(math.log(10.0), rel=1e-12)
        others = np.delete(got, 2)
        assert np.allclose(others, 0.0, atol=1e-12)

    def test_contrast_is_scale_invariant(self):
        rng = np.random.default_rng(24)
        mags = np.abs(rng.standard_normal(1025)) + 0.01
        one = spectral_contrast(spectrum_from(mags))
        two = spectral_contrast(spectrum_from(9.0 * mags))
        assert np.allclose(one, two, rtol=1e-12)


class TestZcrRms:
    def test_all_zeros(self):
        assert zcr_rms(np.zeros(100)) == (0.0, 0.0)

    def test_maximal_alternation(self):
        frame = np.tile([1.0, -1.0], 50)
        zcr, rms = zcr_rms(frame)
        assert zcr == pytest.approx(1.0)
        assert rms == pytest.approx(1.0)

    def test_constant_half(self):
        zcr, rms = zcr_rms(np.full(64, 0.5))
        assert zcr == 0.0
        assert rms == pytest.approx(0.5)

    def test_single_sign_change(self):
        frame = np.array([1.0, 2.0, 3.0, -1.0, -2.0])
        zcr, rms = zcr_rms(frame)
        assert zcr == pytest.approx(1.0 / 4.0)


class TestDelta:
    def test_constant_track_gives_zeros(self):
        track = np.full((30, 4), 3.7)
        assert np.allclose(delta(track), 0.0, atol=1e-15)

    def test_linear_ramp_interior_slope_is_one(self):
        track = np.arange(50, dtype=np.float64)
        d = delta(track, width=2)
        assert np.allclose(d[2:-2], 1.0, atol=1e-12)
        # replicated edges flatten the regression at the ends
        assert d[0] < 1.0 and d[-1] < 1.0

    def test_matches_direct_formula_on_random_track(self):
        rng = np.random.default_rng(25)
        track = rng.standard_normal((10, 3))
        for width in (1, 2, 3):
            got = delta(track, width=width)
            want = delta_by_hand(track, width=width)
            assert np.allclose(got, want, rtol=0.0, atol=1e-12)

    def test_width_must_be_positive(self):
        with pytest.raises(ValueError):
            delta(np.zeros((5, 2)), width=0)


def tone_clip(freq_hz=1000.0, amplitude=1.0, seconds=7.52):
    samples = amplitude * make_sine(freq_hz, seconds, 16000)
    return condition(AudioClip(samples=samples, sample_rate=16000))


class TestExtractLlds:
    def test_matrix_geometry(self):
        clip = tone_clip()
        m32 = extract_llds(clip, 32)
        m100 = extract_llds(clip, 100)
        assert m32.values.shape == (469, 52)
        assert m100.values.shape == (149, 52)
        assert m32.feature_names == FEATURE_NAMES
        assert np.all(np.isfinite(m32.values))
        assert np.all(np.isfinite(m100.values))

    def test_silence_conventions(self):
        clip = condition(AudioClip(samples=np.zeros(120320), sample_rate=16000))
        m = extract_llds(clip, 32)
        assert np.all(np.isfinite(m.values))
        idx = {name: i for i, name in enumerate(FEATURE_NAMES)}
        for name in ("spectral_centroid", "spectral_bandwidth", "spectral_rolloff",
                     "spectral_flatness", "rms_energy", "zcr"):
            assert np.allclose(m.values[:, idx[name]], 0.0, atol=1e-12), name
        for band in range(1, 8):
            assert np.allclose(m.values[:, idx[f"spectral_contrast_{band}"]], 0.0, atol=1e-12)
        # floored mel energies are constant, so cepstra beyond slot 0 vanish
        assert np.allclose(m.values[:, 1:13], 0.0, atol=1e-9)
        assert np.all(m.values[:, 0] < -100.0)
        # deltas of a constant track are zero
        assert np.allclose(m.values[:, 13:39], 0.0, atol=1e-9)

    def test_pure_tone_centroid_and_zcr(self):
        m = extract_llds(tone_clip(1000.0), 32)
        idx = {name: i for i, name in enumerate(FEATURE_NAMES)}
        centroid = m.values[:, idx["spectral_centroid"]]
        assert np.all(np.abs(centroid - 1000.0) <= 15.0)
        zcr = m.values[:, idx["zcr"]]
        assert np.all(np.abs(zcr - 2.0 * 1000.0 / 16000.0) <= 0.01)

    def test_zcr_and_rms_columns_bypass_the_window(self):
        clip = tone_clip(440.0, amplitude=0.5)
        m = extract_llds(clip, 32)
        frames = dsp.frame_signal(clip, 32)
        idx = {name: i for i, name in enumerate(FEATURE_NAMES)}
        for i in (0, 200, 468):
            zcr, rms = zcr_rms(frames.frames[i])
            assert m.values[i, idx["zcr"]] == pytest.approx(zcr, abs=1e-12)
            assert m.values[i, idx["rms_energy"]] == pytest.approx(rms, abs=1e-12)

    def test_amplitude_scaling_effects(self):
        rng = np.random.default_rng(26)
        base = 0.2 * make_sine(700.0, 7.52, 16000) + 0.1 * rng.standard_normal(120320)
        one = extract_llds(condition(AudioClip(samples=base, sample_rate=16000)), 100)
        two = extract_llds(condition(AudioClip(samples=2.0 * base, sample_rate=16000)), 100)
        idx = {name: i for i, name in enumerate(FEATURE_NAMES)}
        unchanged = ["spectral_centroid", "spectral_bandwidth", "spectral_rolloff",
                     "spectral_flatness", "zcr"] + [f"spectral_contrast_{b}" for b in range(1, 8)]
        for name in unchanged:
            assert np.allclose(one.values[:, idx[name]], two.values[:, idx[name]],
                               rtol=1e-9, atol=1e-9), name
        assert np.allclose(two.values[:, idx["rms_energy"]],
                           2.0 * one.values[:, idx["rms_energy"]], rtol=1e-12)
        # doubling shifts log energies by 2*ln(2): cepstral slot 0 moves by
        # sqrt(26)*2*ln(2), slots 1..12 and all deltas stay put
        shift = math.sqrt(26.0) * 2.0 * math.log(2.0)
        assert np.allclose(two.values[:, 0] - one.values[:, 0], shift, atol=1e-9)
        assert np.allclose(one.values[:, 1:39], two.values[:, 1:39], atol=1e-9)

    def test_csv_roundtrip_is_exact(self, tmp_path):
        m = extract_llds(tone_clip(300.0), 100)
        path = str(tmp_path / "llds.csv")
        save_lld_csv(path, m)
        back = load_lld_csv(path, frame_ms=100)
        assert back.feature_names == FEATURE_NAMES
        assert np.array_equal(back.values, m.values)
