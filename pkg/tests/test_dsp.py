"""Framing, windowing, FFT, and mel filterbank checks.

The FFT path is checked against a direct O(n^2) DFT evaluation and the
mel filterbank against the closed-form scale conversion, so none of the
assertions share code with the implementation under test.
"""

import numpy as np
import pytest

from oracles import (
    hamming_coefficients,
    hz_to_mel_formula,
    make_sine,
    naive_dft_magnitude,
    naive_dft_magnitude_loops,
)
from serkit.audio import CLIP_SAMPLES as CONDITIONED_SAMPLES
from serkit.audio import PIPELINE_RATE, ConditionedClip
from serkit.dsp import (
    FFT_SIZES,
    FrameMatrix,
    Spectrum,
    apply_window,
    fft_magnitude,
    frame_signal,
    hz_to_mel,
    magnitude_spectrogram,
    mel_filter_centers,
    mel_filter_matrix,
    mel_filterbank,
    mel_to_hz,
    window_coefficients,
)
from serkit.errors import BadBand, NotPowerOfTwo, UnsupportedFrameLength


def conditioned(samples):
    x = np.asarray(samples, dtype=np.float64)
    assert len(x) == CONDITIONED_SAMPLES
    return ConditionedClip(samples=x, sample_rate=PIPELINE_RATE,
                           original_duration_s=len(x) / PIPELINE_RATE)


@pytest.fixture(scope="module")
def ramp_clip():
    return conditioned(np.arange(CONDITIONED_SAMPLES, dtype=np.float64))


class TestFraming:
    def test_32ms_frame_geometry(self, ramp_clip):
        fm = frame_signal(ramp_clip, 32)
        assert fm.frame_len_samples == 512
        assert fm.hop_samples == 256
        assert fm.num_frames == 469
        assert fm.frames.shape == (469, 512)

    def test_100ms_frame_geometry(self, ramp_clip):
        fm = frame_signal(ramp_clip, 100)
        assert fm.frame_len_samples == 1600
        assert fm.hop_samples == 800
        assert fm.num_frames == 149
        assert fm.frames.shape == (149, 1600)

    def test_frame_rows_are_hop_spaced_slices(self, ramp_clip):
        # on a ramp signal, frame i must literally be the slice starting at i*hop
        fm = frame_signal(ramp_clip, 32)
        for i in (0, 1, 7, 468):
            start = i * fm.hop_samples
            assert np.array_equal(fm.frames[i], ramp_clip.samples[start:start + 512])

    def test_tail_that_does_not_fill_a_frame_is_dropped(self, ramp_clip):
        fm = frame_signal(ramp_clip, 100)
        covered = (fm.num_frames - 1) * fm.hop_samples + fm.frame_len_samples
        assert covered <= CONDITIONED_SAMPLES
        # one more frame would overrun the clip
        assert fm.num_frames * fm.hop_samples + fm.frame_len_samples > CONDITIONED_SAMPLES

    @pytest.mark.parametrize("bad_ms", [10, 25, 64, 0, -32])
    def test_unsupported_frame_length(self, ramp_clip, bad_ms):
        with pytest.raises(UnsupportedFrameLength):
            frame_signal(ramp_clip, bad_ms)


class TestWindows:
    def test_hamming_matches_direct_formula(self):
        for n in (512, 1600):
            got = window_coefficients("hamming", n)
            want = hamming_coefficients(n)
            assert np.allclose(got, want, rtol=0.0, atol=1e-12)

    def test_rectangular_is_all_ones(self):
        assert np.array_equal(window_coefficients("rectangular", 512), np.ones(512))

    def test_hann_endpoints_and_symmetry(self):
        w = window_coefficients("hann", 512)
        assert w[0] == 0.0 and w[-1] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(w, w[::-1])

    def test_apply_window_multiplies_every_row(self, ramp_clip):
        fm = frame_signal(ramp_clip, 32)
        out = apply_window(fm, "hamming")
        w = hamming_coefficients(512)
        assert np.allclose(out.frames, fm.frames * w[None, :])
        assert out.hop_samples == fm.hop_samples

    def test_unknown_window_kind(self, ramp_clip):
        fm = frame_signal(ramp_clip, 32)
        with pytest.raises(ValueError):
            apply_window(fm, "blackman-harris-nuttall")


class TestFftMagnitude:
    def test_matches_naive_dft_on_random_frame(self):
        rng = np.random.default_rng(11)
        frame = rng.standard_normal(512)
        spec = fft_magnitude(frame, 512)
        want = naive_dft_magnitude(frame)
        assert spec.magnitudes.shape == (257,)
        assert np.max(np.abs(spec.magnitudes - want)) < 1e-9

    def test_matches_pure_loop_dft_on_short_frame(self):
        rng = np.random.default_rng(12)
        frame = rng.standard_normal(64)
        spec = fft_magnitude(frame, 64)
        want = naive_dft_magnitude_loops(frame)
        assert np.max(np.abs(spec.magnitudes - want)) < 1e-9

    def test_zero_padding_equals_explicit_padding(self):
        rng = np.random.default_rng(13)
        frame = rng.standard_normal(1600)
        spec = fft_magnitude(frame, 2048)
        padded = np.concatenate([frame, np.zeros(448)])
        want = naive_dft_magnitude(padded)
        assert spec.magnitudes.shape == (1025,)
        assert np.max(np.abs(spec.magnitudes - want)) < 1e-9

    def test_bin_resolution(self):
        spec = fft_magnitude(np.zeros(512), 512, sample_rate=16000)
        assert spec.bin_hz == pytest.approx(31.25)
        spec = fft_magnitude(np.zeros(1600), 2048, sample_rate=16000)
        assert spec.bin_hz == pytest.approx(7.8125)
        assert spec.freqs[-1] == pytest.approx(8000.0)

    def test_pure_tone_lands_in_expected_bin(self):
        # 1000 Hz at 16 kHz with fft 512: bin 1000/31.25 = 32 exactly
        tone = make_sine(1000.0, 512 / 16000, 16000)
        spec = fft_magnitude(tone, 512)
        assert int(np.argmax(spec.magnitudes)) == 32

    @pytest.mark.parametrize("bad", [0, -4, 100, 513])
    def test_non_power_of_two_rejected(self, bad):
        with pytest.raises(NotPowerOfTwo):
            fft_magnitude(np.zeros(16), bad)

    def test_frame_longer_than_fft_rejected(self):
        with pytest.raises(ValueError):
            fft_magnitude(np.zeros(1024), 512)

    def test_spectrogram_matches_per_frame_transform(self, ramp_clip=None):
        rng = np.random.default_rng(14)
        x = rng.standard_normal(CONDITIONED_SAMPLES)
        fm = frame_signal(conditioned(x), 100)
        fft_size = FFT_SIZES[100]
        grid = magnitude_spectrogram(fm, fft_size)
        assert grid.shape == (149, 1025)
        for i in (0, 74, 148):
            single = fft_magnitude(fm.frames[i], fft_size).magnitudes
            assert np.allclose(grid[i], single, rtol=0.0, atol=1e-12)

    def test_spectrogram_rejects_non_power_of_two(self, ramp_clip=None):
        fm = frame_signal(conditioned(np.zeros(CONDITIONED_SAMPLES)), 32)
        with pytest.raises(NotPowerOfTwo):
            magnitude_spectrogram(fm, 500)


class TestMelScale:
    def test_forward_matches_formula(self):
        freqs = [0.0, 300.0, 1000.0, 4000.0, 8000.0]
        want = [hz_to_mel_formula(f) for f in freqs]
        assert np.allclose(hz_to_mel(np.array(freqs)), want)

    def test_1000_hz_is_about_1000_mel(self):
        assert hz_to_mel(1000.0) == pytest.approx(1000.0, abs=0.1)

    def test_roundtrip_is_identity(self):
        freqs = np.linspace(0.0, 8000.0, 57)
        assert np.allclose(mel_to_hz(hz_to_mel(freqs)), freqs, atol=1e-8)

    def test_monotone_increasing(self):
        mels = hz_to_mel(np.linspace(0.0, 8000.0, 100))
        assert np.all(np.diff(mels) > 0)


class TestMelFilterbank:
    def test_matrix_shape_and_nonnegativity(self):
        bank = mel_filter_matrix(26, 2048, 16000, 0.0, 8000.0)
        assert bank.shape == (26, 1025)
        assert np.all(bank >= 0.0)

    def test_each_filter_peaks_near_one(self):
        # peak of each triangle is 1; the nearest FFT bin gets close to it
        bank = mel_filter_matrix(26, 2048, 16000, 0.0, 8000.0)
        peaks = bank.max(axis=1)
        assert np.all(peaks > 0.85)
        assert np.all(peaks <= 1.0 + 1e-12)

    def test_filters_are_zero_outside_neighbour_centers(self):
        bank = mel_filter_matrix(26, 2048, 16000, 0.0, 8000.0)
        centers = mel_filter_centers(26, 0.0, 8000.0)
        freqs = np.arange(1025) * (16000 / 2048)
        # filter 10 must vanish strictly outside (center_9, center_11)
        outside = (freqs <= centers[8]) | (freqs >= centers[10])
        assert np.all(bank[9][outside] == 0.0)

    def test_centers_follow_mel_spacing(self):
        centers = mel_filter_centers(26, 0.0, 8000.0)
        assert centers.shape == (26,)
        assert np.all(np.diff(centers) > 0)
        mel_steps = np.diff(hz_to_mel(np.concatenate([[0.0], centers, [8000.0]])))
        assert np.allclose(mel_steps, mel_steps[0], rtol=1e-9)

    def test_neighbouring_triangles_sum_to_one_between_centers(self):
        # complementary slopes: between two adjacent centers, up + down = 1
        bank = mel_filter_matrix(26, 2048, 16000, 0.0, 8000.0)
        centers = mel_filter_centers(26, 0.0, 8000.0)
        freqs = np.arange(1025) * (16000 / 2048)
        inside = (freqs > centers[12]) & (freqs < centers[13])
        pair = bank[12][inside] + bank[13][inside]
        assert np.allclose(pair, 1.0, atol=1e-9)

    def test_energies_use_power_spectrum(self):
        rng = np.random.default_rng(15)
        mags = np.abs(rng.standard_normal(1025)) + 0.1
        spec = Spectrum(magnitudes=mags, fft_size=2048, bin_hz=16000 / 2048)
        bank = mel_filter_matrix(26, 2048, 16000, 0.0, 8000.0)
        want = bank @ (mags ** 2)
        got = mel_filterbank(spec, 26, 0.0, 8000.0)
        assert np.allclose(got, want, rtol=0.0, atol=1e-12)

    def test_tone_energy_concentrates_at_matching_filter(self):
        tone = make_sine(1000.0, 0.1, 16000)
        spec = fft_magnitude(tone[:1600], 2048)
        energies = mel_filterbank(spec, 26, 0.0, 8000.0)
        centers = mel_filter_centers(26, 0.0, 8000.0)
        best = int(np.argmax(energies))
        nearest = int(np.argmin(np.abs(centers - 1000.0)))
        assert abs(best - nearest) <= 1

    @pytest.mark.parametrize("fmin,fmax", [(-1.0, 8000.0), (100.0, 100.0),
                                           (500.0, 100.0), (0.0, 9000.0)])
    def test_bad_band_rejected(self, fmin, fmax):
        with pytest.raises(BadBand):
            mel_filter_matrix(26, 2048, 16000, fmin, fmax)
