"""Framing, windowing, FFT magnitudes, and the mel filterbank.

These are the shared transforms under every spectral descriptor. All of
them are stateless; the mel filter matrix can be built once and reused
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio import PIPELINE_RATE, ConditionedClip
from .errors import BadBand, NotPowerOfTwo, UnsupportedFrameLength

SUPPORTED_FRAME_MS = (32, 100)
FFT_SIZES = {32: 512, 100: 2048}  # smallest powers of two holding the frame


@dataclass
class FrameMatrix:
    """Consecutive analysis frames, one per row, at 50% overlap."""

    frames: np.ndarray  # (num_frames, frame_len)
    frame_len_samples: int
    hop_samples: int
    sample_rate: int

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]


@dataclass
class Spectrum:
    """One-sided DFT magnitudes of a single frame."""

    magnitudes: np.ndarray  # (fft_size // 2 + 1,)
    fft_size: int
    bin_hz: float

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(len(self.magnitudes)) * self.bin_hz


def frame_signal(clip: ConditionedClip, frame_ms: int) -> FrameMatrix:
    """Slice a conditioned clip into frames of frame_ms with 50% overlap.

    Trailing samples that do not fill a whole frame are dropped.
    """
    if frame_ms not in SUPPORTED_FRAME_MS:
        raise UnsupportedFrameLength(f"frame_ms must be one of {SUPPORTED_FRAME_MS}, got {frame_ms}")
    frame_len = frame_ms * clip.sample_rate // 1000
    hop = frame_len // 2
    frames = _frame_array(np.asarray(clip.samples, dtype=np.float64), frame_len, hop)
    return FrameMatrix(frames, frame_len, hop, clip.sample_rate)


def _frame_array(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    num_frames = (len(x) - frame_len) // hop + 1
    idx = hop * np.arange(num_frames)[:, None] + np.arange(frame_len)[None, :]
    return x[idx]


_WINDOWS = {
    "hamming": np.hamming,       # 0.54 - 0.46 cos(2 pi n / (N-1))
    "hann": np.hanning,
    "rectangular": np.ones,
}


def window_coefficients(kind: str, length: int) -> np.ndarray:
    if kind not in _WINDOWS:
        raise ValueError(f"unknown window kind {kind!r}; choose from {sorted(_WINDOWS)}")
    return _WINDOWS[kind](length).astype(np.float64)


def apply_window(frames: FrameMatrix, kind: str = "hamming") -> FrameMatrix:
    """Multiply every frame by the window of its length."""
    w = window_coefficients(kind, frames.frame_len_samples)
    return FrameMatrix(frames.frames * w[None, :], frames.frame_len_samples,
                       frames.hop_samples, frames.sample_rate)


def fft_magnitude(frame: np.ndarray, fft_size: int, sample_rate: int = PIPELINE_RATE) -> Spectrum:
    """One-sided DFT magnitudes of a frame zero-padded to fft_size."""
    if fft_size <= 0 or fft_size & (fft_size - 1):
        raise NotPowerOfTwo(f"fft_size must be a power of two, got {fft_size}")
    x = np.asarray(frame, dtype=np.float64)
    if len(x) > fft_size:
        raise ValueError(f"frame of {len(x)} samples does not fit fft_size {fft_size}")
    mags = np.abs(np.fft.rfft(x, n=fft_size))
    return Spectrum(mags, fft_size, sample_rate / fft_size)


def magnitude_spectrogram(frames: FrameMatrix, fft_size: int) -> np.ndarray:
    """Batched fft_magnitude over all frames: (num_frames, fft_size/2 + 1)."""
    if fft_size <= 0 or fft_size & (fft_size - 1):
        raise NotPowerOfTwo(f"fft_size must be a power of two, got {fft_size}")
    if frames.frame_len_samples > fft_size:
        raise ValueError("frames do not fit fft_size")
    return np.abs(np.fft.rfft(frames.frames, n=fft_size, axis=1))


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=16)
def mel_filter_matrix(num_filters: int, fft_size: int, sample_rate: int,
                      fmin: float, fmax: float) -> np.ndarray:
    """Triangular mel filters as a (num_filters, fft_size/2 + 1) matrix.

    Filter edges are spaced evenly on the mel scale between fmin and fmax;
    each triangle peaks at 1 and is zero outside its two neighbours' centers.
    """
    if not 0 <= fmin < fmax <= sample_rate / 2:
        raise BadBand(f"need 0 <= fmin < fmax <= {sample_rate / 2}, got ({fmin}, {fmax})")
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), num_filters + 2))
    freqs = np.arange(fft_size // 2 + 1) * (sample_rate / fft_size)
    bank = np.zeros((num_filters, len(freqs)))
    for i in range(num_filters):
        lo, center, hi = edges[i], edges[i + 1], edges[i + 2]
        up = (freqs - lo) / max(center - lo, 1e-12)
        down = (hi - freqs) / max(hi - center, 1e-12)
        bank[i] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def mel_filter_centers(num_filters: int, fmin: float, fmax: float) -> np.ndarray:
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), num_filters + 2))
    return edges[1:-1]


def mel_filterbank(spectrum: Spectrum, num_filters: int, fmin: float, fmax: float) -> np.ndarray:
    """Filter energies over the power spectrum (squared magnitudes)."""
    sample_rate = int(round(spectrum.bin_hz * spectrum.fft_size))
    bank = mel_filter_matrix(num_filters, spectrum.fft_size, sample_rate, fmin, fmax)
    return bank @ (spectrum.magnitudes ** 2)
