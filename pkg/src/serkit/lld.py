"""Per-frame low-level descriptors: the fixed 52-column feature matrix.

Column layout (frozen, see FEATURE_NAMES):

    0..12   mfcc_01..mfcc_13        cepstral coefficients 0..12
    13..25  mfcc_d_01..mfcc_d_13    regression deltas of the above
    26..38  mfcc_dd_01..mfcc_dd_13  deltas of the deltas
    39      spectral_centroid       Hz
    40      spectral_bandwidth      Hz
    41      spectral_rolloff        Hz, 0.85 of cumulative magnitude
    42      spectral_flatness       geometric / arithmetic mean
    43      rms_energy              on the unwindowed frame
    44      zcr                     sign changes / (frame_len - 1)
    45..51  spectral_contrast_1..7  log(peak/valley) per band

Spectral descriptors and contrast read the magnitude spectrum; MFCCs read
mel energies of the power spectrum. ZCR and RMS bypass the window. Every
output is finite for every input, digital silence included: log inputs are
floored at 1e-10 and ratio descriptors of an all-zero spectrum are 0 by
convention.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import dsp
from .audio import ConditionedClip

LOG_FLOOR = 1e-10
NUM_MEL_FILTERS = 26
NUM_MFCC = 13
MEL_FMIN = 0.0
MEL_FMAX = 8000.0
CONTRAST_EDGES_HZ = (0.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0, 8000.0)
CONTRAST_ALPHA = 0.2
DELTA_WIDTH = 2

FEATURE_NAMES = tuple(
    [f"mfcc_{i:02d}" for i in range(1, NUM_MFCC + 1)]
    + [f"mfcc_d_{i:02d}" for i in range(1, NUM_MFCC + 1)]
    + [f"mfcc_dd_{i:02d}" for i in range(1, NUM_MFCC + 1)]
    + ["spectral_centroid", "spectral_bandwidth", "spectral_rolloff",
       "spectral_flatness", "rms_energy", "zcr"]
    + [f"spectral_contrast_{i}" for i in range(1, 8)]
)
NUM_FEATURES = len(FEATURE_NAMES)  # 52


@dataclass
class LldMatrix:
    """Per-utterance descriptor matrix, frames by features."""

    values: np.ndarray  # (num_frames, 52)
    feature_names: tuple
    frame_ms: int
    clip_id: str = ""

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]


@lru_cache(maxsize=8)
def _dct2_matrix(num_coeffs: int, length: int) -> np.ndarray:
    # Orthonormal DCT-II rows: c_k[n] = s_k * cos(pi * k * (2n + 1) / (2N))
    n = np.arange(length)
    k = np.arange(num_coeffs)[:, None]
    mat = np.cos(np.pi * k * (2 * n[None, :] + 1) / (2 * length))
    mat[0] *= np.sqrt(1.0 / length)
    mat[1:] *= np.sqrt(2.0 / length)
    return mat


def mfcc(spectrum: dsp.Spectrum, num_coeffs: int = NUM_MFCC) -> np.ndarray:
    """Cepstral coefficients 0..num_coeffs-1 from one spectrum."""
    energies = dsp.mel_filterbank(spectrum, NUM_MEL_FILTERS, MEL_FMIN, MEL_FMAX)
    log_e = np.log(np.maximum(energies, LOG_FLOOR))
    return _dct2_matrix(num_coeffs, NUM_MEL_FILTERS) @ log_e


def _mfcc_batch(power_spec: np.ndarray, bank: np.ndarray) -> np.ndarray:
    log_e = np.log(np.maximum(power_spec @ bank.T, LOG_FLOOR))
    return log_e @ _dct2_matrix(NUM_MFCC, bank.shape[0]).T


def spectral_descriptors(spectrum: dsp.Spectrum):
    """(centroid, bandwidth, rolloff, flatness) of one magnitude spectrum."""
    c, b, r, f = _descriptor_batch(spectrum.magnitudes[None, :], spectrum.freqs)
    return float(c[0]), float(b[0]), float(r[0]), float(f[0])


def _descriptor_batch(mags: np.ndarray, freqs: np.ndarray):
    total = mags.sum(axis=1)
    live = total > 0
    safe_total = np.where(live, total, 1.0)

    centroid = np.where(live, (mags * freqs[None, :]).sum(axis=1) / safe_total, 0.0)
    spread = (mags * (freqs[None, :] - centroid[:, None]) ** 2).sum(axis=1) / safe_total
    bandwidth = np.where(live, np.sqrt(spread), 0.0)

    cum = np.cumsum(mags, axis=1)
    reach = cum >= 0.85 * total[:, None]
    rolloff = np.where(live, freqs[np.argmax(reach, axis=1)], 0.0)

    floored = np.maximum(mags, LOG_FLOOR)
    geo = np.exp(np.mean(np.log(floored), axis=1))
    flatness = np.where(live, geo / np.mean(floored, axis=1), 0.0)
    return centroid, bandwidth, rolloff, flatness


def spectral_contrast(spectrum: dsp.Spectrum) -> np.ndarray:
    """Per-band log(peak mean / valley mean), 7 bands."""
    return _contrast_batch(spectrum.magnitudes[None, :], spectrum.freqs)[0]


def _contrast_batch(mags: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    num_bands = len(CONTRAST_EDGES_HZ) - 1
    out = np.zeros((mags.shape[0], num_bands))
    for band in range(num_bands):
        lo, hi = CONTRAST_EDGES_HZ[band], CONTRAST_EDGES_HZ[band + 1]
        if band == num_bands - 1:
            sel = (freqs >= lo) & (freqs <= hi)
        else:
            sel = (freqs >= lo) & (freqs < hi)
        chunk = np.sort(mags[:, sel], axis=1)
        k = max(1, int(np.ceil(CONTRAST_ALPHA * chunk.shape[1])))
        valley = np.maximum(chunk[:, :k].mean(axis=1), LOG_FLOOR)
        peak = np.maximum(chunk[:, -k:].mean(axis=1), LOG_FLOOR)
        out[:, band] = np.log(peak / valley)
    return out


def zcr_rms(frame: np.ndarray):
    """(zero-crossing rate, root-mean-square) of one unwindowed frame."""
    x = np.asarray(frame, dtype=np.float64)
    signs = np.sign(x)
    zcr = np.count_nonzero(signs[1:] != signs[:-1]) / (len(x) - 1)
    rms = float(np.sqrt(np.mean(x ** 2)))
    return zcr, rms


def delta(track: np.ndarray, width: int = DELTA_WIDTH) -> np.ndarray:
    """Regression slope over a +-width window along the frame axis.

    d_t = sum_n n * (x[t+n] - x[t-n]) / (2 * sum_n n^2), edges replicated.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    x = np.asarray(track, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    padded = np.pad(x, ((width, width), (0, 0)), mode="edge")
    denom = 2.0 * sum(n * n for n in range(1, width + 1))
    out = np.zeros_like(x)
    t = len(x)
    for n in range(1, width + 1):
        out += n * (padded[width + n : width + n + t] - padded[width - n : width - n + t])
    out /= denom
    return out[:, 0] if squeeze else out


def extract_llds(clip: ConditionedClip, frame_ms: int, window: str = "hamming") -> LldMatrix:
    """Compute the 52-column descriptor matrix for one conditioned clip."""
    raw = dsp.frame_signal(clip, frame_ms)
    windowed = dsp.apply_window(raw, window)
    fft_size = dsp.FFT_SIZES[frame_ms]
    mags = dsp.magnitude_spectrogram(windowed, fft_size)
    freqs = np.arange(fft_size // 2 + 1) * (clip.sample_rate / fft_size)

    bank = dsp.mel_filter_matrix(NUM_MEL_FILTERS, fft_size, clip.sample_rate, MEL_FMIN, MEL_FMAX)
    cepstra = _mfcc_batch(mags ** 2, bank)
    d1 = delta(cepstra, DELTA_WIDTH)
    d2 = delta(d1, DELTA_WIDTH)

    centroid, bandwidth, rolloff, flatness = _descriptor_batch(mags, freqs)
    contrast = _contrast_batch(mags, freqs)

    x = raw.frames
    signs = np.sign(x)
    zcr = np.count_nonzero(signs[:, 1:] != signs[:, :-1], axis=1) / (x.shape[1] - 1)
    rms = np.sqrt(np.mean(x ** 2, axis=1))

    values = np.column_stack([
        cepstra, d1, d2,
        centroid, bandwidth, rolloff, flatness, rms, zcr,
        contrast,
    ])
    clip_id = clip.source_path.rsplit("/", 1)[-1].rsplit(".", 1)[0] if clip.source_path else ""
    return LldMatrix(values=values, feature_names=FEATURE_NAMES, frame_ms=frame_ms, clip_id=clip_id)


def save_lld_npy(path: str, llds: LldMatrix) -> None:
    np.save(path, llds.values)


def save_lld_csv(path: str, llds: LldMatrix) -> None:
    """Header row of feature names, one row per frame."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(llds.feature_names)
        for row in llds.values:
            writer.writerow([repr(float(v)) for v in row])


def load_lld_csv(path: str, frame_ms: int = 0, clip_id: str = "") -> LldMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        names = tuple(next(reader))
        values = np.array([[float(cell) for cell in row] for row in reader])
    return LldMatrix(values=values, feature_names=names, frame_ms=frame_ms, clip_id=clip_id)
