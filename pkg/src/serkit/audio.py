"""WAV decoding, resampling, and fixed-duration conditioning.

Every clip entering the feature pipeline is reduced to the same canonical
form: mono float64 samples at 16 kHz, exactly 7.52 seconds long (padded or
cropped). All functions are pure; nothing here keeps state.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyAudio, MalformedContainer, UnsupportedEncoding, WrongRate

PIPELINE_RATE = 16000
CLIP_SECONDS = 7.52
CLIP_SAMPLES = round(CLIP_SECONDS * PIPELINE_RATE)  # 120320

_PCM_SCALE = 32768.0


@dataclass
class AudioClip:
    """Mono audio with amplitudes in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int
    source_path: str = ""

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class ConditionedClip:
    """Clip pinned to the pipeline rate and the fixed analysis duration."""

    samples: np.ndarray
    original_duration_s: float
    padded: bool = False
    cropped: bool = False
    sample_rate: int = PIPELINE_RATE
    source_path: str = ""


def decode_wav(path: str) -> AudioClip:
    """Decode a RIFF/WAVE file holding 16-bit PCM, 1 or 2 channels.

    Stereo is averaged to mono. Sample values are normalized by 1/32768,
    which keeps every amplitude inside [-1, 1].
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise MalformedContainer(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        cid = blob[pos : pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise MalformedContainer(f"{path}: chunk {cid!r} truncated")
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or data is None:
        raise MalformedContainer(f"{path}: missing fmt or data chunk")
    if len(fmt) < 16:
        raise MalformedContainer(f"{path}: fmt chunk too short")
    audio_format, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if audio_format != 1 or bits != 16:
        raise UnsupportedEncoding(f"{path}: need 16-bit PCM, got format={audio_format} bits={bits}")
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: need 1 or 2 channels, got {channels}")

    usable = len(data) - (len(data) % (2 * channels))
    raw = np.frombuffer(data[:usable], dtype="<i2")
    if raw.size == 0:
        raise EmptyAudio(f"{path}: no samples")
    samples = raw.astype(np.float64) / _PCM_SCALE
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return AudioClip(samples=samples, sample_rate=int(sample_rate), source_path=str(path))


def encode_wav(path: str, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono float samples as 16-bit PCM (values clipped to [-1, 1])."""
    x = np.asarray(samples, dtype=np.float64)
    pcm = np.clip(np.rint(x * _PCM_SCALE), -32768, 32767).astype("<i2")
    data = pcm.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, sample_rate, sample_rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(data))
    with open(path, "wb") as fh:
        fh.write(header + data)


def _sinc_kernel_weights(positions: np.ndarray, cutoff: float, half_width: float, beta: float) -> np.ndarray:
    """Windowed-sinc interpolation weights at fractional tap offsets.

    `positions` holds tap times in input-sample units relative to the output
    point; `cutoff` is in cycles per input sample (<= 0.5).
    """
    core = 2.0 * cutoff * np.sinc(2.0 * cutoff * positions)
    inside = np.abs(positions) <= half_width
    arg = np.zeros_like(positions)
    arg[inside] = 1.0 - (positions[inside] / half_width) ** 2
    window = np.where(inside, np.i0(beta * np.sqrt(arg)) / np.i0(beta), 0.0)
    return core * window


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Resample with a Kaiser-windowed sinc low-pass (anti-aliased).

    Output length is round(n * target / source). The low-pass cutoff sits at
    0.95 of the smaller Nyquist frequency, so content above the target band
    is attenuated far beyond the 40 dB contract.
    """
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == clip.sample_rate:
        return AudioClip(clip.samples.copy(), clip.sample_rate, clip.source_path)

    x = np.asarray(clip.samples, dtype=np.float64)
    ratio = target_rate / clip.sample_rate
    n_out = int(round(len(x) * ratio))
    if n_out == 0:
        return AudioClip(np.zeros(0), target_rate, clip.source_path)

    cutoff = 0.475 * min(1.0, ratio)  # cycles per input sample
    lobes = 16
    half_width = lobes / (2.0 * cutoff)
    reach = int(np.ceil(half_width))

    # output k sits at k*down/up input samples; integer math keeps the tap
    # positions exact, and the fractional parts cycle with period `up`, so
    # the kernel is only evaluated once per distinct fraction
    gcd = math.gcd(int(target_rate), int(clip.sample_rate))
    up, down = target_rate // gcd, clip.sample_rate // gcd
    pos_num = np.arange(n_out, dtype=np.int64) * down
    base = pos_num // up
    unique_frac, inverse = np.unique(pos_num - base * up, return_inverse=True)
    offsets = np.arange(-reach, reach + 1, dtype=np.float64)
    taps = offsets[None, :] - (unique_frac / up)[:, None]
    weights = _sinc_kernel_weights(taps, cutoff, half_width, 8.6)[inverse]

    padded = np.concatenate([np.zeros(reach), x, np.zeros(reach + 1)])
    gather = base[:, None] + offsets[None, :].astype(np.int64) + reach
    y = np.einsum("ij,ij->i", padded[gather], weights)
    return AudioClip(y, int(target_rate), clip.source_path)


def condition(clip: AudioClip) -> ConditionedClip:
    """Pin a 16 kHz clip to the fixed analysis length of 120320 samples.

    Shorter clips get trailing zeros; longer clips keep their first 7.52 s.
    """
    if clip.sample_rate != PIPELINE_RATE:
        raise WrongRate(f"expected {PIPELINE_RATE} Hz, got {clip.sample_rate}; resample first")
    x = np.asarray(clip.samples, dtype=np.float64)
    n = len(x)
    if n < CLIP_SAMPLES:
        out = np.concatenate([x, np.zeros(CLIP_SAMPLES - n)])
        padded, cropped = True, False
    elif n > CLIP_SAMPLES:
        out = x[:CLIP_SAMPLES].copy()
        padded, cropped = False, True
    else:
        out = x.copy()
        padded = cropped = False
    return ConditionedClip(
        samples=out,
        original_duration_s=n / PIPELINE_RATE,
        padded=padded,
        cropped=cropped,
        source_path=clip.source_path,
    )


def condition_wav(path: str) -> ConditionedClip:
    """decode -> resample to 16 kHz -> fixed duration, in one call."""
    clip = decode_wav(path)
    if clip.sample_rate != PIPELINE_RATE:
        clip = resample(clip, PIPELINE_RATE)
    return condition(clip)
