"""Synthetic labelled corpus generator.

The real corpus is license-gated, so the toolkit ships a generator that
demonstrates the full pipeline without it: five classes of vocal-like
signals (harmonic complexes with class-dependent pitch, brightness,
chirp, and amplitude modulation) plus a manifest CSV. Classes are
separable by design. A fixed seed gives a byte-identical corpus.

Clip durations vary between 2.5 and 5.5 seconds; after conditioning to
the fixed pipeline length every clip carries trailing digital silence,
which is what the attention analyses key on.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .audio import encode_wav
from .manifest import EMOTIONS

TOY_RATE = 44100
DUR_RANGE_S = (2.5, 5.5)

# per class: base pitch Hz, harmonic amplitude decay exponent, pitch glide
# (end/start ratio), AM rate Hz, AM depth, noise level
_RECIPES = {
    "anger":     dict(f0=110.0, decay=1.0, glide=1.00, am_rate=8.0, am_depth=0.50, noise=0.060),
    "happiness": dict(f0=160.0, decay=0.5, glide=1.15, am_rate=4.0, am_depth=0.30, noise=0.030),
    "neutral":   dict(f0=220.0, decay=2.0, glide=1.00, am_rate=1.5, am_depth=0.10, noise=0.015),
    "sadness":   dict(f0=320.0, decay=1.5, glide=0.80, am_rate=2.0, am_depth=0.20, noise=0.020),
    "surprise":  dict(f0=450.0, decay=0.5, glide=1.40, am_rate=12.0, am_depth=0.40, noise=0.080),
}
_NUM_HARMONICS = {"anger": 8, "happiness": 6, "neutral": 3, "sadness": 4, "surprise": 5}
_LABEL_TO_LETTER = {"anger": "A", "happiness": "H", "neutral": "N",
                    "sadness": "S", "surprise": "W"}


def _synth_clip(label, rng, sample_rate):
    recipe = _RECIPES[label]
    duration = rng.uniform(*DUR_RANGE_S)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    f0 = recipe["f0"] * rng.uniform(0.92, 1.08)
    # linear pitch glide from f0 to glide*f0; phase is the integral of f(t)
    sweep = f0 * (t + (recipe["glide"] - 1.0) * t * t / (2.0 * duration))
    signal = np.zeros(n)
    for h in range(1, _NUM_HARMONICS[label] + 1):
        amp = 1.0 / h ** recipe["decay"]
        phase = rng.uniform(0.0, 2.0 * np.pi)
        signal += amp * np.sin(2.0 * np.pi * h * sweep + phase)
    signal /= np.max(np.abs(signal))
    am_phase = rng.uniform(0.0, 2.0 * np.pi)
    envelope = 1.0 - recipe["am_depth"] * 0.5 * (
        1.0 + np.sin(2.0 * np.pi * recipe["am_rate"] * t + am_phase))
    signal *= envelope
    signal += recipe["noise"] * rng.standard_normal(n)
    # short fades avoid clicks at the clip edges
    fade = min(int(0.02 * sample_rate), n // 4)
    ramp = np.linspace(0.0, 1.0, fade)
    signal[:fade] *= ramp
    signal[-fade:] *= ramp[::-1]
    return np.clip(0.7 * signal, -0.99, 0.99)


def make_toy_corpus(out_dir, seed=42, clips_per_class=40, sample_rate=TOY_RATE):
    """Generate the corpus under out_dir; returns the manifest CSV path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    for label in EMOTIONS:
        letter = _LABEL_TO_LETTER[label]
        for idx in range(clips_per_class):
            speaker = idx % 4 + 1
            gender = "M" if speaker <= 2 else "F"
            name = f"{gender}{speaker:02d}{letter}{idx:02d}.wav"
            samples = _synth_clip(label, rng, sample_rate)
            encode_wav(str(out / name), samples, sample_rate)
            rows.append((name, label, f"{speaker:02d}", gender))
    manifest_path = out / "manifest.csv"
    lines = ["path,label,speaker,gender"]
    lines += [",".join(row) for row in rows]
    manifest_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest_path
