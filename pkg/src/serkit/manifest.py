"""Corpus manifests: labelled clip lists, the fear filter, and splits.

A manifest is loaded either from a CSV (`path,label[,speaker,gender]`,
header optional) or from a directory of WAV files whose names encode the
label through a regular expression with named capture groups. Entries
labelled fear are dropped up front with a logged count; the remaining
five emotions are indexed in a fixed order.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    ClassTooSmall,
    ConfigInvalid,
    DuplicatePath,
    EmptyManifest,
    MissingFile,
    UnknownLabel,
)

log = logging.getLogger("serkit.manifest")

EMOTIONS = ("anger", "happiness", "neutral", "sadness", "surprise")
FEAR = "fear"
LABEL_TO_INDEX = {name: i for i, name in enumerate(EMOTIONS)}

# single-letter codes used by corpus filenames: A=anger, H=happiness,
# N=neutral, S=sadness, W=surprise, F=fear
LETTER_TO_LABEL = {"A": "anger", "H": "happiness", "N": "neutral",
                   "S": "sadness", "W": "surprise", "F": FEAR}

# e.g. F21A03.wav -> gender F, speaker 21, label letter A, take 03
DEFAULT_FILENAME_RULE = (
    r"^(?P<gender>[MF])(?P<speaker>\d+)(?P<label>[AHNSWF])(?P<take>\d+)\.wav$"
)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    class_index: int
    speaker: Optional[str] = None
    gender: Optional[str] = None


@dataclass
class Manifest:
    entries: list
    fear_dropped: int = 0
    label_map: dict = field(default_factory=lambda: dict(LABEL_TO_INDEX))

    def __len__(self):
        return len(self.entries)

    def paths(self):
        return [e.path for e in self.entries]

    def labels(self):
        return np.array([e.class_index for e in self.entries], dtype=np.int64)

    def class_counts(self):
        counts = {name: 0 for name in EMOTIONS}
        for e in self.entries:
            counts[e.label] += 1
        return counts


def _finalize(raw_entries, source):
    seen = set()
    for e in raw_entries:
        if e.path in seen:
            raise DuplicatePath(f"{source}: duplicate clip path {e.path}")
        seen.add(e.path)
    kept = [e for e in raw_entries if e.label != FEAR]
    dropped = len(raw_entries) - len(kept)
    if dropped:
        log.info("%s: dropped %d fear-labelled entries", source, dropped)
    if not kept:
        raise EmptyManifest(f"{source}: no usable entries after the fear filter")
    for e in kept:
        if not Path(e.path).exists():
            raise MissingFile(f"{source}: {e.path} does not exist")
    return Manifest(entries=kept, fear_dropped=dropped)


def _load_csv(csv_path: Path):
    base = csv_path.parent
    entries = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and rows[0][0].strip().lower() == "path":
        rows = rows[1:]
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 2:
            raise UnknownLabel(f"{csv_path}:{lineno}: need at least path,label")
        path = row[0].strip()
        label = row[1].strip().lower()
        if label not in LABEL_TO_INDEX and label != FEAR:
            raise UnknownLabel(f"{csv_path}:{lineno}: unknown label {label!r}")
        speaker = row[2].strip() if len(row) > 2 and row[2].strip() else None
        gender = row[3].strip() if len(row) > 3 and row[3].strip() else None
        resolved = path if Path(path).is_absolute() else str(base / path)
        entries.append(ManifestEntry(
            path=resolved, label=label,
            class_index=LABEL_TO_INDEX.get(label, -1),
            speaker=speaker, gender=gender))
    return entries


def _load_directory(root: Path, filename_rule: str):
    try:
        pattern = re.compile(filename_rule)
    except re.error as exc:
        raise ConfigInvalid(f"bad filename_rule: {exc}") from exc
    if "label" not in pattern.groupindex:
        raise ConfigInvalid("filename_rule must define a (?P<label>...) group")
    entries = []
    for wav in sorted(root.rglob("*.wav")):
        match = pattern.match(wav.name)
        if match is None:
            raise UnknownLabel(f"{wav.name} does not match the filename rule")
        letter = match.group("label")
        if letter not in LETTER_TO_LABEL:
            raise UnknownLabel(f"{wav.name}: unknown label letter {letter!r}")
        label = LETTER_TO_LABEL[letter]
        groups = match.groupdict()
        entries.append(ManifestEntry(
            path=str(wav), label=label,
            class_index=LABEL_TO_INDEX.get(label, -1),
            speaker=groups.get("speaker"), gender=groups.get("gender")))
    return entries


def load_manifest(path, filename_rule: Optional[str] = None) -> Manifest:
    """Load a manifest from a CSV file or a WAV directory.

    Directory mode requires every WAV filename to match filename_rule
    (DEFAULT_FILENAME_RULE when omitted).
    """
    p = Path(path)
    if p.is_dir():
        entries = _load_directory(p, filename_rule or DEFAULT_FILENAME_RULE)
    elif p.is_file():
        entries = _load_csv(p)
    else:
        raise MissingFile(f"{path} is neither a file nor a directory")
    return _finalize(entries, str(path))


def _largest_remainder(n, ratios):
    """Integer allocation of n items to len(ratios) buckets.

    Nonzero-ratio buckets are guaranteed at least one item; caller must
    ensure n covers that.
    """
    exact = np.asarray(ratios, dtype=np.float64) * n
    alloc = np.floor(exact).astype(np.int64)
    frac = exact - alloc
    for _ in range(n - int(alloc.sum())):
        pick = int(np.argmax(frac))
        alloc[pick] += 1
        frac[pick] = -1.0
    for i, r in enumerate(ratios):
        if r > 0 and alloc[i] == 0:
            donor = int(np.argmax(alloc))
            alloc[donor] -= 1
            alloc[i] += 1
    return alloc


def split(manifest: Manifest, ratios=(0.8, 0.1, 0.1), seed=42,
          speaker_disjoint=False):
    """Stratified train/val/test partition, deterministic under seed.

    The partition is independent of manifest row order (entries are
    sorted by path before shuffling). speaker_disjoint=True assigns whole
    speakers to splits instead, trading exact stratification for
    disjointness.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigInvalid(f"ratios must be three non-negatives summing to 1, got {ratios}")
    rng = np.random.default_rng(seed)
    ordered = sorted(manifest.entries, key=lambda e: e.path)

    if speaker_disjoint:
        return _split_by_speaker(ordered, ratios, rng)

    needed = sum(1 for r in ratios if r > 0)
    buckets = ([], [], [])
    for label in EMOTIONS:
        group = [e for e in ordered if e.label == label]
        if not group:
            continue
        if len(group) < needed:
            raise ClassTooSmall(
                f"class {label} has {len(group)} entries; needs >= {needed}")
        rng.shuffle(group)
        alloc = _largest_remainder(len(group), ratios)
        start = 0
        for i, count in enumerate(alloc):
            buckets[i].extend(group[start:start + count])
            start += count
    return tuple(Manifest(entries=list(b)) for b in buckets)


def _split_by_speaker(ordered, ratios, rng):
    if any(e.speaker is None for e in ordered):
        raise ConfigInvalid("speaker_disjoint split needs speaker ids on every entry")
    by_speaker = {}
    for e in ordered:
        by_speaker.setdefault(e.speaker, []).append(e)
    speakers = sorted(by_speaker)
    if len(speakers) < sum(1 for r in ratios if r > 0):
        raise ClassTooSmall(f"only {len(speakers)} speakers; cannot fill all splits")
    rng.shuffle(speakers)
    total = len(ordered)
    targets = [r * total for r in ratios]
    filled = [0, 0, 0]
    buckets = ([], [], [])
    for spk in speakers:
        group = by_speaker[spk]
        deficits = [(targets[i] - filled[i]) if ratios[i] > 0 else -np.inf
                    for i in range(3)]
        pick = int(np.argmax(deficits))
        buckets[pick].extend(group)
        filled[pick] += len(group)
    for i, r in enumerate(ratios):
        if r > 0 and not buckets[i]:
            donor = int(np.argmax([len(b) for b in buckets]))
            spill = buckets[donor].pop()
            buckets[i].append(spill)
    return tuple(Manifest(entries=list(b)) for b in buckets)


def save_manifest_csv(manifest: Manifest, path):
    """Write entries back out as path,label,speaker,gender rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label", "speaker", "gender"])
        for e in manifest.entries:
            writer.writerow([e.path, e.label, e.speaker or "", e.gender or ""])
