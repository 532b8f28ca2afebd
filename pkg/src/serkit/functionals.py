"""Statistical functionals: collapse LLD trajectories to one vector per clip.

Twelve functionals are applied to every LLD column (plus delta columns when
a set asks for them), in a fixed order, giving deterministic dimensions:
52 x 12 = 624 for the plain set and 104 x 12 = 1248 for the delta-extended
one. Wider vectors from external extractors come in through the CSV import
path instead of being recomputed here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonNumericCell, TooFewFrames
from .lld import LldMatrix, delta

FUNCTIONAL_NAMES = (
    "mean", "max", "min", "range", "variance", "stddev", "median",
    "skewness", "kurtosis", "slope", "offset", "residual_mse",
)


@dataclass
class FunctionalSet:
    """A named, ordered selection of functionals."""

    name: str
    functionals: tuple = FUNCTIONAL_NAMES
    include_deltas: bool = False

    def __post_init__(self):
        if not self.functionals:
            raise ValueError("functionals must be nonempty")
        if len(set(self.functionals)) != len(self.functionals):
            raise ValueError("functional identifiers must be unique")


@dataclass
class FeatureVector:
    """Fixed-width per-utterance vector with named dimensions."""

    values: np.ndarray
    names: tuple
    clip_id: str = ""

    @property
    def dim(self) -> int:
        return len(self.values)


def column_stats(column: np.ndarray) -> np.ndarray:
    """All 12 functionals of one trajectory, in FUNCTIONAL_NAMES order.

    Variance is the population variance; kurtosis is excess kurtosis; both
    skewness and kurtosis of a zero-variance column are defined as 0. The
    regression abscissa is the time index normalized to [0, 1].
    """
    x = np.asarray(column, dtype=np.float64)
    t = len(x)
    mean = x.mean()
    centered = x - mean
    var = float(np.mean(centered ** 2))
    std = np.sqrt(var)
    if var > 0:
        skew = float(np.mean(centered ** 3)) / std ** 3
        kurt = float(np.mean(centered ** 4)) / var ** 2 - 3.0
    else:
        skew = kurt = 0.0

    ts = np.arange(t) / (t - 1)
    t_mean = ts.mean()
    t_var = float(np.mean((ts - t_mean) ** 2))
    slope = float(np.mean((ts - t_mean) * centered)) / t_var
    offset = mean - slope * t_mean
    resid = x - (slope * ts + offset)
    resid_mse = float(np.mean(resid ** 2))

    return np.array([
        mean, x.max(), x.min(), x.max() - x.min(), var, std, float(np.median(x)),
        skew, kurt, slope, offset, resid_mse,
    ])


_STAT_INDEX = {name: i for i, name in enumerate(FUNCTIONAL_NAMES)}


def apply_functionals(llds: LldMatrix, fset: FunctionalSet) -> FeatureVector:
    """One scalar per (column, functional) pair, columns outermost."""
    if llds.num_frames < 2:
        raise TooFewFrames(f"need >= 2 frames, got {llds.num_frames}")
    values = llds.values
    names = list(llds.feature_names)
    if fset.include_deltas:
        values = np.hstack([values, delta(values)])
        names += [f"{n}_delta" for n in llds.feature_names]

    picks = [_STAT_INDEX[f] for f in fset.functionals]
    out = np.empty(values.shape[1] * len(picks))
    out_names = []
    for col in range(values.shape[1]):
        stats = column_stats(values[:, col])
        out[col * len(picks) : (col + 1) * len(picks)] = stats[picks]
        out_names.extend(f"{names[col]}__{fset.functionals[j]}" for j in range(len(picks)))
    return FeatureVector(values=out, names=tuple(out_names), clip_id=llds.clip_id)


def builtin_sets() -> list[FunctionalSet]:
    """The two shipped sets: hand_crafted_624 (d=624) and large (d=1248)."""
    return [
        FunctionalSet(name="hand_crafted_624", include_deltas=False),
        FunctionalSet(name="large", include_deltas=True),
    ]


def get_builtin_set(name: str) -> FunctionalSet:
    for fset in builtin_sets():
        if fset.name == name:
            return fset
    raise KeyError(f"unknown functional set {name!r}; "
                   f"available: {[s.name for s in builtin_sets()]}")


def export_feature_csv(path: str, vectors: list[FeatureVector]) -> None:
    """clip_id column first, then one column per dimension.

    Values are written with repr, which round-trips float64 exactly.
    """
    if not vectors:
        raise ValueError("nothing to export")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["clip_id", *vectors[0].names])
        for vec in vectors:
            writer.writerow([vec.clip_id, *[repr(float(v)) for v in vec.values]])


def import_feature_csv(path: str, expected_dim: int | None = None) -> list[FeatureVector]:
    """Read per-utterance vectors from a `clip_id,<name>,...` CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "clip_id":
            raise DimensionMismatch(f"{path}: header must start with clip_id")
        names = tuple(header[1:])
        if expected_dim is not None and len(names) != expected_dim:
            raise DimensionMismatch(f"{path}: expected {expected_dim} feature columns, "
                                    f"found {len(names)}")
        vectors = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise DimensionMismatch(f"{path}:{lineno}: expected {len(names) + 1} cells, "
                                        f"got {len(row)}")
            try:
                values = np.array([float(cell) for cell in row[1:]])
            except ValueError as exc:
                raise NonNumericCell(f"{path}:{lineno}: {exc}") from None
            vectors.append(FeatureVector(values=values, names=names, clip_id=row[0]))
    return vectors
