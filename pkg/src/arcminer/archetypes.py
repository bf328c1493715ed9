"""Archetype labels for cluster centroids.

A centroid's trend signature is the alternating list of monotone-segment
signs that survive amplitude filtering; the six named archetypes are
exactly the alternating signatures of length one to three.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np


class Archetype(Enum):
    RAGS_TO_RICHES = "RagsToRiches"
    RICHES_TO_RAGS = "RichesToRags"
    MAN_IN_A_HOLE = "ManInAHole"
    ICARUS = "Icarus"
    CINDERELLA = "Cinderella"
    OEDIPUS = "Oedipus"


_SIGNATURE_TO_ARCHETYPE: dict[tuple[str, ...], Archetype] = {
    ("+",): Archetype.RAGS_TO_RICHES,
    ("-",): Archetype.RICHES_TO_RAGS,
    ("-", "+"): Archetype.MAN_IN_A_HOLE,
    ("+", "-"): Archetype.ICARUS,
    ("+", "-", "+"): Archetype.CINDERELLA,
    ("-", "+", "-"): Archetype.OEDIPUS,
}


@dataclass(frozen=True)
class ArchetypeLabel:
    name: Archetype
    trend_signature: tuple[str, ...]


class DegenerateCentroidError(ValueError):
    """Raised for a flat centroid, which has no trend to label."""


class UnmappableSignatureError(ValueError):
    """Raised when a signature matches none of the six archetypes."""

    def __init__(self, signature: tuple[str, ...]):
        super().__init__(f"no archetype for signature {''.join(signature) or '(empty)'}")
        self.signature = signature


def _smooth(values: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return values.astype(float)
    half = window // 2
    out = np.empty(len(values))
    for i in range(len(values)):
        lo = max(0, i - half)
        hi = min(len(values), i + half + 1)
        out[i] = values[lo:hi].mean()
    return out


def trend_signature(
    centroid: Sequence[float],
    smoothing_window: int = 5,
    min_amplitude: float = 0.1,
) -> tuple[str, ...]:
    """Signs of the centroid's surviving monotone segments.

    The centroid is window-smoothed, split into maximal same-sign runs of
    first differences (plateaus extend the current run), and runs whose
    amplitude falls below min_amplitude times the centroid's range are
    dropped smallest-first, merging the newly adjacent runs. At most the
    three largest runs are kept, in temporal order.
    """
    values = np.asarray(centroid, dtype=float)
    if values.ndim != 1 or len(values) < 3:
        raise ValueError("centroid must be a 1-D sequence of length >= 3")
    full_range = float(values.max() - values.min())
    if full_range == 0.0:
        raise DegenerateCentroidError("degenerate centroid: max - min = 0")

    smoothed = _smooth(values, smoothing_window)
    threshold = min_amplitude * full_range

    # runs as [sign, start_index, end_index] spans over the smoothed series
    runs: list[list[int]] = []
    for j, d in enumerate(np.diff(smoothed)):
        sign = 1 if d > 0 else (-1 if d < 0 else 0)
        if sign == 0:
            continue
        if runs and runs[-1][0] == sign:
            runs[-1][2] = j + 1
        else:
            runs.append([sign, j, j + 1])

    def amplitude(run: list[int]) -> float:
        return abs(float(smoothed[run[2]] - smoothed[run[1]]))

    while len(runs) > 1:
        smallest = min(range(len(runs)), key=lambda i: amplitude(runs[i]))
        if amplitude(runs[smallest]) >= threshold:
            break
        if 0 < smallest < len(runs) - 1:
            prev, nxt = runs[smallest - 1], runs[smallest + 1]
            merged_delta = float(smoothed[nxt[2]] - smoothed[prev[1]])
            sign = 1 if merged_delta > 0 else (-1 if merged_delta < 0 else prev[0])
            runs[smallest - 1:smallest + 2] = [[sign, prev[1], nxt[2]]]
        elif smallest == 0:
            runs[1][1] = runs[0][1]
            del runs[0]
        else:
            runs[-2][2] = runs[-1][2]
            del runs[-1]

    if len(runs) > 3:
        largest = sorted(sorted(range(len(runs)), key=lambda i: -amplitude(runs[i]))[:3])
        runs = [runs[i] for i in largest]
        # selection can leave same-sign neighbors; merge to restore alternation
        merged: list[list[int]] = []
        for run in runs:
            if merged and merged[-1][0] == run[0]:
                merged[-1][2] = run[2]
            else:
                merged.append(run)
        runs = merged

    return tuple("+" if run[0] > 0 else "-" for run in runs)


def label_centroid(
    centroid: Sequence[float],
    smoothing_window: int = 5,
    min_amplitude: float = 0.1,
) -> ArchetypeLabel:
    """Map a centroid to one of the six archetypes by its trend signature."""
    signature = trend_signature(centroid, smoothing_window, min_amplitude)
    archetype = _SIGNATURE_TO_ARCHETYPE.get(signature)
    if archetype is None:
        raise UnmappableSignatureError(signature)
    return ArchetypeLabel(name=archetype, trend_signature=signature)


def write_labels_csv(path: Path | str, labels: dict[int, ArchetypeLabel | None]) -> None:
    """Write `cluster_index,label,signature`; unlabeled clusters say so."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster_index", "label", "signature"])
        for index in sorted(labels):
            label = labels[index]
            if label is None:
                writer.writerow([index, "unmappable", ""])
            else:
                writer.writerow([index, label.name.value, "".join(label.trend_signature)])
