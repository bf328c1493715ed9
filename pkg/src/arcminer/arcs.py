"""Emotional arc extraction: DCT low-pass smoothing and uniform resampling.

A raw valence series is transformed with the orthonormal DCT-II, truncated
to its first few coefficients, and the truncated continuous synthesis is
evaluated on a uniform 100-point grid spanning the movie's runtime.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.fft import dct

from .sentiment import RawValenceSeries


@dataclass
class ArcConfig:
    low_pass_size: int = 5
    output_length: int = 100
    rescale_output: bool = True

    def __post_init__(self) -> None:
        if self.low_pass_size < 1:
            raise ValueError("low_pass_size must be >= 1")
        if self.output_length < 2:
            raise ValueError("output_length must be >= 2")


@dataclass
class EmotionalArc:
    values: np.ndarray

    @property
    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.values))


def dct_forward(series: Sequence[float]) -> np.ndarray:
    """Orthonormal DCT-II coefficients of a series.

    c_k = s_k * sum_n x_n cos(pi (2n+1) k / (2N)) with s_0 = sqrt(1/N)
    and s_k = sqrt(2/N) otherwise, so the transform is an isometry.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("series must be a nonempty 1-D sequence")
    return dct(x, type=2, norm="ortho")


def low_pass_reconstruct(coefficients: Sequence[float], config: ArcConfig) -> np.ndarray:
    """Evaluate the truncated DCT synthesis on a uniform output grid.

    Coefficients with index >= low_pass_size are zeroed; the continuous
    synthesis x(t) = sum_k s_k c_k cos(pi k (2t+1) / (2N)) is sampled at
    output_length points t_j spanning [0, N-1], so grid endpoints map to
    the first and last original sample positions.
    """
    coef = np.asarray(coefficients, dtype=float)
    if coef.ndim != 1 or coef.size == 0:
        raise ValueError("coefficients must be a nonempty 1-D sequence")
    n = coef.size
    if config.low_pass_size > n:
        raise ValueError(
            f"low_pass_size {config.low_pass_size} exceeds coefficient count {n}"
        )
    kept = coef[: config.low_pass_size]
    k = np.arange(config.low_pass_size)
    scale = np.where(k == 0, np.sqrt(1.0 / n), np.sqrt(2.0 / n))
    t = np.linspace(0.0, n - 1.0, config.output_length)
    basis = np.cos(np.pi * np.outer(k, 2.0 * t + 1.0) / (2.0 * n))
    return (scale * kept) @ basis


def compute_arc(series: RawValenceSeries | Sequence[float], config: ArcConfig | None = None) -> EmotionalArc:
    """Raw valence series -> smoothed, resampled, optionally rescaled arc."""
    if config is None:
        config = ArcConfig()
    values = series.values if isinstance(series, RawValenceSeries) else series
    x = np.asarray(values, dtype=float)
    if x.size < config.low_pass_size:
        raise ValueError(
            f"too few sentences: {x.size} < low_pass_size {config.low_pass_size}"
        )
    arc = low_pass_reconstruct(dct_forward(x), config)
    if config.rescale_output:
        peak = np.max(np.abs(arc))
        if peak > 0.0:
            arc = arc / peak
    return EmotionalArc(values=arc)


def write_arcs_csv(path: Path | str, arcs_by_id: dict[str, EmotionalArc]) -> None:
    """Write arcs as `imdb_id,v000..v{L-1}` rows with 6-decimal values."""
    ids = sorted(arcs_by_id)
    if not ids:
        raise ValueError("no arcs to write")
    length = len(arcs_by_id[ids[0]].values)
    header = ["imdb_id"] + [f"v{j:03d}" for j in range(length)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for imdb_id in ids:
            arc = arcs_by_id[imdb_id]
            if len(arc.values) != length:
                raise ValueError(f"arc length mismatch for {imdb_id}")
            writer.writerow([imdb_id] + [f"{v:.6f}" for v in arc.values])


def read_arcs_csv(path: Path | str) -> dict[str, EmotionalArc]:
    """Read arcs written by write_arcs_csv."""
    arcs: dict[str, EmotionalArc] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "imdb_id":
            raise ValueError(f"{path}: not an arcs CSV")
        for row in reader:
            if not row:
                continue
            arcs[row[0]] = EmotionalArc(values=np.array([float(v) for v in row[1:]]))
    return arcs
