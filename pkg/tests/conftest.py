"""Shared fixtures: archetype shape templates, SRT builders, metadata rows."""
from __future__ import annotations

import math
from pathlib import Path

import pytest

from arcminer import MovieRecord, parse_srt
from arcminer.corpus import METADATA_COLUMNS

# canonical curve per archetype on t in [0, 1]
ARCHETYPE_SHAPES = {
    "RagsToRiches": lambda t: 2.0 * t - 1.0,
    "RichesToRags": lambda t: 1.0 - 2.0 * t,
    "ManInAHole": lambda t: math.cos(2.0 * math.pi * t),
    "Icarus": lambda t: -math.cos(2.0 * math.pi * t),
    "Cinderella": lambda t: -math.cos(3.0 * math.pi * t),
    "Oedipus": lambda t: math.cos(3.0 * math.pi * t),
}


def timestamp(ms: int) -> str:
    hours, rem = divmod(ms, 3_600_000)
    minutes, rem = divmod(rem, 60_000)
    seconds, milli = divmod(rem, 1000)
    return f"{hours:02d}:{minutes:02d}:{seconds:02d},{milli:03d}"


def make_srt(sentences: list[str], gap_ms: int = 2000) -> str:
    blocks = []
    for i, sentence in enumerate(sentences):
        start = i * gap_ms
        blocks.append(
            f"{i + 1}\n{timestamp(start)} --> {timestamp(start + gap_ms - 200)}\n{sentence}\n"
        )
    return "\n".join(blocks)


def doc_from_sentences(sentences: list[str], source_id: str = "doc"):
    return parse_srt(make_srt(sentences).encode("utf-8"), source_id=source_id)


def movie(imdb_id: str, **overrides) -> MovieRecord:
    return MovieRecord(imdb_id=imdb_id, **overrides)


def metadata_csv_text(rows: list[dict]) -> str:
    lines = [",".join(METADATA_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row.get(col, "")) for col in METADATA_COLUMNS))
    return "\n".join(lines) + "\n"


@pytest.fixture
def write_metadata(tmp_path: Path):
    def _write(rows: list[dict], name: str = "metadata.csv") -> Path:
        path = tmp_path / name
        path.write_text(metadata_csv_text(rows), encoding="utf-8")
        return path
    return _write
