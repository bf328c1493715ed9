"""Sentence segmentation and ternary valence scoring.

Each sentence scores the sum of word valences in {-1, 0, +1}; the
per-document series is scaled by its maximum absolute sentence sum so
values land in [-1, 1] with shape and sign preserved.
"""
from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .corpus import SubtitleDocument, clean_text

logger = logging.getLogger(__name__)

# Sentence terminators scanned in the original (pre-cleaning) text;
# cleaning deletes '.' so segmentation has to run first.
_TERMINATORS = ".?!…"
_SPEAKER_DASH_RE = re.compile(r"^\s*[-–—]")


class LexiconError(ValueError):
    """Raised for unreadable or malformed lexicon files."""


@dataclass(frozen=True)
class Lexicon:
    entries: dict[str, int]

    def valence(self, token: str) -> int:
        return self.entries.get(token, 0)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class RawValenceSeries:
    values: list[float]
    sentence_count: int


def _ternarize(value: float) -> int:
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


def load_lexicon(path: Path | str) -> Lexicon:
    """Load a TSV lexicon of `word<TAB>value` lines.

    Words are lowercased and real values ternarized by sign. Lines
    starting with '#' and blank lines are ignored. A duplicate word keeps
    the last entry and logs a warning.
    """
    entries: dict[str, int] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise LexiconError(f"cannot read lexicon {path}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"line {line_no}: expected word<TAB>value, got {line!r}")
            word = parts[0].strip().lower()
            if not word:
                raise LexiconError(f"line {line_no}: empty word")
            try:
                value = float(parts[1])
            except ValueError:
                raise LexiconError(
                    f"line {line_no}: value is not a number: {parts[1]!r}"
                ) from None
            if word in entries:
                logger.warning("lexicon line %d: duplicate word %r, keeping last", line_no, word)
            entries[word] = _ternarize(value)
    return Lexicon(entries=entries)


def segment_sentences(document: SubtitleDocument) -> list[str]:
    """Split a document into cleaned sentences.

    Terminators '.', '?', '!', and the ellipsis character end a sentence.
    A sentence left open at a cue boundary continues into the next cue
    unless that cue opens with a speaker dash. Each sentence is cleaned;
    empty results are dropped.
    """
    sentences: list[str] = []
    buffer: list[str] = []

    def flush() -> None:
        if buffer:
            cleaned = clean_text(" ".join(buffer))
            if cleaned:
                sentences.append(cleaned)
            buffer.clear()

    for pos, cue in enumerate(document.cues):
        text = cue.text.replace("\n", " ")
        start = 0
        for i, ch in enumerate(text):
            if ch in _TERMINATORS:
                piece = text[start:i + 1]
                if piece.strip():
                    buffer.append(piece)
                flush()
                start = i + 1
        tail = text[start:]
        if tail.strip():
            buffer.append(tail)
        next_cue = document.cues[pos + 1] if pos + 1 < len(document.cues) else None
        if buffer and (next_cue is None or _SPEAKER_DASH_RE.match(next_cue.text)):
            flush()
    flush()
    return sentences


def score_sentence(sentence: str, lexicon: Lexicon) -> int:
    """Sum ternary valences over whitespace tokens of a cleaned sentence.

    Tokens are lowercased with '?'/'!' stripped from their edges;
    out-of-lexicon tokens count 0.
    """
    total = 0
    for token in sentence.split():
        token = token.strip("?!").lower()
        if token:
            total += lexicon.valence(token)
    return total


def score_document(document: SubtitleDocument, lexicon: Lexicon) -> RawValenceSeries:
    """Score every sentence and scale sums by the document's max |sum|.

    A document with no sentences after cleaning is an error; a document
    whose sums are all zero yields the all-zero series.
    """
    sentences = segment_sentences(document)
    if not sentences:
        raise ValueError(f"empty document after cleaning: {document.source_id}")
    sums = [score_sentence(s, lexicon) for s in sentences]
    peak = max(abs(v) for v in sums)
    if peak == 0:
        values = [0.0] * len(sums)
    else:
        values = [v / peak for v in sums]
    return RawValenceSeries(values=values, sentence_count=len(sums))


def write_raw_series_csv(
    path: Path | str,
    series_by_id: dict[str, RawValenceSeries],
) -> None:
    """Dump raw scaled series as `imdb_id,sentence_index,valence` rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["imdb_id", "sentence_index", "valence"])
        for imdb_id in sorted(series_by_id):
            for idx, value in enumerate(series_by_id[imdb_id].values):
                writer.writerow([imdb_id, idx, f"{value:.6f}"])
