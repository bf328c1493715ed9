"""Subtitle corpus ingestion: SRT parsing, text cleaning, quality filters, metadata join.

The filter cascade mirrors the acquisition pipeline of the source corpus:
per-movie download-count dedupe, revenue availability, uploader rank,
minimum cleaned length, and IMDb-id dedupe, in that order.
"""
from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path

logger = logging.getLogger(__name__)

# Whitelist used to clean subtitle text. Everything else becomes a space,
# runs of spaces collapse, edges are trimmed.
_NON_WHITELIST_RE = re.compile(r"[^a-zA-Z'?!]+")

_TIMESTAMP_RE = re.compile(
    r"^\s*(\d{1,2}):(\d{1,2}):(\d{1,2})[,.](\d{1,3})\s*-->\s*"
    r"(\d{1,2}):(\d{1,2}):(\d{1,2})[,.](\d{1,3})\s*$"
)
_MARKUP_RE = re.compile(r"<[^>]*>|\{[^}]*\}")

# IMDb genre vocabulary; metadata rows must stay inside it.
GENRE_VOCABULARY = (
    "Action", "Horror", "SciFi", "Mystery", "Thriller", "Animation",
    "Drama", "Adventure", "Fantasy", "Crime", "Comedy", "Romance",
    "Family", "Biography", "Sport", "Music", "War", "Western",
    "History", "Musical", "Film Noir", "News",
)

METADATA_COLUMNS = (
    "imdb_id", "title", "release_date", "domestic_gross", "worldwide_gross",
    "budget", "imdb_rating", "metascore", "rating_count", "user_reviews",
    "critic_reviews", "oscars_won", "other_awards", "other_award_nominations",
    "runtime_min", "genres", "director", "age_rating",
    "uploader_rank", "download_count",
)


class SrtParseError(ValueError):
    """Raised when a subtitle file yields no parseable cues."""


class MetadataError(ValueError):
    """Raised for malformed or inconsistent movie metadata."""


class UploaderRank(Enum):
    UNRANKED = "unranked"
    BRONZE = "bronze"
    SILVER = "silver"
    GOLD = "gold"
    PLATINUM = "platinum"


@dataclass(frozen=True)
class SubtitleCue:
    index: int
    start_ms: int
    end_ms: int
    text: str


@dataclass
class SubtitleDocument:
    source_id: str
    cues: list[SubtitleCue]
    cleaned_char_count: int


@dataclass
class CorpusRecord:
    document: SubtitleDocument
    uploader_rank: UploaderRank = UploaderRank.UNRANKED
    download_count: int = 0
    imdb_id: str | None = None


@dataclass
class FilterPolicy:
    min_cleaned_chars: int = 10_000
    require_ranked_uploader: bool = True
    require_domestic_revenue: bool = True
    dedupe_by_download_count: bool = True
    dedupe_by_imdb_id: bool = True


@dataclass
class FilterReport:
    counts_after_each_stage: list[tuple[str, int]]

    def write_csv(self, path: Path | str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["stage", "count"])
            writer.writerows(self.counts_after_each_stage)


@dataclass
class MovieRecord:
    imdb_id: str
    title: str = ""
    release_date: date | None = None
    domestic_gross: float | None = None
    worldwide_gross: float | None = None
    budget: float | None = None
    imdb_rating: float | None = None
    metascore: float | None = None
    rating_count: int | None = None
    user_reviews: int | None = None
    critic_reviews: int | None = None
    oscars_won: int | None = None
    other_awards: int | None = None
    other_award_nominations: int | None = None
    runtime_min: float | None = None
    genres: frozenset[str] = field(default_factory=frozenset)
    director: str | None = None
    age_rating: str | None = None


def clean_text(text: str) -> str:
    """Reduce text to the letters/apostrophe/?/! whitelist.

    Removed characters become spaces, whitespace runs collapse to one
    space, and leading/trailing spaces are trimmed. Idempotent.
    """
    return _NON_WHITELIST_RE.sub(" ", text).strip()


def _strip_markup(text: str) -> str:
    return _MARKUP_RE.sub("", text)


def _parse_timestamp_line(line: str) -> tuple[int, int] | None:
    m = _TIMESTAMP_RE.match(line)
    if m is None:
        return None
    h1, m1, s1, ms1, h2, m2, s2, ms2 = m.groups()
    start = ((int(h1) * 60 + int(m1)) * 60 + int(s1)) * 1000 + int(ms1.ljust(3, "0"))
    end = ((int(h2) * 60 + int(m2)) * 60 + int(s2)) * 1000 + int(ms2.ljust(3, "0"))
    return start, end


def parse_srt(raw: bytes, source_id: str = "") -> SubtitleDocument:
    """Parse raw SRT bytes into a SubtitleDocument.

    Decoding is UTF-8 with lossy replacement (the corpus is user-uploaded
    and dirty); a BOM is tolerated. Malformed cues are skipped with a
    warning; a file with zero parseable cues raises SrtParseError.
    """
    content = raw.decode("utf-8", errors="replace")
    if content.startswith("\ufeff"):
        content = content[1:]

    cues: list[SubtitleCue] = []
    blocks = re.split(r"(?:\r?\n)\s*(?:\r?\n)+", content.strip())
    for block in blocks:
        lines = [ln.strip("\r") for ln in block.split("\n")]
        lines = [ln for ln in lines if ln.strip()]
        if len(lines) < 2:
            continue
        if not lines[0].strip().isdigit():
            logger.warning("%s: skipping block without index line: %r", source_id, lines[0][:40])
            continue
        index = int(lines[0].strip())
        times = _parse_timestamp_line(lines[1])
        if times is None or index < 1 or times[0] > times[1]:
            logger.warning("%s: skipping cue %s with malformed timing: %r",
                           source_id, lines[0].strip(), lines[1][:60])
            continue
        text_lines = []
        for ln in lines[2:]:
            if "-->" in ln:
                # stray timing line glued into the text block
                logger.warning("%s: dropping stray timestamp text in cue %d", source_id, index)
                continue
            text_lines.append(_strip_markup(ln).strip())
        text = "\n".join(tl for tl in text_lines if tl)
        if not text:
            continue
        cues.append(SubtitleCue(index=index, start_ms=times[0], end_ms=times[1], text=text))

    if not cues:
        raise SrtParseError(f"no parseable cues in {source_id or 'input'}")

    cues.sort(key=lambda c: c.start_ms)
    cleaned_count = sum(len(clean_text(c.text)) for c in cues)
    return SubtitleDocument(source_id=source_id, cues=cues, cleaned_char_count=cleaned_count)


def apply_quality_filters(
    records: list[CorpusRecord],
    metadata: list[MovieRecord],
    policy: FilterPolicy | None = None,
) -> tuple[list[CorpusRecord], FilterReport]:
    """Run the quality-filter cascade and report survivor counts per stage.

    Stages, in order: keep the highest-download record per movie, require
    metadata with domestic gross, require a ranked uploader, require the
    minimum cleaned length, and drop duplicate IMDb ids keeping the first.
    Disabled stages pass records through but still appear in the report.
    """
    if policy is None:
        policy = FilterPolicy()
    if policy.min_cleaned_chars < 0:
        raise ValueError("min_cleaned_chars must be >= 0")

    survivors = sorted(records, key=lambda r: r.document.source_id)
    stages: list[tuple[str, int]] = [("input", len(survivors))]

    def movie_key(rec: CorpusRecord) -> tuple[str, str]:
        if rec.imdb_id is not None:
            return ("imdb", rec.imdb_id)
        return ("source", rec.document.source_id)

    if policy.dedupe_by_download_count:
        best: dict[tuple[str, str], CorpusRecord] = {}
        for rec in survivors:
            key = movie_key(rec)
            if key not in best or rec.download_count > best[key].download_count:
                best[key] = rec
        survivors = [rec for rec in survivors if best[movie_key(rec)] is rec]
    stages.append(("max_download_per_movie", len(survivors)))

    if policy.require_domestic_revenue:
        with_gross = {m.imdb_id for m in metadata if m.domestic_gross is not None}
        survivors = [r for r in survivors if r.imdb_id in with_gross]
    stages.append(("domestic_revenue_present", len(survivors)))

    if policy.require_ranked_uploader:
        survivors = [r for r in survivors if r.uploader_rank is not UploaderRank.UNRANKED]
    stages.append(("ranked_uploader", len(survivors)))

    survivors = [
        r for r in survivors if r.document.cleaned_char_count >= policy.min_cleaned_chars
    ]
    stages.append(("min_cleaned_chars", len(survivors)))

    if policy.dedupe_by_imdb_id:
        seen: set[tuple[str, str]] = set()
        kept = []
        for rec in survivors:
            key = movie_key(rec)
            if key in seen:
                continue
            seen.add(key)
            kept.append(rec)
        survivors = kept
    stages.append(("unique_imdb_id", len(survivors)))

    return survivors, FilterReport(counts_after_each_stage=stages)


def join_metadata(
    documents: list[CorpusRecord],
    metadata: list[MovieRecord],
) -> tuple[list[tuple[SubtitleDocument, MovieRecord]], list[str]]:
    """Inner-join surviving records to metadata rows on imdb_id.

    Returns (pairs, unmatched_source_ids). Unmatched documents are
    reported, never silently dropped. A duplicate imdb_id on the metadata
    side raises MetadataError.
    """
    by_id: dict[str, MovieRecord] = {}
    for movie in metadata:
        if movie.imdb_id in by_id:
            raise MetadataError(f"duplicate imdb_id in metadata: {movie.imdb_id}")
        by_id[movie.imdb_id] = movie

    pairs: list[tuple[SubtitleDocument, MovieRecord]] = []
    unmatched: list[str] = []
    for rec in documents:
        movie = by_id.get(rec.imdb_id) if rec.imdb_id is not None else None
        if movie is None:
            unmatched.append(rec.document.source_id)
        else:
            pairs.append((rec.document, movie))
    if unmatched:
        logger.warning("%d document(s) had no metadata match: %s",
                       len(unmatched), ", ".join(unmatched[:10]))
    return pairs, unmatched


def _parse_optional_float(raw: str, column: str, line_no: int,
                          low: float | None = None, high: float | None = None) -> float | None:
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise MetadataError(f"line {line_no}: {column} is not a number: {raw!r}") from None
    if low is not None and value < low:
        raise MetadataError(f"line {line_no}: {column} below {low}: {value}")
    if high is not None and value > high:
        raise MetadataError(f"line {line_no}: {column} above {high}: {value}")
    return value


def _parse_optional_int(raw: str, column: str, line_no: int) -> int | None:
    if raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise MetadataError(f"line {line_no}: {column} is not an integer: {raw!r}") from None
    if value < 0:
        raise MetadataError(f"line {line_no}: {column} is negative: {value}")
    return value


def load_metadata_csv(
    path: Path | str,
) -> tuple[list[MovieRecord], dict[str, tuple[UploaderRank, int]]]:
    """Load the movie metadata CSV.

    Returns the movie records plus a map imdb_id -> (uploader_rank,
    download_count) used to build CorpusRecords. Empty fields mean absent;
    genres are pipe-separated and must belong to the 22-genre vocabulary.
    """
    movies: list[MovieRecord] = []
    upload_info: dict[str, tuple[UploaderRank, int]] = {}
    vocabulary = set(GENRE_VOCABULARY)

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MetadataError(f"{path}: missing header row")
        missing = [c for c in METADATA_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise MetadataError(f"{path}: missing columns: {', '.join(missing)}")

        for line_no, row in enumerate(reader, start=2):
            imdb_id = (row["imdb_id"] or "").strip()
            if not imdb_id:
                raise MetadataError(f"line {line_no}: empty imdb_id")

            raw_date = (row["release_date"] or "").strip()
            release = None
            if raw_date:
                try:
                    release = date.fromisoformat(raw_date)
                except ValueError:
                    raise MetadataError(
                        f"line {line_no}: release_date not ISO formatted: {raw_date!r}"
                    ) from None

            genres: set[str] = set()
            for name in (row["genres"] or "").split("|"):
                name = name.strip()
                if not name:
                    continue
                if name not in vocabulary:
                    raise MetadataError(
                        f"line {line_no}: unknown genre {name!r}; "
                        f"expected one of: {', '.join(GENRE_VOCABULARY)}"
                    )
                genres.add(name)

            movie = MovieRecord(
                imdb_id=imdb_id,
                title=(row["title"] or "").strip(),
                release_date=release,
                domestic_gross=_parse_optional_float(row["domestic_gross"].strip(), "domestic_gross", line_no, low=0.0),
                worldwide_gross=_parse_optional_float(row["worldwide_gross"].strip(), "worldwide_gross", line_no, low=0.0),
                budget=_parse_optional_float(row["budget"].strip(), "budget", line_no, low=0.0),
                imdb_rating=_parse_optional_float(row["imdb_rating"].strip(), "imdb_rating", line_no, low=1.0, high=10.0),
                metascore=_parse_optional_float(row["metascore"].strip(), "metascore", line_no, low=0.0, high=100.0),
                rating_count=_parse_optional_int(row["rating_count"].strip(), "rating_count", line_no),
                user_reviews=_parse_optional_int(row["user_reviews"].strip(), "user_reviews", line_no),
                critic_reviews=_parse_optional_int(row["critic_reviews"].strip(), "critic_reviews", line_no),
                oscars_won=_parse_optional_int(row["oscars_won"].strip(), "oscars_won", line_no),
                other_awards=_parse_optional_int(row["other_awards"].strip(), "other_awards", line_no),
                other_award_nominations=_parse_optional_int(row["other_award_nominations"].strip(), "other_award_nominations", line_no),
                runtime_min=_parse_optional_float(row["runtime_min"].strip(), "runtime_min", line_no, low=0.0),
                genres=frozenset(genres),
                director=(row["director"] or "").strip() or None,
                age_rating=(row["age_rating"] or "").strip() or None,
            )
            movies.append(movie)

            raw_rank = (row["uploader_rank"] or "").strip().lower()
            if raw_rank == "":
                rank = UploaderRank.UNRANKED
            else:
                try:
                    rank = UploaderRank(raw_rank)
                except ValueError:
                    raise MetadataError(
                        f"line {line_no}: unknown uploader_rank {raw_rank!r}"
                    ) from None
            count = _parse_optional_int(row["download_count"].strip(), "download_count", line_no) or 0
            upload_info[imdb_id] = (rank, count)

    return movies, upload_info


def load_manifest_csv(path: Path | str) -> dict[str, dict[str, str]]:
    """Load an optional corpus manifest mapping file name -> imdb_id.

    Columns: file, imdb_id, and optional per-file uploader_rank and
    download_count overrides. File names are matched by stem or full name.
    """
    entries: dict[str, dict[str, str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "file" not in reader.fieldnames or "imdb_id" not in reader.fieldnames:
            raise MetadataError(f"{path}: manifest needs 'file' and 'imdb_id' columns")
        for row in reader:
            name = (row["file"] or "").strip()
            if not name:
                continue
            entries[name] = {k: (v or "").strip() for k, v in row.items()}
    return entries


def movie_to_dict(movie: MovieRecord) -> dict:
    return {
        "imdb_id": movie.imdb_id,
        "title": movie.title,
        "release_date": movie.release_date.isoformat() if movie.release_date else None,
        "domestic_gross": movie.domestic_gross,
        "worldwide_gross": movie.worldwide_gross,
        "budget": movie.budget,
        "imdb_rating": movie.imdb_rating,
        "metascore": movie.metascore,
        "rating_count": movie.rating_count,
        "user_reviews": movie.user_reviews,
        "critic_reviews": movie.critic_reviews,
        "oscars_won": movie.oscars_won,
        "other_awards": movie.other_awards,
        "other_award_nominations": movie.other_award_nominations,
        "runtime_min": movie.runtime_min,
        "genres": sorted(movie.genres),
        "director": movie.director,
        "age_rating": movie.age_rating,
    }


def movie_from_dict(data: dict) -> MovieRecord:
    release = data.get("release_date")
    return MovieRecord(
        imdb_id=data["imdb_id"],
        title=data.get("title", ""),
        release_date=date.fromisoformat(release) if release else None,
        domestic_gross=data.get("domestic_gross"),
        worldwide_gross=data.get("worldwide_gross"),
        budget=data.get("budget"),
        imdb_rating=data.get("imdb_rating"),
        metascore=data.get("metascore"),
        rating_count=data.get("rating_count"),
        user_reviews=data.get("user_reviews"),
        critic_reviews=data.get("critic_reviews"),
        oscars_won=data.get("oscars_won"),
        other_awards=data.get("other_awards"),
        other_award_nominations=data.get("other_award_nominations"),
        runtime_min=data.get("runtime_min"),
        genres=frozenset(data.get("genres", ())),
        director=data.get("director"),
        age_rating=data.get("age_rating"),
    )


def document_to_dict(doc: SubtitleDocument) -> dict:
    return {
        "source_id": doc.source_id,
        "cleaned_char_count": doc.cleaned_char_count,
        "cues": [
            {"index": c.index, "start_ms": c.start_ms, "end_ms": c.end_ms, "text": c.text}
            for c in doc.cues
        ],
    }


def document_from_dict(data: dict) -> SubtitleDocument:
    cues = [
        SubtitleCue(index=c["index"], start_ms=c["start_ms"], end_ms=c["end_ms"], text=c["text"])
        for c in data["cues"]
    ]
    return SubtitleDocument(
        source_id=data["source_id"],
        cues=cues,
        cleaned_char_count=data["cleaned_char_count"],
    )
