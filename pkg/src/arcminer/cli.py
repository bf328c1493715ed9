"""Command-line pipeline: ingest -> arcs -> cluster -> stats.

Exit codes: 0 success, 2 input error, 3 empty corpus, 4 scoring
failures, 5 clustering infeasible, 6 stats infeasible.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__, archetypes, report
from .arcs import ArcConfig, compute_arc, read_arcs_csv, write_arcs_csv
from .clustering import ClusterConfig, kmeans_cluster, read_model_json, write_model_json
from .corpus import (
    CorpusRecord,
    FilterPolicy,
    MetadataError,
    MovieRecord,
    SrtParseError,
    SubtitleDocument,
    UploaderRank,
    apply_quality_filters,
    document_from_dict,
    document_to_dict,
    join_metadata,
    load_manifest_csv,
    load_metadata_csv,
    movie_from_dict,
    movie_to_dict,
    parse_srt,
)
from .sentiment import LexiconError, load_lexicon, score_document

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY_CORPUS = 3
EXIT_SCORING = 4
EXIT_CLUSTERING = 5
EXIT_STATS = 6

_CONFIG_KEYS = ("corpus", "metadata", "lexicon", "low_pass", "k", "seed", "min_chars", "out")


class InputError(Exception):
    """User-facing input problem; maps to exit code 2."""


@dataclass
class PipelineConfig:
    corpus_dir: Path | None
    metadata_csv: Path | None
    lexicon_path: Path
    arc: ArcConfig = field(default_factory=ArcConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    filters: FilterPolicy = field(default_factory=FilterPolicy)
    output_dir: Path = Path("arcminer_out")

    def snapshot(self) -> dict:
        return {
            "corpus_dir": str(self.corpus_dir) if self.corpus_dir else None,
            "metadata_csv": str(self.metadata_csv) if self.metadata_csv else None,
            "lexicon_path": str(self.lexicon_path),
            "low_pass_size": self.arc.low_pass_size,
            "output_length": self.arc.output_length,
            "rescale_output": self.arc.rescale_output,
            "k": self.cluster.k,
            "seed": self.cluster.seed,
            "restarts": self.cluster.restarts,
            "max_iterations": self.cluster.max_iterations,
            "min_cleaned_chars": self.filters.min_cleaned_chars,
            "output_dir": str(self.output_dir),
        }


def _default_lexicon() -> Path:
    return Path(str(resources.files("arcminer").joinpath("data/sample_lexicon.tsv")))


def _parse_config_file(path: Path) -> dict[str, str]:
    """key=value lines; '#' comments and blanks ignored; quotes stripped."""
    if not path.is_file():
        raise InputError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip().strip('"').strip("'")
        if key not in _CONFIG_KEYS:
            raise InputError(
                f"{path}:{line_no}: unknown key {key!r}; known keys: {', '.join(_CONFIG_KEYS)}"
            )
        values[key] = value
    return values


def _int_setting(raw: str | int, name: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise InputError(f"{name} must be an integer, got {raw!r}") from None


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, overlaid by the config file, overlaid by flags."""
    settings: dict[str, object] = {}
    if args.config is not None:
        settings.update(_parse_config_file(Path(args.config)))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value

    try:
        arc = ArcConfig(low_pass_size=_int_setting(settings.get("low_pass", 5), "low_pass"))
        cluster = ClusterConfig(
            k=_int_setting(settings.get("k", 6), "k"),
            seed=_int_setting(settings.get("seed", 13), "seed"),
        )
        filters = FilterPolicy(
            min_cleaned_chars=_int_setting(settings.get("min_chars", 10_000), "min_chars")
        )
        if filters.min_cleaned_chars < 0:
            raise ValueError("min_chars must be >= 0")
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    lexicon = Path(str(settings["lexicon"])) if "lexicon" in settings else _default_lexicon()
    return PipelineConfig(
        corpus_dir=Path(str(settings["corpus"])) if "corpus" in settings else None,
        metadata_csv=Path(str(settings["metadata"])) if "metadata" in settings else None,
        lexicon_path=lexicon,
        arc=arc,
        cluster=cluster,
        filters=filters,
        output_dir=Path(str(settings.get("out", "arcminer_out"))),
    )


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _update_manifest(
    config: PipelineConfig,
    stage: str,
    counts: dict[str, int],
    elapsed: float,
    inputs: dict[str, str] | None = None,
) -> None:
    path = config.output_dir / "run_manifest.json"
    manifest: dict = {}
    if path.is_file():
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            logger.warning("rewriting unreadable manifest %s", path)
    manifest["tool_version"] = __version__
    manifest["config"] = config.snapshot()
    manifest.setdefault("inputs", {}).update(inputs or {})
    manifest.setdefault("stage_counts", {})[stage] = counts
    manifest.setdefault("wall_clock_seconds", {})[stage] = round(elapsed, 3)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _iter_corpus(path: Path) -> list[tuple[SubtitleDocument, MovieRecord]]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            pairs.append((document_from_dict(data["document"]), movie_from_dict(data["movie"])))
    return pairs


def cmd_ingest(config: PipelineConfig) -> int:
    started = time.monotonic()
    if config.corpus_dir is None or config.metadata_csv is None:
        raise InputError("ingest needs --corpus and --metadata")
    if not config.corpus_dir.is_dir():
        raise InputError(f"corpus directory not found: {config.corpus_dir}")
    if not config.metadata_csv.is_file():
        raise InputError(f"metadata file not found: {config.metadata_csv}")
    config.output_dir.mkdir(parents=True, exist_ok=True)

    movies, upload_info = load_metadata_csv(config.metadata_csv)

    manifest_entries: dict[str, dict[str, str]] = {}
    manifest_path = config.corpus_dir / "manifest.csv"
    if manifest_path.is_file():
        manifest_entries = load_manifest_csv(manifest_path)

    srt_files = sorted(config.corpus_dir.glob("*.srt"))
    records: list[CorpusRecord] = []
    checksums: dict[str, str] = {}
    for srt in srt_files:
        checksums[srt.name] = _sha256(srt)
        try:
            document = parse_srt(srt.read_bytes(), source_id=srt.stem)
        except SrtParseError as exc:
            logger.warning("skipping %s: %s", srt.name, exc)
            continue
        entry = manifest_entries.get(srt.name) or manifest_entries.get(srt.stem) or {}
        imdb_id = entry.get("imdb_id") or srt.stem
        rank, count = upload_info.get(imdb_id, (UploaderRank.UNRANKED, 0))
        if entry.get("uploader_rank"):
            rank = UploaderRank(entry["uploader_rank"].lower())
        if entry.get("download_count"):
            count = int(entry["download_count"])
        records.append(CorpusRecord(
            document=document, uploader_rank=rank, download_count=count, imdb_id=imdb_id,
        ))

    survivors, filter_report = apply_quality_filters(records, movies, config.filters)
    filter_report.write_csv(config.output_dir / "filter_report.csv")
    pairs, unmatched = join_metadata(survivors, movies)

    counts = dict(filter_report.counts_after_each_stage)
    counts["parsed_files"] = len(records)
    counts["joined"] = len(pairs)
    counts["unmatched"] = len(unmatched)
    _update_manifest(
        config, "ingest", counts, time.monotonic() - started,
        inputs={"metadata_csv": _sha256(config.metadata_csv), **{
            f"corpus/{name}": digest for name, digest in sorted(checksums.items())
        }},
    )

    if not pairs:
        print("no records survived ingest filtering", file=sys.stderr)
        return EXIT_EMPTY_CORPUS

    with open(config.output_dir / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for document, movie in sorted(pairs, key=lambda p: p[1].imdb_id):
            fh.write(json.dumps(
                {"document": document_to_dict(document), "movie": movie_to_dict(movie)},
                sort_keys=True,
            ))
            fh.write("\n")
    print(f"ingest: {len(pairs)} records -> {config.output_dir / 'corpus.jsonl'}")
    return EXIT_OK


def cmd_arcs(config: PipelineConfig) -> int:
    started = time.monotonic()
    corpus_path = config.output_dir / "corpus.jsonl"
    if not corpus_path.is_file():
        raise InputError(f"corpus file not found: {corpus_path} (run ingest first)")
    if not config.lexicon_path.is_file():
        raise InputError(f"lexicon file not found: {config.lexicon_path}")
    lexicon = load_lexicon(config.lexicon_path)

    pairs = _iter_corpus(corpus_path)
    arcs = {}
    failures = 0
    for document, movie in sorted(pairs, key=lambda p: p[1].imdb_id):
        try:
            series = score_document(document, lexicon)
            arcs[movie.imdb_id] = compute_arc(series, config.arc)
        except ValueError as exc:
            logger.warning("skipping %s: %s", movie.imdb_id, exc)
            failures += 1

    if arcs:
        write_arcs_csv(config.output_dir / "arcs.csv", arcs)
    _update_manifest(
        config, "arcs",
        {"input": len(pairs), "scored": len(arcs), "failed": failures},
        time.monotonic() - started,
        inputs={"lexicon": _sha256(config.lexicon_path)},
    )
    if not arcs:
        print("no arcs could be computed", file=sys.stderr)
        return EXIT_SCORING if failures else EXIT_EMPTY_CORPUS
    print(f"arcs: {len(arcs)} rows -> {config.output_dir / 'arcs.csv'}")
    if failures:
        print(f"arcs: {failures} movie(s) failed scoring", file=sys.stderr)
        return EXIT_SCORING
    return EXIT_OK


def cmd_cluster(config: PipelineConfig) -> int:
    started = time.monotonic()
    arcs_path = config.output_dir / "arcs.csv"
    if not arcs_path.is_file():
        raise InputError(f"arcs file not found: {arcs_path} (run arcs first)")
    arcs = read_arcs_csv(arcs_path)
    if len(arcs) < config.cluster.k:
        print(
            f"need at least k={config.cluster.k} arcs, got {len(arcs)}",
            file=sys.stderr,
        )
        return EXIT_CLUSTERING

    model = kmeans_cluster(arcs, config.cluster)
    labels = report.label_clusters(model)
    write_model_json(config.output_dir / "clusters.json", model)
    archetypes.write_labels_csv(config.output_dir / "labels.csv", labels)
    report.render_centroids_svg(config.output_dir / "centroids.svg", model, labels)

    _update_manifest(
        config, "cluster",
        {"arcs": len(arcs), "k": model.k, "iterations": model.iterations_run},
        time.monotonic() - started,
    )
    print(f"cluster: k={model.k} objective={model.within_cluster_objective:.6f} "
          f"-> {config.output_dir / 'clusters.json'}")
    return EXIT_OK


def cmd_stats(config: PipelineConfig) -> int:
    started = time.monotonic()
    corpus_path = config.output_dir / "corpus.jsonl"
    model_path = config.output_dir / "clusters.json"
    if not corpus_path.is_file():
        raise InputError(f"corpus file not found: {corpus_path} (run ingest first)")
    if not model_path.is_file():
        raise InputError(f"cluster model not found: {model_path} (run cluster first)")

    pairs = _iter_corpus(corpus_path)
    movies = [movie for _, movie in pairs]
    model = read_model_json(model_path)
    labels = report.label_clusters(model)
    names = report.cluster_group_names(labels)
    groups = report.movie_groups(model, names)
    order = report.group_order(names)
    out = config.output_dir

    try:
        report.write_table1_csv(out / "table1.csv", report.build_table1(movies, groups, order))
        table2 = report.build_table2(movies, groups, order)
    except ValueError as exc:
        print(f"stats infeasible: {exc}", file=sys.stderr)
        return EXIT_STATS
    report.write_table2_csv(out / "table2.csv", table2)

    table3 = report.build_table3(movies, groups)
    if table3:
        report.write_table3_csv(out / "table3.csv", table3)
    else:
        logger.warning("table3 skipped: no complete-case rows")

    try:
        table4 = report.build_table4(movies, groups, order)
    except ValueError as exc:
        table4 = None
        logger.warning("table4 skipped: %s", exc)
    if table4 is not None:
        report.write_table1_csv(out / "table4.csv", table4)

    table5 = report.build_table5(movies, groups, order)
    report.write_heat_csv(out / "table5.csv", table5, order, "budget_bin")
    report.render_heatmap_svg(out / "table5.svg", table5, order,
                              "Arc effect on revenue by budget bin")
    table6 = report.build_table6(movies, groups, order)
    report.write_heat_csv(out / "table6.csv", table6, order, "genre")
    report.render_heatmap_svg(out / "table6.svg", table6, order,
                              "Arc effect on revenue by genre")
    report.write_heat_legend(out / "heatmap_legend.txt")

    _update_manifest(
        config, "stats",
        {"movies": len(movies), "groups": len(order)},
        time.monotonic() - started,
    )
    print(f"stats: tables -> {out}")
    return EXIT_OK


def cmd_all(config: PipelineConfig) -> int:
    for stage in (cmd_ingest, cmd_arcs, cmd_cluster, cmd_stats):
        code = stage(config)
        if code != EXIT_OK:
            return code
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arcminer",
        description="Mine emotional arcs from movie subtitles and relate them to success metrics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ingest", "parse subtitles, apply quality filters, join metadata"),
        ("arcs", "score sentences and extract 100-point emotional arcs"),
        ("cluster", "k-means cluster arcs and label archetypes"),
        ("stats", "emit summary, regression, and heat-map tables"),
        ("all", "run ingest, arcs, cluster, and stats in sequence"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--corpus", help="directory of .srt files")
        cmd.add_argument("--metadata", help="movie metadata CSV")
        cmd.add_argument("--lexicon", help="valence lexicon TSV (default: bundled sample)")
        cmd.add_argument("--low-pass", dest="low_pass", type=int,
                         help="DCT coefficients kept (default 5)")
        cmd.add_argument("--k", type=int, help="cluster count (default 6)")
        cmd.add_argument("--seed", type=int, help="clustering seed (default 13)")
        cmd.add_argument("--min-chars", dest="min_chars", type=int,
                         help="minimum cleaned characters per script (default 10000)")
        cmd.add_argument("--out", help="output directory (default arcminer_out)")
        cmd.add_argument("--config", help="key=value config file; flags override it")
    return parser


def main(argv: list[str] | None = None) -> int:
    level = getattr(logging, os.environ.get("ARCMINER_LOG", "WARNING").upper(), None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "ingest": cmd_ingest,
        "arcs": cmd_arcs,
        "cluster": cmd_cluster,
        "stats": cmd_stats,
        "all": cmd_all,
    }
    try:
        config = build_config(args)
        if args.command != "ingest":
            config.output_dir.mkdir(parents=True, exist_ok=True)
        return handlers[args.command](config)
    except (InputError, MetadataError, LexiconError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())
