"""Command-line pipeline tests: config handling, exit codes, outputs."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from arcminer import __version__, cli
from conftest import make_srt, metadata_csv_text

LEXICON = "joy\t1\nlove\t1\ngrief\t-1\nloss\t-1\n"


def shape_sentences(shape, n: int = 24) -> list[str]:
    sentences = []
    for i in range(n):
        t = i / (n - 1)
        target = shape(t)
        word = "joy" if target >= 0 else "grief"
        count = max(1, round(abs(target) * 4))
        sentences.append(" ".join([word] * count + ["indeed"]) + ".")
    return sentences


def meta_row(imdb_id: str, **overrides) -> dict:
    row = {
        "imdb_id": imdb_id, "title": f"Movie {imdb_id}", "release_date": "2015-06-12",
        "domestic_gross": 25.0, "worldwide_gross": 60.0, "budget": 20.0,
        "imdb_rating": 6.5, "metascore": 55, "rating_count": 10000,
        "user_reviews": 150, "critic_reviews": 40, "oscars_won": 0,
        "other_awards": 2, "other_award_nominations": 3, "runtime_min": 110,
        "genres": "Drama", "director": "R. Lee", "age_rating": "PG",
        "uploader_rank": "gold", "download_count": 500,
    }
    row.update(overrides)
    return row


@pytest.fixture
def workspace(tmp_path: Path):
    """Six movies: three rising arcs, three falling arcs."""
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    rows = []
    for group, shape in (("tt00", lambda t: 2 * t - 1), ("tt01", lambda t: 1 - 2 * t)):
        for i in range(3):
            imdb_id = f"{group}0{i}"
            text = make_srt(shape_sentences(shape))
            (corpus / f"{imdb_id}.srt").write_text(text, encoding="utf-8")
            rows.append(meta_row(imdb_id, domestic_gross=20.0 + i))
    metadata = tmp_path / "metadata.csv"
    metadata.write_text(metadata_csv_text(rows), encoding="utf-8")
    lexicon = tmp_path / "lexicon.tsv"
    lexicon.write_text(LEXICON, encoding="utf-8")
    return {
        "corpus": corpus, "metadata": metadata, "lexicon": lexicon,
        "out": tmp_path / "out",
    }


def run_cli(ws: dict, command: str, *extra: str) -> int:
    return cli.main([
        command,
        "--corpus", str(ws["corpus"]),
        "--metadata", str(ws["metadata"]),
        "--lexicon", str(ws["lexicon"]),
        "--min-chars", "10",
        "--k", "2",
        "--out", str(ws["out"]),
        *extra,
    ])


class TestConfigFile:
    def test_parse_values_comments_quotes(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# pipeline settings\n"
            "\n"
            "k = 4\n"
            'out = "my dir"\n'
            "low-pass=7\n",
            encoding="utf-8",
        )
        values = cli._parse_config_file(cfg)
        assert values == {"k": "4", "out": "my dir", "low_pass": "7"}

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus=1\n", encoding="utf-8")
        with pytest.raises(cli.InputError, match="bogus"):
            cli._parse_config_file(cfg)

    def test_line_without_equals_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just words\n", encoding="utf-8")
        with pytest.raises(cli.InputError, match="run.cfg:1"):
            cli._parse_config_file(cfg)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(cli.InputError, match="not found"):
            cli._parse_config_file(tmp_path / "absent.cfg")

    def test_flags_override_file_over_defaults(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("k=4\nseed=99\n", encoding="utf-8")
        args = cli.build_parser().parse_args(
            ["cluster", "--config", str(cfg), "--k", "3"]
        )
        config = cli.build_config(args)
        assert config.cluster.k == 3      # flag beats file
        assert config.cluster.seed == 99  # file beats default
        assert config.arc.low_pass_size == 5

    def test_defaults(self):
        args = cli.build_parser().parse_args(["cluster"])
        config = cli.build_config(args)
        assert config.cluster.k == 6
        assert config.cluster.seed == 13
        assert config.arc.low_pass_size == 5
        assert config.filters.min_cleaned_chars == 10_000
        assert config.output_dir == Path("arcminer_out")
        assert config.lexicon_path.name == "sample_lexicon.tsv"

    def test_non_integer_setting_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("k=six\n", encoding="utf-8")
        args = cli.build_parser().parse_args(["cluster", "--config", str(cfg)])
        with pytest.raises(cli.InputError, match="integer"):
            cli.build_config(args)

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--version"])
        assert exc.value.code == 0
        assert __version__ in capsys.readouterr().out


class TestExitCodes:
    def test_missing_corpus_dir_is_input_error(self, workspace, capsys):
        workspace["corpus"] = workspace["corpus"] / "nowhere"
        assert run_cli(workspace, "ingest") == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_metadata_is_input_error(self, workspace):
        workspace["metadata"] = workspace["metadata"].with_name("absent.csv")
        assert run_cli(workspace, "ingest") == 2

    def test_duplicate_metadata_id_is_input_error(self, workspace, capsys):
        rows = [meta_row("tt0000"), meta_row("tt0000")]
        workspace["metadata"].write_text(metadata_csv_text(rows), encoding="utf-8")
        assert run_cli(workspace, "ingest") == 2
        assert "duplicate" in capsys.readouterr().err

    def test_unknown_config_key_is_input_error(self, workspace, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("verbosity=9\n", encoding="utf-8")
        assert run_cli(workspace, "ingest", "--config", str(cfg)) == 2

    def test_arcs_before_ingest_is_input_error(self, workspace):
        assert run_cli(workspace, "arcs") == 2

    def test_empty_corpus_dir_exits_three(self, workspace, capsys):
        for srt in workspace["corpus"].glob("*.srt"):
            srt.unlink()
        assert run_cli(workspace, "ingest") == 3
        assert "no records" in capsys.readouterr().err

    def test_scoring_failure_exits_four_but_writes_good_arcs(self, workspace):
        (workspace["corpus"] / "tt0900.srt").write_text(
            make_srt(["grief and loss.", "joy at last."]), encoding="utf-8"
        )
        rows_path = workspace["metadata"]
        text = rows_path.read_text(encoding="utf-8").rstrip("\n")
        extra = metadata_csv_text([meta_row("tt0900")]).splitlines()[1]
        rows_path.write_text(text + "\n" + extra + "\n", encoding="utf-8")

        assert run_cli(workspace, "ingest") == 0
        assert run_cli(workspace, "arcs") == 4
        with open(workspace["out"] / "arcs.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        ids = [row[0] for row in rows[1:]]
        assert len(ids) == 6 and "tt0900" not in ids

    def test_too_few_arcs_for_k_exits_five(self, workspace, capsys):
        assert run_cli(workspace, "ingest") == 0
        assert run_cli(workspace, "arcs") == 0
        assert run_cli(workspace, "cluster", "--k", "10") == 5
        assert "k=10" in capsys.readouterr().err

    def test_single_group_stats_exits_six(self, workspace, capsys):
        assert run_cli(workspace, "all", "--k", "1") == 6
        assert "infeasible" in capsys.readouterr().err

    def test_all_stops_at_first_failing_stage(self, workspace):
        assert run_cli(workspace, "all", "--k", "10") == 5
        assert not (workspace["out"] / "table1.csv").exists()


class TestIngestOutputs:
    def test_filter_cascade_counts(self, workspace, tmp_path):
        # a/b share an imdb id (b has more downloads), c lacks revenue,
        # d is unranked: input 4 -> 3 -> 2 -> 1 survivor
        corpus = tmp_path / "cascade"
        corpus.mkdir()
        for name in ("a", "b", "c", "d"):
            (corpus / f"{name}.srt").write_text(
                make_srt(shape_sentences(lambda t: 2 * t - 1)), encoding="utf-8"
            )
        (corpus / "manifest.csv").write_text(
            "file,imdb_id,uploader_rank,download_count\n"
            "a.srt,tt1,gold,100\n"
            "b.srt,tt1,gold,250\n"
            "c.srt,tt2,silver,80\n"
            "d.srt,tt3,,0\n",
            encoding="utf-8",
        )
        metadata = tmp_path / "cascade_meta.csv"
        metadata.write_text(metadata_csv_text([
            meta_row("tt1"),
            meta_row("tt2", domestic_gross=""),
            meta_row("tt3", uploader_rank=""),
        ]), encoding="utf-8")
        workspace.update(corpus=corpus, metadata=metadata)

        assert run_cli(workspace, "ingest") == 0
        with open(workspace["out"] / "filter_report.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["stage", "count"]
        assert rows[1:] == [
            ["input", "4"],
            ["max_download_per_movie", "3"],
            ["domestic_revenue_present", "2"],
            ["ranked_uploader", "1"],
            ["min_cleaned_chars", "1"],
            ["unique_imdb_id", "1"],
        ]
        lines = (workspace["out"] / "corpus.jsonl").read_text().splitlines()
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record["movie"]["imdb_id"] == "tt1"
        # the higher-download duplicate is the one kept
        assert record["document"]["source_id"] == "b"

    def test_corpus_jsonl_sorted_by_imdb_id(self, workspace):
        assert run_cli(workspace, "ingest") == 0
        ids = [
            json.loads(line)["movie"]["imdb_id"]
            for line in (workspace["out"] / "corpus.jsonl").read_text().splitlines()
        ]
        assert ids == sorted(ids)


class TestFullPipeline:
    def test_happy_path_produces_all_outputs(self, workspace):
        assert run_cli(workspace, "all") == 0
        out = workspace["out"]
        expected = [
            "corpus.jsonl", "filter_report.csv", "arcs.csv", "clusters.json",
            "labels.csv", "centroids.svg", "table1.csv", "table2.csv",
            "table4.csv", "table5.csv", "table5.svg", "table6.csv",
            "table6.svg", "heatmap_legend.txt", "run_manifest.json",
        ]
        for name in expected:
            assert (out / name).is_file(), name

        labels = (out / "labels.csv").read_text()
        assert "RagsToRiches" in labels and "RichesToRags" in labels

        with open(out / "arcs.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 6
        assert len(rows[0]) == 101

        manifest = json.loads((out / "run_manifest.json").read_text())
        assert set(manifest["stage_counts"]) == {"ingest", "arcs", "cluster", "stats"}
        assert manifest["config"]["k"] == 2
        assert manifest["tool_version"] == __version__
        assert any(key.startswith("corpus/") for key in manifest["inputs"])

    def test_constant_covariates_skip_table3(self, workspace):
        # every metadata row shares the same covariate values, so the
        # clustered regression design is rank-deficient and skipped
        assert run_cli(workspace, "all") == 0
        assert not (workspace["out"] / "table3.csv").exists()
