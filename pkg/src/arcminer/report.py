"""Table assembly and figure rendering.

Builds the CSV tables (group summaries, dummy-regression series,
clustered OLS, budget and genre heat grids) and renders the centroid and
heatmap figures as self-contained SVG files.
"""
from __future__ import annotations

import csv
import logging
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .archetypes import Archetype, ArchetypeLabel, label_centroid  # noqa: E402
from .clustering import ClusterModel  # noqa: E402
from .corpus import GENRE_VOCABULARY, MovieRecord  # noqa: E402
from .stats import (  # noqa: E402
    BudgetBin,
    HeatCell,
    RegressionResult,
    bin_budget,
    genre_partition,
    heat_code,
    ols,
    series_of_dummy_ols,
    summarize_groups,
)

logger = logging.getLogger(__name__)

# render SVGs with a fixed hash salt so reruns are byte-identical
matplotlib.rcParams["svg.hashsalt"] = "arcminer"

TABLE1_VARIABLES = [
    "domestic_gross", "imdb_rating", "metascore", "rating_count",
    "user_reviews", "critic_reviews", "oscars_won", "other_awards",
    "other_award_nominations", "runtime_min",
]
TABLE2_OUTCOMES = [
    "domestic_gross", "imdb_rating", "metascore", "rating_count",
    "user_reviews", "critic_reviews", "oscars_won", "other_awards",
    "other_award_nominations",
]
TABLE3_COVARIATES = [
    "imdb_rating", "metascore", "rating_count", "user_reviews",
    "critic_reviews", "oscars_won", "other_awards", "other_award_nominations",
]
ARCHETYPE_ORDER = [a.value for a in Archetype]


def label_clusters(model: ClusterModel) -> dict[int, ArchetypeLabel | None]:
    """Label every centroid, keeping None where no archetype fits."""
    labels: dict[int, ArchetypeLabel | None] = {}
    for index in range(model.k):
        try:
            labels[index] = label_centroid(model.centroids[index])
        except ValueError as exc:
            logger.warning("cluster %d not labeled: %s", index, exc)
            labels[index] = None
    return labels


def cluster_group_names(labels: dict[int, ArchetypeLabel | None]) -> dict[int, str]:
    """Stable display name per cluster.

    An archetype claimed by exactly one cluster names it directly;
    collisions and unlabeled clusters fall back to indexed names.
    """
    claimed: dict[str, list[int]] = {}
    for index, label in labels.items():
        if label is not None:
            claimed.setdefault(label.name.value, []).append(index)
    names: dict[int, str] = {}
    for index in sorted(labels):
        label = labels[index]
        if label is None:
            names[index] = f"cluster_{index}"
        elif len(claimed[label.name.value]) == 1:
            names[index] = label.name.value
        else:
            names[index] = f"{label.name.value}_{index}"
    return names


def group_order(names: dict[int, str]) -> list[str]:
    """Archetype display order first, then leftover names sorted."""
    ordered = [n for n in ARCHETYPE_ORDER if n in names.values()]
    ordered += sorted(n for n in names.values() if n not in ARCHETYPE_ORDER)
    return ordered


def movie_groups(model: ClusterModel, names: dict[int, str]) -> dict[str, str]:
    return {imdb_id: names[cluster] for imdb_id, cluster in model.assignments.items()}


def build_table1(
    records: list[MovieRecord],
    groups: dict[str, str],
    order: list[str],
) -> list[tuple[str, str, object]]:
    """Rows (group, variable, SummaryCell), groups in display order + Total.

    Variables with no values in some group are skipped with a warning so
    sparse test corpora still produce a table.
    """
    grouped_ids = {g for g in groups.values()}
    usable = []
    member_records = [r for r in records if r.imdb_id in groups]
    for variable in TABLE1_VARIABLES:
        per_group_ok = all(
            any(getattr(r, variable) is not None for r in member_records if groups[r.imdb_id] == g)
            for g in grouped_ids
        ) and any(getattr(r, variable) is not None for r in member_records)
        if per_group_ok:
            usable.append(variable)
        else:
            logger.warning("table1: skipping %s (no values in some group)", variable)
    if not usable:
        raise ValueError("no summarizable variables for table1")
    table = summarize_groups(member_records, groups, usable)
    rows = []
    for group in [g for g in order if g in table] + ["Total"]:
        for variable in usable:
            rows.append((group, variable, table[group][variable]))
    return rows


def write_table1_csv(path: Path | str, rows: list[tuple[str, str, object]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "variable", "mean", "median", "sd", "n"])
        for group, variable, cell in rows:
            writer.writerow([
                group, variable, f"{cell.mean:.6f}", f"{cell.median:.6f}",
                f"{cell.sd:.6f}", cell.n,
            ])


def build_table2(
    records: list[MovieRecord],
    groups: dict[str, str],
    order: list[str],
) -> list[tuple[str, list[RegressionResult]]]:
    """(outcome, per-group dummy regressions) for each table-2 outcome."""
    out = []
    for outcome in TABLE2_OUTCOMES:
        try:
            results = series_of_dummy_ols(records, outcome, groups, order=order)
        except ValueError as exc:
            logger.warning("table2: skipping %s: %s", outcome, exc)
            continue
        out.append((outcome, results))
    if not out:
        raise ValueError("no usable outcomes for table2")
    return out


def write_table2_csv(path: Path | str, rows: list[tuple[str, list[RegressionResult]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["outcome", "arc", "estimate", "std_error", "p_value", "n"])
        for outcome, results in rows:
            for result in results:
                name, est, se, p = result.coefficients[1]
                writer.writerow([outcome, name, f"{est:.6f}", f"{se:.6f}", f"{p:.6f}", result.n])


def build_table3(
    records: list[MovieRecord],
    groups: dict[str, str],
) -> list[tuple[str, RegressionResult]]:
    """Clustered OLS of each revenue outcome on the popularity covariates.

    Complete-case rows only; clusters are the arc groups. An outcome whose
    regression is infeasible is skipped with a warning.
    """
    out = []
    for outcome in ("domestic_gross", "worldwide_gross"):
        rows = [
            r for r in records
            if r.imdb_id in groups and getattr(r, outcome) is not None
            and all(getattr(r, c) is not None for c in TABLE3_COVARIATES)
        ]
        if not rows:
            logger.warning("table3: no complete rows for %s", outcome)
            continue
        y = np.array([float(getattr(r, outcome)) for r in rows])
        X = np.column_stack(
            [np.ones(len(rows))]
            + [np.array([float(getattr(r, cov)) for r in rows]) for cov in TABLE3_COVARIATES]
        )
        names = ["intercept"] + TABLE3_COVARIATES
        clusters = [groups[r.imdb_id] for r in rows]
        try:
            result = ols(y, X, se="cluster_robust", clusters=clusters, names=names)
        except ValueError as exc:
            logger.warning("table3: skipping %s: %s", outcome, exc)
            continue
        out.append((outcome, result))
    return out


def write_table3_csv(path: Path | str, rows: list[tuple[str, RegressionResult]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dependent", "term", "estimate", "std_error", "p_value"])
        for outcome, result in rows:
            for name, est, se, p in result.coefficients:
                writer.writerow([outcome, name, f"{est:.6f}", f"{se:.6f}", f"{p:.6f}"])
            writer.writerow([outcome, "r_squared", f"{result.r_squared:.6f}", "", ""])
            writer.writerow([outcome, "n", result.n, "", ""])
            writer.writerow([outcome, "clusters", result.cluster_count, "", ""])


def budget_subsample(records: list[MovieRecord]) -> list[MovieRecord]:
    """Movies with budget, domestic, and worldwide revenue all present."""
    return [
        r for r in records
        if r.budget is not None and r.domestic_gross is not None
        and r.worldwide_gross is not None
    ]


def build_table4(
    records: list[MovieRecord],
    groups: dict[str, str],
    order: list[str],
) -> list[tuple[str, str, object]]:
    """Budget-subsample summary of budget and both revenue variables."""
    sub = [r for r in budget_subsample(records) if r.imdb_id in groups]
    if not sub:
        raise ValueError("budget subsample is empty")
    table = summarize_groups(sub, groups, ["budget", "domestic_gross", "worldwide_gross"])
    rows = []
    for group in [g for g in order if g in table] + ["Total"]:
        for variable in ("budget", "domestic_gross", "worldwide_gross"):
            rows.append((group, variable, table[group][variable]))
    return rows


def _dummy_heat(
    subset: list[MovieRecord],
    outcome: str,
    groups: dict[str, str],
    arc: str,
) -> HeatCell:
    """Heat cell for one (subset, arc): n.a. when the regression is infeasible."""
    rows = [r for r in subset if r.imdb_id in groups and getattr(r, outcome) is not None]
    members = [r for r in rows if groups[r.imdb_id] == arc]
    if not members:
        return HeatCell(code=None)
    y = np.array([float(getattr(r, outcome)) for r in rows])
    dummy = np.array([1.0 if groups[r.imdb_id] == arc else 0.0 for r in rows])
    X = np.column_stack([np.ones(len(rows)), dummy])
    try:
        result = ols(y, X, se="classical", names=["intercept", arc])
    except ValueError:
        return HeatCell(code=None)
    return heat_code(result, arc)


def build_table5(
    records: list[MovieRecord],
    groups: dict[str, str],
    order: list[str],
) -> list[tuple[str, list[HeatCell]]]:
    """Budget-bin heat grid plus the three all-data rows."""
    budgeted = [r for r in records if r.imdb_id in groups and r.budget is not None]
    rows: list[tuple[str, list[HeatCell]]] = []
    for bucket in BudgetBin:
        members = [r for r in budgeted if bin_budget(r.budget) is bucket]
        rows.append((bucket.value, [_dummy_heat(members, "domestic_gross", groups, a) for a in order]))
    grouped = [r for r in records if r.imdb_id in groups]
    rows.append((
        "All budget (gross domestic revenue)",
        [_dummy_heat(budgeted, "domestic_gross", groups, a) for a in order],
    ))
    rows.append((
        "All budget (worldwide revenue)",
        [_dummy_heat(budgeted, "worldwide_gross", groups, a) for a in order],
    ))
    rows.append((
        "All data (gross domestic revenue)",
        [_dummy_heat(grouped, "domestic_gross", groups, a) for a in order],
    ))
    return rows


def build_table6(
    records: list[MovieRecord],
    groups: dict[str, str],
    order: list[str],
) -> list[tuple[str, list[HeatCell]]]:
    """Genre heat grid over the full 22-genre vocabulary."""
    grouped = [r for r in records if r.imdb_id in groups]
    rows = []
    for genre in GENRE_VOCABULARY:
        members = genre_partition(grouped, genre)
        rows.append((genre, [_dummy_heat(members, "domestic_gross", groups, a) for a in order]))
    return rows


def write_heat_csv(
    path: Path | str,
    rows: list[tuple[str, list[HeatCell]]],
    order: list[str],
    row_header: str,
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([row_header] + order)
        for name, cells in rows:
            writer.writerow([name] + ["n.a." if c.code is None else c.code for c in cells])


def write_heat_legend(path: Path | str) -> None:
    lines = [
        "Heat codes used by table5.csv and table6.csv:",
        "  sign: + positive coefficient, - negative coefficient",
        "  |1| not significant (p >= 0.1)",
        "  |2| significant at the 10% level (p < 0.1)",
        "  |3| significant at the 5% level (p < 0.05)",
        "  |4| significant at the 1% level (p < 0.01)",
        "  |5| significant at the 0.1% level (p < 0.001)",
        "  n.a. cell has no observations or the regression is infeasible",
        "",
    ]
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def _finish_figure(fig: plt.Figure, path: Path | str) -> None:
    # Date metadata suppressed so reruns are byte-identical
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_centroids_svg(
    path: Path | str,
    model: ClusterModel,
    labels: dict[int, ArchetypeLabel | None],
) -> None:
    """One polyline per centroid on a 0-100% grid with y in [-1, 1]."""
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    x = np.linspace(0.0, 100.0, model.centroids.shape[1])
    for index in range(model.k):
        label = labels.get(index)
        name = label.name.value if label is not None else f"cluster {index}"
        ax.plot(x, model.centroids[index], label=f"{index}: {name}", linewidth=1.8)
    ax.set_xlabel("movie time (%)")
    ax.set_ylabel("valence")
    ax.set_xlim(0.0, 100.0)
    ax.set_ylim(-1.05, 1.05)
    ax.axhline(0.0, color="0.8", linewidth=0.8, zorder=0)
    ax.legend(loc="upper center", bbox_to_anchor=(0.5, -0.12), ncol=3, frameon=False)
    ax.set_title("Cluster centroids")
    fig.tight_layout()
    _finish_figure(fig, path)


def render_heatmap_svg(
    path: Path | str,
    rows: list[tuple[str, list[HeatCell]]],
    order: list[str],
    title: str,
) -> None:
    """Signed-significance heat grid; n.a. cells are hatched gray."""
    codes = np.array(
        [[np.nan if c.code is None else float(c.code) for c in cells] for _, cells in rows]
    )
    masked = np.ma.masked_invalid(codes)
    fig, ax = plt.subplots(figsize=(1.2 * len(order) + 3.0, 0.42 * len(rows) + 2.0))
    cmap = plt.get_cmap("RdBu_r").copy()
    cmap.set_bad("0.85")
    mesh = ax.imshow(masked, cmap=cmap, vmin=-5.5, vmax=5.5, aspect="auto")
    ax.set_xticks(range(len(order)), labels=order, rotation=30, ha="right")
    ax.set_yticks(range(len(rows)), labels=[name for name, _ in rows])
    for i, (_, cells) in enumerate(rows):
        for j, cell in enumerate(cells):
            text = "n.a." if cell.code is None else f"{cell.code:+d}"
            ax.text(j, i, text, ha="center", va="center", fontsize=8)
    fig.colorbar(mesh, ax=ax, label="signed significance tier", shrink=0.8)
    ax.set_title(title)
    fig.tight_layout()
    _finish_figure(fig, path)
