"""Statistical battery over movie groups.

Group summaries, series-of-dummy OLS, cluster-robust OLS, Mann-Whitney
and Kolmogorov-Smirnov comparisons, budget binning, signed significance
heat codes, and genre partitions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg as sla
from scipy import stats as sstats

from .corpus import GENRE_VOCABULARY, MovieRecord


@dataclass(frozen=True)
class SummaryCell:
    mean: float
    median: float
    sd: float
    n: int


@dataclass
class RegressionResult:
    coefficients: list[tuple[str, float, float, float]]  # name, estimate, SE, p
    r_squared: float
    n: int
    se_type: str  # "classical" | "cluster_robust"
    cluster_count: int | None = None

    def coefficient(self, name: str) -> tuple[str, float, float, float]:
        for row in self.coefficients:
            if row[0] == name:
                return row
        raise KeyError(f"no coefficient named {name!r}")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    test: str  # "mann_whitney" | "ks_two_sample"


@dataclass(frozen=True)
class HeatCell:
    code: int | None  # None renders as "n.a."


class BudgetBin(Enum):
    UP_TO_1 = "(0,1]"
    FROM_1_TO_5 = "(1,5]"
    FROM_5_TO_10 = "(5,10]"
    FROM_10_TO_20 = "(10,20]"
    FROM_20_TO_30 = "(20,30]"
    FROM_30_TO_50 = "(30,50]"
    FROM_50_TO_100 = "(50,100]"
    ABOVE_100 = "(100,inf)"


_BIN_UPPER_EDGES = (1.0, 5.0, 10.0, 20.0, 30.0, 50.0, 100.0, math.inf)


def summarize_groups(
    records: list[MovieRecord],
    grouping: Mapping[str, str],
    variables: list[str],
) -> dict[str, dict[str, SummaryCell]]:
    """Per-(group, variable) mean/median/sd/n plus a Total group.

    Absent values are excluded per variable. Median of an even count is
    the average of the two central order statistics; sd uses the n-1
    divisor, with sd = 0 for a single value. A group with no values for
    some variable is an error.
    """
    by_group: dict[str, list[MovieRecord]] = {}
    for record in records:
        group = grouping.get(record.imdb_id)
        if group is not None:
            by_group.setdefault(group, []).append(record)

    table: dict[str, dict[str, SummaryCell]] = {}
    for group in sorted(by_group) + ["Total"]:
        members = records if group == "Total" else by_group[group]
        row: dict[str, SummaryCell] = {}
        for variable in variables:
            values = [getattr(r, variable) for r in members]
            values = [float(v) for v in values if v is not None]
            if not values:
                raise ValueError(f"group {group!r} has no values for {variable!r}")
            arr = np.array(values)
            sd = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
            row[variable] = SummaryCell(
                mean=float(arr.mean()),
                median=float(np.median(arr)),
                sd=sd,
                n=len(arr),
            )
        table[group] = row
    return table


def _check_full_rank(X: np.ndarray, names: list[str]) -> None:
    _, r, pivots = sla.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(np.atleast_2d(r)))
    tol = max(X.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    rank = int((diag > tol).sum())
    if rank < X.shape[1]:
        dependent = sorted(names[j] for j in pivots[rank:])
        raise ValueError(f"design matrix is rank-deficient; dependent columns: {', '.join(dependent)}")


def ols(
    y: Sequence[float],
    X: Sequence[Sequence[float]] | np.ndarray,
    se: str = "classical",
    clusters: Sequence | None = None,
    names: list[str] | None = None,
) -> RegressionResult:
    """OLS with classical or cluster-robust standard errors.

    The design matrix must already include its intercept column and be
    full column rank. Cluster-robust covariance uses the sandwich with
    the (G/(G-1))*((n-1)/(n-p)) small-sample factor and t(G-1) p-values;
    classical uses s^2 (X'X)^-1 and t(n-p).
    """
    yv = np.asarray(y, dtype=float)
    Xm = np.asarray(X, dtype=float)
    if Xm.ndim != 2 or yv.ndim != 1 or Xm.shape[0] != yv.shape[0]:
        raise ValueError("X must be 2-D with one row per y value")
    n, p = Xm.shape
    if names is None:
        names = [f"b{j}" for j in range(p)]
    if len(names) != p:
        raise ValueError("one name per column required")
    if n <= p:
        raise ValueError(f"need more rows ({n}) than coefficients ({p})")
    if se not in ("classical", "cluster_robust"):
        raise ValueError(f"unknown se type {se!r}")
    _check_full_rank(Xm, names)

    xtx = Xm.T @ Xm
    xtx_inv = np.linalg.inv(xtx)
    beta = xtx_inv @ (Xm.T @ yv)
    residuals = yv - Xm @ beta
    rss = float(residuals @ residuals)
    tss = float(((yv - yv.mean()) ** 2).sum())
    r_squared = 0.0 if tss == 0.0 else 1.0 - rss / tss

    cluster_count: int | None = None
    if se == "classical":
        sigma2 = rss / (n - p)
        cov = sigma2 * xtx_inv
        df = n - p
    else:
        if clusters is None:
            raise ValueError("cluster_robust needs a cluster id per row")
        labels = list(clusters)
        if len(labels) != n:
            raise ValueError("one cluster id per row required")
        unique = sorted(set(labels), key=str)
        g = len(unique)
        if g < 2:
            raise ValueError("cluster_robust needs at least 2 clusters")
        meat = np.zeros((p, p))
        for label in unique:
            mask = np.array([lab == label for lab in labels])
            score = Xm[mask].T @ residuals[mask]
            meat += np.outer(score, score)
        factor = (g / (g - 1)) * ((n - 1) / (n - p))
        cov = factor * xtx_inv @ meat @ xtx_inv
        df = g - 1
        cluster_count = g

    ses = np.sqrt(np.maximum(np.diag(cov), 0.0))
    coefficients: list[tuple[str, float, float, float]] = []
    for j in range(p):
        est = float(beta[j])
        sej = float(ses[j])
        if sej == 0.0:
            pval = 1.0 if est == 0.0 else 0.0
        else:
            pval = float(2.0 * sstats.t.sf(abs(est / sej), df))
        coefficients.append((names[j], est, sej, min(max(pval, 0.0), 1.0)))

    return RegressionResult(
        coefficients=coefficients,
        r_squared=float(min(max(r_squared, 0.0), 1.0)),
        n=n,
        se_type=se,
        cluster_count=cluster_count,
    )


def series_of_dummy_ols(
    records: list[MovieRecord],
    outcome: str,
    groups: Mapping[str, object],
    order: list | None = None,
) -> list[RegressionResult]:
    """One bivariate regression per group: outcome on intercept + dummy.

    Rows are records present in the grouping with a non-absent outcome.
    Results follow `order` when given, else sorted group labels. The
    dummy coefficient is named by its group label.
    """
    rows = [
        (r, groups[r.imdb_id], float(getattr(r, outcome)))
        for r in records
        if r.imdb_id in groups and getattr(r, outcome) is not None
    ]
    if not rows:
        raise ValueError(f"outcome {outcome!r} absent for all grouped rows")
    present = {label for _, label, _ in rows}
    if len(present) < 2:
        raise ValueError("need at least 2 groups represented")
    if order is None:
        order = sorted(present, key=str)
    y = np.array([v for _, _, v in rows])
    results = []
    for label in order:
        dummy = np.array([1.0 if lab == label else 0.0 for _, lab, _ in rows])
        X = np.column_stack([np.ones(len(rows)), dummy])
        results.append(ols(y, X, se="classical", names=["intercept", str(label)]))
    return results


def _midranks(values: np.ndarray) -> np.ndarray:
    order = values.argsort(kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_u_counts(n: int, m: int) -> np.ndarray:
    """counts[u] = number of label assignments with U = u, u in 0..n*m."""
    table: list[list[np.ndarray | None]] = [[None] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 or j == 0:
                table[i][j] = np.array([1.0])
                continue
            out = np.zeros(i * j + 1)
            shifted = table[i - 1][j]
            out[j:j + len(shifted)] += shifted
            out[: len(table[i][j - 1])] += table[i][j - 1]
            table[i][j] = out
    return table[n][m]


def mann_whitney(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sided Mann-Whitney U test on the first sample's U statistic.

    Exact enumeration when n_a * n_b <= 400 with no ties; otherwise the
    normal approximation with tie-corrected variance and continuity
    correction. Zero variance (all values identical) gives p = 1.
    """
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.size == 0 or bv.size == 0:
        raise ValueError("both samples must be nonempty")
    na, nb = av.size, bv.size
    combined = np.concatenate([av, bv])
    ranks = _midranks(combined)
    u = float(ranks[:na].sum() - na * (na + 1) / 2.0)

    _, tie_sizes = np.unique(combined, return_counts=True)
    has_ties = bool((tie_sizes > 1).any())

    if na * nb <= 400 and not has_ties:
        counts = _exact_u_counts(na, nb)
        total = counts.sum()
        u_int = int(round(u))
        lo = min(u_int, na * nb - u_int)
        hi = max(u_int, na * nb - u_int)
        p = float((counts[: lo + 1].sum() + counts[hi:].sum()) / total)
        return TestResult(statistic=u, p_value=min(p, 1.0), test="mann_whitney")

    nn = na + nb
    mean = na * nb / 2.0
    tie_term = float(((tie_sizes ** 3) - tie_sizes).sum()) / (nn * (nn - 1)) if nn > 1 else 0.0
    var = na * nb / 12.0 * ((nn + 1) - tie_term)
    if var <= 0.0:
        return TestResult(statistic=u, p_value=1.0, test="mann_whitney")
    z = max(abs(u - mean) - 0.5, 0.0) / math.sqrt(var)
    p = float(2.0 * sstats.norm.sf(z))
    return TestResult(statistic=u, p_value=min(p, 1.0), test="mann_whitney")


def _kolmogorov_sf(lam: float) -> float:
    """Q(lambda) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2)."""
    if lam <= 1e-12:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return min(max(total, 0.0), 1.0)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sample Kolmogorov-Smirnov test with asymptotic p-value."""
    av = np.sort(np.asarray(a, dtype=float))
    bv = np.sort(np.asarray(b, dtype=float))
    if av.size == 0 or bv.size == 0:
        raise ValueError("both samples must be nonempty")
    values = np.union1d(av, bv)
    cdf_a = np.searchsorted(av, values, side="right") / av.size
    cdf_b = np.searchsorted(bv, values, side="right") / bv.size
    d = float(np.abs(cdf_a - cdf_b).max())
    effective = av.size * bv.size / (av.size + bv.size)
    p = _kolmogorov_sf(math.sqrt(effective) * d)
    return TestResult(statistic=d, p_value=p, test="ks_two_sample")


def bin_budget(budget: float) -> BudgetBin:
    """Right-closed budget binning in million USD; boundaries go low."""
    if budget <= 0.0 or not math.isfinite(budget):
        raise ValueError(f"budget must be positive and finite, got {budget}")
    for member, upper in zip(BudgetBin, _BIN_UPPER_EDGES):
        if budget <= upper:
            return member
    raise AssertionError("unreachable: bins cover (0, inf)")


def heat_code(result: RegressionResult, name: str) -> HeatCell:
    """Signed significance tier of a named coefficient.

    |code|: p<0.001 -> 5, p<0.01 -> 4, p<0.05 -> 3, p<0.1 -> 2, else 1.
    Sign follows the estimate; an exactly zero estimate codes +1.
    """
    _, estimate, _, p = result.coefficient(name)
    if p < 0.001:
        tier = 5
    elif p < 0.01:
        tier = 4
    elif p < 0.05:
        tier = 3
    elif p < 0.1:
        tier = 2
    else:
        tier = 1
    if estimate == 0.0:
        return HeatCell(code=1)
    return HeatCell(code=tier if estimate > 0 else -tier)


def genre_partition(records: list[MovieRecord], genre: str) -> list[MovieRecord]:
    """Movies carrying the genre; multi-genre movies appear in several partitions."""
    if genre not in GENRE_VOCABULARY:
        raise ValueError(
            f"unknown genre {genre!r}; expected one of: {', '.join(GENRE_VOCABULARY)}"
        )
    return [r for r in records if genre in r.genres]
