"""Functional k-means over emotional arcs.

Distances are L2 on the 100-point grid, approximated with composite
Simpson quadrature and normalized by the total weight. Clustering is
Lloyd's algorithm with k-means++ seeding, multiple restarts, and
deterministic tie-breaking so a fixed seed reproduces the model exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .arcs import EmotionalArc


@dataclass
class QuadratureWeights:
    weights: np.ndarray
    total_weight: float


@dataclass
class ClusterConfig:
    k: int = 6
    seed: int = 0
    max_iterations: int = 300
    restarts: int = 10
    tolerance: float = 1e-8

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: dict[str, int]
    within_cluster_objective: float
    iterations_run: int
    seed: int
    # objective after each Lloyd iteration of the winning restart
    objective_history: list[float] = field(default_factory=list)


def simpson_weight_vector(n_points: int) -> QuadratureWeights:
    """Composite Simpson weights on a uniform grid over [0, 1].

    An even interval count uses the 1/3 rule throughout. An odd count
    (the 100-point grid has 99 intervals) closes with the 3/8 rule on the
    final three intervals and uses 1/3 on the rest, keeping every weight
    positive and the total equal to 1.
    """
    if n_points < 3:
        raise ValueError("n_points must be >= 3")
    intervals = n_points - 1
    h = 1.0 / intervals
    weights = np.zeros(n_points)
    if intervals % 2 == 0:
        simpson_13 = n_points
    else:
        simpson_13 = n_points - 3
        weights[-4:] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    if simpson_13 >= 3:
        pattern = np.full(simpson_13, 2.0)
        pattern[1::2] = 4.0
        pattern[0] = pattern[-1] = 1.0
        weights[:simpson_13] += h / 3.0 * pattern
    return QuadratureWeights(weights=weights, total_weight=float(weights.sum()))


def l2_distance(a: EmotionalArc | np.ndarray, b: EmotionalArc | np.ndarray,
                w: QuadratureWeights) -> float:
    """Normalized L2 distance sqrt((1/W) * sum_j w_j (a_j - b_j)^2)."""
    av = a.values if isinstance(a, EmotionalArc) else np.asarray(a, dtype=float)
    bv = b.values if isinstance(b, EmotionalArc) else np.asarray(b, dtype=float)
    if av.shape != bv.shape or av.shape != w.weights.shape:
        raise ValueError("arc and weight lengths must match")
    diff = av - bv
    return float(np.sqrt(np.dot(w.weights, diff * diff) / w.total_weight))


def _as_id_map(arcs: Mapping[str, EmotionalArc] | Iterable[tuple[str, EmotionalArc]]) -> dict[str, EmotionalArc]:
    return dict(arcs)


def _pairwise_sq(X: np.ndarray, C: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted squared distances between rows of X and rows of C."""
    xw = X * w
    d2 = (X * xw).sum(axis=1)[:, None] + (C * (C * w)).sum(axis=1)[None, :] - 2.0 * xw @ C.T
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeanspp_init(X: np.ndarray, k: int, w: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = _pairwise_sq(X, X[chosen[-1]][None, :], w)[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all points coincide with a center; any pick works
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        chosen.append(idx)
        d2 = np.minimum(d2, _pairwise_sq(X, X[idx][None, :], w)[:, 0])
    return X[chosen].copy()


def _objective(X: np.ndarray, centroids: np.ndarray, assign: np.ndarray, w: np.ndarray) -> float:
    diff = X - centroids[assign]
    return float(((diff * diff) @ w).sum())


def _lloyd(X: np.ndarray, k: int, w: np.ndarray, rng: np.random.Generator,
           max_iterations: int, tolerance: float,
           ) -> tuple[np.ndarray, np.ndarray, float, int, list[float]]:
    n = X.shape[0]
    centroids = _kmeanspp_init(X, k, w, rng)
    assign = np.full(n, -1)
    iterations = 0
    history: list[float] = []
    for iterations in range(1, max_iterations + 1):
        d2 = _pairwise_sq(X, centroids, w)
        new_assign = d2.argmin(axis=1)  # argmin takes the lowest index on ties

        counts = np.bincount(new_assign, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            # steal the arc farthest from its centroid, but never drain
            # a cluster down to zero members
            own_d2 = d2[np.arange(n), new_assign]
            stealable = counts[new_assign] > 1
            if not stealable.any():
                break
            victim = int(np.flatnonzero(stealable)[own_d2[stealable].argmax()])
            counts[new_assign[victim]] -= 1
            new_assign[victim] = empty
            counts[empty] += 1

        converged = bool((new_assign == assign).all())
        assign = new_assign
        shifted = np.zeros_like(centroids)
        for c in range(k):
            members = X[assign == c]
            shifted[c] = members.mean(axis=0) if len(members) else centroids[c]
        shift = float(np.abs(shifted - centroids).max())
        centroids = shifted
        history.append(_objective(X, centroids, assign, w))
        if converged or shift <= tolerance:
            break

    return centroids, assign, history[-1], iterations, history


def kmeans_cluster(
    arcs: Mapping[str, EmotionalArc] | Iterable[tuple[str, EmotionalArc]],
    config: ClusterConfig | None = None,
) -> ClusterModel:
    """Cluster arcs by id under the Simpson-weighted L2 metric.

    Runs k-means++ / Lloyd for each restart with generators spawned from
    the configured seed and keeps the restart with the lowest objective
    (ties go to the earliest restart). Arcs are ordered by id internally,
    so input order does not affect the result.
    """
    if config is None:
        config = ClusterConfig()
    id_map = _as_id_map(arcs)
    ids = sorted(id_map)
    if len(ids) < config.k:
        raise ValueError(f"need at least k={config.k} arcs, got {len(ids)}")
    X = np.stack([np.asarray(id_map[i].values, dtype=float) for i in ids])
    quad = simpson_weight_vector(X.shape[1])
    w = quad.weights / quad.total_weight

    best: tuple[float, int] | None = None
    best_state: tuple[np.ndarray, np.ndarray, int, list[float]] | None = None
    for restart, child in enumerate(np.random.SeedSequence(config.seed).spawn(config.restarts)):
        rng = np.random.default_rng(child)
        centroids, assign, objective, iterations, history = _lloyd(
            X, config.k, w, rng, config.max_iterations, config.tolerance
        )
        key = (objective, restart)
        if best is None or key < best:
            best = key
            best_state = (centroids, assign, iterations, history)

    assert best is not None and best_state is not None
    centroids, assign, iterations, history = best_state
    return ClusterModel(
        k=config.k,
        centroids=centroids,
        assignments={ids[i]: int(assign[i]) for i in range(len(ids))},
        within_cluster_objective=best[0],
        iterations_run=iterations,
        seed=config.seed,
        objective_history=history,
    )


def silhouette_score(
    arcs: Mapping[str, EmotionalArc] | Iterable[tuple[str, EmotionalArc]],
    model: ClusterModel,
) -> float:
    """Mean silhouette under the Simpson-weighted L2 metric.

    Singleton clusters contribute 0 for their lone member.
    """
    id_map = _as_id_map(arcs)
    ids = sorted(id_map)
    X = np.stack([np.asarray(id_map[i].values, dtype=float) for i in ids])
    quad = simpson_weight_vector(X.shape[1])
    w = quad.weights / quad.total_weight
    labels = np.array([model.assignments[i] for i in ids])

    dist = np.sqrt(_pairwise_sq(X, X, w))
    scores = np.zeros(len(ids))
    for i in range(len(ids)):
        own = labels == labels[i]
        n_own = own.sum()
        if n_own <= 1:
            continue
        a = dist[i, own].sum() / (n_own - 1)
        b = np.inf
        for c in range(model.k):
            if c == labels[i]:
                continue
            members = labels == c
            if members.any():
                b = min(b, dist[i, members].mean())
        if not np.isfinite(b):
            continue
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def sweep_k(
    arcs: Mapping[str, EmotionalArc] | Iterable[tuple[str, EmotionalArc]],
    k_values: list[int],
    config: ClusterConfig | None = None,
) -> list[tuple[int, float, float]]:
    """Run the clustering at several k and report (k, objective, silhouette)."""
    if not k_values:
        raise ValueError("k_values must be nonempty")
    if any(k < 2 for k in k_values):
        raise ValueError("every k in the sweep must be >= 2")
    if config is None:
        config = ClusterConfig()
    id_map = _as_id_map(arcs)
    rows = []
    for k in sorted(k_values):
        cfg = ClusterConfig(
            k=k, seed=config.seed, max_iterations=config.max_iterations,
            restarts=config.restarts, tolerance=config.tolerance,
        )
        model = kmeans_cluster(id_map, cfg)
        rows.append((k, model.within_cluster_objective, silhouette_score(id_map, model)))
    return rows


def model_to_dict(model: ClusterModel) -> dict:
    return {
        "k": model.k,
        "seed": model.seed,
        "objective": model.within_cluster_objective,
        "iterations_run": model.iterations_run,
        "centroids": [[float(v) for v in row] for row in model.centroids],
        "assignments": {key: model.assignments[key] for key in sorted(model.assignments)},
    }


def write_model_json(path: Path | str, model: ClusterModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_model_json(path: Path | str) -> ClusterModel:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return ClusterModel(
        k=data["k"],
        centroids=np.array(data["centroids"], dtype=float),
        assignments={k: int(v) for k, v in data["assignments"].items()},
        within_cluster_objective=float(data["objective"]),
        iterations_run=int(data.get("iterations_run", 0)),
        seed=int(data["seed"]),
    )
