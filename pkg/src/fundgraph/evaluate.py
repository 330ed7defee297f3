"""Clustering quality of embeddings against the fund/asset partition.

The headline score is the V-measure of a K-means clustering over all node
vectors against the node-kind labels, with beta = 0.01 so homogeneity
dominates: a high score means clusters are kind-pure, i.e. the embedding
kept the two sides of the bipartite graph apart.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    ContractViolationError,
    EmptyInputError,
    FundGraphError,
    ParameterError,
    VocabularyError,
)
from .graph import BipartiteGraph
from .similarity import _Ranker
from .trainer import EmbeddingMatrix, TrainParams, train
from .walker import WalkParams, generate_walks

DEFAULT_BETA = 0.01
DEFAULT_K_RANGE = (2, 10)


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    k: int


@dataclass(frozen=True)
class VMeasureResult:
    homogeneity: float
    completeness: float
    v_measure: float


def _squared_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = (
        np.einsum("ij,ij->i", X, X)[:, None]
        + np.einsum("ij,ij->i", C, C)[None, :]
        - 2.0 * (X @ C.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeanspp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]), dtype=np.float64)
    centroids[0] = X[int(rng.integers(n))]
    d2 = _squared_distances(X, centroids[:1])[:, 0]
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[j] = X[idx]
        d2 = np.minimum(d2, _squared_distances(X, centroids[j : j + 1])[:, 0])
    return centroids


def _lloyd(X, k, rng, max_iters):
    centroids = _kmeanspp(X, k, rng)
    d2 = _squared_distances(X, centroids)
    labels = d2.argmin(axis=1)
    for _it in range(max_iters):
        # recompute means; an empty cluster is reseeded to the point
        # farthest from its currently assigned centroid
        new_centroids = np.empty_like(centroids)
        counts = np.bincount(labels, minlength=k)
        for c in range(k):
            if counts[c] > 0:
                new_centroids[c] = X[labels == c].mean(axis=0)
        if np.any(counts == 0):
            own = d2[np.arange(X.shape[0]), labels]
            order = np.argsort(-own)
            used = 0
            for c in range(k):
                if counts[c] == 0:
                    new_centroids[c] = X[order[used]]
                    used += 1
        centroids = new_centroids
        d2 = _squared_distances(X, centroids)
        new_labels = d2.argmin(axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(d2[np.arange(X.shape[0]), labels].sum())
    return labels, centroids, inertia


def kmeans(
    points,
    k: int,
    seed: int = 7,
    restarts: int = 10,
    max_iters: int = 300,
) -> ClusterAssignment:
    """Lloyd's algorithm with k-means++ seeding, best of `restarts` by inertia."""
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("kmeans needs a non-empty 2-d point array")
    if not 1 <= k <= X.shape[0]:
        raise ParameterError(f"k must be in [1, {X.shape[0]}], got {k}")
    if restarts < 1 or max_iters < 1:
        raise ParameterError("restarts and max_iters must be >= 1")
    best = None
    for rs in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence((seed, k, rs)))
        labels, centroids, inertia = _lloyd(X, k, rng, max_iters)
        if best is None or inertia < best[2]:
            best = (labels, centroids, inertia)
    return ClusterAssignment(labels=best[0], centroids=best[1], inertia=best[2], k=k)


def _entropy(counts: np.ndarray) -> float:
    n = counts.sum()
    probs = counts[counts > 0] / n
    return float(-(probs * np.log(probs)).sum())


def v_measure(truth, predicted, beta: float = DEFAULT_BETA) -> VMeasureResult:
    """Homogeneity, completeness, and their beta-weighted harmonic mean.

    Entropies are in nats. h = 1 when H(truth) = 0 and c = 1 when
    H(predicted) = 0; v = 0 when the weighted denominator vanishes.
    """
    if beta < 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    pred = predicted.labels if isinstance(predicted, ClusterAssignment) else predicted
    truth_list = list(truth)
    pred_list = list(pred)
    if len(truth_list) != len(pred_list):
        raise ContractViolationError("truth and predicted must cover the same points")
    if not truth_list:
        raise EmptyInputError("v_measure needs at least one point")

    classes = {c: i for i, c in enumerate(dict.fromkeys(truth_list))}
    clusters = {c: i for i, c in enumerate(dict.fromkeys(pred_list))}
    table = np.zeros((len(classes), len(clusters)), dtype=np.int64)
    for t, p in zip(truth_list, pred_list):
        table[classes[t], clusters[p]] += 1

    n = table.sum()
    h_c = _entropy(table.sum(axis=1))
    h_k = _entropy(table.sum(axis=0))
    h_c_given_k = 0.0
    h_k_given_c = 0.0
    for j in range(table.shape[1]):
        col = table[:, j]
        nk = col.sum()
        if nk:
            h_c_given_k += (nk / n) * _entropy(col)
    for i in range(table.shape[0]):
        row = table[i]
        nc = row.sum()
        if nc:
            h_k_given_c += (nc / n) * _entropy(row)

    h = 1.0 if h_c == 0.0 else 1.0 - float(h_c_given_k) / h_c
    c = 1.0 if h_k == 0.0 else 1.0 - float(h_k_given_c) / h_k
    denom = beta * h + c
    v = 0.0 if denom == 0.0 else (1.0 + beta) * h * c / denom
    return VMeasureResult(homogeneity=h, completeness=c, v_measure=v)


def kind_labels(g: BipartiteGraph) -> dict[str, str]:
    return {lab: ("fund" if g.kinds[i] == 0 else "asset") for i, lab in enumerate(g.labels)}


@dataclass
class SweepRow:
    k: int
    homogeneity: float
    completeness: float
    v_measure: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    best_k: int
    best_v: float


def bipartiteness_sweep(
    e: EmbeddingMatrix,
    kinds: dict[str, str],
    k_range: tuple[int, int] = DEFAULT_K_RANGE,
    beta: float = DEFAULT_BETA,
    seed: int = 7,
    restarts: int = 10,
    max_iters: int = 300,
) -> SweepResult:
    """Cluster all node vectors for each K and score against node kinds."""
    k_min, k_max = int(k_range[0]), int(k_range[1])
    if k_min < 1 or k_min > k_max:
        raise ParameterError(f"bad K range [{k_min}, {k_max}]")
    try:
        truth = [kinds[lab] for lab in e.vocab.labels]
    except KeyError as exc:
        raise VocabularyError(f"no kind known for node {exc.args[0]!r}") from None
    X = e.input_vectors
    rows: list[SweepRow] = []
    for k in range(k_min, k_max + 1):
        if k > X.shape[0]:
            warnings.warn(f"skipping K={k}: only {X.shape[0]} points", stacklevel=2)
            continue
        assignment = kmeans(X, k, seed=seed, restarts=restarts, max_iters=max_iters)
        vm = v_measure(truth, assignment, beta)
        rows.append(SweepRow(k, vm.homogeneity, vm.completeness, vm.v_measure))
    if not rows:
        raise ParameterError("K range produced no clusterings")
    best = max(rows, key=lambda r: r.v_measure)
    return SweepResult(rows=rows, best_k=best.k, best_v=best.v_measure)


@dataclass
class GridRow:
    walk: WalkParams
    train: TrainParams
    optimal_k: int | None
    v_measure: float | None
    error: str | None = None


@dataclass
class GridResult:
    rows: list[GridRow]
    best_index: int | None
    best_embedding: EmbeddingMatrix | None
    best_corpus: object | None  # WalkCorpus of the best fresh row, if any


def grid_search(
    g: BipartiteGraph,
    grid: list[tuple[WalkParams, TrainParams]],
    beta: float = DEFAULT_BETA,
    k_range: tuple[int, int] = DEFAULT_K_RANGE,
    workers: int = 1,
    completed: dict[int, GridRow] | None = None,
    on_row=None,
) -> GridResult:
    """Evaluate every (walk, train) combination; a failed row is recorded.

    Ties on v_measure break toward smaller d, then smaller l. `completed`
    rows (e.g. from an interrupted run) are reused without recomputation.
    """
    if not grid:
        raise ParameterError("grid must contain at least one row")
    kinds = kind_labels(g)
    rows: list[GridRow] = []
    best_key = None
    best_index = None
    best_embedding = None
    best_corpus = None
    for idx, (wp, tp) in enumerate(grid):
        if completed is not None and idx in completed:
            row = completed[idx]
            rows.append(row)
        else:
            try:
                corpus = generate_walks(g, wp, workers=workers)
                e = train(corpus, tp, workers=workers)
                sweep = bipartiteness_sweep(e, kinds, k_range, beta, seed=tp.seed)
                row = GridRow(wp, tp, sweep.best_k, sweep.best_v)
            except FundGraphError as exc:
                row = GridRow(wp, tp, None, None, error=str(exc))
                corpus = None
                e = None
            rows.append(row)
        if on_row is not None:
            on_row(idx, row)
        if row.error is None and row.v_measure is not None:
            key = (-row.v_measure, row.train.d, row.walk.l, idx)
            if best_key is None or key < best_key:
                best_key = key
                best_index = idx
                if completed is not None and idx in completed:
                    best_embedding = None  # artifacts were produced by the earlier run
                    best_corpus = None
                else:
                    best_embedding = e
                    best_corpus = corpus
    return GridResult(
        rows=rows,
        best_index=best_index,
        best_embedding=best_embedding,
        best_corpus=best_corpus,
    )


class ClusterType(str, Enum):
    FUND = "FundCluster"
    ASSET = "AssetCluster"
    MIXED = "Mixed"


@dataclass
class CompositionRow:
    cluster: int
    fund_count: int
    asset_count: int
    cluster_type: ClusterType


@dataclass
class ClusterComposition:
    rows: list[CompositionRow]
    misclassified_funds: list[str]
    misclassified_assets: list[str]


def cluster_composition(assignment: ClusterAssignment, kinds, labels) -> ClusterComposition:
    """Per-cluster fund/asset counts; type is by simple majority of funds.

    Funds landing in asset-typed clusters (and vice versa) are listed as
    misclassified.
    """
    kinds_list = list(kinds)
    labels_list = list(labels)
    points = assignment.labels
    if not len(points) == len(kinds_list) == len(labels_list):
        raise ContractViolationError("assignment, kinds, and labels must align")
    rows: list[CompositionRow] = []
    mis_funds: list[str] = []
    mis_assets: list[str] = []
    for c in range(assignment.k):
        members = np.flatnonzero(points == c)
        fund_n = sum(1 for i in members if kinds_list[i] == "fund")
        asset_n = len(members) - fund_n
        if len(members) == 0:
            ctype = ClusterType.MIXED
        elif fund_n / len(members) >= 0.5:
            ctype = ClusterType.FUND
        else:
            ctype = ClusterType.ASSET
        rows.append(CompositionRow(c, fund_n, asset_n, ctype))
        for i in members:
            if kinds_list[i] == "fund" and ctype is ClusterType.ASSET:
                mis_funds.append(labels_list[i])
            elif kinds_list[i] == "asset" and ctype is ClusterType.FUND:
                mis_assets.append(labels_list[i])
    return ClusterComposition(rows, sorted(mis_funds), sorted(mis_assets))


@dataclass(frozen=True)
class CohesionStats:
    n_members: int
    mean_within: float
    std_within: float
    mean_outside: float
    std_outside: float


def benchmark_cohesion(rep, members, *, funds=None) -> CohesionStats:
    """Mean/std cosine within a fund group vs group-to-outside pairs.

    rep is an OriginalRepresentation or an EmbeddingMatrix (the latter needs
    funds, the full fund label set). Standard deviations are population.
    """
    ranker = _Ranker(rep, funds)
    member_list = sorted(set(members))
    if len(member_list) < 2:
        raise ParameterError("cohesion needs at least two member funds")
    positions = [ranker.position(f) for f in member_list]
    member_set = set(positions)
    outside = [i for i in range(len(ranker.fund_labels)) if i not in member_set]
    if not outside:
        raise ParameterError("cohesion needs at least one non-member fund")
    within = [
        ranker.pair(positions[a], positions[b])
        for a in range(len(positions))
        for b in range(a + 1, len(positions))
    ]
    across = [ranker.pair(i, j) for i in positions for j in outside]
    return CohesionStats(
        n_members=len(member_list),
        mean_within=float(np.mean(within)),
        std_within=float(np.std(within)),
        mean_outside=float(np.mean(across)),
        std_outside=float(np.std(across)),
    )
