"""Fund similarity in portfolio space and embedding space.

The original representation of a fund is its sparse weight vector over all
assets. Cosine similarity in that space uses sorted-index merges; embedded
similarity uses the trained input vectors. Rankings order by descending
cosine with ties broken by ascending fund label.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractViolationError,
    DegenerateVectorError,
    ParameterError,
    UndefinedCorrelationError,
    UndefinedInputError,
    VocabularyError,
)
from .graph import BipartiteGraph
from .trainer import EmbeddingMatrix

DEFAULT_M_VALUES = (5, 10, 20, 50)


@dataclass
class OriginalRepresentation:
    """Per-fund sparse portfolio vectors over the asset universe."""

    fund_labels: list[str]
    indices: list[np.ndarray]
    values: list[np.ndarray]
    norms: np.ndarray
    dimension: int

    def __post_init__(self):
        self._pos = {lab: i for i, lab in enumerate(self.fund_labels)}

    def position(self, fund: str) -> int:
        try:
            return self._pos[fund]
        except KeyError:
            raise VocabularyError(f"unknown fund {fund!r}") from None


def original_representation(g: BipartiteGraph) -> OriginalRepresentation:
    """Extract fund portfolio vectors from the graph adjacency."""
    labels = g.fund_labels()
    indices: list[np.ndarray] = []
    values: list[np.ndarray] = []
    norms = np.empty(len(labels), dtype=np.float64)
    for i in range(g.fund_count):
        nbrs, w = g.neighbors(i)
        cols = nbrs - g.fund_count  # assets occupy the trailing index block
        indices.append(cols.astype(np.int64))
        values.append(np.asarray(w, dtype=np.float64))
        norms[i] = float(np.sqrt(np.dot(w, w)))
    return OriginalRepresentation(labels, indices, values, norms, g.asset_count)


def cosine(a, b) -> float:
    """Cosine of two dense vectors, clamped into [-1, 1]."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ContractViolationError(f"shape mismatch {x.shape} vs {y.shape}")
    nx = float(np.sqrt(np.dot(x, x)))
    ny = float(np.sqrt(np.dot(y, y)))
    if nx == 0.0 or ny == 0.0:
        raise DegenerateVectorError("cosine undefined for a zero vector")
    return float(min(1.0, max(-1.0, float(np.dot(x, y)) / (nx * ny))))


def _sparse_cosine(rep: OriginalRepresentation, i: int, j: int) -> float:
    ia, ib = rep.indices[i], rep.indices[j]
    _common, pa, pb = np.intersect1d(ia, ib, assume_unique=True, return_indices=True)
    dot = float(np.dot(rep.values[i][pa], rep.values[j][pb]))
    denom = rep.norms[i] * rep.norms[j]
    if denom == 0.0:
        raise DegenerateVectorError("cosine undefined for a zero portfolio")
    return float(min(1.0, max(-1.0, dot / denom)))


def jaccard(a, b) -> float:
    """|A intersect B| / |A union B|; undefined when both sets are empty."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        raise UndefinedInputError("jaccard undefined for two empty sets")
    return len(sa & sb) / len(union)


class _Ranker:
    """Uniform ranking interface over either representation."""

    def __init__(self, rep, funds=None):
        if isinstance(rep, OriginalRepresentation):
            self.fund_labels = list(rep.fund_labels)
            self._rep = rep
            self._matrix = None
        elif isinstance(rep, EmbeddingMatrix):
            if funds is None:
                raise ContractViolationError(
                    "ranking over an embedding needs the fund label set"
                )
            self.fund_labels = sorted(funds)
            rows = np.empty((len(self.fund_labels), rep.input_vectors.shape[1]))
            for i, lab in enumerate(self.fund_labels):
                rows[i] = rep.input_vectors[rep.vocab.id_of(lab)]
            norms = np.sqrt(np.einsum("ij,ij->i", rows, rows))
            if np.any(norms == 0.0):
                raise DegenerateVectorError("embedding contains a zero fund vector")
            self._rep = None
            self._matrix = rows
            self._norms = norms
        else:
            raise ContractViolationError(f"unsupported representation {type(rep).__name__}")
        self._pos = {lab: i for i, lab in enumerate(self.fund_labels)}

    def position(self, fund: str) -> int:
        try:
            return self._pos[fund]
        except KeyError:
            raise VocabularyError(f"unknown fund {fund!r}") from None

    def pair(self, i: int, j: int) -> float:
        if self._rep is not None:
            return _sparse_cosine(self._rep, i, j)
        dot = float(np.dot(self._matrix[i], self._matrix[j]))
        return float(min(1.0, max(-1.0, dot / (self._norms[i] * self._norms[j]))))

    def ranking(self, fund: str) -> list[tuple[str, float]]:
        """All other funds ordered by (cosine desc, label asc)."""
        qi = self.position(fund)
        scored = [
            (self.fund_labels[i], self.pair(qi, i))
            for i in range(len(self.fund_labels))
            if i != qi
        ]
        scored.sort(key=lambda t: (-t[1], t[0]))
        return scored


def top_m(rep, fund: str, m: int, *, funds=None) -> list[tuple[str, float]]:
    """The m most similar funds to the query, query excluded.

    rep is an OriginalRepresentation or an EmbeddingMatrix; the latter needs
    funds (the fund label set) because the vocabulary holds both node kinds.
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    ranker = _Ranker(rep, funds)
    return ranker.ranking(fund)[:m]


@dataclass
class OverlapReport:
    m_values: list[int]
    per_fund: dict[int, np.ndarray]
    fund_labels: list[str]

    def stats(self) -> list[tuple[int, float, float, float]]:
        # population std; np.median averages the two middles on even counts
        return [
            (
                m,
                float(np.mean(self.per_fund[m])),
                float(np.median(self.per_fund[m])),
                float(np.std(self.per_fund[m])),
            )
            for m in self.m_values
        ]


def compare_rankings(ranker_a: _Ranker, ranker_b: _Ranker, m_values) -> OverlapReport:
    if set(ranker_a.fund_labels) != set(ranker_b.fund_labels):
        raise ContractViolationError("representations cover different fund sets")
    m_list = [int(m) for m in m_values]
    if not m_list or any(m < 1 for m in m_list):
        raise ParameterError(f"m_values must be positive, got {m_values}")
    labels = sorted(ranker_a.fund_labels)
    per_fund: dict[int, list[float]] = {m: [] for m in m_list}
    for fund in labels:
        rank_a = [lab for lab, _s in ranker_a.ranking(fund)]
        rank_b = [lab for lab, _s in ranker_b.ranking(fund)]
        for m in m_list:
            per_fund[m].append(jaccard(rank_a[:m], rank_b[:m]))
    return OverlapReport(
        m_values=m_list,
        per_fund={m: np.array(v) for m, v in per_fund.items()},
        fund_labels=labels,
    )


def overlap_distribution(
    g: BipartiteGraph, e: EmbeddingMatrix, m_values=DEFAULT_M_VALUES
) -> OverlapReport:
    """Jaccard overlap of original-space vs embedded top-m lists per fund."""
    if g.fund_count < 2:
        raise ParameterError("overlap needs at least two funds")
    ranker_o = _Ranker(original_representation(g))
    ranker_e = _Ranker(e, funds=g.fund_labels())
    return compare_rankings(ranker_o, ranker_e, m_values)


def pearson(x, y) -> float:
    """Pearson correlation; errors out when either coordinate is constant."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ContractViolationError("pearson needs two 1-d arrays of equal length")
    if xa.size < 2:
        raise ParameterError("pearson needs at least two points")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    denom = float(np.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))
    if denom == 0.0:
        raise UndefinedCorrelationError("a coordinate is constant")
    return float(np.dot(xc, yc) / denom)


@dataclass
class ScatterReport:
    fund_labels: list[str]
    pair_index: np.ndarray  # (n_pairs, 2) positions into fund_labels
    cos_original: np.ndarray
    cos_embedded: np.ndarray
    pearson_r: float

    def rows(self):
        for (i, j), co, ce in zip(self.pair_index, self.cos_original, self.cos_embedded):
            yield self.fund_labels[i], self.fund_labels[j], float(co), float(ce)


def cross_representation_scatter(
    g: BipartiteGraph, e: EmbeddingMatrix, workers: int = 1
) -> ScatterReport:
    """All C(n, 2) fund pairs as (original cosine, embedded cosine) points."""
    if g.fund_count < 2:
        raise ParameterError("scatter needs at least two funds")
    ranker_o = _Ranker(original_representation(g))
    ranker_e = _Ranker(e, funds=g.fund_labels())
    labels = ranker_o.fund_labels
    n = len(labels)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def block(span):
        lo, hi = span
        out_o = np.empty(hi - lo)
        out_e = np.empty(hi - lo)
        for k in range(lo, hi):
            i, j = pairs[k]
            out_o[k - lo] = ranker_o.pair(i, j)
            out_e[k - lo] = ranker_e.pair(i, j)
        return out_o, out_e

    if workers <= 1:
        cos_o, cos_e = block((0, len(pairs)))
    else:
        step = (len(pairs) + workers - 1) // workers
        spans = [(s, min(s + step, len(pairs))) for s in range(0, len(pairs), step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, spans))
        cos_o = np.concatenate([p[0] for p in parts])
        cos_e = np.concatenate([p[1] for p in parts])

    return ScatterReport(
        fund_labels=labels,
        pair_index=np.array(pairs, dtype=np.int64),
        cos_original=cos_o,
        cos_embedded=cos_e,
        pearson_r=pearson(cos_o, cos_e),
    )


@dataclass
class Projection:
    labels: list[str]
    coords: np.ndarray  # (n, 2)


def pca_2d(e: EmbeddingMatrix) -> Projection:
    """Deterministic 2-component PCA of the input vectors.

    Component signs are fixed so each component's largest-magnitude entry
    is positive.
    """
    X = e.input_vectors
    if X.shape[1] < 2:
        raise ParameterError("projection needs embedding dimension >= 2")
    if X.shape[0] < 2:
        raise ParameterError("projection needs at least two points")
    Xc = X - X.mean(axis=0)
    cov = (Xc.T @ Xc) / X.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    comps = eigvecs[:, ::-1][:, :2].T.copy()
    for row in range(2):
        peak = np.argmax(np.abs(comps[row]))
        if comps[row, peak] < 0:
            comps[row] = -comps[row]
    return Projection(labels=list(e.vocab.labels), coords=Xc @ comps.T)
