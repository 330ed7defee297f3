"""Shared fixtures and independent oracles used across the test modules.

Oracles here deliberately avoid the library's own code paths: transition
distributions come from a dict-based enumeration, entropies from Counter
tallies, and rankings from dense all-pairs scans.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest

from fundgraph import graph as graphmod
from fundgraph.ingest import RawHolding
from fundgraph.trainer import EmbeddingMatrix, TrainParams, Vocab


def make_graph(edges):
    """Build a BipartiteGraph straight from (fund, asset, weight) tuples."""
    return graphmod.build(list(edges))


def edges_to_raw(edges, start_line=1):
    return [
        RawHolding(f, a, w, line)
        for line, (f, a, w) in enumerate(edges, start=start_line)
    ]


def alternating_path(n, weight=1.0):
    """Path of n nodes with labels F*/A* alternating, unit weights by default.

    Node i is a fund when i is even, so every edge crosses the partition.
    """
    labels = [f"F{i:02d}" if i % 2 == 0 else f"A{i:02d}" for i in range(n)]
    edges = []
    for i in range(n - 1):
        u, v = labels[i], labels[i + 1]
        fund, asset = (u, v) if i % 2 == 0 else (v, u)
        edges.append((fund, asset, weight))
    return labels, edges


def star_edges(leaves, weights=None):
    """One fund holding `leaves` assets."""
    ws = weights if weights is not None else [1.0] * leaves
    return [("F00", f"A{i:02d}", float(ws[i])) for i in range(leaves)]


def cycle_edges(n, weight=1.0):
    """Even cycle F0-A0-F1-A1-...-F0; n must be even."""
    assert n % 2 == 0
    labels = [f"F{i // 2:02d}" if i % 2 == 0 else f"A{i // 2:02d}" for i in range(n)]
    edges = []
    for i in range(n):
        u, v = labels[i], labels[(i + 1) % n]
        fund, asset = (u, v) if i % 2 == 0 else (v, u)
        edges.append((fund, asset, weight))
    return labels, edges


# --------------------------------------------------------------------------
# independent oracles


def oracle_transition(edge_list, prev_label, curr_label, p, q):
    """Brute-force second-order distribution from a raw edge list.

    Enumerates alpha * w for every neighbor of curr and normalizes; shares
    no code with the walker module.
    """
    adj: dict[str, dict[str, float]] = {}
    for f, a, w in edge_list:
        adj.setdefault(f, {})[a] = w
        adj.setdefault(a, {})[f] = w
    masses = {}
    for cand, w in adj[curr_label].items():
        if cand == prev_label:
            alpha = 1.0 / p
        elif cand in adj[prev_label]:
            alpha = 1.0
        else:
            alpha = 1.0 / q
        masses[cand] = alpha * w
    total = sum(masses.values())
    return {cand: m / total for cand, m in masses.items()}


def oracle_v_measure(truth, pred, beta):
    """Contingency-table entropy calculation with Counter and math.log."""

    def entropy(counts):
        n = sum(counts)
        return -sum((c / n) * math.log(c / n) for c in counts if c > 0)

    n = len(truth)
    joint = Counter(zip(truth, pred))
    t_counts = Counter(truth)
    p_counts = Counter(pred)
    h_c = entropy(list(t_counts.values()))
    h_k = entropy(list(p_counts.values()))
    h_c_given_k = 0.0
    for k_val, nk in p_counts.items():
        col = [joint[(t_val, k_val)] for t_val in t_counts]
        h_c_given_k += (nk / n) * entropy(col)
    h_k_given_c = 0.0
    for t_val, nc in t_counts.items():
        row = [joint[(t_val, k_val)] for k_val in p_counts]
        h_k_given_c += (nc / n) * entropy(row)
    h = 1.0 if h_c == 0 else 1.0 - h_c_given_k / h_c
    c = 1.0 if h_k == 0 else 1.0 - h_k_given_c / h_k
    denom = beta * h + c
    v = 0.0 if denom == 0 else (1.0 + beta) * h * c / denom
    return h, c, v


def oracle_pearson(pairs):
    """Textbook two-pass product-moment correlation."""
    xs = [float(x) for x, _y in pairs]
    ys = [float(y) for _x, y in pairs]
    n = len(pairs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def dense_portfolio_vectors(g):
    """Dense per-fund weight vectors over the asset universe, from the graph."""
    asset_pos = {lab: i for i, lab in enumerate(g.asset_labels())}
    vecs = {}
    for lab in g.fund_labels():
        v = np.zeros(g.asset_count)
        fi = g.label_to_index[lab]
        nbrs, w = g.neighbors(fi)
        for a_idx, wt in zip(nbrs, w):
            v[asset_pos[g.labels[int(a_idx)]]] = wt
        vecs[lab] = v
    return vecs


def fake_embedding(labels, d=8, seed=0, vectors=None):
    """EmbeddingMatrix with supplied or random nonzero rows, bypassing train."""
    labs = list(labels)
    if vectors is None:
        rng = np.random.default_rng(seed)
        vectors = rng.normal(size=(len(labs), d))
    mat = np.asarray(vectors, dtype=np.float64)
    vocab = Vocab(
        labels=labs,
        counts=np.ones(len(labs), dtype=np.int64),
        label_to_id={lab: i for i, lab in enumerate(labs)},
    )
    return EmbeddingMatrix(
        input_vectors=mat,
        output_vectors=np.zeros_like(mat),
        vocab=vocab,
        params=None,
    )


@pytest.fixture
def tiny_graph():
    """Two funds sharing one asset: F1-(A1,A2), F2-(A2,A3)."""
    return make_graph(
        [
            ("F1", "A1", 60.0),
            ("F1", "A2", 40.0),
            ("F2", "A2", 70.0),
            ("F2", "A3", 30.0),
        ]
    )


@pytest.fixture
def default_train_params():
    return TrainParams(d=8, window=3, epochs=2, seed=7)
