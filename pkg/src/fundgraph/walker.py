"""Second-order biased random walks and the walk corpus file format.

The step from (prev -> curr) weights each neighbor x of curr by
alpha * w(curr, x), with alpha = 1/p when x == prev, 1 when x is adjacent
to prev, and 1/q otherwise. The first hop of every walk is plain weighted
neighbor sampling. Each walk draws from its own seed stream derived from
(seed, start node index, walk index), so output does not depend on the
worker count, and walks are ordered by (start node index, walk index).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractViolationError,
    CorruptFileError,
    ParameterError,
    StaleCorpusError,
)
from .graph import BipartiteGraph, NodeId
from .sampling import AliasTable

# per-directed-edge alias tables are built only when the total entry count fits
DEFAULT_TABLE_BUDGET = 4_000_000


@dataclass(frozen=True)
class WalkParams:
    """Walk hyperparameters; l counts hops, so walks carry l + 1 nodes."""

    r: int = 10
    l: int = 80
    p: float = 1.0
    q: float = 1.0
    seed: int = 7

    def __post_init__(self):
        if self.r < 1:
            raise ParameterError(f"r must be >= 1, got {self.r}")
        if self.l < 1:
            raise ParameterError(f"l must be >= 1, got {self.l}")
        if not (self.p > 0 and np.isfinite(self.p)):
            raise ParameterError(f"p must be positive, got {self.p}")
        if not (self.q > 0 and np.isfinite(self.q)):
            raise ParameterError(f"q must be positive, got {self.q}")
        if self.seed < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")


@dataclass
class WalkCorpus:
    """All generated walks as node-label sequences, plus provenance."""

    walks: list[list[str]]
    r: int
    l: int
    p: float
    q: float
    graph_fingerprint: str


def _bias_masses(g: BipartiteGraph, prev: int, curr: int, p: float, q: float):
    """Unnormalized transition masses alpha * w over curr's neighbor list."""
    nbrs, w = g.neighbors(curr)
    prev_nbrs, _ = g.neighbors(prev)
    pos = np.searchsorted(prev_nbrs, nbrs)
    pos_c = np.minimum(pos, prev_nbrs.size - 1)
    adjacent = (pos < prev_nbrs.size) & (prev_nbrs[pos_c] == nbrs)
    alpha = np.where(nbrs == prev, 1.0 / p, np.where(adjacent, 1.0, 1.0 / q))
    return nbrs, w * alpha


def transition_weights(
    g: BipartiteGraph,
    prev: NodeId | int,
    curr: NodeId | int,
    params: WalkParams,
) -> list[tuple[NodeId, float]]:
    """Normalized second-order transition distribution out of (prev -> curr)."""
    pi = prev.index if isinstance(prev, NodeId) else int(prev)
    ci = curr.index if isinstance(curr, NodeId) else int(curr)
    if not g.has_edge(ci, pi):
        raise ContractViolationError(
            f"curr {g.labels[ci]!r} is not adjacent to prev {g.labels[pi]!r}"
        )
    nbrs, masses = _bias_masses(g, pi, ci, params.p, params.q)
    probs = masses / masses.sum()
    return [(g.node(int(v)), float(pr)) for v, pr in zip(nbrs, probs)]


def _estimate_table_entries(g: BipartiteGraph) -> int:
    deg = np.diff(g.indptr)
    return int(np.sum(deg * deg))


def _build_edge_tables(g: BipartiteGraph, params: WalkParams) -> dict[tuple[int, int], AliasTable]:
    tables: dict[tuple[int, int], AliasTable] = {}
    for u in range(g.n_nodes):
        for v in g.neighbors(u)[0]:
            vi = int(v)
            _, masses = _bias_masses(g, u, vi, params.p, params.q)
            tables[(u, vi)] = AliasTable(masses)
    return tables


def _one_walk(g, start, walk_index, params, edge_tables):
    rng = np.random.default_rng(np.random.SeedSequence((params.seed, start, walk_index)))
    nodes = [start]
    nbrs, _ = g.neighbors(start)
    curr = int(nbrs[g.alias_table(start).sample(rng)])
    prev = start
    nodes.append(curr)
    for _hop in range(params.l - 1):
        if edge_tables is not None:
            nbrs = g.neighbors(curr)[0]
            pos = edge_tables[(prev, curr)].sample(rng)
        else:
            nbrs, masses = _bias_masses(g, prev, curr, params.p, params.q)
            cum = np.cumsum(masses)
            pos = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            if pos >= nbrs.size:
                pos = nbrs.size - 1
        prev, curr = curr, int(nbrs[pos])
        nodes.append(curr)
    labels = g.labels
    return [labels[i] for i in nodes]


def generate_walks(
    g: BipartiteGraph,
    params: WalkParams,
    workers: int = 1,
    precompute: bool | str = "auto",
    table_budget: int = DEFAULT_TABLE_BUDGET,
) -> WalkCorpus:
    """Generate r walks of l hops from every node.

    Requires a connected graph. With precompute="auto", per-directed-edge
    alias tables are built when their total size fits table_budget entries;
    otherwise each step normalizes on the fly.
    """
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    if not g.is_connected():
        raise ContractViolationError("walk generation requires a connected graph")
    if precompute == "auto":
        use_tables = _estimate_table_entries(g) <= table_budget
    else:
        use_tables = bool(precompute)
    edge_tables = _build_edge_tables(g, params) if use_tables else None

    def walks_for_node(s: int) -> list[list[str]]:
        return [_one_walk(g, s, wi, params, edge_tables) for wi in range(params.r)]

    if workers == 1:
        per_node = [walks_for_node(s) for s in range(g.n_nodes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_node = list(pool.map(walks_for_node, range(g.n_nodes)))

    walks = [w for node_walks in per_node for w in node_walks]
    return WalkCorpus(
        walks=walks,
        r=params.r,
        l=params.l,
        p=params.p,
        q=params.q,
        graph_fingerprint=g.fingerprint(),
    )


def save_corpus(corpus: WalkCorpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"#walks r={corpus.r} l={corpus.l} p={corpus.p!r} q={corpus.q!r} "
            f"graph={corpus.graph_fingerprint}\n"
        )
        for walk in corpus.walks:
            fh.write(" ".join(walk))
            fh.write("\n")


def load_corpus(path, graph: BipartiteGraph | None = None) -> WalkCorpus:
    """Load a walk corpus; verifies the graph fingerprint when one is given."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith("#walks "):
            raise CorruptFileError(f"{path}: missing corpus header")
        fields = dict(
            tok.split("=", 1) for tok in header[len("#walks ") :].split() if "=" in tok
        )
        try:
            r = int(fields["r"])
            l = int(fields["l"])
            p = float(fields["p"])
            q = float(fields["q"])
            fingerprint = fields["graph"]
        except (KeyError, ValueError):
            raise CorruptFileError(f"{path}: malformed corpus header {header!r}") from None
        walks = []
        for line_no, line in enumerate(fh, start=2):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != l + 1:
                raise CorruptFileError(
                    f"{path}:{line_no}: walk has {len(tokens)} nodes, expected {l + 1}"
                )
            walks.append(tokens)
    if graph is not None and graph.fingerprint() != fingerprint:
        raise StaleCorpusError("corpus fingerprint does not match the supplied graph")
    return WalkCorpus(walks=walks, r=r, l=l, p=p, q=q, graph_fingerprint=fingerprint)
