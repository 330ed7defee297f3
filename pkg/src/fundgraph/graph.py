"""Weighted bipartite fund-asset graph with O(1) neighbor sampling."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    ContractViolationError,
    CorruptFileError,
    DegreeError,
    EmptyGraphError,
    ParameterError,
)
from .ingest import CleanEdgeList
from .sampling import AliasTable


class NodeKind(str, Enum):
    FUND = "fund"
    ASSET = "asset"


@dataclass(frozen=True)
class NodeId:
    index: int
    kind: NodeKind
    label: str


@dataclass(frozen=True)
class GraphStats:
    fund_count: int
    asset_count: int
    edge_count: int
    mean_fund_degree: float
    median_fund_degree: int
    mean_asset_degree: float
    median_asset_degree: int


class BipartiteGraph:
    """Immutable undirected weighted bipartite graph in CSR form.

    Node indices are dense: funds first, then assets, each block in sorted
    label order. Neighbor lists are sorted by node index.
    """

    def __init__(self, labels, kinds, indptr, indices, weights, fund_count):
        self.labels: list[str] = labels
        self.kinds: np.ndarray = kinds
        self.indptr: np.ndarray = indptr
        self.indices: np.ndarray = indices
        self.weights: np.ndarray = weights
        self.fund_count: int = fund_count
        self.asset_count: int = len(labels) - fund_count
        self.n_nodes: int = len(labels)
        self.label_to_index: dict[str, int] = {lab: i for i, lab in enumerate(labels)}
        for arr in (self.kinds, self.indptr, self.indices, self.weights):
            arr.setflags(write=False)
        self._alias: list[AliasTable | None] = [None] * self.n_nodes
        self._fingerprint: str | None = None
        self._connected: bool | None = None

    # -- basic accessors ---------------------------------------------------

    def node(self, index: int) -> NodeId:
        kind = NodeKind.FUND if self.kinds[index] == 0 else NodeKind.ASSET
        return NodeId(index, kind, self.labels[index])

    def degree(self, index: int) -> int:
        return int(self.indptr[index + 1] - self.indptr[index])

    def neighbors(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[index], self.indptr[index + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs, _ = self.neighbors(u)
        pos = np.searchsorted(nbrs, v)
        return pos < nbrs.size and nbrs[pos] == v

    def edge_weight(self, u: int, v: int) -> float:
        nbrs, w = self.neighbors(u)
        pos = np.searchsorted(nbrs, v)
        if pos < nbrs.size and nbrs[pos] == v:
            return float(w[pos])
        raise ContractViolationError(f"no edge between node {u} and node {v}")

    @property
    def edge_count(self) -> int:
        return self.indices.size // 2

    def iter_edges(self):
        """Yield (fund_index, asset_index, weight) once per undirected edge."""
        for u in range(self.fund_count):
            nbrs, w = self.neighbors(u)
            for v, wt in zip(nbrs, w):
                yield u, int(v), float(wt)

    # -- sampling ----------------------------------------------------------

    def alias_table(self, index: int) -> AliasTable:
        table = self._alias[index]
        if table is None:
            _, w = self.neighbors(index)
            if w.size == 0:
                raise DegreeError(f"node {self.labels[index]} has no neighbors")
            table = AliasTable(w)
            self._alias[index] = table
        return table

    # -- derived properties ------------------------------------------------

    def fingerprint(self) -> str:
        """Content hash over labels, kinds, and weighted edges."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for i, lab in enumerate(self.labels):
                h.update(f"{lab},{int(self.kinds[i])}\n".encode())
            h.update(b"--\n")
            for u, v, w in self.iter_edges():
                h.update(f"{self.labels[u]},{self.labels[v]},{w!r}\n".encode())
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    def is_connected(self) -> bool:
        if self._connected is None:
            seen = np.zeros(self.n_nodes, dtype=bool)
            stack = [0]
            seen[0] = True
            count = 1
            while stack:
                u = stack.pop()
                for v in self.neighbors(u)[0]:
                    if not seen[v]:
                        seen[v] = True
                        count += 1
                        stack.append(int(v))
            self._connected = count == self.n_nodes
        return self._connected

    def fund_labels(self) -> list[str]:
        return self.labels[: self.fund_count]

    def asset_labels(self) -> list[str]:
        return self.labels[self.fund_count :]


def _build_from_edges(edges: list[tuple[str, str, float]]) -> BipartiteGraph:
    if not edges:
        raise EmptyGraphError("cannot build a graph from an empty edge list")
    funds = sorted({f for f, _a, _w in edges})
    assets = sorted({a for _f, a, _w in edges})
    shared = set(funds) & set(assets)
    if shared:
        raise ParameterError(f"labels used as both fund and asset: {sorted(shared)[:3]}")
    labels = funds + assets
    fund_count = len(funds)
    index = {lab: i for i, lab in enumerate(labels)}

    seen_pairs = set()
    for f, a, w in edges:
        if (f, a) in seen_pairs:
            raise ParameterError(f"duplicate edge ({f}, {a})")
        seen_pairs.add((f, a))
        if not (w > 0 and np.isfinite(w)):
            raise ParameterError(f"edge ({f}, {a}) has non-positive weight {w!r}")

    m = len(edges)
    rows = np.empty(2 * m, dtype=np.int64)
    cols = np.empty(2 * m, dtype=np.int64)
    vals = np.empty(2 * m, dtype=np.float64)
    for k, (f, a, w) in enumerate(edges):
        fi, ai = index[f], index[a]
        rows[k], cols[k], vals[k] = fi, ai, w
        rows[m + k], cols[m + k], vals[m + k] = ai, fi, w

    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    n = len(labels)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    kinds = np.zeros(n, dtype=np.uint8)
    kinds[fund_count:] = 1
    return BipartiteGraph(labels, kinds, indptr, cols, vals, fund_count)


def build(clean_edges: CleanEdgeList | list[tuple[str, str, float]]) -> BipartiteGraph:
    """Build the bipartite graph from a cleaned edge list."""
    edges = clean_edges.edges if isinstance(clean_edges, CleanEdgeList) else list(clean_edges)
    return _build_from_edges(edges)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def component_sizes(g: BipartiteGraph) -> dict[int, list[int]]:
    """Map each component root to its sorted member indices (union-find)."""
    uf = _UnionFind(g.n_nodes)
    for u, v, _w in g.iter_edges():
        uf.union(u, v)
    comps: dict[int, list[int]] = {}
    for i in range(g.n_nodes):
        comps.setdefault(uf.find(i), []).append(i)
    return comps


def giant_component(g: BipartiteGraph) -> BipartiteGraph:
    """Return the largest connected component as a re-densified graph.

    Size ties break toward the component containing the smallest node index.
    """
    comps = component_sizes(g)
    best = min(comps.values(), key=lambda m: (-len(m), m[0]))
    keep = set(best)
    edges = [
        (g.labels[u], g.labels[v], w)
        for u, v, w in g.iter_edges()
        if u in keep and v in keep
    ]
    if not edges:
        raise EmptyGraphError("largest component has no edges")
    return _build_from_edges(edges)


def _median_lower(values: np.ndarray) -> int:
    # lower-middle element for even-length lists keeps the median in the multiset
    s = np.sort(values)
    return int(s[(s.size - 1) // 2])


def stats(g: BipartiteGraph) -> GraphStats:
    degrees = np.diff(g.indptr)
    fund_deg = degrees[: g.fund_count]
    asset_deg = degrees[g.fund_count :]
    if fund_deg.size == 0 or asset_deg.size == 0:
        raise EmptyGraphError("graph needs at least one fund and one asset")
    return GraphStats(
        fund_count=g.fund_count,
        asset_count=g.asset_count,
        edge_count=g.edge_count,
        mean_fund_degree=float(fund_deg.mean()),
        median_fund_degree=_median_lower(fund_deg),
        mean_asset_degree=float(asset_deg.mean()),
        median_asset_degree=_median_lower(asset_deg),
    )


def sample_neighbor(g: BipartiteGraph, v: NodeId | int, rng: np.random.Generator) -> NodeId:
    """Draw a neighbor of v with probability proportional to edge weight."""
    index = v.index if isinstance(v, NodeId) else int(v)
    nbrs, _ = g.neighbors(index)
    if nbrs.size == 0:
        raise DegreeError(f"node {g.labels[index]} has no neighbors")
    pos = g.alias_table(index).sample(rng)
    return g.node(int(nbrs[pos]))


def save_graph(g: BipartiteGraph, edges_path, nodes_path) -> None:
    with open(edges_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fund_id", "asset_isin", "weight_pct"])
        for u, v, w in g.iter_edges():
            writer.writerow([g.labels[u], g.labels[v], repr(w)])
    with open(nodes_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "kind"])
        for i, lab in enumerate(g.labels):
            writer.writerow([lab, NodeKind.FUND.value if g.kinds[i] == 0 else NodeKind.ASSET.value])


def load_graph(edges_path, nodes_path=None) -> BipartiteGraph:
    edges: list[tuple[str, str, float]] = []
    with open(edges_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["fund_id", "asset_isin", "weight_pct"]:
            raise CorruptFileError(f"{edges_path}: missing or wrong edge header")
        for row in reader:
            if len(row) != 3:
                raise CorruptFileError(f"{edges_path}: malformed edge row {row!r}")
            try:
                edges.append((row[0], row[1], float(row[2])))
            except ValueError:
                raise CorruptFileError(f"{edges_path}: bad weight in row {row!r}") from None
    g = _build_from_edges(edges)
    if nodes_path is not None:
        declared: dict[str, str] = {}
        with open(nodes_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["node_id", "kind"]:
                raise CorruptFileError(f"{nodes_path}: missing or wrong node header")
            for row in reader:
                if len(row) != 2 or row[1] not in ("fund", "asset"):
                    raise CorruptFileError(f"{nodes_path}: malformed node row {row!r}")
                declared[row[0]] = row[1]
        for i, lab in enumerate(g.labels):
            expect = "fund" if g.kinds[i] == 0 else "asset"
            if declared.get(lab) != expect:
                raise CorruptFileError(f"{nodes_path}: kind mismatch for {lab!r}")
        if len(declared) != g.n_nodes:
            raise CorruptFileError(f"{nodes_path}: node count mismatch")
    return g
