"""Weighted bipartite fund-asset graphs, random-walk embeddings, and
similarity reporting."""

from .errors import (
    ContractViolationError,
    CorruptFileError,
    DegenerateVectorError,
    DegreeError,
    EmptyGraphError,
    EmptyInputError,
    FundGraphError,
    ParameterError,
    StaleCorpusError,
    UndefinedCorrelationError,
    UndefinedInputError,
    VocabularyError,
    WorkspaceLockError,
)
from .evaluate import (
    ClusterAssignment,
    ClusterType,
    CohesionStats,
    GridResult,
    GridRow,
    SweepResult,
    VMeasureResult,
    benchmark_cohesion,
    bipartiteness_sweep,
    cluster_composition,
    grid_search,
    kind_labels,
    kmeans,
    v_measure,
)
from .graph import (
    BipartiteGraph,
    GraphStats,
    NodeId,
    NodeKind,
    build,
    component_sizes,
    giant_component,
    load_graph,
    sample_neighbor,
    save_graph,
    stats,
)
from .ingest import (
    CleanEdgeList,
    Diagnostic,
    RawHolding,
    clean,
    generate_synthetic,
    isin_check_digit,
    isin_checksum_ok,
    isin_structure_ok,
    parse_holdings,
    write_edge_csv,
)
from .similarity import (
    OriginalRepresentation,
    OverlapReport,
    Projection,
    ScatterReport,
    cosine,
    cross_representation_scatter,
    jaccard,
    original_representation,
    overlap_distribution,
    pca_2d,
    pearson,
    top_m,
)
from .trainer import (
    EmbeddingMatrix,
    TrainParams,
    Vocab,
    build_vocab,
    load_embedding,
    negative_sampler,
    save_embedding,
    sgns_step,
    train,
)
from .walker import (
    WalkCorpus,
    WalkParams,
    generate_walks,
    load_corpus,
    save_corpus,
    transition_weights,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
