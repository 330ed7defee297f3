"""Command line interface.

Subcommands map to pipeline stages (ingest, synth, graph, walks, train,
eval, grid, similar, compare, cohesion, project, pipeline). Each writer
stage records a manifest keyed on its configuration and artifact hashes;
`pipeline` skips stages whose manifests are still fresh. Report stages
write delimited files and render matching figures next to them.

Exit codes: 0 success, 1 internal error, 2 input or configuration error,
3 failed query (e.g. unknown fund id).
"""

from __future__ import annotations

import argparse
import csv
import difflib
import json
import sys
import traceback

from . import evaluate, graph, ingest, plots, similarity, trainer, walker
from .config import RunConfig, load_config
from .errors import FundGraphError, ParameterError, VocabularyError
from .workspace import Workspace, file_hash

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_QUERY = 3


def _say(msg: str) -> None:
    print(msg)


def _require(ws: Workspace, *artifacts: str) -> None:
    for name in artifacts:
        if not ws.path(name).is_file():
            raise ParameterError(
                f"missing workspace artifact {ws.path(name)}; run the upstream stage first"
            )


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


def _load_graph(ws: Workspace) -> graph.BipartiteGraph:
    _require(ws, "graph_edges", "graph_nodes")
    return graph.load_graph(ws.path("graph_edges"), ws.path("graph_nodes"))


def _load_embedding(ws: Workspace) -> trainer.EmbeddingMatrix:
    _require(ws, "embedding")
    return trainer.load_embedding(ws.path("embedding"))


def _node_kinds(ws: Workspace) -> dict[str, str]:
    kinds: dict[str, str] = {}
    with open(ws.path("graph_nodes"), "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if len(row) == 2:
                kinds[row[0]] = row[1]
    return kinds


# --------------------------------------------------------------------------
# stage configuration subsets (what each manifest is keyed on)


def _ingest_config(cfg: RunConfig) -> dict:
    sub = {
        "source": cfg.source,
        "coverage_threshold": cfg.coverage_threshold,
        "validate_checksum": cfg.validate_checksum,
    }
    if cfg.source == "file":
        sub["holdings"] = cfg.holdings_path
        sub["format"] = cfg.holdings_format
        sub["holdings_sha"] = file_hash(cfg.holdings_path)
    else:
        s = cfg.synth
        sub["synth"] = {
            "n_funds": s.n_funds,
            "n_assets": s.n_assets,
            "n_communities": s.n_communities,
            "overlap": s.overlap,
            "holdings_per_fund": s.holdings_per_fund,
            "seed": cfg.seed,
        }
    return sub


def _walks_config(cfg: RunConfig) -> dict:
    wp = cfg.resolved_walk()
    return {"r": wp.r, "l": wp.l, "p": wp.p, "q": wp.q, "seed": wp.seed}


def _train_config(cfg: RunConfig) -> dict:
    tp = cfg.resolved_train()
    return {
        "d": tp.d,
        "window": tp.window,
        "negatives": tp.negatives,
        "epochs": tp.epochs,
        "lr_initial": tp.lr_initial,
        "lr_final": tp.lr_final,
        "seed": tp.seed,
        "workers": 1 if cfg.deterministic else cfg.workers,
    }


def _eval_config(cfg: RunConfig) -> dict:
    return {"k_min": cfg.k_min, "k_max": cfg.k_max, "beta": cfg.beta, "seed": cfg.seed}


def _compare_config(cfg: RunConfig) -> dict:
    return {"m_values": list(cfg.m_values)}


def _cohesion_config(cfg: RunConfig) -> dict:
    if not cfg.benchmarks_path:
        raise ParameterError("no [input] benchmarks file configured")
    return {"benchmarks": cfg.benchmarks_path, "benchmarks_sha": file_hash(cfg.benchmarks_path)}


# --------------------------------------------------------------------------
# stage runners


def stage_ingest(cfg: RunConfig, ws: Workspace) -> None:
    diagnostics: list[ingest.Diagnostic] = []
    if cfg.source == "file":
        parsed = ingest.parse_holdings(cfg.holdings_path, cfg.holdings_format)
        diagnostics.extend(parsed.diagnostics)
        edges = ingest.clean(
            parsed.holdings,
            cfg.coverage_threshold,
            validate_checksum=cfg.validate_checksum,
            diagnostics=diagnostics,
        )
    else:
        s = cfg.synth
        edges = ingest.generate_synthetic(
            s.n_funds, s.n_assets, s.n_communities, s.overlap, cfg.seed, s.holdings_per_fund
        )
    ingest.write_edge_csv(edges, ws.path("clean_edges"))
    ingest.write_diagnostics(diagnostics, ws.path("diagnostics"))
    _say(
        f"[ingest] {len(edges.edges)} edges, {edges.fund_count} funds, "
        f"{edges.asset_count} assets, {len(diagnostics)} dropped rows"
    )


def stage_graph(cfg: RunConfig, ws: Workspace) -> None:
    _require(ws, "clean_edges")
    parsed = ingest.parse_holdings(ws.path("clean_edges"), "edge-csv")
    g = graph.build([(h.fund_id, h.asset_isin, h.weight_pct) for h in parsed.holdings])
    g = graph.giant_component(g)
    graph.save_graph(g, ws.path("graph_edges"), ws.path("graph_nodes"))
    st = graph.stats(g)
    _write_csv(
        ws.path("graph_stats"),
        ["metric", "value"],
        [
            ["fund_count", st.fund_count],
            ["asset_count", st.asset_count],
            ["edge_count", st.edge_count],
            ["mean_fund_degree", _fmt(st.mean_fund_degree)],
            ["median_fund_degree", st.median_fund_degree],
            ["mean_asset_degree", _fmt(st.mean_asset_degree)],
            ["median_asset_degree", st.median_asset_degree],
        ],
    )
    _say(f"[graph] giant component: {st.fund_count} funds, {st.asset_count} assets, {st.edge_count} edges")


def stage_walks(cfg: RunConfig, ws: Workspace) -> None:
    g = _load_graph(ws)
    corpus = walker.generate_walks(g, cfg.resolved_walk(), workers=cfg.workers)
    walker.save_corpus(corpus, ws.path("corpus"))
    _say(f"[walks] {len(corpus.walks)} walks of {corpus.l + 1} nodes")


def stage_train(cfg: RunConfig, ws: Workspace) -> None:
    g = _load_graph(ws)
    _require(ws, "corpus")
    corpus = walker.load_corpus(ws.path("corpus"), graph=g)
    workers = 1 if cfg.deterministic else cfg.workers
    e = trainer.train(corpus, cfg.resolved_train(), workers=workers)
    trainer.save_embedding(e, ws.path("embedding"))
    _say(
        f"[train] {e.input_vectors.shape[0]} vectors of dimension {e.input_vectors.shape[1]}, "
        f"mean loss {e.epoch_losses[0]:.4f} -> {e.epoch_losses[-1]:.4f}"
    )


def stage_eval(cfg: RunConfig, ws: Workspace) -> None:
    g = _load_graph(ws)
    e = _load_embedding(ws)
    kinds = evaluate.kind_labels(g)
    sweep = evaluate.bipartiteness_sweep(
        e, kinds, (cfg.k_min, cfg.k_max), cfg.beta, seed=cfg.seed
    )
    _write_csv(
        ws.path("sweep"),
        ["k", "homogeneity", "completeness", "v_measure"],
        [[r.k, _fmt(r.homogeneity), _fmt(r.completeness), _fmt(r.v_measure)] for r in sweep.rows],
    )
    plots.plot_sweep(sweep.rows, ws.path("sweep_png"))

    assignment = evaluate.kmeans(e.input_vectors, sweep.best_k, seed=cfg.seed)
    truth = [kinds[lab] for lab in e.vocab.labels]
    comp = evaluate.cluster_composition(assignment, truth, e.vocab.labels)
    _write_csv(
        ws.path("composition"),
        ["cluster", "fund_count", "asset_count", "cluster_type"],
        [[r.cluster, r.fund_count, r.asset_count, r.cluster_type.value] for r in comp.rows],
    )
    mis_rows = [[lab, "fund"] for lab in comp.misclassified_funds]
    mis_rows += [[lab, "asset"] for lab in comp.misclassified_assets]
    _write_csv(ws.path("misclassified"), ["node_id", "kind"], mis_rows)
    _say(f"[eval] best K={sweep.best_k} with v-measure {sweep.best_v:.4f}")


def stage_compare(cfg: RunConfig, ws: Workspace) -> None:
    g = _load_graph(ws)
    e = _load_embedding(ws)
    report = similarity.overlap_distribution(g, e, cfg.m_values)
    _write_csv(
        ws.path("jaccard"),
        ["m", "mean", "median", "std"],
        [[m, _fmt(mean), _fmt(med), _fmt(std)] for m, mean, med, std in report.stats()],
    )
    plots.plot_jaccard(report, ws.path("jaccard_png"))

    scatter = similarity.cross_representation_scatter(g, e, workers=cfg.workers)
    _write_csv(
        ws.path("scatter"),
        ["fund_a", "fund_b", "cos_original", "cos_embedded"],
        [[a, b, _fmt(co), _fmt(ce)] for a, b, co, ce in scatter.rows()],
    )
    plots.plot_scatter(scatter, ws.path("scatter_png"))
    _say(f"[compare] pearson r = {scatter.pearson_r:.4f} over {len(scatter.cos_original)} pairs")


def _read_benchmarks(path) -> dict[str, list[str]]:
    benches: dict[str, list[str]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["benchmark_name", "fund_id"]:
            raise ParameterError(f"{path}: expected header benchmark_name,fund_id")
        for row in reader:
            if len(row) != 2 or not row[0] or not row[1]:
                raise ParameterError(f"{path}: malformed row {row!r}")
            benches.setdefault(row[0], []).append(row[1])
    if not benches:
        raise ParameterError(f"{path}: no benchmark members")
    return benches


def stage_cohesion(cfg: RunConfig, ws: Workspace) -> None:
    if not cfg.benchmarks_path:
        raise ParameterError("no [input] benchmarks file configured")
    g = _load_graph(ws)
    e = _load_embedding(ws)
    benches = _read_benchmarks(cfg.benchmarks_path)
    orig = similarity.original_representation(g)
    rows = []
    chart_rows = []
    for name in sorted(benches):
        members = benches[name]
        emb_stats = evaluate.benchmark_cohesion(e, members, funds=g.fund_labels())
        orig_stats = evaluate.benchmark_cohesion(orig, members)
        rows.append(
            [
                name,
                emb_stats.n_members,
                _fmt(emb_stats.mean_within),
                _fmt(emb_stats.std_within),
                _fmt(emb_stats.mean_outside),
                _fmt(emb_stats.std_outside),
                _fmt(orig_stats.mean_within),
                _fmt(orig_stats.std_within),
                _fmt(orig_stats.mean_outside),
                _fmt(orig_stats.std_outside),
            ]
        )
        chart_rows.append((name, "embedded", emb_stats))
        chart_rows.append((name, "original", orig_stats))
    _write_csv(
        ws.path("cohesion"),
        [
            "benchmark",
            "n_funds",
            "embedded_within_mean",
            "embedded_within_std",
            "embedded_outside_mean",
            "embedded_outside_std",
            "original_within_mean",
            "original_within_std",
            "original_outside_mean",
            "original_outside_std",
        ],
        rows,
    )
    plots.plot_cohesion(chart_rows, ws.path("cohesion_png"))
    _say(f"[cohesion] {len(benches)} benchmark(s) evaluated")


def stage_project(cfg: RunConfig, ws: Workspace) -> None:
    e = _load_embedding(ws)
    _require(ws, "graph_nodes")
    kinds = _node_kinds(ws)
    missing = [lab for lab in e.vocab.labels if lab not in kinds]
    if missing:
        raise VocabularyError(f"no kind known for node {missing[0]!r}")
    proj = similarity.pca_2d(e)
    _write_csv(
        ws.path("projection"),
        ["node_id", "kind", "x", "y"],
        [
            [lab, kinds[lab], _fmt(x), _fmt(y)]
            for lab, (x, y) in zip(proj.labels, proj.coords)
        ],
    )
    plots.plot_projection(proj, kinds, ws.path("projection_png"))
    _say(f"[project] {len(proj.labels)} nodes projected to 2 components")


# each stage: (config subset fn, input artifacts, output artifacts, runner)
PIPELINE_STAGES = [
    ("ingest", _ingest_config, [], ["clean_edges", "diagnostics"], stage_ingest),
    ("graph", lambda cfg: {}, ["clean_edges"], ["graph_edges", "graph_nodes", "graph_stats"], stage_graph),
    ("walks", _walks_config, ["graph_edges", "graph_nodes"], ["corpus"], stage_walks),
    ("train", _train_config, ["corpus"], ["embedding"], stage_train),
    (
        "eval",
        _eval_config,
        ["embedding", "graph_edges", "graph_nodes"],
        ["sweep", "composition", "misclassified"],
        stage_eval,
    ),
    (
        "compare",
        _compare_config,
        ["embedding", "graph_edges", "graph_nodes"],
        ["jaccard", "scatter"],
        stage_compare,
    ),
    (
        "cohesion",
        _cohesion_config,
        ["embedding", "graph_edges", "graph_nodes"],
        ["cohesion"],
        stage_cohesion,
    ),
    ("project", lambda cfg: {}, ["embedding", "graph_nodes"], ["projection"], stage_project),
]


def _run_stage(name: str, cfg: RunConfig, ws: Workspace) -> None:
    for stage_name, config_fn, inputs, outputs, runner in PIPELINE_STAGES:
        if stage_name == name:
            runner(cfg, ws)
            ws.record_stage(name, config_fn(cfg), inputs, outputs)
            return
    raise ParameterError(f"unknown stage {name!r}")


def cmd_stage(name: str):
    def handler(cfg: RunConfig, args) -> int:
        ws = Workspace(args.workspace)
        with ws.lock():
            _run_stage(name, cfg, ws)
        return EXIT_OK

    return handler


def cmd_synth(cfg: RunConfig, args) -> int:
    cfg.holdings_path = None  # force the synthetic source
    ws = Workspace(args.workspace)
    with ws.lock():
        _run_stage("ingest", cfg, ws)
    return EXIT_OK


def cmd_ingest(cfg: RunConfig, args) -> int:
    if args.input:
        cfg.holdings_path = args.input
    if args.format:
        cfg.holdings_format = args.format
    if not cfg.holdings_path:
        raise ParameterError("ingest needs a holdings file ([input] holdings or --input)")
    ws = Workspace(args.workspace)
    with ws.lock():
        _run_stage("ingest", cfg, ws)
    return EXIT_OK


def cmd_pipeline(cfg: RunConfig, args) -> int:
    ws = Workspace(args.workspace)
    with ws.lock():
        for name, config_fn, inputs, outputs, runner in PIPELINE_STAGES:
            if name == "cohesion" and not cfg.benchmarks_path:
                continue
            sub = config_fn(cfg)
            if ws.stage_fresh(name, sub, inputs, outputs):
                _say(f"[{name}] skipped (fresh)")
                continue
            runner(cfg, ws)
            ws.record_stage(name, sub, inputs, outputs)
    return EXIT_OK


def _grid_config(cfg: RunConfig) -> dict:
    return {
        "rows": cfg.grid_rows,
        "base_walks": _walks_config(cfg),
        "base_train": _train_config(cfg),
        "k_min": cfg.k_min,
        "k_max": cfg.k_max,
        "beta": cfg.beta,
    }


def _read_grid_progress(path, grid) -> dict[int, evaluate.GridRow]:
    completed: dict[int, evaluate.GridRow] = {}
    if not path.is_file():
        return completed
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        try:
            for row in reader:
                if len(row) != 9:
                    continue
                idx = int(row[0])
                if idx >= len(grid):
                    return {}
                wp, tp = grid[idx]
                stored = (int(row[1]), int(row[2]), int(row[3]), float(row[4]), float(row[5]))
                if stored != (tp.d, wp.l, wp.r, wp.p, wp.q):
                    return {}  # grid definition changed; discard stale progress
                optimal_k = int(row[6]) if row[6] else None
                v = float(row[7]) if row[7] else None
                err = row[8] or None
                completed[idx] = evaluate.GridRow(wp, tp, optimal_k, v, err)
        except ValueError:
            return {}  # unreadable progress; recompute everything
    return completed


def cmd_grid(cfg: RunConfig, args) -> int:
    if not cfg.grid_rows:
        raise ParameterError("grid needs [grid] rows in the config file")
    ws = Workspace(args.workspace)
    with ws.lock():
        g = _load_graph(ws)
        grid = cfg.grid()
        progress_path = ws.path("grid_progress")
        completed = {} if args.fresh else _read_grid_progress(progress_path, grid)
        if completed:
            _say(f"[grid] resuming: {len(completed)} of {len(grid)} rows already done")
            mode = "a"
        else:
            mode = "w"
        progress = open(progress_path, mode, encoding="utf-8", newline="")
        writer = csv.writer(progress, lineterminator="\n")
        if mode == "w":
            writer.writerow(["index", "d", "l", "r", "p", "q", "optimal_k", "v_measure", "error"])
            progress.flush()

        def on_row(idx: int, row: evaluate.GridRow) -> None:
            if idx in completed:
                return
            writer.writerow(
                [
                    idx,
                    row.train.d,
                    row.walk.l,
                    row.walk.r,
                    _fmt(row.walk.p),
                    _fmt(row.walk.q),
                    row.optimal_k if row.optimal_k is not None else "",
                    _fmt(row.v_measure) if row.v_measure is not None else "",
                    row.error or "",
                ]
            )
            progress.flush()
            _say(
                f"[grid] row {idx}: "
                + (f"v={row.v_measure:.4f} at K={row.optimal_k}" if row.error is None else f"failed: {row.error}")
            )

        try:
            workers = 1 if cfg.deterministic else cfg.workers
            result = evaluate.grid_search(
                g, grid, beta=cfg.beta, k_range=(cfg.k_min, cfg.k_max),
                workers=workers, completed=completed, on_row=on_row,
            )
        finally:
            progress.close()

        if result.best_index is not None and result.best_embedding is None:
            # the winning row came from a previous interrupted run; rebuild
            # its artifacts deterministically
            wp, tp = grid[result.best_index]
            corpus = walker.generate_walks(g, wp, workers=workers)
            best_embedding = trainer.train(corpus, tp, workers=1 if cfg.deterministic else workers)
            best_corpus = corpus
        else:
            best_embedding = result.best_embedding
            best_corpus = result.best_corpus

        _write_csv(
            ws.path("grid"),
            ["d", "l", "r", "p", "q", "optimal_k", "v_measure"],
            [
                [
                    row.train.d,
                    row.walk.l,
                    row.walk.r,
                    _fmt(row.walk.p),
                    _fmt(row.walk.q),
                    row.optimal_k if row.optimal_k is not None else "",
                    _fmt(row.v_measure) if row.v_measure is not None else "",
                ]
                for row in result.rows
            ],
        )
        plots.plot_grid(result.rows, result.best_index, ws.path("grid_png"))
        if result.best_index is not None:
            best = result.rows[result.best_index]
            ws.path("grid_best").write_text(
                json.dumps(
                    {
                        "index": result.best_index,
                        "d": best.train.d,
                        "l": best.walk.l,
                        "r": best.walk.r,
                        "p": best.walk.p,
                        "q": best.walk.q,
                        "optimal_k": best.optimal_k,
                        "v_measure": best.v_measure,
                    },
                    indent=2,
                )
                + "\n",
                encoding="utf-8",
            )
            walker.save_corpus(best_corpus, ws.path("grid_corpus"))
            trainer.save_embedding(best_embedding, ws.path("grid_embedding"))
            _say(
                f"[grid] best row {result.best_index}: d={best.train.d} l={best.walk.l} "
                f"r={best.walk.r} p={best.walk.p} q={best.walk.q} "
                f"-> v={best.v_measure:.4f} at K={best.optimal_k}"
            )
        else:
            _say("[grid] no row completed successfully")
        ws.record_stage(
            "grid",
            _grid_config(cfg),
            ["graph_edges", "graph_nodes"],
            ["grid", "grid_best", "grid_corpus", "grid_embedding"],
        )
    return EXIT_OK


def cmd_similar(cfg: RunConfig, args) -> int:
    ws = Workspace(args.workspace)
    g = _load_graph(ws)
    funds = g.fund_labels()
    if args.fund_id not in g.label_to_index or args.fund_id not in set(funds):
        hints = difflib.get_close_matches(args.fund_id, funds, n=3)
        msg = f"unknown fund {args.fund_id!r}"
        if hints:
            msg += f"; closest labels: {', '.join(hints)}"
        print(msg, file=sys.stderr)
        return EXIT_QUERY

    lines: list[str] = []

    def emit(rep_name: str, ranked) -> list[str]:
        lines.append(f"# representation={rep_name}")
        lines.append("rank,fund_id,cosine")
        for rank, (label, score) in enumerate(ranked, start=1):
            lines.append(f"{rank},{label},{score!r}")
        return [label for label, _s in ranked]

    results = {}
    if args.rep in ("original", "both"):
        rep = similarity.original_representation(g)
        results["original"] = emit("original", similarity.top_m(rep, args.fund_id, args.m))
    if args.rep in ("embedded", "both"):
        e = _load_embedding(ws)
        results["embedded"] = emit(
            "embedded", similarity.top_m(e, args.fund_id, args.m, funds=funds)
        )
    if args.rep == "both":
        overlap = similarity.jaccard(results["original"], results["embedded"])
        lines.append(f"# jaccard={overlap!r}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="INI config file")
    common.add_argument("--workspace", default="workspace", help="workspace directory")
    common.add_argument("--seed", type=int, default=None, help="override [run] seed")
    common.add_argument("--workers", type=int, default=None, help="override [run] workers")
    common.add_argument(
        "--deterministic",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="force single-worker training",
    )

    parser = argparse.ArgumentParser(
        prog="fundgraph",
        description="Embed fund-asset holdings graphs and report fund similarity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse and clean a holdings file")
    p.add_argument("--input", default=None, help="holdings file (overrides config)")
    p.add_argument("--format", default=None, choices=["edge-csv", "nport-xml-subset"])

    sub.add_parser("synth", parents=[common], help="generate a synthetic holdings dataset")
    sub.add_parser("graph", parents=[common], help="build the giant-component graph")
    sub.add_parser("walks", parents=[common], help="generate the walk corpus")
    sub.add_parser("train", parents=[common], help="train embeddings on the corpus")
    sub.add_parser("eval", parents=[common], help="K sweep, V-measure, cluster composition")

    p = sub.add_parser("grid", parents=[common], help="hyperparameter grid search")
    p.add_argument("--fresh", action="store_true", help="ignore existing grid progress")

    p = sub.add_parser("similar", parents=[common], help="most similar funds to a query")
    p.add_argument("fund_id")
    p.add_argument("-m", type=int, default=10, help="list length")
    p.add_argument("--rep", choices=["original", "embedded", "both"], default="embedded")
    p.add_argument("--out", default=None, help="also write the listing to this file")

    sub.add_parser("compare", parents=[common], help="top-m overlap and cosine scatter reports")
    sub.add_parser("cohesion", parents=[common], help="benchmark cohesion report")
    sub.add_parser("project", parents=[common], help="2-D projection of node vectors")
    sub.add_parser("pipeline", parents=[common], help="run all stages, skipping fresh ones")
    return parser


HANDLERS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "graph": cmd_stage("graph"),
    "walks": cmd_stage("walks"),
    "train": cmd_stage("train"),
    "eval": cmd_stage("eval"),
    "grid": cmd_grid,
    "similar": cmd_similar,
    "compare": cmd_stage("compare"),
    "cohesion": cmd_stage("cohesion"),
    "project": cmd_stage("project"),
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ParameterError("--seed must be non-negative")
            cfg.seed = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ParameterError("--workers must be >= 1")
            cfg.workers = args.workers
        if args.deterministic is not None:
            cfg.deterministic = args.deterministic
        return HANDLERS[args.command](cfg, args)
    except VocabularyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUERY if args.command == "similar" else EXIT_INPUT
    except (FundGraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
