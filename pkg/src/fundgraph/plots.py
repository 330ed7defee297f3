"""Figure rendering for report outputs; every chart lands next to its CSV."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

FUND_COLOR = "#1f6fb4"
ASSET_COLOR = "#d97818"


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows, path) -> None:
    """V-measure (and components) against the cluster count K."""
    ks = [r.k for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ks, [r.v_measure for r in rows], "o-", color=FUND_COLOR, label="v-measure")
    ax.plot(ks, [r.homogeneity for r in rows], "s--", color="#777777", label="homogeneity")
    ax.plot(ks, [r.completeness for r in rows], "d--", color="#bbbbbb", label="completeness")
    ax.set_xlabel("K")
    ax.set_ylabel("score")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    ax.set_title("Clustering vs node kinds")
    _finish(fig, path)


def plot_grid(rows, best_index, path) -> None:
    """Best V-measure per grid row, the winning row highlighted."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    xs = list(range(len(rows)))
    heights = [(r.v_measure if r.v_measure is not None else 0.0) for r in rows]
    colors = [FUND_COLOR if i == best_index else "#9db8d2" for i in xs]
    ax.bar(xs, heights, color=colors)
    ax.set_xticks(xs)
    ax.set_xticklabels(
        [f"d={r.train.d}\nl={r.walk.l},r={r.walk.r}\np={r.walk.p},q={r.walk.q}" for r in rows],
        fontsize=7,
    )
    ax.set_ylabel("best v-measure")
    ax.set_ylim(0, 1.05)
    ax.grid(axis="y", alpha=0.3)
    ax.set_title("Hyperparameter grid")
    _finish(fig, path)


def plot_jaccard(report, path) -> None:
    """Histogram of per-fund top-m overlap for each m."""
    ms = report.m_values
    cols = min(len(ms), 2)
    rows_n = (len(ms) + cols - 1) // cols
    fig, axes = plt.subplots(rows_n, cols, figsize=(4.0 * cols, 3.0 * rows_n), squeeze=False)
    for i, m in enumerate(ms):
        ax = axes[i // cols][i % cols]
        ax.hist(report.per_fund[m], bins=20, range=(0, 1), color=FUND_COLOR, alpha=0.85)
        ax.set_title(f"m = {m}")
        ax.set_xlabel("jaccard overlap")
        ax.set_ylabel("funds")
    for j in range(len(ms), rows_n * cols):
        axes[j // cols][j % cols].axis("off")
    _finish(fig, path)


def plot_scatter(report, path) -> None:
    """Original-space vs embedded cosine for every fund pair."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.scatter(report.cos_original, report.cos_embedded, s=4, alpha=0.3, color=FUND_COLOR)
    ax.set_xlabel("cosine (portfolio space)")
    ax.set_ylabel("cosine (embedding space)")
    ax.set_title(f"pearson r = {report.pearson_r:.4f}")
    ax.grid(alpha=0.3)
    _finish(fig, path)


def plot_cohesion(stats_rows, path) -> None:
    """Within vs outside mean cosine per benchmark and representation."""
    names = [f"{name}\n({rep})" for name, rep, _s in stats_rows]
    within = [s.mean_within for _n, _r, s in stats_rows]
    outside = [s.mean_outside for _n, _r, s in stats_rows]
    w_err = [s.std_within for _n, _r, s in stats_rows]
    o_err = [s.std_outside for _n, _r, s in stats_rows]
    x = range(len(names))
    fig, ax = plt.subplots(figsize=(1.6 * max(4, len(names)), 4.0))
    ax.bar([i - 0.2 for i in x], within, width=0.4, yerr=w_err, capsize=3,
           color=FUND_COLOR, label="within")
    ax.bar([i + 0.2 for i in x], outside, width=0.4, yerr=o_err, capsize=3,
           color="#9db8d2", label="outside")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, fontsize=8)
    ax.set_ylabel("mean cosine")
    ax.grid(axis="y", alpha=0.3)
    ax.legend()
    ax.set_title("Benchmark cohesion")
    _finish(fig, path)


def plot_projection(projection, kinds, path) -> None:
    """2-D projection of all node vectors colored by kind."""
    xs = projection.coords[:, 0]
    ys = projection.coords[:, 1]
    is_fund = [kinds[lab] == "fund" for lab in projection.labels]
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    fsel = [i for i, f in enumerate(is_fund) if f]
    asel = [i for i, f in enumerate(is_fund) if not f]
    ax.scatter(xs[asel], ys[asel], s=5, alpha=0.4, color=ASSET_COLOR, label="assets")
    ax.scatter(xs[fsel], ys[fsel], s=9, alpha=0.7, color=FUND_COLOR, label="funds")
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    ax.legend()
    ax.set_title("Node embedding projection")
    _finish(fig, path)
