"""Skip-gram training with negative sampling over walk corpora.

Loss per (center, context) pair with negatives n_1..n_k:

    -log sigmoid(u_ctx . v_cen) - sum_i log sigmoid(-u_ni . v_cen)

where v are input (center) vectors and u are output (context) vectors.
All gradients of a pair are evaluated at the pre-update parameters, then
applied with the current learning rate. Sigmoid inputs are clipped to
[-30, 30]. Negatives are drawn from the unigram distribution raised to
the 3/4 power; a drawn negative that equals the pair's context token is
skipped, so a token is never pushed down as noise in the same step that
pulls it up as the target. The learning rate decays linearly from
lr_initial to lr_final over the total pair count (all epochs). The
embedding consumed downstream is the input matrix.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    CorruptFileError,
    EmptyInputError,
    ParameterError,
    VocabularyError,
)
from .sampling import AliasTable
from .walker import WalkCorpus

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

_SIG_CLIP = 30.0
_INIT_STREAM = 0x1A
_NEG_STREAM = 0x2B


@dataclass(frozen=True)
class TrainParams:
    d: int = 16
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    lr_initial: float = 0.025
    lr_final: float = 1e-4
    seed: int = 7

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError(f"d must be >= 1, got {self.d}")
        if self.window < 1:
            raise ParameterError(f"window must be >= 1, got {self.window}")
        if self.negatives < 1:
            raise ParameterError(f"negatives must be >= 1, got {self.negatives}")
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if not 0 < self.lr_final <= self.lr_initial:
            raise ParameterError("need 0 < lr_final <= lr_initial")
        if self.seed < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")


@dataclass
class Vocab:
    """Corpus vocabulary ordered by frequency (desc), then label (asc)."""

    labels: list[str]
    counts: np.ndarray
    label_to_id: dict[str, int]

    def __len__(self) -> int:
        return len(self.labels)

    def id_of(self, label: str) -> int:
        try:
            return self.label_to_id[label]
        except KeyError:
            raise VocabularyError(f"label {label!r} not in vocabulary") from None


@dataclass
class EmbeddingMatrix:
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    vocab: Vocab
    params: TrainParams | None = None
    epoch_losses: list[float] = field(default_factory=list)

    def vector(self, label: str) -> np.ndarray:
        return self.input_vectors[self.vocab.id_of(label)]


def build_vocab(corpus: WalkCorpus) -> Vocab:
    counts: dict[str, int] = {}
    for walk in corpus.walks:
        for tok in walk:
            counts[tok] = counts.get(tok, 0) + 1
    if not counts:
        raise EmptyInputError("corpus has no tokens")
    ordered = sorted(counts, key=lambda t: (-counts[t], t))
    return Vocab(
        labels=ordered,
        counts=np.array([counts[t] for t in ordered], dtype=np.int64),
        label_to_id={t: i for i, t in enumerate(ordered)},
    )


def negative_sampler(vocab: Vocab) -> AliasTable:
    """Alias table over vocabulary ids with mass count^(3/4)."""
    return AliasTable(vocab.counts.astype(np.float64) ** 0.75)


def _sigmoid_clipped(x: float) -> float:
    if x > _SIG_CLIP:
        x = _SIG_CLIP
    elif x < -_SIG_CLIP:
        x = -_SIG_CLIP
    return 1.0 / (1.0 + math.exp(-x))


def sgns_step(
    center: int,
    context: int,
    negatives,
    lr: float,
    input_vectors: np.ndarray,
    output_vectors: np.ndarray,
) -> float:
    """One gradient step on a single pair; returns the pre-update loss."""
    n = input_vectors.shape[0]
    if not 0 <= center < n:
        raise VocabularyError(f"center id {center} out of range")
    if not 0 <= context < n:
        raise VocabularyError(f"context id {context} out of range")
    negs = np.asarray(negatives, dtype=np.int64)
    if negs.size and (negs.min() < 0 or negs.max() >= n):
        raise VocabularyError("negative sample id out of range")
    if lr < 0:
        raise ParameterError(f"lr must be non-negative, got {lr}")

    v = input_vectors[center]
    s_pos = _sigmoid_clipped(float(np.dot(output_vectors[context], v)))
    loss = -math.log(s_pos)
    dv = (s_pos - 1.0) * output_vectors[context]
    if negs.size:
        dots = output_vectors[negs] @ v
        s_neg = np.array([_sigmoid_clipped(float(x)) for x in dots])
        loss -= sum(math.log(_sigmoid_clipped(float(-x))) for x in dots)
        dv += s_neg @ output_vectors[negs]
    output_vectors[context] -= lr * (s_pos - 1.0) * v
    if negs.size:
        np.add.at(output_vectors, negs, -lr * np.outer(s_neg, v))
    input_vectors[center] -= lr * dv
    return loss


if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _walk_kernel(tokens, in_vecs, out_vecs, window, k_neg, negs, lr0, lr1, t_start, total_pairs):
        d = in_vecs.shape[1]
        L = tokens.shape[0]
        dv = np.empty(d, dtype=np.float64)
        sg = np.empty(max(k_neg, 1), dtype=np.float64)
        loss_sum = 0.0
        t = t_start
        ni = 0
        for i in range(L):
            c = tokens[i]
            lo = i - window
            if lo < 0:
                lo = 0
            hi = i + window
            if hi > L - 1:
                hi = L - 1
            for j in range(lo, hi + 1):
                if j == i:
                    continue
                ctx = tokens[j]
                lr = lr0 + (lr1 - lr0) * (t / total_pairs)
                dot = 0.0
                for a in range(d):
                    dot += out_vecs[ctx, a] * in_vecs[c, a]
                x = dot
                if x > _SIG_CLIP:
                    x = _SIG_CLIP
                elif x < -_SIG_CLIP:
                    x = -_SIG_CLIP
                s_pos = 1.0 / (1.0 + math.exp(-x))
                loss = -math.log(s_pos)
                for a in range(d):
                    dv[a] = (s_pos - 1.0) * out_vecs[ctx, a]
                for k in range(k_neg):
                    tid = negs[ni + k]
                    if tid == ctx:
                        sg[k] = -1.0  # drawn negative collides with the positive target
                        continue
                    dotn = 0.0
                    for a in range(d):
                        dotn += out_vecs[tid, a] * in_vecs[c, a]
                    xn = dotn
                    if xn > _SIG_CLIP:
                        xn = _SIG_CLIP
                    elif xn < -_SIG_CLIP:
                        xn = -_SIG_CLIP
                    sn = 1.0 / (1.0 + math.exp(-xn))
                    sg[k] = sn
                    xm = -dotn
                    if xm > _SIG_CLIP:
                        xm = _SIG_CLIP
                    elif xm < -_SIG_CLIP:
                        xm = -_SIG_CLIP
                    loss -= math.log(1.0 / (1.0 + math.exp(-xm)))
                    for a in range(d):
                        dv[a] += sn * out_vecs[tid, a]
                for a in range(d):
                    out_vecs[ctx, a] -= lr * (s_pos - 1.0) * in_vecs[c, a]
                for k in range(k_neg):
                    if sg[k] < 0.0:
                        continue
                    tid = negs[ni + k]
                    for a in range(d):
                        out_vecs[tid, a] -= lr * sg[k] * in_vecs[c, a]
                for a in range(d):
                    in_vecs[c, a] -= lr * dv[a]
                loss_sum += loss
                t += 1
                ni += k_neg
        return loss_sum


def _pairs_in_walk(length: int, window: int) -> int:
    total = 0
    for i in range(length):
        total += min(i + window, length - 1) - max(i - window, 0)
    return total


def _walk_python(tokens, in_vecs, out_vecs, window, k_neg, negs, lr0, lr1, t_start, total_pairs):
    # reference path: same pair order and math as the jitted kernel
    L = tokens.shape[0]
    loss_sum = 0.0
    t = t_start
    ni = 0
    for i in range(L):
        lo = max(i - window, 0)
        hi = min(i + window, L - 1)
        for j in range(lo, hi + 1):
            if j == i:
                continue
            lr = lr0 + (lr1 - lr0) * (t / total_pairs)
            ctx = int(tokens[j])
            block = [int(x) for x in negs[ni : ni + k_neg] if int(x) != ctx]
            loss_sum += sgns_step(int(tokens[i]), ctx, block, lr, in_vecs, out_vecs)
            t += 1
            ni += k_neg
    return loss_sum


def train(
    corpus: WalkCorpus,
    params: TrainParams,
    workers: int = 1,
    use_jit: bool = True,
) -> EmbeddingMatrix:
    """Train skip-gram embeddings over the corpus.

    With workers == 1 the result is deterministic for a fixed seed. With
    more workers, walk shards update the shared matrices concurrently and
    only statistical properties are reproducible.
    """
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    vocab = build_vocab(corpus)
    longest = max(len(w) for w in corpus.walks)
    if params.window >= longest:
        warnings.warn(
            f"window {params.window} spans beyond the longest walk ({longest} nodes)",
            stacklevel=2,
        )

    d = params.d
    init_rng = np.random.default_rng(np.random.SeedSequence((params.seed, _INIT_STREAM)))
    in_vecs = (init_rng.random((len(vocab), d)) - 0.5) / d
    out_vecs = np.zeros((len(vocab), d), dtype=np.float64)

    token_walks = [
        np.array([vocab.label_to_id[t] for t in walk], dtype=np.int64) for walk in corpus.walks
    ]
    pair_counts = [_pairs_in_walk(len(w), params.window) for w in corpus.walks]
    pairs_per_epoch = sum(pair_counts)
    if pairs_per_epoch == 0:
        raise EmptyInputError("corpus yields no training pairs")
    total_pairs = params.epochs * pairs_per_epoch
    table = negative_sampler(vocab)
    kernel = _walk_kernel if (use_jit and _HAVE_NUMBA) else _walk_python

    epoch_losses: list[float] = []
    if workers == 1:
        neg_rng = np.random.default_rng(np.random.SeedSequence((params.seed, _NEG_STREAM)))
        t = 0
        for _epoch in range(params.epochs):
            loss_sum = 0.0
            for tokens, n_pairs in zip(token_walks, pair_counts):
                negs = table.sample_many(neg_rng, n_pairs * params.negatives)
                loss_sum += kernel(
                    tokens, in_vecs, out_vecs, params.window, params.negatives,
                    negs, params.lr_initial, params.lr_final, t, total_pairs,
                )
                t += n_pairs
            epoch_losses.append(loss_sum / pairs_per_epoch)
    else:
        from concurrent.futures import ThreadPoolExecutor

        shards = [list(range(w, len(token_walks), workers)) for w in range(workers)]
        shared_t = [0]
        for _epoch in range(params.epochs):
            losses = [0.0] * workers

            def run_shard(wid: int) -> None:
                rng = np.random.default_rng(
                    np.random.SeedSequence((params.seed, _NEG_STREAM, wid))
                )
                acc = 0.0
                for wi in shards[wid]:
                    tokens = token_walks[wi]
                    n_pairs = pair_counts[wi]
                    negs = table.sample_many(rng, n_pairs * params.negatives)
                    t_here = shared_t[0]
                    acc += kernel(
                        tokens, in_vecs, out_vecs, params.window, params.negatives,
                        negs, params.lr_initial, params.lr_final, t_here, total_pairs,
                    )
                    shared_t[0] = min(shared_t[0] + n_pairs, total_pairs - 1)
                losses[wid] = acc

            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(run_shard, range(workers)))
            epoch_losses.append(sum(losses) / pairs_per_epoch)

    return EmbeddingMatrix(
        input_vectors=in_vecs,
        output_vectors=out_vecs,
        vocab=vocab,
        params=params,
        epoch_losses=epoch_losses,
    )


def save_embedding(e: EmbeddingMatrix, path) -> None:
    """Write '<n> <d>' then one '<label> <v1> ... <vd>' row per node.

    Values use 17 significant digits so float64 round-trips bit-exactly.
    An #output section carries the context matrix for checkpointing and a
    #params line records the training configuration.
    """
    n, d = e.input_vectors.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n} {d}\n")
        for i, label in enumerate(e.vocab.labels):
            row = " ".join(f"{x:.17g}" for x in e.input_vectors[i])
            fh.write(f"{label} {row}\n")
        fh.write("#output\n")
        for i, label in enumerate(e.vocab.labels):
            row = " ".join(f"{x:.17g}" for x in e.output_vectors[i])
            fh.write(f"{label} {row}\n")
        if e.params is not None:
            fh.write("#params " + json.dumps(asdict(e.params), sort_keys=True) + "\n")


def _read_rows(lines, n: int, d: int, path) -> tuple[list[str], np.ndarray]:
    labels: list[str] = []
    mat = np.empty((n, d), dtype=np.float64)
    for k in range(n):
        try:
            line = next(lines)
        except StopIteration:
            raise CorruptFileError(f"{path}: expected {n} rows, found {k}") from None
        parts = line.split()
        if len(parts) != d + 1:
            raise CorruptFileError(f"{path}: row {k + 1} has {len(parts) - 1} values, expected {d}")
        labels.append(parts[0])
        try:
            mat[k] = [float(x) for x in parts[1:]]
        except ValueError:
            raise CorruptFileError(f"{path}: non-numeric value in row {k + 1}") from None
    return labels, mat


def load_embedding(path) -> EmbeddingMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        lines = (line.rstrip("\n") for line in fh)
        header = next(lines, None)
        if header is None:
            raise CorruptFileError(f"{path}: empty embedding file")
        parts = header.split()
        try:
            n, d = int(parts[0]), int(parts[1])
        except (IndexError, ValueError):
            raise CorruptFileError(f"{path}: bad header {header!r}") from None
        if n < 1 or d < 1:
            raise CorruptFileError(f"{path}: bad dimensions {n} x {d}")
        labels, in_vecs = _read_rows(lines, n, d, path)
        out_vecs = np.zeros((n, d), dtype=np.float64)
        params = None
        marker = next(lines, None)
        if marker == "#output":
            out_labels, out_vecs = _read_rows(lines, n, d, path)
            if out_labels != labels:
                raise CorruptFileError(f"{path}: output section labels disagree")
            marker = next(lines, None)
        if marker is not None and marker.startswith("#params "):
            try:
                params = TrainParams(**json.loads(marker[len("#params ") :]))
            except (json.JSONDecodeError, TypeError) as exc:
                raise CorruptFileError(f"{path}: bad params line: {exc}") from None
            marker = next(lines, None)
        if marker is not None and marker.strip():
            raise CorruptFileError(f"{path}: trailing content {marker!r}")
    if len(set(labels)) != len(labels):
        raise CorruptFileError(f"{path}: duplicate labels")
    vocab = Vocab(
        labels=labels,
        counts=np.zeros(len(labels), dtype=np.int64),
        label_to_id={t: i for i, t in enumerate(labels)},
    )
    return EmbeddingMatrix(in_vecs, out_vecs, vocab, params=params)
