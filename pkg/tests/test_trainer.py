"""Skip-gram trainer: gradients, vocab, determinism, persistence."""

import math
import warnings
from collections import Counter
from dataclasses import replace

import numpy as np
import pytest

from fundgraph.errors import (
    CorruptFileError,
    EmptyInputError,
    ParameterError,
    VocabularyError,
)
from fundgraph.ingest import generate_synthetic
from fundgraph.trainer import (
    _HAVE_NUMBA,
    TrainParams,
    _pairs_in_walk,
    build_vocab,
    load_embedding,
    negative_sampler,
    save_embedding,
    sgns_step,
    train,
)
from fundgraph.walker import WalkCorpus, WalkParams, generate_walks

from conftest import make_graph

LN2 = math.log(2.0)


def _corpus(walks):
    return WalkCorpus(walks=walks, r=1, l=1, p=1.0, q=1.0, graph_fingerprint="test")


def _small_community_corpus():
    clean = generate_synthetic(20, 30, 2, 0.1, seed=7, holdings_per_fund=6)
    g = make_graph(clean.edges)
    return generate_walks(g, WalkParams(r=4, l=10, p=0.1, q=5.0, seed=7))


class TestTrainParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"d": 0},
            {"window": 0},
            {"negatives": 0},
            {"epochs": 0},
            {"lr_initial": 0.0},
            {"lr_final": 0.0},
            {"lr_initial": 0.01, "lr_final": 0.02},
            {"seed": -1},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ParameterError):
            TrainParams(**kwargs)

    def test_defaults_valid(self):
        p = TrainParams()
        assert p.d == 16 and p.negatives == 5


class TestBuildVocab:
    def test_counts_tokens(self):
        vocab = build_vocab(_corpus([["F1", "A1", "F1"]]))
        assert vocab.labels == ["F1", "A1"]
        assert vocab.counts.tolist() == [2, 1]
        assert vocab.id_of("A1") == 1

    def test_frequency_then_label_order(self):
        vocab = build_vocab(_corpus([["B", "A", "A", "C", "C"]]))
        assert vocab.labels == ["A", "C", "B"]

    def test_matches_counter_oracle(self):
        rng = np.random.default_rng(3)
        alphabet = [f"T{i}" for i in range(12)]
        for _case in range(40):
            walks = [
                [alphabet[int(x)] for x in rng.integers(0, 12, size=rng.integers(1, 15))]
                for _ in range(int(rng.integers(1, 6)))
            ]
            counter = Counter(tok for walk in walks for tok in walk)
            vocab = build_vocab(_corpus(walks))
            assert vocab.labels == sorted(counter, key=lambda t: (-counter[t], t))
            assert {t: int(vocab.counts[i]) for i, t in enumerate(vocab.labels)} == dict(counter)

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyInputError):
            build_vocab(_corpus([]))
        with pytest.raises(EmptyInputError):
            build_vocab(_corpus([[]]))

    def test_unknown_label_lookup(self):
        vocab = build_vocab(_corpus([["F1", "A1"]]))
        with pytest.raises(VocabularyError):
            vocab.id_of("ZZ")


class TestNegativeSampler:
    def test_probabilities_are_smoothed_unigram(self):
        vocab = build_vocab(_corpus([["A"] * 16 + ["B"] * 4 + ["C"] * 1]))
        table = negative_sampler(vocab)
        mass = vocab.counts.astype(float) ** 0.75
        np.testing.assert_allclose(table.probabilities(), mass / mass.sum(), atol=1e-12)

    def test_draw_frequencies(self):
        vocab = build_vocab(_corpus([["A"] * 8 + ["B"] * 2 + ["C"] * 1]))
        table = negative_sampler(vocab)
        rng = np.random.default_rng(5)
        draws = table.sample_many(rng, 200_000)
        freq = np.bincount(draws, minlength=3) / 200_000
        np.testing.assert_allclose(freq, table.probabilities(), atol=0.01)


def _reference_pair_loss(in_vecs, out_vecs, center, context, negs):
    # independent loss: numpy sigmoid with the same +/-30 clipping
    def sig(x):
        return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))

    v = in_vecs[center]
    loss = -np.log(sig(out_vecs[context] @ v))
    for t in negs:
        loss -= np.log(sig(-(out_vecs[t] @ v)))
    return float(loss)


class TestSgnsStep:
    def test_zero_vectors_loss(self):
        """All-zero parameters give -log(1/2) per term."""
        in_vecs = np.zeros((4, 6))
        out_vecs = np.zeros((4, 6))
        loss = sgns_step(0, 1, [], 0.1, in_vecs, out_vecs)
        assert loss == pytest.approx(LN2, abs=1e-15)
        loss = sgns_step(0, 1, [2, 3, 2], 0.1, in_vecs, out_vecs)
        assert loss == pytest.approx(4 * LN2, abs=1e-15)
        assert not in_vecs.any() and not out_vecs.any()

    def test_returns_pre_update_loss(self):
        rng = np.random.default_rng(0)
        in_vecs = rng.normal(0, 0.1, (5, 4))
        out_vecs = rng.normal(0, 0.1, (5, 4))
        before = _reference_pair_loss(in_vecs, out_vecs, 0, 1, [2, 3])
        got = sgns_step(0, 1, [2, 3], 0.05, in_vecs, out_vecs)
        assert got == pytest.approx(before, rel=1e-12)

    def test_step_reduces_loss(self):
        rng = np.random.default_rng(1)
        in_vecs = rng.normal(0, 0.1, (6, 8))
        out_vecs = rng.normal(0, 0.1, (6, 8))
        first = sgns_step(2, 4, [0, 1, 5], 0.2, in_vecs, out_vecs)
        second = _reference_pair_loss(in_vecs, out_vecs, 2, 4, [0, 1, 5])
        assert second < first

    def test_gradients_match_finite_differences(self):
        """Central finite differences agree with the applied update.

        With lr=1 the parameter delta equals the negative gradient, so the
        update itself is checked against an independent numpy loss.
        """
        rng = np.random.default_rng(42)
        h = 1e-5
        for _case in range(30):
            n = int(rng.integers(4, 9))
            d = int(rng.integers(2, 9))
            k = int(rng.integers(1, 5))
            center = int(rng.integers(0, n))
            context = int(rng.integers(0, n))
            while context == center:
                context = int(rng.integers(0, n))
            pool = [i for i in range(n) if i != context]
            negs = [int(x) for x in rng.choice(pool, size=k, replace=True)]
            in_vecs = rng.normal(0, 0.1, (n, d))
            out_vecs = rng.normal(0, 0.1, (n, d))

            in_before, out_before = in_vecs.copy(), out_vecs.copy()
            sgns_step(center, context, negs, 1.0, in_vecs, out_vecs)
            grad_in = in_before[center] - in_vecs[center]
            grad_out = {row: out_before[row] - out_vecs[row] for row in {context, *negs}}

            def fd_grad(matrix_name, row):
                grad = np.zeros(d)
                for a in range(d):
                    for sign in (1.0, -1.0):
                        i_m, o_m = in_before.copy(), out_before.copy()
                        (i_m if matrix_name == "in" else o_m)[row, a] += sign * h
                        val = _reference_pair_loss(i_m, o_m, center, context, negs)
                        grad[a] += sign * val
                return grad / (2 * h)

            def check(fd, analytic):
                denom = max(np.linalg.norm(fd), np.linalg.norm(analytic), 1e-8)
                assert np.linalg.norm(fd - analytic) / denom <= 1e-6

            check(fd_grad("in", center), grad_in)
            for row, analytic in grad_out.items():
                check(fd_grad("out", row), analytic)

    def test_duplicate_negatives_accumulate(self):
        """A row drawn twice as a negative takes both its updates."""
        rng = np.random.default_rng(9)
        base_in = rng.normal(0, 0.1, (4, 3))
        base_out = rng.normal(0, 0.1, (4, 3))

        in_a, out_a = base_in.copy(), base_out.copy()
        sgns_step(0, 1, [2, 2], 1.0, in_a, out_a)
        in_b, out_b = base_in.copy(), base_out.copy()
        sgns_step(0, 1, [2], 1.0, in_b, out_b)
        delta_a = base_out[2] - out_a[2]
        delta_b = base_out[2] - out_b[2]
        np.testing.assert_allclose(delta_a, 2 * delta_b, rtol=1e-12)

    def test_id_range_validation(self):
        m = np.zeros((3, 2))
        with pytest.raises(VocabularyError):
            sgns_step(-1, 1, [], 0.1, m, m.copy())
        with pytest.raises(VocabularyError):
            sgns_step(0, 3, [], 0.1, m, m.copy())
        with pytest.raises(VocabularyError):
            sgns_step(0, 1, [5], 0.1, m, m.copy())

    def test_negative_lr_rejected(self):
        m = np.zeros((3, 2))
        with pytest.raises(ParameterError):
            sgns_step(0, 1, [], -0.1, m, m.copy())


class TestPairCounting:
    def test_matches_brute_force(self):
        def brute(length, window):
            total = 0
            for i in range(length):
                for j in range(max(0, i - window), min(i + window, length - 1) + 1):
                    if j != i:
                        total += 1
            return total

        for length in range(1, 21):
            for window in range(1, 11):
                assert _pairs_in_walk(length, window) == brute(length, window)


class TestTrain:
    def test_shapes_and_metadata(self, default_train_params):
        corpus = _corpus([["F1", "A1", "F2", "A1"], ["F2", "A2", "F1", "A2"]])
        emb = train(corpus, default_train_params)
        n = 4
        assert emb.input_vectors.shape == (n, default_train_params.d)
        assert emb.output_vectors.shape == (n, default_train_params.d)
        assert len(emb.epoch_losses) == default_train_params.epochs
        assert all(math.isfinite(x) for x in emb.epoch_losses)
        assert emb.params == default_train_params

    def test_deterministic_single_worker(self, default_train_params):
        corpus = _corpus([["F1", "A1", "F2", "A1"], ["F2", "A2", "F1", "A2"]])
        a = train(corpus, default_train_params)
        b = train(corpus, default_train_params)
        assert np.array_equal(a.input_vectors, b.input_vectors)
        assert np.array_equal(a.output_vectors, b.output_vectors)
        assert a.epoch_losses == b.epoch_losses

    def test_seed_changes_output(self, default_train_params):
        corpus = _corpus([["F1", "A1", "F2", "A1"], ["F2", "A2", "F1", "A2"]])
        a = train(corpus, default_train_params)
        b = train(corpus, replace(default_train_params, seed=8))
        assert not np.array_equal(a.input_vectors, b.input_vectors)

    @pytest.mark.skipif(not _HAVE_NUMBA, reason="jit kernel unavailable")
    def test_jit_and_python_paths_agree(self, default_train_params):
        corpus = _corpus(
            [["F1", "A1", "F2", "A1", "F1"], ["F2", "A2", "F1", "A2", "F2"]] * 3
        )
        fast = train(corpus, default_train_params, use_jit=True)
        slow = train(corpus, default_train_params, use_jit=False)
        np.testing.assert_allclose(fast.input_vectors, slow.input_vectors, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(fast.output_vectors, slow.output_vectors, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(fast.epoch_losses, slow.epoch_losses, rtol=1e-7)

    def test_mean_epoch_loss_drops_across_seeds(self):
        """Final epoch mean loss <= first epoch mean, majority of 5 seeds."""
        corpus = _small_community_corpus()
        wins = 0
        for seed in range(7, 12):
            emb = train(corpus, TrainParams(d=8, window=5, epochs=5, seed=seed))
            wins += emb.epoch_losses[-1] <= emb.epoch_losses[0]
        assert wins >= 3

    def test_single_token_corpus_trains(self):
        # every drawn negative collides with the context and is skipped,
        # leaving pure positive-pair updates
        corpus = _corpus([["F1", "F1", "F1", "F1"]])
        emb = train(corpus, TrainParams(d=4, window=1, epochs=2, seed=1))
        assert np.isfinite(emb.input_vectors).all()
        assert all(math.isfinite(x) for x in emb.epoch_losses)

    def test_window_spanning_walk_warns(self):
        corpus = _corpus([["F1", "A1", "F2"]])
        with pytest.warns(UserWarning, match="window"):
            train(corpus, TrainParams(d=4, window=5, epochs=1, seed=1))

    def test_no_pairs_rejected(self):
        corpus = _corpus([["F1"], ["A1"]])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(EmptyInputError):
                train(corpus, TrainParams(d=4, window=2, epochs=1))

    def test_bad_worker_count(self, default_train_params):
        with pytest.raises(ParameterError):
            train(_corpus([["F1", "A1"]]), default_train_params, workers=0)

    def test_multi_worker_smoke(self, default_train_params):
        corpus = _corpus([["F1", "A1", "F2", "A2"]] * 6)
        emb = train(corpus, default_train_params, workers=3)
        assert emb.input_vectors.shape == (4, default_train_params.d)
        assert np.isfinite(emb.input_vectors).all()
        assert len(emb.epoch_losses) == default_train_params.epochs

    def test_vector_lookup(self, default_train_params):
        corpus = _corpus([["F1", "A1", "F1", "A2"]])
        emb = train(corpus, default_train_params)
        np.testing.assert_array_equal(emb.vector("F1"), emb.input_vectors[emb.vocab.id_of("F1")])
        with pytest.raises(VocabularyError):
            emb.vector("NOPE")


class TestEmbeddingFile:
    def _trained(self):
        corpus = _corpus([["F1", "A1", "F2", "A1"], ["F2", "A2", "F1", "A2"]])
        return train(corpus, TrainParams(d=3, window=2, epochs=2, seed=7))

    def test_roundtrip_bit_exact(self, tmp_path):
        emb = self._trained()
        path = tmp_path / "emb.txt"
        save_embedding(emb, path)
        back = load_embedding(path)
        assert back.vocab.labels == emb.vocab.labels
        assert np.array_equal(back.input_vectors, emb.input_vectors)
        assert np.array_equal(back.output_vectors, emb.output_vectors)
        assert back.params == emb.params

    def test_header_counts(self, tmp_path):
        emb = self._trained()
        path = tmp_path / "emb.txt"
        save_embedding(emb, path)
        first = path.read_text(encoding="utf-8").splitlines()[0]
        assert first == f"{len(emb.vocab)} {emb.params.d}"

    def test_plain_matrix_file_loads(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 2\nA 1.5 2.0\nB -3.0 0.25\n", encoding="utf-8")
        emb = load_embedding(path)
        assert emb.vocab.labels == ["A", "B"]
        np.testing.assert_array_equal(emb.input_vectors, [[1.5, 2.0], [-3.0, 0.25]])
        assert emb.params is None
        assert not emb.output_vectors.any()

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "not a header\n",
            "0 4\n",
            "2 2\nA 1 2\n",
            "1 3\nA 1 2\n",
            "1 2\nA 1 x\n",
            "2 2\nA 1 2\nA 3 4\n",
            "1 2\nA 1 2\n#output\nB 1 2\n",
            "1 2\nA 1 2\n#params {not json\n",
            "1 2\nA 1 2\ntrailing junk\n",
        ],
        ids=[
            "empty",
            "bad-header",
            "zero-rows",
            "missing-row",
            "short-row",
            "non-numeric",
            "duplicate-label",
            "output-label-mismatch",
            "bad-params",
            "trailing-content",
        ],
    )
    def test_corrupt_files_rejected(self, tmp_path, text):
        path = tmp_path / "emb.txt"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(CorruptFileError):
            load_embedding(path)
