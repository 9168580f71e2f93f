import logging
import math
import random
import statistics

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reviewminer.sentiment import (
    LABELS,
    RatingStats,
    SentimentLabel as L,
    ValenceLexicon,
    auto_label,
    compound_score,
    compound_to_label,
    evaluate,
    label_proportions,
    nb_fit,
    nb_predict,
    polarity_score,
    polarity_to_label,
    rating_stats,
    split_by_sentiment,
    split_train_test,
)

NEG, NEU, POS = L.NEGATIVE, L.NEUTRAL, L.POSITIVE


class TestRatingStats:
    def test_hand_values(self):
        assert rating_stats([1, 5]) == RatingStats(3.0, 2.0)

    def test_constant_ratings(self, caplog):
        with caplog.at_level(logging.WARNING):
            stats = rating_stats([4, 4, 4])
        assert stats.sd == 0 and "neutral" in caplog.text
        assert {auto_label(4, stats)} == {NEU}

    def test_two_pass_oracle(self):
        rng = random.Random(1)
        ratings = [rng.randint(1, 5) for _ in range(1000)]
        mean = sum(ratings) / len(ratings)
        sd = math.sqrt(sum((r - mean) ** 2 for r in ratings) / len(ratings))
        stats = rating_stats(ratings)
        assert abs(stats.mean - mean) <= 1e-12 and abs(stats.sd - sd) <= 1e-12

    def test_too_few(self):
        with pytest.raises(ValueError):
            rating_stats([3])


class TestAutoLabel:
    def test_examples(self):
        assert auto_label(5, RatingStats(2.55, 1.5)) is POS
        assert auto_label(4, RatingStats(3.0, 1.0)) is POS
        assert auto_label(3, RatingStats(3.0, 1.0)) is NEU
        assert auto_label(2, RatingStats(3.0, 1.0)) is NEG

    @given(st.floats(1, 5), st.floats(0.01, 2))
    def test_monotone(self, mean, sd):
        stats = RatingStats(mean, sd)
        order = [LABELS.index(auto_label(r, stats)) for r in range(1, 6)]
        assert order == sorted(order)


class TestLabelRules:
    def test_thirds(self):
        assert polarity_to_label(-1 / 3) is NEG
        assert polarity_to_label(1 / 3) is POS
        assert polarity_to_label(0) is NEU
        assert polarity_to_label(0.34) is POS
        assert polarity_to_label(math.nextafter(-1 / 3, 0)) is NEU

    def test_compound(self):
        assert compound_to_label(0.05) is NEU
        assert compound_to_label(-0.05) is NEU
        assert compound_to_label(-0.2) is NEG
        assert compound_to_label(0.0500001) is POS
        assert compound_to_label(0.15, threshold=0.2) is NEU

    @given(st.floats(-1, 1), st.floats(-1, 1))
    def test_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert LABELS.index(polarity_to_label(lo)) <= LABELS.index(polarity_to_label(hi))
        assert LABELS.index(compound_to_label(lo)) <= LABELS.index(compound_to_label(hi))


@pytest.fixture
def lex():
    return ValenceLexicon({"good": 2.0, "great": 3.0, "bad": -2.5, "best": 4.0},
                          frozenset({"not"}), {"very": 0.5})


class TestLexiconScores:
    def test_no_hits(self, lex):
        assert polarity_score(["nothing", "here"], lex) == 0
        assert compound_score([], lex) == 0

    def test_rescale_bound(self, lex):
        assert polarity_score(["best"], lex) == 1.0

    def test_negation(self, lex):
        assert polarity_score(["not", "good"], lex) == -0.5
        # the negator waits for the next sentiment-bearing token
        assert polarity_score(["not", "really", "good"], lex) == -0.5

    def test_booster(self, lex):
        assert polarity_score(["very", "good"], lex) == pytest.approx(2.5 / 4)
        assert polarity_score(["very", "bad"], lex) == pytest.approx(-3.0 / 4)

    def test_mean_over_hits_only(self, lex):
        assert polarity_score(["good", "filler", "bad"], lex) == pytest.approx((2 - 2.5) / 2 / 4)

    def test_compound_single(self, lex):
        assert compound_score(["good"], lex) == pytest.approx(2 / math.sqrt(19), abs=1e-12)
        assert compound_score(["good"], lex) == pytest.approx(0.4588, abs=5e-5)

    def test_compound_monotone_and_bounded(self):
        s = np.linspace(-50, 50, 2001)
        values = s / np.sqrt(s * s + 15)
        assert (np.diff(values) > 0).all() and (np.abs(values) < 1).all()
        lex = ValenceLexicon({"good": 1.0})
        scores = [compound_score(["good"] * n, lex) for n in range(0, 200, 10)]
        assert scores == sorted(scores) and scores[-1] > 0.99

    def test_bundled_lexicon(self):
        lex = ValenceLexicon.load()
        assert lex.valence_of["great"] > 0 > lex.valence_of["terrible"]
        assert "not" in lex.negators and "very" in lex.boosters
        assert all(-4 <= v <= 4 for v in lex.valence_of.values())

    def test_lexicon_files(self, tmp_path):
        (tmp_path / "lex.tsv").write_text("# c\nYay\t3\n")
        (tmp_path / "neg.txt").write_text("nah\n")
        (tmp_path / "boost.tsv").write_text("mega\t1.0\n")
        lex = ValenceLexicon.load(tmp_path / "lex.tsv", tmp_path / "neg.txt", tmp_path / "boost.tsv")
        assert lex.valence_of == {"yay": 3.0} and lex.negators == {"nah"} and lex.boosters == {"mega": 1.0}
        (tmp_path / "bad.tsv").write_text("x\t9\n")
        with pytest.raises(ValueError):
            ValenceLexicon.load(tmp_path / "bad.tsv")


class TestSplit:
    def test_partition(self):
        s = split_train_test(10, 0.8, seed=1)
        assert len(s.train) == 8 and len(s.test) == 2
        assert set(s.train).isdisjoint(s.test) and set(s.train) | set(s.test) == set(range(10))

    def test_deterministic(self):
        assert split_train_test(50, seed=7) == split_train_test(50, seed=7)
        assert split_train_test(50, seed=7).test != split_train_test(50, seed=8).test

    def test_google_corpus_size(self):
        s = split_train_test(89_343, 0.8, seed=0)
        assert (len(s.train), len(s.test)) == (71_474, 17_869)

    def test_errors(self):
        with pytest.raises(ValueError):
            split_train_test(1, 0.8)
        with pytest.raises(ValueError):
            split_train_test(10, 1.0)

    def test_proportions(self):
        labels = [NEG] * 5 + [POS] * 5
        s = split_train_test(10, 0.8, seed=0, labels=labels)
        assert sum(s.train_proportions.values()) == pytest.approx(1.0)
        assert label_proportions(labels) == {"negative": 0.5, "neutral": 0.0, "positive": 0.5}


def brute_force_log_posterior(train_docs, train_labels, doc, alpha):
    vocab = sorted({t for d in train_docs for t in d})
    out = {}
    for lab in LABELS:
        docs = [d for d, y in zip(train_docs, train_labels) if y is lab]
        if not docs:
            continue
        score = math.log(len(docs) / len(train_docs))
        total = sum(len(d) for d in docs)
        for t in doc:
            if t not in vocab:
                continue
            count = sum(d.count(t) for d in docs)
            score += math.log((count + alpha) / (total + alpha * len(vocab)))
        out[lab] = score
    return out


class TestNaiveBayes:
    def test_hand_arithmetic(self):
        model = nb_fit([["bad", "bad"], ["good"]], [NEG, POS], alpha=1.0)
        label, post = nb_predict(model, ["bad"])
        assert label is NEG
        neg = math.log(0.5) + math.log(3 / 4)
        pos = math.log(0.5) + math.log(1 / 3)
        norm = math.log(math.exp(neg) + math.exp(pos))
        assert post["negative"] == pytest.approx(neg - norm, abs=1e-12)
        assert post["positive"] == pytest.approx(pos - norm, abs=1e-12)

    def test_likelihood_rows_normalized(self):
        model = nb_fit([["a", "b", "b"], ["c"], ["a", "d"]], [NEG, POS, NEU], alpha=0.5)
        np.testing.assert_allclose(np.exp(model.token_log_likelihood).sum(axis=1), 1.0, atol=1e-9)

    def test_single_class(self, caplog):
        with caplog.at_level(logging.WARNING):
            model = nb_fit([["a"], ["b"]], [POS, POS])
        assert "negative" in caplog.text
        assert nb_predict(model, ["a", "zzz"])[0] is POS
        assert nb_predict(model, [])[0] is POS

    def test_empty_and_unseen_docs_use_priors(self):
        model = nb_fit([["a"], ["b"], ["c"]], [NEG, POS, POS])
        assert nb_predict(model, [])[0] is POS
        assert nb_predict(model, ["unseen", "words"]) == nb_predict(model, [])

    def test_tie_break_label_order(self):
        model = nb_fit([["a"], ["b"]], [POS, NEG])
        assert nb_predict(model, [])[0] is NEG

    def test_matches_bruteforce_oracle(self):
        rng = random.Random(4)
        words = [f"w{i}" for i in range(12)]
        docs = [[rng.choice(words) for _ in range(rng.randint(1, 8))] for _ in range(80)]
        labels = [rng.choice(LABELS) for _ in docs]
        train_d, train_y, test_d = docs[:60], labels[:60], docs[60:] + [["w1", "new"]]
        model = nb_fit(train_d, train_y, alpha=1.0)
        for doc in test_d:
            ref = brute_force_log_posterior(train_d, train_y, doc, 1.0)
            label, post = nb_predict(model, doc)
            assert label is max(ref, key=lambda k: (ref[k], -LABELS.index(k)))
            norm = math.log(sum(math.exp(v) for v in ref.values()))
            for lab, v in ref.items():
                assert abs(post[lab.value] - (v - norm)) <= 1e-9
            assert sum(math.exp(v) for v in post.values()) == pytest.approx(1.0, abs=1e-9)

    def test_duplicated_training_keeps_argmax(self):
        rng = random.Random(8)
        words = [f"w{i}" for i in range(10)]
        docs = [[rng.choice(words) for _ in range(5)] for _ in range(40)]
        labels = [rng.choice(LABELS) for _ in docs]
        once = nb_fit(docs, labels)
        twice = nb_fit(docs + docs, labels + labels)
        probe = [[rng.choice(words) for _ in range(4)] for _ in range(30)]
        assert [nb_predict(once, d)[0] for d in probe] == [nb_predict(twice, d)[0] for d in probe]


class TestEvaluate:
    def test_identical(self):
        acc, conf = evaluate([NEG, POS, NEU], [NEG, POS, NEU])
        assert acc == 1.0 and (conf == np.eye(3, dtype=int)).all()

    def test_disjoint(self):
        acc, _ = evaluate([NEG, NEG], [POS, NEU])
        assert acc == 0.0

    def test_counting_oracle_and_permutation(self):
        rng = random.Random(2)
        pred = [rng.choice(LABELS) for _ in range(1000)]
        act = [rng.choice(LABELS) for _ in range(1000)]
        acc, conf = evaluate(pred, act)
        assert acc == sum(p is a for p, a in zip(pred, act)) / 1000
        for i, a in enumerate(LABELS):
            for j, p in enumerate(LABELS):
                assert conf[i, j] == sum(1 for x, y in zip(pred, act) if y is a and x is p)
        pairs = list(zip(pred, act))
        rng.shuffle(pairs)
        assert evaluate([p for p, _ in pairs], [a for _, a in pairs])[0] == acc

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate([NEG], [])


def test_split_by_sentiment():
    parts = split_by_sentiment(["a", "b", "c"], [NEU, NEU, NEU])
    assert parts == {NEG: [], NEU: ["a", "b", "c"], POS: []}
    items = list(range(20))
    labels = [LABELS[i % 3] for i in items]
    parts = split_by_sentiment(items, labels)
    assert sum(len(v) for v in parts.values()) == 20
    assert parts[POS] == [2, 5, 8, 11, 14, 17]
