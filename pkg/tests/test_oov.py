"""OOV resolution: nearest-word optimality, n-gram matching, determinism."""
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finhyp.distance import levenshtein
from finhyp.embeddings import EmbeddingStore, lookup
from finhyp.oov import (
    NgramIndex,
    OOVStrategy,
    best_ngram_match,
    char_ngrams,
    resolve_levenshtein,
    resolve_ngram,
)

from conftest import make_store


class TestCharNgrams:
    def test_known_set(self):
        assert char_ngrams("abcd", 3, 4) == frozenset({"abc", "bcd", "abcd"})

    def test_short_text_empty(self):
        assert char_ngrams("ab", 3, 6) == frozenset()

    def test_single_size(self):
        assert char_ngrams("abc", 2, 2) == frozenset({"ab", "bc"})

    @given(st.text(alphabet="abc", max_size=10))
    def test_every_gram_is_substring(self, text):
        for g in char_ngrams(text, 3, 6):
            assert 3 <= len(g) <= 6
            assert g in text


class TestResolveLevenshtein:
    def test_fixture_from_error_analysis(self):
        store = make_store(["corporate", "bond", "swap"])
        assert resolve_levenshtein("asiacorporate", store) == "corporate"

    def test_matches_case_insensitively(self):
        store = make_store(["Corporate", "bond"])
        assert resolve_levenshtein("CORPORATE", store) == "Corporate"

    def test_tie_shorter_then_lexicographic(self):
        assert resolve_levenshtein("aa", make_store(["ba", "ab"])) == "ab"
        assert resolve_levenshtein("ab", make_store(["abc", "a"])) == "a"

    def test_empty_vocab(self):
        store = EmbeddingStore([], np.zeros((0, 3)))
        with pytest.raises(ValueError):
            resolve_levenshtein("x", store)

    def test_exhaustive_argmin_on_random_vocabs(self):
        rng = random.Random(7)
        alphabet = "abcdef-"
        for _ in range(100):
            vocab = sorted(
                {
                    "".join(rng.choices(alphabet, k=rng.randint(1, 10)))
                    for _ in range(rng.randint(1, 200))
                }
            )
            rng.shuffle(vocab)
            store = make_store(vocab)
            token = "".join(rng.choices(alphabet, k=rng.randint(0, 10)))
            got = resolve_levenshtein(token, store)
            best = min(
                (w.lower() for w in vocab),
                key=lambda w: (levenshtein(token.lower(), w), len(w), w),
            )
            assert got.lower() == best

    def test_vocab_order_irrelevant(self):
        vocab = ["gamma", "beta", "alpha", "delta"]
        store_a = make_store(vocab)
        store_b = make_store(sorted(vocab))
        for token in ["alphaa", "bet", "x", "delt"]:
            assert resolve_levenshtein(token, store_a) == resolve_levenshtein(
                token, store_b
            )


class TestNgramMatch:
    def test_shared_gram_selection(self):
        index = NgramIndex(["interest rate swap", "bond"])
        got = best_ngram_match("interest rate swaps", index)
        assert got is not None
        entry, score = got
        assert entry == 0
        assert 0 < score <= 1

    def test_no_shared_gram(self):
        assert best_ngram_match("xyz-q", NgramIndex(["swap"])) is None

    def test_score_is_jaccard(self):
        index = NgramIndex(["abcd"], ngram_min=3, ngram_max=4)
        got = best_ngram_match("abcx", index)
        # query {abc, bcx, abcx} vs entry {abc, bcd, abcd}: share {abc} of 5
        assert got == (0, 1 / 5)

    def test_resolver_falls_back_to_levenshtein(self):
        store = make_store(["swap", "bond"])
        index = NgramIndex(store.vocab)
        assert resolve_ngram("xy", index, store) == resolve_levenshtein("xy", store)

    def test_resolver_prefers_shared_grams(self):
        store = make_store(["corporate", "swap"])
        index = NgramIndex(store.vocab)
        assert resolve_ngram("corporates", index, store) == "corporate"

    def test_tie_breaks_deterministic(self):
        # same Jaccard against both entries; levenshtein prefers "abcde"
        index = NgramIndex(["abcde", "abcdq"], ngram_min=3, ngram_max=3)
        got = best_ngram_match("abcd", index)
        assert got is not None and got[0] == 0


class TestOOVStrategy:
    def test_variants_validated(self):
        with pytest.raises(ValueError):
            OOVStrategy("magnitude")
        with pytest.raises(ValueError):
            OOVStrategy("ngram", ngram_min=4, ngram_max=3)

    def test_zero_returns_none(self, toy_store):
        assert OOVStrategy("zero").resolve("anything", toy_store) is None

    def test_in_vocab_token_resolves_to_itself(self, toy_store):
        for variant in ("zero", "levenshtein", "ngram"):
            for tok in toy_store.vocab:
                _, res = lookup(toy_store, tok, OOVStrategy(variant))
                assert res.kind == "in_vocab"
                assert res.token == tok

    def test_memo_reused_per_store(self, toy_store):
        strat = OOVStrategy("levenshtein")
        first = strat.resolve("bonds", toy_store)
        assert strat.resolve("bonds", toy_store) == first
        assert strat._memo["bonds"] == first

    def test_rebinds_on_new_store(self):
        strat = OOVStrategy("levenshtein")
        assert strat.resolve("bonds", make_store(["bond"])) == "bond"
        assert strat.resolve("bonds", make_store(["bands"])) == "bands"

    @settings(max_examples=50)
    @given(token=st.text(alphabet="abcd-", max_size=8))
    def test_ngram_strategy_total(self, token):
        store = make_store(["abcd", "dcba", "a-b"])
        strat = OOVStrategy("ngram")
        sub = strat.resolve(token, store)
        assert sub in store.vocab
