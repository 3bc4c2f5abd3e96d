"""Deletion and reduced-EDA baselines: determinism, bounds, edge cases."""

import pytest

from xmai.baselines import (
    BaselineConfig,
    _delete_words,
    _eda_n,
    _insert_neighbors,
    _replace_synonyms,
    _swap_words,
    delete_augment,
    detokenize,
    eda_augment,
)
from xmai.core import PUNCT, WORD, tokenize
from xmai.providers import WordEmbeddingTable
from xmai.rng import SplitMix64, derive_stream


def dog_table():
    table = WordEmbeddingTable()
    table.add("dog", [1.0, 0.0])
    table.add("hound", [0.95, 0.05])
    table.add("cat", [0.0, 1.0])
    return table


class TestBaselineConfig:
    def test_valid(self):
        BaselineConfig("deletion", 0.1, 0)
        BaselineConfig("eda", 1.0, 2**64 - 1)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown baseline kind"):
            BaselineConfig("dropout", 0.1, 0)

    def test_rate_bounds(self):
        with pytest.raises(ValueError):
            BaselineConfig("deletion", -0.1, 0)
        with pytest.raises(ValueError):
            BaselineConfig("deletion", 1.1, 0)

    def test_seed_bounds(self):
        with pytest.raises(ValueError):
            BaselineConfig("deletion", 0.1, -1)


class TestDetokenize:
    def test_spacing_rules(self):
        stream = tokenize("A man, his bike.")
        assert detokenize(list(stream.tokens)) == "A man, his bike."

    def test_leading_punct_attaches(self):
        stream = tokenize("( nested )")
        assert detokenize(list(stream.tokens)) == "( nested)"

    def test_empty(self):
        assert detokenize([]) == ""


class TestDeleteAugment:
    def test_rate_zero_keeps_all_words(self):
        stream = tokenize("a small dog runs .")
        out = delete_augment(stream, 0.0, SplitMix64(0))
        assert out.word_lowers() == stream.word_lowers()

    def test_rebuild_normalizes_whitespace(self):
        # survivors are re-joined with single spaces by design
        out = delete_augment(tokenize("a  dog"), 0.0, SplitMix64(0))
        assert out.text() == "a dog"

    def test_rate_one_keeps_first_word(self):
        stream = tokenize("alpha beta gamma !")
        out = delete_augment(stream, 1.0, SplitMix64(7))
        assert out.word_lowers() == ["alpha"]
        assert [t.surface for t in out.tokens if t.kind == PUNCT] == ["!"]

    def test_punctuation_never_deleted(self):
        stream = tokenize("a , b . c !")
        out = delete_augment(stream, 1.0, SplitMix64(1))
        assert [t.surface for t in out.tokens if t.kind == PUNCT] == [",", ".", "!"]

    def test_no_words_passthrough(self):
        out = delete_augment(tokenize("!!!"), 1.0, SplitMix64(0))
        assert out.text() == "!!!"

    def test_deterministic_per_stream(self):
        stream = tokenize("one two three four five six seven eight")
        a = delete_augment(stream, 0.5, derive_stream(3, "ex"))
        b = delete_augment(stream, 0.5, derive_stream(3, "ex"))
        assert a == b

    def test_survivors_are_subsequence(self):
        stream = tokenize("one two three four five six seven eight")
        words = stream.word_lowers()
        for seed in range(30):
            out = delete_augment(stream, 0.4, SplitMix64(seed))
            it = iter(words)
            assert all(w in it for w in out.word_lowers())

    def test_rate_roughly_respected(self):
        stream = tokenize(" ".join(f"w{i}" for i in range(40)))
        total = kept = 0
        for seed in range(50):
            out = delete_augment(stream, 0.3, SplitMix64(seed))
            total += 40
            kept += len(out.word_lowers())
        survival = kept / total
        assert 0.6 < survival < 0.8  # ~0.7 expected

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            delete_augment(tokenize("a b"), 1.5, SplitMix64(0))


class TestEdaHelpers:
    def test_n_formula(self):
        assert _eda_n(0.1, 4) == 1  # floor(0.9) but clamped to 1
        assert _eda_n(0.5, 3) == 2
        assert _eda_n(0.5, 5) == 3  # 2.5 + 0.5 floors to 3, never banker's 2
        assert _eda_n(0.1, 15) == 2
        assert _eda_n(0.0, 100) == 1

    def test_replace_synonyms_only_touches_vocab_words(self):
        tokens = list(tokenize("a dog runs").tokens)
        _replace_synonyms(tokens, 5, dog_table(), SplitMix64(0))
        assert [t.surface for t in tokens] == ["a", "hound", "runs"]

    def test_replace_synonyms_empty_table_noop(self):
        tokens = list(tokenize("a dog runs").tokens)
        _replace_synonyms(tokens, 2, WordEmbeddingTable(), SplitMix64(0))
        assert [t.surface for t in tokens] == ["a", "dog", "runs"]

    def test_insert_neighbors_adds_n_words(self):
        tokens = list(tokenize("the dog sat").tokens)
        _insert_neighbors(tokens, 2, dog_table(), SplitMix64(5))
        assert len(tokens) == 5
        assert all(t.kind == WORD for t in tokens)

    def test_insert_neighbors_without_sources_noop(self):
        tokens = list(tokenize("xyz qqq").tokens)
        _insert_neighbors(tokens, 3, dog_table(), SplitMix64(5))
        assert len(tokens) == 2

    def test_swap_preserves_multiset(self):
        tokens = list(tokenize("one two three four").tokens)
        before = sorted(t.surface for t in tokens)
        _swap_words(tokens, 3, SplitMix64(11))
        assert sorted(t.surface for t in tokens) == before

    def test_swap_single_word_noop(self):
        tokens = list(tokenize("lonely .").tokens)
        _swap_words(tokens, 4, SplitMix64(0))
        assert [t.surface for t in tokens] == ["lonely", "."]

    def test_delete_words_keeps_one(self):
        tokens = list(tokenize("a b c").tokens)
        out = _delete_words(tokens, 1.0, SplitMix64(0))
        assert [t.surface for t in out] == ["a"]


class TestEdaAugment:
    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            eda_augment(tokenize("a b"), -0.1, SplitMix64(0), dog_table())

    def test_empty_and_punct_only_unchanged(self):
        for text in ("", "  ", "?!"):
            stream = tokenize(text)
            out = eda_augment(stream, 0.3, SplitMix64(0), dog_table())
            assert out == stream

    def test_deterministic(self):
        stream = tokenize("the dog sat on the mat with a cat")
        a = eda_augment(stream, 0.2, derive_stream(9, "x"), dog_table())
        b = eda_augment(stream, 0.2, derive_stream(9, "x"), dog_table())
        assert a.text() == b.text()

    def test_synonym_surfaces_in_output(self):
        # every vocab word has a close neighbor, so with n >= 1 either dog or
        # cat gets replaced; inserted words also come from the table
        stream = tokenize("dog versus cat")
        out = eda_augment(stream, 0.05, SplitMix64(2), dog_table())
        vocab = {"dog", "hound", "cat"}
        assert vocab & set(out.word_lowers())

    def test_output_never_empty(self):
        stream = tokenize("single")
        for seed in range(20):
            out = eda_augment(stream, 1.0, SplitMix64(seed), dog_table())
            assert len(out.word_lowers()) >= 1

    def test_word_count_bounds(self):
        stream = tokenize("alpha beta gamma delta epsilon")
        for seed in range(20):
            out = eda_augment(stream, 0.2, SplitMix64(seed), WordEmbeddingTable())
            # empty table: no replace/insert, so only swap and delete act
            assert 1 <= len(out.word_lowers()) <= 5

    def test_empty_table_preserves_word_multiset_modulo_deletion(self):
        stream = tokenize("alpha beta gamma delta")
        out = eda_augment(stream, 0.0, SplitMix64(4), WordEmbeddingTable())
        # alpha 0 still forces n=1, so one swap happens but nothing is deleted
        assert sorted(out.word_lowers()) == ["alpha", "beta", "delta", "gamma"]
