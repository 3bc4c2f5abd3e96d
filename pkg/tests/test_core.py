"""Tokenizer, domain types, config validation, and corpus/detection loaders."""

import json

import pytest
from hypothesis import given, strategies as st

from xmai.core import (
    PUNCT,
    WORD,
    AugmentationConfig,
    DetectionRecord,
    Token,
    TokenStream,
    load_corpus,
    load_detections,
    tokenize,
    validate_config,
)


class TestTokenize:
    def test_words_and_punct_kinds(self):
        stream = tokenize("A man, his bike.")
        kinds = [(t.surface, t.kind) for t in stream.tokens]
        assert kinds == [
            ("A", WORD),
            ("man", WORD),
            (",", PUNCT),
            ("his", WORD),
            ("bike", WORD),
            (".", PUNCT),
        ]

    def test_lower_field(self):
        stream = tokenize("The DOG Runs")
        assert [t.lower for t in stream.tokens] == ["the", "dog", "runs"]

    def test_apostrophe_stays_in_word(self):
        stream = tokenize("the dog's bone")
        assert [t.surface for t in stream.tokens] == ["the", "dog's", "bone"]
        assert all(t.kind == WORD for t in stream.tokens)

    def test_digits_are_word_chars(self):
        stream = tokenize("route 66 ends")
        assert [t.surface for t in stream.tokens] == ["route", "66", "ends"]

    def test_each_symbol_is_its_own_token(self):
        stream = tokenize("wait... what?!")
        assert [t.surface for t in stream.tokens] == [
            "wait", ".", ".", ".", "what", "?", "!",
        ]

    def test_round_trip_exact(self):
        texts = [
            "A dog runs in the park .",
            "  leading and trailing  ",
            "tabs\tand\nnewlines",
            "no-space,punct;everywhere!",
            "",
            "   ",
            "one",
        ]
        for text in texts:
            assert tokenize(text).text() == text

    @given(st.text(max_size=80))
    def test_round_trip_property(self, text):
        assert tokenize(text).text() == text

    def test_word_indices_and_lowers(self):
        stream = tokenize("Hi , there World !")
        assert stream.word_indices() == [0, 2, 3]
        assert stream.word_lowers() == ["hi", "there", "world"]


class TestTokenStream:
    def test_separator_count_enforced(self):
        tok = Token("a", "a", WORD)
        with pytest.raises(ValueError):
            TokenStream((tok,), ("",))

    def test_insert_word_start(self):
        stream = tokenize("dog runs")
        out = stream.insert_word(0, "Brown")
        assert out.text() == "Brown dog runs"
        assert out.tokens[0] == Token("Brown", "brown", WORD)

    def test_insert_word_middle_keeps_original_spacing(self):
        stream = tokenize("a  dog")  # double space survives
        out = stream.insert_word(1, "brown")
        assert out.text() == "a  brown dog"

    def test_insert_word_end_appends(self):
        stream = tokenize("the end")
        out = stream.insert_word(2, "now")
        assert out.text() == "the end now"

    def test_insert_preserves_trailing_whitespace(self):
        stream = tokenize("dog runs  ")
        out = stream.insert_word(1, "fast")
        assert out.text() == "dog fast runs  "

    def test_insert_does_not_mutate_original(self):
        stream = tokenize("a dog")
        stream.insert_word(1, "brown")
        assert stream.text() == "a dog"

    def test_insert_out_of_range(self):
        stream = tokenize("a dog")
        with pytest.raises(IndexError):
            stream.insert_word(3, "late")
        with pytest.raises(IndexError):
            stream.insert_word(-1, "early")


class TestValidateConfig:
    def test_defaults_pass(self):
        cfg = AugmentationConfig()
        assert validate_config(cfg) is cfg
        assert (cfg.lambda1, cfg.lambda2, cfg.lambda3) == (1.0, 5.0, 5.0)
        assert cfg.k == 3 and cfg.threshold_t == 0.7

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError, match="k must be"):
            validate_config(AugmentationConfig(k=0))

    def test_threshold_range(self):
        with pytest.raises(ValueError):
            validate_config(AugmentationConfig(threshold_t=1.5))
        with pytest.raises(ValueError):
            validate_config(AugmentationConfig(threshold_t=-0.1))
        validate_config(AugmentationConfig(threshold_t=0.0))
        validate_config(AugmentationConfig(threshold_t=1.0))

    def test_seed_bounds(self):
        with pytest.raises(ValueError):
            validate_config(AugmentationConfig(seed=-1))
        with pytest.raises(ValueError):
            validate_config(AugmentationConfig(seed=2**64))
        validate_config(AugmentationConfig(seed=2**64 - 1))

    def test_lambdas_must_be_finite(self):
        with pytest.raises(ValueError):
            validate_config(AugmentationConfig(lambda2=float("nan")))
        with pytest.raises(ValueError):
            validate_config(AugmentationConfig(lambda3=float("inf")))

    def test_negative_lambda_allowed(self):
        validate_config(AugmentationConfig(lambda1=-1.0))


def _write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


class TestLoadCorpus:
    def test_happy_path(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(
            path,
            [
                {"id": "a", "text": "a dog", "image_id": "i1"},
                {"id": "b", "text": "a cat", "image_id": "i2", "gold_label": "neutral"},
            ],
        )
        examples = load_corpus(str(path))
        assert [e.id for e in examples] == ["a", "b"]
        assert examples[0].gold_label is None
        assert examples[1].gold_label == "neutral"

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(
            '\n{"id": "a", "text": "x", "image_id": "i"}\n\n', encoding="utf-8"
        )
        assert len(load_corpus(str(path))) == 1

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(
            path,
            [
                {"id": "a", "text": "x", "image_id": "i"},
                {"id": "a", "text": "y", "image_id": "j"},
            ],
        )
        with pytest.raises(ValueError, match="duplicate id"):
            load_corpus(str(path))

    def test_empty_text(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a", "text": "   ", "image_id": "i"}])
        with pytest.raises(ValueError, match="empty text"):
            load_corpus(str(path))

    def test_bad_gold_label(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(
            path, [{"id": "a", "text": "x", "image_id": "i", "gold_label": "maybe"}]
        )
        with pytest.raises(ValueError, match="gold_label"):
            load_corpus(str(path))

    def test_missing_key(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write_jsonl(path, [{"id": "a", "text": "x"}])
        with pytest.raises(ValueError, match="missing key"):
            load_corpus(str(path))

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(
            '{"id": "a", "text": "x", "image_id": "i"}\nnot json\n', encoding="utf-8"
        )
        with pytest.raises(ValueError, match=":2:"):
            load_corpus(str(path))


class TestLoadDetections:
    def test_happy_path(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(
            json.dumps(
                {
                    "i1": [
                        {"object": "dog", "attribute": "brown", "confidence": 0.9},
                        {"object": "ball", "attribute": ""},
                    ],
                    "i2": [],
                }
            ),
            encoding="utf-8",
        )
        records = load_detections(str(path))
        assert set(records) == {"i1", "i2"}
        rec = records["i1"]
        assert isinstance(rec, DetectionRecord)
        assert rec.detections[0].object_label == "dog"
        assert rec.detections[0].attribute_phrase == "brown"
        assert rec.detections[1].confidence == 1.0  # default
        assert records["i2"].detections == ()

    def test_top_level_must_be_object(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ValueError, match="JSON object"):
            load_detections(str(path))

    def test_empty_object_label(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"i": [{"object": ""}]}), encoding="utf-8")
        with pytest.raises(ValueError, match="empty object label"):
            load_detections(str(path))

    def test_confidence_out_of_range(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(
            json.dumps({"i": [{"object": "dog", "confidence": 1.2}]}), encoding="utf-8"
        )
        with pytest.raises(ValueError, match="confidence"):
            load_detections(str(path))
