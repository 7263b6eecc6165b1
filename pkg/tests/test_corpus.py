import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mlid.corpus import (
    HAN,
    LATIN,
    MIXED,
    NEUTRAL,
    OTHER,
    Corpus,
    Kind,
    LanguagePair,
    Token,
    Utterance,
    classify_kind,
    dump_corpus,
    dump_splits,
    load_corpus,
    tag_by_script,
    token_script,
)
from mlid.errors import InputError


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records), encoding="utf-8")
    return path


def rec(uid, *tokens):
    return {"id": uid, "speaker": None, "tokens": [{"surface": s, "lid": lid} for s, lid in tokens]}


class TestLanguagePair:
    def test_rejects_identical(self):
        with pytest.raises(InputError):
            LanguagePair("en", "en")

    @pytest.mark.parametrize("code", ["", "EN", "e1", "中文"])
    def test_rejects_bad_codes(self, code):
        with pytest.raises(InputError):
            LanguagePair(code, "zh")

    def test_parse(self):
        assert LanguagePair.parse("en, es") == LanguagePair("en", "es")


class TestScript:
    @pytest.mark.parametrize(
        "surface, script",
        [("毕业", HAN), ("study", LATIN), ("a1", LATIN), ("123", NEUTRAL), ("?!", NEUTRAL), ("a中", MIXED),
         ("ab中", LATIN), ("中文x", HAN)],
    )
    def test_token_script(self, surface, script):
        assert token_script(surface) == script

    def test_table1_tokens(self, en_zh):
        u = tag_by_script(Utterance("x", (Token("毕业过后"), Token("urh"), Token("你的"), Token("study"))), en_zh)
        assert u.lids == ["zh", "en", "zh", "en"]

    def test_digit_token_majority(self, en_zh):
        u = tag_by_script(Utterance("x", (Token("a1"),)), en_zh)
        assert u.lids == ["en"]

    def test_neutral_inherits_preceding(self, en_zh):
        u = tag_by_script(Utterance("x", (Token("我"), Token("123"), Token("ok"), Token("!"))), en_zh)
        assert u.lids == ["zh", "zh", "en", "en"]

    def test_sentence_initial_neutral_takes_following(self, en_zh):
        u = tag_by_script(Utterance("x", (Token("..."), Token("2"), Token("你好"))), en_zh)
        assert u.lids == ["zh", "zh", "zh"]

    def test_all_neutral_becomes_other(self, en_zh):
        u = tag_by_script(Utterance("x", (Token("..."), Token("2"))), en_zh)
        assert u.lids == [OTHER, OTHER]

    def test_explicit_lids_kept(self, en_zh):
        u = tag_by_script(Utterance("x", (Token("zai", "zh"), Token("好"))), en_zh)
        assert u.lids == ["zh", "zh"]

    def test_latin_pair_rejected(self):
        with pytest.raises(InputError, match="script tagging inapplicable"):
            tag_by_script(Utterance("x", (Token("hola"),)), LanguagePair("en", "es"))

    @given(st.lists(st.sampled_from(["毕业", "study", "a1", "123", "!", "a中", "你", "ok"]), min_size=1, max_size=12))
    def test_idempotent(self, surfaces):
        pair = LanguagePair("en", "zh")
        u = Utterance("x", tuple(Token(s) for s in surfaces))
        once = tag_by_script(u, pair)
        assert tag_by_script(once, pair) == once
        assert all(t.lid is not None for t in once.tokens)


class TestClassify:
    def test_monolingual_l2(self, en_zh):
        u = Utterance("x", (Token("我", "zh"), Token("的", "zh")))
        assert classify_kind(u, en_zh) is Kind.MONOLINGUAL_L2

    def test_code_switched(self, en_zh):
        u = Utterance("x", (Token("我", "zh"), Token("like", "en")))
        assert classify_kind(u, en_zh) is Kind.CODE_SWITCHED

    def test_other_only_rejected(self, en_zh):
        with pytest.raises(InputError):
            classify_kind(Utterance("x", (Token("Singapore", OTHER),)), en_zh)

    @given(st.lists(st.sampled_from(["en", "zh", OTHER]), min_size=1, max_size=10))
    def test_cs_iff_both_languages(self, lids):
        pair = LanguagePair("en", "zh")
        u = Utterance("x", tuple(Token(f"w{i}", lid) for i, lid in enumerate(lids)))
        if set(lids) == {OTHER}:
            with pytest.raises(InputError):
                classify_kind(u, pair)
            return
        kind = classify_kind(u, pair)
        assert (kind is Kind.CODE_SWITCHED) == ({"en", "zh"} <= set(lids))


class TestLoad:
    def test_single_monolingual(self, tmp_path, en_zh):
        path = write_jsonl(tmp_path / "c.jsonl", [rec("a", ("hello", "en"), ("world", "en"))])
        corpus = load_corpus(path, en_zh)
        assert len(corpus) == 1
        assert corpus.utterances[0].kind is Kind.MONOLINGUAL_L1

    def test_code_switched(self, tmp_path, en_zh):
        path = write_jsonl(tmp_path / "c.jsonl", [rec("a", ("hello", "en"), ("你好", "zh"))])
        assert load_corpus(path, en_zh).utterances[0].kind is Kind.CODE_SWITCHED

    def test_script_tagging_on_load(self, worked_examples):
        assert worked_examples["ex2"].lids == ["en", "zh", "zh", "en", "zh", "en"]

    def test_malformed_line_reports_number(self, tmp_path, en_zh):
        path = tmp_path / "c.jsonl"
        path.write_text(
            json.dumps(rec("a", ("x", "en"))) + "\n" + json.dumps(rec("b", ("y", "en"))) + "\n{not json\n",
            encoding="utf-8",
        )
        with pytest.raises(InputError, match="line 3"):
            load_corpus(path, en_zh)

    def test_duplicate_id(self, tmp_path, en_zh):
        path = write_jsonl(tmp_path / "c.jsonl", [rec("a", ("x", "en")), rec("a", ("y", "en"))])
        with pytest.raises(InputError, match="duplicate"):
            load_corpus(path, en_zh)

    def test_empty(self, tmp_path, en_zh):
        path = tmp_path / "c.jsonl"
        path.write_text("\n", encoding="utf-8")
        with pytest.raises(InputError, match="empty"):
            load_corpus(path, en_zh)

    def test_whitespace_surface_rejected(self, tmp_path, en_zh):
        path = write_jsonl(tmp_path / "c.jsonl", [rec("a", ("two words", "en"))])
        with pytest.raises(InputError, match="line 1"):
            load_corpus(path, en_zh)

    def test_splits_validated(self, tmp_path, en_zh):
        path = write_jsonl(tmp_path / "c.jsonl", [rec("a", ("x", "en")), rec("b", ("y", "en"))])
        corpus = load_corpus(path, en_zh, {"train": ["a"], "test": ["b"]})
        assert [u.id for u in corpus.split("test")] == ["b"]
        with pytest.raises(InputError, match="both splits"):
            load_corpus(path, en_zh, {"train": ["a"], "test": ["a"]})
        with pytest.raises(InputError, match="unknown utterance"):
            load_corpus(path, en_zh, {"train": ["zz"]})

    def test_round_trip(self, tmp_path, en_zh, worked_examples_path):
        corpus = load_corpus(worked_examples_path, en_zh, {"annotated": ["ex1", "ex2"]})
        out = tmp_path / "out.jsonl"
        dump_corpus(corpus, out)
        dump_splits(corpus, tmp_path / "splits.json")
        again = load_corpus(out, en_zh, tmp_path / "splits.json")
        assert again == corpus

    def test_monolingual_selection(self, en_zh):
        utts = (
            Utterance("a", (Token("x", "en"),), kind=Kind.MONOLINGUAL_L1),
            Utterance("b", (Token("我", "zh"),), kind=Kind.MONOLINGUAL_L2),
            Utterance("c", (Token("x", "en"), Token("我", "zh")), kind=Kind.CODE_SWITCHED),
        )
        corpus = Corpus(en_zh, utts)
        assert [u.id for u in corpus.monolingual("zh")] == ["b"]
        assert [u.id for u in corpus.monolingual()] == ["a", "b"]
        assert [u.id for u in corpus.code_switched()] == ["c"]
