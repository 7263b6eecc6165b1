import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.metrics import f1_score, matthews_corrcoef

from mlid.corpus import Corpus, Kind, LanguagePair, Token, Utterance
from mlid.errors import InputError
from mlid.metrics import (
    ConfusionMatrix,
    accuracy,
    agreement_matrix,
    coverage_of,
    distribution_report,
    f1_macro,
    m_index,
    mcc,
    mcc_with_unknown,
)
from mlid.principles import P11, UNDETERMINED, MLVerdict
from oracles import binary_mcc, multiclass_mcc

labels = st.sampled_from(["en", "zh", "es"])


class TestMCC:
    def test_binary_reference_value(self):
        a = ["en", "en", "en", "zh"]
        b = ["en", "en", "zh", "zh"]
        assert mcc(a, b) == pytest.approx(binary_mcc(tp=2, tn=1, fp=0, fn=1), abs=1e-12)
        assert mcc(a, b) == pytest.approx(1 / math.sqrt(3), abs=1e-12)

    def test_hand_confusion(self):
        # TP=4, TN=3, FP=1, FN=2 with L1 as the positive class
        pred = ["en"] * 4 + ["zh"] * 3 + ["en"] * 1 + ["zh"] * 2
        truth = ["en"] * 4 + ["zh"] * 3 + ["zh"] * 1 + ["en"] * 2
        assert mcc(pred, truth) == pytest.approx(0.4082, abs=1e-4)
        assert mcc(pred, truth) == pytest.approx(binary_mcc(4, 3, 1, 2), abs=1e-12)

    def test_perfect_and_inverse(self):
        assert mcc(["a", "b", "a"], ["a", "b", "a"]) == pytest.approx(1.0)
        assert mcc(["a", "b", "a", "b"], ["b", "a", "b", "a"]) == pytest.approx(-1.0)

    def test_constant_marginal_is_zero(self):
        assert mcc(["a", "a", "a"], ["a", "b", "a"]) == 0.0

    def test_needs_two_items(self):
        with pytest.raises(InputError):
            mcc(["a"], ["a"])

    @given(st.lists(st.tuples(labels, labels), min_size=2, max_size=40))
    def test_matches_covariance_definition_and_sklearn(self, pairs):
        a, b = map(list, zip(*pairs))
        ours = mcc(a, b)
        assert ours == pytest.approx(multiclass_mcc(a, b), abs=1e-9)
        assert ours == pytest.approx(matthews_corrcoef(a, b), abs=1e-9)
        assert -1.0 - 1e-12 <= ours <= 1.0 + 1e-12

    @given(st.lists(st.tuples(labels, labels), min_size=2, max_size=30))
    def test_symmetric(self, pairs):
        a, b = map(list, zip(*pairs))
        assert mcc(a, b) == pytest.approx(mcc(b, a), abs=1e-12)


class TestUnknown:
    def test_matches_plain_mcc_without_abstentions(self):
        a = ["en", "en", "zh", "zh"]
        b = ["en", "zh", "zh", "zh"]
        assert mcc_with_unknown(a, b) == pytest.approx(mcc(a, b), abs=1e-12)

    def test_abstentions_form_extra_class(self):
        a = ["en", "en", UNDETERMINED, "zh"]
        b = ["en", "zh", "zh", "zh"]
        expected = multiclass_mcc(["en", "en", "unknown:a", "zh"], b)
        assert mcc_with_unknown(a, b) == pytest.approx(expected, abs=1e-12)

    def test_per_system_unknowns_do_not_agree(self):
        a = ["en", UNDETERMINED, "zh", UNDETERMINED]
        b = ["en", UNDETERMINED, "zh", "en"]
        shared = mcc_with_unknown(a, b, policy="shared")
        split = mcc_with_unknown(a, b, policy="per_system")
        assert shared > split

    def test_bad_policy(self):
        with pytest.raises(InputError):
            mcc_with_unknown(["a", "b"], ["a", "b"], policy="nope")


class TestF1:
    def test_reference_value(self):
        assert f1_macro(["en", "en", "en", "en"], ["en", "zh", "en", "zh"]) == pytest.approx(1 / 3, abs=1e-9)

    def test_undetermined_counts_as_wrong(self):
        assert f1_macro([UNDETERMINED, "zh"], ["en", "zh"]) == pytest.approx(0.5)

    @given(st.lists(st.tuples(st.sampled_from(["en", "zh"]), st.sampled_from(["en", "zh"])), min_size=1, max_size=40))
    def test_matches_sklearn(self, pairs):
        pred, truth = map(list, zip(*pairs))
        ref = f1_score(truth, pred, labels=["en", "zh"], average="macro", zero_division=0)
        assert f1_macro(pred, truth, labels=["en", "zh"]) == pytest.approx(ref, abs=1e-12)

    def test_non_binary_truth(self):
        with pytest.raises(InputError):
            f1_macro(["a", "b", "c"], ["a", "b", "c"])

    def test_accuracy(self):
        assert accuracy(["a", "b"], ["a", "a"]) == 0.5


class TestAgreement:
    def test_covered_pairs_only(self):
        s1 = {"a": "en", "b": "zh", "c": UNDETERMINED, "d": "en"}
        s2 = {"a": "en", "b": "zh", "c": "zh", "d": "zh"}
        m = agreement_matrix({"x": s1, "y": s2})
        assert m.support[0][1] == 3
        assert m.get("x", "y") == pytest.approx(mcc(["en", "zh", "en"], ["en", "zh", "zh"]))
        assert m.get("x", "x") == 1.0

    def test_with_unknown_uses_all(self):
        s1 = {"a": "en", "b": "zh", "c": UNDETERMINED, "d": "en"}
        s2 = {"a": "en", "b": "zh", "c": "zh", "d": "zh"}
        m = agreement_matrix({"x": s1, "y": s2}, with_unknown=True)
        assert m.support[0][1] == 4

    def test_sparse_cell_is_none(self, tmp_path):
        m = agreement_matrix({"x": {"a": "en"}, "y": {"a": "en", "b": "zh"}})
        assert m.get("x", "y") is None
        m.to_csv(tmp_path / "m.csv")
        assert "n/a" in m.to_text()

    def test_accepts_verdict_lists(self):
        vs = [MLVerdict("a", P11, "en", ((0, 1),)), MLVerdict("b", P11, "zh", ((0, 1),))]
        m = agreement_matrix({"p": vs, "q": {"a": "en", "b": "zh"}})
        assert m.get("p", "q") == pytest.approx(1.0)
        assert coverage_of(vs) == 1.0

    def test_needs_two_systems(self):
        with pytest.raises(InputError):
            agreement_matrix({"x": {"a": "en"}})


class TestDistribution:
    def test_m_index_reference_values(self):
        assert m_index({"en": 5, "zh": 5}) == pytest.approx(1.0, abs=1e-9)
        assert m_index({"en": 3, "zh": 1}, k=2) == pytest.approx(0.6, abs=1e-9)

    def test_m_index_monolingual_is_zero(self):
        assert m_index({"en": 7}, k=2) == 0.0

    def test_m_index_needs_k(self):
        with pytest.raises(InputError):
            m_index({"en": 3})

    @given(st.lists(st.integers(1, 50), min_size=2, max_size=5))
    def test_m_index_in_unit_interval(self, counts):
        v = m_index({str(i): c for i, c in enumerate(counts)})
        assert 0.0 <= v <= 1.0 + 1e-12

    def test_report(self, tmp_path):
        pair = LanguagePair("en", "zh")
        utts = (
            Utterance("m1", (Token("a", "en"),), kind=Kind.MONOLINGUAL_L1),
            Utterance("m2", (Token("我", "zh"),), kind=Kind.MONOLINGUAL_L2),
            Utterance("m3", (Token("b", "en"),), kind=Kind.MONOLINGUAL_L1),
            Utterance("c1", (Token("a", "en"), Token("b", "en"), Token("我", "zh")), kind=Kind.CODE_SWITCHED),
            Utterance("c2", (Token("a", "en"), Token("我", "zh")), kind=Kind.CODE_SWITCHED),
        )
        corpus = Corpus(pair, utts)
        rep = distribution_report(corpus, {"P11": {"c1": "en", "c2": UNDETERMINED, "m1": "zh"}})
        assert rep.rows["utterance_lid"]["en"] == pytest.approx(200 / 3)
        assert rep.rows["token_lid"]["en"] == pytest.approx(60.0)
        assert rep.rows["P11"] == {"en": 100.0, "zh": 0.0}
        assert rep.m_index == pytest.approx(m_index(corpus))
        rep.to_csv(tmp_path / "d.csv")
        assert "M-index" in rep.to_text()


def test_confusion_rejects_foreign_labels():
    with pytest.raises(InputError):
        ConfusionMatrix.from_labels(["a"], ["b"], labels=["a"])
