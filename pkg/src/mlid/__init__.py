"""Matrix language identification for code-switched text."""

from mlid.corpus import Corpus, Kind, LanguagePair, Token, Utterance, load_corpus, tag_by_script
from mlid.errors import ComputationError, InputError, MLIDError
from mlid.lexicon import load_function_lexicons, load_translation_lexicon, translate_word_by_word
from mlid.lm import NGramLM, perplexity, tokenize_morphemes, train_lm, word_order_probe
from mlid.metrics import agreement_matrix, distribution_report, f1_macro, m_index, mcc, mcc_with_unknown
from mlid.p12 import decide, det_curve, estimate_alpha, score_utterance
from mlid.principles import UNDETERMINED, MLVerdict, determine_baseline, determine_p2, determine_p11

__version__ = "0.1.0"

__all__ = [
    "ComputationError",
    "Corpus",
    "InputError",
    "Kind",
    "LanguagePair",
    "MLIDError",
    "MLVerdict",
    "NGramLM",
    "Token",
    "UNDETERMINED",
    "Utterance",
    "agreement_matrix",
    "decide",
    "det_curve",
    "determine_baseline",
    "determine_p11",
    "determine_p2",
    "distribution_report",
    "estimate_alpha",
    "f1_macro",
    "load_corpus",
    "load_function_lexicons",
    "load_translation_lexicon",
    "m_index",
    "mcc",
    "mcc_with_unknown",
    "perplexity",
    "score_utterance",
    "tag_by_script",
    "tokenize_morphemes",
    "train_lm",
    "translate_word_by_word",
    "word_order_probe",
]
