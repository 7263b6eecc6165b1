"""Seeded synthetic code-switched corpora with known matrix language.

Each language gets a toy grammar: content and function vocabularies plus
sentence templates fixing the word order. Code-switched utterances are built
from the matrix language's template with some content slots filled by the
embedded language's translation-equivalent word, so the matrix language
always supplies word order and function words.
"""

from __future__ import annotations

import csv
import random
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

from mlid.corpus import HAN, LANGUAGE_SCRIPTS, Corpus, LanguagePair, Token, Utterance, prepare_utterance
from mlid.errors import InputError
from mlid.lexicon import (
    FUNCTION_CLASSES,
    FunctionWordLexicon,
    TranslationLexicon,
    build_function_lexicons,
    build_translation_lexicon,
)
from mlid.lm import split_suffix, suffix_table

CONTENT_CLASSES = ("N", "V", "ADJ")

# Head-initial templates; the "distinct" family reverses them.
BASE_TEMPLATES: tuple[tuple[str, ...], ...] = (
    ("DET", "N", "V", "DET", "N"),
    ("DET", "ADJ", "N", "AUX", "V", "DET", "N"),
    ("DET", "N", "AUX", "V", "CCONJ", "DET", "N", "V"),
    ("SCONJ", "DET", "N", "V", "DET", "N", "DET", "N", "AUX", "V"),
    ("DET", "N", "V", "DET", "ADJ", "N"),
    ("DET", "N", "AUX", "ADJ", "CCONJ", "DET", "N", "V", "DET", "N"),
)

CONTENT_SIZES = {"N": 40, "V": 30, "ADJ": 20}
FUNCTION_SIZE = 3

_CONSONANTS = "bdfgklmnprtvz"
_VOWELS = "aeiou"
_HAN_RANGE = (0x4E00, 0x9FA5)


@dataclass(frozen=True)
class SynthGrammar:
    language: str
    content: Mapping[str, tuple[str, ...]]
    function: Mapping[str, tuple[str, ...]]
    templates: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        declared = set(self.content) | set(self.function)
        for tpl in self.templates:
            unknown = set(tpl) - declared
            if unknown:
                raise InputError(f"{self.language}: template uses undeclared classes {sorted(unknown)}")
            if not any(slot in self.function for slot in tpl):
                raise InputError(f"{self.language}: template {tpl} has no function-word slot")
        for cls, words in {**self.content, **self.function}.items():
            if not words:
                raise InputError(f"{self.language}: class {cls} is empty")

    def words(self) -> set[str]:
        return {w for ws in (*self.content.values(), *self.function.values()) for w in ws}


def _latin_word(rng: random.Random, language: str) -> str:
    suffixes = suffix_table(language)
    while True:
        word = "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(rng.randint(2, 3)))
        if len(split_suffix(word, suffixes)) == 1:
            return word


def _han_word(rng: random.Random, max_chars: int) -> str:
    return "".join(chr(rng.randint(*_HAN_RANGE)) for _ in range(rng.randint(1, max_chars)))


def _vocabulary(language: str, rng: random.Random, taken: set[str]) -> tuple[dict, dict]:
    han = LANGUAGE_SCRIPTS.get(language) == HAN

    def fresh(max_chars: int) -> str:
        while True:
            w = _han_word(rng, max_chars) if han else _latin_word(rng, language)
            if w not in taken:
                taken.add(w)
                return w

    content = {cls: tuple(fresh(2) for _ in range(n)) for cls, n in CONTENT_SIZES.items()}
    function = {cls: tuple(fresh(1) for _ in range(FUNCTION_SIZE)) for cls in FUNCTION_CLASSES}
    return content, function


def make_grammar_pair(
    pair: LanguagePair = LanguagePair("en", "zh"),
    word_order: str = "distinct",
    seed: int = 0,
) -> tuple[SynthGrammar, SynthGrammar]:
    """Two grammars with aligned (translation-equivalent) vocabularies.

    ``word_order="distinct"`` gives the second language the mirror image of
    the first one's templates; ``"same"`` shares them.
    """
    if word_order not in ("distinct", "same"):
        raise InputError(f"word_order must be 'distinct' or 'same', got {word_order!r}")
    for lang in pair.languages:
        if lang not in LANGUAGE_SCRIPTS:
            raise InputError(f"unsupported language {lang!r} for synthetic grammars")
    rng = random.Random(f"grammar-{seed}")
    taken: set[str] = set()
    c1, f1 = _vocabulary(pair.l1, rng, taken)
    c2, f2 = _vocabulary(pair.l2, rng, taken)
    t2 = BASE_TEMPLATES if word_order == "same" else tuple(tuple(reversed(t)) for t in BASE_TEMPLATES)
    return SynthGrammar(pair.l1, c1, f1, BASE_TEMPLATES), SynthGrammar(pair.l2, c2, f2, t2)


@dataclass(frozen=True)
class SynthSpec:
    grammars: tuple[SynthGrammar, SynthGrammar]
    count: int
    rate: float = 0.3
    matrix_language: str | None = None
    p_l1: float = 0.5
    singleton_only: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise InputError(f"insertion rate must lie in [0, 1], got {self.rate}")
        if not 0.0 <= self.p_l1 <= 1.0:
            raise InputError(f"p_l1 must lie in [0, 1], got {self.p_l1}")
        if self.count < 1:
            raise InputError("utterance count must be >= 1")
        g1, g2 = self.grammars
        if g1.language == g2.language:
            raise InputError("grammars must be for two different languages")
        if g1.words() & g2.words():
            raise InputError("grammar vocabularies must be disjoint")
        if self.matrix_language is not None and self.matrix_language not in self.pair.languages:
            raise InputError(f"matrix language {self.matrix_language!r} not in {self.pair}")

    @property
    def pair(self) -> LanguagePair:
        return LanguagePair(self.grammars[0].language, self.grammars[1].language)


def _build_utterance(spec: SynthSpec, index: int) -> tuple[Utterance, str]:
    rng = random.Random(f"{spec.seed}-{index}")
    g1, g2 = spec.grammars
    if spec.matrix_language is not None:
        ml = spec.matrix_language
    else:
        ml = g1.language if rng.random() < spec.p_l1 else g2.language
    matrix, embedded = (g1, g2) if ml == g1.language else (g2, g1)
    template = rng.choice(matrix.templates)
    tokens = []
    prev_embedded = False
    for slot in template:
        if slot in matrix.function:
            tokens.append(Token(rng.choice(matrix.function[slot]), matrix.language))
            prev_embedded = False
            continue
        j = rng.randrange(len(matrix.content[slot]))
        insert = rng.random() < spec.rate and not (spec.singleton_only and prev_embedded)
        if insert:
            tokens.append(Token(embedded.content[slot][j], embedded.language))
        else:
            tokens.append(Token(matrix.content[slot][j], matrix.language))
        prev_embedded = insert
    utt = Utterance(f"synth-{spec.seed}-{index:05d}", tuple(tokens), speaker=None)
    return prepare_utterance(utt, spec.pair), ml


def generate(spec: SynthSpec) -> tuple[Corpus, dict[str, str]]:
    """Build the corpus and the true matrix language of every utterance."""
    utterances = []
    truth: dict[str, str] = {}
    for i in range(spec.count):
        utt, ml = _build_utterance(spec, i)
        utterances.append(utt)
        truth[utt.id] = ml
    return Corpus(spec.pair, tuple(utterances)), truth


def generate_lexicons(
    spec: SynthSpec | tuple[SynthGrammar, SynthGrammar],
) -> tuple[TranslationLexicon, dict[str, FunctionWordLexicon]]:
    """Exact bilingual lexicon and function-word lists for a grammar pair."""
    g1, g2 = spec.grammars if isinstance(spec, SynthSpec) else spec
    pair = LanguagePair(g1.language, g2.language)
    rows = []
    for cls in (*CONTENT_CLASSES, *FUNCTION_CLASSES):
        table1 = g1.content.get(cls) or g1.function.get(cls)
        table2 = g2.content.get(cls) or g2.function.get(cls)
        if len(table1) != len(table2):
            raise InputError(f"class {cls} vocabularies are not aligned")
        for a, b in zip(table1, table2):
            rows.append((g1.language, a, b, 0.0))
            rows.append((g2.language, b, a, 0.0))
    fn_rows = [(g.language, cls, w) for g in (g1, g2) for cls in FUNCTION_CLASSES for w in g.function[cls]]
    return build_translation_lexicon(pair, rows), build_function_lexicons(fn_rows)


def write_truth(truth: Mapping[str, str], corpus: Corpus, path: str | Path) -> None:
    kinds = {u.id: u.kind.value for u in corpus}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "matrix_language", "kind"])
        for uid, ml in truth.items():
            writer.writerow([uid, ml, kinds[uid]])


def read_truth(path: str | Path) -> dict[str, str]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and ("id" not in rows[0] or "matrix_language" not in rows[0]):
        raise InputError(f"{path}: truth CSV needs 'id' and 'matrix_language' columns")
    return {r["id"]: r["matrix_language"] for r in rows}


def embedded_runs(utterance: Utterance, matrix_language: str) -> list[int]:
    """Lengths of the maximal runs of non-matrix tokens."""
    runs: list[int] = []
    current = 0
    for tok in utterance.tokens:
        if tok.lid != matrix_language:
            current += 1
        elif current:
            runs.append(current)
            current = 0
    if current:
        runs.append(current)
    return runs

