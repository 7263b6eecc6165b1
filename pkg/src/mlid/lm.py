"""Morpheme tokenization and interpolated Kneser-Ney n-gram language models."""

from __future__ import annotations

import itertools
import json
import math
import random
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Protocol

from mlid.corpus import HAN, LANGUAGE_SCRIPTS, LATIN, Token, Utterance, char_script
from mlid.errors import InputError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

FORMAT_NAME = "mlid-ngram"
FORMAT_VERSION = 1

MIN_STEM = 3
DISCOUNT_RANGE = (0.1, 0.9)


@dataclass(frozen=True)
class MorphemeSequence:
    morphemes: tuple[str, ...]
    source_token_spans: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.morphemes:
            raise InputError("morpheme sequence is empty")
        if len(self.morphemes) != len(self.source_token_spans):
            raise InputError("every morpheme needs a source token index")
        if any(b < a for a, b in zip(self.source_token_spans, self.source_token_spans[1:])):
            raise InputError("source token indices must be non-decreasing")

    def __len__(self) -> int:
        return len(self.morphemes)

    def words(self) -> list[tuple[str, ...]]:
        """Morphemes grouped back into their source tokens."""
        groups: list[list[str]] = []
        last = None
        for m, src in zip(self.morphemes, self.source_token_spans):
            if src != last:
                groups.append([])
                last = src
            groups[-1].append(m)
        return [tuple(g) for g in groups]

    @classmethod
    def from_words(cls, words: Sequence[Sequence[str]]) -> MorphemeSequence:
        morphemes: list[str] = []
        spans: list[int] = []
        for i, word in enumerate(words):
            morphemes.extend(word)
            spans.extend([i] * len(word))
        return cls(tuple(morphemes), tuple(spans))

    @classmethod
    def plain(cls, morphemes: Sequence[str]) -> MorphemeSequence:
        """One morpheme per token."""
        return cls(tuple(morphemes), tuple(range(len(morphemes))))


@lru_cache(maxsize=None)
def suffix_table(language: str) -> tuple[str, ...]:
    """Bundled suffixes for a Latin-script language, longest first."""
    res = resources.files("mlid").joinpath(f"data/suffixes_{language}.txt")
    if not res.is_file():
        return ()
    lines = res.read_text(encoding="utf-8").splitlines()
    sufs = {ln.strip().lower() for ln in lines if ln.strip() and not ln.startswith("#")}
    return tuple(sorted(sufs, key=lambda s: (-len(s), s)))


def split_suffix(word: str, suffixes: Sequence[str]) -> list[str]:
    """Split off the longest listed suffix that leaves a stem of MIN_STEM characters."""
    if not word.isalpha():
        return [word]
    for suf in suffixes:
        if word.endswith(suf) and len(word) - len(suf) >= MIN_STEM:
            return [word[: -len(suf)], "+" + suf]
    return [word]


def _split_han(word: str) -> list[str]:
    """One morpheme per Han character; runs of other characters stay together."""
    out: list[str] = []
    buf = ""
    for ch in word:
        if char_script(ch) == HAN:
            if buf:
                out.append(buf)
                buf = ""
            out.append(ch)
        else:
            buf += ch
    if buf:
        out.append(buf)
    return out


def tokenize_morphemes(tokens: Sequence[str | Token] | Utterance, language: str) -> MorphemeSequence:
    """Split words into morphemes the way the language's LM expects.

    Latin-script languages get a single stem/suffix split from the bundled
    suffix table; Han-script languages get one morpheme per character.
    Everything is lowercased.
    """
    script = LANGUAGE_SCRIPTS.get(language)
    if script is None:
        raise InputError(f"unsupported language {language!r} for morpheme tokenization")
    if isinstance(tokens, Utterance):
        tokens = tokens.tokens
    suffixes = suffix_table(language) if script == LATIN else ()
    morphemes: list[str] = []
    spans: list[int] = []
    for i, tok in enumerate(tokens):
        word = (tok.surface if isinstance(tok, Token) else tok).lower()
        parts = _split_han(word) if script == HAN else split_suffix(word, suffixes)
        morphemes.extend(parts)
        spans.extend([i] * len(parts))
    return MorphemeSequence(tuple(morphemes), tuple(spans))


class SequenceScorer(Protocol):
    """Anything that can score a morpheme sequence in natural-log units."""

    language: str

    def log_prob(self, seq: MorphemeSequence | Sequence[str]) -> float: ...


def _as_morphemes(seq: MorphemeSequence | Sequence[str]) -> tuple[str, ...]:
    return seq.morphemes if isinstance(seq, MorphemeSequence) else tuple(seq)


def estimate_discount(counts: Iterable[int]) -> float:
    """``n1 / (n1 + 2 n2)`` from count-of-counts, clipped to DISCOUNT_RANGE."""
    hist = Counter(counts)
    n1, n2 = hist.get(1, 0), hist.get(2, 0)
    if n1 + 2 * n2 == 0:
        return 0.5
    lo, hi = DISCOUNT_RANGE
    return min(hi, max(lo, n1 / (n1 + 2 * n2)))


@dataclass
class NGramLM:
    """Interpolated Kneser-Ney model over morphemes.

    The highest order uses raw counts, lower orders use continuation counts
    (number of distinct left neighbours). The unigram level interpolates with
    a uniform distribution over the vocabulary plus UNK and EOS, so every
    morpheme gets non-zero probability.
    """

    language: str
    order: int
    vocabulary: frozenset[str]
    ngram_counts: dict[tuple[str, ...], int]
    discounts: tuple[float, ...] = ()
    min_count: int = 2
    _tables: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.order < 1:
            raise InputError(f"order must be >= 1, got {self.order}")
        n = self.order
        raw: list[Counter] = [Counter() for _ in range(n + 1)]
        for gram, c in self.ngram_counts.items():
            if len(gram) != n:
                raise InputError(f"stored n-gram {gram} does not have order {n}")
            for k in range(1, n + 1):
                raw[k][gram[n - k:]] += c
        counts: list[dict[tuple[str, ...], int]] = [{} for _ in range(n + 1)]
        counts[n] = dict(raw[n])
        for k in range(1, n):
            cont: Counter = Counter()
            for gram in raw[k + 1]:
                cont[gram[1:]] += 1
            counts[k] = dict(cont)
        totals: list[dict[tuple[str, ...], int]] = [{} for _ in range(n + 1)]
        types: list[dict[tuple[str, ...], int]] = [{} for _ in range(n + 1)]
        for k in range(1, n + 1):
            for gram, c in counts[k].items():
                h = gram[:-1]
                totals[k][h] = totals[k].get(h, 0) + c
                types[k][h] = types[k].get(h, 0) + 1
        if not self.discounts:
            self.discounts = tuple(estimate_discount(counts[k].values()) for k in range(1, n + 1))
        if len(self.discounts) != n or not all(0.0 < d <= 1.0 for d in self.discounts):
            raise InputError(f"need {n} discounts in (0, 1], got {self.discounts}")
        self._tables = [counts, totals, types]

    @property
    def support(self) -> tuple[str, ...]:
        """Every symbol the model can predict."""
        return tuple(sorted(self.vocabulary)) + (UNK, EOS)

    def map_morpheme(self, m: str) -> str:
        return m if m in self.vocabulary or m == EOS else UNK

    def prob(self, morpheme: str, history: Sequence[str] = ()) -> float:
        """``p(morpheme | history)``; history is padded with BOS on the left."""
        counts, totals, types = self._tables
        w = self.map_morpheme(morpheme)
        ctx = [BOS] * (self.order - 1) + [h if h == BOS else self.map_morpheme(h) for h in history]
        ctx = ctx[len(ctx) - (self.order - 1):] if self.order > 1 else []
        p = 1.0 / (len(self.vocabulary) + 2)
        for k in range(1, self.order + 1):
            h = tuple(ctx[len(ctx) - (k - 1):]) if k > 1 else ()
            total = totals[k].get(h, 0)
            if total == 0:
                continue
            d = self.discounts[k - 1]
            c = counts[k].get(h + (w,), 0)
            p = max(c - d, 0.0) / total + d * types[k][h] / total * p
        return p

    def position_log_probs(self, seq: MorphemeSequence | Sequence[str]) -> list[float]:
        """Log conditional probability of each morpheme and the final EOS."""
        ms = list(_as_morphemes(seq)) + [EOS]
        out = []
        for i, m in enumerate(ms):
            out.append(math.log(self.prob(m, ms[max(0, i - self.order + 1): i])))
        return out

    def log_prob(self, seq: MorphemeSequence | Sequence[str]) -> float:
        return math.fsum(self.position_log_probs(seq))

    @classmethod
    def fit(
        cls,
        sequences: Iterable[Sequence[str]],
        language: str,
        order: int = 3,
        min_count: int = 2,
    ) -> NGramLM:
        """Count n-grams over morpheme sequences (UNK below ``min_count``)."""
        if order < 1:
            raise InputError(f"order must be >= 1, got {order}")
        seqs = [list(s) for s in sequences if len(s) > 0]
        if not seqs:
            raise InputError("no training data")
        freq = Counter(m for s in seqs for m in s)
        vocab = frozenset(m for m, c in freq.items() if c >= min_count)
        grams: Counter = Counter()
        for s in seqs:
            padded = [BOS] * (order - 1) + [m if m in vocab else UNK for m in s] + [EOS]
            for i in range(order - 1, len(padded)):
                grams[tuple(padded[i - order + 1: i + 1])] += 1
        return cls(language, order, vocab, dict(grams), min_count=min_count)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "language": self.language,
            "order": self.order,
            "min_count": self.min_count,
            "discounts": list(self.discounts),
            "vocabulary": sorted(self.vocabulary),
            "ngrams": [[list(g), c] for g, c in sorted(self.ngram_counts.items())],
        }

    @classmethod
    def from_dict(cls, data: dict) -> NGramLM:
        if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
            raise InputError(f"not a {FORMAT_NAME} v{FORMAT_VERSION} model")
        return cls(
            data["language"],
            int(data["order"]),
            frozenset(data["vocabulary"]),
            {tuple(g): int(c) for g, c in data["ngrams"]},
            tuple(float(d) for d in data["discounts"]),
            int(data["min_count"]),
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> NGramLM:
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"{path}: unreadable language model ({exc})") from None


def _to_sequence(item: Utterance | MorphemeSequence | Sequence[str], language: str) -> MorphemeSequence:
    if isinstance(item, MorphemeSequence):
        return item
    return tokenize_morphemes(item, language)


def train_lm(
    data: Iterable[Utterance | MorphemeSequence | Sequence[str]],
    language: str,
    order: int = 3,
    min_count: int = 2,
) -> NGramLM:
    """Train on utterances (tokenized here) or ready-made morpheme sequences."""
    seqs = [_to_sequence(item, language).morphemes for item in data]
    if not seqs:
        raise InputError(f"no training utterances for language {language!r}")
    return NGramLM.fit(seqs, language, order, min_count)


def log_prob(model: SequenceScorer, seq: MorphemeSequence | Sequence[str]) -> float:
    return model.log_prob(seq)


def perplexity(model: NGramLM, data: Iterable[Utterance | MorphemeSequence | Sequence[str]]) -> float:
    """``exp(-total log-prob / scored symbols)``, EOS included in the count."""
    total = 0.0
    n = 0
    for item in data:
        seq = _to_sequence(item, model.language)
        total += model.log_prob(seq)
        n += len(seq) + 1
    if n == 0:
        raise InputError("perplexity needs at least one utterance")
    return math.exp(-total / n)


def _sample_orders(n_words: int, limit: int, seed: int) -> list[tuple[int, ...]]:
    """Up to ``limit`` distinct word orders other than the identity."""
    identity = tuple(range(n_words))
    if math.factorial(n_words) - 1 <= limit:
        return [p for p in itertools.permutations(identity) if p != identity]
    rng = random.Random(seed)
    found: list[tuple[int, ...]] = []
    seen = {identity}
    attempts = 0
    while len(found) < limit and attempts < limit * 50:
        attempts += 1
        perm = list(identity)
        rng.shuffle(perm)
        t = tuple(perm)
        if t not in seen:
            seen.add(t)
            found.append(t)
    return found


def word_order_probe(
    model: SequenceScorer,
    seq: MorphemeSequence,
    max_permutations: int = 20,
    seed: int = 0,
) -> MorphemeSequence:
    """Best-scoring word order among the original and sampled permutations.

    Words (the morphemes of one source token) move as units. Ties go to the
    original order.
    """
    words = seq.words()
    if len(words) < 2:
        raise InputError("word-order probe needs at least two words")
    best, best_lp = seq, model.log_prob(seq)
    for perm in _sample_orders(len(words), max_permutations, seed):
        cand = MorphemeSequence.from_words([words[i] for i in perm])
        lp = model.log_prob(cand)
        if lp > best_lp:
            best, best_lp = cand, lp
    return best


def probe_accuracy(
    model: SequenceScorer,
    sequences: Iterable[MorphemeSequence],
    max_permutations: int = 20,
    seed: int = 0,
) -> float:
    """Share of sequences (with >= 2 words) whose original order wins the probe."""
    hits = total = 0
    for i, seq in enumerate(sequences):
        if len(seq.words()) < 2:
            continue
        total += 1
        pred = word_order_probe(model, seq, max_permutations, seed + i)
        hits += pred.words() == seq.words()
    if total == 0:
        raise InputError("no sequence with at least two words to probe")
    return hits / total
