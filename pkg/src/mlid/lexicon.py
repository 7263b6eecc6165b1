"""Word-by-word translation lexicons and closed-class function-word lists."""

from __future__ import annotations

import csv
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from mlid.corpus import OTHER, LanguagePair, Token, Utterance
from mlid.errors import InputError

FUNCTION_CLASSES = ("DET", "AUX", "SCONJ", "CCONJ")


def fold(surface: str) -> str:
    return surface.casefold()


@dataclass(frozen=True)
class TranslationLexicon:
    """Bilingual lexicon, one candidate list per direction.

    ``entries[src_lang]`` maps a case-folded surface in ``src_lang`` to its
    candidates in the other language of the pair, best first.
    """

    pair: LanguagePair
    entries: Mapping[str, Mapping[str, tuple[str, ...]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for lang, table in self.entries.items():
            if lang not in self.pair.languages:
                raise InputError(f"lexicon direction {lang!r} not in pair {self.pair}")
            for src, cands in table.items():
                if not cands:
                    raise InputError(f"lexicon entry {src!r} ({lang}) has no candidates")

    def lookup(self, surface: str, src_lang: str) -> str | None:
        """First candidate for ``surface`` translated out of ``src_lang``."""
        cands = self.entries.get(src_lang, {}).get(fold(surface))
        return cands[0] if cands else None

    def __len__(self) -> int:
        return sum(len(t) for t in self.entries.values())


def build_translation_lexicon(
    pair: LanguagePair, rows: Iterable[tuple[str, str, str, float]]
) -> TranslationLexicon:
    """Build a lexicon from ``(src_lang, src_surface, tgt_surface, priority)`` rows.

    Lower priority values win; ties keep row order. Multi-word targets are
    cut to their first word so translation never changes the token count.
    """
    staged: dict[str, dict[str, list[tuple[float, int, str]]]] = {pair.l1: {}, pair.l2: {}}
    for n, (src_lang, src, tgt, priority) in enumerate(rows):
        if src_lang not in staged:
            raise InputError(f"lexicon row {n + 1}: source language {src_lang!r} not in pair {pair}")
        words = tgt.split()
        if not src.strip() or not words:
            raise InputError(f"lexicon row {n + 1}: empty source or target")
        staged[src_lang].setdefault(fold(src.strip()), []).append((priority, n, words[0]))
    entries = {
        lang: {src: tuple(w for _, _, w in sorted(cands)) for src, cands in table.items()}
        for lang, table in staged.items()
    }
    return TranslationLexicon(pair, entries)


def load_translation_lexicon(path: str | Path, pair: LanguagePair) -> TranslationLexicon:
    """Read a TSV with columns src_lang, src_surface, tgt_surface, priority."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not rec or rec[0].startswith("#") or (lineno == 1 and rec[0] == "src_lang"):
                continue
            if len(rec) != 4:
                raise InputError(f"{path}:{lineno}: expected 4 tab-separated columns, got {len(rec)}")
            try:
                priority = float(rec[3])
            except ValueError:
                raise InputError(f"{path}:{lineno}: priority {rec[3]!r} is not a number") from None
            rows.append((rec[0].strip().lower(), rec[1], rec[2], priority))
    return build_translation_lexicon(pair, rows)


def dump_translation_lexicon(lex: TranslationLexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["src_lang", "src_surface", "tgt_surface", "priority"])
        for lang in lex.pair.languages:
            for src, cands in sorted(lex.entries.get(lang, {}).items()):
                for rank, tgt in enumerate(cands):
                    writer.writerow([lang, src, tgt, rank])


def translate_word_by_word(
    utterance: Utterance | Sequence[Token], target: str, lex: TranslationLexicon
) -> tuple[list[str], int]:
    """Translate every token into ``target`` keeping position and length.

    Tokens already in ``target`` and OTHER tokens pass through. Tokens of the
    other language take their first lexicon candidate; when there is none
    the surface is kept and counted as out-of-vocabulary.
    """
    if target not in lex.pair.languages:
        raise InputError(f"target {target!r} not in lexicon pair {lex.pair}")
    source = lex.pair.other(target)
    tokens = utterance.tokens if isinstance(utterance, Utterance) else utterance
    out: list[str] = []
    oov = 0
    for tok in tokens:
        if tok.lid != source:
            out.append(tok.surface)
            continue
        translated = lex.lookup(tok.surface, source)
        if translated is None:
            oov += 1
            out.append(tok.surface)
        else:
            out.append(translated)
    return out, oov


@dataclass(frozen=True)
class FunctionWordLexicon:
    language: str
    classes: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        missing = [c for c in FUNCTION_CLASSES if c not in self.classes]
        extra = [c for c in self.classes if c not in FUNCTION_CLASSES]
        if missing or extra:
            raise InputError(f"{self.language}: function classes must be exactly {FUNCTION_CLASSES}")
        seen: dict[str, str] = {}
        for cls in FUNCTION_CLASSES:
            for word in self.classes[cls]:
                if word in seen:
                    raise InputError(
                        f"{self.language}: {word!r} listed under both {seen[word]} and {cls}"
                    )
                seen[word] = cls
        object.__setattr__(self, "_index", seen)

    def class_of(self, surface: str) -> str | None:
        return self._index.get(fold(surface))  # type: ignore[attr-defined]

    def words(self) -> set[str]:
        return set(self._index)  # type: ignore[attr-defined]


def function_class_of(token: Token, lex: FunctionWordLexicon) -> str | None:
    """DET/AUX/SCONJ/CCONJ for a function word, ``None`` for anything else."""
    if token.lid != lex.language:
        raise InputError(f"token {token.surface!r} is {token.lid!r}, lexicon is {lex.language!r}")
    return lex.class_of(token.surface)


def build_function_lexicons(rows: Iterable[tuple[str, str, str]]) -> dict[str, FunctionWordLexicon]:
    """Group ``(lang, class, surface)`` rows into one lexicon per language."""
    staged: dict[str, dict[str, set[str]]] = {}
    for lang, cls, surface in rows:
        cls = cls.upper()
        if cls not in FUNCTION_CLASSES:
            raise InputError(f"unknown function class {cls!r} for {surface!r}")
        table = staged.setdefault(lang, {c: set() for c in FUNCTION_CLASSES})
        table[cls].add(fold(surface))
    return {
        lang: FunctionWordLexicon(lang, {c: frozenset(ws) for c, ws in table.items()})
        for lang, table in staged.items()
    }


def load_function_lexicons(path: str | Path | None = None) -> dict[str, FunctionWordLexicon]:
    """Read a TSV with columns lang, class, surface.

    Without a path the bundled en/zh/es reference lists are used.
    """
    if path is None:
        text = resources.files("mlid").joinpath("data/function_words.tsv").read_text(encoding="utf-8")
        source = "function_words.tsv"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#") or (lineno == 1 and line.startswith("lang\t")):
            continue
        rec = line.split("\t")
        if len(rec) != 3:
            raise InputError(f"{source}:{lineno}: expected 3 tab-separated columns, got {len(rec)}")
        rows.append((rec[0].strip().lower(), rec[1].strip(), rec[2].strip()))
    return build_function_lexicons(rows)


def dump_function_lexicons(lexicons: Mapping[str, FunctionWordLexicon], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lang\tclass\tsurface\n")
        for lang in sorted(lexicons):
            for cls in FUNCTION_CLASSES:
                for word in sorted(lexicons[lang].classes[cls]):
                    fh.write(f"{lang}\t{cls}\t{word}\n")


def bundled_translation_lexicon(pair: LanguagePair) -> TranslationLexicon:
    """Small reference en/zh lexicon covering the worked examples."""
    name = f"translation_{pair.l1}_{pair.l2}.tsv"
    alt = f"translation_{pair.l2}_{pair.l1}.tsv"
    base = resources.files("mlid").joinpath("data")
    for candidate in (name, alt):
        res = base.joinpath(candidate)
        if res.is_file():
            with resources.as_file(res) as p:
                return load_translation_lexicon(p, pair)
    raise InputError(f"no bundled translation lexicon for pair {pair}")


__all__ = [
    "FUNCTION_CLASSES",
    "OTHER",
    "FunctionWordLexicon",
    "TranslationLexicon",
    "build_function_lexicons",
    "build_translation_lexicon",
    "bundled_translation_lexicon",
    "dump_function_lexicons",
    "dump_translation_lexicon",
    "function_class_of",
    "load_function_lexicons",
    "load_translation_lexicon",
    "translate_word_by_word",
]
