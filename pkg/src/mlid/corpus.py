"""Corpus ingestion: tokens, utterances, script tagging and kind classification.

The on-disk format is JSONL, one utterance per line::

    {"id": "u1", "speaker": "s01", "tokens": [{"surface": "毕业", "lid": null}, ...]}

A ``lid`` of ``null`` means the token still has to be tagged by script.
"""

from __future__ import annotations

import json
import unicodedata
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from mlid.errors import InputError

OTHER = "other"

LATIN = "latin"
HAN = "han"
MIXED = "mixed"
NEUTRAL = "neutral"

# Writing system of each language the package knows how to handle.
LANGUAGE_SCRIPTS: dict[str, str] = {
    "en": LATIN,
    "es": LATIN,
    "zh": HAN,
}


class Kind(str, Enum):
    MONOLINGUAL_L1 = "monolingual_l1"
    MONOLINGUAL_L2 = "monolingual_l2"
    CODE_SWITCHED = "code_switched"


@dataclass(frozen=True)
class LanguagePair:
    l1: str
    l2: str

    def __post_init__(self) -> None:
        for code in (self.l1, self.l2):
            if not code or not code.isascii() or code != code.lower() or not code.isalpha():
                raise InputError(f"language code must be non-empty lowercase ASCII, got {code!r}")
        if self.l1 == self.l2:
            raise InputError(f"language pair needs two distinct languages, got {self.l1!r} twice")

    @classmethod
    def parse(cls, text: str) -> LanguagePair:
        """Build a pair from ``"en,zh"`` style text."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise InputError(f"expected two comma-separated language codes, got {text!r}")
        return cls(parts[0], parts[1])

    @property
    def languages(self) -> tuple[str, str]:
        return (self.l1, self.l2)

    def other(self, language: str) -> str:
        if language == self.l1:
            return self.l2
        if language == self.l2:
            return self.l1
        raise InputError(f"{language!r} is not part of the pair ({self.l1}, {self.l2})")

    def swapped(self) -> LanguagePair:
        return LanguagePair(self.l2, self.l1)

    def __str__(self) -> str:
        return f"{self.l1},{self.l2}"


def char_script(ch: str) -> str:
    """Script class of a single character: LATIN, HAN or NEUTRAL."""
    if not ch.isalpha():
        return NEUTRAL
    name = unicodedata.name(ch, "")
    if name.startswith("CJK UNIFIED IDEOGRAPH") or name.startswith("CJK COMPATIBILITY IDEOGRAPH"):
        return HAN
    if name.startswith("LATIN"):
        return LATIN
    return NEUTRAL


def token_script(surface: str) -> str:
    """Majority script over the non-neutral characters of ``surface``.

    A tie between Latin and Han characters gives MIXED; a token without any
    letter of either script is NEUTRAL.
    """
    latin = han = 0
    for ch in surface:
        script = char_script(ch)
        if script == LATIN:
            latin += 1
        elif script == HAN:
            han += 1
    if latin == han:
        return NEUTRAL if latin == 0 else MIXED
    return LATIN if latin > han else HAN


@dataclass(frozen=True)
class Token:
    surface: str
    lid: str | None = None

    def __post_init__(self) -> None:
        if not self.surface:
            raise InputError("token surface must be non-empty")
        if any(ch.isspace() for ch in self.surface):
            raise InputError(f"token surface contains whitespace: {self.surface!r}")

    @property
    def script(self) -> str:
        return token_script(self.surface)


@dataclass(frozen=True)
class Utterance:
    id: str
    tokens: tuple[Token, ...]
    speaker: str | None = None
    kind: Kind | None = None

    def __post_init__(self) -> None:
        if not self.tokens:
            raise InputError(f"utterance {self.id!r} has no tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def lids(self) -> list[str | None]:
        return [t.lid for t in self.tokens]

    def text(self) -> str:
        return " ".join(self.surfaces)


@dataclass(frozen=True)
class Corpus:
    pair: LanguagePair
    utterances: tuple[Utterance, ...]
    splits: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for utt in self.utterances:
            if utt.id in seen:
                raise InputError(f"duplicate utterance id {utt.id!r}")
            seen.add(utt.id)
        owner: dict[str, str] = {}
        for name, ids in self.splits.items():
            for uid in ids:
                if uid not in seen:
                    raise InputError(f"split {name!r} references unknown utterance {uid!r}")
                if uid in owner:
                    raise InputError(f"utterance {uid!r} is in both splits {owner[uid]!r} and {name!r}")
                owner[uid] = name

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    def by_id(self) -> dict[str, Utterance]:
        return {u.id: u for u in self.utterances}

    def split(self, name: str) -> list[Utterance]:
        if name not in self.splits:
            raise InputError(f"unknown split {name!r}; available: {sorted(self.splits)}")
        index = self.by_id()
        return [index[uid] for uid in self.splits[name]]

    def code_switched(self) -> list[Utterance]:
        return [u for u in self.utterances if u.kind is Kind.CODE_SWITCHED]

    def monolingual(self, language: str | None = None) -> list[Utterance]:
        """Monolingual utterances, optionally only those in ``language``."""
        if language is None:
            kinds = {Kind.MONOLINGUAL_L1, Kind.MONOLINGUAL_L2}
        elif language == self.pair.l1:
            kinds = {Kind.MONOLINGUAL_L1}
        elif language == self.pair.l2:
            kinds = {Kind.MONOLINGUAL_L2}
        else:
            raise InputError(f"{language!r} is not part of the pair {self.pair}")
        return [u for u in self.utterances if u.kind in kinds]


def tag_by_script(utterance: Utterance, pair: LanguagePair) -> Utterance:
    """Assign a language to every untagged token from its writing system.

    Tokens that already carry a lid are left alone. Han-majority tokens go
    to the Han-script language, Latin-majority tokens to the Latin-script
    one. Neutral or mixed tokens take the lid of the nearest preceding
    script-bearing token (the nearest following one at the start of the
    utterance); with no such token at all they become OTHER.
    """
    scripts = {LANGUAGE_SCRIPTS.get(pair.l1), LANGUAGE_SCRIPTS.get(pair.l2)}
    if scripts != {LATIN, HAN}:
        raise InputError(
            f"script tagging inapplicable for pair ({pair.l1}, {pair.l2}): "
            "needs one Latin-script and one Han-script language; supply explicit lids"
        )
    by_script = {LANGUAGE_SCRIPTS[pair.l1]: pair.l1, LANGUAGE_SCRIPTS[pair.l2]: pair.l2}

    lids: list[str | None] = []
    for tok in utterance.tokens:
        if tok.lid is not None:
            lids.append(tok.lid)
        else:
            lids.append(by_script.get(tok.script))

    resolved = list(lids)
    last: str | None = None
    for i, lid in enumerate(lids):
        if lid is None:
            resolved[i] = last
        else:
            last = lid
    following: str | None = None
    for i in range(len(lids) - 1, -1, -1):
        if lids[i] is not None:
            following = lids[i]
        elif resolved[i] is None:
            resolved[i] = following if following is not None else OTHER

    tokens = tuple(
        tok if tok.lid == lid else replace(tok, lid=lid)
        for tok, lid in zip(utterance.tokens, resolved)
    )
    return replace(utterance, tokens=tokens)


def classify_kind(utterance: Utterance, pair: LanguagePair) -> Kind:
    """Monolingual in one language, or code-switched when both occur."""
    present = set()
    for tok in utterance.tokens:
        if tok.lid is None:
            raise InputError(f"utterance {utterance.id!r} has untagged token {tok.surface!r}")
        if tok.lid != OTHER and tok.lid not in pair.languages:
            raise InputError(
                f"utterance {utterance.id!r}: lid {tok.lid!r} is neither {pair.l1!r}, {pair.l2!r} nor {OTHER!r}"
            )
        present.add(tok.lid)
    has1, has2 = pair.l1 in present, pair.l2 in present
    if has1 and has2:
        return Kind.CODE_SWITCHED
    if has1:
        return Kind.MONOLINGUAL_L1
    if has2:
        return Kind.MONOLINGUAL_L2
    raise InputError(f"utterance {utterance.id!r} contains only {OTHER!r} tokens")


def prepare_utterance(utterance: Utterance, pair: LanguagePair) -> Utterance:
    """Tag by script if needed, then classify."""
    if any(t.lid is None for t in utterance.tokens):
        utterance = tag_by_script(utterance, pair)
    return replace(utterance, kind=classify_kind(utterance, pair))


def make_utterance(
    uid: str,
    tokens: Iterable[tuple[str, str | None] | str],
    pair: LanguagePair,
    speaker: str | None = None,
) -> Utterance:
    """Convenience constructor: tokens are ``(surface, lid)`` pairs or bare surfaces."""
    toks = []
    for item in tokens:
        if isinstance(item, str):
            toks.append(Token(item))
        else:
            toks.append(Token(item[0], item[1]))
    return prepare_utterance(Utterance(uid, tuple(toks), speaker), pair)


def _parse_line(line: str, lineno: int) -> Utterance:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise InputError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(record, dict):
        raise InputError(f"line {lineno}: expected a JSON object")
    uid = record.get("id")
    if not isinstance(uid, str) or not uid:
        raise InputError(f"line {lineno}: missing or non-string 'id'")
    speaker = record.get("speaker")
    if speaker is not None and not isinstance(speaker, str):
        raise InputError(f"line {lineno}: 'speaker' must be a string or null")
    raw_tokens = record.get("tokens")
    if not isinstance(raw_tokens, list) or not raw_tokens:
        raise InputError(f"line {lineno}: 'tokens' must be a non-empty list")
    tokens = []
    for raw in raw_tokens:
        if not isinstance(raw, dict) or not isinstance(raw.get("surface"), str):
            raise InputError(f"line {lineno}: each token needs a string 'surface'")
        lid = raw.get("lid")
        if lid is not None and not isinstance(lid, str):
            raise InputError(f"line {lineno}: token 'lid' must be a string or null")
        try:
            tokens.append(Token(raw["surface"], lid.lower() if lid else None))
        except InputError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
    return Utterance(uid, tuple(tokens), speaker)


def load_splits(path: str | Path) -> dict[str, tuple[str, ...]]:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid splits JSON ({exc.msg})") from None
    if not isinstance(raw, dict) or not all(isinstance(v, list) for v in raw.values()):
        raise InputError(f"{path}: splits must map split names to lists of ids")
    return {str(k): tuple(str(i) for i in v) for k, v in raw.items()}


def load_corpus(
    path: str | Path,
    pair: LanguagePair,
    splits: str | Path | Mapping[str, Sequence[str]] | None = None,
) -> Corpus:
    """Read, tag and classify a JSONL corpus."""
    utterances = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            utt = _parse_line(line, lineno)
            if utt.id in seen:
                raise InputError(f"line {lineno}: duplicate utterance id {utt.id!r}")
            seen.add(utt.id)
            try:
                utterances.append(prepare_utterance(utt, pair))
            except InputError as exc:
                raise InputError(f"line {lineno}: {exc}") from None
    if not utterances:
        raise InputError(f"{path}: corpus is empty")
    if splits is None:
        split_map: dict[str, tuple[str, ...]] = {}
    elif isinstance(splits, Mapping):
        split_map = {k: tuple(v) for k, v in splits.items()}
    else:
        split_map = load_splits(splits)
    return Corpus(pair, tuple(utterances), split_map)


def utterance_to_record(utt: Utterance) -> dict:
    return {
        "id": utt.id,
        "speaker": utt.speaker,
        "tokens": [{"surface": t.surface, "lid": t.lid} for t in utt.tokens],
    }


def dump_corpus(corpus: Corpus | Iterable[Utterance], path: str | Path) -> None:
    """Write utterances back as JSONL (lids written explicitly)."""
    with open(path, "w", encoding="utf-8") as fh:
        for utt in corpus:
            fh.write(json.dumps(utterance_to_record(utt), ensure_ascii=False) + "\n")


def dump_splits(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: list(v) for k, v in corpus.splits.items()}, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
