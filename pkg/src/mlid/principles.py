"""Text-based matrix language determination: singleton, function-word and token-majority rules."""

from __future__ import annotations

import json
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from mlid.corpus import OTHER, Corpus, Kind, Utterance
from mlid.errors import InputError
from mlid.lexicon import FUNCTION_CLASSES, FunctionWordLexicon, function_class_of

UNDETERMINED = "undetermined"

P11 = "P11"
P12 = "P12"
P2 = "P2"
BASELINE = "BASELINE"
# Labels produced by posterior-mapping classifiers share the verdict format.
LID_MAP = "LID_MAP"
MLID_P11 = "MLID_P11"
MLID_P12 = "MLID_P12"
MLID_P2 = "MLID_P2"
PRINCIPLES = (P11, P12, P2, BASELINE, LID_MAP, MLID_P11, MLID_P12, MLID_P2)

Span = tuple[int, int]


@dataclass(frozen=True)
class MLVerdict:
    """A principle's decision for one utterance.

    ``evidence`` holds half-open token index ranges ``(start, end)``.
    """

    id: str
    principle: str
    label: str
    evidence: tuple[Span, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.principle not in PRINCIPLES:
            raise InputError(f"unknown principle {self.principle!r}")
        if self.label == UNDETERMINED and self.evidence:
            raise InputError("an undetermined verdict carries no evidence")
        if self.label != UNDETERMINED and self.principle in (P11, P2) and not self.evidence:
            raise InputError(f"{self.principle} verdict {self.label!r} needs evidence")

    @property
    def determined(self) -> bool:
        return self.label != UNDETERMINED

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "principle": self.principle,
            "label": self.label,
            "evidence": [list(s) for s in self.evidence],
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> MLVerdict:
        return cls(
            str(rec["id"]),
            str(rec["principle"]),
            str(rec["label"]),
            tuple((int(a), int(b)) for a, b in rec.get("evidence", [])),
        )


def _require_cs(utterance: Utterance) -> None:
    if utterance.kind is not Kind.CODE_SWITCHED:
        raise InputError(f"utterance {utterance.id!r} is not code-switched (kind={utterance.kind})")


def language_runs(utterance: Utterance) -> list[tuple[str, list[int]]]:
    """Maximal same-language runs, skipping OTHER tokens.

    Each run is ``(lid, token indices)``. OTHER tokens are transparent: they
    neither belong to a run nor break one.
    """
    runs: list[tuple[str, list[int]]] = []
    for i, tok in enumerate(utterance.tokens):
        if tok.lid == OTHER:
            continue
        if runs and runs[-1][0] == tok.lid:
            runs[-1][1].append(i)
        else:
            runs.append((tok.lid, [i]))
    return runs


def _spans(indices: Iterable[int]) -> tuple[Span, ...]:
    """Collapse sorted indices into contiguous half-open spans."""
    spans: list[list[int]] = []
    for i in indices:
        if spans and spans[-1][1] == i:
            spans[-1][1] = i + 1
        else:
            spans.append([i, i + 1])
    return tuple((a, b) for a, b in spans)


def determine_p11(utterance: Utterance) -> MLVerdict:
    """Singleton principle.

    The embedded language is the one whose words occur only as single-word
    insertions; the other language, which supplies their context, is the
    matrix language. When both or neither language qualifies the verdict is
    undetermined.
    """
    _require_cs(utterance)
    runs = language_runs(utterance)
    langs = []
    for lid, _ in runs:
        if lid not in langs:
            langs.append(lid)
    singleton_only = [
        lang for lang in langs if all(len(idx) == 1 for lid, idx in runs if lid == lang)
    ]
    if len(singleton_only) != 1:
        return MLVerdict(utterance.id, P11, UNDETERMINED)
    embedded = singleton_only[0]
    matrix = next(lang for lang in langs if lang != embedded)
    evidence = _spans(idx[0] for lid, idx in runs if lid == embedded)
    return MLVerdict(utterance.id, P11, matrix, evidence)


def determine_p2(
    utterance: Utterance,
    lexicons: Mapping[str, FunctionWordLexicon] | None = None,
    pos_tags: Sequence[str | None] | None = None,
) -> MLVerdict:
    """Function-word principle.

    A token is a function word if its lexicon lists it as DET/AUX/SCONJ/CCONJ
    or, when ``pos_tags`` from an external tagger are given, if its tag is one
    of those. The verdict is the single language contributing function words.
    """
    _require_cs(utterance)
    if pos_tags is not None:
        if len(pos_tags) != len(utterance.tokens):
            raise InputError(
                f"utterance {utterance.id!r}: {len(pos_tags)} POS tags for {len(utterance.tokens)} tokens"
            )
    else:
        if lexicons is None:
            raise InputError("determine_p2 needs function-word lexicons or POS tags")
        for lang in {t.lid for t in utterance.tokens if t.lid != OTHER}:
            if lang not in lexicons:
                raise InputError(f"no function-word lexicon for language {lang!r}")

    hits: dict[str, list[int]] = {}
    for i, tok in enumerate(utterance.tokens):
        if tok.lid == OTHER:
            continue
        if pos_tags is not None:
            tag = pos_tags[i]
            is_function = tag is not None and tag.upper() in FUNCTION_CLASSES
        else:
            is_function = function_class_of(tok, lexicons[tok.lid]) is not None
        if is_function:
            hits.setdefault(tok.lid, []).append(i)
    if len(hits) != 1:
        return MLVerdict(utterance.id, P2, UNDETERMINED)
    (lang, idx), = hits.items()
    return MLVerdict(utterance.id, P2, lang, _spans(idx))


def determine_baseline(utterance: Utterance) -> MLVerdict:
    """Token-majority baseline: the language with strictly more tokens, ties undetermined."""
    counts: dict[str, list[int]] = {}
    for i, tok in enumerate(utterance.tokens):
        if tok.lid is None:
            raise InputError(f"utterance {utterance.id!r} has untagged tokens")
        if tok.lid != OTHER:
            counts.setdefault(tok.lid, []).append(i)
    if not counts:
        raise InputError(f"utterance {utterance.id!r} has no language-tagged tokens")
    ranked = sorted(counts.items(), key=lambda kv: len(kv[1]), reverse=True)
    if len(ranked) > 1 and len(ranked[0][1]) == len(ranked[1][1]):
        return MLVerdict(utterance.id, BASELINE, UNDETERMINED)
    lang, idx = ranked[0]
    return MLVerdict(utterance.id, BASELINE, lang, _spans(idx))


def coverage(
    corpus: Corpus,
    principle: Callable[[Utterance], MLVerdict] | Mapping[str, MLVerdict],
) -> float:
    """Fraction of code-switched utterances given a determined verdict.

    ``principle`` is either a callable applied to each CS utterance or a
    mapping of precomputed verdicts by utterance id (missing ids count as
    undetermined).
    """
    cs = corpus.code_switched()
    if not cs:
        raise InputError("coverage needs at least one code-switched utterance")
    if isinstance(principle, Mapping):
        determined = sum(1 for u in cs if u.id in principle and principle[u.id].determined)
    else:
        determined = sum(1 for u in cs if principle(u).determined)
    return determined / len(cs)


def annotate(
    utterances: Iterable[Utterance],
    principle: Callable[[Utterance], MLVerdict],
    jobs: int = 1,
) -> list[MLVerdict]:
    """Apply ``principle`` to every utterance, results in input order."""
    items = list(utterances)
    if jobs <= 1:
        return [principle(u) for u in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(principle, items))


def write_verdicts(verdicts: Iterable[MLVerdict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in verdicts:
            fh.write(json.dumps(v.to_record(), ensure_ascii=False) + "\n")


def read_verdicts(path: str | Path) -> list[MLVerdict]:
    verdicts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                verdicts.append(MLVerdict.from_record(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: bad verdict record ({exc})") from None
    return verdicts
