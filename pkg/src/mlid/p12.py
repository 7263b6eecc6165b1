"""Token-order principle: translate both ways, score with monolingual LMs, threshold the difference."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from mlid.corpus import Utterance
from mlid.errors import InputError
from mlid.lexicon import TranslationLexicon, translate_word_by_word
from mlid.lm import SequenceScorer, tokenize_morphemes
from mlid.principles import P12, MLVerdict


class Normalization(str, Enum):
    TOTAL = "total"
    PER_MORPHEME = "per_morpheme"


@dataclass(frozen=True)
class ScorePair:
    id: str
    lp1: float
    lp2: float
    oov1: int = 0
    oov2: int = 0

    def __post_init__(self) -> None:
        for name in ("lp1", "lp2"):
            v = getattr(self, name)
            if not math.isfinite(v) or v > 0:
                raise InputError(f"{self.id}: {name}={v} must be finite and <= 0")

    @property
    def difference(self) -> float:
        return self.lp1 - self.lp2


@dataclass(frozen=True)
class AlphaEstimate:
    log_alpha: float
    n1: int
    n2: int
    normalization: Normalization = Normalization.TOTAL

    def __post_init__(self) -> None:
        if not math.isfinite(self.log_alpha):
            raise InputError(f"log alpha is not finite: {self.log_alpha}")
        if self.n1 < 1 or self.n2 < 1:
            raise InputError("alpha estimate needs at least one utterance per language")

    def to_dict(self) -> dict:
        return {
            "log_alpha": self.log_alpha,
            "n1": self.n1,
            "n2": self.n2,
            "normalization": self.normalization.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> AlphaEstimate:
        return cls(float(data["log_alpha"]), int(data["n1"]), int(data["n2"]), Normalization(data["normalization"]))


def score_utterance(
    utterance: Utterance,
    lex: TranslationLexicon,
    lm1: SequenceScorer,
    lm2: SequenceScorer,
) -> ScorePair:
    """Translate the utterance into each language and score it with that language's LM."""
    l1, l2 = lex.pair.l1, lex.pair.l2
    if lm1.language != l1 or lm2.language != l2:
        raise InputError(
            f"LM languages ({lm1.language}, {lm2.language}) do not match the pair ({l1}, {l2})"
        )
    words1, oov1 = translate_word_by_word(utterance, l1, lex)
    words2, oov2 = translate_word_by_word(utterance, l2, lex)
    lp1 = lm1.log_prob(tokenize_morphemes(words1, l1))
    lp2 = lm2.log_prob(tokenize_morphemes(words2, l2))
    return ScorePair(utterance.id, lp1, lp2, oov1, oov2)


def decide(score: ScorePair, log_alpha: float, pair: tuple[str, str]) -> MLVerdict:
    """L1 when ``lp1 - lp2 >= log_alpha``, otherwise L2."""
    label = pair[0] if score.difference >= log_alpha else pair[1]
    return MLVerdict(score.id, P12, label)


def _utterance_score(model: SequenceScorer, utt: Utterance, normalization: Normalization) -> float:
    seq = tokenize_morphemes(utt, model.language)
    lp = model.log_prob(seq)
    if normalization is Normalization.PER_MORPHEME:
        return lp / len(seq)
    return lp


def alpha_from_scores(
    scores1: Sequence[float],
    scores2: Sequence[float],
    normalization: Normalization = Normalization.TOTAL,
) -> AlphaEstimate:
    """Difference of the mean monolingual log-probabilities."""
    if not scores1 or not scores2:
        raise InputError("alpha estimation needs monolingual utterances in both languages")
    log_alpha = math.fsum(scores1) / len(scores1) - math.fsum(scores2) / len(scores2)
    return AlphaEstimate(log_alpha, len(scores1), len(scores2), Normalization(normalization))


def estimate_alpha(
    mono1: Iterable[Utterance],
    mono2: Iterable[Utterance],
    lm1: SequenceScorer,
    lm2: SequenceScorer,
    normalization: Normalization | str = Normalization.TOTAL,
) -> AlphaEstimate:
    """Estimate log alpha from raw monolingual utterances scored by their own LM.

    With PER_MORPHEME each utterance score is divided by its morpheme count
    before averaging.
    """
    norm = Normalization(normalization)
    s1 = [_utterance_score(lm1, u, norm) for u in mono1]
    s2 = [_utterance_score(lm2, u, norm) for u in mono2]
    return alpha_from_scores(s1, s2, norm)


@dataclass(frozen=True)
class DetPoint:
    log_alpha: float
    fpr: float
    fnr: float


def det_curve(
    scores: Sequence[ScorePair] | Sequence[float],
    reference: Sequence[str],
    pair: tuple[str, str],
) -> list[DetPoint]:
    """Sweep the threshold over every distinct score difference.

    ``scores`` may be ScorePairs or bare differences. A point at threshold t
    decides L1 for difference >= t. False positives are true-L2 items decided
    L1; false negatives are true-L1 items decided L2. Points come in
    increasing threshold order, bracketed by -inf and +inf.
    """
    if len(scores) != len(reference):
        raise InputError(f"{len(scores)} scores but {len(reference)} reference labels")
    l1, l2 = pair
    diffs = [s.difference if isinstance(s, ScorePair) else float(s) for s in scores]
    for lab in reference:
        if lab not in (l1, l2):
            raise InputError(f"reference label {lab!r} is not {l1!r} or {l2!r}")
    pos = sorted(d for d, lab in zip(diffs, reference) if lab == l1)
    neg = sorted(d for d, lab in zip(diffs, reference) if lab == l2)
    if not pos or not neg:
        raise InputError("DET curve needs both classes in the reference")

    thresholds = [-math.inf] + sorted(set(diffs)) + [math.inf]
    points = []
    # two pointers: items below threshold in each class
    i = j = 0
    for t in thresholds:
        while i < len(pos) and pos[i] < t:
            i += 1
        while j < len(neg) and neg[j] < t:
            j += 1
        points.append(DetPoint(t, (len(neg) - j) / len(neg), i / len(pos)))
    return points


def write_scores(scores: Iterable[ScorePair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "lp1", "lp2", "oov1", "oov2"])
        for s in scores:
            writer.writerow([s.id, repr(s.lp1), repr(s.lp2), s.oov1, s.oov2])


def read_scores(path: str | Path) -> list[ScorePair]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for n, row in enumerate(csv.DictReader(fh), start=2):
            try:
                out.append(
                    ScorePair(row["id"], float(row["lp1"]), float(row["lp2"]), int(row["oov1"]), int(row["oov2"]))
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}:{n}: bad score row ({exc})") from None
    return out


def write_det(points: Iterable[DetPoint], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["log_alpha", "fpr", "fnr"])
        for p in points:
            writer.writerow([repr(p.log_alpha), repr(p.fpr), repr(p.fnr)])
