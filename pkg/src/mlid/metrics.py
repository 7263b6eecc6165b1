"""Agreement and quality metrics: MCC, F1-macro, agreement matrices, distributions, M-index."""

from __future__ import annotations

import csv
import math
from collections import Counter
from collections.abc import Hashable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mlid.corpus import OTHER, Corpus, Kind
from mlid.errors import InputError
from mlid.principles import UNDETERMINED, MLVerdict


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows index the first labelling, columns the second."""

    labels: tuple[Hashable, ...]
    counts: np.ndarray

    @classmethod
    def from_labels(
        cls, a: Sequence[Hashable], b: Sequence[Hashable], labels: Sequence[Hashable] | None = None
    ) -> ConfusionMatrix:
        if len(a) != len(b):
            raise InputError(f"label sequences differ in length: {len(a)} vs {len(b)}")
        if labels is None:
            labels = sorted(set(a) | set(b), key=str)
        index = {lab: i for i, lab in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
        for x, y in zip(a, b):
            if x not in index or y not in index:
                raise InputError(f"label {x if x not in index else y!r} outside the label set")
            counts[index[x], index[y]] += 1
        return cls(tuple(labels), counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def mcc_from_confusion(cm: ConfusionMatrix) -> float:
    """Multiclass Matthews correlation (R_k); 0 when a marginal is constant."""
    c = cm.counts.astype(np.float64)
    n = c.sum()
    t = c.sum(axis=1)
    p = c.sum(axis=0)
    cov_xy = n * np.trace(c) - t @ p
    cov_xx = n * n - t @ t
    cov_yy = n * n - p @ p
    denom = cov_xx * cov_yy
    if denom <= 0:
        return 0.0
    return float(cov_xy / math.sqrt(denom))


def mcc(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    if len(a) != len(b):
        raise InputError(f"label sequences differ in length: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise InputError("MCC needs at least two items")
    return mcc_from_confusion(ConfusionMatrix.from_labels(a, b))


def mcc_with_unknown(
    a: Sequence[str],
    b: Sequence[str],
    names: tuple[str, str] = ("a", "b"),
    policy: str = "per_system",
) -> float:
    """MCC with undetermined labels kept as an extra "unknown" class.

    With ``per_system`` (default) each side gets its own unknown class, so two
    systems that both abstain do not count as agreeing. ``shared`` uses a
    single unknown class for both.
    """
    if len(a) != len(b):
        raise InputError(f"label sequences differ in length: {len(a)} vs {len(b)}")
    if policy == "per_system":
        ua, ub = f"unknown:{names[0]}", f"unknown:{names[1]}"
        if ua == ub:
            ub += "'"
    elif policy == "shared":
        ua = ub = "unknown"
    else:
        raise InputError(f"unknown policy {policy!r}")
    ma = [ua if x == UNDETERMINED else x for x in a]
    mb = [ub if x == UNDETERMINED else x for x in b]
    return mcc(ma, mb)


def f1_macro(pred: Sequence[str], truth: Sequence[str], labels: Sequence[str] | None = None) -> float:
    """Unweighted mean of per-class F1 over the binary label universe.

    Predictions outside the universe (e.g. undetermined) are simply wrong
    for every class.
    """
    if len(pred) != len(truth):
        raise InputError(f"label sequences differ in length: {len(pred)} vs {len(truth)}")
    if not truth:
        raise InputError("F1 needs at least one item")
    if labels is None:
        labels = sorted(set(truth))
        if len(labels) > 2:
            raise InputError(f"truth labels must be binary, got {labels}")
    scores = []
    for lab in labels:
        tp = sum(1 for p, t in zip(pred, truth) if p == lab and t == lab)
        fp = sum(1 for p, t in zip(pred, truth) if p == lab and t != lab)
        fn = sum(1 for p, t in zip(pred, truth) if p != lab and t == lab)
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return sum(scores) / len(scores)


def accuracy(pred: Sequence[str], truth: Sequence[str]) -> float:
    if len(pred) != len(truth) or not truth:
        raise InputError("accuracy needs two equal-length, non-empty sequences")
    return sum(p == t for p, t in zip(pred, truth)) / len(truth)


VerdictSet = Mapping[str, str]


def as_label_map(verdicts: Sequence[MLVerdict] | Mapping[str, MLVerdict] | VerdictSet) -> dict[str, str]:
    """Normalize verdict containers to ``{utterance id: label}``."""
    if isinstance(verdicts, Mapping):
        return {k: (v.label if isinstance(v, MLVerdict) else v) for k, v in verdicts.items()}
    return {v.id: v.label for v in verdicts}


def paired_labels(a: VerdictSet, b: VerdictSet, covered_only: bool = True) -> tuple[list[str], list[str]]:
    """Labels of both systems over shared ids, in sorted id order."""
    ids = sorted(set(a) & set(b))
    if covered_only:
        ids = [i for i in ids if a[i] != UNDETERMINED and b[i] != UNDETERMINED]
    return [a[i] for i in ids], [b[i] for i in ids]


@dataclass(frozen=True)
class AgreementMatrix:
    names: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]
    support: tuple[tuple[int, ...], ...]

    def get(self, a: str, b: str) -> float | None:
        return self.values[self.names.index(a)][self.names.index(b)]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["system"] + list(self.names))
            for name, row in zip(self.names, self.values):
                writer.writerow([name] + ["" if v is None else f"{v:.6f}" for v in row])

    def to_text(self) -> str:
        width = max(8, *(len(n) for n in self.names))
        lines = [" " * width + "".join(f"{n:>{width + 1}}" for n in self.names)]
        for name, row in zip(self.names, self.values):
            cells = "".join(f"{'n/a' if v is None else f'{v:.3f}':>{width + 1}}" for v in row)
            lines.append(f"{name:<{width}}{cells}")
        return "\n".join(lines)


def agreement_matrix(
    systems: Mapping[str, Sequence[MLVerdict] | Mapping[str, MLVerdict] | VerdictSet],
    covered_only: bool = True,
    with_unknown: bool = False,
) -> AgreementMatrix:
    """Pairwise MCC between systems.

    By default each cell only uses utterances both systems determined. With
    ``with_unknown`` every shared utterance is used and undetermined labels
    become per-system unknown classes. Cells without at least two usable
    items are recorded as ``None``.
    """
    if len(systems) < 2:
        raise InputError("agreement matrix needs at least two systems")
    names = tuple(systems)
    maps = {n: as_label_map(systems[n]) for n in names}
    values: list[list[float | None]] = []
    support: list[list[int]] = []
    for x in names:
        row: list[float | None] = []
        srow: list[int] = []
        for y in names:
            a, b = paired_labels(maps[x], maps[y], covered_only=not with_unknown and covered_only)
            srow.append(len(a))
            if x == y:
                row.append(1.0 if len(a) else None)
            elif len(a) < 2:
                row.append(None)
            elif with_unknown:
                row.append(mcc_with_unknown(a, b, (x, y)))
            else:
                row.append(mcc(a, b))
        values.append(row)
        support.append(srow)
    return AgreementMatrix(names, tuple(map(tuple, values)), tuple(map(tuple, support)))


def _percentages(counter: Counter, languages: Sequence[str]) -> dict[str, float]:
    total = sum(counter[lang] for lang in languages)
    if total == 0:
        raise InputError("cannot compute a distribution over zero items")
    return {lang: 100.0 * counter[lang] / total for lang in languages}


@dataclass(frozen=True)
class DistributionReport:
    """Percentages per language, one row per measurement.

    Rows: ``utterance_lid`` (monolingual utterances), ``token_lid``
    (code-switched tokens, OTHER excluded) and one per verdict set
    (determined verdicts only).
    """

    languages: tuple[str, ...]
    rows: Mapping[str, Mapping[str, float]]
    m_index: float

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row"] + list(self.languages))
            for name, row in self.rows.items():
                writer.writerow([name] + [f"{row[lang]:.2f}" for lang in self.languages])
            writer.writerow(["m_index", f"{self.m_index:.6f}"] + [""] * (len(self.languages) - 1))

    def to_text(self) -> str:
        width = max(14, *(len(n) for n in self.rows))
        lines = [" " * width + "".join(f"{lang:>9}" for lang in self.languages)]
        for name, row in self.rows.items():
            lines.append(f"{name:<{width}}" + "".join(f"{row[lang]:>8.1f}%" for lang in self.languages))
        lines.append(f"{'M-index (CS)':<{width}}{self.m_index:>9.4f}")
        return "\n".join(lines)


def distribution_report(
    corpus: Corpus,
    verdict_sets: Mapping[str, Sequence[MLVerdict] | Mapping[str, MLVerdict] | VerdictSet] | None = None,
) -> DistributionReport:
    langs = corpus.pair.languages
    mono = corpus.monolingual()
    cs = corpus.code_switched()
    if not mono or not cs:
        raise InputError("distribution report needs both monolingual and code-switched utterances")
    rows: dict[str, dict[str, float]] = {}
    utt_counts = Counter(corpus.pair.l1 if u.kind is Kind.MONOLINGUAL_L1 else corpus.pair.l2 for u in mono)
    rows["utterance_lid"] = _percentages(utt_counts, langs)
    tok_counts = Counter(t.lid for u in cs for t in u.tokens if t.lid != OTHER)
    rows["token_lid"] = _percentages(tok_counts, langs)
    cs_ids = {u.id for u in cs}
    for name, verdicts in (verdict_sets or {}).items():
        labels = as_label_map(verdicts)
        counts = Counter(lab for uid, lab in labels.items() if uid in cs_ids and lab != UNDETERMINED)
        rows[name] = _percentages(counts, langs)
    return DistributionReport(langs, rows, m_index(tok_counts, k=len(langs)))


def m_index(counts: Mapping[str, int] | Corpus, k: int | None = None) -> float:
    """Multilingual index ``(1 - sum p^2) / ((k - 1) sum p^2)``.

    Accepts per-language token counts or a corpus (its code-switched tokens,
    OTHER excluded, with k fixed by the language pair).
    """
    if isinstance(counts, Corpus):
        k = len(counts.pair.languages)
        counts = Counter(t.lid for u in counts.code_switched() for t in u.tokens if t.lid != OTHER)
    total = sum(counts.values())
    if total <= 0:
        raise InputError("M-index needs at least one token")
    if k is None:
        k = len(counts)
    if k < 2:
        raise InputError("M-index needs k >= 2 languages")
    sum_sq = math.fsum((c / total) ** 2 for c in counts.values())
    return (1.0 - sum_sq) / ((k - 1) * sum_sq)


def coverage_of(verdicts: Sequence[MLVerdict] | Mapping[str, MLVerdict] | VerdictSet) -> float:
    labels = as_label_map(verdicts)
    if not labels:
        raise InputError("no verdicts")
    return sum(1 for v in labels.values() if v != UNDETERMINED) / len(labels)
