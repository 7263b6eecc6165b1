"""Posterior-vector to binary-language classifiers (one-hidden-layer MLP in numpy)."""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from sklearn.model_selection import StratifiedKFold

from mlid.corpus import Corpus, Kind
from mlid.errors import ComputationError, InputError
from mlid.metrics import as_label_map, f1_macro
from mlid.principles import UNDETERMINED, MLVerdict

FORMAT_NAME = "mlid-mapping"
FORMAT_VERSION = 1
SUM_TOLERANCE = 1e-6


class Provenance(str, Enum):
    MONOLINGUAL_LID = "lid"
    P11 = "p11"
    P12 = "p12"
    P2 = "p2"


@dataclass(frozen=True)
class PosteriorRecord:
    id: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        v = self.vector
        if v.ndim != 1 or v.size == 0:
            raise InputError(f"{self.id}: posterior must be a non-empty vector")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InputError(f"{self.id}: posterior entries must be finite and non-negative")
        if abs(float(v.sum()) - 1.0) > SUM_TOLERANCE:
            raise InputError(f"{self.id}: posterior sums to {v.sum():.8f}, expected 1")


def load_posteriors(path: str | Path) -> dict[str, PosteriorRecord]:
    """Read a CSV with header ``id,p_0,...,p_{D-1}``."""
    records: dict[str, PosteriorRecord] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id" or len(header) < 2:
            raise InputError(f"{path}: header must start with 'id' followed by posterior columns")
        dim = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise InputError(f"{path}:{lineno}: expected {dim + 1} columns, got {len(row)}")
            try:
                vec = np.array([float(x) for x in row[1:]], dtype=np.float64)
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric posterior value") from None
            if row[0] in records:
                raise InputError(f"{path}:{lineno}: duplicate id {row[0]!r}")
            try:
                records[row[0]] = PosteriorRecord(row[0], vec)
            except InputError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    if not records:
        raise InputError(f"{path}: no posterior records")
    return records


def write_posteriors(records: Sequence[PosteriorRecord], path: str | Path) -> None:
    dim = records[0].vector.size
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"p_{i}" for i in range(dim)])
        for r in records:
            writer.writerow([r.id] + [repr(float(x)) for x in r.vector])


@dataclass(frozen=True)
class LabeledDataset:
    ids: tuple[str, ...]
    features: np.ndarray
    labels: tuple[str, ...]
    classes: tuple[str, str]
    provenance: Provenance

    def __post_init__(self) -> None:
        if len(self.ids) != len(self.labels) or self.features.shape[0] != len(self.ids):
            raise InputError("dataset ids, features and labels differ in length")
        bad = set(self.labels) - set(self.classes)
        if bad:
            raise InputError(f"labels {sorted(bad)} outside classes {self.classes}")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def targets(self) -> np.ndarray:
        """Class indices: 0 for the first language of the pair, 1 for the second."""
        return np.array([self.classes.index(lab) for lab in self.labels], dtype=np.int64)

    def subset(self, idx: Sequence[int] | np.ndarray) -> LabeledDataset:
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(
            tuple(self.ids[i] for i in idx),
            self.features[idx],
            tuple(self.labels[i] for i in idx),
            self.classes,
            self.provenance,
        )


def assemble_dataset(
    corpus: Corpus,
    posteriors: Mapping[str, PosteriorRecord],
    source: Provenance | str,
    verdicts: Sequence[MLVerdict] | Mapping[str, MLVerdict] | Mapping[str, str] | None = None,
) -> LabeledDataset:
    """Pair posteriors with labels.

    Monolingual-LID datasets use every monolingual utterance labelled by its
    language. Principle datasets use the code-switched utterances that the
    principle determined, labelled by its verdict.
    """
    source = Provenance(source)
    pair = corpus.pair
    selected: list[tuple[str, str]] = []
    if source is Provenance.MONOLINGUAL_LID:
        for u in corpus.monolingual():
            selected.append((u.id, pair.l1 if u.kind is Kind.MONOLINGUAL_L1 else pair.l2))
    else:
        if verdicts is None:
            raise InputError(f"{source.value} dataset needs verdicts")
        labels = as_label_map(verdicts)
        for u in corpus.code_switched():
            lab = labels.get(u.id, UNDETERMINED)
            if lab != UNDETERMINED:
                selected.append((u.id, lab))
    if not selected:
        raise InputError(f"no utterances selected for a {source.value} dataset")
    missing = [uid for uid, _ in selected if uid not in posteriors]
    if missing:
        raise InputError(f"missing posterior for {len(missing)} utterance(s), e.g. {missing[0]!r}")
    dims = {posteriors[uid].vector.size for uid, _ in selected}
    if len(dims) != 1:
        raise InputError(f"posterior dimension varies across utterances: {sorted(dims)}")
    features = np.stack([posteriors[uid].vector for uid, _ in selected])
    return LabeledDataset(
        tuple(uid for uid, _ in selected),
        features,
        tuple(lab for _, lab in selected),
        pair.languages,
        source,
    )


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class MappingModel:
    """D -> H (ReLU) -> 2 (softmax) classifier."""

    classes: tuple[str, str]
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    seed: int = 0
    hyperparameters: dict = field(default_factory=dict)
    loss_history: list[float] = field(default_factory=list)

    PARAMS = ("w1", "b1", "w2", "b2")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    @classmethod
    def initialize(cls, input_dim: int, hidden: int, classes: tuple[str, str], seed: int) -> MappingModel:
        rng = np.random.default_rng(seed)
        r1 = math.sqrt(6.0 / (input_dim + hidden))
        r2 = math.sqrt(6.0 / (hidden + 2))
        return cls(
            tuple(classes),
            rng.uniform(-r1, r1, size=(input_dim, hidden)),
            np.zeros(hidden),
            rng.uniform(-r2, r2, size=(hidden, 2)),
            np.zeros(2),
            seed,
        )

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns (pre-activation, hidden activation, class probabilities)."""
        z1 = x @ self.w1 + self.b1
        h = np.maximum(z1, 0.0)
        return z1, h, _softmax(h @ self.w2 + self.b2)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.input_dim:
            raise InputError(f"posterior dimension {x.shape[1]} does not match model input {self.input_dim}")
        return self.forward(x)[2]

    def loss(self, x: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None) -> float:
        probs = self.forward(x)[2]
        w = np.ones(len(y)) if weights is None else weights
        nll = -np.log(np.clip(probs[np.arange(len(y)), y], 1e-300, None))
        return float(np.sum(w * nll) / np.sum(w))

    def gradients(
        self, x: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None
    ) -> dict[str, np.ndarray]:
        """Analytic gradient of the weighted mean negative log-likelihood."""
        z1, h, probs = self.forward(x)
        w = np.ones(len(y)) if weights is None else weights
        w = w / w.sum()
        delta2 = probs.copy()
        delta2[np.arange(len(y)), y] -= 1.0
        delta2 *= w[:, None]
        delta1 = (delta2 @ self.w2.T) * (z1 > 0)
        return {
            "w1": x.T @ delta1,
            "b1": delta1.sum(axis=0),
            "w2": h.T @ delta2,
            "b2": delta2.sum(axis=0),
        }

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "classes": list(self.classes),
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "seed": self.seed,
            "hyperparameters": self.hyperparameters,
            "loss_history": self.loss_history,
            "parameters": {name: getattr(self, name).tolist() for name in self.PARAMS},
        }

    @classmethod
    def from_dict(cls, data: dict) -> MappingModel:
        if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
            raise InputError(f"not a {FORMAT_NAME} v{FORMAT_VERSION} model")
        p = data["parameters"]
        model = cls(
            tuple(data["classes"]),
            np.array(p["w1"], dtype=np.float64).reshape(data["input_dim"], data["hidden_dim"]),
            np.array(p["b1"], dtype=np.float64),
            np.array(p["w2"], dtype=np.float64).reshape(data["hidden_dim"], 2),
            np.array(p["b2"], dtype=np.float64),
            int(data["seed"]),
            dict(data.get("hyperparameters", {})),
            list(data.get("loss_history", [])),
        )
        return model

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> MappingModel:
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}: unreadable mapping model ({exc})") from None


def class_weights(y: np.ndarray) -> np.ndarray:
    """Inverse-frequency sample weights, normalized to mean 1."""
    counts = np.bincount(y, minlength=2).astype(np.float64)
    w = len(y) / (2.0 * counts[y])
    return w / w.mean()


DEFAULTS = {
    "hidden": 32,
    "epochs": 500,
    "learning_rate": 0.05,
    "patience": 10,
    "balance_classes": True,
}


def train_mapping(
    dataset: LabeledDataset,
    hidden: int = DEFAULTS["hidden"],
    epochs: int = DEFAULTS["epochs"],
    learning_rate: float = DEFAULTS["learning_rate"],
    seed: int = 0,
    validation: LabeledDataset | None = None,
    patience: int = DEFAULTS["patience"],
    balance_classes: bool = DEFAULTS["balance_classes"],
) -> MappingModel:
    """Full-batch gradient descent on the weighted mean negative log-likelihood.

    With a validation set, training stops once the validation loss has risen
    for ``patience`` consecutive epochs and the best parameters are kept.
    """
    if len(dataset) < 2:
        raise InputError("mapping training needs at least two samples")
    y = dataset.targets
    if len(set(y.tolist())) < 2:
        raise InputError("mapping training needs both classes in the dataset")
    if hidden < 1 or epochs < 1 or not learning_rate > 0:
        raise InputError("hidden, epochs and learning_rate must be positive")
    x = dataset.features
    w = class_weights(y) if balance_classes else np.ones(len(y))
    model = MappingModel.initialize(x.shape[1], hidden, dataset.classes, seed)
    model.hyperparameters = {
        "hidden": hidden,
        "epochs": epochs,
        "learning_rate": learning_rate,
        "patience": patience,
        "balance_classes": balance_classes,
        "validation": validation is not None,
    }
    if validation is not None:
        vx, vy = validation.features, validation.targets
        best_val = math.inf
        best_params = None
        rising = 0
        prev_val = math.inf

    history = []
    for epoch in range(epochs):
        loss = model.loss(x, y, w)
        if not math.isfinite(loss):
            raise ComputationError(f"training loss became non-finite at epoch {epoch}")
        history.append(loss)
        grads = model.gradients(x, y, w)
        for name in MappingModel.PARAMS:
            setattr(model, name, getattr(model, name) - learning_rate * grads[name])
        if validation is not None:
            val = model.loss(vx, vy)
            if val < best_val:
                best_val = val
                best_params = {n: getattr(model, n).copy() for n in MappingModel.PARAMS}
            rising = rising + 1 if val > prev_val else 0
            prev_val = val
            if rising >= patience:
                break
    if validation is not None and best_params is not None:
        for n, v in best_params.items():
            setattr(model, n, v)
    final = model.loss(x, y, w)
    if not math.isfinite(final):
        raise ComputationError("training loss is non-finite after the last update")
    history.append(final)
    model.loss_history = history
    return model


def gradient_check(
    model: MappingModel,
    x: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray | None = None,
    step: float = 1e-5,
    floor: float = 1e-6,
) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``; the floor keeps
    vanishing components from dominating through round-off.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise InputError("gradient check needs a non-empty batch")
    analytic = model.gradients(x, y, weights)
    numeric = numeric_gradients(model, x, y, weights, step)
    worst = 0.0
    for name in MappingModel.PARAMS:
        a, n = analytic[name], numeric[name]
        err = np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(err.max()))
    return worst


def numeric_gradients(
    model: MappingModel, x: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None, step: float = 1e-5
) -> dict[str, np.ndarray]:
    """Central finite differences for every parameter."""
    out = {}
    for name in MappingModel.PARAMS:
        param = getattr(model, name)
        flat = param.reshape(-1)
        g = np.zeros_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = model.loss(x, y, weights)
            flat[i] = orig - step
            down = model.loss(x, y, weights)
            flat[i] = orig
            g[i] = (up - down) / (2 * step)
        out[name] = g.reshape(param.shape)
    return out


def predict(model: MappingModel, posterior: PosteriorRecord | np.ndarray) -> tuple[str, np.ndarray]:
    """Most probable language and the two class probabilities (ties go to the first language)."""
    vec = posterior.vector if isinstance(posterior, PosteriorRecord) else np.asarray(posterior, dtype=np.float64)
    if vec.ndim != 1:
        raise InputError("predict takes a single posterior vector")
    probs = model.predict_proba(vec)[0]
    return model.classes[int(np.argmax(probs))], probs


def predict_labels(model: MappingModel, features: np.ndarray) -> list[str]:
    probs = model.predict_proba(features)
    return [model.classes[i] for i in np.argmax(probs, axis=1)]


@dataclass(frozen=True)
class CrossValidationResult:
    fold_f1: tuple[float, ...]

    @property
    def mean_f1(self) -> float:
        return float(np.mean(self.fold_f1))

    def to_dict(self) -> dict:
        return {"fold_f1": list(self.fold_f1), "mean_f1": self.mean_f1}


def fold_seeds(seed: int, k: int) -> list[int]:
    """Independent per-fold training seeds derived from the master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(k)]


def stratified_folds(dataset: LabeledDataset, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    y = dataset.targets
    if k < 2:
        raise InputError("cross-validation needs k >= 2")
    if k > len(dataset):
        raise InputError(f"k={k} exceeds dataset size {len(dataset)}")
    per_class = np.bincount(y, minlength=2)
    if per_class.min() < k:
        raise InputError(
            f"a fold would lack a class: class sizes {per_class.tolist()} are not all >= k={k}"
        )
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return [(tr, te) for tr, te in splitter.split(np.zeros(len(y)), y)]


def cross_validate(dataset: LabeledDataset, k: int = 5, seed: int = 0, **train_kwargs) -> CrossValidationResult:
    """Stratified k-fold cross-validation reporting F1-macro per fold."""
    scores = []
    for (train_idx, test_idx), fold_seed in zip(stratified_folds(dataset, k, seed), fold_seeds(seed, k)):
        train = dataset.subset(train_idx)
        test = dataset.subset(test_idx)
        model = train_mapping(train, seed=fold_seed, **train_kwargs)
        scores.append(f1_macro(predict_labels(model, test.features), list(test.labels), dataset.classes))
    return CrossValidationResult(tuple(scores))
