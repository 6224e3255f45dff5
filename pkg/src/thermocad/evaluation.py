"""Stratified cross-validation and binary classification metrics.

"finding" is the positive class: sensitivity is the true-positive rate
among findings, specificity the true-negative rate among normals.
Confusion counts are pooled across folds before metrics are computed, so
leave-one-out (k = number of samples) is well defined. Metrics with a
zero denominator are reported as None (serialized as JSON null), never
as 0.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .classify import ClassifierConfig, predict
from .data import FINDING, NORMAL, Dataset
from .errors import CrossValidationError


@dataclass(frozen=True)
class ConfusionMatrix:
    """TP/TN/FP/FN counts with "finding" as the positive class."""

    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp,
            self.tn + other.tn,
            self.fp + other.fp,
            self.fn + other.fn,
        )

    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


class Metrics(NamedTuple):
    """The five derived rates; None marks an undefined (0/0) value."""

    accuracy: float
    precision: float | None
    sensitivity: float | None
    specificity: float | None
    youden: float | None


def metrics(cm: ConfusionMatrix) -> Metrics:
    """Accuracy, precision, sensitivity, specificity and Youden index.

    Youden is computed as sensitivity + specificity - 1 from the very
    same floating-point operands; it is None whenever either rate is.
    """
    total = cm.total()
    if total == 0:
        raise ValueError("empty confusion matrix")
    accuracy = (cm.tp + cm.tn) / total
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else None
    sensitivity = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else None
    specificity = cm.tn / (cm.tn + cm.fp) if cm.tn + cm.fp else None
    youden = (
        sensitivity + specificity - 1
        if sensitivity is not None and specificity is not None
        else None
    )
    return Metrics(accuracy, precision, sensitivity, specificity, youden)


@dataclass(frozen=True)
class EvalReport:
    """Cross-validation outcome: pooled metrics plus per-fold matrices."""

    accuracy: float
    precision: float | None
    sensitivity: float | None
    specificity: float | None
    youden: float | None
    auc: float | None
    test_mode: str
    pooled: ConfusionMatrix
    folds: tuple

    def healthy_count(self) -> int:
        return self.pooled.tn + self.pooled.fp

    def unhealthy_count(self) -> int:
        return self.pooled.tp + self.pooled.fn

    def to_dict(self) -> dict:
        return {
            "test_mode": self.test_mode,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "youden": self.youden,
            "auc": self.auc,
            "pooled": self.pooled.to_dict(),
            "folds": [cm.to_dict() for cm in self.folds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def report_from_dict(doc: dict) -> EvalReport:
    return EvalReport(
        accuracy=doc["accuracy"],
        precision=doc["precision"],
        sensitivity=doc["sensitivity"],
        specificity=doc["specificity"],
        youden=doc["youden"],
        auc=doc["auc"],
        test_mode=doc["test_mode"],
        pooled=ConfusionMatrix(**doc["pooled"]),
        folds=tuple(ConfusionMatrix(**f) for f in doc["folds"]),
    )


def stratified_kfold(ds: Dataset, k: int, seed: int) -> list:
    """Partition sample indices into k folds preserving class balance.

    Every class spreads over the folds with per-fold counts differing by
    at most one; classes assign their surplus to the currently smallest
    folds so total fold sizes stay balanced too. Shuffling is driven
    solely by `seed`; k = len(ds) degenerates to leave-one-out.
    """
    n = len(ds)
    if not 2 <= k <= n:
        raise ValueError(f"k must be in [2, {n}], got {k}")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    loads = np.zeros(k, dtype=np.int64)
    labels = ds.labels()
    for cls in (NORMAL, FINDING):
        idx = np.array([i for i, lab in enumerate(labels) if lab == cls], dtype=np.int64)
        rng.shuffle(idx)
        base, rem = divmod(idx.size, k)
        sizes = np.full(k, base, dtype=np.int64)
        if rem:
            # Give the +1 chunks to the least-loaded folds, ties by index.
            order = np.lexsort((np.arange(k), loads))
            sizes[order[:rem]] += 1
        pos = 0
        for f in range(k):
            folds[f].extend(idx[pos:pos + sizes[f]].tolist())
            pos += sizes[f]
        loads += sizes
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def cross_validate(
    ds: Dataset, k: int, seed: int, trainer: ClassifierConfig
) -> EvalReport:
    """Stratified k-fold cross-validation of one classifier configuration.

    Each fold is held out once while the remaining folds train a fresh
    model (feature scaling included, so nothing leaks from the test
    fold). Confusion counts are pooled over the folds; the ROC AUC comes
    from the pooled decision scores.
    """
    counts = ds.class_counts()
    if counts[NORMAL] == 0 or counts[FINDING] == 0:
        raise ValueError(
            f"cross-validation needs both classes, got "
            f"{counts[NORMAL]} normal / {counts[FINDING]} finding"
        )
    folds = stratified_kfold(ds, k, seed)
    all_idx = np.arange(len(ds))
    fold_matrices = []
    scored = []
    for fi, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_idx, test_idx)
        try:
            model = trainer.fit(ds.subset(train_idx), seed=seed)
        except Exception as exc:
            raise CrossValidationError(f"fold {fi}: {exc}") from exc
        tp = tn = fp = fn = 0
        for sample in ds.subset(test_idx):
            label, score = predict(model, sample)
            scored.append((score, sample.label))
            if sample.label == FINDING:
                if label == FINDING:
                    tp += 1
                else:
                    fn += 1
            else:
                if label == FINDING:
                    fp += 1
                else:
                    tn += 1
        fold_matrices.append(ConfusionMatrix(tp, tn, fp, fn))

    pooled = ConfusionMatrix()
    for cm in fold_matrices:
        pooled = pooled + cm
    mets = metrics(pooled)
    mode = "leave-one-out" if k == len(ds) else f"{k}-fold cross validation"
    return EvalReport(
        accuracy=mets.accuracy,
        precision=mets.precision,
        sensitivity=mets.sensitivity,
        specificity=mets.specificity,
        youden=mets.youden,
        auc=roc_auc(scored),
        test_mode=mode,
        pooled=pooled,
        folds=tuple(fold_matrices),
    )


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their group."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scored) -> float:
    """Area under the ROC curve from (decision score, true label) pairs.

    Computed as the Mann-Whitney rank statistic: the probability that a
    random finding outscores a random normal, ties counting 1/2. Needs at
    least one sample of each class.
    """
    scores = np.array([s for s, _ in scored], dtype=np.float64)
    positive = np.array([lab == FINDING for _, lab in scored], dtype=bool)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError(
            f"AUC needs both classes, got {n_pos} finding / {n_neg} normal"
        )
    ranks = _midranks(scores)
    return float(
        (ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    )
