"""Per-class precision/recall/F1, macro-F1 and top-k accuracy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import SpeciesVocab
from .errors import BadClassId, BadK, EmptyReport, MissingGroundTruth


@dataclass(frozen=True)
class ClassReport:
    class_id: int
    tp: int
    fp: int
    fn: int

    @property
    def support(self) -> int:
        return self.tp + self.fn

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class EvalReport:
    per_class: tuple[ClassReport, ...]
    macro_f1: float
    top_k: Mapping[int, float] = field(default_factory=dict)
    num_observations: int = 0

    def to_dict(self, vocab: SpeciesVocab | None = None) -> dict:
        rows = []
        for r in self.per_class:
            row = {"class_id": r.class_id}
            if vocab is not None:
                row["species"] = vocab.name_of(r.class_id)
            row.update(tp=r.tp, fp=r.fp, fn=r.fn, precision=r.precision, recall=r.recall, f1=r.f1)
            rows.append(row)
        return {
            "macro_f1": self.macro_f1,
            "num_observations": self.num_observations,
            "top_k": {str(k): v for k, v in sorted(self.top_k.items())},
            "per_class": rows,
        }


def confusion_counts(pred: np.ndarray, gt: np.ndarray, num_classes: int):
    """(tp, fp, fn) integer vectors from aligned prediction/label arrays."""
    pred = np.asarray(pred, dtype=np.int64)
    gt = np.asarray(gt, dtype=np.int64)
    hit = pred == gt
    tp = np.bincount(gt[hit], minlength=num_classes)
    fp = np.bincount(pred[~hit], minlength=num_classes)
    fn = np.bincount(gt[~hit], minlength=num_classes)
    return tp, fp, fn


def f1_from_counts(tp, fp, fn) -> np.ndarray:
    """Vectorised F1 with the zero-division convention (undefined -> 0)."""
    tp, fp, fn = (np.asarray(a, dtype=np.float64) for a in (tp, fp, fn))
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        r = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        return np.where(p + r > 0, 2 * p * r / (p + r), 0.0)


def macro_f1_arrays(pred, gt, num_classes: int, present_only: bool = False) -> float:
    tp, fp, fn = confusion_counts(pred, gt, num_classes)
    f1 = f1_from_counts(tp, fp, fn)
    if present_only:
        f1 = f1[(tp + fn) > 0]
    return float(f1.mean())


def per_class_f1(
    preds: Mapping[str, int],
    gts: Mapping[str, int],
    vocab: SpeciesVocab,
) -> list[ClassReport]:
    """Reports for every vocabulary class.

    Ground-truth observations without a prediction count as false negatives.
    """
    C = vocab.size
    pred_ids, gt_ids = [], []
    for obs, c in preds.items():
        if obs not in gts:
            raise MissingGroundTruth(obs)
        pred_ids.append(c)
        gt_ids.append(gts[obs])
    for c in pred_ids + list(gts.values()):
        if not 0 <= c < C:
            raise BadClassId(c, C)
    tp, fp, fn = confusion_counts(pred_ids, gt_ids, C)
    missing = [gts[o] for o in gts if o not in preds]
    fn = fn + np.bincount(np.asarray(missing, dtype=np.int64), minlength=C)
    return [ClassReport(c, int(tp[c]), int(fp[c]), int(fn[c])) for c in range(C)]


def macro_f1(reports: Sequence[ClassReport], present_only: bool = False) -> float:
    """Mean F1 over all classes, or over classes with ground-truth support."""
    if present_only:
        reports = [r for r in reports if r.support > 0]
    if not reports:
        raise EmptyReport("no class reports to average")
    return sum(r.f1 for r in reports) / len(reports)


def top_k_hits(scores: np.ndarray, gt: np.ndarray, k: int) -> np.ndarray:
    """Boolean hits for a ``(rows, C)`` score matrix.

    The true class ranks ahead of every class with a lower score and every
    equally scored class with a higher id.
    """
    scores = np.asarray(scores, dtype=np.float64)
    C = scores.shape[1]
    if not 1 <= k <= C:
        raise BadK(f"k={k} outside [1, {C}]")
    gt = np.asarray(gt, dtype=np.int64)
    s_true = scores[np.arange(scores.shape[0]), gt][:, None]
    ids = np.arange(C)[None, :]
    ahead = (scores > s_true) | ((scores == s_true) & (ids < gt[:, None]))
    return ahead.sum(axis=1) < k


def top_k_accuracy(scores: Mapping[str, np.ndarray], gts: Mapping[str, int], k: int) -> float:
    obs = sorted(scores)
    if not obs:
        raise EmptyReport("no scored observations")
    for o in obs:
        if o not in gts:
            raise MissingGroundTruth(o)
    mat = np.stack([np.asarray(scores[o], dtype=np.float64) for o in obs])
    gt = np.array([gts[o] for o in obs], dtype=np.int64)
    return float(top_k_hits(mat, gt, k).mean())


def evaluate(
    preds: Mapping[str, int],
    gts: Mapping[str, int],
    vocab: SpeciesVocab,
    scores: Mapping[str, np.ndarray] | None = None,
    ks: Sequence[int] = (),
    present_only: bool = False,
) -> EvalReport:
    reports = per_class_f1(preds, gts, vocab)
    top = {}
    if scores is not None:
        top = {int(k): top_k_accuracy(scores, gts, int(k)) for k in ks}
    return EvalReport(tuple(reports), macro_f1(reports, present_only), top, len(preds))
