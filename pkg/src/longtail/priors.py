"""Class-prior estimation from training labels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import LabelRecord, SpeciesVocab, validate_labels
from .errors import InvalidPrior, NoLabeledData, ZeroCountClass


@dataclass(frozen=True)
class SmoothingConfig:
    mode: str = "none"  # "none" | "laplace"
    alpha: float = 1.0

    def __post_init__(self):
        if self.mode not in ("none", "laplace"):
            raise ValueError(f"unknown smoothing mode {self.mode!r}")
        if self.mode == "laplace" and not self.alpha > 0:
            raise ValueError("laplace smoothing needs alpha > 0")


@dataclass(frozen=True)
class ClassPrior:
    """Strictly positive class probabilities plus the counts they came from."""

    probs: np.ndarray = field(compare=False)
    counts: np.ndarray = field(compare=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        counts = np.array(self.counts, dtype=np.int64)
        if probs.ndim != 1 or probs.shape != counts.shape:
            raise InvalidPrior("probs and counts must be 1-d vectors of equal length")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0):
            raise InvalidPrior("every class probability must be finite and > 0")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidPrior(f"probabilities sum to {probs.sum()!r}, not 1")
        if np.any(counts < 0):
            raise InvalidPrior("counts must be non-negative")
        probs.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "counts", counts)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, num_classes: int) -> "ClassPrior":
        return cls(np.full(num_classes, 1.0 / num_classes), np.zeros(num_classes, dtype=np.int64))


def default_smoothing(counts) -> SmoothingConfig:
    """Laplace with alpha=1 if some class is empty, no smoothing otherwise."""
    if np.any(np.asarray(counts) == 0):
        return SmoothingConfig("laplace", 1.0)
    return SmoothingConfig("none")


def prior_from_counts(counts, smoothing: SmoothingConfig | None = None) -> ClassPrior:
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        raise NoLabeledData("no labeled samples to estimate priors from")
    if smoothing is None:
        smoothing = default_smoothing(counts)
    if smoothing.mode == "none":
        zero = np.flatnonzero(counts == 0)
        if zero.size:
            raise ZeroCountClass(int(zero[0]))
        probs = counts / total
    else:
        a = smoothing.alpha
        probs = (counts + a) / (total + a * counts.shape[0])
    return ClassPrior(probs, counts)


def class_counts(labels: Iterable[LabelRecord], vocab: SpeciesVocab) -> np.ndarray:
    """Per-class sample counts; each labeled row counts once, sentinels are skipped."""
    ids = [r.class_id for r in validate_labels(labels, vocab) if r.labeled]
    return np.bincount(np.asarray(ids, dtype=np.int64), minlength=vocab.size)


def estimate_priors(
    labels: Iterable[LabelRecord],
    vocab: SpeciesVocab,
    smoothing: SmoothingConfig | None = None,
) -> ClassPrior:
    """Empirical class frequencies of the labeled rows.

    ``smoothing=None`` picks :func:`default_smoothing` from the counts.
    """
    return prior_from_counts(class_counts(labels, vocab), smoothing)


def log_priors(prior: ClassPrior) -> np.ndarray:
    return np.log(prior.probs)
