"""Shared data model: species vocabulary, logit rows, labels and metadata."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadClassId,
    ConflictingLabel,
    DuplicateKey,
    DuplicateSpecies,
    EmptyVocab,
    LengthMismatch,
    NonFinite,
    UnknownSpecies,
)

UNLABELED = -1


@dataclass(frozen=True)
class SpeciesVocab:
    """Ordered species names; class ids are 0-based positions."""

    names: tuple[str, ...]
    index: Mapping[str, int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def size(self) -> int:
        return len(self.names)

    def id_of(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnknownSpecies(name) from None

    def name_of(self, class_id: int) -> str:
        return self.names[class_id]


def build_vocab(names: Iterable[str]) -> SpeciesVocab:
    names = tuple(names)
    if not names:
        raise EmptyVocab("species vocabulary is empty")
    index: dict[str, int] = {}
    for i, name in enumerate(names):
        if name in index:
            raise DuplicateSpecies(name)
        index[name] = i
    return SpeciesVocab(names=names, index=index)


def _frozen_vector(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LogitRecord:
    """One score row for an (observation, image, model, view) combination."""

    observation_id: str
    image_id: str
    model_id: str
    view_id: str
    scores: np.ndarray = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "scores", _frozen_vector(self.scores))

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.observation_id, self.image_id, self.model_id, self.view_id)


@dataclass(frozen=True)
class LabelRecord:
    observation_id: str
    class_id: int

    @property
    def labeled(self) -> bool:
        return self.class_id != UNLABELED


@dataclass(frozen=True)
class ObservationMeta:
    """Metadata of one observation. An empty ``code`` means unknown location."""

    observation_id: str
    code: str = ""
    country: str = ""
    endemic: bool = False

    def __post_init__(self):
        if not self.observation_id:
            raise ValueError("observation_id must be non-empty")


def validate_labels(labels: Iterable[LabelRecord], vocab: SpeciesVocab) -> list[LabelRecord]:
    out = list(labels)
    for rec in out:
        if rec.class_id != UNLABELED and not 0 <= rec.class_id < vocab.size:
            raise BadClassId(rec.class_id, vocab.size)
    return out


def validate_logits(records: Sequence[LogitRecord], vocab: SpeciesVocab) -> list[LogitRecord]:
    """Check lengths, finiteness and key uniqueness; returns the records as a list."""
    seen = set()
    for rec in records:
        key = rec.key
        if rec.scores.shape != (vocab.size,):
            got = rec.scores.shape[0] if rec.scores.ndim == 1 else rec.scores.size
            raise LengthMismatch(key, got, vocab.size)
        if not np.all(np.isfinite(rec.scores)):
            raise NonFinite(key)
        if key in seen:
            raise DuplicateKey(key)
        seen.add(key)
    return list(records)


def ground_truth(labels: Iterable[LabelRecord]) -> dict[str, int]:
    """Map observation id to class id over labeled records.

    Repeated rows for one observation (one per image) must agree.
    """
    gts: dict[str, int] = {}
    for rec in labels:
        if not rec.labeled:
            continue
        prev = gts.setdefault(rec.observation_id, rec.class_id)
        if prev != rec.class_id:
            raise ConflictingLabel(rec.observation_id)
    return gts
