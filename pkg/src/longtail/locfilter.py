"""Location filtering: pick the best-scored species known to occur at a location.

The locations-to-species map is built from labeled training observations.
At prediction time the adjusted scores are walked in descending order and
the first class present at the observation's location code wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .core import LabelRecord, ObservationMeta, SpeciesVocab, validate_labels
from .errors import BadClassId, LengthMismatch, MissingMeta, NoCandidate

POLICIES = ("argmax", "error")


@dataclass(frozen=True)
class Locations2Species:
    map: Mapping[str, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for code, ids in self.map.items():
            ids = frozenset(int(i) for i in ids)
            if ids:
                clean[code] = ids
        object.__setattr__(self, "map", dict(sorted(clean.items())))

    def allowed(self, code: str) -> frozenset[int] | None:
        return self.map.get(code) if code else None

    def check(self, vocab: SpeciesVocab) -> "Locations2Species":
        for ids in self.map.values():
            for i in ids:
                if not 0 <= i < vocab.size:
                    raise BadClassId(i, vocab.size)
        return self


@dataclass(frozen=True)
class FilterPolicy:
    fallback: str = "argmax"  # no ranked class is allowed at the code
    unknown_code: str = "argmax"  # empty code or code absent from the map

    def __post_init__(self):
        for name in ("fallback", "unknown_code"):
            if getattr(self, name) not in POLICIES:
                raise ValueError(f"{name} must be one of {POLICIES}")


def build_l2s(
    labels: Iterable[LabelRecord],
    meta: Iterable[ObservationMeta],
    vocab: SpeciesVocab,
) -> Locations2Species:
    by_obs = {m.observation_id: m for m in meta}
    sets: dict[str, set[int]] = {}
    for rec in validate_labels(labels, vocab):
        if not rec.labeled:
            continue
        m = by_obs.get(rec.observation_id)
        if m is None:
            raise MissingMeta(rec.observation_id)
        if m.code:
            sets.setdefault(m.code, set()).add(rec.class_id)
    return Locations2Species({c: frozenset(s) for c, s in sets.items()})


def rank_classes(scores) -> np.ndarray:
    """Class ids by descending score, ties broken toward the lower id."""
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


def filter_predict(
    adjusted,
    meta: ObservationMeta,
    l2s: Locations2Species,
    vocab: SpeciesVocab | None = None,
    policy: FilterPolicy = FilterPolicy(),
) -> int:
    scores = np.asarray(adjusted, dtype=np.float64)
    if vocab is not None and scores.shape != (vocab.size,):
        raise LengthMismatch(meta.observation_id, scores.shape[0], vocab.size)
    order = rank_classes(scores)
    allowed = l2s.allowed(meta.code)
    if allowed is None:
        if policy.unknown_code == "error":
            raise NoCandidate(f"location code {meta.code!r} of {meta.observation_id!r} is not mapped")
        return int(order[0])
    for idx in order:
        if int(idx) in allowed:
            return int(idx)
    if policy.fallback == "error":
        raise NoCandidate(f"no ranked species is known at code {meta.code!r}")
    return int(order[0])
