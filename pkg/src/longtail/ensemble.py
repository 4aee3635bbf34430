"""Logit averaging across models, images and views of one observation."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from typing import Sequence

import numpy as np

from .adjust import AdjustConfig, adjust_logits
from .core import LogitRecord
from .errors import EmptyGroup, LengthMismatch


def _member_order(rec: LogitRecord):
    return (rec.model_id, rec.image_id, rec.view_id)


@dataclass(frozen=True)
class EnsembleGroup:
    observation_id: str
    members: tuple[LogitRecord, ...]

    def __post_init__(self):
        if not self.members:
            raise EmptyGroup(f"observation {self.observation_id!r} has no logit records")
        object.__setattr__(self, "members", tuple(sorted(self.members, key=_member_order)))


def mean_logits(group: EnsembleGroup) -> np.ndarray:
    """Unweighted mean of member scores.

    Members are summed one at a time in (model, image, view) order, so the
    result does not depend on the order the records arrived in.
    """
    if not group.members:
        raise EmptyGroup(group.observation_id)
    first = group.members[0].scores
    acc = first.copy()
    for rec in group.members[1:]:
        if rec.scores.shape != first.shape:
            raise LengthMismatch(rec.key, rec.scores.shape[0], first.shape[0])
        acc += rec.scores
    if len(group.members) > 1:
        acc /= len(group.members)
    return acc


def aggregate(group: EnsembleGroup, prior, cfg: AdjustConfig = AdjustConfig()) -> np.ndarray:
    """Mean logits of the group, adjusted once by ``tau * log(pi)``."""
    return adjust_logits(mean_logits(group), prior, cfg)


def group_records(records: Sequence[LogitRecord]) -> list[EnsembleGroup]:
    ordered = sorted(records, key=lambda r: (r.observation_id,) + _member_order(r))
    return [
        EnsembleGroup(obs, tuple(members))
        for obs, members in groupby(ordered, key=lambda r: r.observation_id)
    ]
