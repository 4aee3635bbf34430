"""Exception hierarchy.

Every data error raised by the toolkit derives from :class:`LongtailError`;
the CLI reports the class name and exits with status 1.
"""

from __future__ import annotations


class LongtailError(ValueError):
    """Base class for data errors."""


class EmptyVocab(LongtailError):
    pass


class DuplicateSpecies(LongtailError):
    def __init__(self, name: str):
        super().__init__(f"duplicate species name {name!r}")
        self.name = name


class UnknownSpecies(LongtailError):
    def __init__(self, name: str):
        super().__init__(f"species {name!r} is not in the vocabulary")
        self.name = name


class LengthMismatch(LongtailError):
    def __init__(self, key, got: int, want: int):
        super().__init__(f"{key}: score vector has length {got}, expected {want}")
        self.key, self.got, self.want = key, got, want


class NonFinite(LongtailError):
    def __init__(self, key):
        super().__init__(f"{key}: scores contain non-finite values")
        self.key = key


class DuplicateKey(LongtailError):
    def __init__(self, key):
        super().__init__(f"duplicate logit record key {key}")
        self.key = key


class BadClassId(LongtailError):
    def __init__(self, class_id, num_classes: int):
        super().__init__(f"class id {class_id} outside [0, {num_classes}) and not -1")
        self.class_id = class_id


class ConflictingLabel(LongtailError):
    def __init__(self, observation_id: str):
        super().__init__(f"observation {observation_id!r} carries conflicting labels")
        self.observation_id = observation_id


class NoLabeledData(LongtailError):
    pass


class ZeroCountClass(LongtailError):
    def __init__(self, class_id: int):
        super().__init__(f"class {class_id} has no labeled samples and smoothing is off")
        self.class_id = class_id


class InvalidPrior(LongtailError):
    pass


class InvalidTarget(LongtailError):
    pass


class ZeroVector(LongtailError):
    def __init__(self, row: int):
        super().__init__(f"embedding row {row} has zero norm")
        self.row = row


class BatchMismatch(LongtailError):
    pass


class EmptyGroup(LongtailError):
    pass


class MissingMeta(LongtailError):
    def __init__(self, observation_id: str):
        super().__init__(f"no metadata for labeled observation {observation_id!r}")
        self.observation_id = observation_id


class NoCandidate(LongtailError):
    pass


class MissingGroundTruth(LongtailError):
    def __init__(self, observation_id: str):
        super().__init__(f"prediction for {observation_id!r} has no ground truth")
        self.observation_id = observation_id


class EmptyReport(LongtailError):
    pass


class BadK(LongtailError):
    pass


class EmptyInput(LongtailError):
    pass


class FormatError(LongtailError):
    """Malformed input file."""
