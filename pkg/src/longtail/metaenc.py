"""One-hot encoding of observation metadata.

Layout: ``[code one-hot | code UNK | country one-hot | country UNK | endemic]``,
where the two UNK slots exist only when ``include_unk`` is set. Dimensions
come from the data, so the same layout scales to any number of codes or
countries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import ObservationMeta
from .errors import EmptyInput, FormatError


def _unique_in_order(values: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(v for v in values if v))


@dataclass(frozen=True)
class MetaVocab:
    codes: tuple[str, ...]
    countries: tuple[str, ...]
    include_unk: bool = True
    _code_idx: dict = field(init=False, repr=False, compare=False)
    _country_idx: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("codes", "countries"):
            vals = tuple(getattr(self, name))
            if len(set(vals)) != len(vals):
                raise FormatError(f"duplicate entries in meta vocab field {name!r}")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "_code_idx", {c: i for i, c in enumerate(self.codes)})
        object.__setattr__(self, "_country_idx", {c: i for i, c in enumerate(self.countries)})

    @property
    def dim(self) -> int:
        return len(self.codes) + len(self.countries) + 1 + (2 if self.include_unk else 0)

    @property
    def _unk(self) -> int:
        return 1 if self.include_unk else 0

    def column_names(self) -> list[str]:
        cols = [f"code={c}" for c in self.codes]
        if self.include_unk:
            cols.append("code=<unk>")
        cols += [f"country={c}" for c in self.countries]
        if self.include_unk:
            cols.append("country=<unk>")
        cols.append("endemic")
        return cols

    def to_dict(self) -> dict:
        return {"codes": list(self.codes), "countries": list(self.countries),
                "include_unk": self.include_unk}

    @classmethod
    def from_dict(cls, d: dict) -> "MetaVocab":
        try:
            return cls(tuple(d["codes"]), tuple(d["countries"]), bool(d.get("include_unk", True)))
        except (KeyError, TypeError) as e:
            raise FormatError(f"bad meta vocab document: {e}") from None


def build_meta_vocab(meta: Sequence[ObservationMeta], include_unk: bool = True) -> MetaVocab:
    if not meta:
        raise EmptyInput("no metadata rows to build a vocabulary from")
    return MetaVocab(
        codes=_unique_in_order(m.code for m in meta),
        countries=_unique_in_order(m.country for m in meta),
        include_unk=include_unk,
    )


def encode_meta(row: ObservationMeta, vocab: MetaVocab) -> np.ndarray:
    out = np.zeros(vocab.dim)
    n_codes = len(vocab.codes) + vocab._unk
    i = vocab._code_idx.get(row.code)
    if i is not None:
        out[i] = 1.0
    elif vocab.include_unk:
        out[len(vocab.codes)] = 1.0
    j = vocab._country_idx.get(row.country)
    if j is not None:
        out[n_codes + j] = 1.0
    elif vocab.include_unk:
        out[n_codes + len(vocab.countries)] = 1.0
    out[-1] = 1.0 if row.endemic else 0.0
    return out


def encode_all(rows: Sequence[ObservationMeta], vocab: MetaVocab) -> np.ndarray:
    if not rows:
        return np.zeros((0, vocab.dim))
    return np.stack([encode_meta(r, vocab) for r in rows])
