import numpy as np
import pytest

from longtail.core import ObservationMeta
from longtail.errors import EmptyInput
from longtail.metaenc import MetaVocab, build_meta_vocab, encode_all, encode_meta

ROWS = [
    ObservationMeta("a", "c1", "FR", True),
    ObservationMeta("b", "c2", "FR", False),
    ObservationMeta("c", "c1", "FR", False),
]


def test_build_vocab_counts():
    mv = build_meta_vocab(ROWS)
    assert mv.codes == ("c1", "c2") and mv.countries == ("FR",)


def test_many_countries():
    rows = [ObservationMeta(f"o{i}", f"k{i % 7}", f"country{i}") for i in range(208)]
    assert len(build_meta_vocab(rows).countries) == 208


def test_duplicates_and_empty_strings():
    mv = build_meta_vocab(ROWS + ROWS + [ObservationMeta("z", "", "")])
    assert mv.codes == ("c1", "c2") and mv.countries == ("FR",)


def test_empty_input():
    with pytest.raises(EmptyInput):
        build_meta_vocab([])


def test_known_values_three_nonzeros():
    mv = build_meta_vocab(ROWS)
    v = encode_meta(ObservationMeta("q", "c2", "FR", True), mv)
    assert np.count_nonzero(v) == 3
    assert len(v) == mv.dim == 2 + 1 + 2 + 1


def test_unknown_code_without_unk():
    mv = build_meta_vocab(ROWS, include_unk=False)
    v = encode_meta(ObservationMeta("q", "c9", "FR", False), mv)
    assert np.count_nonzero(v[:2]) == 0
    assert np.count_nonzero(v) <= 2
    assert len(v) == 2 + 1 + 1


def test_unknown_goes_to_unk_slot():
    mv = build_meta_vocab(ROWS)
    v = encode_meta(ObservationMeta("q", "c9", "DE", False), mv)
    cols = mv.column_names()
    assert [cols[i] for i in np.flatnonzero(v)] == ["code=<unk>", "country=<unk>"]


def test_dimension_formula():
    for unk in (True, False):
        rows = [ObservationMeta(f"o{i}", f"k{i % 11}", f"c{i % 4}") for i in range(40)]
        mv = build_meta_vocab(rows, include_unk=unk)
        expected = 11 + 4 + 1 + (2 if unk else 0)
        assert encode_meta(rows[0], mv).shape == (expected,)
        assert len(mv.column_names()) == expected


def test_binary_and_injective():
    mv = build_meta_vocab(ROWS)
    seen = {}
    for code in mv.codes:
        for country in mv.countries:
            for endemic in (False, True):
                v = encode_meta(ObservationMeta("q", code, country, endemic), mv)
                assert set(np.unique(v)) <= {0.0, 1.0}
                key = v.tobytes()
                assert key not in seen
                seen[key] = (code, country, endemic)
    mat = encode_all(ROWS, mv)
    assert mat.shape == (3, mv.dim)


def test_round_trip_dict():
    mv = build_meta_vocab(ROWS)
    assert MetaVocab.from_dict(mv.to_dict()) == mv
