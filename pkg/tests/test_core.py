import numpy as np
import pytest

from longtail import io
from longtail.core import (
    LabelRecord,
    LogitRecord,
    ObservationMeta,
    build_vocab,
    ground_truth,
    validate_labels,
    validate_logits,
)
from longtail.errors import (
    BadClassId,
    ConflictingLabel,
    DuplicateKey,
    DuplicateSpecies,
    EmptyVocab,
    LengthMismatch,
    NonFinite,
)


def test_build_vocab_positions():
    v = build_vocab(["a", "b", "c"])
    assert v.size == 3
    assert v.id_of("b") == 1
    assert v.name_of(2) == "c"


def test_build_vocab_rejects_duplicates():
    with pytest.raises(DuplicateSpecies) as e:
        build_vocab(["a", "a"])
    assert e.value.name == "a"


def test_build_vocab_empty():
    with pytest.raises(EmptyVocab):
        build_vocab([])


def test_vocab_at_dataset_scale():
    v = build_vocab(f"sp{i}" for i in range(1572))
    assert v.size == 1572
    assert all(v.id_of(n) == i for i, n in enumerate(v.names))


def test_vocab_round_trip(tmp_path):
    v = build_vocab(["Natrix natrix", "Vipera berus", "Zamenis, comma"])
    io.write_vocab(tmp_path / "v.json", v)
    back = io.read_vocab(tmp_path / "v.json")
    assert back.names == v.names
    assert dict(back.index) == dict(v.index)


def _rec(obs, scores, image="i", model="m", view="v"):
    return LogitRecord(obs, image, model, view, scores)


class TestValidateLogits:
    vocab = build_vocab(["a", "b", "c"])

    def test_ok(self):
        recs = [_rec("o1", [1, 2, 3]), _rec("o2", [0, 0, 0])]
        assert validate_logits(recs, self.vocab) == recs

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch) as e:
            validate_logits([_rec("o1", [1, 2])], self.vocab)
        assert (e.value.got, e.value.want) == (2, 3)

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            validate_logits([_rec("o1", [1, np.nan, 0])], self.vocab)
        with pytest.raises(NonFinite):
            validate_logits([_rec("o1", [1, np.inf, 0])], self.vocab)

    def test_duplicate_key(self):
        with pytest.raises(DuplicateKey):
            validate_logits([_rec("o1", [1, 2, 3]), _rec("o1", [3, 2, 1])], self.vocab)

    def test_same_observation_other_view_is_fine(self):
        validate_logits([_rec("o1", [1, 2, 3]), _rec("o1", [3, 2, 1], view="v2")], self.vocab)

    def test_idempotent(self):
        recs = [_rec("o1", [1, 2, 3]), _rec("o2", [0, 1, 0])]
        once = validate_logits(recs, self.vocab)
        twice = validate_logits(once, self.vocab)
        assert [r.key for r in once] == [r.key for r in twice]
        assert all(np.array_equal(a.scores, b.scores) for a, b in zip(once, twice))


def test_logit_record_is_immutable():
    r = _rec("o", [1.0, 2.0])
    with pytest.raises(ValueError):
        r.scores[0] = 5.0


def test_label_validation():
    v = build_vocab(["a", "b"])
    validate_labels([LabelRecord("x", -1), LabelRecord("y", 1)], v)
    with pytest.raises(BadClassId):
        validate_labels([LabelRecord("x", 2)], v)
    with pytest.raises(BadClassId):
        validate_labels([LabelRecord("x", -2)], v)


def test_ground_truth_merges_image_rows():
    labels = [LabelRecord("o1", 0), LabelRecord("o1", 0), LabelRecord("o2", 1), LabelRecord("o3", -1)]
    assert ground_truth(labels) == {"o1": 0, "o2": 1}
    with pytest.raises(ConflictingLabel):
        ground_truth([LabelRecord("o1", 0), LabelRecord("o1", 1)])


def test_meta_requires_id():
    with pytest.raises(ValueError):
        ObservationMeta("")
    m = ObservationMeta("o")
    assert (m.code, m.country, m.endemic) == ("", "", False)
