"""Readers and writers for the toolkit's CSV and JSON files.

Floats in CSV files and priors are written with 17 significant digits so every
double survives a round trip. All writes go through a temporary file in the
destination directory followed by a rename.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import LabelRecord, LogitRecord, ObservationMeta, SpeciesVocab, build_vocab
from .errors import FormatError
from .locfilter import Locations2Species
from .metaenc import MetaVocab
from .metrics import EvalReport
from .priors import ClassPrior

LOGIT_KEYS = ("observation_id", "image_id", "model_id", "view_id")


def fmt(x: float) -> str:
    return format(float(x), "#.17g")


def write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    write_text(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from None


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_csv(path, required: Sequence[str]):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise FormatError(f"{path}: missing columns {missing}")
        rows = [row for row in reader if row]
    for n, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise FormatError(f"{path}:{n}: expected {len(header)} fields, got {len(row)}")
    return header, rows


def _float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{where}: {text!r} is not a number") from None


def _int(text: str, where: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"{where}: {text!r} is not an integer") from None


# vocabulary

def write_vocab(path, vocab: SpeciesVocab) -> None:
    write_json(path, {"species": list(vocab.names)})


def read_vocab(path) -> SpeciesVocab:
    doc = read_json(path)
    names = doc.get("species") if isinstance(doc, dict) else doc
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise FormatError(f"{path}: expected {{'species': [names...]}}")
    return build_vocab(names)


# labels and metadata

def write_labels(path, labels: Iterable[LabelRecord]) -> None:
    write_text(path, _csv_text(["observation_id", "class_id"],
                               ([r.observation_id, str(r.class_id)] for r in labels)))


def read_labels(path) -> list[LabelRecord]:
    header, rows = _read_csv(path, ["observation_id", "class_id"])
    io_, ic = header.index("observation_id"), header.index("class_id")
    return [LabelRecord(r[io_], _int(r[ic], f"{path}:{n}")) for n, r in enumerate(rows, start=2)]


def write_meta(path, meta: Iterable[ObservationMeta]) -> None:
    write_text(path, _csv_text(
        ["observation_id", "code", "country", "endemic"],
        ([m.observation_id, m.code, m.country, "1" if m.endemic else "0"] for m in meta)))


def read_meta(path) -> list[ObservationMeta]:
    """Missing optional columns or empty cells parse to unknown values."""
    header, rows = _read_csv(path, ["observation_id"])
    col = {name: header.index(name) for name in ("code", "country", "endemic") if name in header}
    out = []
    for n, r in enumerate(rows, start=2):
        endemic = r[col["endemic"]].strip() if "endemic" in col else ""
        if endemic not in ("", "0", "1"):
            raise FormatError(f"{path}:{n}: endemic must be 0 or 1, got {endemic!r}")
        if not r[header.index("observation_id")]:
            raise FormatError(f"{path}:{n}: empty observation_id")
        out.append(ObservationMeta(
            r[header.index("observation_id")],
            r[col["code"]] if "code" in col else "",
            r[col["country"]] if "country" in col else "",
            endemic == "1",
        ))
    return out


# logits

def _check_species_header(path, names: Sequence[str], vocab: SpeciesVocab) -> None:
    if tuple(names) != vocab.names:
        raise FormatError(f"{path}: species columns do not match the vocabulary order")


def write_logits(path, records: Iterable[LogitRecord], vocab: SpeciesVocab) -> None:
    rows = ([*r.key, *map(fmt, r.scores)] for r in records)
    write_text(path, _csv_text([*LOGIT_KEYS, *vocab.names], rows))


def read_logits(path, vocab: SpeciesVocab) -> list[LogitRecord]:
    header, rows = _read_csv(path, LOGIT_KEYS)
    if header[:4] != list(LOGIT_KEYS):
        raise FormatError(f"{path}: header must start with {','.join(LOGIT_KEYS)}")
    _check_species_header(path, header[4:], vocab)
    return [
        LogitRecord(*r[:4], [_float(x, f"{path}:{n}") for x in r[4:]])
        for n, r in enumerate(rows, start=2)
    ]


def write_scores(path, scores: Mapping[str, np.ndarray], vocab: SpeciesVocab) -> None:
    """Per-observation score file: ``observation_id,<species...>``, sorted by id."""
    rows = ([obs, *map(fmt, scores[obs])] for obs in sorted(scores))
    write_text(path, _csv_text(["observation_id", *vocab.names], rows))


def read_scores(path, vocab: SpeciesVocab) -> dict[str, np.ndarray]:
    header, rows = _read_csv(path, ["observation_id"])
    if header[0] != "observation_id":
        raise FormatError(f"{path}: first column must be observation_id")
    _check_species_header(path, header[1:], vocab)
    out = {}
    for n, r in enumerate(rows, start=2):
        if r[0] in out:
            raise FormatError(f"{path}:{n}: duplicate observation {r[0]!r}")
        out[r[0]] = np.array([_float(x, f"{path}:{n}") for x in r[1:]])
    return out


# priors, location map

def write_priors(path, prior: ClassPrior, vocab: SpeciesVocab) -> None:
    # json.dumps would emit shortest-repr floats; probs are pinned to 17 digits
    probs = ", ".join(fmt(p) for p in prior.probs)
    write_text(path, (
        "{\n"
        f'  "species": {json.dumps(list(vocab.names))},\n'
        f'  "counts": {json.dumps([int(c) for c in prior.counts])},\n'
        f'  "probs": [{probs}]\n'
        "}\n"
    ))


def read_priors(path, vocab: SpeciesVocab | None = None) -> ClassPrior:
    doc = read_json(path)
    try:
        species, counts, probs = doc["species"], doc["counts"], doc["probs"]
    except (KeyError, TypeError):
        raise FormatError(f"{path}: priors need species, counts and probs") from None
    if vocab is not None and tuple(species) != vocab.names:
        raise FormatError(f"{path}: prior species do not match the vocabulary")
    return ClassPrior(np.array(probs, dtype=np.float64), np.array(counts, dtype=np.int64))


def write_l2s(path, l2s: Locations2Species, vocab: SpeciesVocab) -> None:
    write_json(path, {code: [vocab.name_of(i) for i in sorted(ids)]
                      for code, ids in l2s.map.items()})


def read_l2s(path, vocab: SpeciesVocab) -> Locations2Species:
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected an object mapping codes to species lists")
    return Locations2Species({code: frozenset(vocab.id_of(n) for n in names)
                              for code, names in doc.items()})


# predictions and reports

def write_predictions(path, preds: Mapping[str, int], vocab: SpeciesVocab) -> None:
    rows = ([obs, str(preds[obs]), vocab.name_of(preds[obs])] for obs in sorted(preds))
    write_text(path, _csv_text(["observation_id", "class_id", "species"], rows))


def read_predictions(path) -> dict[str, int]:
    header, rows = _read_csv(path, ["observation_id", "class_id"])
    io_, ic = header.index("observation_id"), header.index("class_id")
    out = {}
    for n, r in enumerate(rows, start=2):
        if r[io_] in out:
            raise FormatError(f"{path}:{n}: duplicate observation {r[io_]!r}")
        out[r[io_]] = _int(r[ic], f"{path}:{n}")
    return out


def write_report(path, report: EvalReport, vocab: SpeciesVocab, csv_path=None) -> None:
    write_json(path, report.to_dict(vocab))
    if csv_path is not None:
        rows = ([str(r.class_id), vocab.name_of(r.class_id), str(r.tp), str(r.fp), str(r.fn),
                 fmt(r.precision), fmt(r.recall), fmt(r.f1)] for r in report.per_class)
        write_text(csv_path, _csv_text(
            ["class_id", "species", "tp", "fp", "fn", "precision", "recall", "f1"], rows))


def write_meta_vocab(path, vocab: MetaVocab) -> None:
    write_json(path, vocab.to_dict())


def read_meta_vocab(path) -> MetaVocab:
    return MetaVocab.from_dict(read_json(path))


def write_features(path, meta: Sequence[ObservationMeta], features: np.ndarray,
                   vocab: MetaVocab) -> None:
    rows = ([m.observation_id, *("1" if v else "0" for v in row)]
            for m, row in zip(meta, features))
    write_text(path, _csv_text(["observation_id", *vocab.column_names()], rows))
