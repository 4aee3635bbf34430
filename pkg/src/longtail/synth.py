"""Seeded synthetic long-tailed datasets.

Training labels follow a Zipf law; test labels are balanced. The simulated
model's test logits are ``prior_leak * log(w) + signal_mu * onehot(y) + noise``,
so post-hoc adjustment with ``tau = prior_leak`` removes exactly the prior the
model absorbed. Every class also gets a small geographic range of location
codes, which makes the locations-to-species map meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .core import LabelRecord, LogitRecord, ObservationMeta, SpeciesVocab, build_vocab
from .metrics import macro_f1_arrays
from .priors import prior_from_counts
from .adjust import AdjustConfig, post_hoc_predict


@dataclass(frozen=True)
class SynthConfig:
    num_classes: int = 50
    num_train: int = 20_000
    num_test: int = 10_000
    zipf_s: float = 1.5
    signal_mu: float = 2.0
    prior_leak: float = 1.0
    num_codes: int = 20
    codes_per_class: int = 4
    num_countries: int = 5
    num_views: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        for name in ("num_train", "num_test", "num_codes", "codes_per_class",
                     "num_countries", "num_views"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.zipf_s < 0 or self.signal_mu <= 0:
            raise ValueError("zipf_s must be >= 0 and signal_mu > 0")
        if not 0 <= self.prior_leak <= 1:
            raise ValueError("prior_leak must lie in [0, 1]")


def zipf_weights(num_classes: int, s: float) -> np.ndarray:
    """``w[c]`` proportional to ``(c+1)**-s``; ``s=0`` gives the uniform law."""
    w = np.arange(1, num_classes + 1, dtype=np.float64) ** -float(s)
    return w / w.sum()


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the only randomness source in the toolkit."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class SynthDataset:
    config: SynthConfig
    vocab: SpeciesVocab
    weights: np.ndarray = field(repr=False)
    ranges: tuple[tuple[int, ...], ...] = field(repr=False)
    train_y: np.ndarray = field(repr=False)
    train_code: np.ndarray = field(repr=False)
    test_y: np.ndarray = field(repr=False)
    test_code: np.ndarray = field(repr=False)
    test_scores: np.ndarray = field(repr=False)  # (num_test, num_views, C)

    @staticmethod
    def code_name(k: int) -> str:
        return f"loc{k:03d}"

    def country_of(self, k: int) -> str:
        return f"country{k % self.config.num_countries:02d}"

    @staticmethod
    def train_id(i: int) -> str:
        return f"train{i:06d}"

    @staticmethod
    def test_id(i: int) -> str:
        return f"test{i:06d}"

    def _meta(self, ids, codes, classes):
        return [
            ObservationMeta(ids(i), self.code_name(int(k)), self.country_of(int(k)),
                            len(self.ranges[int(c)]) == 1)
            for i, (k, c) in enumerate(zip(codes, classes))
        ]

    @cached_property
    def train_labels(self) -> list[LabelRecord]:
        return [LabelRecord(self.train_id(i), int(c)) for i, c in enumerate(self.train_y)]

    @cached_property
    def test_labels(self) -> list[LabelRecord]:
        return [LabelRecord(self.test_id(i), int(c)) for i, c in enumerate(self.test_y)]

    @cached_property
    def train_meta(self) -> list[ObservationMeta]:
        return self._meta(self.train_id, self.train_code, self.train_y)

    @cached_property
    def test_meta(self) -> list[ObservationMeta]:
        return self._meta(self.test_id, self.test_code, self.test_y)

    @cached_property
    def test_logits(self) -> list[LogitRecord]:
        return [
            LogitRecord(self.test_id(i), "img0", "synth", f"view{v}", self.test_scores[i, v])
            for i in range(self.test_scores.shape[0])
            for v in range(self.test_scores.shape[1])
        ]

    def train_counts(self) -> np.ndarray:
        return np.bincount(self.train_y, minlength=self.vocab.size)


def generate(config: SynthConfig) -> SynthDataset:
    rng = make_rng(config.seed)
    C = config.num_classes
    w = zipf_weights(C, config.zipf_s)
    vocab = build_vocab(f"species{c:03d}" for c in range(C))

    k_max = min(config.codes_per_class, config.num_codes)
    sizes = rng.integers(1, k_max + 1, size=C)
    ranges = tuple(
        tuple(sorted(int(k) for k in rng.choice(config.num_codes, size=int(n), replace=False)))
        for n in sizes
    )

    def draw_codes(classes: np.ndarray) -> np.ndarray:
        pick = rng.random(classes.shape[0])
        return np.array(
            [ranges[c][int(u * len(ranges[c]))] for c, u in zip(classes, pick)], dtype=np.int64
        )

    train_y = rng.choice(C, size=config.num_train, p=w)
    train_code = draw_codes(train_y)
    test_y = rng.integers(0, C, size=config.num_test)
    test_code = draw_codes(test_y)

    noise = rng.standard_normal((config.num_test, config.num_views, C))
    scores = noise + config.prior_leak * np.log(w)
    scores[np.arange(config.num_test), :, test_y] += config.signal_mu

    return SynthDataset(config, vocab, w, ranges, train_y, train_code, test_y, test_code, scores)


def tau_sweep(data: SynthDataset, taus: Sequence[float]) -> dict[float, float]:
    """Macro-F1 of post-hoc predictions for each tau, priors estimated from train."""
    prior = prior_from_counts(data.train_counts())
    mean_scores = data.test_scores.mean(axis=1)
    C = data.vocab.size
    return {
        float(t): macro_f1_arrays(post_hoc_predict(mean_scores, prior, AdjustConfig(t)), data.test_y, C)
        for t in taus
    }
