"""Supervised + contrastive pretraining objective with analytic gradients.

The objective is ``soft_target_ce(labeled rows) + alpha * info_nce(views)``.
Embeddings come as ``2N`` rows: view a of sample ``n`` is row ``n`` and view b
is row ``n + N``. The contrastive term is NT-Xent: each row's only positive is
its paired view, and every other row in the batch is a negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adjust import log_softmax
from .errors import BatchMismatch, InvalidTarget, NonFinite, ZeroVector

DEFAULT_ALPHA = 0.001
DEFAULT_TEMPERATURE = 0.1


@dataclass(frozen=True)
class PretrainConfig:
    alpha: float = DEFAULT_ALPHA
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError("alpha must be finite and >= 0")
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise ValueError("temperature must be finite and > 0")


@dataclass(frozen=True)
class EmbeddingBatch:
    vectors: np.ndarray = field(compare=False)

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[0] % 2:
            raise BatchMismatch(f"need an even, non-zero number of rows, got shape {v.shape}")
        if v.shape[1] < 2:
            raise BatchMismatch("embedding dimension must be at least 2")
        if not np.all(np.isfinite(v)):
            raise NonFinite("embeddings")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def num_pairs(self) -> int:
        return self.vectors.shape[0] // 2


def _as_batch(batch) -> EmbeddingBatch:
    return batch if isinstance(batch, EmbeddingBatch) else EmbeddingBatch(batch)


def _check_targets(scores, targets, labeled):
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] == 0:
        raise BatchMismatch("scores must be a non-empty (rows, C) array")
    if t.shape != s.shape:
        raise BatchMismatch(f"targets shape {t.shape} != scores shape {s.shape}")
    if labeled is None:
        mask = np.ones(s.shape[0], dtype=bool)
    else:
        mask = np.asarray(labeled, dtype=bool)
        if mask.shape != (s.shape[0],):
            raise BatchMismatch("labeled mask must have one entry per row")
    tl = t[mask]
    if tl.size and (not np.all(np.isfinite(tl)) or np.any(tl < 0)
                    or np.any(np.abs(tl.sum(axis=1) - 1.0) > 1e-9)):
        raise InvalidTarget("labeled targets must be non-negative and sum to 1")
    return s, t, mask


def soft_targets(class_ids, num_classes: int, smoothing: float = 0.0):
    """Targets and labeled mask for a vector of class ids (-1 = unlabeled).

    Unlabeled rows get an all-zero target and ``False`` in the mask.
    """
    ids = np.asarray(class_ids, dtype=np.int64)
    mask = ids != -1
    t = np.zeros((ids.shape[0], num_classes))
    t[mask] = smoothing / num_classes
    t[np.flatnonzero(mask), ids[mask]] += 1.0 - smoothing
    return t, mask


def soft_target_ce(scores, targets, labeled=None) -> float:
    """Mean soft-target cross entropy over labeled rows; 0 if none are labeled."""
    s, t, mask = _check_targets(scores, targets, labeled)
    n = int(mask.sum())
    if n == 0:
        return 0.0
    per_row = -np.sum(t[mask] * log_softmax(s[mask]), axis=1)
    return float(per_row.sum() / n)


def soft_target_ce_grad(scores, targets, labeled=None) -> np.ndarray:
    s, t, mask = _check_targets(scores, targets, labeled)
    grad = np.zeros_like(s)
    n = int(mask.sum())
    if n == 0:
        return grad
    tl = t[mask]
    p = np.exp(log_softmax(s[mask]))
    grad[mask] = (p * tl.sum(axis=1, keepdims=True) - tl) / n
    return grad


def _normalize(v: np.ndarray):
    norms = np.sqrt(np.sum(v * v, axis=1))
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroVector(int(zero[0]))
    return v / norms[:, None], norms


def _similarity_terms(batch: EmbeddingBatch, cfg: PretrainConfig):
    z, norms = _normalize(batch.vectors)
    m = z.shape[0]
    n = m // 2
    logits = (z @ z.T) / cfg.temperature
    np.fill_diagonal(logits, -np.inf)
    pos = (np.arange(m) + n) % m
    return z, norms, logits, pos


def info_nce(batch, cfg: PretrainConfig = PretrainConfig()) -> float:
    batch = _as_batch(batch)
    _, _, logits, pos = _similarity_terms(batch, cfg)
    rows = np.arange(logits.shape[0])
    per_anchor = -log_softmax(logits)[rows, pos]
    return float(per_anchor.mean())


def info_nce_grad(batch, cfg: PretrainConfig = PretrainConfig()) -> np.ndarray:
    """Gradient of :func:`info_nce` w.r.t. the unnormalized embedding rows."""
    batch = _as_batch(batch)
    z, norms, logits, pos = _similarity_terms(batch, cfg)
    m = z.shape[0]
    # dL/dlogits for the row-wise softmax over k != i
    g = np.exp(log_softmax(logits))
    g[np.arange(m), pos] -= 1.0
    g /= m
    dz = (g + g.T) @ z / cfg.temperature
    # back through z = v / |v|
    radial = np.sum(dz * z, axis=1, keepdims=True)
    return (dz - radial * z) / norms[:, None]


def pretrain_loss(scores, targets, labeled, batch, cfg: PretrainConfig = PretrainConfig()) -> float:
    """``soft_target_ce`` over labeled rows plus ``alpha * info_nce``.

    ``scores`` and ``targets`` hold one row per embedding row (both views).
    """
    batch = _as_batch(batch)
    if np.shape(scores)[0] != batch.vectors.shape[0]:
        raise BatchMismatch(
            f"{np.shape(scores)[0]} score rows vs {batch.vectors.shape[0]} embedding rows")
    return soft_target_ce(scores, targets, labeled) + cfg.alpha * info_nce(batch, cfg)


def pretrain_loss_grad(scores, targets, labeled, batch, cfg: PretrainConfig = PretrainConfig()):
    """Returns ``(d_scores, d_embeddings)``."""
    batch = _as_batch(batch)
    if np.shape(scores)[0] != batch.vectors.shape[0]:
        raise BatchMismatch(
            f"{np.shape(scores)[0]} score rows vs {batch.vectors.shape[0]} embedding rows")
    d_scores = soft_target_ce_grad(scores, targets, labeled)
    d_emb = cfg.alpha * info_nce_grad(batch, cfg)
    return d_scores, d_emb
