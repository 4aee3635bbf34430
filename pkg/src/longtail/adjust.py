"""Post-hoc logit adjustment and the logit-adjusted soft-target cross entropy.

Adjusted scores are ``f(x) - tau * log(pi)``; the loss instead trains on
``softmax(f(x) + tau * log(pi))`` so that the learned logits absorb less of
the training prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPrior, InvalidTarget, LengthMismatch
from .priors import ClassPrior, log_priors

DEFAULT_TAU = 0.55


@dataclass(frozen=True)
class AdjustConfig:
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise ValueError(f"tau must be finite and >= 0, got {self.tau!r}")


def _log_prior(prior) -> np.ndarray:
    # Raw positive weights are accepted too; they need not sum to 1.
    if isinstance(prior, ClassPrior):
        return log_priors(prior)
    w = np.asarray(prior, dtype=np.float64)
    if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise InvalidPrior("prior weights must be a finite positive vector")
    return np.log(w)


def _check_scores(scores, num_classes: int) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    if s.shape[-1:] != (num_classes,):
        raise LengthMismatch("scores", s.shape[-1] if s.ndim else 0, num_classes)
    return s


def adjust_logits(scores, prior, cfg: AdjustConfig = AdjustConfig()) -> np.ndarray:
    """Subtract ``tau * log(pi)`` from the last axis of ``scores``."""
    log_pi = _log_prior(prior)
    s = _check_scores(scores, log_pi.shape[0])
    if cfg.tau == 0:
        return s.copy()
    return s - cfg.tau * log_pi


def post_hoc_predict(scores, prior, cfg: AdjustConfig = AdjustConfig()):
    """Argmax of the adjusted scores; ties go to the lowest class id.

    Works on a single vector or a ``(rows, C)`` batch.
    """
    adjusted = adjust_logits(scores, prior, cfg)
    out = np.argmax(adjusted, axis=-1)
    return int(out) if out.ndim == 0 else out


def log_softmax(z: np.ndarray) -> np.ndarray:
    m = np.max(z, axis=-1, keepdims=True)
    shifted = z - m
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def check_target(target, num_classes: int, tol: float = 1e-9) -> np.ndarray:
    t = np.asarray(target, dtype=np.float64)
    if t.shape != (num_classes,):
        raise InvalidTarget(f"target has shape {t.shape}, expected ({num_classes},)")
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise InvalidTarget("target entries must be finite and non-negative")
    if abs(t.sum() - 1.0) > tol:
        raise InvalidTarget(f"target sums to {t.sum()!r}, not 1")
    return t


def soft_target(class_id: int, num_classes: int, smoothing: float = 0.0) -> np.ndarray:
    """One-hot target, optionally label-smoothed to ``(1-eps)*onehot + eps/C``."""
    if not 0 <= smoothing < 1:
        raise InvalidTarget("label smoothing must lie in [0, 1)")
    t = np.full(num_classes, smoothing / num_classes)
    t[class_id] += 1.0 - smoothing
    return t


def _loss_logits(scores, prior, cfg) -> np.ndarray:
    log_pi = _log_prior(prior)
    s = _check_scores(scores, log_pi.shape[0])
    if s.ndim != 1:
        raise LengthMismatch("scores", s.size, log_pi.shape[0])
    return s + cfg.tau * log_pi


def la_loss(scores, target, prior, cfg: AdjustConfig = AdjustConfig()) -> float:
    z = _loss_logits(scores, prior, cfg)
    t = check_target(target, z.shape[0])
    return float(-np.dot(t, log_softmax(z)))


def la_loss_grad(scores, target, prior, cfg: AdjustConfig = AdjustConfig()) -> np.ndarray:
    """Gradient of :func:`la_loss` with respect to the raw scores."""
    z = _loss_logits(scores, prior, cfg)
    t = check_target(target, z.shape[0])
    p = np.exp(log_softmax(z))
    return p * t.sum() - t
