"""Central finite-difference checks for the analytic loss gradients."""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .adjust import AdjustConfig, la_loss, la_loss_grad
from .pretrain import (
    PretrainConfig,
    info_nce,
    info_nce_grad,
    pretrain_loss,
    pretrain_loss_grad,
)
from .synth import make_rng

H = 1e-5
TOLERANCE = 1e-6


def central_difference(f: Callable[[np.ndarray], float], x, h: float = H) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat, g = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        g[i] = (fp - fm) / (2 * h)
    return grad


def relative_error(analytic, numeric) -> float:
    """Largest absolute deviation scaled by the larger gradient's max-norm.

    Both gradients being (numerically) zero counts as agreement.
    """
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(n), initial=0.0))
    diff = np.max(np.abs(a - n), initial=0.0)
    if scale < 1e-12:
        return float(diff)
    return float(diff / scale)


def la_instance(rng: np.random.Generator, max_classes: int = 20):
    C = int(rng.integers(2, max_classes + 1))
    scores = rng.normal(scale=2.0, size=C)
    target = rng.dirichlet(np.ones(C))
    prior = rng.dirichlet(np.ones(C)) + 1e-6
    prior /= prior.sum()
    return scores, target, prior


def embedding_instance(rng: np.random.Generator, max_pairs: int = 8, max_dim: int = 16):
    n = int(rng.integers(1, max_pairs + 1))
    d = int(rng.integers(2, max_dim + 1))
    return rng.standard_normal((2 * n, d))


def pretrain_instance(rng: np.random.Generator, max_classes: int = 20, max_pairs: int = 8,
                      max_dim: int = 16):
    emb = embedding_instance(rng, max_pairs, max_dim)
    rows = emb.shape[0]
    C = int(rng.integers(2, max_classes + 1))
    scores = rng.normal(scale=2.0, size=(rows, C))
    ids = rng.integers(0, C, size=rows // 2)
    ids = np.where(rng.random(rows // 2) < 0.3, -1, ids)
    ids = np.concatenate([ids, ids])  # both views share the label
    targets = np.zeros((rows, C))
    labeled = ids != -1
    targets[np.flatnonzero(labeled), ids[labeled]] = 1.0
    return scores, targets, labeled, emb


def check_la_loss(seed: int, tau: float) -> float:
    scores, target, prior = la_instance(make_rng(seed))
    cfg = AdjustConfig(tau)
    fd = central_difference(lambda s: la_loss(s, target, prior, cfg), scores)
    return relative_error(la_loss_grad(scores, target, prior, cfg), fd)


def check_info_nce(seed: int, temperature: float) -> float:
    emb = embedding_instance(make_rng(seed))
    cfg = PretrainConfig(temperature=temperature)
    fd = central_difference(lambda v: info_nce(v, cfg), emb)
    return relative_error(info_nce_grad(emb, cfg), fd)


def check_pretrain_loss(seed: int, alpha: float, temperature: float) -> float:
    scores, targets, labeled, emb = pretrain_instance(make_rng(seed))
    cfg = PretrainConfig(alpha, temperature)
    d_scores, d_emb = pretrain_loss_grad(scores, targets, labeled, emb, cfg)
    fd_scores = central_difference(lambda s: pretrain_loss(s, targets, labeled, emb, cfg), scores)
    fd_emb = central_difference(lambda v: pretrain_loss(scores, targets, labeled, v, cfg), emb)
    return relative_error(np.concatenate([d_scores.ravel(), d_emb.ravel()]),
                          np.concatenate([fd_scores.ravel(), fd_emb.ravel()]))


def run_loss_check(
    seeds: Iterable[int],
    tau: float = 0.55,
    alpha: float = 0.001,
    temperature: float = 0.1,
) -> dict:
    rows = []
    for seed in seeds:
        rows.append({
            "seed": int(seed),
            "la_loss_grad": check_la_loss(seed, tau),
            "info_nce_grad": check_info_nce(seed, temperature),
            "pretrain_loss_grad": check_pretrain_loss(seed, alpha, temperature),
        })
    names = ("la_loss_grad", "info_nce_grad", "pretrain_loss_grad")
    worst = {k: max((r[k] for r in rows), default=0.0) for k in names}
    return {
        "h": H,
        "tolerance": TOLERANCE,
        "tau": tau,
        "alpha": alpha,
        "temperature": temperature,
        "max_relative_error": worst,
        "passed": all(v <= TOLERANCE for v in worst.values()),
        "seeds": rows,
    }
