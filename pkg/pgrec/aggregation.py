"""
Member aggregation: item-conditioned group embeddings from member embeddings.

Batched aggregators work on padded member tensors ``U`` of shape
(batch, max_members, d) with a 0/1 ``mask``; padded slots always receive
zero weight and zero gradient. The single-group functions wrap them.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .nn.params import ParamStore

DEFAULT_BETA = 5.0


@dataclass(frozen=True)
class PgusaConfig:
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class MemberWeightRecord:
    group_id: int
    item_id: int
    weights: tuple[tuple[int, float], ...]  # (user_id, weight) per member

    def most_influential(self) -> int:
        """Argmax weight; ties go to the lowest user id."""
        best = max(self.weights, key=lambda uw: (uw[1], -uw[0]))
        return best[0]


def pgusa_weight(alpha, freq, beta: float = DEFAULT_BETA):
    """Adaptive sigmoid β / (1 + exp(−α·p)); steeper in p as α (cheapness) grows."""
    w = beta / (1.0 + np.exp(-np.multiply(alpha, freq)))
    return float(w) if np.ndim(w) == 0 else w


def compose_additive(embeddings: Sequence[np.ndarray]) -> np.ndarray:
    if len(embeddings) == 0:
        raise ValueError("nothing to compose")
    shapes = {np.shape(e) for e in embeddings}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")
    out = np.array(embeddings[0], dtype=np.float64)
    for e in embeddings[1:]:
        out = out + e
    return out


class Aggregator(ABC):
    name = ""
    uses_attention_params = False

    @abstractmethod
    def forward(self, params, U, mask, I, alpha, freq):
        """Return (g (B, d), weights (B, L), cache)."""

    @abstractmethod
    def backward(self, params, cache, dg):
        """Return (dU (B, L, d), dI (B, d)); parameter gradients accumulate in ``params``."""


class PgusaAggregator(Aggregator):
    name = "pgusa"

    def __init__(self, beta: float = DEFAULT_BETA):
        self.beta = PgusaConfig(beta).beta

    def forward(self, params, U, mask, I, alpha, freq):
        w = pgusa_weight(alpha[:, None], freq, self.beta) * mask
        g = np.einsum("bl,bld->bd", w, U)
        return g, w, w

    def backward(self, params, cache, dg):
        w = cache
        return w[:, :, None] * dg[:, None, :], np.zeros_like(dg)


class AverageAggregator(Aggregator):
    """Uniform mean of member embeddings."""

    name = "average"

    def forward(self, params, U, mask, I, alpha, freq):
        w = mask / mask.sum(axis=1, keepdims=True)
        return np.einsum("bl,bld->bd", w, U), w, w

    def backward(self, params, cache, dg):
        return cache[:, :, None] * dg[:, None, :], np.zeros_like(dg)


@dataclass
class _AttentionCache:
    U: np.ndarray
    X: np.ndarray
    z: np.ndarray
    h: np.ndarray
    a: np.ndarray


class VanillaAttentionAggregator(Aggregator):
    """score_t = v·relu(W·[u_t; i] + c); softmax over members."""

    name = "vanilla"
    uses_attention_params = True

    def forward(self, params, U, mask, I, alpha, freq):
        B, L, d = U.shape
        X = np.concatenate([U, np.broadcast_to(I[:, None, :], (B, L, d))], axis=-1)
        z = X @ params["att.w"] + params["att.c"]
        h = np.maximum(z, 0.0)
        logits = (h @ params["att.v"])[..., 0]
        logits = np.where(mask > 0, logits, -np.inf)
        logits = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(logits) * mask
        a = e / e.sum(axis=1, keepdims=True)
        g = np.einsum("bl,bld->bd", a, U)
        return g, a, _AttentionCache(U, X, z, h, a)

    def backward(self, params, cache, dg):
        c = cache
        d = c.U.shape[-1]
        da = np.einsum("bld,bd->bl", c.U, dg)
        dU = c.a[:, :, None] * dg[:, None, :]
        dlogit = c.a * (da - np.sum(c.a * da, axis=1, keepdims=True))
        params.grads["att.v"] += np.einsum("bld,bl->d", c.h, dlogit)[:, None]
        dz = dlogit[:, :, None] * params["att.v"][:, 0] * (c.z > 0)
        params.grads["att.w"] += np.einsum("blk,bld->kd", c.X, dz)
        params.grads["att.c"] += dz.sum(axis=(0, 1))[None, :]
        dX = dz @ params["att.w"].T
        return dU + dX[..., :d], dX[..., d:].sum(axis=1)


class AdditiveAggregator(Aggregator):
    """Sum of several aggregators' embeddings; weights reported from the first."""

    uses_attention_params = False

    def __init__(self, parts: Sequence[Aggregator]):
        if not parts:
            raise ValueError("need at least one aggregator")
        self.parts = list(parts)
        self.name = "+".join(p.name for p in self.parts)
        self.uses_attention_params = any(p.uses_attention_params for p in self.parts)

    def forward(self, params, U, mask, I, alpha, freq):
        outs = [p.forward(params, U, mask, I, alpha, freq) for p in self.parts]
        g = compose_additive([o[0] for o in outs])
        return g, outs[0][1], [o[2] for o in outs]

    def backward(self, params, cache, dg):
        dU, dI = 0.0, 0.0
        for part, part_cache in zip(self.parts, cache):
            u, i = part.backward(params, part_cache, dg)
            dU, dI = dU + u, dI + i
        return dU, dI


AGGREGATOR_NAMES = ("pgusa", "vanilla", "average", "pgusa+vanilla")


def make_aggregator(name: str, beta: float = DEFAULT_BETA) -> Aggregator:
    if name == "pgusa":
        return PgusaAggregator(beta)
    if name == "vanilla":
        return VanillaAttentionAggregator()
    if name == "average":
        return AverageAggregator()
    if name == "pgusa+vanilla":
        return AdditiveAggregator([PgusaAggregator(beta), VanillaAttentionAggregator()])
    raise ValueError(f"unknown aggregator {name!r}; choose from {AGGREGATOR_NAMES}")


def _single(members: Sequence) -> np.ndarray:
    if len(members) == 0:
        raise ValueError("empty group")
    return np.asarray(members, dtype=np.float64)[None, :, :]


def aggregate_pgusa(members, alpha: float, beta: float = DEFAULT_BETA):
    """``members`` is a list of (embedding, freq). Returns (g_lo, weights)."""
    if len(members) == 0:
        raise ValueError("empty group")
    U = _single([np.atleast_1d(e) for e, _ in members])
    freq = np.array([[f for _, f in members]], dtype=np.float64)
    g, w, _ = PgusaAggregator(beta).forward(
        None, U, np.ones_like(freq), None, np.array([alpha], dtype=np.float64), freq
    )
    return g[0], w[0]


def aggregate_vanilla_attention(params: ParamStore, members, item_embedding):
    U = _single([np.atleast_1d(e) for e in members])
    I = np.asarray(item_embedding, dtype=np.float64)[None, :]
    mask = np.ones(U.shape[:2])
    g, a, _ = VanillaAttentionAggregator().forward(params, U, mask, I, None, None)
    return g[0], a[0]


def aggregate_scores_avg(member_scores) -> float:
    """Mean member score. Entries may be plain scores or (score, freq) pairs."""
    if len(member_scores) == 0:
        raise ValueError("empty group")
    scores = [s[0] if isinstance(s, (tuple, list)) else s for s in member_scores]
    return float(np.mean(scores))


def aggregate_scores_exp(member_scores) -> float:
    """Frequency-weighted mean of (score, freq) pairs; plain mean if all freqs are 0."""
    if len(member_scores) == 0:
        raise ValueError("empty group")
    scores = np.array([s for s, _ in member_scores], dtype=np.float64)
    freqs = np.array([f for _, f in member_scores], dtype=np.float64)
    total = freqs.sum()
    if total == 0:
        return float(scores.mean())
    return float(np.dot(freqs, scores) / total)
