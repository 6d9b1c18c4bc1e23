"""Learnable tensors with gradient buffers and RMSprop state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..errors import NonFiniteError

LINEAR_INIT_STD = 0.01


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths from input to output. Hidden layers are rectified-linear."""

    layer_sizes: tuple[int, ...]
    output_activation: str = "identity"

    def __post_init__(self):
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise ValueError(f"bad layer sizes {self.layer_sizes}")
        if self.output_activation not in ("identity", "relu"):
            raise ValueError(f"unknown output activation {self.output_activation!r}")

    @classmethod
    def scoring_head(cls, d: int, hidden: tuple[int, ...] | None = None) -> "MlpSpec":
        hidden = (d,) if hidden is None else tuple(hidden)
        return cls((3 * d, *hidden, 1))

    def check_head(self, d: int) -> None:
        if self.layer_sizes[0] != 3 * d or self.layer_sizes[-1] != 1:
            raise ValueError(
                f"scoring head must map 3d={3 * d} inputs to 1 output, got {self.layer_sizes}"
            )


class ParamStore:
    """name → 2-D float64 tensor, plus same-shaped gradient and RMSprop buffers."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.sq_avg: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=np.float64)
        if value.ndim != 2:
            raise ValueError(f"{name}: parameters are 2-D, got shape {value.shape}")
        if not np.all(np.isfinite(value)):
            raise NonFiniteError(f"{name}: non-finite initial values")
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)
        self.sq_avg[name] = np.zeros_like(value)
        return value

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def __iter__(self) -> Iterator[str]:
        return iter(self.params)

    def grad(self, name: str) -> np.ndarray:
        return self.grads[name]

    def zero_grad(self) -> None:
        for g in self.grads.values():
            g.fill(0.0)

    def shapes(self) -> dict[str, tuple[int, int]]:
        return {name: tuple(v.shape) for name, v in self.params.items()}

    def n_parameters(self, prefix: str = "") -> int:
        return int(sum(v.size for k, v in self.params.items() if k.startswith(prefix)))

    def copy(self) -> "ParamStore":
        out = ParamStore()
        for name, value in self.params.items():
            out.add(name, value)
            out.sq_avg[name][...] = self.sq_avg[name]
        out.step_count = self.step_count
        return out

    def assign(self, other: "ParamStore") -> None:
        """Copy values from ``other`` in place, keeping every array object alive."""
        if other.shapes() != self.shapes():
            raise ValueError("parameter shapes differ")
        for name, value in other.params.items():
            np.copyto(self.params[name], value)

    def equals(self, other: "ParamStore") -> bool:
        return self.shapes() == other.shapes() and all(
            np.array_equal(v, other.params[k]) for k, v in self.params.items()
        )


def xavier_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def add_mlp(
    store: ParamStore,
    spec: MlpSpec,
    rng: np.random.Generator,
    prefix: str = "mlp",
    std: float = LINEAR_INIT_STD,
) -> None:
    for layer, (fan_in, fan_out) in enumerate(zip(spec.layer_sizes[:-1], spec.layer_sizes[1:])):
        store.add(f"{prefix}.{layer}.w", rng.normal(0.0, std, size=(fan_in, fan_out)))
        store.add(f"{prefix}.{layer}.b", np.zeros((1, fan_out)))


def init_params(
    n: int,
    m: int,
    s: int,
    d: int,
    mlp_spec: MlpSpec,
    seed: int,
    attention: bool = False,
    linear_std: float = LINEAR_INIT_STD,
) -> ParamStore:
    """Xavier-uniform embedding tables, N(0, std²) linear weights, zero biases.

    ``attention`` adds the vanilla-attention scorer (hidden width d).
    """
    if d < 1:
        raise ValueError("embedding size d must be >= 1")
    mlp_spec.check_head(d)
    rng = np.random.default_rng(seed)
    store = ParamStore()
    store.add("user_emb", xavier_uniform(rng, n, d))
    store.add("item_emb", xavier_uniform(rng, m, d))
    store.add("group_emb", xavier_uniform(rng, s, d))
    add_mlp(store, mlp_spec, rng, "mlp", linear_std)
    if attention:
        store.add("att.w", rng.normal(0.0, linear_std, size=(2 * d, d)))
        store.add("att.c", np.zeros((1, d)))
        store.add("att.v", rng.normal(0.0, linear_std, size=(d, 1)))
    return store
