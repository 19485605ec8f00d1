"""Small building blocks (affine layers, tanh MLPs) on top of the tape ops."""
from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .errors import ContractError


class Linear:
    """Affine map x @ w + b with named, trackable parameters."""

    def __init__(self, n_in: int, n_out: int, *, name: str, rng: np.random.Generator | None = None,
                 init: str = "glorot"):
        if init == "zero":
            w = np.zeros((n_in, n_out))
        elif init == "glorot":
            if rng is None:
                raise ContractError("Linear: glorot init needs an rng")
            limit = np.sqrt(6.0 / (n_in + n_out))
            w = rng.uniform(-limit, limit, size=(n_in, n_out))
        else:
            raise ContractError(f"Linear: unknown init '{init}'")
        self.name = name
        self.w = ad.Tensor(w, requires_grad=True)
        self.b = ad.Tensor(np.zeros((1, n_out)), requires_grad=True)

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        return ad.add_row(ad.matmul(x, self.w), self.b)

    def parameters(self) -> dict[str, ad.Tensor]:
        return {f"{self.name}.w": self.w, f"{self.name}.b": self.b}


class MLP:
    """Tanh hidden layers with a linear output layer."""

    def __init__(self, n_in: int, hidden: tuple[int, ...], n_out: int, *, name: str,
                 rng: np.random.Generator, out_init: str = "glorot"):
        self.layers: list[Linear] = []
        prev = n_in
        for i, width in enumerate(hidden):
            self.layers.append(Linear(prev, width, name=f"{name}.h{i}", rng=rng))
            prev = width
        self.out = Linear(prev, n_out, name=f"{name}.out", rng=rng, init=out_init)

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        for layer in self.layers:
            x = ad.tanh(layer(x))
        return self.out(x)

    def parameters(self) -> dict[str, ad.Tensor]:
        params: dict[str, ad.Tensor] = {}
        for layer in self.layers:
            params.update(layer.parameters())
        params.update(self.out.parameters())
        return params
