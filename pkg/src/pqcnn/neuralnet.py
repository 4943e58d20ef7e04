"""A small dense feedforward network in numpy.

Layers have no bias. Inputs are row vectors (or a batch of them, one per row),
so a layer computes ``activation(x @ W)`` with ``W`` of shape (in, out).
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Activation:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    # derivative expressed through the pre-activation z and the output a
    deriv: Callable[[np.ndarray, np.ndarray], np.ndarray]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


LEAKY_SLOPE = 0.01

ACTIVATIONS: dict[str, Activation] = {
    "linear": Activation("linear", lambda z: z, lambda z, a: np.ones_like(z)),
    "sigmoid": Activation("sigmoid", _sigmoid, lambda z, a: a * (1.0 - a)),
    "tanh": Activation("tanh", np.tanh, lambda z, a: 1.0 - a * a),
    "leaky_relu": Activation(
        "leaky_relu",
        lambda z: np.where(z > 0, z, LEAKY_SLOPE * z),
        lambda z, a: np.where(z > 0, 1.0, LEAKY_SLOPE),
    ),
}


def get_activation(name: str) -> Activation:
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown activation {name!r}; choose from {sorted(ACTIVATIONS)}"
        ) from None


@dataclass
class DenseLayer:
    weights: np.ndarray
    activation: str = "linear"

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 2:
            raise ValueError("layer weights must be a 2-d matrix")
        get_activation(self.activation)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]


@dataclass
class Network:
    layers: list[DenseLayer] = field(default_factory=list)

    def __post_init__(self) -> None:
        for i, (a, b) in enumerate(zip(self.layers, self.layers[1:])):
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"layer {i} outputs {a.out_dim} values but layer {i + 1} expects {b.in_dim}"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return [layer.weights.shape for layer in self.layers]

    def copy(self) -> "Network":
        return copy.deepcopy(self)

    def weights(self) -> list[np.ndarray]:
        return [layer.weights for layer in self.layers]


@dataclass
class ForwardCache:
    inputs: list[np.ndarray]
    pre: list[np.ndarray]
    outputs: list[np.ndarray]


def forward(net: Network, x, gf2: bool = False) -> tuple[np.ndarray, ForwardCache]:
    """Run ``x`` through every layer.

    With ``gf2=True`` each layer's output is reduced mod 2; that mode only makes
    sense with linear layers holding 0/1 weights and is never used in training.
    """
    a = np.asarray(x, dtype=float)
    if a.shape[-1] != net.in_dim:
        raise ValueError(f"input has {a.shape[-1]} features, network expects {net.in_dim}")
    cache = ForwardCache([], [], [])
    for layer in net.layers:
        cache.inputs.append(a)
        z = a @ layer.weights
        if gf2:
            z = np.mod(np.rint(z), 2.0)
        cache.pre.append(z)
        a = get_activation(layer.activation).fn(z)
        cache.outputs.append(a)
    return a, cache


def backward(
    net: Network, cache: ForwardCache, grad_out
) -> tuple[list[np.ndarray], np.ndarray]:
    """Reverse-mode pass.

    ``grad_out`` is dLoss/dOutput with the same shape as the forward output.
    Returns the per-layer weight gradients and dLoss/dInput.
    """
    g = np.asarray(grad_out, dtype=float)
    if g.shape != cache.outputs[-1].shape:
        raise ValueError(
            f"gradient shape {g.shape} does not match output shape {cache.outputs[-1].shape}"
        )
    grads: list[np.ndarray] = [None] * len(net.layers)  # type: ignore[list-item]
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        act = get_activation(layer.activation)
        dz = g * act.deriv(cache.pre[i], cache.outputs[i])
        x = cache.inputs[i]
        if x.ndim == 1:
            grads[i] = np.outer(x, dz)
        else:
            grads[i] = x.T @ dz
        g = dz @ layer.weights.T
    return grads, g


def noise_inject(y, alpha: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Perturb ciphertext values: ``y' = y + alpha * r`` with ``r ~ U[0, 1)``."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    y = np.asarray(y, dtype=float)
    r = rng.random(y.shape)
    return y + alpha * r, r


class GradientDescent:
    def __init__(self, lr: float = 0.01) -> None:
        self.lr = lr

    def step(self, net: Network, grads: Sequence[np.ndarray]) -> None:
        for layer, g in zip(net.layers, grads):
            if layer.weights.shape != g.shape:
                raise ValueError("gradient shape does not match weights")
            layer.weights -= self.lr * g


class Adam:
    """Adaptive-moment optimizer with bias correction."""

    def __init__(
        self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8
    ) -> None:
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Optional[list[np.ndarray]] = None
        self.v: Optional[list[np.ndarray]] = None

    def step(self, net: Network, grads: Sequence[np.ndarray]) -> None:
        if self.m is None:
            self.m = [np.zeros_like(g) for g in grads]
            self.v = [np.zeros_like(g) for g in grads]
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for layer, g, m, v in zip(net.layers, grads, self.m, self.v):
            if layer.weights.shape != g.shape:
                raise ValueError("gradient shape does not match weights")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            layer.weights -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(name: str, lr: float):
    if name == "adam":
        return Adam(lr=lr)
    if name in ("gd", "sgd"):
        return GradientDescent(lr=lr)
    raise ValueError(f"unknown optimizer {name!r}")


def mse_loss(output, target) -> tuple[float, np.ndarray]:
    """Mean squared error per sample, averaged over the batch, and its gradient."""
    output = np.asarray(output, dtype=float)
    diff = output - np.asarray(target, dtype=float)
    c = diff.shape[-1]
    batch = 1 if diff.ndim == 1 else diff.shape[0]
    return float(np.sum(diff**2) / (c * batch)), 2.0 * diff / (c * batch)


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-7) -> np.ndarray:
    """Elementwise ``|a - b| / max(|a|, |b|, floor)``."""
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def numerical_gradients(
    net: Network, objective: Callable[[Network], float], step: float = 1e-5
) -> list[np.ndarray]:
    """Central finite differences of ``objective(net)`` wrt every weight."""
    out = []
    for layer in net.layers:
        w = layer.weights
        g = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            orig = w[idx]
            w[idx] = orig + step
            plus = objective(net)
            w[idx] = orig - step
            minus = objective(net)
            w[idx] = orig
            g[idx] = (plus - minus) / (2.0 * step)
        out.append(g)
    return out


def gradient_check(
    net: Network,
    loss_fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x,
    step: float = 1e-5,
) -> float:
    """Largest relative gap between :func:`backward` and finite differences.

    ``loss_fn(output)`` returns the scalar loss and dLoss/dOutput.
    """
    out, cache = forward(net, x)
    _, g_out = loss_fn(out)
    analytic, _ = backward(net, cache, g_out)
    numeric = numerical_gradients(net, lambda n: loss_fn(forward(n, x)[0])[0], step)
    return max(float(relative_error(a, b).max()) for a, b in zip(analytic, numeric))
