"""Small dense feed-forward networks with hand-written backprop and Adam.

Only what the three GACN networks need: affine layers, relu/tanh hidden
activations and a sigmoid/softmax/identity head.  Gradients are computed for
a batch given the derivative of a scalar loss with respect to the network
output, and the derivative with respect to the *input* is returned as well so
losses can be chained through several networks (generator -> discriminator).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

HIDDEN_ACTIVATIONS = ("relu", "tanh")
OUTPUT_ACTIVATIONS = ("sigmoid_elementwise", "softmax", "identity")

CHECKPOINT_VERSION = 1


class ConfigurationError(ValueError):
    """Invalid hyperparameter or layer configuration."""


class ShapeError(ValueError):
    """Array dimensions do not line up."""


class NumericError(FloatingPointError):
    """A loss term produced a non-finite value."""

    def __init__(self, message: str, term: str | None = None):
        super().__init__(message)
        self.term = term


def _sigmoid(z):
    # split branches so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z):
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class Mlp:
    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    hidden_activation: str = "relu"
    output_activation: str = "identity"

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def params(self) -> list[np.ndarray]:
        """Parameter arrays in canonical order (w0, b0, w1, b1, ...)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "Mlp":
        return Mlp(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.hidden_activation,
            self.output_activation,
        )

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for p in self.params():
            h.update(np.ascontiguousarray(p, dtype=np.float64).tobytes())
        return h.hexdigest()

    # -- forward / backward -------------------------------------------------

    def forward(self, x):
        """Batch forward pass. ``x`` is (B, in) or (in,)."""
        out, _ = self.forward_cached(x)
        return out

    def forward_cached(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.layer_sizes[0]:
            raise ShapeError(
                f"input width {x.shape[1]} != layer_sizes[0]={self.layer_sizes[0]}"
            )
        acts = [x]
        pre = []
        a = x
        last = self.n_layers - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            pre.append(z)
            if k < last:
                a = np.maximum(z, 0.0) if self.hidden_activation == "relu" else np.tanh(z)
            elif self.output_activation == "sigmoid_elementwise":
                a = _sigmoid(z)
            elif self.output_activation == "softmax":
                a = _softmax(z)
            else:
                a = z
            acts.append(a)
        out = acts[-1][0] if single else acts[-1]
        return out, (acts, pre, single)

    def backward(self, cache, grad_out):
        """Backprop ``dL/d(output)`` through the network.

        Returns ``(GradientSet, dL/d(input))``.
        """
        acts, pre, single = cache
        g = np.asarray(grad_out, dtype=np.float64)
        if single:
            g = g[None, :]
        out = acts[-1]
        if g.shape != out.shape:
            raise ShapeError(f"grad_out shape {g.shape} != output shape {out.shape}")

        if self.output_activation == "sigmoid_elementwise":
            g = g * out * (1.0 - out)
        elif self.output_activation == "softmax":
            g = out * (g - (g * out).sum(axis=1, keepdims=True))

        gw = [None] * self.n_layers
        gb = [None] * self.n_layers
        for k in range(self.n_layers - 1, -1, -1):
            gw[k] = g.T @ acts[k]
            gb[k] = g.sum(axis=0)
            g = g @ self.weights[k]
            if k > 0:
                if self.hidden_activation == "relu":
                    g = g * (pre[k - 1] > 0)
                else:
                    g = g * (1.0 - acts[k] ** 2)
        grad_in = g[0] if single else g
        return GradientSet(gw, gb), grad_in


@dataclass
class GradientSet:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def __add__(self, other: "GradientSet") -> "GradientSet":
        return GradientSet(
            [a + b for a, b in zip(self.weights, other.weights)],
            [a + b for a, b in zip(self.biases, other.biases)],
        )

    def scaled(self, c: float) -> "GradientSet":
        return GradientSet([c * w for w in self.weights], [c * b for b in self.biases])

    @classmethod
    def zeros_like(cls, m: Mlp) -> "GradientSet":
        return cls([np.zeros_like(w) for w in m.weights], [np.zeros_like(b) for b in m.biases])


@dataclass
class AdamState:
    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step_count: int = 0
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_model(cls, m: Mlp, learning_rate=0.001, beta1=0.9, beta2=0.999, epsilon=1e-8):
        zeros = [np.zeros_like(p) for p in m.params()]
        return cls(zeros, [z.copy() for z in zeros], 0, learning_rate, beta1, beta2, epsilon)


def _check_activations(hidden, output):
    if hidden not in HIDDEN_ACTIVATIONS:
        raise ConfigurationError(f"hidden activation must be one of {HIDDEN_ACTIVATIONS}, got {hidden!r}")
    if output not in OUTPUT_ACTIVATIONS:
        raise ConfigurationError(f"output activation must be one of {OUTPUT_ACTIVATIONS}, got {output!r}")


def mlp_init(
    layer_sizes: Sequence[int],
    hidden_activation: str = "relu",
    output_activation: str = "identity",
    seed: int | np.random.Generator = 0,
) -> Mlp:
    """Build an Mlp with U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2:
        raise ConfigurationError(f"need at least input and output widths, got {sizes}")
    if any(s < 1 for s in sizes):
        raise ConfigurationError(f"layer sizes must be positive, got {sizes}")
    _check_activations(hidden_activation, output_activation)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp(sizes, weights, biases, hidden_activation, output_activation)


def mlp_forward(m: Mlp, x) -> np.ndarray:
    return m.forward(x)


LossSpec = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


def mlp_gradients(m: Mlp, loss_spec: LossSpec, inputs) -> GradientSet:
    """Exact gradients of a scalar batch loss with respect to every parameter.

    ``loss_spec(outputs)`` returns ``(loss, dloss/doutputs)``.
    """
    out, cache = m.forward_cached(inputs)
    loss, grad_out = loss_spec(out)
    if not np.isfinite(loss):
        raise NumericError(f"non-finite loss {loss!r}", term="loss")
    grads, _ = m.backward(cache, grad_out)
    return grads


def adam_step(m: Mlp, g: GradientSet, s: AdamState) -> tuple[Mlp, AdamState]:
    """One bias-corrected Adam update. Returns new (Mlp, AdamState); inputs are not mutated."""
    params = m.params()
    grads = g.arrays()
    if len(grads) != len(params) or any(a.shape != p.shape for a, p in zip(grads, params)):
        raise ShapeError("gradient set is not shape-congruent with the model")
    t = s.step_count + 1
    b1, b2 = s.beta1, s.beta2
    new_params, m1, m2 = [], [], []
    for p, gr, mo, vo in zip(params, grads, s.first_moment, s.second_moment):
        mt = b1 * mo + (1.0 - b1) * gr
        vt = b2 * vo + (1.0 - b2) * gr * gr
        mhat = mt / (1.0 - b1**t)
        vhat = vt / (1.0 - b2**t)
        new_params.append(p - s.learning_rate * mhat / (np.sqrt(vhat) + s.epsilon))
        m1.append(mt)
        m2.append(vt)
    new_m = Mlp(
        list(m.layer_sizes),
        new_params[0::2],
        new_params[1::2],
        m.hidden_activation,
        m.output_activation,
    )
    new_s = AdamState(m1, m2, t, s.learning_rate, s.beta1, s.beta2, s.epsilon)
    return new_m, new_s


# -- checkpoints -----------------------------------------------------------


def mlp_to_dict(m: Mlp) -> dict:
    # float repr round-trips exactly through json
    return {
        "version": CHECKPOINT_VERSION,
        "layer_sizes": list(m.layer_sizes),
        "hidden_activation": m.hidden_activation,
        "output_activation": m.output_activation,
        "weights": [w.ravel().tolist() for w in m.weights],
        "biases": [b.tolist() for b in m.biases],
    }


def mlp_from_dict(d: dict) -> Mlp:
    if d.get("version") != CHECKPOINT_VERSION:
        raise ConfigurationError(f"unsupported checkpoint version {d.get('version')!r}")
    sizes = [int(s) for s in d["layer_sizes"]]
    _check_activations(d["hidden_activation"], d["output_activation"])
    weights = [
        np.asarray(w, dtype=np.float64).reshape(fo, fi)
        for w, fi, fo in zip(d["weights"], sizes[:-1], sizes[1:])
    ]
    biases = [np.asarray(b, dtype=np.float64) for b in d["biases"]]
    return Mlp(sizes, weights, biases, d["hidden_activation"], d["output_activation"])


def save_mlp(m: Mlp, path) -> None:
    with open(path, "w") as fh:
        json.dump(mlp_to_dict(m), fh)


def load_mlp(path) -> Mlp:
    with open(path) as fh:
        return mlp_from_dict(json.load(fh))
