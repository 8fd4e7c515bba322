from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from domain.errors import ShapeError
from domain.models import FloatArray
from infrastructure.autodiff import Node, Tape
from infrastructure.common.registry import NameResolver


class Activation(str, Enum):
    TANH = "tanh"
    RELU = "relu"


ACTIVATIONS: NameResolver[Activation] = NameResolver(
    {"tanh": Activation.TANH, "relu": Activation.RELU},
    default_key="tanh",
    error_message="Unsupported activation: {value} (choices: {choices})",
)


@dataclass(frozen=True, eq=False)
class Mlp:
    """Feed-forward network; hidden layers share one activation, the output layer is linear."""

    layer_dims: tuple[int, ...]
    weights: tuple[FloatArray, ...]
    biases: tuple[FloatArray, ...]
    activation: Activation = Activation.TANH

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise ShapeError("mlp", [(len(self.layer_dims),), (len(self.weights),), (len(self.biases),)])
        for index, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_dims[index + 1], self.layer_dims[index])
            if w.shape != expected or b.shape != (expected[0],):
                raise ShapeError(f"mlp layer {index}", [w.shape, b.shape], f"expected {expected}")

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[FloatArray]:
        """Parameters in layer order W0, b0, W1, b1, ..."""
        params: list[FloatArray] = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def with_parameters(self, params: Sequence[FloatArray]) -> Mlp:
        if len(params) != 2 * self.num_layers:
            raise ShapeError("mlp.with_parameters", [(len(params),), (2 * self.num_layers,)])
        return Mlp(
            layer_dims=self.layer_dims,
            weights=tuple(np.array(p, dtype=np.float64) for p in params[0::2]),
            biases=tuple(np.array(p, dtype=np.float64) for p in params[1::2]),
            activation=self.activation,
        )

    @property
    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def flat_parameters(self) -> FloatArray:
        return np.concatenate([p.reshape(-1) for p in self.parameters()])

    def with_flat_parameters(self, flat: FloatArray) -> Mlp:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.num_parameters,):
            raise ShapeError("mlp.with_flat_parameters", [flat.shape, (self.num_parameters,)])
        params: list[FloatArray] = []
        offset = 0
        for p in self.parameters():
            params.append(flat[offset : offset + p.size].reshape(p.shape).copy())
            offset += p.size
        return self.with_parameters(params)

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(p))) for p in self.parameters())


@dataclass(frozen=True)
class MlpGraph:
    """Nodes of one network evaluation recorded on a tape."""

    input: Node
    output: Node
    parameters: tuple[Node, ...]
    pre_activations: tuple[Node, ...]
    hidden: tuple[Node, ...]


def mlp_new(
    layer_dims: Sequence[int],
    activation: Activation | str = Activation.TANH,
    rng_seed: int | np.random.Generator = 0,
) -> Mlp:
    """Xavier-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases."""
    dims = tuple(int(d) for d in layer_dims)
    if len(dims) < 2 or any(d <= 0 for d in dims):
        raise ValueError(f"layer_dims needs at least two positive entries, got {list(layer_dims)}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    act = activation if isinstance(activation, Activation) else ACTIVATIONS.resolve(activation)
    return Mlp(layer_dims=dims, weights=tuple(weights), biases=tuple(biases), activation=act)


def _check_input(mlp: Mlp, X: FloatArray, op: str) -> FloatArray:
    array = np.asarray(X, dtype=np.float64)
    if array.ndim != 2 or array.shape[1] != mlp.input_dim:
        raise ShapeError(op, [array.shape], f"expected (batch, {mlp.input_dim})")
    return array


def build_graph(tape: Tape, mlp: Mlp, x: Node) -> MlpGraph:
    """Record a forward pass of `mlp` on `tape`, with parameters as input nodes."""
    params = tuple(tape.input(p) for p in mlp.parameters())
    pre: list[Node] = []
    hidden: list[Node] = []
    h = x
    for layer in range(mlp.num_layers):
        a = tape.affine(h, params[2 * layer], params[2 * layer + 1])
        if layer == mlp.num_layers - 1:
            h = a
            break
        pre.append(a)
        h = tape.tanh(a) if mlp.activation is Activation.TANH else tape.relu(a)
        hidden.append(h)
    return MlpGraph(input=x, output=h, parameters=params, pre_activations=tuple(pre), hidden=tuple(hidden))


def jacobian_trace(tape: Tape, mlp: Mlp, graph: MlpGraph) -> Node:
    """Scalar node holding sum_i tr(d f / d x)(x_i) over the batch.

    Each input direction e_k is pushed forward through the recorded layers as a
    tangent, so the result is an ordinary first-order graph: one reverse sweep
    differentiates it with respect to both the parameters and the inputs.
    """
    if mlp.input_dim != mlp.output_dim:
        raise ShapeError("jacobian_trace", [(mlp.input_dim,), (mlp.output_dim,)], "network must be square")
    batch = graph.input.value.shape[0]
    total: Node | None = None
    for k in range(mlp.input_dim):
        direction = np.zeros((batch, mlp.input_dim))
        direction[:, k] = 1.0
        basis = tape.input(direction)
        tangent = basis
        for layer in range(mlp.num_layers):
            tangent = tape.linear(tangent, graph.parameters[2 * layer])
            if layer == mlp.num_layers - 1:
                break
            if mlp.activation is Activation.TANH:
                h = graph.hidden[layer]
                # (1 - h^2) * u
                damped = tape.mul(tape.square(h), tangent)
                tangent = tape.add(tangent, tape.scale(damped, -1.0))
            else:
                tangent = tape.mul(tape.step(graph.pre_activations[layer]), tangent)
        diagonal = tape.sum(tape.mul(tangent, basis))
        total = diagonal if total is None else tape.add(total, diagonal)
    assert total is not None
    return total


def mlp_forward(mlp: Mlp, X: FloatArray) -> FloatArray:
    """Deterministic forward pass on a (batch, in_dim) matrix."""
    array = _check_input(mlp, X, "mlp_forward")
    if not np.all(np.isfinite(array)):
        raise ValueError("mlp_forward: input contains non-finite values")
    h = array
    for layer, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        h = h @ w.T + b
        if layer < mlp.num_layers - 1:
            h = np.tanh(h) if mlp.activation is Activation.TANH else np.maximum(h, 0.0)
    return h


def mlp_backward(
    mlp: Mlp, X: FloatArray, output_seed: FloatArray
) -> tuple[list[FloatArray], FloatArray]:
    """Gradients of <seed, mlp(X)> with respect to the parameters and to X."""
    array = _check_input(mlp, X, "mlp_backward")
    seed = np.asarray(output_seed, dtype=np.float64)
    if seed.shape != (array.shape[0], mlp.output_dim):
        raise ShapeError("mlp_backward", [seed.shape, (array.shape[0], mlp.output_dim)], "seed must match output")
    tape = Tape()
    graph = build_graph(tape, mlp, tape.input(array))
    grads = tape.backward(graph.output, seed)
    param_grads = [grads.get(node.id, np.zeros_like(node.value)) for node in graph.parameters]
    input_grads = grads.get(graph.input.id, np.zeros_like(array))
    return param_grads, input_grads


def input_jacobian_trace(mlp: Mlp, X: FloatArray) -> FloatArray:
    """tr(d f / d x) at each row of X, from one backward pass per output coordinate."""
    array = _check_input(mlp, X, "input_jacobian_trace")
    if mlp.input_dim != mlp.output_dim:
        raise ShapeError("input_jacobian_trace", [(mlp.input_dim,), (mlp.output_dim,)], "network must be square")
    tape = Tape()
    graph = build_graph(tape, mlp, tape.input(array))
    traces = np.zeros(array.shape[0])
    for k in range(mlp.output_dim):
        seed = np.zeros((array.shape[0], mlp.output_dim))
        seed[:, k] = 1.0
        input_grads = tape.backward(graph.output, seed)[graph.input.id]
        traces += input_grads[:, k]
    return traces


def clip_weights(mlp: Mlp, c: float) -> Mlp:
    """Clamp every weight and bias entry into [-c, c]."""
    if c <= 0:
        raise ValueError(f"clip bound must be positive, got {c}")
    return mlp.with_parameters([np.clip(p, -c, c) for p in mlp.parameters()])


def lipschitz_bound(mlp: Mlp) -> float:
    """Product of layer spectral norms; tanh and relu are 1-Lipschitz."""
    bound = 1.0
    for w in mlp.weights:
        bound *= float(np.linalg.norm(w, ord=2))
    return bound


__all__ = [
    "Activation",
    "ACTIVATIONS",
    "Mlp",
    "MlpGraph",
    "mlp_new",
    "build_graph",
    "jacobian_trace",
    "mlp_forward",
    "mlp_backward",
    "input_jacobian_trace",
    "clip_weights",
    "lipschitz_bound",
]
