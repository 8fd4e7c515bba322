"""Reverse-mode differentiation over dense float64 arrays.

A `Tape` records nodes in creation order, so parents always precede children and
the reverse sweep in `backward` is a plain walk over node ids from last to first.
Batched values are (batch, dim) matrices; parameter gradients accumulate over the
batch dimension.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

import numpy as np

from domain.errors import ShapeError
from domain.models import FloatArray


class Op(str, Enum):
    INPUT = "input"
    AFFINE = "affine"
    LINEAR = "linear"
    TANH = "tanh"
    RELU = "relu"
    STEP = "step"
    SQUARE = "elementwise-square"
    MUL = "mul"
    SUM = "sum"
    SCALE = "scale"
    ADD = "add"


@dataclass(frozen=True, eq=False)
class Node:
    id: int
    op: Op
    parents: tuple[int, ...]
    value: FloatArray
    attrs: Mapping[str, Any] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.value.shape)


ForwardRule = Callable[[Sequence[FloatArray], Mapping[str, Any]], FloatArray]
# (upstream gradient, node, parent values) -> one gradient per parent (None: no flow)
BackwardRule = Callable[[FloatArray, Node, Sequence[FloatArray]], Sequence[FloatArray | None]]


def _check(op: Op, condition: bool, shapes: Sequence[tuple[int, ...]], detail: str) -> None:
    if not condition:
        raise ShapeError(op.value, shapes, detail)


def _forward_affine(values: Sequence[FloatArray], attrs: Mapping[str, Any]) -> FloatArray:
    x, w, b = values
    shapes = [x.shape, w.shape, b.shape]
    _check(Op.AFFINE, x.ndim == 2 and w.ndim == 2 and b.ndim == 1, shapes, "x: batch x in, W: out x in, b: out")
    _check(Op.AFFINE, x.shape[1] == w.shape[1] and b.shape[0] == w.shape[0], shapes, "inner dimensions differ")
    return x @ w.T + b


def _forward_linear(values: Sequence[FloatArray], attrs: Mapping[str, Any]) -> FloatArray:
    x, w = values
    shapes = [x.shape, w.shape]
    _check(Op.LINEAR, x.ndim == 2 and w.ndim == 2 and x.shape[1] == w.shape[1], shapes, "x: batch x in, W: out x in")
    return x @ w.T


def _forward_same_shape(op: Op) -> Callable[[Sequence[FloatArray], Mapping[str, Any]], None]:
    def check(values: Sequence[FloatArray], attrs: Mapping[str, Any]) -> None:
        a, b = values
        _check(op, a.shape == b.shape, [a.shape, b.shape], "operands must have equal shapes")

    return check


def _forward_mul(values: Sequence[FloatArray], attrs: Mapping[str, Any]) -> FloatArray:
    _forward_same_shape(Op.MUL)(values, attrs)
    return values[0] * values[1]


def _forward_add(values: Sequence[FloatArray], attrs: Mapping[str, Any]) -> FloatArray:
    _forward_same_shape(Op.ADD)(values, attrs)
    return values[0] + values[1]


_FORWARD: dict[Op, ForwardRule] = {
    Op.AFFINE: _forward_affine,
    Op.LINEAR: _forward_linear,
    Op.TANH: lambda values, attrs: np.tanh(values[0]),
    Op.RELU: lambda values, attrs: np.maximum(values[0], 0.0),
    Op.STEP: lambda values, attrs: (values[0] > 0.0).astype(np.float64),
    Op.SQUARE: lambda values, attrs: values[0] * values[0],
    Op.MUL: _forward_mul,
    Op.SUM: lambda values, attrs: np.asarray(values[0].sum(), dtype=np.float64),
    Op.SCALE: lambda values, attrs: attrs["factor"] * values[0],
    Op.ADD: _forward_add,
}

_ARITY: dict[Op, int] = {
    Op.AFFINE: 3,
    Op.LINEAR: 2,
    Op.TANH: 1,
    Op.RELU: 1,
    Op.STEP: 1,
    Op.SQUARE: 1,
    Op.MUL: 2,
    Op.SUM: 1,
    Op.SCALE: 1,
    Op.ADD: 2,
}


def _backward_affine(g: FloatArray, node: Node, values: Sequence[FloatArray]) -> Sequence[FloatArray | None]:
    x, w, _ = values
    return g @ w, g.T @ x, g.sum(axis=0)


def _backward_linear(g: FloatArray, node: Node, values: Sequence[FloatArray]) -> Sequence[FloatArray | None]:
    x, w = values
    return g @ w, g.T @ x


_BACKWARD: dict[Op, BackwardRule] = {
    Op.AFFINE: _backward_affine,
    Op.LINEAR: _backward_linear,
    Op.TANH: lambda g, node, values: (g * (1.0 - node.value * node.value),),
    Op.RELU: lambda g, node, values: (g * (values[0] > 0.0),),
    # piecewise constant: no gradient flows through the mask
    Op.STEP: lambda g, node, values: (None,),
    Op.SQUARE: lambda g, node, values: (2.0 * values[0] * g,),
    Op.MUL: lambda g, node, values: (g * values[1], g * values[0]),
    Op.SUM: lambda g, node, values: (np.full_like(values[0], float(g)),),
    Op.SCALE: lambda g, node, values: (node.attrs["factor"] * g,),
    Op.ADD: lambda g, node, values: (g, g),
}


class Tape:
    """Single-owner record of a computation; not shared between threads while in use."""

    def __init__(self) -> None:
        self.nodes: list[Node] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def forward(self, op: Op, parents: Sequence[Node], **attrs: Any) -> Node:
        """Append a node computing `op` on the values of `parents`."""
        if op is Op.INPUT:
            raise ValueError("use Tape.input to create input nodes")
        for parent in parents:
            if parent.id >= len(self.nodes) or self.nodes[parent.id] is not parent:
                raise ValueError(f"{op.value}: parent node {parent.id} belongs to another tape")
        if len(parents) != _ARITY[op]:
            raise ValueError(f"{op.value} expects {_ARITY[op]} parents, got {len(parents)}")
        value = _FORWARD[op]([parent.value for parent in parents], attrs)
        node = Node(
            id=len(self.nodes),
            op=op,
            parents=tuple(parent.id for parent in parents),
            value=value,
            attrs=dict(attrs),
        )
        self.nodes.append(node)
        return node

    def input(self, value: FloatArray | float) -> Node:
        array = np.array(value, dtype=np.float64)
        node = Node(id=len(self.nodes), op=Op.INPUT, parents=(), value=array)
        self.nodes.append(node)
        return node

    def affine(self, x: Node, w: Node, b: Node) -> Node:
        return self.forward(Op.AFFINE, (x, w, b))

    def linear(self, x: Node, w: Node) -> Node:
        return self.forward(Op.LINEAR, (x, w))

    def tanh(self, x: Node) -> Node:
        return self.forward(Op.TANH, (x,))

    def relu(self, x: Node) -> Node:
        return self.forward(Op.RELU, (x,))

    def step(self, x: Node) -> Node:
        return self.forward(Op.STEP, (x,))

    def square(self, x: Node) -> Node:
        return self.forward(Op.SQUARE, (x,))

    def mul(self, a: Node, b: Node) -> Node:
        return self.forward(Op.MUL, (a, b))

    def sum(self, x: Node) -> Node:
        return self.forward(Op.SUM, (x,))

    def scale(self, x: Node, factor: float) -> Node:
        return self.forward(Op.SCALE, (x,), factor=float(factor))

    def add(self, a: Node, b: Node) -> Node:
        return self.forward(Op.ADD, (a, b))

    def backward(self, seed: Node, seed_value: FloatArray | float | None = None) -> dict[int, FloatArray]:
        """Gradients of `seed` (contracted with `seed_value`) for every ancestor of `seed`."""
        if seed_value is None:
            if seed.value.size != 1:
                raise ShapeError("backward", [seed.shape], "non-scalar seed needs a seed_value")
            upstream = np.ones_like(seed.value)
        else:
            upstream = np.array(seed_value, dtype=np.float64)
            if upstream.shape != seed.value.shape:
                raise ShapeError("backward", [seed.shape, upstream.shape], "seed_value must match the seed node")

        grads: dict[int, FloatArray] = {seed.id: upstream}
        for node_id in range(seed.id, -1, -1):
            g = grads.get(node_id)
            node = self.nodes[node_id]
            if g is None or node.op is Op.INPUT:
                continue
            parent_values = [self.nodes[parent].value for parent in node.parents]
            contributions = _BACKWARD[node.op](g, node, parent_values)
            for parent, contribution in zip(node.parents, contributions):
                if contribution is None:
                    continue
                if parent in grads:
                    grads[parent] = grads[parent] + contribution
                else:
                    grads[parent] = np.asarray(contribution, dtype=np.float64)
        return grads


__all__ = ["Op", "Node", "Tape"]
