"""Tensors and the recording graph for reverse-mode differentiation.

Everything is float32. A Graph is a tape: executing an op appends a node,
so node k's inputs always precede k (topological order by construction).
Gradients accumulate additively, both across multiple uses of a tensor
inside one backward pass and across repeated backward passes.

Numeric fault checking (NaN/Inf after each op) is enabled when the
environment variable UQSYNTH_DEBUG_NUMERICS is set to a non-empty value,
or per-graph via Graph(debug_numerics=True).
"""

import os

import numpy as np


class ShapeError(ValueError):
    """Raised when op inputs have incompatible shapes."""


class GraphError(RuntimeError):
    """Raised on misuse of the tape (backward before forward, non-scalar loss)."""


class NumericFaultError(FloatingPointError):
    """Raised when debug numeric checks find NaN/Inf in an op output."""


def _debug_default() -> bool:
    return bool(os.environ.get("UQSYNTH_DEBUG_NUMERICS", ""))


class Tensor:
    """A float32 buffer with an optional gradient buffer of the same shape."""

    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.ascontiguousarray(data, dtype=np.float32)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if g.shape != self.data.shape:
            raise ShapeError(
                f"gradient shape {g.shape} does not match tensor shape {self.data.shape}"
            )
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float32, copy=True)
        else:
            self.grad += g

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag}, requires_grad={self.requires_grad})"


class Node:
    """One executed op on the tape."""

    __slots__ = ("op", "inputs", "output", "backward_fn")

    def __init__(self, op, inputs, output, backward_fn):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


class Graph:
    """Tape of executed ops, in execution (= topological) order."""

    def __init__(self, debug_numerics: bool | None = None):
        self.nodes: list[Node] = []
        self.debug_numerics = _debug_default() if debug_numerics is None else debug_numerics

    def record(self, op: str, inputs, output: Tensor, backward_fn) -> Tensor:
        """Append a node. backward_fn(g_out) -> list of (input_tensor, grad) pairs."""
        if self.debug_numerics and not np.all(np.isfinite(output.data)):
            raise NumericFaultError(
                f"non-finite values in output of op {op!r} (node {len(self.nodes)})"
            )
        self.nodes.append(Node(op, tuple(inputs), output, backward_fn))
        return output

    def backward(self, loss: Tensor) -> None:
        backward(self, loss)


def backward(graph: Graph, loss: Tensor) -> None:
    """Populate .grad of every requires_grad tensor with d(loss)/d(tensor).

    The loss must be a scalar produced by an op recorded on this graph.
    """
    if loss.data.size != 1:
        raise GraphError(f"loss must be scalar, got shape {loss.data.shape}")
    if not graph.nodes:
        raise GraphError("backward called before any forward op was recorded")
    produced = {id(n.output) for n in graph.nodes}
    if id(loss) not in produced:
        raise GraphError("loss tensor was not produced by this graph")

    # id -> [tensor, accumulated gradient]; keeps tensors alive during the walk.
    # First contribution is stored by reference; later ones add out-of-place,
    # so arrays handed over by backward_fns are never mutated.
    grads: dict[int, list] = {id(loss): [loss, np.ones_like(loss.data)]}

    for node in reversed(graph.nodes):
        entry = grads.get(id(node.output))
        if entry is None:
            continue
        g_out = entry[1]
        for tensor, g in node.backward_fn(g_out):
            if g is None:
                continue
            slot = grads.get(id(tensor))
            if slot is None:
                grads[id(tensor)] = [tensor, g]
            else:
                slot[1] = slot[1] + g

    for tensor, g in grads.values():
        if tensor.requires_grad:
            tensor.accumulate_grad(np.asarray(g, dtype=np.float32))
