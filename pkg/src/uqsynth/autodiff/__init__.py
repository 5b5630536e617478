from .tensor import Graph, GraphError, NumericFaultError, ShapeError, Tensor, backward
from . import functional
from .adam import Adam
from .rng import rng_stream

__all__ = [
    "Tensor",
    "Graph",
    "backward",
    "functional",
    "Adam",
    "rng_stream",
    "ShapeError",
    "GraphError",
    "NumericFaultError",
]
