"""
Reverse-Mode Autodiff - a small expression-graph engine over numpy arrays

ARCHITECTURE OVERVIEW:
An expression (DiffExpr) is a DAG of Node objects. Leaves are either named
parameters, whose values are supplied as bindings at evaluation time, or
constants. Interior nodes name a primitive from the PRIMITIVES registry,
which holds the forward rule, the vector-Jacobian product and the shape rule
for every op, in the style of a Wengert list with a function library and a
derivative library.

PROCESSING PIPELINE:
1. Builder functions (add, matmul, softmax, ...) create nodes and check shapes eagerly
2. Tape(root) collects the ancestors of root, ordered by node id
3. Tape.forward(bindings) evaluates every node in that order
4. Tape.backward() walks the order in reverse and accumulates gradients

Node ids come from a process-wide counter, so the evaluation order is the
construction order and repeated evaluations are bitwise reproducible.
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.numeric import vector_ops
from src.utils.errors import DegenerateInputError, LabError, ShapeError, UnboundParameterError

_node_ids = itertools.count()


class Node:
    """One vertex of an expression graph."""

    __slots__ = ("id", "op", "inputs", "attrs", "shape", "name", "value")

    def __init__(self, op, inputs=(), attrs=None, shape=(), name=None, value=None):
        self.id = next(_node_ids)
        self.op = op
        self.inputs = tuple(inputs)
        self.attrs = dict(attrs or {})
        self.shape = tuple(shape)
        self.name = name
        self.value = value

    @property
    def is_parameter(self):
        return self.op == "parameter"

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Node#{self.id}<{self.op}{label} {self.shape}>"


DiffExpr = Node


@dataclass(frozen=True)
class Primitive:
    """Forward rule, vector-Jacobian product and shape rule of one op."""

    forward: Callable
    backward: Callable
    infer_shape: Callable


@dataclass
class GradReport:
    """Gradients per parameter identifier, plus finite-difference agreement when validated."""

    gradients: Dict[str, np.ndarray]
    max_relative_error: Optional[float] = None
    worst_parameter: Optional[str] = None
    worst_index: Optional[Tuple[int, ...]] = None
    finite_differences: Dict[str, np.ndarray] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Leaves

def parameter(name, shape):
    """Create a named parameter leaf; its value is bound at evaluation time."""
    return Node("parameter", shape=shape, name=str(name))


def constant(value):
    """Create a constant leaf."""
    array = vector_ops.as_array(value).copy()
    array.setflags(write=False)
    return Node("constant", shape=array.shape, value=array)


def as_node(value):
    """Wrap plain numbers/arrays as constants; pass nodes through."""
    return value if isinstance(value, Node) else constant(value)


# ---------------------------------------------------------------------------
# Shape rules

def _same_shape(shapes, attrs):
    first = shapes[0]
    for other in shapes[1:]:
        if other != first:
            raise ShapeError(f"Operand shapes differ: {first} vs {other}")
    return first


def _scale_shape(shapes, attrs):
    if shapes[1] != ():
        raise ShapeError(f"scale factor must be a scalar, got shape {shapes[1]}")
    return shapes[0]


def _reduce_shape(shapes, attrs):
    axis = attrs.get("axis")
    if axis is None:
        return ()
    shape = list(shapes[0])
    if not -len(shape) <= axis < len(shape):
        raise ShapeError(f"axis {axis} out of range for shape {shapes[0]}")
    del shape[axis]
    return tuple(shape)


def _matmul_shape(shapes, attrs):
    a, b = shapes
    if len(a) not in (1, 2) or len(b) not in (1, 2):
        raise ShapeError(f"matmul supports vectors and matrices, got {a} and {b}")
    inner_a = a[-1]
    inner_b = b[0]
    if inner_a != inner_b:
        raise ShapeError(f"matmul inner dimensions differ: {a} @ {b}")
    return tuple(a[:-1]) + tuple(b[1:])


def _transpose_shape(shapes, attrs):
    if len(shapes[0]) != 2:
        raise ShapeError(f"transpose expects a matrix, got {shapes[0]}")
    return shapes[0][::-1]


def _stack_shape(shapes, attrs):
    row = _same_shape(shapes, attrs)
    if len(row) != 1:
        raise ShapeError(f"stack expects vectors, got {row}")
    return (len(shapes), row[0])


def _diagonal_shape(shapes, attrs):
    shape = shapes[0]
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ShapeError(f"diagonal expects a square matrix, got {shape}")
    return (shape[0],)


def _axis_shape(shapes, attrs):
    shape = shapes[0]
    axis = attrs.get("axis", -1)
    if not shape or not -len(shape) <= axis < len(shape):
        raise ShapeError(f"axis {axis} out of range for shape {shape}")
    if shape[axis] == 0:
        raise DegenerateInputError("Reduction axis is empty")
    return shape


def _cosine_shape(shapes, attrs):
    a, b = shapes
    if len(a) != 1 or a != b:
        raise ShapeError(f"cosine expects equal-length vectors, got {a} and {b}")
    return ()


# ---------------------------------------------------------------------------
# Forward rules and vector-Jacobian products

def _log_forward(values, attrs):
    (x,) = values
    if np.any(x <= 0.0):
        raise DegenerateInputError("log of a non-positive value")
    return np.log(x)


def _reciprocal_forward(values, attrs):
    (x,) = values
    if np.any(x <= 0.0):
        raise DegenerateInputError("reciprocal is defined here for positive values only")
    return 1.0 / x


def _sum_backward(g, out, values, attrs):
    (x,) = values
    axis = attrs.get("axis")
    if axis is not None:
        g = np.expand_dims(g, axis)
    return (np.broadcast_to(g, x.shape).copy(),)


def _mean_backward(g, out, values, attrs):
    (x,) = values
    axis = attrs.get("axis")
    count = x.size if axis is None else x.shape[axis]
    (grad,) = _sum_backward(g, out, values, attrs)
    return (grad / count,)


def _matmul_backward(g, out, values, attrs):
    a, b = values
    if a.ndim == 2 and b.ndim == 2:
        return g @ b.T, a.T @ g
    if a.ndim == 1 and b.ndim == 2:
        return b @ g, np.outer(a, g)
    if a.ndim == 2 and b.ndim == 1:
        return np.outer(g, b), a.T @ g
    return g * b, g * a


def _softmax_backward(g, out, values, attrs):
    axis = attrs.get("axis", -1)
    return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)


def _log_softmax_backward(g, out, values, attrs):
    axis = attrs.get("axis", -1)
    return (g - np.exp(out) * np.sum(g, axis=axis, keepdims=True),)


def _l2_normalize_backward(g, out, values, attrs):
    (x,) = values
    axis = attrs.get("axis", -1)
    norm = vector_ops.l2_norm(x, axis=axis, keepdims=True)
    return ((g - out * np.sum(g * out, axis=axis, keepdims=True)) / norm,)


def _cosine_backward(g, out, values, attrs):
    u, v = values
    nu = vector_ops.l2_norm(u)
    nv = vector_ops.l2_norm(v)
    du = g * (v / (nu * nv) - out * u / (nu * nu))
    dv = g * (u / (nu * nv) - out * v / (nv * nv))
    return du, dv


PRIMITIVES = {
    "add": Primitive(
        forward=lambda values, attrs: sum(values[1:], values[0]),
        backward=lambda g, out, values, attrs: tuple(g for _ in values),
        infer_shape=_same_shape,
    ),
    "negate": Primitive(
        forward=lambda values, attrs: -values[0],
        backward=lambda g, out, values, attrs: (-g,),
        infer_shape=_same_shape,
    ),
    "scale": Primitive(
        forward=lambda values, attrs: values[0] * values[1],
        backward=lambda g, out, values, attrs: (g * values[1], np.sum(g * values[0])),
        infer_shape=_scale_shape,
    ),
    "exp": Primitive(
        forward=lambda values, attrs: np.exp(values[0]),
        backward=lambda g, out, values, attrs: (g * out,),
        infer_shape=_same_shape,
    ),
    "log": Primitive(
        forward=_log_forward,
        backward=lambda g, out, values, attrs: (g / values[0],),
        infer_shape=_same_shape,
    ),
    "reciprocal": Primitive(
        forward=_reciprocal_forward,
        backward=lambda g, out, values, attrs: (-g * out * out,),
        infer_shape=_same_shape,
    ),
    "sum": Primitive(
        forward=lambda values, attrs: np.sum(values[0], axis=attrs.get("axis")),
        backward=_sum_backward,
        infer_shape=_reduce_shape,
    ),
    "mean": Primitive(
        forward=lambda values, attrs: np.mean(values[0], axis=attrs.get("axis")),
        backward=_mean_backward,
        infer_shape=_reduce_shape,
    ),
    "matmul": Primitive(
        forward=lambda values, attrs: values[0] @ values[1],
        backward=_matmul_backward,
        infer_shape=_matmul_shape,
    ),
    "transpose": Primitive(
        forward=lambda values, attrs: values[0].T.copy(),
        backward=lambda g, out, values, attrs: (g.T.copy(),),
        infer_shape=_transpose_shape,
    ),
    "stack": Primitive(
        forward=lambda values, attrs: np.stack(values),
        backward=lambda g, out, values, attrs: tuple(g[i].copy() for i in range(len(values))),
        infer_shape=_stack_shape,
    ),
    "diagonal": Primitive(
        forward=lambda values, attrs: np.diagonal(values[0]).copy(),
        backward=lambda g, out, values, attrs: (np.diag(g),),
        infer_shape=_diagonal_shape,
    ),
    "softmax": Primitive(
        forward=lambda values, attrs: vector_ops.softmax(values[0], axis=attrs.get("axis", -1)),
        backward=_softmax_backward,
        infer_shape=_axis_shape,
    ),
    "log_softmax": Primitive(
        forward=lambda values, attrs: vector_ops.log_softmax(values[0], axis=attrs.get("axis", -1)),
        backward=_log_softmax_backward,
        infer_shape=_axis_shape,
    ),
    "l2_normalize": Primitive(
        forward=lambda values, attrs: vector_ops.l2_normalize(values[0], axis=attrs.get("axis", -1)),
        backward=_l2_normalize_backward,
        infer_shape=_axis_shape,
    ),
    "cosine": Primitive(
        forward=lambda values, attrs: np.float64(vector_ops.cosine_similarity(values[0], values[1])),
        backward=_cosine_backward,
        infer_shape=_cosine_shape,
    ),
}


def _apply(op, inputs, **attrs):
    nodes = [as_node(item) for item in inputs]
    if not nodes:
        raise ShapeError(f"{op} needs at least one operand")
    shape = PRIMITIVES[op].infer_shape([node.shape for node in nodes], attrs)
    return Node(op, inputs=nodes, attrs=attrs, shape=shape)


# ---------------------------------------------------------------------------
# Builders

def add(*terms):
    """Elementwise sum of equally shaped operands."""
    return _apply("add", terms)


def negate(x):
    return _apply("negate", [x])


def scale(x, factor):
    """Multiply x by a scalar factor (node or number)."""
    return _apply("scale", [x, factor])


def exp(x):
    return _apply("exp", [x])


def log(x):
    return _apply("log", [x])


def reciprocal(x):
    return _apply("reciprocal", [x])


def reduce_sum(x, axis=None):
    return _apply("sum", [x], axis=axis)


def reduce_mean(x, axis=None):
    return _apply("mean", [x], axis=axis)


def matmul(a, b):
    return _apply("matmul", [a, b])


def transpose(x):
    return _apply("transpose", [x])


def stack(vectors):
    """Stack equal-length vectors as the rows of a matrix."""
    return _apply("stack", list(vectors))


def diagonal(x):
    return _apply("diagonal", [x])


def softmax(x, axis=-1):
    return _apply("softmax", [x], axis=axis)


def log_softmax(x, axis=-1):
    return _apply("log_softmax", [x], axis=axis)


def l2_normalize(x, axis=-1):
    return _apply("l2_normalize", [x], axis=axis)


def cosine(u, v):
    return _apply("cosine", [u, v])


def cosine_matrix(rows_a, rows_b):
    """Pairwise cosine similarities between the rows of two matrices."""
    return matmul(l2_normalize(rows_a, axis=1), transpose(l2_normalize(rows_b, axis=1)))


# ---------------------------------------------------------------------------
# Evaluation

def _topological_order(root):
    seen = {}
    pending = [root]
    while pending:
        node = pending.pop()
        if node.id in seen:
            continue
        seen[node.id] = node
        pending.extend(node.inputs)
    # Inputs are always constructed before their consumers
    return [seen[node_id] for node_id in sorted(seen)]


class Tape:
    """
    Forward/backward evaluator for one expression.

    A tape can be re-run with new bindings; finite-difference checks rely on this.
    """

    def __init__(self, root):
        self.root = as_node(root)
        self.order = _topological_order(self.root)
        self.parameters = [node for node in self.order if node.is_parameter]
        names = [node.name for node in self.parameters]
        if len(set(names)) != len(names):
            raise LabError(f"Duplicate parameter identifiers in expression: {sorted(names)}")
        self.values = {}

    def parameter_names(self):
        return [node.name for node in self.parameters]

    def parameter_shapes(self):
        return {node.name: node.shape for node in self.parameters}

    def forward(self, bindings=None):
        """
        Evaluate every node.

        Args:
            bindings (dict): Parameter identifier -> array

        Returns:
            float | np.ndarray: Value of the root node

        Raises:
            UnboundParameterError: If a parameter leaf has no binding
            ShapeError: If a binding has the wrong shape
        """
        bindings = bindings or {}
        values = {}
        for node in self.order:
            if node.op == "constant":
                values[node.id] = node.value
            elif node.is_parameter:
                if node.name not in bindings:
                    raise UnboundParameterError(f"No value bound for parameter '{node.name}'")
                bound = vector_ops.as_array(bindings[node.name])
                if bound.shape != node.shape:
                    raise ShapeError(
                        f"Parameter '{node.name}' expects shape {node.shape}, got {bound.shape}"
                    )
                values[node.id] = bound
            else:
                inputs = [values[item.id] for item in node.inputs]
                values[node.id] = np.asarray(PRIMITIVES[node.op].forward(inputs, node.attrs), dtype=np.float64)
        self.values = values
        return self.value_of(self.root)

    def value_of(self, node):
        """Forward value of any node on the tape (float for scalars)."""
        value = self.values[node.id]
        return float(value) if value.shape == () else value

    def backward(self):
        """
        Reverse-mode sweep from the (scalar) root.

        Returns:
            dict: Parameter identifier -> gradient array
        """
        if self.root.shape != ():
            raise ShapeError(f"Gradient root must be scalar, got shape {self.root.shape}")
        if not self.values:
            raise LabError("Tape.backward called before Tape.forward")
        grads = {self.root.id: np.ones((), dtype=np.float64)}
        for node in reversed(self.order):
            grad = grads.get(node.id)
            if grad is None or not node.inputs:
                continue
            inputs = [self.values[item.id] for item in node.inputs]
            input_grads = PRIMITIVES[node.op].backward(grad, self.values[node.id], inputs, node.attrs)
            for item, item_grad in zip(node.inputs, input_grads):
                item_grad = np.asarray(item_grad, dtype=np.float64)
                if item.id in grads:
                    grads[item.id] = grads[item.id] + item_grad
                else:
                    grads[item.id] = item_grad
        return {
            node.name: np.array(grads.get(node.id, np.zeros(node.shape)), dtype=np.float64).reshape(node.shape)
            for node in self.parameters
        }


def forward(expr, bindings=None):
    """Evaluate an expression without gradients."""
    return Tape(expr).forward(bindings)


def evaluate_with_gradients(expr, bindings=None):
    """
    Evaluate a scalar expression and its exact reverse-mode gradients.

    Args:
        expr (Node): Scalar-valued expression
        bindings (dict): Parameter identifier -> array for every parameter leaf

    Returns:
        tuple: (value, GradReport)
    """
    tape = Tape(expr)
    if tape.root.shape != ():
        raise ShapeError(f"Expression root must be scalar, got shape {tape.root.shape}")
    value = tape.forward(bindings)
    return value, GradReport(gradients=tape.backward())
