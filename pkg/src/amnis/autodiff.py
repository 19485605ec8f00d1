"""Dense 2-d float64 tensors with a define-by-run gradient tape and Adam.

Everything is a matrix: scalars are stored as 1x1, row vectors as 1xN.
Ops compute with numpy and record themselves on the innermost active
``Graph`` whenever one of their inputs carries ``requires_grad``; without
an active graph the same functions run in plain inference mode and return
untracked tensors.

The tape is rebuilt on every training step.  There is no broadcasting
except the explicit row-bias case (``add_row``); every other shape
mismatch is an error, on purpose.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, NumericError, ShapeError, TrainingError

_GRAPH_STACK: list["Graph"] = []


def _as_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, arr.size)
    elif arr.ndim != 2:
        raise ShapeError(f"tensors are 2-d matrices, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


class Tensor:
    """A 2-d float64 matrix, optionally tracked for gradients.

    Tensors with ``requires_grad=False`` are treated as immutable constants
    and are safe to share across threads.
    """

    __slots__ = ("data", "requires_grad")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_matrix(data)
        self.requires_grad = bool(requires_grad)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a scalar tensor, got shape {self.shape}")
        return float(self.data[0, 0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class _Node:
    __slots__ = ("op", "inputs", "output", "grad_fn")

    def __init__(self, op, inputs, output, grad_fn):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.grad_fn = grad_fn


class Graph:
    """Single-use op tape plus the named parameters being optimized.

    Node order is execution order, which is a valid topological order by
    construction.  A graph is single-writer: build it, run ``backward``,
    throw it away.
    """

    def __init__(self):
        self.nodes: list[_Node] = []
        self.parameters: dict[str, Tensor] = {}

    def watch(self, params: dict[str, Tensor]) -> None:
        for name, p in params.items():
            if not isinstance(p, Tensor) or not p.requires_grad:
                raise ContractError(f"watched parameter '{name}' must be a Tensor with requires_grad")
            self.parameters[name] = p

    def __enter__(self) -> "Graph":
        _GRAPH_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        _GRAPH_STACK.pop()
        return False


def _emit(op: str, inputs: tuple[Tensor, ...], out_data: np.ndarray, grad_fn) -> Tensor:
    graph = _GRAPH_STACK[-1] if _GRAPH_STACK else None
    track = graph is not None and any(t.requires_grad for t in inputs)
    out = Tensor(out_data, requires_grad=track)
    if track:
        graph.nodes.append(_Node(op, inputs, out, grad_fn))
    return out


def _check_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not match")


# ---------------------------------------------------------------------------
# ops


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.shape} x {b.shape}")
    ad, bd = a.data, b.data

    def grad_fn(g, needs):
        return (g @ bd.T if needs[0] else None,
                ad.T @ g if needs[1] else None)

    return _emit("matmul", (a, b), ad @ bd, grad_fn)


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("add", a, b)

    def grad_fn(g, needs):
        return (g, g)

    return _emit("add", (a, b), a.data + b.data, grad_fn)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("mul", a, b)
    ad, bd = a.data, b.data

    def grad_fn(g, needs):
        return (g * bd if needs[0] else None,
                g * ad if needs[1] else None)

    return _emit("mul", (a, b), ad * bd, grad_fn)


def add_row(x: Tensor, row: Tensor) -> Tensor:
    # the one permitted broadcast: (m, n) + (1, n) bias row
    if row.shape[0] != 1 or row.shape[1] != x.shape[1]:
        raise ShapeError(f"add_row: bias {row.shape} does not broadcast over {x.shape}")

    def grad_fn(g, needs):
        return (g, g.sum(axis=0, keepdims=True) if needs[1] else None)

    return _emit("add_row", (x, row), x.data + row.data, grad_fn)


def neg(x: Tensor) -> Tensor:
    def grad_fn(g, needs):
        return (-g,)

    return _emit("neg", (x,), -x.data, grad_fn)


def exp(x: Tensor) -> Tensor:
    out_data = np.exp(x.data)

    def grad_fn(g, needs):
        return (g * out_data,)

    return _emit("exp", (x,), out_data, grad_fn)


def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0.0):
        raise NumericError("log: input has non-positive entries")
    xd = x.data

    def grad_fn(g, needs):
        return (g / xd,)

    return _emit("log", (x,), np.log(xd), grad_fn)


def tanh(x: Tensor) -> Tensor:
    out_data = np.tanh(x.data)

    def grad_fn(g, needs):
        return (g * (1.0 - out_data * out_data),)

    return _emit("tanh", (x,), out_data, grad_fn)


def softplus(x: Tensor) -> Tensor:
    xd = x.data
    out_data = np.logaddexp(0.0, xd)

    def grad_fn(g, needs):
        # sigmoid via tanh keeps large |x| stable
        return (g * (0.5 * (1.0 + np.tanh(0.5 * xd))),)

    return _emit("softplus", (x,), out_data, grad_fn)


def atan(x: Tensor) -> Tensor:
    xd = x.data

    def grad_fn(g, needs):
        return (g / (1.0 + xd * xd),)

    return _emit("atan", (x,), np.arctan(xd), grad_fn)


def square(x: Tensor) -> Tensor:
    xd = x.data

    def grad_fn(g, needs):
        return (2.0 * xd * g,)

    return _emit("square", (x,), xd * xd, grad_fn)


def _reduce(op: str, x: Tensor, axis, scale_div: float) -> Tensor:
    m, n = x.shape
    if axis is None:
        out_data = np.array([[x.data.sum()]])
    elif axis == 0:
        out_data = x.data.sum(axis=0, keepdims=True)
    elif axis == 1:
        out_data = x.data.sum(axis=1, keepdims=True)
    else:
        raise ContractError(f"{op}: axis must be None, 0 or 1, got {axis!r}")
    out_data = out_data / scale_div

    def grad_fn(g, needs):
        if axis is None:
            return (np.full((m, n), g[0, 0] / scale_div),)
        if axis == 0:
            return (np.repeat(g / scale_div, m, axis=0),)
        return (np.repeat(g / scale_div, n, axis=1),)

    return _emit(op, (x,), out_data, grad_fn)


def sum(x: Tensor, axis: int | None = None) -> Tensor:  # noqa: A001 - mirrors numpy naming
    return _reduce("sum", x, axis, 1.0)


def mean(x: Tensor, axis: int | None = None) -> Tensor:
    m, n = x.shape
    if axis is None:
        div = float(m * n)
    elif axis == 0:
        div = float(m)
    else:
        div = float(n)
    return _reduce("mean", x, axis, div)


def concat(*tensors: Tensor) -> Tensor:
    if not tensors:
        raise ContractError("concat: needs at least one tensor")
    rows = tensors[0].shape[0]
    for t in tensors:
        if t.shape[0] != rows:
            raise ShapeError(f"concat: row counts differ, {[t.shape for t in tensors]}")
    widths = [t.shape[1] for t in tensors]
    edges = np.cumsum([0] + widths)

    def grad_fn(g, needs):
        return tuple(g[:, edges[i]:edges[i + 1]] if needs[i] else None
                     for i in range(len(tensors)))

    out_data = np.concatenate([t.data for t in tensors], axis=1)
    return _emit("concat", tensors, out_data, grad_fn)


def split(x: Tensor, sizes: tuple[int, ...]) -> tuple[Tensor, ...]:
    m, n = x.shape
    if any(s <= 0 for s in sizes) or int(np.sum(sizes)) != n:
        raise ShapeError(f"split: sizes {tuple(sizes)} do not partition {n} columns")
    edges = np.cumsum([0] + list(sizes))
    pieces = []
    for i in range(len(sizes)):
        lo, hi = int(edges[i]), int(edges[i + 1])

        def grad_fn(g, needs, lo=lo, hi=hi):
            full = np.zeros((m, n))
            full[:, lo:hi] = g
            return (full,)

        pieces.append(_emit("split", (x,), x.data[:, lo:hi].copy(), grad_fn))
    return tuple(pieces)


def scale(x: Tensor, c: float) -> Tensor:
    """Multiply by a scalar constant (materialized, so it stays in the op set)."""
    return mul(x, Tensor(np.full(x.shape, float(c))))


def shift(x: Tensor, c: float) -> Tensor:
    """Add a scalar constant."""
    return add(x, Tensor(np.full(x.shape, float(c))))


_OPS = {
    "matmul": matmul,
    "add": add,
    "mul": mul,
    "concat": concat,
    "split": split,
    "tanh": tanh,
    "softplus": softplus,
    "atan": atan,
    "exp": exp,
    "log": log,
    "sum": sum,
    "mean": mean,
    "square": square,
    "neg": neg,
    "add_row": add_row,
}


def forward_op(kind: str, *inputs: Tensor, **kwargs):
    """Dispatch an op by kind name. Unknown kinds are contract errors."""
    fn = _OPS.get(kind)
    if fn is None:
        raise ContractError(f"unknown op kind '{kind}'")
    return fn(*inputs, **kwargs)


# ---------------------------------------------------------------------------
# reverse pass


def backward(graph: Graph, loss: Tensor) -> dict[str, np.ndarray]:
    """Return d(loss)/d(p) for every watched parameter of ``graph``.

    Parameters that do not reach the loss get zero gradients.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward: loss must be scalar, got shape {loss.shape}")
    known = {id(n.output) for n in graph.nodes}
    known.update(id(p) for p in graph.parameters.values())
    if id(loss) not in known:
        raise ContractError("backward: loss is not a node of this graph")

    grads: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
    for node in reversed(graph.nodes):
        g = grads.pop(id(node.output), None)
        if g is None:
            continue
        needs = tuple(t.requires_grad for t in node.inputs)
        in_grads = node.grad_fn(g, needs)
        for t, ig in zip(node.inputs, in_grads):
            if ig is None or not t.requires_grad:
                continue
            acc = grads.get(id(t))
            grads[id(t)] = ig if acc is None else acc + ig
    return {name: grads.get(id(p), np.zeros_like(p.data))
            for name, p in graph.parameters.items()}


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    """Bias-corrected Adam with per-parameter moment buffers keyed by name."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ContractError("AdamState: betas must lie strictly in (0, 1)")


def adam_step(state: AdamState, params: dict[str, Tensor], grads: dict[str, np.ndarray]) -> None:
    """Apply one Adam update in place on ``params``."""
    state.step_count += 1
    t = state.step_count
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            raise ContractError(f"adam_step: missing gradient for parameter '{name}'")
        if g.shape != p.data.shape:
            raise ShapeError(f"adam_step: gradient shape {g.shape} != parameter shape {p.data.shape} for '{name}'")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient for parameter '{name}'")
        m = state.first_moment.get(name)
        if m is None:
            m = state.first_moment[name] = np.zeros_like(p.data)
        v = state.second_moment.get(name)
        if v is None:
            v = state.second_moment[name] = np.zeros_like(p.data)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p.data -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
