"""Minimal reverse-mode automatic differentiation over numpy arrays.

A :class:`Tape` records primitive operations as they are executed eagerly.
Each record keeps the op name, input node ids and the computed value, so the
node list is topologically ordered by construction.  ``backward`` walks the
records in reverse and accumulates vector-Jacobian products; ``forward``
replays the recorded program against fresh input bindings.

First-order gradients only; shapes are fixed at record time except that any
leading batch extent simply flows through broadcasting.
"""

from __future__ import annotations

import numpy as np

_TINY = 1e-15


class Node:
    __slots__ = ("op", "inputs", "value", "attrs", "name", "requires_grad")

    def __init__(self, op, inputs, value, attrs=None, name=None, requires_grad=False):
        self.op = op
        self.inputs = inputs
        self.value = value
        self.attrs = attrs or {}
        self.name = name
        self.requires_grad = requires_grad


class Tensor:
    """Handle to a node on a tape."""

    __slots__ = ("tape", "nid")

    def __init__(self, tape, nid):
        self.tape = tape
        self.nid = nid

    @property
    def value(self):
        return self.tape.nodes[self.nid].value

    @property
    def shape(self):
        return np.shape(self.value)

    def __hash__(self):
        return hash((id(self.tape), self.nid))

    def __eq__(self, other):
        return isinstance(other, Tensor) and other.tape is self.tape and other.nid == self.nid

    def _coerce(self, other):
        if isinstance(other, Tensor):
            return other
        return self.tape.constant(other)

    def __add__(self, other):
        return add(self, self._coerce(other))

    def __radd__(self, other):
        return add(self._coerce(other), self)

    def __sub__(self, other):
        return sub(self, self._coerce(other))

    def __rsub__(self, other):
        return sub(self._coerce(other), self)

    def __mul__(self, other):
        return mul(self, self._coerce(other))

    def __rmul__(self, other):
        return mul(self._coerce(other), self)

    def __truediv__(self, other):
        return div(self, self._coerce(other))

    def __rtruediv__(self, other):
        return div(self._coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, self._coerce(other))

    def __getitem__(self, key):
        return tslice(self, key)

    def __repr__(self):
        return f"Tensor(nid={self.nid}, shape={self.shape})"


class TapeError(RuntimeError):
    pass


class Tape:
    """Append-only record of primitive operations."""

    def __init__(self, check_finite=True):
        self.nodes: list[Node] = []
        self.outputs: dict[str, int] = {}
        self.check_finite = check_finite

    # -- construction -----------------------------------------------------

    def leaf(self, data, requires_grad=False, name=None):
        value = np.asarray(data, dtype=float)
        node = Node("leaf", (), value, name=name, requires_grad=requires_grad)
        self.nodes.append(node)
        return Tensor(self, len(self.nodes) - 1)

    def constant(self, data):
        return self.leaf(data, requires_grad=False)

    def mark_output(self, name, tensor):
        self.outputs[name] = tensor.nid

    def record(self, op, inputs, value, **attrs):
        if self.check_finite and not np.all(np.isfinite(value)):
            raise TapeError(f"non-finite value at node {len(self.nodes)} (op {op})")
        node = Node(op, tuple(t.nid for t in inputs), value, attrs)
        self.nodes.append(node)
        return Tensor(self, len(self.nodes) - 1)

    # -- replay -----------------------------------------------------------

    def forward(self, inputs):
        """Re-evaluate the recorded program with new leaf bindings.

        ``inputs`` maps leaf names to arrays.  Returns the values of all
        tensors registered through :meth:`mark_output`.
        """
        for name, data in inputs.items():
            nid = self._named_leaf(name)
            bound = np.asarray(data, dtype=float)
            if bound.shape != self.nodes[nid].value.shape:
                raise TapeError(
                    f"shape mismatch for input '{name}': "
                    f"{bound.shape} vs {self.nodes[nid].value.shape}"
                )
            self.nodes[nid].value = bound
        for i, node in enumerate(self.nodes):
            if node.op == "leaf":
                continue
            args = [self.nodes[j].value for j in node.inputs]
            node.value = _FORWARD[node.op](args, node.attrs)
            if self.check_finite and not np.all(np.isfinite(node.value)):
                raise TapeError(f"non-finite value at node {i} (op {node.op})")
        return {name: self.nodes[nid].value for name, nid in self.outputs.items()}

    def _named_leaf(self, name):
        for i, node in enumerate(self.nodes):
            if node.op == "leaf" and node.name == name:
                return i
        raise TapeError(f"no leaf named '{name}'")


class Gradients:
    """Mapping from tensors (or leaf names) to gradient arrays."""

    def __init__(self, by_nid, tape):
        self._by_nid = by_nid
        self._tape = tape

    def __getitem__(self, key):
        if isinstance(key, Tensor):
            nid = key.nid
        else:
            nid = self._tape._named_leaf(key)
        return self._by_nid[nid]

    def __contains__(self, key):
        nid = key.nid if isinstance(key, Tensor) else self._tape._named_leaf(key)
        return nid in self._by_nid


def _unbroadcast(grad, shape):
    """Sum a gradient over axes that were produced by broadcasting."""
    grad = np.asarray(grad, dtype=float)
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def backward(tape: Tape, output: Tensor) -> Gradients:
    """Reverse accumulation of d(output)/d(leaf) for all grad-enabled leaves."""
    out_node = tape.nodes[output.nid]
    if np.size(out_node.value) != 1:
        raise TapeError(f"backward output must be scalar, got shape {np.shape(out_node.value)}")
    grads: dict[int, np.ndarray] = {output.nid: np.ones_like(np.asarray(out_node.value, dtype=float))}
    needs = _grad_mask(tape)
    for nid in range(output.nid, -1, -1):
        if nid not in grads or not needs[nid]:
            continue
        node = tape.nodes[nid]
        if node.op == "leaf":
            continue
        g = grads.pop(nid)
        vals = [tape.nodes[j].value for j in node.inputs]
        partials = _BACKWARD[node.op](g, node.value, vals, node.attrs)
        for j, pg in zip(node.inputs, partials):
            if pg is None or not needs[j]:
                continue
            pg = _unbroadcast(pg, np.shape(tape.nodes[j].value))
            if j in grads:
                grads[j] = grads[j] + pg
            else:
                grads[j] = pg
    result = {}
    for nid, node in enumerate(tape.nodes):
        if node.op == "leaf" and node.requires_grad:
            result[nid] = grads.get(nid, np.zeros_like(np.asarray(node.value, dtype=float)))
    return Gradients(result, tape)


def _grad_mask(tape):
    """Which nodes lie on a path from a grad-enabled leaf."""
    needs = [False] * len(tape.nodes)
    for i, node in enumerate(tape.nodes):
        if node.op == "leaf":
            needs[i] = node.requires_grad
        else:
            needs[i] = any(needs[j] for j in node.inputs)
    return needs


# ---------------------------------------------------------------------------
# Primitive ops.  Each has an eager wrapper, a replay rule and a VJP rule.
# ---------------------------------------------------------------------------

_FORWARD = {}
_BACKWARD = {}


def _primitive(name, fwd, bwd):
    _FORWARD[name] = fwd
    _BACKWARD[name] = bwd


def _same_tape(*ts):
    tape = ts[0].tape
    for t in ts[1:]:
        if t.tape is not tape:
            raise TapeError("operands live on different tapes")
    return tape


def add(a, b):
    tape = _same_tape(a, b)
    return tape.record("add", (a, b), a.value + b.value)


_primitive("add", lambda v, at: v[0] + v[1], lambda g, out, v, at: (g, g))


def sub(a, b):
    tape = _same_tape(a, b)
    return tape.record("sub", (a, b), a.value - b.value)


_primitive("sub", lambda v, at: v[0] - v[1], lambda g, out, v, at: (g, -g))


def mul(a, b):
    tape = _same_tape(a, b)
    return tape.record("mul", (a, b), a.value * b.value)


_primitive("mul", lambda v, at: v[0] * v[1],
           lambda g, out, v, at: (g * v[1], g * v[0]))


def div(a, b):
    tape = _same_tape(a, b)
    return tape.record("div", (a, b), a.value / b.value)


_primitive("div", lambda v, at: v[0] / v[1],
           lambda g, out, v, at: (g / v[1], -g * v[0] / (v[1] * v[1])))


def neg(a):
    return a.tape.record("neg", (a,), -a.value)


_primitive("neg", lambda v, at: -v[0], lambda g, out, v, at: (-g,))


def matmul(a, b):
    tape = _same_tape(a, b)
    return tape.record("matmul", (a, b), a.value @ b.value)


def _matmul_bwd(g, out, v, at):
    a, b = v
    ga = g @ np.swapaxes(b, -1, -2)
    gb = np.swapaxes(a, -1, -2) @ g
    return (ga, gb)


_primitive("matmul", lambda v, at: v[0] @ v[1], _matmul_bwd)


def tsum(a, axis=None, keepdims=False):
    return a.tape.record("sum", (a,), np.sum(a.value, axis=axis, keepdims=keepdims),
                         axis=axis, keepdims=keepdims)


def _expand_reduced(g, x_shape, axis, keepdims):
    if axis is None:
        return np.broadcast_to(g, x_shape)
    if not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, x_shape)


_primitive("sum",
           lambda v, at: np.sum(v[0], axis=at["axis"], keepdims=at["keepdims"]),
           lambda g, out, v, at: (_expand_reduced(g, np.shape(v[0]), at["axis"], at["keepdims"]),))


def tmax(a, axis=None, keepdims=False):
    return a.tape.record("max", (a,), np.max(a.value, axis=axis, keepdims=keepdims),
                         axis=axis, keepdims=keepdims)


def _max_bwd(g, out, v, at):
    x = v[0]
    axis, keepdims = at["axis"], at["keepdims"]
    out_k = out if (keepdims or axis is None) else np.expand_dims(out, axis)
    if axis is None:
        out_k = np.broadcast_to(out_k, np.shape(x)) if np.ndim(out_k) else out_k
    mask = (x == out_k).astype(float)
    count = np.sum(mask, axis=axis, keepdims=True) if axis is not None else np.sum(mask)
    g_exp = _expand_reduced(g, np.shape(x), axis, keepdims)
    return (g_exp * mask / count,)


_primitive("max",
           lambda v, at: np.max(v[0], axis=at["axis"], keepdims=at["keepdims"]),
           _max_bwd)


def _unary(name, f, vjp):
    def op(a):
        return a.tape.record(name, (a,), f(a.value))

    _primitive(name, lambda v, at: f(v[0]), vjp)
    return op


exp = _unary("exp", np.exp, lambda g, out, v, at: (g * out,))
log = _unary("log", np.log, lambda g, out, v, at: (g / v[0],))
tanh = _unary("tanh", np.tanh, lambda g, out, v, at: (g * (1.0 - out * out),))
atanh = _unary("atanh", np.arctanh, lambda g, out, v, at: (g / (1.0 - v[0] * v[0]),))
sinh = _unary("sinh", np.sinh, lambda g, out, v, at: (g * np.cosh(v[0]),))
asinh = _unary("asinh", np.arcsinh, lambda g, out, v, at: (g / np.sqrt(1.0 + v[0] * v[0]),))
cosh = _unary("cosh", np.cosh, lambda g, out, v, at: (g * np.sinh(v[0]),))
sqrt = _unary("sqrt", np.sqrt, lambda g, out, v, at: (g / (2.0 * out),))
relu = _unary("relu", lambda x: np.maximum(x, 0.0),
              lambda g, out, v, at: (g * (v[0] > 0.0),))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


sigmoid = _unary("sigmoid", _sigmoid, lambda g, out, v, at: (g * out * (1.0 - out),))


def softmax(a, axis=-1):
    x = a.value
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    val = e / np.sum(e, axis=axis, keepdims=True)
    return a.tape.record("softmax", (a,), val, axis=axis)


def _softmax_fwd(v, at):
    x = v[0]
    shifted = x - np.max(x, axis=at["axis"], keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=at["axis"], keepdims=True)


def _softmax_bwd(g, out, v, at):
    axis = at["axis"]
    dot_ = np.sum(g * out, axis=axis, keepdims=True)
    return (out * (g - dot_),)


_primitive("softmax", _softmax_fwd, _softmax_bwd)


def dot(a, b):
    tape = _same_tape(a, b)
    return tape.record("dot", (a, b), np.dot(a.value, b.value))


_primitive("dot", lambda v, at: np.dot(v[0], v[1]),
           lambda g, out, v, at: (g * v[1], g * v[0]))


def norm(a, axis=-1, keepdims=True):
    val = np.linalg.norm(a.value, axis=axis, keepdims=keepdims)
    return a.tape.record("norm", (a,), val, axis=axis, keepdims=keepdims)


def _norm_bwd(g, out, v, at):
    x = v[0]
    axis, keepdims = at["axis"], at["keepdims"]
    out_k = out if keepdims else np.expand_dims(out, axis)
    g_k = g if keepdims else np.expand_dims(g, axis)
    return (g_k * x / np.maximum(out_k, _TINY),)


_primitive("norm",
           lambda v, at: np.linalg.norm(v[0], axis=at["axis"], keepdims=at["keepdims"]),
           _norm_bwd)


def concat(tensors, axis=-1):
    tape = _same_tape(*tensors)
    val = np.concatenate([t.value for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    return tape.record("concat", tuple(tensors), val, axis=axis, sizes=sizes)


def _concat_bwd(g, out, v, at):
    axis = at["axis"]
    splits = np.cumsum(at["sizes"])[:-1]
    return tuple(np.split(g, splits, axis=axis))


_primitive("concat", lambda v, at: np.concatenate(v, axis=at["axis"]), _concat_bwd)


def tslice(a, key):
    return a.tape.record("slice", (a,), a.value[key], key=key)


def _slice_bwd(g, out, v, at):
    gx = np.zeros_like(v[0])
    gx[at["key"]] = g
    return (gx,)


_primitive("slice", lambda v, at: v[0][at["key"]], _slice_bwd)


def reshape(a, shape):
    return a.tape.record("reshape", (a,), np.reshape(a.value, shape), shape=shape)


_primitive("reshape", lambda v, at: np.reshape(v[0], at["shape"]),
           lambda g, out, v, at: (np.reshape(g, np.shape(v[0])),))


def swap_last(a):
    """Transpose the last two axes (used for attention score matrices)."""
    return a.tape.record("swap_last", (a,), np.swapaxes(a.value, -1, -2))


_primitive("swap_last", lambda v, at: np.swapaxes(v[0], -1, -2),
           lambda g, out, v, at: (np.swapaxes(g, -1, -2),))


def broadcast_to(a, shape):
    return a.tape.record("broadcast", (a,), np.broadcast_to(a.value, shape).copy(), shape=shape)


_primitive("broadcast", lambda v, at: np.broadcast_to(v[0], at["shape"]).copy(),
           lambda g, out, v, at: (_unbroadcast(g, np.shape(v[0])),))


def clip_min(a, floor):
    """Elementwise lower clamp; gradient is identity above the floor, zero below."""
    return a.tape.record("clip_min", (a,), np.maximum(a.value, floor), floor=floor)


_primitive("clip_min", lambda v, at: np.maximum(v[0], at["floor"]),
           lambda g, out, v, at: (g * (v[0] > at["floor"]),))


def ball_project(a, max_norm, axis=-1):
    """Radial clamp onto the shell of radius ``max_norm``.

    Gradient convention: identity for rows that were inside, zero for rows
    that got clamped (projected-gradient treatment of the boundary).
    """
    x = a.value
    n = np.linalg.norm(x, axis=axis, keepdims=True)
    factor = np.where(n >= max_norm, max_norm / np.maximum(n, _TINY), 1.0)
    return a.tape.record("ball_project", (a,), x * factor, max_norm=max_norm, axis=axis)


def _ball_project_fwd(v, at):
    x = v[0]
    n = np.linalg.norm(x, axis=at["axis"], keepdims=True)
    factor = np.where(n >= at["max_norm"], at["max_norm"] / np.maximum(n, _TINY), 1.0)
    return x * factor


def _ball_project_bwd(g, out, v, at):
    n = np.linalg.norm(v[0], axis=at["axis"], keepdims=True)
    inside = (n < at["max_norm"]).astype(float)
    return (g * inside,)


_primitive("ball_project", _ball_project_fwd, _ball_project_bwd)


# ---------------------------------------------------------------------------
# Finite-difference gradient checking
# ---------------------------------------------------------------------------

class GradCheckReport:
    def __init__(self, max_rel_err, numeric, analytic, tol):
        self.max_rel_err = float(max_rel_err)
        self.numeric = numeric
        self.analytic = analytic
        self.tol = tol
        self.passed = self.max_rel_err <= tol

    def __repr__(self):
        status = "pass" if self.passed else "FAIL"
        return f"GradCheckReport({status}, max_rel_err={self.max_rel_err:.3e}, tol={self.tol:.1e})"


def numeric_gradient(fn, point, h=1e-5):
    """Central-difference gradient of a scalar function of an array."""
    point = np.asarray(point, dtype=float)
    grad = np.zeros_like(point)
    flat = grad.ravel()
    pflat = point.ravel()
    for i in range(pflat.size):
        orig = pflat[i]
        pflat[i] = orig + h
        fp = float(fn(point))
        pflat[i] = orig - h
        fm = float(fn(point))
        pflat[i] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise TapeError(f"non-finite function value during finite differences at index {i}")
        flat[i] = (fp - fm) / (2.0 * h)
    return grad


def check_gradient(fn, point, analytic, h=1e-5, tol=1e-4):
    """Compare an analytic gradient against central finite differences.

    The error is measured at the level of the whole gradient vector:
    ||analytic - numeric||_inf / max(||analytic||_inf, ||numeric||_inf, 1e-8).
    """
    numeric = numeric_gradient(fn, point, h=h)
    analytic = np.asarray(analytic, dtype=float)
    scale = max(np.max(np.abs(analytic), initial=0.0),
                np.max(np.abs(numeric), initial=0.0), 1e-8)
    err = np.max(np.abs(analytic - numeric), initial=0.0) / scale
    return GradCheckReport(err, numeric, analytic, tol)
