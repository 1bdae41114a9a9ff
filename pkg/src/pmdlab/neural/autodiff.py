"""Minimal reverse-mode autodiff over numpy arrays.

Covers exactly the primitive set the training losses need: affine maps,
tanh, exp/log/power, sums and means, elementwise min, clipping, and an
axis-max with a deterministic (lowest-index) subgradient. Scalars produced
by ``sum``/``mean`` are 0-d tensors; ``backward`` seeds their gradient
with 1.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericalError


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcasted gradient back down to the original shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A node in the computation graph wrapping a float64 ndarray."""

    __slots__ = ("data", "grad", "_backward", "_parents")

    def __init__(self, data, _parents=()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._backward = None
        self._parents = _parents

    # ---- arithmetic ----

    def __add__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data + other.data, (self, other))

        def _backward():
            self.grad += _unbroadcast(out.grad, self.data.shape)
            other.grad += _unbroadcast(out.grad, other.data.shape)

        out._backward = _backward
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, (self,))

        def _backward():
            self.grad += -out.grad

        out._backward = _backward
        return out

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data * other.data, (self, other))

        def _backward():
            self.grad += _unbroadcast(out.grad * other.data, self.data.shape)
            other.grad += _unbroadcast(out.grad * self.data, other.data.shape)

        out._backward = _backward
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (as_tensor(other) ** -1.0)

    def __pow__(self, exponent: float):
        out = Tensor(self.data**exponent, (self,))

        def _backward():
            self.grad += out.grad * exponent * self.data ** (exponent - 1.0)

        out._backward = _backward
        return out

    def __matmul__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data @ other.data, (self, other))

        def _backward():
            self.grad += out.grad @ other.data.T
            other.grad += self.data.T @ out.grad

        out._backward = _backward
        return out

    # ---- elementwise transcendental ----

    def tanh(self):
        y = np.tanh(self.data)
        out = Tensor(y, (self,))

        def _backward():
            self.grad += out.grad * (1.0 - y * y)

        out._backward = _backward
        return out

    def exp(self):
        y = np.exp(self.data)
        out = Tensor(y, (self,))

        def _backward():
            self.grad += out.grad * y

        out._backward = _backward
        return out

    def log(self):
        out = Tensor(np.log(self.data), (self,))

        def _backward():
            self.grad += out.grad / self.data

        out._backward = _backward
        return out

    def clip(self, lo: float, hi: float):
        out = Tensor(np.clip(self.data, lo, hi), (self,))
        mask = (self.data >= lo) & (self.data <= hi)

        def _backward():
            self.grad += out.grad * mask

        out._backward = _backward
        return out

    # ---- reductions ----

    def sum(self, axis=None, keepdims: bool = False):
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims), (self,))

        def _backward():
            g = out.grad
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self.grad += np.broadcast_to(g, self.data.shape)

        out._backward = _backward
        return out

    def mean(self, axis=None, keepdims: bool = False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def max(self, axis: int = -1, keepdims: bool = False):
        """Max along an axis; subgradient is one-hot at the first maximizer."""
        out = Tensor(self.data.max(axis=axis, keepdims=keepdims), (self,))
        j = np.argmax(self.data, axis=axis)
        mask = np.zeros_like(self.data)
        np.put_along_axis(mask, np.expand_dims(j, axis), 1.0, axis=axis)

        def _backward():
            g = out.grad
            if not keepdims:
                g = np.expand_dims(g, axis)
            self.grad += g * mask

        out._backward = _backward
        return out

    def minimum(self, other):
        """Elementwise min; ties route the gradient to self."""
        other = as_tensor(other)
        out = Tensor(np.minimum(self.data, other.data), (self, other))
        take_self = self.data <= other.data

        def _backward():
            self.grad += _unbroadcast(out.grad * take_self, self.data.shape)
            other.grad += _unbroadcast(out.grad * ~take_self, other.data.shape)

        out._backward = _backward
        return out

    # ---- graph control ----

    def detach(self):
        return Tensor(self.data)

    def backward(self):
        if self.data.size != 1:
            raise NumericalError("backward() requires a scalar loss")
        order = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        for node in order:
            node.grad = np.zeros_like(node.data)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward()

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def softmax(t: Tensor, axis: int = -1) -> Tensor:
    """Numerically stabilized softmax; the max shift is detached."""
    shifted = t - Tensor(t.data.max(axis=axis, keepdims=True))
    e = shifted.exp()
    return e / e.sum(axis=axis, keepdims=True)


def value_and_grad(fn, arrays: list[np.ndarray]):
    """Evaluate ``fn`` on tensor leaves built from ``arrays``.

    Returns the scalar loss and one gradient array per input, all with the
    input shapes. Raises NumericalError on a non-finite loss.
    """
    leaves = [Tensor(a) for a in arrays]
    out = fn(leaves)
    if not np.all(np.isfinite(out.data)):
        raise NumericalError(f"non-finite loss value: {out.data!r}")
    out.backward()
    return float(out.data), [leaf.grad for leaf in leaves]
