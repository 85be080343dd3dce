"""Minimal NHWC layer stack backed by the kernel module.

Convolutions are lowered with im2col and dispatched to BLAS; pooling,
resizing and the lowering itself go through the selected kernel backend.
Layers cache forward activations only when train=True, so frozen prefixes
can run in inference mode without memory cost.
"""

import numpy as np

from .. import kernels


class Param:
    """One named parameter tensor with its gradient and trainability bit."""

    __slots__ = ("name", "value", "grad", "trainable")

    def __init__(self, name, value, trainable=True):
        self.name = name
        self.value = value
        self.grad = None
        self.trainable = trainable


class Layer:
    name = ""

    def forward(self, x, train=False):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def params(self):
        return []


def he_init(rng, shape, fan_in, dtype):
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


class Conv2D(Layer):
    """k x k convolution, stride s, zero padding (default: same for stride 1).

    Weight layout is (k*k*cin, cout) with rows in (kh, kw, C) order to
    line up with im2col columns.
    """

    def __init__(self, name, cin, cout, k=3, stride=1, pad=None, rng=None, dtype=np.float32):
        self.name = name
        self.k, self.stride = k, stride
        self.pad = k // 2 if pad is None else pad
        self.cin, self.cout = cin, cout
        rng = rng or np.random.default_rng(0)
        self.w = Param(f"{name}.W", he_init(rng, (k * k * cin, cout), k * k * cin, dtype))
        self.b = Param(f"{name}.b", np.zeros(cout, dtype=dtype))
        self._cache = None

    def out_shape(self, h, w):
        oh = (h + 2 * self.pad - self.k) // self.stride + 1
        ow = (w + 2 * self.pad - self.k) // self.stride + 1
        return oh, ow

    def forward(self, x, train=False):
        n, h, w, _ = x.shape
        oh, ow = self.out_shape(h, w)
        cols = kernels.im2col(x, self.k, self.k, self.stride, self.pad)
        out = cols @ self.w.value + self.b.value
        if train:
            self._cache = (cols, x.shape)
        else:
            self._cache = None
        return out.reshape(n, oh, ow, self.cout)

    def backward(self, grad):
        cols, x_shape = self._cache
        g = grad.reshape(-1, self.cout)
        self.w.grad = cols.T @ g
        self.b.grad = g.sum(axis=0)
        gcols = g @ self.w.value.T
        return kernels.col2im(gcols, x_shape, self.k, self.k, self.stride, self.pad)

    def params(self):
        return [self.w, self.b]


class DepthwiseConv2D(Layer):
    """Per-channel k x k convolution (the spatial half of a separable conv)."""

    def __init__(self, name, cin, k=3, stride=1, pad=None, rng=None, dtype=np.float32):
        self.name = name
        self.k, self.stride = k, stride
        self.pad = k // 2 if pad is None else pad
        self.cin = cin
        rng = rng or np.random.default_rng(0)
        self.w = Param(f"{name}.W", he_init(rng, (k * k, cin), k * k, dtype))
        self.b = Param(f"{name}.b", np.zeros(cin, dtype=dtype))
        self._cache = None

    def forward(self, x, train=False):
        n, h, w, c = x.shape
        oh = (h + 2 * self.pad - self.k) // self.stride + 1
        ow = (w + 2 * self.pad - self.k) // self.stride + 1
        cols = kernels.im2col(x, self.k, self.k, self.stride, self.pad)
        cols3 = cols.reshape(-1, self.k * self.k, c)
        out = np.einsum("mkc,kc->mc", cols3, self.w.value, optimize=True) + self.b.value
        if train:
            self._cache = (cols3, x.shape)
        else:
            self._cache = None
        return out.reshape(n, oh, ow, c)

    def backward(self, grad):
        cols3, x_shape = self._cache
        g = grad.reshape(-1, self.cin)
        self.w.grad = np.einsum("mkc,mc->kc", cols3, g, optimize=True)
        self.b.grad = g.sum(axis=0)
        gcols = np.einsum("mc,kc->mkc", g, self.w.value, optimize=True)
        return kernels.col2im(gcols.reshape(len(g), -1), x_shape, self.k, self.k, self.stride, self.pad)

    def params(self):
        return [self.w, self.b]


class Dense(Layer):
    def __init__(self, name, fin, fout, rng=None, dtype=np.float32):
        self.name = name
        rng = rng or np.random.default_rng(0)
        self.w = Param(f"{name}.W", he_init(rng, (fin, fout), fin, dtype))
        self.b = Param(f"{name}.b", np.zeros(fout, dtype=dtype))
        self._cache = None

    def forward(self, x, train=False):
        self._cache = x if train else None
        return x @ self.w.value + self.b.value

    def backward(self, grad):
        x = self._cache
        self.w.grad = x.T @ grad
        self.b.grad = grad.sum(axis=0)
        return grad @ self.w.value.T

    def params(self):
        return [self.w, self.b]


class ReLU(Layer):
    def __init__(self, name=""):
        self.name = name
        self._mask = None

    def forward(self, x, train=False):
        if train:
            self._mask = x > 0
        return np.maximum(x, 0)

    def backward(self, grad):
        return grad * self._mask


class MaxPool2D(Layer):
    """2x2 stride-2 max pooling; odd trailing rows/cols are dropped."""

    def __init__(self, name=""):
        self.name = name
        self._cache = None

    def forward(self, x, train=False):
        out, arg = kernels.maxpool2x2(x)
        if train:
            self._cache = (arg, x.shape)
        return out

    def backward(self, grad):
        arg, x_shape = self._cache
        return kernels.maxpool2x2_backward(grad, arg, x_shape)


class Flatten(Layer):
    def __init__(self, name=""):
        self.name = name
        self._shape = None

    def forward(self, x, train=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._shape)


class Sequential(Layer):
    def __init__(self, name, layers):
        self.name = name
        self.layers = list(layers)

    def forward(self, x, train=False):
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out


class Residual(Layer):
    """y = inner(x) + shortcut(x); shortcut is identity unless a projection is given."""

    def __init__(self, name, inner, project=None):
        self.name = name
        self.inner = Sequential(f"{name}.inner", inner)
        self.project = project

    def forward(self, x, train=False):
        y = self.inner.forward(x, train=train)
        s = self.project.forward(x, train=train) if self.project is not None else x
        return y + s

    def backward(self, grad):
        gx = self.inner.backward(grad)
        gs = self.project.backward(grad) if self.project is not None else grad
        return gx + gs

    def params(self):
        out = self.inner.params()
        if self.project is not None:
            out.extend(self.project.params())
        return out


def params_state(layer):
    """name -> array snapshot of every parameter under `layer`."""
    return {p.name: p.value.copy() for p in layer.params()}


def load_params_state(layer, state):
    for p in layer.params():
        if p.name not in state:
            raise KeyError(f"missing parameter {p.name}")
        arr = state[p.name]
        if arr.shape != p.value.shape:
            raise ValueError(f"shape mismatch for {p.name}: {arr.shape} vs {p.value.shape}")
        p.value = arr.astype(p.value.dtype, copy=True)
