"""Adaptive-moment (Adam) optimizer over Param lists."""

import numpy as np


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self._m = {}
        self._v = {}

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for p in self.params:
            if not p.trainable or p.grad is None:
                continue
            g = p.grad.astype(np.float64)
            m = self._m.get(p.name)
            if m is None:
                m = np.zeros(p.value.shape, dtype=np.float64)
                self._m[p.name] = m
                self._v[p.name] = np.zeros(p.value.shape, dtype=np.float64)
            v = self._v[p.name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            update = self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.value = (p.value.astype(np.float64) - update).astype(p.value.dtype)
