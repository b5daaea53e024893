"""Adam optimizer over named numpy parameter dicts.

Weight decay is the classic coupled form: decay * param is added to the
gradient before the moment updates, matching the reference optimizer's
weight_decay argument.
"""

from __future__ import annotations

import numpy as np


class Adam:
    def __init__(self, params: dict[str, np.ndarray], beta1=0.9, beta2=0.999, eps=1e-8,
                 weight_decay=0.0):
        self.params = params
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {name: np.zeros_like(p) for name, p in params.items()}
        self.v = {name: np.zeros_like(p) for name, p in params.items()}

    def step(self, grads: dict[str, np.ndarray], lr: float) -> None:
        """One update; params absent from `grads` receive zero gradient."""
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, param in self.params.items():
            grad = grads.get(name)
            if grad is None:
                grad = np.zeros_like(param)
            if self.weight_decay:
                grad = grad + self.weight_decay * param
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            param -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
