"""Adam with bias correction over a ParamSet's trainable entries."""

from __future__ import annotations

import numpy as np

from ..engine import ParamSet


class Adam:
    """First/second-moment state lives only for trainable entries, so the
    optimizer cannot touch frozen weights even by accident."""

    def __init__(self, params: ParamSet, betas: tuple[float, float] = (0.9, 0.999),
                 eps: float = 1e-8):
        self.beta1, self.beta2 = float(betas[0]), float(betas[1])
        self.eps = float(eps)
        self.step_count = 0
        self.m = {n: np.zeros_like(t.data) for n, t in params.trainable_items()}
        self.v = {n: np.zeros_like(t.data) for n, t in params.trainable_items()}

    def step(self, params: ParamSet, lr: float) -> None:
        self.step_count += 1
        c1 = 1.0 - self.beta1 ** self.step_count
        c2 = 1.0 - self.beta2 ** self.step_count
        for name in self.m:
            t = params[name]
            g = t.grad if t.grad is not None else np.zeros_like(t.data)
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            update = (self.m[name] / c1) / (np.sqrt(self.v[name] / c2) + self.eps)
            params.set_data(name, t.data - lr * update)
