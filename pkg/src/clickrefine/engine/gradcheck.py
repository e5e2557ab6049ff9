"""Central finite-difference validation of the reverse-mode gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import NumericError
from .core import Tensor
from .params import ParamSet


def grad_check(
    f: Callable[[ParamSet], Tensor],
    params: ParamSet,
    step: float = 1e-5,
    names: list[str] | None = None,
    max_entries_per_param: int | None = None,
    rng_seed: int = 0,
) -> float:
    """Compare reverse-mode gradients of a scalar loss against central
    finite differences; return the worst relative error seen.

    Checks every element of every trainable entry by default.  For large
    tensors ``max_entries_per_param`` spot-checks a seeded random subset
    instead, which keeps full-model sweeps inside a time budget without
    changing what is being compared.  Run in float64 for headroom.
    """
    loss = f(params)
    if not np.isfinite(loss.data):
        raise NumericError("loss is non-finite at the linearization point")
    params.zero_grads()
    loss = f(params)
    loss.backward()

    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    targets = names if names is not None else [n for n, _ in params.trainable_items()]
    for name in targets:
        t = params[name]
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        flat = t.data.reshape(-1)
        n = flat.size
        if max_entries_per_param is not None and n > max_entries_per_param:
            idxs = rng.choice(n, size=max_entries_per_param, replace=False)
        else:
            idxs = np.arange(n)
        aflat = analytic.reshape(-1)
        for i in idxs:
            orig = flat[i]
            h = step * (1.0 + abs(float(orig)))
            flat[i] = orig + h
            lp = float(f(params).data)
            flat[i] = orig - h
            lm = float(f(params).data)
            flat[i] = orig
            fd = (lp - lm) / (2.0 * h)
            a = float(aflat[i])
            denom = max(abs(a), abs(fd), 1e-8)
            worst = max(worst, abs(a - fd) / denom)
    return worst
