"""Central-difference gradient checking against the reverse-mode engine."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .autodiff import Tensor
from .errors import ConfigError, NonFiniteError


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    eps: float = 1e-5,
) -> float:
    """Compare analytic gradients of ``loss_fn`` with central differences.

    ``loss_fn`` must be a deterministic closure over ``params`` returning a
    scalar tensor.  Every coordinate of every parameter is perturbed by
    ``+/-eps``; the return value is the worst relative error
    ``|a - n| / max(|a|, |n|, 1e-8)`` over all coordinates.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ConfigError(f"grad_check eps must lie in [1e-7, 1e-3], got {eps}")

    for p in params:
        p.zero_grad()
    loss = loss_fn()
    if not math.isfinite(loss.item()):
        raise NonFiniteError("grad_check: loss is not finite")
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]

    worst = 0.0
    for p, a in zip(params, analytic):
        flat = p.data.reshape(-1)
        a_flat = a.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            up = loss_fn().item()
            flat[i] = original - eps
            down = loss_fn().item()
            flat[i] = original
            if not (math.isfinite(up) and math.isfinite(down)):
                raise NonFiniteError("grad_check: perturbed loss is not finite")
            numeric = (up - down) / (2.0 * eps)
            err = abs(a_flat[i] - numeric) / max(abs(a_flat[i]), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
