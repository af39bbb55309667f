"""Adam optimizer over named parameter tensors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .errors import ShapeError


@dataclass
class Adam:
    """Adam with bias correction.

    Defaults follow the usual convention: lr=1e-3, beta1=0.9, beta2=0.999,
    eps=1e-8.  Moments are allocated lazily on the first step so the same
    instance can be constructed before the parameters exist.
    """

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)

    def step(self, params: dict[str, Tensor]) -> None:
        """Apply one update in-place; parameters with ``grad is None`` are skipped."""
        self.step_count += 1
        t = self.step_count
        bias1 = 1.0 - self.beta1**t
        bias2 = 1.0 - self.beta2**t
        for name, p in params.items():
            if p.grad is None:
                continue
            if p.grad.shape != p.data.shape:
                raise ShapeError(
                    f"grad shape {p.grad.shape} does not match param '{name}' shape {p.data.shape}"
                )
            m = self.first_moment.setdefault(name, np.zeros_like(p.data))
            v = self.second_moment.setdefault(name, np.zeros_like(p.data))
            if m.shape != p.data.shape:
                raise ShapeError(f"moment shape {m.shape} does not match param '{name}'")
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * (p.grad * p.grad)
            m_hat = m / bias1
            v_hat = v / bias2
            p.data -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)

    def zero_grad(self, params: dict[str, Tensor]) -> None:
        for p in params.values():
            p.zero_grad()


def adam_step(params: dict[str, Tensor], state: Adam) -> Adam:
    """Functional wrapper: one update using gradients already stored on ``params``."""
    state.step(params)
    return state
