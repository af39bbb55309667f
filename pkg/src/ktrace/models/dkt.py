"""Deep knowledge tracing: recurrent state over encoded interactions.

The recurrent cell is either the literal tanh recurrence or a standard LSTM
(the default).  The objective head maps the hidden state to per-skill
correctness probabilities; the subjective variant swaps in a sigmoid branch
head read as normalized scores and trains with squared error.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..data import OBJECTIVE, SUBJECTIVE, PaddedBatch
from ..encodings import dkt_input_batch
from ..errors import ConfigError
from .common import gather_next_step_predictions, next_step_selector_loss

CELLS = ("lstm", "rnn_tanh")


@dataclass(frozen=True)
class DktConfig:
    n_skills: int
    hidden: int = 64
    cell: str = "lstm"
    task: str = OBJECTIVE

    def __post_init__(self):
        if self.n_skills < 1:
            raise ConfigError(f"n_skills must be >= 1, got {self.n_skills}")
        if self.hidden < 1:
            raise ConfigError(f"hidden size must be >= 1, got {self.hidden}")
        if self.cell not in CELLS:
            raise ConfigError(f"cell must be one of {CELLS}, got '{self.cell}'")
        if self.task not in (OBJECTIVE, SUBJECTIVE):
            raise ConfigError(f"unknown task '{self.task}'")


class DktModel:
    kind = "dkt"

    def __init__(self, config: DktConfig, rng: np.random.Generator | None = None):
        self.config = config
        n, h = config.n_skills, config.hidden
        in_dim = 2 * n
        rng = rng if rng is not None else np.random.Generator(np.random.PCG64(0))
        p: dict[str, Tensor] = {}
        if config.cell == "lstm":
            for gate in ("i", "f", "g", "o"):
                p[f"wx_{gate}"] = ad.init_uniform(rng, (in_dim, h))
                p[f"wh_{gate}"] = ad.init_uniform(rng, (h, h))
                p[f"b_{gate}"] = ad.init_zeros((h,))
        else:
            p["wx"] = ad.init_uniform(rng, (in_dim, h))
            p["wh"] = ad.init_uniform(rng, (h, h))
            p["b"] = ad.init_zeros((h,))
        p["head_w"] = ad.init_uniform(rng, (h, n))
        p["head_b"] = ad.init_zeros((n,))
        self._params = p

    def params(self) -> dict[str, Tensor]:
        return self._params

    def config_dict(self) -> dict:
        return asdict(self.config)

    @property
    def task(self) -> str:
        return self.config.task

    def forward(self, inputs: np.ndarray) -> list[Tensor]:
        """Run the cell over a dense (T, B, 2N) input batch.

        Returns one (B, N) sigmoid output per step: correctness probabilities
        for the objective task, normalized scores for the subjective one.
        """
        p = self._params
        t_len, batch, _ = inputs.shape
        h = Tensor(np.zeros((batch, self.config.hidden)))
        c = Tensor(np.zeros((batch, self.config.hidden)))
        outputs = []
        for t in range(t_len):
            x = Tensor(inputs[t])
            if self.config.cell == "lstm":
                gate_i = ad.sigmoid(x @ p["wx_i"] + h @ p["wh_i"] + p["b_i"])
                gate_f = ad.sigmoid(x @ p["wx_f"] + h @ p["wh_f"] + p["b_f"])
                gate_g = ad.tanh(x @ p["wx_g"] + h @ p["wh_g"] + p["b_g"])
                gate_o = ad.sigmoid(x @ p["wx_o"] + h @ p["wh_o"] + p["b_o"])
                c = gate_f * c + gate_i * gate_g
                h = gate_o * ad.tanh(c)
            else:
                h = ad.tanh(x @ p["wx"] + h @ p["wh"] + p["b"])
            outputs.append(ad.sigmoid(h @ p["head_w"] + p["head_b"]))
        return outputs

    def _encode(self, batch: PaddedBatch) -> np.ndarray:
        return dkt_input_batch(
            batch.skills, batch.outcomes, batch.mask, self.config.n_skills, self.config.task
        )

    def loss(self, batch: PaddedBatch) -> Tensor:
        outputs = self.forward(self._encode(batch))
        return sequence_loss(outputs, batch.skills, batch.outcomes, batch.mask, self.config.task)

    def predict(self, batch: PaddedBatch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with ad.no_grad():
            outputs = self.forward(self._encode(batch))
        return gather_next_step_predictions(outputs, batch)


def sequence_loss(
    step_outputs: list[Tensor],
    skills: np.ndarray,
    outcomes: np.ndarray,
    mask: np.ndarray,
    task: str,
) -> Tensor:
    """Next-step loss with the one-coordinate selector.

    Objective: mean binary cross-entropy of the predicted probability for the
    next step's skill against its 0/1 outcome.  Subjective: mean squared
    error of the branch-head score for that skill.  Output coordinates other
    than the selected one cannot change the loss.
    """
    return next_step_selector_loss(step_outputs, skills, outcomes, mask, task)
