"""Graph-based knowledge tracing over the statistics-based dense skill graph.

Each skill keeps its own hidden state.  Answering skill i aggregates the
interaction embedding into row i (skill embeddings elsewhere), passes
messages along the transition graph, applies an erase-add gate and a GRU
update, then predicts every skill's next outcome through a sigmoid head
with a per-skill bias.  The subjective variant interpolates the answer
embedding by the normalized score and trains with squared error.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..data import OBJECTIVE, SUBJECTIVE, PaddedBatch
from ..errors import ConfigError, DataError
from ..graph import DenseGraph
from .common import (
    gather_next_step_predictions,
    mlp_apply,
    mlp_uniform_params,
    next_step_selector_loss,
)


@dataclass(frozen=True)
class GktConfig:
    n_skills: int
    hidden: int = 32
    embed_dim: int = 32
    task: str = OBJECTIVE

    def __post_init__(self):
        if min(self.n_skills, self.hidden, self.embed_dim) < 1:
            raise ConfigError("n_skills, hidden and embed_dim must all be >= 1")
        if self.task not in (OBJECTIVE, SUBJECTIVE):
            raise ConfigError(f"unknown task '{self.task}'")

    @property
    def feature_dim(self) -> int:
        return self.hidden + self.embed_dim


def erase_add_combine(message: Tensor, erase: Tensor, add: Tensor) -> Tensor:
    """Featurewise forget-then-write: ``m * (1 - erase) + add``."""
    return message * (1.0 - erase) + add


def erase_add(
    message: Tensor, erase_w: Tensor, erase_b: Tensor, add_w: Tensor, add_b: Tensor
) -> Tensor:
    """Gate with sigmoid erase and tanh add, both computed from the message."""
    erase = ad.sigmoid(message @ erase_w + erase_b)
    add = ad.tanh(message @ add_w + add_b)
    return erase_add_combine(message, erase, add)


def gru_update(message: Tensor, state: Tensor, p: dict[str, Tensor]) -> Tensor:
    """Standard GRU cell: message as input, per-skill state as hidden."""
    update = ad.sigmoid(message @ p["gru_wx_z"] + state @ p["gru_wh_z"] + p["gru_b_z"])
    reset = ad.sigmoid(message @ p["gru_wx_r"] + state @ p["gru_wh_r"] + p["gru_b_r"])
    candidate = ad.tanh(
        message @ p["gru_wx_n"] + (reset * state) @ p["gru_wh_n"] + p["gru_b_n"]
    )
    return (1.0 - update) * candidate + update * state


class GktModel:
    kind = "gkt"

    def __init__(
        self,
        config: GktConfig,
        graph: DenseGraph,
        rng: np.random.Generator | None = None,
    ):
        if graph.n_skills != config.n_skills:
            raise ConfigError(
                f"graph has {graph.n_skills} skills, config says {config.n_skills}"
            )
        self.config = config
        self.graph = graph
        rng = rng if rng is not None else np.random.Generator(np.random.PCG64(0))
        n, h, e = config.n_skills, config.hidden, config.embed_dim
        f_dim = config.feature_dim
        p: dict[str, Tensor] = {
            "answer_embed": ad.init_uniform(rng, (2 * n, e), fan_in=e),
            "skill_embed": ad.init_uniform(rng, (n, e), fan_in=e),
        }
        p.update(mlp_uniform_params(rng, "self_mlp", f_dim, h, h))
        p.update(mlp_uniform_params(rng, "outgo_mlp", 2 * f_dim, h, h))
        p.update(mlp_uniform_params(rng, "income_mlp", 2 * f_dim, h, h))
        p["erase_w"] = ad.init_uniform(rng, (h, h))
        p["erase_b"] = ad.init_zeros((h,))
        p["add_w"] = ad.init_uniform(rng, (h, h))
        p["add_b"] = ad.init_zeros((h,))
        for gate in ("z", "r", "n"):
            p[f"gru_wx_{gate}"] = ad.init_uniform(rng, (h, h))
            p[f"gru_wh_{gate}"] = ad.init_uniform(rng, (h, h))
            p[f"gru_b_{gate}"] = ad.init_zeros((h,))
        p["out_w"] = ad.init_uniform(rng, (h, 1))
        p["out_b"] = ad.init_zeros((n,))
        self._params = p

    def params(self) -> dict[str, Tensor]:
        return self._params

    def config_dict(self) -> dict:
        return asdict(self.config)

    @property
    def task(self) -> str:
        return self.config.task

    # -- per-step pieces ------------------------------------------------------

    def interaction_embedding(self, skills: np.ndarray, outcomes: np.ndarray) -> Tensor:
        """(B, e) answer-embedding rows; graded outcomes blend the two rows."""
        n = self.config.n_skills
        table = self._params["answer_embed"]
        if self.config.task == OBJECTIVE:
            if not np.all(np.isin(outcomes, (0.0, 1.0))):
                raise DataError("objective batch contains outcomes other than 0/1")
            return ad.rows(table, skills + outcomes.astype(np.int64) * n)
        score = outcomes.reshape(-1, 1)
        high = ad.rows(table, skills + n)
        low = ad.rows(table, skills)
        return Tensor(score) * high + Tensor(1.0 - score) * low

    def aggregate(self, state: Tensor, x_emb: Tensor, answered: np.ndarray) -> Tensor:
        """Concatenate per-skill state with the interaction embedding at the
        answered row and the skill embedding elsewhere: (B, N, hidden+e)."""
        batch = state.shape[0]
        n, e = self.config.n_skills, self.config.embed_dim
        onehot = np.zeros((batch, n, 1))
        onehot[np.arange(batch), answered, 0] = 1.0
        marker = Tensor(onehot)
        features = marker * ad.reshape(x_emb, (batch, 1, e)) + (1.0 - marker) * ad.reshape(
            self._params["skill_embed"], (1, n, e)
        )
        return ad.concat([state, features], axis=2)

    def message(self, aggregated: Tensor, answered: np.ndarray) -> Tensor:
        """Self message at the answered skill; graph-weighted neighbor messages
        elsewhere.  Skills with no edge to/from the answered one get zeros."""
        p = self._params
        batch, n, f_dim = aggregated.shape
        flat_idx = np.arange(batch) * n + answered
        answered_rows = ad.rows(ad.reshape(aggregated, (batch * n, f_dim)), flat_idx)
        expanded = ad.broadcast_to(ad.reshape(answered_rows, (batch, 1, f_dim)), (batch, n, f_dim))
        pairs = ad.concat([expanded, aggregated], axis=2)
        outgo = Tensor(self.graph.weights[answered].reshape(batch, n, 1))
        income = Tensor(self.graph.weights[:, answered].T.reshape(batch, n, 1))
        neighbor = outgo * mlp_apply(p, "outgo_mlp", pairs) + income * mlp_apply(
            p, "income_mlp", pairs
        )
        onehot = np.zeros((batch, n, 1))
        onehot[np.arange(batch), answered, 0] = 1.0
        marker = Tensor(onehot)
        return marker * mlp_apply(p, "self_mlp", aggregated) + (1.0 - marker) * neighbor

    def step(self, state: Tensor, skills: np.ndarray, outcomes: np.ndarray) -> Tensor:
        """One interaction: aggregate, message, erase-add, GRU -> next state."""
        p = self._params
        x_emb = self.interaction_embedding(skills, outcomes)
        aggregated = self.aggregate(state, x_emb, skills)
        msg = self.message(aggregated, skills)
        gated = erase_add(msg, p["erase_w"], p["erase_b"], p["add_w"], p["add_b"])
        return gru_update(gated, state, p)

    def predict_heads(self, state: Tensor) -> Tensor:
        """Per-skill sigmoid outputs (B, N) from the per-skill states."""
        p = self._params
        batch, n, _ = state.shape
        logits = ad.reshape(state @ p["out_w"], (batch, n)) + p["out_b"]
        return ad.sigmoid(logits)

    # -- sequence surface ------------------------------------------------------

    def forward(self, batch: PaddedBatch) -> list[Tensor]:
        """(B, N) predictions after each step, targeting the following step."""
        t_len, batch_size = batch.skills.shape
        state = Tensor(np.zeros((batch_size, self.config.n_skills, self.config.hidden)))
        outputs = []
        for t in range(t_len):
            state = self.step(state, batch.skills[t], batch.outcomes[t])
            outputs.append(self.predict_heads(state))
        return outputs

    def loss(self, batch: PaddedBatch) -> Tensor:
        """Mean NLL (objective) or squared error (subjective) over the next
        answered skill's prediction; other skills' outputs never enter."""
        outputs = self.forward(batch)
        return next_step_selector_loss(
            outputs, batch.skills, batch.outcomes, batch.mask, self.config.task
        )

    def predict(self, batch: PaddedBatch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with ad.no_grad():
            outputs = self.forward(batch)
        return gather_next_step_predictions(outputs, batch)
