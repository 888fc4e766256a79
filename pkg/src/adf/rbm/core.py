"""Binary restricted Boltzmann machine trained with contrastive divergence.

All visible and hidden units take values in {0, 1}. Binary vectors are
represented as float64 arrays holding 0.0/1.0 so they feed straight into the
matrix products. Every stochastic operation takes a caller-owned
``numpy.random.Generator``; training derives its own generator from the
model seed so that ``train`` is reproducible from ``(seed, data, cfg)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from adf.errors import InvalidArgument

INIT_WEIGHT_STD = 0.01
# CD arithmetic runs in single precision; parameters are stored as float64
TRAIN_DTYPE = np.float32


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5000
    learning_rate: float = 0.1
    cd_k: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidArgument(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise InvalidArgument(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.cd_k < 1:
            raise InvalidArgument(f"cd_k must be >= 1, got {self.cd_k}")


@dataclass(frozen=True, eq=False)
class Rbm:
    """Parameters of one RBM. Arrays are frozen (read-only) on construction."""

    weights: np.ndarray  # (n_hidden, n_visible)
    visible_bias: np.ndarray
    hidden_bias: np.ndarray
    seed: int = 0

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        b = np.array(self.visible_bias, dtype=np.float64)
        c = np.array(self.hidden_bias, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[1],) or c.shape != (w.shape[0],):
            raise InvalidArgument(
                f"inconsistent shapes: weights {w.shape}, visible_bias {b.shape}, "
                f"hidden_bias {c.shape}"
            )
        if w.size == 0:
            raise InvalidArgument("RBM layers must be non-empty")
        for name, arr in (("weights", w), ("visible_bias", b), ("hidden_bias", c)):
            if not np.all(np.isfinite(arr)):
                raise InvalidArgument(f"{name} contains non-finite values")
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "visible_bias", b)
        object.__setattr__(self, "hidden_bias", c)
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)

    @property
    def n_visible(self) -> int:
        return self.weights.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Rbm):
            return NotImplemented
        return (
            self.seed == other.seed
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.visible_bias, other.visible_bias)
            and np.array_equal(self.hidden_bias, other.hidden_bias)
        )

    __hash__ = None


def default_hidden_units(n_visible: int) -> int:
    return max(8, math.ceil(n_visible / 4))


def new_rbm(n_visible: int, n_hidden: int, seed: int) -> Rbm:
    """Fresh RBM: weights ~ N(0, 0.01^2) from a generator seeded by ``seed``, zero biases."""
    if n_visible < 1 or n_hidden < 1:
        raise InvalidArgument(f"layer sizes must be >= 1, got ({n_visible}, {n_hidden})")
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    weights = rng.normal(0.0, INIT_WEIGHT_STD, size=(n_hidden, n_visible))
    return Rbm(weights, np.zeros(n_visible), np.zeros(n_hidden), seed)


def sigmoid(x):
    # tanh form avoids overflow warnings for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _as_units(x, size: int, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2) or arr.shape[-1] != size:
        raise InvalidArgument(f"{what} must have trailing length {size}, got shape {arr.shape}")
    return arr


def hidden_probabilities(rbm: Rbm, v) -> np.ndarray:
    v = _as_units(v, rbm.n_visible, "visible vector")
    return sigmoid(v @ rbm.weights.T + rbm.hidden_bias)


def visible_probabilities(rbm: Rbm, h) -> np.ndarray:
    h = _as_units(h, rbm.n_hidden, "hidden vector")
    return sigmoid(h @ rbm.weights + rbm.visible_bias)


def _bernoulli(p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return (rng.random(p.shape) < p).astype(np.float64)


def gibbs_step(rbm: Rbm, v, rng: np.random.Generator) -> np.ndarray:
    """One v -> h -> v' sweep. Accepts a single vector or a batch of rows."""
    h = _bernoulli(hidden_probabilities(rbm, v), rng)
    return _bernoulli(visible_probabilities(rbm, h), rng)


def free_energy(rbm: Rbm, v):
    """F(v) = -b.v - sum_j softplus(c_j + W_j.v); scalar for a vector, array for a batch."""
    v = _as_units(v, rbm.n_visible, "visible vector")
    pre = v @ rbm.weights.T + rbm.hidden_bias
    f = -(v @ rbm.visible_bias) - np.logaddexp(0.0, pre).sum(axis=-1)
    return float(f) if np.ndim(f) == 0 else f


def reconstruct(rbm: Rbm, v) -> np.ndarray:
    """Mean-field one-step reconstruction probabilities p(v' | E[h | v])."""
    return visible_probabilities(rbm, hidden_probabilities(rbm, v))


def _check_data(rbm: Rbm, data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.size == 0 or arr.shape[0] == 0:
        raise InvalidArgument("training data is empty")
    if arr.ndim != 2 or arr.shape[1] != rbm.n_visible:
        raise InvalidArgument(
            f"data vectors must have length {rbm.n_visible}, got shape {arr.shape}"
        )
    return arr


def _sigmoid_(x):
    """In-place logistic."""
    x *= 0.5
    np.tanh(x, out=x)
    x += 1.0
    x *= 0.5
    return x


class _Trainer:
    """Mutable float32 working copy of an RBM for the CD inner loop.

    Weights are held transposed, (n_visible, n_hidden), which keeps both
    products of the loop on contiguous operands.
    """

    def __init__(self, rbm: Rbm, data: np.ndarray):
        self.wt = rbm.weights.T.astype(TRAIN_DTYPE)
        self.b = rbm.visible_bias.astype(TRAIN_DTYPE)
        self.c = rbm.hidden_bias.astype(TRAIN_DTYPE)
        self.data = data.astype(TRAIN_DTYPE)
        self.data_sum = self.data.sum(axis=0)

    def step(self, k: int, lr: float, rng: np.random.Generator) -> float:
        wt, b, c, data = self.wt, self.b, self.c, self.data
        n = data.shape[0]
        ph0 = _sigmoid_(data @ wt + c)
        recon = _sigmoid_(ph0 @ wt.T + b)
        h = (rng.random(ph0.shape, dtype=TRAIN_DTYPE) < ph0).astype(TRAIN_DTYPE)
        for i in range(k):
            pv = _sigmoid_(h @ wt.T + b)
            v = (rng.random(pv.shape, dtype=TRAIN_DTYPE) < pv).astype(TRAIN_DTYPE)
            ph = _sigmoid_(v @ wt + c)
            if i < k - 1:
                h = (rng.random(ph.shape, dtype=TRAIN_DTYPE) < ph).astype(TRAIN_DTYPE)
        # negative statistics: sampled v_k with Rao-Blackwellised p(h | v_k)
        scale = TRAIN_DTYPE(lr / n)
        wt += scale * (data.T @ ph0 - v.T @ ph)
        b += scale * (self.data_sum - v.sum(axis=0))
        c += scale * (ph0.sum(axis=0) - ph.sum(axis=0))
        recon -= data
        return float(np.mean(recon * recon))

    def result(self, seed: int) -> Rbm:
        return Rbm(self.wt.T.astype(np.float64), self.b.astype(np.float64), self.c.astype(np.float64), seed)


def cd_update(rbm: Rbm, data, cfg: TrainConfig, rng: np.random.Generator):
    """One full-batch CD-k update. Returns ``(new_rbm, reconstruction_error)``.

    Reconstruction error is the mean squared difference between the data and
    its mean-field one-step reconstruction under the pre-update parameters.
    """
    trainer = _Trainer(rbm, _check_data(rbm, data))
    err = trainer.step(cfg.cd_k, cfg.learning_rate, rng)
    return trainer.result(rbm.seed), err


def training_rng(rbm: Rbm) -> np.random.Generator:
    # distinct stream from the initialisation generator in new_rbm
    return np.random.default_rng([rbm.seed, 0x7EA1])


def train(rbm: Rbm, data, cfg: TrainConfig):
    """Run ``cfg.epochs`` full-batch CD updates; returns ``(rbm, error_trace)``."""
    trainer = _Trainer(rbm, _check_data(rbm, data))
    rng = training_rng(rbm)
    trace = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        trace[epoch] = trainer.step(cfg.cd_k, cfg.learning_rate, rng)
    return trainer.result(rbm.seed), trace


def class_rows(series) -> np.ndarray:
    """The two class-augmented inputs ``[series; 1, 0]`` (expected) and ``[series; 0, 1]``."""
    s = np.asarray(series, dtype=np.float64)
    rows = np.zeros((2, s.size + 2))
    rows[:, : s.size] = s
    rows[0, -2] = 1.0
    rows[1, -1] = 1.0
    return rows


def classify(rbm: Rbm, series) -> tuple[float, float]:
    """Normalised (expected, unexpected) scores from the two clamped class units.

    score_c is proportional to exp(-F([series; onehot(c)])); the pair sums to one.
    """
    s = np.asarray(series, dtype=np.float64)
    if s.ndim != 1 or s.size != rbm.n_visible - 2:
        raise InvalidArgument(
            f"series length must be n_visible - 2 = {rbm.n_visible - 2}, got shape {s.shape}"
        )
    neg_f = -free_energy(rbm, class_rows(s))
    neg_f -= neg_f.max()
    p = np.exp(neg_f)
    p /= p.sum()
    return float(p[0]), float(p[1])


def synthesize_sequence(
    rbm: Rbm,
    partial: Sequence[Optional[int]],
    n_gibbs: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Complete ``partial`` by clamped Gibbs sampling.

    ``None`` marks an unknown slot; known slots (0/1) are held fixed while the
    unknown ones are resampled for ``n_gibbs`` sweeps.
    """
    if len(partial) != rbm.n_visible:
        raise InvalidArgument(f"partial must have length {rbm.n_visible}, got {len(partial)}")
    known = np.array([x is not None for x in partial])
    if not known.any():
        raise InvalidArgument("at least one slot must be known")
    clamp = np.array([0.0 if x is None else float(x) for x in partial])
    if np.any((clamp[known] != 0.0) & (clamp[known] != 1.0)):
        raise InvalidArgument("known slots must be 0 or 1")
    if known.all():
        return clamp
    unknown = ~known
    v = clamp.copy()
    v[unknown] = (rng.random(int(unknown.sum())) < 0.5).astype(np.float64)
    for _ in range(n_gibbs):
        v = gibbs_step(rbm, v, rng)
        v[known] = clamp[known]
    return v
