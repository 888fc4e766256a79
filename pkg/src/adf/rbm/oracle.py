"""Exact quantities for tiny RBMs by enumerating every joint (v, h) state.

These are test oracles: they work from the joint energy
E(v, h) = -b.v - c.h - h.W.v and never call the conditional or
free-energy routines they are used to check.
"""
from __future__ import annotations

import itertools

import numpy as np

from adf.errors import UnsupportedSize
from adf.rbm.core import Rbm

MAX_ENUMERATED_UNITS = 20


def all_binary(n: int) -> np.ndarray:
    """All 2**n binary vectors, row i is the binary expansion of i (MSB first)."""
    return np.array(list(itertools.product((0.0, 1.0), repeat=n))).reshape(2**n, n)


def _check_size(rbm: Rbm):
    total = rbm.n_visible + rbm.n_hidden
    if total > MAX_ENUMERATED_UNITS:
        raise UnsupportedSize(
            f"enumeration limited to {MAX_ENUMERATED_UNITS} units, RBM has {total}"
        )


def joint_energies(rbm: Rbm):
    """Returns (vs, hs, E) with E[a, s] the energy of visible state a and hidden state s."""
    _check_size(rbm)
    vs = all_binary(rbm.n_visible)
    hs = all_binary(rbm.n_hidden)
    energy = np.empty((len(vs), len(hs)))
    for a, v in enumerate(vs):
        for s, h in enumerate(hs):
            energy[a, s] = -(rbm.visible_bias @ v) - (rbm.hidden_bias @ h) - (h @ rbm.weights @ v)
    return vs, hs, energy


def _log_partition(energy: np.ndarray) -> float:
    m = (-energy).max()
    return float(m + np.log(np.exp(-energy - m).sum()))


def exact_joint(rbm: Rbm):
    vs, hs, energy = joint_energies(rbm)
    p = np.exp(-energy - _log_partition(energy))
    return vs, hs, p


def exact_marginal(rbm: Rbm) -> np.ndarray:
    """P(v) for every visible state, indexed like ``all_binary(n_visible)``."""
    _, _, p = exact_joint(rbm)
    return p.sum(axis=1)


def state_index(v) -> int:
    idx = 0
    for bit in np.asarray(v).astype(int):
        idx = 2 * idx + int(bit)
    return idx


def exact_log_likelihood(rbm: Rbm, data) -> float:
    """Mean log P(v) over ``data`` using the enumerated partition function."""
    _check_size(rbm)
    marginal = exact_marginal(rbm)
    rows = np.atleast_2d(np.asarray(data, dtype=np.float64))
    return float(np.mean([np.log(marginal[state_index(v)]) for v in rows]))


def exact_gradient(rbm: Rbm, data):
    """Exact mean log-likelihood gradient as (dW, db, dc).

    Positive phase: E_data[v], E_data[h|v] computed from the enumerated joint
    restricted to each data vector; negative phase: full model expectations.
    """
    vs, hs, p = exact_joint(rbm)
    rows = np.atleast_2d(np.asarray(data, dtype=np.float64))

    pos_w = np.zeros_like(rbm.weights)
    pos_c = np.zeros(rbm.n_hidden)
    for v in rows:
        cond = p[state_index(v)]
        cond = cond / cond.sum()
        eh = cond @ hs
        pos_w += np.outer(eh, v)
        pos_c += eh
    pos_w /= len(rows)
    pos_c /= len(rows)
    pos_b = rows.mean(axis=0)

    neg_w = np.einsum("as,sj,ai->ji", p, hs, vs)
    neg_b = p.sum(axis=1) @ vs
    neg_c = p.sum(axis=0) @ hs
    return pos_w - neg_w, pos_b - neg_b, pos_c - neg_c


def exact_class_scores(rbm: Rbm, series) -> tuple[float, float]:
    """P(class | series) for the two one-hot class segments, by enumeration."""
    vs, _, p = exact_joint(rbm)
    s = np.asarray(series, dtype=np.float64)
    marginal = p.sum(axis=1)
    pe = marginal[state_index(np.concatenate([s, [1.0, 0.0]]))]
    pu = marginal[state_index(np.concatenate([s, [0.0, 1.0]]))]
    return pe / (pe + pu), pu / (pe + pu)
