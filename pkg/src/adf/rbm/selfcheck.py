"""Self-test comparing the RBM routines against exact enumeration on tiny models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adf.rbm import core
from adf.rbm import oracle


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


def tiny_rbm(seed: int, n_visible=3, n_hidden=2, scale=1.0) -> core.Rbm:
    rng = np.random.default_rng(seed)
    return core.Rbm(
        rng.normal(0, scale, (n_hidden, n_visible)),
        rng.normal(0, scale, n_visible),
        rng.normal(0, scale, n_hidden),
        seed,
    )


def check_free_energy(ref: core.Rbm, impl: core.Rbm) -> CheckResult:
    vs = oracle.all_binary(ref.n_visible)
    neg_f = -core.free_energy(impl, vs)
    q = np.exp(neg_f - neg_f.max())
    q /= q.sum()
    return CheckResult("free-energy marginal", float(np.abs(q - oracle.exact_marginal(ref)).max()), 1e-10)


def check_gradient(ref: core.Rbm, impl: core.Rbm, seed: int, k=10_000, copies=1000) -> CheckResult:
    vs = oracle.all_binary(ref.n_visible)
    data = np.repeat(vs[[1, 3, 5, 6, 7]], copies, axis=0)
    cfg = core.TrainConfig(epochs=1, learning_rate=1.0, cd_k=k)
    updated, _ = core.cd_update(impl, data, cfg, np.random.default_rng(seed))
    gw, gb, gc = oracle.exact_gradient(ref, data)
    dev = max(
        np.abs(updated.weights - impl.weights - gw).max(),
        np.abs(updated.visible_bias - impl.visible_bias - gb).max(),
        np.abs(updated.hidden_bias - impl.hidden_bias - gc).max(),
    )
    return CheckResult(f"CD-{k} gradient", float(dev), 0.05)


def gibbs_histogram(rbm: core.Rbm, steps: int, rng: np.random.Generator) -> np.ndarray:
    counts = np.zeros(2**rbm.n_visible)
    weights = 2 ** np.arange(rbm.n_visible - 1, -1, -1)
    v = np.zeros(rbm.n_visible)
    for _ in range(steps):
        v = core.gibbs_step(rbm, v, rng)
        counts[int(v @ weights)] += 1
    return counts / steps


def check_gibbs(ref: core.Rbm, impl: core.Rbm, seed: int, steps=200_000) -> CheckResult:
    freq = gibbs_histogram(impl, steps, np.random.default_rng(seed))
    tv = 0.5 * np.abs(freq - oracle.exact_marginal(ref)).sum()
    return CheckResult(f"Gibbs chain TV ({steps} steps)", float(tv), 0.02)


def check_classify(ref: core.Rbm, impl: core.Rbm) -> CheckResult:
    dev = 0.0
    for series in oracle.all_binary(ref.n_visible - 2):
        got = core.classify(impl, series)
        want = oracle.exact_class_scores(ref, series)
        dev = max(dev, abs(got[0] - want[0]), abs(got[1] - want[1]))
    return CheckResult("class scores", float(dev), 1e-10)


def run_oracle_suite(seed: int = 0, corrupt: bool = False) -> list[CheckResult]:
    """All checks; with ``corrupt`` the implementation side gets perturbed weights."""
    ref = tiny_rbm(seed)
    impl = ref
    if corrupt:
        impl = core.Rbm(ref.weights + 0.5, ref.visible_bias, ref.hidden_bias, ref.seed)
    ref5 = tiny_rbm(seed + 1, n_visible=5, n_hidden=3)
    impl5 = ref5 if not corrupt else core.Rbm(ref5.weights + 0.5, ref5.visible_bias, ref5.hidden_bias)
    return [
        check_free_energy(ref, impl),
        check_gradient(ref, impl, seed),
        check_gibbs(ref, impl, seed),
        check_classify(ref5, impl5),
    ]
