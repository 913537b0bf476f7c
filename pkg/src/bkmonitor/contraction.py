"""Mixing rates, contraction decompositions and bound checks.

The mixing rate of a stochastic matrix is the smallest overlap between any
two of its rows, ``min_{i1,i2} sum_j min(Q[i1,j], Q[i2,j])``. Propagating
two distributions through ``Q`` shrinks their relative entropy by at least
a factor ``1 - mixing_rate(Q)``; the ``verify_*`` functions check that and
the related factored-process bounds on concrete instances, and the
``sweep_*`` drivers run them over seeded random instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import (Distribution, FactoredProcess, ObservationModel, TransitionModel,
                   cluster_transition, dependency_graph, make_partition)
from .metrics import kl_divergence, random_distribution
from .monitor import FactoredBelief, expand

BOUND_TOL = 1e-9


def _rows(q) -> np.ndarray:
    return q.rows if isinstance(q, (TransitionModel, ObservationModel)) else np.asarray(q, dtype=float)


def mixing_rate(q) -> float:
    """Minimal row overlap of a (possibly rectangular) stochastic matrix.

    Equals 1 when there is a single row or all rows are identical.
    """
    rows = _rows(q)
    n = rows.shape[0]
    best = 1.0
    for i in range(n - 1):
        overlap = np.minimum(rows[i], rows[i + 1:]).sum(axis=1)
        best = min(best, float(overlap.min()))
    return min(max(best, 0.0), 1.0)


def doeblin_coefficient(q) -> float:
    """``sum_j min_i Q[i, j]``, a lower bound on :func:`mixing_rate`."""
    return float(_rows(q).min(axis=0).sum())


def cluster_mixing_rate(model: FactoredProcess, cluster) -> float:
    """Mixing rate of one cluster's transition from its parents' joint values."""
    return mixing_rate(cluster_transition(model, cluster))


def compound_mixing_bound(gamma_min: float, r: int, q: int) -> float:
    """Contraction lower bound ``(gamma_min / r) ** q`` for interacting clusters."""
    if not 0.0 <= gamma_min <= 1.0:
        raise ValueError(f"gamma_min must lie in [0, 1], got {gamma_min}")
    if r < 1 or q < 1:
        raise ValueError(f"r and q must be >= 1, got r={r}, q={q}")
    return (gamma_min / r) ** q


@dataclass(frozen=True)
class MixingReport:
    gammas: tuple[float, ...]
    r: int
    q: int
    clusters: tuple[str, ...] = ()
    gamma_min: float = field(init=False)
    gamma_star: float = field(init=False)

    def __post_init__(self):
        if not self.gammas:
            raise ValueError("at least one cluster rate is required")
        g = min(self.gammas)
        object.__setattr__(self, "gamma_min", g)
        object.__setattr__(self, "gamma_star", compound_mixing_bound(g, self.r, self.q))

    @classmethod
    def from_rates(cls, gammas, r: int, q: int) -> MixingReport:
        return cls(tuple(float(g) for g in gammas), int(r), int(q))

    def __str__(self) -> str:
        names = self.clusters or tuple(f"C{k}" for k in range(len(self.gammas)))
        lines = [f"gamma[{n}] = {g:.6g}" for n, g in zip(names, self.gammas)]
        lines += [f"gamma_min = {self.gamma_min:.6g}", f"r = {self.r}", f"q = {self.q}",
                  f"gamma_star = {self.gamma_star:.6g}"]
        return "\n".join(lines)


def analyze(model: FactoredProcess, partition=None) -> MixingReport:
    """Per-cluster mixing rates, dependency degrees and the compound bound.

    ``partition`` defaults to the model's own clusters. ``r`` and ``q`` count
    a cluster's dependence on itself, and are floored at 1.
    """
    clusters = model.clusters if partition is None else make_partition(model.space, partition)
    graph = dependency_graph(model, clusters)
    gammas = tuple(cluster_mixing_rate(model, c) for c in clusters)
    return MixingReport(gammas, max(graph.r, 1), max(graph.q, 1), tuple(c.name for c in clusters))


@dataclass(frozen=True, eq=False)
class ContractionDecomposition:
    gamma: float
    q_gamma: np.ndarray
    q_delta: np.ndarray


def contraction_decompose(q, gamma: float) -> ContractionDecomposition:
    """Split ``Q = Q_gamma + Q_delta`` with every row of ``Q_gamma`` identical and summing to ``gamma``.

    Column ``j`` of ``Q_gamma`` is ``min_i Q[i, j]`` scaled by
    ``gamma / doeblin_coefficient(Q)``. Because the rows agree, any two
    anterior distributions push the same mass through ``Q_gamma``. This
    construction only reaches ``gamma`` up to the Doeblin coefficient,
    which can be smaller than the mixing rate.

    Raises
    ------
    ValueError
        If ``gamma`` is not in ``(0, doeblin_coefficient(Q)]``.
    """
    rows = _rows(q)
    col_min = rows.min(axis=0)
    g_d = float(col_min.sum())
    if g_d <= 0.0:
        raise ValueError("matrix has no common column mass; no decomposition for positive gamma")
    if not 0.0 < gamma <= g_d + 1e-12:
        raise ValueError(f"gamma must lie in (0, {g_d!r}], got {gamma!r}")
    scale = min(gamma / g_d, 1.0)
    q_gamma = np.tile(col_min * scale, (rows.shape[0], 1))
    return ContractionDecomposition(float(gamma), q_gamma, rows - q_gamma)


class BoundCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def verify_theorem3(q, phi, psi) -> BoundCheck:
    """Check ``D[phi Q || psi Q] <= (1 - mixing_rate(Q)) D[phi || psi]``.

    An infinite input divergence makes the check pass vacuously.
    """
    rows = _rows(q)
    p, s = np.asarray(phi, dtype=float), np.asarray(psi, dtype=float)
    lhs = kl_divergence(p @ rows, s @ rows)
    d = kl_divergence(p, s)
    if math.isinf(d):
        return BoundCheck(lhs, math.inf, True)
    rhs = (1.0 - mixing_rate(rows)) * d
    return BoundCheck(lhs, rhs, bool(lhs <= rhs + BOUND_TOL))


def verify_theorem45(model: FactoredProcess, phi: Distribution, psi_factored: FactoredBelief) -> BoundCheck:
    """Check the factored contraction bound for a product-form ``psi``.

    The clusters of ``psi_factored`` are taken as the subprocesses. When no
    cluster reads another, the rate is the smallest cluster mixing rate;
    otherwise it is the compound bound ``(gamma_min / r) ** q``. Both
    distributions are pushed through the flat joint transition.
    """
    if not isinstance(psi_factored, FactoredBelief):
        raise TypeError("psi must be a FactoredBelief (product form over clusters)")
    if psi_factored.space != model.space or phi.space != model.space:
        raise ValueError("phi, psi and model must share a state space")
    report = analyze(model, psi_factored.partition)
    graph = dependency_graph(model, psi_factored.partition)
    rate = report.gamma_min if graph.self_only else report.gamma_star
    psi = expand(psi_factored, model.cap)
    rows = model.transition.rows
    lhs = kl_divergence(phi.mass @ rows, psi.mass @ rows)
    d = kl_divergence(phi, psi)
    if math.isinf(d):
        return BoundCheck(lhs, math.inf, True)
    rhs = (1.0 - rate) * d
    return BoundCheck(lhs, rhs, bool(lhs <= rhs + BOUND_TOL))


class ConditioningCheck(NamedTuple):
    expected_post_kl: float
    prior_kl: float
    holds: bool


def verify_fact1(o, sigma, sigma_hat) -> ConditioningCheck:
    """Check that conditioning on a response cannot increase divergence on average.

    The average is over responses drawn from ``sigma``'s response prior
    ``rho = sigma O``; responses with ``rho[h] = 0`` contribute nothing.
    """
    rows = _rows(o)
    s, sh = np.asarray(sigma, dtype=float), np.asarray(sigma_hat, dtype=float)
    if s.shape != sh.shape or s.shape[0] != rows.shape[0]:
        raise ValueError("sigma, sigma_hat and the observation model disagree on the state count")
    rho = s @ rows
    rho_hat = sh @ rows
    total = 0.0
    for h in np.flatnonzero(rho > 0):
        if rho_hat[h] <= 0:
            total = math.inf
            break
        total += rho[h] * kl_divergence(s * rows[:, h] / rho[h], sh * rows[:, h] / rho_hat[h])
    prior = kl_divergence(s, sh)
    return ConditioningCheck(float(total), prior, bool(total <= prior + BOUND_TOL))


# ---------------------------------------------------------------------------
# randomized sweeps


@dataclass
class SweepResult:
    name: str
    trials: int
    failures: int = 0
    worst_slack: float = math.inf  # min over trials of rhs - lhs

    @property
    def holds(self) -> bool:
        return self.failures == 0

    def record(self, check) -> None:
        lhs, rhs, ok = check
        self.failures += not ok
        if math.isfinite(rhs):
            self.worst_slack = min(self.worst_slack, rhs - lhs)

    def __str__(self) -> str:
        status = "PASS" if self.holds else "FAIL"
        return (f"{status} {self.name}: {self.trials - self.failures}/{self.trials} trials hold, "
                f"worst slack {self.worst_slack:.3e}")


def _trial_rngs(seed: int, trials: int):
    for ss in np.random.SeedSequence(seed).spawn(trials):
        yield np.random.default_rng(ss)


def random_stochastic(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    return np.stack([random_distribution(rng, m) for _ in range(n)])


def sweep_theorem3(trials: int = 1000, seed: int = 0, max_states: int = 6) -> SweepResult:
    res = SweepResult("theorem3", trials)
    for rng in _trial_rngs(seed, trials):
        n, m = (int(k) for k in rng.integers(2, max_states + 1, size=2))
        q = random_stochastic(rng, n, m)
        res.record(verify_theorem3(q, random_distribution(rng, n), random_distribution(rng, n)))
    return res


def sweep_fact1(trials: int = 1000, seed: int = 0, max_states: int = 6, max_responses: int = 4) -> SweepResult:
    res = SweepResult("fact1", trials)
    for rng in _trial_rngs(seed, trials):
        n = int(rng.integers(2, max_states + 1))
        m = int(rng.integers(2, max_responses + 1))
        o = random_stochastic(rng, n, m)
        res.record(verify_fact1(o, random_distribution(rng, n), random_distribution(rng, n)))
    return res


def sweep_theorem45(trials: int = 500, seed: int = 0, coupled: bool = False) -> SweepResult:
    """Random factored instances with product-form ``psi``.

    ``coupled=False`` draws 2-3 clusters of one or two binary variables whose
    CPT parents stay inside their own cluster. ``coupled=True`` draws two
    binary single-variable clusters that each read both variables.
    """
    from .synthetic import random_coupled_pair, random_independent_clusters

    res = SweepResult("theorem5" if coupled else "theorem4", trials)
    for rng in _trial_rngs(seed, trials):
        model = random_coupled_pair(rng) if coupled else random_independent_clusters(rng)
        phi = Distribution(model.space, random_distribution(rng, model.space.size))
        psi = FactoredBelief(model.space, model.clusters,
                             [random_distribution(rng, model.space.subspace(c.variables).size)
                              for c in model.clusters])
        res.record(verify_theorem45(model, phi, psi))
    return res
