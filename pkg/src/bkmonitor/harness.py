"""Simulation and side-by-side exact / factored monitoring runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .contraction import analyze, mixing_rate
from .core import Cluster, FactoredProcess, make_partition, trivial_partition
from .metrics import incurred_error, kl_divergence, l1_distance, max_log_ratio
from .monitor import StepResult, bk_step, condition, exact_step, expand, project

# mixing_rate is cubic in the state count; above this the flat rate is skipped
FLAT_GAMMA_LIMIT = 1024


def trial_seeds(seed: int, trials: int) -> list[int]:
    """Independent per-trial seeds split off a master seed."""
    return [int(ss.generate_state(1)[0]) for ss in np.random.SeedSequence(seed).spawn(trials)]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Hidden joint states and joint responses for t = 0..steps."""

    states: np.ndarray
    responses: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int64)
        r = np.asarray(self.responses, dtype=np.int64)
        if s.shape != r.shape or s.ndim != 1 or s.size == 0:
            raise ValueError("states and responses must be equal-length non-empty 1-d sequences")
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "responses", r)

    def __len__(self) -> int:
        return self.states.size

    @property
    def steps(self) -> int:
        return self.states.size - 1


def sample_trajectory(model: FactoredProcess, steps: int, seed: int) -> Trajectory:
    """Sample hidden states and responses from the model, starting from its initial belief."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    rng = np.random.default_rng(seed)
    trans = model.transition.rows
    obs = model.observation.rows
    states = np.empty(steps + 1, dtype=np.int64)
    responses = np.empty(steps + 1, dtype=np.int64)
    s = rng.choice(model.space.size, p=model.initial_distribution().mass)
    for t in range(steps + 1):
        if t:
            s = rng.choice(trans.shape[1], p=trans[s])
        states[t] = s
        responses[t] = rng.choice(obs.shape[1], p=obs[s])
    return Trajectory(states, responses, seed)


@dataclass(frozen=True, eq=False)
class ErrorTrace:
    """Per-step error of the factored monitor against the exact one.

    ``kl`` is ``D[exact || approx]``, ``eps`` the incurred error of the
    projection and ``maxlog`` its max log relative error. ``cluster_l1``
    has one column per cluster with the L1 error of that cluster's marginal.
    """

    clusters: tuple[str, ...]
    kl: np.ndarray
    l1: np.ndarray
    eps: np.ndarray
    maxlog: np.ndarray
    cluster_l1: np.ndarray

    def __len__(self) -> int:
        return self.kl.size

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.kl.size)


def _initial_step(model: FactoredProcess, partition, response: int) -> tuple[StepResult, StepResult]:
    init = model.initial_distribution()
    post, z = condition(init, model.observation, response, return_likelihood=True)
    exact = StepResult(init, post, project(post, model.clusters), z)
    prior = expand(project(init, partition), model.cap)
    post, z = condition(prior, model.observation, response, return_likelihood=True)
    return exact, StepResult(prior, post, project(post, partition), z)


def run_monitoring(model: FactoredProcess, partition, trajectory: Trajectory) -> ErrorTrace:
    """Run exact and factored monitors on the trajectory's responses and record their gap.

    Both monitors start from the model's initial belief; the factored one
    starts from its projection onto ``partition``.
    """
    partition = make_partition(model.space, partition)
    n = len(trajectory)
    kl, l1, eps, maxlog = (np.empty(n) for _ in range(4))
    cl1 = np.empty((n, len(partition)))
    exact = approx = None
    for t, r in enumerate(trajectory.responses):
        r = int(r)
        if t == 0:
            exact, approx = _initial_step(model, partition, r)
        else:
            exact = exact_step(exact.posterior, model, r)
            approx = bk_step(approx.projected, model, r)
        sigma, sigma_hat = exact.posterior, approx.posterior
        sigma_tilde = expand(approx.projected, model.cap)
        kl[t] = kl_divergence(sigma, sigma_tilde)
        l1[t] = l1_distance(sigma, sigma_tilde)
        eps[t] = incurred_error(sigma, sigma_hat, sigma_tilde)
        maxlog[t] = max_log_ratio(sigma_hat, sigma_tilde)
        for k, (c, f) in enumerate(zip(partition, approx.projected.factors)):
            cl1[t, k] = l1_distance(sigma.marginal(c.variables).mass, f.mass)
    return ErrorTrace(tuple(c.name for c in partition), kl, l1, eps, maxlog, cl1)


@dataclass(frozen=True, eq=False)
class ExperimentSummary:
    """Aggregate error over several trials, with the expected-error bounds.

    ``theorem6_bound`` is ``eps_max / gamma_star`` using the compound rate
    from :func:`analyze`; ``flat_bound`` uses the flat joint's mixing rate
    instead, which is usually much larger and so gives a tighter bound.
    """

    trials: int
    steps: int
    mean_kl: float
    max_kl: float
    final_quartile_kl: float
    kl_stderr: float
    eps_max: float
    gamma_star: float
    theorem6_bound: float
    bound_satisfied: bool
    gamma_flat: float | None
    flat_bound: float | None
    flat_bound_satisfied: bool | None
    traces: tuple[ErrorTrace, ...] = field(repr=False, default=())


def _ratio(eps: float, gamma: float) -> float:
    if gamma <= 0.0:
        return math.inf
    return max(eps, 0.0) / gamma


def summarize(model: FactoredProcess, partition, traces: Sequence[ErrorTrace]) -> ExperimentSummary:
    kls = np.stack([tr.kl for tr in traces])
    n_trials, n = kls.shape
    per_trial = kls.mean(axis=1)
    mean_kl = float(per_trial.mean())
    stderr = float(per_trial.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    eps_max = float(max(np.max(tr.maxlog) for tr in traces))
    gamma_star = analyze(model, partition).gamma_star
    bound = _ratio(eps_max, gamma_star)
    gamma_flat = flat_bound = flat_ok = None
    if model.space.size <= FLAT_GAMMA_LIMIT:
        gamma_flat = mixing_rate(model.transition)
        flat_bound = _ratio(eps_max, gamma_flat)
        flat_ok = bool(mean_kl <= flat_bound + 3 * stderr)
    return ExperimentSummary(
        trials=n_trials,
        steps=n - 1,
        mean_kl=mean_kl,
        max_kl=float(kls.max()),
        final_quartile_kl=float(kls[:, (3 * n) // 4:].mean()),
        kl_stderr=stderr,
        eps_max=eps_max,
        gamma_star=gamma_star,
        theorem6_bound=bound,
        bound_satisfied=bool(mean_kl <= bound),
        gamma_flat=gamma_flat,
        flat_bound=flat_bound,
        flat_bound_satisfied=flat_ok,
        traces=tuple(traces),
    )


def run_experiment(model: FactoredProcess, partition, steps: int, trials: int, seed: int) -> ExperimentSummary:
    """Monitor ``trials`` independent sampled trajectories and aggregate the error."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    trajectories = [sample_trajectory(model, steps, s) for s in trial_seeds(seed, trials)]
    return summarize(model, partition, [run_monitoring(model, partition, tr) for tr in trajectories])


@dataclass(frozen=True, eq=False)
class PartitionComparison:
    labels: tuple[str, ...]
    partitions: tuple[tuple[Cluster, ...], ...]
    summaries: tuple[ExperimentSummary, ...]

    @property
    def by_kl(self) -> list[str]:
        """Labels from lowest to highest mean KL."""
        order = sorted(range(len(self.labels)), key=lambda k: (self.summaries[k].mean_kl, k))
        return [self.labels[k] for k in order]

    @property
    def by_gamma_star(self) -> list[str]:
        """Labels from largest to smallest predicted compound rate."""
        order = sorted(range(len(self.labels)), key=lambda k: (-self.summaries[k].gamma_star, k))
        return [self.labels[k] for k in order]

    def __str__(self) -> str:
        lines = [f"{'partition':<24} {'mean_kl':>12} {'max_kl':>12} {'gamma_star':>12}"]
        for label, s in zip(self.labels, self.summaries):
            lines.append(f"{label:<24} {s.mean_kl:12.4e} {s.max_kl:12.4e} {s.gamma_star:12.4e}")
        lines.append("by mean KL:     " + " < ".join(self.by_kl))
        lines.append("by gamma_star:  " + " > ".join(self.by_gamma_star))
        return "\n".join(lines)


def partition_label(partition: Sequence[Cluster]) -> str:
    return "|".join(f"{c.name}:{','.join(c.variables)}" for c in partition)


def compare_partitions(model: FactoredProcess, partitions, steps: int, trials: int, seed: int,
                       labels: Sequence[str] | None = None) -> PartitionComparison:
    """Run every partition on the same sampled trajectories."""
    if len(partitions) < 2:
        raise ValueError("need at least two partitions to compare")
    parts = tuple(make_partition(model.space, p) for p in partitions)
    labels = tuple(labels) if labels is not None else tuple(partition_label(p) for p in parts)
    trajectories = [sample_trajectory(model, steps, s) for s in trial_seeds(seed, trials)]
    summaries = tuple(summarize(model, p, [run_monitoring(model, p, tr) for tr in trajectories])
                      for p in parts)
    return PartitionComparison(labels, parts, summaries)


def oracle_run(model: FactoredProcess, trajectory: Trajectory) -> ErrorTrace:
    """Factored monitor with the single-cluster partition; every error is zero."""
    return run_monitoring(model, trivial_partition(model.space), trajectory)
