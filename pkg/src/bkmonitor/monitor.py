"""Exact and factored (cluster-projected) belief-state monitoring.

The factored monitor keeps one marginal per cluster. Each step expands the
product of marginals to a dense joint, propagates and conditions it exactly,
then projects back onto the clusters. Dense expansion keeps the arithmetic
identical to the exact monitor, so with a single cluster the two agree to
the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (Cluster, Distribution, FactoredProcess, JointSizeError, ObservationModel,
                   StateSpace, TransitionModel, make_partition)


class ImpossibleEvidenceError(ValueError):
    """The observed response has zero probability under the prior."""


@dataclass(frozen=True, eq=False)
class FactoredBelief:
    """Product-form belief: one distribution per cluster of ``space``."""

    space: StateSpace
    partition: tuple[Cluster, ...]
    factors: tuple[Distribution, ...]

    def __init__(self, space: StateSpace, partition, factors: Sequence):
        partition = make_partition(space, partition)
        if len(factors) != len(partition):
            raise ValueError(f"{len(factors)} factors for {len(partition)} clusters")
        fs = []
        for c, f in zip(partition, factors):
            sub = space.subspace(c.variables)
            if isinstance(f, Distribution):
                if f.space != sub:
                    raise ValueError(f"factor for {c.name!r} is over {f.space.names}, expected {sub.names}")
            else:
                f = Distribution(sub, f)
            fs.append(f)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "partition", partition)
        object.__setattr__(self, "factors", tuple(fs))

    def __getitem__(self, name: str) -> Distribution:
        for c, f in zip(self.partition, self.factors):
            if c.name == name:
                return f
        raise KeyError(name)


@dataclass(frozen=True, eq=False)
class StepResult:
    prior: Distribution
    posterior: Distribution
    projected: FactoredBelief
    likelihood: float


def propagate(belief: Distribution, t: TransitionModel) -> Distribution:
    """One step of the transition: ``result[j] = sum_i belief[i] T[i, j]``."""
    if belief.space != t.anterior:
        raise ValueError(f"belief is over {belief.space.names}, transition expects {t.anterior.names}")
    return Distribution(t.ulterior, belief.mass @ t.rows)


def condition(prior: Distribution, o: ObservationModel, response: int, return_likelihood: bool = False):
    """Bayes update of ``prior`` on observing joint response index ``response``.

    Returns the posterior, or ``(posterior, likelihood)`` when
    ``return_likelihood`` is set; the likelihood is the normalizer
    ``sum_i prior[i] O[i, response]``.

    Raises
    ------
    ImpossibleEvidenceError
        If the response has zero probability under the prior.
    """
    if prior.space != o.states:
        raise ValueError(f"prior is over {prior.space.names}, observation model expects {o.states.names}")
    if not 0 <= response < o.responses.size:
        raise IndexError(f"response {response} out of range for {o.responses.size} responses")
    unnorm = prior.mass * o.rows[:, response]
    z = float(unnorm.sum())
    if z <= 0.0:
        raise ImpossibleEvidenceError(f"response {response} has zero probability under the prior")
    post = Distribution(prior.space, unnorm / z)
    return (post, z) if return_likelihood else post


def expand(fb: FactoredBelief, cap: int | None = None) -> Distribution:
    """Dense joint equal to the product of the cluster factors."""
    if cap is not None and fb.space.size > cap:
        raise JointSizeError(f"joint has {fb.space.size} states, cap is {cap}")
    if len(fb.factors) == 1 and fb.factors[0].space == fb.space:
        return fb.factors[0]
    t = np.ones(())
    order: list[str] = []
    for c, f in zip(fb.partition, fb.factors):
        t = np.multiply.outer(t, f.tensor())
        order.extend(c.variables)
    if tuple(order) != fb.space.names:
        t = np.transpose(t, [order.index(n) for n in fb.space.names])
    return Distribution(fb.space, t.reshape(-1))


def project(joint: Distribution, clusters) -> FactoredBelief:
    """Replace a joint by its cluster marginals."""
    partition = make_partition(joint.space, clusters)
    if len(partition) == 1 and partition[0].variables == joint.space.names:
        return FactoredBelief(joint.space, partition, [joint])
    return FactoredBelief(joint.space, partition, [joint.marginal(c.variables) for c in partition])


def exact_step(belief: Distribution, model: FactoredProcess, response: int) -> StepResult:
    """Propagate the exact posterior one step and condition on ``response``.

    ``projected`` holds the posterior's marginals on the model's clusters.
    """
    prior = propagate(belief, model.transition)
    post, z = condition(prior, model.observation, response, return_likelihood=True)
    return StepResult(prior, post, project(post, model.clusters), z)


def bk_step(fb: FactoredBelief, model: FactoredProcess, response: int) -> StepResult:
    """Approximate step: expand, propagate, condition, project onto ``fb.partition``."""
    if fb.space != model.space:
        raise ValueError("factored belief and model have different state spaces")
    prior = propagate(expand(fb, model.cap), model.transition)
    post, z = condition(prior, model.observation, response, return_likelihood=True)
    return StepResult(prior, post, project(post, fb.partition), z)
