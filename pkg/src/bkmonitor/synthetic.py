"""Small synthetic factored processes for tests, sweeps and demos."""

from __future__ import annotations

import numpy as np

from .core import FactoredProcess
from .metrics import random_distribution


def flip_process(n: int, delta: float, obs_noise: float | None = None) -> FactoredProcess:
    """``n`` independent binary variables, each flipping with probability ``delta``.

    Every variable is its own cluster. With ``obs_noise`` set, each variable
    gets a response that copies it and is wrong with that probability.
    """
    flip = [[1 - delta, delta], [delta, 1 - delta]]
    names = [f"X{k}" for k in range(n)]
    responses = []
    if obs_noise is not None:
        noisy = [[1 - obs_noise, obs_noise], [obs_noise, 1 - obs_noise]]
        responses = [(f"R{k}", 2, [v], noisy) for k, v in enumerate(names)]
    return FactoredProcess([(v, 2) for v in names], {v: ([v], flip) for v in names},
                           responses=responses)


def random_process(rng: np.random.Generator, clusters, parents, card: int = 2,
                   responses=()) -> FactoredProcess:
    """Random CPTs on a fixed structure.

    ``clusters`` maps cluster name to member variables, ``parents`` maps each
    variable to its previous-slice parents and ``responses`` is a sequence of
    ``(name, parents)`` pairs for binary responses. All rows are strictly
    positive.
    """
    names = [v for vs in clusters.values() for v in vs]
    cpts = {}
    for v in names:
        n_rows = card ** len(parents[v])
        cpts[v] = (parents[v], [random_distribution(rng, card) for _ in range(n_rows)])
    rvars = [(r, 2, ps, [random_distribution(rng, 2) for _ in range(card ** len(ps))])
             for r, ps in responses]
    return FactoredProcess([(v, card) for v in names], cpts, clusters=list(clusters.items()),
                           responses=rvars)


def random_independent_clusters(rng: np.random.Generator) -> FactoredProcess:
    """2-3 clusters of 1-2 binary variables; parents never leave their cluster."""
    n_clusters = int(rng.integers(2, 4))
    clusters, parents = {}, {}
    for c in range(n_clusters):
        vs = [f"V{c}_{k}" for k in range(int(rng.integers(1, 3)))]
        clusters[f"C{c}"] = vs
        for v in vs:
            ps = [u for u in vs if u == v or rng.random() < 0.5]
            parents[v] = ps
    return random_process(rng, clusters, parents)


def random_coupled_pair(rng: np.random.Generator) -> FactoredProcess:
    """Two single-variable binary clusters, each reading both variables."""
    return random_process(rng, {"X": ["X"], "Y": ["Y"]}, {"X": ["X", "Y"], "Y": ["X", "Y"]})
