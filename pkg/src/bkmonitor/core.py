"""State spaces, distributions, stochastic matrices and factored process models.

Joint states are indexed lexicographically with the last-listed variable
varying fastest, which is numpy's C order. Every object here is immutable
once built; the arrays they hold are marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, NamedTuple, Sequence

import numpy as np

STOCHASTIC_TOL = 1e-9
DEFAULT_JOINT_CAP = 2 ** 20


class JointSizeError(ValueError):
    """A joint state (or response) space exceeds the configured size cap."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_stochastic(rows: np.ndarray, what: str, tol: float = STOCHASTIC_TOL) -> np.ndarray:
    """Validate row-stochasticity of ``rows`` and return a renormalized copy."""
    if rows.ndim != 2:
        raise ValueError(f"{what}: expected a 2-d array, got shape {rows.shape}")
    if not np.all(np.isfinite(rows)):
        raise ValueError(f"{what}: entries must be finite")
    if np.any(rows < 0):
        i, j = np.argwhere(rows < 0)[0]
        raise ValueError(f"{what}: negative entry {rows[i, j]} at row {i}, column {j}")
    sums = rows.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        raise ValueError(f"{what}: row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
    return rows / sums[:, None]


@dataclass(frozen=True)
class StateSpace:
    """Ordered finite variables whose joint values index a flat state vector.

    Parameters
    ----------
    variables : sequence of (name, cardinality)
        Cardinalities must be at least 2. An empty sequence is allowed and
        describes a space with exactly one (empty) joint value.
    """

    variables: tuple[tuple[str, int], ...]

    def __init__(self, variables: Sequence[tuple[str, int]] = ()):
        vs = tuple((str(n), int(c)) for n, c in variables)
        names = [n for n, _ in vs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        for n, c in vs:
            if c < 2:
                raise ValueError(f"variable {n!r} has cardinality {c}; need >= 2")
        object.__setattr__(self, "variables", vs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.variables)

    @property
    def size(self) -> int:
        return int(np.prod(self.cards, dtype=np.int64))

    def __len__(self) -> int:
        return self.size

    def position(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def subspace(self, names: Sequence[str]) -> StateSpace:
        return StateSpace([(n, self.cards[self.position(n)]) for n in names])

    def index(self, assignment: Sequence[int]) -> int:
        """Joint index of a full assignment (one value per variable)."""
        if len(assignment) != len(self.variables):
            raise ValueError("assignment length does not match the number of variables")
        if not self.variables:
            return 0
        return int(np.ravel_multi_index(tuple(int(a) for a in assignment), self.cards))

    def assignment(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise IndexError(f"joint index {index} out of range for size {self.size}")
        if not self.variables:
            return ()
        return tuple(int(a) for a in np.unravel_index(index, self.cards))

    def assignments(self) -> np.ndarray:
        """All joint assignments as a ``(size, n_variables)`` integer array."""
        if not self.variables:
            return np.zeros((1, 0), dtype=np.intp)
        return np.indices(self.cards).reshape(len(self.cards), -1).T


@dataclass(frozen=True, eq=False)
class Distribution:
    """A probability vector over the joint values of a state space."""

    space: StateSpace
    mass: np.ndarray

    def __init__(self, space: StateSpace, mass, tol: float = STOCHASTIC_TOL):
        m = np.asarray(mass, dtype=float).reshape(-1)
        if m.size != space.size:
            raise ValueError(f"mass has {m.size} entries, space has {space.size} states")
        m = _check_stochastic(m[None, :], "distribution", tol)[0]
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "mass", _frozen(m))

    @classmethod
    def uniform(cls, space: StateSpace) -> Distribution:
        return cls(space, np.full(space.size, 1.0 / space.size))

    @classmethod
    def point(cls, space: StateSpace, index: int) -> Distribution:
        m = np.zeros(space.size)
        m[index] = 1.0
        return cls(space, m)

    def __len__(self) -> int:
        return self.mass.size

    def __array__(self, dtype=None, copy=None):
        return self.mass if dtype is None else self.mass.astype(dtype)

    def __repr__(self) -> str:
        return f"Distribution({list(self.space.names)}, {np.array2string(self.mass, precision=6)})"

    def tensor(self) -> np.ndarray:
        """The mass reshaped to one axis per variable."""
        return self.mass.reshape(self.space.cards)

    def marginal(self, names: Sequence[str]) -> Distribution:
        """Exact marginal onto ``names``, with axes in the order given."""
        axes = [self.space.position(n) for n in names]
        drop = tuple(i for i in range(len(self.space.variables)) if i not in axes)
        t = self.tensor().sum(axis=drop)
        kept = sorted(axes)
        t = np.transpose(t, [kept.index(a) for a in axes])
        return Distribution(self.space.subspace(names), t.reshape(-1))


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Row-stochastic matrix from an anterior to an ulterior state space."""

    anterior: StateSpace
    ulterior: StateSpace
    rows: np.ndarray

    def __init__(self, anterior: StateSpace, ulterior: StateSpace, rows):
        r = np.asarray(rows, dtype=float)
        if r.shape != (anterior.size, ulterior.size):
            raise ValueError(f"rows have shape {r.shape}, expected {(anterior.size, ulterior.size)}")
        object.__setattr__(self, "anterior", anterior)
        object.__setattr__(self, "ulterior", ulterior)
        object.__setattr__(self, "rows", _frozen(_check_stochastic(r, "transition")))

    @classmethod
    def square(cls, space: StateSpace, rows) -> TransitionModel:
        return cls(space, space, rows)

    @classmethod
    def from_matrix(cls, rows, name: str = "S") -> TransitionModel:
        """Wrap a bare matrix, giving each side a single anonymous variable."""
        r = np.asarray(rows, dtype=float)
        return cls(_flat_space(name, r.shape[0]), _flat_space(name + "'", r.shape[1]), r)


@dataclass(frozen=True, eq=False)
class ObservationModel:
    """Row-stochastic matrix from states to a joint response alphabet."""

    states: StateSpace
    responses: StateSpace
    rows: np.ndarray

    def __init__(self, states: StateSpace, responses: StateSpace, rows):
        r = np.asarray(rows, dtype=float)
        if r.shape != (states.size, responses.size):
            raise ValueError(f"rows have shape {r.shape}, expected {(states.size, responses.size)}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "responses", responses)
        object.__setattr__(self, "rows", _frozen(_check_stochastic(r, "observation")))

    @classmethod
    def from_matrix(cls, rows, states: StateSpace | None = None) -> ObservationModel:
        r = np.asarray(rows, dtype=float)
        states = states if states is not None else _flat_space("S", r.shape[0])
        return cls(states, _flat_space("R", r.shape[1]), r)


def _flat_space(name: str, n: int) -> StateSpace:
    # a one-element space has no variables (cardinalities are >= 2)
    return StateSpace([] if n == 1 else [(name, n)])


class Cluster(NamedTuple):
    name: str
    variables: tuple[str, ...]


def make_partition(space: StateSpace, clusters) -> tuple[Cluster, ...]:
    """Normalize and validate a partition of ``space``'s variables.

    ``clusters`` may be a sequence of :class:`Cluster`, of ``(name, vars)``
    pairs, or of bare variable-name lists (names are then generated).
    """
    out = []
    for k, c in enumerate(clusters):
        if isinstance(c, tuple) and len(c) == 2 and isinstance(c[0], str) and not isinstance(c[1], str):
            name, vs = c
        else:
            name, vs = f"C{k}", c
        out.append(Cluster(str(name), tuple(str(v) for v in vs)))
    seen: dict[str, str] = {}
    for c in out:
        if not c.variables:
            raise ValueError(f"cluster {c.name!r} is empty")
        for v in c.variables:
            if v not in space.names:
                raise ValueError(f"cluster {c.name!r} names unknown variable {v!r}")
            if v in seen:
                raise ValueError(f"variable {v!r} appears in clusters {seen[v]!r} and {c.name!r}")
            seen[v] = c.name
    missing = [v for v in space.names if v not in seen]
    if missing:
        raise ValueError(f"clusters do not cover variables {missing}")
    if len({c.name for c in out}) != len(out):
        raise ValueError("duplicate cluster names")
    return tuple(out)


def trivial_partition(space: StateSpace) -> tuple[Cluster, ...]:
    """A single cluster holding every variable, in declaration order."""
    return (Cluster("all", space.names),)


@dataclass(frozen=True)
class CPT:
    """Conditional table: one row per joint parent assignment (last parent fastest)."""

    parents: tuple[str, ...]
    table: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ResponseVariable:
    name: str
    card: int
    parents: tuple[str, ...]
    table: np.ndarray = field(repr=False)


class FactoredProcess:
    """A factored Markov process with previous-slice CPTs and current-slice responses.

    Parameters
    ----------
    variables : sequence of (name, cardinality)
        State variables in declaration order; this order defines joint indexing.
    cpts : mapping name -> (parents, table)
        ``table`` has one row per joint assignment of ``parents`` (previous
        slice) and one column per value of the variable.
    clusters : sequence, optional
        Partition of the state variables. Defaults to one cluster per variable.
    responses : sequence of (name, cardinality, parents, table), optional
        Response variables conditioned on current-slice state variables.
    init : mapping name -> marginal, optional
        Independent initial marginals; omitted variables start uniform.
    cap : int
        Largest joint state or response space the dense routines will build.
    """

    def __init__(self, variables, cpts: Mapping, clusters=None, responses=(), init=None,
                 cap: int = DEFAULT_JOINT_CAP):
        self.space = StateSpace(variables)
        self.cap = int(cap)
        if self.space.size > self.cap:
            raise JointSizeError(f"joint state space has {self.space.size} states, cap is {self.cap}")
        card = dict(self.space.variables)

        self.cpts: dict[str, CPT] = {}
        extra = set(cpts) - set(card)
        if extra:
            raise ValueError(f"CPT given for undeclared variables {sorted(extra)}")
        for name in self.space.names:
            if name not in cpts:
                raise ValueError(f"no CPT for variable {name!r}")
            parents, table = cpts[name]
            parents = tuple(parents)
            self.cpts[name] = CPT(parents, self._table(name, card[name], parents, table, card))

        rvars = []
        for name, c, parents, table in responses:
            if name in card:
                raise ValueError(f"response {name!r} clashes with a state variable")
            parents = tuple(parents)
            rvars.append(ResponseVariable(str(name), int(c), parents,
                                          self._table(name, int(c), parents, table, card)))
        self.responses: tuple[ResponseVariable, ...] = tuple(rvars)
        self.response_space = StateSpace([(r.name, r.card) for r in rvars])
        if self.response_space.size > self.cap:
            raise JointSizeError(f"joint response space has {self.response_space.size} values, "
                                 f"cap is {self.cap}")

        if clusters is None:
            clusters = [(n, [n]) for n in self.space.names]
        self.clusters = make_partition(self.space, clusters)

        init = dict(init or {})
        extra = set(init) - set(card)
        if extra:
            raise ValueError(f"initial marginal given for undeclared variables {sorted(extra)}")
        self.init: dict[str, np.ndarray] = {}
        for name, c in self.space.variables:
            p = np.full(c, 1.0 / c) if name not in init else np.asarray(init[name], dtype=float)
            if p.shape != (c,):
                raise ValueError(f"initial marginal for {name!r} has {p.size} entries, need {c}")
            self.init[name] = _frozen(_check_stochastic(p[None, :], f"init {name}")[0])

    @staticmethod
    def _table(name, c, parents, table, card) -> np.ndarray:
        for p in parents:
            if p not in card:
                raise ValueError(f"{name!r} has unknown parent {p!r}")
        if len(set(parents)) != len(parents):
            raise ValueError(f"{name!r} lists a parent twice")
        n_rows = int(np.prod([card[p] for p in parents], dtype=np.int64))
        t = np.asarray(table, dtype=float)
        if t.shape != (n_rows, c):
            raise ValueError(f"table for {name!r} has shape {t.shape}, expected {(n_rows, c)}")
        return _frozen(_check_stochastic(t, f"CPT of {name!r}"))

    def __repr__(self) -> str:
        cl = " | ".join(f"{c.name}:{','.join(c.variables)}" for c in self.clusters)
        return f"FactoredProcess({self.space.size} states, clusters [{cl}], {len(self.responses)} responses)"

    @cached_property
    def transition(self) -> TransitionModel:
        return flatten_transition(self)

    @cached_property
    def observation(self) -> ObservationModel:
        return flatten_observation(self)

    def initial_distribution(self) -> Distribution:
        """Joint initial belief: product of the per-variable initial marginals."""
        joint = np.ones(1)
        for name in self.space.names:
            joint = np.multiply.outer(joint, self.init[name]).reshape(-1)
        return Distribution(self.space, joint)

    def with_clusters(self, clusters) -> FactoredProcess:
        """Same process, different cluster partition."""
        return FactoredProcess(
            self.space.variables,
            {n: (c.parents, c.table) for n, c in self.cpts.items()},
            clusters=clusters,
            responses=[(r.name, r.card, r.parents, r.table) for r in self.responses],
            init=self.init,
            cap=self.cap,
        )


def _parent_rows(space: StateSpace, assignments: np.ndarray, parents: Sequence[str]) -> np.ndarray:
    """CPT row index for each joint assignment, given the parent list."""
    if not parents:
        return np.zeros(assignments.shape[0], dtype=np.intp)
    pos = [space.position(p) for p in parents]
    cards = [space.cards[i] for i in pos]
    return np.ravel_multi_index(tuple(assignments[:, pos].T), cards)


def _kron_rows(space: StateSpace, tables: Sequence[tuple[Sequence[str], np.ndarray]]) -> np.ndarray:
    """Rows indexed by ``space``; each row is the Kronecker product of CPT rows."""
    a = space.assignments()
    out = np.ones((a.shape[0], 1))
    for parents, table in tables:
        sel = table[_parent_rows(space, a, parents)]
        out = (out[:, :, None] * sel[:, None, :]).reshape(a.shape[0], -1)
    return out


def flatten_transition(model: FactoredProcess) -> TransitionModel:
    """The joint transition matrix of a factored process.

    Entry ``[i, j]`` is the product over state variables of the CPT entry for
    the variable's value in ``j`` given its parents' values in ``i``.
    """
    if model.space.size > model.cap:
        raise JointSizeError(f"joint state space has {model.space.size} states, cap is {model.cap}")
    rows = _kron_rows(model.space, [(c.parents, c.table) for c in
                                    (model.cpts[n] for n in model.space.names)])
    return TransitionModel.square(model.space, rows)


def flatten_observation(model: FactoredProcess) -> ObservationModel:
    """The joint observation matrix over the cross product of response alphabets."""
    if model.response_space.size > model.cap:
        raise JointSizeError(f"joint response space has {model.response_space.size} values, "
                             f"cap is {model.cap}")
    rows = _kron_rows(model.space, [(r.parents, r.table) for r in model.responses])
    return ObservationModel(model.space, model.response_space, rows)


@dataclass(frozen=True)
class DependencyGraph:
    """Cluster-level influence graph; edge ``(src, dst)`` means dst reads src."""

    clusters: tuple[Cluster, ...]
    edges: frozenset[tuple[int, int]]

    def in_degree(self, l: int) -> int:
        return sum(1 for _, d in self.edges if d == l)

    def out_degree(self, l: int) -> int:
        return sum(1 for s, _ in self.edges if s == l)

    @property
    def r(self) -> int:
        """Largest number of clusters any cluster depends on (itself included)."""
        return max((self.in_degree(l) for l in range(len(self.clusters))), default=0)

    @property
    def q(self) -> int:
        """Largest number of clusters any cluster influences (itself included)."""
        return max((self.out_degree(l) for l in range(len(self.clusters))), default=0)

    @property
    def self_only(self) -> bool:
        return all(s == d for s, d in self.edges)


def dependency_graph(model: FactoredProcess, clusters=None) -> DependencyGraph:
    """Dependency graph between the model's clusters (or an alternative partition)."""
    clusters = model.clusters if clusters is None else make_partition(model.space, clusters)
    owner = {v: l for l, c in enumerate(clusters) for v in c.variables}
    edges = set()
    for l, c in enumerate(clusters):
        for v in c.variables:
            for p in model.cpts[v].parents:
                edges.add((owner[p], l))
    return DependencyGraph(clusters, frozenset(edges))


def cluster_transition(model: FactoredProcess, cluster) -> TransitionModel:
    """Rectangular transition from a cluster's parent assignments to its values.

    ``cluster`` is an index into ``model.clusters`` or a :class:`Cluster`.
    Parents are the union of the member variables' CPT parents, in
    declaration order.
    """
    if isinstance(cluster, (int, np.integer)):
        cluster = model.clusters[int(cluster)]
    parents = {p for v in cluster.variables for p in model.cpts[v].parents}
    anterior = model.space.subspace([n for n in model.space.names if n in parents])
    if anterior.size > model.cap:
        raise JointSizeError(f"cluster {cluster.name!r} has {anterior.size} parent assignments, "
                             f"cap is {model.cap}")
    rows = _kron_rows(anterior, [(model.cpts[v].parents, model.cpts[v].table)
                                 for v in cluster.variables])
    return TransitionModel(anterior, model.space.subspace(cluster.variables), rows)
