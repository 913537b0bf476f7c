"""Reader and writer for the line-oriented FPM model format.

Example::

    # two coupled binary variables
    var A 2
    var B 2
    cluster left: A
    cluster right: B
    cpt A <- A B
    0.9 0.1
    0.8 0.2
    0.3 0.7
    0.1 0.9
    cpt B <- B
    0.95 0.05
    0.05 0.95
    obs R 2 <- A
    0.8 0.2
    0.2 0.8
    init A: 0.5 0.5

Tables list one row per joint parent assignment, last parent fastest. ``#``
starts a comment. Declarations may appear in any order. Omitted ``init``
lines mean a uniform marginal; omitted ``cluster`` lines mean one cluster
per variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .core import Cluster, FactoredProcess, StateSpace, make_partition, trivial_partition

ROW_SUM_TOL = 1e-6

_TOKEN = re.compile(r"\S+")


class FPMError(ValueError):
    """Syntax or validation error at a location in an FPM document."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass
class _Tok:
    text: str
    line: int
    col: int


@dataclass
class _Table:
    name: _Tok
    parents: list[_Tok]
    card: _Tok | None = None
    rows: list[list[_Tok]] = field(default_factory=list)


def _tokens(line: str, lineno: int) -> list[_Tok]:
    line = line.split("#", 1)[0]
    return [_Tok(m.group(), lineno, m.start() + 1) for m in _TOKEN.finditer(line)]


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _int(tok: _Tok, what: str) -> int:
    try:
        v = int(tok.text)
    except ValueError:
        raise FPMError(f"{what} must be an integer, got {tok.text!r}", tok.line, tok.col) from None
    if v < 2:
        raise FPMError(f"{what} must be >= 2, got {v}", tok.line, tok.col)
    return v


def _split_colon(toks: list[_Tok], kw: _Tok) -> tuple[_Tok, list[_Tok]]:
    """Split ``NAME: rest`` (with or without spaces around the colon)."""
    text = " ".join(t.text for t in toks)
    if ":" not in text:
        raise FPMError(f"expected ':' after the {kw.text} name", kw.line, kw.col)
    out: list[_Tok] = []
    for t in toks:
        if ":" in t.text and not any(":" in o.text for o in out):
            head, tail = t.text.split(":", 1)
            if head:
                out.append(_Tok(head, t.line, t.col))
            out.append(_Tok(":", t.line, t.col + len(head)))
            if tail:
                out.append(_Tok(tail, t.line, t.col + len(head) + 1))
        else:
            out.append(t)
    k = next(i for i, t in enumerate(out) if t.text == ":")
    if k != 1:
        raise FPMError(f"expected exactly one name before ':' in {kw.text}", kw.line, kw.col)
    return out[0], out[2:]


def parse_model(text: str, cap: int | None = None) -> FactoredProcess:
    """Parse an FPM document into a :class:`FactoredProcess`.

    Raises
    ------
    FPMError
        With the line and column of the offending token.
    """
    variables: dict[str, tuple[int, _Tok]] = {}
    clusters: list[tuple[_Tok, list[_Tok]]] = []
    cpts: dict[str, _Table] = {}
    obs: list[_Table] = []
    inits: dict[str, tuple[_Tok, list[_Tok]]] = {}
    current: _Table | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokens(raw, lineno)
        if not toks:
            continue
        kw = toks[0]
        if _is_number(kw.text):
            if current is None:
                raise FPMError("probability row outside a cpt or obs block", kw.line, kw.col)
            for t in toks:
                if not _is_number(t.text):
                    raise FPMError(f"expected a number, got {t.text!r}", t.line, t.col)
            current.rows.append(toks)
            continue
        current = None
        if kw.text == "var":
            if len(toks) != 3:
                raise FPMError("expected 'var NAME CARD'", kw.line, kw.col)
            name = toks[1]
            if name.text in variables:
                raise FPMError(f"variable {name.text!r} declared twice", name.line, name.col)
            variables[name.text] = (_int(toks[2], f"cardinality of {name.text!r}"), name)
        elif kw.text == "cluster":
            clusters.append(_split_colon(toks[1:], kw))
        elif kw.text in ("cpt", "obs"):
            try:
                arrow = next(i for i, t in enumerate(toks) if t.text == "<-")
            except StopIteration:
                raise FPMError(f"expected '<-' in {kw.text} header", kw.line, kw.col) from None
            head = toks[1:arrow]
            if kw.text == "cpt":
                if len(head) != 1:
                    raise FPMError("expected 'cpt VAR <- PARENTS...'", kw.line, kw.col)
                if head[0].text in cpts:
                    raise FPMError(f"second cpt for {head[0].text!r}", head[0].line, head[0].col)
                current = cpts[head[0].text] = _Table(head[0], toks[arrow + 1:])
            else:
                if len(head) != 2:
                    raise FPMError("expected 'obs NAME CARD <- PARENTS...'", kw.line, kw.col)
                current = _Table(head[0], toks[arrow + 1:], card=head[1])
                obs.append(current)
        elif kw.text == "init":
            name, values = _split_colon(toks[1:], kw)
            if name.text in inits:
                raise FPMError(f"second init for {name.text!r}", name.line, name.col)
            inits[name.text] = (name, values)
        else:
            raise FPMError(f"unknown statement {kw.text!r}", kw.line, kw.col)

    if not variables:
        raise FPMError("no variables declared", 1, 1)
    card = {n: c for n, (c, _) in variables.items()}

    def resolve(tok: _Tok) -> str:
        if tok.text not in card:
            raise FPMError(f"unknown variable {tok.text!r}", tok.line, tok.col)
        return tok.text

    def table(tab: _Table, n_cols: int) -> np.ndarray:
        parents = [resolve(p) for p in tab.parents]
        n_rows = int(np.prod([card[p] for p in parents], dtype=np.int64))
        if len(tab.rows) != n_rows:
            raise FPMError(f"table for {tab.name.text!r} has {len(tab.rows)} rows, expected {n_rows}",
                           tab.name.line, tab.name.col)
        out = np.empty((n_rows, n_cols))
        for k, row in enumerate(tab.rows):
            if len(row) != n_cols:
                raise FPMError(f"row {k} of {tab.name.text!r} has {len(row)} entries, expected {n_cols}",
                               row[0].line, row[0].col)
            vals = np.array([float(t.text) for t in row])
            if np.any(vals < 0) or not np.all(np.isfinite(vals)):
                raise FPMError(f"row {k} of {tab.name.text!r} has a negative or non-finite entry",
                               row[0].line, row[0].col)
            s = vals.sum()
            if abs(s - 1.0) > ROW_SUM_TOL:
                raise FPMError(f"row {k} of {tab.name.text!r} sums to {s!r}, not 1",
                               row[0].line, row[0].col)
            out[k] = vals / s
        return out

    cpt_args = {}
    for name, (c, tok) in variables.items():
        if name not in cpts:
            raise FPMError(f"no cpt for variable {name!r}", tok.line, tok.col)
    for name, tab in cpts.items():
        resolve(tab.name)
        cpt_args[name] = ([p.text for p in tab.parents], table(tab, card[name]))

    responses = []
    for tab in obs:
        if tab.name.text in card:
            raise FPMError(f"response {tab.name.text!r} clashes with a state variable",
                           tab.name.line, tab.name.col)
        c = _int(tab.card, f"cardinality of response {tab.name.text!r}")
        responses.append((tab.name.text, c, [p.text for p in tab.parents], table(tab, c)))

    init = {}
    for name, (tok, values) in inits.items():
        resolve(tok)
        for v in values:
            if not _is_number(v.text):
                raise FPMError(f"expected a number, got {v.text!r}", v.line, v.col)
        p = np.array([float(v.text) for v in values])
        if p.size != card[name]:
            raise FPMError(f"init for {name!r} has {p.size} entries, expected {card[name]}", tok.line, tok.col)
        if np.any(p < 0) or abs(p.sum() - 1.0) > ROW_SUM_TOL:
            raise FPMError(f"init for {name!r} is not a distribution", tok.line, tok.col)
        init[name] = p / p.sum()

    space = StateSpace([(n, c) for n, (c, _) in variables.items()])
    cluster_list = None
    if clusters:
        for name, members in clusters:
            for m in members:
                resolve(m)
        cluster_list = [(name.text, [m.text for m in members]) for name, members in clusters]
        try:
            make_partition(space, cluster_list)
        except ValueError as e:
            first = clusters[0][0]
            raise FPMError(f"clusters are not a partition: {e}", first.line, first.col) from None

    kwargs = {} if cap is None else {"cap": cap}
    try:
        return FactoredProcess(space.variables, cpt_args, clusters=cluster_list, responses=responses,
                               init=init, **kwargs)
    except ValueError as e:
        raise FPMError(str(e), 1, 1) from None


def load_model(path, cap: int | None = None) -> FactoredProcess:
    with open(path, encoding="utf-8") as f:
        return parse_model(f.read(), cap=cap)


def _row(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def dump_model(model: FactoredProcess) -> str:
    """Serialize a model to FPM text; floats are written in round-trip form."""
    out = []
    for name, c in model.space.variables:
        out.append(f"var {name} {c}")
    for cl in model.clusters:
        out.append(f"cluster {cl.name}: {' '.join(cl.variables)}")
    for name in model.space.names:
        cpt = model.cpts[name]
        out.append(f"cpt {name} <- {' '.join(cpt.parents)}".rstrip())
        out.extend(_row(r) for r in cpt.table)
    for r in model.responses:
        out.append(f"obs {r.name} {r.card} <- {' '.join(r.parents)}".rstrip())
        out.extend(_row(row) for row in r.table)
    for name in model.space.names:
        out.append(f"init {name}: {_row(model.init[name])}")
    return "\n".join(out) + "\n"


def parse_partition(text: str, model: FactoredProcess) -> tuple[Cluster, ...]:
    """Parse ``A:X,Y|B:Z``; ``trivial`` is one cluster, ``model`` the model's own clusters.

    Cluster names may be omitted (``X,Y|Z``), in which case they are numbered.
    """
    text = text.strip()
    if text == "trivial":
        return trivial_partition(model.space)
    if text == "model":
        return model.clusters
    clusters = []
    for k, part in enumerate(text.split("|")):
        name, _, members = part.rpartition(":")
        vs = [v.strip() for v in members.split(",") if v.strip()]
        clusters.append((name.strip() or f"C{k}", vs))
    return make_partition(model.space, clusters)
