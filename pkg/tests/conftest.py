import itertools

import numpy as np
import pytest

from bkmonitor import corpus


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=corpus.names())
def corpus_model(request):
    return corpus.load(request.param)


def brute_transition(model):
    """Joint transition assembled entry by entry from the CPTs."""
    names = model.space.names
    cards = model.space.cards
    states = list(itertools.product(*[range(c) for c in cards]))
    out = np.zeros((len(states), len(states)))
    for i, si in enumerate(states):
        for j, sj in enumerate(states):
            p = 1.0
            for k, v in enumerate(names):
                cpt = model.cpts[v]
                pv = [si[names.index(u)] for u in cpt.parents]
                pc = [cards[names.index(u)] for u in cpt.parents]
                row = 0
                for val, c in zip(pv, pc):
                    row = row * c + val
                p *= cpt.table[row, sj[k]]
            out[i, j] = p
    return out


def brute_mixing_rate(rows):
    rows = np.asarray(rows)
    best = 1.0
    for a in range(rows.shape[0]):
        for b in range(rows.shape[0]):
            best = min(best, sum(min(x, y) for x, y in zip(rows[a], rows[b])))
    return best


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
