import itertools
import math

import numpy as np
import pytest

from ealab import groundstate as gs
from ealab.excitation import window_vertices

# criterion lines recorded by the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def brute_force(lattice, J, bc=gs.FREE, edge=None, sign=None, pins=None):
    """Exhaustive minimum over all 2^N configurations, independent of the solvers."""
    jeff = bc.effective_couplings(lattice, J.values)
    h = bc.fields(lattice)
    e = lattice.edges
    best, arg = np.inf, None
    energies = []
    for bits in itertools.product((1, -1), repeat=lattice.n_vertices):
        s = np.array(bits, dtype=np.float64)
        if edge is not None and s[e[edge, 0]] * s[e[edge, 1]] != sign:
            continue
        if pins and any(s[v] != p for v, p in pins.items()):
            continue
        en = -np.sum(jeff * s[e[:, 0]] * s[e[:, 1]]) - np.sum(h * s)
        energies.append(en)
        if en < best:
            best, arg = en, s.astype(np.int8)
    return best, arg, np.sort(np.array(energies))


def window_minimum(lattice, J, bc, edges, eta, method="auto"):
    """Best total energy with the window edges held at eta, by pinning every consistent window spin set."""
    verts = window_vertices(lattice, edges)
    best = math.inf
    for spins in itertools.product((1, -1), repeat=len(verts)):
        pins = dict(zip(verts, spins))
        if tuple(pins[lattice.edges[e, 0]] * pins[lattice.edges[e, 1]] for e in edges) != tuple(eta):
            continue
        best = min(best, gs.constrained_solve(lattice, J, bc, pins=pins, method=method).energy)
    return best


@pytest.fixture
def brute():
    return brute_force


@pytest.fixture
def window_min():
    return window_minimum


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
