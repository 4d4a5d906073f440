import itertools

import numpy as np
import pytest

from minionlab.structures import GRAPH_SIGNATURE, TERNARY_SIGNATURE, Structure, zoo_ref

GRAPH_NAMES = ["K2", "K3", "K4", "C3", "C4", "C5", "C6", "C7", "C8", "P2", "P3", "P4", "P5"]
TARGET_NAMES = ["K2", "K3", "K4", "C5"]
TERNARY_NAMES = ["Z", "Z'"]


def brute_homs(X, Y):
    """Every map X -> Y checked tuple by tuple; independent of the search code."""
    rels = [(sym, sorted(ts)) for sym, ts in X.relations.items()]
    out = []
    for f in itertools.product(range(Y.domain_size), repeat=X.domain_size):
        if all(tuple(f[v] for v in t) in Y.relations[sym] for sym, ts in rels for t in ts):
            out.append(f)
    return out


def brute_exists(X, Y):
    return bool(brute_homs(X, Y))


def suite_pairs(max_x=8):
    """(X, Y) over the zoo: graphs into small targets plus the ternary pair."""
    pairs = []
    for a in GRAPH_NAMES:
        X = zoo_ref(a)
        if X.domain_size > max_x:
            continue
        for b in TARGET_NAMES:
            pairs.append((X, zoo_ref(b)))
    for a in TERNARY_NAMES:
        for b in TERNARY_NAMES:
            pairs.append((zoo_ref(a), zoo_ref(b)))
    return pairs


def random_structure(rng, n, m, signature=GRAPH_SIGNATURE, symmetric=True):
    sym, arity = signature.symbols[0]
    tuples = set()
    for _ in range(m):
        t = tuple(int(v) for v in rng.integers(0, n, size=arity))
        if symmetric and arity == 2:
            if t[0] == t[1]:
                continue
            tuples.add(t[::-1])
        tuples.add(t)
    return Structure(signature, n, {sym: tuples})


def random_ternary(rng, n, m):
    return random_structure(rng, n, m, TERNARY_SIGNATURE, symmetric=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
