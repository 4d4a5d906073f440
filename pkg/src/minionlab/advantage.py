"""Quantum-advantage classification and bounded dictator-homomorphism search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .config import CAP_POLY, CAP_POWER
from .errors import NotAGraph, SizeCapExceeded
from .structures import (
    Structure,
    enumerate_polymorphisms,
    find_homomorphism,
    function_minor,
    is_bipartite,
    nae,
    one_in_three,
)

VERDICTS = ("advantage", "no-advantage", "unknown")

# stable identifiers for the facts the classifier relies on
TAG_LOW_DIM = "Corollary 9: no quantum advantage in dimension <= 2"
TAG_LOW_DIM_PAIR = "Corollary 25(1): no quantum advantage for pairs in dimension <= 2"
TAG_GRAPH = "Theorem 19: a graph has quantum advantage in dimension >= 3 iff it is non-bipartite"
TAG_Z_PAIR = "Theorem 26: (1-in-3, NAE) has no quantum advantage (SDP fact)"
TAG_CLIQUES = "Clique pairs: (K_n, K_n') has quantum advantage in dimension >= 3 iff n' <= 2n-2"
LICENSED_TAGS = frozenset({TAG_LOW_DIM, TAG_LOW_DIM_PAIR, TAG_GRAPH, TAG_Z_PAIR, TAG_CLIQUES})


@dataclass
class AdvantageVerdict:
    subject: str
    dimension: int
    verdict: str
    justification: str | None = None
    evidence: dict | None = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict != "unknown" and self.justification not in LICENSED_TAGS:
            raise ValueError("a definite verdict needs a licensed justification")

    def to_doc(self) -> dict:
        doc = {"subject": self.subject, "dimension": self.dimension, "verdict": self.verdict,
               "justification": self.justification}
        if self.evidence is not None:
            doc["evidence"] = self.evidence
        return doc


def classify_graph(G: Structure, d: int) -> AdvantageVerdict:
    if not G.is_graph():
        raise NotAGraph(f"{G.name or 'structure'} is not a graph")
    if d < 1:
        raise ValueError("dimension must be positive")
    name = G.name or "G"
    if d <= 2:
        return AdvantageVerdict(name, d, "no-advantage", TAG_LOW_DIM)
    bip = is_bipartite(G).bipartite
    return AdvantageVerdict(name, d, "no-advantage" if bip else "advantage", TAG_GRAPH,
                            {"bipartite": bip})


def _clique_size(S: Structure):
    if not S.is_graph():
        return None
    n = S.domain_size
    edges = S.relations["E"]
    full = {(a, b) for a in range(n) for b in range(n) if a != b}
    return n if set(edges) == full else None


def classify_pair(Y: Structure, Y2: Structure, d: int, search_arity: int = 2,
                  evidence_cap: int = 5000) -> AdvantageVerdict:
    """Fact table for promise pairs; anything else is unknown with search evidence."""
    if d < 1:
        raise ValueError("dimension must be positive")
    res = find_homomorphism(Y, Y2)
    if not res.found:
        raise ValueError(f"{Y.name} does not map to {Y2.name}; not a promise pair")
    subject = f"({Y.name or 'Y'}, {Y2.name or 'Y2'})"
    if d <= 2:
        return AdvantageVerdict(subject, d, "no-advantage", TAG_LOW_DIM_PAIR)
    if Y == one_in_three() and Y2 == nae():
        return AdvantageVerdict(subject, d, "no-advantage", TAG_Z_PAIR)
    n, n2 = _clique_size(Y), _clique_size(Y2)
    if n is not None and n2 is not None and 3 <= n and 3 <= n2 <= 2 * n - 2:
        return AdvantageVerdict(subject, d, "advantage", TAG_CLIQUES, {"n": n, "n_prime": n2})
    evidence = {}
    for L in range(search_arity, 0, -1):
        try:
            search = bounded_dictator_search(Y, Y2, L, cap_poly=evidence_cap)
        except SizeCapExceeded as exc:
            evidence[f"arity_{L}"] = {"status": "cap-exceeded", "detail": str(exc)}
            continue
        evidence["bounded_dictator_search"] = search.summary()
        break
    return AdvantageVerdict(subject, d, "unknown", None, evidence)


# ---------------------------------------------------------------------------
# bounded search for a minor-preserving index choice

@dataclass(frozen=True)
class MinorIdentity:
    """g = f_{/pi}; functions are given as (arity, value table), pi is 0-based."""

    source: tuple
    pi: tuple
    target: tuple

    def to_doc(self) -> dict:
        return {"f": {"arity": self.source[0], "table": list(self.source[1])},
                "pi": [p + 1 for p in self.pi],
                "g": {"arity": self.target[0], "table": list(self.target[1])}}


@dataclass
class DictatorSearchResult:
    status: str  # "assignment" | "unsat"
    arity_bound: int
    functions: list
    identities: list = field(repr=False)
    assignment: dict | None = None  # function -> 0-based index
    conflict: list | None = None

    def summary(self) -> dict:
        doc = {"status": self.status, "arity_bound": self.arity_bound,
               "polymorphisms": len(self.functions), "minor_identities": len(self.identities)}
        if self.conflict is not None:
            doc["conflict_size"] = len(self.conflict)
        return doc

    def to_doc(self) -> dict:
        doc = self.summary()
        if self.assignment is not None:
            doc["assignment"] = [{"arity": f[0], "table": list(f[1]), "index": i + 1}
                                 for f, i in sorted(self.assignment.items())]
        if self.conflict is not None:
            doc["conflict"] = [m.to_doc() for m in self.conflict]
        return doc


def _maps(ell: int, ell2: int):
    return itertools.product(range(ell2), repeat=ell)


def minor_identities(Y: Structure, Y2: Structure, L: int, cap_power: int = CAP_POWER,
                     cap_poly: int = CAP_POLY):
    """Polymorphisms Y^ell -> Y2 for ell <= L and every minor relation among them."""
    funcs = []
    for ell in range(1, L + 1):
        ps = enumerate_polymorphisms(Y, Y2, ell, cap_power=cap_power, cap_poly=cap_poly)
        if len(ps) >= cap_poly:
            raise SizeCapExceeded(f"more than {cap_poly} polymorphisms of arity {ell}")
        funcs.extend((ell, f) for f in ps.functions)
    n = Y.domain_size
    ids = []
    for ell, f in funcs:
        for ell2 in range(1, L + 1):
            for pi in _maps(ell, ell2):
                g = function_minor(f, n, ell, pi, ell2)
                ids.append(MinorIdentity((ell, f), pi, (ell2, g)))
    return funcs, ids


def _propagate(doms: dict, ids) -> bool:
    changed = True
    while changed:
        changed = False
        for m in ids:
            df, dg = doms[m.source], doms[m.target]
            img = {m.pi[i] for i in df}
            new_g = dg & img
            new_f = {i for i in df if m.pi[i] in new_g}
            if new_g != dg or new_f != df:
                doms[m.source], doms[m.target] = new_f, new_g
                changed = True
                if not new_f or not new_g:
                    return False
    return True


def _solve(funcs, ids):
    doms = {f: set(range(f[0])) for f in funcs}

    def search(doms):
        if not _propagate(doms, ids):
            return None
        open_ = [f for f in funcs if len(doms[f]) > 1]
        if not open_:
            return {f: next(iter(d)) for f, d in doms.items()}
        f = min(open_, key=lambda h: len(doms[h]))
        for i in sorted(doms[f]):
            trial = {h: set(d) for h, d in doms.items()}
            trial[f] = {i}
            out = search(trial)
            if out is not None:
                return out
        return None

    return search(doms)


def check_dictator_assignment(assignment: dict, identities) -> list:
    """Identities violated by an index choice (empty means minor-preserving)."""
    return [m for m in identities if assignment[m.target] != m.pi[assignment[m.source]]]


def _minimize(funcs, ids):
    core = list(ids)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1:]
        if _solve(funcs, trial) is None:
            core = trial
        else:
            i += 1
    return core


def bounded_dictator_search(Y: Structure, Y2: Structure | None = None, L: int = 2,
                            cap_power: int = CAP_POWER, cap_poly: int = CAP_POLY) -> DictatorSearchResult:
    """Look for xi on polymorphisms of arity <= L with xi(f_{/pi}) = pi(xi(f))."""
    Y2 = Y if Y2 is None else Y2
    funcs, ids = minor_identities(Y, Y2, L, cap_power, cap_poly)
    # drop identities that are automatically satisfied (identity maps on the same function)
    ids = [m for m in ids if not (m.source == m.target and all(p == i for i, p in enumerate(m.pi)))]
    sol = _solve(funcs, ids)
    if sol is not None:
        assert not check_dictator_assignment(sol, ids)
        return DictatorSearchResult("assignment", L, funcs, ids, assignment=sol)
    # deletion filter: the result is a minimal unsatisfiable subset
    conflict = _minimize(funcs, ids)
    return DictatorSearchResult("unsat", L, funcs, ids, conflict=conflict)
