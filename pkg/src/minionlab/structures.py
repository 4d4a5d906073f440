"""Finite relational structures, homomorphism search, powers and polymorphisms.

Vertices are dense indices ``0..n-1``.  Relations are frozensets of
integer tuples keyed by symbol name.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .config import CAP_POLY, CAP_POWER
from .errors import (
    MalformedInput,
    NotAGraph,
    SignatureMismatch,
    SizeCapExceeded,
)


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple((str(n), int(a)) for n, a in self.symbols))
        if not self.symbols:
            raise MalformedInput("signature must contain at least one symbol")
        names = [n for n, _ in self.symbols]
        if len(set(names)) != len(names):
            raise MalformedInput(f"duplicate relation names in {names}")
        for name, arity in self.symbols:
            if arity < 1:
                raise MalformedInput(f"symbol {name!r} has arity {arity} < 1")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.symbols]

    def arity(self, name: str) -> int:
        for n, a in self.symbols:
            if n == name:
                return a
        raise KeyError(name)


GRAPH_SIGNATURE = Signature((("E", 2),))


@dataclass(frozen=True, eq=False)
class Structure:
    signature: Signature
    domain_size: int
    relations: Mapping[str, frozenset]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.domain_size < 1:
            raise MalformedInput("domain size must be positive")
        rels = {}
        for sym, arity in self.signature.symbols:
            tuples = frozenset(tuple(int(v) for v in t) for t in self.relations.get(sym, ()))
            for t in tuples:
                if len(t) != arity:
                    raise MalformedInput(f"tuple {t} in {sym} has length {len(t)}, expected {arity}")
                if any(v < 0 or v >= self.domain_size for v in t):
                    raise MalformedInput(f"tuple {t} in {sym} leaves the domain 0..{self.domain_size - 1}")
            rels[sym] = tuples
        extra = set(self.relations) - set(rels)
        if extra:
            raise MalformedInput(f"relations {sorted(extra)} not in signature")
        object.__setattr__(self, "relations", rels)

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.signature == other.signature
            and self.domain_size == other.domain_size
            and self.relations == other.relations
        )

    def __hash__(self):
        return hash((self.signature, self.domain_size, tuple(self.relations[n] for n in self.signature.names)))

    def __repr__(self):
        label = self.name or "Structure"
        sizes = ", ".join(f"{n}:{len(self.relations[n])}" for n in self.signature.names)
        return f"<{label} |V|={self.domain_size} {sizes}>"

    def similar(self, other: "Structure") -> bool:
        return self.signature == other.signature

    def constraints(self) -> list[tuple[str, tuple[int, ...]]]:
        """All (symbol, tuple) pairs in a deterministic order."""
        out = []
        for sym in self.signature.names:
            out.extend((sym, t) for t in sorted(self.relations[sym]))
        return out

    def degrees(self) -> list[int]:
        deg = [0] * self.domain_size
        for _, t in self.constraints():
            for v in t:
                deg[v] += 1
        return deg

    def is_graph(self) -> bool:
        if len(self.signature.symbols) != 1 or self.signature.symbols[0][1] != 2:
            return False
        edges = next(iter(self.relations.values()))
        return all(a != b and (b, a) in edges for a, b in edges)


def check_similar(X: Structure, Y: Structure) -> None:
    if not X.similar(Y):
        raise SignatureMismatch(f"signatures differ: {X.signature.symbols} vs {Y.signature.symbols}")


def structure_to_dict(S: Structure) -> dict:
    return {
        "signature": [{"name": n, "arity": a} for n, a in S.signature.symbols],
        "domain": S.domain_size,
        "relations": {n: [list(t) for t in sorted(S.relations[n])] for n in S.signature.names},
    }


def structure_from_dict(doc: Mapping) -> Structure:
    try:
        sig = Signature(tuple((s["name"], s["arity"]) for s in doc["signature"]))
        rels = {n: [tuple(t) for t in ts] for n, ts in doc.get("relations", {}).items()}
        return Structure(sig, int(doc["domain"]), rels)
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad structure document: {exc}") from exc


# ---------------------------------------------------------------------------
# Homomorphisms

@dataclass(frozen=True)
class Homomorphism:
    source: Structure
    target: Structure
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(v) for v in self.map))
        if not is_homomorphism(self.source, self.target, self.map):
            raise MalformedInput("map does not preserve all relations")

    def __call__(self, x: int) -> int:
        return self.map[x]


def is_homomorphism(X: Structure, Y: Structure, f: Sequence[int]) -> bool:
    check_similar(X, Y)
    if len(f) != X.domain_size or any(v < 0 or v >= Y.domain_size for v in f):
        return False
    for sym, t in X.constraints():
        if tuple(f[v] for v in t) not in Y.relations[sym]:
            return False
    return True


@dataclass(frozen=True)
class SearchResult:
    status: str  # "found" | "none-proven" | "budget-exceeded"
    homomorphism: Homomorphism | None
    nodes: int

    @property
    def found(self) -> bool:
        return self.status == "found"


class _HomSearch:
    """Backtracking with generalised arc consistency.

    Variables are branched on in degree-descending order (ties by index).
    """

    def __init__(self, X: Structure, Y: Structure, initial_domains=None):
        check_similar(X, Y)
        self.X, self.Y = X, Y
        self.cons = []
        self.watch = [[] for _ in range(X.domain_size)]
        for sym, t in X.constraints():
            allowed = sorted(Y.relations[sym])
            idx = len(self.cons)
            self.cons.append((t, allowed))
            for v in set(t):
                self.watch[v].append(idx)
        deg = X.degrees()
        self.order = sorted(range(X.domain_size), key=lambda v: (-deg[v], v))
        full = frozenset(range(Y.domain_size))
        if initial_domains is None:
            self.initial = [set(full) for _ in range(X.domain_size)]
        else:
            self.initial = [set(d) & full for d in initial_domains]
        self.nodes = 0

    def propagate(self, doms, queue) -> bool:
        pending = deque(queue)
        queued = set(pending)
        while pending:
            ci = pending.popleft()
            queued.discard(ci)
            t, allowed = self.cons[ci]
            support = [set() for _ in t]
            for row in allowed:
                ok = True
                for k, v in enumerate(t):
                    if row[k] not in doms[v]:
                        ok = False
                        break
                if ok:
                    # repeated variables must receive equal values
                    for k in range(len(t)):
                        for k2 in range(k + 1, len(t)):
                            if t[k] == t[k2] and row[k] != row[k2]:
                                ok = False
                                break
                        if not ok:
                            break
                if ok:
                    for k in range(len(t)):
                        support[k].add(row[k])
            for k, v in enumerate(t):
                if not doms[v] <= support[k]:
                    doms[v] &= support[k]
                    if not doms[v]:
                        return False
                    for cj in self.watch[v]:
                        if cj != ci and cj not in queued:
                            pending.append(cj)
                            queued.add(cj)
        return True

    def initial_domains(self):
        doms = [set(d) for d in self.initial]
        if any(not d for d in doms):
            return None
        if not self.propagate(doms, range(len(self.cons))):
            return None
        return doms

    def solutions(self, budget: int | None = None) -> Iterator[tuple[int, ...]]:
        doms = self.initial_domains()
        if doms is None:
            return
        yield from self._search(doms, budget)

    def _search(self, doms, budget):
        var = next((v for v in self.order if len(doms[v]) > 1), None)
        if var is None:
            yield tuple(next(iter(d)) for d in doms)
            return
        for val in sorted(doms[var]):
            self.nodes += 1
            if budget is not None and self.nodes > budget:
                raise _BudgetExceeded
            child = [set(d) for d in doms]
            child[var] = {val}
            if self.propagate(child, self.watch[var]):
                yield from self._search(child, budget)


class _BudgetExceeded(Exception):
    pass


def find_homomorphism(X: Structure, Y: Structure, budget: int = 1_000_000) -> SearchResult:
    search = _HomSearch(X, Y)
    try:
        for sol in search.solutions(budget):
            return SearchResult("found", Homomorphism(X, Y, sol), search.nodes)
    except _BudgetExceeded:
        return SearchResult("budget-exceeded", None, search.nodes)
    return SearchResult("none-proven", None, search.nodes)


def homomorphism_exists(X: Structure, Y: Structure) -> bool:
    return find_homomorphism(X, Y, budget=None).found


def all_homomorphisms(X: Structure, Y: Structure, limit: int | None = None) -> list[tuple[int, ...]]:
    """Every homomorphism X -> Y as a value tuple, sorted lexicographically."""
    out = []
    for sol in _HomSearch(X, Y).solutions():
        out.append(sol)
        if limit is not None and len(out) > limit:
            raise SizeCapExceeded(f"more than {limit} homomorphisms")
    out.sort()
    return out


def arc_consistency(X: Structure, Y: Structure):
    """Generalised arc consistency domains, or None if some domain empties."""
    doms = _HomSearch(X, Y).initial_domains()
    return None if doms is None else [frozenset(d) for d in doms]


# ---------------------------------------------------------------------------
# Powers and polymorphisms

def encode_tuple(values: Sequence[int], n: int) -> int:
    idx = 0
    for v in values:
        idx = idx * n + v
    return idx


def decode_index(idx: int, n: int, ell: int) -> tuple[int, ...]:
    digits = [0] * ell
    for k in range(ell - 1, -1, -1):
        idx, digits[k] = divmod(idx, n)
    return tuple(digits)


def direct_power(Y: Structure, ell: int, cap: int = CAP_POWER) -> Structure:
    if ell < 1:
        raise ValueError("power exponent must be positive")
    n = Y.domain_size
    if n ** ell > cap:
        raise SizeCapExceeded(f"|Y|^{ell} = {n ** ell} exceeds cap {cap}")
    rels = {}
    for sym, arity in Y.signature.symbols:
        rows = sorted(Y.relations[sym])
        if len(rows) ** ell > cap * max(arity, 1) * 10:
            raise SizeCapExceeded(f"relation {sym} of the power would hold {len(rows) ** ell} tuples")
        tuples = set()
        for choice in itertools.product(rows, repeat=ell):
            tuples.add(tuple(encode_tuple([r[j] for r in choice], n) for j in range(arity)))
        rels[sym] = tuples
    return Structure(Y.signature, n ** ell, rels, name=f"{Y.name or 'Y'}^{ell}")


@dataclass(frozen=True)
class PolymorphismSet:
    base: Structure
    target: Structure
    arity: int
    functions: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.functions)

    def __contains__(self, f):
        return tuple(f) in set(self.functions)


def enumerate_polymorphisms(
    Y: Structure,
    Y2: Structure | None = None,
    ell: int = 1,
    cap_power: int = CAP_POWER,
    cap_poly: int = CAP_POLY,
) -> PolymorphismSet:
    """All homomorphisms Y^ell -> Y2 (Y2 defaults to Y), sorted.

    A function is a tuple of values indexed by the lexicographic encoding
    of Y^ell.
    """
    target = Y if Y2 is None else Y2
    check_similar(Y, target)
    power = direct_power(Y, ell, cap=cap_power)
    funcs = all_homomorphisms(power, target, limit=cap_poly)
    return PolymorphismSet(Y, target, ell, tuple(funcs))


def function_minor(f: Sequence[int], n: int, ell: int, pi: Sequence[int], ell2: int) -> tuple[int, ...]:
    """f_{/pi}(s_1..s_ell2) = f(s_pi(1), .., s_pi(ell)); pi is 0-based."""
    out = []
    for idx in range(n ** ell2):
        s = decode_index(idx, n, ell2)
        out.append(f[encode_tuple([s[pi[i]] for i in range(ell)], n)])
    return tuple(out)


# ---------------------------------------------------------------------------
# Graph helpers and the zoo

@dataclass(frozen=True)
class BipartiteResult:
    bipartite: bool
    coloring: tuple[int, ...] | None = None
    odd_walk: tuple[int, ...] | None = None


def is_bipartite(G: Structure) -> BipartiteResult:
    """2-colouring witness, or an odd closed walk given as its vertex cycle."""
    if not G.is_graph():
        raise NotAGraph("expected a single symmetric irreflexive binary relation")
    n = G.domain_size
    adj = [[] for _ in range(n)]
    for a, b in next(iter(G.relations.values())):
        adj[a].append(b)
    for nbrs in adj:
        nbrs.sort()
    color = [-1] * n
    parent = [-1] * n
    for root in range(n):
        if color[root] != -1:
            continue
        color[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    parent[v] = u
                    queue.append(v)
                elif color[v] == color[u]:
                    return BipartiteResult(False, odd_walk=_odd_walk(parent, u, v))
    return BipartiteResult(True, coloring=tuple(color))


def _odd_walk(parent, u, v):
    def chain(x):
        path = [x]
        while parent[path[-1]] != -1:
            path.append(parent[path[-1]])
        return path

    pu, pv = chain(u), chain(v)
    # walk root..u, then v..root closes through the edge u-v
    return tuple(reversed(pu)) + tuple(pv[:-1])


def _graph(n: int, edges, name: str) -> Structure:
    sym = set()
    for a, b in edges:
        sym.add((a, b))
        sym.add((b, a))
    return Structure(GRAPH_SIGNATURE, n, {"E": sym}, name=name)


def clique(n: int) -> Structure:
    if n < 1:
        raise ValueError("clique needs n >= 1")
    return _graph(n, [(a, b) for a in range(n) for b in range(a + 1, n)], f"K{n}")


def cycle(n: int) -> Structure:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return _graph(n, [(i, (i + 1) % n) for i in range(n)], f"C{n}")


def path(n: int) -> Structure:
    """Path on n vertices."""
    if n < 1:
        raise ValueError("path needs n >= 1")
    return _graph(n, [(i, i + 1) for i in range(n - 1)], f"P{n}")


TERNARY_SIGNATURE = Signature((("R", 3),))


def one_in_three() -> Structure:
    return Structure(TERNARY_SIGNATURE, 2, {"R": {(1, 0, 0), (0, 1, 0), (0, 0, 1)}}, name="Z")


def nae() -> Structure:
    triples = {t for t in itertools.product((0, 1), repeat=3) if len(set(t)) == 2}
    return Structure(TERNARY_SIGNATURE, 2, {"R": triples}, name="Z'")


_ZOO = {
    "clique": (clique, 1),
    "cycle": (cycle, 1),
    "path": (path, 1),
    "one_in_three": (one_in_three, 0),
    "nae": (nae, 0),
}

_SHORT = {"K": "clique", "C": "cycle", "P": "path"}
_ALIASES = {"Z": "one_in_three", "1in3": "one_in_three", "ZP": "nae", "Z'": "nae", "NAE": "nae"}


def zoo(name: str, *params: int) -> Structure:
    try:
        ctor, nparams = _ZOO[name]
    except KeyError:
        raise ValueError(f"unknown zoo structure {name!r}") from None
    if len(params) != nparams:
        raise ValueError(f"{name} takes {nparams} parameter(s), got {len(params)}")
    return ctor(*params)


def zoo_ref(ref: str) -> Structure:
    """Resolve short names such as ``K3``, ``C5``, ``P4``, ``Z``, ``nae``."""
    key = ref.strip()
    if key in _ZOO and _ZOO[key][1] == 0:
        return zoo(key)
    if key.upper() in _ALIASES or key in _ALIASES:
        return zoo(_ALIASES.get(key, _ALIASES.get(key.upper())))
    head, tail = key[:1].upper(), key[1:]
    if head in _SHORT and tail.isdigit():
        return zoo(_SHORT[head], int(tail))
    raise ValueError(f"unknown zoo reference {ref!r}")
