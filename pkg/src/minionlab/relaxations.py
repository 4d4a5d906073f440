"""Decision procedures relaxing X -> Y: the standard SDP, CLP, and k-consistency."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import CAP_CONSISTENCY_DOMAIN, CAP_SDP, TAU_SDP
from .errors import SizeCapExceeded
from .lp import LinearSystem, lp_feasible
from .structures import Structure, _BudgetExceeded, _HomSearch, check_similar

# ---------------------------------------------------------------------------
# CLP on top of the basic (marginal-consistency) LP

BASIC_LP_LABEL = "marginal-consistency LP: per-tuple distributions over R^Y with agreeing vertex marginals"


def _assignments(X: Structure, Y: Structure):
    cons = X.constraints()
    return cons, [(ci, ybar) for ci, (sym, _) in enumerate(cons) for ybar in sorted(Y.relations[sym])]


def basic_lp(X: Structure, Y: Structure, pinned=None, removed=frozenset()) -> LinearSystem:
    """The basic LP of (X, Y), optionally pinning one assignment to weight 1.

    Assignments are (constraint index, tuple of R^Y); removed assignments get
    no variable, which forces their weight to 0.
    """
    return _basic_lp(X, Y, pinned, removed)[0]


def _basic_lp(X, Y, pinned, removed):
    check_similar(X, Y)
    cons, assigns = _assignments(X, Y)
    var = {}
    for a in assigns:
        if a not in removed:
            var[a] = len(var)
    vertices = sorted({v for _, t in cons for v in t})
    mu = {}
    for x in vertices:
        for y in range(Y.domain_size):
            mu[(x, y)] = len(var) + len(mu)
    system = LinearSystem(len(var) + len(mu))
    by_cons = {}
    for (ci, ybar), k in var.items():
        by_cons.setdefault(ci, []).append((ybar, k))
    for ci, (sym, t) in enumerate(cons):
        rows = by_cons.get(ci, [])
        system.add({k: 1 for _, k in rows}, "==", 1)
        for pos, x in enumerate(t):
            for y in range(Y.domain_size):
                coeffs = {k: 1 for ybar, k in rows if ybar[pos] == y}
                coeffs[mu[(x, y)]] = coeffs.get(mu[(x, y)], 0) - 1
                system.add(coeffs, "==", 0)
    for x in vertices:
        system.add({mu[(x, y)]: 1 for y in range(Y.domain_size)}, "==", 1)
    if pinned is not None:
        if pinned in var:
            system.add({var[pinned]: 1}, "==", 1)
        else:
            system.add({}, "==", 1)
    return system, var


@dataclass
class ClpReport:
    accepted: bool
    surviving: dict
    removed: list
    emptied: tuple | None
    lp_calls: int
    rounds: int
    lp: str = BASIC_LP_LABEL

    @property
    def status(self) -> str:
        return "accept" if self.accepted else "reject"

    def to_doc(self) -> dict:
        return {
            "status": self.status,
            "lp": self.lp,
            "rounds": self.rounds,
            "lp_calls": self.lp_calls,
            "emptied_tuple": None if self.emptied is None else {"relation": self.emptied[0], "tuple": list(self.emptied[1])},
            "surviving": [{"relation": sym, "tuple": list(t), "assignments": [list(y) for y in ys]}
                          for (sym, t), ys in self.surviving.items()],
            "removed": [{"relation": sym, "tuple": list(t), "assignment": list(y)} for sym, t, y in self.removed],
        }


def _integral_witness(X, Y, cons, pinned, removed, budget=2000):
    """A homomorphism using the pinned assignment and no removed one, if found quickly.

    Such a map is a 0/1 feasible point of the pinned LP.
    """
    search = _HomSearch(X, Y)
    for ci, (t, allowed) in enumerate(search.cons):
        if ci == pinned[0]:
            search.cons[ci] = (t, [pinned[1]])
        else:
            search.cons[ci] = (t, [y for y in allowed if (ci, y) not in removed])
    try:
        for sol in search.solutions(budget):
            return sol
    except _BudgetExceeded:
        pass
    return None


def clp_relax(X: Structure, Y: Structure, order_seed: int | None = None) -> ClpReport:
    """Remove pinned assignments whose LP is infeasible until a fixed point."""
    check_similar(X, Y)
    cons, assigns = _assignments(X, Y)
    alive = list(assigns)
    removed: list = []
    removed_set: set = set()
    rng = np.random.default_rng(order_seed) if order_seed is not None else None
    calls = rounds = 0
    witnesses: list = []
    changed = True
    while changed:
        changed = False
        rounds += 1
        order = list(alive)
        if rng is not None:
            rng.shuffle(order)
        for a in order:
            if a in removed_set:
                continue
            # a feasible point with weight 1 on a, avoiding removed assignments, settles a
            if any(a in ones and not (support & removed_set) for ones, support in witnesses):
                continue
            hom = _integral_witness(X, Y, cons, a, removed_set)
            if hom is not None:
                used = {(ci, tuple(hom[v] for v in t)) for ci, (_, t) in enumerate(cons)}
                witnesses.append((used, used))
                continue
            calls += 1
            system, var = _basic_lp(X, Y, a, frozenset(removed_set))
            res = lp_feasible(system)
            if res.feasible:
                witnesses.append(({b for b, k in var.items() if res.point[k] == 1},
                                  {b for b, k in var.items() if res.point[k] != 0}))
            else:
                removed_set.add(a)
                sym, t = cons[a[0]]
                removed.append((sym, t, a[1]))
                changed = True
        alive = [a for a in alive if a not in removed_set]
    surviving = {}
    for ci, c in enumerate(cons):
        surviving[c] = [ybar for (cj, ybar) in alive if cj == ci]
    emptied = next((c for c, ys in surviving.items() if not ys), None)
    return ClpReport(emptied is None, surviving, removed, emptied, calls, rounds)


# ---------------------------------------------------------------------------
# k-consistency

@dataclass
class ConsistencyReport:
    k: int
    consistent: bool
    family_size: int
    rounds: int
    family: dict = field(repr=False, default_factory=dict)

    @property
    def status(self) -> str:
        return "consistent" if self.consistent else "inconsistent"

    def to_doc(self) -> dict:
        return {"status": self.status, "k": self.k, "family_size": self.family_size, "rounds": self.rounds,
                "extension": "domains <= k, extended by one vertex (k+1)"}


def _is_partial_hom(X_cons_in, W, values, Y):
    pos = dict(zip(W, values))
    for sym, t in X_cons_in:
        if tuple(pos[v] for v in t) not in Y.relations[sym]:
            return False
    return True


def k_consistency(X: Structure, Y: Structure, k: int, cap: int = 2_000_000,
                  max_domain: int = CAP_CONSISTENCY_DOMAIN) -> ConsistencyReport:
    """Greatest family of partial homomorphisms on <= k vertices closed under
    restriction and one-vertex extension (extensions may reach k+1 vertices)."""
    check_similar(X, Y)
    if k < 1:
        raise ValueError("k must be at least 1")
    n, m = X.domain_size, Y.domain_size
    if n > max_domain:
        raise SizeCapExceeded(f"|X| = {n} exceeds the consistency cap {max_domain}")
    work = sum(math.comb(n, j) * m ** j for j in range(k + 2))
    if work > cap:
        raise SizeCapExceeded(f"k-consistency enumeration of {work} partial maps exceeds cap {cap}")
    cons = X.constraints()
    inside = {}

    def cons_in(W):
        key = tuple(W)
        if key not in inside:
            ws = set(W)
            inside[key] = [(s, t) for s, t in cons if set(t) <= ws]
        return inside[key]

    family: dict[tuple, set] = {}
    for size in range(k + 1):
        for W in itertools.combinations(range(n), size):
            cw = cons_in(W)
            family[W] = {vals for vals in itertools.product(range(m), repeat=size)
                         if _is_partial_hom(cw, W, vals, Y)}

    def extends(W, vals):
        base = dict(zip(W, vals))
        for x in range(n):
            if x in base:
                continue
            W2 = tuple(sorted(W + (x,)))
            cw = cons_in(W2)
            ok = False
            for v in range(m):
                g = dict(base)
                g[x] = v
                gv = tuple(g[u] for u in W2)
                if len(W2) <= k:
                    if gv in family[W2]:
                        ok = True
                        break
                    continue
                if not _is_partial_hom(cw, W2, gv, Y):
                    continue
                if all(tuple(g[u] for u in W2 if u != z) in family[tuple(u for u in W2 if u != z)]
                       for z in W2):
                    ok = True
                    break
            if not ok:
                return False
        return True

    rounds = 0
    changed = True
    while changed:
        changed = False
        rounds += 1
        for W in sorted(family, key=len):
            keep = set()
            for vals in family[W]:
                restricted = all(
                    tuple(v for u, v in zip(W, vals) if u != z) in family[tuple(u for u in W if u != z)]
                    for z in W)
                if restricted and extends(W, vals):
                    keep.add(vals)
            if keep != family[W]:
                family[W] = keep
                changed = True
    size = sum(len(v) for v in family.values())
    return ConsistencyReport(k, bool(family[()]), size, rounds, family)


# ---------------------------------------------------------------------------
# SDP

@dataclass
class SdpSystem:
    """Linear equalities over (Gram matrix G, weights v) with G PSD and v >= 0.

    Each equality is (G-terms, v-terms, rhs) where a G-term (a, b, c) means
    c * G[a, b] and G is symmetric.
    """

    labels: list            # index -> ("anchor",) or ("u", x, y)
    weights: list           # weight index -> (constraint index, ybar)
    equalities: list
    constrained_vertices: list

    @property
    def size(self) -> int:
        return len(self.labels)

    def operators(self):
        N, nv, m = self.size, len(self.weights), len(self.equalities)
        AG = np.zeros((m, N, N))
        Av = np.zeros((m, nv))
        b = np.zeros(m)
        for i, (gterms, vterms, rhs) in enumerate(self.equalities):
            for a, c, coef in gterms:
                if a == c:
                    AG[i, a, a] += coef
                else:
                    AG[i, a, c] += coef / 2
                    AG[i, c, a] += coef / 2
            for j, coef in vterms:
                Av[i, j] += coef
            b[i] = rhs
        return AG, Av, b

    def residuals(self, G, v):
        AG, Av, b = self.operators()
        lhs = np.einsum("mij,ij->m", AG, G) + Av @ v
        return np.abs(lhs - b)


def sdp_system(X: Structure, Y: Structure, cap: int = CAP_SDP) -> SdpSystem:
    check_similar(X, Y)
    cons = X.constraints()
    verts = sorted({v for _, t in cons for v in t})
    N = 1 + len(verts) * Y.domain_size
    if N > cap:
        raise SizeCapExceeded(f"SDP index set of size {N} exceeds cap {cap}")
    labels = [("anchor",)] + [("u", x, y) for x in verts for y in range(Y.domain_size)]
    idx = {lab: i for i, lab in enumerate(labels)}
    weights = []
    eqs = [([(0, 0, 1.0)], [], 1.0)]
    for ci, (sym, t) in enumerate(cons):
        ys = sorted(Y.relations[sym])
        base = len(weights)
        weights.extend((ci, ybar) for ybar in ys)
        wids = list(range(base, base + len(ys)))
        eqs.append(([], [(j, 1.0) for j in wids], 1.0))
        r = len(t)
        for i in range(r):
            for y in range(Y.domain_size):
                terms = [(j, -1.0) for j, ybar in zip(wids, ys) if ybar[i] == y]
                eqs.append(([(idx[("u", t[i], y)], 0, 1.0)], terms, 0.0))
        for i in range(r):
            for j in range(i, r):
                for y in range(Y.domain_size):
                    for y2 in range(Y.domain_size):
                        terms = [(w, -1.0) for w, ybar in zip(wids, ys) if ybar[i] == y and ybar[j] == y2]
                        eqs.append(([(idx[("u", t[i], y)], idx[("u", t[j], y2)], 1.0)], terms, 0.0))
    return SdpSystem(labels, weights, eqs, verts)


def integral_sdp_solution(system: SdpSystem, X: Structure, Y: Structure, f: Sequence[int]):
    """The 0/1 solution induced by a homomorphism f (vectors u_{x,y} = [f(x)=y] u_0)."""
    cons = X.constraints()
    vec = np.array([1.0] + [1.0 if f[lab[1]] == lab[2] else 0.0 for lab in system.labels[1:]])
    G = np.outer(vec, vec)
    v = np.array([1.0 if ybar == tuple(f[x] for x in cons[ci][1]) else 0.0 for ci, ybar in system.weights])
    return G, v


@dataclass
class SdpReport:
    status: str  # "feasible" | "infeasible" | "inconclusive"
    tol: float
    max_residual: float = math.nan
    min_eigenvalue: float = math.nan
    min_weight: float = math.nan
    gram: np.ndarray | None = None
    weights: np.ndarray | None = None
    multipliers: np.ndarray | None = None
    margin: float = math.nan
    solver: str = ""
    system: SdpSystem | None = field(default=None, repr=False)
    note: str = ""

    def to_doc(self, include_witness: bool = False) -> dict:
        doc = {"status": self.status, "tol": self.tol, "solver": self.solver,
               "max_residual": self.max_residual, "min_eigenvalue": self.min_eigenvalue,
               "min_weight": self.min_weight}
        if self.status == "infeasible":
            doc["certificate_margin"] = self.margin
            doc["multipliers"] = None if self.multipliers is None else [float(x) for x in self.multipliers]
        if self.note:
            doc["note"] = self.note
        if include_witness and self.gram is not None:
            doc["gram"] = [[float(x) for x in row] for row in self.gram]
            doc["weights"] = [float(x) for x in self.weights]
        return doc


def check_farkas(system: SdpSystem, y: np.ndarray) -> tuple[float, dict]:
    """Margin > 0 certifies infeasibility.

    With S = sum y_i A_i^G and s = sum y_i A_i^v, every feasible (G, v) has
    <S,G> + s.v = b.y.  Since tr G = 1 + |constrained X| and 0 <= v <= 1 on
    the feasible set, <S,G> + s.v >= -eps (1 + |X_c|) - sum(neg s) where eps
    is the negative part of lambda_min(S).  The margin is the gap.
    """
    AG, Av, b = system.operators()
    S = np.einsum("m,mij->ij", y, AG)
    S = (S + S.T) / 2
    s = Av.T @ y
    lam = float(np.linalg.eigvalsh(S)[0])
    eps = max(0.0, -lam)
    neg_s = float(np.sum(np.maximum(0.0, -s)))
    bound = eps * (1 + len(system.constrained_vertices)) + neg_s
    margin = -float(b @ y) - bound
    return margin, {"lambda_min": lam, "neg_s": neg_s, "by": float(b @ y)}


def _solve_primal(system: SdpSystem, solver: str):
    import cvxpy as cp

    N, nv = system.size, len(system.weights)
    G = cp.Variable((N, N), PSD=True)
    v = cp.Variable(nv, nonneg=True) if nv else None
    cons = []
    for gterms, vterms, rhs in system.equalities:
        expr = 0
        for a, c, coef in gterms:
            expr = expr + coef * G[a, c]
        for j, coef in vterms:
            expr = expr + coef * v[j]
        cons.append(expr == rhs)
    prob = cp.Problem(cp.Minimize(0), cons)
    try:
        with warnings.catch_warnings():
            # accuracy is judged by our own residual and certificate checks
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=solver)
    except cp.error.SolverError:
        return "error", None, None
    if G.value is None:
        return prob.status, None, None
    return prob.status, np.array(G.value), (np.array(v.value) if nv else np.zeros(0))


def _solve_farkas(system: SdpSystem, solver: str):
    import cvxpy as cp

    AG, Av, b = system.operators()
    m, N = AG.shape[0], system.size
    y = cp.Variable(m)
    S = cp.Variable((N, N), PSD=True)
    flat = AG.reshape(m, N * N).T
    cons = [cp.reshape(flat @ y, (N, N), order="C") == S, b @ y == -1]
    if Av.shape[1]:
        cons.append(Av.T @ y >= 0)
    prob = cp.Problem(cp.Minimize(0), cons)
    try:
        with warnings.catch_warnings():
            # accuracy is judged by our own residual and certificate checks
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=solver)
    except cp.error.SolverError:
        return None
    return None if y.value is None else np.array(y.value)


def sdp_relax(X: Structure, Y: Structure, tol: float = TAU_SDP, cap: int = CAP_SDP,
              solver: str = "CLARABEL") -> SdpReport:
    """Solve the SDP system; certify feasibility by residuals, infeasibility by a Farkas vector."""
    system = sdp_system(X, Y, cap)
    status, G, v = _solve_primal(system, solver)
    report = SdpReport("inconclusive", tol, solver=solver, system=system)
    if G is not None:
        G = (G + G.T) / 2
        res = system.residuals(G, v)
        report.max_residual = float(res.max(initial=0.0))
        report.min_eigenvalue = float(np.linalg.eigvalsh(G)[0])
        report.min_weight = float(v.min(initial=0.0))
        report.gram, report.weights = G, v
        if report.max_residual <= tol and report.min_eigenvalue >= -tol and report.min_weight >= -tol:
            report.status = "feasible"
            return report
        report.note = f"solver status {status}; primal point fails the residual checks"
    y = _solve_farkas(system, solver)
    if y is not None:
        margin, _ = check_farkas(system, y)
        if margin > 0:
            report.status = "infeasible"
            report.multipliers, report.margin = y, margin
            report.gram = report.weights = None
            report.note = ""
            return report
        report.note = (report.note + "; " if report.note else "") + f"dual certificate margin {margin:.3g} not positive"
    else:
        report.note = (report.note + "; " if report.note else "") + f"solver status {status}; no dual certificate"
    return report
