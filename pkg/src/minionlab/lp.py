"""Exact feasibility of rational linear systems.

Phase-one simplex over :class:`fractions.Fraction` with Bland's rule, after
a light presolve that fixes variables forced by sign patterns.  Every
returned point is checked against the original constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import MalformedInput

SENSES = ("<=", ">=", "==")


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: Mapping[int, Fraction]
    sense: str
    rhs: Fraction

    def __post_init__(self):
        if self.sense not in SENSES:
            raise MalformedInput(f"unknown constraint sense {self.sense!r}")
        object.__setattr__(self, "coeffs", {int(k): Fraction(v) for k, v in self.coeffs.items() if v != 0})
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    def satisfied_by(self, x) -> bool:
        lhs = sum((c * x[k] for k, c in self.coeffs.items()), Fraction(0))
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass
class LinearSystem:
    num_vars: int
    constraints: list[LinearConstraint] = field(default_factory=list)
    free: frozenset = frozenset()  # variables without the implicit x >= 0

    def add(self, coeffs: Mapping[int, object], sense: str, rhs) -> None:
        for k in coeffs:
            if not 0 <= k < self.num_vars:
                raise MalformedInput(f"variable {k} out of range")
        self.constraints.append(LinearConstraint(dict(coeffs), sense, Fraction(rhs)))

    def check(self, x) -> bool:
        if len(x) != self.num_vars:
            return False
        if any(x[k] < 0 for k in range(self.num_vars) if k not in self.free):
            return False
        return all(c.satisfied_by(x) for c in self.constraints)


@dataclass(frozen=True)
class LpResult:
    feasible: bool
    point: tuple[Fraction, ...] | None = None
    pivots: int = 0


class _Infeasible(Exception):
    pass


def _presolve(rows, nvars):
    """Fix nonnegative variables implied by equality rows.

    ``rows`` are (coeff dict, rhs) equalities over nonnegative variables;
    returns the reduced rows and a dict of fixed values.
    """
    fixed: dict[int, Fraction] = {}
    rows = [(dict(c), Fraction(b)) for c, b in rows]
    changed = True
    while changed:
        changed = False
        new_rows = []
        for coeffs, rhs in rows:
            for k in [k for k in coeffs if k in fixed]:
                rhs -= coeffs.pop(k) * fixed[k]
            if not coeffs:
                if rhs != 0:
                    raise _Infeasible
                continue
            signs = {c > 0 for c in coeffs.values()}
            if len(signs) == 1:
                positive = signs.pop()
                if (rhs < 0 and positive) or (rhs > 0 and not positive):
                    raise _Infeasible
                if rhs == 0:
                    for k in coeffs:
                        fixed[k] = Fraction(0)
                    changed = True
                    continue
            if len(coeffs) == 1:
                (k, c), = coeffs.items()
                val = rhs / c
                if val < 0:
                    raise _Infeasible
                fixed[k] = val
                changed = True
                continue
            new_rows.append((coeffs, rhs))
        rows = new_rows
    return rows, fixed


def _phase_one(rows, nvars):
    """Feasible point of {A x = b, x >= 0} or None.  Rows have b >= 0."""
    m = len(rows)
    if m == 0:
        return [Fraction(0)] * nvars, 0
    width = nvars + m
    tab = []
    for i, (coeffs, rhs) in enumerate(rows):
        row = [Fraction(0)] * (width + 1)
        for k, c in coeffs.items():
            row[k] = c
        row[nvars + i] = Fraction(1)
        row[width] = rhs
        tab.append(row)
    basis = [nvars + i for i in range(m)]
    # minimise the sum of artificials: reduced cost row = -(sum of rows) on structural columns
    cost = [Fraction(0)] * (width + 1)
    for row in tab:
        for k in range(nvars):
            if row[k]:
                cost[k] -= row[k]
        cost[width] -= row[width]
    pivots = 0
    while True:
        enter = next((k for k in range(width) if cost[k] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][width] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # cannot happen: phase one is bounded below by zero
            break
        r = best[1]
        _pivot(tab, cost, r, enter, width)
        basis[r] = enter
        pivots += 1
    if cost[width] != 0:
        return None, pivots
    x = [Fraction(0)] * nvars
    for i, b in enumerate(basis):
        if b < nvars:
            x[b] = tab[i][width]
    return x, pivots


def _pivot(tab, cost, r, c, width):
    prow = tab[r]
    inv = 1 / prow[c]
    if inv != 1:
        for k in range(width + 1):
            if prow[k]:
                prow[k] *= inv
    nz = [k for k in range(width + 1) if prow[k]]
    for i, row in enumerate(tab):
        if i != r and row[c]:
            f = row[c]
            for k in nz:
                row[k] -= f * prow[k]
    if cost[c]:
        f = cost[c]
        for k in nz:
            cost[k] -= f * prow[k]


def lp_feasible(system: LinearSystem) -> LpResult:
    """Exact decision of feasibility; returns a rational point when feasible."""
    n = system.num_vars
    # columns: x_k for nonneg k; x_k = p_k - q_k for free k; one slack per inequality
    col = {}
    ncols = 0
    for k in range(n):
        col[k] = ncols
        ncols += 2 if k in system.free else 1
    rows = []
    for con in system.constraints:
        coeffs = {}
        for k, c in con.coeffs.items():
            coeffs[col[k]] = c
            if k in system.free:
                coeffs[col[k] + 1] = -c
        if con.sense != "==":
            coeffs[ncols] = Fraction(1) if con.sense == "<=" else Fraction(-1)
            ncols += 1
        rows.append((coeffs, con.rhs))
    try:
        reduced, fixed = _presolve(rows, ncols)
    except _Infeasible:
        return LpResult(False)
    live = sorted({k for coeffs, _ in reduced for k in coeffs} - set(fixed))
    index = {k: i for i, k in enumerate(live)}
    std_rows = []
    for coeffs, rhs in reduced:
        local = {index[k]: c for k, c in coeffs.items()}
        if rhs < 0:
            local = {k: -c for k, c in local.items()}
            rhs = -rhs
        std_rows.append((local, rhs))
    sol, pivots = _phase_one(std_rows, len(live))
    if sol is None:
        return LpResult(False, pivots=pivots)
    full = [Fraction(0)] * ncols
    for k, v in fixed.items():
        full[k] = v
    for k, i in index.items():
        full[k] = sol[i]
    point = []
    for k in range(n):
        v = full[col[k]]
        if k in system.free:
            v -= full[col[k] + 1]
        point.append(v)
    if not system.check(point):
        raise AssertionError("simplex produced a point violating the system")
    return LpResult(True, tuple(point), pivots)


def system_from_rows(num_vars: int, rows: Iterable, free: Iterable[int] = ()) -> LinearSystem:
    """Build a system from (coeffs, sense, rhs) triples."""
    system = LinearSystem(num_vars, free=frozenset(free))
    for coeffs, sense, rhs in rows:
        system.add(coeffs, sense, rhs)
    return system
