"""Minions, minor maps and sampling harnesses.

Linear minions are matrices whose minors merge rows: row ``j`` of
``M_{/pi}`` is the sum of the rows of ``M`` indexed by ``pi^{-1}(j)``, and
an empty preimage yields a zero row.  Indices are 0-based internally and
1-based in JSON documents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .config import TAU_ALG
from .errors import ArityMismatch, MalformedInput, MembershipError


# ---------------------------------------------------------------------------
# Minor maps

@dataclass(frozen=True)
class MinorMap:
    source_arity: int
    target_arity: int
    map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(int(v) for v in self.map))
        if self.source_arity < 1 or self.target_arity < 1:
            raise ValueError("arities must be positive")
        if len(self.map) != self.source_arity:
            raise ValueError(f"map has {len(self.map)} entries, expected {self.source_arity}")
        if any(v < 0 or v >= self.target_arity for v in self.map):
            raise ValueError(f"map {self.map} leaves [0, {self.target_arity})")

    @classmethod
    def identity(cls, ell: int) -> "MinorMap":
        return cls(ell, ell, tuple(range(ell)))

    @classmethod
    def from_one_based(cls, values: Sequence[int], target_arity: int) -> "MinorMap":
        return cls(len(values), target_arity, tuple(v - 1 for v in values))

    def __call__(self, i: int) -> int:
        return self.map[i]

    def then(self, other: "MinorMap") -> "MinorMap":
        """The composite ``other o self``."""
        if other.source_arity != self.target_arity:
            raise ArityMismatch("cannot compose minor maps with mismatched arities")
        return MinorMap(self.source_arity, other.target_arity, tuple(other.map[v] for v in self.map))

    def preimage(self, j: int) -> list[int]:
        return [i for i, v in enumerate(self.map) if v == j]

    def matrix(self) -> np.ndarray:
        P = np.zeros((self.target_arity, self.source_arity))
        P[list(self.map), list(range(self.source_arity))] = 1.0
        return P

    def to_doc(self) -> dict:
        return {"source_arity": self.source_arity, "target_arity": self.target_arity,
                "map": [v + 1 for v in self.map]}

    @classmethod
    def from_doc(cls, doc) -> "MinorMap":
        return cls.from_one_based(doc["map"], doc["target_arity"])


def random_minor_map(rng: np.random.Generator, ell: int, ell2: int) -> MinorMap:
    return MinorMap(ell, ell2, tuple(int(v) for v in rng.integers(0, ell2, size=ell)))


def _check_arity(element_arity: int, pi: MinorMap):
    if element_arity != pi.source_arity:
        raise ArityMismatch(f"element has arity {element_arity} but minor map expects {pi.source_arity}")


# ---------------------------------------------------------------------------
# Element types

@dataclass(frozen=True)
class DictatorElement:
    """The unit vector e_{index; arity}; ``index`` is 0-based."""

    arity: int
    index: int

    def __post_init__(self):
        if not 0 <= self.index < self.arity:
            raise MalformedInput(f"dictator index {self.index} outside [0, {self.arity})")

    def minor(self, pi: MinorMap) -> "DictatorElement":
        _check_arity(self.arity, pi)
        return DictatorElement(pi.target_arity, pi.map[self.index])

    def to_doc(self) -> dict:
        return {"arity": self.arity, "index": self.index + 1}

    @classmethod
    def from_doc(cls, doc) -> "DictatorElement":
        return cls(int(doc["arity"]), int(doc["index"]) - 1)


class MatrixElement:
    """A real or complex matrix in a linear minion over (R,+) or (C,+)."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        arr = np.array(rows)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise MalformedInput("matrix element needs a 2-d array with at least one row")
        if np.iscomplexobj(arr):
            arr = arr.astype(complex)
        else:
            arr = arr.astype(float)
        arr.setflags(write=False)
        self.rows = arr

    @property
    def arity(self) -> int:
        return self.rows.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.rows)

    def minor(self, pi: MinorMap) -> "MatrixElement":
        _check_arity(self.arity, pi)
        out = np.zeros((pi.target_arity, self.rows.shape[1]), dtype=self.rows.dtype)
        for i, j in enumerate(pi.map):
            out[j] += self.rows[i]
        return MatrixElement(out)

    def close_to(self, other: "MatrixElement", tol: float = TAU_ALG) -> bool:
        if self.rows.shape != other.rows.shape:
            return False
        return bool(np.max(np.abs(self.rows - other.rows), initial=0.0) <= tol)

    def __repr__(self):
        kind = "complex" if self.is_complex else "real"
        return f"MatrixElement({kind} {self.rows.shape[0]}x{self.rows.shape[1]})"

    def to_doc(self) -> dict:
        if self.is_complex:
            data = [[[float(z.real), float(z.imag)] for z in row] for row in self.rows]
            return {"field": "complex", "rows": data}
        return {"field": "real", "rows": [[float(x) for x in row] for row in self.rows]}

    @classmethod
    def from_doc(cls, doc) -> "MatrixElement":
        if doc.get("field", "real") == "complex":
            return cls(np.array([[complex(a, b) for a, b in row] for row in doc["rows"]], dtype=complex))
        return cls(np.array(doc["rows"], dtype=float))


def sdp_residual(M: MatrixElement) -> float:
    """max(|off-diagonal of M M*|, |trace - 1|)."""
    G = M.rows @ M.rows.conj().T
    off = G - np.diag(np.diag(G))
    return float(max(np.max(np.abs(off), initial=0.0), abs(np.trace(G) - 1.0)))


def is_sdp_member(M: MatrixElement, tol: float = TAU_ALG, complex_ok: bool = True) -> bool:
    if M.is_complex and not complex_ok:
        return False
    return sdp_residual(M) <= tol


class SkeletalElement:
    """Skeletal stochastic matrix stored by its columns (exact rationals).

    Columns are kept in a canonical sorted order: they are indexed by an
    unordered set, so two elements are equal iff their column multisets are.
    """

    __slots__ = ("arity", "columns")

    def __init__(self, arity: int, columns):
        self.arity = int(arity)
        cols = []
        for col in columns:
            col = tuple(Fraction(v) for v in col)
            if len(col) != self.arity:
                raise MalformedInput(f"column of length {len(col)} in arity-{self.arity} element")
            cols.append(col)
        if not cols:
            raise MalformedInput("skeletal element needs at least one column")
        self.columns = tuple(sorted(cols))

    def minor(self, pi: MinorMap) -> "SkeletalElement":
        _check_arity(self.arity, pi)
        new_cols = []
        for col in self.columns:
            out = [Fraction(0)] * pi.target_arity
            for i, j in enumerate(pi.map):
                out[j] += col[i]
            new_cols.append(out)
        return SkeletalElement(pi.target_arity, new_cols)

    def __eq__(self, other):
        if not isinstance(other, SkeletalElement):
            return NotImplemented
        return self.arity == other.arity and self.columns == other.columns

    def __hash__(self):
        return hash((self.arity, self.columns))

    def __repr__(self):
        return f"SkeletalElement(arity={self.arity}, columns={len(self.columns)})"

    def rows(self) -> list[list[Fraction]]:
        return [[col[i] for col in self.columns] for i in range(self.arity)]

    def is_stochastic(self) -> bool:
        return all(v >= 0 for col in self.columns for v in col) and all(sum(col) == 1 for col in self.columns)

    def is_skeletal(self) -> bool:
        present = set(self.columns)
        for i in range(self.arity):
            if any(col[i] != 0 for col in self.columns):
                unit = tuple(Fraction(int(k == i)) for k in range(self.arity))
                if unit not in present:
                    return False
        return True

    def to_doc(self) -> dict:
        return {"arity": self.arity, "rows": [[str(v) for v in row] for row in self.rows()]}

    @classmethod
    def from_doc(cls, doc) -> "SkeletalElement":
        rows = [[Fraction(v) for v in row] for row in doc["rows"]]
        ncols = len(rows[0]) if rows else 0
        return cls(doc["arity"], [[rows[i][c] for i in range(len(rows))] for c in range(ncols)])


def minor(e, pi: MinorMap):
    """Uniform minor operation on any element type of this library."""
    return e.minor(pi)


# ---------------------------------------------------------------------------
# Handles and samplers

@dataclass
class MinionHandle:
    name: str
    member: Callable[[Any, float], bool]
    equal: Callable[[Any, Any, float], bool]
    arity: Callable[[Any], int]
    sampler: Callable[[np.random.Generator], Any] | None = None
    unary: Any = None
    max_arity: int = 6
    exact: bool = False

    def minor(self, e, pi: MinorMap):
        return e.minor(pi)


def _random_arity(rng, max_arity):
    return int(rng.integers(1, max_arity + 1))


def sample_dictator(rng: np.random.Generator, max_arity: int = 6) -> DictatorElement:
    ell = _random_arity(rng, max_arity)
    return DictatorElement(ell, int(rng.integers(0, ell)))


def _random_orthonormal(rng, n: int, complex_field: bool) -> np.ndarray:
    A = rng.standard_normal((n, n))
    if complex_field:
        A = A + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def sample_sdp(rng: np.random.Generator, max_arity: int = 5, max_cols: int = 4,
               complex_field: bool = False) -> MatrixElement:
    """Rows are scaled members of a random orthonormal set, so M M* is diagonal."""
    ell = _random_arity(rng, max_arity)
    c = int(rng.integers(1, max_cols + 1))
    Q = _random_orthonormal(rng, c, complex_field)
    k = int(rng.integers(1, min(ell, c) + 1))
    weights = rng.dirichlet(np.ones(k))
    positions = rng.choice(ell, size=k, replace=False)
    M = np.zeros((ell, c), dtype=complex if complex_field else float)
    for w, pos, q in zip(weights, positions, Q[:k]):
        M[pos] = np.sqrt(w) * q
    return MatrixElement(M)


def sample_skeletal(rng: np.random.Generator, max_arity: int = 6, max_extra: int = 3) -> SkeletalElement:
    ell = _random_arity(rng, max_arity)
    k = int(rng.integers(1, ell + 1))
    support = sorted(int(v) for v in rng.choice(ell, size=k, replace=False))
    cols = []
    for i in support:
        cols.append([Fraction(int(r == i)) for r in range(ell)])
    for _ in range(int(rng.integers(0, max_extra + 1))):
        weights = [int(v) for v in rng.integers(0, 5, size=k)]
        if sum(weights) == 0:
            weights[0] = 1
        total = sum(weights)
        col = [Fraction(0)] * ell
        for i, w in zip(support, weights):
            col[i] = Fraction(w, total)
        cols.append(col)
    return SkeletalElement(ell, cols)


def dictator_handle(max_arity: int = 6) -> MinionHandle:
    return MinionHandle(
        name="dictator",
        member=lambda e, tol=0.0: isinstance(e, DictatorElement),
        equal=lambda a, b, tol=0.0: a == b,
        arity=lambda e: e.arity,
        sampler=lambda rng: sample_dictator(rng, max_arity),
        unary=DictatorElement(1, 0),
        max_arity=max_arity,
        exact=True,
    )


def sdp_handle(complex_field: bool = False, max_arity: int = 5, max_cols: int = 4) -> MinionHandle:
    return MinionHandle(
        name="sdp_c" if complex_field else "sdp",
        member=lambda e, tol=TAU_ALG: isinstance(e, MatrixElement)
        and is_sdp_member(e, tol, complex_ok=complex_field),
        equal=lambda a, b, tol=TAU_ALG: a.close_to(b, tol),
        arity=lambda e: e.arity,
        sampler=lambda rng: sample_sdp(rng, max_arity, max_cols, complex_field),
        unary=MatrixElement(np.ones((1, 1), dtype=complex if complex_field else float)),
        max_arity=max_arity,
    )


def skeletal_handle(max_arity: int = 6) -> MinionHandle:
    return MinionHandle(
        name="skeletal",
        member=lambda e, tol=0.0: isinstance(e, SkeletalElement) and e.is_stochastic() and e.is_skeletal(),
        equal=lambda a, b, tol=0.0: a == b,
        arity=lambda e: e.arity,
        sampler=lambda rng: sample_skeletal(rng, max_arity),
        unary=SkeletalElement(1, [[1]]),
        max_arity=max_arity,
        exact=True,
    )


# ---------------------------------------------------------------------------
# Reports

@dataclass
class Failure:
    kind: str
    detail: dict


@dataclass
class CheckReport:
    name: str
    samples: int
    failures: list[Failure] = field(default_factory=list)
    max_residual: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "ok": self.ok,
            "failure_count": len(self.failures),
            "max_residual": self.max_residual,
            "failures": [{"kind": f.kind, **f.detail} for f in self.failures[:20]],
        }


def _residual(a, b) -> float:
    if isinstance(a, MatrixElement) and isinstance(b, MatrixElement):
        if a.rows.shape != b.rows.shape:
            return float("inf")
        return float(np.max(np.abs(a.rows - b.rows), initial=0.0))
    residual = getattr(a, "distance", None)
    if residual is not None:
        return float(residual(b))
    return 0.0 if a == b else float("inf")


def _describe(e) -> Any:
    doc = getattr(e, "to_doc", None)
    return doc() if doc else repr(e)


def check_minion_axioms(h: MinionHandle, samples: int = 500, seed: int = 0,
                        tol: float = TAU_ALG) -> CheckReport:
    """Identity-minor and composition axioms, plus closure of membership."""
    rng = np.random.default_rng(seed)
    report = CheckReport(f"axioms:{h.name}", samples)
    if h.sampler is None:
        raise MalformedInput(f"minion {h.name} has no sampler")
    for n in range(samples):
        e = h.sampler(rng)
        ell = h.arity(e)
        ell2 = _random_arity(rng, h.max_arity)
        ell3 = _random_arity(rng, h.max_arity)
        pi = random_minor_map(rng, ell, ell2)
        pi2 = random_minor_map(rng, ell2, ell3)
        if not h.member(e, tol):
            report.failures.append(Failure("sample-not-member", {"sample": n, "element": _describe(e)}))
            continue
        ident = h.minor(e, MinorMap.identity(ell))
        r_id = _residual(ident, e)
        two_step = h.minor(h.minor(e, pi), pi2)
        one_step = h.minor(e, pi.then(pi2))
        r_comp = _residual(two_step, one_step)
        report.max_residual = max(report.max_residual, r_id, r_comp)
        if not h.equal(ident, e, tol):
            report.failures.append(Failure("identity", {"sample": n, "element": _describe(e)}))
        if not h.equal(two_step, one_step, tol):
            report.failures.append(Failure("composition", {
                "sample": n, "element": _describe(e), "pi": pi.to_doc(), "pi2": pi2.to_doc()}))
        if not h.member(h.minor(e, pi), tol):
            report.failures.append(Failure("minor-not-member", {
                "sample": n, "element": _describe(e), "pi": pi.to_doc()}))
    return report


def dictator_into(h: MinionHandle, rng: np.random.Generator | None = None) -> Callable[[DictatorElement], Any]:
    """The map e_{i;l} -> M_{/pi_{i,l}} for a fixed unary element M of ``h``."""
    base = h.unary
    if base is None:
        if h.sampler is None:
            raise MalformedInput(f"no unary element obtainable for minion {h.name}")
        sample = h.sampler(rng or np.random.default_rng(0))
        base = h.minor(sample, MinorMap(h.arity(sample), 1, (0,) * h.arity(sample)))
    if h.arity(base) != 1:
        raise MalformedInput("the chosen base element is not unary")

    def xi(e: DictatorElement):
        return h.minor(base, MinorMap(1, e.arity, (e.index,)))

    xi.base = base
    return xi


def theta(M: MatrixElement, tol: float = TAU_ALG) -> MatrixElement:
    """Complex SDP-minion element -> real one by concatenating [Re M | Im M]."""
    if not is_sdp_member(M, tol):
        raise MembershipError(f"input is not in the complex SDP minion (residual {sdp_residual(M):.3g})")
    rows = M.rows
    return MatrixElement(np.hstack([rows.real, rows.imag]) if M.is_complex
                         else np.hstack([rows, np.zeros_like(rows)]))


def check_minor_preserving(
    xi: Callable[[Any], Any],
    source: MinionHandle,
    samples: int = 500,
    seed: int = 0,
    tol: float = TAU_ALG,
    equal: Callable[[Any, Any, float], bool] | None = None,
    pi_sampler: Callable[[np.random.Generator, int], MinorMap] | None = None,
    name: str = "map",
) -> CheckReport:
    """Compare xi(e_{/pi}) with xi(e)_{/pi} on sampled (e, pi)."""
    rng = np.random.default_rng(seed)
    report = CheckReport(f"minor-preserving:{name}", samples)
    eq = equal or (lambda a, b, t: _residual(a, b) <= t)
    if pi_sampler is None:
        def pi_sampler(r, ell):
            return random_minor_map(r, ell, _random_arity(r, source.max_arity))
    for n in range(samples):
        e = source.sampler(rng)
        pi = pi_sampler(rng, source.arity(e))
        lhs = xi(source.minor(e, pi))
        rhs = xi(e).minor(pi)
        report.max_residual = max(report.max_residual, _residual(lhs, rhs))
        if not eq(lhs, rhs, tol):
            report.failures.append(Failure("minor", {
                "sample": n, "element": _describe(e), "pi": pi.to_doc(),
                "lhs": _describe(lhs), "rhs": _describe(rhs)}))
    return report


# ---------------------------------------------------------------------------
# Serialisation

def element_to_doc(e) -> dict:
    if isinstance(e, DictatorElement):
        return {"kind": "dictator", **e.to_doc()}
    if isinstance(e, MatrixElement):
        return {"kind": "matrix", **e.to_doc()}
    if isinstance(e, SkeletalElement):
        return {"kind": "skeletal", **e.to_doc()}
    from .quantum import QElement
    if isinstance(e, QElement):
        return {"kind": "quantum", **e.to_doc()}
    raise TypeError(f"cannot serialise {type(e).__name__}")


def element_from_doc(doc):
    kind = doc.get("kind")
    if kind == "dictator" or (kind is None and "index" in doc):
        return DictatorElement.from_doc(doc)
    if kind == "matrix":
        return MatrixElement.from_doc(doc)
    if kind == "skeletal":
        return SkeletalElement.from_doc(doc)
    if kind == "quantum":
        from .quantum import QElement
        return QElement.from_doc(doc)
    raise MalformedInput(f"unknown element kind {kind!r}")
