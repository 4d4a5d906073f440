"""The quantum minion over a finite-dimensional Hilbert space.

Subspaces are carried as explicit orthonormal bases (columns of a d x k
array); projectors are derived from them on demand.  Minors concatenate
bases, so minor-preservation of the skeletal and dictator maps is exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import TAU_ALG
from .errors import ArityMismatch, MalformedInput, VerificationFailure
from .minions import (
    DictatorElement,
    MatrixElement,
    MinionHandle,
    MinorMap,
    SkeletalElement,
)
from .structures import Homomorphism, Structure, check_similar, structure_from_dict, structure_to_dict

FIELDS = ("real", "complex")


@dataclass(frozen=True)
class SpaceConfig:
    field: str
    dimension: int

    def __post_init__(self):
        if self.field not in FIELDS:
            raise MalformedInput(f"field must be one of {FIELDS}, got {self.field!r}")
        if self.dimension < 1:
            raise MalformedInput("dimension must be at least 1")

    @property
    def dtype(self):
        return complex if self.field == "complex" else float

    def identity(self) -> np.ndarray:
        return np.eye(self.dimension, dtype=self.dtype)

    def to_doc(self) -> dict:
        return {"field": self.field, "dimension": self.dimension}

    @classmethod
    def from_doc(cls, doc) -> "SpaceConfig":
        return cls(doc["field"], int(doc["dimension"]))


# ---------------------------------------------------------------------------
# Projector helpers

def projector(basis: np.ndarray) -> np.ndarray:
    return basis @ basis.conj().T


def op_norm(A: np.ndarray) -> float:
    # Frobenius bounds the spectral norm from above; skip the SVD when it is tiny
    fro = float(np.linalg.norm(A))
    if fro <= 1e-13:
        return fro
    return float(np.linalg.norm(A, 2))


def op_norms(A: np.ndarray) -> np.ndarray:
    """Spectral norms of a stack of matrices (last two axes), same shortcut as op_norm."""
    fro = np.sqrt(np.sum((A * A.conj()).real, axis=(-2, -1)))
    out = fro.copy()
    big = fro > 1e-13
    if big.any():
        out[big] = np.linalg.norm(A[big], 2, axis=(-2, -1))
    return out


def _products(P: Sequence[np.ndarray]) -> np.ndarray:
    """P[0][y0] @ P[1][y1] @ ... for every (y0, y1, ..) in lexicographic order."""
    d = P[0].shape[-1]
    prod = P[0]
    for Pi in P[1:]:
        prod = np.matmul(prod[:, None], Pi[None, :]).reshape(-1, d, d)
    return prod


def is_projector(p: np.ndarray, tol: float = TAU_ALG) -> bool:
    return op_norm(p - p.conj().T) <= tol and op_norm(p @ p - p) <= tol


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def range_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the range of an (approximate) projector."""
    herm = (p + p.conj().T) / 2
    d = herm.shape[0]
    # all eigenvalues below 1/2, or all above: no eigen-decomposition needed
    if np.linalg.norm(herm) < 0.5:
        return np.zeros((d, 0), dtype=herm.dtype)
    if np.linalg.norm(herm - np.eye(d)) < 0.5:
        return np.eye(d, dtype=herm.dtype)
    vals, vecs = np.linalg.eigh(herm)
    return vecs[:, vals > 0.5]


def _orthonormalize(B: np.ndarray) -> np.ndarray:
    if B.shape[1] == 0:
        return B
    U, _, Vh = np.linalg.svd(B, full_matrices=False)
    return U @ Vh


def subspace_sum(*bases: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the sum of the spans."""
    stacked = np.hstack(bases)
    if stacked.shape[1] == 0:
        return stacked
    U, s, _ = np.linalg.svd(stacked, full_matrices=False)
    return U[:, s > tol]


# ---------------------------------------------------------------------------
# Quantum minion elements

class QElement:
    """A tuple of pairwise-orthogonal subspaces summing to the whole space."""

    __slots__ = ("config", "blocks", "_projectors")

    def __init__(self, config: SpaceConfig, blocks: Sequence[np.ndarray], tol: float = TAU_ALG,
                 validate: bool = True):
        d = config.dimension
        clean = []
        for b in blocks:
            arr = np.asarray(b, dtype=config.dtype)
            if arr.size == 0:
                arr = np.zeros((d, 0), dtype=config.dtype)
            if arr.ndim != 2 or arr.shape[0] != d:
                raise MalformedInput(f"block of shape {arr.shape} in dimension {d}")
            arr.setflags(write=False)
            clean.append(arr)
        if not clean:
            raise MalformedInput("quantum element needs arity >= 1")
        self.config = config
        self.blocks = tuple(clean)
        self._projectors = None
        if validate:
            err = self.basis_residual()
            if err > tol:
                raise MalformedInput(f"blocks do not form an orthonormal basis (residual {err:.3g})")

    @classmethod
    def from_basis(cls, config: SpaceConfig, basis: np.ndarray, sizes: Sequence[int],
                   tol: float = TAU_ALG) -> "QElement":
        """Consecutive column slices of one basis matrix; validated once as a whole."""
        d = config.dimension
        basis = np.array(basis, dtype=config.dtype)
        if basis.shape != (d, d) or sum(sizes) != d:
            raise MalformedInput(f"basis of shape {basis.shape} split as {list(sizes)} in dimension {d}")
        err = float(np.max(np.abs(basis.conj().T @ basis - np.eye(d)), initial=0.0))
        if err > tol:
            raise MalformedInput(f"blocks do not form an orthonormal basis (residual {err:.3g})")
        basis.setflags(write=False)
        ends = np.cumsum(sizes)
        self = object.__new__(cls)
        self.config = config
        self.blocks = tuple(basis[:, e - k:e] for e, k in zip(ends, sizes))
        self._projectors = None
        return self

    @property
    def arity(self) -> int:
        return len(self.blocks)

    def basis(self) -> np.ndarray:
        return np.hstack(self.blocks)

    def basis_residual(self) -> float:
        B = self.basis()
        if B.shape[1] != self.config.dimension:
            return math.inf
        return float(np.max(np.abs(B.conj().T @ B - np.eye(B.shape[1]))))

    def projectors(self) -> list[np.ndarray]:
        if self._projectors is None:
            self._projectors = [projector(b) for b in self.blocks]
        return self._projectors

    def essential(self) -> list[int]:
        return [i for i, b in enumerate(self.blocks) if b.shape[1] > 0]

    def minor(self, pi: MinorMap) -> "QElement":
        if pi.source_arity != self.arity:
            raise ArityMismatch(f"element has arity {self.arity} but minor map expects {pi.source_arity}")
        d = self.config.dimension
        merged = []
        for j in range(pi.target_arity):
            parts = [self.blocks[i] for i in pi.preimage(j)]
            merged.append(np.hstack(parts) if parts else np.zeros((d, 0), dtype=self.config.dtype))
        return QElement(self.config, merged, validate=False)

    def distance(self, other: "QElement") -> float:
        if self.arity != other.arity or self.config != other.config:
            return math.inf
        return float(op_norms(np.array(self.projectors()) - np.array(other.projectors())).max(initial=0.0))

    def close_to(self, other: "QElement", tol: float = TAU_ALG) -> bool:
        return self.distance(other) <= tol

    def __repr__(self):
        dims = [b.shape[1] for b in self.blocks]
        return f"QElement({self.config.field}, d={self.config.dimension}, dims={dims})"

    def to_doc(self) -> dict:
        return {**self.config.to_doc(), "blocks": [_basis_to_doc(b, self.config) for b in self.blocks]}

    @classmethod
    def from_doc(cls, doc, tol: float = TAU_ALG) -> "QElement":
        cfg = SpaceConfig(doc["field"], int(doc["dimension"]))
        blocks = [_basis_from_doc(b, cfg) for b in doc["blocks"]]
        return cls(cfg, blocks, tol=tol)


def _scalar_doc(z, cfg):
    return [float(z.real), float(z.imag)] if cfg.field == "complex" else float(np.real(z))


def _scalar_from(v, cfg):
    if cfg.field == "complex":
        if isinstance(v, (list, tuple)):
            return complex(v[0], v[1])
        return complex(v)
    if isinstance(v, (list, tuple)):
        if len(v) > 1 and v[1] != 0:
            raise MalformedInput("imaginary entry in a real-field document")
        return float(v[0])
    return float(v)


def _basis_to_doc(B, cfg):
    # each vector is one entry of the block list
    return [[_scalar_doc(z, cfg) for z in B[:, k]] for k in range(B.shape[1])]


def _basis_from_doc(vectors, cfg):
    d = cfg.dimension
    if not vectors:
        return np.zeros((d, 0), dtype=cfg.dtype)
    cols = [[_scalar_from(v, cfg) for v in vec] for vec in vectors]
    return np.array(cols, dtype=cfg.dtype).T


def q_minor(q: QElement, pi: MinorMap) -> QElement:
    return q.minor(pi)


def random_unitary(rng: np.random.Generator, config: SpaceConfig) -> np.ndarray:
    d = config.dimension
    A = rng.standard_normal((d, d))
    if config.field == "complex":
        A = A + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def sample_qelement(rng: np.random.Generator, config: SpaceConfig, ell: int) -> QElement:
    U = random_unitary(rng, config)
    owner = rng.integers(0, ell, size=config.dimension)
    blocks = [U[:, owner == i] for i in range(ell)]
    return QElement(config, blocks)


def quantum_handle(max_dim: int = 4, field: str = "complex", max_arity: int = 6,
                   fixed_dim: int | None = None) -> MinionHandle:
    def sampler(rng):
        d = fixed_dim or int(rng.integers(1, max_dim + 1))
        return sample_qelement(rng, SpaceConfig(field, d), int(rng.integers(1, max_arity + 1)))

    def member(e, tol=TAU_ALG):
        return isinstance(e, QElement) and e.basis_residual() <= tol

    return MinionHandle(
        name=f"quantum_{field}",
        member=member,
        equal=lambda a, b, tol=TAU_ALG: a.close_to(b, tol),
        arity=lambda e: e.arity,
        sampler=sampler,
        unary=QElement(SpaceConfig(field, fixed_dim or 1), [np.eye(fixed_dim or 1)]),
        max_arity=max_arity,
    )


# ---------------------------------------------------------------------------
# Certificates

class Certificate:
    """Projectors p[x, y] (shape |X| x |Y| x d x d) claimed to witness X -> Y over H."""

    def __init__(self, X: Structure, Y: Structure, config: SpaceConfig, matrices):
        check_similar(X, Y)
        arr = np.asarray(matrices, dtype=config.dtype)
        d = config.dimension
        if arr.shape != (X.domain_size, Y.domain_size, d, d):
            raise MalformedInput(f"matrices have shape {arr.shape}, expected {(X.domain_size, Y.domain_size, d, d)}")
        arr.setflags(write=False)
        self.X, self.Y, self.config, self.p = X, Y, config, arr

    def to_doc(self) -> dict:
        mats = {}
        for x in range(self.X.domain_size):
            for y in range(self.Y.domain_size):
                mats[f"{x}:{y}"] = [[[float(np.real(z)), float(np.imag(z))] for z in row]
                                    for row in self.p[x, y]]
        return {"config": self.config.to_doc(), "X": structure_to_dict(self.X),
                "Y": structure_to_dict(self.Y), "matrices": mats}

    @classmethod
    def from_doc(cls, doc, resolve=None) -> "Certificate":
        resolve = resolve or structure_from_dict
        try:
            cfg = SpaceConfig.from_doc(doc["config"])
            X, Y = resolve(doc["X"]), resolve(doc["Y"])
            d = cfg.dimension
            arr = np.zeros((X.domain_size, Y.domain_size, d, d), dtype=cfg.dtype)
            seen = set()
            for key, rows in doc["matrices"].items():
                x, y = (int(v) for v in key.split(":"))
                arr[x, y] = [[_scalar_from(v, cfg) for v in row] for row in rows]
                seen.add((x, y))
        except (KeyError, ValueError, IndexError, TypeError) as exc:
            raise MalformedInput(f"bad certificate document: {exc}") from exc
        missing = [(x, y) for x in range(X.domain_size) for y in range(Y.domain_size) if (x, y) not in seen]
        if missing:
            raise MalformedInput(f"certificate lacks matrices for {missing[:5]}")
        return cls(X, Y, cfg, arr)


CONDITIONS = ("projector", "Q1", "Q2", "Q3", "orthogonality")


@dataclass
class CertificateReport:
    tol: float
    residuals: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    skipped: tuple = ()

    @property
    def failed_conditions(self) -> list[str]:
        return [c for c in ("projector", "Q1", "Q2", "Q3") if c not in self.skipped and self.residuals.get(c, 0.0) > self.tol]

    @property
    def passed(self) -> bool:
        return not self.failed_conditions

    def to_doc(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "failed_conditions": self.failed_conditions,
            "residuals": dict(self.residuals),
            "skipped": list(self.skipped),
            "witnesses": {k: v[:10] for k, v in self.failures.items()},
        }


def _constraint_vertex_pairs(X: Structure):
    pairs = set()
    for _, t in X.constraints():
        for a in t:
            for b in t:
                pairs.add((min(a, b), max(a, b)))
    return sorted(pairs)


def verify_certificate(c: Certificate, tol: float = TAU_ALG, skip_q2: bool = False) -> CertificateReport:
    """Residual operator norms for projector-ness, (Q1), (Q2), (Q3) and pairwise orthogonality.

    ``skip_q2`` gives the variant without the commutation condition.
    """
    X, Y, p = c.X, c.Y, c.p
    nY = Y.domain_size
    report = CertificateReport(tol, skipped=("Q2",) if skip_q2 else ())

    def note(cond, values, label):
        # values: array of residuals; label(index) -> witness dict, built only for failures
        if values.size == 0:
            return
        report.residuals[cond] = max(report.residuals[cond], float(values.max()))
        for idx in np.argwhere(values > tol):
            idx = tuple(int(i) for i in idx)
            report.failures.setdefault(cond, []).append({**label(idx), "residual": float(values[idx])})

    for cond in CONDITIONS:
        report.residuals[cond] = 0.0

    herm = op_norms(p - np.conj(np.swapaxes(p, -1, -2)))
    if herm.size and herm.max() > tol:
        x, y = np.unravel_index(int(np.argmax(herm)), herm.shape)
        raise MalformedInput(f"p[{x}:{y}] is not self-adjoint (residual {herm[x, y]:.3g})")
    note("projector", op_norms(np.matmul(p, p) - p), lambda i: {"x": i[0], "y": i[1]})

    ident = c.config.identity()
    note("Q1", op_norms(p.sum(axis=1) - ident), lambda i: {"x": i[0]})
    upper = np.triu(np.ones((nY, nY), dtype=bool), k=1)
    orth = op_norms(np.matmul(p[:, :, None], p[:, None, :])) * upper
    note("orthogonality", orth, lambda i: {"x": i[0], "y": i[1], "y2": i[2]})

    if not skip_q2:
        pairs = np.array(_constraint_vertex_pairs(X), dtype=int).reshape(-1, 2)
        if len(pairs):
            A, B = p[pairs[:, 0]][:, :, None], p[pairs[:, 1]][:, None, :]
            comm = op_norms(np.matmul(A, B) - np.matmul(B, A))
            comm[pairs[:, 0] == pairs[:, 1]] *= upper
            note("Q2", comm, lambda i: {"x": int(pairs[i[0], 0]), "x2": int(pairs[i[0], 1]),
                                        "y": i[1], "y2": i[2]})

    by_symbol = {}
    for sym, t in X.constraints():
        by_symbol.setdefault(sym, []).append(t)
    for sym, tuples in by_symbol.items():
        r = len(tuples[0])
        T = np.array(tuples, dtype=int)
        ybars = list(itertools.product(range(nY), repeat=r))
        outside = [i for i, ybar in enumerate(ybars) if ybar not in Y.relations[sym]]
        if not outside:
            continue
        # prod[k, i] = p[t_0, ybar_0] @ p[t_1, ybar_1] @ ... for tuple k and the i-th non-tuple ybar
        Yb = np.array([ybars[i] for i in outside], dtype=int)
        prod = p[T[:, 0][:, None], Yb[:, 0][None, :]]
        for j in range(1, r):
            prod = np.matmul(prod, p[T[:, j][:, None], Yb[:, j][None, :]])
        note("Q3", op_norms(prod), lambda i: {"relation": sym, "x": [int(v) for v in T[i[0]]],
                                              "y": [int(v) for v in Yb[i[1]]]})
    return report


def cert_from_classical(f: Homomorphism, config: SpaceConfig) -> Certificate:
    X, Y = f.source, f.target
    d = config.dimension
    arr = np.zeros((X.domain_size, Y.domain_size, d, d), dtype=config.dtype)
    for x in range(X.domain_size):
        arr[x, f.map[x]] = config.identity()
    return Certificate(X, Y, config, arr)


def mixed_classical_certificate(X: Structure, Y: Structure, homs: Sequence[Sequence[int]],
                                config: SpaceConfig, rng: np.random.Generator) -> Certificate:
    """Direct sum of classical homomorphisms, one per basis vector, rotated by a random unitary."""
    d = config.dimension
    U = random_unitary(rng, config)
    picks = [homs[int(k)] for k in rng.integers(0, len(homs), size=d)]
    arr = np.zeros((X.domain_size, Y.domain_size, d, d), dtype=config.dtype)
    for x in range(X.domain_size):
        for y in range(Y.domain_size):
            diag = np.array([1.0 if h[x] == y else 0.0 for h in picks])
            arr[x, y] = (U * diag) @ U.conj().T
    return Certificate(X, Y, config, arr)


# ---------------------------------------------------------------------------
# Free structure of the quantum minion

@dataclass
class FreeTestResult:
    ok: bool
    witness: QElement | None = None
    reason: str = ""
    residual: float = 0.0

    def __bool__(self):
        return self.ok


def free_relation_test(elements: Sequence[QElement], relation: str, Y: Structure,
                       tol: float = TAU_ALG, witness: bool = True) -> FreeTestResult:
    """Is (M_1..M_r) in the relation of the free structure generated by Y?

    With ``witness=False`` the common preimage is not materialised: once the
    projectors commute and the non-tuple products vanish, the products over
    R^Y are its block projectors, and the minor identities are checked on them.
    """
    n = Y.domain_size
    r = Y.signature.arity(relation)
    if len(elements) != r:
        raise ArityMismatch(f"relation {relation} has arity {r}, got {len(elements)} elements")
    for M in elements:
        if M.arity != n:
            raise ArityMismatch(f"element arity {M.arity} differs from |Y| = {n}")
    cfg = elements[0].config
    if any(M.config != cfg for M in elements):
        raise MalformedInput("elements live in different spaces")
    P = [np.array(M.projectors()) for M in elements]

    worst = 0.0
    for i in range(r):
        for j in range(i + 1, r):
            ij = np.matmul(P[i][:, None], P[j][None, :])
            ji = np.matmul(P[j][None, :], P[i][:, None])
            comm = op_norms(ij - ji)
            worst = max(worst, float(comm.max()))
            if comm.max() > tol:
                y, y2 = np.unravel_index(int(np.argmax(comm > tol)), comm.shape)
                return FreeTestResult(False, reason=f"commutator of entries {i}:{y} and {j}:{y2}",
                                      residual=float(comm[y, y2]))

    allowed = sorted(Y.relations[relation])
    prods = _products(P)
    # products are listed lexicographically, so ybar sits at its base-n code
    place = n ** np.arange(r - 1, -1, -1)
    codes = np.array(allowed, dtype=int).reshape(-1, r) @ place
    outside = np.ones(n ** r, dtype=bool)
    outside[codes] = False
    out_idx = np.flatnonzero(outside)
    norms = op_norms(prods[out_idx])
    if norms.size:
        worst = max(worst, float(norms.max()))
        if norms.max() > tol:
            k = int(out_idx[np.argmax(norms > tol)])
            ybar = [int(v) for v in np.unravel_index(k, (n,) * r)]
            return FreeTestResult(False, reason=f"nonzero product on non-tuple {ybar}", residual=float(norms[np.argmax(norms > tol)]))
    if not allowed:
        return FreeTestResult(False, reason="relation is empty in Y")

    d = cfg.dimension
    inside = prods[codes]
    A = np.array(allowed, dtype=int)
    onehot = np.zeros((r, n, len(allowed)))
    cols = np.arange(len(allowed))
    for i in range(r):
        onehot[i, A[:, i], cols] = 1.0
    w = None
    if witness:
        fro = np.sqrt(np.sum((inside * inside.conj()).real, axis=(-2, -1)))
        live = np.flatnonzero(fro >= 0.5)
        parts = [range_basis(inside[a]) for a in live]
        sizes = [pb.shape[1] for pb in parts]
        if sum(sizes) != d:
            return FreeTestResult(False, reason="witness ranges do not add up to the space", residual=1.0)
        basis = _orthonormalize(np.hstack(parts))
        all_sizes = np.zeros(len(allowed), dtype=int)
        all_sizes[live] = sizes
        try:
            w = QElement.from_basis(cfg, basis, all_sizes, tol=max(tol, 1e-9))
        except MalformedInput as exc:
            return FreeTestResult(False, reason=str(exc), residual=1.0)
        W = np.zeros((len(allowed), d, d), dtype=cfg.dtype)
        for a in live:
            W[a] = projector(w.blocks[a])
        w._projectors = list(W)
    else:
        W = inside
    # the minor along coordinate i has projectors sum_{ybar: ybar_i = y} W_ybar (orthogonal blocks)
    merged = np.einsum("iya,ade->iyde", onehot, W)
    dists = op_norms(merged - np.array(P)).max(axis=1)
    for i, dist in enumerate(dists):
        worst = max(worst, float(dist))
        if dist > tol:
            return FreeTestResult(False, reason=f"minor identity fails at coordinate {i}", residual=float(dist))
    return FreeTestResult(True, witness=w, residual=worst)


def cert_to_free_hom(c: Certificate, tol: float = TAU_ALG) -> list[QElement]:
    """x -> (range p[x,0], .., range p[x,n-1]) in the quantum minion of arity |Y|."""
    report = verify_certificate(c, tol)
    if not report.passed:
        raise VerificationFailure(f"certificate fails {report.failed_conditions}", report)
    out = []
    d = c.config.dimension
    fro = np.sqrt(np.sum((c.p * c.p.conj()).real, axis=(-2, -1)))
    empty = np.zeros((d, 0), dtype=c.config.dtype)
    for x in range(c.X.domain_size):
        blocks = [range_basis(c.p[x, y]) if fro[x, y] >= 0.5 else empty for y in range(c.Y.domain_size)]
        sizes = [b.shape[1] for b in blocks]
        basis = _orthonormalize(np.hstack(blocks))
        out.append(QElement.from_basis(c.config, basis, sizes, tol=max(tol, 1e-9)))
    return out


def free_hom_to_cert(f: Sequence[QElement], X: Structure, Y: Structure, config: SpaceConfig,
                     tol: float = TAU_ALG) -> Certificate:
    """p[x, y] = projector onto f(x)_y, after checking every constrained tuple."""
    check_similar(X, Y)
    if len(f) != X.domain_size:
        raise MalformedInput(f"map has {len(f)} entries, X has {X.domain_size} vertices")
    for q in f:
        if q.config != config:
            raise MalformedInput("element space differs from the requested configuration")
    for sym, t in X.constraints():
        res = free_relation_test([f[v] for v in t], sym, Y, tol, witness=False)
        if not res.ok:
            raise VerificationFailure(f"tuple {sym}{list(t)} is not in the free structure: {res.reason}",
                                      {"relation": sym, "tuple": list(t), "reason": res.reason})
    arr = np.array([[P for P in q.projectors()] for q in f])
    return Certificate(X, Y, config, arr)


# ---------------------------------------------------------------------------
# Dimension two: Hopf map and the dictator selection

def hopf_map(v) -> tuple[float, complex]:
    """(x, y) -> (|x|^2 - |y|^2, 2 x conj(y)) on the normalised input."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape != (2,):
        raise MalformedInput("hopf_map needs a vector of length 2")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise MalformedInput("hopf_map is undefined at the zero vector")
    x, y = v / norm
    return float((x * x.conjugate() - y * y.conjugate()).real), complex(2 * x * y.conjugate())


def in_antipodal_half(t: float, z: complex) -> bool:
    """U = {t > 0} + {t = 0, Re z > 0} + {t = 0, z = i}."""
    return t > 0 or (t == 0 and z.real > 0) or (t == 0 and z == 1j)


@dataclass(frozen=True)
class HopfPartition:
    """A set C in a 2-dimensional space meeting every orthogonal pair of nonzero vectors once."""

    config: SpaceConfig

    def __post_init__(self):
        if self.config.dimension != 2:
            raise MalformedInput("the partition is defined in dimension 2")

    def contains(self, v) -> bool:
        if self.config.field == "complex":
            return in_antipodal_half(*hopf_map(v))
        a, b = np.real(np.asarray(v, dtype=complex)).reshape(-1)
        if a == 0 and b == 0:
            raise MalformedInput("zero vector")
        theta = math.atan2(b, a) % math.pi
        return theta < math.pi / 2

    def _score(self, v):
        # total order agreeing with membership whenever exactly one of two orthogonal vectors is in C
        if self.config.field == "complex":
            t, z = hopf_map(v)
            return (t, z.real, z.imag)
        a, b = np.real(np.asarray(v, dtype=complex)).reshape(-1)
        return (-(math.atan2(b, a) % math.pi),)


def xi_dictator(q: QElement) -> DictatorElement:
    """Quantum element in dimension <= 2 -> its distinguished essential coordinate."""
    if q.config.dimension > 2:
        raise MalformedInput("the dictator map is defined only for dimension <= 2")
    ess = q.essential()
    if len(ess) == 1:
        return DictatorElement(q.arity, ess[0])
    if len(ess) != 2:
        raise MalformedInput(f"invalid element: {len(ess)} essential coordinates")
    i, j = ess
    part = HopfPartition(q.config)
    vi, vj = q.blocks[i][:, 0], q.blocks[j][:, 0]
    in_i, in_j = part.contains(vi), part.contains(vj)
    if in_i != in_j:
        return DictatorElement(q.arity, i if in_i else j)
    # rounding put both or neither vector in C; fall back to an index-free comparison
    return DictatorElement(q.arity, i if part._score(vi) > part._score(vj) else j)


def xi_sdp(q: QElement, w=None, tol: float = TAU_ALG) -> MatrixElement:
    """Row i is the conjugated coordinate row of the projection of the probe w onto q_i."""
    d = q.config.dimension
    if w is None:
        w = np.zeros(d)
        w[0] = 1.0
    w = np.asarray(w, dtype=complex).reshape(-1)
    if w.shape != (d,):
        raise MalformedInput(f"probe has length {w.shape[0]}, expected {d}")
    if abs(np.linalg.norm(w) - 1.0) > tol:
        raise MalformedInput("probe vector must have norm 1")
    rows = [(b @ (b.conj().T @ w)).conj() for b in q.blocks]
    return MatrixElement(np.array(rows, dtype=complex))


def xi_skeletal(q: QElement) -> SkeletalElement:
    """One column per stored basis vector; a vector of block i gives the unit column e_i."""
    cols = []
    for i, b in enumerate(q.blocks):
        unit = [0] * q.arity
        unit[i] = 1
        cols.extend([unit] * b.shape[1])
    return SkeletalElement(q.arity, cols)
