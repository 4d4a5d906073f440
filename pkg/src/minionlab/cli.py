"""Command-line entry point: ``minionlab <command> ...``.

Exit codes: 0 definite positive, 1 definite negative, 2 unknown or
inconclusive, 3 data error (bad file, cap exceeded, invalid input),
4 usage error.

Structures are given either as ``zoo:NAME`` (for example ``zoo:C5``,
``zoo:K3``, ``zoo:Z``) or as a path to a structure JSON file.  The
``zoo:`` prefix is checked first, so a file literally named ``zoo:K3``
needs a ``./`` prefix.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any

import numpy as np

from . import advantage, minions, quantum, relaxations, structures
from .config import CAP_POLY, CAP_POWER, CAP_SDP, TAU_ALG, TAU_SDP, RunConfig, default_seed
from .errors import MinionLabError, VerificationFailure

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_UNKNOWN, EXIT_DATA, EXIT_USAGE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# output

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed to 17 significant digits; keys keep insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _text(doc, prefix="") -> list[str]:
    lines = []
    if isinstance(doc, dict):
        for k, v in doc.items():
            if isinstance(v, (dict, list)) and v and any(isinstance(u, (dict, list)) for u in
                                                         (v.values() if isinstance(v, dict) else v)):
                lines.extend(_text(v, f"{prefix}{k}."))
            else:
                lines.append(f"{prefix}{k}: {dumps(v, indent=0).replace(chr(10), '')}")
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            lines.extend(_text(v, f"{prefix}{i}.") if isinstance(v, (dict, list))
                         else [f"{prefix}{i}: {dumps(v, indent=0)}"])
    else:
        lines.append(f"{prefix.rstrip('.')}: {dumps(doc, indent=0)}")
    return lines


def emit(doc, cfg: RunConfig, out=None) -> None:
    out = out or sys.stdout
    if cfg.output_format == "json":
        out.write(dumps(doc) + "\n")
    else:
        out.write("\n".join(_text(doc)) + "\n")


# ---------------------------------------------------------------------------
# inputs

def load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_structure(ref) -> structures.Structure:
    """``zoo:NAME``, a structure JSON path, or an inline structure document."""
    if isinstance(ref, dict):
        return structures.structure_from_dict(ref)
    if ref.startswith("zoo:"):
        return structures.zoo_ref(ref[4:])
    return structures.structure_from_dict(load_json(ref))


def _structure_or_ref(doc):
    return load_structure(doc) if isinstance(doc, (str, dict)) else structures.structure_from_dict(doc)


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(" ", "").split(",") if v != ""]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(" ", "").split(",") if v != ""]


# ---------------------------------------------------------------------------
# commands

def cmd_hom(args, cfg):
    X, Y = load_structure(args.X), load_structure(args.Y)
    res = structures.find_homomorphism(X, Y, budget=args.budget)
    doc = {"status": res.status, "nodes": res.nodes,
           "map": None if res.homomorphism is None else list(res.homomorphism.map)}
    emit(doc, cfg)
    return {"found": EXIT_POSITIVE, "none-proven": EXIT_NEGATIVE}.get(res.status, EXIT_UNKNOWN)


def cmd_power(args, cfg):
    Y = load_structure(args.Y)
    P = structures.direct_power(Y, args.ell, cap=cfg.cap_power)
    emit(structures.structure_to_dict(P), cfg)
    return EXIT_POSITIVE


def cmd_poly(args, cfg):
    Y = load_structure(args.Y)
    Y2 = load_structure(args.target) if args.target else None
    ps = structures.enumerate_polymorphisms(Y, Y2, args.ell, cap_power=cfg.cap_power, cap_poly=cfg.cap_poly)
    doc = {"arity": ps.arity, "count": len(ps)}
    if not args.count_only:
        doc["functions"] = [list(f) for f in ps.functions]
    emit(doc, cfg)
    return EXIT_POSITIVE if len(ps) else EXIT_NEGATIVE


def cmd_zoo(args, cfg):
    if args.name is None:
        emit({"structures": ["K<n>", "C<n>", "P<n>", "Z", "Z'", "nae"]}, cfg)
        return EXIT_POSITIVE
    S = structures.zoo(args.name, *args.params) if args.params else structures.zoo_ref(args.name)
    emit(structures.structure_to_dict(S), cfg)
    return EXIT_POSITIVE


def cmd_qcert_verify(args, cfg):
    cert = quantum.Certificate.from_doc(load_json(args.file), resolve=_structure_or_ref)
    report = quantum.verify_certificate(cert, cfg.tol, skip_q2=args.skip_q2)
    emit(report.to_doc(), cfg)
    return EXIT_POSITIVE if report.passed else EXIT_NEGATIVE


def cmd_qcert_from_hom(args, cfg):
    X, Y = load_structure(args.X), load_structure(args.Y)
    if args.map is not None:
        f = _int_list(args.map)
    else:
        res = structures.find_homomorphism(X, Y)
        if not res.found:
            emit({"status": res.status, "certificate": None}, cfg)
            return EXIT_NEGATIVE if res.status == "none-proven" else EXIT_UNKNOWN
        f = list(res.homomorphism.map)
    hom = structures.Homomorphism(X, Y, tuple(f))
    cert = quantum.cert_from_classical(hom, quantum.SpaceConfig(args.field, args.dim))
    emit(cert.to_doc(), cfg)
    return EXIT_POSITIVE


def cmd_qcert_roundtrip(args, cfg):
    cert = quantum.Certificate.from_doc(load_json(args.file), resolve=_structure_or_ref)
    try:
        free = quantum.cert_to_free_hom(cert, cfg.tol)
    except VerificationFailure as exc:
        emit({"status": "invalid-certificate", "report": exc.report.to_doc() if exc.report else None}, cfg)
        return EXIT_NEGATIVE
    back = quantum.free_hom_to_cert(free, cert.X, cert.Y, cert.config, cfg.tol)
    dist = max((quantum.op_norm(back.p[x, y] - cert.p[x, y])
                for x in range(cert.X.domain_size) for y in range(cert.Y.domain_size)), default=0.0)
    ok = dist <= args.roundtrip_tol
    emit({"status": "ok" if ok else "mismatch", "max_projector_distance": dist,
          "free_map": [q.to_doc() for q in free]}, cfg)
    return EXIT_POSITIVE if ok else EXIT_NEGATIVE


def cmd_freetest(args, cfg):
    doc = load_json(args.file)
    Y = _structure_or_ref(doc["Y"])
    elements = [quantum.QElement.from_doc(e, tol=cfg.tol) for e in doc["elements"]]
    res = quantum.free_relation_test(elements, doc.get("relation", Y.signature.symbols[0][0]), Y, cfg.tol)
    emit({"status": "member" if res.ok else "non-member", "reason": res.reason, "residual": res.residual,
          "witness": None if res.witness is None else res.witness.to_doc()}, cfg)
    return EXIT_POSITIVE if res.ok else EXIT_NEGATIVE


def cmd_hopf(args, cfg):
    vals = _float_list(args.vector)
    if args.field == "complex":
        if len(vals) != 4:
            raise MinionLabError("complex vectors take four numbers: re0,im0,re1,im1")
        v = np.array([vals[0] + 1j * vals[1], vals[2] + 1j * vals[3]])
    else:
        if len(vals) != 2:
            raise MinionLabError("real vectors take two numbers")
        v = np.array(vals, dtype=float)
    t, z = quantum.hopf_map(v)
    inside = quantum.HopfPartition(quantum.SpaceConfig(args.field, 2)).contains(v)
    emit({"t": t, "z": [z.real, z.imag], "in_C": inside}, cfg)
    return EXIT_POSITIVE if inside else EXIT_NEGATIVE


XI_MAPS = {"d": quantum.xi_dictator, "s": quantum.xi_sdp, "c": quantum.xi_skeletal}


def cmd_xi(args, cfg):
    q = quantum.QElement.from_doc(load_json(args.file), tol=cfg.tol)
    if args.which == "s" and args.probe:
        vals = _float_list(args.probe)
        out = quantum.xi_sdp(q, np.array(vals), tol=cfg.tol)
    else:
        out = XI_MAPS[args.which](q)
    emit(minions.element_to_doc(out), cfg)
    return EXIT_POSITIVE


def cmd_relax_sdp(args, cfg):
    X, Y = load_structure(args.X), load_structure(args.Y)
    rep = relaxations.sdp_relax(X, Y, tol=cfg.sdp_tol, cap=cfg.cap_sdp)
    emit(rep.to_doc(include_witness=args.witness), cfg)
    return {"feasible": EXIT_POSITIVE, "infeasible": EXIT_NEGATIVE}.get(rep.status, EXIT_UNKNOWN)


def cmd_relax_clp(args, cfg):
    X, Y = load_structure(args.X), load_structure(args.Y)
    rep = relaxations.clp_relax(X, Y, order_seed=args.order_seed)
    emit(rep.to_doc(), cfg)
    return EXIT_POSITIVE if rep.accepted else EXIT_NEGATIVE


def cmd_consistency(args, cfg):
    X, Y = load_structure(args.X), load_structure(args.Y)
    rep = relaxations.k_consistency(X, Y, args.k)
    emit(rep.to_doc(), cfg)
    return EXIT_POSITIVE if rep.consistent else EXIT_NEGATIVE


def cmd_classify(args, cfg):
    if (args.graph is None) == (args.pair is None):
        raise UsageError("classify needs exactly one of --graph or --pair")
    if args.graph is not None:
        verdict = advantage.classify_graph(load_structure(args.graph), args.dim)
    else:
        verdict = advantage.classify_pair(load_structure(args.pair[0]), load_structure(args.pair[1]), args.dim)
    emit(verdict.to_doc(), cfg)
    return {"advantage": EXIT_POSITIVE, "no-advantage": EXIT_NEGATIVE}.get(verdict.verdict, EXIT_UNKNOWN)


def _handle(name: str) -> minions.MinionHandle:
    table = {
        "dictator": minions.dictator_handle,
        "sdp": lambda: minions.sdp_handle(False),
        "sdp-complex": lambda: minions.sdp_handle(True),
        "skeletal": minions.skeletal_handle,
        "quantum": lambda: quantum.quantum_handle(4),
        "quantum-real": lambda: quantum.quantum_handle(4, field="real"),
    }
    if name not in table:
        raise MinionLabError(f"unknown minion {name!r}; choose from {sorted(table)}")
    return table[name]()


MINION_NAMES = ("dictator", "sdp", "sdp-complex", "skeletal", "quantum", "quantum-real")
MAP_NAMES = ("xi-d", "xi-s", "xi-c", "theta", "dictator-into-sdp", "dictator-into-skeletal",
             "dictator-into-quantum")


def cmd_minion_check(args, cfg):
    rep = minions.check_minion_axioms(_handle(args.name), args.samples, cfg.seed, cfg.tol)
    emit(rep.to_doc(), cfg)
    return EXIT_POSITIVE if rep.ok else EXIT_NEGATIVE


def cmd_minion_map_check(args, cfg):
    name = args.name
    if name == "xi-d":
        xi, src, eq = quantum.xi_dictator, quantum.quantum_handle(2), None
    elif name == "xi-s":
        xi, src, eq = quantum.xi_sdp, quantum.quantum_handle(4), None
    elif name == "xi-c":
        xi, src, eq = quantum.xi_skeletal, quantum.quantum_handle(4), lambda a, b, t: a == b
    elif name == "theta":
        xi, src, eq = (lambda M: minions.theta(M, cfg.tol)), minions.sdp_handle(True), None
    elif name.startswith("dictator-into-"):
        target = _handle(name[len("dictator-into-"):])
        xi, src = minions.dictator_into(target, np.random.default_rng(cfg.seed)), minions.dictator_handle()
        eq = target.equal
    else:
        raise MinionLabError(f"unknown map {name!r}; choose from {list(MAP_NAMES)}")
    rep = minions.check_minor_preserving(xi, src, args.samples, cfg.seed, cfg.tol, equal=eq, name=name)
    emit(rep.to_doc(), cfg)
    return EXIT_POSITIVE if rep.ok else EXIT_NEGATIVE


def cmd_dictator_search(args, cfg):
    Y = load_structure(args.Y)
    Y2 = load_structure(args.target) if args.target else None
    res = advantage.bounded_dictator_search(Y, Y2, args.L, cap_power=cfg.cap_power, cap_poly=cfg.cap_poly)
    emit(res.to_doc() if args.full else {**res.summary(),
         **({"conflict": [m.to_doc() for m in res.conflict]} if res.conflict else {})}, cfg)
    return EXIT_POSITIVE if res.status == "assignment" else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--tol", type=float, default=TAU_ALG, help="algebraic tolerance (default %(default)g)")
    g.add_argument("--sdp-tol", type=float, default=TAU_SDP, help="SDP residual tolerance (default %(default)g)")
    g.add_argument("--seed", type=int, default=None, help="random seed (default: $MINIONLAB_SEED or 0)")
    g.add_argument("--cap-power", type=int, default=CAP_POWER, help="max size of a direct power")
    g.add_argument("--cap-poly", type=int, default=CAP_POLY, help="max number of polymorphisms enumerated")
    g.add_argument("--cap-sdp", type=int, default=CAP_SDP, help="max SDP index set size")
    g.add_argument("--format", choices=("json", "text"), default="json")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="minionlab", description="Minion homomorphism and relaxation toolkit.",
                     epilog="exit codes: 0 positive, 1 negative, 2 unknown, 3 data error, 4 usage error")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_, parent=sub):
        sp = parent.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("hom", cmd_hom, "search for a homomorphism X -> Y")
    sp.add_argument("X")
    sp.add_argument("Y")
    sp.add_argument("--budget", type=int, default=1_000_000, help="search node budget")

    sp = add("power", cmd_power, "direct power Y^ell")
    sp.add_argument("Y")
    sp.add_argument("--ell", type=int, required=True)

    sp = add("poly", cmd_poly, "enumerate polymorphisms Y^ell -> Y (or --target)")
    sp.add_argument("Y")
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--target", default=None)
    sp.add_argument("--count-only", action="store_true")

    sp = add("zoo", cmd_zoo, "print a named structure")
    sp.add_argument("name", nargs="?")
    sp.add_argument("params", nargs="*", type=int)

    qc = sub.add_parser("qcert", help="quantum homomorphism certificates")
    qsub = qc.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = add("verify", cmd_qcert_verify, "check projector, Q1, Q2, Q3", qsub)
    sp.add_argument("file")
    sp.add_argument("--skip-q2", action="store_true", help="drop the commutation condition")
    sp = add("from-hom", cmd_qcert_from_hom, "certificate induced by a classical homomorphism", qsub)
    sp.add_argument("X")
    sp.add_argument("Y")
    sp.add_argument("--map", default=None, help="comma-separated images; searched for if omitted")
    sp.add_argument("--dim", type=int, default=1)
    sp.add_argument("--field", choices=quantum.FIELDS, default="complex")
    sp = add("roundtrip", cmd_qcert_roundtrip, "certificate -> free-structure map -> certificate", qsub)
    sp.add_argument("file")
    sp.add_argument("--roundtrip-tol", type=float, default=1e-8)

    sp = add("freetest", cmd_freetest, "membership of a tuple of quantum elements in a free relation")
    sp.add_argument("file")

    sp = add("hopf", cmd_hopf, "Hopf image of a 2-vector and membership in the selector set")
    sp.add_argument("--vector", required=True, help="re0,im0,re1,im1 (complex) or a,b (real)")
    sp.add_argument("--field", choices=quantum.FIELDS, default="complex")

    sp = add("xi", cmd_xi, "map a quantum element to the dictator (d), SDP (s) or skeletal (c) minion")
    sp.add_argument("which", choices=sorted(XI_MAPS))
    sp.add_argument("file")
    sp.add_argument("--probe", default=None, help="probe vector for xi s (real entries)")

    rx = sub.add_parser("relax", help="SDP and CLP relaxations")
    rsub = rx.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = add("sdp", cmd_relax_sdp, "SDP relaxation", rsub)
    sp.add_argument("X")
    sp.add_argument("Y")
    sp.add_argument("--witness", action="store_true", help="include the Gram matrix and weights")
    sp = add("clp", cmd_relax_clp, "CLP relaxation", rsub)
    sp.add_argument("X")
    sp.add_argument("Y")
    sp.add_argument("--order-seed", type=int, default=None)

    sp = add("consistency", cmd_consistency, "k-consistency")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("X")
    sp.add_argument("Y")

    sp = add("classify", cmd_classify, "quantum advantage classification")
    sp.add_argument("--graph", default=None)
    sp.add_argument("--pair", nargs=2, default=None, metavar=("Y", "Y2"))
    sp.add_argument("--dim", type=int, required=True)

    mn = sub.add_parser("minion", help="minion axiom and map checks")
    msub = mn.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = add("check", cmd_minion_check, "sampled minion axioms", msub)
    sp.add_argument("name", choices=MINION_NAMES)
    sp.add_argument("--samples", type=int, default=500)
    sp = add("map-check", cmd_minion_map_check, "sampled minor preservation of a map", msub)
    sp.add_argument("name", choices=MAP_NAMES)
    sp.add_argument("--samples", type=int, default=500)

    sp = add("dictator-search", cmd_dictator_search, "bounded search for a minor-preserving index choice")
    sp.add_argument("Y")
    sp.add_argument("--target", default=None)
    sp.add_argument("--L", type=int, default=2)
    sp.add_argument("--full", action="store_true", help="print the whole assignment")
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(tol=args.tol, sdp_tol=args.sdp_tol, cap_power=args.cap_power, cap_poly=args.cap_poly,
                     cap_sdp=args.cap_sdp, seed=default_seed() if args.seed is None else args.seed,
                     output_format=args.format)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"minionlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"minionlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MinionLabError, ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"minionlab: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
