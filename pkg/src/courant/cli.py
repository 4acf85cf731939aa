"""Command-line front end.

Usage: ``courant COMMAND FILE [args] [options]``.  Exit status is 0 when the
computation succeeded and every check passed, 1 when a verification
identity failed (the witness is printed) and 2 on input errors.
"""

from __future__ import annotations

import argparse
import sys

from . import connections as conn
from . import dirac as dl
from . import generalized as gen
from . import transitive as tr
from .calculus import Bivector, EndomorphismField, MetricOnTM
from .core import (
    SUITES,
    CourantStructure,
    ESection,
    EThreeForm,
    Report,
    SampleSpec,
    cocycle_defect,
    format_value,
    modify_with_lambda,
    obstructions,
    verify,
)
from .errors import CourantError, StructureSyntaxError
from .expr import parse_form
from .linalg import Matrix
from .sampling import random_sections
from .structfile import StructureFile, parse_input

__all__ = ["main", "build_parser", "build_structure", "STRUCTURES", "COMMANDS"]

STRUCTURES = (
    "courant",
    "dorfman",
    "sw",
    "sw-product",
    "poisson",
    "poisson-product",
    "paraherm",
    "phi",
    "triple",
    "connection",
)
COMMANDS = ("bracket", "dorfman", "verify", "obstruction", "transitive", "whitney", "foliated", "dirac")
TRANSITIVE_ACTIONS = ("decompose", "bracket", "verify", "components", "restricted")
DIRAC_ACTIONS = ("is-dirac", "invariants", "graph", "reconstruct", "complement", "offset", "transport")


class InputError(CourantError):
    """Bad command-line arguments that argparse cannot catch."""


# ---------------------------------------------------------------------------
# building structures from a file


def _twist(sf: StructureFile, args):
    text = getattr(args, "phi", None)
    if text:
        return parse_form(text, sf.chart)
    return sf.twist


def _threeform(sf: StructureFile, S) -> EThreeForm | None:
    return EThreeForm(S, sf.threeform) if sf.threeform else None


def _bundle(sf: StructureFile) -> conn.PseudoEuclideanBundle:
    sf.require("metric")
    return conn.PseudoEuclideanBundle(sf.chart, sf.metric)


def _connection(sf: StructureFile, B: conn.PseudoEuclideanBundle) -> conn.MetricConnection:
    if sf.connection is None:
        return conn.default_metric_connection(B)
    return conn.MetricConnection(B, sf.connection)


def build_structure(sf: StructureFile, name: str, args=None) -> CourantStructure:
    """The structure selected by ``--structure`` from the blocks of ``sf``."""
    chart = sf.chart
    if name in ("courant", "dorfman"):
        return gen.standard_structure(chart, "skew" if name == "courant" else "product")
    if name in ("sw", "sw-product"):
        tw = _twist(sf, args)
        if tw is None:
            raise InputError("the sw structure needs --phi or a twist block")
        return gen.standard_structure(chart, "skew" if name == "sw" else "product", gen.TwistForm(tw))
    if name in ("poisson", "poisson-product"):
        sf.require("bivector")
        return gen.poisson_structure(Bivector(chart, sf.bivector), "skew" if name == "poisson" else "product")
    if name == "paraherm":
        sf.require("tm_metric", "endomorphism")
        return gen.paraherm_structure(gen.ParaHermitianTM(MetricOnTM(chart, sf.tm_metric), EndomorphismField(chart, sf.endomorphism)))
    if name == "phi":
        sf.require("tm_metric", "endomorphism")
        return gen.phi_structure(EndomorphismField(chart, sf.endomorphism), MetricOnTM(chart, sf.tm_metric), _twist(sf, args))
    if name == "triple":
        sf.require("tm_metric")
        tw = _twist(sf, args)
        return gen.riemannian_triple(MetricOnTM(chart, sf.tm_metric), gen.TwistForm(tw) if tw is not None else None)
    if name == "connection":
        B = _bundle(sf)
        sf.require("anchor")
        nabla = _connection(sf, B)
        beta = _threeform(sf, B)
        if beta is None:
            return conn.bracket0(nabla, B, sf.anchor)
        return conn.bracket_with_beta(nabla, B, sf.anchor, beta)
    raise InputError(f"unknown structure {name!r}")


def _section(sf: StructureFile, S, name: str) -> ESection:
    if name not in sf.sections:
        raise InputError(f"no section named {name!r} in the file")
    e = ESection(sf.chart, sf.sections[name])
    if e.rank != S.rank:
        raise InputError(f"section {name!r} has {e.rank} components, the structure has rank {S.rank}")
    return e


def _spec(args) -> SampleSpec:
    return SampleSpec(seed=args.seed, degree=args.degree, trials=args.trials)


def _print_report(rep: Report) -> int:
    print(rep)
    total = len(rep.lines)
    failed = len(rep.failing())
    print(f"summary: {total - failed} passed, {failed} failed")
    return rep.exit_code


def _suite(args):
    return "all" if args.suite == "all" else args.suite.split(",")


# ---------------------------------------------------------------------------
# commands


def cmd_bracket(sf, args) -> int:
    S = build_structure(sf, args.structure, args)
    e1, e2 = _section(sf, S, args.e1), _section(sf, S, args.e2)
    op = S.product if args.command == "dorfman" else S.bracket
    print(format_value(op(e1, e2), S.labels))
    return 0


def cmd_verify(sf, args) -> int:
    S = build_structure(sf, args.structure, args)
    return _print_report(verify(S, _suite(args), spec=_spec(args), jobs=args.jobs))


def _three_sections(sf, S, names, args):
    if names:
        if len(names) != 3:
            raise InputError("obstruction needs three section names")
        return [_section(sf, S, n) for n in names]
    return random_sections(sf.chart, S.rank, 3, degree=args.degree, seed=args.seed)


def cmd_obstruction(sf, args) -> int:
    S = build_structure(sf, args.structure, args)
    e1, e2, e3 = _three_sections(sf, S, args.sections, args)
    L, J, C = obstructions(S, e1, e2, e3)
    for name, v in (("L", L), ("J", J), ("C", C)):
        print(f"{name} = {format_value(v, S.labels)}")
    if args.structure == "connection":
        B = _bundle(sf)
        nabla = _connection(sf, B)
        C0, C1 = conn.obstruction0(nabla, B, sf.anchor, _threeform(sf, B), e1, e2, e3)
        print(f"C0 = {format_value(C0, S.labels)}")
        print(f"C0 + beta terms = {format_value(C1, S.labels)}")
        print(f"rho-torsion(e1,e2) = {conn.rho_torsion(nabla, sf.anchor, e1, e2)}")
        _print_curvature(nabla)
    if args.lam == "twist":
        tw = _twist(sf, args)
        if tw is None:
            raise InputError("--lambda twist needs --phi or a twist block")
        Lam = gen.twist_lambda(S, gen.TwistForm(tw))
        print(f"cocycle defect = {format_value(cocycle_defect(S, Lam, e1, e2, e3), S.labels)}")
        _, JL, _ = obstructions(modify_with_lambda(S, Lam), e1, e2, e3)
        print(f"J (modified) = {format_value(JL, S.labels)}")
    return 0


def _print_curvature(nabla) -> None:
    names = nabla.bundle.chart.coord_names
    for (i, j), R in sorted(conn.curvature(nabla).items()):
        if i < j:
            print(f"R[{names[i]},{names[j]}] = {format_value(R)}")


def _transitive_setup(sf, args):
    if args.structure == "triple":
        sf.require("tm_metric")
        tw = _twist(sf, args) if args.lam == "twist" else None
        if args.lam == "threeform":
            raise InputError("the triple takes --lambda twist or none")
        if args.lam == "twist" and tw is None:
            raise InputError("--lambda twist needs --phi or a twist block")
        G = MetricOnTM(sf.chart, sf.tm_metric)
        return tr.riemannian_triple_data(G, gen.TwistForm(tw) if tw is not None else None)
    S = build_structure(sf, args.structure, args)
    T = tr.decompose(S)
    N = tr.suitable_connection(T, nablaC=sf.c_connection)
    Lam = None
    if args.lam == "twist":
        tw = _twist(sf, args)
        if tw is None:
            raise InputError("--lambda twist needs --phi or a twist block")
        Lam = gen.twist_lambda(T.structure, gen.TwistForm(tw))
    elif args.lam == "threeform":
        if not sf.threeform:
            raise InputError("--lambda threeform needs a threeform block")
        Lam = EThreeForm(T.bundle, sf.threeform)
    return S, T, N, Lam


def _vec_text(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def cmd_transitive(sf, args) -> int:
    S, T, N, Lam = _transitive_setup(sf, args)
    act = args.action
    if act == "decompose":
        for name, vecs in (("K", T.K), ("Q", T.Q), ("im d", T.D), ("C", T.C)):
            print(f"{name}: " + ("; ".join(_vec_text(v) for v in vecs) if vecs else "0"))
        rep = Report()
        for name, res in T.invariant_residuals().items():
            rep.add("splitting", name, res)
        return _print_report(rep.sorted())
    G = tr.general_bracket(T, N, Lam)
    if act == "bracket":
        if len(args.rest) != 2:
            raise InputError("transitive bracket needs two section names")
        e1, e2 = (_section(sf, G, n) for n in args.rest)
        print(format_value(G.bracket(e1, e2), G.labels))
        return 0
    if act == "verify":
        return _print_report(verify(G, _suite(args), spec=_spec(args), jobs=args.jobs))
    if act == "components":
        res = tr.component_conditions(T, N, Lam, spec=_spec(args))
        rep = Report()
        for kind, items in res.items():
            rep.add("components", kind, items, format_value(items[0], G.labels) if items else None)
        return _print_report(rep.sorted())
    if act == "restricted":
        return _print_report(tr.restricted_check(T, N, Lam, spec=_spec(args)))
    raise InputError(f"unknown transitive action {act!r}")


def cmd_whitney(sf, args) -> int:
    S = build_structure(sf, args.structure, args)
    if sf.c_metric is None:
        raise InputError("whitney needs a c_bundle block")
    C = conn.PseudoEuclideanBundle(sf.chart, sf.c_metric)
    nC = conn.MetricConnection(C, sf.c_connection) if sf.c_connection is not None else conn.default_metric_connection(C)
    W = conn.whitney_sum(S, C, nC)
    _print_curvature(nC)
    return _print_report(verify(W, _suite(args), spec=_spec(args), jobs=args.jobs))


def cmd_foliated(sf, args) -> int:
    B = _bundle(sf)
    sf.require("anchor", "foliation")
    S = conn.foliated_bracket(B, sf.foliation[0], sf.anchor, _threeform(sf, B))
    return _print_report(verify(S, _suite(args), spec=_spec(args), jobs=args.jobs))


def _subspace(sf, W, name) -> dl.Subspace:
    if sf.dirac is None or name not in sf.dirac.subspaces:
        raise InputError(f"no subspace named {name!r} in the dirac block")
    return dl.Subspace(sf.dirac.subspaces[name], W.dim)


def _print_subspace(label: str, L: dl.Subspace) -> None:
    print(f"{label}: " + ("; ".join(_vec_text(v) for v in L.basis) if L.basis else "0"))


def _print_matrix(label: str, M: Matrix) -> None:
    print(f"{label}: " + ("[" + "; ".join(" ".join(str(x) for x in r) for r in M.rows) + "]"))


def cmd_dirac(sf, args) -> int:
    if sf.dirac is None:
        raise InputError("dirac needs a dirac block")
    W = dl.ParaHermitianSpace(sf.dirac.n)
    act, names = args.action, args.rest

    def need(k):
        if len(names) < k:
            raise InputError(f"dirac {act} needs {k} name(s)")
        return names

    if act == "is-dirac":
        ok, why = dl.is_dirac(W, _subspace(sf, W, need(1)[0]))
        print("dirac" if ok else f"not dirac: {why}")
        return 0 if ok else 1
    if act == "invariants":
        inv = dl.invariants(W, _subspace(sf, W, need(1)[0]))
        print(inv)
        _print_subspace("ker omega|L", inv.kernel)
        return 0
    if act == "graph":
        side = names[1] if len(names) > 1 else "+"
        Ls, om = dl.graph_data(W, _subspace(sf, W, need(1)[0]), side)
        _print_subspace(f"L{side}", Ls)
        _print_matrix(f"omega{side}", om)
        return 0
    if act == "reconstruct":
        need(2)
        if names[1] not in sf.dirac.forms:
            raise InputError(f"no form named {names[1]!r} in the dirac block")
        _print_subspace("L", dl.reconstruct(W, _subspace(sf, W, names[0]), sf.dirac.forms[names[1]]))
        return 0
    if act == "complement":
        need(2)
        L, S = _subspace(sf, W, names[0]), _subspace(sf, W, names[1])
        for i, s in enumerate(dl.conjugated_basis(W, L, S)):
            print(f"s{i + 1}: {_vec_text(s)}")
        _print_subspace("isotropic complement", dl.isotropic_complement(W, L, S))
        return 0
    if act == "offset":
        need(3)
        L, L1, L2 = (_subspace(sf, W, n) for n in names[:3])
        theta = dl.complement_offset(W, L, L1, L2)
        _print_matrix("theta", theta)
        ok = dl.apply_offset(W, L, L1, theta) == L2
        print("offset maps L1 to L2" if ok else "offset does not reproduce L2")
        return 0 if ok else 1
    if act == "transport":
        need(2)
        L, L2 = _subspace(sf, W, names[0]), _subspace(sf, W, names[1])
        psi = dl.ph_transport(W, L, L2)
        _print_matrix("psi", psi)
        ok = L.image(psi) == L2
        print("psi L = L'" if ok else "psi L != L'")
        return 0 if ok else 1
    raise InputError(f"unknown dirac action {act!r}")


HANDLERS = {
    "bracket": cmd_bracket,
    "dorfman": cmd_bracket,
    "verify": cmd_verify,
    "obstruction": cmd_obstruction,
    "transitive": cmd_transitive,
    "whitney": cmd_whitney,
    "foliated": cmd_foliated,
    "dirac": cmd_dirac,
}


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser, structure: str | None = "courant") -> None:
    p.add_argument("file", help="structure file (YAML)")
    if structure is not None:
        p.add_argument("--structure", choices=STRUCTURES, default=structure)
        p.add_argument("--phi", help="3-form overriding the twist block, e.g. 'w*dx^dy^dz'")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1, help="threads for identity checks")
    p.add_argument("--suite", default="all", help="all or a comma list of " + ", ".join(SUITES))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="courant", description="Exact checks of Courant-type brackets.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("bracket", "dorfman"):
        p = sub.add_parser(name, help=f"{'skew bracket' if name == 'bracket' else 'Dorfman product'} of two named sections")
        _common(p, "courant" if name == "bracket" else "dorfman")
        p.add_argument("e1")
        p.add_argument("e2")
    p = sub.add_parser("verify", help="run identity suites on random sections")
    _common(p)
    p = sub.add_parser("obstruction", help="L, J and C on three sections")
    _common(p)
    p.add_argument("sections", nargs="*", help="three section names (random when omitted)")
    p.add_argument("--lambda", dest="lam", choices=("none", "twist"), default="none", help="also report the cocycle defect of the twist as a Lambda modification")
    p = sub.add_parser("transitive", help="splitting, bracket1 and component conditions")
    _common(p)
    p.add_argument("action", choices=TRANSITIVE_ACTIONS)
    p.add_argument("rest", nargs="*")
    p.add_argument("--lambda", dest="lam", choices=("none", "twist", "threeform"), default="none")
    p = sub.add_parser("whitney", help="verify the Whitney sum with the c_bundle block")
    _common(p)
    p = sub.add_parser("foliated", help="verify the bracket of the adapted connection")
    _common(p, None)
    p = sub.add_parser("dirac", help="Dirac subspace computations on the dirac block")
    p.add_argument("file")
    p.add_argument("action", choices=DIRAC_ACTIONS)
    p.add_argument("rest", nargs="*", help="subspace/form names (graph takes an optional side + or -)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sf = parse_input(args.file)
        return HANDLERS[args.command](sf, args)
    except StructureSyntaxError as exc:
        print(f"{args.file}:{exc.line}:{exc.col}: error: {exc.message}", file=sys.stderr)
        return 2
    except (CourantError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
