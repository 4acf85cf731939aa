"""YAML structure files.

A file is a mapping of named blocks; only ``chart`` is required::

    chart: {dim: 2, coords: [x, y]}
    metric: [["0", "1/2"], ["1/2", "0"]]     # fiber metric of E
    anchor: [["1", "0"]]                      # n x r
    tm_metric: [["1", "0"], ["0", "x^2+1"]]   # metric on TM
    bivector: [["0", "x"], ["-x", "0"]]
    endomorphism: [["1", "0"], ["0", "-1"]]
    twist: "w*dx^dy^dz"                       # 3-form on the chart
    threeform: {"0,1,2": "x"}                 # E-3-form on frame triples
    connection: [[["0","0"],["0","0"]], ...]  # one matrix per coordinate
    sections: {e1: ["1", "0", "0", "y"]}
    foliation: {leaf: [x], transverse: [y]}
    c_bundle: {metric: [...], connection: [...]}
    dirac: {n: 2, subspaces: {L: [[1,0,0,0], ...]}, forms: {w: [[0,1],[-1,0]]}}

Every scalar is a string in the expression grammar (plain numbers are
accepted too).  Errors carry the 1-based line and column of the offending
entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .errors import (
    CourantError,
    ExpressionSyntaxError,
    ShapeError,
    StructureSyntaxError,
    UnknownCoordinate,
)
from .linalg import Matrix
from .scalars import Chart

__all__ = ["StructureFile", "DiracBlock", "parse_input", "parse_text", "dump"]

BLOCKS = (
    "chart",
    "metric",
    "anchor",
    "tm_metric",
    "bivector",
    "endomorphism",
    "twist",
    "threeform",
    "connection",
    "sections",
    "foliation",
    "c_bundle",
    "dirac",
)


@dataclass
class DiracBlock:
    n: int
    subspaces: dict[str, list[tuple[Fraction, ...]]] = field(default_factory=dict)
    forms: dict[str, Matrix] = field(default_factory=dict)


@dataclass
class StructureFile:
    chart: Chart
    metric: Matrix | None = None
    anchor: Matrix | None = None
    tm_metric: Matrix | None = None
    bivector: Matrix | None = None
    endomorphism: Matrix | None = None
    twist: object = None
    threeform: dict[tuple[int, int, int], object] = field(default_factory=dict)
    connection: tuple[Matrix, ...] | None = None
    sections: dict[str, tuple] = field(default_factory=dict)
    foliation: tuple[tuple[str, ...], tuple[str, ...]] | None = None
    c_metric: Matrix | None = None
    c_connection: tuple[Matrix, ...] | None = None
    dirac: DiracBlock | None = None

    def __eq__(self, other) -> bool:
        return isinstance(other, StructureFile) and dump(self) == dump(other)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) in (None, {}, ())]
        if missing:
            raise StructureSyntaxError(f"missing block(s): {', '.join(missing)}", 1, 1)


# ---------------------------------------------------------------------------
# YAML nodes with positions


class _Loc:
    __slots__ = ("value", "line", "col", "quoted")

    def __init__(self, value, line: int, col: int, quoted: bool):
        self.value = value
        self.line = line
        self.col = col
        self.quoted = quoted


def _plain(node):
    """Node tree -> dicts/lists with :class:`_Loc` leaves."""
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = k.value
            if key in out:
                raise StructureSyntaxError(f"duplicate key {key!r}", k.start_mark.line + 1, k.start_mark.column + 1)
            out[key] = (_plain(v), k.start_mark.line + 1, k.start_mark.column + 1)
        return _Map(out, node.start_mark.line + 1, node.start_mark.column + 1)
    if isinstance(node, yaml.SequenceNode):
        return _Seq([_plain(v) for v in node.value], node.start_mark.line + 1, node.start_mark.column + 1)
    quoted = node.style in ("'", '"')
    return _Loc(node.value, node.start_mark.line + 1, node.start_mark.column + 1, quoted)


class _Map(dict):
    def __init__(self, items, line, col):
        super().__init__(items)
        self.line, self.col = line, col

    def get_node(self, key):
        v = self.get(key)
        return None if v is None else v[0]


class _Seq(list):
    def __init__(self, items, line, col):
        super().__init__(items)
        self.line, self.col = line, col


def _where(node) -> tuple[int, int]:
    return getattr(node, "line", 1), getattr(node, "col", 1)


def _fail(node, msg: str, cls=StructureSyntaxError):
    line, col = _where(node)
    raise cls(msg, line, col)


def _scalar(node, chart: Chart):
    if not isinstance(node, _Loc):
        _fail(node, "expected a scalar expression")
    text = node.value
    try:
        from .expr import parse_scalar

        return parse_scalar(text, chart)
    except ExpressionSyntaxError as exc:
        raise StructureSyntaxError(exc.message, node.line, node.col + exc.pos + (1 if node.quoted else 0)) from None
    except UnknownCoordinate as exc:
        raise UnknownCoordinate(f"line {node.line}, column {node.col}: {exc}") from None


def _form(node, chart: Chart):
    if not isinstance(node, _Loc):
        _fail(node, "expected a differential form")
    from .expr import parse_form

    try:
        return parse_form(node.value, chart)
    except ExpressionSyntaxError as exc:
        raise StructureSyntaxError(exc.message, node.line, node.col + exc.pos + (1 if node.quoted else 0)) from None
    except UnknownCoordinate as exc:
        raise UnknownCoordinate(f"line {node.line}, column {node.col}: {exc}") from None


def _matrix(node, chart: Chart, shape: tuple[int | None, int | None] = (None, None), what: str = "matrix") -> Matrix:
    if not isinstance(node, _Seq) or not node or not all(isinstance(r, _Seq) for r in node):
        _fail(node, f"{what} must be a list of rows", ShapeError)
    ncols = len(node[0])
    for r in node:
        if len(r) != ncols:
            _fail(r, f"{what} rows have different lengths", ShapeError)
    m, n = shape
    if (m is not None and len(node) != m) or (n is not None and ncols != n):
        _fail(node, f"{what} must be {m or '?'}x{n or '?'}, got {len(node)}x{ncols}", ShapeError)
    return Matrix([[_scalar(x, chart) for x in r] for r in node])


def _rational(node) -> Fraction:
    if not isinstance(node, _Loc):
        _fail(node, "expected a rational number")
    try:
        return Fraction(str(node.value).strip())
    except (ValueError, ZeroDivisionError):
        _fail(node, f"not a rational number: {node.value!r}")


def _names(node) -> tuple[str, ...]:
    if not isinstance(node, _Seq) or not all(isinstance(x, _Loc) for x in node):
        _fail(node, "expected a list of names")
    return tuple(x.value for x in node)


def _matrices(node, chart: Chart, size: int | None, what: str) -> tuple[Matrix, ...]:
    if not isinstance(node, _Seq) or len(node) != chart.dim:
        _fail(node, f"{what} needs one matrix per coordinate ({chart.dim})", ShapeError)
    return tuple(_matrix(m, chart, (size, size), what) for m in node)


def parse_text(text: str) -> StructureFile:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line, col = (mark.line + 1, mark.column + 1) if mark else (1, 1)
        raise StructureSyntaxError(str(exc.problem or exc), line, col) from None
    if root is None:
        raise StructureSyntaxError("empty structure file", 1, 1)
    top = _plain(root)
    if not isinstance(top, _Map):
        _fail(top, "structure file must be a mapping")
    for key, (_, line, col) in top.items():
        if key not in BLOCKS:
            raise StructureSyntaxError(f"unknown block {key!r}", line, col)
    if "chart" not in top:
        raise StructureSyntaxError("missing 'chart' block", 1, 1)
    chart = _chart(top.get_node("chart"))
    sf = StructureFile(chart)
    n = chart.dim
    r = None
    if "metric" in top:
        sf.metric = _matrix(top.get_node("metric"), chart, what="metric")
        r = sf.metric.shape[0]
        if sf.metric.shape != (r, r):
            _fail(top.get_node("metric"), "metric must be square", ShapeError)
    if "anchor" in top:
        sf.anchor = _matrix(top.get_node("anchor"), chart, (n, r), "anchor")
    for name in ("tm_metric", "bivector", "endomorphism"):
        if name in top:
            setattr(sf, name, _matrix(top.get_node(name), chart, (n, n), name))
    if "twist" in top:
        sf.twist = _form(top.get_node("twist"), chart)
    if "threeform" in top:
        node = top.get_node("threeform")
        if not isinstance(node, _Map):
            _fail(node, "threeform must map 'a,b,c' to expressions")
        for key, (val, line, col) in node.items():
            try:
                idx = tuple(int(s) for s in key.split(","))
            except ValueError:
                idx = ()
            if len(idx) != 3 or (r is not None and any(not 0 <= a < r for a in idx)):
                raise ShapeError(f"bad frame triple {key!r}", line, col)
            sf.threeform[idx] = _scalar(val, chart)
    if "connection" in top:
        sf.connection = _matrices(top.get_node("connection"), chart, r, "connection")
    if "sections" in top:
        node = top.get_node("sections")
        if not isinstance(node, _Map):
            _fail(node, "sections must map names to component lists")
        for key, (val, line, col) in node.items():
            if not isinstance(val, _Seq):
                raise ShapeError(f"section {key!r} must be a list", line, col)
            sf.sections[key] = tuple(_scalar(x, chart) for x in val)
    if "foliation" in top:
        node = top.get_node("foliation")
        if not isinstance(node, _Map) or "leaf" not in node:
            _fail(node, "foliation needs a 'leaf' list")
        leaf = _names(node.get_node("leaf"))
        trans = _names(node.get_node("transverse")) if "transverse" in node else tuple(c for c in chart.coord_names if c not in leaf)
        for c in leaf + trans:
            if c not in chart.coord_names:
                raise UnknownCoordinate(f"line {node.line}, column {node.col}: unknown coordinate {c!r} in foliation")
        if sorted(leaf + trans) != sorted(chart.coord_names):
            _fail(node, "leaf and transverse coordinates must partition the chart", ShapeError)
        sf.foliation = (leaf, trans)
    if "c_bundle" in top:
        node = top.get_node("c_bundle")
        if not isinstance(node, _Map) or "metric" not in node:
            _fail(node, "c_bundle needs a metric")
        sf.c_metric = _matrix(node.get_node("metric"), chart, what="c_bundle metric")
        s = sf.c_metric.shape[0]
        if "connection" in node:
            sf.c_connection = _matrices(node.get_node("connection"), chart, s, "c_bundle connection")
    if "dirac" in top:
        sf.dirac = _dirac(top.get_node("dirac"))
    return sf


def _chart(node) -> Chart:
    if isinstance(node, _Seq):
        names = _names(node)
    elif isinstance(node, _Map):
        if "coords" in node:
            names = _names(node.get_node("coords"))
        elif "dim" in node:
            d = int(_rational(node.get_node("dim")))
            names = tuple(f"x{i + 1}" for i in range(d))
        else:
            _fail(node, "chart needs 'coords' or 'dim'")
        if "dim" in node and int(_rational(node.get_node("dim"))) != len(names):
            _fail(node, "chart dim does not match the number of coordinates", ShapeError)
    else:
        _fail(node, "chart must be a list of names or a mapping")
    try:
        return Chart(list(names))
    except CourantError as exc:
        _fail(node, str(exc))


def _dirac(node) -> DiracBlock:
    if not isinstance(node, _Map) or "n" not in node:
        _fail(node, "dirac block needs 'n'")
    n = int(_rational(node.get_node("n")))
    if n < 1:
        _fail(node, "n must be positive")
    blk = DiracBlock(n)
    subs = node.get_node("subspaces")
    if subs is not None:
        if not isinstance(subs, _Map):
            _fail(subs, "subspaces must map names to bases")
        for key, (val, line, col) in subs.items():
            if not isinstance(val, _Seq):
                raise ShapeError(f"subspace {key!r} must be a list of vectors", line, col)
            rows = []
            for v in val:
                if not isinstance(v, _Seq) or len(v) != 2 * n:
                    _fail(v, f"vectors of subspace {key!r} need {2 * n} entries", ShapeError)
                rows.append(tuple(_rational(x) for x in v))
            blk.subspaces[key] = rows
    forms = node.get_node("forms")
    if forms is not None:
        if not isinstance(forms, _Map):
            _fail(forms, "forms must map names to matrices")
        for key, (val, line, col) in forms.items():
            if not isinstance(val, _Seq) or not all(isinstance(r, _Seq) and len(r) == len(val) for r in val):
                raise ShapeError(f"form {key!r} must be a square matrix", line, col)
            blk.forms[key] = Matrix([[_rational(x) for x in r] for r in val]) if val else Matrix([])
    return blk


def parse_input(path) -> StructureFile:
    """Read and validate a structure file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StructureSyntaxError(f"cannot read {path}: {exc.strerror}", 1, 1) from None
    return parse_text(text)


# ---------------------------------------------------------------------------
# printing


def _smat(M: Matrix) -> list:
    return [[str(x) for x in row] for row in M.rows]


def dump(sf: StructureFile) -> str:
    """Canonical YAML text; ``parse_text(dump(sf)) == sf``."""
    out: dict = {"chart": {"dim": sf.chart.dim, "coords": list(sf.chart.coord_names)}}
    for name in ("metric", "anchor", "tm_metric", "bivector", "endomorphism"):
        m = getattr(sf, name)
        if m is not None:
            out[name] = _smat(m)
    if sf.twist is not None:
        out["twist"] = str(sf.twist)
    if sf.threeform:
        out["threeform"] = {",".join(map(str, k)): str(v) for k, v in sorted(sf.threeform.items())}
    if sf.connection is not None:
        out["connection"] = [_smat(m) for m in sf.connection]
    if sf.sections:
        out["sections"] = {k: [str(x) for x in v] for k, v in sf.sections.items()}
    if sf.foliation is not None:
        out["foliation"] = {"leaf": list(sf.foliation[0]), "transverse": list(sf.foliation[1])}
    if sf.c_metric is not None:
        cb = {"metric": _smat(sf.c_metric)}
        if sf.c_connection is not None:
            cb["connection"] = [_smat(m) for m in sf.c_connection]
        out["c_bundle"] = cb
    if sf.dirac is not None:
        d = {"n": sf.dirac.n}
        if sf.dirac.subspaces:
            d["subspaces"] = {k: [[str(x) for x in v] for v in rows] for k, rows in sf.dirac.subspaces.items()}
        if sf.dirac.forms:
            d["forms"] = {k: [[str(x) for x in r] for r in m.rows] for k, m in sf.dirac.forms.items()}
        out["dirac"] = d
    return yaml.safe_dump(out, sort_keys=False, default_flow_style=None)
