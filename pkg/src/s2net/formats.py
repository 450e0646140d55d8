"""Text formats: ``.s2c`` complexes, ``.tets`` fixtures, solution CSV and DOT graphs.

``.s2c`` files are whitespace-delimited with ``#`` comments::

    vertex <id> <x> <y> <z>
    triangle <id> <v0> <v1> <v2> [r=<val> | d=<val> mu=<val>]
    loop_current <triangle> <amps>
    mmf_source <triangle> <value>

A triangle without parameters gets reluctance 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .complex import ComplexError, OrientedComplex2
from .network import DeviceSpec, NetworkSolution

DEFAULT_RELUCTANCE = 1.0


class ParseError(ValueError):
    def __init__(self, line: int, message: str, source: str = "<input>"):
        super().__init__(f"{source}:{line}: {message}")
        self.line = line
        self.source = source


def _read(source) -> tuple[str, str]:
    if isinstance(source, (str, Path)) and Path(source).exists():
        return Path(source).read_text(), str(source)
    if isinstance(source, Path):
        raise FileNotFoundError(source)
    if hasattr(source, "read"):
        return source.read(), getattr(source, "name", "<stream>")
    raise FileNotFoundError(source)


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


def _number(tok: str, no: int, what: str, src: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(no, f"{what}: expected a number, got {tok!r}", src) from None
    if not np.isfinite(v):
        raise ParseError(no, f"{what}: value must be finite", src)
    return v


@dataclass
class _Tri:
    line: int
    label: str
    verts: tuple
    params: dict


def parse_s2c_text(text: str, source: str = "<input>") -> tuple[OrientedComplex2, DeviceSpec]:
    vertices, vlines = {}, {}
    tris = {}
    sources = {"loop_current": {}, "mmf_source": {}}
    for no, tok in _lines(text):
        kind = tok[0]
        if kind == "vertex":
            if len(tok) != 5:
                raise ParseError(no, "vertex needs an id and three coordinates", source)
            vid = tok[1]
            if vid in vertices:
                raise ParseError(no, f"duplicate vertex id {vid!r} (first on line {vlines[vid]})", source)
            vertices[vid] = tuple(_number(t, no, "coordinate", source) for t in tok[2:5])
            vlines[vid] = no
        elif kind == "triangle":
            if len(tok) < 5:
                raise ParseError(no, "triangle needs an id and three vertex ids", source)
            tid = tok[1]
            if tid in tris:
                raise ParseError(no, f"duplicate triangle id {tid!r} (first on line {tris[tid].line})", source)
            params = {}
            for item in tok[5:]:
                key, sep, val = item.partition("=")
                if not sep or key not in ("r", "d", "mu"):
                    raise ParseError(no, f"unknown triangle parameter {item!r}", source)
                if key in params:
                    raise ParseError(no, f"parameter {key!r} given twice", source)
                params[key] = _number(val, no, key, source)
                if params[key] <= 0:
                    raise ParseError(no, f"parameter {key} must be positive", source)
            if "r" in params and ("d" in params or "mu" in params):
                raise ParseError(no, "give either r or both d and mu", source)
            if ("d" in params) != ("mu" in params):
                raise ParseError(no, "d and mu must be given together", source)
            tris[tid] = _Tri(no, tid, tuple(tok[2:5]), params)
        elif kind in sources:
            if len(tok) != 3:
                raise ParseError(no, f"{kind} needs a triangle id and a value", source)
            table = sources[kind]
            if tok[1] in table:
                raise ParseError(no, f"duplicate {kind} for triangle {tok[1]!r}", source)
            table[tok[1]] = (no, _number(tok[2], no, kind, source))
        else:
            raise ParseError(no, f"unknown record {kind!r}", source)
    vids = list(vertices)
    vindex = {v: i for i, v in enumerate(vids)}
    tri_list = list(tris.values())
    rows = []
    seen_sets = {}
    for t in tri_list:
        for v in t.verts:
            if v not in vindex:
                raise ParseError(t.line, f"triangle {t.label!r} references undefined vertex {v!r}", source)
        if len(set(t.verts)) != 3:
            raise ParseError(t.line, f"triangle {t.label!r} repeats a vertex", source)
        key = frozenset(t.verts)
        if key in seen_sets:
            raise ParseError(t.line, f"triangle {t.label!r} has the same vertices as line {seen_sets[key]}", source)
        seen_sets[key] = t.line
        rows.append([vindex[v] for v in t.verts])
    positions = np.array([vertices[v] for v in vids], dtype=float).reshape(-1, 3)
    try:
        cx = OrientedComplex2(positions, np.array(rows, dtype=np.int64).reshape(-1, 3), vids,
                              [t.label for t in tri_list])
    except ComplexError as exc:
        raise ParseError(0, str(exc), source) from None
    r = np.empty(len(tri_list))
    for k, t in enumerate(tri_list):
        if "r" in t.params:
            r[k] = t.params["r"]
        elif "d" in t.params:
            a, b, c = positions[rows[k]]
            area = 0.5 * np.linalg.norm(np.cross(b - a, c - a))
            if area <= 0:
                raise ParseError(t.line, "zero-area triangle cannot take d and mu", source)
            r[k] = t.params["d"] / (t.params["mu"] * area)
        else:
            r[k] = DEFAULT_RELUCTANCE
    tindex = {t.label: k for k, t in enumerate(tri_list)}
    vecs = {}
    for kind, table in sources.items():
        v = np.zeros(len(tri_list))
        for tid, (no, val) in table.items():
            if tid not in tindex:
                raise ParseError(no, f"{kind} references undefined triangle {tid!r}", source)
            v[tindex[tid]] = val
        vecs[kind] = v
    return cx, DeviceSpec(r, vecs["loop_current"], vecs["mmf_source"])


def parse(source) -> tuple[OrientedComplex2, DeviceSpec]:
    """Read a ``.s2c`` file (path or open stream)."""
    text, name = _read(source)
    return parse_s2c_text(text, name)


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize(complex: OrientedComplex2, device: DeviceSpec | None = None) -> str:
    out = io.StringIO()
    for label, p in zip(complex.vertex_labels, complex.positions):
        out.write(f"vertex {label} {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
    for k, (label, tri) in enumerate(zip(complex.triangle_labels, complex.triangles)):
        a, b, c = (complex.vertex_labels[v] for v in tri)
        extra = f" r={_fmt(device.reluctance[k])}" if device is not None else ""
        out.write(f"triangle {label} {a} {b} {c}{extra}\n")
    if device is not None:
        for k, label in enumerate(complex.triangle_labels):
            if device.loop_current[k] != 0:
                out.write(f"loop_current {label} {_fmt(device.loop_current[k])}\n")
        for k, label in enumerate(complex.triangle_labels):
            if device.mmf_source[k] != 0:
                out.write(f"mmf_source {label} {_fmt(device.mmf_source[k])}\n")
    return out.getvalue()


def write_s2c(path, complex: OrientedComplex2, device: DeviceSpec | None = None):
    Path(path).write_text(serialize(complex, device))


# -- tetrahedral fixtures -------------------------------------------------------------

def parse_tets_text(text: str, source: str = "<input>"):
    from .families import TetFixture

    vertices, tets, tlines = {}, {}, {}
    for no, tok in _lines(text):
        if tok[0] == "vertex":
            if len(tok) != 5:
                raise ParseError(no, "vertex needs an id and three coordinates", source)
            if tok[1] in vertices:
                raise ParseError(no, f"duplicate vertex id {tok[1]!r}", source)
            vertices[tok[1]] = tuple(_number(t, no, "coordinate", source) for t in tok[2:5])
        elif tok[0] == "tet":
            if len(tok) != 6:
                raise ParseError(no, "tet needs an id and four vertex ids", source)
            if tok[1] in tets:
                raise ParseError(no, f"duplicate tet id {tok[1]!r}", source)
            tets[tok[1]] = tuple(tok[2:6])
            tlines[tok[1]] = no
        else:
            raise ParseError(no, f"unknown record {tok[0]!r}", source)
    vids = list(vertices)
    vindex = {v: i for i, v in enumerate(vids)}
    rows = []
    for tid, vs in tets.items():
        for v in vs:
            if v not in vindex:
                raise ParseError(tlines[tid], f"tet {tid!r} references undefined vertex {v!r}", source)
        if len(set(vs)) != 4:
            raise ParseError(tlines[tid], f"tet {tid!r} repeats a vertex", source)
        rows.append([vindex[v] for v in vs])
    fx = TetFixture(np.array([vertices[v] for v in vids], dtype=float).reshape(-1, 3),
                    np.array(rows, dtype=np.int64).reshape(-1, 4), tuple(tets))
    vols = fx.volumes()
    for tid, vol in zip(tets, vols):
        if vol <= 0:
            raise ParseError(tlines[tid], f"tet {tid!r} is not positively oriented (volume {vol:.3g})", source)
    return fx, vids


def parse_tets(source):
    text, name = _read(source)
    return parse_tets_text(text, name)


def serialize_tets(fixture, vertex_labels=None) -> str:
    labels = vertex_labels or [str(i) for i in range(len(fixture.positions))]
    out = io.StringIO()
    for label, p in zip(labels, fixture.positions):
        out.write(f"vertex {label} {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
    for label, tet in zip(fixture.labels, fixture.tets):
        out.write("tet " + label + " " + " ".join(labels[v] for v in tet) + "\n")
    return out.getvalue()


# -- results --------------------------------------------------------------------------

CSV_HEADER = ("triangle_id", "flux_weber", "mmf_adjusted", "mmf_raw")


def solution_csv(complex: OrientedComplex2, sol: NetworkSolution, diagnostics: dict | None = None) -> str:
    """Per-triangle results followed by ``# key=value`` diagnostic lines."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    raw = sol.mmf_raw
    for k, label in enumerate(complex.triangle_labels):
        w.writerow([label, _fmt(sol.flux[k]), _fmt(sol.mmf_adjusted[k]), _fmt(raw[k])])
    for key in sorted(diagnostics or {}):
        out.write(f"# {key}={diagnostics[key]}\n")
    return out.getvalue()


def read_solution_csv(text: str) -> tuple[list, np.ndarray, dict]:
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    diag = {}
    for ln in text.splitlines():
        if ln.startswith("# "):
            k, _, v = ln[2:].partition("=")
            diag[k] = v
    rows = list(csv.reader(body))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("not a solution CSV")
    labels = [r[0] for r in rows[1:]]
    values = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float).reshape(-1, 3)
    return labels, values, diag


def _quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def dual_to_dot(dual) -> str:
    lines = ["digraph region_graph {"]
    for v in range(dual.n_nodes):
        attrs = ' [shape=doublecircle]' if dual.external == v else ""
        lines.append(f"  V{v + 1}{attrs};")
    labels = dual.triangle_labels or tuple(str(i) for i in range(dual.n_edges))
    for t, (a, b) in enumerate(zip(dual.tails.tolist(), dual.heads.tolist())):
        lines.append(f"  V{a + 1} -> V{b + 1} [label={_quote(labels[t])}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def tag_to_dot(tag, triangle_labels=None) -> str:
    labels = triangle_labels or [str(i) for i in range(tag.n_triangles)]
    lines = ["graph tag {"]
    for v in range(tag.n_vertices):
        lines.append(f"  {v} [label={_quote(labels[v // 2] + ('+' if v % 2 == 0 else '-'))}];")
    for p, q in tag.edges.tolist():
        lines.append(f"  {p} -- {q};")
    lines.append("}")
    return "\n".join(lines) + "\n"
