"""Line-oriented text format for every object kind.

    spseq 1
    field Fp:7
    kind spectral-sequence
    name S
    pages 2
    page 0
    dim (0,0) 1
    d (1,0) 1x1: 1
    cycle 0
    block (0,0) 1x1: 1
    ...

Matrices are written ``RxC: a b; c d`` (row-major, rows separated by ``;``).
Morphism documents nest their source and target between ``begin source`` /
``end source`` and ``begin target`` / ``end target``.  ``#`` starts a comment.
See ``docs/format.md`` for the full grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

import numpy as np

from .bigraded import BigradedMap, BigradedModule, Bidegree, RComplex, Report, differential_bidegree, validate_rcomplex
from .errors import DocumentSyntaxError, InvalidObject, SpseqError
from .filtered import FilteredComplex, FilteredMorphism
from .linalg import Field, get_field, parse_field, use_field
from .multicomplex import Multicomplex, MultiMorphism, op_bidegree
from .spectral import SpectralMorphism, SpectralSequence, derive_morphism

__all__ = ["Document", "dumps", "loads", "KINDS", "FORMAT_VERSION"]

FORMAT_VERSION = 1

Obj = Union[SpectralSequence, SpectralMorphism, FilteredComplex, FilteredMorphism, Multicomplex, MultiMorphism]

KINDS = (
    "spectral-sequence",
    "spectral-morphism",
    "filtered-complex",
    "filtered-morphism",
    "multicomplex",
    "multi-morphism",
)


@dataclass
class Document:
    field: Field
    kind: str
    obj: Obj


# -- printing -----------------------------------------------------------------------


def _fmt_bd(bd: Bidegree) -> str:
    return f"({bd[0]},{bd[1]})"


def _fmt_matrix(m: np.ndarray) -> str:
    F = get_field()
    rows = "; ".join(" ".join(F.format(x) for x in row) for row in m)
    return f"{m.shape[0]}x{m.shape[1]}: {rows}"


def _blocks(prefix: str, f: BigradedMap) -> list[str]:
    return [f"{prefix}{_fmt_bd(bd)} {_fmt_matrix(b)}" for bd, b in sorted(f.blocks().items())]


def _kind_of(obj: Obj) -> str:
    for cls, kind in (
        (SpectralSequence, "spectral-sequence"),
        (SpectralMorphism, "spectral-morphism"),
        (FilteredComplex, "filtered-complex"),
        (FilteredMorphism, "filtered-morphism"),
        (Multicomplex, "multicomplex"),
        (MultiMorphism, "multi-morphism"),
    ):
        if isinstance(obj, cls):
            return kind
    raise SpseqError(f"cannot serialize objects of type {type(obj).__name__}")


def _body(obj: Obj) -> list[str]:
    kind = _kind_of(obj)
    out = [f"kind {kind}"]
    if kind == "spectral-sequence":
        s: SpectralSequence = obj
        if s.name:
            out.append(f"name {s.name}")
        out.append(f"pages {s.M + 1}")
        for m in range(s.M + 1):
            out.append(f"page {m}")
            out += [f"dim {_fmt_bd(bd)} {k}" for bd, k in s.module(m).items()]
            out += _blocks("d ", s.d(m))
        for m in range(s.M):
            out.append(f"cycle {m}")
            out += _blocks("block ", s.cycle_map(m))
    elif kind == "spectral-morphism":
        f: SpectralMorphism = obj
        out += _nested(f.source, f.target)
        for m in range(f.N + 1):
            out.append(f"map {m}")
            out += _blocks("block ", f.map(m))
    elif kind == "filtered-complex":
        a: FilteredComplex = obj
        for n in a.degrees():
            out.append(f"degree {n} dim {a.dim(n)}")
        for n in a.degrees():
            lv = a.levels[n]
            lo, hi = lv[0], lv[-1]
            steps = " ".join(str(a.k(p, n)) for p in range(lo, hi + 1))
            out.append(f"filtration {n} from {lo}: {steps}")
        for n, m in sorted(a.d.items()):
            out.append(f"d {n} {_fmt_matrix(m)}")
    elif kind == "filtered-morphism":
        g: FilteredMorphism = obj
        out += _nested(g.source, g.target)
        for n, m in sorted(g.maps.items()):
            if np.any(m != 0):
                out.append(f"map {n} {_fmt_matrix(m)}")
    elif kind == "multicomplex":
        x: Multicomplex = obj
        out += [f"dim {_fmt_bd(bd)} {k}" for bd, k in x.module.items()]
        for i, op in sorted(x.ops.items()):
            out.append(f"op {i}")
            out += _blocks("block ", op)
    else:
        h: MultiMorphism = obj
        out += _nested(h.source, h.target)
        out += _blocks("block ", h.f)
    return out


def _nested(src: Obj, tgt: Obj) -> list[str]:
    return ["begin source", *_body(src), "end source", "begin target", *_body(tgt), "end target"]


def dumps(obj: Obj) -> str:
    """Canonical text of ``obj`` in the active field."""
    return "\n".join([f"spseq {FORMAT_VERSION}", f"field {get_field().name}", *_body(obj)]) + "\n"


# -- parsing ------------------------------------------------------------------------

_BD = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")
_SHAPE = re.compile(r"(\d+)x(\d+):")


@dataclass
class _Line:
    no: int
    text: str
    words: list[str]


class _Cursor:
    def __init__(self, text: str):
        self.lines: list[_Line] = []
        for i, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0].rstrip()
            if body.strip():
                self.lines.append(_Line(i, body, body.split()))
        self.pos = 0

    def peek(self) -> Optional[_Line]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next(self, what: str) -> _Line:
        ln = self.peek()
        if ln is None:
            last = self.lines[-1].no if self.lines else 1
            raise DocumentSyntaxError(last + 1, 1, f"unexpected end of document, expected {what}")
        self.pos += 1
        return ln

    def expect(self, keyword: str) -> _Line:
        ln = self.next(f"'{keyword}'")
        if ln.words[0] != keyword:
            raise _err(ln, ln.words[0], f"expected '{keyword}', found '{ln.words[0]}'")
        return ln

    def at(self, keyword: str) -> bool:
        ln = self.peek()
        return ln is not None and ln.words[0] == keyword


def _err(ln: _Line, token: str, msg: str) -> DocumentSyntaxError:
    col = ln.text.find(token) + 1 if token and token in ln.text else 1
    return DocumentSyntaxError(ln.no, col, msg)


def _int(ln: _Line, tok: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise _err(ln, tok, f"expected an integer, found '{tok}'") from None


def _parse_bd(ln: _Line, s: str) -> tuple[Bidegree, str]:
    m = _BD.match(s.lstrip())
    if not m:
        raise _err(ln, s.strip().split()[0] if s.strip() else "", "expected a bidegree '(p,q)'")
    rest = s.lstrip()[m.end() :]
    return (int(m.group(1)), int(m.group(2))), rest


def _parse_matrix(ln: _Line, s: str) -> np.ndarray:
    F = get_field()
    s = s.strip()
    m = _SHAPE.match(s)
    if not m:
        raise _err(ln, s.split()[0] if s else "", "expected a matrix 'RxC: ...'")
    rows, cols = int(m.group(1)), int(m.group(2))
    body = s[m.end() :].strip()
    row_txt = [r.split() for r in body.split(";")] if body else []
    if rows * cols == 0:
        if any(row_txt):
            raise _err(ln, body, "entries given for an empty matrix")
        return F.zeros(rows, cols)
    if len(row_txt) != rows or any(len(r) != cols for r in row_txt):
        raise _err(ln, body.split()[0] if body else s, f"matrix body does not have shape {rows}x{cols}")
    out = F.zeros(rows, cols)
    for i, r in enumerate(row_txt):
        for j, tok in enumerate(r):
            try:
                out[i, j] = F.parse(tok)
            except (ValueError, ZeroDivisionError):
                raise _err(ln, tok, f"'{tok}' is not an element of {F.name}") from None
    return out


def _rest(ln: _Line, keyword: str) -> str:
    return ln.text.lstrip()[len(keyword) :]


def _block_lines(cur: _Cursor, keyword: str) -> Iterator[tuple[_Line, Bidegree, np.ndarray]]:
    while cur.at(keyword):
        ln = cur.next(keyword)
        bd, rest = _parse_bd(ln, _rest(ln, keyword))
        yield ln, bd, _parse_matrix(ln, rest)


def _map_from_blocks(ln_blocks, src: BigradedModule, tgt: BigradedModule, bid: Bidegree) -> BigradedMap:
    blocks = {}
    for ln, bd, m in ln_blocks:
        want = (tgt.dim((bd[0] + bid[0], bd[1] + bid[1])), src.dim(bd))
        if m.shape != want:
            raise _err(ln, f"{m.shape[0]}x", f"block at {_fmt_bd(bd)} has shape {m.shape[0]}x{m.shape[1]}, expected {want[0]}x{want[1]}")
        blocks[bd] = m
    return BigradedMap(src, tgt, bid, blocks)


def _invalid(rep: Report) -> InvalidObject:
    return InvalidObject(rep)


def _parse_spectral(cur: _Cursor) -> SpectralSequence:
    name = ""
    if cur.at("name"):
        name = _rest(cur.next("name"), "name").strip()
    ln = cur.expect("pages")
    if len(ln.words) != 2:
        raise _err(ln, ln.words[-1], "expected 'pages <count>'")
    count = _int(ln, ln.words[1])
    if count < 1:
        raise _err(ln, ln.words[1], "a spectral sequence has at least one page")
    pages = []
    for m in range(count):
        ln = cur.expect("page")
        if len(ln.words) != 2 or _int(ln, ln.words[1]) != m:
            raise _err(ln, ln.words[-1], f"expected 'page {m}'")
        dims = {}
        while cur.at("dim"):
            dl = cur.next("dim")
            bd, rest = _parse_bd(dl, _rest(dl, "dim"))
            dims[bd] = _int(dl, rest.strip())
        mod = BigradedModule(dims)
        d = _map_from_blocks(list(_block_lines(cur, "d")), mod, mod, differential_bidegree(m))
        page = RComplex(mod, m, d)
        rep = validate_rcomplex(page, page=m)
        if not rep:
            raise _invalid(rep)
        pages.append(page)
    cycles = []
    for m in range(count - 1):
        if cur.at("cycle"):
            ln = cur.next("cycle")
            if len(ln.words) != 2 or _int(ln, ln.words[1]) != m:
                raise _err(ln, ln.words[-1], f"expected 'cycle {m}'")
            c = _map_from_blocks(list(_block_lines(cur, "block")), pages[m].module, pages[m + 1].module, (0, 0))
        elif pages[m].differential.is_zero() and pages[m].module == pages[m + 1].module:
            c = BigradedMap.identity(pages[m].module)
        else:
            ln = cur.peek() or cur.lines[-1]
            raise _err(ln, ln.words[0], f"missing 'cycle {m}' (page {m} is not equal to page {m + 1} with zero d)")
        if not (c @ pages[m].differential).is_zero():
            raise _invalid(Report.failed("cycle map does not vanish on boundaries", page=m, invariant="cycle map"))
        cycles.append(c)
    return SpectralSequence.from_cycle_maps(pages, cycles, trim=False, name=name)


def _parse_nested(cur: _Cursor, role: str, kinds: tuple[str, ...]) -> Obj:
    cur.expect("begin")
    obj = _parse_body(cur, kinds)
    ln = cur.expect("end")
    if ln.words[1:] != [role]:
        raise _err(ln, ln.words[-1], f"expected 'end {role}'")
    return obj


def _parse_spectral_morphism(cur: _Cursor) -> SpectralMorphism:
    src = _parse_nested(cur, "source", ("spectral-sequence",))
    tgt = _parse_nested(cur, "target", ("spectral-sequence",))
    maps = []
    while cur.at("map"):
        ln = cur.next("map")
        if len(ln.words) != 2 or _int(ln, ln.words[1]) != len(maps):
            raise _err(ln, ln.words[-1], f"expected 'map {len(maps)}'")
        m = len(maps)
        maps.append(_map_from_blocks(list(_block_lines(cur, "block")), src.module(m), tgt.module(m), (0, 0)))
    if not maps:
        raise _err(cur.peek() or cur.lines[-1], "", "a morphism needs at least 'map 0'")
    if len(maps) == 1:
        return derive_morphism(maps[0], src, tgt)
    return SpectralMorphism(src, tgt, maps)


def _parse_filtered(cur: _Cursor) -> FilteredComplex:
    dims: dict[int, int] = {}
    while cur.at("degree"):
        ln = cur.next("degree")
        if len(ln.words) != 4 or ln.words[2] != "dim":
            raise _err(ln, ln.words[-1], "expected 'degree <n> dim <k>'")
        dims[_int(ln, ln.words[1])] = _int(ln, ln.words[3])
    levels: dict[int, list[int]] = {}
    while cur.at("filtration"):
        ln = cur.next("filtration")
        m = re.match(r"\s*filtration\s+(-?\d+)\s+from\s+(-?\d+)\s*:(.*)$", ln.text)
        if not m:
            raise _err(ln, "filtration", "expected 'filtration <n> from <p>: k_p k_p+1 ...'")
        n, p0 = int(m.group(1)), int(m.group(2))
        steps = [_int(ln, t) for t in m.group(3).split()]
        if n not in dims:
            raise _err(ln, m.group(1), f"degree {n} has no 'degree' line")
        if not steps or any(x > y for x, y in zip(steps, steps[1:])) or steps[-1] != dims[n] or steps[0] < 0:
            raise _err(ln, m.group(3).split()[0] if m.group(3).split() else "filtration",
                       f"step list must be non-decreasing and end at dim {dims[n]}")
        lv, prev = [], 0
        for i, k in enumerate(steps):
            lv += [p0 + i] * (k - prev)
            prev = k
        levels[n] = lv
    for n, k in dims.items():
        if k and n not in levels:
            raise _err(cur.peek() or cur.lines[-1], "", f"degree {n} has no 'filtration' line")
    d = {}
    while cur.at("d"):
        ln = cur.next("d")
        n = _int(ln, ln.words[1])
        d[n] = _parse_matrix(ln, _rest(ln, "d").strip()[len(ln.words[1]) :])
        if d[n].shape != (dims.get(n + 1, 0), dims.get(n, 0)):
            raise _err(ln, ln.words[2], f"d {n} must be {dims.get(n + 1, 0)}x{dims.get(n, 0)}")
    return FilteredComplex(dims, d, levels)


def _parse_filtered_morphism(cur: _Cursor) -> FilteredMorphism:
    src = _parse_nested(cur, "source", ("filtered-complex",))
    tgt = _parse_nested(cur, "target", ("filtered-complex",))
    maps = {}
    while cur.at("map"):
        ln = cur.next("map")
        n = _int(ln, ln.words[1])
        maps[n] = _parse_matrix(ln, _rest(ln, "map").strip()[len(ln.words[1]) :])
        if maps[n].shape != (tgt.dim(n), src.dim(n)):
            raise _err(ln, ln.words[2], f"map {n} must be {tgt.dim(n)}x{src.dim(n)}")
    return FilteredMorphism(src, tgt, maps)


def _parse_multicomplex(cur: _Cursor) -> Multicomplex:
    dims = {}
    while cur.at("dim"):
        ln = cur.next("dim")
        bd, rest = _parse_bd(ln, _rest(ln, "dim"))
        dims[bd] = _int(ln, rest.strip())
    mod = BigradedModule(dims)
    ops = {}
    while cur.at("op"):
        ln = cur.next("op")
        i = _int(ln, ln.words[1])
        if i < 0 or i in ops:
            raise _err(ln, ln.words[1], f"operator index {i} is negative or repeated")
        ops[i] = _map_from_blocks(list(_block_lines(cur, "block")), mod, mod, op_bidegree(i))
    return Multicomplex(mod, ops)


def _parse_multi_morphism(cur: _Cursor) -> MultiMorphism:
    src = _parse_nested(cur, "source", ("multicomplex",))
    tgt = _parse_nested(cur, "target", ("multicomplex",))
    f = _map_from_blocks(list(_block_lines(cur, "block")), src.module, tgt.module, (0, 0))
    return MultiMorphism(src, tgt, f)


_PARSERS: dict[str, Callable[[_Cursor], Obj]] = {
    "spectral-sequence": _parse_spectral,
    "spectral-morphism": _parse_spectral_morphism,
    "filtered-complex": _parse_filtered,
    "filtered-morphism": _parse_filtered_morphism,
    "multicomplex": _parse_multicomplex,
    "multi-morphism": _parse_multi_morphism,
}


def _parse_body(cur: _Cursor, kinds: tuple[str, ...] = KINDS) -> Obj:
    ln = cur.expect("kind")
    if len(ln.words) != 2 or ln.words[1] not in kinds:
        raise _err(ln, ln.words[-1], f"kind must be one of {', '.join(kinds)}")
    return _PARSERS[ln.words[1]](cur)


def loads(text: str, default_field: Optional[Field] = None) -> Document:
    """Parse a document; objects are built in the field named by its header.

    A document without a ``field`` line uses ``default_field`` (or the active field).
    """
    cur = _Cursor(text)
    ln = cur.expect("spseq")
    if len(ln.words) != 2 or ln.words[1] != str(FORMAT_VERSION):
        raise _err(ln, ln.words[-1], f"unsupported format version (expected 'spseq {FORMAT_VERSION}')")
    field = default_field or get_field()
    if cur.at("field"):
        fl = cur.next("field")
        try:
            field = parse_field(fl.words[1] if len(fl.words) == 2 else "")
        except ValueError as exc:
            raise _err(fl, fl.words[-1], str(exc)) from None
    with use_field(field):
        kind_line = cur.peek()
        obj = _parse_body(cur)
        extra = cur.peek()
        if extra is not None:
            raise _err(extra, extra.words[0], f"unexpected '{extra.words[0]}' after the end of the object")
    return Document(field, kind_line.words[1], obj)
