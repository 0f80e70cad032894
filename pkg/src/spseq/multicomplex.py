"""Multicomplexes: operators ``d_i`` of bidegree ``(-i, 1-i)`` with ``Σ_{i+j=l} (-1)^i d_i d_j = 0``.

Totalization uses total degree ``n = q - p``, the column filtration
``F_s = ⊕_{p <= s}`` and ``D = Σ_i (-1)^{i n} d_i``; the spectral sequence
of a multicomplex is the one of its totalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _pairs
from typing import Callable, Iterable, Mapping, Optional

import numpy as np

from .bigraded import BigradedMap, BigradedModule, Bidegree, Report, direct_sum, shift
from .errors import DimensionMismatch, InternalInvariantViolation, InvalidObject, RelationViolation
from .filtered import FilteredComplex, FilteredMorphism, e_of_morphism, spectral_sequence
from .linalg import get_field, kernel_basis, solve
from .linsys import LinearSystem
from .paths import PathObject, RHomotopy, homotopy_from_morphism, path
from .spectral import SpectralMorphism, SpectralSequence, find_isomorphism

__all__ = [
    "Multicomplex",
    "MultiMorphism",
    "validate_multicomplex",
    "is_n_multicomplex",
    "op_bidegree",
    "tot",
    "tot_morphism",
    "eprime",
    "eprime_of_morphism",
    "tensor",
    "lambda_mc",
    "McPath",
    "mc_path",
    "mc_direct_sum",
    "mc_pullback",
    "mc_strict_homotopy_check",
    "find_strict_homotopy",
    "strict_to_spectral_witness",
]


def op_bidegree(i: int) -> Bidegree:
    return (-i, 1 - i)


def _sgn(e: int) -> int:
    return -1 if e % 2 else 1


class Multicomplex:
    def __init__(self, module: BigradedModule, ops: Mapping[int, BigradedMap], check: bool = True):
        self.module = module
        self.ops: dict[int, BigradedMap] = {}
        for i, d in sorted(ops.items()):
            if i < 0:
                raise DimensionMismatch(f"operator index {i} is negative")
            if d.source != module or d.target != module or d.bidegree != op_bidegree(i):
                raise DimensionMismatch(f"d_{i} must be an endomorphism of bidegree {op_bidegree(i)}")
            if not d.is_zero():
                self.ops[i] = d
        if check:
            rep = validate_multicomplex(self)
            if not rep:
                raise InvalidObject(rep)

    def d(self, i: int) -> BigradedMap:
        m = self.ops.get(i)
        return m if m is not None else BigradedMap.zero(self.module, self.module, op_bidegree(i))

    @property
    def N(self) -> int:
        """Largest index of a nonzero operator, or -1."""
        return max(self.ops, default=-1)

    @classmethod
    def zero(cls) -> "Multicomplex":
        return cls(BigradedModule(), {})

    def __repr__(self) -> str:
        return f"Multicomplex({self.module.as_dict()}, ops={sorted(self.ops)})"


def validate_multicomplex(a: Multicomplex) -> Report:
    n = a.N
    for l in range(2 * n + 1):
        acc = None
        for i in range(l + 1):
            j = l - i
            if i not in a.ops or j not in a.ops:
                continue
            term = (a.ops[i] @ a.ops[j]).scale(_sgn(i))
            acc = term if acc is None else acc + term
        if acc is not None and not acc.is_zero():
            bad = next(bd for bd, b in acc.blocks().items() if np.any(b != 0))
            return Report.failed(
                f"sum over i+j={l} of (-1)^i d_i d_j is nonzero", bidegree=bad, invariant=f"multicomplex relation l={l}"
            )
    return Report.passed()


def is_n_multicomplex(a: Multicomplex, n: int) -> bool:
    return all(i < n for i in a.ops)


class MultiMorphism:
    """Strict morphism: one bidegree-(0,0) map commuting with every ``d_i``."""

    def __init__(self, source: Multicomplex, target: Multicomplex, f: BigradedMap, check: bool = True):
        if f.source != source.module or f.target != target.module or f.bidegree != (0, 0):
            raise DimensionMismatch("a multicomplex morphism is a bidegree (0,0) map between the modules")
        self.source, self.target, self.f = source, target, f
        if check and not self.commutes():
            raise InvalidObject(Report.failed("does not commute with every d_i", invariant="d_i f = f d_i"))

    def commutes(self) -> bool:
        a, b = self.source, self.target
        return all((b.d(i) @ self.f) == (self.f @ a.d(i)) for i in set(a.ops) | set(b.ops))

    def __matmul__(self, other: "MultiMorphism") -> "MultiMorphism":
        return MultiMorphism(other.source, self.target, self.f @ other.f, check=False)

    @classmethod
    def identity(cls, a: Multicomplex) -> "MultiMorphism":
        return cls(a, a, BigradedMap.identity(a.module), check=False)


# -- totalization --------------------------------------------------------------------


def _tot_layout(module: BigradedModule) -> dict[int, list[tuple[Bidegree, int]]]:
    """Degree ``n`` -> ``[(bidegree, offset)]`` sorted by ``p``."""
    out: dict[int, list] = {}
    for bd, _ in sorted(module.items()):
        out.setdefault(bd[1] - bd[0], []).append(bd)
    layout = {}
    for n, bds in out.items():
        acc, rows = 0, []
        for bd in sorted(bds):
            rows.append((bd, acc))
            acc += module.dim(bd)
        layout[n] = rows
    return layout


def tot(a: Multicomplex) -> FilteredComplex:
    F = get_field()
    layout = _tot_layout(a.module)
    dims = {n: sum(a.module.dim(bd) for bd, _ in rows) for n, rows in layout.items()}
    levels = {n: [bd[0] for bd, _ in rows for _ in range(a.module.dim(bd))] for n, rows in layout.items()}
    offs = {n: dict(rows) for n, rows in layout.items()}
    d = {}
    for n, rows in layout.items():
        if n + 1 not in layout:
            continue
        m = F.zeros(dims[n + 1], dims[n])
        for i, op in a.ops.items():
            s = _sgn(i * n)
            for bd, off in rows:
                blk = op.blocks().get(bd)
                if blk is None:
                    continue
                toff = offs[n + 1][shift(bd, op_bidegree(i))]
                m[toff : toff + blk.shape[0], off : off + blk.shape[1]] += s * blk
        d[n] = F.reduce(m)
    for n, m in d.items():
        nxt = d.get(n + 1)
        if nxt is not None and np.any(F.matmul(nxt, m) != 0):
            raise InternalInvariantViolation(f"total differential squares to nonzero in degree {n}")
    return FilteredComplex(dims, d, levels)


def tot_morphism(f: MultiMorphism, src: Optional[FilteredComplex] = None, tgt: Optional[FilteredComplex] = None) -> FilteredMorphism:
    F = get_field()
    src = src if src is not None else tot(f.source)
    tgt = tgt if tgt is not None else tot(f.target)
    ls, lt = _tot_layout(f.source.module), _tot_layout(f.target.module)
    maps = {}
    for n, rows in ls.items():
        if n not in lt:
            continue
        to = dict(lt[n])
        m = F.zeros(tgt.dim(n), src.dim(n))
        for bd, off in rows:
            blk = f.f.blocks().get(bd)
            if blk is not None and bd in to:
                m[to[bd] : to[bd] + blk.shape[0], off : off + blk.shape[1]] = blk
        maps[n] = m
    return FilteredMorphism(src, tgt, maps)


_TOT_CACHE_ATTR = "_tot_cache"


def _cached_tot(a: Multicomplex) -> FilteredComplex:
    t = getattr(a, _TOT_CACHE_ATTR, None)
    if t is None:
        t = tot(a)
        setattr(a, _TOT_CACHE_ATTR, t)
    return t


def eprime(a: Multicomplex) -> SpectralSequence:
    return spectral_sequence(_cached_tot(a))


def eprime_of_morphism(f: MultiMorphism) -> SpectralMorphism:
    return e_of_morphism(tot_morphism(f, _cached_tot(f.source), _cached_tot(f.target)))


# -- tensor products and the path object -----------------------------------------------


def _derived_sign(i: int, bd: Bidegree) -> int:
    """Sign of ``x ⊗ d_i y`` for ``x`` in bidegree ``bd``: ``(-1)^{q + i (q - p)}``."""
    p, q = bd
    return _sgn(q + i * (q - p))


def _koszul_sign(i: int, bd: Bidegree) -> int:
    """``(-1)^{q - p}``: the total-degree Koszul sign, which breaks the relation for ``i >= 1``."""
    return _sgn(bd[1] - bd[0])


TENSOR_SIGNS: dict[str, Callable[[int, Bidegree], int]] = {"derived": _derived_sign, "koszul": _koszul_sign}


@dataclass
class _TensorLayout:
    module: BigradedModule
    offsets: dict[Bidegree, dict[tuple[Bidegree, Bidegree], int]]


def _tensor_layout(ma: BigradedModule, mb: BigradedModule) -> _TensorLayout:
    offsets: dict[Bidegree, dict] = {}
    dims: dict[Bidegree, int] = {}
    for (ba, ka), (bb, kb) in _pairs(ma.items(), mb.items()):
        bd = shift(ba, bb)
        offsets.setdefault(bd, {})[(ba, bb)] = dims.get(bd, 0)
        dims[bd] = dims.get(bd, 0) + ka * kb
    return _TensorLayout(BigradedModule(dims), offsets)


def tensor(a: Multicomplex, b: Multicomplex, sign: str = "derived", check: bool = True) -> Multicomplex:
    """``d_i(x ⊗ y) = d_i x ⊗ y + ε_i(x) x ⊗ d_i y``.

    Raises RelationViolation when the chosen sign rule does not produce a multicomplex.
    """
    F = get_field()
    eps = TENSOR_SIGNS[sign]
    lay = _tensor_layout(a.module, b.module)
    ops = {}
    for i in sorted(set(a.ops) | set(b.ops)):
        shiftd = op_bidegree(i)
        blocks: dict[Bidegree, np.ndarray] = {}
        for bd, parts in lay.offsets.items():
            tbd = shift(bd, shiftd)
            if not lay.module.dim(tbd):
                continue
            blk = F.zeros(lay.module.dim(tbd), lay.module.dim(bd))
            tparts = lay.offsets[tbd]
            for (ba, bb), off in parts.items():
                ka, kb = a.module.dim(ba), b.module.dim(bb)
                da = a.d(i).blocks().get(ba)
                if da is not None:
                    toff = tparts[(shift(ba, shiftd), bb)]
                    blk[toff : toff + da.shape[0] * kb, off : off + ka * kb] += np.kron(da, F.eye(kb))
                db = b.d(i).blocks().get(bb)
                if db is not None:
                    toff = tparts[(ba, shift(bb, shiftd))]
                    blk[toff : toff + ka * db.shape[0], off : off + ka * kb] += eps(i, ba) * np.kron(F.eye(ka), db)
            blk = F.reduce(blk)
            if np.any(blk != 0):
                blocks[bd] = blk
        ops[i] = BigradedMap(lay.module, lay.module, shiftd, blocks)
    out = Multicomplex(lay.module, ops, check=False)
    if check:
        rep = validate_multicomplex(out)
        if not rep:
            raise RelationViolation(f"tensor with the {sign} sign rule is not a multicomplex: {rep}")
    return out


def lambda_mc(r: int) -> Multicomplex:
    """``e_-, e_+`` at (0,0), ``u`` at ``(-r, 1-r)``, ``d_r e_∓ = ∓u``."""
    F = get_field()
    mod = BigradedModule({(0, 0): 2, op_bidegree(r): 1})
    d = BigradedMap(mod, mod, op_bidegree(r), {(0, 0): F.array([[-1, 1]])})
    return Multicomplex(mod, {r: d})


def _unit(at: Bidegree = (0, 0)) -> Multicomplex:
    return Multicomplex(BigradedModule({at: 1}), {})


@dataclass
class McPath:
    """``Λ_r ⊗ A`` with ``iota: A -> P`` and the endpoint projections ``minus, plus: P -> A``."""

    r: int
    base: Multicomplex
    P: Multicomplex
    iota: MultiMorphism
    minus: MultiMorphism
    plus: MultiMorphism


def mc_path(r: int, a: Multicomplex, sign: str = "derived") -> McPath:
    F = get_field()
    lam = lambda_mc(r)
    p = tensor(lam, a, sign=sign)
    lay = _tensor_layout(lam.module, a.module)
    minus_b, plus_b, iota_b = {}, {}, {}
    for bd, k in a.module.items():
        off = lay.offsets[bd][((0, 0), bd)]
        sel_m = F.zeros(k, p.module.dim(bd))
        sel_p = F.zeros(k, p.module.dim(bd))
        for j in range(k):
            sel_m[j, off + j] = F.one  # e_- ⊗ x_j
            sel_p[j, off + k + j] = F.one  # e_+ ⊗ x_j
        minus_b[bd], plus_b[bd] = sel_m, sel_p
        iota_b[bd] = F.reduce(sel_m.T + sel_p.T)
    return McPath(
        r,
        a,
        p,
        MultiMorphism(a, p, BigradedMap(a.module, p.module, (0, 0), iota_b)),
        MultiMorphism(p, a, BigradedMap(p.module, a.module, (0, 0), minus_b)),
        MultiMorphism(p, a, BigradedMap(p.module, a.module, (0, 0), plus_b)),
    )


def mc_direct_sum(*parts: Multicomplex) -> tuple[Multicomplex, list[MultiMorphism], list[MultiMorphism]]:
    from .bigraded import block_map, inclusion, projection

    mods = [x.module for x in parts]
    total = direct_sum(*mods)
    idx = sorted({i for x in parts for i in x.ops})
    ops = {i: block_map(mods, mods, op_bidegree(i), {(j, j): x.d(i) for j, x in enumerate(parts)}) for i in idx}
    s = Multicomplex(total, ops, check=False)
    projs = [MultiMorphism(s, x, projection(mods, j), check=False) for j, x in enumerate(parts)]
    incs = [MultiMorphism(x, s, inclusion(mods, j), check=False) for j, x in enumerate(parts)]
    return s, projs, incs


def mc_pullback(g: MultiMorphism, p: MultiMorphism) -> tuple[Multicomplex, MultiMorphism, MultiMorphism]:
    """``ker(g - p) ⊂ U ⊕ A`` with ``d_i(u, a) = (d_i u, d_i a)``."""
    F = get_field()
    u, a = g.source, p.source
    s, (pu, pa), _ = mc_direct_sum(u, a)
    diff = (g.f @ pu.f) - (p.f @ pa.f)
    bases = {}
    for bd, k in s.module.items():
        blk = diff.block(bd)
        ker = kernel_basis(blk) if blk.shape[0] else F.eye(k)
        if ker.shape[1]:
            bases[bd] = ker
    mod = BigradedModule({bd: m.shape[1] for bd, m in bases.items()})
    ops = {}
    for i, op in s.ops.items():
        blocks = {}
        for bd, m in bases.items():
            tbd = shift(bd, op_bidegree(i))
            if tbd not in bases:
                continue
            y = solve(bases[tbd], F.matmul(op.block(bd), m))
            if y is None:
                raise InternalInvariantViolation(f"kernel of g - p is not closed under d_{i}")
            blocks[bd] = y
        ops[i] = BigradedMap(mod, mod, op_bidegree(i), blocks)
    x = Multicomplex(mod, ops)
    incl = BigradedMap(mod, s.module, (0, 0), bases)
    return x, MultiMorphism(x, u, pu.f @ incl), MultiMorphism(x, a, pa.f @ incl)


# -- strict homotopies ---------------------------------------------------------------


def mc_strict_homotopy_check(h: MultiMorphism, f: MultiMorphism, g: MultiMorphism, pth: McPath) -> bool:
    """``h: A -> Λ_r ⊗ B`` strict with ``∂^- h = f`` and ``∂^+ h = g``."""
    if h.source.module != f.source.module or h.target.module != pth.P.module:
        return False
    if not h.commutes():
        return False
    return (pth.minus.f @ h.f) == f.f and (pth.plus.f @ h.f) == g.f


def find_strict_homotopy(f: MultiMorphism, g: MultiMorphism, r: int) -> Optional[tuple[MultiMorphism, McPath]]:
    """Solve for a strict ``h: A -> P_r(B)`` over ``(f, g)``."""
    a = f.source
    pth = mc_path(r, f.target)
    sys = LinearSystem()
    h = sys.allocate(a.module, pth.P.module, (0, 0))
    for i in sorted(set(a.ops) | set(pth.P.ops)):
        sys.equate(h.left(pth.P.d(i)) - h.right(a.d(i)))
    sys.equate(h.left(pth.minus.f), f.f)
    sys.equate(h.left(pth.plus.f), g.f)
    x0, _ = sys.solve()
    if x0 is None:
        return None
    return MultiMorphism(a, pth.P, h.evaluate(x0)), pth


def strict_to_spectral_witness(h: MultiMorphism, pth: McPath, rng: Optional[np.random.Generator] = None) -> Optional[RHomotopy]:
    """Push a strict homotopy through ``E'`` and read off the spectral r-homotopy.

    ``E'(P_r(B))`` is identified with ``P(r; E'(B))`` over both endpoint maps.
    """
    eh = eprime_of_morphism(h)
    pb = path(pth.r, eprime(pth.base))
    iso = find_isomorphism(
        eprime(pth.P),
        pb.P,
        post=[(pb.minus, eprime_of_morphism(pth.minus)), (pb.plus, eprime_of_morphism(pth.plus))],
        rng=rng,
    )
    if iso is None:
        return None
    return homotopy_from_morphism(iso @ eh, pb)
