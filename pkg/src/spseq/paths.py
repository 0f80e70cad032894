"""Interval objects, r-paths, mapping path spaces and r-homotopies.

Summand order on pages ``m <= r`` of a path is ``(x, y, z)`` with the middle
summand ``y`` taken from ``A_m`` shifted so that ``A^{p+r, q+r-1}`` sits at
``(p, q)``.  Above page ``r`` a path is ``A`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .bigraded import BigradedMap, BigradedModule, RComplex, block_map, differential_bidegree, direct_sum
from .errors import DimensionMismatch
from .linalg import get_field
from .linsys import LinearMap, LinearSystem
from .spectral import SpectralMorphism, SpectralSequence, derive_morphism

__all__ = [
    "lambda_",
    "PathObject",
    "path",
    "path_morphism",
    "MappingPathSpace",
    "mapping_path_space",
    "induced_on_mapping_path",
    "RHomotopy",
    "is_r_homotopy",
    "find_r_homotopy",
    "homotopy_to_morphism",
    "homotopy_from_morphism",
    "path_contraction",
    "is_r_homotopy_equivalence",
]


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _mid(module: BigradedModule, r: int) -> BigradedModule:
    return module.shifted((r, r - 1))


def _mid_map(f: BigradedMap, r: int) -> BigradedMap:
    """``f`` acting on the shifted copies of its source and target."""
    return f.reindexed(_mid(f.source, r), _mid(f.target, r), (r, r - 1))


def lambda_(r: int) -> SpectralSequence:
    """``e_-, e_+`` at ``(0,0)`` and ``u`` at ``(-r, 1-r)`` with ``d_r e_∓ = ∓u``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    F = get_field()
    ub = (-r, 1 - r)
    mod = BigradedModule({(0, 0): 2, ub: 1})
    top = BigradedModule({(0, 0): 1})
    pages, cyc = [], []
    for m in range(r + 1):
        if m < r:
            pages.append(RComplex.zero_differential(mod, m))
            cyc.append(BigradedMap.identity(mod))
        else:
            d = BigradedMap(mod, mod, differential_bidegree(r), {(0, 0): F.array([[-1, 1]])})
            pages.append(RComplex(mod, r, d))
            cyc.append(BigradedMap(mod, top, (0, 0), {(0, 0): F.array([[1, 0]])}))
    pages.append(RComplex.zero_differential(top, r + 1))
    return SpectralSequence.from_cycle_maps(pages, cyc, name=f"Lambda_{r}")


@dataclass
class PathObject:
    """``P(r;A)`` with ``iota: A -> P`` and the endpoint maps ``minus, plus: P -> A``."""

    r: int
    base: SpectralSequence
    P: SpectralSequence
    iota: SpectralMorphism
    minus: SpectralMorphism
    plus: SpectralMorphism

    def __iter__(self):
        return iter((self.P, self.iota, self.minus, self.plus))


def _three(a: BigradedModule, mid: BigradedModule, c: BigradedModule) -> list[BigradedModule]:
    return [a, mid, c]


def _path_page(r: int, m: int, a: RComplex, b_mid: RComplex, c: RComplex, glue: Optional[BigradedMap]) -> RComplex:
    """Page ``m`` of a path-like object with summands ``(a, b_mid, c)``.

    Below ``r`` the middle differential carries the sign ``(-1)^{m+r+1}``;
    at ``m == r`` the middle row is ``(-glue, -d, 1)``.
    """
    mods = [a.module, b_mid.module, c.module]
    bid = differential_bidegree(m)
    if m < r:
        entries = {(0, 0): a.differential, (1, 1): b_mid.differential.scale(_sign(m + r + 1)), (2, 2): c.differential}
    else:
        F = get_field()
        one = BigradedMap(c.module, b_mid.module, bid, {bd: F.eye(k) for bd, k in c.module.items()}, check=False)
        entries = {
            (0, 0): a.differential,
            (1, 0): -glue,
            (1, 1): -b_mid.differential,
            (1, 2): one,
            (2, 2): c.differential,
        }
    return RComplex(direct_sum(*mods), m, block_map(mods, mods, bid, entries))


def _mid_complex(c: RComplex, r: int) -> RComplex:
    return RComplex(_mid(c.module, r), c.r, _mid_map(c.differential, r))


def _shift_glue(u: BigradedMap, r: int) -> BigradedMap:
    """``u: A -> B`` viewed as a map ``A -> B[mid]`` of bidegree ``(-r, 1-r)``."""
    return BigradedMap(u.source, _mid(u.target, r), differential_bidegree(r), u.blocks())


def path(r: int, a: SpectralSequence) -> PathObject:
    """``P(r;A)``: three copies of ``A`` on pages ``m <= r`` glued on page ``r``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    n = max(a.M, r + 1)
    pages, cyc = [], []
    for m in range(n + 1):
        am = a.page(m)
        if m <= r:
            mid = _mid_complex(am, r)
            glue = _shift_glue(BigradedMap.identity(am.module), r) if m == r else None
            pages.append(_path_page(r, m, am, mid, am, glue))
            mods = _three(am.module, mid.module, am.module)
            c = a.cycle_map(m)
            if m < r:
                nxt = _three(a.module(m + 1), _mid(a.module(m + 1), r), a.module(m + 1))
                cyc.append(block_map(mods, nxt, (0, 0), {(0, 0): c, (1, 1): _mid_map(c, r), (2, 2): c}))
            else:
                cyc.append(block_map(mods, [a.module(m + 1)], (0, 0), {(0, 0): c}))
        else:
            pages.append(am)
            if m < n:
                cyc.append(a.cycle_map(m))
    P = SpectralSequence.from_cycle_maps(pages, cyc, name=f"P({r};{a.name})" if a.name else "")
    iota, minus, plus = [], [], []
    for m in range(max(P.M, a.M) + 1):
        am = a.module(m)
        ident = BigradedMap.identity(am)
        if m <= r:
            mods = _three(am, _mid(am, r), am)
            iota.append(block_map([am], mods, (0, 0), {(0, 0): ident, (2, 0): ident}))
            minus.append(block_map(mods, [am], (0, 0), {(0, 0): ident}))
            plus.append(block_map(mods, [am], (0, 0), {(0, 2): ident}))
        else:
            iota.append(ident)
            minus.append(ident)
            plus.append(ident)
    return PathObject(
        r,
        a,
        P,
        SpectralMorphism(a, P, iota),
        SpectralMorphism(P, a, minus),
        SpectralMorphism(P, a, plus),
    )


def path_morphism(
    r: int,
    f: SpectralMorphism,
    src: Optional[PathObject] = None,
    tgt: Optional[PathObject] = None,
    middle_signs: Optional[Sequence[int]] = None,
) -> SpectralMorphism:
    """``P(r;f)``, acting as ``f_m`` on all three summands for ``m <= r``.

    ``middle_signs[m]`` rescales the middle block on page ``m``; anything but
    all ones fails to be a morphism and raises :class:`NotAMorphism`.
    """
    src = src or path(r, f.source)
    tgt = tgt or path(r, f.target)
    maps = []
    for m in range(max(src.P.M, tgt.P.M) + 1):
        fm = f.map(m)
        if m <= r:
            s = 1 if middle_signs is None else middle_signs[m]
            a, b = fm.source, fm.target
            maps.append(
                block_map(
                    _three(a, _mid(a, r), a),
                    _three(b, _mid(b, r), b),
                    (0, 0),
                    {(0, 0): fm, (1, 1): _mid_map(fm, r).scale(s), (2, 2): fm},
                )
            )
        else:
            maps.append(fm)
    return SpectralMorphism(src.P, tgt.P, maps)


@dataclass
class MappingPathSpace:
    """``u = p ∘ i`` through ``Pbar = A x_B P(r;B)``, with ``rho ∘ i = 1_A``."""

    r: int
    u: SpectralMorphism
    Pbar: SpectralSequence
    i: SpectralMorphism
    p: SpectralMorphism
    rho: SpectralMorphism

    def __iter__(self):
        return iter((self.Pbar, self.i, self.p, self.rho))


def mapping_path_space(r: int, u: SpectralMorphism) -> MappingPathSpace:
    a, b = u.source, u.target
    n = max(a.M, b.M, r + 1)
    pages, cyc = [], []
    for m in range(n + 1):
        am, bm = a.page(m), b.page(m)
        if m <= r:
            mid = _mid_complex(bm, r)
            glue = _shift_glue(u.map(m), r) if m == r else None
            pages.append(_path_page(r, m, am, mid, bm, glue))
            mods = _three(am.module, mid.module, bm.module)
            if m < r:
                nxt = _three(a.module(m + 1), _mid(b.module(m + 1), r), b.module(m + 1))
                cb = b.cycle_map(m)
                cyc.append(block_map(mods, nxt, (0, 0), {(0, 0): a.cycle_map(m), (1, 1): _mid_map(cb, r), (2, 2): cb}))
            else:
                cyc.append(block_map(mods, [a.module(m + 1)], (0, 0), {(0, 0): a.cycle_map(m)}))
        else:
            pages.append(am)
            if m < n:
                cyc.append(a.cycle_map(m))
    pbar = SpectralSequence.from_cycle_maps(pages, cyc)
    imaps, pmaps, rmaps = [], [], []
    for m in range(max(pbar.M, a.M, b.M) + 1):
        am, bm = a.module(m), b.module(m)
        if m <= r:
            mods = _three(am, _mid(bm, r), bm)
            ida = BigradedMap.identity(am)
            imaps.append(block_map([am], mods, (0, 0), {(0, 0): ida, (2, 0): u.map(m)}))
            pmaps.append(block_map(mods, [bm], (0, 0), {(0, 2): BigradedMap.identity(bm)}))
            rmaps.append(block_map(mods, [am], (0, 0), {(0, 0): ida}))
        else:
            imaps.append(BigradedMap.identity(am))
            pmaps.append(u.map(m))
            rmaps.append(BigradedMap.identity(am))
    return MappingPathSpace(
        r,
        u,
        pbar,
        SpectralMorphism(a, pbar, imaps),
        SpectralMorphism(pbar, b, pmaps),
        SpectralMorphism(pbar, a, rmaps),
    )


def induced_on_mapping_path(
    x: MappingPathSpace, y: MappingPathSpace, top: SpectralMorphism, bottom: SpectralMorphism
) -> SpectralMorphism:
    """The map ``Pbar(u) -> Pbar(u')`` induced by a square ``u' ∘ top = bottom ∘ u``."""
    r = x.r
    if y.r != r:
        raise DimensionMismatch("mapping path spaces on different pages")
    maps = []
    for m in range(max(x.Pbar.M, y.Pbar.M) + 1):
        am, bm = top.map(m), bottom.map(m)
        if m <= r:
            src = _three(am.source, _mid(bm.source, r), bm.source)
            tgt = _three(am.target, _mid(bm.target, r), bm.target)
            maps.append(block_map(src, tgt, (0, 0), {(0, 0): am, (1, 1): _mid_map(bm, r), (2, 2): bm}))
        else:
            maps.append(am)
    return SpectralMorphism(x.Pbar, y.Pbar, maps)


# -- r-homotopies -----------------------------------------------------------------


@dataclass
class RHomotopy:
    """Operators ``hats[m]: A_m -> B_m`` of bidegree ``(r, r-1)`` for ``m = 0..r`` witnessing ``f ≃_r g``."""

    r: int
    hats: list[BigradedMap]
    f: SpectralMorphism
    g: SpectralMorphism

    def reversed(self) -> "RHomotopy":
        return RHomotopy(self.r, [h.scale(-1) for h in self.hats], self.g, self.f)

    def then(self, other: "RHomotopy") -> "RHomotopy":
        """``f ≃ g`` followed by ``g ≃ k`` gives ``f ≃ k``."""
        return RHomotopy(self.r, [a + b for a, b in zip(self.hats, other.hats)], self.f, other.g)

    def post(self, k: SpectralMorphism) -> "RHomotopy":
        """``k ∘ f ≃ k ∘ g``."""
        return RHomotopy(self.r, [k.map(m) @ h for m, h in enumerate(self.hats)], k @ self.f, k @ self.g)

    def pre(self, j: SpectralMorphism) -> "RHomotopy":
        """``f ∘ j ≃ g ∘ j``."""
        return RHomotopy(self.r, [h @ j.map(m) for m, h in enumerate(self.hats)], self.f @ j, self.g @ j)


def _hat_equations(r: int, m: int, h, dA: BigradedMap, dB: BigradedMap):
    if m < r:
        return h.left(dB).scale(_sign(m + r + 1)) - h.right(dA) if isinstance(h, LinearMap) else (
            (dB @ h).scale(_sign(m + r + 1)) - h @ dA
        )
    if isinstance(h, LinearMap):
        return -h.left(dB) - h.right(dA)
    return -(dB @ h) - h @ dA


def is_r_homotopy(h: RHomotopy) -> bool:
    r, f, g = h.r, h.f, h.g
    a, b = f.source, f.target
    if len(h.hats) != r + 1:
        return False
    for m, hm in enumerate(h.hats):
        if hm.source != a.module(m) or hm.target != b.module(m) or hm.bidegree != (r, r - 1):
            return False
        lhs = _hat_equations(r, m, hm, a.d(m), b.d(m))
        if (not lhs.is_zero()) if m < r else lhs != f.map(r) - g.map(r):
            return False
        if m < r and h.hats[m + 1] != b.cycle_map(m) @ hm @ a.lift(m):
            return False
    return True


def _hat_system(sys: LinearSystem, a: SpectralSequence, b: SpectralSequence, r: int) -> list[LinearMap]:
    h0 = sys.allocate(a.module(0), b.module(0), (r, r - 1))
    hats = [h0]
    for m in range(r):
        hats.append(hats[m].left(b.cycle_map(m)).right(a.lift(m)))
    for m in range(r):
        eq = _hat_equations(r, m, hats[m], a.d(m), b.d(m))
        if eq.coeffs:
            sys.equate(eq)
    return hats


def find_r_homotopy(f: SpectralMorphism, g: SpectralMorphism, r: int) -> Optional[RHomotopy]:
    """A witness of ``f ≃_r g`` relative to the stored homology bases, or None."""
    a, b = f.source, f.target
    sys = LinearSystem()
    hats = _hat_system(sys, a, b, r)
    sys.equate(_hat_equations(r, r, hats[r], a.d(r), b.d(r)), f.map(r) - g.map(r))
    x0, _ = sys.solve()
    if x0 is None:
        return None
    return RHomotopy(r, [h.evaluate(x0) for h in hats], f, g)


def homotopy_to_morphism(h: RHomotopy, target_path: Optional[PathObject] = None) -> SpectralMorphism:
    """The morphism ``A -> P(r;B)`` with components ``(f_m, hats[m], g_m)``."""
    r = h.r
    a, b = h.f.source, h.f.target
    pb = target_path or path(r, b)
    maps = []
    for m in range(max(a.M, pb.P.M) + 1):
        if m <= r:
            am, bm = a.module(m), b.module(m)
            hm = BigradedMap(am, _mid(bm, r), (0, 0), h.hats[m].blocks())
            maps.append(
                block_map([am], _three(bm, _mid(bm, r), bm), (0, 0), {(0, 0): h.f.map(m), (1, 0): hm, (2, 0): h.g.map(m)})
            )
        else:
            maps.append(h.f.map(m))
    return SpectralMorphism(a, pb.P, maps)


def homotopy_from_morphism(k: SpectralMorphism, pb: PathObject) -> RHomotopy:
    """Read off ``(∂^- k, middle components, ∂^+ k)`` from ``k: A -> P(r;B)``."""
    r, b, a = pb.r, pb.base, k.source
    hats = []
    for m in range(r + 1):
        bm = b.module(m)
        mods = _three(bm, _mid(bm, r), bm)
        mid = block_map(mods, [_mid(bm, r)], (0, 0), {(0, 1): BigradedMap.identity(_mid(bm, r))}) @ k.map(m)
        hats.append(BigradedMap(a.module(m), bm, (r, r - 1), mid.blocks()))
    return RHomotopy(r, hats, pb.minus @ k, pb.plus @ k)


def path_contraction(pb: PathObject) -> RHomotopy:
    """``(x, y, z) ↦ (0, 0, -y)``: a witness of ``1 ≃_r ι ∘ ∂^-`` on ``P(r;A)``."""
    r, a, P = pb.r, pb.base, pb.P
    hats = []
    for m in range(r + 1):
        am = a.module(m)
        mods = _three(am, _mid(am, r), am)
        mid = _mid(am, r)
        neg = BigradedMap.shift_identity(mid, am, (r, r - 1)).scale(-1)
        hats.append(block_map(mods, mods, (r, r - 1), {(2, 1): neg}))
    return RHomotopy(r, hats, SpectralMorphism.identity(P), pb.iota @ pb.minus)


def is_r_homotopy_equivalence(f: SpectralMorphism, r: int):
    """``(g, h1: f∘g ≃ 1_B, h2: g∘f ≃ 1_A)`` solved jointly, or None."""
    a, b = f.source, f.target
    sys = LinearSystem()
    g0 = sys.allocate(b.module(0), a.module(0), (0, 0))
    gs = [g0]
    for m in range(max(a.M, b.M)):
        gs.append(gs[m].left(a.cycle_map(m)).right(b.lift(m)))
    for m, gm in enumerate(gs):
        if a.d(m).is_zero() and b.d(m).is_zero():
            continue
        sys.equate(gm.left(a.d(m)) - gm.right(b.d(m)))
    h1 = _hat_system(sys, b, b, r)
    h2 = _hat_system(sys, a, a, r)
    gr = gs[min(r, len(gs) - 1)]
    # f∘g - 1 and g∘f - 1 on page r
    sys.equate(_hat_equations(r, r, h1[r], b.d(r), b.d(r)) - gr.left(f.map(r)), BigradedMap.identity(b.module(r)).scale(-1))
    sys.equate(_hat_equations(r, r, h2[r], a.d(r), a.d(r)) - gr.right(f.map(r)), BigradedMap.identity(a.module(r)).scale(-1))
    x0, _ = sys.solve()
    if x0 is None:
        return None
    g = derive_morphism(g0.evaluate(x0), b, a)
    w1 = RHomotopy(r, [h.evaluate(x0) for h in h1], f @ g, SpectralMorphism.identity(b))
    w2 = RHomotopy(r, [h.evaluate(x0) for h in h2], g @ f, SpectralMorphism.identity(a))
    return g, w1, w2
