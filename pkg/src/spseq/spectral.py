"""Spectral sequences as finite towers of pages with explicit characteristic maps.

A :class:`SpectralSequence` stores pages ``A_0 .. A_M`` and isomorphisms
``psi_m: H(A_m) -> A_{m+1}`` for ``m < M``.  Page ``M`` has zero differential;
every later page is page ``M`` again with identity ``psi``.

Morphisms are determined by page 0 and are stored on pages ``0 .. N`` with
``N = max(M_source, M_target)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .bigraded import (
    BigradedMap,
    BigradedModule,
    Bidegree,
    HomologyData,
    RComplex,
    Report,
    block_map,
    differential_bidegree,
    direct_sum,
    homology,
    is_chain_map,
    pullback_rcomplex,
    shift,
    validate_rcomplex,
)
from .errors import (
    DimensionMismatch,
    InternalInvariantViolation,
    InvalidObject,
    NotAMorphism,
    NotASurjection,
)
from .linalg import (
    complement_in,
    get_field,
    image_basis,
    left_inverse_rows,
    rank,
    solve,
)
from .linsys import LinearMap, LinearSystem

__all__ = [
    "SpectralSequence",
    "SpectralMorphism",
    "validate_spectral_sequence",
    "validate_morphism",
    "derive_morphism",
    "is_surjection",
    "is_Er_quasi_iso",
    "is_r_fibration",
    "is_acyclic_r_fibration",
    "product",
    "final_object",
    "pullback_surjection",
    "pagewise_cokernel",
    "factor_through",
    "ring",
    "fixture_S",
    "fixture_T",
    "fixture_f_S",
    "fixture_pi_T",
    "HomSpace",
    "hom_space",
    "solve_morphisms",
    "find_isomorphism",
    "are_isomorphic",
]


def factor_through(incl: BigradedMap, m: BigradedMap) -> BigradedMap:
    """The unique ``y`` with ``incl ∘ y == m`` for an injective ``incl``."""
    if incl.target != m.target:
        raise DimensionMismatch("factor_through: targets differ")
    bid = (m.bidegree[0] - incl.bidegree[0], m.bidegree[1] - incl.bidegree[1])
    blocks = {}
    for bd in m.source.support():
        mid = shift(bd, bid)
        if not incl.source.dim(mid):
            if np.any(m.block(bd) != 0):
                raise InternalInvariantViolation(f"map does not factor through the inclusion at {bd}")
            continue
        y = solve(incl.block(mid), m.block(bd))
        if y is None:
            raise InternalInvariantViolation(f"map does not factor through the inclusion at {bd}")
        blocks[bd] = y
    return BigradedMap(m.source, incl.source, bid, blocks, check=False)


def _zero_page(module: BigradedModule, m: int) -> RComplex:
    return RComplex.zero_differential(module, m)


class SpectralSequence:
    """Pages ``A_0..A_M`` plus characteristic isomorphisms ``psi_m``.

    Construction validates unless ``check=False``; invalid towers raise
    :class:`InvalidObject` carrying the validator's report.
    """

    def __init__(self, pages: Sequence[RComplex], psi: Sequence[BigradedMap], check: bool = True, name: str = ""):
        if not pages:
            raise ValueError("a spectral sequence needs at least one page")
        if len(psi) != len(pages) - 1:
            raise DimensionMismatch(f"{len(pages)} pages need {len(pages) - 1} characteristic maps, got {len(psi)}")
        self.pages: tuple[RComplex, ...] = tuple(pages)
        self.psis: tuple[BigradedMap, ...] = tuple(psi)
        self.name = name
        self._homology: dict[int, HomologyData] = {}
        self._cycle: dict[int, BigradedMap] = {}
        self._lift: dict[int, BigradedMap] = {}
        if check:
            rep = validate_spectral_sequence(self)
            if not rep:
                raise InvalidObject(rep)

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_cycle_maps(
        cls, pages: Sequence[RComplex], cycle_maps: Sequence[BigradedMap], check: bool = True, trim: bool = True, name: str = ""
    ) -> "SpectralSequence":
        """Build ``psi_m = c_m ∘ section_m`` from maps ``c_m: A_m -> A_{m+1}`` that kill boundaries."""
        psi = []
        for m, c in enumerate(cycle_maps):
            hd = homology(pages[m])
            if check and not (c @ pages[m].differential).is_zero():
                raise InternalInvariantViolation(f"cycle map on page {m} does not vanish on boundaries")
            psi.append(c @ hd.section)
        pages = list(pages)
        if trim:
            pages, psi = _trim(pages, psi)
        return cls(pages, psi, check=check, name=name)

    @classmethod
    def constant(cls, module: BigradedModule, name: str = "") -> "SpectralSequence":
        """All pages equal ``module`` with zero differential."""
        return cls([_zero_page(module, 0)], [], check=False, name=name)

    # -- access ---------------------------------------------------------------
    @property
    def M(self) -> int:
        return len(self.pages) - 1

    def page(self, m: int) -> RComplex:
        if m <= self.M:
            return self.pages[m]
        return _zero_page(self.pages[-1].module, m)

    def module(self, m: int) -> BigradedModule:
        return self.page(m).module

    def d(self, m: int) -> BigradedMap:
        return self.page(m).differential

    def homology(self, m: int) -> HomologyData:
        m = min(m, self.M)
        hd = self._homology.get(m)
        if hd is None:
            hd = homology(self.pages[m])
            self._homology[m] = hd
        return hd

    def psi(self, m: int) -> BigradedMap:
        if m < self.M:
            return self.psis[m]
        return BigradedMap.identity(self.pages[-1].module)

    def cycle_map(self, m: int) -> BigradedMap:
        """``psi_m ∘ projection_m``: sends a cycle of page m to its class on page m+1."""
        if m >= self.M:
            return BigradedMap.identity(self.pages[-1].module)
        c = self._cycle.get(m)
        if c is None:
            c = self.psis[m] @ self.homology(m).projection
            self._cycle[m] = c
        return c

    def lift(self, m: int) -> BigradedMap:
        """``section_m ∘ psi_m^{-1}``: a cycle of page m representing each basis vector of page m+1."""
        if m >= self.M:
            return BigradedMap.identity(self.pages[-1].module)
        lf = self._lift.get(m)
        if lf is None:
            lf = self.homology(m).section @ self.psis[m].inverse()
            self._lift[m] = lf
        return lf

    def support(self) -> list[Bidegree]:
        out: set[Bidegree] = set()
        for c in self.pages:
            out.update(c.module.support())
        return sorted(out)

    def is_zero(self) -> bool:
        return self.pages[0].module.is_zero()

    def dims_table(self, m: int) -> dict[Bidegree, int]:
        return self.module(m).as_dict()

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<SpectralSequence{label} M={self.M} page0={self.pages[0].module!r}>"


def _trim(pages: list[RComplex], psi: list[BigradedMap]) -> tuple[list[RComplex], list[BigradedMap]]:
    while len(pages) >= 2:
        prev, last = pages[-2], pages[-1]
        if not prev.differential.is_zero() or last.module != prev.module:
            break
        if psi[-1] != BigradedMap.identity(prev.module):
            break
        if not last.differential.is_zero():
            break
        pages.pop()
        psi.pop()
    return pages, psi


def validate_spectral_sequence(s: SpectralSequence) -> Report:
    """First violated invariant, scanning pages in order; ``ok`` otherwise."""
    for m, c in enumerate(s.pages):
        if c.r != m:
            return Report.failed(f"page {m} carries r={c.r}", page=m, invariant="page index")
        rep = validate_rcomplex(c, page=m)
        if not rep:
            return rep
    for m in range(s.M):
        hd = s.homology(m)
        nxt = s.pages[m + 1].module
        for bd in sorted(set(hd.H.support()) | set(nxt.support())):
            if hd.H.dim(bd) != nxt.dim(bd):
                return Report.failed(
                    f"dim H(A_{m}){bd} = {hd.H.dim(bd)} but dim A_{m + 1}{bd} = {nxt.dim(bd)}",
                    page=m,
                    bidegree=bd,
                    invariant="dim H(A_m) = dim A_{m+1}",
                )
        psi = s.psis[m]
        if psi.source != hd.H or psi.target != nxt or psi.bidegree != (0, 0):
            return Report.failed("characteristic map has the wrong source, target or bidegree", page=m, invariant="psi")
        for bd, k in hd.H.items():
            if rank(psi.block(bd)) != k:
                return Report.failed("characteristic map is not invertible", page=m, bidegree=bd, invariant="psi invertible")
    last = s.pages[-1]
    if not last.differential.is_zero():
        bd = next(iter(last.differential.blocks()))
        return Report.failed(
            "last stored page has a nonzero differential", page=s.M, bidegree=bd, invariant="stabilization"
        )
    return Report.passed()


# -- morphisms ---------------------------------------------------------------


class SpectralMorphism:
    """Pagewise maps ``f_m: A_m -> B_m`` for ``m = 0..N``; later pages repeat ``f_N``."""

    def __init__(self, source: SpectralSequence, target: SpectralSequence, maps: Sequence[BigradedMap], check: bool = True):
        self.source = source
        self.target = target
        n = max(source.M, target.M)
        maps = list(maps)
        if len(maps) < n + 1:
            raise DimensionMismatch(f"morphism needs {n + 1} page maps, got {len(maps)}")
        self.maps: tuple[BigradedMap, ...] = tuple(maps[: n + 1])
        if check:
            rep = validate_morphism(self)
            if not rep:
                raise NotAMorphism(rep.page if rep.page is not None else 0, rep.message)

    @property
    def N(self) -> int:
        return len(self.maps) - 1

    @property
    def f0(self) -> BigradedMap:
        return self.maps[0]

    def map(self, m: int) -> BigradedMap:
        return self.maps[min(m, self.N)]

    # -- algebra -------------------------------------------------------------
    @classmethod
    def identity(cls, a: SpectralSequence) -> "SpectralMorphism":
        return cls(a, a, [BigradedMap.identity(a.module(m)) for m in range(a.M + 1)], check=False)

    @classmethod
    def zero(cls, a: SpectralSequence, b: SpectralSequence) -> "SpectralMorphism":
        n = max(a.M, b.M)
        return cls(a, b, [BigradedMap.zero(a.module(m), b.module(m)) for m in range(n + 1)], check=False)

    def compose(self, other: "SpectralMorphism") -> "SpectralMorphism":
        """``self ∘ other``."""
        if other.target is not self.source and not _same_sequence(other.target, self.source):
            raise DimensionMismatch("morphisms are not composable")
        n = max(other.source.M, self.target.M)
        return SpectralMorphism(
            other.source, self.target, [self.map(m) @ other.map(m) for m in range(n + 1)], check=False
        )

    __matmul__ = compose

    def _combine(self, other: "SpectralMorphism", sign: int) -> "SpectralMorphism":
        if not (_same_sequence(self.source, other.source) and _same_sequence(self.target, other.target)):
            raise DimensionMismatch("morphisms are not parallel")
        maps = [self.map(m) + other.map(m) if sign > 0 else self.map(m) - other.map(m) for m in range(self.N + 1)]
        return SpectralMorphism(self.source, self.target, maps, check=False)

    def __add__(self, other: "SpectralMorphism") -> "SpectralMorphism":
        return self._combine(other, 1)

    def __sub__(self, other: "SpectralMorphism") -> "SpectralMorphism":
        return self._combine(other, -1)

    def __neg__(self) -> "SpectralMorphism":
        return self.scale(-1)

    def scale(self, c) -> "SpectralMorphism":
        return SpectralMorphism(self.source, self.target, [f.scale(c) for f in self.maps], check=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectralMorphism):
            return NotImplemented
        return (
            _same_sequence(self.source, other.source)
            and _same_sequence(self.target, other.target)
            and self.f0 == other.f0
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"<SpectralMorphism N={self.N} {self.source!r} -> {self.target!r}>"


def _same_sequence(a: SpectralSequence, b: SpectralSequence) -> bool:
    if a is b:
        return True
    if a.M != b.M:
        return False
    for m in range(a.M + 1):
        if a.module(m) != b.module(m) or a.d(m) != b.d(m):
            return False
    return all(a.psi(m) == b.psi(m) for m in range(a.M))


def validate_morphism(f: SpectralMorphism) -> Report:
    a, b = f.source, f.target
    for m in range(f.N + 1):
        fm = f.maps[m]
        if fm.source != a.module(m) or fm.target != b.module(m) or fm.bidegree != (0, 0):
            return Report.failed("page map has the wrong source, target or bidegree", page=m, invariant="shape")
        if not is_chain_map(fm, a.page(m), b.page(m)):
            bad = (b.d(m) @ fm - fm @ a.d(m)).blocks()
            return Report.failed(
                "page map does not commute with the differentials", page=m, bidegree=next(iter(bad), None), invariant="chain map"
            )
    for m in range(f.N):
        lhs = f.maps[m + 1] @ a.psi(m)
        rhs = b.cycle_map(m) @ f.maps[m] @ a.homology(m).section
        if lhs != rhs:
            bad = (lhs - rhs).blocks()
            return Report.failed(
                "page map is incompatible with the characteristic maps",
                page=m + 1,
                bidegree=next(iter(bad), None),
                invariant="psi compatibility",
            )
    return Report.passed()


def derive_morphism(f0: BigradedMap, a: SpectralSequence, b: SpectralSequence) -> SpectralMorphism:
    """Extend a page-0 chain map to all pages via ``f_{m+1} = psi^B_m H(f_m) (psi^A_m)^{-1}``."""
    if f0.source != a.module(0) or f0.target != b.module(0) or f0.bidegree != (0, 0):
        raise DimensionMismatch("page-0 map has the wrong source, target or bidegree")
    n = max(a.M, b.M)
    maps = [f0]
    for m in range(n + 1):
        fm = maps[m]
        if not is_chain_map(fm, a.page(m), b.page(m)):
            raise NotAMorphism(m, "derived map does not commute with the differentials")
        if m < n:
            maps.append(b.cycle_map(m) @ fm @ a.lift(m))
    return SpectralMorphism(a, b, maps, check=False)


# -- predicates ----------------------------------------------------------------


def is_surjection(f: SpectralMorphism) -> bool:
    return all(fm.is_surjective() for fm in f.maps)


def is_Er_quasi_iso(f: SpectralMorphism, r: int) -> bool:
    """``H(f_r)`` invertible, equivalently ``f_k`` invertible for every ``k > r``."""
    verdict = f.map(r + 1).is_iso()
    tail = all(f.map(k).is_iso() for k in range(r + 1, max(f.N, r + 1) + 1))
    if verdict != tail:
        raise InternalInvariantViolation("H(f_r) invertibility disagrees with invertibility of later pages")
    return verdict


def is_r_fibration(f: SpectralMorphism, r: int) -> bool:
    return all(f.map(k).is_surjective() for k in range(r + 1))


def is_acyclic_r_fibration(f: SpectralMorphism, r: int) -> bool:
    return is_r_fibration(f, r) and is_Er_quasi_iso(f, r)


# -- products, pullbacks, cokernels ---------------------------------------------


def _sum_pages(parts: Sequence[RComplex], m: int) -> RComplex:
    mods = [c.module for c in parts]
    d = block_map(mods, mods, differential_bidegree(m), {(i, i): c.differential for i, c in enumerate(parts)})
    return RComplex(direct_sum(*mods), m, d)


def product(*seqs: SpectralSequence) -> tuple[SpectralSequence, list[SpectralMorphism]]:
    """Pagewise direct sum with its projections."""
    if not seqs:
        return final_object(), []
    n = max(s.M for s in seqs)
    pages = [_sum_pages([s.page(m) for s in seqs], m) for m in range(n + 1)]
    cyc = []
    for m in range(n):
        mods = [s.module(m) for s in seqs]
        nxt = [s.module(m + 1) for s in seqs]
        cyc.append(block_map(mods, nxt, (0, 0), {(i, i): s.cycle_map(m) for i, s in enumerate(seqs)}))
    prod = SpectralSequence.from_cycle_maps(pages, cyc)
    projs = []
    for i, s in enumerate(seqs):
        maps = []
        for m in range(max(prod.M, s.M) + 1):
            mods = [t.module(m) for t in seqs]
            maps.append(block_map(mods, [s.module(m)], (0, 0), {(0, i): BigradedMap.identity(s.module(m))}))
        projs.append(SpectralMorphism(prod, s, maps, check=False))
    return prod, projs


def inclusions(prod: SpectralSequence, seqs: Sequence[SpectralSequence]) -> list[SpectralMorphism]:
    out = []
    for i, s in enumerate(seqs):
        maps = []
        for m in range(max(prod.M, s.M) + 1):
            mods = [t.module(m) for t in seqs]
            maps.append(block_map([s.module(m)], mods, (0, 0), {(i, 0): BigradedMap.identity(s.module(m))}))
        out.append(SpectralMorphism(s, prod, maps, check=False))
    return out


def final_object() -> SpectralSequence:
    return SpectralSequence.constant(BigradedModule(), name="0")


def pullback_surjection(
    g: SpectralMorphism, p: SpectralMorphism
) -> tuple[SpectralSequence, SpectralMorphism, SpectralMorphism]:
    """Pagewise pullback of a surjection ``p: A -> B`` along ``g: U -> B``."""
    if not _same_sequence(g.target, p.target):
        raise DimensionMismatch("pullback: the two maps have different targets")
    if not is_surjection(p):
        bad = next(m for m, fm in enumerate(p.maps) if not fm.is_surjective())
        raise NotASurjection(f"the map being pulled back is not surjective on page {bad}")
    u, a, b = g.source, p.source, g.target
    n = max(u.M, a.M, b.M)
    data = [pullback_rcomplex(u.page(m), a.page(m), b.page(m), g.map(m), p.map(m)) for m in range(n + 1)]
    pages = [x for x, _, _, _ in data]
    psi = []
    for m in range(n):
        sec = homology(pages[m]).section
        mods = [u.module(m), a.module(m)]
        nxt = [u.module(m + 1), a.module(m + 1)]
        cyc = block_map(mods, nxt, (0, 0), {(0, 0): u.cycle_map(m), (1, 1): a.cycle_map(m)})
        psi.append(factor_through(data[m + 1][3], cyc @ data[m][3] @ sec))
    x = SpectralSequence(pages, psi)
    pu = SpectralMorphism(x, u, [d[1] for d in data])
    pa = SpectralMorphism(x, a, [d[2] for d in data])
    if not is_surjection(pu):
        raise InternalInvariantViolation("projection of a pullback of a surjection is not surjective")
    return x, pu, pa


def pagewise_cokernel(f: SpectralMorphism) -> SpectralSequence:
    """The tower ``B_m / im f_m`` with the maps induced by ``psi^B``, left unvalidated.

    This is generally not a spectral sequence; validate it to see where it fails.
    """
    F = get_field()
    b = f.target
    n = max(f.source.M, b.M)
    quot, pages = [], []
    for m in range(n + 1):
        fm = f.map(m)
        dims, sec, proj = {}, {}, {}
        for bd, k in b.module(m).items():
            im = image_basis(fm.block(bd)) if f.source.module(m).dim(bd) else F.zeros(k, 0)
            comp = complement_in(im, k)
            if comp.shape[1]:
                dims[bd] = comp.shape[1]
                sec[bd] = comp
                rows = left_inverse_rows(np.concatenate([im, comp], axis=1), k)
                proj[bd] = rows[im.shape[1] :]
        c = BigradedModule(dims)
        s = BigradedMap(c, b.module(m), (0, 0), sec, check=False)
        q = BigradedMap(b.module(m), c, (0, 0), proj, check=False)
        quot.append((s, q))
        pages.append(RComplex(c, m, q @ b.d(m) @ s))
    psi = []
    for m in range(n):
        h = homology(pages[m])
        s, _ = quot[m]
        _, q1 = quot[m + 1]
        raw = q1 @ b.cycle_map(m) @ s @ h.section
        blocks = {bd: raw.block(bd) for bd in h.H.support()}
        psi.append(BigradedMap(h.H, pages[m + 1].module, (0, 0), blocks, check=False))
    return SpectralSequence(pages, psi, check=False, name="pagewise cokernel")


# -- fixtures -------------------------------------------------------------------


def ring(p: int, n: int) -> SpectralSequence:
    """``R(p, n)``: one copy of the field at ``(p, n)``, zero differentials."""
    return SpectralSequence.constant(BigradedModule({(p, n): 1}), name=f"R({p},{n})")


def fixture_S() -> SpectralSequence:
    """Pages 0 and 1 are ``R^{0,0} (+) R^{1,0}``; ``d_1`` is the identity ``(1,0) -> (0,0)``."""
    F = get_field()
    mod = BigradedModule({(0, 0): 1, (1, 0): 1})
    s0 = RComplex.zero_differential(mod, 0)
    s1 = RComplex(mod, 1, BigradedMap(mod, mod, (-1, 0), {(1, 0): F.eye(1)}))
    s2 = RComplex.zero_differential(BigradedModule(), 2)
    psi0 = BigradedMap.identity(mod)
    psi1 = BigradedMap.zero(BigradedModule(), BigradedModule())
    return SpectralSequence([s0, s1, s2], [psi0, psi1], name="S")


def fixture_T() -> SpectralSequence:
    """Page 0 is ``R^{0,0} -> R^{0,1}`` (identity); every later page is zero."""
    F = get_field()
    mod = BigradedModule({(0, 0): 1, (0, 1): 1})
    t0 = RComplex(mod, 0, BigradedMap(mod, mod, (0, 1), {(0, 0): F.eye(1)}))
    t1 = RComplex.zero_differential(BigradedModule(), 1)
    return SpectralSequence([t0, t1], [BigradedMap.zero(BigradedModule(), BigradedModule())], name="T")


def fixture_f_S() -> SpectralMorphism:
    """``R(0,0) -> S``, the identity onto the ``(0,0)`` summand on pages 0 and 1."""
    F = get_field()
    a, s = ring(0, 0), fixture_S()
    return derive_morphism(BigradedMap(a.module(0), s.module(0), (0, 0), {(0, 0): F.eye(1)}), a, s)


def fixture_pi_T() -> SpectralMorphism:
    """``T -> R(0,0)``, the identity at ``(0,0)`` on page 0 and zero afterwards."""
    F = get_field()
    t, a = fixture_T(), ring(0, 0)
    return derive_morphism(BigradedMap(t.module(0), a.module(0), (0, 0), {(0, 0): F.eye(1)}), t, a)


# -- hom spaces -------------------------------------------------------------------


def _propagate(a: SpectralSequence, b: SpectralSequence, f0: LinearMap) -> list[LinearMap]:
    n = max(a.M, b.M)
    out = [f0]
    for m in range(n):
        out.append(out[m].left(b.cycle_map(m)).right(a.lift(m)))
    return out


def _chain_equations(sys: LinearSystem, a: SpectralSequence, b: SpectralSequence, pages: Sequence[LinearMap]) -> None:
    for m, fm in enumerate(pages):
        if a.d(m).is_zero() and b.d(m).is_zero():
            continue
        sys.equate(fm.left(b.d(m)) - fm.right(a.d(m)))


@dataclass
class HomSpace:
    """Affine space ``{f : A -> B}`` cut out by linear constraints on ``f_0``.

    ``particular`` is None when the constraints are inconsistent.
    """

    source: SpectralSequence
    target: SpectralSequence
    f0: LinearMap
    particular: Optional[np.ndarray]
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return -1 if self.particular is None else self.basis.shape[1]

    @property
    def empty(self) -> bool:
        return self.particular is None

    def point(self, coeffs: np.ndarray) -> SpectralMorphism:
        F = get_field()
        x = self.particular
        if self.basis.shape[1]:
            c = F.array(np.asarray(coeffs).reshape(-1, 1))
            x = F.reduce(x + F.matmul(self.basis, c).reshape(-1))
        return derive_morphism(self.f0.evaluate(x), self.source, self.target)

    def random(self, rng: np.random.Generator) -> SpectralMorphism:
        return self.point(get_field().random(rng, (self.basis.shape[1],)))

    def morphisms(self) -> list[SpectralMorphism]:
        """Basis of the linear part (meaningful for homogeneous constraints)."""
        out = []
        for j in range(self.basis.shape[1]):
            out.append(derive_morphism(self.f0.evaluate(self.basis[:, j]), self.source, self.target))
        return out


def solve_morphisms(
    a: SpectralSequence,
    b: SpectralSequence,
    post: Iterable[tuple[SpectralMorphism, SpectralMorphism]] = (),
    pre: Iterable[tuple[SpectralMorphism, SpectralMorphism]] = (),
) -> HomSpace:
    """Morphisms ``f: A -> B`` with ``q ∘ f = t`` for ``(q, t)`` in ``post`` and ``f ∘ q = t`` for ``pre``."""
    sys = LinearSystem()
    f0 = sys.allocate(a.module(0), b.module(0), (0, 0))
    _chain_equations(sys, a, b, _propagate(a, b, f0))
    for q, t in post:
        sys.equate(f0.left(q.f0), t.f0)
    for q, t in pre:
        sys.equate(f0.right(q.f0), t.f0)
    x0, ker = sys.solve()
    return HomSpace(a, b, f0, x0, ker)


def hom_space(a: SpectralSequence, b: SpectralSequence) -> HomSpace:
    return solve_morphisms(a, b)


def find_isomorphism(
    a: SpectralSequence,
    b: SpectralSequence,
    post: Iterable[tuple[SpectralMorphism, SpectralMorphism]] = (),
    pre: Iterable[tuple[SpectralMorphism, SpectralMorphism]] = (),
    rng: Optional[np.random.Generator] = None,
    attempts: int = 64,
) -> Optional[SpectralMorphism]:
    """An isomorphism ``A -> B`` satisfying the constraints, found by sampling the solution space.

    A morphism is invertible iff ``f_0`` is, so sampling tests page 0 only.
    None means no sample was invertible, which is conclusive only when the
    page-0 dimensions differ or the constraints are inconsistent.
    """
    if a.module(0) != b.module(0):
        return None
    space = solve_morphisms(a, b, post, pre)
    if space.empty:
        return None
    rng = rng if rng is not None else np.random.default_rng(0)
    for i in range(attempts):
        coeffs = get_field().random(rng, (space.basis.shape[1],)) if i else np.zeros(space.basis.shape[1], dtype=int)
        f = space.point(coeffs)
        if f.f0.is_iso():
            return f
    return None


def are_isomorphic(a: SpectralSequence, b: SpectralSequence, **kw) -> bool:
    return find_isomorphism(a, b, **kw) is not None
