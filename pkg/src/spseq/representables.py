"""Disks, spheres, compatible sequences and lifting-property checks.

A morphism out of ``D_r(p,n)`` is fixed by its page-0 values on the two
generators, so disk spaces are computed on one pair of bidegrees at a time.
Lifting problems against the generating maps become rank comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .bigraded import BigradedMap, BigradedModule, Bidegree, RComplex, differential_bidegree
from .errors import UnsupportedGenerator
from .linalg import get_field, kernel_basis, rank
from .spectral import SpectralMorphism, SpectralSequence, derive_morphism, product

__all__ = [
    "disk",
    "sphere",
    "varphi",
    "DiskSpace",
    "disk_space",
    "hom_from_disk",
    "disk_coordinates",
    "Generator",
    "J",
    "I",
    "has_rlp",
    "generators_J",
    "generators_I",
    "rfib_via_rlp",
    "acyclic_rfib_via_rlp",
]


def _bottom(r: int, p: int, n: int) -> Bidegree:
    return (p - r, n + 1 - r)


def disk(r: int, p: int, n: int) -> SpectralSequence:
    """``R^{p,n} (+) R^{p-r,n+1-r}``: zero differential below page r, identity on page r, zero after."""
    if r < 0:
        raise ValueError("r must be non-negative")
    F = get_field()
    top, bot = (p, n), _bottom(r, p, n)
    mod = BigradedModule({top: 1, bot: 1})
    pages, psi = [], []
    for m in range(r + 1):
        if m < r:
            pages.append(RComplex.zero_differential(mod, m))
            psi.append(BigradedMap.identity(mod))
        else:
            pages.append(RComplex(mod, r, BigradedMap(mod, mod, differential_bidegree(r), {top: F.eye(1)})))
            psi.append(BigradedMap.zero(BigradedModule(), BigradedModule()))
    pages.append(RComplex.zero_differential(BigradedModule(), r + 1))
    return SpectralSequence(pages, psi, name=f"D_{r}({p},{n})")


def _sphere_parts(r: int, p: int, n: int) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    return (r - 1, p - 1, n - 1), (r - 1, p + r - 1, n + r - 2)


def sphere(r: int, p: int, n: int) -> SpectralSequence:
    """``D_{r-1}(p-1, n-1) (+) D_{r-1}(p+r-1, n+r-2)``."""
    if r < 1:
        raise ValueError("spheres need r >= 1")
    first, second = _sphere_parts(r, p, n)
    s, _ = product(disk(*first), disk(*second))
    s.name = f"S_{r}({p},{n})"
    return s


def _sphere_generators(r: int, p: int, n: int) -> list[tuple[Bidegree, int]]:
    """``(bidegree, summand)`` for the generators ``t1, b1, t2, b2`` of ``S_r(p,n)``."""
    (k, p1, n1), (_, p2, n2) = _sphere_parts(r, p, n)
    return [((p1, n1), 0), (_bottom(k, p1, n1), 0), ((p2, n2), 1), (_bottom(k, p2, n2), 1)]


def _generator_offset(s: SpectralSequence, r: int, p: int, n: int, gen: int) -> int:
    """Row of generator ``gen`` of ``S_r(p,n)`` inside its page-0 block."""
    bd, summand = _sphere_generators(r, p, n)[gen]
    if summand == 0:
        return 0
    (k, p1, n1), _ = _sphere_parts(r, p, n)
    first = {(p1, n1), _bottom(k, p1, n1)}
    return 1 if bd in first else 0


def varphi(r: int, p: int, n: int) -> SpectralMorphism:
    """``D_r(p,n) -> S_r(p,n)``, the identity wherever both sides have a generator."""
    F = get_field()
    d, s = disk(r, p, n), sphere(r, p, n)
    blocks = {}
    for src, gen in (((p, n), 3), (_bottom(r, p, n), 1)):
        blk = F.zeros(s.module(0).dim(src), 1)
        blk[_generator_offset(s, r, p, n, gen), 0] = F.one
        blocks[src] = blk
    return derive_morphism(BigradedMap(d.module(0), s.module(0), (0, 0), blocks), d, s)


# -- disk spaces ----------------------------------------------------------------


def _transport(a: SpectralSequence, bd: Bidegree, upto: int) -> list[np.ndarray]:
    """Blocks at ``bd`` of ``c_{i-1} ∘ ... ∘ c_0`` for ``i = 0..upto``."""
    F = get_field()
    out = [F.eye(a.module(0).dim(bd))]
    for i in range(upto):
        c = a.cycle_map(i).block(bd)
        out.append(F.matmul(c, out[-1]))
    return out


@dataclass
class DiskSpace:
    """``D_r^{p,n}(A)`` as the column span of ``basis``.

    Rows are the stacked coordinates ``(a_0, .., a_r; b_0, .., b_r)``;
    ``initial`` holds only ``(a_0; b_0)``, which determine the rest.
    """

    r: int
    p: int
    n: int
    target: SpectralSequence
    basis: np.ndarray
    initial: np.ndarray
    top_dims: list[int]
    bottom_dims: list[int]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def sequences(self, j: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
        col = self.basis[:, j]
        a, b, pos = [], [], 0
        for k in self.top_dims:
            a.append(col[pos : pos + k])
            pos += k
        for k in self.bottom_dims:
            b.append(col[pos : pos + k])
            pos += k
        return a, b


def disk_space(r: int, p: int, n: int, a: SpectralSequence) -> DiskSpace:
    F = get_field()
    top, bot = (p, n), _bottom(r, p, n)
    ta, tb = _transport(a, top, r), _transport(a, bot, r)
    ka, kb = a.module(0).dim(top), a.module(0).dim(bot)
    rows = []
    for i in range(r):
        for bd, tr, left in ((top, ta, True), (bot, tb, False)):
            d = a.d(i).block(bd)
            if d.shape[0]:
                eq = F.matmul(d, tr[i])
                z = F.zeros(d.shape[0], kb if left else ka)
                rows.append(np.concatenate([eq, z] if left else [z, eq], axis=1))
    dr = a.d(r).block(top)
    neg = F.reduce(-tb[r]) if F.p else -tb[r]
    rows.append(np.concatenate([F.matmul(dr, ta[r]), neg], axis=1))
    system = np.concatenate(rows, axis=0) if rows else F.zeros(0, ka + kb)
    init = kernel_basis(system) if ka + kb else F.zeros(0, 0)
    blocks = [F.matmul(t, init[:ka]) for t in ta] + [F.matmul(t, init[ka:]) for t in tb]
    basis = np.concatenate(blocks, axis=0) if blocks else F.zeros(0, init.shape[1])
    return DiskSpace(r, p, n, a, basis, init, [t.shape[0] for t in ta], [t.shape[0] for t in tb])


def _morphism_from_initial(r: int, p: int, n: int, a: SpectralSequence, vec: np.ndarray) -> SpectralMorphism:
    D = disk(r, p, n)
    top, bot = (p, n), _bottom(r, p, n)
    ka = a.module(0).dim(top)
    blocks = {}
    if ka:
        blocks[top] = vec[:ka].reshape(-1, 1)
    if a.module(0).dim(bot):
        blocks[bot] = vec[ka:].reshape(-1, 1)
    return derive_morphism(BigradedMap(D.module(0), a.module(0), (0, 0), blocks), D, a)


def hom_from_disk(r: int, p: int, n: int, a: SpectralSequence, space: Optional[DiskSpace] = None) -> list[SpectralMorphism]:
    """One morphism ``D_r(p,n) -> A`` per basis vector of the disk space."""
    space = space or disk_space(r, p, n, a)
    return [_morphism_from_initial(r, p, n, a, space.initial[:, j]) for j in range(space.dim)]


def disk_coordinates(f: SpectralMorphism, r: int, p: int, n: int) -> np.ndarray:
    """The stacked sequences ``(f_i(top); f_i(bottom))`` of a morphism out of ``D_r(p,n)``."""
    F = get_field()
    top, bot = (p, n), _bottom(r, p, n)
    a = [f.map(i).block(top)[:, 0] if f.source.module(i).dim(top) else F.zeros(f.target.module(i).dim(top), 1)[:, 0] for i in range(r + 1)]
    b = [f.map(i).block(bot)[:, 0] if f.source.module(i).dim(bot) else F.zeros(f.target.module(i).dim(bot), 1)[:, 0] for i in range(r + 1)]
    return np.concatenate(a + b)


# -- lifting properties -----------------------------------------------------------


@dataclass(frozen=True)
class Generator:
    """``J``: ``0 -> D_k(p,n)``; ``I``: ``varphi_{k+1}: D_{k+1}(p,n) -> S_{k+1}(p,n)``."""

    kind: str
    k: int
    p: int
    n: int

    def __post_init__(self):
        if self.kind not in ("J", "I") or self.k < 0:
            raise UnsupportedGenerator(f"unsupported generating map {self.kind}_{self.k}({self.p},{self.n})")

    def __str__(self) -> str:
        return f"{self.kind}_{self.k}({self.p},{self.n})"


def J(k: int, p: int, n: int) -> Generator:
    return Generator("J", k, p, n)


def I(k: int, p: int, n: int) -> Generator:
    return Generator("I", k, p, n)


def _apply_f0(f: SpectralMorphism, bd: Bidegree, vecs: np.ndarray) -> np.ndarray:
    F = get_field()
    rows = f.target.module(0).dim(bd)
    if not f.source.module(0).dim(bd):
        return F.zeros(rows, vecs.shape[1])
    return F.matmul(f.f0.block(bd), vecs)


def _rlp_J(f: SpectralMorphism, k: int, p: int, n: int) -> bool:
    src = disk_space(k, p, n, f.source)
    tgt = disk_space(k, p, n, f.target)
    if tgt.dim == 0:
        return True
    top, bot = (p, n), _bottom(k, p, n)
    ka = f.source.module(0).dim(top)
    img = np.concatenate([_apply_f0(f, top, src.initial[:ka]), _apply_f0(f, bot, src.initial[ka:])], axis=0)
    return rank(img) == tgt.dim


def _rlp_I(f: SpectralMorphism, k: int, p: int, n: int) -> bool:
    """Right lifting against ``varphi_{k+1}: D_{k+1}(p,n) -> S_{k+1}(p,n)``.

    Squares are pairs ``(x, y)`` with ``f x = y varphi``; the lifting map
    ``l ↦ (l varphi, f l)`` must hit all of them.
    """
    F = get_field()
    a, b = f.source, f.target
    r = k + 1
    (t1, _), (b1, _), (t2, _), (b2, _) = _sphere_generators(r, p, n)
    dt, db = (p, n), _bottom(r, p, n)

    x = disk_space(r, p, n, a)
    ya = disk_space(k, *t1, b), disk_space(k, *t2, b)
    la = disk_space(k, *t1, a), disk_space(k, *t2, a)

    def parts(space: DiskSpace, top: Bidegree, bot: Bidegree, mod: BigradedModule):
        kt = mod.dim(top)
        return space.initial[:kt], space.initial[kt:]

    x_t, x_b = parts(x, dt, db, a.module(0))
    y1_t, y1_b = parts(ya[0], t1, b1, b.module(0))
    y2_t, y2_b = parts(ya[1], t2, b2, b.module(0))
    nx, ny1, ny2 = x.dim, ya[0].dim, ya[1].dim
    if nx + ny1 + ny2 == 0:
        return True

    def block_diag(*mats):
        rows = sum(m.shape[0] for m in mats)
        cols = sum(m.shape[1] for m in mats)
        out = F.zeros(rows, cols)
        i = j = 0
        for m in mats:
            out[i : i + m.shape[0], j : j + m.shape[1]] = m
            i += m.shape[0]
            j += m.shape[1]
        return out

    # (x, y1, y2) ↦ (f x_t - y2_b, f x_b - y1_b), in B_0 at dt = b2 and db = b1
    eq_t = np.concatenate([_apply_f0(f, dt, x_t), F.zeros(b.module(0).dim(dt), ny1), F.reduce(-y2_b) if F.p else -y2_b], axis=1)
    eq_b = np.concatenate([_apply_f0(f, db, x_b), F.reduce(-y1_b) if F.p else -y1_b, F.zeros(b.module(0).dim(db), ny2)], axis=1)
    squares = nx + ny1 + ny2 - rank(np.concatenate([eq_t, eq_b], axis=0))
    if squares == 0:
        return True

    l1_t, l1_b = parts(la[0], t1, b1, a.module(0))
    l2_t, l2_b = parts(la[1], t2, b2, a.module(0))
    # lifts in the raw coordinates (x_t, x_b | y1, y2): l varphi sends t to b2 and b to b1
    img_x_t = np.concatenate([F.zeros(l2_b.shape[0], la[0].dim), l2_b], axis=1)
    img_x_b = np.concatenate([l1_b, F.zeros(l1_b.shape[0], la[1].dim)], axis=1)
    img_y = block_diag(
        np.concatenate([_apply_f0(f, t1, l1_t), _apply_f0(f, b1, l1_b)], axis=0),
        np.concatenate([_apply_f0(f, t2, l2_t), _apply_f0(f, b2, l2_b)], axis=0),
    )
    lifts = np.concatenate([img_x_t, img_x_b, img_y], axis=0)
    return rank(lifts) == squares


def has_rlp(f: SpectralMorphism, gen: Generator) -> bool:
    if not isinstance(gen, Generator):
        raise UnsupportedGenerator(f"not a generating map: {gen!r}")
    if gen.kind == "J":
        return _rlp_J(f, gen.k, gen.p, gen.n)
    return _rlp_I(f, gen.k, gen.p, gen.n)


def _supp0(s: SpectralSequence) -> list[Bidegree]:
    return s.module(0).support()


def generators_J(f: SpectralMorphism, k: int) -> Iterator[Generator]:
    """``J_k`` generators whose lifting problems against ``f`` are not vacuous."""
    seen = set()
    for p, n in _supp0(f.target):
        for cand in ((p, n), (p + k, n + k - 1)):
            if cand not in seen:
                seen.add(cand)
                yield J(k, *cand)


def generators_I(f: SpectralMorphism, k: int) -> Iterator[Generator]:
    """``I_k`` generators whose lifting problems against ``f`` are not vacuous."""
    r = k + 1
    cands = set()
    for p, n in _supp0(f.source):
        cands.update({(p, n), (p + r, n + r - 1)})
    for p, n in _supp0(f.target):
        cands.update({(p + 1, n + 1), (p + r, n + r - 1), (p - r + 1, n - r + 2), (p, n)})
    for p, n in sorted(cands):
        yield I(k, p, n)


def _all(f: SpectralMorphism, gens: Iterable[Generator]) -> bool:
    return all(has_rlp(f, g) for g in gens)


def rfib_via_rlp(f: SpectralMorphism, r: int) -> bool:
    """Right lifting against ``J'_r = J_0 ∪ .. ∪ J_r``."""
    return all(_all(f, generators_J(f, k)) for k in range(r + 1))


def acyclic_rfib_via_rlp(f: SpectralMorphism, r: int) -> bool:
    """Right lifting against ``I'_r = J_0 ∪ .. ∪ J_{r-1} ∪ I_r``."""
    return all(_all(f, generators_J(f, k)) for k in range(r)) and _all(f, generators_I(f, r))
