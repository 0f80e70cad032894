"""Bigraded modules, bigraded maps, r-bigraded complexes and their homology."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NonChainMap
from .linalg import (
    extend_basis,
    get_field,
    image_basis,
    kernel_basis,
    left_inverse_rows,
    rank,
)

Bidegree = tuple[int, int]


def shift(bd: Bidegree, by: Bidegree) -> Bidegree:
    return (bd[0] + by[0], bd[1] + by[1])


def differential_bidegree(r: int) -> Bidegree:
    return (-r, 1 - r)


class BigradedModule:
    """Finite-support assignment of dimensions to bidegrees."""

    __slots__ = ("_dims", "_hash")

    def __init__(self, dims: Mapping[Bidegree, int] | None = None):
        clean = {}
        for bd, k in (dims or {}).items():
            k = int(k)
            if k < 0:
                raise ValueError(f"negative dimension {k} at {bd}")
            if k:
                clean[(int(bd[0]), int(bd[1]))] = k
        self._dims = dict(sorted(clean.items()))
        self._hash = None

    def dim(self, bd: Bidegree) -> int:
        return self._dims.get(bd, 0)

    def support(self) -> list[Bidegree]:
        return list(self._dims)

    def items(self):
        return self._dims.items()

    def total_dim(self) -> int:
        return sum(self._dims.values())

    def is_zero(self) -> bool:
        return not self._dims

    def shifted(self, by: Bidegree) -> "BigradedModule":
        """Module ``N`` with ``N(p, q) = M(p + a, q + b)``."""
        return BigradedModule({(p - by[0], q - by[1]): k for (p, q), k in self._dims.items()})

    def as_dict(self) -> dict[Bidegree, int]:
        return dict(self._dims)

    def __eq__(self, other) -> bool:
        return isinstance(other, BigradedModule) and self._dims == other._dims

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._dims.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{bd}: {k}" for bd, k in self._dims.items())
        return f"BigradedModule({{{inner}}})"


def direct_sum(*mods: BigradedModule) -> BigradedModule:
    dims: dict[Bidegree, int] = {}
    for m in mods:
        for bd, k in m.items():
            dims[bd] = dims.get(bd, 0) + k
    return BigradedModule(dims)


def summand_offsets(mods: Sequence[BigradedModule], bd: Bidegree) -> list[int]:
    """Start offsets of each summand inside ``direct_sum(*mods)`` at ``bd``."""
    out, acc = [], 0
    for m in mods:
        out.append(acc)
        acc += m.dim(bd)
    out.append(acc)
    return out


class BigradedMap:
    """A map of bigraded modules of a fixed bidegree, stored blockwise.

    The block at ``(p, q)`` maps ``source(p, q)`` to ``target(p + a, q + b)``.
    Zero blocks are not stored.
    """

    __slots__ = ("source", "target", "bidegree", "_blocks")

    def __init__(
        self,
        source: BigradedModule,
        target: BigradedModule,
        bidegree: Bidegree = (0, 0),
        blocks: Mapping[Bidegree, np.ndarray] | None = None,
        check: bool = True,
    ):
        self.source = source
        self.target = target
        self.bidegree = (int(bidegree[0]), int(bidegree[1]))
        F = get_field()
        stored = {}
        for bd, blk in (blocks or {}).items():
            bd = (int(bd[0]), int(bd[1]))
            blk = np.asarray(blk, dtype=F.dtype)
            if check:
                want = (target.dim(shift(bd, self.bidegree)), source.dim(bd))
                if blk.shape != want:
                    raise DimensionMismatch(
                        f"block at {bd} has shape {blk.shape}, expected {want} for bidegree {self.bidegree}"
                    )
            if blk.size and np.any(blk != 0):
                stored[bd] = blk
        self._blocks = dict(sorted(stored.items()))

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, source: BigradedModule, target: BigradedModule, bidegree: Bidegree = (0, 0)) -> "BigradedMap":
        return cls(source, target, bidegree, {}, check=False)

    @classmethod
    def identity(cls, module: BigradedModule) -> "BigradedMap":
        F = get_field()
        return cls(module, module, (0, 0), {bd: F.eye(k) for bd, k in module.items()}, check=False)

    @classmethod
    def from_function(
        cls,
        source: BigradedModule,
        target: BigradedModule,
        bidegree: Bidegree,
        fn: Callable[[Bidegree], Optional[np.ndarray]],
    ) -> "BigradedMap":
        blocks = {}
        for bd in source.support():
            if target.dim(shift(bd, bidegree)):
                blk = fn(bd)
                if blk is not None:
                    blocks[bd] = blk
        return cls(source, target, bidegree, blocks)

    @classmethod
    def shift_identity(cls, source: BigradedModule, target: BigradedModule, bidegree: Bidegree) -> "BigradedMap":
        """Identity matrices between ``source(p,q)`` and ``target((p,q)+bidegree)``."""
        F = get_field()
        blocks = {}
        for bd, k in source.items():
            if target.dim(shift(bd, bidegree)) != k:
                raise DimensionMismatch(f"shift identity: dimension mismatch at {bd}")
            blocks[bd] = F.eye(k)
        return cls(source, target, bidegree, blocks, check=False)

    # -- access -------------------------------------------------------------
    def shape_at(self, bd: Bidegree) -> tuple[int, int]:
        return (self.target.dim(shift(bd, self.bidegree)), self.source.dim(bd))

    def block(self, bd: Bidegree) -> np.ndarray:
        blk = self._blocks.get(bd)
        if blk is not None:
            return blk
        return get_field().zeros(*self.shape_at(bd))

    def blocks(self) -> dict[Bidegree, np.ndarray]:
        return dict(self._blocks)

    def is_zero(self) -> bool:
        return not self._blocks

    def _same_shape(self, other: "BigradedMap") -> None:
        if (self.source, self.target, self.bidegree) != (other.source, other.target, other.bidegree):
            raise DimensionMismatch("maps are not parallel")

    # -- algebra ------------------------------------------------------------
    def compose(self, other: "BigradedMap") -> "BigradedMap":
        """``self ∘ other``."""
        if other.target != self.source:
            raise DimensionMismatch("composition: target of right factor differs from source of left factor")
        F = get_field()
        bid = shift(self.bidegree, other.bidegree)
        blocks = {}
        for bd, blk in other._blocks.items():
            mid = shift(bd, other.bidegree)
            left = self._blocks.get(mid)
            if left is not None:
                blocks[bd] = F.matmul(left, blk)
        return BigradedMap(other.source, self.target, bid, blocks, check=False)

    __matmul__ = compose

    def _combine(self, other: "BigradedMap", sign: int) -> "BigradedMap":
        self._same_shape(other)
        F = get_field()
        blocks = dict(self._blocks)
        for bd, blk in other._blocks.items():
            if bd in blocks:
                blocks[bd] = F.reduce(blocks[bd] + sign * blk)
            else:
                blocks[bd] = F.reduce(sign * blk)
        return BigradedMap(self.source, self.target, self.bidegree, blocks, check=False)

    def __add__(self, other: "BigradedMap") -> "BigradedMap":
        return self._combine(other, 1)

    def __sub__(self, other: "BigradedMap") -> "BigradedMap":
        return self._combine(other, -1)

    def __neg__(self) -> "BigradedMap":
        return self.scale(-1)

    def scale(self, c) -> "BigradedMap":
        F = get_field()
        c = F.scalar(c)
        return BigradedMap(
            self.source, self.target, self.bidegree, {bd: F.reduce(b * c) for bd, b in self._blocks.items()}, check=False
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BigradedMap):
            return NotImplemented
        if (self.source, self.target, self.bidegree) != (other.source, other.target, other.bidegree):
            return False
        if self._blocks.keys() != other._blocks.keys():
            return False
        return all(np.array_equal(b, other._blocks[bd]) for bd, b in self._blocks.items())

    __hash__ = None  # type: ignore[assignment]

    def restrict_bidegree(self, bidegree: Bidegree) -> "BigradedMap":
        """Same blocks relabelled with another bidegree (used by shifted summands)."""
        return BigradedMap(self.source, self.target, bidegree, self._blocks)

    def reindexed(self, source: BigradedModule, target: BigradedModule, by: Bidegree) -> "BigradedMap":
        """Blocks moved from ``(p,q)+by`` to ``(p,q)``; the bidegree is unchanged."""
        return BigradedMap(
            source, target, self.bidegree, {(p - by[0], q - by[1]): b for (p, q), b in self._blocks.items()}
        )

    # -- predicates -------------------------------------------------------------
    def is_surjective(self) -> bool:
        for bd, k in self.target.items():
            src = (bd[0] - self.bidegree[0], bd[1] - self.bidegree[1])
            if rank(self.block(src)) != k:
                return False
        return True

    def is_injective(self) -> bool:
        return all(rank(self.block(bd)) == k for bd, k in self.source.items())

    def is_iso(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def inverse(self) -> "BigradedMap":
        from .linalg import inverse

        if not self.is_iso():
            raise ValueError("map is not invertible")
        blocks = {shift(bd, self.bidegree): inverse(self.block(bd)) for bd in self.source.support()}
        return BigradedMap(self.target, self.source, (-self.bidegree[0], -self.bidegree[1]), blocks, check=False)

    def __repr__(self) -> str:
        return f"BigradedMap(bidegree={self.bidegree}, blocks={len(self._blocks)})"


def block_map(
    sources: Sequence[BigradedModule],
    targets: Sequence[BigradedModule],
    bidegree: Bidegree,
    entries: Mapping[tuple[int, int], BigradedMap],
) -> BigradedMap:
    """Assemble ``⊕ sources → ⊕ targets`` from component maps ``entries[(i, j)]: sources[j] → targets[i]``."""
    F = get_field()
    src = direct_sum(*sources)
    tgt = direct_sum(*targets)
    blocks = {}
    for bd in src.support():
        tbd = shift(bd, bidegree)
        if not tgt.dim(tbd):
            continue
        so = summand_offsets(sources, bd)
        to = summand_offsets(targets, tbd)
        blk = F.zeros(tgt.dim(tbd), src.dim(bd))
        for (i, j), m in entries.items():
            if m.bidegree != bidegree:
                raise DimensionMismatch(f"component ({i},{j}) has bidegree {m.bidegree}, expected {bidegree}")
            b = m._blocks.get(bd)
            if b is not None:
                blk[to[i] : to[i + 1], so[j] : so[j + 1]] = b
        blocks[bd] = blk
    return BigradedMap(src, tgt, bidegree, blocks, check=False)


def inclusion(mods: Sequence[BigradedModule], j: int) -> BigradedMap:
    return block_map([mods[j]], mods, (0, 0), {(j, 0): BigradedMap.identity(mods[j])})


def projection(mods: Sequence[BigradedModule], i: int) -> BigradedMap:
    return block_map(mods, [mods[i]], (0, 0), {(0, i): BigradedMap.identity(mods[i])})


# -- r-bigraded complexes ----------------------------------------------------------


@dataclass(frozen=True)
class Report:
    """Outcome of a validator; truthy when every invariant holds."""

    ok: bool
    message: str = ""
    page: Optional[int] = None
    bidegree: Optional[Bidegree] = None
    invariant: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        where = []
        if self.page is not None:
            where.append(f"page {self.page}")
        if self.bidegree is not None:
            where.append(f"bidegree {self.bidegree}")
        loc = f" at {', '.join(where)}" if where else ""
        return f"violation{loc} [{self.invariant}]: {self.message}"

    @classmethod
    def passed(cls) -> "Report":
        return cls(True)

    @classmethod
    def failed(cls, message: str, *, page=None, bidegree=None, invariant=None) -> "Report":
        return cls(False, message, page, bidegree, invariant)


@dataclass(frozen=True, eq=False)
class RComplex:
    module: BigradedModule
    r: int
    differential: BigradedMap

    @classmethod
    def zero_differential(cls, module: BigradedModule, r: int) -> "RComplex":
        return cls(module, r, BigradedMap.zero(module, module, differential_bidegree(r)))

    @property
    def d(self) -> BigradedMap:
        return self.differential


def validate_rcomplex(c: RComplex, page: Optional[int] = None) -> Report:
    d = c.differential
    if c.r < 0:
        return Report.failed(f"negative page index {c.r}", page=page, invariant="bidegree")
    if d.source != c.module or d.target != c.module:
        return Report.failed("differential is not an endomorphism of the module", page=page, invariant="bidegree")
    want = differential_bidegree(c.r)
    if d.bidegree != want:
        bad = next(iter(d.blocks()), None)
        return Report.failed(
            f"differential has bidegree {d.bidegree}, expected {want}", page=page, bidegree=bad, invariant="bidegree"
        )
    for bd in c.module.support():
        try:
            shape = d.block(bd).shape
        except Exception:  # pragma: no cover - shapes are checked on construction
            shape = None
        if shape != d.shape_at(bd):
            return Report.failed(f"block shape {shape}", page=page, bidegree=bd, invariant="bidegree")
    sq = d @ d
    if not sq.is_zero():
        bad = next(iter(sq.blocks()))
        return Report.failed("d∘d is nonzero", page=page, bidegree=bad, invariant="d^2=0")
    return Report.passed()


@dataclass(frozen=True, eq=False)
class HomologyData:
    """Homology with deterministic representatives.

    ``section`` sends the standard basis of ``H(p,q)`` to chosen cycles and
    ``projection`` reads off homology coordinates of any cycle.
    """

    H: BigradedModule
    section: BigradedMap
    projection: BigradedMap


def homology(c: RComplex) -> HomologyData:
    F = get_field()
    d = c.differential
    incoming = (-d.bidegree[0], -d.bidegree[1])
    dims, sec, proj = {}, {}, {}
    stored = d.blocks()
    for bd, n in c.module.items():
        src = shift(bd, incoming)
        if bd not in stored and src not in stored:
            dims[bd] = n
            sec[bd] = proj[bd] = F.eye(n)
            continue
        z = kernel_basis(d.block(bd)) if c.module.dim(shift(bd, d.bidegree)) else F.eye(n)
        b = image_basis(d.block(src)) if c.module.dim(src) else F.zeros(n, 0)
        reps = extend_basis(b, z)
        h = reps.shape[1]
        if not h:
            continue
        dims[bd] = h
        sec[bd] = reps
        rows = left_inverse_rows(np.concatenate([b, reps], axis=1), n)
        proj[bd] = rows[b.shape[1] :]
    H = BigradedModule(dims)
    return HomologyData(
        H,
        BigradedMap(H, c.module, (0, 0), sec, check=False),
        BigradedMap(c.module, H, (0, 0), proj, check=False),
    )


def is_chain_map(f: BigradedMap, a: RComplex, b: RComplex) -> bool:
    return (b.differential @ f) == (f @ a.differential)


def induced_on_homology(
    f: BigradedMap, a: RComplex, b: RComplex, ha: Optional[HomologyData] = None, hb: Optional[HomologyData] = None
) -> BigradedMap:
    """``H(f)`` in the chosen homology bases: ``projection_B ∘ f ∘ section_A``."""
    if not is_chain_map(f, a, b):
        raise NonChainMap("map does not commute with the differentials")
    ha = ha or homology(a)
    hb = hb or homology(b)
    return hb.projection @ f @ ha.section


def pullback_rcomplex(
    u: RComplex, a: RComplex, b: RComplex, g: BigradedMap, p: BigradedMap
) -> tuple[RComplex, BigradedMap, BigradedMap, BigradedMap]:
    """Pullback of ``g: U → B`` and ``p: A → B`` as ``ker(g - p) ⊂ U ⊕ A``.

    Returns ``(X, π_U, π_A, incl)`` where ``incl: X → U ⊕ A`` is the kernel inclusion.
    """
    from .linalg import solve

    if u.r != a.r or a.r != b.r:
        raise DimensionMismatch("pullback of complexes on different pages")
    F = get_field()
    mods = [u.module, a.module]
    total = direct_sum(*mods)
    diff = block_map([g.source, p.source], [b.module], (0, 0), {(0, 0): g, (0, 1): -p})
    dims, basis = {}, {}
    for bd in total.support():
        k = kernel_basis(diff.block(bd)) if b.module.dim(bd) else F.eye(total.dim(bd))
        if k.shape[1]:
            dims[bd] = k.shape[1]
            basis[bd] = k
    X = BigradedModule(dims)
    incl = BigradedMap(X, total, (0, 0), basis, check=False)
    dsum = block_map(mods, mods, differential_bidegree(u.r), {(0, 0): u.differential, (1, 1): a.differential})
    moved = dsum @ incl
    dx = {}
    for bd in X.support():
        tbd = shift(bd, dsum.bidegree)
        if not X.dim(tbd):
            continue
        sol = solve(basis[tbd], moved.block(bd))
        if sol is None:  # pragma: no cover - kernel is a subcomplex
            raise DimensionMismatch("kernel is not closed under the differential")
        dx[bd] = sol
    xc = RComplex(X, u.r, BigradedMap(X, X, dsum.bidegree, dx, check=False))
    pu = projection(mods, 0) @ incl
    pa = projection(mods, 1) @ incl
    return xc, pu, pa, incl


def sum_complexes(parts: Iterable[RComplex]) -> RComplex:
    parts = list(parts)
    r = parts[0].r
    mods = [c.module for c in parts]
    d = block_map(mods, mods, differential_bidegree(r), {(i, i): c.differential for i, c in enumerate(parts)})
    return RComplex(direct_sum(*mods), r, d)
