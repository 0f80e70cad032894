"""Bigraded maps whose entries are affine functions of a vector of unknowns.

Hom spaces, homotopy searches and lifting problems all reduce to: allocate
unknown blocks, push them through fixed maps, equate to constants, solve.
Blocks are vectorised row-major, so a block of shape ``(t, s)`` owns ``t*s``
consecutive coefficient rows.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .bigraded import BigradedMap, BigradedModule, Bidegree, shift
from .errors import DimensionMismatch
from .linalg import get_field, kernel_basis, solve


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    if c.shape[1] == n:
        return c
    F = get_field()
    return np.concatenate([c, F.zeros(c.shape[0], n - c.shape[1])], axis=1)


class LinearMap:
    """``x ↦ const + Σ_k x_k · M_k`` as a bigraded map of fixed bidegree."""

    __slots__ = ("source", "target", "bidegree", "coeffs", "const", "nvars")

    def __init__(self, source, target, bidegree, coeffs, const: Optional[BigradedMap], nvars: int):
        self.source = source
        self.target = target
        self.bidegree = bidegree
        self.coeffs: dict[Bidegree, np.ndarray] = coeffs
        self.const = const if const is not None else BigradedMap.zero(source, target, bidegree)
        self.nvars = nvars

    @classmethod
    def variables(cls, source: BigradedModule, target: BigradedModule, bidegree: Bidegree, offset: int):
        """Fresh unknowns for every block; returns ``(map, next_offset)``."""
        F = get_field()
        coeffs = {}
        pos = offset
        for bd, s in source.items():
            t = target.dim(shift(bd, bidegree))
            if not t:
                continue
            c = F.zeros(t * s, pos + t * s)
            for i in range(t * s):
                c[i, pos + i] = F.one
            coeffs[bd] = c
            pos += t * s
        lm = cls(source, target, bidegree, coeffs, None, pos)
        return lm, pos

    @classmethod
    def constant(cls, m: BigradedMap, nvars: int = 0) -> "LinearMap":
        return cls(m.source, m.target, m.bidegree, {}, m, nvars)

    @classmethod
    def from_basis(cls, source, target, bidegree, coeffs: dict[Bidegree, np.ndarray], nvars: int) -> "LinearMap":
        return cls(source, target, bidegree, coeffs, None, nvars)

    def _shape(self, bd: Bidegree) -> tuple[int, int]:
        return (self.target.dim(shift(bd, self.bidegree)), self.source.dim(bd))

    def left(self, m: BigradedMap) -> "LinearMap":
        """``m ∘ self``."""
        if m.source != self.target:
            raise DimensionMismatch("left composition with a map of the wrong source")
        F = get_field()
        bid = shift(m.bidegree, self.bidegree)
        out = {}
        for bd, c in self.coeffs.items():
            mid = shift(bd, self.bidegree)
            mb = m.blocks().get(mid)
            if mb is None:
                continue
            t1, s = self._shape(bd)
            c3 = c.reshape(t1, s, c.shape[1])
            new = F.reduce(np.tensordot(mb, c3, axes=([1], [0])))
            out[bd] = new.reshape(mb.shape[0] * s, c.shape[1])
        return LinearMap(self.source, m.target, bid, out, m @ self.const, self.nvars)

    def right(self, m: BigradedMap) -> "LinearMap":
        """``self ∘ m``."""
        if m.target != self.source:
            raise DimensionMismatch("right composition with a map of the wrong target")
        F = get_field()
        bid = shift(self.bidegree, m.bidegree)
        out = {}
        for bd0, mb in m.blocks().items():
            bd1 = shift(bd0, m.bidegree)
            c = self.coeffs.get(bd1)
            if c is None:
                continue
            t, s1 = self._shape(bd1)
            c3 = c.reshape(t, s1, c.shape[1])
            new = F.reduce(np.tensordot(c3, mb, axes=([1], [0])))  # (t, n, s0)
            new = np.transpose(new, (0, 2, 1))
            out[bd0] = np.ascontiguousarray(new).reshape(t * mb.shape[1], c.shape[1])
        return LinearMap(m.source, self.target, bid, out, self.const @ m, self.nvars)

    def _combine(self, other: "LinearMap", sign: int) -> "LinearMap":
        if (self.source, self.target, self.bidegree) != (other.source, other.target, other.bidegree):
            raise DimensionMismatch("linear maps are not parallel")
        F = get_field()
        n = max(self.nvars, other.nvars)
        out = {bd: _pad(c, n) for bd, c in self.coeffs.items()}
        for bd, c in other.coeffs.items():
            c = _pad(c, n)
            out[bd] = F.reduce(out[bd] + sign * c) if bd in out else F.reduce(sign * c)
        const = self.const + other.const if sign > 0 else self.const - other.const
        return LinearMap(self.source, self.target, self.bidegree, out, const, n)

    def __add__(self, other):
        if isinstance(other, BigradedMap):
            other = LinearMap.constant(other, self.nvars)
        return self._combine(other, 1)

    def __sub__(self, other):
        if isinstance(other, BigradedMap):
            other = LinearMap.constant(other, self.nvars)
        return self._combine(other, -1)

    def __neg__(self) -> "LinearMap":
        return self.scale(-1)

    def scale(self, c) -> "LinearMap":
        F = get_field()
        c = F.scalar(c)
        return LinearMap(
            self.source,
            self.target,
            self.bidegree,
            {bd: F.reduce(v * c) for bd, v in self.coeffs.items()},
            self.const.scale(c),
            self.nvars,
        )

    def evaluate(self, x: np.ndarray) -> BigradedMap:
        F = get_field()
        blocks = {}
        for bd, c in self.coeffs.items():
            t, s = self._shape(bd)
            xx = x[: c.shape[1]]
            blocks[bd] = F.matmul(c, xx.reshape(-1, 1)).reshape(t, s)
        lin = BigradedMap(self.source, self.target, self.bidegree, blocks, check=False)
        return lin + self.const

    def homogeneous_matrix(self, bd: Bidegree, n: int) -> np.ndarray:
        c = self.coeffs.get(bd)
        t, s = self._shape(bd)
        if c is None:
            return get_field().zeros(t * s, n)
        return _pad(c, n)

    def reparametrize(self, basis: np.ndarray, x0: Optional[np.ndarray] = None) -> "LinearMap":
        """Substitute ``x = x0 + basis @ y``; the result is linear in ``y``."""
        F = get_field()
        n = basis.shape[0]
        coeffs = {bd: F.matmul(_pad(c, n), basis) for bd, c in self.coeffs.items()}
        const = self.const
        if x0 is not None:
            const = const + LinearMap(self.source, self.target, self.bidegree, self.coeffs, None, self.nvars).evaluate(x0)
        return LinearMap(self.source, self.target, self.bidegree, coeffs, const, basis.shape[1])


class LinearSystem:
    """Accumulates equations ``L(x) = rhs`` and solves them exactly."""

    def __init__(self):
        self._eqs: list[tuple[LinearMap, Optional[BigradedMap]]] = []
        self.nvars = 0

    def allocate(self, source, target, bidegree) -> LinearMap:
        lm, self.nvars = LinearMap.variables(source, target, bidegree, self.nvars)
        return lm

    def equate(self, lhs: LinearMap, rhs: Optional[BigradedMap] = None) -> None:
        self._eqs.append((lhs, rhs))

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        F = get_field()
        n = self.nvars
        rows_a, rows_b = [], []
        for lhs, rhs in self._eqs:
            target = lhs.const if rhs is None else rhs - lhs.const
            keys = set(lhs.coeffs) | set(target.blocks())
            for bd in sorted(keys):
                a = lhs.homogeneous_matrix(bd, n)
                b = target.block(bd).reshape(-1) if rhs is not None else F.reduce(-target.block(bd).reshape(-1))
                if not a.shape[0]:
                    continue
                rows_a.append(a)
                rows_b.append(b)
        if not rows_a:
            return F.zeros(0, n), F.zeros(0, 1).reshape(0)
        return np.concatenate(rows_a, axis=0), np.concatenate(rows_b, axis=0)

    def solve(self) -> tuple[Optional[np.ndarray], np.ndarray]:
        """``(particular solution or None, kernel basis columns)``."""
        F = get_field()
        a, b = self.matrices()
        if a.shape[0] == 0:
            return F.zeros(self.nvars, 1).reshape(-1), F.eye(self.nvars)
        x0 = solve(a, b)
        return x0, kernel_basis(a)


def stack_vectors(maps: Iterable[BigradedMap], layout: Iterable[Bidegree]) -> np.ndarray:
    """Concatenate the row-major blocks of ``maps`` at ``layout`` bidegrees into columns."""
    cols = []
    layout = list(layout)
    for m in maps:
        cols.append(np.concatenate([m.block(bd).reshape(-1) for bd in layout]) if layout else get_field().zeros(0, 1).reshape(0))
    F = get_field()
    if not cols:
        return F.zeros(0, 0)
    return np.stack(cols, axis=1)
