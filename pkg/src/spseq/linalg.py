"""Exact dense linear algebra over a prime field F_p or over Q.

Matrices are plain numpy arrays: ``int64`` residues in ``[0, p)`` for F_p and
``object`` arrays of :class:`fractions.Fraction` for Q.  Every routine reads the
active field from a context variable (see :func:`use_field`), so callers never
pass it around explicitly.

Elimination is deterministic: leftmost pivot column, first nonzero row.
"""

from __future__ import annotations

import contextlib
import contextvars
import os
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .errors import DimensionMismatch

__all__ = [
    "Field",
    "get_field",
    "use_field",
    "parse_field",
    "rref",
    "rank",
    "kernel_basis",
    "image_basis",
    "solve",
    "extend_basis",
    "complement_in",
    "inverse",
    "intersect",
    "left_inverse_rows",
]

_MAX_PRIME = 1 << 20


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class Field:
    """F_p for a prime ``p`` or, when ``p`` is None, the rationals."""

    def __init__(self, p: Optional[int] = 7):
        if p is not None:
            p = int(p)
            if not _is_prime(p) or p >= _MAX_PRIME:
                raise ValueError(f"F_p requires a prime p < {_MAX_PRIME}, got {p}")
        self.p = p
        self.dtype = np.int64 if p is not None else object

    @property
    def name(self) -> str:
        return "Q" if self.p is None else f"Fp:{self.p}"

    @property
    def characteristic(self) -> int:
        return 0 if self.p is None else self.p

    def __repr__(self) -> str:
        return f"Field({self.name})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("Field", self.p))

    # -- construction -----------------------------------------------------
    def scalar(self, x):
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def array(self, data, shape=None) -> np.ndarray:
        if self.p is None:
            arr = np.array(data, dtype=object)
            if arr.size:
                arr = np.vectorize(Fraction, otypes=[object])(arr)
        else:
            arr = np.array(
                [self.scalar(v) for v in np.asarray(data, dtype=object).ravel()],
                dtype=np.int64,
            ).reshape(np.shape(data))
        if shape is not None:
            arr = arr.reshape(shape)
        return arr

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        if self.p is None:
            out = np.empty((rows, cols), dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros((rows, cols), dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros(n, n)
        for i in range(n):
            out[i, i] = self.one
        return out

    @property
    def one(self):
        return Fraction(1) if self.p is None else 1

    def reduce(self, a: np.ndarray) -> np.ndarray:
        if self.p is None:
            return a
        return np.mod(a, self.p)

    def inv(self, x):
        if self.p is None:
            if x == 0:
                raise ZeroDivisionError("inverse of zero")
            return Fraction(1) / x
        x = int(x) % self.p
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, self.p - 2, self.p)

    def neg_one(self):
        return self.scalar(-1)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] != b.shape[0]:
            raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
        if self.p is None:
            if a.size == 0 or b.size == 0:
                return self.zeros(a.shape[0], b.shape[1])
            return a @ b
        return (a @ b) % self.p

    def random(self, rng: np.random.Generator, shape, low: int = -3, high: int = 3) -> np.ndarray:
        """Uniform residues over F_p; small integers in ``[low, high]`` over Q."""
        if self.p is None:
            vals = rng.integers(low, high + 1, size=shape)
            return self.array(vals)
        return rng.integers(0, self.p, size=shape).astype(np.int64)

    def format(self, x) -> str:
        if self.p is None:
            x = Fraction(x)
            return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return str(int(x) % self.p)

    def parse(self, token: str):
        if self.p is None:
            return Fraction(token)
        if "/" in token:
            num, den = token.split("/")
            return self.scalar(Fraction(int(num), int(den)))
        return int(token) % self.p


def parse_field(spec: str) -> Field:
    """Parse ``"Fp:7"`` or ``"Q"``."""
    spec = spec.strip()
    if spec == "Q":
        return Field(None)
    if spec.startswith("Fp:"):
        return Field(int(spec[3:]))
    raise ValueError(f"unknown field spec {spec!r} (expected 'Fp:<prime>' or 'Q')")


def _default_field() -> Field:
    env = os.environ.get("SPSEQ_FIELD")
    return parse_field(env) if env else Field(7)


_ACTIVE: contextvars.ContextVar[Optional[Field]] = contextvars.ContextVar("spseq_field", default=None)


def get_field() -> Field:
    f = _ACTIVE.get()
    if f is None:
        f = _default_field()
        _ACTIVE.set(f)
    return f


@contextlib.contextmanager
def use_field(field: Field | str) -> Iterator[Field]:
    if isinstance(field, str):
        field = parse_field(field)
    token = _ACTIVE.set(field)
    try:
        yield field
    finally:
        _ACTIVE.reset(token)


# -- elimination ----------------------------------------------------------------


def rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    F = get_field()
    a = np.array(m, dtype=F.dtype, copy=True)
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        piv = a[r, c]
        if piv != F.one:
            a[r, c:] = F.reduce(a[r, c:] * F.inv(piv))
        col = a[:, c].copy()
        col[r] = 0
        others = np.flatnonzero(col)
        if others.size:
            a[np.ix_(others, np.arange(c, cols))] = F.reduce(
                a[np.ix_(others, np.arange(c, cols))] - np.outer(col[others], a[r, c:])
            )
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    return len(rref(m)[1])


def kernel_basis(m: np.ndarray) -> np.ndarray:
    """Columns spanning the null space, one per free column of the RREF."""
    F = get_field()
    rows, cols = m.shape
    if rows == 0 or m.size == 0:
        return F.eye(cols)
    red, pivots = rref(m)
    free = [c for c in range(cols) if c not in set(pivots)]
    out = F.zeros(cols, len(free))
    for j, fcol in enumerate(free):
        out[fcol, j] = F.one
        for i, pc in enumerate(pivots):
            out[pc, j] = F.reduce(-red[i, fcol]) if F.p is not None else -red[i, fcol]
    return out


def image_basis(m: np.ndarray) -> np.ndarray:
    """Leftmost linearly independent columns of ``m``."""
    if m.size == 0:
        return get_field().zeros(m.shape[0], 0)
    _, pivots = rref(m)
    return m[:, pivots]


def solve(m: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """A solution ``x`` of ``m @ x == b`` or None.

    ``b`` may be a vector or a matrix of right-hand sides; with a matrix the
    result is None unless every column is solvable.
    """
    F = get_field()
    vector = b.ndim == 1
    bb = b.reshape(-1, 1) if vector else b
    if m.shape[0] != bb.shape[0]:
        raise DimensionMismatch(f"solve: matrix has {m.shape[0]} rows, rhs has {bb.shape[0]}")
    rows, cols = m.shape
    nrhs = bb.shape[1]
    if rows == 0:
        x = F.zeros(cols, nrhs)
        return x.ravel() if vector else x
    aug = np.concatenate([np.asarray(m, dtype=F.dtype), np.asarray(bb, dtype=F.dtype)], axis=1)
    red, pivots = rref(aug)
    if pivots and pivots[-1] >= cols:
        return None
    x = F.zeros(cols, nrhs)
    for i, pc in enumerate(pivots):
        x[pc, :] = red[i, cols:]
    return x.ravel() if vector else x


def extend_basis(sub: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Columns of ``candidates`` that greedily extend the span of ``sub``."""
    F = get_field()
    k = sub.shape[1]
    if candidates.shape[1] == 0:
        return F.zeros(sub.shape[0], 0)
    joint = np.concatenate([np.asarray(sub, dtype=F.dtype), np.asarray(candidates, dtype=F.dtype)], axis=1)
    _, pivots = rref(joint)
    chosen = [c - k for c in pivots if c >= k]
    return candidates[:, chosen]


def complement_in(sub: np.ndarray, n: int) -> np.ndarray:
    """A basis ``C`` with ``span(sub) (+) span(C)`` equal to the whole space."""
    if sub.shape[0] != n:
        raise DimensionMismatch(f"subspace lives in dimension {sub.shape[0]}, not {n}")
    return extend_basis(sub, get_field().eye(n))


def inverse(m: np.ndarray) -> np.ndarray:
    F = get_field()
    n = m.shape[0]
    if m.shape != (n, n):
        raise DimensionMismatch(f"inverse of non-square {m.shape}")
    x = solve(m, F.eye(n))
    if x is None:
        raise ZeroDivisionError("matrix is singular")
    return x


def intersect(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Basis of ``span(u) ∩ span(v)`` (independent columns assumed)."""
    F = get_field()
    if u.shape[1] == 0 or v.shape[1] == 0:
        return F.zeros(u.shape[0], 0)
    k = kernel_basis(np.concatenate([u, F.reduce(-v) if F.p else -v], axis=1))
    return image_basis(F.matmul(u, k[: u.shape[1]]))


def left_inverse_rows(basis: np.ndarray, n: int) -> np.ndarray:
    """Rows ``P`` with ``P @ basis == I``, vanishing on a deterministic complement."""
    F = get_field()
    full = np.concatenate([basis, complement_in(basis, n)], axis=1)
    return inverse(full)[: basis.shape[1]]
