"""Hypothesis strategies for small objects with known answers."""

from collections import Counter

import numpy as np
from hypothesis import strategies as st

from spseq.bigraded import BigradedMap, BigradedModule, RComplex, differential_bidegree, shift
from spseq.linalg import get_field, inverse

WINDOW = range(-2, 3)
bidegrees = st.tuples(st.sampled_from(WINDOW), st.sampled_from(WINDOW))


@st.composite
def unit_triangular(draw, n: int, lower: bool):
    m = np.eye(n, dtype=np.int64)
    for i in range(n):
        for j in range(i):
            a, b = (i, j) if lower else (j, i)
            m[a, b] = draw(st.integers(-3, 3))
    return m


@st.composite
def invertible(draw, n: int):
    F = get_field()
    lo = F.array(draw(unit_triangular(n, True)))
    up = F.array(draw(unit_triangular(n, False)))
    return F.matmul(lo, up)


@st.composite
def rcomplexes(draw, r: int, max_pieces: int = 4, min_pieces: int = 0, window=WINDOW):
    """``(C, h)`` with ``h`` the dimension of homology per bidegree."""
    F = get_field()
    deg = differential_bidegree(r)
    where = st.tuples(st.sampled_from(window), st.sampled_from(window))
    pieces = draw(st.lists(st.tuples(st.booleans(), where), min_size=min_pieces, max_size=max_pieces))
    dims: Counter = Counter()
    arrows = []
    dots: Counter = Counter()
    for is_arrow, bd in pieces:
        if is_arrow:
            tgt = shift(bd, deg)
            arrows.append((bd, dims[bd], tgt, dims[tgt]))
            dims[bd] += 1
            dims[tgt] += 1
        else:
            dots[bd] += 1
            dims[bd] += 1
    mod = BigradedModule(dict(dims))
    blocks = {bd: F.zeros(mod.dim(shift(bd, deg)), n) for bd, n in mod.items()}
    for src, i, tgt, j in arrows:
        blocks[src][j, i] = 1
    d = BigradedMap(mod, mod, deg, blocks)
    g = {bd: draw(invertible(n)) for bd, n in mod.items()}
    gi = {bd: inverse(m) for bd, m in g.items()}
    conj = {}
    for bd, blk in d.blocks().items():
        tgt = shift(bd, deg)
        conj[bd] = F.matmul(F.matmul(g[tgt], blk), gi[bd])
    return RComplex(mod, r, BigradedMap(mod, mod, deg, conj)), dict(dots)


# -- random solutions of linear map equations ----------------------------------
# vec(L X R) = (R^T (x) L) vec(X) with column-major vec.


def _id(module) -> BigradedMap:
    return BigradedMap.identity(module)


def random_maps(unknowns, equations, rng, field=None):
    """Random solution of ``sum L @ X @ R == 0`` for each equation.

    ``unknowns``: name -> (source module, target module), all of bidegree (0,0).
    ``equations``: list of term lists ``(sign, L or None, name, R or None)``.
    Returns name -> BigradedMap, or None if only the zero solution exists.
    """
    F = field or get_field()
    offsets, n = {}, 0
    for name, (src, tgt) in unknowns.items():
        for bd, s in src.items():
            t = tgt.dim(bd)
            if t:
                offsets[(name, bd)] = (n, t, s)
                n += t * s
    rows = []
    for eq in equations:
        blocks = {}
        for sign, left, name, right in eq:
            src, tgt = unknowns[name]
            r = right if right is not None else _id(src)
            l = left if left is not None else _id(tgt)
            for bd, s in r.source.items():
                mid = shift(bd, r.bidegree)
                key = offsets.get((name, mid))
                out = shift(mid, l.bidegree)
                t = l.target.dim(out)
                if key is None or not t:
                    continue
                o, _, _ = key
                rb, lb = r.block(bd), l.block(mid)
                coeff = np.kron(np.asarray(rb).T, np.asarray(lb))
                acc = blocks.setdefault((bd, out), F.zeros(t * s, n))
                acc[:, o : o + coeff.shape[1]] = F.reduce(acc[:, o : o + coeff.shape[1]] + sign * F.array(coeff))
        rows.extend(blocks.values())
    if n == 0:
        return None
    from spseq.linalg import kernel_basis

    system = np.concatenate(rows, axis=0) if rows else F.zeros(0, n)
    basis = kernel_basis(system)
    if basis.shape[1] == 0:
        return None
    x = F.matmul(basis, F.random(rng, (basis.shape[1], 1))).ravel()
    out = {}
    for name, (src, tgt) in unknowns.items():
        blocks = {}
        for bd in src.support():
            key = offsets.get((name, bd))
            if key:
                o, t, s = key
                blocks[bd] = x[o : o + t * s].reshape((t, s), order="F")
        out[name] = BigradedMap(src, tgt, (0, 0), blocks)
    return out


def chain_conditions(name, a: RComplex, b: RComplex):
    return [(1, b.differential, name, None), (-1, None, name, a.differential)]


# -- random spectral data through the generators ----------------------------------

seeds = st.integers(0, 2**32 - 1)


def small_spec(**kw):
    from spseq.harness import GenSpec

    base = dict(window=3, max_dim=2, max_pieces=3)
    base.update(kw)
    return GenSpec(**base)
