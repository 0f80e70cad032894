import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import seeds, small_spec
from spseq.bigraded import BigradedMap, BigradedModule
from spseq.errors import InvalidObject, RelationViolation
from spseq.filtered import lambda_fc, spectral_sequence
from spseq.harness import gen_multicomplex, gen_strict_morphism
from spseq.linalg import get_field
from spseq.multicomplex import (
    MultiMorphism,
    Multicomplex,
    eprime,
    eprime_of_morphism,
    find_strict_homotopy,
    is_n_multicomplex,
    lambda_mc,
    mc_path,
    mc_pullback,
    mc_strict_homotopy_check,
    op_bidegree,
    strict_to_spectral_witness,
    tensor,
    tot,
    tot_morphism,
    validate_multicomplex,
)
from spseq.paths import is_r_homotopy, lambda_, path
from spseq.spectral import SpectralMorphism, find_isomorphism, validate_spectral_sequence


def _mc(dims, arrows, check=True):
    """``arrows``: ``{i: {source bidegree: matrix}}``."""
    F = get_field()
    mod = BigradedModule(dims)
    ops = {i: BigradedMap(mod, mod, op_bidegree(i), {bd: F.array(m) for bd, m in blocks.items()}) for i, blocks in arrows.items()}
    return Multicomplex(mod, ops, check=check)


def _square(d1_bottom=1):
    dims = {(0, 0): 1, (0, 1): 1, (-1, 0): 1, (-1, 1): 1}
    return dims, {0: {(0, 0): [[1]], (-1, 0): [[1]]}, 1: {(0, 0): [[1]], (0, 1): [[d1_bottom]]}}


def _dense(a, i):
    """``d_i`` as one matrix on the sum of all bidegrees, in sorted order."""
    F = get_field()
    bds = sorted(a.module.support())
    off, acc = {}, 0
    for bd in bds:
        off[bd] = acc
        acc += a.module.dim(bd)
    m = F.zeros(acc, acc)
    for bd, blk in a.d(i).blocks().items():
        t = (bd[0] - i, bd[1] + 1 - i)
        m[off[t] : off[t] + blk.shape[0], off[bd] : off[bd] + blk.shape[1]] = blk
    return m


def test_commuting_square_is_a_bicomplex():
    a = _mc(*_square())
    assert validate_multicomplex(a) and is_n_multicomplex(a, 2) and not is_n_multicomplex(a, 1)
    e = eprime(a)
    assert e.module(0).as_dict() == {(0, 0): 1, (0, 1): 1, (-1, 0): 1, (-1, 1): 1}
    assert e.module(1).is_zero()


def test_non_commuting_square_is_reported():
    rep = validate_multicomplex(_mc(*_square(d1_bottom=2), check=False))
    assert not rep and "l=1" in str(rep)
    with pytest.raises(InvalidObject):
        _mc(*_square(d1_bottom=2))


def test_d1_squared_nonzero_is_reported_at_l2():
    dims = {(0, 0): 1, (-1, 0): 1, (-2, 0): 1}
    a = _mc(dims, {1: {(0, 0): [[1]], (-1, 0): [[1]]}}, check=False)
    rep = validate_multicomplex(a)
    assert not rep and "l=2" in str(rep) and rep.bidegree == (0, 0)


def test_single_d0_totalizes_to_a_column():
    a = _mc({(0, 0): 1, (0, 1): 1}, {0: {(0, 0): [[3]]}})
    t = tot(a)
    assert t.dims == {0: 1, 1: 1}
    assert t.dmat(0).tolist() == [[3]]
    assert spectral_sequence(t).module(1).is_zero()


def test_d1_isomorphism_dies_on_page_two():
    a = _mc({(0, 0): 1, (-1, 0): 1}, {1: {(0, 0): [[1]]}})
    e = eprime(a)
    assert e.module(1).as_dict() == {(0, 0): 1, (-1, 0): 1}
    assert e.d(1).block((0, 0)).tolist() == [[1]]
    assert e.module(2).is_zero()


@pytest.mark.parametrize("r", range(4))
def test_lambda_mc(r):
    lam = lambda_mc(r)
    assert validate_multicomplex(lam) and is_n_multicomplex(lam, r + 1) and not is_n_multicomplex(lam, r)
    assert find_isomorphism(spectral_sequence(tot(lam)), spectral_sequence(lambda_fc(r))) is not None
    assert find_isomorphism(eprime(lam), lambda_(r)) is not None


@pytest.mark.parametrize("r", range(3))
def test_path_of_the_unit_is_lambda(r):
    unit = _mc({(0, 0): 1}, {})
    pth = mc_path(r, unit)
    assert pth.P.module == lambda_mc(r).module
    assert find_isomorphism(eprime(pth.P), lambda_(r)) is not None


def test_koszul_sign_breaks_the_relation():
    with pytest.raises(RelationViolation):
        tensor(lambda_mc(1), lambda_mc(0), sign="koszul")
    assert validate_multicomplex(tensor(lambda_mc(1), lambda_mc(0)))


def test_pullback_along_identity():
    a = lambda_mc(1)
    one = MultiMorphism.identity(a)
    x, pu, pa = mc_pullback(one, one)
    assert x.module == a.module
    assert pu.f == pa.f


def test_strict_homotopy_examples():
    a = lambda_mc(1)
    one = MultiMorphism.identity(a)
    h, pth = find_strict_homotopy(one, one, 1)
    assert mc_strict_homotopy_check(h, one, one, pth)
    assert (pth.minus @ pth.iota).f == one.f == (pth.plus @ pth.iota).f
    zero = MultiMorphism(a, a, BigradedMap.zero(a.module, a.module, (0, 0)))
    # identity and zero differ in homology on page 0 and cannot be strictly homotopic
    assert find_strict_homotopy(one, zero, 1) is None


# -- properties ---------------------------------------------------------------------


@given(seeds)
def test_relation_and_total_differential(seed):
    a = gen_multicomplex(small_spec(), np.random.default_rng(seed))
    F = get_field()
    ops = {i: _dense(a, i) for i in a.ops}
    for l in range(2 * a.N + 1):
        terms = [(-1) ** i * F.matmul(ops[i], ops[l - i]) for i in range(l + 1) if i in ops and l - i in ops]
        if terms:
            assert not np.any(F.reduce(sum(terms)))
    t = tot(a)
    for n in t.degrees():
        if n + 1 in t.degrees() and n + 2 in t.degrees():
            assert not np.any(F.matmul(t.dmat(n + 1), t.dmat(n)))
    assert sum(t.dims.values()) == a.module.total_dim()
    assert validate_spectral_sequence(eprime(a))


@given(seeds, st.integers(0, 2))
def test_path_comparison(seed, r):
    rng = np.random.default_rng(seed)
    a = gen_multicomplex(small_spec(max_pieces=2), rng)
    pth = mc_path(r, a)
    pobj = path(r, eprime(a))
    iso = find_isomorphism(
        eprime(pth.P),
        pobj.P,
        post=[(pobj.minus, eprime_of_morphism(pth.minus)), (pobj.plus, eprime_of_morphism(pth.plus))],
        rng=rng,
    )
    assert iso is not None


@given(seeds)
def test_tot_is_functorial(seed):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a, b, c = (gen_multicomplex(spec, rng) for _ in range(3))
    f, g = gen_strict_morphism(a, b, rng), gen_strict_morphism(b, c, rng)
    lhs, rhs = tot_morphism(g @ f), tot_morphism(g) @ tot_morphism(f)
    for n in tot(a).degrees():
        assert np.array_equal(lhs.mat(n), rhs.mat(n))
    assert eprime_of_morphism(MultiMorphism.identity(a)) == SpectralMorphism.identity(eprime(a))


@given(seeds, st.integers(0, 2))
def test_strict_homotopies_give_spectral_homotopies(seed, r):
    rng = np.random.default_rng(seed)
    spec = small_spec(max_pieces=2)
    a, b = gen_multicomplex(spec, rng), gen_multicomplex(spec, rng)
    pth = mc_path(r, b)
    h = gen_strict_morphism(a, pth.P, rng)
    f, g = pth.minus @ h, pth.plus @ h
    assert mc_strict_homotopy_check(h, f, g, pth)
    w = strict_to_spectral_witness(h, pth, rng=rng)
    assert w is not None and is_r_homotopy(w)
    assert w.f == eprime_of_morphism(f) and w.g == eprime_of_morphism(g)
