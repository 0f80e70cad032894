import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import seeds, small_spec
from spseq.bigraded import BigradedMap, BigradedModule, RComplex, homology
from spseq.errors import InvalidObject, NotAMorphism, NotASurjection
from spseq.harness import _any_morphism, _acyclic_fibration, gen_spectral
from spseq.linalg import get_field
from spseq.paths import lambda_, path
from spseq.spectral import (
    SpectralMorphism,
    SpectralSequence,
    are_isomorphic,
    derive_morphism,
    final_object,
    find_isomorphism,
    fixture_f_S,
    fixture_pi_T,
    fixture_S,
    fixture_T,
    hom_space,
    is_acyclic_r_fibration,
    is_Er_quasi_iso,
    is_r_fibration,
    is_surjection,
    pagewise_cokernel,
    product,
    pullback_surjection,
    ring,
    solve_morphisms,
    validate_spectral_sequence,
)


def pair(f, g):
    """``(f, g): X -> A x B`` from its page-0 components."""
    prod, _ = product(f.target, g.target)
    blocks = {bd: np.concatenate([f.f0.block(bd), g.f0.block(bd)]) for bd in f.source.module(0).support()}
    return derive_morphism(BigradedMap(f.source.module(0), prod.module(0), (0, 0), blocks), f.source, prod)


def test_ring_and_fixtures_validate():
    for s in (ring(0, 0), ring(-2, 3), fixture_S(), fixture_T()):
        assert validate_spectral_sequence(s)


def test_fixture_shapes():
    s = fixture_S()
    assert s.module(0).as_dict() == {(0, 0): 1, (1, 0): 1}
    assert not s.d(1).is_zero()
    assert s.module(2).is_zero()
    t = fixture_T()
    assert not t.d(0).is_zero() and t.module(1).is_zero()


def test_cokernel_of_f_s_is_not_a_spectral_sequence():
    rep = validate_spectral_sequence(pagewise_cokernel(fixture_f_S()))
    assert not rep
    assert rep.page == 1 and rep.bidegree == (1, 0)
    assert "dim H(A_1)(1, 0) = 1" in rep.message and "dim A_2(1, 0) = 0" in rep.message


def test_invalid_tower_raises_with_report():
    F = get_field()
    m = BigradedModule({(0, 0): 1})
    page0 = ring(0, 0).page(0)
    page1 = RComplex.zero_differential(BigradedModule(), 1)
    with pytest.raises(InvalidObject) as exc:
        SpectralSequence([page0, page1], [BigradedMap.zero(m, BigradedModule())])
    assert exc.value.report.invariant == "dim H(A_m) = dim A_{m+1}"


def test_derive_identity_and_zero():
    s = fixture_S()
    one = derive_morphism(BigradedMap.identity(s.module(0)), s, s)
    assert all(one.map(m) == BigradedMap.identity(s.module(m)) for m in range(3))
    zero = derive_morphism(BigradedMap.zero(s.module(0), s.module(0)), s, s)
    assert all(zero.map(m).is_zero() for m in range(3))


def test_f_s_pages():
    f = fixture_f_S()
    assert f.map(0).block((0, 0)).tolist() == [[1]]
    assert f.map(1).block((0, 0)).tolist() == [[1]]
    assert f.map(2).is_zero() and f.map(2).target.is_zero()


def test_non_chain_page_zero_map_rejected():
    F = get_field()
    t = fixture_T()
    # identity on (0,1) only does not commute with d_0
    f0 = BigradedMap(t.module(0), t.module(0), (0, 0), {(0, 1): F.eye(1)})
    with pytest.raises(NotAMorphism) as exc:
        derive_morphism(f0, t, t)
    assert exc.value.page == 0


def test_surjection_examples():
    assert is_surjection(SpectralMorphism.identity(fixture_S()))
    assert not is_surjection(fixture_pi_T())
    for r in range(3):
        assert is_surjection(path(r, fixture_S()).minus)


def test_predicates_on_path_maps():
    a = fixture_S()
    for r in range(3):
        pb = path(r, a)
        assert is_Er_quasi_iso(pb.iota, r)
        assert is_acyclic_r_fibration(pb.minus, r) and is_acyclic_r_fibration(pb.plus, r)
        assert is_r_fibration(pair(pb.minus, pb.plus), r)
    zero = SpectralMorphism.zero(ring(0, 0), ring(0, 0))
    assert not is_Er_quasi_iso(zero, 0) and not is_r_fibration(zero, 0) and not is_acyclic_r_fibration(zero, 0)


def test_iota_is_not_a_fibration_in_general():
    pb = path(0, ring(0, 0))
    assert not is_r_fibration(pb.iota, 0)


def test_products():
    a = fixture_S()
    prod, _ = product(a, final_object())
    assert are_isomorphic(prod, a)
    rr, _ = product(ring(0, 0), ring(0, 0))
    assert all(rr.module(m).as_dict() == {(0, 0): 2} for m in range(4))
    lr, _ = product(lambda_(1), ring(0, 0))
    assert lr.module(0).as_dict() == {(0, 0): 3, (-1, 0): 1}


def test_pullback_refuses_non_surjection():
    zero = SpectralMorphism.zero(final_object(), ring(0, 0))
    with pytest.raises(NotASurjection):
        pullback_surjection(zero, fixture_pi_T())


def test_pullback_along_identity_and_path_endpoint():
    a = fixture_S()
    one = SpectralMorphism.identity(a)
    x, pu, pa = pullback_surjection(one, one)
    assert are_isomorphic(x, a)
    pb = path(0, ring(0, 0))
    x, pu, pa = pullback_surjection(SpectralMorphism.identity(ring(0, 0)), pb.minus)
    assert are_isomorphic(x, pb.P)


# -- properties on generated samples ------------------------------------------------


@given(seeds)
def test_generated_pages_satisfy_homology_dimension_law(seed):
    s = gen_spectral(small_spec(), np.random.default_rng(seed))
    assert validate_spectral_sequence(s)
    for m in range(s.M):
        h = homology(s.page(m)).H
        assert all(h.dim(bd) == s.module(m + 1).dim(bd) for bd in set(h.support()) | set(s.module(m + 1).support()))


@given(seeds)
def test_derive_then_forget_round_trip(seed):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a, b = gen_spectral(spec, rng), gen_spectral(spec, rng)
    f = _any_morphism(spec, a, b, rng)
    g = derive_morphism(f.f0, a, b)
    assert g.f0 == f.f0
    assert all(g.map(m) == f.map(m) for m in range(max(a.M, b.M) + 1))


@given(seeds, st.integers(0, 2))
def test_acyclic_is_surjective_quasi_iso_and_monotone(seed, r):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a = gen_spectral(spec, rng)
    for f in (_any_morphism(spec, a, gen_spectral(spec, rng), rng), _acyclic_fibration(spec, rng, a, r)):
        assert is_acyclic_r_fibration(f, r) == (is_Er_quasi_iso(f, r) and is_surjection(f))
        if is_Er_quasi_iso(f, r):
            assert is_Er_quasi_iso(f, r + 1)
        if is_r_fibration(f, r + 1):
            assert is_r_fibration(f, r)
    assert is_acyclic_r_fibration(_acyclic_fibration(spec, rng, a, r), r)


@given(seeds, st.integers(0, 2))
def test_pullback_universal_property(seed, r):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a = gen_spectral(spec, rng)
    p = _acyclic_fibration(spec, rng, a, r)
    u = gen_spectral(spec, rng)
    g = _any_morphism(spec, u, a, rng)
    x, pu, pa = pullback_surjection(g, p)
    assert g @ pu == p @ pa
    assert is_surjection(pu)
    w = gen_spectral(spec, rng)
    m0 = _any_morphism(spec, w, x, rng)
    space = solve_morphisms(w, x, post=[(pu, pu @ m0), (pa, pa @ m0)])
    assert not space.empty and space.dim == 0
    assert space.point(np.zeros(0, dtype=np.int64)) == m0


@given(seeds)
def test_isomorphism_search_finds_conjugates(seed):
    rng = np.random.default_rng(seed)
    a = gen_spectral(small_spec(), rng)
    iso = find_isomorphism(a, a, rng=rng)
    assert iso is not None and iso.f0.is_iso()
    if not a.module(0).is_zero():
        assert find_isomorphism(a, product(a, ring(9, 9))[0]) is None


def test_hom_space_dimensions():
    assert hom_space(ring(0, 0), ring(0, 0)).dim == 1
    assert hom_space(ring(0, 0), ring(1, 0)).dim == 0
    # maps R(0,0) -> T: page 0 needs d_0 f = 0, so f(0,0) = 0
    assert hom_space(ring(0, 0), fixture_T()).dim == 0
