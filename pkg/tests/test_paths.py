import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import seeds, small_spec
from spseq.bigraded import BigradedMap, direct_sum
from spseq.errors import NotAMorphism
from spseq.harness import _any_morphism, gen_spectral
from spseq.paths import (
    find_r_homotopy,
    homotopy_from_morphism,
    homotopy_to_morphism,
    induced_on_mapping_path,
    is_r_homotopy,
    is_r_homotopy_equivalence,
    lambda_,
    mapping_path_space,
    path,
    path_contraction,
    path_morphism,
)
from spseq.representables import disk
from spseq.spectral import (
    SpectralMorphism,
    fixture_f_S,
    inclusions,
    is_acyclic_r_fibration,
    is_Er_quasi_iso,
    is_r_fibration,
    product,
    ring,
    solve_morphisms,
    validate_spectral_sequence,
)

from test_spectral import pair


def dims(s, m):
    return s.module(m).as_dict()


def test_lambda_zero():
    lam = lambda_(0)
    assert dims(lam, 0) == {(0, 0): 2, (0, 1): 1}
    # basis (e_-, e_+): d e_- = -u, d e_+ = u
    assert lam.d(0).block((0, 0)).tolist() == [[6, 1]]
    assert all(dims(lam, m) == {(0, 0): 1} for m in (1, 2, 5))


def test_lambda_one():
    lam = lambda_(1)
    assert dims(lam, 0) == dims(lam, 1) == {(0, 0): 2, (-1, 0): 1}
    assert lam.d(0).is_zero()
    assert lam.d(1).block((0, 0)).tolist() == [[6, 1]]
    assert dims(lam, 2) == {(0, 0): 1}


@pytest.mark.parametrize("r", range(5))
def test_lambda_validates(r):
    assert validate_spectral_sequence(lambda_(r))


def test_path_of_ring_at_r_zero():
    pb = path(0, ring(0, 0))
    assert dims(pb.P, 0) == {(0, 0): 2, (0, 1): 1}
    assert all(dims(pb.P, m) == {(0, 0): 1} for m in (1, 2))


@pytest.mark.parametrize("r", range(4))
def test_path_of_ring_is_lambda(r):
    pb = path(r, ring(0, 0))
    lam = lambda_(r)
    for m in range(r + 3):
        assert pb.P.module(m) == lam.module(m)
        assert pb.P.d(m) == lam.d(m)


@given(seeds, st.integers(0, 2))
def test_path_object_contracts(seed, r):
    rng = np.random.default_rng(seed)
    a = gen_spectral(small_spec(), rng)
    pb = path(r, a)
    one = SpectralMorphism.identity(a)
    assert pb.minus @ pb.iota == one and pb.plus @ pb.iota == one
    assert is_Er_quasi_iso(pb.iota, r)
    assert is_acyclic_r_fibration(pb.minus, r) and is_acyclic_r_fibration(pb.plus, r)
    assert is_r_fibration(pair(pb.minus, pb.plus), r)


@given(seeds, st.integers(0, 2))
def test_path_support_matches_naive_tensor(seed, r):
    a = gen_spectral(small_spec(), np.random.default_rng(seed))
    p0 = path(r, a).P.module(0)
    expected = {}
    for (p, q), k in a.module(0).items():
        expected[(p, q)] = expected.get((p, q), 0) + 2 * k
        mid = (p - r, q + 1 - r)
        expected[mid] = expected.get(mid, 0) + k
    assert p0.as_dict() == {bd: k for bd, k in expected.items() if k}


def test_path_morphism_identity_zero_and_sign():
    a = fixture_f_S().target
    pb = path(1, a)
    assert path_morphism(1, SpectralMorphism.identity(a)) == SpectralMorphism.identity(pb.P)
    assert path_morphism(1, SpectralMorphism.zero(a, a)).f0.is_zero()
    f = fixture_f_S()
    pf = path_morphism(1, f)
    # the middle summand of P(1;R(0,0)) sits at (-1,0) and carries +f_1
    assert pf.map(1).block((-1, 0)).tolist() == [[1]]
    # a sign on the middle block of any page stops it being a morphism
    with pytest.raises(NotAMorphism):
        path_morphism(1, f, middle_signs=[1, -1])


def test_mapping_path_space_of_identity():
    a = ring(0, 0)
    mp = mapping_path_space(0, SpectralMorphism.identity(a))
    assert dims(mp.Pbar, 0) == {(0, 0): 2, (0, 1): 1}
    assert dims(mp.Pbar, 1) == {(0, 0): 1}
    assert mp.p @ mp.i == mp.u
    assert mp.rho @ mp.i == SpectralMorphism.identity(a)


def test_mapping_path_space_of_zero_and_of_f_s():
    a = lambda_(1)
    b = ring(0, 0)
    mp = mapping_path_space(1, SpectralMorphism.zero(a, b))
    assert mp.i.f0.block((0, 0))[:2].tolist() == [[1, 0], [0, 1]]
    assert all(mp.p.map(m).is_surjective() for m in range(2))
    mp = mapping_path_space(1, fixture_f_S())
    assert is_r_fibration(mp.p, 1) and is_acyclic_r_fibration(mp.rho, 1)
    assert mp.p @ mp.i == mp.u


@given(seeds, st.integers(0, 2))
def test_factorization_contracts(seed, r):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a, b = gen_spectral(spec, rng), gen_spectral(spec, rng)
    u = _any_morphism(spec, a, b, rng)
    mp = mapping_path_space(r, u)
    assert validate_spectral_sequence(mp.Pbar)
    assert mp.p @ mp.i == u
    assert mp.rho @ mp.i == SpectralMorphism.identity(a)
    assert is_r_fibration(mp.p, r) and is_acyclic_r_fibration(mp.rho, r)


@given(seeds, st.integers(0, 2), st.booleans())
def test_factorization_is_functorial(seed, r, top_is_identity):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a, b, c = (gen_spectral(spec, rng) for _ in range(3))
    if top_is_identity:
        u = _any_morphism(spec, a, b, rng)
        bottom = _any_morphism(spec, b, c, rng)
        top, u2 = SpectralMorphism.identity(a), bottom @ u
    else:
        top = _any_morphism(spec, c, a, rng)
        u2 = _any_morphism(spec, a, b, rng)
        u, bottom = u2 @ top, SpectralMorphism.identity(b)
    x, y = mapping_path_space(r, u), mapping_path_space(r, u2)
    k = induced_on_mapping_path(x, y, top, bottom)
    assert k @ x.i == y.i @ top
    assert y.p @ k == bottom @ x.p


def test_homotopy_examples():
    a = fixture_f_S().target
    one = SpectralMorphism.identity(a)
    for r in range(3):
        h = find_r_homotopy(one, one, r)
        assert h is not None and is_r_homotopy(h)
        assert all(x.is_zero() for x in h.hats)
        pb = path(r, a)
        w = path_contraction(pb)
        assert is_r_homotopy(w)
        assert w.g == pb.iota @ pb.minus
    r00 = ring(0, 0)
    for r in range(3):
        assert find_r_homotopy(SpectralMorphism.identity(r00), SpectralMorphism.zero(r00, r00), r) is None


def test_homotopy_equivalences():
    a = fixture_f_S().target
    for r in range(3):
        found = is_r_homotopy_equivalence(SpectralMorphism.identity(a), r)
        assert found is not None
        g, h1, h2 = found
        assert is_r_homotopy(h1) and is_r_homotopy(h2)
        pb = path(r, a)
        g, h1, h2 = is_r_homotopy_equivalence(pb.iota, r)
        assert is_r_homotopy(h1) and is_r_homotopy(h2)
        prod, _ = product(ring(0, 0), disk(r, 1, 0))
        incl = inclusions(prod, [ring(0, 0), disk(r, 1, 0)])[0]
        found = is_r_homotopy_equivalence(incl, r)
        assert found is not None and is_Er_quasi_iso(incl, r)


@given(seeds, st.integers(0, 2))
def test_homotopy_relation_closure(seed, r):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a, b, c = (gen_spectral(spec, rng) for _ in range(3))
    pb = path(r, b)
    h = homotopy_from_morphism(_any_morphism(spec, a, pb.P, rng), pb)
    assert is_r_homotopy(h)
    assert homotopy_to_morphism(h, pb).f0 == homotopy_to_morphism(h).f0
    assert is_r_homotopy(h.reversed())
    nxt = solve_morphisms(a, pb.P, post=[(pb.minus, h.g)])
    h2 = homotopy_from_morphism(nxt.random(rng), pb)
    assert is_r_homotopy(h.then(h2))
    assert is_r_homotopy(h.post(_any_morphism(spec, b, c, rng)))
    assert is_r_homotopy(h.pre(_any_morphism(spec, c, a, rng)))
    found = find_r_homotopy(h.f, h.g, r)
    assert found is not None and is_r_homotopy(found)


@given(seeds, st.integers(0, 1))
def test_homotopy_equivalences_are_weak_equivalences(seed, r):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a, b = gen_spectral(spec, rng), gen_spectral(spec, rng)
    f = _any_morphism(spec, a, b, rng)
    if is_r_homotopy_equivalence(f, r) is not None:
        assert is_Er_quasi_iso(f, r)
