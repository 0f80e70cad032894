import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import seeds, small_spec
from spseq.errors import UnsupportedGenerator
from spseq.harness import _acyclic_fibration, _any_morphism, _fuzzed_morphism, gen_spectral
from spseq.linalg import get_field, rank, solve
from spseq.paths import lambda_, mapping_path_space, path
from spseq.representables import (
    Generator,
    I,
    J,
    acyclic_rfib_via_rlp,
    disk,
    disk_coordinates,
    disk_space,
    generators_J,
    has_rlp,
    hom_from_disk,
    rfib_via_rlp,
    sphere,
    varphi,
)
from spseq.spectral import (
    SpectralMorphism,
    final_object,
    fixture_pi_T,
    fixture_S,
    is_acyclic_r_fibration,
    is_r_fibration,
    product,
    validate_spectral_sequence,
)

from test_spectral import pair


def test_disk_zero():
    d = disk(0, 0, 0)
    assert d.module(0).as_dict() == {(0, 0): 1, (0, 1): 1}
    assert d.d(0).block((0, 0)).tolist() == [[1]]
    assert d.module(1).is_zero() and d.module(5).is_zero()


def test_disk_r_pages():
    d = disk(2, 1, 0)
    assert d.module(0).as_dict() == {(1, 0): 1, (-1, -1): 1}
    assert d.d(0).is_zero() and d.d(1).is_zero()
    assert d.d(2).block((1, 0)).tolist() == [[1]]
    assert d.module(3).is_zero()


def test_sphere_one_is_two_small_disks():
    s = sphere(1, 0, 0)
    expected, _ = product(disk(0, -1, -1), disk(0, 0, -1))
    for m in range(3):
        assert s.module(m) == expected.module(m)
        assert s.d(m) == expected.d(m)


def test_sphere_needs_positive_r():
    with pytest.raises(ValueError):
        sphere(0, 0, 0)


@pytest.mark.parametrize("r", range(4))
def test_generators_validate_over_window(r):
    for p, n in itertools.product(range(-4, 5), repeat=2):
        assert validate_spectral_sequence(disk(r, p, n))
        if r:
            assert validate_spectral_sequence(sphere(r, p, n))


@pytest.mark.parametrize("r", range(1, 4))
def test_varphi_is_a_morphism_onto_the_top_generators(r):
    f = varphi(r, 0, 0)
    assert f.source.name.startswith("D_") and f.target.name.startswith("S_")
    assert all(f.map(m).is_injective() for m in range(r))


def test_disk_space_examples():
    assert disk_space(1, 0, 0, final_object()).dim == 0
    assert hom_from_disk(1, 0, 0, final_object()) == []
    assert disk_space(1, 0, 0, lambda_(1)).dim == 2
    assert len(hom_from_disk(1, 0, 0, lambda_(1))) == 2
    for r in range(3):
        d = disk(r, 0, 1)
        space = disk_space(r, 0, 1, d)
        assert space.dim >= 1
        tautological = disk_coordinates(SpectralMorphism.identity(d), r, 0, 1)
        assert solve(space.basis, tautological) is not None


@given(seeds, st.integers(0, 2), st.integers(-1, 1), st.integers(-1, 1))
def test_disk_space_round_trip_and_naturality(seed, r, p, n):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    a, b = gen_spectral(spec, rng), gen_spectral(spec, rng)
    sa, sb = disk_space(r, p, n, a), disk_space(r, p, n, b)
    maps = hom_from_disk(r, p, n, a, sa)
    assert len(maps) == sa.dim
    coords = [disk_coordinates(k, r, p, n) for k in maps]
    for j, c in enumerate(coords):
        assert np.array_equal(c, sa.basis[:, j])
    if coords:
        assert rank(np.stack(coords, axis=1)) == sa.dim
    f = _any_morphism(spec, a, b, rng)
    for k in maps:
        moved = disk_coordinates(f @ k, r, p, n)
        if np.any(moved):
            assert solve(sb.basis, moved) is not None


def test_lifting_examples():
    a = fixture_S()
    one = SpectralMorphism.identity(a)
    for gen in [J(k, p, n) for k in range(3) for p in range(-1, 2) for n in range(-1, 2)] + [I(1, 0, 0), I(0, 1, 0)]:
        assert has_rlp(one, gen)
    for r in range(3):
        pb = path(r, a)
        f = pair(pb.minus, pb.plus)
        assert all(has_rlp(f, g) for k in range(r + 1) for g in generators_J(f, k))
    pi = fixture_pi_T()
    assert not has_rlp(pi, J(1, 0, 0))
    assert not rfib_via_rlp(pi, 1)
    with pytest.raises(UnsupportedGenerator):
        Generator("K", 0, 0, 0)
    with pytest.raises(UnsupportedGenerator):
        has_rlp(pi, ("J", 0, 0, 0))


@given(seeds, st.integers(0, 2))
def test_lifting_characterizes_fibrations(seed, r):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    for f in (_fuzzed_morphism(spec, rng, r), _acyclic_fibration(spec, rng, gen_spectral(spec, rng), r)):
        assert rfib_via_rlp(f, r) == is_r_fibration(f, r)
        assert acyclic_rfib_via_rlp(f, r) == is_acyclic_r_fibration(f, r)


@given(seeds, st.integers(0, 2))
def test_mapping_path_projection_lifts(seed, r):
    rng = np.random.default_rng(seed)
    spec = small_spec()
    u = _any_morphism(spec, gen_spectral(spec, rng), gen_spectral(spec, rng), rng)
    assert rfib_via_rlp(mapping_path_space(r, u).p, r)
