import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import oracle_rank
from spseq.errors import DimensionMismatch
from spseq.linalg import (
    Field,
    complement_in,
    get_field,
    image_basis,
    intersect,
    inverse,
    kernel_basis,
    left_inverse_rows,
    parse_field,
    rank,
    rref,
    solve,
    use_field,
)


def small_matrices(max_rows=3, max_cols=4):
    return st.tuples(st.integers(0, max_rows), st.integers(0, max_cols)).flatmap(
        lambda rc: st.lists(st.integers(-6, 6), min_size=rc[0] * rc[1], max_size=rc[0] * rc[1]).map(
            lambda xs, rc=rc: (rc, xs)
        )
    )


def as_field(spec):
    (rows, cols), xs = spec
    return get_field().array(np.array(xs, dtype=np.int64).reshape(rows, cols))


def test_rank_examples():
    F = get_field()
    assert rank(F.eye(2)) == 2
    assert rank(F.zeros(3, 4)) == 0
    assert rank(F.array([[1, 2], [2, 4]])) == 1


def test_kernel_examples():
    F = get_field()
    assert kernel_basis(F.eye(3)).shape == (3, 0)
    assert kernel_basis(F.zeros(1, 2)).shape == (2, 2)
    k = kernel_basis(F.array([[1, 2], [2, 4]]))
    assert k.shape == (2, 1)
    # a nonzero multiple of (2, -1)
    assert k[1, 0] != 0 and (k[0, 0] + 2 * k[1, 0]) % 7 == 0
    assert not np.any(F.matmul(F.array([[1, 2], [2, 4]]), k))


def test_solve_examples():
    F = get_field()
    b = F.array([3, 5, 1])
    assert np.array_equal(solve(F.eye(3), b), b)
    assert solve(F.zeros(2, 2), F.array([1, 0])) is None
    with pytest.raises(DimensionMismatch):
        solve(F.eye(2), F.array([1, 2, 3]))


def test_complement_example():
    F = get_field()
    c = complement_in(F.array([[1], [0]]), 2)
    assert c.shape == (2, 1)
    assert rank(np.concatenate([F.array([[1], [0]]), c], axis=1)) == 2
    with pytest.raises(DimensionMismatch):
        complement_in(F.array([[1], [0]]), 3)


def test_rational_entries_stay_exact():
    with use_field("Q") as F:
        m = F.array([[1, 3], [2, 7]])
        inv = inverse(m)
        assert F.format(inv[0, 0]) == "7"
        half = F.inv(F.scalar(2))
        assert F.format(half) == "1/2"
        assert F.parse("-3/6") == F.scalar(-1) * half


def test_field_parsing():
    assert parse_field("Q").p is None
    assert parse_field("Fp:11").p == 11
    for bad in ("Fp:4", "Fp:1", "R", "Fp:x"):
        with pytest.raises(ValueError):
            parse_field(bad)


def test_singular_inverse():
    with pytest.raises(ZeroDivisionError):
        inverse(get_field().array([[1, 2], [2, 4]]))


@given(small_matrices())
def test_rank_matches_enumeration_oracle(spec):
    m = as_field(spec)
    assert rank(m) == oracle_rank(m, get_field())


@given(small_matrices())
def test_rank_nullity_over_q(spec):
    with use_field("Q") as F:
        m = as_field(spec)
        assert rank(m) == oracle_rank(m, F)
        k = kernel_basis(m)
        assert rank(m) + k.shape[1] == m.shape[1]
        assert not np.any(F.matmul(m, k)) if m.size else True


@given(small_matrices(), st.lists(st.integers(-6, 6), min_size=3, max_size=3))
def test_solve_iff_rank_condition(spec, rhs):
    F = get_field()
    m = as_field(spec)
    b = F.array(rhs[: m.shape[0]])
    x = solve(m, b)
    solvable = rank(np.concatenate([m, b.reshape(-1, 1)], axis=1)) == rank(m) if m.shape[0] else True
    assert (x is not None) == solvable
    if x is not None and m.shape[0]:
        assert np.array_equal(F.matmul(m, x.reshape(-1, 1)).ravel(), b)


@given(small_matrices())
def test_image_kernel_and_complement(spec):
    F = get_field()
    m = as_field(spec)
    img = image_basis(m)
    assert img.shape[1] == rank(m)
    comp = complement_in(img, m.shape[0])
    assert img.shape[1] + comp.shape[1] == m.shape[0]
    assert rank(np.concatenate([img, comp], axis=1)) == m.shape[0]
    if img.shape[1]:
        p = left_inverse_rows(img, m.shape[0])
        assert np.array_equal(F.matmul(p, img), F.eye(img.shape[1]))


@given(small_matrices(3, 3), small_matrices(3, 3))
def test_intersection_dimension(a, b):
    F = get_field()
    u = image_basis(as_field(a))
    v = image_basis(as_field(b))
    if u.shape[0] != v.shape[0]:
        return
    both = np.concatenate([u, v], axis=1)
    expected = u.shape[1] + v.shape[1] - rank(both) if both.size else 0
    assert intersect(u, v).shape[1] == expected


@given(small_matrices())
def test_elimination_is_deterministic(spec):
    m = as_field(spec)
    r1, p1 = rref(m)
    r2, p2 = rref(m.copy())
    assert p1 == p2 and np.array_equal(r1, r2)


def test_field_context_nests():
    assert get_field() == Field(7)
    with use_field("Fp:3"):
        assert get_field().p == 3
        with use_field("Q"):
            assert get_field().p is None
        assert get_field().p == 3
    assert get_field().p == 7
