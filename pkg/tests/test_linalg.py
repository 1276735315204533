import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nctomo import linalg
from nctomo.errors import InvalidIdError, SingularMatrixError, UsageError


def span(cols, q):
    """Every vector in the column span, by enumeration (oracle)."""
    cols = np.asarray(cols, dtype=np.int64)
    out = set()
    for coef in itertools.product(range(q), repeat=cols.shape[1]):
        out.add(tuple(int(x) for x in cols @ np.array(coef, dtype=np.int64) % q))
    return out


def test_rank_examples():
    assert linalg.rank(np.eye(2, dtype=np.int64), 7) == 2
    assert linalg.rank(np.zeros((2, 2), dtype=np.int64), 7) == 0
    assert linalg.rank([[1, 2], [2, 4]], 7) == 1


def test_invert_examples():
    assert np.array_equal(linalg.invert(np.eye(2), 7), np.eye(2))
    assert linalg.invert([[2, 0], [0, 1]], 7).tolist() == [[4, 0], [0, 1]]
    with pytest.raises(SingularMatrixError):
        linalg.invert([[1, 1], [2, 2]], 7)


def test_contains_examples(two_path):
    net, asg, (e1, e2, e3, e4, e5) = two_path
    from nctomo.codes import compute_irvs

    t = compute_irvs(net, asg)
    assert linalg.col_space_contains(np.eye(2, dtype=np.int64), [3, 4], 7)
    assert not linalg.col_space_contains([[1], [0]], [0, 1], 7)
    assert linalg.col_space_contains(t.matrix([e2, e3]), t.irv[e5], asg.q)


def test_intersect_examples():
    assert linalg.col_space_intersect(np.eye(2), np.eye(2), 7).shape[1] == 2
    assert linalg.col_space_intersect([[1], [0]], [[0], [1]], 7).shape == (2, 0)


def test_intersect_fake_candidate():
    # three independent IRVs and a fourth equal to t2 + 2 t3 + t4
    q = 7
    t2, t3, t4 = np.eye(3, dtype=np.int64)
    t1 = (t2 + 2 * t3 + t4) % q
    a = np.stack([t2, t3], axis=1)
    b = np.stack([t1, t4], axis=1)
    inter = linalg.col_space_intersect(a, b, q)
    assert inter.shape[1] == 1
    assert linalg.canonical_line(inter[:, 0], q) == linalg.canonical_line(t2 + 2 * t3, q)


def test_vandermonde_examples():
    v = linalg.vandermonde([2, 3], 2, 7)
    assert v.tolist() == [[2, 3], [4, 2]]
    assert linalg.rank(v, 7) == 2
    with pytest.raises(InvalidIdError):
        linalg.vandermonde([2, 2], 2, 7)
    with pytest.raises(InvalidIdError):
        linalg.vandermonde([0, 1], 2, 7)


def test_canonical_line_examples():
    assert linalg.canonical_line([0, 2], 7) == (0, 1)
    assert linalg.canonical_line([3, 2], 7) == (1, 3)
    with pytest.raises(UsageError):
        linalg.canonical_line([0, 0], 7)


def test_solve_and_null_space():
    q = 11
    a = np.array([[1, 2, 3], [2, 4, 6]])
    ns = linalg.null_space(a, q)
    assert ns.shape[1] == 2 and not (a @ ns % q).any()
    assert linalg.solve([[1, 1], [1, 1]], [1, 2], q) is None
    x = linalg.solve([[2, 1], [1, 3]], [3, 4], q)
    assert ((np.array([[2, 1], [1, 3]]) @ x) % q).tolist() == [3, 4]


small = st.lists(st.integers(0, 4), min_size=6, max_size=6)


@settings(max_examples=60, deadline=None)
@given(small, small)
def test_rank_and_intersection_match_enumeration(a, b):
    q = 5
    A = np.array(a, dtype=np.int64).reshape(3, 2)
    B = np.array(b, dtype=np.int64).reshape(3, 2)
    sa, sb = span(A, q), span(B, q)
    assert q ** linalg.rank(A, q) == len(sa)
    inter = linalg.col_space_intersect(A, B, q)
    got = span(inter, q) if inter.shape[1] else {(0, 0, 0)}
    assert got == sa & sb


mats = st.integers(0, 2**31 - 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.randoms(use_true_random=False))
def test_dimension_formula(rows, ka, kb, rnd):
    q = 2**31 - 1
    rng = np.random.default_rng(rnd.randint(0, 2**32))
    A = rng.integers(0, q, size=(rows, ka))
    B = np.concatenate([A[:, : ka // 2], rng.integers(0, q, size=(rows, kb))], axis=1)
    inter = linalg.col_space_intersect(A, B, q)
    ab = np.concatenate([A, B], axis=1)
    assert linalg.rank(A, q) + linalg.rank(B, q) == linalg.rank(ab, q) + linalg.rank(inter, q) if inter.size else True
    assert linalg.rank(A, q) + linalg.rank(B, q) == linalg.rank(ab, q) + inter.shape[1]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.randoms(use_true_random=False))
def test_inverse_property(n, rnd):
    q = 2**31 - 1
    rng = np.random.default_rng(rnd.randint(0, 2**32))
    m = rng.integers(0, q, size=(n, n))
    try:
        inv = linalg.invert(m, q)
    except SingularMatrixError:
        return
    eye = np.eye(n, dtype=np.int64)
    assert np.array_equal(linalg.matmul(inv, m, q), eye)
    assert np.array_equal(linalg.matmul(m, inv, q), eye)


@settings(max_examples=40, deadline=None)
@given(st.sets(st.integers(1, 100), min_size=1, max_size=8))
def test_vandermonde_square_invertible(ids):
    q = 101
    v = linalg.vandermonde(sorted(ids), len(ids), q)
    assert linalg.rank(v, q) == len(ids)


@given(st.lists(st.integers(0, 12), min_size=3, max_size=3).filter(any), st.integers(1, 12))
def test_canonical_line_scale_invariant(v, alpha):
    q = 13
    scaled = [x * alpha % q for x in v]
    assert linalg.canonical_line(scaled, q) == linalg.canonical_line(v, q)
