import numpy as np
import pytest
from hypothesis import given, strategies as st

from nctomo.errors import FieldMismatchError, UsageError
from nctomo.field import GF, FieldElement, field_arith, field_inv, field_pow, is_prime

F7 = GF(7)


@pytest.mark.parametrize(
    "op,a,b,want",
    [("mul", 3, 5, 1), ("add", 6, 1, 0), ("sub", 0, 1, 6)],
)
def test_arith_examples(op, a, b, want):
    assert field_arith(op, F7(a), F7(b)).value == want


def test_mismatched_moduli():
    with pytest.raises(FieldMismatchError):
        field_arith("add", GF(7)(1), GF(11)(1))
    with pytest.raises(UsageError):
        F7.arith("div", F7(1), F7(2))


def test_inverse_examples():
    assert field_inv(1, 7) == 1
    assert field_inv(3, 7) == 5
    assert F7.inv(F7(3)).value == 5
    with pytest.raises(ZeroDivisionError):
        field_inv(0, 7)


def test_pow_examples():
    assert field_pow(3, 2, 7) == 2
    assert field_pow(5, 0, 7) == 1
    assert field_pow(0, 0, 7) == 1
    assert field_pow(2, 6, 7) == 1
    assert (F7(3) ** 2).value == 2


def test_field_rejects_bad_modulus():
    with pytest.raises(UsageError):
        GF(8)
    with pytest.raises(UsageError):
        GF(2**61 - 1)  # prime but too wide for int64 products
    assert is_prime(2**31 - 1) and not is_prime(2**31 + 1)


def test_element_range_invariant():
    with pytest.raises(UsageError):
        FieldElement(7, 7)


def test_sampling_deterministic_and_in_range():
    a = [GF().sample(np.random.default_rng(5)).value for _ in range(3)]
    b = [GF().sample(np.random.default_rng(5)).value for _ in range(3)]
    assert a == b and all(0 <= v < 2**31 - 1 for v in a)


def test_sampling_uniform_gf7():
    rng = np.random.default_rng(2024)
    draws = F7.random_matrix(rng, 100_000)
    counts = np.bincount(draws, minlength=7)
    p = 1 / 7
    sigma = np.sqrt(100_000 * p * (1 - p))
    assert np.all(np.abs(counts - 100_000 * p) < 5 * sigma)


elems = st.integers(0, 2**31 - 2)


@given(elems, elems, elems)
def test_field_axioms(a, b, c):
    F = GF()
    x, y, w = F(a), F(b), F(c)
    assert (x + y) + w == x + (y + w)
    assert (x * y) * w == x * (y * w)
    assert x * (y + w) == x * y + x * w
    assert x - x == F(0)
    if a:
        assert x * x.inverse() == F(1)
        assert (x ** (F.q - 1)).value == 1
