"""Prime-field arithmetic GF(q)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FieldMismatchError, UsageError

DEFAULT_Q = 2**31 - 1
# kernels multiply two residues in int64
MAX_Q = 2**31

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldElement:
    value: int
    q: int

    def __post_init__(self):
        if not 0 <= self.value < self.q:
            raise UsageError(f"residue {self.value} outside [0, {self.q})")

    def _check(self, other: FieldElement) -> None:
        if not isinstance(other, FieldElement):
            raise FieldMismatchError(f"expected FieldElement, got {type(other).__name__}")
        if other.q != self.q:
            raise FieldMismatchError(f"moduli differ: {self.q} vs {other.q}")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement((self.value + other.value) % self.q, self.q)

    def __sub__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement((self.value - other.value) % self.q, self.q)

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.value * other.value % self.q, self.q)

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.value % self.q, self.q)

    def __pow__(self, k: int) -> FieldElement:
        return FieldElement(field_pow(self.value, k, self.q), self.q)

    def __truediv__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return self * other.inverse()

    def inverse(self) -> FieldElement:
        return FieldElement(field_inv(self.value, self.q), self.q)

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.q})"


def field_inv(a: int, q: int) -> int:
    a %= q
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    return pow(a, q - 2, q)


def field_pow(a: int, k: int, q: int) -> int:
    """Square-and-multiply; a**0 == 1 even for a == 0."""
    if k < 0:
        raise UsageError("negative exponent")
    result, base = 1 % q, a % q
    while k:
        if k & 1:
            result = result * base % q
        base = base * base % q
        k >>= 1
    return result


class GF:
    """The field of residues modulo a prime ``q``."""

    def __init__(self, q: int = DEFAULT_Q):
        q = int(q)
        if not is_prime(q):
            raise UsageError(f"modulus {q} is not prime")
        if q >= MAX_Q:
            raise UsageError(f"modulus {q} must be below 2**31")
        self.q = q

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(int(value) % self.q, self.q)

    def __eq__(self, other) -> bool:
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("GF", self.q))

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def _own(self, a: FieldElement) -> FieldElement:
        if not isinstance(a, FieldElement) or a.q != self.q:
            raise FieldMismatchError(f"{a!r} is not an element of {self!r}")
        return a

    def arith(self, op: str, a: FieldElement, b: FieldElement) -> FieldElement:
        a, b = self._own(a), self._own(b)
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        raise UsageError(f"unknown operation {op!r}")

    def add(self, a, b):
        return self.arith("add", a, b)

    def sub(self, a, b):
        return self.arith("sub", a, b)

    def mul(self, a, b):
        return self.arith("mul", a, b)

    def inv(self, a: FieldElement) -> FieldElement:
        return self._own(a).inverse()

    def pow(self, a: FieldElement, k: int) -> FieldElement:
        return self._own(a) ** k

    def sample(self, rng: np.random.Generator) -> FieldElement:
        return FieldElement(int(rng.integers(0, self.q)), self.q)

    def sample_nonzero(self, rng: np.random.Generator) -> FieldElement:
        return FieldElement(int(rng.integers(1, self.q)), self.q)

    def random_matrix(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=np.int64)


def field_arith(op: str, a: FieldElement, b: FieldElement) -> FieldElement:
    """Module-level form of :meth:`GF.arith`; the field is taken from ``a``."""
    return GF(a.q).arith(op, a, b)
