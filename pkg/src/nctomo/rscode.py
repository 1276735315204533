"""Sparse recovery with a Reed-Solomon parity-check matrix.

``H`` has one column per locator ``h``: ``[h, h**2, ..., h**depth]``. Given
``e = H b`` with ``b`` sparse, the entries of ``e`` are power sums, so ``b``
is recovered by ordinary syndrome decoding: Berlekamp-Massey for the locator
polynomial, a scan of the locator list for its roots, then Forney's formula
for the magnitudes. The core loop lives in ``_kernels``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _kernels, linalg
from .errors import DecodeFailure, InvalidIdError, UsageError
from .field import field_inv


@dataclass(frozen=True)
class RsParitySpec:
    locators: tuple
    depth: int
    q: int
    _inv: np.ndarray = field(init=False, repr=False, compare=False)
    _pos: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        locs = tuple(int(h) % self.q for h in self.locators)
        object.__setattr__(self, "locators", locs)
        if any(h == 0 for h in locs):
            raise InvalidIdError("locators must be nonzero")
        if len(set(locs)) != len(locs):
            raise InvalidIdError("locators must be pairwise distinct")
        if self.depth < 1 or len(locs) <= self.depth:
            raise UsageError(f"need len(locators) > depth >= 1, got {len(locs)} and {self.depth}")
        inv = np.array([field_inv(h, self.q) for h in locs], dtype=np.int64)
        object.__setattr__(self, "_inv", inv)
        object.__setattr__(self, "_pos", {h: i for i, h in enumerate(locs)})

    @property
    def length(self) -> int:
        return len(self.locators)

    def matrix(self) -> np.ndarray:
        return linalg.vandermonde(self.locators, self.depth, self.q)

    def index_of(self, locator: int) -> int:
        return self._pos[int(locator) % self.q]


_FAILURES = {
    1: "locator degree outside the correctable range",
    2: "locator polynomial does not split over the locator list",
    3: "degenerate magnitude",
}


def rs_syndrome(spec: RsParitySpec, b: Mapping[int, int]) -> np.ndarray:
    """``H b`` for a sparse ``b`` given as ``{index: value}``."""
    q = spec.q
    out = [0] * spec.depth
    for idx, val in b.items():
        if not 0 <= idx < spec.length:
            raise UsageError(f"index {idx} outside [0, {spec.length})")
        h = spec.locators[idx]
        p = val % q
        for k in range(spec.depth):
            p = p * h % q
            out[k] = (out[k] + p) % q
    return np.array(out, dtype=np.int64)


def rs_decode(spec: RsParitySpec, e, z_max: int) -> dict:
    """The unique ``b`` with at most ``z_max`` nonzeros and ``H b = e``.

    Returns ``{index: value}`` sorted by index. Raises ``DecodeFailure`` when
    no such ``b`` exists.
    """
    q = spec.q
    if z_max < 0 or 2 * z_max > spec.depth:
        raise UsageError(f"z_max={z_max} exceeds half the depth {spec.depth}")
    syn = [int(x) % q for x in np.asarray(e).reshape(-1)]
    if len(syn) != spec.depth:
        raise UsageError(f"syndrome length {len(syn)} != depth {spec.depth}")
    if not any(syn):
        return {}
    syn_arr = np.array(syn, dtype=np.int64)
    status, idx, mags = _kernels.rs_decode_kernel(syn_arr, spec._inv, z_max, q)
    if status:
        raise DecodeFailure(_FAILURES[int(status)])
    out = {int(i): int(v) for i, v in zip(idx, mags)}
    if not np.array_equal(rs_syndrome(spec, out), syn_arr):
        raise DecodeFailure("candidate does not reproduce the syndrome")
    return out
