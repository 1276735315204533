"""Hot GF(q) kernels with a numba path and a pure-numpy path.

All kernels work on int64 arrays of residues in [0, q) with q < 2**31, so
a single product of two residues fits in int64 without overflow.

The numba path is used when numba imports cleanly and the environment
variable ``NCTOMO_DISABLE_JIT`` is unset (or set to ``0``). Both paths are
always importable under explicit names so they can be compared directly.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("NCTOMO_DISABLE_JIT", "0").strip().lower()
JIT_REQUESTED = _FLAG not in ("1", "true", "yes", "on")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_JIT = HAS_NUMBA and JIT_REQUESTED


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------


def _modinv_py(a: int, q: int) -> int:
    return pow(int(a), int(q) - 2, int(q))


def rref_numpy(a: np.ndarray, q: int, pivot_cols: int = -1):
    """Reduce ``a`` in place to reduced row echelon form mod ``q``.

    Pivots are searched only in the first ``pivot_cols`` columns (all columns
    when negative). Returns ``(rank, pivots)``.
    """
    m, ncols = a.shape
    limit = ncols if pivot_cols < 0 else min(pivot_cols, ncols)
    pivots = []
    row = 0
    for col in range(limit):
        if row == m:
            break
        nz = np.flatnonzero(a[row:, col])
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            a[[row, piv]] = a[[piv, row]]
        inv = _modinv_py(a[row, col], q)
        a[row, col:] = a[row, col:] * inv % q
        f = a[:, col].copy()
        f[row] = 0
        hit = np.flatnonzero(f)
        if hit.size:
            sub = np.outer(f[hit], a[row, col:]) % q
            a[hit, col:] = (a[hit, col:] - sub) % q
        pivots.append(col)
        row += 1
    return row, np.asarray(pivots, dtype=np.int64)


def matmul_numpy(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    # split b into 16-bit halves: a*b_lo < 2**47, so sums of up to 2**16 terms stay in int64
    if a.shape[1] >= 1 << 16:
        raise ValueError("inner dimension too large for the numpy kernel")
    lo = b & 0xFFFF
    hi = b >> 16
    acc_lo = (a @ lo) % q
    acc_hi = (a @ hi) % q
    return (acc_hi * 65536 % q + acc_lo) % q


def polyval_numpy(coeffs: np.ndarray, xs: np.ndarray, q: int) -> np.ndarray:
    """Evaluate sum_k coeffs[k] * x**k at every x in ``xs``."""
    acc = np.zeros(xs.shape, dtype=np.int64)
    for c in coeffs[::-1]:
        acc = (acc * xs + int(c)) % q
    return acc


def rs_decode_core(syn, inv_locs, z_max, q):
    """Berlekamp-Massey, locator scan and Forney magnitudes for power sums.

    ``syn[k] = sum_i b_i h_i**(k+1)``. Returns ``(status, support, values)``
    with status 0 on success; the caller checks the syndrome afterwards.
    Written so the same source runs under numba and plain Python.
    """
    n = syn.shape[0]
    c = np.zeros(n + 2, dtype=np.int64)
    b = np.zeros(n + 2, dtype=np.int64)
    t = np.zeros(n + 2, dtype=np.int64)
    c[0] = 1
    b[0] = 1
    length = 0
    m = 1
    last = 1
    for i in range(n):
        d = syn[i]
        for j in range(1, length + 1):
            d = (d + c[j] * syn[i - j]) % q
        if d == 0:
            m += 1
            continue
        # coef = d / last
        inv = 1
        base = last
        e = q - 2
        while e > 0:
            if e & 1:
                inv = inv * base % q
            base = base * base % q
            e >>= 1
        coef = d * inv % q
        for j in range(n + 2):
            t[j] = c[j]
        for j in range(n + 2 - m):
            if b[j] != 0:
                c[j + m] = (c[j + m] - coef * b[j] % q) % q
        if 2 * length <= i:
            length = i + 1 - length
            for j in range(n + 2):
                b[j] = t[j]
            last = d
            m = 1
        else:
            m += 1
    empty = np.zeros(0, dtype=np.int64)
    if length == 0 or length > z_max or c[length] == 0:
        return 1, empty, empty
    roots = np.zeros(length, dtype=np.int64)
    found = 0
    for k in range(inv_locs.shape[0]):
        x = inv_locs[k]
        acc = 0
        for j in range(length, -1, -1):
            acc = (acc * x + c[j]) % q
        if acc == 0:
            if found == length:
                return 2, empty, empty
            roots[found] = k
            found += 1
    if found != length:
        return 2, empty, empty
    # omega = S(x) * lambda(x) mod x**length, with S_j = syn[j]
    omega = np.zeros(length, dtype=np.int64)
    for j in range(length):
        acc = 0
        for k in range(j + 1):
            acc = (acc + syn[j - k] * c[k]) % q
        omega[j] = acc
    vals = np.zeros(length, dtype=np.int64)
    for r in range(length):
        x = inv_locs[roots[r]]
        num = 0
        for j in range(length - 1, -1, -1):
            num = (num * x + omega[j]) % q
        den = 0
        for j in range(length, 0, -1):
            den = (den * x + j % q * c[j]) % q
        if den == 0 or num == 0:
            return 3, empty, empty
        inv = 1
        base = den
        e = q - 2
        while e > 0:
            if e & 1:
                inv = inv * base % q
            base = base * base % q
            e >>= 1
        vals[r] = (q - num * inv % q) % q
    return 0, roots, vals


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _modinv_jit(a, q):
        result = 1
        base = a % q
        e = q - 2
        while e > 0:
            if e & 1:
                result = result * base % q
            base = base * base % q
            e >>= 1
        return result

    @njit(cache=True)
    def _rref_jit(a, q, limit):
        m, ncols = a.shape
        pivots = np.empty(min(m, limit) + 1, dtype=np.int64)
        row = 0
        for col in range(limit):
            if row == m:
                break
            piv = -1
            for i in range(row, m):
                if a[i, col] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != row:
                for j in range(ncols):
                    tmp = a[row, j]
                    a[row, j] = a[piv, j]
                    a[piv, j] = tmp
            inv = _modinv_jit(a[row, col], q)
            for j in range(col, ncols):
                a[row, j] = a[row, j] * inv % q
            for i in range(m):
                if i == row:
                    continue
                f = a[i, col]
                if f == 0:
                    continue
                for j in range(col, ncols):
                    v = a[i, j] - f * a[row, j] % q
                    if v < 0:
                        v += q
                    a[i, j] = v
            pivots[row] = col
            row += 1
        return row, pivots[:row].copy()

    @njit(cache=True)
    def _matmul_jit(a, b, q):
        m, k = a.shape
        n = b.shape[1]
        out = np.zeros((m, n), dtype=np.int64)
        for i in range(m):
            for t in range(k):
                x = a[i, t]
                if x == 0:
                    continue
                for j in range(n):
                    out[i, j] = (out[i, j] + x * b[t, j]) % q
        return out

    @njit(cache=True)
    def _polyval_jit(coeffs, xs, q):
        out = np.zeros(xs.shape[0], dtype=np.int64)
        deg = coeffs.shape[0]
        for i in range(xs.shape[0]):
            x = xs[i]
            acc = 0
            for k in range(deg - 1, -1, -1):
                acc = (acc * x + coeffs[k]) % q
            out[i] = acc
        return out

    _rs_decode_jit = njit(cache=True)(rs_decode_core)

    def rs_decode_jit(syn: np.ndarray, inv_locs: np.ndarray, z_max: int, q: int):
        return _rs_decode_jit(syn, inv_locs, np.int64(z_max), np.int64(q))

    def rref_jit(a: np.ndarray, q: int, pivot_cols: int = -1):
        limit = a.shape[1] if pivot_cols < 0 else min(pivot_cols, a.shape[1])
        return _rref_jit(a, np.int64(q), limit)

    def matmul_jit(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
        return _matmul_jit(a, b, np.int64(q))

    def polyval_jit(coeffs: np.ndarray, xs: np.ndarray, q: int) -> np.ndarray:
        return _polyval_jit(coeffs, xs, np.int64(q))

else:  # pragma: no cover
    rref_jit = rref_numpy
    matmul_jit = matmul_numpy
    polyval_jit = polyval_numpy
    rs_decode_jit = rs_decode_core


if USE_JIT:
    rref_inplace = rref_jit
    matmul = matmul_jit
    polyval = polyval_jit
    rs_decode_kernel = rs_decode_jit
else:
    rref_inplace = rref_numpy
    matmul = matmul_numpy
    polyval = polyval_numpy
    rs_decode_kernel = rs_decode_core


def backend() -> str:
    return "numba" if USE_JIT else "numpy"
