"""Dense linear algebra over GF(q).

Matrices are 2-D ``int64`` numpy arrays of residues in ``[0, q)``; vectors
are 1-D arrays. Every function takes the modulus explicitly. Elimination is
exact, so there are no tolerances anywhere.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .errors import InvalidIdError, SingularMatrixError, UsageError
from .field import field_inv

LineRep = tuple  # canonical representative of a 1-dim subspace


def as_matrix(a, q: int) -> np.ndarray:
    m = np.array(a, dtype=np.int64)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise UsageError("expected a 2-D matrix")
    return m % q


def as_vector(v, q: int) -> np.ndarray:
    return np.asarray(v, dtype=np.int64).reshape(-1) % q


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if a.shape[1] != b.shape[0]:
        raise UsageError(f"shape mismatch {a.shape} x {b.shape}")
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    return _kernels.matmul(a, b, q)


def matvec(a: np.ndarray, v: np.ndarray, q: int) -> np.ndarray:
    return matmul(a, np.asarray(v, dtype=np.int64).reshape(-1, 1), q).reshape(-1)


def rref(a, q: int, pivot_cols: int = -1):
    """Reduced row echelon form. Returns ``(R, pivot_columns)``."""
    r = np.array(a, dtype=np.int64, copy=True) % q
    if r.size == 0:
        return r, np.zeros(0, dtype=np.int64)
    r = np.ascontiguousarray(r)
    rk, piv = _kernels.rref_inplace(r, q, pivot_cols)
    return r, piv


def rank(a, q: int) -> int:
    m = np.asarray(a)
    if m.size == 0:
        return 0
    return int(len(rref(m, q)[1]))


def invert(a, q: int) -> np.ndarray:
    m = as_matrix(a, q)
    n, k = m.shape
    if n != k:
        raise UsageError(f"cannot invert a {n}x{k} matrix")
    aug = np.concatenate([m, identity(n)], axis=1)
    r, piv = rref(aug, q, pivot_cols=n)
    if len(piv) < n:
        raise SingularMatrixError("matrix is singular")
    return r[:, n:].copy()


def solve(a, b, q: int):
    """One solution x of a @ x = b, or None when the system is inconsistent."""
    m = as_matrix(a, q)
    rhs = as_vector(b, q)
    rows, cols = m.shape
    aug = np.concatenate([m, rhs.reshape(-1, 1)], axis=1)
    r, piv = rref(aug, q)
    if len(piv) and piv[-1] == cols:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, cols]
    return x


def col_space_contains(a, v, q: int) -> bool:
    m = np.asarray(a, dtype=np.int64)
    vec = as_vector(v, q)
    if m.ndim != 2 or m.shape[0] != vec.shape[0]:
        raise UsageError("dimension mismatch")
    if not vec.any():
        return True
    if m.shape[1] == 0:
        return False
    return rank(np.concatenate([m, vec.reshape(-1, 1)], axis=1), q) == rank(m, q)


def null_space(a, q: int) -> np.ndarray:
    """Columns spanning ``{x : a x = 0}``."""
    m = np.asarray(a, dtype=np.int64)
    rows, cols = m.shape
    if rows == 0 or m.size == 0:
        return identity(cols)
    r, piv = rref(m, q)
    piv = [int(p) for p in piv]
    free = [c for c in range(cols) if c not in set(piv)]
    out = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        out[f, j] = 1
        for i, p in enumerate(piv):
            out[p, j] = -r[i, f] % q
    return out


def members_of_col_space(a, vectors, q: int) -> np.ndarray:
    """Boolean mask: which columns of ``vectors`` lie in col(a)."""
    m = np.asarray(a, dtype=np.int64)
    vs = np.asarray(vectors, dtype=np.int64)
    if vs.shape[1] == 0:
        return np.zeros(0, dtype=bool)
    if m.shape[1] == 0 or not m.any():
        return ~vs.any(axis=0)
    annih = null_space(m.T, q).T
    if annih.shape[0] == 0:
        return np.ones(vs.shape[1], dtype=bool)
    return ~matmul(annih, vs % q, q).any(axis=0)


def column_basis(a, q: int):
    """Independent columns of ``a`` spanning its column space.

    Returns ``(columns, indices)`` where the columns are taken from ``a``
    itself (not reduced), in increasing index order.
    """
    m = np.asarray(a, dtype=np.int64)
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=np.int64), []
    _, piv = rref(m, q)
    idx = [int(c) for c in piv]
    return m[:, idx].copy(), idx


def reduced_col_basis(a, q: int) -> np.ndarray:
    """Canonical basis of col(a): the transposed nonzero rows of rref(a^T)."""
    m = np.asarray(a, dtype=np.int64)
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=np.int64)
    r, piv = rref(m.T, q)
    return r[: len(piv)].T.copy()


def col_space_intersect(a, b, q: int) -> np.ndarray:
    """Basis (as columns) of col(a) ∩ col(b) by Zassenhaus elimination.

    The result has zero columns when the intersection is trivial.
    """
    ma = np.asarray(a, dtype=np.int64)
    mb = np.asarray(b, dtype=np.int64)
    if ma.shape[0] != mb.shape[0]:
        raise UsageError("row counts differ")
    c = ma.shape[0]
    ua = reduced_col_basis(ma, q).T
    ub = reduced_col_basis(mb, q).T
    if ua.shape[0] == 0 or ub.shape[0] == 0:
        return np.zeros((c, 0), dtype=np.int64)
    top = np.concatenate([ua, ua], axis=1)
    bottom = np.concatenate([ub, np.zeros_like(ub)], axis=1)
    r, piv = rref(np.concatenate([top, bottom], axis=0), q)
    rows = [i for i, p in enumerate(piv) if p >= c]
    if not rows:
        return np.zeros((c, 0), dtype=np.int64)
    return r[rows, c:].T.copy()


def same_col_space(a, b, q: int) -> bool:
    ra = reduced_col_basis(a, q)
    rb = reduced_col_basis(b, q)
    return ra.shape == rb.shape and bool(np.array_equal(ra, rb))


def vandermonde(ids: Sequence[int], depth: int, q: int) -> np.ndarray:
    """Column j is ``[id_j, id_j**2, ..., id_j**depth]``."""
    vals = [int(x) % q for x in ids]
    if any(v == 0 for v in vals):
        raise InvalidIdError("ids must be nonzero")
    if len(set(vals)) != len(vals):
        raise InvalidIdError("ids must be pairwise distinct")
    out = np.empty((depth, len(vals)), dtype=np.int64)
    for j, v in enumerate(vals):
        p = 1
        for i in range(depth):
            p = p * v % q
            out[i, j] = p
    return out


def canonical_line(v, q: int) -> LineRep:
    """Scale so the first nonzero coordinate is 1."""
    vec = as_vector(v, q)
    nz = np.flatnonzero(vec)
    if nz.size == 0:
        raise UsageError("zero vector spans no line")
    inv = field_inv(int(vec[nz[0]]), q)
    return tuple(int(x) * inv % q for x in vec)
