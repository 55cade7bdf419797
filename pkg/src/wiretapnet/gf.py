"""Dense linear algebra over prime fields GF(q).

Matrices are small integer numpy arrays with entries in ``0..q-1``.
Only prime ``q`` is supported, so arithmetic is plain modular arithmetic.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import StructuralError


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, int(q**0.5) + 1))


def check_field(q: int) -> int:
    q = int(q)
    if not is_prime(q):
        raise StructuralError(f"field size must be prime, got {q}")
    return q


def as_matrix(M, q: int, ncols: int | None = None) -> np.ndarray:
    """Coerce ``M`` to a 2-D int64 array reduced mod ``q``.

    Empty 2-D inputs keep their shape; other empty inputs become
    ``(0, ncols)`` arrays so that stacking works.
    """
    A = np.asarray(M, dtype=np.int64)
    if A.size == 0:
        if A.ndim == 2 and (ncols is None or A.shape[1] == ncols):
            return np.zeros(A.shape, dtype=np.int64)
        return np.zeros((0, ncols or 0), dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise StructuralError(f"expected a matrix, got shape {A.shape}")
    if ncols is not None and A.shape[1] != ncols:
        raise StructuralError(f"expected {ncols} columns, got {A.shape[1]}")
    return np.mod(A, q)


def rref(M, q: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``M`` over GF(q).

    Returns
    -------
    R : ndarray
        Same shape as ``M``; non-zero rows first, pivots equal to 1.
    pivots : list of int
        Pivot column of each non-zero row.
    """
    R = as_matrix(M, q).copy()
    m, n = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        inv = pow(int(R[r, c]), -1, q)
        R[r] = (R[r] * inv) % q
        col = R[:, c].copy()
        col[r] = 0
        R = (R - np.outer(col, R[r])) % q
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M, q: int) -> int:
    A = as_matrix(M, q)
    if A.shape[0] == 0 or A.shape[1] == 0:
        return 0
    return len(rref(A, q)[1])


def solve_left(X, g, q: int) -> np.ndarray | None:
    """Find a row vector ``c`` with ``c @ X == g (mod q)``, or ``None``."""
    X = as_matrix(X, q)
    g = as_matrix(g, q, ncols=X.shape[1])
    if X.shape[0] == 0:
        return np.zeros(0, dtype=np.int64) if not g.any() else None
    # Solve X^T c^T = g^T by eliminating the augmented system.
    aug = np.hstack([X.T, g.T])
    R, piv = rref(aug, q)
    nvar = X.shape[0]
    if nvar in piv:
        return None
    c = np.zeros(nvar, dtype=np.int64)
    for row, col in enumerate(piv):
        c[col] = R[row, nvar]
    return c


def extend_to_basis(rows, dim: int, q: int) -> np.ndarray:
    """Unit vectors that complete the row span of ``rows`` to GF(q)^dim.

    The complement is built greedily from ``e_0, e_1, ...`` so the output
    is deterministic.
    """
    basis = as_matrix(rows, q, ncols=dim)
    r = rank(basis, q)
    extra = []
    for j in range(dim):
        if r == dim:
            break
        e = np.zeros(dim, dtype=np.int64)
        e[j] = 1
        trial = np.vstack([basis, e])
        if rank(trial, q) > r:
            basis = trial
            extra.append(e)
            r += 1
    return np.array(extra, dtype=np.int64).reshape(len(extra), dim)


def all_vectors(dim: int, q: int):
    """Every vector of GF(q)^dim in lexicographic order."""
    for t in itertools.product(range(q), repeat=dim):
        yield np.array(t, dtype=np.int64)


def span_vectors(rows, q: int) -> list[tuple[int, ...]]:
    """Distinct vectors of the row span, sorted lexicographically."""
    R, piv = rref(rows, q)
    basis = R[: len(piv)]
    seen = set()
    for coeffs in itertools.product(range(q), repeat=len(piv)):
        v = (np.array(coeffs, dtype=np.int64) @ basis) % q if piv else np.zeros(basis.shape[1], dtype=np.int64)
        seen.add(tuple(int(x) for x in v))
    return sorted(seen)
