"""Dense exact linear algebra over the rationals.

All matrices are lists of row lists with Fraction entries.  Sizes in this
package are small (a few hundred rows at most), so plain Gaussian
elimination with zero-skipping is fast enough and keeps everything exact.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = "list[list[Fraction]]"

ZERO = Fraction(0)
ONE = Fraction(1)


def mat(rows):
    """Coerce nested lists of numbers into a Fraction matrix."""
    return [[Fraction(x) for x in row] for row in rows]


def zeros(n, m):
    return [[ZERO] * m for _ in range(n)]


def identity(n):
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = ONE
    return out


def copy(M):
    return [row[:] for row in M]


def transpose(M):
    if not M:
        return []
    return [list(col) for col in zip(*M)]


def mat_mul(A, B):
    n = len(A)
    k = len(B)
    m = len(B[0]) if k else 0
    out = zeros(n, m)
    for i in range(n):
        Ai = A[i]
        oi = out[i]
        for t in range(k):
            a = Ai[t]
            if not a:
                continue
            Bt = B[t]
            for j in range(m):
                b = Bt[j]
                if b:
                    oi[j] += a * b
    return out


def _entry(M, i, j):
    if i < len(M) and j < len(M[i]):
        return M[i][j]
    return ZERO


def mat_add(A, B):
    """Entrywise sum; shapes are reconciled by zero padding.

    Products with a zero-dimensional inner factor legitimately produce
    matrices with no columns, so all binary operations treat a matrix as
    the finite corner of an infinite zero matrix.
    """
    n = max(len(A), len(B))
    m = max([len(r) for r in A + B], default=0)
    return [[_entry(A, i, j) + _entry(B, i, j) for j in range(m)] for i in range(n)]


def mat_sub(A, B):
    n = max(len(A), len(B))
    m = max([len(r) for r in A + B], default=0)
    return [[_entry(A, i, j) - _entry(B, i, j) for j in range(m)] for i in range(n)]


def mat_scale(A, c):
    c = Fraction(c)
    return [[c * a for a in row] for row in A]


def is_zero_matrix(A):
    return all(not x for row in A for x in row)


def mat_eq(A, B):
    n = max(len(A), len(B))
    m = max([len(r) for r in A + B], default=0)
    return all(_entry(A, i, j) == _entry(B, i, j) for i in range(n) for j in range(m))


def rref(M):
    """Reduced row echelon form.  Returns (R, pivot_columns)."""
    R = copy(M)
    n = len(R)
    m = len(R[0]) if n else 0
    pivots = []
    r = 0
    for c in range(m):
        if r == n:
            break
        # pick a pivot; favour entries of small complexity
        piv = None
        for i in range(r, n):
            if R[i][c]:
                piv = i
                if abs(R[i][c]) == 1:
                    break
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        pv = R[r][c]
        if pv != 1:
            R[r] = [x / pv for x in R[r]]
        Rr = R[r]
        for i in range(n):
            if i == r:
                continue
            f = R[i][c]
            if f:
                Ri = R[i]
                for j in range(c, m):
                    if Rr[j]:
                        Ri[j] -= f * Rr[j]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M):
    if not M or not M[0]:
        return 0
    return len(rref(M)[1])


def nullspace(M):
    """Basis of the right kernel, as a list of column vectors."""
    if not M:
        return []
    m = len(M[0])
    R, pivots = rref(M)
    pivset = set(pivots)
    free = [j for j in range(m) if j not in pivset]
    basis = []
    for f in free:
        v = [ZERO] * m
        v[f] = ONE
        for i, p in enumerate(pivots):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def solve(A, B):
    """Solve A X = B for a matrix of right-hand columns.  None if inconsistent."""
    n = len(A)
    m = len(A[0]) if n else 0
    k = len(B[0]) if B else 0
    aug = [A[i][:] + B[i][:] for i in range(n)]
    R, pivots = rref(aug)
    pivots_in_A = [p for p in pivots if p < m]
    # inconsistency: a pivot in the augmented part
    if len(pivots_in_A) != len(pivots):
        return None
    X = zeros(m, k)
    for i, p in enumerate(pivots_in_A):
        for j in range(k):
            X[p][j] = R[i][m + j]
    return X


def solve_vec(A, b):
    sol = solve(A, [[x] for x in b])
    if sol is None:
        return None
    return [row[0] for row in sol]


def inverse(A):
    n = len(A)
    X = solve(A, identity(n))
    if X is None:
        return None
    if not mat_eq(mat_mul(A, X), identity(n)):
        return None
    return X


def column_span_contains(cols, v):
    """Is the vector v in the span of the given column vectors?"""
    if not cols:
        return all(not x for x in v)
    A = transpose(cols)
    return solve_vec(A, v) is not None


def coords_in_basis(cols, v):
    """Coordinates of v in the span of independent columns, or None."""
    if not cols:
        return [] if all(not x for x in v) else None
    return solve_vec(transpose(cols), v)
