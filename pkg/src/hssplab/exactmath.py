"""Exact integer and rational linear algebra.

Matrices are plain ``list[list[int]]`` (row-major); rationals are
:class:`fractions.Fraction`. Nothing in here ever rounds.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

IntMatrix = list[list[int]]
RatMatrix = list[list[Fraction]]


class NotABasisError(ValueError):
    """Raised when rows expected to be linearly independent are not."""


class SingularModError(ValueError):
    """Raised when a system has no unique solution modulo Q."""


def dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def transpose(M: Sequence[Sequence[int]]) -> IntMatrix:
    return [list(col) for col in zip(*M)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> IntMatrix:
    Bt = transpose(B)
    return [[dot(row, col) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence[int]], x: Sequence[int]) -> list[int]:
    return [dot(row, x) for row in A]


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def gram_schmidt(basis: Sequence[Sequence[int]]) -> tuple[RatMatrix, RatMatrix]:
    """Rational Gram-Schmidt orthogonalisation of the rows of ``basis``.

    Returns ``(orthogonal_rows, mu)`` with ``mu`` lower unitriangular and
    ``basis == mu @ orthogonal_rows`` exactly.
    """
    n = len(basis)
    ortho: RatMatrix = []
    norms: list[Fraction] = []
    mu: RatMatrix = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i, row in enumerate(basis):
        v = [Fraction(a) for a in row]
        for j in range(i):
            c = sum((Fraction(a) * b for a, b in zip(row, ortho[j])), Fraction(0)) / norms[j]
            mu[i][j] = c
            if c:
                v = [a - c * b for a, b in zip(v, ortho[j])]
        nrm = sum((a * a for a in v), Fraction(0))
        if nrm == 0:
            raise NotABasisError("not a basis: rows are linearly dependent")
        ortho.append(v)
        norms.append(nrm)
    return ortho, mu


def rank(M: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals, by fraction-free (Bareiss) elimination."""
    A = [list(r) for r in M]
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    r = 0
    prev = 1
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        for i in range(r + 1, rows):
            a = A[i][c]
            A[i] = [(p * x - a * y) // prev for x, y in zip(A[i], A[r])]
        prev = p
        r += 1
        if r == rows:
            break
    return r


def determinant(M: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss)."""
    n = len(M)
    if n == 0:
        return 1
    if any(len(row) != n for row in M):
        raise ValueError("determinant of a non-square matrix")
    A = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if piv is None:
                return 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        p = A[k][k]
        for i in range(k + 1, n):
            a = A[i][k]
            Ai, Ak = A[i], A[k]
            for j in range(k + 1, n):
                Ai[j] = (p * Ai[j] - a * Ak[j]) // prev
            Ai[k] = 0
        prev = p
    return sign * A[n - 1][n - 1]


def hnf_with_transform(M: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form with the unimodular transform.

    Returns ``(H, U)`` with ``U @ M == H``. ``H`` keeps all rows; the zero
    rows (if any) come last. Pivots are positive and the entries above a
    pivot lie in ``[0, pivot)``.
    """
    A = [list(r) for r in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    U = identity(rows)
    p = 0
    for c in range(cols):
        if p == rows:
            break
        while True:
            nz = [i for i in range(p, rows) if A[i][c] != 0]
            if not nz:
                break
            best = min(nz, key=lambda i: abs(A[i][c]))
            A[p], A[best] = A[best], A[p]
            U[p], U[best] = U[best], U[p]
            piv = A[p][c]
            done = True
            for i in range(p + 1, rows):
                a = A[i][c]
                if a:
                    q = a // piv
                    if q:
                        A[i] = [x - q * y for x, y in zip(A[i], A[p])]
                        U[i] = [x - q * y for x, y in zip(U[i], U[p])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if A[p][c] == 0:
            continue
        if A[p][c] < 0:
            A[p] = [-x for x in A[p]]
            U[p] = [-x for x in U[p]]
        piv = A[p][c]
        for i in range(p):
            q = A[i][c] // piv
            if q:
                A[i] = [x - q * y for x, y in zip(A[i], A[p])]
                U[i] = [x - q * y for x, y in zip(U[i], U[p])]
        p += 1
    return A, U


def hnf(M: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style Hermite normal form with the zero rows removed.

    Two matrices generate the same row lattice iff their ``hnf`` outputs
    are equal.
    """
    H, _ = hnf_with_transform(M)
    return [row for row in H if any(row)]


def int_kernel(M: Sequence[Sequence[int]], ncols: int | None = None) -> IntMatrix:
    """Basis (as rows) of the integer kernel ``{y : M y = 0}``.

    ``ncols`` gives the ambient dimension when ``M`` has no rows.
    """
    if not M:
        if ncols is None:
            raise ValueError("ncols is required for an empty matrix")
        return identity(ncols)
    H, U = hnf_with_transform(transpose(M))
    return [u for h, u in zip(H, U) if not any(h)]


def solve_in_hnf(H: Sequence[Sequence[int]], v: Sequence[int]) -> list[int] | None:
    """Integer coefficients ``c`` with ``c @ H == v`` for an HNF ``H``, or None."""
    r = list(v)
    coeffs = []
    for row in H:
        c = next(j for j, a in enumerate(row) if a)
        q, rem = divmod(r[c], row[c])
        if rem:
            return None
        coeffs.append(q)
        if q:
            r = [x - q * y for x, y in zip(r, row)]
    if any(r):
        return None
    return coeffs


def modular_solve(A: Sequence[Sequence[int]], b: Sequence[int], Q: int) -> list[int]:
    """Solve ``A x = b (mod Q)`` for square ``A`` with ``det A`` a unit mod Q.

    Works for composite ``Q`` too: the system is solved exactly over the
    rationals, and every denominator divides ``det A``, which is invertible
    modulo ``Q``. Entries of the result lie in ``[0, Q)``.
    """
    n = len(A)
    if any(len(row) != n for row in A) or len(b) != n:
        raise ValueError("modular_solve needs a square system")
    Ar = [[x % Q for x in row] for row in A]
    det = determinant(Ar)
    if gcd(det, Q) != 1:
        raise SingularModError("singular modulo Q")
    rows = [[Fraction(x) for x in row] + [Fraction(bi % Q)] for row, bi in zip(Ar, b)]
    for k in range(n):
        piv = next(i for i in range(k, n) if rows[i][k] != 0)
        rows[k], rows[piv] = rows[piv], rows[k]
        inv = 1 / rows[k][k]
        rows[k] = [x * inv for x in rows[k]]
        for i in range(n):
            if i != k and rows[i][k] != 0:
                f = rows[i][k]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[k])]
    return [(r[n].numerator * pow(r[n].denominator, -1, Q)) % Q for r in rows]
