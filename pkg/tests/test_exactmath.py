import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hssplab.exactmath import (
    NotABasisError,
    SingularModError,
    determinant,
    dot,
    gram_schmidt,
    hnf,
    hnf_with_transform,
    int_kernel,
    matmul,
    matvec,
    modular_solve,
    rank,
    solve_in_hnf,
    transpose,
)

small = st.integers(-20, 20)


def matrices(rows, cols, elem=small):
    return st.lists(st.lists(elem, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@st.composite
def int_matrix(draw, max_rows=5, max_cols=5):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return draw(matrices(r, c))


@st.composite
def unimodular(draw, n):
    # product of elementary operations
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(draw(st.integers(0, 8))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if i == j:
            U[i] = [-a for a in U[i]]
        else:
            c = draw(st.integers(-3, 3))
            U[i] = [a + c * b for a, b in zip(U[i], U[j])]
    return U


def leibniz(M):
    n = len(M)
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        prod = 1
        for i, p in enumerate(perm):
            prod *= M[i][p]
        total += -prod if inv % 2 else prod
    return total


# -- gram_schmidt ------------------------------------------------------------


def test_gram_schmidt_identity():
    ortho, mu = gram_schmidt([[1, 0], [0, 1]])
    assert ortho == [[1, 0], [0, 1]]
    assert mu == [[1, 0], [0, 1]]


def test_gram_schmidt_hand_projection():
    ortho, mu = gram_schmidt([[1, 1], [1, 0]])
    assert ortho[0] == [1, 1]
    assert mu[1][0] == Fraction(1, 2)
    assert ortho[1] == [Fraction(1, 2), Fraction(-1, 2)]


def test_gram_schmidt_orthogonal_input_unchanged():
    ortho, mu = gram_schmidt([[3, 0], [0, 4]])
    assert ortho == [[3, 0], [0, 4]]
    assert mu[1][0] == 0


def test_gram_schmidt_dependent_rows():
    with pytest.raises(NotABasisError, match="not a basis"):
        gram_schmidt([[1, 2], [2, 4]])


@settings(max_examples=60)
@given(int_matrix(4, 5))
def test_gram_schmidt_properties(B):
    if rank(B) < len(B):
        with pytest.raises(NotABasisError):
            gram_schmidt(B)
        return
    ortho, mu = gram_schmidt(B)
    for i, j in itertools.combinations(range(len(B)), 2):
        assert sum(a * b for a, b in zip(ortho[i], ortho[j])) == 0
    # b_i = b*_i + sum_{j<i} mu_ij b*_j
    for i, row in enumerate(B):
        rebuilt = [ortho[i][c] + sum(mu[i][j] * ortho[j][c] for j in range(i)) for c in range(len(row))]
        assert rebuilt == row


# -- hnf ---------------------------------------------------------------------


def test_hnf_examples():
    assert hnf([[2, 0], [0, 2]]) == [[2, 0], [0, 2]]
    assert hnf([[0, 1], [1, 0]]) == [[1, 0], [0, 1]]


def _same_lattice_2x2(A, B):
    # every row of A is an integer combination of B's rows and vice versa
    def inside(rows, basis):
        (p, q), (r, s) = basis
        det = p * s - q * r
        for x, y in rows:
            c1 = Fraction(x * s - y * r, det)
            c2 = Fraction(y * p - x * q, det)
            if c1.denominator != 1 or c2.denominator != 1:
                return False
        return True

    return inside(A, B) and inside(B, A)


def _brute_hnf_2x2(M):
    # scan all upper-triangular [[a, b], [0, c]] with 0 <= b < c in a box
    det = abs(M[0][0] * M[1][1] - M[0][1] * M[1][0])
    hits = [
        [[a, b], [0, c]]
        for a in range(1, det + 1)
        for c in range(1, det + 1)
        if a * c == det
        for b in range(c)
        if _same_lattice_2x2([[a, b], [0, c]], M)
    ]
    assert len(hits) == 1
    return hits[0]


def test_hnf_against_elementary_oracle():
    assert hnf([[2, 4], [1, 3]]) == [[1, 1], [0, 2]]
    assert hnf([[2, 4], [1, 3]]) == _brute_hnf_2x2([[2, 4], [1, 3]])


def _is_hnf(H):
    last = -1
    for row in H:
        piv = next(i for i, a in enumerate(row) if a)
        assert piv > last and row[piv] > 0
        last = piv
    for i, row in enumerate(H):
        piv = next(c for c, a in enumerate(row) if a)
        for above in H[:i]:
            assert 0 <= above[piv] < row[piv]
    return True


@settings(max_examples=80)
@given(int_matrix(4, 4), st.data())
def test_hnf_invariant_under_unimodular(M, data):
    U = data.draw(unimodular(len(M)))
    H = hnf(M)
    assert hnf(matmul(U, M)) == H
    assert _is_hnf(H) if H else True
    assert len(H) == rank(M)


@settings(max_examples=60)
@given(int_matrix(4, 4))
def test_hnf_transform_relation(M):
    H, U = hnf_with_transform(M)
    assert matmul(U, M) == H
    assert abs(determinant(U)) == 1


@settings(max_examples=60)
@given(int_matrix(4, 4), st.lists(small, min_size=4, max_size=4))
def test_solve_in_hnf_membership(M, coeffs):
    H = hnf(M)
    v = [sum(c * row[j] for c, row in zip(coeffs, M)) for j in range(len(M[0]))]
    x = solve_in_hnf(H, v) if H else None
    if H:
        assert x is not None
        assert [sum(c * row[j] for c, row in zip(x, H)) for j in range(len(v))] == v


def test_solve_in_hnf_rejects_non_member():
    assert solve_in_hnf([[2, 0], [0, 2]], [1, 1]) is None
    assert solve_in_hnf([[2, 0], [0, 2]], [4, -2]) == [2, -1]


# -- int_kernel --------------------------------------------------------------


def test_kernel_examples():
    assert int_kernel([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == []
    K = int_kernel([[1, 1, 1]])
    assert len(K) == 2 and rank(K) == 2
    assert all(dot(k, [1, 1, 1]) == 0 for k in K)
    # same lattice as the hand basis
    assert hnf(K) == hnf([[1, -1, 0], [0, 1, -1]])
    assert hnf(int_kernel([[1, 0, 0]])) == [[0, 1, 0], [0, 0, 1]]


@settings(max_examples=80)
@given(int_matrix(3, 5))
def test_kernel_properties(M):
    K = int_kernel(M)
    ncols = len(M[0])
    assert len(K) == ncols - rank(M)
    for k in K:
        assert all(a == 0 for a in matvec(M, k))
    if K:
        assert rank(K) == len(K)
        # saturated: maximal minors are coprime
        minors = [determinant([[row[c] for c in cols] for row in K]) for cols in itertools.combinations(range(ncols), len(K))]
        assert math.gcd(*minors) == 1


# -- rank / determinant -----------------------------------------------------


def test_rank_examples():
    assert rank([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 3
    assert rank([[1, 1], [2, 2], [3, 3]]) == 1


@settings(max_examples=80)
@given(st.integers(1, 4).flatmap(lambda n: matrices(n, n)))
def test_determinant_matches_leibniz(M):
    assert determinant(M) == leibniz(M)
    assert (rank(M) == len(M)) == (determinant(M) != 0)


@settings(max_examples=40)
@given(int_matrix(4, 4))
def test_rank_of_transpose(M):
    assert rank(M) == rank(transpose(M))


# -- modular_solve -----------------------------------------------------------


def test_modular_solve_examples():
    assert modular_solve([[1, 0], [0, 1]], [5, 2], 7) == [5, 2]
    assert modular_solve([[1, 1], [0, 1]], [5, 2], 101) == [3, 2]
    with pytest.raises(SingularModError, match="singular modulo Q"):
        modular_solve([[2, 0], [0, 2]], [1, 1], 4)


@settings(max_examples=80)
@given(
    st.integers(1, 4).flatmap(lambda n: st.tuples(matrices(n, n, st.integers(0, 1)), st.lists(st.integers(0, 10**6), min_size=n, max_size=n))),
    st.sampled_from([101, 65537, 2**61 - 1]),
)
def test_modular_solve_roundtrip(system, Q):
    A, x = system
    b = [v % Q for v in matvec(A, x)]
    if determinant(A) % Q == 0:
        with pytest.raises(SingularModError):
            modular_solve(A, b, Q)
        return
    got = modular_solve(A, b, Q)
    assert got == [v % Q for v in x]
