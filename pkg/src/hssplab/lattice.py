"""Lattice reduction and orthogonal lattices.

Bases are ``list[list[int]]`` with one basis vector per row. Reduction is
exact: LLL runs on the integral Gram-Schmidt data (``d_i`` and ``lambda_ij``)
so every size-reduction and Lovasz decision is made on integers. When fpylll
is importable, large inputs are first pre-reduced in floating point; that
output is checked to be a unimodular image of the input and then passed
through the exact LLL, so the returned basis always satisfies the exact
conditions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .exactmath import (
    IntMatrix,
    NotABasisError,
    determinant,
    dot,
    hnf,
    identity,
    int_kernel,
    matmul,
    solve_in_hnf,
)

log = logging.getLogger(__name__)

DEFAULT_DELTA = Fraction(99, 100)
DEFAULT_ENUM_LIMIT = 24
# relative slack on float radii during enumeration; exact norms decide
_ENUM_SLACK = 1e-6

try:  # optional accelerator
    from fpylll import LLL as _FPLLL
    from fpylll import IntegerMatrix as _FPMatrix
except ImportError:  # pragma: no cover - depends on environment
    _FPLLL = None
    _FPMatrix = None


class EnumerationLimitError(ValueError):
    """Raised when exhaustive enumeration is asked for too large a rank."""


@dataclass(frozen=True)
class ReductionParams:
    delta: Fraction = DEFAULT_DELTA
    beta: int = 20

    def __post_init__(self):
        if not Fraction(1, 4) < Fraction(self.delta) < 1:
            raise ValueError(f"delta must lie in (1/4, 1), got {self.delta}")
        if self.beta < 2:
            raise ValueError(f"beta must be >= 2, got {self.beta}")


def fpylll_available() -> bool:
    return _FPLLL is not None


# -- integral Gram-Schmidt -------------------------------------------------


def integral_gso(b: Sequence[Sequence[int]]) -> tuple[list[int], list[list[int]]]:
    """Integral Gram-Schmidt data of the rows of ``b``.

    Returns ``(d, lam)`` where ``d[0] = 1``, ``d[i+1] = prod_{j<=i} |b*_j|^2``
    and ``lam[i][j] = d[j+1] * mu_ij`` for ``j < i``. All values are integers.
    """
    n = len(b)
    d = [1] * (n + 1)
    lam = [[0] * n for _ in range(n)]
    for k in range(n):
        for j in range(k + 1):
            u = dot(b[k], b[j])
            for i in range(j):
                u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise NotABasisError("not a basis: rows are linearly dependent")
                d[k + 1] = u
    return d, lam


def _lll_exact(b: IntMatrix, delta: Fraction) -> IntMatrix:
    """In-place integral LLL (Cohen, Alg. 2.6.7) on the rows of ``b``."""
    n = len(b)
    if n <= 1:
        if n == 1 and not any(b[0]):
            raise NotABasisError("not a basis: zero vector")
        return b
    p, q = delta.numerator, delta.denominator
    d, lam = integral_gso(b)

    def red(k: int, l: int) -> None:
        dl = d[l + 1]
        lk = lam[k]
        if 2 * abs(lk[l]) > dl:
            r = (2 * lk[l] + dl) // (2 * dl)
            bl = b[l]
            b[k] = [x - r * y for x, y in zip(b[k], bl)]
            lk[l] -= r * dl
            ll = lam[l]
            for i in range(l):
                lk[i] -= r * ll[i]

    def swap(k: int) -> None:
        b[k], b[k - 1] = b[k - 1], b[k]
        lk, lk1 = lam[k], lam[k - 1]
        for j in range(k - 1):
            lk[j], lk1[j] = lk1[j], lk[j]
        lm = lk[k - 1]
        bn = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, n):
            li = lam[i]
            t = li[k]
            li[k] = (d[k + 1] * li[k - 1] - lm * t) // d[k]
            li[k - 1] = (bn * t + lm * li[k]) // d[k + 1]
        d[k] = bn

    k = 1
    while k < n:
        red(k, k - 1)
        lm = lam[k][k - 1]
        if q * (d[k + 1] * d[k - 1] + lm * lm) < p * d[k] * d[k]:
            swap(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b


def is_lll_reduced(B: Sequence[Sequence[int]], delta: Fraction = DEFAULT_DELTA) -> bool:
    """Exact check of size reduction (|mu| <= 1/2) and the Lovasz condition."""
    n = len(B)
    if n == 0:
        return True
    d, lam = integral_gso(B)
    delta = Fraction(delta)
    for i in range(n):
        for j in range(i):
            if 2 * abs(lam[i][j]) > d[j + 1]:
                return False
    for k in range(1, n):
        lm = lam[k][k - 1]
        if delta.denominator * (d[k + 1] * d[k - 1] + lm * lm) < delta.numerator * d[k] * d[k]:
            return False
    return True


def _needs_accel(b: Sequence[Sequence[int]]) -> bool:
    bits = max((abs(x).bit_length() for row in b for x in row), default=0)
    return len(b) >= 8 and bits > 48


def _fpylll_prereduce(b: IntMatrix, delta: Fraction) -> IntMatrix:
    n = len(b)
    M = _FPMatrix.from_matrix(b)
    U = _FPMatrix.identity(n)
    _FPLLL.reduction(M, U, delta=float(min(delta, Fraction(999, 1000))))
    out = [[int(M[i, j]) for j in range(M.ncols)] for i in range(n)]
    Ul = [[int(U[i, j]) for j in range(n)] for i in range(n)]
    # out = U b with U integral; equal Gram determinants make U unimodular.
    if matmul(Ul, b) != out:
        raise RuntimeError("fpylll transform does not reproduce its output")
    if _gram_det(out) != _gram_det(b):
        raise RuntimeError("fpylll output generates a different lattice")
    return out


def _gram_det(b: Sequence[Sequence[int]]) -> int:
    if b and len(b) == len(b[0]):
        return determinant(b) ** 2
    return determinant([[dot(u, v) for v in b] for u in b])


def lll_reduce(
    B: Sequence[Sequence[int]],
    delta: Fraction = DEFAULT_DELTA,
    *,
    backend: str = "auto",
) -> IntMatrix:
    """LLL-reduce the rows of ``B``.

    ``backend`` is ``"exact"`` (pure integral LLL), ``"fpylll"`` (float
    pre-reduction, then the exact pass) or ``"auto"`` (fpylll only for
    bases with large entries, when installed). The result always passes
    :func:`is_lll_reduced` for ``delta`` and spans the same lattice as ``B``.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise ValueError(f"delta must lie in (1/4, 1), got {delta}")
    b = [list(map(int, row)) for row in B]
    if backend not in ("auto", "exact", "fpylll"):
        raise ValueError(f"unknown backend {backend!r}")
    use_fp = backend == "fpylll" or (backend == "auto" and _FPLLL is not None and _needs_accel(b))
    if use_fp and b:
        if _FPLLL is None:
            raise RuntimeError("fpylll backend requested but fpylll is not installed")
        integral_gso(b)  # raises on dependent rows before handing off
        b = _fpylll_prereduce(b, delta)
    return _lll_exact(b, delta)


# -- enumeration ------------------------------------------------------------


def _float_gso_block(d: list[int], lam: list[list[int]], lo: int, hi: int):
    mu = [[0.0] * (hi - lo) for _ in range(hi - lo)]
    for i in range(lo, hi):
        for j in range(lo, i):
            mu[i - lo][j - lo] = lam[i][j] / d[j + 1]
    bn = [d[j + 1] / d[j] for j in range(lo, hi)]
    return mu, bn


def _enumerate(
    mu: list[list[float]],
    bn: list[float],
    radius: float,
    on_leaf: Callable[[list[int]], float],
) -> None:
    """Depth-first enumeration of all nonzero x with projected norm <= radius.

    Only one of each pair ``{x, -x}`` is visited (the last nonzero
    coordinate is positive). ``on_leaf`` returns the new radius.
    """
    n = len(bn)
    x = [0] * n
    state = {"radius": radius}

    def rec(k: int, partial: float, top_zero: bool) -> None:
        center = -sum(x[i] * mu[i][k] for i in range(k + 1, n))
        room = state["radius"] - partial
        if room < 0:
            return
        span = math.sqrt(room / bn[k])
        lo = math.ceil(center - span)
        hi = math.floor(center + span)
        if top_zero:
            lo = max(lo, 0)
        # visit values nearest the centre first so the radius shrinks early
        vals = sorted(range(lo, hi + 1), key=lambda v: (abs(v - center), v))
        for v in vals:
            t = partial + (v - center) ** 2 * bn[k]
            if t > state["radius"]:
                continue
            x[k] = v
            if k == 0:
                if not (top_zero and v == 0):
                    state["radius"] = on_leaf(list(x))
            else:
                rec(k - 1, t, top_zero and v == 0)
        x[k] = 0

    rec(n - 1, 0.0, True)


def _canonical(v: list[int]) -> list[int]:
    for a in v:
        if a:
            return v if a > 0 else [-y for y in v]
    return v


def svp_enumerate(B: Sequence[Sequence[int]], limit: int = DEFAULT_ENUM_LIMIT) -> list[int]:
    """A shortest nonzero vector of the lattice spanned by the rows of ``B``.

    Exhaustive (pruning-free) enumeration over an LLL-reduced basis. Float
    radii carry a small slack and candidates are compared with exact integer
    norms. Among ties the lexicographically smallest vector with positive
    leading entry is returned.
    """
    if len(B) > limit:
        raise EnumerationLimitError(f"enumeration limit: rank {len(B)} > {limit}")
    if not B:
        raise ValueError("empty basis")
    b = lll_reduce(B, backend="exact")
    d, lam = integral_gso(b)
    mu, bn = _float_gso_block(d, lam, 0, len(b))
    best = {"norm": dot(b[0], b[0]), "vecs": []}

    def leaf(x: list[int]) -> float:
        v = [sum(c * row[j] for c, row in zip(x, b) if c) for j in range(len(b[0]))]
        nv = dot(v, v)
        if nv < best["norm"]:
            best["norm"] = nv
            best["vecs"] = [_canonical(v)]
        elif nv == best["norm"]:
            best["vecs"].append(_canonical(v))
        return best["norm"] * (1 + _ENUM_SLACK)

    _enumerate(mu, bn, best["norm"] * (1 + _ENUM_SLACK), leaf)
    if not best["vecs"]:  # float noise hid b[0] itself
        best["vecs"] = [_canonical(list(b[0]))]
    return min(best["vecs"])


# -- BKZ ----------------------------------------------------------------------


def _block_svp(d, lam, k: int, h: int) -> tuple[list[int], Fraction] | None:
    """Coefficients (over rows k..h-1) of a shortest projected vector, if it
    is strictly shorter than |b*_k|; exact comparison."""
    mu, bn = _float_gso_block(d, lam, k, h)
    target = Fraction(d[k + 1], d[k])
    exact_mu = {}

    def exact_norm(x: list[int]) -> Fraction:
        total = Fraction(0)
        size = len(x)
        for j in range(size):
            s = Fraction(x[j])
            for i in range(j + 1, size):
                if x[i]:
                    key = (i, j)
                    if key not in exact_mu:
                        exact_mu[key] = Fraction(lam[k + i][k + j], d[k + j + 1])
                    s += x[i] * exact_mu[key]
            if s:
                total += s * s * Fraction(d[k + j + 1], d[k + j])
        return total

    best: dict = {"norm": target, "x": None}

    def leaf(x: list[int]) -> float:
        nx = exact_norm(x)
        if nx < best["norm"]:
            best["norm"] = nx
            best["x"] = x
        return float(best["norm"]) * (1 + _ENUM_SLACK)

    _enumerate(mu, bn, float(target) * (1 + _ENUM_SLACK), leaf)
    if best["x"] is None:
        return None
    return best["x"], best["norm"]


def _insert_primitive(b: IntMatrix, k: int, x: list[int]) -> None:
    """Replace rows k..k+len(x)-1 by a unimodular image whose row k is
    sum x_i b_{k+i}; ``x`` must be primitive."""
    x = list(x)
    idx = [i for i, c in enumerate(x) if c]
    while len(idx) > 1:
        p = min(idx, key=lambda i: abs(x[i]))
        for j in idx:
            if j != p:
                q = x[j] // x[p]
                if q:
                    x[j] -= q * x[p]
                    b[k + p] = [u + q * w for u, w in zip(b[k + p], b[k + j])]
        idx = [i for i, c in enumerate(x) if c]
    p = idx[0]
    if abs(x[p]) != 1:
        raise ValueError("coefficient vector is not primitive")
    row = b.pop(k + p)
    b.insert(k, row if x[p] == 1 else [-u for u in row])


def bkz_reduce(
    B: Sequence[Sequence[int]],
    params: ReductionParams | None = None,
    *,
    max_tours: int = 200,
) -> IntMatrix:
    """BKZ reduction with exhaustive block enumeration as the SVP oracle.

    ``params.beta`` is clipped to the rank. With ``beta == rank`` the first
    output vector is a shortest lattice vector. The output is LLL-reduced.
    """
    params = params or ReductionParams()
    delta = Fraction(params.delta)
    b = lll_reduce(B, delta)
    r = len(b)
    if r <= 1:
        return b
    beta = min(params.beta, r)
    if beta > DEFAULT_ENUM_LIMIT:
        raise EnumerationLimitError(f"enumeration limit: block size {beta}")
    z, k, steps = 0, -1, 0
    while z < r - 1:
        k = (k + 1) % (r - 1)
        if k == 0:
            steps += 1
            if steps > max_tours:
                log.warning("bkz: stopping after %d tours", max_tours)
                break
        h = min(k + beta, r)
        d, lam = integral_gso(b)
        found = _block_svp(d, lam, k, h)
        if found is None:
            z += 1
            continue
        _insert_primitive(b, k, found[0])
        b = _lll_exact(b, delta)
        z = 0
    return b


# -- orthogonal lattices ---------------------------------------------------


def orthogonal_lattice_mod(h: Sequence[int], Q: int) -> tuple[IntMatrix, bool]:
    """Basis of ``{y in Z^m : <y, h> = 0 (mod Q)}`` and a degeneracy flag.

    For ``h = 0 (mod Q)`` every integer vector qualifies; the identity is
    returned with the flag set.
    """
    if Q < 2:
        raise ValueError("Q must be at least 2")
    m = len(h)
    hr = [x % Q for x in h]
    if not any(hr):
        return identity(m), True
    piv = next((i for i, x in enumerate(hr) if math.gcd(x, Q) == 1), None)
    if piv is None:
        raise ValueError("h has no coordinate invertible modulo Q")
    inv = pow(hr[piv], -1, Q)
    basis = []
    row = [0] * m
    row[piv] = Q
    basis.append(row)
    for i in range(m):
        if i == piv:
            continue
        row = [0] * m
        row[piv] = (-hr[i] * inv) % Q
        row[i] = 1
        basis.append(row)
    return basis, False


def orthogonal_lattice(
    B: Sequence[Sequence[int]],
    delta: Fraction = DEFAULT_DELTA,
    *,
    ncols: int | None = None,
) -> IntMatrix:
    """LLL-reduced basis of the integer vectors orthogonal to every row of B."""
    if not B:
        if ncols is None:
            raise ValueError("ncols is required for an empty basis")
        return identity(ncols)
    K = int_kernel(B)
    if not K:
        return []
    return lll_reduce(K, delta)


def lattice_contains(B: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """True iff ``v`` is an integer combination of the rows of ``B``."""
    if not B:
        return not any(v)
    return solve_in_hnf(hnf(B), v) is not None


class Membership:
    """Repeated membership tests against one lattice (HNF computed once)."""

    def __init__(self, B: Sequence[Sequence[int]]):
        self.H = hnf(B) if B else []

    def __contains__(self, v: Sequence[int]) -> bool:
        if not self.H:
            return not any(v)
        return solve_in_hnf(self.H, v) is not None
