"""Nguyen-Stern attack on hidden subset sum instances.

Step 1 reduces the lattice of vectors orthogonal to ``h`` modulo ``Q``; its
first ``m - n`` reduced vectors should span the vectors orthogonal to the
hidden weight matrix, and the orthogonal of those contains every hidden
column. Step 2 BKZ-reduces that rank-``n`` lattice, reads binary vectors off
short combinations, and solves for the hidden values modulo ``Q``.

Only the public part of an instance (``Q``, ``h``, ``n``) is used here;
scoring against the ground truth lives in :func:`hssplab.hssp.evaluate_attack`.
"""

from __future__ import annotations

import itertools
import logging
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .exactmath import (
    IntMatrix,
    determinant,
    modular_solve,
    rank,
    transpose,
)
from .hssp import AttackReport, HsspInstance, evaluate_attack
from .lattice import (
    DEFAULT_DELTA,
    DEFAULT_ENUM_LIMIT,
    Membership,
    ReductionParams,
    bkz_reduce,
    lll_reduce,
    orthogonal_lattice,
    orthogonal_lattice_mod,
)

log = logging.getLogger(__name__)

FAILURES = (
    "step1_gap_failure",
    "no_binary_found",
    "no_invertible_submatrix",
    "verification_failed",
    "wrong_solution",
)


class DegenerateInstanceError(ValueError):
    pass


@dataclass(frozen=True)
class AttackParams:
    """Tunables of the attack.

    ``beta=None`` means ``min(rank, 20)``. ``combo_depth`` bounds the direct
    combinations of short vectors tried (3 is a diagnostic mode).
    ``propagate`` extends recovered binary vectors along the difference-type
    short vectors (those with both signs), see
    :func:`recover_binary_vectors`.
    """

    delta: Fraction = DEFAULT_DELTA
    beta: int | None = None
    combo_depth: int = 2
    enum_limit: int = DEFAULT_ENUM_LIMIT
    propagate: bool = True
    subset_budget: int = 100
    lll_backend: str = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.combo_depth < 1:
            raise ValueError("combo_depth must be >= 1")
        if self.combo_depth > 3:
            raise ValueError("combo_depth above 3 is not supported")


@dataclass
class Step1Output:
    ortho_basis: IntMatrix
    completed_basis: IntMatrix


def ns_step1(instance: HsspInstance, params: AttackParams | None = None) -> Step1Output:
    params = params or AttackParams()
    m, n = instance.m, instance.n
    if not m > n:
        raise ValueError("need m > n")
    basis, degenerate = orthogonal_lattice_mod(instance.h, instance.Q)
    if degenerate:
        raise DegenerateInstanceError("degenerate instance: h = 0 mod Q")
    reduced = lll_reduce(basis, params.delta, backend=params.lll_backend)
    ortho = reduced[: m - n]
    completed = orthogonal_lattice(ortho, params.delta)
    return Step1Output(ortho_basis=ortho, completed_basis=completed)


def _as_binary(v: Sequence[int]) -> tuple[int, ...] | None:
    """v or -v when one of them is a nonzero 0/1 vector."""
    pos = neg = False
    for a in v:
        if a == 1:
            pos = True
        elif a == -1:
            neg = True
        elif a != 0:
            return None
        if pos and neg:
            return None
    if pos:
        return tuple(v)
    if neg:
        return tuple(-a for a in v)
    return None


def recover_binary_vectors(
    short_vectors: Sequence[Sequence[int]],
    combo_depth: int = 2,
    *,
    propagate: bool = False,
) -> list[list[int]]:
    """Binary vectors among small signed combinations of ``short_vectors``.

    Tries ``c1 v_i`` and, up to ``combo_depth``, ``c1 v_i + c2 v_j (+ c3 v_l)``
    with signs in {-1, +1}. With ``propagate`` every binary vector found is
    also extended by ``+-v`` for each short vector ``v`` having both signs
    (a difference of two hidden vectors) until nothing new appears.
    Output is deduplicated and sorted.
    """
    if not short_vectors:
        raise ValueError("need at least one short vector")
    vs = [list(v) for v in short_vectors]
    found: set[tuple[int, ...]] = set()
    for v in vs:
        b = _as_binary(v)
        if b:
            found.add(b)
    if combo_depth >= 2:
        for v, w in itertools.combinations(vs, 2):
            for s in (1, -1):
                b = _as_binary([a + s * c for a, c in zip(v, w)])
                if b:
                    found.add(b)
    if combo_depth >= 3:
        for u, v, w in itertools.combinations(vs, 3):
            for s, t in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                b = _as_binary([a + s * c + t * e for a, c, e in zip(u, v, w)])
                if b:
                    found.add(b)
    if propagate:
        mixed = [v for v in vs if min(v) < 0 < max(v)]
        frontier = sorted(found)
        while frontier:
            u = frontier.pop()
            for v in mixed:
                for s in (1, -1):
                    b = _as_binary([a + s * c for a, c in zip(u, v)])
                    if b and b not in found:
                        found.add(b)
                        frontier.append(b)
    return [list(b) for b in sorted(found)]


def find_invertible_rows(
    A: Sequence[Sequence[int]], Q: int, rng: random.Random | None = None, retries: int = 200
) -> list[int] | None:
    """Indices of ``n`` rows of the ``m x n`` matrix ``A`` whose determinant is a unit mod Q.

    Greedy pivoting first; then every subset when ``m <= 20``, otherwise
    ``retries`` greedy passes over random row orders.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if m < n or n == 0:
        return None

    def greedy(order: Sequence[int]) -> list[int] | None:
        chosen: list[int] = []
        for i in order:
            if rank([A[j] for j in chosen] + [A[i]]) == len(chosen) + 1:
                chosen.append(i)
                if len(chosen) == n:
                    break
        if len(chosen) == n and _unit(determinant([A[j] for j in chosen]), Q):
            return sorted(chosen)
        return None

    got = greedy(range(m))
    if got is not None:
        return got
    if rank(A) < n:
        return None
    if m <= 20:
        for rows in itertools.combinations(range(m), n):
            if _unit(determinant([A[j] for j in rows]), Q):
                return list(rows)
        return None
    rng = rng or random.Random(0)
    order = list(range(m))
    for _ in range(retries):
        rng.shuffle(order)
        got = greedy(order)
        if got is not None:
            return got
    return None


def _unit(det: int, Q: int) -> bool:
    return gcd(det, Q) == 1


def solve_x(
    candidate_A: Sequence[Sequence[int]], h: Sequence[int], Q: int, rng: random.Random | None = None
) -> list[int] | None:
    """Hidden values for weights ``candidate_A`` (m x n), verified on all of ``h``.

    Returns None when no invertible ``n x n`` row subset is found or the
    solution does not reproduce every sample.
    """
    rows = find_invertible_rows(candidate_A, Q, rng)
    if rows is None:
        return None
    x = modular_solve([candidate_A[i] for i in rows], [h[i] for i in rows], Q)
    if _verifies(candidate_A, x, h, Q):
        return x
    return None


def _verifies(A, x, h, Q) -> bool:
    return all((sum(a * b for a, b in zip(row, x)) - hi) % Q == 0 for row, hi in zip(A, h))


def _independent_subsets(vectors: list[list[int]], n: int, budget: int, rng: random.Random):
    """Up to ``budget`` distinct index sets of ``n`` independent vectors.

    The first pass is greedy over the vectors sorted shortest first; later
    passes are greedy over shuffled orders.
    """
    order = sorted(range(len(vectors)), key=lambda i: (sum(abs(a) for a in vectors[i]), vectors[i]))
    seen: set[tuple[int, ...]] = set()
    for attempt in range(budget):
        if attempt:
            rng.shuffle(order)
        chosen: list[int] = []
        for i in order:
            if rank([vectors[j] for j in chosen] + [vectors[i]]) == len(chosen) + 1:
                chosen.append(i)
                if len(chosen) == n:
                    break
        key = tuple(sorted(chosen))
        if len(chosen) == n and key not in seen:
            seen.add(key)
            yield list(key)


def ns_step2(step1: Step1Output, instance: HsspInstance, params: AttackParams | None = None) -> AttackReport:
    params = params or AttackParams()
    n, Q, h = instance.n, instance.Q, instance.h
    report = AttackReport()
    C = step1.completed_basis
    if len(C) != n:
        log.info("completed lattice has rank %d, expected %d", len(C), n)
    t0 = time.perf_counter()
    beta = params.beta if params.beta is not None else min(len(C), 20)
    beta = max(2, min(beta, len(C), params.enum_limit))
    short = bkz_reduce(C, ReductionParams(params.delta, beta)) if len(C) > 1 else [list(r) for r in C]
    report.short_vectors = short
    t1 = time.perf_counter()
    report.timings["step2_bkz"] = t1 - t0
    report.recovered_binary = (
        recover_binary_vectors(short, params.combo_depth, propagate=params.propagate) if short else []
    )
    t2 = time.perf_counter()
    report.timings["step2_recover"] = t2 - t1
    rec = report.recovered_binary
    if not rec:
        report.failure = "no_binary_found"
    elif rank(rec) < n:
        report.failure = "no_invertible_submatrix"
    else:
        rng = random.Random(params.seed)
        any_invertible = False
        for combo in _independent_subsets(rec, n, params.subset_budget, rng):
            A = transpose([rec[i] for i in combo])
            rows = find_invertible_rows(A, Q, rng)
            if rows is None:
                continue
            any_invertible = True
            x = modular_solve([A[i] for i in rows], [h[i] for i in rows], Q)
            if _verifies(A, x, h, Q):
                report.x_recovered = x
                break
        if report.x_recovered is None:
            report.failure = "verification_failed" if any_invertible else "no_invertible_submatrix"
    report.timings["step2_solve"] = time.perf_counter() - t2
    return report


def run_attack(instance: HsspInstance, params: AttackParams | None = None, *, evaluate: bool = True) -> AttackReport:
    """Both steps, timed, and (by default) scored against the ground truth."""
    params = params or AttackParams()
    t0 = time.perf_counter()
    s1 = ns_step1(instance, params)
    t1 = time.perf_counter()
    report = ns_step2(s1, instance, params)
    report.timings = {"step1": t1 - t0, **report.timings, "total": time.perf_counter() - t0}
    if evaluate:
        evaluate_attack(instance, report)
        mem = Membership(s1.completed_basis)
        report.step1_truth_in_lattice = all(c in mem for c in instance.columns())
        if not report.step1_truth_in_lattice:
            report.failure = "step1_gap_failure"
    return report
