"""Hidden subset sum instances, the three-vector probability bound, and
attack scoring."""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import gmpy2
import numpy as np

from .exactmath import transpose

PROVENANCES = ("random", "kmeans")


class InconsistentInstanceError(ValueError):
    """The public samples do not match the stored ground truth."""


@dataclass
class HsspInstance:
    """Public data ``(Q, h)`` together with the hidden ground truth.

    ``truth_weights`` is the ``m x n`` 0/1 matrix whose columns are the hidden
    vectors; ``h = truth_weights @ truth_x (mod Q)``. For K-means instances
    ``h`` holds the (scaled) centroid sums.
    """

    Q: int
    h: list[int]
    truth_weights: list[list[int]]
    truth_x: list[int]
    provenance: str = "random"
    scale_bits: int = 0
    k: int | None = None
    seed: int | None = None
    sampling: str = "iteration"

    @property
    def m(self) -> int:
        return len(self.h)

    @property
    def n(self) -> int:
        return len(self.truth_x)

    def columns(self) -> list[list[int]]:
        return transpose(self.truth_weights) if self.truth_weights else []

    def check(self) -> None:
        """Raise :class:`InconsistentInstanceError` unless every invariant holds."""
        if self.provenance not in PROVENANCES:
            raise InconsistentInstanceError(f"unknown provenance {self.provenance!r}")
        if self.Q < 2:
            raise InconsistentInstanceError("Q must be at least 2")
        if len(self.truth_weights) != self.m:
            raise InconsistentInstanceError("truth_weights must have m rows")
        for row in self.truth_weights:
            if len(row) != self.n:
                raise InconsistentInstanceError("truth_weights must have n columns")
            if any(a not in (0, 1) for a in row):
                raise InconsistentInstanceError("truth_weights must be binary")
        for i, row in enumerate(self.truth_weights):
            s = sum(a * x for a, x in zip(row, self.truth_x))
            if (s - self.h[i]) % self.Q:
                raise InconsistentInstanceError(f"sample {i} does not match W x mod Q")
        if self.provenance == "kmeans" and self.sampling == "iteration":
            if not self.k or self.m % self.k:
                raise InconsistentInstanceError("kmeans instance needs k dividing m")
            norm = self.m // self.k
            for j, col in enumerate(self.columns()):
                if sum(col) != norm:
                    raise InconsistentInstanceError(f"column {j} has L1 norm {sum(col)} != m/k")

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "provenance": self.provenance,
            "n": self.n,
            "m": self.m,
        }
        if self.k is not None:
            d["k"] = self.k
        d["scale_bits"] = self.scale_bits
        d["Q"] = str(self.Q)
        d["h"] = [str(v) for v in self.h]
        d["truth_weights"] = [list(row) for row in self.truth_weights]
        d["truth_x"] = [str(v) for v in self.truth_x]
        d["seed"] = self.seed
        if self.provenance == "kmeans":
            d["sampling"] = self.sampling
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "HsspInstance":
        inst = cls(
            Q=int(d["Q"]),
            h=[int(v) for v in d["h"]],
            truth_weights=[[int(a) for a in row] for row in d["truth_weights"]],
            truth_x=[int(v) for v in d["truth_x"]],
            provenance=d["provenance"],
            scale_bits=int(d.get("scale_bits", 0)),
            k=d.get("k"),
            seed=d.get("seed"),
            sampling=d.get("sampling", "iteration"),
        )
        if inst.n != int(d["n"]) or inst.m != int(d["m"]):
            raise InconsistentInstanceError("n/m fields disagree with the data")
        return inst

    @classmethod
    def from_json(cls, text: str) -> "HsspInstance":
        return cls.from_dict(json.loads(text))


def random_prime(bits: int, rng: random.Random) -> int:
    """Uniform-ish random prime with exactly ``bits`` bits.

    40 Miller-Rabin rounds: error probability below 2^-80.
    """
    if bits < 2:
        raise ValueError("need at least 2 bits for a prime")
    if bits == 2:
        return rng.choice((2, 3))
    while True:
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if gmpy2.is_prime(cand, 40):
            return int(cand)


def random_hssp(n: int, m: int, q_bits: int, seed: int) -> HsspInstance:
    """Random HSSP instance: uniform ``x`` in Z_Q and fair-coin weights."""
    if not m > n >= 1:
        raise ValueError("need m > n >= 1")
    rng = random.Random(seed)
    Q = random_prime(q_bits, rng)
    x = [rng.randrange(Q) for _ in range(n)]
    A = [[rng.getrandbits(1) for _ in range(n)] for _ in range(m)]
    h = [sum(a * xi for a, xi in zip(row, x)) % Q for row in A]
    return HsspInstance(Q=Q, h=h, truth_weights=A, truth_x=x, provenance="random", seed=seed)


# -- the three-vector bound ------------------------------------------------


@dataclass(frozen=True)
class PropositionQuery:
    n: int
    m: int
    epsilon: Fraction
    trials: int

    def __post_init__(self):
        if not 0 < Fraction(self.epsilon) < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.trials < 1 or self.m < 0 or self.n < 1:
            raise ValueError("need trials >= 1, m >= 0, n >= 1")


def proposition_probability(m: int) -> Fraction:
    """Exact probability that a_i + a_j - a_k lies in {-1,0,1}^m."""
    if m < 0:
        raise ValueError("m must be non-negative")
    return Fraction(7, 8) ** m


def proposition_mc(query: PropositionQuery, seed: int | None = None, chunk: int = 1 << 16) -> Fraction:
    """Monte Carlo estimate of :func:`proposition_probability` for ``query.m``."""
    if query.m == 0:
        return Fraction(1)
    rng = np.random.default_rng(seed)
    hits = 0
    left = query.trials
    while left:
        t = min(left, chunk)
        a, b, c = (rng.integers(0, 2, size=(t, query.m), dtype=np.int8) for _ in range(3))
        # a + b - c >= -1 always; only a value of 2 leaves {-1, 0, 1}
        hits += int(np.count_nonzero(~((a + b - c) == 2).any(axis=1)))
        left -= t
    return Fraction(hits, query.trials)


def min_m_bound(n: int, epsilon: Fraction | float) -> int:
    """Smallest integer m with m >= 16 log2(n) - 6 log2(epsilon)."""
    eps = Fraction(epsilon)
    if n < 1 or not 0 < eps < 1:
        raise ValueError("need n >= 1 and 0 < epsilon < 1")
    return math.ceil(16 * math.log2(n) - 6 * math.log2(eps))


def bound_constants_hold() -> dict[str, bool]:
    """Exact checks of the two constants used to simplify the bound.

    ``16 > 3 / -log2(7/8)`` iff ``(8/7)^16 > 2^3`` and ``6 > 1 / -log2(7/8)``
    iff ``(8/7)^6 > 2``; both become integer comparisons.
    """
    return {
        "16 > 3/-log2(7/8)": 8**16 > 2**3 * 7**16,
        "-6 < 1/log2(7/8)": 8**6 > 2 * 7**6,
    }


# -- attack reports --------------------------------------------------------


@dataclass
class AttackReport:
    """Outcome of one attack, with evaluation metrics once scored."""

    short_vectors: list[list[int]] = field(default_factory=list)
    recovered_binary: list[list[int]] = field(default_factory=list)
    recovered_count: int = 0
    mean_l1_recovered: Fraction | None = None
    true_match_count: int = 0
    x_recovered: list[int] | None = None
    x_success: bool = False
    failure: str | None = None
    step1_truth_in_lattice: bool | None = None
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        def vecs(vs):
            return [[str(a) for a in v] for v in vs]

        mean = self.mean_l1_recovered
        return {
            "recovered_count": self.recovered_count,
            "mean_l1_recovered": None if mean is None else f"{mean.numerator}/{mean.denominator}",
            "true_match_count": self.true_match_count,
            "x_success": self.x_success,
            "failure": self.failure,
            "step1_truth_in_lattice": self.step1_truth_in_lattice,
            "x_recovered": None if self.x_recovered is None else [str(a) for a in self.x_recovered],
            "short_vectors": vecs(self.short_vectors),
            "recovered_binary": vecs(self.recovered_binary),
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AttackReport":
        mean = d.get("mean_l1_recovered")
        xr = d.get("x_recovered")
        return cls(
            short_vectors=[[int(a) for a in v] for v in d.get("short_vectors", [])],
            recovered_binary=[[int(a) for a in v] for v in d.get("recovered_binary", [])],
            recovered_count=d.get("recovered_count", 0),
            mean_l1_recovered=None if mean is None else Fraction(mean),
            true_match_count=d.get("true_match_count", 0),
            x_recovered=None if xr is None else [int(a) for a in xr],
            x_success=d.get("x_success", False),
            failure=d.get("failure"),
            step1_truth_in_lattice=d.get("step1_truth_in_lattice"),
            timings=dict(d.get("timings", {})),
        )


def evaluate_attack(instance: HsspInstance, report: AttackReport) -> AttackReport:
    """Fill the scoring fields of ``report`` against the instance's ground truth.

    Matching is exact vector equality with the truth columns; ``x_success``
    compares multisets modulo ``Q`` (the hidden values are only defined up to
    a permutation).
    """
    rec = {tuple(v) for v in report.recovered_binary}
    truth = {tuple(c) for c in instance.columns()}
    report.recovered_count = len(rec)
    if rec:
        report.mean_l1_recovered = Fraction(sum(sum(v) for v in rec), len(rec))
    else:
        report.mean_l1_recovered = None
    report.true_match_count = len(rec & truth)
    if report.x_recovered is not None and len(report.x_recovered) == instance.n:
        got = Counter(v % instance.Q for v in report.x_recovered)
        want = Counter(v % instance.Q for v in instance.truth_x)
        report.x_success = got == want
    else:
        report.x_success = False
    if report.failure is None and report.x_recovered is not None and not report.x_success:
        # consistent with every sample, yet not the hidden data
        report.failure = "wrong_solution"
    return report


def baseline_l1(instance: HsspInstance) -> Fraction:
    """Expected column norm: m/2 for random instances, m/k for K-means ones."""
    if instance.provenance == "kmeans":
        return Fraction(instance.m, instance.k)
    return Fraction(instance.m, 2)


def column_l1_norms(instance: HsspInstance) -> list[int]:
    return [sum(c) for c in instance.columns()]

