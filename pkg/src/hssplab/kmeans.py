"""In-process simulation of federated K-means and its HSSP view.

Every node holds one point. Each iteration the nodes pick their nearest
centroid and the coordinator receives the per-cluster sums. Points are held
in fixed point (``round(x * 2**scale_bits)``) so the sums are exact integers
and centroids are exact rationals.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import gmpy2

from .exactmath import rank, transpose
from .hssp import HsspInstance

log = logging.getLogger(__name__)

Number = int | Fraction | float


class DatasetError(ValueError):
    pass


@dataclass
class Dataset:
    points: list[list[Fraction]]
    labels: list[str] | None = None
    header: list[str] | None = None

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return len(self.points[0]) if self.points else 0

    def subset(self, idx: Sequence[int]) -> "Dataset":
        labels = [self.labels[i] for i in idx] if self.labels else None
        return Dataset([list(self.points[i]) for i in idx], labels, self.header)

    def standardized(self) -> "Dataset":
        """Zero-mean, unit-variance copy (population std, per attribute)."""
        cols = transpose(self.points)
        out_cols = []
        for col in cols:
            fl = [float(v) for v in col]
            mu = statistics.fmean(fl)
            sd = statistics.pstdev(fl) or 1.0
            out_cols.append([Fraction((v - mu) / sd) for v in fl])
        return Dataset(transpose(out_cols), self.labels, self.header)


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 3
    t_max: int = 100
    init_seed: int = 0
    coordinate: int = 0
    scale_bits: int = 16

    def __post_init__(self):
        if self.k < 1 or self.t_max < 1:
            raise ValueError("need k >= 1 and t_max >= 1")


@dataclass
class KMeansTrace:
    """Everything the coordinator sees, iteration by iteration.

    ``assignments[t][i]`` is the (0-based) cluster of node ``i`` at iteration
    ``t``; ``centroid_sums[t]``, ``cluster_sizes[t]`` and ``centroids[t]`` are
    the aggregates computed from those assignments. ``wcss[t]`` is measured
    against the centroids used for the assignment. All sums are in fixed point.
    """

    k: int
    scale_bits: int
    initial_centroids: list[list[Fraction]]
    assignments: list[list[int]] = field(default_factory=list)
    centroid_sums: list[list[list[int]]] = field(default_factory=list)
    cluster_sizes: list[list[int]] = field(default_factory=list)
    centroids: list[list[list[Fraction]]] = field(default_factory=list)
    wcss: list[Fraction] = field(default_factory=list)

    @property
    def t_max(self) -> int:
        return len(self.assignments)

    def to_dict(self) -> dict:
        def frac(v: Fraction) -> str:
            return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

        return {
            "k": self.k,
            "t_max": self.t_max,
            "scale_bits": self.scale_bits,
            "initial_centroids": [[frac(v) for v in c] for c in self.initial_centroids],
            "assignments": self.assignments,
            "centroid_sums": [[[str(v) for v in c] for c in it] for it in self.centroid_sums],
            "cluster_sizes": self.cluster_sizes,
            "centroids": [[[frac(v) for v in c] for c in it] for it in self.centroids],
            "wcss": [frac(v) for v in self.wcss],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "KMeansTrace":
        return cls(
            k=d["k"],
            scale_bits=d["scale_bits"],
            initial_centroids=[[Fraction(v) for v in c] for c in d["initial_centroids"]],
            assignments=[list(a) for a in d["assignments"]],
            centroid_sums=[[[int(v) for v in c] for c in it] for it in d["centroid_sums"]],
            cluster_sizes=[list(s) for s in d["cluster_sizes"]],
            centroids=[[[Fraction(v) for v in c] for c in it] for it in d["centroids"]],
            wcss=[Fraction(v) for v in d["wcss"]],
        )


@dataclass
class WeightMatrix:
    W: list[list[int]]
    selected_iterations: list[int]


# -- fixed point ------------------------------------------------------------


def to_fixed(x: Number, scale_bits: int) -> int:
    """``round(x * 2**scale_bits)`` with halves rounded up, computed exactly."""
    v = Fraction(x) * (1 << scale_bits)
    return math.floor(v + Fraction(1, 2))


def fixed_points(data: Dataset, scale_bits: int) -> list[list[int]]:
    return [[to_fixed(v, scale_bits) for v in p] for p in data.points]


# -- protocol steps ----------------------------------------------------------


def _sqdist(p: Sequence[Number], c: Sequence[Number]):
    return sum((a - b) * (a - b) for a, b in zip(p, c))


def assign(point: Sequence[Number], centroids: Sequence[Sequence[Number]]) -> int:
    """Index of the nearest centroid (squared Euclidean); ties go to the lowest index."""
    if not centroids:
        raise ValueError("need at least one centroid")
    best, best_d = 0, _sqdist(point, centroids[0])
    for j in range(1, len(centroids)):
        dj = _sqdist(point, centroids[j])
        if dj < best_d:
            best, best_d = j, dj
    return best


def aggregate(points, labels, k, previous=None):
    """Per-cluster sums, sizes and centroids for 0-based ``labels``.

    A cluster that received no point keeps its ``previous`` centroid (or None
    when there is none); its sum is the zero vector.
    """
    d = len(points[0]) if len(points) else 0
    sums = [[0] * d for _ in range(k)]
    sizes = [0] * k
    for p, lab in zip(points, labels):
        if not 0 <= lab < k:
            raise ValueError(f"label {lab} outside [0, {k})")
        sizes[lab] += 1
        s = sums[lab]
        for a in range(d):
            s[a] += p[a]
    centroids = []
    for j in range(k):
        if sizes[j]:
            centroids.append([Fraction(v, sizes[j]) for v in sums[j]])
        else:
            centroids.append(list(previous[j]) if previous is not None else None)
    return sums, sizes, centroids


def wcss(points, labels, centroids) -> Fraction:
    return sum((Fraction(_sqdist(p, centroids[lab])) for p, lab in zip(points, labels)), Fraction(0))


def run_federated_kmeans(
    data: Dataset, config: KMeansConfig, init: Sequence[Sequence[Number]] | None = None
) -> KMeansTrace:
    """Run exactly ``config.t_max`` Lloyd iterations (no early stop).

    Initial centroids are ``init`` (in data units) when given, otherwise
    ``k`` distinct data points drawn with ``config.init_seed``.
    """
    if data.n < config.k:
        raise ValueError(f"need at least k={config.k} points, got {data.n}")
    pts = fixed_points(data, config.scale_bits)
    if init is not None:
        if len(init) != config.k:
            raise ValueError(f"expected {config.k} initial centroids, got {len(init)}")
        cents = [[Fraction(to_fixed(v, config.scale_bits)) for v in c] for c in init]
    else:
        rng = random.Random(config.init_seed)
        cents = [[Fraction(v) for v in pts[i]] for i in rng.sample(range(data.n), config.k)]
    trace = KMeansTrace(k=config.k, scale_bits=config.scale_bits, initial_centroids=[list(c) for c in cents])
    for _ in range(config.t_max):
        labels = [assign(p, cents) for p in pts]
        trace.wcss.append(wcss(pts, labels, cents))
        sums, sizes, cents = aggregate(pts, labels, config.k, previous=cents)
        trace.assignments.append(labels)
        trace.centroid_sums.append(sums)
        trace.cluster_sizes.append(sizes)
        trace.centroids.append([list(c) for c in cents])
    return trace


def build_weight_matrix(trace: KMeansTrace, selected_iterations: Sequence[int]) -> WeightMatrix:
    """Stack the 0/1 membership rows, iteration-major and cluster-minor."""
    W = []
    for t in selected_iterations:
        if not 0 <= t < trace.t_max:
            raise ValueError(f"iteration {t} was not recorded")
        lab = trace.assignments[t]
        for j in range(trace.k):
            W.append([int(l == j) for l in lab])
    return WeightMatrix(W=W, selected_iterations=list(selected_iterations))


def auto_modulus(x_int: Sequence[int]) -> int:
    """Smallest prime above ``4 n max|x|`` so ``W x`` never wraps around."""
    bound = 4 * len(x_int) * max((abs(v) for v in x_int), default=0)
    return int(gmpy2.next_prime(bound))


def kmeans_hssp_instance(
    trace: KMeansTrace,
    data: Dataset,
    config: KMeansConfig,
    m: int,
    Q: int | str = "auto",
    subsample_seed: int = 0,
    *,
    row_sample: bool = False,
    seed: int | None = None,
) -> HsspInstance:
    """Turn a trace into an HSSP instance ``h = W x (mod Q)``.

    By default ``m/k`` whole iterations are drawn without replacement, so every
    column of ``W`` has L1 norm ``m/k``. ``row_sample`` draws ``m`` individual
    (iteration, cluster) rows instead.
    """
    k = trace.k
    rng = random.Random(subsample_seed)
    if row_sample:
        if m > k * trace.t_max:
            raise ValueError("m exceeds the number of recorded rows")
        full = build_weight_matrix(trace, range(trace.t_max)).W
        rows = sorted(rng.sample(range(len(full)), m))
        W = [full[r] for r in rows]
    else:
        if m % k:
            raise ValueError(f"m={m} is not divisible by k={k}")
        if m // k > trace.t_max:
            raise ValueError(f"m/k={m // k} exceeds t_max={trace.t_max}")
        its = sorted(rng.sample(range(trace.t_max), m // k))
        W = build_weight_matrix(trace, its).W
    x_int = [to_fixed(p[config.coordinate], config.scale_bits) for p in data.points]
    if Q == "auto":
        Q = auto_modulus(x_int)
    Q = int(Q)
    x = [v % Q for v in x_int]
    h = [sum(w * xi for w, xi in zip(row, x)) % Q for row in W]
    inst = HsspInstance(
        Q=Q,
        h=h,
        truth_weights=W,
        truth_x=x,
        provenance="kmeans",
        scale_bits=config.scale_bits,
        k=k,
        seed=seed,
        sampling="row" if row_sample else "iteration",
    )
    inst.check()
    return inst


def kmeans_hssp_instances(trace, data, config, m, Q="auto", subsample_seed=0, **kw) -> list[HsspInstance]:
    """One instance per attribute; all share the same weight matrix."""
    out = []
    for a in range(data.d):
        cfg = KMeansConfig(config.k, config.t_max, config.init_seed, a, config.scale_bits)
        out.append(kmeans_hssp_instance(trace, data, cfg, m, Q, subsample_seed, **kw))
    return out


def weight_rank(instance: HsspInstance) -> int:
    return rank(instance.truth_weights)


# -- dataset IO ---------------------------------------------------------------


def _is_number(s: str) -> bool:
    try:
        Fraction(s.strip())
    except (ValueError, ZeroDivisionError):
        return False
    return True


def load_dataset(path: str | Path) -> Dataset:
    """Read a comma-separated file of decimal attributes.

    The first row is a header when a cell other than the last is non-numeric
    (or no cell is numeric). A trailing non-numeric column is kept as class
    labels and not clustered.
    """
    with open(path, newline="") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh)) if any(c.strip() for c in r)]
    if not rows:
        raise DatasetError(f"{path}: empty file")
    header = None
    first = rows[0][1]
    if not all(_is_number(c) for c in first[:-1]) or not any(_is_number(c) for c in first):
        header = [c.strip() for c in first]
        rows = rows[1:]
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    width = len(rows[0][1])
    has_label = not _is_number(rows[0][1][-1])
    nattr = width - 1 if has_label else width
    if nattr < 1:
        raise DatasetError(f"{path}: no numeric attribute columns")
    points, labels = [], []
    for lineno, r in rows:
        if len(r) != width:
            raise DatasetError(f"{path}:{lineno}: expected {width} fields, got {len(r)}")
        try:
            points.append([Fraction(c.strip()) for c in r[:nattr]])
        except (ValueError, ZeroDivisionError):
            raise DatasetError(f"{path}:{lineno}: non-numeric attribute value") from None
        if has_label:
            labels.append(r[-1].strip())
    log.info("loaded %s: %d rows x %d attributes", path, len(points), nattr)
    return Dataset(points, labels if has_label else None, header)


def save_dataset(data: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if data.header:
            w.writerow(data.header)
        for i, p in enumerate(data.points):
            row = [str(float(v)) if v.denominator != 1 else str(v.numerator) for v in p]
            if data.labels:
                row.append(data.labels[i])
            w.writerow(row)


def sample_kmeans_instance(
    data: Dataset,
    n: int,
    k: int,
    t_max: int,
    m: int,
    seed: int,
    *,
    scale_bits: int = 16,
    coordinate: int = 0,
    Q: int | str = "auto",
    row_sample: bool = False,
) -> tuple[HsspInstance, KMeansTrace, list[int]]:
    """Draw ``n`` nodes from ``data``, cluster them, and build the instance.

    The node subset, the centroid initialisation and the iteration selection
    all derive from ``seed``. Returns the instance, the trace and the indices
    of the chosen nodes.
    """
    if n > data.n:
        raise ValueError(f"cannot draw n={n} nodes from {data.n} points")
    rng = random.Random(seed)
    idx = sorted(rng.sample(range(data.n), n))
    init_seed = rng.getrandbits(64)
    subsample_seed = rng.getrandbits(64)
    sub = data.subset(idx)
    cfg = KMeansConfig(k=k, t_max=t_max, init_seed=init_seed, coordinate=coordinate, scale_bits=scale_bits)
    trace = run_federated_kmeans(sub, cfg)
    inst = kmeans_hssp_instance(trace, sub, cfg, m, Q, subsample_seed, row_sample=row_sample, seed=seed)
    return inst, trace, idx
