"""Monte Carlo comparison of random and K-means HSSP instances.

Each run draws one random instance and one K-means instance with seeds
derived from the master seed, attacks both, and records one row per
instance. Rows are returned (and written) in run order whatever the worker
scheduling was.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from .attack import AttackParams, run_attack
from .hssp import baseline_l1, random_hssp
from .kmeans import Dataset, load_dataset, sample_kmeans_instance, weight_rank
from .lattice import DEFAULT_DELTA

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "run_index",
    "provenance",
    "recovered_count",
    "mean_l1_recovered",
    "baseline_l1",
    "true_match_count",
    "x_success",
    "rank_W",
    "wall_time_s",
]


@dataclass
class ExperimentConfig:
    runs: int = 100
    n: int = 10
    m: int = 60
    k: int = 3
    t_max: int = 100
    q_bits: int = 2000
    scale_bits: int = 16
    delta: Fraction = DEFAULT_DELTA
    beta: int | None = None
    combo_depth: int = 2
    dataset_path: str | None = None
    master_seed: int = 0
    output_path: str | None = None
    provenances: tuple[str, ...] = ("random", "kmeans")
    row_sample: bool = False
    standardize: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if "kmeans" in self.provenances and self.m % self.k:
            raise ValueError(f"m={self.m} is not divisible by k={self.k}")

    def attack_params(self) -> AttackParams:
        return AttackParams(delta=Fraction(self.delta), beta=self.beta, combo_depth=self.combo_depth)


@dataclass
class ExperimentRow:
    run_index: int
    provenance: str
    recovered_count: int | None = None
    mean_l1_recovered: Fraction | None = None
    baseline_l1: Fraction | None = None
    true_match_count: int | None = None
    x_success: bool | None = None
    rank_W: int | None = None
    wall_time_s: float = 0.0
    failure: str | None = None
    error: str | None = None
    n: int = 0

    def csv_cells(self) -> list[str]:
        def num(v):
            return "" if v is None else f"{float(v):.6f}"

        def opt(v):
            return "" if v is None else str(v)

        return [
            str(self.run_index),
            self.provenance,
            opt(self.recovered_count),
            num(self.mean_l1_recovered),
            num(self.baseline_l1),
            opt(self.true_match_count),
            "" if self.x_success is None else ("true" if self.x_success else "false"),
            opt(self.rank_W),
            f"{self.wall_time_s:.3f}",
        ]


def derive_seed(master_seed: int, run_index: int, provenance: str) -> int:
    """Stable 63-bit seed for one (run, provenance) cell."""
    digest = hashlib.sha256(f"{master_seed}:{run_index}:{provenance}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def run_one(config: ExperimentConfig, data: Dataset | None, run_index: int, provenance: str) -> ExperimentRow:
    """One attacked instance; any exception is recorded on the row."""
    row = ExperimentRow(run_index=run_index, provenance=provenance, n=config.n)
    seed = derive_seed(config.master_seed, run_index, provenance)
    t0 = time.perf_counter()
    try:
        if provenance == "random":
            inst = random_hssp(config.n, config.m, config.q_bits, seed)
        else:
            if data is None:
                raise ValueError("kmeans runs need a dataset")
            inst, _, _ = sample_kmeans_instance(
                data,
                config.n,
                config.k,
                config.t_max,
                config.m,
                seed,
                scale_bits=config.scale_bits,
                row_sample=config.row_sample,
            )
            row.rank_W = weight_rank(inst)
        rep = run_attack(inst, config.attack_params())
        row.recovered_count = rep.recovered_count
        row.mean_l1_recovered = rep.mean_l1_recovered
        row.baseline_l1 = baseline_l1(inst)
        row.true_match_count = rep.true_match_count
        row.x_success = rep.x_success
        row.failure = rep.failure
    except Exception as exc:  # a bad run must not end the experiment
        log.exception("run %d (%s) failed", run_index, provenance)
        row.error = f"{type(exc).__name__}: {exc}"
    row.wall_time_s = time.perf_counter() - t0
    return row


def _task(args):
    return run_one(*args)


def default_workers() -> int:
    env = os.environ.get("HSSPLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(
    config: ExperimentConfig, data: Dataset | None = None, workers: int | None = None
) -> list[ExperimentRow]:
    if data is None and "kmeans" in config.provenances:
        if not config.dataset_path:
            raise ValueError("a dataset path is required for kmeans runs")
        data = load_dataset(config.dataset_path)
    if data is not None and config.standardize:
        data = data.standardized()
    tasks = [(config, data, r, p) for r in range(config.runs) for p in config.provenances]
    workers = workers or default_workers()
    if workers <= 1 or len(tasks) == 1:
        rows = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_task, tasks))
    if config.output_path:
        write_csv(rows, config.output_path)
        Path(str(config.output_path) + ".summary.json").write_text(
            json.dumps(summarize(rows), indent=1, sort_keys=True) + "\n"
        )
    return rows


def rows_to_csv(rows: list[ExperimentRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_cells())
    return buf.getvalue()


def write_csv(rows: list[ExperimentRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def summarize(rows: list[ExperimentRow]) -> dict:
    """Aggregates per provenance: one block per panel of the comparison plot
    plus the rank statistics of W."""
    out: dict = {}
    for prov in sorted({r.provenance for r in rows}):
        rs = [r for r in rows if r.provenance == prov]
        ok = [r for r in rs if r.error is None]
        block: dict = {"runs": len(rs), "errors": len(rs) - len(ok)}
        if ok:
            n = ok[0].n
            l1 = [float(r.mean_l1_recovered) for r in ok if r.mean_l1_recovered is not None]
            base = float(ok[0].baseline_l1)
            block.update(
                {
                    "mean_recovered_count": statistics.fmean(r.recovered_count for r in ok),
                    "frac_recovered_more_than_n": _frac(r.recovered_count > n for r in ok),
                    "mean_l1_recovered": statistics.fmean(l1) if l1 else None,
                    "baseline_l1": base,
                    "frac_l1_off_baseline_10pct": _frac(
                        r.mean_l1_recovered is None or abs(float(r.mean_l1_recovered) - base) > 0.1 * base
                        for r in ok
                    ),
                    "mean_true_match_count": statistics.fmean(r.true_match_count for r in ok),
                    "frac_full_match": _frac(r.true_match_count == n for r in ok),
                    "frac_zero_match": _frac(r.true_match_count == 0 for r in ok),
                    "x_success_rate": _frac(bool(r.x_success) for r in ok),
                    "failures": _counts(r.failure for r in ok),
                }
            )
            ranks = [r.rank_W for r in ok if r.rank_W is not None]
            if ranks:
                block["mean_rank_W"] = statistics.fmean(ranks)
                block["frac_rank_W_below_n"] = _frac(rk < n for rk in ranks)
        block["error_messages"] = [r.error for r in rs if r.error]
        out[prov] = block
    return out


def _frac(flags) -> float:
    flags = list(flags)
    return sum(flags) / len(flags) if flags else 0.0


def _counts(items) -> dict:
    out: dict = {}
    for it in items:
        key = it or "none"
        out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))


def config_dict(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["delta"] = str(config.delta)
    d["provenances"] = list(config.provenances)
    return d


__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "ExperimentRow",
    "config_dict",
    "derive_seed",
    "run_experiment",
    "run_one",
    "rows_to_csv",
    "summarize",
    "write_csv",
]
