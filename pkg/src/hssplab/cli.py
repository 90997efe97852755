"""Command-line harness: ``hssplab <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from .attack import AttackParams, run_attack
from .experiment import ExperimentConfig, config_dict, rows_to_csv, run_experiment, summarize
from .hssp import (
    HsspInstance,
    InconsistentInstanceError,
    PropositionQuery,
    bound_constants_hold,
    column_l1_norms,
    min_m_bound,
    proposition_mc,
    proposition_probability,
    random_hssp,
)
from .kmeans import DatasetError, load_dataset, sample_kmeans_instance, weight_rank

log = logging.getLogger("hssplab")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _info(msg: str, args) -> None:
    # summaries go to stderr when the payload itself goes to stdout
    print(msg, file=sys.stdout if args.out else sys.stderr)


def _delta(s: str) -> Fraction:
    try:
        d = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not Fraction(1, 4) < d < 1:
        raise argparse.ArgumentTypeError("delta must lie in (1/4, 1)")
    return d


def _epsilon(s: str) -> Fraction:
    try:
        e = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not 0 < e < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return e


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _modulus(s: str) -> int | str:
    return "auto" if s == "auto" else int(s)


# -- subcommands ------------------------------------------------------------------


def cmd_gen_random(args) -> int:
    inst = random_hssp(args.n, args.m, args.q_bits, args.seed)
    inst.check()
    _write(inst.to_json(), args.out)
    _info(f"random instance: n={inst.n} m={inst.m} q_bits={inst.Q.bit_length()} seed={args.seed}", args)
    return 0


def cmd_gen_kmeans(args) -> int:
    data = load_dataset(args.data)
    if args.standardize:
        data = data.standardized()
    if args.n < args.k:
        raise ValueError(f"n={args.n} is smaller than k={args.k}")
    if not args.row_sample and args.m % args.k:
        raise ValueError(f"m={args.m} is not divisible by k={args.k}")
    inst, trace, idx = sample_kmeans_instance(
        data,
        args.n,
        args.k,
        args.t_max,
        args.m,
        args.seed,
        scale_bits=args.scale_bits,
        coordinate=args.coordinate,
        Q=args.q,
        row_sample=args.row_sample,
    )
    if args.all_attributes:
        # same seed: same nodes, trace and iterations, so one shared W
        others = [
            sample_kmeans_instance(
                data,
                args.n,
                args.k,
                args.t_max,
                args.m,
                args.seed,
                scale_bits=args.scale_bits,
                coordinate=a,
                Q=args.q,
                row_sample=args.row_sample,
            )[0].to_dict()
            for a in range(data.d)
        ]
        _write(json.dumps(others, indent=1) + "\n", args.out)
    else:
        _write(inst.to_json(), args.out)
    if args.trace_out:
        payload = trace.to_dict()
        payload["nodes"] = idx
        Path(args.trace_out).write_text(json.dumps(payload) + "\n")
    r = weight_rank(inst)
    _info(
        f"kmeans instance: n={inst.n} m={inst.m} k={inst.k} nodes={idx} "
        f"column_norms={sorted(set(column_l1_norms(inst)))} rank(W)={r}",
        args,
    )
    return 0


def _load_instance(path: str) -> HsspInstance:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InconsistentInstanceError(f"cannot read instance {path}: {exc}") from None
    try:
        inst = HsspInstance.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise InconsistentInstanceError(f"malformed instance {path}: {exc}") from None
    inst.check()
    return inst


def cmd_attack(args) -> int:
    inst = _load_instance(args.instance)
    params = AttackParams(
        delta=args.delta,
        beta=args.beta,
        combo_depth=args.combo_depth,
        propagate=not args.no_propagate,
        lll_backend=args.lll_backend,
        seed=args.seed,
    )
    rep = run_attack(inst, params)
    _write(rep.to_json(), args.out)
    _info(
        f"recovered={rep.recovered_count} true_match={rep.true_match_count}/{inst.n} "
        f"x_success={rep.x_success} failure={rep.failure} total={rep.timings.get('total', 0):.2f}s",
        args,
    )
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig(
        runs=args.runs,
        n=args.n,
        m=args.m,
        k=args.k,
        t_max=args.t_max,
        q_bits=args.q_bits,
        scale_bits=args.scale_bits,
        delta=args.delta,
        beta=args.beta,
        combo_depth=args.combo_depth,
        dataset_path=args.data,
        master_seed=args.seed,
        output_path=args.out,
        provenances=tuple(args.provenance),
        row_sample=args.row_sample,
        standardize=args.standardize,
    )
    rows = run_experiment(cfg, workers=args.workers)
    summary = summarize(rows)
    if not args.out:
        sys.stdout.write(rows_to_csv(rows))
    print(json.dumps({"config": config_dict(cfg), "summary": summary}, indent=1), file=sys.stderr)
    return 0


def cmd_prop_check(args) -> int:
    lines = []
    if args.m is not None:
        q = PropositionQuery(n=args.n, m=args.m, epsilon=args.epsilon, trials=args.trials)
        exact = proposition_probability(q.m)
        est = proposition_mc(q, seed=args.seed)
        p = float(exact)
        sigma = math.sqrt(p * (1 - p) / q.trials)
        lo, hi = float(est) - 1.96 * sigma, float(est) + 1.96 * sigma
        lines.append(f"exact (7/8)^{q.m} = {p:.6f}")
        lines.append(f"monte carlo ({q.trials} trials) = {float(est):.6f}  95% CI [{lo:.6f}, {hi:.6f}]")
        lines.append(f"|estimate - exact| / sigma = {abs(float(est) - p) / sigma if sigma else 0.0:.3f}")
    lines.append(f"min m for n={args.n}, epsilon={float(args.epsilon)}: {min_m_bound(args.n, args.epsilon)}")
    for name, ok in bound_constants_hold().items():
        lines.append(f"constant check {name}: {'ok' if ok else 'FAILED'}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


# -- parser -----------------------------------------------------------------------


def _attack_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=_delta, default=Fraction(99, 100), help="LLL parameter (default 0.99)")
    p.add_argument("--beta", type=int, default=10, help="BKZ block size (default 10)")
    p.add_argument("--combo-depth", type=int, choices=(1, 2, 3), default=2)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--out", help="output file (default: stdout)")
    shared.add_argument("--verbose", "-v", action="count", default=0)

    ap = argparse.ArgumentParser(prog="hssplab", description="HSSP lattice attacks on federated K-means.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-random", parents=[shared], help="random HSSP instance")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--q-bits", type=int, default=2000)
    p.set_defaults(func=cmd_gen_random)

    p = sub.add_parser("gen-kmeans", parents=[shared], help="HSSP instance from a federated K-means run")
    p.add_argument("--data", required=True, help="CSV dataset")
    p.add_argument("--n", type=_positive, default=10)
    p.add_argument("--k", type=_positive, default=3)
    p.add_argument("--t-max", type=_positive, default=100)
    p.add_argument("--m", type=_positive, default=60)
    p.add_argument("--scale-bits", type=int, default=16)
    p.add_argument("--coordinate", type=int, default=0)
    p.add_argument("--all-attributes", action="store_true", help="emit a JSON list, one instance per attribute")
    p.add_argument("--row-sample", action="store_true", help="draw m single rows instead of whole iterations")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--q", type=_modulus, default="auto", help="modulus or 'auto'")
    p.add_argument("--trace-out", help="write the clustering trace here")
    p.set_defaults(func=cmd_gen_kmeans)

    p = sub.add_parser("attack", parents=[shared], help="run the two-step lattice attack")
    p.add_argument("instance", help="instance JSON")
    _attack_flags(p)
    p.add_argument("--no-propagate", action="store_true", help="depth-limited combinations only")
    p.add_argument("--lll-backend", choices=("auto", "exact", "fpylll"), default="auto")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("experiment", parents=[shared], help="Monte Carlo comparison, CSV output")
    p.add_argument("--runs", type=_positive, default=100)
    p.add_argument("--n", type=_positive, default=10)
    p.add_argument("--m", type=_positive, default=60)
    p.add_argument("--k", type=_positive, default=3)
    p.add_argument("--t-max", type=_positive, default=100)
    p.add_argument("--q-bits", type=int, default=2000)
    p.add_argument("--scale-bits", type=int, default=16)
    p.add_argument("--data", help="CSV dataset for the kmeans runs")
    p.add_argument("--provenance", nargs="+", choices=("random", "kmeans"), default=["random", "kmeans"])
    p.add_argument("--row-sample", action="store_true")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--workers", type=_positive, help="worker processes (default: HSSPLAB_THREADS or cpu count)")
    _attack_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("prop-check", parents=[shared], help="three-vector probability and the bound on m")
    p.add_argument("--n", type=_positive, default=10)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=_epsilon, default=Fraction(1, 100))
    p.add_argument("--trials", type=_positive, default=100_000)
    p.set_defaults(func=cmd_prop_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InconsistentInstanceError, DatasetError, ValueError, OSError) as exc:
        print(f"hssplab {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
