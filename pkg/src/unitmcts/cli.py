"""Command-line interface.

Subcommands: ``prop`` (property optimization from scratch), ``constrained``
(similarity-constrained improvement), ``baseline`` (random walk / greedy
under the same limits), and ``score`` (one-shot molecule scoring).
Exit codes: 0 success, 2 configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import harness, properties, smiles
from .mcts import SearchConfig


def _default_seed() -> int:
    return int(os.environ.get("UNITMCTS_SEED", "0"))


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seeds", type=int, default=1, help="number of independent seeds")
    p.add_argument("--seed", type=int, default=_default_seed(), help="base RNG seed")
    p.add_argument("--iters", type=int, default=100, help="search iterations per move")
    p.add_argument("--c", type=float, default=1.0, help="exploration constant")
    p.add_argument("--k", type=int, default=10, help="expansion width (0 = unlimited)")
    p.add_argument("--epsilon", type=float, default=0.1, help="rollout exploration probability")
    p.add_argument("--alpha", type=float, default=1.0, help="reward scaling factor")
    p.add_argument("--rollout-depth", type=int, default=5)
    p.add_argument("--budget", type=int, default=None, help="unique-evaluation budget")
    p.add_argument("--out", default=None, help="report file path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _config_from(args) -> SearchConfig:
    return SearchConfig(
        c=args.c,
        k=None if args.k == 0 else args.k,
        epsilon=args.epsilon,
        rollout_depth=args.rollout_depth,
        alpha=args.alpha,
        num_iterations=args.iters,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unitmcts")
    sub = parser.add_subparsers(dest="command", required=True)

    p_prop = sub.add_parser("prop", help="property optimization from the empty molecule")
    p_prop.add_argument("--objective", choices=("qed", "plogp"), required=True)
    p_prop.add_argument("--steps", type=int, default=38)
    _add_search_flags(p_prop)

    p_con = sub.add_parser("constrained", help="similarity-constrained improvement")
    p_con.add_argument("--start-file", default=None, help="SMILES list (default: bundled sample)")
    p_con.add_argument("--delta", type=float, required=True)
    p_con.add_argument("--steps", type=int, default=20)
    _add_search_flags(p_con)

    p_base = sub.add_parser("baseline", help="random-walk or greedy search")
    p_base.add_argument("--policy", choices=("random", "greedy"), required=True)
    p_base.add_argument("--objective", choices=("qed", "plogp"), required=True)
    p_base.add_argument("--steps", type=int, default=38)
    _add_search_flags(p_base)

    p_score = sub.add_parser("score", help="score one SMILES string")
    p_score.add_argument("--smiles", required=True)
    p_score.add_argument("--objective", choices=("qed", "plogp"), required=True)
    return parser


def _emit(record: harness.RunRecord, args) -> None:
    text = record.to_csv() if args.format == "csv" else record.to_json()
    if args.out:
        harness.emit_report(record, args.format, args.out)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "prop":
            record = harness.run_property_task(
                args.objective, args.steps,
                num_seeds=args.seeds, seed=args.seed,
                config=_config_from(args), budget=args.budget,
            )
            _emit(record, args)
        elif args.command == "constrained":
            start = args.start_file or harness.bundled_start_set()
            record = harness.run_constrained_task(
                start, args.delta, max_steps=args.steps, seed=args.seed,
                config=_config_from(args), budget_per_start=args.budget,
            )
            _emit(record, args)
        elif args.command == "baseline":
            policy = {"random": "random_walk", "greedy": "greedy"}[args.policy]
            record = harness.run_baseline(
                policy, args.objective, args.steps,
                budget=args.budget, num_seeds=args.seeds, seed=args.seed,
            )
            _emit(record, args)
        elif args.command == "score":
            mol = smiles.parse(args.smiles)
            objective = harness.make_objective(args.objective)
            print(f"{objective.score(mol):.6f}")
    except (harness.ConfigError, smiles.SmilesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failure boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
