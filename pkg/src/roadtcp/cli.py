"""Command-line interface.

Exit codes: 0 success, 2 input validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import distance
from .evaluation import FaultProfile, NoFaultsError, apfd_c, detection_curve, faults_within_budget
from .experiment import BUDGET_FRACTION, ExperimentConfig, prepare, run_experiment
from .features import NumericError
from .prioritizers import STRATEGIES, GaConfig, prioritize
from .scenario import CorpusError, feature_matrix, features_csv, load_corpus, matrix_to_csv
from .synth import BenchConfig, generate_corpus, write_corpus

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

log = logging.getLogger("roadtcp")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=1) + "\n"


def cmd_extract(args: argparse.Namespace) -> int:
    scenarios = load_corpus(args.corpus)
    if args.format == "json":
        rows = [{"id": s.id, "features": row.tolist()}
                for s, row in zip(scenarios, feature_matrix(scenarios))]
        _emit(_json(rows), args.out)
    else:
        _emit(features_csv(scenarios), args.out)
    return EXIT_OK


def cmd_fit_pca(args: argparse.Namespace) -> int:
    scenarios = load_corpus(args.corpus)
    prep = prepare(scenarios)
    if args.format == "csv":
        header = [f"C{i}" for i in range(1, prep.model.h + 1)]
        _emit(matrix_to_csv(prep.ids, prep.reduced, header), args.out)
    else:
        _emit(_json(prep.model.to_dict()), args.out)
    return EXIT_OK


def _ga_config(args: argparse.Namespace) -> GaConfig:
    return GaConfig(
        population_size=args.population,
        crossover_prob=args.crossover_prob,
        mutation_prob=args.mutation_prob,
        generations=args.generations,
        seed=args.seed,
    )


def cmd_prioritize(args: argparse.Namespace) -> int:
    corpus_path = Path(args.corpus)
    raw = corpus_path.read_bytes()
    scenarios = load_corpus(corpus_path)
    start = time.perf_counter()
    prep = prepare(scenarios, args.cache_dir, distance.content_key(raw) if args.cache_dir else None)
    order, fit = prioritize(args.strategy, prep.dist, prep.cost, args.seed, _ga_config(args))
    wall_ms = max(1, round((time.perf_counter() - start) * 1000))
    ids = [prep.ids[i] for i in order]
    if args.format == "csv":
        _emit("position,id\n" + "".join(f"{k},{i}\n" for k, i in enumerate(ids, 1)), args.out)
    else:
        _emit(_json({
            "strategy": args.strategy,
            "seed": args.seed,
            "order": ids,
            "fitness": fit,
            "wall_time_ms": wall_ms,
        }), args.out)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    scenarios = load_corpus(args.corpus)
    ordering = json.loads(Path(args.ordering).read_text(encoding="utf-8"))
    index = {s.id: k for k, s in enumerate(scenarios)}
    ids = ordering.get("order") if isinstance(ordering, dict) else None
    if not isinstance(ids, list):
        raise CorpusError(f"{args.ordering}: expected an ordering object with an 'order' list")
    if sorted(ids) != sorted(index):
        raise CorpusError("ordering does not list every corpus test exactly once")
    order = np.array([index[i] for i in ids])
    cost = np.array([s.cost for s in scenarios])
    faults = FaultProfile.from_scenarios(scenarios)
    curve = detection_curve(order, cost, faults)
    if args.format == "csv":
        _emit("position,cum_cost,cum_faults\n"
              + "".join(f"{k},{c!r},{f}\n" for k, (c, f) in enumerate(curve, 1)), args.out)
        return EXIT_OK
    try:
        score: float | None = apfd_c(order, cost, faults)
    except NoFaultsError:
        score = None
    _emit(_json({
        "strategy": ordering.get("strategy"),
        "seed": ordering.get("seed"),
        "apfdc": score,
        "outcome": "ok" if score is not None else "no-faults",
        "faults": faults.fault_count,
        "budget_fraction": args.budget,
        "faults_at_budget": faults_within_budget(order, cost, faults, args.budget),
        "curve": [[c, f] for c, f in curve],
    }), args.out)
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    if args.out is None:
        raise CorpusError("experiment needs --out DIR")
    cfg = ExperimentConfig(
        corpus_path=Path(args.corpus),
        output_dir=Path(args.out),
        strategies=tuple(args.strategies),
        repetitions=args.repetitions,
        ga=_ga_config(args),
        base_seed=args.seed,
        dataset=args.dataset,
    )
    report = run_experiment(cfg, load_corpus(cfg.corpus_path))
    for c in report["comparisons"]:
        print(f"{report['dataset']}: ga vs {c['baseline']}: A12={c['a12']:.3f} "
              f"p={c['p_value']} ({c['magnitude']})")
    for s, t in report["timing"]["strategies"].items():
        print(f"{s}: mean prioritization {t['mean_prioritization_ms']:.0f} ms, "
              f"overhead {100 * t['overhead_fraction']:.4f}% of suite cost")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    if args.out is None:
        raise CorpusError("synth needs --out DIR")
    cfg = BenchConfig(
        n_tests=args.n_tests,
        unsafe_ratio=args.unsafe_ratio,
        cluster_tightness=args.tightness,
        cost_range=(args.min_cost, args.max_cost),
        rng_seed=args.seed,
    )
    scenarios, manifest = generate_corpus(cfg)
    path = write_corpus(scenarios, manifest, args.out)
    print(f"wrote {len(scenarios)} scenarios to {path} "
          f"(unsafe ratio {manifest['achieved_unsafe_ratio']:.4f})")
    return EXIT_OK


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (base seed for experiments)")
    common.add_argument("--out", help="output file (directory for synth/experiment); stdout if omitted")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def _ga_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("genetic algorithm")
    g.add_argument("--population", type=int, default=100)
    g.add_argument("--crossover-prob", type=float, default=0.80)
    g.add_argument("--mutation-prob", type=float, default=None, help="default 1/m")
    g.add_argument("--generations", type=int, default=4000)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="roadtcp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="road features as CSV/JSON")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_extract, default_format="csv")

    p = sub.add_parser("fit-pca", parents=[common], help="fit z-score + PCA (JSON model or CSV scores)")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_fit_pca, default_format="json")

    p = sub.add_parser("prioritize", parents=[common], help="order a corpus")
    p.add_argument("corpus")
    p.add_argument("--strategy", choices=STRATEGIES, default="ga")
    p.add_argument("--cache-dir", help="reuse distance matrices stored here")
    _ga_args(p)
    p.set_defaults(func=cmd_prioritize, default_format="json")

    p = sub.add_parser("evaluate", parents=[common], help="score an ordering")
    p.add_argument("corpus")
    p.add_argument("ordering", help="ordering JSON written by 'prioritize'")
    p.add_argument("--budget", type=float, default=BUDGET_FRACTION,
                   help="cost fraction for the fault count readout")
    p.set_defaults(func=cmd_evaluate, default_format="json")

    p = sub.add_parser("experiment", parents=[common], help="repeated strategy comparison")
    p.add_argument("corpus")
    p.add_argument("--strategies", nargs="+", choices=STRATEGIES, default=list(STRATEGIES))
    p.add_argument("--repetitions", type=int, default=30)
    p.add_argument("--dataset", help="dataset name for the comparison table")
    _ga_args(p)
    p.set_defaults(func=cmd_experiment, default_format="json")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic labelled corpus")
    p.add_argument("--n-tests", type=int, default=500)
    p.add_argument("--unsafe-ratio", type=float, default=0.26)
    p.add_argument("--tightness", type=float, default=0.15)
    p.add_argument("--min-cost", type=float, default=10.0)
    p.add_argument("--max-cost", type=float, default=300.0)
    p.set_defaults(func=cmd_synth, default_format="json")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    # LinAlgError subclasses ValueError, so it must be caught first
    except (NumericError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
