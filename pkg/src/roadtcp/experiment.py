"""End-to-end pipeline and the repeated comparative experiment."""

from __future__ import annotations

import csv
import json
import logging
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import distance
from .evaluation import FaultProfile, apfd_c, compare, detection_curve, faults_within_budget
from .features import PcaModel, fit_reduce
from .prioritizers import STRATEGIES, GaConfig, prioritize
from .scenario import RoadScenario, feature_matrix

log = logging.getLogger(__name__)

BUDGET_FRACTION = 0.2


@dataclass(frozen=True)
class Prepared:
    ids: list[str]
    cost: np.ndarray
    model: PcaModel
    reduced: np.ndarray
    dist: np.ndarray
    prepare_seconds: float  # features, PCA and pairwise distances


def prepare(scenarios: Sequence[RoadScenario], cache_dir: str | Path | None = None,
            cache_key: str | None = None) -> Prepared:
    if len(scenarios) < 2:
        raise ValueError(f"need at least 2 scenarios to prioritize, got {len(scenarios)}")
    start = time.perf_counter()
    model, reduced = fit_reduce(feature_matrix(scenarios))
    if cache_dir is not None and cache_key is not None:
        dist = distance.cached_pairwise(reduced, cache_dir, cache_key)
    else:
        dist = distance.pairwise(reduced)
    elapsed = time.perf_counter() - start
    return Prepared(
        ids=[s.id for s in scenarios],
        cost=np.array([s.cost for s in scenarios], dtype=float),
        model=model,
        reduced=reduced,
        dist=dist,
        prepare_seconds=elapsed,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    corpus_path: Path
    output_dir: Path
    strategies: tuple[str, ...] = STRATEGIES
    repetitions: int = 30
    ga: GaConfig = field(default_factory=GaConfig)
    base_seed: int = 0
    dataset: str | None = None

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown or not self.strategies:
            raise ValueError(f"unknown strategies {sorted(unknown)}; choose from {STRATEGIES}")

    @property
    def dataset_name(self) -> str:
        return self.dataset or Path(self.corpus_path).stem


@dataclass
class Run:
    strategy: str
    seed: int
    order: np.ndarray
    fitness: float
    apfdc: float
    faults_at_budget: int
    search_seconds: float


def _sample_runs(runs: dict[str, list[Run]]) -> dict[str, Run]:
    """Median-APFD_c GA run against the best run of every baseline."""
    picked = {}
    if "ga" in runs:
        ranked = sorted(runs["ga"], key=lambda r: (r.apfdc, r.seed))
        picked["ga"] = ranked[(len(ranked) - 1) // 2]
    for name in ("random", "greedy"):
        if name in runs:
            picked[name] = max(runs[name], key=lambda r: (r.apfdc, -r.seed))
    return picked


def run_experiment(cfg: ExperimentConfig, scenarios: Sequence[RoadScenario]) -> dict[str, Any]:
    """Run every strategy ``cfg.repetitions`` times and write the report files.

    Everything except ``timing.json`` is a pure function of the corpus and
    the seeds.
    """
    faults = FaultProfile.from_scenarios(scenarios)
    prep = prepare(scenarios)
    runs: dict[str, list[Run]] = {}
    for strategy in cfg.strategies:
        runs[strategy] = []
        for r in range(cfg.repetitions):
            seed = cfg.base_seed + r
            start = time.perf_counter()
            order, fit = prioritize(strategy, prep.dist, prep.cost, seed, cfg.ga)
            elapsed = time.perf_counter() - start
            runs[strategy].append(Run(
                strategy, seed, order, fit,
                apfd_c(order, prep.cost, faults),
                faults_within_budget(order, prep.cost, faults, BUDGET_FRACTION),
                elapsed,
            ))
            log.info("%s seed=%d apfdc=%.4f (%.2fs)", strategy, seed, runs[strategy][-1].apfdc, elapsed)

    apfdc = {s: [r.apfdc for r in rs] for s, rs in runs.items()}
    comparisons = [
        compare("ga", apfdc["ga"], base, apfdc[base])
        for base in ("random", "greedy")
        if "ga" in apfdc and base in apfdc
    ]
    samples = _sample_runs(runs)
    total_cost = float(prep.cost.sum())

    report = {
        "dataset": cfg.dataset_name,
        "n_tests": len(prep.ids),
        "n_faults": faults.fault_count,
        "total_cost_s": total_cost,
        "pca": {"h": prep.model.h, "explained_ratio": prep.model.explained_ratio.tolist()},
        "config": {
            "strategies": list(cfg.strategies),
            "repetitions": cfg.repetitions,
            "base_seed": cfg.base_seed,
            "ga": asdict(cfg.ga),
            "budget_fraction": BUDGET_FRACTION,
        },
        "summary": {
            s: {
                "mean": statistics.fmean(v),
                "median": statistics.median(v),
                "min": min(v),
                "max": max(v),
            }
            for s, v in apfdc.items()
        },
        "comparisons": [asdict(c) for c in comparisons],
        "samples": {
            name: {
                "seed": run.seed,
                "apfdc": run.apfdc,
                "faults_at_budget": run.faults_at_budget,
            }
            for name, run in samples.items()
        },
        "runs": {
            s: [{"seed": r.seed, "apfdc": r.apfdc, "fitness": r.fitness,
                 "faults_at_budget": r.faults_at_budget} for r in rs]
            for s, rs in runs.items()
        },
    }

    mean_search = {s: statistics.fmean(r.search_seconds for r in rs) for s, rs in runs.items()}
    timing = {
        "prepare_ms": prep.prepare_seconds * 1000.0,
        "strategies": {
            s: {
                "mean_search_ms": mean_search[s] * 1000.0,
                "mean_prioritization_ms": (prep.prepare_seconds + mean_search[s]) * 1000.0,
                "overhead_fraction": (prep.prepare_seconds + mean_search[s]) / total_cost,
            }
            for s in runs
        },
    }
    write_report(cfg, report, runs, samples, prep.cost, faults, timing)
    report["timing"] = timing
    return report


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_report(cfg: ExperimentConfig, report: dict[str, Any], runs: dict[str, list[Run]],
                 samples: dict[str, Run], cost: np.ndarray, faults: FaultProfile,
                 timing: dict[str, Any]) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    (out / "timing.json").write_text(json.dumps(timing, indent=1) + "\n", encoding="utf-8")
    _write_csv(
        out / "apfdc.csv",
        ("strategy", "seed", "apfdc"),
        ((r.strategy, r.seed, repr(r.apfdc)) for rs in runs.values() for r in rs),
    )
    curve_rows = []
    for run in samples.values():
        for pos, (c, f) in enumerate(detection_curve(run.order, cost, faults), start=1):
            curve_rows.append((run.strategy, run.seed, pos, repr(c), f))
    _write_csv(out / "curves.csv", ("strategy", "seed", "position", "cum_cost", "cum_faults"),
               curve_rows)
    _write_csv(
        out / "comparisons.csv",
        ("dataset", "vs_baseline", "a12", "p_value", "magnitude"),
        ((cfg.dataset_name, c["baseline"], repr(c["a12"]),
          "" if c["p_value"] is None else repr(c["p_value"]), c["magnitude"])
         for c in report["comparisons"]),
    )
