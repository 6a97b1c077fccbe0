"""Acceptance criteria, one test per criterion.

Each test records its verdict in ``conftest.ACCEPTANCE`` so the session
summary prints one PASS/FAIL line per criterion, then asserts it.
"""

import itertools
import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from roadtcp.cli import main
from roadtcp.evaluation import FaultProfile, apfd_c
from roadtcp.experiment import ExperimentConfig, run_experiment
from roadtcp.features import pca_fit, pca_project, zscore_fit_apply
from roadtcp.prioritizers import (
    GaConfig,
    _roulette_indices,
    fitness,
    ga_run,
    is_permutation,
    pmx_crossover,
    swap_mutation,
)
from roadtcp.synth import BenchConfig, generate_corpus, write_corpus

pytestmark = pytest.mark.acceptance


def record(label, ok, detail):
    ACCEPTANCE[label] = (bool(ok), detail)
    assert ok, f"{label}: {detail}"


def step_walk(order, cost, detects):
    """Walk the order test by test, integrating the fault fraction over cost.

    While a test runs, the faults found earlier count in full and the ones it
    reveals count for half of its cost.
    """
    area = 0.0
    found = 0
    for t in order:
        new = int(detects[t])
        area += cost[t] * (found + 0.5 * new)
        found += new
    return area / (sum(cost) * found)


def test_1_apfdc_oracle_equivalence():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst, checked = 0.0, 0
    for _ in range(50):
        n = int(rng.integers(1, 8))
        cost = rng.uniform(0.1, 10.0, n)
        detects = rng.random(n) < 0.5
        detects[rng.integers(n)] = True
        faults = FaultProfile(detects)
        for perm in itertools.permutations(range(n)):
            diff = abs(apfd_c(perm, cost, faults) - step_walk(perm, cost, detects))
            worst = max(worst, diff)
            checked += 1
    elapsed = time.perf_counter() - start
    record("1 APFD_c oracle equivalence", worst <= 1e-9 and elapsed < 10,
           f"{checked} orders, max |diff| {worst:.2e}, {elapsed:.1f}s")


def test_2_ga_optimal_on_small_instances():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    hits = 0
    for k in range(20):
        m = int(rng.integers(4, 9))
        pts = rng.uniform(0, 10, (m, 3))
        d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        cost = rng.uniform(1, 20, m)
        best = max(fitness(p, d, cost) for p in itertools.permutations(range(m)))
        got = ga_run(d, cost, GaConfig(population_size=100, generations=2000, seed=k)).fitness
        hits += abs(got - best) <= 1e-9
    elapsed = time.perf_counter() - start
    record("2 GA optimality on small instances", hits >= 18 and elapsed < 120,
           f"{hits}/20 optimal, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def desk_experiment(tmp_path_factory):
    out = tmp_path_factory.mktemp("desk")
    scenarios, _ = generate_corpus(BenchConfig(n_tests=500, unsafe_ratio=0.26, rng_seed=1))
    corpus = write_corpus(scenarios, {}, out / "corpus")
    cfg = ExperimentConfig(corpus, out / "report", repetitions=30, dataset="synthetic-500")
    start = time.perf_counter()
    report = run_experiment(cfg, scenarios)
    return report, time.perf_counter() - start


def test_3_comparative_experiment(desk_experiment):
    report, elapsed = desk_experiment
    vs_random = next(c for c in report["comparisons"] if c["baseline"] == "random")
    gain = report["summary"]["ga"]["mean"] - report["summary"]["random"]["mean"]
    ok = (vs_random["p_value"] < 0.05 and vs_random["a12"] >= 0.8 and gain >= 0.05
          and elapsed < 15 * 60)
    record("3 comparative experiment", ok,
           f"p={vs_random['p_value']:.2e}, A12={vs_random['a12']:.3f}, "
           f"mean gain {gain:+.4f}, {elapsed:.0f}s")


def test_4_faults_at_budget(desk_experiment):
    report, _ = desk_experiment
    ga = report["samples"]["ga"]["faults_at_budget"]
    rand = report["samples"]["random"]["faults_at_budget"]
    record("4 faults at 20% cost", ga >= 1.3 * rand,
           f"median GA run {ga} faults, best random run {rand} ({ga / max(rand, 1):.2f}x)")


def test_5_pca_invariants():
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    worst = {"orthonormal": 0.0, "ratio": 0.0, "isometry": 0.0}
    minimal = True
    for _ in range(100):
        m, n = int(rng.integers(20, 200)), int(rng.integers(2, 17))
        M = rng.normal(size=(m, n)) @ rng.normal(size=(n, n)) * rng.uniform(0.1, 100, n)
        _, _, Z = zscore_fit_apply(M)
        model = pca_fit(Z)
        V = model.components
        worst["orthonormal"] = max(worst["orthonormal"], np.abs(V.T @ V - np.eye(n)).max())
        worst["ratio"] = max(worst["ratio"], abs(model.explained_ratio.sum() - 1.0))
        cum = np.cumsum(model.explained_ratio)
        minimal &= cum[model.h - 1] >= 0.98 - 1e-12
        minimal &= model.h == 1 or cum[model.h - 2] < 0.98 - 1e-12
        full = pca_project(model, Z, h=n)
        gram_z = Z @ Z.T
        worst["isometry"] = max(worst["isometry"],
                                np.abs(full @ full.T - gram_z).max() / max(1.0, np.abs(gram_z).max()))
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-9 and minimal and elapsed < 30
    record("5 PCA invariants", ok,
           ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
           + f", minimal h {minimal}, {elapsed:.1f}s")


def test_6_operator_validity():
    rng = np.random.default_rng(6)
    bad = 0
    for _ in range(10_000):
        m = int(rng.integers(2, 40))
        p1, p2 = rng.permutation(m), rng.permutation(m)
        bad += not is_permutation(pmx_crossover(p1, p2, rng), m)
        bad += not is_permutation(swap_mutation(p1, 1.0, rng), m)

    fit = np.array([0.5, 1.0, 2.0, 0.0, 3.5, 1.5, 0.25])
    draws = 100_000
    counts = np.bincount(_roulette_indices(fit, draws, rng), minlength=len(fit))
    p = fit / fit.sum()
    sigma = np.sqrt(draws * p * (1 - p))
    z = np.abs(counts - draws * p) / np.where(sigma > 0, sigma, 1.0)
    ok = bad == 0 and (z <= 3).all() and counts[fit == 0].sum() == 0
    record("6 operator validity", ok,
           f"{bad} invalid of 20000 applications, roulette max |z| {z.max():.2f}")


def test_7_scalability(tmp_path):
    scenarios, _ = generate_corpus(BenchConfig(n_tests=5000, rng_seed=7))
    cfg = ExperimentConfig(tmp_path / "corpus.json", tmp_path / "report", strategies=("ga",),
                           repetitions=1)
    start = time.perf_counter()
    report = run_experiment(cfg, scenarios)
    elapsed = time.perf_counter() - start
    emitted = json.loads((tmp_path / "report" / "timing.json").read_text())
    overhead = emitted["strategies"]["ga"]["overhead_fraction"]
    ok = elapsed < 12 * 60 and 0 < overhead and report["config"]["ga"]["generations"] == 4000
    record("7 scalability and overhead", ok,
           f"5000 tests, {elapsed:.0f}s wall, overhead fraction {overhead:.2e}")


def _artifacts(root):
    files = {}
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        rel = str(path.relative_to(root))
        if path.name == "timing.json":
            continue  # wall-clock measurements
        data = path.read_bytes()
        if path.name.startswith("order") and path.suffix == ".json":
            doc = json.loads(data)
            doc.pop("wall_time_ms", None)
            data = json.dumps(doc, sort_keys=True).encode()
        files[rel] = data
    return files


def _run_all(root):
    synth = root / "synth"
    corpus = synth / "corpus.json"
    commands = [
        ["synth", "--n-tests", "60", "--seed", "3", "--out", synth],
        ["extract", corpus, "--out", root / "features.csv"],
        ["extract", corpus, "--format", "json", "--out", root / "features.json"],
        ["fit-pca", corpus, "--out", root / "pca.json"],
        ["fit-pca", corpus, "--format", "csv", "--out", root / "scores.csv"],
        ["prioritize", corpus, "--generations", "50", "--seed", "8", "--out", root / "order_ga.json"],
        ["prioritize", corpus, "--strategy", "greedy", "--seed", "8",
         "--out", root / "order_greedy.json"],
        ["prioritize", corpus, "--strategy", "random", "--seed", "8", "--format", "csv",
         "--out", root / "order_random.csv"],
        ["evaluate", corpus, root / "order_ga.json", "--out", root / "eval.json"],
        ["evaluate", corpus, root / "order_ga.json", "--format", "csv", "--out", root / "eval.csv"],
        ["experiment", corpus, "--repetitions", "3", "--generations", "50", "--seed", "4",
         "--out", root / "exp"],
    ]
    for argv in commands:
        assert main([str(a) for a in argv]) == 0, argv
    return len(commands)


def test_8_determinism(tmp_path, capsys):
    n = _run_all(tmp_path / "a")
    _run_all(tmp_path / "b")
    a, b = _artifacts(tmp_path / "a"), _artifacts(tmp_path / "b")
    differing = sorted(k for k in a.keys() | b.keys() if a.get(k) != b.get(k))
    record("8 determinism", not differing and len(a) > n,
           f"{n} commands, {len(a)} artifacts compared, differing: {differing or 'none'}")
