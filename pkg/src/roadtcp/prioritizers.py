"""Test orderings: a permutation genetic algorithm, greedy diversity and random.

All strategies consume a precomputed distance matrix. The GA evolves the
whole population as one ``(population_size, m)`` integer array so that the
operators and fitness evaluation vectorize across individuals; the public
single-individual operators share the batched kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

STRATEGIES = ("ga", "greedy", "random")


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    crossover_prob: float = 0.80
    mutation_prob: float | None = None  # None means 1/m
    generations: int = 4000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if self.generations < 1:
            raise ValueError("generations must be positive")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must lie in [0, 1]")
        if self.mutation_prob is not None and not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must lie in [0, 1]")

    def with_seed(self, seed: int) -> "GaConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class GaResult:
    order: np.ndarray
    fitness: float
    history: np.ndarray  # best-so-far fitness, initial population first


def is_permutation(order, m: int | None = None) -> bool:
    order = np.asarray(order)
    m = len(order) if m is None else m
    if order.shape != (m,):
        return False
    seen = np.zeros(m, dtype=bool)
    if ((order < 0) | (order >= m)).any():
        return False
    seen[order] = True
    return bool(seen.all())


def _check_cost(cost: np.ndarray, m: int) -> np.ndarray:
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (m,):
        raise ValueError(f"expected {m} costs, got shape {cost.shape}")
    if not (cost > 0).all():
        raise ValueError("all test costs must be positive")
    return cost


def _fitness_batch(pop: np.ndarray, d: np.ndarray, cost: np.ndarray) -> np.ndarray:
    m = pop.shape[1]
    position = np.arange(2, m + 1, dtype=float)
    cur = pop[:, 1:]
    return (d[cur, pop[:, :-1]] / (cost[cur] * position)).sum(axis=1)


def fitness(order, d: np.ndarray, cost) -> float:
    """Sum over positions i >= 2 of distance to the previous test / (cost * i)."""
    order = np.asarray(order, dtype=np.intp)
    m = len(order)
    if m < 2:
        raise ValueError("fitness needs at least 2 tests")
    cost = _check_cost(cost, len(d))
    return float(_fitness_batch(order[None, :], d, cost)[0])


def _crossover_batch(p1: np.ndarray, p2: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    # child = p1[:c] followed by the rest of p2 in p2 order
    n, m = p1.shape
    rows = np.arange(n)[:, None]
    pos_in_p1 = np.empty_like(p1)
    pos_in_p1[rows, p1] = np.arange(m)
    keep = pos_in_p1[rows, p2] >= cuts[:, None]
    tail = np.arange(m)[None, :] >= cuts[:, None]
    child = p1.copy()
    child[tail] = p2[keep]
    return child


def pmx_crossover(p1, p2, rng: np.random.Generator, cut: int | None = None) -> np.ndarray:
    """Cut-point crossover: prefix of ``p1`` then the missing genes in ``p2`` order.

    ``cut`` is drawn uniformly from ``[1, m - 1]`` when not given.
    """
    p1 = np.asarray(p1, dtype=np.intp)
    p2 = np.asarray(p2, dtype=np.intp)
    if p1.shape != p2.shape or p1.ndim != 1 or len(p1) < 2:
        raise ValueError("parents must be equal-length permutations of length >= 2")
    m = len(p1)
    if cut is None:
        cut = int(rng.integers(1, m))
    elif not 0 <= cut <= m:
        raise ValueError(f"cut point {cut} outside [0, {m}]")
    return _crossover_batch(p1[None, :], p2[None, :], np.array([cut]))[0]


def _swap_batch(pop: np.ndarray, rows: np.ndarray, rng: np.random.Generator) -> None:
    m = pop.shape[1]
    i = rng.integers(0, m, len(rows))
    j = (i + rng.integers(1, m, len(rows))) % m  # j != i, uniform over the rest
    a = pop[rows, i]
    pop[rows, i] = pop[rows, j]
    pop[rows, j] = a


def swap(order, i: int, j: int) -> np.ndarray:
    out = np.array(order, copy=True)
    out[i], out[j] = out[j], out[i]
    return out


def swap_mutation(p, p_m: float, rng: np.random.Generator) -> np.ndarray:
    """With probability ``p_m`` swap one uniformly chosen pair of positions."""
    p = np.array(p, dtype=np.intp, copy=True)
    if len(p) < 2:
        raise ValueError("swap mutation needs at least 2 genes")
    if rng.random() < p_m:
        _swap_batch(p[None, :], np.array([0]), rng)
    return p


def _roulette_indices(fit: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    total = float(fit.sum())
    if not (total > 0 and np.isfinite(total)):
        return rng.integers(0, len(fit), size)
    cum = np.cumsum(fit)
    u = rng.random(size) * cum[-1]
    return np.minimum(np.searchsorted(cum, u, side="right"), len(fit) - 1)


def roulette_select(population, fitnesses, rng: np.random.Generator):
    """Pick one individual with probability proportional to its fitness.

    Falls back to a uniform pick when every fitness is zero.
    """
    fit = np.asarray(fitnesses, dtype=float)
    if len(fit) != len(population) or len(fit) == 0:
        raise ValueError("population and fitnesses must be non-empty and aligned")
    if (fit < 0).any():
        raise ValueError("fitness values must be nonnegative")
    return population[int(_roulette_indices(fit, 1, rng)[0])]


def ga_run(d: np.ndarray, cost, config: GaConfig = GaConfig()) -> GaResult:
    """Evolve test orders maximizing :func:`fitness`; generational, elitism of one."""
    d = np.asarray(d, dtype=float)
    m = d.shape[0]
    if m < 2:
        raise ValueError("GA needs at least 2 tests")
    cost = _check_cost(cost, m)
    n_pop = config.population_size
    p_m = 1.0 / m if config.mutation_prob is None else config.mutation_prob
    rng = np.random.default_rng(config.seed)

    pop = rng.permuted(np.tile(np.arange(m, dtype=np.intp), (n_pop, 1)), axis=1)
    fit = _fitness_batch(pop, d, cost)
    best_idx = int(np.argmax(fit))
    best_order, best_fit = pop[best_idx].copy(), float(fit[best_idx])
    history = np.empty(config.generations + 1)
    history[0] = best_fit

    n_kids = n_pop - 1
    for gen in range(1, config.generations + 1):
        a = _roulette_indices(fit, n_kids, rng)
        b = _roulette_indices(fit, n_kids, rng)
        crossed = rng.random(n_kids) < config.crossover_prob
        cuts = rng.integers(1, m, n_kids)
        kids = pop[a]
        if crossed.any():
            kids[crossed] = _crossover_batch(kids[crossed], pop[b[crossed]], cuts[crossed])
        # every gene is a mutation trial: Binomial(m, p_m) swaps per offspring
        swaps = rng.binomial(m, p_m, n_kids)
        for _ in range(int(swaps.max(initial=0))):
            rows = np.flatnonzero(swaps > 0)
            _swap_batch(kids, rows, rng)
            swaps[rows] -= 1
        pop = np.concatenate([pop[best_idx][None, :], kids])
        fit = _fitness_batch(pop, d, cost)
        best_idx = int(np.argmax(fit))
        if fit[best_idx] > best_fit:
            best_order, best_fit = pop[best_idx].copy(), float(fit[best_idx])
        history[gen] = best_fit

    return GaResult(order=best_order, fitness=fitness(best_order, d, cost), history=history)


def greedy_order(d: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Most distant pair first, then repeatedly the test farthest on average
    from those already chosen. Ties are broken uniformly at random."""
    d = np.asarray(d, dtype=float)
    m = d.shape[0]
    if m < 2:
        raise ValueError("greedy ordering needs at least 2 tests")
    upper = np.triu(d == d.max(), k=1)
    pairs = np.flatnonzero(upper)
    flat = pairs[0] if len(pairs) == 1 else pairs[rng.integers(len(pairs))]
    i, j = divmod(int(flat), m)

    order = np.empty(m, dtype=np.intp)
    order[0], order[1] = i, j
    # mean distance compares like the sum: every candidate shares the divisor
    sums = d[i] + d[j]
    sums[[i, j]] = -np.inf
    for k in range(2, m):
        best = sums.max()
        ties = np.flatnonzero(sums == best)
        pick = int(ties[0]) if len(ties) == 1 else int(ties[rng.integers(len(ties))])
        order[k] = pick
        sums += d[pick]
        sums[pick] = -np.inf
    return order


def random_order(m: int, rng: np.random.Generator) -> np.ndarray:
    if m < 1:
        raise ValueError("need at least one test")
    return rng.permutation(m).astype(np.intp)


def prioritize(
    strategy: str,
    d: np.ndarray,
    cost,
    seed: int,
    ga_config: GaConfig | None = None,
) -> tuple[np.ndarray, float]:
    """Run one strategy and return its order with that order's fitness."""
    rng_seed = int(seed)
    if strategy == "ga":
        config = (ga_config or GaConfig()).with_seed(rng_seed)
        result = ga_run(d, cost, config)
        return result.order, result.fitness
    if strategy == "greedy":
        order = greedy_order(d, np.random.default_rng(rng_seed))
    elif strategy == "random":
        order = random_order(len(d), np.random.default_rng(rng_seed))
    else:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    return order, fitness(order, d, cost)
