"""Memetic evolution of link communities.

Each run starts from one adapted seed and keeps a small population of
distinct connected subgraphs around the best one. Every generation mutates
the best community, crosses it with random partners, adapts all offspring
with the greedy local search and selects. A lower community outside the
best one's minimal range does not replace it; it is kept as a seed for
another run instead.

Random streams are derived from ``(rng_seed, run, generation, slot)``, so
results do not depend on how adaptations are scheduled across threads.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Callable, Sequence
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from linkcomm.cost import SubgraphState, strictly_lower
from linkcomm.errors import AlreadyCrossed, ConfigError, DegenerateParents
from linkcomm.graph import Graph, LinkSet, is_connected, symmetric_difference_distance
from linkcomm.search import AdaptationConfig, AdaptationResult, Mode, Resolution, adapt, is_local_minimum

__all__ = [
    "Community",
    "EvolutionConfig",
    "Population",
    "crossover",
    "detect_communities",
    "evolve",
    "mutate",
    "range_bound",
    "renew",
    "select",
]

_PARTNER_SLOT = 1_000_000
_SEED_RUN = 1_000_000_000


@dataclass(frozen=True, eq=False)
class Community:
    """A connected link set with its psi value.

    ``range_lower_bound`` is the distance to the nearest strictly lower
    place known to the search (``m + 1`` when none is known): no lower
    place has been found closer than this.
    """

    links: LinkSet
    psi: float
    range_lower_bound: int

    @property
    def bits(self) -> int:
        return self.links.bits

    @property
    def size(self) -> int:
        return len(self.links)

    def __repr__(self) -> str:
        return f"Community({self.links.ids()}, psi={self.psi:.6g}, range>={self.range_lower_bound})"


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 20
    variance_low: float = 0.1
    variance_high: float = 0.5
    max_best_age: int = 30
    innovation_window: int = 10
    innovation_threshold: float = 0.2
    rng_seed: int = 0
    resolution: Resolution = field(default_factory=lambda: Resolution(0.1))
    crossover_partners_per_gen: int = 3
    mutants_per_gen: int = 3
    linkwise: Literal["adapt-only", "memetic"] = "adapt-only"
    seed_count: int | None = None  # default max(population_size, ceil(sqrt(m)))
    max_pool_seeds: int | None = None  # deselected communities re-seeded; default seed_count
    threads: int = 1

    def __post_init__(self):
        for name in ("population_size", "max_best_age", "innovation_window", "crossover_partners_per_gen",
                     "mutants_per_gen", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0.0 < self.variance_low < self.variance_high < 1.0:
            raise ConfigError("need 0 < variance_low < variance_high < 1")
        if not 0.0 <= self.innovation_threshold <= 1.0:
            raise ConfigError("innovation_threshold must lie in [0, 1]")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed must be non-negative")
        if self.linkwise not in ("adapt-only", "memetic"):
            raise ConfigError(f"unknown link-wise stage {self.linkwise!r}")
        if self.seed_count is not None and self.seed_count < 1:
            raise ConfigError("seed_count must be >= 1")
        if self.max_pool_seeds is not None and self.max_pool_seeds < 0:
            raise ConfigError("max_pool_seeds must be >= 0")

    def adaptation(self, mode: Mode) -> AdaptationConfig:
        return AdaptationConfig(mode=mode, resolution=self.resolution)


@dataclass
class Population:
    members: list[Community]  # members[0] is the best
    best_age: int = 0
    crossed_pairs: set[frozenset[int]] = field(default_factory=set)
    seed_pool: list[Community] = field(default_factory=list)
    history: deque = field(default_factory=deque)  # (admitted, generated) per generation

    @property
    def best(self) -> Community:
        return self.members[0]

    def innovation_rate(self) -> float:
        generated = sum(g for _, g in self.history)
        return sum(a for a, _ in self.history) / generated if generated else 0.0


def _rng(cfg: EvolutionConfig, run: int, generation: int, slot: int) -> np.random.Generator:
    return np.random.default_rng([cfg.rng_seed, run, generation, slot])


def _community(state: SubgraphState) -> Community:
    return Community(state.links.copy(), state.psi, state.graph.m + 1)


def _order(c: Community):
    return (c.psi, c.links.ids())


def _results(g: Graph, result: AdaptationResult | None) -> list[Community]:
    if result is None:
        return []
    out = [_community(result.community)]
    out.extend(_community(SubgraphState(g, part)) for part in result.components_spawned)
    return out


def _flatten(g: Graph, outcome) -> list[Community]:
    if isinstance(outcome, tuple):
        return [c for r in outcome for c in _results(g, r)]
    return _results(g, outcome)


def _pick(rng: np.random.Generator, items: Sequence, k: int) -> list:
    k = min(k, len(items))
    if k <= 0:
        return []
    return [items[i] for i in rng.choice(len(items), size=k, replace=False)]


def _mutate_nodes(s: SubgraphState, variance: float, rng: np.random.Generator) -> None:
    g = s.graph
    budget = math.ceil(variance * len(s.nodes()))
    boundary = s.boundary_nodes()
    if budget < 1 or not boundary:
        return
    u = int(rng.integers(1, budget + 1))
    excluded = 0
    for node in _pick(rng, boundary, u):
        lids = s.node_remove_links(node)
        if lids and len(lids) < s.size:
            s.toggle_links(lids)
            excluded += 1
    for _ in range(excluded):
        attached = s.nodes()
        near = sorted({w for i in attached for w, _ in g.adjacency[i]} | set(attached))
        options = [v for v in near if s.node_add_links(v)]
        if not options:
            break
        v = options[int(rng.integers(len(options)))]
        s.toggle_links(s.node_add_links(v))


def _adjacent_outside(s: SubgraphState) -> list[int]:
    g = s.graph
    bits = s.links.bits
    return sorted({lid for i in s.nodes() for _, lid in g.adjacency[i] if not (bits >> lid) & 1})


def _mutate_links(s: SubgraphState, variance: float, rng: np.random.Generator) -> None:
    g = s.graph
    budget = math.ceil(variance * s.size)
    if budget < 1:
        return
    u = int(rng.integers(1, budget + 1))
    concentrated = bool(rng.integers(2))
    include = bool(rng.integers(2))
    boundary = s.boundary_nodes()
    if concentrated and boundary:
        node = boundary[int(rng.integers(len(boundary)))]
        at_node = [lid for _, lid in g.adjacency[node]]
        inside = [lid for lid in at_node if lid in s.links]
        outside = [lid for lid in at_node if lid not in s.links]
        if include and outside:
            s.toggle_links(_pick(rng, outside, u))
        else:
            s.toggle_links(_pick(rng, inside, min(u, s.size - 1)))
        return
    if include:
        for _ in range(u):
            options = _adjacent_outside(s)
            if not options:
                break
            s.toggle_links([options[int(rng.integers(len(options)))]])
    else:
        s.toggle_links(_pick(rng, s.links.ids(), min(u, s.size - 1)))


def mutate(g: Graph, c: Community, variance: float, mode: Mode, rng: np.random.Generator) -> SubgraphState:
    """Random perturbation of ``c`` touching at most a ``variance`` share of its nodes or links.

    Node-wise: exclude up to that many boundary nodes, then include as many
    neighbouring nodes. Link-wise: either exclude or include up to that many
    links, spread over the subgraph or concentrated at one boundary node.
    The result is never empty but may be unconnected.
    """
    if not 0.0 < variance < 1.0:
        raise ConfigError(f"mutation variance must lie in (0, 1), got {variance}")
    s = SubgraphState(g, c.links)
    if mode == "node_wise":
        _mutate_nodes(s, variance, rng)
    else:
        _mutate_links(s, variance, rng)
    return s


def crossover(
    g: Graph,
    a: Community,
    b: Community,
    cfg: AdaptationConfig,
    crossed: set[frozenset[int]] | None = None,
) -> tuple[AdaptationResult | None, AdaptationResult]:
    """Adapt the intersection and the union of two parents.

    The first result is ``None`` when the parents share no link. ``crossed``
    records parent pairs so that each pair is crossed only once.
    """
    if a.links.issubset(b.links) or b.links.issubset(a.links):
        raise DegenerateParents("one parent contains the other")
    key = frozenset((a.bits, b.bits))
    if crossed is not None:
        if key in crossed:
            raise AlreadyCrossed("this pair has been crossed before")
        crossed.add(key)
    inter = a.links & b.links
    first = adapt(SubgraphState(g, inter), cfg) if len(inter) else None
    return first, adapt(SubgraphState(g, a.links | b.links), cfg)


def select(g: Graph, p: Population, candidates: Sequence[Community], cfg: EvolutionConfig) -> int:
    """Merge adapted candidates into ``p`` in place; returns the number admitted.

    A candidate lower than the current best replaces it only if it lies
    within the best's minimal range; otherwise it goes to the seed pool.
    """
    best = p.best
    minimal = cfg.resolution.minimal_range(best.size)
    present = {c.bits for c in p.members}
    pooled = {c.bits for c in p.seed_pool}
    new_best = None
    ordinary: dict[int, Community] = {}
    for c in sorted(candidates, key=_order):
        if c.bits in present or c.bits in ordinary:
            continue
        if new_best is not None and c.bits == new_best.bits:
            continue
        if strictly_lower(g, c.psi, c.links, best.psi, best.links):
            if symmetric_difference_distance(c.links, best.links) < minimal:
                if new_best is None:
                    new_best = c
                else:
                    ordinary[c.bits] = c
            elif c.bits not in pooled:
                p.seed_pool.append(c)
                pooled.add(c.bits)
            continue
        ordinary[c.bits] = c

    rest = p.members[1:] + list(ordinary.values())
    if new_best is not None:
        head = new_best
        rest.append(best)
        p.best_age = 0
    else:
        head = best
    rest.sort(key=_order)
    kept = [head] + rest[: cfg.population_size - 1]
    p.members = kept
    fresh = set(ordinary) | ({new_best.bits} if new_best is not None else set())
    return sum(1 for c in kept if c.bits in fresh)


def _run_jobs(jobs: list[Callable], executor: Executor | None) -> list:
    if executor is None or len(jobs) < 2:
        return [job() for job in jobs]
    return list(executor.map(lambda job: job(), jobs))


def _mutant_jobs(g, parent, variance, mode, acfg, cfg, run, generation, count, first_slot=0):
    def job(slot):
        return lambda: adapt(mutate(g, parent, variance, mode, _rng(cfg, run, generation, slot)), acfg)

    return [job(first_slot + i) for i in range(count)]


def renew(
    g: Graph,
    p: Population,
    cfg: EvolutionConfig,
    mode: Mode,
    run: int,
    generation: int,
    executor: Executor | None = None,
    registry: dict[int, float] | None = None,
) -> int:
    """Replace stagnating members with adapted high-variance mutants of the best; returns admissions."""
    acfg = cfg.adaptation(mode)
    jobs = _mutant_jobs(g, p.best, cfg.variance_high, mode, acfg, cfg, run, generation, cfg.population_size,
                        first_slot=2 * _PARTNER_SLOT)
    candidates = [c for r in _run_jobs(jobs, executor) for c in _results(g, r)]
    _register(registry, candidates)
    return select(g, p, candidates, cfg)


def _register(registry: dict[int, float] | None, communities) -> None:
    if registry is not None:
        for c in communities:
            registry.setdefault(c.bits, c.psi)


def range_bound(g: Graph, links: LinkSet, psi: float, registry: dict[int, float]) -> int:
    """Distance to the nearest registered place with strictly lower psi (``m + 1`` if none)."""
    best = g.m + 1
    for bits, other in registry.items():
        if other < psi + 1e-9:
            d = (bits ^ links.bits).bit_count()
            if d < best and strictly_lower(g, other, LinkSet(g.m, bits), psi, links):
                best = d
    return best


def evolve(
    seed: SubgraphState,
    cfg: EvolutionConfig,
    mode: Mode,
    *,
    run: int = 0,
    registry: dict[int, float] | None = None,
    seed_pool: list[Community] | None = None,
    executor: Executor | None = None,
) -> list[Community]:
    """Memetic evolution from one seed; returns the final population, best first.

    Range bounds are computed against ``registry`` (every adapted place seen,
    updated in place) or against this run's places when none is given.
    Deselected lower communities are appended to ``seed_pool``.
    """
    g = seed.graph
    acfg = cfg.adaptation(mode)
    if registry is None:
        registry = {}
    start = adapt(seed, acfg)
    p = Population(members=[])
    initial = _results(g, start)
    _register(registry, initial)
    p.members = [initial[0]]
    p.history = deque(maxlen=cfg.innovation_window)

    jobs = _mutant_jobs(g, p.best, cfg.variance_high, mode, acfg, cfg, run, 0, cfg.population_size - 1)
    candidates = initial[1:] + [c for r in _run_jobs(jobs, executor) for c in _results(g, r)]
    _register(registry, candidates)
    select(g, p, candidates, cfg)

    generation = 0
    renewed = False
    while p.best_age < cfg.max_best_age:
        generation += 1
        best = p.best
        jobs = _mutant_jobs(g, best, cfg.variance_low, mode, acfg, cfg, run, generation, cfg.mutants_per_gen)

        partners = [c for c in p.members[1:]
                    if frozenset((best.bits, c.bits)) not in p.crossed_pairs
                    and not c.links.issubset(best.links) and not best.links.issubset(c.links)]
        chosen = _pick(_rng(cfg, run, generation, _PARTNER_SLOT), partners, cfg.crossover_partners_per_gen)
        for partner in chosen:
            p.crossed_pairs.add(frozenset((best.bits, partner.bits)))
            jobs.append(lambda partner=partner: crossover(g, best, partner, acfg))

        candidates = [c for r in _run_jobs(jobs, executor) for c in _flatten(g, r)]
        _register(registry, candidates)
        admitted = select(g, p, candidates, cfg)
        p.history.append((admitted, len(candidates)))

        if p.best.bits != best.bits:
            p.best_age = 0
            renewed = False
            continue
        p.best_age += 1
        if not renewed and p.best_age >= cfg.innovation_window and p.innovation_rate() < cfg.innovation_threshold:
            renewed = True
            renew(g, p, cfg, mode, run, generation, executor, registry)
            if p.best.bits != best.bits:
                p.best_age = 0
                renewed = False

    if seed_pool is not None:
        seed_pool.extend(p.seed_pool)
    return [Community(c.links, c.psi, range_bound(g, c.links, c.psi, registry)) for c in p.members]


def detect_communities(
    g: Graph,
    cfg: EvolutionConfig,
    seeds: Sequence[SubgraphState | LinkSet] | None = None,
) -> list[Community]:
    """Full pipeline: node-wise memetic runs from seeds, link-wise refinement, filtering.

    Without ``seeds``, random single links are used. Returned communities
    are connected strict local minima of psi whose range bound reaches the
    resolution, sorted by psi then link ids. They may overlap arbitrarily.
    """
    if not seeds:
        count = cfg.seed_count or max(cfg.population_size, math.ceil(math.sqrt(g.m)))
        order = _rng(cfg, _SEED_RUN, 0, 0).permutation(g.m)[: min(count, g.m)]
        seeds = [SubgraphState(g, [int(lid)]) for lid in order]
    queue = deque(s if isinstance(s, SubgraphState) else SubgraphState(g, s) for s in seeds)
    pool_budget = cfg.max_pool_seeds if cfg.max_pool_seeds is not None else len(queue)

    executor = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        registry: dict[int, float] = {}
        node_cfg = cfg.adaptation("node_wise")
        started: set[int] = set()
        coarse: dict[int, Community] = {}
        run = 0
        while queue:
            seed = queue.popleft()
            if seed.size == 0:
                continue
            start = adapt(seed, node_cfg).community
            if start.links.bits in started:
                continue
            started.add(start.links.bits)
            pool: list[Community] = []
            for c in evolve(start, cfg, "node_wise", run=run, registry=registry, seed_pool=pool, executor=executor):
                coarse.setdefault(c.bits, c)
            run += 1
            for c in pool:
                if pool_budget <= 0:
                    break
                queue.append(SubgraphState(g, c.links))
                pool_budget -= 1

        link_cfg = cfg.adaptation("link_wise")
        fine: dict[int, Community] = {}
        for c in sorted(coarse.values(), key=_order):
            state = SubgraphState(g, c.links)
            if cfg.linkwise == "memetic":
                found = evolve(state, cfg, "link_wise", run=run, registry=registry, executor=executor)
                run += 1
            else:
                found = _results(g, adapt(state, link_cfg))
                _register(registry, found)
            for f in found:
                fine.setdefault(f.bits, f)
    finally:
        if executor is not None:
            executor.shutdown()

    out = []
    for c in fine.values():
        if not is_connected(g, c.links) or not is_local_minimum(g, c.links):
            continue
        bound = range_bound(g, c.links, c.psi, registry)
        if bound < cfg.resolution.minimal_range(c.size):
            continue
        out.append(Community(c.links, c.psi, bound))
    out.sort(key=_order)
    return out
