import numpy as np
import pytest

import linkcomm.memetic as memetic
from conftest import numbered
from linkcomm.cost import SubgraphState, psi_of
from linkcomm.errors import AlreadyCrossed, ConfigError, DegenerateParents
from linkcomm.graph import is_connected, load_graph
from linkcomm.memetic import (
    Community,
    EvolutionConfig,
    Population,
    crossover,
    detect_communities,
    evolve,
    mutate,
    range_bound,
    renew,
    select,
)
from linkcomm.search import AdaptationConfig, Resolution, adapt, is_local_minimum

LINK = AdaptationConfig(mode="link_wise")


def community(g, *numbers):
    links = numbered(g, *numbers)
    return Community(links, psi_of(g, links), g.m + 1)


def test_config_validation():
    EvolutionConfig()
    for kwargs in (
        {"population_size": 0},
        {"variance_low": 0.6, "variance_high": 0.5},
        {"variance_high": 1.0},
        {"innovation_threshold": 1.5},
        {"linkwise": "never"},
        {"rng_seed": -1},
    ):
        with pytest.raises(ConfigError):
            EvolutionConfig(**kwargs)


def test_mutation_stays_nonempty_and_bounded(bowtie):
    tri = community(bowtie, 1, 2, 3)
    for seed in range(50):
        for mode in ("node_wise", "link_wise"):
            s = mutate(bowtie, tri, 0.3, mode, np.random.default_rng(seed))
            assert s.size > 0
            if mode == "link_wise":
                assert len(s.links ^ tri.links) <= 1  # ceil(0.3 * 3) links at most
    with pytest.raises(ConfigError):
        mutate(bowtie, tri, 0.0, "link_wise", np.random.default_rng(0))


def test_mutation_without_boundary_returns_parent(bowtie):
    whole = community(bowtie, 1, 2, 3, 4, 5, 6)
    s = mutate(bowtie, whole, 0.5, "node_wise", np.random.default_rng(1))
    assert s.links == whole.links


def test_node_swap_mutant_adapts_to_triangle(bowtie):
    # exclude node a from the triangle {1, 2, 3}, then include node d
    s = SubgraphState(bowtie, numbered(bowtie, 1, 2, 3))
    s.toggle_links(s.node_remove_links(bowtie.node_id("a")))
    s.toggle_links(s.node_add_links(bowtie.node_id("d")))
    assert s.links == numbered(bowtie, 3, 4)
    for mode in ("node_wise", "link_wise"):
        result = adapt(s, AdaptationConfig(mode=mode))
        assert result.community.links in (numbered(bowtie, 1, 2, 3), numbered(bowtie, 4, 5, 6))


def test_mutation_is_reproducible(bowtie):
    tri = community(bowtie, 1, 2, 3)
    a = mutate(bowtie, tri, 0.5, "link_wise", np.random.default_rng(9))
    b = mutate(bowtie, tri, 0.5, "link_wise", np.random.default_rng(9))
    assert a.links == b.links


def test_crossover_examples(bowtie):
    a, b = community(bowtie, 1, 2, 3), community(bowtie, 4, 5, 6)
    inter, union = crossover(bowtie, a, b, LINK)
    assert inter is None
    assert union.community.links in (a.links, b.links)
    with pytest.raises(DegenerateParents):
        crossover(bowtie, community(bowtie, 1, 2), a, LINK)
    crossed = set()
    crossover(bowtie, a, community(bowtie, 2, 4), LINK, crossed)
    with pytest.raises(AlreadyCrossed):
        crossover(bowtie, community(bowtie, 2, 4), a, LINK, crossed)


def _population(g, *communities):
    return Population(members=sorted(communities, key=lambda c: (c.psi, c.links.ids())))


def test_select_rejects_worse_candidate_when_full(bowtie):
    cfg = EvolutionConfig(population_size=2)
    p = _population(bowtie, community(bowtie, 1, 2, 3), community(bowtie, 1, 2))
    before = [c.links for c in p.members]
    assert select(bowtie, p, [community(bowtie, 1, 4)], cfg) == 0
    assert [c.links for c in p.members] == before


def test_select_new_best_within_range(bowtie):
    cfg = EvolutionConfig(population_size=3, resolution=Resolution.absolute(2))
    p = _population(bowtie, community(bowtie, 1, 2))
    p.best_age = 5
    assert select(bowtie, p, [community(bowtie, 1, 2, 3)], cfg) == 1
    assert p.best.links == numbered(bowtie, 1, 2, 3)
    assert p.best_age == 0
    assert [c.links for c in p.members] == [numbered(bowtie, 1, 2, 3), numbered(bowtie, 1, 2)]


def test_select_routes_distant_best_to_pool(bowtie):
    cfg = EvolutionConfig(population_size=3, resolution=Resolution.absolute(2))
    p = _population(bowtie, community(bowtie, 1, 2))
    p.best_age = 5
    distant = community(bowtie, 4, 5, 6)
    assert select(bowtie, p, [distant], cfg) == 0
    assert p.best.links == numbered(bowtie, 1, 2)
    assert p.best_age == 5
    assert [c.links for c in p.seed_pool] == [distant.links]


def test_renew_refills_population(bowtie):
    cfg = EvolutionConfig(population_size=4)
    p = _population(bowtie, community(bowtie, 1, 2, 3))
    renew(bowtie, p, cfg, "link_wise", run=0, generation=1)
    assert 1 <= len(p.members) <= cfg.population_size
    assert p.best.links == numbered(bowtie, 1, 2, 3)
    q = _population(bowtie, community(bowtie, 1, 2, 3))
    renew(bowtie, q, cfg, "link_wise", run=0, generation=1)
    assert [c.links for c in q.members] == [c.links for c in p.members]


def test_renew_larger_graph_fills_population():
    g = load_graph([(i, j) for i in range(7) for j in range(i + 1, 7) if (j - i) in (1, 2, 3)])
    cfg = EvolutionConfig(population_size=4)
    start = adapt(SubgraphState(g, [0]), cfg.adaptation("link_wise")).community
    p = Population(members=[Community(start.links, start.psi, g.m + 1)])
    renew(g, p, cfg, "link_wise", run=0, generation=1)
    assert len({c.bits for c in p.members}) == len(p.members)
    assert len(p.members) <= cfg.population_size
    assert p.best.psi == min(c.psi for c in p.members)


def test_renewal_fires_once_per_stale_episode(bowtie, monkeypatch):
    calls = []
    original = memetic.renew

    def spy(*args, **kwargs):
        calls.append(args[5])
        return original(*args, **kwargs)

    monkeypatch.setattr(memetic, "renew", spy)
    cfg = EvolutionConfig(population_size=3, max_best_age=8, innovation_window=2, innovation_threshold=1.0)
    evolve(SubgraphState(bowtie, numbered(bowtie, 1, 2, 3)), cfg, "link_wise")
    assert len(calls) == 1


def test_evolve_from_triangle(bowtie):
    cfg = EvolutionConfig(population_size=5, max_best_age=5)
    members = evolve(SubgraphState(bowtie, numbered(bowtie, 1, 2, 3)), cfg, "link_wise")
    assert members[0].links == numbered(bowtie, 1, 2, 3)
    assert members[0].psi == pytest.approx(1 / 3, abs=1e-12)
    found = set()
    for seed in ((1, 2, 3), (4, 5, 6)):
        found |= {c.bits for c in evolve(SubgraphState(bowtie, numbered(bowtie, *seed)), cfg, "link_wise")}
    assert numbered(bowtie, 1, 2, 3).bits in found and numbered(bowtie, 4, 5, 6).bits in found


def test_single_member_degenerates_to_adaptation(bowtie):
    cfg = EvolutionConfig(population_size=1, max_best_age=1)
    for lid in range(bowtie.m):
        seed = SubgraphState(bowtie, bowtie.link_set([lid]))
        members = evolve(seed, cfg, "link_wise")
        assert [c.links for c in members] == [adapt(seed, LINK).community.links]


def test_evolve_is_reproducible():
    g = load_graph([(i, (i + d) % 9) for i in range(9) for d in (1, 2)])
    cfg = EvolutionConfig(population_size=6, max_best_age=4, rng_seed=5)
    runs = [evolve(SubgraphState(g, [0]), cfg, "node_wise") for _ in range(2)]
    assert [(c.links.ids(), c.psi, c.range_lower_bound) for c in runs[0]] == [
        (c.links.ids(), c.psi, c.range_lower_bound) for c in runs[1]
    ]


def test_range_bound(bowtie):
    tri = numbered(bowtie, 1, 2, 3)
    registry = {numbered(bowtie, 1, 2).bits: 0.46875, numbered(bowtie, 4, 5, 6).bits: 1 / 3}
    assert range_bound(bowtie, tri, 1 / 3, registry) == bowtie.m + 1
    pair = numbered(bowtie, 1, 2)
    assert range_bound(bowtie, pair, 0.46875, {tri.bits: 1 / 3}) == 1


def test_detect_bowtie_with_all_single_link_seeds(bowtie):
    seeds = [bowtie.link_set([lid]) for lid in range(bowtie.m)]
    found = detect_communities(bowtie, EvolutionConfig(population_size=4, max_best_age=4), seeds)
    assert [c.links for c in found] == [numbered(bowtie, 1, 2, 3), numbered(bowtie, 4, 5, 6)]


def test_detect_default_seeds_and_dedup(bowtie):
    for linkwise in ("adapt-only", "memetic"):
        cfg = EvolutionConfig(population_size=4, max_best_age=4, linkwise=linkwise)
        found = detect_communities(bowtie, cfg)
        assert [c.links for c in found] == [numbered(bowtie, 1, 2, 3), numbered(bowtie, 4, 5, 6)]
    # both seeds converge to the same triangle
    twice = detect_communities(bowtie, EvolutionConfig(population_size=2, max_best_age=2),
                               [bowtie.link_set([0]), bowtie.link_set([1])])
    assert [c.links for c in twice] == [numbered(bowtie, 1, 2, 3)]


def test_detect_output_contract():
    g = load_graph([(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5), (5, 6), (6, 7), (6, 8), (7, 8), (2, 6)])
    cfg = EvolutionConfig(population_size=5, max_best_age=5, rng_seed=11)
    found = detect_communities(g, cfg)
    assert found
    for c in found:
        assert is_connected(g, c.links)
        assert is_local_minimum(g, c.links)
        assert c.range_lower_bound >= cfg.resolution.minimal_range(c.size)
        assert adapt(SubgraphState(g, c.links), LINK).community.links == c.links
    assert [(c.psi, c.links.ids()) for c in found] == sorted((c.psi, c.links.ids()) for c in found)


def test_threads_match_serial():
    g = load_graph([(i, (i + d) % 11) for i in range(11) for d in (1, 3)])
    serial = detect_communities(g, EvolutionConfig(population_size=5, max_best_age=4, rng_seed=3))
    threaded = detect_communities(g, EvolutionConfig(population_size=5, max_best_age=4, rng_seed=3, threads=4))
    assert [(c.links.ids(), c.psi) for c in serial] == [(c.links.ids(), c.psi) for c in threaded]
