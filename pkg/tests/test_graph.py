import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import brute_connected, graphs_with_subset, numbered
from linkcomm.errors import DisconnectedGraph, DuplicateEdge, EdgeListSyntaxError, EmptyInput, EmptySet, SelfLoop, SizeMismatch
from linkcomm.graph import (
    LinkSet,
    components,
    is_connected,
    load_graph,
    main_component,
    parse_edge_list,
    read_edge_list,
    symmetric_difference_distance,
)


def test_bowtie_shape(bowtie):
    assert (bowtie.n, bowtie.m) == (5, 6)
    degrees = dict(zip(bowtie.labels, bowtie.degree))
    assert degrees == {"a": 2, "b": 2, "c": 4, "d": 2, "e": 2}
    assert sum(bowtie.degree) == 2 * bowtie.m
    assert all(len(a) == k for a, k in zip(bowtie.adjacency, bowtie.degree))


def test_single_edge():
    g = load_graph([("a", "b")])
    assert (g.n, g.m) == (2, 1)


@pytest.mark.parametrize(
    "edges, error",
    [
        ([(1, 2), (2, 3), (1, 3), (4, 5)], DisconnectedGraph),
        ([(1, 1)], SelfLoop),
        ([(1, 2), (2, 1)], DuplicateEdge),
        ([], EmptyInput),
    ],
)
def test_invalid_graphs(edges, error):
    with pytest.raises(error):
        load_graph(edges)


def test_ids_follow_input_order(bowtie):
    assert bowtie.labels == ("a", "b", "c", "d", "e")
    assert bowtie.link_labels(3) == ("c", "d")
    assert bowtie.node_id("c") == 2


def test_edge_list_parsing(tmp_path):
    text = "# comment\n\nx y\n  y   z \n"
    assert parse_edge_list(text) == [("x", "y"), ("y", "z")]
    path = tmp_path / "g.txt"
    path.write_text(text)
    assert read_edge_list(path).m == 2
    with pytest.raises(EdgeListSyntaxError):
        parse_edge_list("a b c\n")


def test_distance_examples(bowtie):
    a = LinkSet.from_ids(10, [1, 2])
    b = LinkSet.from_ids(10, [2, 3])
    assert symmetric_difference_distance(a, b) == 2
    assert symmetric_difference_distance(a, a) == 0
    assert symmetric_difference_distance(numbered(bowtie, 1, 2, 3), numbered(bowtie, 4, 5, 6)) == 6
    with pytest.raises(SizeMismatch):
        symmetric_difference_distance(a, LinkSet(11))


@given(st.integers(0, 2**12 - 1), st.integers(0, 2**12 - 1), st.integers(0, 2**12 - 1))
def test_distance_is_a_metric(x, y, z):
    a, b, c = (LinkSet(12, v) for v in (x, y, z))
    d = symmetric_difference_distance
    assert d(a, b) == d(b, a)
    assert (d(a, b) == 0) == (a == b)
    assert d(a, c) <= d(a, b) + d(b, c)


def test_linkset_basics():
    s = LinkSet(70)
    s.add(65)
    s.add(3)
    s.add(3)
    assert len(s) == 2 and 65 in s and 4 not in s
    assert list(s) == [3, 65]
    s.toggle(3)
    s.discard(65)
    assert len(s) == 0
    big = LinkSet.from_ids(200, range(0, 200, 2))
    assert big.ids() == list(range(0, 200, 2))
    assert big.complement().ids() == list(range(1, 200, 2))


def test_connectivity_examples(bowtie):
    assert is_connected(bowtie, numbered(bowtie, 1, 2, 3))
    assert not is_connected(bowtie, numbered(bowtie, 1, 4))
    assert is_connected(bowtie, numbered(bowtie, 5))
    assert not is_connected(bowtie, bowtie.empty_set())


def test_components_examples(bowtie):
    assert components(bowtie, numbered(bowtie, 1, 4)) == [numbered(bowtie, 1), numbered(bowtie, 4)]
    assert components(bowtie, numbered(bowtie, 1, 2, 3)) == [numbered(bowtie, 1, 2, 3)]
    assert components(bowtie, numbered(bowtie, 1, 2, 3, 6)) == [numbered(bowtie, 1, 2, 3), numbered(bowtie, 6)]


def test_main_component_examples(bowtie):
    assert main_component(bowtie, numbered(bowtie, 1, 2, 3, 6)) == numbered(bowtie, 1, 2, 3)
    assert main_component(bowtie, numbered(bowtie, 4, 5, 6)) == numbered(bowtie, 4, 5, 6)
    # sizes 1 and 2 by hand: {1} alone, {4, 5} share node c
    assert main_component(bowtie, numbered(bowtie, 1, 4, 5)) == numbered(bowtie, 4, 5)
    with pytest.raises(EmptySet):
        main_component(bowtie, bowtie.empty_set())


@given(graphs_with_subset())
def test_components_partition_the_set(case):
    g, links = case
    parts = components(g, links)
    union = 0
    for part in parts:
        assert union & part.bits == 0
        union |= part.bits
        assert brute_connected(g, part.ids())
    assert union == links.bits
    sizes = [len(p) for p in parts]
    assert sizes == sorted(sizes, reverse=True)
    assert is_connected(g, links) == brute_connected(g, links.ids())
