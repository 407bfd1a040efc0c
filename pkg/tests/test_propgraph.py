import itertools
import random

import pytest

from mccarthy.congruence import congruent
from mccarthy.generate import all_graphs, graph_class_representatives, random_graph
from mccarthy.propgraph import (
    MAX_BRUTE_FORCE_NODES,
    Graph,
    GuardExceeded,
    brute_force_isomorphic,
    encode_graph,
    format_graph,
    graphs_isomorphic_via_congruence,
    graphs_isomorphic_via_intension,
    parse_graph,
)
from mccarthy.syntax import (
    FALSE,
    TRUE,
    Cond,
    FnApp,
    ParseError,
    is_irreducible_program,
    is_propositional,
)

PATH = Graph(3, {(0, 1), (1, 2)})
REVERSED = Graph(3, {(2, 1), (1, 0)})
TWO_CYCLE = Graph(2, {(0, 1), (1, 0)})
ISOLATED = Graph(2, set())


def test_single_node_has_four_parts():
    p = encode_graph(Graph(1, set()))
    assert len(p.parts) == 1 + 1 + 1 + 1
    assert p.head == TRUE


def test_part_count():
    for n in range(1, 5):
        assert len(encode_graph(Graph(n, set())).parts) == n + n * n + 2


def test_edge_and_non_edge_bodies():
    p = encode_graph(Graph(2, {(0, 1)}))
    bodies = {eq.var.index: eq.rhs for eq in p.equations}
    p0, p1, r = (FnApp(next(eq.var for eq in p.equations if eq.var.index == k), ()) for k in (0, 1, 6))
    assert bodies[2 + 0 * 2 + 1] == Cond(p0, p1, r)  # edge (0, 1)
    assert bodies[2 + 1 * 2 + 0] == Cond(p1, r, p0)  # no edge (1, 0)
    assert bodies[0] == p0 and bodies[6] == FALSE


def test_encodings_are_propositional_and_irreducible():
    rng = random.Random(0)
    for n in range(1, 6):
        p = encode_graph(random_graph(rng, n))
        assert is_propositional(p) and is_irreducible_program(p)


def test_encoding_is_injective_on_two_node_graphs():
    graphs = all_graphs(2)
    programs = [encode_graph(g) for g in graphs]
    for (g, p), (h, q) in itertools.combinations(zip(graphs, programs), 2):
        # the node variables are pinned by their indices only up to renaming,
        # so distinct but isomorphic graphs may still encode congruently
        if congruent(p, q) is not None:
            assert brute_force_isomorphic(g, h)
    assert len({frozenset(p.equations) for p in programs}) == len(graphs)


def test_listed_examples():
    assert graphs_isomorphic_via_intension(PATH, PATH)
    assert graphs_isomorphic_via_intension(PATH, REVERSED)
    assert not graphs_isomorphic_via_intension(TWO_CYCLE, ISOLATED)
    assert not graphs_isomorphic_via_intension(Graph(2, set()), Graph(3, set()))


def test_brute_force_oracle():
    assert brute_force_isomorphic(PATH, PATH)
    assert not brute_force_isomorphic(PATH, Graph(3, {(0, 1)}))
    big = Graph(MAX_BRUTE_FORCE_NODES + 1, {(0, 1)})
    with pytest.raises(GuardExceeded):
        brute_force_isomorphic(big, big)


def test_isomorphism_class_counts():
    # directed graphs up to isomorphism, with and without loops
    assert [len(graph_class_representatives(n, loops=False)) for n in range(1, 4)] == [1, 3, 16]
    assert [len(graph_class_representatives(n)) for n in range(1, 4)] == [2, 10, 104]


def test_all_small_pairs_agree():
    for n in range(1, 3):
        graphs = all_graphs(n)
        for g, h in itertools.product(graphs, repeat=2):
            expect = brute_force_isomorphic(g, h)
            assert graphs_isomorphic_via_congruence(g, h) == expect
            assert graphs_isomorphic_via_intension(g, h) == expect


def test_random_relabelled_pairs_agree():
    rng = random.Random(9)
    for _ in range(40):
        n = rng.randint(3, 5)
        g = random_graph(rng, n)
        h = g.relabel(rng.sample(range(n), n)) if rng.random() < 0.5 else random_graph(rng, n)
        expect = brute_force_isomorphic(g, h)
        assert graphs_isomorphic_via_congruence(g, h) == expect
        assert graphs_isomorphic_via_intension(g, h) == expect


def test_graph_files():
    assert parse_graph(format_graph(PATH)) == PATH
    assert parse_graph("# comment\nnodes 2\n\nedge 1 0  # back\n") == Graph(2, {(1, 0)})
    for bad in ["edge 0 1\n", "nodes 0\n", "nodes 2\nedge 0 2\n", "nodes 2\nedge 0\n", ""]:
        with pytest.raises(ParseError):
            parse_graph(bad)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(0, set())
    with pytest.raises(ValueError):
        Graph(2, {(0, 5)})
