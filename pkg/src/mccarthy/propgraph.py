"""Directed graphs as propositional programs.

A graph on nodes ``0..n-1`` becomes a program with head ``true`` and the parts

    p_i  = p_i                                   for each node i
    p_ij = if p_i then p_j else r                when (i, j) is an edge
    p_ij = if p_i then r else p_j                otherwise
    r    = false

Isomorphic graphs give programs with equal intensions in every structure,
and the converse holds as well, so intensional equivalence is at least as
hard as graph isomorphism.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .identities import FREE
from .intension import intensionally_equivalent
from .congruence import congruent
from .syntax import (
    FALSE,
    TRUE,
    Cond,
    Equation,
    ExtendedProgram,
    FnApp,
    ParseError,
    Sort,
    fvar,
)

MAX_BRUTE_FORCE_NODES = 8


class GuardExceeded(Exception):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("a graph needs at least one node")
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range")
        object.__setattr__(self, "edges", edges)

    def relabel(self, perm) -> "Graph":
        return Graph(self.n, frozenset((perm[i], perm[j]) for i, j in self.edges))


def _node_var(i: int, offset: int):
    return fvar(offset + i, 0, Sort.BOOL)


@functools.lru_cache(maxsize=8192)
def encode_graph(g: Graph, offset: int = 0) -> ExtendedProgram:
    """The propositional program of ``g``; variable indices start at ``offset``."""
    n = g.n
    node = [FnApp(_node_var(i, offset), ()) for i in range(n)]
    r_var = fvar(offset + n + n * n, 0, Sort.BOOL)
    r = FnApp(r_var, ())
    eqs = [Equation(_node_var(i, offset), (), node[i]) for i in range(n)]
    for i in range(n):
        for j in range(n):
            if (i, j) in g.edges:
                body = Cond(node[i], node[j], r)
            else:
                body = Cond(node[i], r, node[j])
            eqs.append(Equation(fvar(offset + n + i * n + j, 0, Sort.BOOL), (), body))
    eqs.append(Equation(r_var, (), FALSE))
    return ExtendedProgram(TRUE, (), tuple(eqs))


def _encode_pair(g1: Graph, g2: Graph):
    offset = g1.n + g1.n * g1.n + 1
    return encode_graph(g1), encode_graph(g2, offset)


def graphs_isomorphic_via_intension(g1: Graph, g2: Graph) -> bool:
    if g1.n != g2.n:
        return False
    e, f = _encode_pair(g1, g2)
    return intensionally_equivalent(FREE, None, e, f) is not None


def graphs_isomorphic_via_congruence(g1: Graph, g2: Graph) -> bool:
    if g1.n != g2.n:
        return False
    e, f = _encode_pair(g1, g2)
    return congruent(e, f) is not None


def brute_force_isomorphic(g1: Graph, g2: Graph) -> bool:
    """Try every bijection of nodes."""
    if g1.n != g2.n or len(g1.edges) != len(g2.edges):
        return False
    if g1.n > MAX_BRUTE_FORCE_NODES:
        raise GuardExceeded(f"{g1.n} nodes exceed the brute-force limit of {MAX_BRUTE_FORCE_NODES}")
    return any(g1.relabel(perm).edges == g2.edges for perm in itertools.permutations(range(g1.n)))


def parse_graph(text: str) -> Graph:
    n = None
    edges = []
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if n is None:
            if len(words) != 2 or words[0] != "nodes" or not words[1].isdigit() or int(words[1]) == 0:
                raise ParseError("expected 'nodes <n>' with n > 0", lineno, 1)
            n = int(words[1])
            continue
        if len(words) != 3 or words[0] != "edge" or not all(w.isdigit() for w in words[1:]):
            raise ParseError("expected 'edge <i> <j>'", lineno, 1)
        i, j = int(words[1]), int(words[2])
        if i >= n or j >= n:
            raise ParseError(f"edge ({i}, {j}) names a node outside 0..{n - 1}", lineno, 1)
        edges.append((i, j))
    if n is None:
        raise ParseError("expected 'nodes <n>'", 1, 1)
    return Graph(n, frozenset(edges))


def format_graph(g: Graph) -> str:
    lines = [f"nodes {g.n}"] + [f"edge {i} {j}" for i, j in sorted(g.edges)]
    return "\n".join(lines) + "\n"
