"""Seeded random programs, structures, iterators, identities and graphs.

Every generator takes a ``random.Random`` so sweeps are reproducible.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .identities import IrreducibleIdentity
from .propgraph import Graph
from .semantics import FiniteStructure, Iterator
from .syntax import (
    FALSE,
    TRUE,
    Cond,
    Equation,
    ExtendedProgram,
    FnApp,
    FuncSymbol,
    IndVar,
    Signature,
    Sort,
    SymApp,
    Term,
    Variable,
    fvar,
    ind,
    individual_vars,
)

DEFAULT_SIGNATURE = Signature([
    FuncSymbol("c", 0, Sort.IND),
    FuncSymbol("phi", 1, Sort.IND),
    FuncSymbol("sigma", 2, Sort.IND),
    FuncSymbol("test", 2, Sort.BOOL),
    FuncSymbol("even", 1, Sort.BOOL),
])

IDENTITY_SIGNATURE = Signature([
    FuncSymbol("k", 0, Sort.IND),
    FuncSymbol("f", 1, Sort.IND),
    FuncSymbol("g", 2, Sort.IND),
    FuncSymbol("r", 1, Sort.BOOL),
    FuncSymbol("q", 2, Sort.BOOL),
])


@dataclass(frozen=True)
class ProgramShape:
    max_equations: int = 4
    max_depth: int = 4
    max_arity: int = 2
    max_free: int = 2


def _leaf(rng: random.Random, sort: Sort, params, fns, sig: Signature) -> Term:
    options = []
    if sort is Sort.IND:
        options += [IndVar(v) for v in params]
        options += [SymApp(s, ()) for s in sig.user_symbols() if s.arity == 0 and s.sort is sort]
    else:
        options += [TRUE, FALSE]
    options += [FnApp(p, ()) for p in fns if p.arity == 0 and p.sort is sort]
    if not options:
        raise ValueError("the signature needs a nullary individual constant")
    return rng.choice(options)


def random_term(
    rng: random.Random,
    sort: Sort,
    depth: int,
    params: tuple,
    fns: list,
    sig: Signature = DEFAULT_SIGNATURE,
) -> Term:
    if depth <= 0 or rng.random() < 0.25:
        return _leaf(rng, sort, params, fns, sig)
    kind = rng.choice(["sym", "fn", "cond"])
    if kind == "cond":
        return Cond(
            random_term(rng, Sort.BOOL, depth - 1, params, fns, sig),
            random_term(rng, sort, depth - 1, params, fns, sig),
            random_term(rng, sort, depth - 1, params, fns, sig),
        )
    if kind == "fn":
        cands = [p for p in fns if p.sort is sort]
        if cands:
            p = rng.choice(cands)
            args = tuple(random_term(rng, Sort.IND, depth - 1, params, fns, sig) for _ in range(p.arity))
            return FnApp(p, args)
    syms = [s for s in sig.user_symbols() if s.sort is sort and s.arity > 0]
    if not syms:
        return _leaf(rng, sort, params, fns, sig)
    s = rng.choice(syms)
    return SymApp(s, tuple(random_term(rng, Sort.IND, depth - 1, params, fns, sig) for _ in range(s.arity)))


def random_program(
    rng: random.Random,
    shape: ProgramShape = ProgramShape(),
    sig: Signature = DEFAULT_SIGNATURE,
) -> ExtendedProgram:
    n_eqs = rng.randint(0, shape.max_equations)
    fns = [
        fvar(i, rng.randint(0, shape.max_arity), rng.choice([Sort.IND, Sort.IND, Sort.BOOL]))
        for i in range(n_eqs)
    ]
    free = tuple(ind(i) for i in range(rng.randint(0, shape.max_free)))
    eqs = []
    for p in fns:
        params = tuple(ind(j) for j in range(p.arity))
        eqs.append(Equation(p, params, random_term(rng, p.sort, shape.max_depth, params, fns, sig)))
    head_sort = rng.choice([Sort.IND, Sort.IND, Sort.BOOL])
    head = random_term(rng, head_sort, shape.max_depth, free, fns, sig)
    return ExtendedProgram(head, free, tuple(eqs))


def random_structure(
    rng: random.Random,
    sig: Signature = DEFAULT_SIGNATURE,
    max_size: int = 4,
    total: bool = False,
    size: int | None = None,
    defined: float = 0.75,
    name: str = "random",
) -> FiniteStructure:
    n = size if size is not None else rng.randint(1, max_size)
    tables = {}
    for s in sig.user_symbols():
        table = {}
        for args in itertools.product(range(n), repeat=s.arity):
            if not total and rng.random() >= defined:
                continue
            table[args] = rng.random() < 0.5 if s.sort is Sort.BOOL else rng.randrange(n)
        tables[s.name] = table
    return FiniteStructure(name, n, sig, tables, total)


def random_iterator(rng: random.Random, max_states: int = 6, max_io: int = 3) -> Iterator:
    n_x = rng.randint(1, max_io)
    n_w = rng.randint(1, max_io)
    n_s = rng.randint(1, max_states)
    terminal = frozenset(s for s in range(n_s) if rng.random() < 0.4)
    next_map = {s: rng.randrange(n_s) for s in range(n_s) if rng.random() < 0.85}
    output_map = {s: rng.randrange(n_w) for s in terminal if rng.random() < 0.85}
    input_map = tuple(rng.randrange(n_s) for _ in range(n_x))
    return Iterator(n_x, n_s, n_w, input_map, next_map, terminal, output_map)


# -- irreducible identities ---------------------------------------------------


def _immediate(rng, ind_vars, fn_vars, sort: Sort):
    opts = [v for v in fn_vars if v.sort is sort]
    if sort is Sort.IND and (not opts or rng.random() < 0.5):
        return IndVar(rng.choice(ind_vars))
    if not opts:
        return None
    v = rng.choice(opts)
    return FnApp(v, tuple(IndVar(rng.choice(ind_vars)) for _ in range(v.arity)))


def _irreducible_side(rng, sort, ind_vars, fn_vars, sig: Signature) -> Term:
    while True:
        form = rng.choice([1, 2, 3, 4, 4, 4])
        if form == 1:
            return rng.choice([TRUE, FALSE]) if sort is Sort.BOOL else IndVar(rng.choice(ind_vars))
        if form == 2:
            t = _immediate(rng, ind_vars, [v for v in fn_vars], sort)
            if isinstance(t, FnApp):
                return t
            continue
        if form == 3:
            test = _immediate(rng, ind_vars, fn_vars, Sort.BOOL)
            a = _immediate(rng, ind_vars, fn_vars, sort)
            b = _immediate(rng, ind_vars, fn_vars, sort)
            if test is None or a is None or b is None:
                continue
            return Cond(test, a, b)
        syms = [s for s in sig.user_symbols() if s.sort is sort]
        s = rng.choice(syms)
        return SymApp(s, tuple(_immediate(rng, ind_vars, fn_vars, Sort.IND) for _ in range(s.arity)))


def random_identity(
    rng: random.Random,
    sig: Signature = IDENTITY_SIGNATURE,
    max_ind: int = 3,
    max_fn: int = 2,
) -> IrreducibleIdentity:
    """An irreducible identity with at most ``max_ind`` individual variables."""
    ind_vars = [ind(i) for i in range(rng.randint(1, max_ind))]
    fn_vars = [
        fvar(i, rng.randint(0, 2), rng.choice([Sort.IND, Sort.IND, Sort.BOOL]))
        for i in range(rng.randint(0, max_fn))
    ]
    sort = rng.choice([Sort.IND, Sort.IND, Sort.BOOL])
    lhs = _irreducible_side(rng, sort, ind_vars, fn_vars, sig)
    rhs = lhs if rng.random() < 0.1 else _irreducible_side(rng, sort, ind_vars, fn_vars, sig)
    return IrreducibleIdentity(lhs, rhs)


def identity_variables(identity: IrreducibleIdentity) -> list[Variable]:
    return list(dict.fromkeys(individual_vars(identity.lhs) + individual_vars(identity.rhs)))


# -- graphs -------------------------------------------------------------------


def random_graph(rng: random.Random, n: int, density: float = 0.4, loops: bool = True) -> Graph:
    return Graph(n, frozenset(
        (i, j) for i in range(n) for j in range(n) if (loops or i != j) and rng.random() < density
    ))


def graph_class_representatives(n: int, loops: bool = True) -> list[Graph]:
    """One graph per isomorphism class on ``n`` nodes, by exhaustive enumeration."""
    pairs = [(i, j) for i in range(n) for j in range(n) if loops or i != j]
    perms = list(itertools.permutations(range(n)))
    seen: set = set()
    out = []
    for mask in range(1 << len(pairs)):
        edges = frozenset(p for b, p in enumerate(pairs) if mask >> b & 1)
        if edges in seen:
            continue
        g = Graph(n, edges)
        out.append(g)
        seen.update(g.relabel(perm).edges for perm in perms)
    return out


def all_graphs(n: int, loops: bool = True) -> list[Graph]:
    pairs = [(i, j) for i in range(n) for j in range(n) if loops or i != j]
    return [
        Graph(n, frozenset(p for b, p in enumerate(pairs) if mask >> b & 1))
        for mask in range(1 << len(pairs))
    ]
