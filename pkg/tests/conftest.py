import itertools
import sys

import pytest

from mccarthy.semantics import FiniteStructure
from mccarthy.syntax import FuncSymbol, Signature, Sort, parse_program

SEARCH_SIG = Signature([
    FuncSymbol("phi0", 1, Sort.IND),
    FuncSymbol("sigma", 2, Sort.IND),
    FuncSymbol("test", 2, Sort.BOOL),
])

SEARCH_TEXT = "p(x, phi0(x)) (x) where { p(x, y) = if test(phi0(x), y) then y else p(x, sigma(x, y)) }"

LIAR_TEXT = "p() () where { p:bool() = if p() then false else true }"
TRUTHTELLER_TEXT = "p() () where { p:bool() = if p() then true else false }"

PHIPSI_SIG = Signature([FuncSymbol("phi", 3, Sort.IND), FuncSymbol("psi", 3, Sort.IND)])


@pytest.fixture
def search_program():
    return parse_program(SEARCH_TEXT, SEARCH_SIG)


@pytest.fixture
def liar():
    return parse_program(LIAR_TEXT)


@pytest.fixture
def truthteller():
    return parse_program(TRUTHTELLER_TEXT)


@pytest.fixture
def cong_pair():
    e = parse_program("true () where { p:bool() = p() }")
    f = parse_program("true () where { p() = if p() then p() else p() }")
    return e, f


def diagonal_structure(size: int = 3) -> FiniteStructure:
    """phi(r, s, t) = psi(r, s, t) = 0 when s = t, divergent otherwise."""
    table = {(r, s, t): 0 for r, s, t in itertools.product(range(size), repeat=3) if s == t}
    return FiniteStructure("diag", size, PHIPSI_SIG, {"phi": table, "psi": table}, total=False)


@pytest.fixture
def diag():
    return diagonal_structure()


def scramble(p, rng):
    """A congruent variant: fresh function names, renamed parameters, shuffled body."""
    from mccarthy.syntax import Equation, ExtendedProgram, fvar, ind, substitute

    fns = sorted(p.function_vars(), key=lambda v: v.index)
    new_idx = rng.sample(range(len(fns) + 10), len(fns))
    fn_map = {v: fvar(i, v.arity, v.sort) for v, i in zip(fns, new_idx)}
    eqs = []
    for eq in p.equations:
        fresh = rng.sample(range(len(eq.params) + 5), len(eq.params))
        ind_map = {x: ind(i) for x, i in zip(eq.params, fresh)}
        eqs.append(Equation(fn_map[eq.var], tuple(ind_map[x] for x in eq.params),
                            substitute(eq.rhs, fn_map, ind_map)))
    rng.shuffle(eqs)
    return ExtendedProgram(substitute(p.head, fn_map), p.free_vars, tuple(eqs)), fn_map


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance.RESULTS):
            terminalreporter.write_line(line)
