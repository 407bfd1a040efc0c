import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import SEARCH_SIG
from oracles import forest_linear_extensions
from mccarthy.congruence import congruent
from mccarthy.generate import DEFAULT_SIGNATURE, ProgramShape, random_program, random_structure
from mccarthy.reduction import (
    FIRST,
    HEAD,
    RANDOM,
    NotFresh,
    NotReducibleHere,
    ReductionLabel,
    SortArityMismatch,
    all_maximal_sequences,
    canonical_form,
    enumerate_redexes,
    fresh_for,
    normalize,
    size,
    step,
)
from mccarthy.semantics import ITERATOR_SIGNATURE, denote_all, iterator_program, kleene_equal
from mccarthy.syntax import (
    FuncSymbol,
    Signature,
    Sort,
    fvar,
    is_irreducible_program,
    parse_program,
)


def _random_programs(seed, count):
    rng = random.Random(seed)
    return [random_program(rng, ProgramShape()) for _ in range(count)]


# -- size ---------------------------------------------------------------------


def test_search_program_has_size_five(search_program):
    assert size(search_program) == 5


def test_irreducible_programs_have_size_zero(search_program):
    assert size(canonical_form(search_program)) == 0
    assert size(parse_program("true () where { p() = q(), q() = p() }")) == 0


def test_single_nested_call_has_one_redex():
    sig = Signature([FuncSymbol("phi", 1, Sort.IND), FuncSymbol("psi", 1, Sort.IND)])
    p = parse_program("p(x) (x) where { p(x) = phi(psi(x)) }", sig)
    assert enumerate_redexes(p) == [(p.equations[0].var, 1)]


def test_redex_order_puts_head_last(search_program):
    p0 = search_program.equations[0].var
    assert enumerate_redexes(search_program) == [(p0, 1), (p0, 3), (HEAD, 2)]


# -- one step -----------------------------------------------------------------


def test_first_step_of_the_worked_sequence(search_program):
    p0 = search_program.equations[0].var
    q1 = fvar(1, 2, Sort.BOOL)
    f1 = step(search_program, ReductionLabel(p0, 1, q1))
    expected = parse_program(
        "p(x, phi0(x)) (x) where { p(x, y) = if q1(x, y) then y else p(x, sigma(x, y)),"
        " q1:bool(x, y) = test(phi0(x), y) }",
        SEARCH_SIG,
    )
    assert congruent(f1, expected) is not None
    assert size(f1) == 4


def test_first_strategy_trace(search_program):
    trace = normalize(search_program, FIRST)
    assert len(trace) == 5
    assert [str(lab) for lab, _ in trace.steps] == [
        "(p0,1,p1)", "(p0,3,p2)", "(p1,1,p3)", "(p2,2,p4)", "(HEAD,2,p5)",
    ]
    assert is_irreducible_program(trace.final)
    assert len(trace.final.equations) == 6


def test_every_maximal_sequence_has_length_size(search_program):
    seqs = all_maximal_sequences(search_program)
    # one redex per non-immediate subterm; a subterm's redex opens only after its parent's
    # head: phi0(x) alone; body: test(phi0) over phi0, p(x, sigma) over sigma
    assert len(seqs) == forest_linear_extensions([1, 2, 1, 2, 1]) == 30
    finals = [final for _, final in seqs]
    assert all(len(labels) == 5 for labels, _ in seqs)
    assert all(congruent(finals[0], f) is not None for f in finals[1:])


def test_step_errors(search_program):
    p0 = search_program.equations[0].var
    with pytest.raises(NotReducibleHere):
        step(search_program, ReductionLabel(p0, 2, fvar(9, 2, Sort.IND)))  # y is immediate
    with pytest.raises(NotReducibleHere):
        step(search_program, ReductionLabel(p0, 4, fvar(9, 2, Sort.IND)))
    with pytest.raises(NotReducibleHere):
        step(search_program, ReductionLabel(fvar(7, 2), 1, fvar(9, 2, Sort.BOOL)))
    with pytest.raises(NotFresh):
        step(search_program, ReductionLabel(p0, 1, p0))
    with pytest.raises(SortArityMismatch):
        step(search_program, ReductionLabel(p0, 1, fvar(9, 2, Sort.IND)))
    with pytest.raises(SortArityMismatch):
        step(search_program, ReductionLabel(HEAD, 2, fvar(9, 2, Sort.IND)))


def test_irreducible_programs_reject_every_label(search_program):
    nf = canonical_form(search_program)
    fresh = fvar(50, 2, Sort.IND)
    for site in [HEAD, *(eq.var for eq in nf.equations)]:
        for j in range(1, 4):
            with pytest.raises((NotReducibleHere, SortArityMismatch)):
                step(nf, ReductionLabel(site, j, fresh))


def test_amalgamation_body_case():
    sig = Signature([
        FuncSymbol("c", 3, Sort.IND),
        FuncSymbol("g", 1, Sort.IND),
        FuncSymbol("h", 1, Sort.IND),
    ])
    e = parse_program("p(x) (x) where { p(x) = c(g(x), x, h(x)) }", sig)
    p = e.equations[0].var
    q, q2 = fvar(1, 1), fvar(2, 1)
    one_then_three = step(step(e, ReductionLabel(p, 1, q)), ReductionLabel(p, 3, q2))
    three_then_one = step(step(e, ReductionLabel(p, 3, q2)), ReductionLabel(p, 1, q))
    assert congruent(one_then_three, three_then_one) is not None
    assert set(one_then_three.equations) == set(three_then_one.equations)


def test_amalgamation_head_case():
    sig = Signature([FuncSymbol("c", 2, Sort.IND), FuncSymbol("g", 1, Sort.IND)])
    e = parse_program("c(g(x), g(x)) (x)", sig)
    a = step(step(e, ReductionLabel(HEAD, 1, fvar(0, 1))), ReductionLabel(HEAD, 2, fvar(1, 1)))
    b = step(step(e, ReductionLabel(HEAD, 2, fvar(0, 1))), ReductionLabel(HEAD, 1, fvar(1, 1)))
    assert congruent(a, b) is not None


# -- canonical forms ----------------------------------------------------------


def test_irreducible_program_is_its_own_canonical_form(search_program):
    nf = canonical_form(search_program)
    assert normalize(nf).steps == ()
    assert canonical_form(nf) == nf


def test_random_strategy_agrees_with_first(search_program):
    a = normalize(search_program, FIRST).final
    b = normalize(search_program, RANDOM(7)).final
    assert congruent(a, b) is not None


def test_iterator_canonical_form():
    nf = canonical_form(iterator_program())
    assert len(nf.equations) == 6
    expected = parse_program(
        "q(p1(x)) (x) where { p1(x) = input(x), p2:bool(s) = T(s), p3(s) = output(s),"
        " p4(s) = sigma(s), p5(s) = q(p4(s)), q(s) = if p2(s) then p3(s) else p5(s) }",
        ITERATOR_SIGNATURE,
    )
    assert congruent(nf, expected) is not None


def test_reduction_then_normalisation_is_congruent(search_program):
    rng = random.Random(3)
    for _ in range(20):
        cur = search_program
        for _ in range(rng.randint(0, 5)):
            redexes = enumerate_redexes(cur)
            if not redexes:
                break
            target, j = rng.choice(redexes)
            cur = step(cur, ReductionLabel(target, j, fresh_for(cur, target, j, cur.max_fn_index() + 1)))
        assert congruent(canonical_form(cur), canonical_form(search_program)) is not None


# -- properties -----------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**16))
def test_each_step_lowers_size_by_one(seed, strategy_seed):
    p = _random_programs(seed, 1)[0]
    trace = normalize(p, RANDOM(strategy_seed))
    sizes = [size(p)] + [size(q) for _, q in trace.steps]
    assert sizes == list(range(size(p), -1, -1))
    assert is_irreducible_program(trace.final)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 2**16), st.integers(0, 2**16))
def test_confluence_up_to_congruence(seed, s1, s2):
    p = _random_programs(seed, 1)[0]
    a = normalize(p, RANDOM(s1)).final
    b = normalize(p, RANDOM(s2)).final
    assert congruent(a, b) is not None


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_every_step_preserves_denotation(seed):
    rng = random.Random(seed)
    p = random_program(rng, ProgramShape())
    a = random_structure(rng, DEFAULT_SIGNATURE, max_size=3)
    expect = denote_all(a, p)
    for _, q in normalize(p, RANDOM(seed)).steps:
        got = denote_all(a, q)
        assert all(kleene_equal(got[k], v) for k, v in expect.items())


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_fresh_variables_never_collide(seed):
    p = _random_programs(seed, 1)[0]
    source = set(p.function_vars())
    introduced = [lab.fresh for lab, _ in normalize(p, RANDOM(seed)).steps]
    assert len(set(introduced)) == len(introduced)
    assert not source & set(introduced)
