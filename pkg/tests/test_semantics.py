import itertools
import random
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from conftest import PHIPSI_SIG, diagonal_structure
from oracles import naive_satisfies, operational_value
from mccarthy.generate import (
    DEFAULT_SIGNATURE,
    IDENTITY_SIGNATURE,
    random_identity,
    random_iterator,
    random_program,
    random_structure,
)
from mccarthy.semantics import (
    DIVERGES,
    Assignment,
    CarrierTooLargeForEnumeration,
    FiniteStructure,
    InvalidStructure,
    Iterator,
    UnboundVariable,
    denote_all,
    denote_program,
    denote_term,
    find_countermodel,
    format_structure,
    iterator_program,
    iterator_structure,
    kleene_equal,
    least_fixed_point,
    parse_structure,
    run_iterator,
    satisfies,
    satisfies_injective,
)
from mccarthy.syntax import (
    TRUE,
    Cond,
    FnApp,
    FuncSymbol,
    IndVar,
    ParseError,
    Signature,
    Sort,
    SymApp,
    fvar,
    ind,
    parse_program,
    parse_term,
    parse_terms,
)

UNARY = Signature([FuncSymbol("f", 1, Sort.IND), FuncSymbol("r", 1, Sort.BOOL)])


def small_structure():
    return FiniteStructure("small", 3, UNARY, {"f": {(0,): 1, (1,): 2}, "r": {(0,): True, (2,): False}})


# -- terms --------------------------------------------------------------------


def test_divergent_test_makes_conditional_diverge():
    q = fvar(0, 0, Sort.BOOL)
    t = Cond(FnApp(q, ()), TRUE, TRUE)
    assert denote_term(small_structure(), Assignment({}, {q: {}}), t) is DIVERGES


def test_variable_clause():
    assert denote_term(small_structure(), Assignment({ind(0): 2}), IndVar(ind(0))) == 2


def test_identity_builtin():
    t = parse_term("id(x)")
    assert denote_term(small_structure(), Assignment({ind(0): 2}), t) == 2


def test_builtin_constants():
    a = small_structure()
    assert denote_term(a, Assignment(), parse_term("psi_true()")) is True
    assert denote_term(a, Assignment(), parse_term("psi_false()")) is False


def test_strictness_and_missing_entries():
    a = small_structure()
    t = parse_term("f(f(f(x)))", UNARY)
    assert denote_term(a, Assignment({ind(0): 0}), t) is DIVERGES
    assert denote_term(a, Assignment({ind(0): 2}), parse_term("f(x)", UNARY)) is DIVERGES


def test_unbound_variables():
    with pytest.raises(UnboundVariable):
        denote_term(small_structure(), Assignment(), IndVar(ind(0)))
    with pytest.raises(UnboundVariable):
        denote_term(small_structure(), Assignment(), FnApp(fvar(0), ()))


# -- programs -----------------------------------------------------------------


def test_trivial_recursions():
    a = small_structure()
    assert denote_program(a, parse_program("true () where { p() = p() }"), ()) is True
    assert denote_program(a, parse_program("p() where { p() = p() }"), ()) is DIVERGES


def test_liar_and_truthteller_diverge(liar, truthteller):
    a = small_structure()
    assert denote_program(a, liar, ()) is DIVERGES
    assert denote_program(a, truthteller, ()) is DIVERGES


def test_search_loop_on_a_chain(search_program):
    # phi0(x) = x, sigma(x, y) = y + 1, test(x, y) holds once y reaches 2
    from conftest import SEARCH_SIG

    n = 4
    tables = {
        "phi0": {(x,): x for x in range(n)},
        "sigma": {(x, y): y + 1 for x in range(n) for y in range(n - 1)},
        "test": {(x, y): y >= 2 for x in range(n) for y in range(n)},
    }
    a = FiniteStructure("chain", n, SEARCH_SIG, tables, total=False)
    assert denote_all(a, search_program) == {(0,): 2, (1,): 2, (2,): 2, (3,): 3}


def test_input_arity_checked(search_program):
    with pytest.raises(ValueError):
        denote_program(small_structure(), parse_program("true (x)"), ())


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_least_fixed_point_matches_operational_oracle(seed):
    rng = random.Random(seed)
    p = random_program(rng)
    a = random_structure(rng, DEFAULT_SIGNATURE, max_size=3)
    ours = denote_all(a, p)  # stabilisation and monotonicity are asserted inside
    for args, value in ours.items():
        assert kleene_equal(value, operational_value(a, p, args)), (str(p), args)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_kleene_stages_are_monotone_and_least(seed):
    rng = random.Random(seed)
    p = random_program(rng)
    a = random_structure(rng, DEFAULT_SIGNATURE, max_size=3)
    tables = least_fixed_point(a, p)
    # a fixed point: re-evaluating every equation reproduces the tables
    for eq in p.equations:
        for pt in itertools.product(range(a.size), repeat=len(eq.params)):
            env = dict(zip(eq.params, pt))
            val = denote_term(a, Assignment(env, tables), eq.rhs)
            assert kleene_equal(val, tables[eq.var].get(pt))


@settings(max_examples=200)
@given(st.lists(st.sampled_from([None, True, False, 0, 1, 2]), min_size=3, max_size=3))
def test_kleene_equality_is_an_equivalence(triple):
    x, y, z = triple
    assert kleene_equal(x, x)
    assert kleene_equal(x, y) == kleene_equal(y, x)
    if kleene_equal(x, y) and kleene_equal(y, z):
        assert kleene_equal(x, z)
    assert not kleene_equal(True, 1) and not kleene_equal(0, False)


# -- satisfaction ---------------------------------------------------------------


def test_trivial_conditional_identity():
    a = small_structure()
    for q in (parse_term("r(x)", UNARY), FnApp(fvar(0, 1, Sort.BOOL), (IndVar(ind(0)),))):
        assert satisfies(a, Cond(q, q, q), q)


def test_distinct_variables_differ():
    x, y = parse_terms(["x", "y"])
    assert not satisfies(small_structure(), x, y)
    one = FiniteStructure("one", 1, UNARY, {})
    assert satisfies(one, x, y)


def test_reflexivity():
    t = parse_term("f(p(x, y))", UNARY)
    assert satisfies(small_structure(), t, t)


def test_countermodel_is_a_real_witness():
    a = small_structure()
    lhs, rhs = parse_terms(["f(p(x))", "f(x)"], UNARY)
    sigma = find_countermodel(a, lhs, rhs)
    assert sigma is not None
    full = Assignment(sigma.ind_vals, {v: dict(t) for v, t in sigma.fn_vals.items()})
    assert not kleene_equal(denote_term(a, full, lhs), denote_term(a, full, rhs))


def test_enumeration_guard():
    lhs, rhs = parse_terms(["f(p(x, y))", "f(q(y, x))"], UNARY)
    with pytest.raises(CarrierTooLargeForEnumeration):
        satisfies(small_structure(), lhs, rhs, max_assignments=10)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_lazy_enumeration_matches_naive_enumeration(seed):
    rng = random.Random(seed)
    identity = random_identity(rng, max_ind=2, max_fn=2)
    a = random_structure(rng, IDENTITY_SIGNATURE, size=2)
    assert satisfies(a, identity.lhs, identity.rhs) == naive_satisfies(a, identity.lhs, identity.rhs)
    placed = [v for v in dict.fromkeys(
        x.var for side in (identity.lhs, identity.rhs) if isinstance(side, SymApp)
        for x in side.args if isinstance(x, IndVar)
    )]
    if len(placed) <= a.size:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ours = satisfies_injective(a, identity.lhs, identity.rhs, placed=placed)
        assert ours == naive_satisfies(a, identity.lhs, identity.rhs, injective_on=placed)


def test_injective_satisfaction_vacuous_on_small_carrier():
    a = FiniteStructure("tiny", 1, PHIPSI_SIG, {})
    lhs, rhs = parse_terms(["phi(x, s, t)", "psi(y, s, t)"], PHIPSI_SIG)
    with pytest.warns(UserWarning, match="vacuously"):
        assert satisfies_injective(a, lhs, rhs)


def test_injective_reflexive():
    lhs = parse_term("phi(x, s, t)", PHIPSI_SIG)
    assert satisfies_injective(diagonal_structure(), lhs, lhs)


def test_injectivity_hides_the_diagonal():
    # distinct s, t always diverge on diag; only s = t separates q1 from q2
    lhs, rhs = parse_terms(["phi(q1(), s, t)", "psi(q2(), s, t)"], PHIPSI_SIG)
    a = diagonal_structure(3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert satisfies_injective(a, lhs, rhs)
    assert not satisfies(a, lhs, rhs)
    lhs, rhs = parse_terms(["phi(q1(), s, s)", "psi(q2(), s, s)"], PHIPSI_SIG)
    assert not satisfies_injective(a, lhs, rhs)


# -- structure files ----------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_structure_file_round_trip(seed, total):
    a = random_structure(random.Random(seed), DEFAULT_SIGNATURE, total=total)
    b = parse_structure(format_structure(a))
    assert (b.name, b.size, b.total, b.tables) == (a.name, a.size, a.total, a.tables)
    assert b.signature == a.signature


@pytest.mark.parametrize(
    "text",
    [
        "structure s\ncarrier 2\npartial\nfunc f arity 1 sort ind\n0 -> 5\nend\n",
        "structure s\ncarrier 2\npartial\nfunc f arity 1 sort ind\n0 1 -> 0\nend\n",
        "structure s\ncarrier 2\ntotal\nfunc f arity 1 sort ind\n0 -> 0\nend\n",
        "structure s\ncarrier 2\npartial\nfunc r arity 1 sort bool\n0 -> 1\nend\n",
        "structure s\ncarrier 2\npartial\nfunc f arity 1 sort ind\n0 -> 0\n",
        "carrier 2\n",
    ],
)
def test_bad_structure_files(text):
    with pytest.raises(ParseError):
        parse_structure(text)


def test_builtins_cannot_be_redefined():
    with pytest.raises(InvalidStructure):
        FiniteStructure("s", 2, Signature([]), {"id": {(0,): 1}})


# -- iterators ----------------------------------------------------------------


def test_iterator_carrier_is_a_disjoint_sum():
    it = Iterator(1, 2, 1, (0,), {0: 1}, {1}, {1: 0})
    a = iterator_structure(it)
    assert a.size == 4
    s_elems = {it.s_elem(s) for s in range(2)}
    assert {args[0] for args in a.tables["T"]} == s_elems
    assert set(a.tables["input"]) == {(it.x_elem(0),)}


def test_iterator_program_shape():
    p = iterator_program()
    assert len(p.equations) == 1
    assert isinstance(p.head, FnApp) and p.head.fn == p.equations[0].var
    assert isinstance(p.head.args[0], SymApp) and p.head.args[0].sym.name == "input"


def test_run_iterator_cases():
    immediate = Iterator(1, 1, 2, (0,), {}, {0}, {0: 1})
    assert run_iterator(immediate, 0) == 1
    loop = Iterator(1, 1, 1, (0,), {0: 0}, set(), {})
    assert run_iterator(loop, 0) is DIVERGES
    stuck = Iterator(1, 2, 1, (0,), {}, {1}, {1: 0})
    assert run_iterator(stuck, 0) is DIVERGES


def test_hundred_random_iterators_agree_with_their_programs():
    rng = random.Random(11)
    p = iterator_program()
    for _ in range(100):
        it = random_iterator(rng)
        a = iterator_structure(it)
        for x in range(it.n_inputs):
            expect = run_iterator(it, x)
            got = denote_program(a, p, (it.x_elem(x),))
            assert kleene_equal(got, None if expect is None else it.w_elem(expect))


def test_iterator_validation():
    with pytest.raises(ValueError):
        Iterator(1, 1, 1, (3,), {}, set(), {})
    with pytest.raises(ValueError):
        Iterator(1, 2, 1, (0,), {}, {0}, {1: 0})
