"""Intensions and intensional equivalence on a structure.

The intension of a program is represented by its canonical form together with
the structure it is read in.  Two intensions are equal when some permutation
of parts, fixing the head, makes every pair of matched parts an identity that
holds in the structure.  The permutation induces a renaming of function
variables, and the parameters of matched equations are identified by
position.

Pairs whose validity is purely syntactic (both sides are variables, constants,
function-variable calls or conditionals) force the renaming directly.  Pairs
that need the structure are checked once every function variable they
mention has an image.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .congruence import colours_agree, congruent, globally_equivalent, refine_colours, shape
from .identities import (
    FREE,
    Dictionary,
    Form,
    IdentityDecider,
    IrreducibleIdentity,
    form_of,
)
from .reduction import canonical_form
from .semantics import DEFAULT_MAX_ASSIGNMENTS, FiniteStructure
from .syntax import (
    Const,
    ExtendedProgram,
    FnApp,
    IndVar,
    SymApp,
    Term,
    Variable,
    function_vars,
    is_proper,
    substitute,
)

_SYNTACTIC = {(Form.F1, Form.F1), (Form.F2, Form.F2), (Form.F3, Form.F3), (Form.F2, Form.F3)}
_NEVER = {(Form.F1, Form.F2), (Form.F1, Form.F3), (Form.F3, Form.F4)}


@dataclass(frozen=True)
class Intension:
    structure: object  # a FiniteStructure or FREE
    canonical: ExtendedProgram

    @property
    def structure_name(self) -> str:
        return "FREE" if self.structure is FREE else self.structure.name


def intension(target, p: ExtendedProgram) -> Intension:
    return Intension(target, canonical_form(p))


@dataclass(frozen=True)
class EquivalenceWitness:
    permutation: dict  # part index of e -> part index of f; 0 is the head
    fn_renaming: dict  # function variable of f -> function variable of e

    def __str__(self):
        perm = " ".join(f"{i}->{j}" for i, j in sorted(self.permutation.items()))
        pairs = ", ".join(
            f"{b.name}->{a.name}"
            for b, a in sorted(self.fn_renaming.items(), key=lambda kv: kv[0].key())
        )
        return f"permutation: {perm}\nrenaming: {pairs or '(empty)'}"


def _pair_forms(a: Term, b: Term) -> tuple[Form, Form]:
    x, y = form_of(a), form_of(b)
    return (x, y) if x <= y else (y, x)


class _Search:
    def __init__(self, e: ExtendedProgram, f: ExtendedProgram, decider: IdentityDecider):
        self.decider = decider
        self.free = decider.free
        self.e_eqs = {eq.var: eq for eq in e.equations}
        self.f_eqs = {eq.var: eq for eq in f.equations}
        self.fwd: dict[Variable, Variable] = {}  # e -> f
        self.bwd: dict[Variable, Variable] = {}  # f -> e
        self.queue: list[tuple[Variable, Variable]] = []
        self.deferred: list[tuple[Variable, Variable]] = []
        self.open_head: tuple[Term, Term] | None = None
        self.e_order = [eq.var for eq in e.equations]
        self._compatible: dict[tuple[Variable, Variable], bool] = {}
        # with no symbol applications every pair is settled syntactically,
        # and the refined colours of matched parts must agree
        parts = [t for p in (e, f) for t in p.parts]
        self.colours = None
        if not any(isinstance(t, SymApp) for t in parts):
            self.colours = refine_colours(e, f, collapse=True)

    # state handling

    def snapshot(self):
        return dict(self.fwd), dict(self.bwd), list(self.deferred)

    def restore(self, snap):
        self.fwd, self.bwd, self.deferred = dict(snap[0]), dict(snap[1]), list(snap[2])
        self.queue = []

    def compatible(self, p: Variable, q: Variable) -> bool:
        key = (p, q)
        hit = self._compatible.get(key)
        if hit is None:
            hit = self._compatible[key] = self._compatible_now(p, q)
        return hit

    def _compatible_now(self, p: Variable, q: Variable) -> bool:
        if (p.arity, p.sort) != (q.arity, q.sort):
            return False
        if self.colours is not None and self.colours[0][p] != self.colours[1][q]:
            return False
        a, b = self.e_eqs[p].rhs, self.f_eqs[q].rhs
        forms = _pair_forms(a, b)
        if forms in _NEVER:
            return False
        if forms == (Form.F2, Form.F3):
            app, cond = (a, b) if isinstance(a, FnApp) else (b, a)
            return all(shape(part) == shape(app) for part in cond.args)
        if forms in _SYNTACTIC or (self.free and forms == (Form.F4, Form.F4)):
            return shape(a) == shape(b)
        return True

    def bind(self, p: Variable, q: Variable) -> bool:
        if self.fwd.get(p) == q:
            return True
        if p in self.fwd or q in self.bwd or not self.compatible(p, q):
            return False
        self.fwd[p] = q
        self.bwd[q] = p
        self.queue.append((p, q))
        return True

    # matching parts

    def equal(self, a: Term, b: Term, ind_map) -> bool:
        """Syntactic equality of ``a`` with ``b`` renamed, binding as needed."""
        if type(a) is not type(b):
            return False
        if isinstance(a, Const):
            return a.value == b.value
        if isinstance(a, IndVar):
            return ind_map.get(b.var, b.var) == a.var
        if len(a.args) != len(b.args):
            return False
        if isinstance(a, SymApp) and a.sym != b.sym:
            return False
        if isinstance(a, FnApp) and not self.bind(a.fn, b.fn):
            return False
        return all(self.equal(x, y, ind_map) for x, y in zip(a.args, b.args))

    def match_part(self, a: Term, b: Term, ind_map) -> bool | None:
        """True or False when settled now, None when the structure must decide."""
        forms = _pair_forms(a, b)
        if forms in _NEVER:
            return False
        if forms == (Form.F2, Form.F3):
            app, cond = (a, b) if isinstance(a, FnApp) else (b, a)
            if app is a:
                return all(self.equal(a, part, ind_map) for part in cond.args)
            return all(self.equal(part, b, ind_map) for part in cond.args)
        if forms in _SYNTACTIC or (self.free and forms == (Form.F4, Form.F4)):
            return self.equal(a, b, ind_map)
        return None

    def propagate(self) -> bool:
        while self.queue:
            p, q = self.queue.pop()
            ep, fq = self.e_eqs[p], self.f_eqs[q]
            verdict = self.match_part(ep.rhs, fq.rhs, dict(zip(fq.params, ep.params)))
            if verdict is False:
                return False
            if verdict is None:
                self.deferred.append((p, q))
        return self.check_deferred()

    def check_deferred(self) -> bool:
        waiting = []
        for p, q in self.deferred:
            fq = self.f_eqs[q]
            if not all(v in self.bwd for v in function_vars(fq.rhs)):
                waiting.append((p, q))
                continue
            ep = self.e_eqs[p]
            if not self.holds(ep.rhs, fq.rhs, dict(zip(fq.params, ep.params))):
                return False
        self.deferred = waiting
        if self.open_head is not None:
            a, b = self.open_head
            if all(v in self.bwd for v in function_vars(b)):
                return self.holds(a, b, {})
        return True

    def holds(self, a: Term, b: Term, ind_map) -> bool:
        renamed = substitute(b, fn_map=self.bwd, ind_map=ind_map)
        return self.decider.decide(IrreducibleIdentity(a, renamed))

    def viable(self, p: Variable, q: Variable) -> bool:
        """Whether binding p to q survives propagation; the state is left unchanged."""
        snap = self.snapshot()
        ok = self.bind(p, q) and self.propagate()
        self.restore(snap)
        return ok

    def candidates(self, p: Variable) -> list[Variable]:
        return [q for q in self.f_eqs if q not in self.bwd and self.compatible(p, q) and self.viable(p, q)]

    def search(self) -> bool:
        if not self.propagate():
            return False
        pending = [p for p in self.e_order if p not in self.fwd]
        if not pending:
            return not self.deferred
        options = {}
        for v in pending:
            options[v] = self.candidates(v)
            if len(options[v]) <= 1:
                break
        p = min(options, key=lambda v: len(options[v]))
        for q in options[p]:
            snap = self.snapshot()
            if self.bind(p, q) and self.search():
                return True
            self.restore(snap)
        return False


def intensionally_equivalent(
    target: FiniteStructure | object,
    dictionary: Dictionary | None,
    e: ExtendedProgram,
    f: ExtendedProgram,
    *,
    max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
    decider: IdentityDecider | None = None,
) -> EquivalenceWitness | None:
    """A part permutation witnessing equal intensions, or None.

    ``target`` is a finite structure or FREE.  With a dictionary only, pass
    ``target=None``.
    """
    if e.free_vars != f.free_vars or e.sort is not f.sort:
        return None
    ne, nf = canonical_form(e), canonical_form(f)
    if len(ne.equations) != len(nf.equations):
        return None
    if decider is None:
        decider = IdentityDecider(target, dictionary, max_assignments)
    s = _Search(ne, nf, decider)
    if s.colours is not None and not colours_agree(*s.colours):
        return None
    head = s.match_part(ne.head, nf.head, {})
    if head is False:
        return None
    if head is None:
        s.open_head = (ne.head, nf.head)
    if not s.search():
        return None
    e_index = {eq.var: i for i, eq in enumerate(ne.equations, 1)}
    f_index = {eq.var: i for i, eq in enumerate(nf.equations, 1)}
    perm = {0: 0}
    perm.update({e_index[p]: f_index[q] for p, q in s.fwd.items()})
    return EquivalenceWitness(perm, dict(s.bwd))


def equality_search_consistency(
    e: ExtendedProgram,
    f: ExtendedProgram,
    structures: Sequence[FiniteStructure] = (),
) -> bool:
    """Cross-check congruence, intensional equivalence and global equivalence."""
    ne, nf = canonical_form(e), canonical_form(f)
    free_equiv = intensionally_equivalent(FREE, None, e, f) is not None
    if congruent(ne, nf) is not None:
        if not free_equiv:
            return False
        if any(intensionally_equivalent(a, None, e, f) is None for a in structures):
            return False
    if free_equiv and is_proper(ne) and is_proper(nf) and not globally_equivalent(e, f):
        return False
    return True
