"""Congruence of extended programs and global intensional equivalence.

Two programs are congruent when a bijective renaming of function variables,
per-equation renaming of parameters and a permutation of the body turn one
into the other.  Matching the head forces the images of every function
variable it mentions, and matching an equation forces those its body
mentions; only equations unreachable from the head need backtracking.
"""

from __future__ import annotations

from dataclasses import dataclass

from .reduction import canonical_form
from .syntax import (
    Cond,
    Const,
    Equation,
    ExtendedProgram,
    FnApp,
    IndVar,
    NotIrreducible,
    Sort,
    SymApp,
    Term,
    Variable,
    is_immediate,
    is_irreducible_program,
)


@dataclass(frozen=True)
class CongruenceWitness:
    body_permutation: dict  # equation index in e -> equation index in f
    fn_renaming: dict  # function variable of e -> function variable of f
    ind_renamings: tuple  # per equation of e: parameter -> parameter

    def __str__(self):
        pairs = ", ".join(
            f"{a.name}->{b.name}" for a, b in sorted(self.fn_renaming.items(), key=lambda kv: kv[0].key())
        )
        perm = " ".join(f"{i}->{j}" for i, j in sorted(self.body_permutation.items()))
        return f"permutation: {perm or '(empty)'}\nrenaming: {pairs or '(empty)'}"


def shape(t: Term) -> tuple:
    """A renaming-invariant fingerprint of a term, memoized on the term."""
    cached = t.__dict__.get("_shape")
    if cached is None:
        cached = _shape(t)
        object.__setattr__(t, "_shape", cached)
    return cached


def _shape(t: Term) -> tuple:
    if isinstance(t, Const):
        return ("c", t.value)
    if isinstance(t, IndVar):
        return ("v",)
    if isinstance(t, FnApp):
        return ("f", t.fn.arity, t.fn.sort.value, tuple(shape(a) for a in t.args))
    if isinstance(t, SymApp):
        return ("s", t.sym.name, tuple(shape(a) for a in t.args))
    return ("if", tuple(shape(a) for a in t.args))


def _collapse(t: Term) -> Term:
    if isinstance(t, Cond) and t.test == t.then == t.orelse:
        return t.test
    return t


def _occurrences(t: Term, out: list) -> list:
    if isinstance(t, FnApp):
        out.append(t.fn)
    for a in t.args:
        _occurrences(a, out)
    return out


def refine_colours(e: ExtendedProgram, f: ExtendedProgram, collapse: bool = False):
    """Stable colours of the equations of both programs, in one shared palette.

    Each equation starts from its arity, sort and shape, and is refined by
    the colours of the equations it calls and of those calling it.  Matching
    parts by a renaming preserves colours, so only equal colours can be
    paired.  With ``collapse``, ``if a then a else a`` is read as ``a``.
    """
    norm = _collapse if collapse else (lambda t: t)
    progs = (e, f)
    nodes = [(k, eq.var) for k, p in enumerate(progs) for eq in p.equations]
    index = {n: i for i, n in enumerate(nodes)}
    rhs = [norm(eq.rhs) for p in progs for eq in p.equations]
    calls = [tuple(index[(k, q)] for q in _occurrences(t, [])) for (k, _), t in zip(nodes, rhs)]
    callers: list[list] = [[] for _ in nodes]
    for k, p in enumerate(progs):
        head = norm(p.head)
        tag = ("head", shape(head))
        for pos, q in enumerate(_occurrences(head, [])):
            callers[index[(k, q)]].append((tag, pos))
    for i, qs in enumerate(calls):
        for pos, j in enumerate(qs):
            callers[j].append((i, pos))
    palette: dict = {}
    colour = [
        palette.setdefault((v.arity, v.sort.value, shape(t)), len(palette))
        for (_, v), t in zip(nodes, rhs)
    ]
    n_classes = len(palette)
    while True:
        palette = {}
        new = []
        for i in range(len(nodes)):
            out = tuple(colour[j] for j in calls[i])
            back = sorted((c if isinstance(c, tuple) else ("eq", colour[c]), pos) for c, pos in callers[i])
            new.append(palette.setdefault((colour[i], out, tuple(back)), len(palette)))
        colour = new
        if len(palette) == n_classes:
            break
        n_classes = len(palette)
    split = len(e.equations)
    return (
        {v: colour[i] for i, (_, v) in enumerate(nodes[:split])},
        {v: colour[split + i] for i, (_, v) in enumerate(nodes[split:])},
    )


def colours_agree(ec: dict, fc: dict) -> bool:
    return sorted(ec.values()) == sorted(fc.values())


class _Matcher:
    def __init__(self, e: ExtendedProgram, f: ExtendedProgram):
        self.e_eqs = {eq.var: eq for eq in e.equations}
        self.f_eqs = {eq.var: eq for eq in f.equations}
        self.e_shape = {eq.var: shape(eq.rhs) for eq in e.equations}
        self.f_shape = {eq.var: shape(eq.rhs) for eq in f.equations}
        self.fwd: dict[Variable, Variable] = {}
        self.bwd: dict[Variable, Variable] = {}
        self.queue: list[tuple[Variable, Variable]] = []
        self.e_col, self.f_col = refine_colours(e, f)

    def snapshot(self):
        return dict(self.fwd), dict(self.bwd)

    def restore(self, snap):
        self.fwd, self.bwd = dict(snap[0]), dict(snap[1])
        self.queue = []

    def bind(self, p: Variable, q: Variable) -> bool:
        if self.fwd.get(p) == q:
            return True
        if p in self.fwd or q in self.bwd:
            return False
        if (p.arity, p.sort) != (q.arity, q.sort):
            return False
        if self.e_shape[p] != self.f_shape[q] or self.e_col[p] != self.f_col[q]:
            return False
        self.fwd[p] = q
        self.bwd[q] = p
        self.queue.append((p, q))
        return True

    def match(self, a: Term, b: Term, ind_map) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, Const):
            return a.value == b.value
        if isinstance(a, IndVar):
            return ind_map.get(a.var) == b.var
        if len(a.args) != len(b.args):
            return False
        if isinstance(a, SymApp) and a.sym != b.sym:
            return False
        if isinstance(a, FnApp) and not self.bind(a.fn, b.fn):
            return False
        return all(self.match(x, y, ind_map) for x, y in zip(a.args, b.args))

    def propagate(self) -> bool:
        while self.queue:
            p, q = self.queue.pop()
            ep, fq = self.e_eqs[p], self.f_eqs[q]
            if not self.match(ep.rhs, fq.rhs, dict(zip(ep.params, fq.params))):
                return False
        return True

    def viable(self, p: Variable, q: Variable) -> bool:
        snap = self.snapshot()
        ok = self.bind(p, q) and self.propagate()
        self.restore(snap)
        return ok

    def search(self, order: list[Variable]) -> bool:
        if not self.propagate():
            return False
        pending = [p for p in order if p not in self.fwd]
        if not pending:
            return True
        # forward checking, branching on the most constrained equation
        options = {}
        for v in pending:
            options[v] = [q for q in self.f_eqs if q not in self.bwd and self.viable(v, q)]
            if len(options[v]) <= 1:
                break
        p = min(options, key=lambda v: len(options[v]))
        for q in options[p]:
            snap = self.snapshot()
            if self.bind(p, q) and self.search(order):
                return True
            self.restore(snap)
        return False


def congruent(e: ExtendedProgram, f: ExtendedProgram) -> CongruenceWitness | None:
    if e.free_vars != f.free_vars or len(e.equations) != len(f.equations):
        return None
    if sorted(_signature(e)) != sorted(_signature(f)):
        return None
    m = _Matcher(e, f)
    if not colours_agree(m.e_col, m.f_col):
        return None
    identity = {x: x for x in e.free_vars}
    if not m.match(e.head, f.head, identity):
        return None
    if not m.search([eq.var for eq in e.equations]):
        return None
    e_index = {eq.var: i for i, eq in enumerate(e.equations)}
    f_index = {eq.var: i for i, eq in enumerate(f.equations)}
    perm = {e_index[p]: f_index[q] for p, q in m.fwd.items()}
    ind_renamings = tuple(
        dict(zip(eq.params, m.f_eqs[m.fwd[eq.var]].params)) for eq in e.equations
    )
    return CongruenceWitness(perm, dict(m.fwd), ind_renamings)


def _signature(p: ExtendedProgram) -> list:
    return [(eq.var.arity, eq.var.sort.value, repr(shape(eq.rhs))) for eq in p.equations]


def properize(p: ExtendedProgram) -> ExtendedProgram:
    """Replace each immediate boolean part ``E`` by ``if E then E else E``."""
    if not is_irreducible_program(p):
        raise NotIrreducible("properize expects an irreducible program")

    def fix(t: Term) -> Term:
        if is_immediate(t) and t.sort is Sort.BOOL:
            return Cond(t, t, t)
        return t

    eqs = tuple(Equation(eq.var, eq.params, fix(eq.rhs)) for eq in p.equations)
    return ExtendedProgram(fix(p.head), p.free_vars, eqs)


def globally_equivalent(e: ExtendedProgram, f: ExtendedProgram) -> bool:
    ne = properize(canonical_form(e))
    nf = properize(canonical_form(f))
    return congruent(ne, nf) is not None
