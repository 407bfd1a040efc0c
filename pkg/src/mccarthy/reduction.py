"""Arrow reduction to canonical form.

A step picks a non-immediate argument ``G_j`` of the top-level application
in one part and moves it into a new equation ``q(params) = G_j``, replacing it
by ``q(params)``.  Every step lowers :func:`size` by exactly one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Union

from .syntax import (
    Equation,
    ExtendedProgram,
    FnApp,
    IndVar,
    ProgramError,
    Term,
    Variable,
    fvar,
    is_immediate,
    rebuild,
)


class NotReducibleHere(ProgramError):
    pass


class NotFresh(ProgramError):
    pass


class SortArityMismatch(ProgramError):
    pass


class _Head:
    """Marker for reductions at the head of a program."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "HEAD"

    def __reduce__(self):
        return (_Head, ())


HEAD = _Head()
Site = Union[Variable, _Head]


@dataclass(frozen=True)
class ReductionLabel:
    target: Site
    arg_index: int  # 1-based
    fresh: Variable

    def __str__(self):
        site = "HEAD" if self.target is HEAD else self.target.name
        return f"({site},{self.arg_index},{self.fresh.name})"


@dataclass(frozen=True)
class ReductionTrace:
    start: ExtendedProgram
    steps: tuple  # of (ReductionLabel, ExtendedProgram)

    @property
    def final(self) -> ExtendedProgram:
        return self.steps[-1][1] if self.steps else self.start

    def __len__(self):
        return len(self.steps)


def term_size(t: Term) -> int:
    return sum(term_size(g) + 1 for g in t.args if not is_immediate(g))


def size(p: ExtendedProgram) -> int:
    return sum(term_size(t) for t in p.parts)


def _site_part(p: ExtendedProgram, target: Site):
    if target is HEAD:
        return p.head, p.free_vars
    for eq in p.equations:
        if eq.var == target:
            return eq.rhs, eq.params
    raise NotReducibleHere(f"{target} is not defined in the program")


def enumerate_redexes(p: ExtendedProgram) -> list[tuple[Site, int]]:
    out: list[tuple[Site, int]] = []
    for eq in p.equations:
        out.extend((eq.var, j) for j, g in enumerate(eq.rhs.args, 1) if not is_immediate(g))
    out.extend((HEAD, j) for j, g in enumerate(p.head.args, 1) if not is_immediate(g))
    return out


def step(p: ExtendedProgram, label: ReductionLabel) -> ExtendedProgram:
    term, params = _site_part(p, label.target)
    args = term.args
    if not 1 <= label.arg_index <= len(args):
        raise NotReducibleHere(f"{label.target} has no argument {label.arg_index}")
    g = args[label.arg_index - 1]
    if is_immediate(g):
        raise NotReducibleHere(f"argument {label.arg_index} of {label.target} is immediate")
    q = label.fresh
    if not q.is_function or q in p.function_vars():
        raise NotFresh(f"{q} occurs in the program")
    if q.arity != len(params) or q.sort is not g.sort:
        raise SortArityMismatch(
            f"{q} must have arity {len(params)} and sort {g.sort.value}"
        )
    call = FnApp(q, tuple(IndVar(x) for x in params))
    new_args = list(args)
    new_args[label.arg_index - 1] = call
    reduced = rebuild(term, new_args)
    new_eq = Equation(q, params, g)
    if label.target is HEAD:
        return ExtendedProgram(reduced, p.free_vars, p.equations + (new_eq,))
    eqs = tuple(
        Equation(eq.var, eq.params, reduced) if eq.var == label.target else eq
        for eq in p.equations
    )
    return ExtendedProgram(p.head, p.free_vars, eqs + (new_eq,))


@dataclass(frozen=True)
class Strategy:
    kind: str  # "first" or "random"
    seed: int = 0

    def __str__(self):
        return "FIRST" if self.kind == "first" else f"RANDOM({self.seed})"


FIRST = Strategy("first")


def RANDOM(seed: int) -> Strategy:
    return Strategy("random", seed)


def fresh_for(p: ExtendedProgram, target: Site, j: int, index: int) -> Variable:
    term, params = _site_part(p, target)
    return fvar(index, len(params), term.args[j - 1].sort)


def normalize(p: ExtendedProgram, strategy: Strategy = FIRST) -> ReductionTrace:
    rng = random.Random(strategy.seed) if strategy.kind == "random" else None
    counter = p.max_fn_index()
    steps = []
    cur = p
    while True:
        redexes = enumerate_redexes(cur)
        if not redexes:
            return ReductionTrace(p, tuple(steps))
        if rng is None:
            target, j = redexes[0]
            counter += 1
        else:
            target, j = rng.choice(redexes)
            counter += rng.randint(1, 3)
        label = ReductionLabel(target, j, fresh_for(cur, target, j, counter))
        cur = step(cur, label)
        steps.append((label, cur))


def canonical_form(p: ExtendedProgram) -> ExtendedProgram:
    return normalize(p, FIRST).final


def all_maximal_sequences(p: ExtendedProgram, limit: int = 100_000):
    """Every maximal reduction sequence, as (labels, final) pairs.

    Fresh variables are drawn deterministically, so sequences differ only in
    the order in which redexes are chosen.
    """
    out = []
    base = p.max_fn_index()

    def go(cur, labels):
        if len(out) >= limit:
            raise RuntimeError("too many reduction sequences")
        redexes = enumerate_redexes(cur)
        if not redexes:
            out.append((tuple(labels), cur))
            return
        for target, j in redexes:
            lab = ReductionLabel(target, j, fresh_for(cur, target, j, base + len(labels) + 1))
            go(step(cur, lab), labels + [lab])

    go(p, [])
    return out
