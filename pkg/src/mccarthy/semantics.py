"""Finite partial structures and the least-fixed-point semantics of programs.

Partial values are plain Python values: ``None`` for divergence, ``int`` for
carrier elements and ``bool`` for truth values.  Comparisons only ever happen
between values of the same sort, so ``True == 1`` never bites.
"""

from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass, field
from collections.abc import Iterator as _Iter
from typing import Mapping, Sequence

from .syntax import (
    BUILTINS,
    Cond,
    Const,
    Equation,
    ExtendedProgram,
    FnApp,
    FuncSymbol,
    IndVar,
    ParseError,
    Signature,
    Sort,
    SymApp,
    Term,
    Variable,
    format_declaration,
    fvar,
    ind,
    individual_vars,
    function_vars,
    parse_declaration,
    subterms,
)

DIVERGES = None
PartialValue = int | bool | None

DEFAULT_MAX_ASSIGNMENTS = 10**7


class UnboundVariable(Exception):
    pass


class UnknownSymbolError(Exception):
    pass


class CarrierTooLargeForEnumeration(Exception):
    pass


class InvalidStructure(ValueError):
    pass


def kleene_equal(x: PartialValue, y: PartialValue) -> bool:
    """Both diverge, or both converge to the same value of the same sort."""
    return x == y and type(x) is type(y)


def format_value(v: PartialValue) -> str:
    if v is None:
        return "divergent"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# -- structures ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteStructure:
    """Carrier ``0..size-1`` with a partial table per signature symbol."""

    name: str
    size: int
    signature: Signature
    tables: Mapping[str, Mapping[tuple, PartialValue]]
    total: bool = False

    def __post_init__(self):
        if self.size < 1:
            raise InvalidStructure("carrier must be non-empty")
        clean = {}
        for name, table in self.tables.items():
            if name not in self.signature:
                raise InvalidStructure(f"table for undeclared symbol {name}")
            sym = self.signature[name]
            if sym in BUILTINS:
                raise InvalidStructure(f"builtin {name} has a fixed interpretation")
            t = {}
            for args, val in table.items():
                args = tuple(args)
                if len(args) != sym.arity or any(
                    not isinstance(a, int) or isinstance(a, bool) or not 0 <= a < self.size
                    for a in args
                ):
                    raise InvalidStructure(f"bad argument tuple {args} for {name}")
                if val is None:
                    continue
                if not self._fits(val, sym.sort):
                    raise InvalidStructure(f"bad value {val!r} for {name}{args}")
                t[args] = val
            clean[name] = t
        for sym in self.signature.user_symbols():
            clean.setdefault(sym.name, {})
            if self.total and len(clean[sym.name]) != self.size**sym.arity:
                raise InvalidStructure(f"{sym.name} is not total")
        object.__setattr__(self, "tables", clean)

    def _fits(self, val, sort: Sort) -> bool:
        if sort is Sort.BOOL:
            return isinstance(val, bool)
        return isinstance(val, int) and not isinstance(val, bool) and 0 <= val < self.size

    def apply(self, sym: FuncSymbol, args: tuple) -> PartialValue:
        name = sym.name
        if name == "psi_true":
            return True
        if name == "psi_false":
            return False
        if name == "id":
            return args[0]
        table = self.tables.get(sym.name)
        if table is None:
            raise UnknownSymbolError(f"{sym.name} is not interpreted in {self.name}")
        return table.get(args)

    def values(self, sort: Sort) -> tuple:
        return (False, True) if sort is Sort.BOOL else tuple(range(self.size))

    def __eq__(self, other):
        return (
            isinstance(other, FiniteStructure)
            and (self.name, self.size, self.total) == (other.name, other.size, other.total)
            and self.signature == other.signature
            and self.tables == other.tables
        )

    def __hash__(self):
        return hash((self.name, self.size, self.total))


def _value_text(v) -> str:
    return format_value(v)


def format_structure(a: FiniteStructure) -> str:
    lines = [f"structure {a.name}", f"carrier {a.size}", "total" if a.total else "partial"]
    for sym in a.signature.user_symbols():
        lines.append(format_declaration(sym))
        table = a.tables[sym.name]
        for args in sorted(table):
            lhs = " ".join(map(str, args))
            lines.append(f"{lhs} -> {_value_text(table[args])}".lstrip())
    lines.append("end")
    return "\n".join(lines) + "\n"


_ROW = re.compile(r"((?:\d+\s+)*\d+)?\s*->\s*(\S+)\Z")


def parse_structure(text: str) -> FiniteStructure:
    """Parse the line-oriented structure format."""
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(text.split("\n"))]
    rows = [(i, ln) for i, ln in rows if ln and not ln.startswith("#")]
    it = iter(rows)

    def expect(prefix):
        try:
            i, ln = next(it)
        except StopIteration:
            raise ParseError(f"expected {prefix!r}, found end of file") from None
        if not ln.startswith(prefix):
            raise ParseError(f"expected {prefix!r}", i, 1)
        return i, ln

    i, ln = expect("structure")
    parts = ln.split()
    if len(parts) != 2:
        raise ParseError("expected 'structure <name>'", i, 1)
    name = parts[1]
    i, ln = expect("carrier")
    try:
        size = int(ln.split()[1])
    except (IndexError, ValueError):
        raise ParseError("expected 'carrier <n>'", i, 1) from None
    try:
        i, ln = next(it)
    except StopIteration:
        raise ParseError("expected 'total' or 'partial'") from None
    if ln not in ("total", "partial"):
        raise ParseError("expected 'total' or 'partial'", i, 1)
    total = ln == "total"
    symbols: list[FuncSymbol] = []
    tables: dict[str, dict] = {}
    current = None
    ended = False
    for i, ln in it:
        if ended:
            raise ParseError("content after 'end'", i, 1)
        if ln == "end":
            ended = True
            continue
        if ln.startswith("func"):
            current = parse_declaration(ln, i)
            if current.name in tables or current.name in {b.name for b in BUILTINS}:
                raise ParseError(f"symbol {current.name} declared twice or builtin", i, 1)
            symbols.append(current)
            tables[current.name] = {}
            continue
        m = _ROW.match(ln)
        if not m or current is None:
            raise ParseError(f"bad table row {ln!r}", i, 1)
        args = tuple(int(x) for x in (m.group(1) or "").split())
        if len(args) != current.arity:
            raise ParseError(f"{current.name} expects {current.arity} arguments", i, 1)
        if args in tables[current.name]:
            raise ParseError(f"duplicate row for {current.name}{args}", i, 1)
        raw = m.group(2)
        if current.sort is Sort.BOOL:
            if raw not in ("true", "false"):
                raise ParseError(f"expected true/false, got {raw!r}", i, 1)
            val = raw == "true"
        else:
            if not raw.isdigit():
                raise ParseError(f"expected a carrier element, got {raw!r}", i, 1)
            val = int(raw)
        tables[current.name][args] = val
    if not ended:
        raise ParseError("missing 'end'")
    try:
        return FiniteStructure(name, size, Signature(symbols), tables, total)
    except InvalidStructure as exc:
        raise ParseError(str(exc)) from None


# -- assignments and terms ----------------------------------------------------


@dataclass
class Assignment:
    ind_vals: dict[Variable, int] = field(default_factory=dict)
    fn_vals: dict[Variable, dict[tuple, PartialValue]] = field(default_factory=dict)

    def __str__(self):
        parts = [f"{v}={a}" for v, a in sorted(self.ind_vals.items(), key=lambda kv: kv[0].key())]
        for v, table in sorted(self.fn_vals.items(), key=lambda kv: kv[0].key()):
            rows = ", ".join(
                f"{v}({','.join(map(str, k))})={format_value(x)}" for k, x in sorted(table.items())
            )
            parts.append(rows or f"{v}=divergent")
        return "; ".join(parts)


def denote_term(a: FiniteStructure, sigma: Assignment, t: Term) -> PartialValue:
    return _eval(a, t, sigma.ind_vals, lambda v, pt: _table_lookup(sigma.fn_vals, v, pt))


def _table_lookup(fn_vals, v, point):
    table = fn_vals.get(v)
    if table is None:
        raise UnboundVariable(f"function variable {v} is unassigned")
    return table.get(point)


def _eval(a: FiniteStructure, t: Term, env, call) -> PartialValue:
    if isinstance(t, IndVar):
        try:
            return env[t.var]
        except KeyError:
            raise UnboundVariable(f"individual variable {t.var} is unassigned") from None
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Cond):
        b = _eval(a, t.test, env, call)
        if b is None:
            return None
        return _eval(a, t.then if b else t.orelse, env, call)
    args = []
    for x in t.args:
        v = _eval(a, x, env, call)
        if v is None:
            return None
        args.append(v)
    if isinstance(t, SymApp):
        return a.apply(t.sym, tuple(args))
    return call(t.fn, tuple(args))


# -- programs -----------------------------------------------------------------


class NonMonotoneIteration(AssertionError):
    pass


def least_fixed_point(a: FiniteStructure, p: ExtendedProgram) -> dict[Variable, dict]:
    """Kleene iteration from everywhere-divergent tables to the least solution."""
    eqs = p.equations
    tables: dict[Variable, dict] = {eq.var: {} for eq in eqs}
    points = {eq.var: list(itertools.product(range(a.size), repeat=len(eq.params))) for eq in eqs}
    capacity = sum(len(v) for v in points.values())
    for _ in range(capacity + 1):
        nxt = {}
        for eq in eqs:
            new = {}
            for pt in points[eq.var]:
                env = dict(zip(eq.params, pt))
                val = _eval(a, eq.rhs, env, lambda v, q: tables[v].get(q))
                if val is not None:
                    new[pt] = val
            old = tables[eq.var]
            for k, v in old.items():
                if not kleene_equal(new.get(k), v):
                    raise NonMonotoneIteration(f"stage lost or changed {eq.var}{k}")
            nxt[eq.var] = new
        if nxt == tables:
            return tables
        tables = nxt
    raise NonMonotoneIteration("iteration did not stabilize within table capacity")


def denote_program(a: FiniteStructure, p: ExtendedProgram, args: Sequence[int]) -> PartialValue:
    args = tuple(args)
    if len(args) != len(p.free_vars):
        raise ValueError(f"expected {len(p.free_vars)} inputs, got {len(args)}")
    tables = least_fixed_point(a, p)
    env = dict(zip(p.free_vars, args))
    return _eval(a, p.head, env, lambda v, q: tables[v].get(q))


def denote_all(a: FiniteStructure, p: ExtendedProgram) -> dict[tuple, PartialValue]:
    """The denotation on every input tuple, sharing one fixed-point computation."""
    tables = least_fixed_point(a, p)
    out = {}
    for args in itertools.product(range(a.size), repeat=len(p.free_vars)):
        env = dict(zip(p.free_vars, args))
        out[args] = _eval(a, p.head, env, lambda v, q: tables[v].get(q))
    return out


# -- satisfaction by enumeration ----------------------------------------------


class _Undecided(Exception):
    def __init__(self, var, point):
        self.var = var
        self.point = point


_UNSET = object()


def assignment_space_bound(a: FiniteStructure, terms: Sequence[Term]) -> int:
    """An upper bound on the number of assignments the enumeration visits.

    Only the points actually queried matter, so each function-variable
    occurrence contributes at most one choice among its values and divergence.
    """
    inds = set()
    bound = 1
    for t in terms:
        for s in subterms(t):
            if isinstance(s, IndVar):
                inds.add(s.var)
            elif isinstance(s, FnApp):
                bound *= len(a.values(s.fn.sort)) + 1
    return bound * a.size ** len(inds)


def _leaves(a: FiniteStructure, terms: Sequence[Term], env) -> _Iter[tuple[dict, list]]:
    """Enumerate function-variable choices lazily at the points that get queried."""
    stack: list[dict] = [{}]
    while stack:
        choice = stack.pop()

        def call(v, pt, choice=choice):
            val = choice.get((v, pt), _UNSET)
            if val is _UNSET:
                raise _Undecided(v, pt)
            return val

        try:
            vals = [_eval(a, t, env, call) for t in terms]
        except _Undecided as u:
            for val in reversed((None, *a.values(u.var.sort))):
                stack.append({**choice, (u.var, u.point): val})
            continue
        yield choice, vals


def placed_in(lhs: Term, rhs: Term) -> list[Variable]:
    """Individual variables that are a side, or a direct argument of a symbol side."""
    out: dict[Variable, None] = {}
    for side in (lhs, rhs):
        if isinstance(side, IndVar):
            out.setdefault(side.var)
        elif isinstance(side, SymApp):
            for x in side.args:
                if isinstance(x, IndVar):
                    out.setdefault(x.var)
    return list(out)


def find_countermodel(
    a: FiniteStructure,
    lhs: Term,
    rhs: Term,
    *,
    injective: Sequence[Variable] | None = None,
    max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
) -> Assignment | None:
    """An assignment on which the two sides are not Kleene-equal, if any.

    With ``injective`` given, only assignments that are injective on those
    variables are considered.
    """
    if lhs.sort is not rhs.sort:
        raise ValueError("sides of an identity must have the same sort")
    bound = assignment_space_bound(a, (lhs, rhs))
    if bound > max_assignments:
        raise CarrierTooLargeForEnumeration(
            f"assignment space {bound} exceeds bound {max_assignments}"
        )
    inds = sorted(set(individual_vars(lhs)) | set(individual_vars(rhs)), key=Variable.key)
    inj = set(injective or ())
    fvars = set(function_vars(lhs)) | set(function_vars(rhs))
    for vals in itertools.product(range(a.size), repeat=len(inds)):
        env = dict(zip(inds, vals))
        if inj:
            used = [env[v] for v in inds if v in inj]
            if len(set(used)) != len(used):
                continue
        for choice, (x, y) in _leaves(a, (lhs, rhs), env):
            if not kleene_equal(x, y):
                tables: dict[Variable, dict] = {v: {} for v in fvars}
                for (v, pt), val in choice.items():
                    if val is not None:
                        tables[v][pt] = val
                return Assignment(env, tables)
    return None


def satisfies(a: FiniteStructure, lhs: Term, rhs: Term, *,
              max_assignments: int = DEFAULT_MAX_ASSIGNMENTS) -> bool:
    return find_countermodel(a, lhs, rhs, max_assignments=max_assignments) is None


def satisfies_injective(
    a: FiniteStructure,
    lhs: Term,
    rhs: Term,
    *,
    placed: Sequence[Variable] | None = None,
    max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
) -> bool:
    placed = placed_in(lhs, rhs) if placed is None else list(placed)
    if a.size < len(placed):
        warnings.warn(
            f"carrier of {a.name} has {a.size} elements but {len(placed)} placed "
            "variables; injective satisfaction holds vacuously",
            stacklevel=2,
        )
        return True
    return (
        find_countermodel(a, lhs, rhs, injective=placed, max_assignments=max_assignments)
        is None
    )


# -- iterators ----------------------------------------------------------------

INPUT = FuncSymbol("input", 1, Sort.IND)
SIGMA = FuncSymbol("sigma", 1, Sort.IND)
OUTPUT = FuncSymbol("output", 1, Sort.IND)
TERMINAL = FuncSymbol("T", 1, Sort.BOOL)
ITERATOR_SIGNATURE = Signature([INPUT, SIGMA, OUTPUT, TERMINAL])


@dataclass(frozen=True)
class Iterator:
    """A finite iterator: inputs ``0..n_inputs-1``, states, outputs likewise."""

    n_inputs: int
    n_states: int
    n_outputs: int
    input_map: tuple  # X -> S, total
    next_map: Mapping[int, int]  # S -> S, partial
    terminal: frozenset
    output_map: Mapping[int, int]  # T -> W, partial

    def __post_init__(self):
        object.__setattr__(self, "input_map", tuple(self.input_map))
        object.__setattr__(self, "terminal", frozenset(self.terminal))
        object.__setattr__(self, "next_map", dict(self.next_map))
        object.__setattr__(self, "output_map", dict(self.output_map))
        if min(self.n_inputs, self.n_states, self.n_outputs) < 1:
            raise ValueError("iterator sets must be non-empty")
        if len(self.input_map) != self.n_inputs:
            raise ValueError("input map must be total on X")
        states = range(self.n_states)
        if any(s not in states for s in self.input_map):
            raise ValueError("input map must land in S")
        if any(k not in states or v not in states for k, v in self.next_map.items()):
            raise ValueError("next must map S to S")
        if not self.terminal <= set(states):
            raise ValueError("terminal states must lie in S")
        if any(k not in self.terminal or not 0 <= v < self.n_outputs
               for k, v in self.output_map.items()):
            raise ValueError("output must map T to W")

    # positions of the three summands in the carrier X + W + S
    def x_elem(self, x: int) -> int:
        return x

    def w_elem(self, w: int) -> int:
        return self.n_inputs + w

    def s_elem(self, s: int) -> int:
        return self.n_inputs + self.n_outputs + s



def run_iterator(it: Iterator, x: int) -> int | None:
    """Run the machine from input ``x``; returns the output in W or None."""
    s = it.input_map[x]
    seen = set()
    while s not in it.terminal:
        if s in seen or s not in it.next_map:
            return None
        seen.add(s)
        s = it.next_map[s]
    return it.output_map.get(s)


def iterator_structure(it: Iterator) -> FiniteStructure:
    size = it.n_inputs + it.n_outputs + it.n_states
    tables = {
        "input": {(it.x_elem(x),): it.s_elem(s) for x, s in enumerate(it.input_map)},
        "sigma": {(it.s_elem(s),): it.s_elem(t) for s, t in it.next_map.items()},
        "output": {(it.s_elem(s),): it.w_elem(w) for s, w in it.output_map.items()},
        "T": {(it.s_elem(s),): s in it.terminal for s in range(it.n_states)},
    }
    return FiniteStructure("iterator", size, ITERATOR_SIGNATURE, tables, total=False)


def iterator_program(it: Iterator | None = None) -> ExtendedProgram:
    """``q(input(x)) (x) where { q(s) = if T(s) then output(s) else q(sigma(s)) }``."""
    x, s = ind(0), ind(1)
    q = fvar(0, 1, Sort.IND)
    body = Cond(
        SymApp(TERMINAL, (IndVar(s),)),
        SymApp(OUTPUT, (IndVar(s),)),
        FnApp(q, (SymApp(SIGMA, (IndVar(s),)),)),
    )
    head = FnApp(q, (SymApp(INPUT, (IndVar(x),)),))
    return ExtendedProgram(head, (x,), (Equation(q, (s,), body),))
