"""Sorted terms, extended programs, concrete syntax and syntactic classification.

Terms are immutable and compare structurally, so ``==`` is syntactic identity.
Variables are identified by ``(kind, index, sort, arity)`` and printed as
``v<i>`` (individual) and ``p<i>`` (function).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence


class Sort(enum.Enum):
    IND = "ind"
    BOOL = "bool"


class ProgramError(Exception):
    """Base class for malformed terms and programs."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)
        self.cause = message


class ParseError(ProgramError):
    pass


class ArityMismatch(ProgramError):
    pass


class SortMismatch(ProgramError):
    pass


class UnknownSymbol(ProgramError):
    pass


class FreeFunctionVariable(ProgramError):
    pass


class DuplicateDefinition(ProgramError):
    pass


class InvalidProgram(ProgramError):
    pass


class NotIrreducible(ProgramError):
    pass


# -- signatures ---------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_KEYWORDS = frozenset({"true", "false", "if", "then", "else", "where"})
_CANON_IND = re.compile(r"v(\d+)\Z")
_CANON_FN = re.compile(r"p(\d+)\Z")


@dataclass(frozen=True)
class FuncSymbol:
    name: str
    arity: int
    sort: Sort = Sort.IND

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError(f"negative arity for {self.name}")
        if not _IDENT.match(self.name) or self.name in _KEYWORDS:
            raise ValueError(f"illegal symbol name {self.name!r}")
        if _CANON_IND.match(self.name) or _CANON_FN.match(self.name):
            raise ValueError(f"symbol name {self.name!r} is reserved for variables")

    def __str__(self):
        return self.name


PSI_TRUE = FuncSymbol("psi_true", 0, Sort.BOOL)
PSI_FALSE = FuncSymbol("psi_false", 0, Sort.BOOL)
ID = FuncSymbol("id", 1, Sort.IND)
BUILTINS = (PSI_TRUE, PSI_FALSE, ID)


class Signature:
    """A finite set of symbols; the three builtins are always present."""

    def __init__(self, symbols: Iterable[FuncSymbol] = ()):
        table: dict[str, FuncSymbol] = {b.name: b for b in BUILTINS}
        for sym in symbols:
            old = table.get(sym.name)
            if old is not None and old != sym:
                raise DuplicateDefinition(f"symbol {sym.name} declared twice")
            table[sym.name] = sym
        self._table = table

    def __contains__(self, name) -> bool:
        return name in self._table

    def __getitem__(self, name: str) -> FuncSymbol:
        return self._table[name]

    def __iter__(self) -> Iterator[FuncSymbol]:
        return iter(sorted(self._table.values(), key=lambda s: s.name))

    def __len__(self):
        return len(self._table)

    def __eq__(self, other):
        return isinstance(other, Signature) and self._table == other._table

    def __hash__(self):
        return hash(frozenset(self._table.values()))

    def __repr__(self):
        return f"Signature({[s.name for s in self.user_symbols()]})"

    def user_symbols(self) -> list[FuncSymbol]:
        return [s for s in self if s not in BUILTINS]

    def max_arity(self) -> int:
        return max(s.arity for s in self)

    def extend(self, symbols: Iterable[FuncSymbol]) -> "Signature":
        return Signature([*self._table.values(), *symbols])


_DECL = re.compile(r"func\s+([A-Za-z_][A-Za-z0-9_]*)\s+arity\s+(\d+)\s+sort\s+(ind|bool)\s*\Z")


def parse_declaration(line: str, lineno: int | None = None) -> FuncSymbol:
    m = _DECL.match(line.strip())
    if not m:
        raise ParseError(f"bad declaration {line.strip()!r}", lineno, 1)
    try:
        return FuncSymbol(m.group(1), int(m.group(2)), Sort(m.group(3)))
    except ValueError as exc:
        raise ParseError(str(exc), lineno, 1) from None


def format_declaration(sym: FuncSymbol) -> str:
    return f"func {sym.name} arity {sym.arity} sort {sym.sort.value}"


def split_declarations(text: str) -> tuple[list[FuncSymbol], str]:
    """Strip leading ``func`` declaration and ``#`` comment lines.

    The stripped lines are blanked rather than removed so that positions
    reported by the parser still refer to the original text.
    """
    lines = text.split("\n")
    symbols = []
    for i, line in enumerate(lines):
        s = line.strip()
        if s.startswith("#"):
            lines[i] = ""
        elif s.startswith("func ") or s == "func":
            symbols.append(parse_declaration(s, i + 1))
            lines[i] = ""
        elif s:
            break
    return symbols, "\n".join(lines)


def parse_signature(text: str) -> Signature:
    symbols, rest = split_declarations(text)
    if rest.strip():
        raise ParseError("signature files may only contain declarations")
    return Signature(symbols)


# -- variables and terms ------------------------------------------------------


@dataclass(frozen=True)
class Variable:
    kind: str  # "ind" or "fn"
    index: int
    sort: Sort = Sort.IND
    arity: int = 0

    def __post_init__(self):
        if self.kind not in ("ind", "fn"):
            raise ValueError(f"bad variable kind {self.kind!r}")
        if self.kind == "ind" and (self.sort is not Sort.IND or self.arity):
            raise ValueError("individual variables have sort ind and no arity")
        if self.index < 0 or self.arity < 0:
            raise ValueError("negative index or arity")
        object.__setattr__(self, "_hash", hash((self.kind, self.index, self.sort, self.arity)))

    def __hash__(self):
        return self._hash

    @property
    def is_function(self) -> bool:
        return self.kind == "fn"

    @property
    def name(self) -> str:
        return f"{'p' if self.is_function else 'v'}{self.index}"

    def key(self):
        return (self.kind, self.index, self.sort.value, self.arity)

    def __str__(self):
        return self.name


def ind(index: int) -> Variable:
    return Variable("ind", index)


def fvar(index: int, arity: int = 0, sort: Sort = Sort.IND) -> Variable:
    return Variable("fn", index, sort, arity)


class Term:
    """Base class of the five term constructors."""

    __slots__ = ()

    @property
    def sort(self) -> Sort:
        raise NotImplementedError

    @property
    def args(self) -> tuple["Term", ...]:
        return ()

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True, repr=False)
class Const(Term):
    value: bool

    @property
    def sort(self):
        return Sort.BOOL

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True, repr=False)
class IndVar(Term):
    var: Variable

    def __post_init__(self):
        if self.var.is_function:
            raise SortMismatch(f"{self.var} is a function variable")

    @property
    def sort(self):
        return Sort.IND

    def __repr__(self):
        return self.var.name


def _check_args(head, arity: int, args) -> None:
    if len(args) != arity:
        raise ArityMismatch(f"{head} expects {arity} arguments, got {len(args)}")
    for a in args:
        if not isinstance(a, Term):
            raise TypeError(f"argument {a!r} is not a term")
        if a.sort is not Sort.IND:
            raise SortMismatch(f"argument {a} of {head} has sort bool")


@dataclass(frozen=True, repr=False)
class FnApp(Term):
    fn: Variable
    args: tuple = ()

    def __post_init__(self):
        if not self.fn.is_function:
            raise SortMismatch(f"{self.fn} is not a function variable")
        object.__setattr__(self, "args", tuple(self.args))
        _check_args(self.fn, self.fn.arity, self.args)

    @property
    def sort(self):
        return self.fn.sort

    def __repr__(self):
        return format_term(self)


@dataclass(frozen=True, repr=False)
class SymApp(Term):
    sym: FuncSymbol
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        _check_args(self.sym, self.sym.arity, self.args)

    @property
    def sort(self):
        return self.sym.sort

    def __repr__(self):
        return format_term(self)


@dataclass(frozen=True, repr=False)
class Cond(Term):
    test: Term
    then: Term
    orelse: Term

    def __post_init__(self):
        if self.test.sort is not Sort.BOOL:
            raise SortMismatch(f"test {self.test} is not boolean")
        if self.then.sort is not self.orelse.sort:
            raise SortMismatch(f"branches {self.then} and {self.orelse} differ in sort")

    @property
    def sort(self):
        return self.then.sort

    @property
    def args(self):
        return (self.test, self.then, self.orelse)

    def __repr__(self):
        return format_term(self)


def rebuild(t: Term, args: Sequence[Term]) -> Term:
    """The term with the same head as ``t`` and the given arguments."""
    if isinstance(t, FnApp):
        return FnApp(t.fn, tuple(args))
    if isinstance(t, SymApp):
        return SymApp(t.sym, tuple(args))
    if isinstance(t, Cond):
        return Cond(*args)
    if args:
        raise ValueError(f"{t} takes no arguments")
    return t


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for a in t.args:
        yield from subterms(a)


def individual_vars(t: Term) -> list[Variable]:
    """Individual variables in order of first occurrence."""
    seen: dict[Variable, None] = {}
    for s in subterms(t):
        if isinstance(s, IndVar):
            seen.setdefault(s.var)
    return list(seen)


def function_vars(t: Term) -> list[Variable]:
    seen: dict[Variable, None] = {}
    for s in subterms(t):
        if isinstance(s, FnApp):
            seen.setdefault(s.fn)
    return list(seen)


def symbols_of(t: Term) -> set[FuncSymbol]:
    return {s.sym for s in subterms(t) if isinstance(s, SymApp)}


def depth(t: Term) -> int:
    return 1 + max((depth(a) for a in t.args), default=0)


def substitute(
    t: Term,
    fn_map: Mapping[Variable, Variable] | None = None,
    ind_map: Mapping[Variable, Variable] | None = None,
) -> Term:
    """Simultaneous renaming of function and individual variables."""
    fn_map = fn_map or {}
    ind_map = ind_map or {}
    for a, b in fn_map.items():
        if a.sort is not b.sort:
            raise SortMismatch(f"cannot rename {a} to {b}: sorts differ")
        if a.arity != b.arity:
            raise ArityMismatch(f"cannot rename {a} to {b}: arities differ")
    for a, b in ind_map.items():
        if a.is_function or b.is_function:
            raise SortMismatch("individual map must relate individual variables")
    return _subst(t, fn_map, ind_map)


def _subst(t, fn_map, ind_map):
    if isinstance(t, IndVar):
        v = ind_map.get(t.var)
        return t if v is None else IndVar(v)
    if isinstance(t, Const):
        return t
    args = tuple(_subst(a, fn_map, ind_map) for a in t.args)
    if isinstance(t, FnApp):
        return FnApp(fn_map.get(t.fn, t.fn), args)
    return rebuild(t, args)


def replace_terms(t: Term, mapping: Mapping[Term, Term]) -> Term:
    """Replace whole subterms (outermost first)."""
    if t in mapping:
        return mapping[t]
    if not t.args:
        return t
    return rebuild(t, [replace_terms(a, mapping) for a in t.args])


# -- classification -----------------------------------------------------------


class TermClass(enum.Enum):
    IMMEDIATE = "immediate"
    IRREDUCIBLE_ONLY = "irreducible"
    REDUCIBLE = "reducible"


def is_immediate(t: Term) -> bool:
    if isinstance(t, IndVar):
        return True
    return isinstance(t, FnApp) and all(isinstance(a, IndVar) for a in t.args)


def classify(t: Term) -> TermClass:
    if is_immediate(t):
        return TermClass.IMMEDIATE
    if isinstance(t, Const) or all(is_immediate(a) for a in t.args):
        return TermClass.IRREDUCIBLE_ONLY
    return TermClass.REDUCIBLE


def is_irreducible(t: Term) -> bool:
    return classify(t) is not TermClass.REDUCIBLE


# -- extended programs --------------------------------------------------------


@dataclass(frozen=True)
class Equation:
    var: Variable
    params: tuple
    rhs: Term

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))

    def lhs(self) -> FnApp:
        return FnApp(self.var, tuple(IndVar(x) for x in self.params))

    def __str__(self):
        return f"{format_term(self.lhs())} = {format_term(self.rhs)}"


@dataclass(frozen=True)
class ExtendedProgram:
    head: Term
    free_vars: tuple = ()
    equations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "free_vars", tuple(self.free_vars))
        object.__setattr__(self, "equations", tuple(self.equations))
        validate_program(self)

    @property
    def parts(self) -> tuple[Term, ...]:
        return (self.head,) + tuple(eq.rhs for eq in self.equations)

    @property
    def sort(self) -> Sort:
        return self.head.sort

    def defined(self) -> dict[Variable, Equation]:
        return {eq.var: eq for eq in self.equations}

    def function_vars(self) -> set[Variable]:
        out = {eq.var for eq in self.equations}
        for t in self.parts:
            out.update(function_vars(t))
        return out

    def max_fn_index(self) -> int:
        return max((v.index for v in self.function_vars()), default=-1)

    def __str__(self):
        return format_program(self)


def validate_program(p: ExtendedProgram) -> None:
    if not isinstance(p.head, Term):
        raise InvalidProgram("head is not a term")
    fv = p.free_vars
    if any(v.is_function for v in fv) or len(set(fv)) != len(fv):
        raise InvalidProgram("free variables must be distinct individual variables")
    stray = set(individual_vars(p.head)) - set(fv)
    if stray:
        raise InvalidProgram(f"head variables {sorted(map(str, stray))} not declared free")
    defined: set[Variable] = set()
    for eq in p.equations:
        if not eq.var.is_function:
            raise InvalidProgram(f"{eq.var} is not a function variable")
        if eq.var in defined:
            raise DuplicateDefinition(f"{eq.var} defined twice")
        defined.add(eq.var)
        if any(x.is_function for x in eq.params) or len(set(eq.params)) != len(eq.params):
            raise InvalidProgram(f"parameters of {eq.var} must be distinct individual variables")
        if len(eq.params) != eq.var.arity:
            raise ArityMismatch(f"{eq.var} has arity {eq.var.arity} but {len(eq.params)} parameters")
        if eq.rhs.sort is not eq.var.sort:
            raise SortMismatch(f"{eq.var} has sort {eq.var.sort.value} but its body does not")
        stray = set(individual_vars(eq.rhs)) - set(eq.params)
        if stray:
            raise InvalidProgram(f"body of {eq.var} uses unbound {sorted(map(str, stray))}")
    for t in p.parts:
        for v in function_vars(t):
            if v not in defined:
                raise FreeFunctionVariable(f"function variable {v} is not defined")


@dataclass(frozen=True)
class HeadPart:
    term: Term
    free_vars: tuple


def set_representation(p: ExtendedProgram) -> frozenset:
    return frozenset([HeadPart(p.head, p.free_vars), *p.equations])


def is_irreducible_program(p: ExtendedProgram) -> bool:
    return all(is_irreducible(t) for t in p.parts)


def is_proper(p: ExtendedProgram) -> bool:
    if not is_irreducible_program(p):
        raise NotIrreducible("properness is defined for irreducible programs")
    return not any(is_immediate(t) and t.sort is Sort.BOOL for t in p.parts)


def is_propositional(p: ExtendedProgram) -> bool:
    def ok(t):
        if isinstance(t, Const):
            return True
        if isinstance(t, FnApp):
            return t.fn.arity == 0 and t.fn.sort is Sort.BOOL
        if isinstance(t, Cond):
            return all(ok(a) for a in t.args)
        return False

    return not p.free_vars and all(ok(t) for t in p.parts)


# -- printing -----------------------------------------------------------------


def _fmt(t: Term, annotate: set, done: set) -> str:
    if isinstance(t, Const):
        return "true" if t.value else "false"
    if isinstance(t, IndVar):
        return t.var.name
    if isinstance(t, Cond):
        a, b, c = (_fmt(x, annotate, done) for x in t.args)
        return f"if {a} then {b} else {c}"
    args = ", ".join(_fmt(a, annotate, done) for a in t.args)
    if isinstance(t, SymApp):
        return f"{t.sym.name}({args})"
    name = t.fn.name
    if t.fn in annotate and t.fn not in done:
        done.add(t.fn)
        name += ":" + t.fn.sort.value
    return f"{name}({args})"


def format_term(t: Term) -> str:
    sig = Signature(symbols_of(t))
    plain = _fmt(t, set(), set())
    annotate = _misinferred(function_vars(t), lambda: parse_term(plain, sig))
    if not annotate:
        return plain
    return _fmt(t, annotate, set())


def _misinferred(fvars, reparse) -> set:
    """Boolean function variables that inference alone would read as ind."""
    candidates = [v for v in fvars if v.sort is Sort.BOOL]
    if not candidates:
        return set()
    found = {}
    for s in subterms_all(reparse()):
        if isinstance(s, FnApp):
            found[s.fn.index] = s.fn.sort
    return {v for v in candidates if found.get(v.index) is not Sort.BOOL}


def subterms_all(obj) -> Iterator[Term]:
    if isinstance(obj, ExtendedProgram):
        for eq in obj.equations:
            yield eq.lhs()
        for t in obj.parts:
            yield from subterms(t)
    else:
        yield from subterms(obj)


def format_program(p: ExtendedProgram) -> str:
    def render(annotate):
        done: set = set()
        eqs = []
        for eq in p.equations:
            lhs = _fmt(eq.lhs(), annotate, done)
            eqs.append(f"{lhs} = {_fmt(eq.rhs, annotate, done)}")
        head = _fmt(p.head, annotate, done)
        fv = ", ".join(v.name for v in p.free_vars)
        body = "{ " + ", ".join(eqs) + " }" if eqs else "{ }"
        return f"{head} ({fv}) where {body}"

    sig = Signature(set().union(*(symbols_of(t) for t in p.parts)))
    plain = render(set())
    annotate = _misinferred(p.function_vars(), lambda: parse_program(plain, sig))
    return render(annotate) if annotate else plain


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(\d+)|([(){},=:/]))")


@dataclass(frozen=True)
class _Tok:
    kind: str  # "id", "int", "punct", "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            if text[pos] == "\n":
                line += 1
                line_start = pos + 1
            pos += 1
        if pos >= n:
            toks.append(_Tok("eof", "", line, pos - line_start + 1))
            return toks
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        start = m.start(m.lastindex)
        kind = ("id", "int", "punct")[m.lastindex - 1]
        toks.append(_Tok(kind, m.group(m.lastindex), line, start - line_start + 1))
        pos = m.end()


# Raw syntax trees produced before sorts are known.
@dataclass
class _RName:
    name: str
    tok: _Tok


@dataclass
class _RApp:
    name: str
    args: list
    tok: _Tok
    annot: Sort | None = None
    annot_arity: int | None = None


@dataclass
class _RCond:
    test: object
    then: object
    orelse: object
    tok: _Tok


@dataclass
class _RConst:
    value: bool
    tok: _Tok


class _Parser:
    def __init__(self, toks: list[_Tok], start: int = 0, stop: int | None = None):
        self.toks = toks
        self.i = start
        self.stop = len(toks) - 1 if stop is None else stop

    def peek(self, k: int = 0) -> _Tok:
        j = self.i + k
        if j >= self.stop:
            return _Tok("eof", "", *self._eof_pos())
        return self.toks[j]

    def _eof_pos(self):
        t = self.toks[min(self.stop, len(self.toks) - 1)]
        return t.line, t.col

    def next(self) -> _Tok:
        t = self.peek()
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text or t.kind == "eof":
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected {text!r}, found {found}", t.line, t.col)
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text == text

    def ident(self) -> _Tok:
        t = self.next()
        if t.kind != "id" or t.text in _KEYWORDS:
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected identifier, found {found}", t.line, t.col)
        return t

    def term(self):
        t = self.peek()
        if t.kind == "id" and t.text in ("true", "false"):
            self.next()
            return _RConst(t.text == "true", t)
        if t.kind == "id" and t.text == "if":
            self.next()
            a = self.term()
            self.expect_kw("then")
            b = self.term()
            self.expect_kw("else")
            c = self.term()
            return _RCond(a, b, c, t)
        tok = self.ident()
        annot = arity = None
        if self.at(":"):
            self.next()
            s = self.ident()
            if s.text not in ("ind", "bool"):
                raise ParseError(f"unknown sort {s.text!r}", s.line, s.col)
            annot = Sort(s.text)
            if self.at("/"):
                self.next()
                k = self.next()
                if k.kind != "int":
                    raise ParseError("expected arity after '/'", k.line, k.col)
                arity = int(k.text)
            if not self.at("("):
                nt = self.peek()
                raise ParseError("annotated names must be applied", nt.line, nt.col)
        if self.at("("):
            self.next()
            args = []
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.next()
                    args.append(self.term())
            self.expect(")")
            return _RApp(tok.text, args, tok, annot, arity)
        return _RName(tok.text, tok)

    def expect_kw(self, kw: str):
        t = self.next()
        if t.kind != "id" or t.text != kw:
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected {kw!r}, found {found}", t.line, t.col)

    def ident_list(self) -> list[_Tok]:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.ident())
            while self.at(","):
                self.next()
                out.append(self.ident())
        self.expect(")")
        return out

    def done(self):
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"unexpected {t.text!r}", t.line, t.col)


class _Builder:
    """Turns raw trees into sorted terms, inferring function-variable sorts."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self.parent: dict = {}
        self.fixed: dict = {}
        self.fn_arity: dict[str, tuple[int, _Tok]] = {}
        self.fn_names: list[str] = []
        self.ind_names: list[str] = []
        self.fresh = 0

    # union-find over sort unknowns; constants live in ``fixed``
    def find(self, x):
        while self.parent.get(x, x) != x:
            x = self.parent[x]
        return x

    def unify(self, a, b, tok: _Tok, what: str):
        a, b = self._node(a), self._node(b)
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        sa, sb = self.fixed.get(ra), self.fixed.get(rb)
        if sa is not None and sb is not None and sa is not sb:
            raise SortMismatch(what, tok.line, tok.col)
        self.parent[ra] = rb
        if sb is None and sa is not None:
            self.fixed[rb] = sa

    def _node(self, x):
        if isinstance(x, Sort):
            key = ("const", x)
            self.fixed[key] = x
            return key
        return x

    def new_unknown(self):
        self.fresh += 1
        return ("tmp", self.fresh)

    def see_fn(self, name: str, arity: int, tok: _Tok):
        if _CANON_IND.match(name):
            raise UnknownSymbol(
                f"{name} is spelled as an individual variable and is not a symbol", tok.line, tok.col
            )
        old = self.fn_arity.get(name)
        if old is None:
            self.fn_arity[name] = (arity, tok)
            self.fn_names.append(name)
        elif old[0] != arity:
            raise ArityMismatch(
                f"{name} used with {arity} arguments, previously {old[0]}", tok.line, tok.col
            )

    def see_ind(self, name: str):
        if name not in self.ind_names:
            self.ind_names.append(name)

    def constrain(self, r):
        """Collect constraints; returns the sort node of ``r``."""
        if isinstance(r, _RConst):
            return Sort.BOOL
        if isinstance(r, _RCond):
            t = self.constrain(r.test)
            self.unify(t, Sort.BOOL, getattr(r.test, "tok", r.tok), "condition must be boolean")
            a = self.constrain(r.then)
            b = self.constrain(r.orelse)
            self.unify(a, b, r.tok, "branches of a conditional differ in sort")
            return a
        if isinstance(r, _RName):
            if r.name in self.sig:
                sym = self.sig[r.name]
                if sym.arity:
                    raise ArityMismatch(
                        f"{r.name} expects {sym.arity} arguments", r.tok.line, r.tok.col
                    )
                return sym.sort
            self.see_ind(r.name)
            return Sort.IND
        # application
        if r.name in self.sig:
            sym = self.sig[r.name]
            if r.annot is not None:
                raise ParseError(f"symbol {r.name} cannot be annotated", r.tok.line, r.tok.col)
            if sym.arity != len(r.args):
                raise ArityMismatch(
                    f"{r.name} expects {sym.arity} arguments, got {len(r.args)}",
                    r.tok.line, r.tok.col,
                )
            result = sym.sort
        else:
            if r.name in _KEYWORDS:
                raise ParseError(f"keyword {r.name!r} cannot be applied", r.tok.line, r.tok.col)
            if r.annot_arity is not None and r.annot_arity != len(r.args):
                raise ArityMismatch(
                    f"{r.name} annotated with arity {r.annot_arity}", r.tok.line, r.tok.col
                )
            self.see_fn(r.name, len(r.args), r.tok)
            result = ("fn", r.name)
            if r.annot is not None:
                self.unify(result, r.annot, r.tok, f"conflicting sorts for {r.name}")
        for a in r.args:
            s = self.constrain(a)
            tok = getattr(a, "tok", r.tok)
            self.unify(s, Sort.IND, tok, f"argument of {r.name} must be individual")
        return result

    def assign_indices(self, canon: re.Pattern, names: list[str]) -> dict[str, int]:
        out = {}
        used = set()
        for n in names:
            m = canon.match(n)
            if m:
                out[n] = int(m.group(1))
                used.add(out[n])
        k = 0
        for n in names:
            if n in out:
                continue
            while k in used:
                k += 1
            out[n] = k
            used.add(k)
        return out

    def finish(self):
        self.ind_index = self.assign_indices(_CANON_IND, self.ind_names)
        fidx = self.assign_indices(_CANON_FN, self.fn_names)
        self.fn_var = {}
        for name in self.fn_names:
            sort = self.fixed.get(self.find(("fn", name)), Sort.IND)
            self.fn_var[name] = fvar(fidx[name], self.fn_arity[name][0], sort)

    def ivar(self, name: str) -> Variable:
        return ind(self.ind_index[name])

    def build(self, r) -> Term:
        if isinstance(r, _RConst):
            return TRUE if r.value else FALSE
        if isinstance(r, _RCond):
            return Cond(self.build(r.test), self.build(r.then), self.build(r.orelse))
        if isinstance(r, _RName):
            if r.name in self.sig:
                return SymApp(self.sig[r.name], ())
            return IndVar(self.ivar(r.name))
        args = tuple(self.build(a) for a in r.args)
        if r.name in self.sig:
            return SymApp(self.sig[r.name], args)
        return FnApp(self.fn_var[r.name], args)


def parse_term(text: str, sig: Signature | None = None) -> Term:
    return parse_terms([text], sig)[0]


def parse_terms(
    texts: Sequence[str], sig: Signature | None = None, same_sort: bool = False
) -> list[Term]:
    """Parse several terms sharing one variable namespace.

    With ``same_sort`` the terms are also required to share a sort, which
    lets one side fix the sort of function variables on the other.
    """
    sig = sig or Signature()
    raws = []
    for text in texts:
        p = _Parser(_tokenize(text))
        raws.append(p.term())
        p.done()
    b = _Builder(sig)
    roots = [b.constrain(raw) for raw in raws]
    if same_sort:
        for raw, root in zip(raws[1:], roots[1:]):
            b.unify(roots[0], root, raw.tok, "terms differ in sort")
    b.finish()
    return [b.build(raw) for raw in raws]


def _top_level_where(toks: list[_Tok]) -> int:
    depth_ = 0
    for i, t in enumerate(toks):
        if t.kind == "punct" and t.text in "({":
            depth_ += 1
        elif t.kind == "punct" and t.text in ")}":
            depth_ -= 1
        elif t.kind == "id" and t.text == "where" and depth_ == 0:
            return i
    return None


def parse_program(text: str, sig: Signature | None = None) -> ExtendedProgram:
    """Parse ``head (x, ...) where { p(x) = body, ... }``.

    The free-variable list may be omitted, in which case it defaults to the
    individual variables of the head in order of occurrence.  A program with
    an empty body may omit ``where { }``.
    """
    sig = sig or Signature()
    toks = _tokenize(text)
    w = _top_level_where(toks)
    raw_eqs = []
    if w is None:
        w = len(toks) - 1
    else:
        raw_eqs = _raw_body(toks, w)

    # reading (a): the last parenthesised group before 'where' lists free variables
    first_error = None
    split = _group_start(toks, w)
    if split is not None and split > 0:
        try:
            hp = _Parser(toks, 0, split)
            head = hp.term()
            hp.done()
            fp = _Parser(toks, split, w)
            fv = fp.ident_list()
            fp.done()
            return _assemble(sig, head, fv, raw_eqs)
        except ProgramError as exc:
            first_error = exc
    # reading (b): the whole prefix is the head
    try:
        hp = _Parser(toks, 0, w)
        head = hp.term()
        hp.done()
        return _assemble(sig, head, None, raw_eqs)
    except ProgramError:
        if first_error is not None:
            raise first_error from None
        raise


def _raw_body(toks, w):
    p = _Parser(toks, w + 1)
    p.expect("{")
    raw_eqs = []
    if not p.at("}"):
        raw_eqs.append(_raw_equation(p))
        while p.at(","):
            p.next()
            raw_eqs.append(_raw_equation(p))
    p.expect("}")
    p.done()
    return raw_eqs


def _group_start(toks, w) -> int | None:
    if w == 0 or toks[w - 1].text != ")":
        return None
    depth_ = 0
    for i in range(w - 1, -1, -1):
        t = toks[i]
        if t.kind == "punct" and t.text == ")":
            depth_ += 1
        elif t.kind == "punct" and t.text == "(":
            depth_ -= 1
            if depth_ == 0:
                return i
    return None


def _raw_equation(p: _Parser):
    tok = p.ident()
    annot = arity = None
    if p.at(":"):
        p.next()
        s = p.ident()
        if s.text not in ("ind", "bool"):
            raise ParseError(f"unknown sort {s.text!r}", s.line, s.col)
        annot = Sort(s.text)
        if p.at("/"):
            p.next()
            k = p.next()
            if k.kind != "int":
                raise ParseError("expected arity after '/'", k.line, k.col)
            arity = int(k.text)
    params = p.ident_list()
    p.expect("=")
    rhs = p.term()
    return tok, annot, arity, params, rhs


def _assemble(sig, raw_head, fv_toks, raw_eqs) -> ExtendedProgram:
    b = _Builder(sig)
    defined: dict[str, _Tok] = {}
    for tok, annot, arity, params, rhs in raw_eqs:
        if tok.text in sig:
            raise DuplicateDefinition(f"{tok.text} is a signature symbol", tok.line, tok.col)
        if tok.text in defined:
            raise DuplicateDefinition(f"{tok.text} defined twice", tok.line, tok.col)
        defined[tok.text] = tok
        names = [t.text for t in params]
        if len(set(names)) != len(names):
            raise InvalidProgram(f"repeated parameter in {tok.text}", tok.line, tok.col)
        for t in params:
            if t.text in sig:
                raise InvalidProgram(f"parameter {t.text} is a signature symbol", t.line, t.col)
        if arity is not None and arity != len(params):
            raise ArityMismatch(f"{tok.text} annotated with arity {arity}", tok.line, tok.col)
        b.see_fn(tok.text, len(params), tok)
        for t in params:
            b.see_ind(t.text)
        if annot is not None:
            b.unify(("fn", tok.text), annot, tok, f"conflicting sorts for {tok.text}")
        s = b.constrain(rhs)
        b.unify(("fn", tok.text), s, tok, f"{tok.text} and its body differ in sort")
    b.constrain(raw_head)
    if fv_toks is not None:
        for t in fv_toks:
            if t.text in sig:
                raise InvalidProgram(f"free variable {t.text} is a signature symbol", t.line, t.col)
            b.see_ind(t.text)
    for name, (_, tok) in b.fn_arity.items():
        if name not in defined:
            raise FreeFunctionVariable(f"{name} is not defined by any equation", tok.line, tok.col)
    b.finish()
    head = b.build(raw_head)
    if fv_toks is None:
        free = individual_vars(head)
    else:
        names = [t.text for t in fv_toks]
        if len(set(names)) != len(names):
            t = fv_toks[0]
            raise InvalidProgram("repeated free variable", t.line, t.col)
        free = [b.ivar(n) for n in names]
    eqs = []
    for tok, _, _, params, rhs in raw_eqs:
        try:
            eqs.append(Equation(b.fn_var[tok.text], [b.ivar(t.text) for t in params], b.build(rhs)))
        except ProgramError as exc:
            raise type(exc)(exc.cause, tok.line, tok.col) from None
    try:
        return ExtendedProgram(head, tuple(free), tuple(eqs))
    except ProgramError as exc:
        if exc.line is None:
            tok = getattr(raw_head, "tok", None)
            raise type(exc)(exc.cause, tok.line if tok else None, tok.col if tok else None) from None
        raise
