"""Validity of irreducible identities in a structure.

Each side of an irreducible identity has one of four forms:

    F1  true, false or an individual variable
    F2  a function variable applied to immediate terms
    F3  a conditional on immediate terms
    F4  a signature symbol applied to immediate terms

Every combination except F4-F4 is settled without looking at the structure,
or reduced to an F4-F4 residue.  Residues are decided by a dictionary of
bare identities: symbol applications whose arguments are individual or
nullary function variables only.
"""

from __future__ import annotations

import enum
import itertools
import logging
import warnings
from dataclasses import dataclass
from typing import Iterator

from .semantics import (
    DEFAULT_MAX_ASSIGNMENTS,
    FiniteStructure,
    satisfies,
    satisfies_injective,
)
from .syntax import (
    ID,
    PSI_FALSE,
    PSI_TRUE,
    Cond,
    Const,
    FnApp,
    FuncSymbol,
    IndVar,
    NotIrreducible,
    ParseError,
    ProgramError,
    Signature,
    Sort,
    SymApp,
    Term,
    Variable,
    format_declaration,
    fvar,
    ind,
    is_irreducible,
    parse_declaration,
    parse_terms,
    substitute,
)

log = logging.getLogger(__name__)


class NotForm44(ProgramError):
    pass


class DictionaryInsufficient(Exception):
    """The supplied dictionary cannot answer the question asked of it."""


class Form(enum.IntEnum):
    F1 = 1
    F2 = 2
    F3 = 3
    F4 = 4


@dataclass(frozen=True)
class IrreducibleIdentity:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        for side in (self.lhs, self.rhs):
            if not is_irreducible(side):
                raise NotIrreducible(f"{side} is not irreducible")
        if self.lhs.sort is not self.rhs.sort:
            raise NotIrreducible("sides of an identity must have the same sort")

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"

    def swap(self) -> "IrreducibleIdentity":
        return IrreducibleIdentity(self.rhs, self.lhs)


def parse_identity(text: str, sig: Signature | None = None) -> IrreducibleIdentity:
    """Parse ``lhs = rhs``; both sides share their variables."""
    if text.count("=") != 1:
        raise ParseError("an identity has exactly one '='")
    return IrreducibleIdentity(*parse_terms(text.split("="), sig, same_sort=True))


def form_of(t: Term) -> Form:
    if isinstance(t, (Const, IndVar)):
        return Form.F1
    if isinstance(t, FnApp):
        return Form.F2
    if isinstance(t, Cond):
        return Form.F3
    return Form.F4


def classify_identity(identity: IrreducibleIdentity) -> tuple[Form, Form]:
    a, b = form_of(identity.lhs), form_of(identity.rhs)
    return (a, b) if a <= b else (b, a)


def _oriented(identity: IrreducibleIdentity) -> tuple[Term, Term]:
    """The sides ordered so that the first has the smaller form."""
    if form_of(identity.lhs) <= form_of(identity.rhs):
        return identity.lhs, identity.rhs
    return identity.rhs, identity.lhs


class Verdict(enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    NEEDS_DICTIONARY = "needs dictionary"


def decide_structure_free(
    identity: IrreducibleIdentity,
) -> tuple[Verdict, IrreducibleIdentity | None]:
    """Settle every form except F4-F4; those come back as a residue."""
    forms = classify_identity(identity)
    a, b = _oriented(identity)
    ok = Verdict.VALID, None
    bad = Verdict.INVALID, None
    if forms in ((Form.F1, Form.F1), (Form.F2, Form.F2), (Form.F3, Form.F3)):
        return ok if a == b else bad
    if forms in ((Form.F1, Form.F2), (Form.F1, Form.F3), (Form.F3, Form.F4)):
        return bad
    if forms == (Form.F2, Form.F3):
        return ok if a == b.test == b.then == b.orelse else bad
    if forms == (Form.F4, Form.F4):
        return Verdict.NEEDS_DICTIONARY, identity
    # F1-F4 or F2-F4: ``a`` is the non-symbol side, ``b`` the symbol application
    if isinstance(a, Const):
        target = SymApp(PSI_TRUE if a.value else PSI_FALSE, ())
        return Verdict.NEEDS_DICTIONARY, IrreducibleIdentity(b, target)
    if a.sort is Sort.IND and a in b.args:
        return Verdict.NEEDS_DICTIONARY, IrreducibleIdentity(b, SymApp(ID, (a,)))
    return bad


def residue(identity: IrreducibleIdentity) -> IrreducibleIdentity | None:
    verdict, res = decide_structure_free(identity)
    return res if verdict is Verdict.NEEDS_DICTIONARY else None


def _require44(identity: IrreducibleIdentity) -> None:
    if classify_identity(identity) != (Form.F4, Form.F4):
        raise NotForm44(f"{identity} is not of form F4-F4")


def _slots(identity: IrreducibleIdentity) -> tuple[Term, ...]:
    return identity.lhs.args + identity.rhs.args


def placed_variables(identity: IrreducibleIdentity) -> list[Variable]:
    _require44(identity)
    out: dict[Variable, None] = {}
    for z in _slots(identity):
        if isinstance(z, IndVar):
            out.setdefault(z.var)
    return list(out)


# -- bare identities ----------------------------------------------------------


@dataclass(frozen=True)
class BareIdentity:
    lhs: FuncSymbol
    rhs: FuncSymbol
    args: tuple  # of Variable: individual, or nullary ind function variables

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.lhs.arity + self.rhs.arity:
            raise ValueError("argument pattern has the wrong length")
        if self.lhs.sort is not self.rhs.sort:
            raise ValueError("bare identity sides differ in sort")

    @property
    def individual(self) -> bool:
        return not any(v.is_function for v in self.args)

    def _arg(self, v: Variable) -> Term:
        return FnApp(v, ()) if v.is_function else IndVar(v)

    def terms(self) -> tuple[Term, Term]:
        k = self.lhs.arity
        left = SymApp(self.lhs, tuple(self._arg(v) for v in self.args[:k]))
        right = SymApp(self.rhs, tuple(self._arg(v) for v in self.args[k:]))
        return left, right

    def identity(self) -> IrreducibleIdentity:
        return IrreducibleIdentity(*self.terms())

    def __str__(self):
        a, b = self.terms()
        return f"{a} = {b}"


def bare_normalize(identity: IrreducibleIdentity) -> tuple[BareIdentity, dict]:
    """Replace the slots by variables mirroring their identity pattern."""
    _require44(identity)
    slot_var: dict[Term, Variable] = {}
    n_ind = n_fn = 0
    for z in _slots(identity):
        if z in slot_var:
            continue
        if isinstance(z, IndVar):
            slot_var[z] = ind(n_ind)
            n_ind += 1
        else:
            slot_var[z] = fvar(n_fn, 0, Sort.IND)
            n_fn += 1
    pattern = tuple(slot_var[z] for z in _slots(identity))
    return BareIdentity(identity.lhs.sym, identity.rhs.sym, pattern), slot_var


def restricted_growth_strings(m: int) -> Iterator[tuple[int, ...]]:
    """Set partitions of ``range(m)`` as restricted growth strings, in lexicographic order."""

    def go(prefix, top):
        if len(prefix) == m:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from go(prefix + [b], max(top, b))

    if m == 0:
        yield ()
    else:
        yield from go([0], 0)


def partition_expansion(identity: IrreducibleIdentity) -> list[BareIdentity]:
    placed = placed_variables(identity)
    out = []
    for rgs in restricted_growth_strings(len(placed)):
        first: dict[int, Variable] = {}
        for v, block in zip(placed, rgs):
            first.setdefault(block, v)
        ren = {v: first[block] for v, block in zip(placed, rgs)}
        merged = IrreducibleIdentity(
            substitute(identity.lhs, ind_map=ren), substitute(identity.rhs, ind_map=ren)
        )
        out.append(bare_normalize(merged)[0])
    return out


def total_reduce(identity: IrreducibleIdentity) -> BareIdentity | None:
    """The individual bare identity for a total structure, or None if invalid."""
    _require44(identity)
    left, right = identity.lhs.args, identity.rhs.args
    for one, other in ((left, right), (right, left)):
        for z in one:
            if not isinstance(z, IndVar) and z not in other:
                return None
    slot_var: dict[Term, Variable] = {}
    for z in left + right:
        slot_var.setdefault(z, ind(len(slot_var)))
    pattern = tuple(slot_var[z] for z in left + right)
    return BareIdentity(identity.lhs.sym, identity.rhs.sym, pattern)


def coupled(identity: IrreducibleIdentity) -> bool:
    """Whether merging placed variables can force two distinct slots to agree.

    Two applications ``p(u)`` and ``p(u')`` of one function variable, whose
    arguments differ only at positions holding placed variables, take equal
    values whenever those placed variables do.  Then the tuples of slot values
    that assignments realize are not all tuples matching the identity
    pattern, and the individual reduction for total structures is not exact.
    """
    _require44(identity)
    placed = set(placed_variables(identity))
    apps = [z for z in dict.fromkeys(_slots(identity)) if isinstance(z, FnApp)]
    for x, y in itertools.combinations(apps, 2):
        if x.fn != y.fn:
            continue
        diffs = [(a, b) for a, b in zip(x.args, y.args) if a != b]
        if all(a.var in placed and b.var in placed for a, b in diffs):
            return True
    return False


# -- enumeration of bare identities -------------------------------------------


def bare_patterns(length: int, individual_only: bool = False) -> Iterator[tuple]:
    """Argument patterns in alphabetically least form."""

    def go(prefix, n_ind, n_fn):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        used = list(dict.fromkeys(prefix))
        for v in used:
            yield from go(prefix + [v], n_ind, n_fn)
        yield from go(prefix + [ind(n_ind)], n_ind + 1, n_fn)
        if not individual_only:
            yield from go(prefix + [fvar(n_fn, 0, Sort.IND)], n_ind, n_fn + 1)

    yield from go([], 0, 0)


def enumerate_bare_identities(sig: Signature, individual_only: bool = False) -> Iterator[BareIdentity]:
    symbols = list(sig)
    for phi in symbols:
        for psi in symbols:
            if phi.sort is not psi.sort:
                continue
            for pat in bare_patterns(phi.arity + psi.arity, individual_only):
                yield BareIdentity(phi, psi, pat)


def barearity_bound(sig: Signature) -> int:
    return 2 ** (2 * sig.max_arity()) * len(sig) ** 2


# -- dictionaries -------------------------------------------------------------


class DictMode(enum.Enum):
    TOTAL_INDIVIDUAL = "total"
    GENERAL_INJECTIVE = "general"


@dataclass(frozen=True)
class Dictionary:
    structure_name: str
    mode: DictMode
    signature: Signature
    entries: frozenset

    def __contains__(self, bare: BareIdentity) -> bool:
        return bare in self.entries

    def __len__(self):
        return len(self.entries)


def _bare_holds(a: FiniteStructure, bare: BareIdentity, injective: bool, max_assignments: int) -> bool:
    lhs, rhs = bare.terms()
    if injective:
        placed = [v for v in dict.fromkeys(bare.args) if not v.is_function]
        return satisfies_injective(a, lhs, rhs, placed=placed, max_assignments=max_assignments)
    return satisfies(a, lhs, rhs, max_assignments=max_assignments)


def build_dictionary(
    a: FiniteStructure,
    mode: DictMode | None = None,
    max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
) -> Dictionary:
    if mode is None:
        mode = DictMode.TOTAL_INDIVIDUAL if a.total else DictMode.GENERAL_INJECTIVE
    if mode is DictMode.TOTAL_INDIVIDUAL and not a.total:
        raise ValueError("individual dictionaries are defined for total structures")
    individual = mode is DictMode.TOTAL_INDIVIDUAL
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        entries = frozenset(
            bare
            for bare in enumerate_bare_identities(a.signature, individual)
            if _bare_holds(a, bare, not individual, max_assignments)
        )
    if caught:
        log.warning(
            "%d bare identities hold vacuously: %s has too few elements to place their variables",
            len(caught), a.name,
        )
    bound = barearity_bound(a.signature)
    if len(entries) > bound:
        log.warning(
            "dictionary for %s has %d entries, above the bound %d", a.name, len(entries), bound
        )
    return Dictionary(a.name, mode, a.signature, entries)


def format_dictionary(d: Dictionary) -> str:
    prefix = "ind" if d.mode is DictMode.TOTAL_INDIVIDUAL else "inj"
    lines = [f"dictionary {d.structure_name} {d.mode.value}"]
    lines += [format_declaration(s) for s in d.signature.user_symbols()]
    lines += sorted(f"{prefix}: {b}" for b in d.entries)
    return "\n".join(lines) + "\n"


def parse_dictionary(text: str) -> Dictionary:
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(text.split("\n"))]
    rows = [(i, ln) for i, ln in rows if ln and not ln.startswith("#")]
    if not rows or not rows[0][1].startswith("dictionary "):
        raise ParseError("expected 'dictionary <name> total|general'", rows[0][0] if rows else 1, 1)
    head = rows[0][1].split()
    if len(head) != 3 or head[2] not in ("total", "general"):
        raise ParseError("expected 'dictionary <name> total|general'", rows[0][0], 1)
    mode = DictMode(head[2])
    symbols = []
    entries = set()
    want = "ind:" if mode is DictMode.TOTAL_INDIVIDUAL else "inj:"
    sig = None
    for i, ln in rows[1:]:
        if ln.startswith("func "):
            if sig is not None:
                raise ParseError("declarations must precede entries", i, 1)
            symbols.append(parse_declaration(ln, i))
            continue
        if sig is None:
            sig = Signature(symbols)
        if not ln.startswith(want):
            raise ParseError(f"expected an entry starting with {want!r}", i, 1)
        body = ln[len(want):]
        if body.count("=") != 1:
            raise ParseError("entry must be a single identity", i, 1)
        try:
            lhs, rhs = parse_terms(body.split("="), sig, same_sort=True)
            bare, _ = bare_normalize(IrreducibleIdentity(lhs, rhs))
        except ProgramError as exc:
            raise ParseError(exc.cause, i, 1) from None
        if bare.terms() != (lhs, rhs):
            raise ParseError("entry is not in alphabetically least form", i, 1)
        if mode is DictMode.TOTAL_INDIVIDUAL and not bare.individual:
            raise ParseError("individual dictionaries admit individual variables only", i, 1)
        entries.add(bare)
    return Dictionary(head[1], mode, sig or Signature(symbols), frozenset(entries))


# -- deciding identities ------------------------------------------------------


class _Free:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FREE"

    name = "FREE"


FREE = _Free()


class IdentityDecider:
    """Decides irreducible identities in FREE mode, a finite structure, or from a dictionary.

    Without a dictionary, membership questions are answered on demand by
    enumeration over the structure, which agrees with building the whole
    dictionary first.  Decisions are memoized.
    """

    def __init__(
        self,
        target: FiniteStructure | _Free | None = FREE,
        dictionary: Dictionary | None = None,
        max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
    ):
        if target is None and dictionary is None:
            raise ValueError("need a structure, FREE, or a dictionary")
        self.free = target is FREE
        self.structure = None if target is FREE else target
        self.dictionary = None if self.free else dictionary
        self.max_assignments = max_assignments
        if self.free:
            self.mode = None
        elif dictionary is not None:
            self.mode = dictionary.mode
        else:
            self.mode = DictMode.TOTAL_INDIVIDUAL if target.total else DictMode.GENERAL_INJECTIVE
        self._memo: dict[IrreducibleIdentity, bool] = {}
        self._members: dict[tuple[BareIdentity, bool], bool] = {}

    def member(self, bare: BareIdentity, injective: bool) -> bool:
        d = self.dictionary
        if d is not None and (d.mode is DictMode.GENERAL_INJECTIVE) == injective:
            return bare in d
        if self.structure is None:
            raise DictionaryInsufficient(
                f"{bare} needs an injective dictionary; supply the structure instead"
            )
        key = (bare, injective)
        if key not in self._members:
            self._members[key] = _bare_holds(self.structure, bare, injective, self.max_assignments)
        return self._members[key]

    def decide(self, identity: IrreducibleIdentity) -> bool:
        hit = self._memo.get(identity)
        if hit is None:
            hit = self._memo[identity] = self._decide(identity)
        return hit

    def _decide(self, identity: IrreducibleIdentity) -> bool:
        verdict, res = decide_structure_free(identity)
        if verdict is not Verdict.NEEDS_DICTIONARY:
            return verdict is Verdict.VALID
        if self.free:
            return res.lhs == res.rhs
        if self.mode is DictMode.TOTAL_INDIVIDUAL and not coupled(res):
            bare = total_reduce(res)
            return bare is not None and self.member(bare, injective=False)
        return all(self.member(b, injective=True) for b in partition_expansion(res))


def decide_identity(
    target: FiniteStructure | _Free | None,
    dictionary: Dictionary | None,
    identity: IrreducibleIdentity,
) -> bool:
    return IdentityDecider(target, dictionary).decide(identity)
