"""Command-line front end.

Exit status 0 means success or a positive verdict, 1 a negative verdict and
2 a usage or input error, reported on one line as ``file:line: cause``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import congruence, identities, intension, propgraph, reduction, semantics
from .syntax import (
    ExtendedProgram,
    ProgramError,
    Signature,
    format_program,
    parse_program,
    parse_signature,
    split_declarations,
)

DEFAULT_MAX_CARRIER = 64


class InputError(Exception):
    def __init__(self, path: str, line, cause: str):
        super().__init__(f"{path}:{line if line else 1}: {cause}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(path, 1, exc.strerror or str(exc)) from None


def _wrap(path: str, fn, *args):
    try:
        return fn(*args)
    except ProgramError as exc:
        raise InputError(path, exc.line, exc.cause) from None


def _base_signature(args) -> Signature:
    sig = Signature()
    if getattr(args, "sig", None):
        sig = _wrap(args.sig, parse_signature, _read(args.sig))
    return sig


def _load_structure(args) -> semantics.FiniteStructure | None:
    path = getattr(args, "structure", None)
    if not path:
        return None
    a = _wrap(path, semantics.parse_structure, _read(path))
    if a.size > args.max_carrier:
        raise InputError(path, 1, f"carrier {a.size} exceeds --max-carrier {args.max_carrier}")
    return a


def _load_program(path: str, sig: Signature) -> ExtendedProgram:
    text = _read(path)

    def load():
        symbols, rest = split_declarations(text)
        return parse_program(rest, sig.extend(symbols))

    return _wrap(path, load)


def _program_signature(args, structure, source: str | None = None) -> Signature:
    """The --sig symbols plus those of a structure or dictionary."""
    sig = _base_signature(args)
    if structure is not None:
        sig = _wrap(source or args.structure, sig.extend, structure.signature.user_symbols())
    return sig


def _strategy(args) -> reduction.Strategy:
    return reduction.RANDOM(args.seed) if args.strategy == "random" else reduction.FIRST


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- commands -----------------------------------------------------------------


def cmd_parse(args) -> int:
    p = _load_program(args.program, _base_signature(args))
    _emit(format_program(p))
    return 0


def cmd_size(args) -> int:
    p = _load_program(args.program, _base_signature(args))
    _emit(str(reduction.size(p)))
    return 0


def cmd_trace(args) -> int:
    p = _load_program(args.program, _base_signature(args))
    trace = reduction.normalize(p, _strategy(args))
    lines = [format_program(p)]
    lines += [f"{label} {format_program(q)}" for label, q in trace.steps]
    _emit("\n".join(lines))
    return 0


def cmd_normalize(args) -> int:
    p = _load_program(args.program, _base_signature(args))
    _emit(format_program(reduction.normalize(p, _strategy(args)).final))
    return 0


def _parse_input(text: str, arity: int) -> tuple:
    parts = [x for x in text.replace(",", " ").split() if x]
    if len(parts) != arity or not all(x.isdigit() for x in parts):
        raise InputError("--input", 1, f"expected {arity} carrier elements")
    return tuple(int(x) for x in parts)


def cmd_eval(args) -> int:
    a = _load_structure(args)
    p = _load_program(args.program, _program_signature(args, a))
    if args.input is not None:
        point = _parse_input(args.input, len(p.free_vars))
        if any(x >= a.size for x in point):
            raise InputError("--input", 1, f"elements must lie in 0..{a.size - 1}")
        _emit(semantics.format_value(semantics.denote_program(a, p, point)))
        return 0
    table = semantics.denote_all(a, p)
    lines = [
        f"{' '.join(map(str, point))} -> {semantics.format_value(v)}".lstrip()
        for point, v in sorted(table.items())
    ]
    _emit("\n".join(lines))
    return 0


def _pair(args, structure=None, source=None):
    sig = _program_signature(args, structure, source)
    return _load_program(args.a, sig), _load_program(args.b, sig)


def cmd_congruent(args) -> int:
    e, f = _pair(args)
    w = congruence.congruent(e, f)
    if w is None:
        _emit("NOT CONGRUENT")
        return 1
    _emit(str(w))
    return 0


def _load_dictionary(args):
    if not args.dict:
        return None
    return _wrap(args.dict, identities.parse_dictionary, _read(args.dict))


def cmd_equiv(args) -> int:
    if args.free and (args.structure or args.dict):
        raise InputError("equiv", 1, "--free excludes --structure and --dict")
    if not (args.free or args.structure or args.dict):
        raise InputError("equiv", 1, "give --structure, --dict or --free")
    a = _load_structure(args)
    d = _load_dictionary(args)
    # without a structure the dictionary supplies the signature
    e, f = _pair(args, a, None) if a is not None or d is None else _pair(args, d, args.dict)
    target = identities.FREE if args.free else a
    w = intension.intensionally_equivalent(
        target, d, e, f, max_assignments=args.max_assignments
    )
    if w is None:
        _emit("NOT EQUIVALENT")
        return 1
    _emit(str(w))
    return 0


def cmd_global_equiv(args) -> int:
    e, f = _pair(args)
    if congruence.globally_equivalent(e, f):
        _emit("EQUIVALENT")
        return 0
    _emit("NOT EQUIVALENT")
    return 1


def cmd_dict(args) -> int:
    a = _load_structure(args)
    mode = identities.DictMode(args.mode) if args.mode else None
    try:
        d = identities.build_dictionary(a, mode, args.max_assignments)
    except ValueError as exc:
        raise InputError(args.structure, 1, str(exc)) from None
    _emit(identities.format_dictionary(d))
    return 0


def _load_graph(path: str) -> propgraph.Graph:
    return _wrap(path, propgraph.parse_graph, _read(path))


def cmd_graph_encode(args) -> int:
    _emit(format_program(propgraph.encode_graph(_load_graph(args.graph))))
    return 0


def cmd_graph_iso(args) -> int:
    g, h = _load_graph(args.g1), _load_graph(args.g2)
    if propgraph.graphs_isomorphic_via_intension(g, h):
        _emit("ISOMORPHIC")
        return 0
    _emit("NOT ISOMORPHIC")
    return 1


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mccarthy", description="Recursive programs and their intensions.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--sig", help="file of 'func' declarations")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-assignments", type=int, default=semantics.DEFAULT_MAX_ASSIGNMENTS)
        sp.add_argument("--max-carrier", type=int, default=DEFAULT_MAX_CARRIER)
        return sp

    for name, func, help_text in [
        ("parse", cmd_parse, "parse and print a program"),
        ("size", cmd_size, "print the size of a program"),
    ]:
        add(name, func, help_text).add_argument("program")
    for name, func, help_text in [
        ("trace", cmd_trace, "print every reduction step"),
        ("normalize", cmd_normalize, "print the canonical form"),
    ]:
        sp = add(name, func, help_text)
        sp.add_argument("program")
        sp.add_argument("--strategy", choices=["first", "random"], default="first")

    sp = add("eval", cmd_eval, "evaluate a program in a finite structure")
    sp.add_argument("--structure", required=True)
    sp.add_argument("--input", help="comma separated carrier elements; default: all inputs")
    sp.add_argument("program")

    for name, func, help_text in [
        ("congruent", cmd_congruent, "decide congruence"),
        ("global-equiv", cmd_global_equiv, "decide global intensional equivalence"),
    ]:
        sp = add(name, func, help_text)
        sp.add_argument("a")
        sp.add_argument("b")

    sp = add("equiv", cmd_equiv, "decide intensional equivalence on a structure or in FREE mode")
    sp.add_argument("--structure")
    sp.add_argument("--dict")
    sp.add_argument("--free", action="store_true")
    sp.add_argument("a")
    sp.add_argument("b")

    sp = add("dict", cmd_dict, "build the dictionary of a finite structure")
    sp.add_argument("--structure", required=True)
    sp.add_argument("--mode", choices=["total", "general"])

    add("graph-encode", cmd_graph_encode, "print the program encoding a graph").add_argument("graph")
    sp = add("graph-iso", cmd_graph_iso, "decide graph isomorphism through intensions")
    sp.add_argument("g1")
    sp.add_argument("g2")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (semantics.CarrierTooLargeForEnumeration, propgraph.GuardExceeded,
            identities.DictionaryInsufficient, semantics.NonMonotoneIteration) as exc:
        print(f"{args.command}:1: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
