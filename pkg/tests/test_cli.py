import subprocess
import sys
from pathlib import Path

import pytest

from mccarthy.cli import main
from mccarthy.identities import parse_dictionary
from mccarthy.reduction import size
from mccarthy.syntax import Signature, is_irreducible_program, parse_program, split_declarations

DATA = Path(__file__).resolve().parent.parent / "data"
EXP = str(DATA / "expexample.prog")
CONG_E = str(DATA / "cong_e.prog")
CONG_F = str(DATA / "cong_f.prog")
SEARCH = str(DATA / "search.st")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _exp_sig():
    symbols, _ = split_declarations(Path(EXP).read_text())
    return Signature(symbols)


def test_parse_round_trip(capsys):
    code, out, _ = run(capsys, "parse", EXP)
    assert code == 0
    original = parse_program(split_declarations(Path(EXP).read_text())[1], _exp_sig())
    assert parse_program(out, _exp_sig()) == original


def test_size(capsys):
    assert run(capsys, "size", EXP)[:2] == (0, "5\n")


def test_trace(capsys):
    code, out, _ = run(capsys, "trace", EXP)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 6
    assert lines[1].startswith("(p0,1,p1) ")
    assert lines[5].startswith("(HEAD,2,p5) ")


def test_normalize_strategies_agree_on_size(capsys):
    for strategy in ("first", "random"):
        code, out, _ = run(capsys, "normalize", "--strategy", strategy, "--seed", "3", EXP)
        p = parse_program(out, _exp_sig())
        assert code == 0 and is_irreducible_program(p) and size(p) == 0
        assert len(p.equations) == 6


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "--structure", SEARCH, EXP)
    assert code == 0 and out.splitlines() == ["0 -> 2", "1 -> 2", "2 -> divergent"]
    assert run(capsys, "eval", "--structure", SEARCH, "--input", "1", EXP)[:2] == (0, "2\n")


@pytest.mark.parametrize("value", ["7", "1,1", "x"])
def test_eval_bad_input(capsys, value):
    code, _, err = run(capsys, "eval", "--structure", SEARCH, "--input", value, EXP)
    assert code == 2 and err.startswith("--input:1: ")


def test_congruent(capsys):
    code, out, _ = run(capsys, "congruent", CONG_E, CONG_F)
    assert (code, out) == (1, "NOT CONGRUENT\n")
    code, out, _ = run(capsys, "congruent", EXP, EXP)
    assert code == 0 and out.startswith("permutation: 0->0")


def test_global_equivalence(capsys):
    assert run(capsys, "global-equiv", CONG_E, CONG_F)[:2] == (0, "EQUIVALENT\n")


def test_equiv_modes(capsys, tmp_path):
    code, out, _ = run(capsys, "equiv", "--free", CONG_E, CONG_F)
    assert code == 0 and out.startswith("permutation: 0->0 1->1")
    assert run(capsys, "equiv", "--structure", SEARCH, EXP, EXP)[0] == 0
    code, _, err = run(capsys, "equiv", CONG_E, CONG_F)
    assert code == 2 and "give --structure" in err
    code, _, err = run(capsys, "equiv", "--free", "--structure", SEARCH, CONG_E, CONG_F)
    assert code == 2 and "excludes" in err


def test_dictionary_file_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "dict", "--structure", SEARCH)
    assert code == 0
    d = parse_dictionary(out)
    assert d.structure_name == "search" and len(d) > 0
    path = tmp_path / "search.dict"
    path.write_text(out)
    assert run(capsys, "equiv", "--dict", path, EXP, EXP)[0] == 0
    assert run(capsys, "equiv", "--structure", SEARCH, "--dict", path, EXP, EXP)[0] == 0


def test_dictionary_mode_errors(capsys):
    code, _, err = run(capsys, "dict", "--structure", SEARCH, "--mode", "total")
    assert code == 2 and err.startswith(f"{SEARCH}:1: ")


def test_graph_commands(capsys):
    code, out, _ = run(capsys, "graph-encode", DATA / "two_cycle.graph")
    assert code == 0 and len(parse_program(out).equations) == 2 + 4 + 1
    assert run(capsys, "graph-iso", DATA / "path_fwd.graph", DATA / "path_rev.graph")[:2] == (0, "ISOMORPHIC\n")
    assert run(capsys, "graph-iso", DATA / "two_cycle.graph", DATA / "two_isolated.graph")[:2] == (
        1, "NOT ISOMORPHIC\n"
    )


def test_missing_file(capsys, tmp_path):
    missing = tmp_path / "nope.prog"
    code, _, err = run(capsys, "size", missing)
    assert code == 2 and err.startswith(f"{missing}:1: ")


def test_syntax_error_location(capsys, tmp_path):
    bad = tmp_path / "bad.prog"
    bad.write_text("# header\ntrue () where {\n  p() = (\n}\n")
    code, _, err = run(capsys, "parse", bad)
    assert code == 2 and err.startswith(f"{bad}:3: ")


def test_carrier_guard(capsys):
    code, _, err = run(capsys, "eval", "--max-carrier", "2", "--structure", SEARCH, EXP)
    assert code == 2 and "exceeds --max-carrier" in err


def test_assignment_guard(capsys):
    code, _, err = run(capsys, "dict", "--max-assignments", "1", "--structure", SEARCH)
    assert code == 2 and err.startswith("dict:1: ")


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["size"]) == 2
    assert main(["--help"]) == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mccarthy", "size", EXP], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and proc.stdout == "5\n"
