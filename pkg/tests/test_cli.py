import io
import json
import random
import subprocess
import sys
from pathlib import Path

import laws
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abstensor.cli import main
from abstensor.core import Label, TensorSymbol
from abstensor.normal_form import canonical, equivalent
from abstensor.syntax import (
    CheckError,
    ParseError,
    format_expression,
    format_source,
    parse,
)
from abstensor.valuation import ConcreteTensor

GOLDEN = Path(__file__).parent / "golden"
TWO_BOXES = str(GOLDEN / "two_boxes.tn")


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def write(tmp_path, text, name="src.tn"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- grammar -----------------------------------------------------------------


def test_parse_single_symbol():
    src = parse("type A, B; sym psi : A,B -> A; expr E = psi_{a,b}^{c};")
    (f,) = src.expression("E").factors
    assert f == TensorSymbol("psi", (Label("a", "A"), Label("b", "B")), (Label("c", "A"),))


def test_parse_two_boxes_binds_b():
    src = parse(Path(TWO_BOXES).read_text())
    e = src.expression("E")
    assert e.bound == {Label("b", "A")}
    assert equivalent(e, src.expression("F")) and not equivalent(e, src.expression("G"))


def test_parse_inline_types_and_empty_product():
    src = parse("type A; expr L = delta_{x:A}^{x}; expr U = 1;")
    assert src.expression("L").factors[0].is_circle
    assert src.expression("U").factors == ()


@pytest.mark.parametrize("text, error", [
    ("type A; sym psi : A,A -> A; expr E = psi_{a,a}^{c};", CheckError),
    ("type A; sym psi : A -> A; expr E = psi_{a}^{b} psi_{b}^{b};", CheckError),
    ("type A; expr E = psi_{a}^{b};", CheckError),
    ("type A; sym psi : A -> B;", CheckError),
    ("type A; sym psi : A -> A; expr E = psi_{a}^{b}", ParseError),
    ("type A; sym psi : A -> A; expr E = psi_{\\_a}^{b};", ParseError),
    ("type A; sym psi : A -> A; expr E = psi_{a}^{b} @;", ParseError),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("type A;\nsym psi : A -> A;\nexpr E = psi_{a}^{b} ;;\n")
    assert (info.value.line, info.value.column) == (3, 23)


def test_reserved_labels_never_print_raw():
    src = parse(Path(TWO_BOXES).read_text())
    text = format_expression(canonical(src.expression("E")).expression())
    assert "\\_" not in text
    assert text == (GOLDEN / "two_boxes.reduce").read_text().strip()


def _round_trip(seed):
    rng = random.Random(seed)
    alphabet = laws.new_alphabet(rng)
    e = laws.random_equivalent(rng, laws.bounded_expression(rng, alphabet))
    text = format_source(alphabet.types, alphabet, {"E": e})
    return e, parse(text).expression("E"), text


@given(st.integers(0, 2**32 - 1))
def test_print_parse_round_trip(seed):
    e, back, text = _round_trip(seed)
    assert equivalent(e, back), text


# -- commands ----------------------------------------------------------------


def test_reduce_golden():
    assert run("reduce", TWO_BOXES, "--expr", "F") == (0, (GOLDEN / "two_boxes.reduce").read_text())


def test_check_golden():
    assert run("check", TWO_BOXES) == (0, (GOLDEN / "two_boxes.check").read_text())


def test_dot_and_json_golden():
    assert run("dot", TWO_BOXES, "--expr", "E") == (0, (GOLDEN / "two_boxes.dot").read_text())
    assert run("json", TWO_BOXES, "--expr", "E") == (0, (GOLDEN / "two_boxes.json").read_text())


def test_eval_golden_and_brute_force():
    code, out = run("eval", TWO_BOXES, "--expr", "E", "--lower", "a,d", "--upper", "c,e")
    assert code == 0 and out == (GOLDEN / "two_boxes.eval").read_text()
    src = parse(Path(TWO_BOXES).read_text())
    psi, phi = src.bindings["psi"].entries, src.bindings["phi"].entries
    got = ConcreteTensor.from_json(out).entries
    for a in range(2):
        for d in range(2):
            for c in range(2):
                for e in range(2):
                    assert got[a, d, c, e] == sum(psi[a, b, c] * phi[d, b, e] for b in range(2))


def test_eval_circle(tmp_path):
    path = write(tmp_path, "type A; dim A = 3; expr L = delta_{a:A}^{a};")
    code, out = run("eval", path, "--expr", "L")
    assert code == 0 and json.loads(out) == {"lower": [], "upper": [], "entries": ["3/1"]}


def test_eq_exit_codes(tmp_path):
    path = write(tmp_path, (
        "type A; sym psi : A -> A;\n"
        "expr L = psi_{a}^{b} delta_{b}^{c};\nexpr R = psi_{a}^{c};\nexpr S = psi_{x}^{c};\n"
    ))
    assert run("eq", path, "--left", "L", "--right", "R") == (0, "true\n")
    assert run("eq", path, "--left", "L", "--right", "R", "--oracle") == (0, "true\n")
    assert run("eq", path, "--left", "L", "--right", "S") == (1, "false\n")


def _error(capsys, *argv):
    code, out = run(*argv)
    err = json.loads(capsys.readouterr().err)
    assert out == "" and err["code"] == code
    return code, err


def test_error_exit_codes(tmp_path, capsys):
    big = " ".join(f"psi_{{i{k}}}^{{o{k}}}" for k in range(7))
    ok = write(tmp_path, f"type A; sym psi : A -> A; expr E = psi_{{a}}^{{b}}; expr Big = {big};", "ok.tn")
    assert _error(capsys, "frobnicate", ok)[0] == 2
    assert _error(capsys, "reduce", ok)[0] == 2
    assert _error(capsys, "reduce", ok, "--expr", "Nope")[0] == 2
    assert _error(capsys, "reduce", str(tmp_path / "missing.tn"), "--expr", "E")[0] == 2
    assert _error(capsys, "eval", ok, "--expr", "E", "--lower", "zz")[0] == 2
    code, err = _error(capsys, "check", write(tmp_path, "type A;\nexpr E = ;", "bad.tn"))
    assert code == 3 and err["error"] == "parse" and (err["line"], err["column"]) == (2, 10)
    assert _error(capsys, "check", write(tmp_path, "type A; expr E = psi_{a}^{b};", "ty.tn"))[0] == 4
    assert _error(capsys, "eval", ok, "--expr", "E")[0] == 4
    code, err = _error(capsys, "eq", ok, "--left", "Big", "--right", "Big", "--oracle")
    assert code == 5 and err["error"] == "oracle-bound"
    assert run("eq", ok, "--left", "Big", "--right", "Big") == (0, "true\n")


def test_output_is_deterministic():
    for argv in (("reduce", TWO_BOXES, "--expr", "G"), ("dot", TWO_BOXES, "--expr", "F"),
                 ("json", TWO_BOXES, "--expr", "G"), ("check", TWO_BOXES)):
        assert run(*argv) == run(*argv)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "abstensor", "reduce", TWO_BOXES, "--expr", "E"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == (GOLDEN / "two_boxes.reduce").read_text()
