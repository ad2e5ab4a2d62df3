import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from workbench import __version__, automaton as core, cli, dsl
from workbench.dsl import Call, DslError, List, Num, Str, parse, run, to_text
from workbench.structure import cantor


def test_tokenize_and_parse():
    node = parse("affine(product(cantor, cantor), [1, -1], 1, 1)")
    assert node == Call("affine", (Call("product", (Call("cantor", ()), Call("cantor", ()))),
                                   List((Num(Fraction(1)), Num(Fraction(-1)))),
                                   Num(Fraction(1)), Num(Fraction(1))))
    assert to_text(node) == "affine(product(cantor, cantor), [1, -1], 1, 1)"
    assert parse("box(3, [0, 2/3])  # comment").args[1].items[1].value == Fraction(2, 3)
    assert dsl.Parser('load("a b.aut")').program().args[0] == Str("a b.aut")


@pytest.mark.parametrize("text,where", [
    ("union(cantor, carpet", (1, 21)),
    ("union(cantor,, carpet)", (1, 14)),
    ("dim(cantor) extra", (1, 13)),
])
def test_syntax_errors_have_positions(text, where):
    with pytest.raises(DslError) as err:
        parse(text)
    assert err.value.pos == where
    assert f"{where[0]}:{where[1]}" in str(err.value)


def test_type_errors():
    with pytest.raises(DslError, match="mismatch between cantor .* and carpet"):
        parse("union(cantor, carpet)")
    with pytest.raises(DslError, match="coordinate outside"):
        parse("singleton(3, 4/3)")
    with pytest.raises(DslError, match="coefficients"):
        parse("affine(carpet, [1], 0, 0)")
    with pytest.raises(DslError):
        parse("dim(dim(cantor))")
    with pytest.raises(DslError):
        parse("frobnicate(cantor)")


def test_evaluate_matches_library():
    a = dsl.evaluate(parse("inter(cantor, box(3, [0, 1/3]))"))
    assert [core.count_prefixes(a, k) for k in range(1, 5)] == [1, 2, 4, 8]
    assert core.canonical_equal(dsl.evaluate(parse("proj(product(cantor, full(1)), 1)")), cantor())


@pytest.mark.parametrize("query,expect", [
    ("dim(cantor)", "dim 0.630929753571"),
    ("equal(affine(product(cantor, cantor), [1, -1], 1, 1), box(3, [0, 2/3]))", "equal: true"),
    ("boxes(cantor, 5)", "32"),
    ("interior(cantor)", "interior: false"),
    ("subset(singleton(3, 1/4), cantor)", "subset: true"),
    ("verdict(cantor)", "DefinesAllCompactSets"),
    ("es_dims(es(tower(4)))", "upper density (packing per power): 1/2"),
    ("endpoints(4)", "8/9"),
    ("measure(box(3, [0, 2/3]))", "measure: 0.66666666"),
    ("steinhaus(cantor)", "vacuous"),
    ("nowhere_dense(carpet)", "nowhere_dense: true"),
    ("empty(inter(singleton(2, 1/3), singleton(2, 1/5)))", "empty: true"),
])
def test_queries(query, expect):
    rep = run(query)
    assert expect in rep.text
    assert rep.text.startswith(f"query: {to_text(parse(query))}\nworkbench {__version__}  seed=0")


def test_query_options_are_echoed():
    rep = run("boxcount(cantor, [2, 6])", dsl.Options(seed=5, samples=20000))
    assert "seed=5" in rep.text and "depth=6" in rep.text
    assert rep.csv_headers == ["depth", "boxes"]


def test_cli_eval_and_load_roundtrip(tmp_path, capsys):
    out = tmp_path / "c.aut"
    assert cli.main(["eval", "product(cantor, cantor)", "--out", str(out)]) == 0
    assert core.load(out) == core.product(cantor(), cantor())
    assert cli.main(["query", f'equal(load("{out}"), product(cantor, cantor))']) == 0
    assert "equal: true" in capsys.readouterr().out


def test_cli_diagnostics(capsys):
    assert cli.main(["query", "union(cantor, carpet)"]) == 1
    assert "mismatch" in capsys.readouterr().err
    assert cli.main(["query", "verdict(carpet)"]) == 1
    assert "not certified" in capsys.readouterr().err
    assert cli.main(["eval", "dim(cantor)"]) == 1
    assert cli.main(["query", 'dim(load("/nonexistent.aut"))']) == 1


def test_cli_state_cap_exit_code(capsys):
    assert cli.main(["query", "dim(affine(product(cantor, cantor), [1, -1], 1, 1))",
                     "--cap", "3"]) == 2
    assert "exceeded" in capsys.readouterr().err


def test_cli_csv(tmp_path):
    path = tmp_path / "e.csv"
    assert cli.main(["query", "endpoints(3)", "--csv", str(path)]) == 0
    assert path.read_text().splitlines()[0] == "index,endpoint,gap"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "workbench.cli", "query", "boxes(carpet, 2)"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip().endswith("64")


names = st.sampled_from(["cantor", "carpet", "menger"])
nums = st.fractions(min_value=-5, max_value=5, max_denominator=9).map(Num)


@st.composite
def terms(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(st.one_of(names.map(lambda n: Call(n, ())), nums))
    kind = draw(st.sampled_from(["call", "list"]))
    kids = tuple(draw(st.lists(terms(depth=depth - 1), max_size=3)))
    return Call(draw(st.sampled_from(["union", "inter", "proj"])), kids) if kind == "call" \
        else List(kids)


@given(terms())
def test_printer_parser_roundtrip(node):
    text = to_text(node)
    assert to_text(dsl.Parser(text).program()) == text


@pytest.mark.parametrize("text", [
    "union( cantor ,inter(cantor,box(3,[0, 6/9])))",
    "affine(product(cantor,cantor),[1,-1],1,1)   # comment",
])
def test_print_parse_is_canonical_and_evaluation_transparent(text):
    canon = to_text(parse(text))
    assert to_text(parse(canon)) == canon
    assert core.canonical_equal(dsl.evaluate(parse(text)), dsl.evaluate(parse(canon)))
