import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvhycom.exactlin import I, Scalar
from bvhycom.models import from_file, load_model_file, shipped_presentation
from bvhycom.parsing import (
    ParseError,
    parse_element,
    parse_operator,
    parse_presentation,
    serialize,
    tokenize,
)

from conftest import model

KT_TEXT = shipped_presentation("kt").read_text()


def test_element_with_single_term(kt):
    x = parse_element("-i * a ^ abar", kt.alg)
    assert list(x.terms.values()) == [-I]
    assert x == kt.alg.gen("a") * kt.alg.gen("abar") * -I


def test_precedence(kt):
    # '^' binds tighter than '*', which binds tighter than '+' and '-'
    x = parse_element("2 * a ^ b + b ^ a", kt.alg)
    assert x == parse_element("a ^ b", kt.alg)
    assert parse_element("1/2i * (a + b) ^ abar", kt.alg) == parse_element("1/2i * a ^ abar + 1/2i * b ^ abar", kt.alg)
    assert parse_element("-(a)", kt.alg) == -kt.alg.gen("a")
    assert parse_element("i * i * 1", kt.alg) == kt.alg.one().scale(-1)
    assert parse_element("(1+i) * a", kt.alg) == parse_element("a + i * a", kt.alg)
    assert parse_element("a ^ b * (2 - i)", kt.alg) == parse_element("2 * a ^ b - i * a ^ b", kt.alg)


def test_odd_square_warns(kt):
    warnings = []
    x = parse_element("b ^ b", kt.alg, warnings)
    assert x.is_zero()
    assert warnings and "b" in warnings[0]


@pytest.mark.parametrize(
    "text, kind, col, token",
    [
        ("a $ b", "lexical", 3, "$"),
        ("a ^ ", "syntax", 5, "<end>"),
        ("a ^ z", "undeclared", 5, "z"),
        ("a * b", "syntax", None, None),
        ("(a + 1) * b", "syntax", None, None),
        ("", "syntax", 1, "<end>"),
        ("(a", "syntax", 3, "<end>"),
        ("a b", "syntax", 3, "b"),
    ],
)
def test_element_diagnostics(kt, text, kind, col, token):
    with pytest.raises(ParseError) as err:
        parse_element(text, kt.alg)
    e = err.value
    assert e.kind == kind
    if col is not None:
        assert e.col == col
    if token is not None:
        assert e.token == token


def test_operator_expressions(iwo):
    op = parse_operator("-i * adj(del)", iwo.operators, iwo.alg)
    assert op.matrix == iwo.operators["del"].adjoint().matrix.scale(-I)
    both = parse_operator("dbar + del", iwo.operators, iwo.alg)
    assert both.matrix == (iwo.operators["dbar"] + iwo.operators["del"]).matrix
    with pytest.raises(ParseError) as err:
        parse_operator("dbar + nabla", iwo.operators, iwo.alg)
    assert err.value.kind == "undeclared" and err.value.col == 8


def test_tokenizer_positions():
    toks = tokenize("2i * a")
    assert [(t.kind, t.text, t.col) for t in toks] == [("num", "2i", 1), ("op", "*", 4), ("name", "a", 6), ("end", "", 7)]


# -- presentation files --


@pytest.mark.parametrize("name", ["kt", "iwasawa", "iwasawa-orbifold"])
def test_shipped_files_equal_builtins(name):
    F = load_model_file(shipped_presentation(name))
    B = model(name)
    assert F.alg.basis == B.alg.basis
    assert [g.name for g in F.alg.presentation.generators] == [g.name for g in B.alg.presentation.generators]
    for op in ("dbar", "del"):
        assert F.operators[op].matrix == B.operators[op].matrix
    assert F.bv_algebra().delta.matrix == B.bv_algebra().delta.matrix
    assert F.case == B.case


@pytest.mark.parametrize("name", ["kt", "iwasawa", "iwasawa-orbifold"])
def test_round_trip(name):
    pf = parse_presentation(shipped_presentation(name).read_text())
    again = parse_presentation(serialize(pf))
    assert again == pf
    assert serialize(again) == serialize(pf)


def test_trailing_comma_and_multiline_arrays():
    text = KT_TEXT.replace(
        'generators = [["a", 1, 0], ["b", 1, 0], ["abar", 0, 1], ["bbar", 0, 1]]',
        'generators = [\n  ["a", 1, 0],\n  ["b", 1, 0],\n  ["abar", 0, 1],\n  ["bbar", 0, 1],\n]',
    )
    assert parse_presentation(text) == parse_presentation(KT_TEXT)


def _error(text):
    with pytest.raises(ParseError) as err:
        from_file(parse_presentation(text))
    return err.value


def test_undeclared_generator_in_expression_position():
    e = _error(KT_TEXT.replace('b = "i * a ^ abar"', 'b = "i * a ^ zbar"'))
    assert e.kind == "undeclared"
    assert e.line == 9
    assert e.token == "zbar"
    # value starts at column 5 (the quote); 'zbar' is the 9th character of the expression
    assert e.col == 5 + 9


def test_bidegree_mismatch():
    e = _error(KT_TEXT.replace('["a", 1, 0]', '["a", 1, 1]'))
    assert e.kind == "bidegree" and e.line == 4


def test_inhomogeneous_differential():
    e = _error(KT_TEXT.replace('b = "i * a ^ abar"', 'b = "i * a ^ abar + a ^ b"'))
    assert e.kind == "bidegree"


def test_lexical_error_in_file():
    e = _error(KT_TEXT.replace('b = "i * a ^ abar"', 'b = "i * a ^ abar $"'))
    assert e.kind == "lexical" and e.line == 9 and e.token == "$"


@pytest.mark.parametrize(
    "mutate, kind, line",
    [
        (lambda t: t.replace("[bv]", "[bv"), "syntax", 14),
        (lambda t: t.replace('d = "dbar"', 'd = dbar'), "syntax", 15),
        (lambda t: t.replace('d = "dbar"', 'd = "nabla"'), "undeclared", 15),
        (lambda t: t.replace('["b", "bbar"]]', '["b", "cbar"]]'), "undeclared", 5),
        (lambda t: t + "\n[unknown]\nx = 1\n", "syntax", 18),
        (lambda t: t.replace("[differential.del]", "[differential.dbar]"), "syntax", 11),
    ],
)
def test_file_diagnostics(mutate, kind, line):
    e = _error(mutate(KT_TEXT))
    assert e.kind == kind
    if line is not None:
        assert e.line == line


def test_error_message_format():
    e = ParseError("syntax", "expected ')'", 3, 7, "x")
    assert str(e) == "line 3, column 7: syntax error: expected ')' (at 'x')"


coeffs = st.builds(Scalar, st.integers(-5, 5), st.integers(-5, 5))


@given(st.dictionaries(st.integers(0, 15), coeffs, max_size=5))
def test_format_then_parse_is_identity(terms):
    from bvhycom.cdga import format_element

    alg = model("kt").alg
    x = alg.from_sparse({k: v for k, v in terms.items() if v})
    assert parse_element(format_element(x), alg) == x
