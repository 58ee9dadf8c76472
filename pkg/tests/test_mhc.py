from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvhycom.exactlin import Matrix, Subspace
from bvhycom.mhc import (
    DECREASING,
    INCREASING,
    Complex,
    Filtration,
    FiltrationError,
    Subquotient,
    audit_operation_weights,
    canonical_filtration,
    check_alpha_purity,
    check_E1_degeneration,
    check_H2,
    check_opposed,
    check_strictness,
    column_filtration,
    expected_bidegree,
    filtration_from_spec,
    formality_hypotheses,
    gr_gr_dims,
    grading_filtration,
    opposed_by_gr_gr,
    opposed_on_cohomology,
    preserves,
    row_filtration,
    weight_on_cohomology,
)
from bvhycom.parsing import parse_element

from conftest import model


def derham(name):
    M = model(name)
    return Complex.from_operator(M.op(M.derham))


def dolbeault(name):
    return Complex.from_operator(model(name).operators["dbar"])


def zero_complex(n, degree=1, bidegrees=None):
    return Complex(Matrix.zeros(n, n), [degree] * n, bidegrees)


# -- rigged complexes ----------------------------------------------------------


@pytest.fixture
def arrow():
    """x -> y with x in degree 0 and y in degree 1, y one filtration step deeper than x."""
    cx = Complex(Matrix([[0, 0], [1, 0]]), [0, 1])
    F = Filtration(
        DECREASING,
        {0: {0: Subspace.full(1), 1: Subspace.zero(1)}, 1: {0: Subspace.full(1), 1: Subspace.full(1)}},
        "rigged",
    )
    return cx, F


def test_non_strict_differential(arrow):
    cx, F = arrow
    assert preserves(cx, F)
    res = check_strictness(cx, F)
    assert res["preserved"] and not res["ok"] and res["failures"]


def test_non_strict_fails_E1(arrow):
    cx, F = arrow
    res = check_E1_degeneration(cx, F)
    assert not res["ok"]
    assert res["degrees"][0] == {"E1": 1, "H": 0}


def test_purity_refused_when_not_strict():
    cx = Complex(Matrix([[0, 0], [1, 0]]), [0, 1])
    W = Filtration(
        INCREASING,
        {0: {0: Subspace.full(1)}, 1: {0: Subspace.zero(1), 1: Subspace.full(1)}},
    )
    assert not check_strictness(cx, W)["ok"]
    res = check_alpha_purity(cx, W, 1)
    assert res["refused"] and not res["ok"]


def _flags(first, second):
    """Two-step flags on C^2: everything at 0, the given line at 1, nothing at 2."""
    F = {0: Subspace.full(2), 1: Subspace(2, [first]), 2: Subspace.zero(2)}
    Fb = {0: Subspace.full(2), 1: Subspace(2, [second]), 2: Subspace.zero(2)}
    clamp = lambda fl: lambda p: fl[min(max(p, 0), 2)]  # noqa: E731
    return clamp(F), clamp(Fb)


@pytest.mark.parametrize(
    "first, second, opposed",
    [([1, 0], [0, 1], True), ([1, 0], [1, 0], False), ([1, 1], [1, -1], True), ([1, 1], [2, 2], False)],
)
def test_rigged_opposedness_agrees_with_gr_gr(first, second, opposed):
    F, Fb = _flags(first, second)
    sq = Subquotient(Subspace.full(2), Subspace.zero(2))
    assert check_opposed(F, Fb, sq, 1, range(-1, 4)) is opposed
    assert opposed_by_gr_gr(F, Fb, sq, 1, range(-1, 4)) is opposed


def test_gr_gr_dims_of_opposed_pair():
    F, Fb = _flags([1, 0], [0, 1])
    sq = Subquotient(Subspace.full(2), Subspace.zero(2))
    assert gr_gr_dims(F, Fb, sq, range(-1, 4), range(-1, 4)) == {(1, 0): 1, (0, 1): 1}


vec = st.lists(st.integers(-2, 2), min_size=2, max_size=2).filter(any)


@given(vec, vec)
def test_opposedness_oracles_agree(u, v):
    F, Fb = _flags(u, v)
    sq = Subquotient(Subspace.full(2), Subspace.zero(2))
    assert check_opposed(F, Fb, sq, 1, range(-1, 4)) == opposed_by_gr_gr(F, Fb, sq, 1, range(-1, 4))


def test_opposed_on_induced_quotient():
    # on C^3 / span(e3) the lines e1 and e2 + e3 become opposed
    F = lambda p: {1: Subspace(3, [[1, 0, 0]])}.get(p, Subspace.full(3) if p < 1 else Subspace.zero(3))  # noqa: E731
    Fb = lambda p: {1: Subspace(3, [[0, 1, 1]])}.get(p, Subspace.full(3) if p < 1 else Subspace.zero(3))  # noqa: E731
    sq = Subquotient(Subspace.full(3), Subspace(3, [[0, 0, 1]]))
    assert check_opposed(F, Fb, sq, 1, range(-1, 4))


# -- model complexes -----------------------------------------------------------


def test_kt_degree_one_column_flags():
    cx = dolbeault("kt")
    F = column_filtration(cx)
    assert [F.step(1, p, cx).dim for p in (-1, 0, 1, 2)] == [4, 4, 2, 0]
    R = row_filtration(cx)
    assert [R.step(1, p, cx).dim for p in (0, 1, 2)] == [4, 2, 0]


def test_kt_canonical_weight_one():
    M = model("kt")
    cx = dolbeault("kt")
    W = canonical_filtration(cx)
    span = cx.embed(1, W.step(1, 1, cx))
    want = Subspace(M.alg.dim, [parse_element(t, M.alg).to_vector() for t in ("a", "abar", "bbar")])
    assert span == want
    assert W.step(1, 0, cx).dim == 0 and W.step(1, 2, cx).dim == 4


def test_kt_opposed_on_dolbeault_cohomology():
    cx = dolbeault("kt")
    res = opposed_on_cohomology(cx, column_filtration(cx), row_filtration(cx))
    assert res[1]["dim"] == 3
    assert all(r["opposed"] and r["gr_gr"] for r in res.values())


@pytest.mark.parametrize("name, ok", [("kt", True), ("iwasawa-orbifold", True), ("iwasawa", False)])
def test_E1_degeneration_of_de_rham(name, ok):
    cx = derham(name)
    assert check_E1_degeneration(cx, column_filtration(cx))["ok"] is ok
    assert check_E1_degeneration(cx, row_filtration(cx))["ok"] is ok


def test_E1_requires_preserved_filtration():
    cx = dolbeault("kt")
    with pytest.raises(FiltrationError):
        check_E1_degeneration(cx, grading_filtration(cx, 1, 1))


def test_bigrading_required():
    cx = zero_complex(2)
    with pytest.raises(FiltrationError):
        column_filtration(cx)


def test_canonical_weight_is_pure():
    cx = derham("iwasawa-orbifold")
    W = canonical_filtration(cx)
    res = check_alpha_purity(cx, W, 1)
    assert res["ok"] and not res["refused"]
    assert all(set(row) == {n} for n, row in res["graded"].items())


def test_two_weights_break_purity():
    cx = zero_complex(2, 1, [(1, 0), (0, 1)])
    W = grading_filtration(cx, 1, 2)
    assert weight_on_cohomology(cx, W) == {1: {1: 1, 2: 1}}
    res = check_alpha_purity(cx, W, 1)
    assert not res["ok"] and res["violations"] == [(1, 2)]
    assert check_alpha_purity(cx, grading_filtration(cx, 1, 1), 1)["ok"]
    assert check_alpha_purity(cx, grading_filtration(cx, 1, 1), "1/2")["ok"] is False


def test_H2_on_pure_torus():
    cx = derham("torus:2")
    W = canonical_filtration(cx)
    assert check_H2(cx, W, column_filtration(cx), row_filtration(cx))["ok"]


def test_expected_bidegrees():
    assert expected_bidegree("kahler", 3) == (-1, -1)
    assert expected_bidegree("bv1", 3) == (1, -1)
    assert expected_bidegree("kahler", 2) == (0, 0)
    with pytest.raises(ValueError):
        expected_bidegree("mystery", 3)


def test_audit_examples():
    kt_like = audit_operation_weights((1, -1), (1, -1), "bv1")
    assert kt_like["conforms"] and not kt_like["pure_hodge_pattern"]
    kahler = audit_operation_weights((-1, -1), (-1, -1), "kahler")
    assert kahler["conforms"] and kahler["pure_hodge_pattern"]
    wrong = audit_operation_weights((1, -1), None, "kahler")
    assert not wrong["conforms"]
    flat = audit_operation_weights(None, None, "kahler")
    assert flat["vacuous"] and flat["conforms"]
    assert formality_hypotheses({"ok": True}, kahler)
    assert not formality_hypotheses({"ok": True}, kt_like)
    assert not formality_hypotheses({"ok": False}, kahler)


def test_filtration_specs():
    cx = dolbeault("kt")
    assert filtration_from_spec("column", cx).name == "column"
    assert filtration_from_spec(" row ", cx).name == "row"
    assert filtration_from_spec("canonical", cx).direction == INCREASING
    assert filtration_from_spec("grading:1,-1", cx).name == "grading:1,-1"
    for bad in ("grading:1", "grading:x,y", "weight"):
        with pytest.raises(FiltrationError):
            filtration_from_spec(bad, cx)


def test_alpha_accepts_fractions():
    cx = zero_complex(1, 2, [(1, 1)])
    assert check_alpha_purity(cx, grading_filtration(cx, 1, 0), Fraction(1, 2))["ok"]
