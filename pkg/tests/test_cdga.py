import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvhycom.cdga import (
    Algebra,
    Derivation,
    Generator,
    GradingError,
    Operator,
    Presentation,
    PresentationError,
    check_anticommute,
    check_leibniz,
    check_square_zero,
    conjugate,
    derivation_operator,
    operator_matrix,
    wedge,
)
from bvhycom.exactlin import I, Matrix, rank

from conftest import model


def elt(M, text):
    from bvhycom.parsing import parse_element

    return parse_element(text, M.alg)


def test_odd_sign_and_unit(kt):
    a, b = kt.alg.gen("a"), kt.alg.gen("b")
    assert wedge(a, b) == -wedge(b, a)
    assert wedge(kt.alg.one(), a) == a


def test_kt_sign_bookkeeping(kt):
    b, bbar, a = kt.alg.gen("b"), kt.alg.gen("bbar"), kt.alg.gen("a")
    assert wedge(bbar, b) == -wedge(b, bbar)
    assert a * bbar * (-b) == elt(kt, "a ^ b ^ bbar")


def test_repeated_generator_vanishes(kt):
    b = kt.alg.gen("b")
    assert (b * b).is_zero()


def test_mixed_presentations_rejected(kt, torus2):
    with pytest.raises(PresentationError):
        kt.alg.gen("a") * torus2.alg.gen("a1")


def test_even_generators_rejected():
    with pytest.raises(GradingError):
        Generator("x", 1, 1)


def test_conjugation_must_swap_bidegrees():
    with pytest.raises(GradingError):
        Presentation([Generator("a", 1, 0), Generator("b", 1, 0)], {"a": "b"})


def test_monomial_count_and_bidegrees(kt):
    assert kt.alg.dim == 16
    assert len(model("iwasawa").alg.basis) == 64
    for m in kt.alg.basis:
        p, q = kt.alg.presentation.bidegree(m)
        assert p + q == bin(m).count("1")


@pytest.mark.parametrize(
    "name, op, x, y",
    [
        ("kt", "dbar", "b", "i * a ^ abar"),
        ("kt", "del", "bbar", "-i * a ^ abar"),
        ("iwasawa", "del", "c ^ cbar", "-a ^ b ^ cbar"),
        ("iwasawa-orbifold", "del", "c ^ cbar", "-a ^ b ^ cbar"),
        ("iwasawa-orbifold", "del", "c ^ abar ^ bbar", "-a ^ b ^ abar ^ bbar"),
        ("iwasawa-orbifold", "dbar", "c ^ cbar", "c ^ abar ^ bbar"),
        ("iwasawa-orbifold", "dbar", "a ^ b ^ cbar", "-a ^ b ^ abar ^ bbar"),
    ],
)
def test_differential_values(name, op, x, y):
    M = model(name)
    assert M.derivations[op](elt(M, x)) == elt(M, y)


def test_operator_matrix_examples(kt):
    zero = Derivation("z", (0, 1))
    assert operator_matrix(kt.alg, zero).is_zero()
    dbar = kt.operators["dbar"]
    deg1 = [k for k, d in enumerate(kt.alg.degrees()) if d == 1]
    deg2 = [k for k, d in enumerate(kt.alg.degrees()) if d == 2]
    block = dbar.matrix.submatrix(deg2, deg1)
    assert rank(block) == 1
    assert (Operator.identity(kt.alg).matrix == Matrix.identity(16))


def test_conjugation_examples(kt):
    a, abar = kt.alg.gen("a"), kt.alg.gen("abar")
    assert conjugate(a) == abar
    x = elt(kt, "i * a ^ abar")
    assert conjugate(x) == x
    for k in range(kt.alg.dim):
        e = kt.alg.basis_element(k)
        assert conjugate(conjugate(e)) == e


@pytest.mark.parametrize("name", ["kt", "iwasawa", "iwasawa-orbifold", "torus:2"])
def test_double_complex(name):
    M = model(name)
    assert check_square_zero(M.operators["dbar"])["ok"]
    assert check_square_zero(M.operators["del"])["ok"]
    assert check_anticommute(M.operators["dbar"], M.operators["del"])["ok"]
    assert check_leibniz(M.operators["dbar"])["ok"]
    assert check_leibniz(M.operators["del"])["ok"]


def test_zero_derivation_trivial(kt):
    z = derivation_operator(kt.alg, Derivation("z", (1, 0)))
    assert check_square_zero(z)["ok"] and check_anticommute(z, kt.operators["dbar"])["ok"]


def test_non_derivation_detected(kt):
    # the adjoint of dbar is not a derivation on KT
    assert not check_leibniz(kt.operators["dbar"].adjoint(), 1)["ok"]


basis_index = st.integers(0, 15)


@given(basis_index, basis_index)
def test_graded_commutativity(i, j):
    alg = model("kt").alg
    x, y = alg.basis_element(i), alg.basis_element(j)
    dx, dy = alg.degrees()[i], alg.degrees()[j]
    assert x * y == (y * x).scale(-1 if dx * dy % 2 else 1)


@given(basis_index, basis_index, basis_index)
def test_associativity(i, j, k):
    alg = model("kt").alg
    x, y, z = (alg.basis_element(t) for t in (i, j, k))
    assert (x * y) * z == x * (y * z)


@given(basis_index, basis_index, st.sampled_from(["dbar", "del"]))
def test_leibniz_on_pairs(i, j, op):
    M = model("kt")
    D = M.derivations[op]
    x, y = M.alg.basis_element(i), M.alg.basis_element(j)
    sign = -1 if M.alg.degrees()[i] % 2 else 1
    assert D(x * y) == D(x) * y + (x * D(y)).scale(sign)


@given(st.integers(0, 63), st.integers(0, 63))
def test_product_bidegree_is_additive(i, j):
    alg = model("iwasawa").alg
    x, y = alg.basis_element(i), alg.basis_element(j)
    xy = x * y
    if not xy.is_zero():
        (p1, q1), (p2, q2) = x.bidegree(), y.bidegree()
        assert xy.bidegree() == (p1 + p2, q1 + q2)


def test_scalar_multiples(kt):
    x = elt(kt, "a ^ b")
    assert (I * x).scale(I) == -x
    assert Algebra(kt.alg.presentation).dim == 16
