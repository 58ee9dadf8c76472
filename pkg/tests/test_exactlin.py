from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvhycom.exactlin import (
    I,
    ONE,
    ZERO,
    DimensionError,
    InconsistentSystemError,
    Matrix,
    NonInjectiveError,
    Scalar,
    format_scalar,
    image,
    inner,
    intersect,
    inverse,
    kernel,
    orthogonal_complement,
    rank,
    rref,
    solve_in,
    subspace_equal,
    subspace_sum,
    Subspace,
)

small = st.integers(-3, 3)
scalars = st.builds(Scalar, small, small)


def matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(scalars, min_size=c, max_size=c), min_size=r, max_size=r).map(Matrix)
        )
    )


def vectors(n):
    return st.lists(scalars, min_size=n, max_size=n)


def subspaces(n):
    return st.lists(vectors(n), max_size=n).map(lambda vs: Subspace(n, vs))


# -- scalars --


def test_scalar_field_arithmetic():
    assert I * I == -1
    assert (ONE + I) * (ONE - I) == 2
    assert ONE / I == -I
    assert Scalar(Fraction(1, 2), -3) == Scalar("1/2", "-3")
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


@pytest.mark.parametrize(
    "value, text",
    [(Scalar(0), "0"), (Scalar(0, 1), "i"), (Scalar(0, -1), "-i"), (Scalar(0, 2), "2i"), (Scalar(Fraction(-1, 2)), "-1/2")],
)
def test_format_scalar(value, text):
    assert format_scalar(value) == text


def test_floats_are_refused():
    with pytest.raises(TypeError):
        Scalar.coerce(1j)


@given(scalars, scalars, scalars)
def test_scalar_distributive(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()


# -- rref --


def test_rref_identity():
    m, piv = rref(Matrix.identity(2))
    assert m == Matrix.identity(2) and piv == (0, 1)


def test_rref_dependent_rows():
    m, piv = rref(Matrix([[1, I], [I, -1]]))
    assert m == Matrix([[1, I], [0, 0]]) and piv == (0,)


def test_rref_zero():
    m, piv = rref(Matrix.zeros(2, 3))
    assert m.is_zero() and piv == ()


@given(matrices())
def test_rref_idempotent(m):
    r, piv = rref(m)
    assert rref(r) == (r, piv)


# -- kernel / image --


def test_kernel_and_image_examples():
    assert kernel(Matrix.identity(3)).dim == 0
    assert image(Matrix.zeros(3, 3)).dim == 0
    k = kernel(Matrix([[1, I]]))
    assert k == Subspace(2, [[-I, 1]])


@given(matrices())
def test_rank_nullity(m):
    assert kernel(m).dim + image(m).dim == m.cols
    assert image(m).dim == rank(m)
    for v in kernel(m).basis:
        assert not any(m.apply(v))


# -- subspace lattice --


def test_lattice_examples():
    e1, e2 = Subspace(2, [[1, 0]]), Subspace(2, [[0, 1]])
    assert intersect(e1, e1) == e1
    assert intersect(e1, e2).dim == 0
    assert subspace_sum(e1, Subspace(2, [[1, 1]])) == Subspace.full(2)
    with pytest.raises(DimensionError):
        intersect(e1, Subspace.full(3))


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(subspaces(n), subspaces(n))))
def test_modular_dimension_formula(uv):
    u, v = uv
    assert (u + v).dim + (u & v).dim == u.dim + v.dim
    assert (u & v) <= u and u <= (u + v)
    assert subspace_equal(u & v, v & u)


@given(st.integers(1, 4).flatmap(subspaces))
def test_orthogonal_complement(u):
    w = orthogonal_complement(u)
    assert u.dim + w.dim == u.ambient
    assert all(inner(a, b) == 0 for a in u.basis for b in w.basis)


def test_canonical_basis_makes_equality_syntactic():
    assert Subspace(2, [[1, 1], [0, 2]]) == Subspace(2, [[1, 0], [0, I]])


# -- solving --


def test_solve_in_examples():
    m = Matrix.identity(2).scale(2)
    assert solve_in(m, [1, 0], Subspace.full(2)) == (Scalar(Fraction(1, 2)), ZERO)
    assert solve_in(Matrix.zeros(2, 2), [0, 0], Subspace.zero(2)) == (ZERO, ZERO)


def test_solve_in_errors():
    with pytest.raises(InconsistentSystemError):
        solve_in(Matrix.zeros(2, 2), [1, 0], Subspace.full(2))
    with pytest.raises(NonInjectiveError):
        solve_in(Matrix([[1, 1], [0, 0]]), [1, 0], Subspace.full(2))


def test_solve_in_kt_laplacian(kt):
    from bvhycom.hodge import laplacian

    lap = laplacian(kt.operators["dbar"]).matrix
    b = kt.alg.gen("b").to_vector()
    rhs = lap.apply(b)
    x = solve_in(lap, rhs, image(lap))
    assert lap.apply(x) == rhs
    assert list(x) == b


@given(matrices(4, 4), st.data())
def test_solve_in_reproduces_rhs(m, data):
    dom = image(m.H())  # m is injective on the orthogonal complement of its kernel
    x0 = data.draw(vectors(m.cols))
    rhs = m.apply(x0)
    x = solve_in(m, rhs, dom)
    assert m.apply(x) == rhs and dom.contains(x)


@given(matrices(3, 3))
def test_inverse_when_invertible(m):
    if rank(m) == m.rows == m.cols:
        assert inverse(m) @ m == Matrix.identity(m.rows)
    elif m.rows == m.cols:
        with pytest.raises(NonInjectiveError):
            inverse(m)
