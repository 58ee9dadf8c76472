"""Exact linear algebra over the Gaussian rationals Q(i).

Scalars carry a rational real and imaginary part.  Matrices are dense,
row-major and immutable.  Subspaces are stored by their canonical
echelon basis, so two subspaces are equal exactly when their stored
bases coincide.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction, "Scalar"]


class DimensionError(ValueError):
    pass


class InconsistentSystemError(ValueError):
    pass


class NonInjectiveError(ValueError):
    pass


class Scalar:
    """Element of Q(i), stored as two Fractions."""

    __slots__ = ("re", "im")

    def __init__(self, re: int | Fraction | str = 0, im: int | Fraction | str = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(x: Number) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return Scalar(x)
        if isinstance(x, complex):
            raise TypeError("floating complex values are not exact")
        raise TypeError(f"cannot coerce {x!r} to Scalar")

    def __add__(self, other: Number) -> "Scalar":
        if not isinstance(other, _SCALARISH):
            return NotImplemented
        o = Scalar.coerce(other)
        return Scalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: Number) -> "Scalar":
        if not isinstance(other, _SCALARISH):
            return NotImplemented
        o = Scalar.coerce(other)
        return Scalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: Number) -> "Scalar":
        return Scalar.coerce(other) - self

    def __mul__(self, other: Number) -> "Scalar":
        if isinstance(other, (int, Fraction)):
            return Scalar(self.re * other, self.im * other)
        if not isinstance(other, Scalar):
            return NotImplemented
        o = other
        if not o.im:
            return Scalar(self.re * o.re, self.im * o.re)
        if not self.im:
            return Scalar(self.re * o.re, self.re * o.im)
        return Scalar(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Scalar":
        o = Scalar.coerce(other)
        n = o.re * o.re + o.im * o.im
        if not n:
            raise ZeroDivisionError("division by zero in Q(i)")
        num = self * o.conjugate()
        return Scalar(num.re / n, num.im / n)

    def __rtruediv__(self, other: Number) -> "Scalar":
        return Scalar.coerce(other) / self

    def __neg__(self) -> "Scalar":
        return Scalar(-self.re, -self.im)

    def __pos__(self) -> "Scalar":
        return self

    def conjugate(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __str__(self) -> str:
        return format_scalar(self)


_SCALARISH = (Scalar, int, Fraction)

ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_scalar(s: Scalar) -> str:
    """Render as ``3``, ``-1/2i``, ``2+3i`` or ``i`` (stable, deterministic)."""
    if not s.im:
        return _frac_str(s.re)
    if s.im == 1:
        im = "i"
    elif s.im == -1:
        im = "-i"
    else:
        im = _frac_str(s.im) + "i"
    if not s.re:
        return im
    sep = "" if im.startswith("-") else "+"
    return f"{_frac_str(s.re)}{sep}{im}"


def sc(x: Number) -> Scalar:
    return Scalar.coerce(x)


class Matrix:
    """Immutable dense matrix with Scalar entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[Number]], cols: int | None = None):
        rows = [tuple(sc(x) for x in r) for r in entries]
        if cols is None:
            if not rows:
                raise DimensionError("cannot infer column count of an empty matrix")
            cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise DimensionError("ragged matrix rows")
        self.rows = len(rows)
        self.cols = cols
        self.entries = tuple(rows)

    @classmethod
    def _raw(cls, rows: list[tuple[Scalar, ...]], ncols: int) -> "Matrix":
        m = cls.__new__(cls)
        m.rows = len(rows)
        m.cols = ncols
        m.entries = tuple(rows)
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls._raw([(ZERO,) * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._raw([tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)], n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Number]], rows: int | None = None) -> "Matrix":
        if not columns:
            if rows is None:
                raise DimensionError("need row count for a matrix with no columns")
            return cls._raw([() for _ in range(rows)], 0)
        n = len(columns[0])
        if rows is not None and n != rows:
            raise DimensionError("column length mismatch")
        if any(len(c) != n for c in columns):
            raise DimensionError("ragged columns")
        cols = [[sc(x) for x in c] for c in columns]
        return cls._raw([tuple(c[i] for c in cols) for i in range(n)], len(cols))

    @classmethod
    def from_sparse_columns(cls, columns: Sequence[dict[int, Scalar]], rows: int) -> "Matrix":
        data = [[ZERO] * len(columns) for _ in range(rows)]
        for j, col in enumerate(columns):
            for i, v in col.items():
                data[i][j] = v
        return cls._raw([tuple(r) for r in data], len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> Scalar:
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> tuple[Scalar, ...]:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[tuple[Scalar, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def sparse_column(self, j: int) -> dict[int, Scalar]:
        return {i: r[j] for i, r in enumerate(self.entries) if r[j]}

    def transpose(self) -> "Matrix":
        return Matrix._raw([self.column(j) for j in range(self.cols)], self.rows)

    def conj(self) -> "Matrix":
        return Matrix._raw([tuple(x.conjugate() for x in r) for r in self.entries], self.cols)

    def H(self) -> "Matrix":
        """Conjugate transpose."""
        return Matrix._raw(
            [tuple(self.entries[i][j].conjugate() for i in range(self.rows)) for j in range(self.cols)],
            self.rows,
        )

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return Matrix._raw(
            [tuple(a + b if b else a for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)],
            self.cols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def __neg__(self) -> "Matrix":
        return Matrix._raw([tuple(-x if x else x for x in r) for r in self.entries], self.cols)

    def scale(self, c: Number) -> "Matrix":
        c = sc(c)
        return Matrix._raw([tuple(c * x if x else x for x in r) for r in self.entries], self.cols)

    def __rmul__(self, c: Number) -> "Matrix":
        return self.scale(c)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        other_rows = [[(k, v) for k, v in enumerate(r) if v] for r in other.entries]
        out = []
        for r in self.entries:
            acc: dict[int, Scalar] = {}
            for k, a in enumerate(r):
                if not a:
                    continue
                for j, b in other_rows[k]:
                    p = a * b
                    acc[j] = acc[j] + p if j in acc else p
            out.append(tuple(acc.get(j, ZERO) for j in range(other.cols)))
        return Matrix._raw(out, other.cols)

    def apply(self, vec: Sequence[Number]) -> tuple[Scalar, ...]:
        if len(vec) != self.cols:
            raise DimensionError("vector length mismatch")
        v = [(k, sc(x)) for k, x in enumerate(vec) if x]
        out = []
        for r in self.entries:
            s = ZERO
            for k, x in v:
                if r[k]:
                    s = s + r[k] * x
            out.append(s)
        return tuple(out)

    def is_zero(self) -> bool:
        return not any(x for r in self.entries for x in r)

    def nonzero_count(self) -> int:
        return sum(1 for r in self.entries for x in r if x)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix._raw([tuple(self.entries[i][j] for j in cols) for i in rows], len(cols))

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise DimensionError("row count mismatch in hstack")
        return Matrix._raw([a + b for a, b in zip(self.entries, other.entries)], self.cols + other.cols)

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise DimensionError("column count mismatch in vstack")
        return Matrix._raw(list(self.entries) + list(other.entries), self.cols)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self.entries)
        return f"Matrix({self.rows}x{self.cols}: [{body}])"


def rref(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns."""
    rows = [list(r) for r in m.entries]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        if r == len(rows):
            break
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = ONE / rows[r][c]
        if inv != ONE:
            rows[r] = [x * inv if x else x for x in rows[r]]
        nz = [(k, x) for k, x in enumerate(rows[r]) if x]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                row = rows[i]
                for k, x in nz:
                    row[k] = row[k] - f * x
        pivots.append(c)
        r += 1
    return Matrix._raw([tuple(x) for x in rows], m.cols), tuple(pivots)


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def _echelon_rows(vectors: Iterable[Sequence[Number]], n: int) -> tuple[tuple[tuple[Scalar, ...], ...], tuple[int, ...]]:
    vs = [tuple(sc(x) for x in v) for v in vectors]
    for v in vs:
        if len(v) != n:
            raise DimensionError(f"vector of length {len(v)} in ambient dimension {n}")
    if not vs:
        return (), ()
    red, piv = rref(Matrix._raw(vs, n))
    return tuple(red.entries[: len(piv)]), piv


class Subspace:
    """Subspace of Q(i)^n held in canonical echelon form.

    ``basis`` holds the nonzero rows of the reduced row echelon form of any
    spanning set; read as columns this is the reduced column echelon basis.
    """

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, vectors: Iterable[Sequence[Number]] = ()):
        self.ambient = ambient
        self.basis, self.pivots = _echelon_rows(vectors, ambient)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, Matrix.identity(n).entries)

    @classmethod
    def coordinate(cls, n: int, indices: Iterable[int]) -> "Subspace":
        idx = sorted(set(indices))
        return cls(n, [tuple(ONE if k == i else ZERO for k in range(n)) for i in idx])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def basis_matrix(self) -> Matrix:
        """Basis vectors as the columns of an ambient x dim matrix."""
        return Matrix.from_columns(list(self.basis), rows=self.ambient)

    def contains(self, vec: Sequence[Number]) -> bool:
        return contains(self, vec)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient == other.ambient and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient, self.basis))

    def __le__(self, other: "Subspace") -> bool:
        return all(contains(other, v) for v in self.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return intersect(self, other)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim} in {self.ambient})"


def kernel(m: Matrix) -> Subspace:
    red, piv = rref(m)
    pivset = set(piv)
    free = [c for c in range(m.cols) if c not in pivset]
    vecs = []
    for f in free:
        v = [ZERO] * m.cols
        v[f] = ONE
        for r, p in enumerate(piv):
            if red.entries[r][f]:
                v[p] = -red.entries[r][f]
        vecs.append(v)
    return Subspace(m.cols, vecs)


def image(m: Matrix) -> Subspace:
    return Subspace(m.rows, m.columns())


def _reduce(u: Subspace, vec: Sequence[Scalar]) -> list[Scalar]:
    v = list(vec)
    for row, p in zip(u.basis, u.pivots):
        f = v[p]
        if f:
            for k, x in enumerate(row):
                if x:
                    v[k] = v[k] - f * x
    return v


def contains(u: Subspace, vec: Sequence[Number]) -> bool:
    if len(vec) != u.ambient:
        raise DimensionError("vector length differs from ambient dimension")
    return not any(_reduce(u, [sc(x) for x in vec]))


def _check_ambient(u: Subspace, v: Subspace) -> None:
    if u.ambient != v.ambient:
        raise DimensionError(f"ambient dimensions differ: {u.ambient} vs {v.ambient}")


def subspace_sum(u: Subspace, v: Subspace) -> Subspace:
    _check_ambient(u, v)
    return Subspace(u.ambient, list(u.basis) + list(v.basis))


def intersect(u: Subspace, v: Subspace) -> Subspace:
    _check_ambient(u, v)
    if not u.dim or not v.dim:
        return Subspace.zero(u.ambient)
    stacked = Matrix.from_columns(list(u.basis) + [tuple(-x for x in w) for w in v.basis], rows=u.ambient)
    ker = kernel(stacked)
    vecs = []
    for coeffs in ker.basis:
        vec = [ZERO] * u.ambient
        for c, b in zip(coeffs[: u.dim], u.basis):
            if c:
                vec = [a + c * x for a, x in zip(vec, b)]
        vecs.append(vec)
    return Subspace(u.ambient, vecs)


def subspace_equal(u: Subspace, v: Subspace) -> bool:
    _check_ambient(u, v)
    return u.basis == v.basis


def apply_to_subspace(m: Matrix, u: Subspace) -> Subspace:
    """Image m(u)."""
    if m.cols != u.ambient:
        raise DimensionError("matrix and subspace dimensions differ")
    return Subspace(m.rows, [m.apply(b) for b in u.basis])


def preimage(m: Matrix, u: Subspace) -> Subspace:
    """{x : m x in u}."""
    if m.rows != u.ambient:
        raise DimensionError("matrix and subspace dimensions differ")
    comp = orthogonal_complement(u)
    if not comp.dim:
        return Subspace.full(m.cols)
    # x maps into u iff m x is orthogonal to the complement of u
    constraints = Matrix._raw([tuple(x.conjugate() for x in w) for w in comp.basis], m.rows) @ m
    return kernel(constraints)


def inverse(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise DimensionError("only square matrices are invertible")
    n = m.rows
    red, piv = rref(m.hstack(Matrix.identity(n)))
    if piv[:n] != tuple(range(n)) or len(piv) < n:
        raise NonInjectiveError("matrix is singular")
    return red.submatrix(range(n), range(n, 2 * n))


def solve(m: Matrix, rhs: Sequence[Number]) -> tuple[Scalar, ...]:
    """Unique solution of m x = rhs."""
    if len(rhs) != m.rows:
        raise DimensionError("right-hand side length mismatch")
    aug = m.hstack(Matrix.from_columns([list(rhs)], rows=m.rows))
    red, piv = rref(aug)
    if m.cols in piv:
        raise InconsistentSystemError("right-hand side is not in the image")
    if len(piv) < m.cols:
        raise NonInjectiveError("solution is not unique")
    x = [ZERO] * m.cols
    for r, p in enumerate(piv):
        x[p] = red.entries[r][m.cols]
    return tuple(x)


def solve_in(m: Matrix, rhs: Sequence[Number], domain: Subspace) -> tuple[Scalar, ...]:
    """The unique x in ``domain`` with m x = rhs."""
    if domain.ambient != m.cols:
        raise DimensionError("domain does not live in the source of m")
    if not domain.dim:
        if any(sc(x) for x in rhs):
            raise InconsistentSystemError("right-hand side is not in the image")
        return (ZERO,) * m.cols
    b = domain.basis_matrix()
    y = solve(m @ b, rhs)
    return b.apply(y)


def inner(x: Sequence[Number], y: Sequence[Number]) -> Scalar:
    """Hermitian product, conjugate-linear in the first slot."""
    s = ZERO
    for a, b in zip(x, y):
        if a and b:
            s = s + sc(a).conjugate() * sc(b)
    return s


def orthogonal_complement(u: Subspace) -> Subspace:
    if not u.dim:
        return Subspace.full(u.ambient)
    conj_rows = Matrix._raw([tuple(x.conjugate() for x in b) for b in u.basis], u.ambient)
    return kernel(conj_rows)


def orthogonal_projection(u: Subspace) -> Matrix:
    """Matrix of the Hermitian orthogonal projection onto u."""
    n = u.ambient
    if not u.dim:
        return Matrix.zeros(n, n)
    b = u.basis_matrix()
    gram = b.H() @ b
    return b @ inverse(gram) @ b.H()
