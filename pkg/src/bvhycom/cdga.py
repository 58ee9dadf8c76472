"""Bigraded exterior algebras with conjugation, derivations and operators.

Monomials are bitmasks over the generator list: bit ``k`` set means the
k-th generator occurs, and the monomial is read in increasing generator
order.  All generators are odd (bidegree (1,0) or (0,1)), so the Koszul
sign of a product is the parity of the number of inversions.

An :class:`Algebra` is a presentation together with a list of basis
monomials spanning a subalgebra (the whole exterior algebra by default).
Linear operators are square matrices on that basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .exactlin import ONE, ZERO, Matrix, Number, Scalar, format_scalar, sc


class GradingError(ValueError):
    pass


class ClosureError(ValueError):
    pass


class PresentationError(ValueError):
    pass


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def wedge_sign(m1: int, m2: int) -> int:
    """Sign of e_{m1} ^ e_{m2} relative to the sorted monomial; 0 if they overlap."""
    if m1 & m2:
        return 0
    s = 0
    x = m2
    while x:
        low = x & -x
        s += (m1 >> low.bit_length()).bit_count()
        x ^= low
    return -1 if s & 1 else 1


def sort_sign(indices: Sequence[int]) -> int:
    """Sign of the permutation sorting ``indices`` (0 if an index repeats)."""
    if len(set(indices)) != len(indices):
        return 0
    inv = sum(1 for a, b in combinations(indices, 2) if a > b)
    return -1 if inv & 1 else 1


@dataclass(frozen=True)
class Generator:
    name: str
    p: int
    q: int

    def __post_init__(self) -> None:
        if (self.p, self.q) not in ((1, 0), (0, 1)):
            raise GradingError(f"generator {self.name} must have bidegree (1,0) or (0,1)")


class Presentation:
    """Generators, their conjugation pairing and the volume monomial."""

    def __init__(
        self,
        generators: Sequence[Generator],
        conjugation: Mapping[str, str] | None = None,
        complex_dimension: int | None = None,
        volume: Sequence[str] | None = None,
        name: str = "",
    ):
        self.name = name
        self.generators = tuple(generators)
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise PresentationError("duplicate generator names")
        self._index = {n: k for k, n in enumerate(names)}
        self.conj: dict[int, int] | None = None
        if conjugation:
            conj: dict[int, int] = {}
            for x, y in conjugation.items():
                i, j = self.index(x), self.index(y)
                gx, gy = self.generators[i], self.generators[j]
                if (gx.p, gx.q) != (gy.q, gy.p):
                    raise GradingError(f"conjugate pair {x},{y} must have swapped bidegrees")
                if conj.get(i, j) != j or conj.get(j, i) != i:
                    raise PresentationError(f"conflicting conjugation for {x}")
                conj[i], conj[j] = j, i
            missing = [names[k] for k in range(len(names)) if k not in conj]
            if missing:
                raise PresentationError(f"conjugation does not cover generators {missing}")
            self.conj = conj
        holo = sum(1 for g in self.generators if g.p == 1)
        self.complex_dimension = holo if complex_dimension is None else complex_dimension
        if volume is None:
            self.volume = (1 << len(self.generators)) - 1
            self.volume_order = tuple(range(len(self.generators)))
        else:
            order = tuple(self.index(v) for v in volume)
            self.volume = 0
            for k in order:
                self.volume |= 1 << k
            self.volume_order = order

    @property
    def n(self) -> int:
        return len(self.generators)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PresentationError(f"unknown generator {name!r}") from None

    def names(self) -> list[str]:
        return [g.name for g in self.generators]

    def mask(self, names: Iterable[str]) -> tuple[int, int]:
        """(sign, mask) of the product of the named generators, in the order given."""
        idx = [self.index(n) for n in names]
        s = sort_sign(idx)
        m = 0
        for k in idx:
            m |= 1 << k
        return s, m

    def bidegree(self, mask: int) -> tuple[int, int]:
        p = q = 0
        for k in bits(mask):
            g = self.generators[k]
            p += g.p
            q += g.q
        return p, q

    def degree(self, mask: int) -> int:
        return mask.bit_count()

    def monomial_str(self, mask: int) -> str:
        if not mask:
            return "1"
        return " ^ ".join(self.generators[k].name for k in bits(mask))

    def conj_mask(self, mask: int) -> tuple[int, int]:
        if self.conj is None:
            raise PresentationError("presentation has no conjugation")
        img = [self.conj[k] for k in bits(mask)]
        m = 0
        for k in img:
            m |= 1 << k
        return sort_sign(img), m

    def volume_sign(self) -> int:
        """Sign relating the declared volume ordering to the sorted monomial."""
        return sort_sign(self.volume_order)


def _basis_key(pres: Presentation, mask: int) -> tuple:
    return (mask.bit_count(), tuple(bits(mask)))


class Algebra:
    """Subalgebra of the exterior algebra spanned by a set of monomials."""

    def __init__(self, presentation: Presentation, monomials: Iterable[int] | None = None, name: str = ""):
        self.presentation = presentation
        self.name = name or presentation.name
        if monomials is None:
            monomials = range(1 << presentation.n)
        self.basis: tuple[int, ...] = tuple(sorted(set(monomials), key=lambda m: _basis_key(presentation, m)))
        self.position = {m: k for k, m in enumerate(self.basis)}
        self._table: dict[tuple[int, int], tuple[int, int]] = {}
        if 0 not in self.position:
            raise ClosureError("subalgebra must contain the unit")
        for a in self.basis:
            for b in self.basis:
                s = wedge_sign(a, b)
                if s and (a | b) not in self.position:
                    raise ClosureError(
                        f"product of {presentation.monomial_str(a)} and {presentation.monomial_str(b)} leaves the span"
                    )

    @property
    def dim(self) -> int:
        return len(self.basis)

    def bidegrees(self) -> list[tuple[int, int]]:
        return [self.presentation.bidegree(m) for m in self.basis]

    def degrees(self) -> list[int]:
        return [m.bit_count() for m in self.basis]

    def label(self, k: int) -> str:
        return self.presentation.monomial_str(self.basis[k])

    def mul_basis(self, i: int, j: int) -> tuple[int, int]:
        """(sign, index) of basis_i * basis_j; sign 0 if the product vanishes."""
        key = (i, j)
        hit = self._table.get(key)
        if hit is None:
            a, b = self.basis[i], self.basis[j]
            s = wedge_sign(a, b)
            hit = (s, self.position[a | b]) if s else (0, -1)
            self._table[key] = hit
        return hit

    def gen(self, name: str) -> "Element":
        return self.mono(name)

    def mono(self, *names: str) -> "Element":
        s, m = self.presentation.mask(names)
        if not s:
            return Element(self, {})
        return Element(self, {m: sc(s)})

    def one(self) -> "Element":
        return Element(self, {0: ONE})

    def zero(self) -> "Element":
        return Element(self, {})

    def basis_element(self, k: int) -> "Element":
        return Element(self, {self.basis[k]: ONE})

    def from_vector(self, vec: Sequence[Number]) -> "Element":
        return Element(self, {self.basis[k]: sc(v) for k, v in enumerate(vec) if v})

    def from_sparse(self, vec: Mapping[int, Scalar]) -> "Element":
        return Element(self, {self.basis[k]: v for k, v in vec.items() if v})

    def block_indices(self, key) -> dict:
        """Group basis indices by ``key(mask)``."""
        out: dict = {}
        for k, m in enumerate(self.basis):
            out.setdefault(key(m), []).append(k)
        return out

    def __repr__(self) -> str:
        return f"Algebra({self.name or '?'}, dim={self.dim})"


class Element:
    """A linear combination of monomials of a presentation."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Algebra, terms: Mapping[int, Scalar]):
        self.alg = alg
        self.terms = {m: c for m, c in terms.items() if c}

    def _other(self, other: "Element") -> "Element":
        if not isinstance(other, Element):
            raise TypeError("expected an Element")
        if other.alg.presentation is not self.alg.presentation:
            raise PresentationError("elements come from different presentations")
        return other

    def __add__(self, other: "Element") -> "Element":
        other = self._other(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t[m] + c if m in t else c
        return Element(self.alg, t)

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def __neg__(self) -> "Element":
        return Element(self.alg, {m: -c for m, c in self.terms.items()})

    def scale(self, c: Number) -> "Element":
        c = sc(c)
        return Element(self.alg, {m: c * v for m, v in self.terms.items()})

    def __rmul__(self, c: Number) -> "Element":
        return self.scale(c)

    def __mul__(self, other: "Element | Number") -> "Element":
        if not isinstance(other, Element):
            return self.scale(other)
        return wedge(self, other)

    __xor__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.alg.presentation is other.alg.presentation and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.terms.items(), key=lambda t: t[0])))

    def is_zero(self) -> bool:
        return not self.terms

    def in_algebra(self, alg: Algebra | None = None) -> bool:
        alg = alg or self.alg
        return all(m in alg.position for m in self.terms)

    def to_vector(self, alg: Algebra | None = None) -> list[Scalar]:
        alg = alg or self.alg
        v = [ZERO] * alg.dim
        for m, c in self.terms.items():
            if m not in alg.position:
                raise ClosureError(f"{alg.presentation.monomial_str(m)} is not in the basis of {alg.name}")
            v[alg.position[m]] = c
        return v

    def bidegree_components(self) -> dict[tuple[int, int], "Element"]:
        out: dict[tuple[int, int], dict[int, Scalar]] = {}
        for m, c in self.terms.items():
            out.setdefault(self.alg.presentation.bidegree(m), {})[m] = c
        return {k: Element(self.alg, v) for k, v in sorted(out.items())}

    def bidegree(self) -> tuple[int, int] | None:
        comps = self.bidegree_components()
        if len(comps) != 1:
            return None
        return next(iter(comps))

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return f"Element({self})"


def wedge(x: Element, y: Element) -> Element:
    x._other(y)
    t: dict[int, Scalar] = {}
    for a, ca in x.terms.items():
        for b, cb in y.terms.items():
            s = wedge_sign(a, b)
            if not s:
                continue
            v = ca * cb if s > 0 else -(ca * cb)
            m = a | b
            t[m] = t[m] + v if m in t else v
    return Element(x.alg, t)


def format_element(x: Element) -> str:
    """Render in the input grammar, e.g. ``i * a ^ abar - 1/2 * b``."""
    if not x.terms:
        return "0"
    pres = x.alg.presentation
    order = sorted(x.terms, key=lambda m: _basis_key(pres, m))
    parts = []
    for n, m in enumerate(order):
        c = x.terms[m]
        neg = (not c.im and c.re < 0) or (not c.re and c.im < 0)
        mag = -c if neg else c
        if mag.re and mag.im:
            coeff = f"({format_scalar(mag)})"
        else:
            coeff = format_scalar(mag)
        mono = pres.monomial_str(m)
        if mono == "1":
            body = coeff
        elif mag == ONE:
            body = mono
        else:
            body = f"{coeff} * {mono}"
        if n == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


def conjugate(x: Element) -> Element:
    """Antilinear conjugation induced by the generator pairing."""
    pres = x.alg.presentation
    t: dict[int, Scalar] = {}
    for m, c in x.terms.items():
        s, m2 = pres.conj_mask(m)
        t[m2] = c.conjugate() if s > 0 else -c.conjugate()
    return Element(x.alg, t)


@dataclass
class Derivation:
    """Graded derivation fixed by its values on generators."""

    name: str
    bidegree: tuple[int, int]
    images: dict[int, Element] = field(default_factory=dict)

    @property
    def parity(self) -> int:
        return (self.bidegree[0] + self.bidegree[1]) & 1

    def check_grading(self, pres: Presentation) -> None:
        r, s = self.bidegree
        for k, img in self.images.items():
            g = pres.generators[k]
            for m in img.terms:
                if pres.bidegree(m) != (g.p + r, g.q + s):
                    raise GradingError(
                        f"{self.name}({g.name}) has a term {pres.monomial_str(m)} outside bidegree {(g.p + r, g.q + s)}"
                    )

    def apply_mask(self, alg: Algebra, mask: int) -> dict[int, Scalar]:
        """Leibniz extension on a single monomial, returned as mask -> coefficient."""
        out: dict[int, Scalar] = {}
        idx = bits(mask)
        for j, k in enumerate(idx):
            img = self.images.get(k)
            if img is None or img.is_zero():
                continue
            before = 0
            for t in idx[:j]:
                before |= 1 << t
            after = 0
            for t in idx[j + 1:]:
                after |= 1 << t
            sgn = -1 if (self.parity and j & 1) else 1
            for m, c in img.terms.items():
                s1 = wedge_sign(before, m)
                if not s1:
                    continue
                s2 = wedge_sign(before | m, after)
                if not s2:
                    continue
                v = c if sgn * s1 * s2 > 0 else -c
                key = before | m | after
                out[key] = out[key] + v if key in out else v
        return {m: c for m, c in out.items() if c}

    def __call__(self, x: Element) -> Element:
        t: dict[int, Scalar] = {}
        for m, c in x.terms.items():
            for m2, v in self.apply_mask(x.alg, m).items():
                w = c * v
                t[m2] = t[m2] + w if m2 in t else w
        return Element(x.alg, t)


def derivation_from_images(pres: Presentation, name: str, bidegree: tuple[int, int], images: Mapping[str, Element]) -> Derivation:
    d = Derivation(name, bidegree, {pres.index(k): v for k, v in images.items() if not v.is_zero()})
    d.check_grading(pres)
    return d


class Operator:
    """Linear endomorphism of an algebra, as a matrix on its basis."""

    __slots__ = ("alg", "matrix", "name", "_cols")

    def __init__(self, alg: Algebra, matrix: Matrix, name: str = ""):
        if matrix.shape != (alg.dim, alg.dim):
            raise ValueError(f"operator matrix {matrix.shape} does not fit algebra of dimension {alg.dim}")
        self.alg = alg
        self.matrix = matrix
        self.name = name
        self._cols: list[dict[int, Scalar]] | None = None

    @classmethod
    def zero(cls, alg: Algebra, name: str = "0") -> "Operator":
        return cls(alg, Matrix.zeros(alg.dim, alg.dim), name)

    @classmethod
    def identity(cls, alg: Algebra) -> "Operator":
        return cls(alg, Matrix.identity(alg.dim), "id")

    def _wrap(self, m: Matrix, name: str) -> "Operator":
        return Operator(self.alg, m, name)

    def __add__(self, other: "Operator") -> "Operator":
        return self._wrap(self.matrix + other.matrix, f"({self.name} + {other.name})")

    def __sub__(self, other: "Operator") -> "Operator":
        return self._wrap(self.matrix - other.matrix, f"({self.name} - {other.name})")

    def __neg__(self) -> "Operator":
        return self._wrap(-self.matrix, f"-{self.name}")

    def __rmul__(self, c: Number) -> "Operator":
        return self._wrap(self.matrix.scale(c), f"{format_scalar(sc(c))}*{self.name}")

    def __matmul__(self, other: "Operator") -> "Operator":
        return self._wrap(self.matrix @ other.matrix, f"{self.name}{other.name}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Operator):
            return NotImplemented
        return self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    def adjoint(self) -> "Operator":
        """Conjugate transpose: the monomial basis is orthonormal."""
        return self._wrap(self.matrix.H(), f"adj({self.name})")

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def columns_sparse(self) -> list[dict[int, Scalar]]:
        if self._cols is None:
            self._cols = [self.matrix.sparse_column(j) for j in range(self.matrix.cols)]
        return self._cols

    def apply_index(self, j: int) -> dict[int, Scalar]:
        return self.columns_sparse()[j]

    def apply_sparse(self, vec: Mapping[int, Scalar]) -> dict[int, Scalar]:
        cols = self.columns_sparse()
        out: dict[int, Scalar] = {}
        for j, c in vec.items():
            for i, v in cols[j].items():
                w = c * v
                out[i] = out[i] + w if i in out else w
        return {i: v for i, v in out.items() if v}

    def __call__(self, x: Element) -> Element:
        vec = {self.alg.position[m]: c for m, c in x.terms.items()} if x.in_algebra(self.alg) else None
        if vec is None:
            raise ClosureError("element is not in the operator's algebra")
        return self.alg.from_sparse(self.apply_sparse(vec))

    def components(self) -> dict[tuple[int, int], int]:
        """Bidegree shifts occurring in the matrix, with entry counts."""
        bd = self.alg.bidegrees()
        out: dict[tuple[int, int], int] = {}
        for i, row in enumerate(self.matrix.entries):
            for j, v in enumerate(row):
                if v:
                    key = (bd[i][0] - bd[j][0], bd[i][1] - bd[j][1])
                    out[key] = out.get(key, 0) + 1
        return dict(sorted(out.items()))

    def bidegree(self) -> tuple[int, int] | None:
        """The unique bidegree shift, or None if zero or not bihomogeneous."""
        comps = self.components()
        return next(iter(comps)) if len(comps) == 1 else None

    def is_bihomogeneous(self) -> bool:
        return len(self.components()) <= 1

    def __repr__(self) -> str:
        return f"Operator({self.name or '?'} on {self.alg.name})"


def operator_matrix(alg: Algebra, D: Derivation) -> Matrix:
    cols = []
    for m in alg.basis:
        img = D.apply_mask(alg, m)
        col = {}
        for m2, c in img.items():
            if m2 not in alg.position:
                raise ClosureError(f"{D.name} maps {alg.presentation.monomial_str(m)} outside {alg.name}")
            col[alg.position[m2]] = c
        cols.append(col)
    return Matrix.from_sparse_columns(cols, alg.dim)


def derivation_operator(alg: Algebra, D: Derivation) -> Operator:
    return Operator(alg, operator_matrix(alg, D), D.name)


def conjugation_matrix_signs(alg: Algebra) -> list[tuple[int, int]]:
    """For each basis index j: (sign, index of conj(basis_j))."""
    pres = alg.presentation
    out = []
    for m in alg.basis:
        s, m2 = pres.conj_mask(m)
        if m2 not in alg.position:
            raise ClosureError("algebra is not closed under conjugation")
        out.append((s, alg.position[m2]))
    return out


def conjugate_operator(op: Operator) -> Operator:
    """The operator x -> conj(op(conj x))."""
    alg = op.alg
    cs = conjugation_matrix_signs(alg)
    n = alg.dim
    rows = [[ZERO] * n for _ in range(n)]
    for j in range(n):
        sj, jj = cs[j]
        for i, v in op.apply_index(jj).items():
            si, ii = cs[i]
            w = v.conjugate()
            rows[ii][j] = w if sj * si > 0 else -w
    return Operator(alg, Matrix(rows, n), f"conj({op.name})")


def _first_failures(mat: Matrix, alg: Algebra, limit: int = 3) -> list[str]:
    out = []
    for j in range(mat.cols):
        col = mat.sparse_column(j)
        if col:
            out.append(f"{alg.label(j)} -> {format_element(alg.from_sparse(col))}")
            if len(out) == limit:
                break
    return out


def check_square_zero(op: Operator) -> dict:
    sq = (op @ op).matrix
    return {"ok": sq.is_zero(), "failures": _first_failures(sq, op.alg)}


def check_anticommute(a: Operator, b: Operator) -> dict:
    s = (a @ b + b @ a).matrix
    return {"ok": s.is_zero(), "failures": _first_failures(s, a.alg)}


def check_leibniz(op: Operator, parity: int | None = None) -> dict:
    """op(xy) = op(x) y + (-1)^{|op||x|} x op(y) on all basis pairs."""
    alg = op.alg
    if parity is None:
        comps = op.components()
        pars = {(r + s) & 1 for r, s in comps}
        parity = pars.pop() if len(pars) == 1 else 1
    degs = alg.degrees()
    failures = []
    for i in range(alg.dim):
        for j in range(alg.dim):
            lhs: dict[int, Scalar] = {}
            s, k = alg.mul_basis(i, j)
            if s:
                lhs = {t: (v if s > 0 else -v) for t, v in op.apply_index(k).items()}
            rhs = _add(
                _mul_sparse(alg, op.apply_index(i), {j: ONE}),
                _mul_sparse(alg, {i: ONE}, op.apply_index(j)),
                -1 if (parity and degs[i] & 1) else 1,
            )
            if _sub(lhs, rhs):
                failures.append(f"({alg.label(i)}, {alg.label(j)})")
                if len(failures) >= 3:
                    return {"ok": False, "failures": failures}
    return {"ok": not failures, "failures": failures}


def _add(x: Mapping[int, Scalar], y: Mapping[int, Scalar], sign: int = 1) -> dict[int, Scalar]:
    out = dict(x)
    for k, v in y.items():
        w = v if sign > 0 else -v
        out[k] = out[k] + w if k in out else w
    return {k: v for k, v in out.items() if v}


def _sub(x: Mapping[int, Scalar], y: Mapping[int, Scalar]) -> dict[int, Scalar]:
    return _add(x, y, -1)


def _mul_sparse(alg: Algebra, x: Mapping[int, Scalar], y: Mapping[int, Scalar]) -> dict[int, Scalar]:
    out: dict[int, Scalar] = {}
    for i, a in x.items():
        for j, b in y.items():
            s, k = alg.mul_basis(i, j)
            if not s:
                continue
            w = a * b if s > 0 else -(a * b)
            out[k] = out[k] + w if k in out else w
    return {k: v for k, v in out.items() if v}


# public aliases for sparse-vector arithmetic on basis coordinates
sparse_add = _add
sparse_sub = _sub
sparse_mul = _mul_sparse


def sparse_scale(x: Mapping[int, Scalar], c: Number) -> dict[int, Scalar]:
    c = sc(c)
    if not c:
        return {}
    return {k: c * v for k, v in x.items()}
