"""Trivializations phi_n of Delta, the exponential identity, and hypercommutative operations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

from .cdga import (
    Algebra,
    Element,
    GradingError,
    Operator,
    sparse_add,
    sparse_mul,
    sparse_scale,
)
from .exactlin import (
    ONE,
    ZERO,
    InconsistentSystemError,
    Matrix,
    Scalar,
    rref,
)
from .hodge import TransferDiagram

Sparse = dict[int, Scalar]


class HomogeneityError(ValueError):
    pass


class UnsupportedArity(ValueError):
    pass


def _power(m: Matrix, k: int) -> Matrix:
    out = Matrix.identity(m.rows)
    for _ in range(k):
        out = out @ m
    return out


def phi_n(T: TransferDiagram, delta: Operator, n: int) -> Operator:
    """(h D)^n / n - n * sum_{l=1..n} (h D)^(l-1) iota rho (D h)^(n-l+1) / l."""
    if n < 1:
        raise ValueError("phi_n is defined for n >= 1")
    hD = T.h.matrix @ delta.matrix
    Dh = delta.matrix @ T.h.matrix
    proj = T.iota @ T.rho
    out = _power(hD, n).scale(Fraction(1, n))
    for l in range(1, n + 1):
        term = _power(hD, l - 1) @ proj @ _power(Dh, n - l + 1)
        out = out - term.scale(Fraction(n, l))
    return Operator(T.alg, out, f"phi_{n}")


def default_order(alg: Algebra) -> int:
    """Top total degree: phi_n lowers degree by 2n, so higher terms vanish."""
    return max(alg.degrees(), default=0)


@dataclass
class Trivialization:
    T: TransferDiagram
    delta: Operator
    phis: list[Operator]

    @property
    def order(self) -> int:
        return len(self.phis)

    def phi(self, n: int) -> Operator:
        if 1 <= n <= len(self.phis):
            return self.phis[n - 1]
        return Operator.zero(self.T.alg, f"phi_{n}")

    def with_phi1(self, phi1: Operator) -> "Trivialization":
        return Trivialization(self.T, self.delta, [phi1, *self.phis[1:]])


def trivialize(T: TransferDiagram, delta: Operator, order: int | None = None) -> Trivialization:
    if order is None:
        order = default_order(T.alg)
    return Trivialization(T, delta, [phi_n(T, delta, n) for n in range(1, order + 1)])


def exp_coefficients(phis: Sequence[Matrix], N: int, size: int) -> list[Matrix]:
    """Coefficients E_0..E_N of exp(sum_n phi_n z^n), as a truncated power series."""
    phi_series = [Matrix.zeros(size, size)] + [phis[n - 1] if n <= len(phis) else Matrix.zeros(size, size) for n in range(1, N + 1)]
    total = [Matrix.identity(size)] + [Matrix.zeros(size, size) for _ in range(N)]
    power = [Matrix.identity(size)] + [Matrix.zeros(size, size) for _ in range(N)]
    fact = 1
    for k in range(1, N + 1):
        nxt = [Matrix.zeros(size, size) for _ in range(N + 1)]
        for a in range(N + 1):
            if power[a].is_zero():
                continue
            for b in range(1, N + 1 - a):
                if not phi_series[b].is_zero():
                    nxt[a + b] = nxt[a + b] + power[a] @ phi_series[b]
        power = nxt
        fact *= k
        for j in range(N + 1):
            if not power[j].is_zero():
                total[j] = total[j] + power[j].scale(Fraction(1, fact))
    return total


def verify_exp(T: TransferDiagram, delta: Operator, phis: Sequence[Operator], N: int) -> dict:
    """Check d E - E (d + D z) = 0 coefficientwise through z^N, E = exp(phi(z)).

    Operators compose right to left, so ``E (d + D z)`` applies d + D z first.
    """
    n = T.alg.dim
    d, D = T.d.matrix, delta.matrix
    E = exp_coefficients([p.matrix for p in phis], N, n)
    orders = []
    for k in range(N + 1):
        res = d @ E[k] - E[k] @ d
        if k >= 1:
            res = res - E[k - 1] @ D
        orders.append(res.is_zero())
    failing = [k for k, ok in enumerate(orders) if not ok]
    return {"ok": not failing, "N": N, "orders": orders, "first_failure": failing[0] if failing else None}


ThetaFn = Callable[["HycomOps", Sequence[Sparse]], Sparse]
_THETA_REGISTRY: dict[int, ThetaFn] = {}


def register_theta(arity: int, fn: ThetaFn | None) -> None:
    """Install (or with ``None`` remove) a user-supplied arity-n operation.

    ``fn(ops, xs)`` receives the HycomOps and n sparse cochains and returns a
    sparse cochain; it is expected to be built from ops.mul, ops.phi and the
    transfer maps.  Arity 2 and 3 are built in and cannot be overridden.
    """
    if arity in (2, 3):
        raise ValueError("arity 2 and 3 are built in")
    if arity < 2:
        raise UnsupportedArity(f"arity {arity} is not an operation arity")
    if fn is None:
        _THETA_REGISTRY.pop(arity, None)
    else:
        _THETA_REGISTRY[arity] = fn


@dataclass
class HycomOps:
    """Cochain-level m2 (product) and m3 (theta3 built from phi_1), and their transfer to H."""

    triv: Trivialization
    _m3_cache: dict[tuple[int, int, int], Sparse] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.alg = self.triv.T.alg
        self.T = self.triv.T
        self.parities = [d & 1 for d in self.alg.degrees()]
        self._phi1 = self.triv.phi(1)

    # -- cochain level --------------------------------------------------
    def mul(self, x: Sparse, y: Sparse) -> Sparse:
        return sparse_mul(self.alg, x, y)

    def phi(self, n: int, x: Sparse) -> Sparse:
        return self.triv.phi(n).apply_sparse(x)

    def parity(self, x: Sparse) -> int:
        ps = {self.parities[k] for k in x}
        if len(ps) > 1:
            raise HomogeneityError("input mixes even and odd degrees")
        return ps.pop() if ps else 0

    def m2(self, x: Sparse, y: Sparse) -> Sparse:
        return self.mul(x, y)

    def theta3(self, x: Sparse, y: Sparse, z: Sparse) -> Sparse:
        """phi(xyz) + phi(x)yz + x phi(y) z + xy phi(z) - phi(xy) z - (-1)^{|y||z|} phi(xz) y - x phi(yz)."""
        py, pz = self.parity(y), self.parity(z)
        self.parity(x)
        f = self._phi1.apply_sparse
        mul = self.mul
        xy = mul(x, y)
        out = f(mul(xy, z))
        out = sparse_add(out, mul(mul(f(x), y), z))
        out = sparse_add(out, mul(mul(x, f(y)), z))
        out = sparse_add(out, mul(xy, f(z)))
        out = sparse_add(out, mul(f(xy), z), -1)
        out = sparse_add(out, mul(f(mul(x, z)), y), 1 if (py and pz) else -1)
        out = sparse_add(out, mul(x, f(mul(y, z))), -1)
        return out

    def m3_basis(self, i: int, j: int, k: int) -> Sparse:
        key = (i, j, k)
        hit = self._m3_cache.get(key)
        if hit is None:
            hit = self.theta3({i: ONE}, {j: ONE}, {k: ONE})
            self._m3_cache[key] = hit
        return hit

    def m3(self, x: Sparse, y: Sparse, z: Sparse) -> Sparse:
        out: Sparse = {}
        for i, a in x.items():
            for j, b in y.items():
                ab = a * b
                for k, c in z.items():
                    out = sparse_add(out, sparse_scale(self.m3_basis(i, j, k), ab * c))
        return out

    def operation(self, arity: int, xs: Sequence[Sparse]) -> Sparse:
        if len(xs) != arity:
            raise ValueError(f"expected {arity} inputs, got {len(xs)}")
        if arity == 2:
            return self.m2(*xs)
        if arity == 3:
            return self.m3(*xs)
        fn = _THETA_REGISTRY.get(arity)
        if fn is None:
            raise UnsupportedArity(f"no arity-{arity} operation is registered")
        return fn(self, xs)

    # -- cohomology level -----------------------------------------------
    def lift(self, cls: Sequence[Scalar]) -> Sparse:
        return {k: v for k, v in enumerate(self.T.iota.apply(cls)) if v}

    def project(self, x: Sparse) -> tuple[Scalar, ...]:
        vec = [ZERO] * self.alg.dim
        for k, v in x.items():
            vec[k] = v
        return self.T.rho.apply(vec)

    def on_cohomology(self, arity: int, classes: Sequence[Sequence[Scalar]]) -> tuple[Scalar, ...]:
        return self.project(self.operation(arity, [self.lift(c) for c in classes]))

    def class_parity(self, k: int) -> int:
        return self.parity(self.lift(unit_class(self.T, k)))

    def mu3(self, x: Sequence[Scalar], y: Sequence[Scalar], z: Sequence[Scalar]) -> tuple[Scalar, ...]:
        """Transferred C-infinity triple product rho(h(ix iy) iz + (-1)^|x| ix h(iy iz))."""
        ix, iy, iz = self.lift(x), self.lift(y), self.lift(z)
        h = self.T.h.apply_sparse
        first = self.mul(h(self.mul(ix, iy)), iz)
        second = self.mul(ix, h(self.mul(iy, iz)))
        return self.project(sparse_add(first, second, -1 if self.parity(ix) else 1))


def unit_class(T: TransferDiagram, k: int) -> tuple[Scalar, ...]:
    return tuple(ONE if j == k else ZERO for j in range(T.rank))


def build_ops(T: TransferDiagram, delta: Operator, order: int | None = None) -> HycomOps:
    return HycomOps(trivialize(T, delta, order))


def _sparse(x: Element) -> Sparse:
    alg = x.alg
    return {alg.position[m]: c for m, c in x.terms.items()}


def theta3(ops: HycomOps, x: Element, y: Element, z: Element) -> Element:
    for e in (x, y, z):
        if e.terms and len({e.alg.presentation.degree(m) for m in e.terms}) > 1:
            raise HomogeneityError(f"inhomogeneous input {e}")
    return ops.alg.from_sparse(ops.theta3(_sparse(x), _sparse(y), _sparse(z)))


def class_of(T: TransferDiagram, x: Element) -> tuple[Scalar, ...]:
    """Coordinates of the class of a d-closed element in the transfer basis."""
    vec = x.to_vector(T.alg)
    if any(T.d.matrix.apply(vec)):
        raise ValueError(f"{x} is not closed")
    return T.rho.apply(vec)


def m_on_cohomology(ops: HycomOps, arity: int, classes: Sequence[Sequence[Scalar]]) -> tuple[Scalar, ...]:
    return ops.on_cohomology(arity, classes)


def c_infinity_mu3(ops: HycomOps, x, y, z) -> tuple[Scalar, ...]:
    return ops.mu3(x, y, z)


def cup_product_oracle(T: TransferDiagram, x: Sequence[Scalar], y: Sequence[Scalar]) -> tuple[Scalar, ...]:
    """Class of ix * iy, found by solving ix iy = iota c + d w (independent of rho)."""
    alg = T.alg
    ix = {k: v for k, v in enumerate(T.iota.apply(x)) if v}
    iy = {k: v for k, v in enumerate(T.iota.apply(y)) if v}
    prod = sparse_mul(alg, ix, iy)
    rhs = [prod.get(k, ZERO) for k in range(alg.dim)]
    if not T.rank:
        return ()
    system = T.iota.hstack(T.d.matrix)
    red, piv = rref(system.hstack(Matrix.from_columns([rhs], rows=alg.dim)))
    if system.cols in piv:
        raise InconsistentSystemError("product of cocycles is not closed")
    coords = [ZERO] * T.rank
    for r, p in enumerate(piv):
        if p < T.rank:
            coords[p] = red.entries[r][system.cols]
    return tuple(coords)


def _tensor_basis(n: int, arity: int):
    return product(range(n), repeat=arity)


def check_generalized_associativity(ops: HycomOps, level: str = "cochain", limit: int = 3) -> dict:
    """n = 0 and n = 1 instances of generalized associativity on all basis tuples.

    n = 1: m3(ab,c,x) + (-1)^{|c||x|} m3(a,b,x) c = m3(a,bc,x) + a m3(b,c,x).
    """
    if level == "cochain":
        n = ops.alg.dim
        unit = [{k: ONE} for k in range(n)]
        m2 = ops.m2
        m3 = ops.m3
        par = ops.parities
    elif level == "cohomology":
        n = ops.T.rank
        unit = [dict(enumerate(unit_class(ops.T, k))) for k in range(n)]
        unit = [{k: v for k, v in u.items() if v} for u in unit]

        def _vec(x: Sparse) -> tuple[Scalar, ...]:
            return tuple(x.get(k, ZERO) for k in range(n))

        def m2(x: Sparse, y: Sparse) -> Sparse:
            r = ops.on_cohomology(2, [_vec(x), _vec(y)])
            return {k: v for k, v in enumerate(r) if v}

        def m3(x: Sparse, y: Sparse, z: Sparse) -> Sparse:
            r = ops.on_cohomology(3, [_vec(x), _vec(y), _vec(z)])
            return {k: v for k, v in enumerate(r) if v}

        par = [ops.class_parity(k) for k in range(n)]
    else:
        raise ValueError("level must be 'cochain' or 'cohomology'")
    fails0: list[tuple[int, ...]] = []
    fails1: list[tuple[int, ...]] = []
    prod_cache: dict[tuple[int, int], Sparse] = {}

    def p2(i: int, j: int) -> Sparse:
        key = (i, j)
        if key not in prod_cache:
            prod_cache[key] = m2(unit[i], unit[j])
        return prod_cache[key]

    count0 = count1 = 0
    for a, b, c in _tensor_basis(n, 3):
        count0 += 1
        if sparse_add(m2(p2(a, b), unit[c]), m2(unit[a], p2(b, c)), -1):
            fails0.append((a, b, c))
    m3_cache: dict[tuple[int, int, int], Sparse] = {}

    def t3(i: int, j: int, k: int) -> Sparse:
        key = (i, j, k)
        if key not in m3_cache:
            m3_cache[key] = m3(unit[i], unit[j], unit[k])
        return m3_cache[key]

    def m3_lin(x: Sparse, j: int, k: int, slot: int) -> Sparse:
        out: Sparse = {}
        for i, v in x.items():
            val = t3(i, j, k) if slot == 0 else t3(j, i, k)
            out = sparse_add(out, sparse_scale(val, v))
        return out

    for a, b, c, x in _tensor_basis(n, 4):
        count1 += 1
        lhs = m3_lin(p2(a, b), c, x, 0)
        lhs = sparse_add(lhs, m2(t3(a, b, x), unit[c]), -1 if par[c] * par[x] else 1)
        rhs = m3_lin(p2(b, c), a, x, 1)
        rhs = sparse_add(rhs, m2(unit[a], t3(b, c, x)))
        if sparse_add(lhs, rhs, -1):
            fails1.append((a, b, c, x))
    return {
        "level": level,
        "n0": {"ok": not fails0, "tuples": count0, "failures": len(fails0), "examples": fails0[:limit]},
        "n1": {"ok": not fails1, "tuples": count1, "failures": len(fails1), "examples": fails1[:limit]},
        "ok": not fails0 and not fails1,
    }


def operation_bidegree(op) -> tuple[int, int] | None:
    """Bidegree shift of an Operator, or of a multilinear cochain map given as (alg, fn, arity).

    Returns None for the zero operation, which has every bidegree.
    """
    if isinstance(op, Operator):
        shifts = set(op.components())
    else:
        alg, fn, arity = op
        shifts = set()
        bd = alg.bidegrees()
        for idx in _tensor_basis(alg.dim, arity):
            out = fn(*[{k: ONE} for k in idx])
            p0 = sum(bd[k][0] for k in idx)
            q0 = sum(bd[k][1] for k in idx)
            for t in out:
                shifts.add((bd[t][0] - p0, bd[t][1] - q0))
    if not shifts:
        return None
    if len(shifts) != 1:
        raise GradingError(f"operation is not bidegree-homogeneous: shifts {sorted(shifts)}")
    return shifts.pop()


def m3_bidegree(ops: HycomOps) -> tuple[int, int] | None:
    try:
        return operation_bidegree((ops.alg, ops.m3, 3))
    except GradingError:
        return None


def nonzero_m3_table(ops: HycomOps) -> list[tuple[tuple[int, int, int], tuple[Scalar, ...]]]:
    """All nonzero m3 values on ordered cohomology basis triples i <= j <= k."""
    out = []
    r = ops.T.rank
    for i in range(r):
        for j in range(i, r):
            for k in range(j, r):
                v = ops.on_cohomology(3, [unit_class(ops.T, i), unit_class(ops.T, j), unit_class(ops.T, k)])
                if any(v):
                    out.append(((i, j, k), v))
    return out


__all__ = [
    "HomogeneityError",
    "HycomOps",
    "Trivialization",
    "UnsupportedArity",
    "build_ops",
    "c_infinity_mu3",
    "check_generalized_associativity",
    "class_of",
    "cup_product_oracle",
    "default_order",
    "exp_coefficients",
    "m3_bidegree",
    "m_on_cohomology",
    "nonzero_m3_table",
    "operation_bidegree",
    "phi_n",
    "register_theta",
    "theta3",
    "trivialize",
    "unit_class",
    "verify_exp",
]
