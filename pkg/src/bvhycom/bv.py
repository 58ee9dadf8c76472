"""BV structures: bracket, axiom checks, the dDelta-condition and its four cohomologies."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product

from .cdga import (
    Algebra,
    GradingError,
    Operator,
    check_anticommute,
    check_leibniz,
    check_square_zero,
    format_element,
    sparse_add,
    sparse_mul,
)
from .exactlin import (
    ONE,
    ZERO,
    Matrix,
    Scalar,
    Subspace,
    image,
    intersect,
    inverse,
    kernel,
    orthogonal_complement,
    subspace_sum,
)
from .hodge import TransferDiagram, verify_side_conditions, verify_transfer

GRADINGS = ((1, 1), (-1, 1), (1, -1))


class DecompositionError(ValueError):
    pass


def detect_grading(d: Operator, delta: Operator) -> tuple[int, int]:
    """(alpha, beta) making alpha*p + beta*q raise by 1 under d and drop by 1 under delta."""
    dc, lc = d.components(), delta.components()
    for a, b in GRADINGS:
        if all(a * r + b * s == 1 for r, s in dc) and all(a * r + b * s == -1 for r, s in lc):
            return (a, b)
    raise GradingError(f"no grading makes d of degree +1 and delta of degree -1 (d: {list(dc)}, delta: {list(lc)})")


@dataclass
class BVAlgebra:
    alg: Algebra
    d: Operator
    delta: Operator
    name: str = ""
    grading: tuple[int, int] = field(default=(0, 0))

    def __post_init__(self) -> None:
        if self.grading == (0, 0):
            self.grading = detect_grading(self.d, self.delta)
        a, b = self.grading
        self.degrees = [a * p + b * q for p, q in self.alg.bidegrees()]
        self.parities = [(p + q) & 1 for p, q in self.alg.bidegrees()]
        self._dprod: dict[tuple[int, int], dict[int, Scalar]] = {}
        self._br: dict[tuple[int, int], dict[int, Scalar]] = {}

    def mul(self, x: dict[int, Scalar], y: dict[int, Scalar]) -> dict[int, Scalar]:
        return sparse_mul(self.alg, x, y)

    def delta_of_product(self, i: int, j: int) -> dict[int, Scalar]:
        key = (i, j)
        hit = self._dprod.get(key)
        if hit is None:
            s, k = self.alg.mul_basis(i, j)
            if not s:
                hit = {}
            else:
                col = self.delta.apply_index(k)
                hit = col if s > 0 else {t: -v for t, v in col.items()}
            self._dprod[key] = hit
        return hit

    def bracket_basis(self, i: int, j: int) -> dict[int, Scalar]:
        """[x,y] = (-1)^|x| (D(xy) - D(x)y - (-1)^|x| x D(y)) on basis elements."""
        key = (i, j)
        hit = self._br.get(key)
        if hit is None:
            px = self.parities[i]
            dx = self.delta.apply_index(i)
            dy = self.delta.apply_index(j)
            r = sparse_add(self.delta_of_product(i, j), self.mul(dx, {j: ONE}), -1)
            r = sparse_add(r, self.mul({i: ONE}, dy), 1 if px else -1)
            hit = {t: -v for t, v in r.items()} if px else r
            self._br[key] = hit
        return hit

    def bracket(self, x: dict[int, Scalar], y: dict[int, Scalar]) -> dict[int, Scalar]:
        out: dict[int, Scalar] = {}
        for i, a in x.items():
            for j, b in y.items():
                for t, v in self.bracket_basis(i, j).items():
                    w = a * b * v
                    out[t] = out[t] + w if t in out else w
        return {t: v for t, v in out.items() if v}

    def label(self, k: int) -> str:
        return self.alg.label(k)


def bracket(B: BVAlgebra, x, y):
    """Bracket of two elements of B.alg."""
    vx = {B.alg.position[m]: c for m, c in x.terms.items()}
    vy = {B.alg.position[m]: c for m, c in y.terms.items()}
    return B.alg.from_sparse(B.bracket(vx, vy))


def _triples(n: int, exhaustive: bool):
    if exhaustive:
        return product(range(n), repeat=3)
    return combinations_with_replacement(range(n), 3)


def seven_term_residual(B: BVAlgebra, i: int, j: int, k: int) -> dict[int, Scalar]:
    px, py = B.parities[i], B.parities[j]
    x, y, z = {i: ONE}, {j: ONE}, {k: ONE}
    mul = B.mul
    dl = B.delta.apply_index
    xyz = mul(mul(x, y), z)
    lhs = B.delta.apply_sparse(xyz)
    rhs = mul(B.delta_of_product(i, j), z)
    rhs = sparse_add(rhs, mul(x, B.delta_of_product(j, k)), -1 if px else 1)
    rhs = sparse_add(rhs, mul(y, B.delta_of_product(i, k)), -1 if ((px + 1) * py) & 1 else 1)
    rhs = sparse_add(rhs, mul(mul(dl(i), y), z), -1)
    rhs = sparse_add(rhs, mul(mul(x, dl(j)), z), 1 if px else -1)
    rhs = sparse_add(rhs, mul(mul(x, y), dl(k)), 1 if (px + py) & 1 else -1)
    return sparse_add(lhs, rhs, -1)


def bracket_derivation_residual(B: BVAlgebra, i: int, j: int, k: int) -> dict[int, Scalar]:
    """[x, yz] - [x,y] z - (-1)^{(|x|-1)|y|} y [x,z]."""
    px, py = B.parities[i], B.parities[j]
    s, jk = B.alg.mul_basis(j, k)
    lhs = {}
    if s:
        lhs = B.bracket_basis(i, jk)
        if s < 0:
            lhs = {t: -v for t, v in lhs.items()}
    r = sparse_add(lhs, B.mul(B.bracket_basis(i, j), {k: ONE}), -1)
    sign = -1 if ((px + 1) * py) & 1 else 1
    return sparse_add(r, B.mul({j: ONE}, B.bracket_basis(i, k)), -sign)


def antisymmetry_residual(B: BVAlgebra, i: int, j: int) -> dict[int, Scalar]:
    """[x,y] + (-1)^{(|x|-1)(|y|-1)} [y,x]."""
    px, py = B.parities[i], B.parities[j]
    sign = -1 if ((px + 1) * (py + 1)) & 1 else 1
    return sparse_add(B.bracket_basis(i, j), B.bracket_basis(j, i), sign)


def _fmt_triple(B: BVAlgebra, idx) -> str:
    return "(" + ", ".join(B.label(t) for t in idx) + ")"


def check_bv(B: BVAlgebra, exhaustive: bool | None = None) -> dict:
    """All BV axioms; the seven-term relation and the bracket-derivation
    property are computed independently and compared triple by triple."""
    n = B.alg.dim
    if exhaustive is None:
        exhaustive = n <= 16
    out: dict = {
        "d_squared": check_square_zero(B.d)["ok"],
        "delta_squared": check_square_zero(B.delta)["ok"],
        "anticommute": check_anticommute(B.d, B.delta)["ok"],
        "d_leibniz": check_leibniz(B.d, 1)["ok"],
    }
    seven_fail, deriv_fail, disagree = [], [], []
    for t in _triples(n, exhaustive):
        a = bool(seven_term_residual(B, *t))
        b = bool(bracket_derivation_residual(B, *t))
        if a:
            seven_fail.append(t)
        if b:
            deriv_fail.append(t)
        if a != b:
            disagree.append(t)
    anti_fail = [(i, j) for i in range(n) for j in range(i, n) if antisymmetry_residual(B, i, j)]
    out["seven_term"] = not seven_fail
    out["bracket_derivation"] = not deriv_fail
    out["seven_term_agrees_with_derivation"] = not disagree
    out["bracket_antisymmetry"] = not anti_fail
    out["triples_checked"] = "all ordered" if exhaustive else "unordered (graded symmetry)"
    out["counterexamples"] = [_fmt_triple(B, t) for t in seven_fail[:3]]
    out["ok"] = all(
        out[k]
        for k in (
            "d_squared",
            "delta_squared",
            "anticommute",
            "d_leibniz",
            "seven_term",
            "bracket_derivation",
            "seven_term_agrees_with_derivation",
            "bracket_antisymmetry",
        )
    )
    return out


def is_order_one(B: BVAlgebra) -> bool:
    """Delta is a derivation, equivalently the bracket vanishes identically."""
    lei = check_leibniz(B.delta, 1)["ok"]
    zero_br = all(not B.bracket_basis(i, j) for i in range(B.alg.dim) for j in range(B.alg.dim))
    if lei != zero_br:
        raise AssertionError("order-one test and vanishing bracket disagree")
    return lei


# -- subspaces attached to (d, delta) ---------------------------------------


@dataclass
class DDeltaSpaces:
    ker_d: Subspace
    ker_delta: Subspace
    im_d: Subspace
    im_delta: Subspace
    im_ddelta: Subspace
    ker_ddelta: Subspace


def ddelta_spaces(B: BVAlgebra) -> DDeltaSpaces:
    dm, lm = B.d.matrix, B.delta.matrix
    ddl = dm @ lm
    return DDeltaSpaces(kernel(dm), kernel(lm), image(dm), image(lm), image(ddl), kernel(ddl))


def check_ddelta(B: BVAlgebra, spaces: DDeltaSpaces | None = None) -> dict:
    """Ker d n Im Delta = Im d Delta = Ker Delta n Im d."""
    S = spaces or ddelta_spaces(B)
    left = intersect(S.ker_d, S.im_delta)
    right = intersect(S.ker_delta, S.im_d)
    ok_l = left == S.im_ddelta
    ok_r = right == S.im_ddelta
    out = {
        "ok": ok_l and ok_r,
        "dim_ker_d_cap_im_delta": left.dim,
        "dim_im_d_delta": S.im_ddelta.dim,
        "dim_ker_delta_cap_im_d": right.dim,
    }
    if not out["ok"]:
        bad = left if not ok_l else right
        # without anticommutation Im(d Delta) need not sit inside either side
        wit = next((v for v in bad.basis if not S.im_ddelta.contains(v)), None)
        if wit is None:
            wit = next(v for v in S.im_ddelta.basis if not bad.contains(v))
        out["witness"] = format_element(B.alg.from_vector(wit))
    return out


def _block_dim(space: Subspace, block: Subspace) -> int:
    return intersect(space, block).dim


@dataclass
class Subquotient:
    name: str
    cycles: Subspace
    boundaries: Subspace

    @property
    def dim(self) -> int:
        return self.cycles.dim - self.boundaries.dim


def four_cohomologies(B: BVAlgebra, spaces: DDeltaSpaces | None = None) -> dict[str, Subquotient]:
    S = spaces or ddelta_spaces(B)
    return {
        "d": Subquotient("d", S.ker_d, S.im_d),
        "delta": Subquotient("delta", S.ker_delta, S.im_delta),
        "bott_chern": Subquotient("bott_chern", intersect(S.ker_d, S.ker_delta), S.im_ddelta),
        "aeppli": Subquotient("aeppli", S.ker_ddelta, subspace_sum(S.im_d, S.im_delta)),
    }


def comparison_map(src: Subquotient, dst: Subquotient) -> dict:
    """Map Z1/B1 -> Z2/B2 induced by inclusion: image (Z1+B2)/B2, kernel (Z1 n B2)/B1."""
    if not (src.cycles <= dst.cycles and src.boundaries <= dst.boundaries):
        raise ValueError(f"{src.name} does not include into {dst.name}")
    img = subspace_sum(src.cycles, dst.boundaries).dim - dst.boundaries.dim
    ker = intersect(src.cycles, dst.boundaries).dim - src.boundaries.dim
    return {
        "from": src.name,
        "to": dst.name,
        "rank": img,
        "kernel": ker,
        "injective": ker == 0,
        "surjective": img == dst.dim,
    }


DIAMOND_EDGES = (("bott_chern", "d"), ("bott_chern", "delta"), ("d", "aeppli"), ("delta", "aeppli"))


def cohomology_diamond(B: BVAlgebra, spaces: DDeltaSpaces | None = None) -> dict:
    S = spaces or ddelta_spaces(B)
    H = four_cohomologies(B, S)
    maps = []
    for a, b in DIAMOND_EDGES:
        try:
            maps.append(comparison_map(H[a], H[b]))
        except ValueError:
            # only happens when d and Delta fail to anticommute
            maps.append({"from": a, "to": b, "defined": False, "injective": False, "surjective": False})
    blocks = _diamond_blocks(B)
    table = []
    for key, idx in blocks:
        blk = Subspace.coordinate(B.alg.dim, idx)
        row = {"block": key}
        for name, sq in H.items():
            row[name] = _block_dim(sq.cycles, blk) - _block_dim(sq.boundaries, blk)
        table.append(row)
    return {
        "dims": {k: v.dim for k, v in H.items()},
        "maps": maps,
        "all_isomorphisms": all(m["injective"] and m["surjective"] for m in maps),
        "blocks": table,
    }


def _diamond_blocks(B: BVAlgebra) -> list[tuple[str, list[int]]]:
    bihom = B.d.is_bihomogeneous() and B.delta.is_bihomogeneous()
    pres = B.alg.presentation
    if bihom:
        groups = B.alg.block_indices(pres.bidegree)
        return [(f"({p},{q})", groups[(p, q)]) for p, q in sorted(groups)]
    a, b = B.grading
    groups = B.alg.block_indices(lambda m: a * pres.bidegree(m)[0] + b * pres.bidegree(m)[1])
    return [(str(k), groups[k]) for k in sorted(groups)]


def quasi_iso_checks(B: BVAlgebra) -> dict:
    """Injectivity and surjectivity of each map in the diamond."""
    diamond = cohomology_diamond(B)
    return {f"{m['from']}->{m['to']}": m["injective"] and m["surjective"] for m in diamond["maps"]}


def transfer_from_ddelta(B: BVAlgebra) -> TransferDiagram:
    """Contraction built from A = H + S + dS + DS + dDS."""
    if not check_ddelta(B)["ok"]:
        raise DecompositionError("the dDelta-condition fails; no such decomposition")
    S = ddelta_spaces(B)
    n = B.alg.dim
    dm, lm = B.d.matrix, B.delta.matrix
    Sc = orthogonal_complement(subspace_sum(S.ker_d, S.ker_delta))
    Hc = intersect(
        orthogonal_complement(subspace_sum(S.im_d, S.im_delta)),
        intersect(S.ker_d, S.ker_delta),
    )
    hs = [list(v) for v in Hc.basis]
    ss = [list(v) for v in Sc.basis]
    dss = [list(dm.apply(v)) for v in ss]
    lss = [list(lm.apply(v)) for v in ss]
    dlss = [list(dm.apply(lm.apply(v))) for v in ss]
    cols = hs + ss + dss + lss + dlss
    if len(cols) != n:
        raise DecompositionError(f"summands have total dimension {len(cols)}, expected {n}")
    P = Matrix.from_columns(cols, rows=n)
    try:
        Pinv = inverse(P)
    except ValueError as exc:
        raise DecompositionError("summands are not independent") from exc
    zero = [ZERO] * n
    k, s = len(hs), len(ss)
    M = Matrix.from_columns([zero] * (k + s) + ss + [zero] * s + lss, rows=n)
    h = Operator(B.alg, M @ Pinv, "h_ddelta")
    iota = Matrix.from_columns(hs, rows=n) if hs else Matrix.from_columns([], rows=n)
    rho = Pinv.submatrix(range(k), range(n)) if k else Matrix.zeros(0, n)
    T = TransferDiagram(B.alg, B.d, h, iota, rho, "ddelta")
    chk = verify_transfer(T)
    if not chk["ok"]:
        raise DecompositionError(f"constructed data is not a contraction: {chk}")
    return T


def verify_ddelta_transfer(B: BVAlgebra, T: TransferDiagram) -> dict:
    out = {"transfer": verify_transfer(T)["ok"]}
    out.update({f"side_{k}": v for k, v in verify_side_conditions(T, B.delta).items() if k != "ok"})
    out["ok"] = all(out.values())
    return out
