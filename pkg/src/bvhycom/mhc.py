"""Filtered complexes: strictness, E1 degeneration, opposedness, purity and weight audits."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .cdga import Operator
from .exactlin import (
    ZERO,
    Matrix,
    Subspace,
    apply_to_subspace,
    intersect,
    preimage,
    subspace_sum,
)

INCREASING = "increasing"
DECREASING = "decreasing"


class FiltrationError(ValueError):
    pass


@dataclass
class Complex:
    """A finite cochain complex on C^N with a degree attached to each basis vector.

    Filtration steps and cohomology live in the local coordinates of each
    degree component A^n, indexed by ``indices(n)``.
    """

    d: Matrix
    degrees: list[int]
    bidegrees: list[tuple[int, int]] | None = None

    def __post_init__(self) -> None:
        self._idx: dict[int, list[int]] = {}
        for k, deg in enumerate(self.degrees):
            self._idx.setdefault(deg, []).append(k)
        self._cache: dict[tuple[str, int], object] = {}

    @classmethod
    def from_operator(cls, op: Operator) -> "Complex":
        alg = op.alg
        return cls(op.matrix, alg.degrees(), alg.bidegrees())

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def _memo(self, kind: str, n: int, make: Callable[[], object]):
        key = (kind, n)
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    def degree_range(self) -> range:
        if not self.degrees:
            return range(0)
        return range(min(self.degrees), max(self.degrees) + 1)

    def indices(self, n: int) -> list[int]:
        return self._idx.get(n, [])

    def rank_at(self, n: int) -> int:
        return len(self.indices(n))

    def block(self, n: int) -> Matrix:
        """d restricted to A^n -> A^(n+1), in local coordinates."""

        def make() -> Matrix:
            rows, cols = self.indices(n + 1), self.indices(n)
            if rows and cols:
                return self.d.submatrix(rows, cols)
            return Matrix.zeros(len(rows), len(cols))

        return self._memo("d", n, make)

    def component(self, n: int) -> Subspace:
        return Subspace.full(self.rank_at(n))

    def push(self, n: int, u: Subspace) -> Subspace:
        """d(u) for u inside A^n."""
        if not u.dim or not self.rank_at(n + 1):
            return Subspace.zero(self.rank_at(n + 1))
        return apply_to_subspace(self.block(n), u)

    def pull(self, n: int, u: Subspace) -> Subspace:
        """{x in A^n : dx in u} for u inside A^(n+1)."""
        if not self.rank_at(n + 1):
            return self.component(n)
        if not self.rank_at(n):
            return Subspace.zero(0)
        return preimage(self.block(n), u)

    def cocycles(self, n: int) -> Subspace:
        return self._memo("Z", n, lambda: self.pull(n, Subspace.zero(self.rank_at(n + 1))))

    def coboundaries(self, n: int) -> Subspace:
        return self._memo("B", n, lambda: self.push(n - 1, self.component(n - 1)))

    def betti(self, n: int) -> int:
        return self.cocycles(n).dim - self.coboundaries(n).dim

    def is_complex(self) -> bool:
        return (self.d @ self.d).is_zero()

    def embed(self, n: int, u: Subspace) -> Subspace:
        """The local subspace u of A^n as a subspace of the whole space."""
        vecs = []
        for v in u.basis:
            full = [ZERO] * self.dim
            for k, x in zip(self.indices(n), v):
                full[k] = x
            vecs.append(full)
        return Subspace(self.dim, vecs)


@dataclass
class Filtration:
    """Per-degree flags of local subspaces; steps outside [lo, hi] are clamped to the boundary values."""

    direction: str
    steps: dict[int, dict[int, Subspace]]
    name: str = ""

    def bounds(self, n: int) -> tuple[int, int]:
        ps = self.steps.get(n)
        if not ps:
            return (0, 0)
        return min(ps), max(ps)

    def step(self, n: int, p: int, cx: Complex) -> Subspace:
        ps = self.steps.get(n)
        size = cx.rank_at(n)
        if not ps:
            return Subspace.zero(size)
        lo, hi = min(ps), max(ps)
        if lo <= p <= hi:
            return ps[p]
        below = p < lo
        if self.direction == DECREASING:
            return Subspace.full(size) if below else Subspace.zero(size)
        return Subspace.zero(size) if below else Subspace.full(size)

    def smaller(self, p: int) -> int:
        """Index of the next smaller step (p+1 if decreasing, p-1 if increasing)."""
        return p + 1 if self.direction == DECREASING else p - 1

    def index_range(self, n: int) -> range:
        lo, hi = self.bounds(n)
        return range(lo - 1, hi + 2)


def _from_predicate(cx: Complex, direction: str, key: Callable[[int], int], name: str) -> Filtration:
    steps: dict[int, dict[int, Subspace]] = {}
    for n in cx.degree_range():
        idx = cx.indices(n)
        keys = sorted({key(k) for k in idx})
        if not keys:
            continue
        flag = {}
        for p in range(keys[0], keys[-1] + 1):
            if direction == DECREASING:
                sel = [j for j, k in enumerate(idx) if key(k) >= p]
            else:
                sel = [j for j, k in enumerate(idx) if key(k) <= p]
            flag[p] = Subspace.coordinate(len(idx), sel)
        steps[n] = flag
    return Filtration(direction, steps, name)


def _need_bidegrees(cx: Complex) -> list[tuple[int, int]]:
    if cx.bidegrees is None:
        raise FiltrationError("column and row filtrations need a bigraded complex")
    return cx.bidegrees


def column_filtration(cx: Complex) -> Filtration:
    """F^p A^n = sum of A^{p',n-p'} over p' >= p."""
    bd = _need_bidegrees(cx)
    return _from_predicate(cx, DECREASING, lambda k: bd[k][0], "column")


def row_filtration(cx: Complex) -> Filtration:
    bd = _need_bidegrees(cx)
    return _from_predicate(cx, DECREASING, lambda k: bd[k][1], "row")


def grading_filtration(cx: Complex, alpha: int, beta: int) -> Filtration:
    """Increasing W_p spanned by basis vectors of weight alpha*p' + beta*q' <= p."""
    bd = _need_bidegrees(cx)
    return _from_predicate(cx, INCREASING, lambda k: alpha * bd[k][0] + beta * bd[k][1], f"grading:{alpha},{beta}")


def canonical_filtration(cx: Complex) -> Filtration:
    """W_p A^n = 0 for p < n, Ker d for p = n, A^n for p > n."""
    steps = {}
    for n in cx.degree_range():
        size = cx.rank_at(n)
        if not size:
            continue
        steps[n] = {n - 1: Subspace.zero(size), n: cx.cocycles(n), n + 1: Subspace.full(size)}
    return Filtration(INCREASING, steps, "canonical")


def preserves(cx: Complex, fil: Filtration) -> bool:
    for n in cx.degree_range():
        for p in fil.index_range(n):
            if not cx.push(n, fil.step(n, p, cx)) <= fil.step(n + 1, p, cx):
                return False
    return True


def check_strictness(cx: Complex, fil: Filtration) -> dict:
    """Im(d) meets F^p exactly in d(F^p), in every degree and step."""
    if not preserves(cx, fil):
        return {"ok": False, "preserved": False, "failures": []}
    failures = []
    for n in cx.degree_range():
        im = cx.coboundaries(n + 1)
        for p in fil.index_range(n):
            lhs = intersect(im, fil.step(n + 1, p, cx))
            rhs = cx.push(n, fil.step(n, p, cx))
            if lhs != rhs:
                failures.append((n + 1, p))
    return {"ok": not failures, "preserved": True, "failures": failures}


@dataclass
class Subquotient:
    top: Subspace
    bottom: Subspace

    @property
    def dim(self) -> int:
        return self.top.dim - self.bottom.dim


def graded_cohomology(cx: Complex, fil: Filtration, n: int, p: int) -> Subquotient:
    """H^n(Gr^p) as cycles-mod-boundaries inside A^n."""
    big = fil.step(n, p, cx)
    small = fil.step(n, fil.smaller(p), cx)
    small_next = fil.step(n + 1, fil.smaller(p), cx)
    z = intersect(big, cx.pull(n, small_next))
    b = subspace_sum(small, cx.push(n - 1, fil.step(n - 1, p, cx)))
    return Subquotient(z, b)


def check_E1_degeneration(cx: Complex, fil: Filtration) -> dict:
    """Sum over p of dim H^n(Gr^p) equals dim H^n in every degree n."""
    if not preserves(cx, fil):
        raise FiltrationError("the differential does not preserve the filtration")
    per_degree = {}
    ok = True
    for n in cx.degree_range():
        e1 = sum(graded_cohomology(cx, fil, n, p).dim for p in fil.index_range(n))
        h = cx.betti(n)
        per_degree[n] = {"E1": e1, "H": h}
        ok = ok and e1 == h
    return {"ok": ok, "degrees": per_degree}


def induced(step: Subspace, sq: Subquotient) -> Subspace:
    """Image of (step meet top) in top/bottom, represented by its preimage in top."""
    return subspace_sum(intersect(step, sq.top), sq.bottom)


def check_opposed(F: Callable[[int], Subspace], Fbar: Callable[[int], Subspace], sq: Subquotient, n: int, prange: Sequence[int]) -> bool:
    """F^p + Fbar^q = V and F^p meet Fbar^q = 0 on V = top/bottom, for all p + q = n + 1."""
    for p in prange:
        q = n + 1 - p
        a, b = induced(F(p), sq), induced(Fbar(q), sq)
        if intersect(a, b) != sq.bottom or subspace_sum(a, b) != sq.top:
            return False
    return True


def gr_gr_dims(F: Callable[[int], Subspace], Fbar: Callable[[int], Subspace], sq: Subquotient, prange: Sequence[int], qrange: Sequence[int]) -> dict[tuple[int, int], int]:
    """dim Gr_F^p Gr_Fbar^q V, from the four-intersection formula."""

    def cap(p: int, q: int) -> int:
        return intersect(induced(F(p), sq), induced(Fbar(q), sq)).dim

    out = {}
    for p in prange:
        for q in qrange:
            v = cap(p, q) - cap(p + 1, q) - cap(p, q + 1) + cap(p + 1, q + 1)
            if v:
                out[(p, q)] = v
    return out


def opposed_by_gr_gr(F, Fbar, sq: Subquotient, n: int, prange: Sequence[int]) -> bool:
    return all(p + q == n for p, q in gr_gr_dims(F, Fbar, sq, prange, prange))


def _steps(cx: Complex, fil: Filtration, n: int) -> Callable[[int], Subspace]:
    return lambda p: fil.step(n, p, cx)


def _span_range(cx: Complex, *fils: Filtration) -> range:
    lo = min([0] + [f.bounds(n)[0] for f in fils for n in cx.degree_range()])
    hi = max([0] + [f.bounds(n)[1] for f in fils for n in cx.degree_range()])
    return range(lo - 1, hi + 2)


def cohomology_subquotient(cx: Complex, n: int) -> Subquotient:
    return Subquotient(cx.cocycles(n), cx.coboundaries(n))


def opposed_on_cohomology(cx: Complex, F: Filtration, Fbar: Filtration) -> dict[int, dict]:
    prange = _span_range(cx, F, Fbar)
    out = {}
    for n in cx.degree_range():
        sq = cohomology_subquotient(cx, n)
        direct = check_opposed(_steps(cx, F, n), _steps(cx, Fbar, n), sq, n, prange)
        oracle = opposed_by_gr_gr(_steps(cx, F, n), _steps(cx, Fbar, n), sq, n, prange)
        out[n] = {"dim": sq.dim, "opposed": direct, "gr_gr": oracle}
    return out


def check_H2(cx: Complex, W: Filtration, F: Filtration, Fbar: Filtration) -> dict:
    """F and Fbar induced on H^n(Gr_p^W) are p-opposed, for all n and p."""
    prange = _span_range(cx, F, Fbar)
    failures = []
    for n in cx.degree_range():
        for p in W.index_range(n):
            sq = graded_cohomology(cx, W, n, p)
            if sq.dim and not check_opposed(_steps(cx, F, n), _steps(cx, Fbar, n), sq, p, prange):
                failures.append((n, p))
    return {"ok": not failures, "failures": failures}


def weight_on_cohomology(cx: Complex, W: Filtration) -> dict[int, dict[int, int]]:
    """dim Gr_p^W H^n for the filtration induced on cohomology."""
    out: dict[int, dict[int, int]] = {}
    for n in cx.degree_range():
        sq = cohomology_subquotient(cx, n)
        if not sq.dim:
            continue
        row = {}
        for p in W.index_range(n):
            hi = induced(W.step(n, p, cx), sq).dim
            lo = induced(W.step(n, W.smaller(p), cx), sq).dim
            if hi - lo:
                row[p] = hi - lo
        out[n] = row
    return out


def check_alpha_purity(cx: Complex, W: Filtration, alpha: Fraction | int | str) -> dict:
    """Gr_p^W H^n = 0 for p != alpha*n; refused when d is not strict for W."""
    alpha = Fraction(alpha)
    strict = check_strictness(cx, W)
    if not strict["ok"]:
        return {"ok": False, "refused": True, "reason": "differential is not strict for W", "graded": {}}
    graded = weight_on_cohomology(cx, W)
    bad = []
    for n, row in graded.items():
        for p in row:
            if Fraction(p) != alpha * n:
                bad.append((n, p))
    return {"ok": not bad, "refused": False, "graded": graded, "violations": bad}


KAHLER_PATTERN = "kahler"
BV1_PATTERN = "bv1"


def expected_bidegree(case: str, arity: int) -> tuple[int, int]:
    """m_n lives in bidegree (2-n, 2-n) in the Kaehler case and (n-2, 2-n) in the BV1 case."""
    if case == KAHLER_PATTERN:
        return (2 - arity, 2 - arity)
    if case == BV1_PATTERN:
        return (arity - 2, 2 - arity)
    raise ValueError(f"unknown case {case!r}")


def audit_operation_weights(phi1_bidegree: tuple[int, int] | None, m3_bidegree: tuple[int, int] | None, case: str) -> dict:
    """Compare the bidegrees of phi_1 and m_3 with the declared and the pure-Hodge patterns.

    phi_1 carries the shift of m_3, so both are compared with the arity-3 pattern.
    A zero operation conforms vacuously.
    """
    observed = [b for b in (phi1_bidegree, m3_bidegree) if b is not None]
    exp_case = expected_bidegree(case, 3)
    exp_hodge = expected_bidegree(KAHLER_PATTERN, 3)
    return {
        "case": case,
        "phi1": phi1_bidegree,
        "m3": m3_bidegree,
        "expected": exp_case,
        "conforms": all(b == exp_case for b in observed),
        "pure_hodge_pattern": all(b == exp_hodge for b in observed),
        "vacuous": not observed,
    }


def formality_hypotheses(purity: dict, audit: dict) -> bool:
    """Purity of W on cohomology together with pure-Hodge weights of the operations."""
    return bool(purity.get("ok")) and bool(audit.get("pure_hodge_pattern"))


def filtration_from_spec(spec: str, cx: Complex) -> Filtration:
    """Build a filtration from ``column``, ``row``, ``canonical`` or ``grading:a,b``."""
    spec = spec.strip()
    if spec == "column":
        return column_filtration(cx)
    if spec == "row":
        return row_filtration(cx)
    if spec == "canonical":
        return canonical_filtration(cx)
    if spec.startswith("grading:"):
        try:
            a, b = (int(t) for t in spec.split(":", 1)[1].split(","))
        except ValueError as exc:
            raise FiltrationError(f"bad grading filtration spec {spec!r}") from exc
        return grading_filtration(cx, a, b)
    raise FiltrationError(f"unknown filtration {spec!r}")


__all__ = [
    "Complex",
    "Filtration",
    "FiltrationError",
    "Subquotient",
    "audit_operation_weights",
    "canonical_filtration",
    "check_E1_degeneration",
    "check_H2",
    "check_alpha_purity",
    "check_opposed",
    "check_strictness",
    "cohomology_subquotient",
    "column_filtration",
    "expected_bidegree",
    "filtration_from_spec",
    "formality_hypotheses",
    "gr_gr_dims",
    "grading_filtration",
    "graded_cohomology",
    "opposed_by_gr_gr",
    "opposed_on_cohomology",
    "preserves",
    "row_filtration",
    "weight_on_cohomology",
]
