"""Built-in finite models and the Calabi-Yau style eta-twist."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .bv import BVAlgebra, check_bv
from .cdga import (
    Algebra,
    ClosureError,
    Derivation,
    Element,
    Generator,
    GradingError,
    Operator,
    Presentation,
    bits,
    check_anticommute,
    check_square_zero,
    derivation_from_images,
    derivation_operator,
    sort_sign,
    wedge_sign,
)
from .exactlin import I, ONE, Matrix, Subspace, inverse, kernel, sc
from .hodge import laplacian
from .parsing import ParseError, PresentationFile, element_in, parse_element, parse_operator, parse_presentation


class ConstructionError(ValueError):
    pass


class IntegrabilityError(ValueError):
    pass


class VolumeError(ValueError):
    pass


@dataclass
class ModelBundle:
    """An algebra with named operators and default choices for the pipelines.

    ``bv`` holds the default (d, delta) operator expressions, ``derham`` the
    total differential used for filtrations, and ``case`` the expected weight
    pattern of the operations ("kahler" or "bv1").
    """

    name: str
    alg: Algebra
    operators: dict[str, Operator]
    derivations: dict[str, Derivation] = field(default_factory=dict)
    bv: tuple[str, str] = ("dbar", "del")
    derham: str = "dbar + del"
    case: str = "kahler"
    side_conditions_claimed: bool = False
    notes: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def op(self, expr: str) -> Operator:
        return parse_operator(expr, self.operators, self.alg)

    def bv_algebra(self, d: str | None = None, delta: str | None = None) -> BVAlgebra:
        d = d or self.bv[0]
        delta = delta or self.bv[1]
        return BVAlgebra(self.alg, self.op(d), self.op(delta), f"{self.name}[{d}, {delta}]")

    def verify(self) -> dict:
        """Square-zero for every named differential and pairwise anticommutation."""
        out = {}
        names = sorted(self.derivations)
        for n in names:
            out[f"{n}^2=0"] = check_square_zero(self.operators[n])["ok"]
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                out[f"[{a},{b}]=0"] = check_anticommute(self.operators[a], self.operators[b])["ok"]
        return out


def _gens(spec) -> list[Generator]:
    return [Generator(n, p, q) for n, p, q in spec]


def _bundle(name: str, alg: Algebra, ders: Mapping[str, Derivation], **kw) -> ModelBundle:
    ops = {k: derivation_operator(alg, d) for k, d in ders.items()}
    b = ModelBundle(name, alg, ops, dict(ders), **kw)
    bad = [k for k, v in b.verify().items() if not v]
    if bad:
        raise IntegrabilityError(f"{name}: failing identities {bad}")
    return b


def _derivation(pres: Presentation, alg: Algebra, name: str, bidegree, table: Mapping[str, str]) -> Derivation:
    return derivation_from_images(pres, name, bidegree, {g: parse_element(e, alg) for g, e in table.items()})


def kodaira_thurston() -> ModelBundle:
    pres = Presentation(
        _gens([("a", 1, 0), ("b", 1, 0), ("abar", 0, 1), ("bbar", 0, 1)]),
        {"a": "abar", "b": "bbar"},
        2,
        name="kt",
    )
    alg = Algebra(pres, name="kt")
    ders = {
        "dbar": _derivation(pres, alg, "dbar", (0, 1), {"b": "i * a ^ abar"}),
        "del": _derivation(pres, alg, "del", (1, 0), {"bbar": "-i * a ^ abar"}),
    }
    return _bundle(
        "kt",
        alg,
        ders,
        bv=("dbar", "del"),
        derham="dbar + del",
        case="bv1",
        notes=["nilmanifold model of a primary Kodaira surface; non-Kaehler"],
    )


def _iwasawa_presentation() -> tuple[Presentation, Algebra, dict[str, Derivation]]:
    pres = Presentation(
        _gens([("a", 1, 0), ("b", 1, 0), ("c", 1, 0), ("abar", 0, 1), ("bbar", 0, 1), ("cbar", 0, 1)]),
        {"a": "abar", "b": "bbar", "c": "cbar"},
        3,
        name="iwasawa",
    )
    alg = Algebra(pres, name="iwasawa")
    ders = {
        "dbar": _derivation(pres, alg, "dbar", (0, 1), {"cbar": "-abar ^ bbar"}),
        "del": _derivation(pres, alg, "del", (1, 0), {"c": "-a ^ b"}),
    }
    return pres, alg, ders


def iwasawa_full() -> ModelBundle:
    pres, alg, ders = _iwasawa_presentation()
    return _bundle(
        "iwasawa",
        alg,
        ders,
        bv=("dbar", "del"),
        derham="dbar + del",
        case="bv1",
        notes=["full left-invariant model; fails the dDelta-condition"],
    )


# sigma(z1, z2, z3) = (i z1, i z2, -z3): weights mod 4 on a, b, c and conjugates
IWASAWA_SIGMA_WEIGHTS = {"a": 1, "b": 1, "c": 2, "abar": 3, "bbar": 3, "cbar": 2}
IWASAWA_SIGMA_GENERATORS = (
    "a ^ abar",
    "b ^ bbar",
    "c ^ cbar",
    "a ^ bbar",
    "b ^ abar",
    "c ^ abar ^ bbar",
    "a ^ b ^ cbar",
    "a ^ b ^ c",
    "abar ^ bbar ^ cbar",
)


def cyclic_action(alg: Algebra, weights: Mapping[str, int], order: int) -> Operator:
    """Diagonal action multiplying a monomial by zeta^(sum of weights), zeta = exp(2 pi i/order)."""
    if order not in (1, 2, 4):
        raise ConstructionError("only actions of order 1, 2 or 4 stay inside Q(i)")
    pres = alg.presentation
    root = {1: sc(1), 2: sc(-1), 4: I}[order]
    w = [weights.get(g.name, 0) for g in pres.generators]
    cols = []
    for m in alg.basis:
        e = sum(w[k] for k in bits(m)) % order
        v = ONE
        for _ in range(e):
            v = v * root
        cols.append({alg.position[m]: v})
    return Operator(alg, Matrix.from_sparse_columns(cols, alg.dim), "sigma")


def invariant_subalgebra(bundle: ModelBundle, weights: Mapping[str, int], order: int, name: str) -> ModelBundle:
    """Restrict a model to the fixed points of a diagonal cyclic action."""
    alg = bundle.alg
    sigma = cyclic_action(alg, weights, order)
    for n, op in bundle.operators.items():
        if not (sigma @ op - op @ sigma).is_zero():
            raise ConstructionError(f"the action does not commute with {n}")
    fixed = kernel((sigma - Operator.identity(alg)).matrix)
    monos = []
    for v in fixed.basis:
        support = [k for k, x in enumerate(v) if x]
        if len(support) != 1:
            raise ConstructionError("fixed subspace is not spanned by monomials")
        monos.append(alg.basis[support[0]])
    try:
        sub = Algebra(alg.presentation, monos, name=name)
    except ClosureError as exc:
        raise ConstructionError(str(exc)) from None
    ders = dict(bundle.derivations)
    out = _bundle(name, sub, ders, bv=bundle.bv, derham=bundle.derham, case=bundle.case)
    out.extras["sigma"] = sigma
    out.extras["fixed_space"] = fixed
    return out


def generated_span(alg: Algebra, gens: list[Element]) -> Subspace:
    """Span of all products of the given elements (and 1) inside ``alg``."""
    span = [alg.one()]
    seen = {tuple(alg.one().to_vector())}
    frontier = list(span)
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y.is_zero():
                    continue
                key = tuple(y.to_vector())
                if key not in seen:
                    seen.add(key)
                    new.append(y)
        span += new
        frontier = new
    return Subspace(alg.dim, [x.to_vector() for x in span])


def iwasawa_sigma_invariant() -> ModelBundle:
    base = iwasawa_full()
    b = invariant_subalgebra(base, IWASAWA_SIGMA_WEIGHTS, 4, "iwasawa-orbifold")
    b.bv = ("dbar", "-i * adj(del)")
    b.derham = "dbar + del"
    b.case = "kahler"
    b.side_conditions_claimed = True
    b.notes = ["invariant forms under sigma(z1, z2, z3) = (i z1, i z2, -z3)"]
    b.extras["listed_generators"] = IWASAWA_SIGMA_GENERATORS
    return b


def complex_torus(m: int) -> ModelBundle:
    if m < 1:
        raise ValueError("complex dimension must be at least 1")
    names = [f"a{k}" for k in range(1, m + 1)]
    gens = [(n, 1, 0) for n in names] + [(n + "bar", 0, 1) for n in names]
    pres = Presentation(_gens(gens), {n: n + "bar" for n in names}, m, name=f"torus:{m}")
    alg = Algebra(pres, name=f"torus:{m}")
    ders = {"dbar": Derivation("dbar", (0, 1)), "del": Derivation("del", (1, 0))}
    return _bundle(f"torus:{m}", alg, ders, bv=("dbar", "del"), derham="dbar + del", case="kahler", side_conditions_claimed=True)


def nilmanifold_from_structure(
    constants: Mapping[str, str | Element],
    bidegrees: Mapping[str, tuple[int, int]] | list[tuple[str, int, int]],
    conjugation: Mapping[str, str] | None = None,
    name: str = "nilmanifold",
) -> ModelBundle:
    """Build a model from d on generators, splitting d into del and dbar by bidegree."""
    if isinstance(bidegrees, Mapping):
        spec = [(n, bd[0], bd[1]) for n, bd in bidegrees.items()]
    else:
        spec = [(n, p, q) for n, p, q in bidegrees]
    pres = Presentation(_gens(spec), conjugation, name=name)
    alg = Algebra(pres, name=name)
    dl: dict[str, Element] = {}
    db: dict[str, Element] = {}
    for g, val in constants.items():
        e = parse_element(val, alg) if isinstance(val, str) else val
        gen = pres.generators[pres.index(g)]
        for bd, comp in e.bidegree_components().items():
            if bd == (gen.p + 1, gen.q):
                dl[g] = comp
            elif bd == (gen.p, gen.q + 1):
                db[g] = comp
            else:
                raise GradingError(f"d({g}) has a component of bidegree {bd}")
    ders = {
        "dbar": derivation_from_images(pres, "dbar", (0, 1), db),
        "del": derivation_from_images(pres, "del", (1, 0), dl),
    }
    ops = {k: derivation_operator(alg, d) for k, d in ders.items()}
    total = ops["dbar"] + ops["del"]
    if not check_square_zero(total)["ok"]:
        raise IntegrabilityError("d^2 != 0: structure constants violate the Jacobi identity")
    return _bundle(name, alg, ders, bv=("dbar", "del"), derham="dbar + del")


# -- presentation files -------------------------------------------------------


def from_file(pf: PresentationFile) -> ModelBundle:
    pres = pf.presentation()
    alg = Algebra(pres, name=pf.name or "model")
    warnings: list[str] = []
    ders = {}
    for dname, table in pf.differentials.items():
        images = {g: element_in(pf, f"differential.{dname}", g, alg, warnings) for g in table}
        shifts = set()
        for g, e in images.items():
            gen = pres.generators[pres.index(g)]
            for m in e.terms:
                p, q = pres.bidegree(m)
                shifts.add((p - gen.p, q - gen.q))
        if len(shifts) > 1:
            g = next(iter(table))
            line, col = pf.positions.get((f"differential.{dname}", g), (0, 0))
            raise ParseError("bidegree", f"differential {dname} is not bihomogeneous: shifts {sorted(shifts)}", line, col, dname)
        bd = shifts.pop() if shifts else (0, 0)
        ders[dname] = derivation_from_images(pres, dname, bd, images)
    bv = (pf.bv.get("d", "dbar"), pf.bv.get("delta", "del")) if pf.bv else ("dbar", "del")
    derham = " + ".join(sorted(ders)) if ders else "0"
    bundle = _bundle(pf.name or "model", alg, ders, bv=bv, derham=derham)
    bundle.warnings = warnings
    if pf.invariants:
        sub = invariant_subalgebra(bundle, dict(pf.invariants["weights"]), pf.invariants["order"], bundle.name)
        sub.bv, sub.derham, sub.warnings = bundle.bv, bundle.derham, warnings
        bundle = sub
    for key in ("d", "delta"):
        if key in pf.bv:
            try:
                bundle.op(pf.bv[key])
            except ParseError as exc:
                line, col = pf.positions.get(("bv", key), (0, 0))
                raise exc.shifted(line, col) from None
    try:
        grading = bundle.bv_algebra().grading
    except (GradingError, ParseError):
        grading = (1, 1)
    # a Kaehler-type pair has d and delta of opposite total degrees; otherwise the BV1 weight pattern applies
    bundle.case = "kahler" if grading == (1, 1) else "bv1"
    bundle.extras["file"] = pf
    return bundle


def load_model_file(path: str | Path) -> ModelBundle:
    return from_file(parse_presentation(Path(path).read_text()))


def shipped_presentation(name: str) -> Path:
    """Path of a presentation file bundled with the package (``kt``, ``iwasawa``, ``iwasawa-orbifold``)."""
    path = Path(__file__).parent / "data" / f"{name}.toml"
    if not path.exists():
        raise KeyError(name)
    return path


# -- eta twist --------------------------------------------------------------


def _contract(pres: Presentation, k: int, mask: int) -> tuple[int, int]:
    """Interior product with the dual of generator k on a monomial: (sign, mask)."""
    if not mask >> k & 1:
        return 0, 0
    pos = (mask & ((1 << k) - 1)).bit_count()
    return (-1 if pos & 1 else 1), mask ^ (1 << k)


def eta_matrix(M: ModelBundle, omega: int, tangent_of: list[int], anti_of: list[int], L_basis: list[int]) -> tuple[list[tuple[int, int]], list[int]]:
    """Columns eta(e_I abar_J) = (-1)^(m|I|) (e_I contracted into Omega) ^ abar_J.

    The last tangent factor is contracted first.
    """
    pres = M.alg.presentation
    m = omega.bit_count()
    cols, images = [], []
    for lm in L_basis:
        idx = bits(lm)
        tang = [tangent_of[k] for k in idx if tangent_of[k] >= 0]
        anti = 0
        for k in idx:
            if anti_of[k] >= 0:
                anti |= 1 << anti_of[k]
        # (-1)^(m|I|) normalizes eta so that the involution identities hold in every dimension
        sign, cur = (-1 if (m * len(tang)) & 1 else 1), omega
        for t in reversed(tang):
            s, cur = _contract(pres, t, cur)
            if not s:
                raise VolumeError("tangent index outside Omega")
            sign *= s
        s2 = wedge_sign(cur, anti)
        if not s2:
            raise VolumeError("contraction overlaps the antiholomorphic part")
        images.append(cur | anti)
        cols.append((sign * s2, cur | anti))
    return cols, images


def eta_twist(M: ModelBundle, omega: int | None = None, name: str | None = None) -> ModelBundle:
    """Model of polyvector-valued forms, transported from M by contraction against Omega."""
    pres = M.alg.presentation
    holo = [k for k, g in enumerate(pres.generators) if (g.p, g.q) == (1, 0)]
    full_holo = 0
    for k in holo:
        full_holo |= 1 << k
    if omega is None:
        omega = full_holo
    if omega != full_holo:
        raise VolumeError("Omega must be the product of all holomorphic generators")
    if pres.conj is None:
        raise VolumeError("eta-twist needs a conjugation")
    for n, op in M.operators.items():
        if not op.is_bihomogeneous():
            raise GradingError(f"operator {n} is not bihomogeneous")
    anti = [k for k, g in enumerate(pres.generators) if (g.p, g.q) == (0, 1)]
    tnames = ["t" + pres.generators[k].name for k in holo]
    lgens = [Generator(n, 1, 0) for n in tnames] + [Generator(pres.generators[k].name, 0, 1) for k in anti]
    conj_pairs = {tnames[j]: pres.generators[pres.conj[holo[j]]].name for j in range(len(holo))}
    L = Presentation(lgens, conj_pairs, len(holo), name=name or f"eta({M.name})")
    tangent_of = [holo[j] for j in range(len(holo))] + [-1] * len(anti)
    anti_of = [-1] * len(holo) + anti
    all_L = list(range(1 << L.n))
    signed, images = eta_matrix(M, omega, tangent_of, anti_of, all_L)
    keep = [lm for lm, img in zip(all_L, images) if img in M.alg.position]
    Lalg = Algebra(L, keep, name=L.name)
    signed, images = eta_matrix(M, omega, tangent_of, anti_of, list(Lalg.basis))
    n = Lalg.dim
    if n != M.alg.dim or len(set(images)) != n:
        raise VolumeError("eta is not a bijection on monomials")
    cols = [{M.alg.position[m]: sc(s)} for s, m in signed]
    eta = Matrix.from_sparse_columns(cols, n)
    eta_inv = inverse(eta)
    ops: dict[str, Operator] = {}
    for base in ("dbar", "del"):
        X = M.operators[base].matrix
        ops[f"{base}_eta"] = Operator(Lalg, eta_inv @ X @ eta, f"{base}_eta")
        ops[f"{base}_eta_adj"] = Operator(Lalg, eta_inv @ X.H() @ eta, f"{base}_eta_adj")
    ops["g"] = swap_involution(Lalg, holo_count=len(holo))
    out = ModelBundle(
        L.name,
        Lalg,
        ops,
        {},
        bv=("dbar_eta + del_eta_adj", "del_eta - dbar_eta_adj"),
        derham="dbar_eta + del_eta_adj",
        case="kahler",
        notes=[f"eta-twist of {M.name}"],
    )
    out.extras.update({"eta": eta, "eta_inv": eta_inv, "base": M, "omega": omega})
    return out


def swap_involution(alg: Algebra, holo_count: int) -> Operator:
    """Algebra automorphism exchanging tangent generator k with antiholomorphic generator k."""
    perm = {}
    for k in range(holo_count):
        perm[k] = holo_count + k
        perm[holo_count + k] = k
    cols = []
    for m in alg.basis:
        img = [perm[k] for k in bits(m)]
        mask = 0
        for k in img:
            mask |= 1 << k
        if mask not in alg.position:
            raise ClosureError("swap leaves the algebra")
        cols.append({alg.position[mask]: sc(sort_sign(img))})
    return Operator(alg, Matrix.from_sparse_columns(cols, alg.dim), "g")


def build_bv_triples(L: ModelBundle) -> dict[str, BVAlgebra]:
    o = L.operators
    triples = {
        "L_Dol": (o["dbar_eta"], o["del_eta"]),
        "L_Dol*": (o["del_eta_adj"], -o["dbar_eta_adj"]),
        "L_dR": (o["dbar_eta"] + o["del_eta_adj"], o["del_eta"] - o["dbar_eta_adj"]),
    }
    return {k: BVAlgebra(L.alg, d, dl, f"{L.name}:{k}") for k, (d, dl) in triples.items()}


def eta_report(L: ModelBundle) -> dict:
    """Swap identities for the twisted operators, BV checks of the three tuples and the sign control."""
    o = L.operators
    eta, eta_inv = L.extras["eta"], L.extras["eta_inv"]
    base = L.extras["base"]
    g = o["g"]
    lap_del = laplacian(base.operators["del"]).matrix
    lap_dbar = laplacian(base.operators["dbar"]).matrix
    out: dict = {
        "eta_invertible": (eta @ eta_inv) == Matrix.identity(eta.rows),
        "eta_isometry": eta.H() @ eta == Matrix.identity(eta.rows),
        "g_involution": (g @ g) == Operator.identity(L.alg),
        "g_isometry": g.matrix.H() @ g.matrix == Matrix.identity(g.matrix.rows),
        "del_eta_adj=-g.dbar_eta.g": o["del_eta_adj"] == -(g @ o["dbar_eta"] @ g),
        "del_eta=-g.dbar_eta_adj.g": o["del_eta"] == -(g @ o["dbar_eta_adj"] @ g),
        "adj(del_eta)=del_eta_adj": o["del_eta"].adjoint() == o["del_eta_adj"],
        "lap(dbar_eta)=eta^-1 lap(dbar) eta": laplacian(o["dbar_eta"]).matrix == eta_inv @ lap_dbar @ eta,
    }
    triples = build_bv_triples(L)
    out["bv"] = {k: check_bv(B)["ok"] for k, B in triples.items()}
    dR = triples["L_dR"]
    anti = (dR.d @ dR.delta + dR.delta @ dR.d).matrix
    out["L_dR_anticommutator=eta^-1(lap_del-lap_dbar)eta"] = anti == eta_inv @ (lap_del - lap_dbar) @ eta
    wrong = o["del_eta"] + o["dbar_eta_adj"]
    anti_wrong = (dR.d @ wrong + wrong @ dR.d).matrix
    out["wrong_sign_anticommutator=eta^-1(lap_del+lap_dbar)eta"] = anti_wrong == eta_inv @ (lap_del + lap_dbar) @ eta
    out["wrong_sign_anticommutes"] = anti_wrong.is_zero()
    return out


def resolve_model(spec: str) -> ModelBundle:
    """Model by name ("kt", "iwasawa", "iwasawa-orbifold", "torus:m", "eta:<name>") or file path."""
    if spec.startswith("eta:"):
        return eta_twist(resolve_model(spec[4:]))
    if spec == "kt":
        return kodaira_thurston()
    if spec == "iwasawa":
        return iwasawa_full()
    if spec == "iwasawa-orbifold":
        return iwasawa_sigma_invariant()
    if spec.startswith("torus:"):
        try:
            m = int(spec.split(":", 1)[1])
        except ValueError:
            raise KeyError(spec) from None
        return complex_torus(m)
    p = Path(spec)
    if p.exists():
        return load_model_file(p)
    raise KeyError(spec)


BUILTIN_MODELS = ("kt", "iwasawa", "iwasawa-orbifold", "torus:m", "eta:<model>")
