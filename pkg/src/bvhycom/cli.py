"""Command-line front end: check, cohomology, transfer, hycom, purity, models."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from itertools import product
from typing import Sequence

from .bv import (
    BVAlgebra,
    DecompositionError,
    check_bv,
    check_ddelta,
    cohomology_diamond,
    is_order_one,
    transfer_from_ddelta,
)
from .cdga import ClosureError, GradingError, Operator, check_square_zero
from .hodge import (
    TransferDiagram,
    build_transfer,
    verify_hodge_de_rham,
    verify_side_conditions,
    verify_transfer,
)
from .hycom import (
    build_ops,
    check_generalized_associativity,
    class_of,
    default_order,
    m3_bidegree,
    nonzero_m3_table,
    operation_bidegree,
    unit_class,
    verify_exp,
)
from .mhc import (
    Complex,
    FiltrationError,
    audit_operation_weights,
    check_alpha_purity,
    check_E1_degeneration,
    check_H2,
    check_strictness,
    filtration_from_spec,
    formality_hypotheses,
    opposed_on_cohomology,
    preserves,
)
from .models import BUILTIN_MODELS, ModelBundle, resolve_model
from .parsing import ParseError, parse_element
from .report import Report, bidegree_str, class_labels, class_str, compact_element

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SWEEP_LIMIT = 16


class UsageError(Exception):
    pass


def _load(spec: str) -> ModelBundle:
    try:
        return resolve_model(spec)
    except KeyError:
        raise UsageError(f"unknown model {spec!r}; built-in models: {', '.join(BUILTIN_MODELS)}, or a presentation file path") from None
    except OSError as exc:
        raise UsageError(f"cannot read {spec!r}: {exc}") from None


def _bv(M: ModelBundle, d: str | None, delta: str | None) -> BVAlgebra:
    try:
        return M.bv_algebra(d, delta)
    except GradingError as exc:
        raise UsageError(str(exc)) from None


def _transfer(B: BVAlgebra, kind: str) -> TransferDiagram:
    if kind == "hodge":
        return build_transfer(B.d)
    try:
        return transfer_from_ddelta(B)
    except DecompositionError as exc:
        raise UsageError(f"dDelta transfer unavailable: {exc}") from None


def _op_values(alg, op: Operator, fmt=compact_element) -> dict[str, str]:
    out = {}
    for k in range(alg.dim):
        col = op.apply_index(k)
        if col:
            out[fmt(alg.basis_element(k))] = fmt(alg.from_sparse(col))
    return out


# -- commands -----------------------------------------------------------------


def cmd_check(args) -> Report:
    M = _load(args.model)
    B = _bv(M, args.d, args.delta)
    R = Report("check", B.name)
    for k, v in M.verify().items():
        R.check(f"model: {k}", v)
    bv = check_bv(B)
    R.check("d^2 = 0", bv["d_squared"])
    R.check("delta^2 = 0", bv["delta_squared"])
    R.check("d delta + delta d = 0", bv["anticommute"])
    R.check("d is a derivation", bv["d_leibniz"])
    R.check("seven-term relation", bv["seven_term"])
    R.check("bracket is a derivation", bv["bracket_derivation"])
    R.check("seven-term and derivation tests agree", bv["seven_term_agrees_with_derivation"])
    R.section("bv", {
        "grading (alpha, beta)": list(B.grading),
        "bracket antisymmetry": bv["bracket_antisymmetry"],
        "triples checked": bv["triples_checked"],
        "counterexamples": bv["counterexamples"],
        "delta order one": is_order_one(B),
    })
    dd = check_ddelta(B)
    R.section("ddelta_condition", dd)
    diamond = cohomology_diamond(B)
    R.section("cohomology_diamond", diamond)
    R.summary.append(f"BV axioms: {'pass' if bv['ok'] else 'fail'}")
    R.summary.append(f"dDelta-condition: {'holds' if dd['ok'] else 'fails'}")
    R.summary.append(f"order-one delta: {'yes' if is_order_one(B) else 'no'}")
    return R


def _class_table(T: TransferDiagram) -> dict[str, dict]:
    labels = class_labels(T)
    table: dict[str, dict] = {}
    for k, bd in enumerate(T.class_bidegrees()):
        key = "mixed" if bd is None else f"({bd[0]},{bd[1]})"
        row = table.setdefault(key, {"dim": 0, "representatives": []})
        row["dim"] += 1
        row["representatives"].append(labels[k])
    return dict(sorted(table.items(), key=lambda kv: _bd_key(kv[0])))


def _bd_key(key: str):
    if key == "mixed":
        return (99, 99)
    p, q = key.strip("()").split(",")
    return (int(q), int(p))


def cmd_cohomology(args) -> Report:
    M = _load(args.model)
    d = M.op(args.d or M.bv[0])
    R = Report("cohomology", f"{M.name}[{args.d or M.bv[0]}]")
    R.check("d^2 = 0", check_square_zero(d)["ok"])
    T = build_transfer(d)
    R.section("table", _class_table(T))
    R.section("total", T.rank)
    if args.delta or args.d is None:
        B = _bv(M, args.d, args.delta)
        R.section("four_cohomologies", cohomology_diamond(B)["dims"])
    return R


def cmd_transfer(args) -> Report:
    M = _load(args.model)
    B = _bv(M, args.d, args.delta)
    T = _transfer(B, args.transfer)
    R = Report("transfer", f"{B.name} ({T.kind})")
    vt = verify_transfer(T)
    for k in ("rho_iota", "homotopy", "d_iota", "rho_d", "h_h", "h_iota", "rho_h"):
        R.check(f"transfer: {k}", vt[k])
    side = verify_side_conditions(T, B.delta)
    if M.side_conditions_claimed and args.d is None and args.delta is None:
        R.check("side conditions", side["ok"])
    R.section("side_conditions", side)
    R.section("hodge_to_de_rham", verify_hodge_de_rham(T, B.delta))
    R.section("classes", class_labels(T))
    R.section("h", _op_values(M.alg, T.h))
    return R


def _parse_classes(text: str, M: ModelBundle, T: TransferDiagram):
    parts = [p.strip() for p in text.split(";") if p.strip()]
    try:
        return [class_of(T, parse_element(p, M.alg)) for p in parts], parts
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _m3_line(labels, idx, value, sym: str = "m₃") -> str:
    args = ",".join(f"[{labels[k]}]" for k in idx)
    return f"{sym}({args}) = {class_str(labels, value)}"


def cmd_hycom(args) -> Report:
    M = _load(args.model)
    B = _bv(M, args.d, args.delta)
    T = _transfer(B, args.transfer)
    order = args.order if args.order is not None else default_order(M.alg)
    ops = build_ops(T, B.delta, order)
    R = Report("hycom", f"{B.name} ({T.kind})")
    R.check("transfer identities", verify_transfer(T)["ok"])
    side = verify_side_conditions(T, B.delta)
    hdr = verify_hodge_de_rham(T, B.delta)
    R.section("hypotheses", {"side conditions": side["ok"], "hodge to de Rham": hdr["ok"]})
    alg = M.alg
    R.section("phi_1", _op_values(alg, ops.triv.phi(1)))
    R.section("phi_n", {f"phi_{n}": "zero" if ops.triv.phi(n).is_zero() else "nonzero" for n in range(2, order + 1)})
    ex = verify_exp(T, B.delta, ops.triv.phis, order)
    R.check(f"exponential identity through z^{order}", ex["ok"])
    R.section("exponential_identity", {f"z^{k}": v for k, v in enumerate(ex["orders"])})
    labels = class_labels(T)
    table = nonzero_m3_table(ops)
    R.section("m3", [_m3_line(labels, idx, v) for idx, v in table])
    if args.classes:
        cls, parts = _parse_classes(args.classes, M, T)
        if len(cls) != 3:
            raise UsageError("--classes expects three ';'-separated closed elements")
        val = ops.on_cohomology(3, cls)
        R.section("m3_requested", f"m₃({', '.join(parts)}) = {class_str(labels, val)}")
    if args.cinfinity:
        lines = []
        for idx in product(range(T.rank), repeat=3):
            v = ops.mu3(*(unit_class(T, k) for k in idx))
            if any(v):
                lines.append(_m3_line(labels, idx, v, "μ₃"))
        R.section("mu3", lines)
    phi_bd = operation_bidegree(ops.triv.phi(1)) if ops.triv.phi(1).is_bihomogeneous() else None
    audit = audit_operation_weights(phi_bd, m3_bidegree(ops), M.case)
    R.section("bidegree_audit", {k: bidegree_str(v) if k in ("phi1", "m3", "expected") else v for k, v in audit.items()})
    if alg.dim <= SWEEP_LIMIT:
        ga = check_generalized_associativity(ops, "cochain")
        R.check("generalized associativity (cochain level, n = 0 and 1)", ga["ok"])
        gh = check_generalized_associativity(ops, "cohomology")
        R.section("generalized_associativity_on_cohomology", {"n0": gh["n0"]["ok"], "n1": gh["n1"]["ok"], "asserted": False})
    else:
        R.section("generalized_associativity", f"skipped: exhaustive sweep limited to dimension {SWEEP_LIMIT}")
    if not table:
        R.summary.append("all higher operations vanish")
    else:
        R.summary.append(f"nonzero m3 values on cohomology: {len(table)}")
    return R


def _prange_checks(cx: Complex, name: str, fil, R: Report, assert_it: bool) -> dict:
    st = check_strictness(cx, fil)
    if assert_it:
        R.check(f"{name} strict", st["ok"])
    return {"preserved": st["preserved"], "strict": st["ok"]}


def cmd_purity(args) -> Report:
    M = _load(args.model)
    dexpr = args.d or M.derham
    d = M.op(dexpr)
    cx = Complex.from_operator(d)
    R = Report("purity", f"{M.name}[{dexpr}]")
    R.check("d^2 = 0", cx.is_complex())
    try:
        W = filtration_from_spec(args.w, cx)
        F = filtration_from_spec(args.f, cx)
        Fb = filtration_from_spec(args.fbar, cx)
    except FiltrationError as exc:
        raise UsageError(str(exc)) from None
    try:
        alpha = Fraction(args.alpha)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad alpha {args.alpha!r}") from None
    filt = {
        f"W ({W.name})": _prange_checks(cx, f"W ({W.name})", W, R, True),
        f"F ({F.name})": _prange_checks(cx, f"F ({F.name})", F, R, False),
        f"Fbar ({Fb.name})": _prange_checks(cx, f"Fbar ({Fb.name})", Fb, R, False),
    }
    R.section("strictness", filt)
    e1 = {}
    for label, fil in (("F", F), ("Fbar", Fb)):
        if preserves(cx, fil):
            res = check_E1_degeneration(cx, fil)
            e1[label] = {"degenerates": res["ok"], "degrees": {str(n): f"{v['E1']} vs {v['H']}" for n, v in res["degrees"].items()}}
        else:
            e1[label] = {"degenerates": None, "reason": "filtration not preserved"}
    R.section("E1_degeneration", e1)
    opp = opposed_on_cohomology(cx, F, Fb)
    R.section("opposedness_on_cohomology", {str(n): {"dim": v["dim"], "opposed": v["opposed"], "gr_gr_oracle_agrees": v["opposed"] == v["gr_gr"]} for n, v in opp.items()})
    if preserves(cx, W) and preserves(cx, F) and preserves(cx, Fb):
        R.section("H2", check_H2(cx, W, F, Fb))
    pur = check_alpha_purity(cx, W, alpha)
    R.check(f"W is {alpha}-pure on cohomology", pur["ok"])
    R.section("purity", {"alpha": str(alpha), **{k: v for k, v in pur.items() if k != "ok"}, "pure": pur["ok"]})
    try:
        B = M.bv_algebra()
        T = build_transfer(B.d)
        ops = build_ops(T, B.delta, 1)
        phi1 = ops.triv.phi(1)
        phi_bd = operation_bidegree(phi1) if phi1.is_bihomogeneous() else None
        audit = audit_operation_weights(phi_bd, phi_bd, M.case)
    except (GradingError, ParseError, ClosureError) as exc:
        audit = {"pure_hodge_pattern": False, "error": str(exc)}
    R.section("operation_weights", {k: bidegree_str(v) if k in ("phi1", "m3", "expected") else v for k, v in audit.items()})
    if not audit.get("pure_hodge_pattern"):
        R.summary.append(f"caveat: operations follow the {M.case} weight pattern, not the pure-Hodge pattern")
    verdict = formality_hypotheses(pur, audit)
    R.summary.append(f"purity: {'yes' if pur['ok'] else 'no'}")
    R.summary.append(f"formality hypotheses (weight purity and pure-Hodge operation weights) satisfied: {'yes' if verdict else 'no'}")
    return R


def cmd_models(args) -> Report:
    R = Report("models", "built-in models")
    entries = {}
    for spec in ("kt", "iwasawa", "iwasawa-orbifold", "torus:1", "torus:2", "eta:torus:2"):
        M = resolve_model(spec)
        entries[spec] = {
            "generators": [g.name for g in M.alg.presentation.generators],
            "dimension": M.alg.dim,
            "bv": f"d = {M.bv[0]}, delta = {M.bv[1]}",
            "case": M.case,
            "notes": M.notes,
        }
    R.section("models", entries)
    R.section("patterns", list(BUILTIN_MODELS))
    return R


COMMANDS = {
    "check": cmd_check,
    "cohomology": cmd_cohomology,
    "transfer": cmd_transfer,
    "hycom": cmd_hycom,
    "purity": cmd_purity,
    "models": cmd_models,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bvhycom", description="Exact BV, hypercommutative and mixed Hodge checks on finite models.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, with_pair: bool = True) -> None:
        sp.add_argument("model", help="built-in model name or presentation file")
        if with_pair:
            sp.add_argument("--d", help="operator expression for d (default: the model's choice)")
            sp.add_argument("--delta", help="operator expression for delta")
        sp.add_argument("--format", choices=("text", "structured"), default="text")

    common(sub.add_parser("check", help="BV axioms, dDelta-condition, order one, cohomology diamond"))
    common(sub.add_parser("cohomology", help="cohomology table by bidegree with representatives"))
    sp = sub.add_parser("transfer", help="homotopy transfer data and side conditions")
    common(sp)
    sp.add_argument("--transfer", choices=("hodge", "ddelta"), default="hodge")
    sp = sub.add_parser("hycom", help="phi_n, exponential identity, m3 and mu3 tables")
    common(sp)
    sp.add_argument("--transfer", choices=("hodge", "ddelta"), default="hodge")
    sp.add_argument("--order", type=int, help="depth N of the exponential identity (default: top degree)")
    sp.add_argument("--cinfinity", action="store_true", help="also tabulate the transferred triple product mu3")
    sp.add_argument("--classes", help="three ';'-separated closed elements to evaluate m3 on")
    sp = sub.add_parser("purity", help="strictness, E1 degeneration, opposedness, purity, weight audit")
    sp.add_argument("model")
    sp.add_argument("--d", help="differential of the filtered complex (default: d = del + dbar)")
    sp.add_argument("--w", default="canonical", help="weight filtration: canonical, column, row or grading:a,b")
    sp.add_argument("--f", default="column")
    sp.add_argument("--fbar", default="row")
    sp.add_argument("--alpha", default="1")
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    sp = sub.add_parser("models", help="list built-in models")
    sp.add_argument("--format", choices=("text", "structured"), default="text")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = report.to_structured() if args.format == "structured" else report.to_text()
    sys.stdout.write(out)
    return EXIT_OK if report.ok else EXIT_FAIL


__all__ = ["build_parser", "main"]
