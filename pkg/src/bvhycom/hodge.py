"""Adjoints, Laplacians, harmonic forms and homotopy-transfer data."""

from __future__ import annotations

from dataclasses import dataclass

from .cdga import (
    Algebra,
    ClosureError,
    Operator,
    conjugate_operator,
    format_element,
    wedge_sign,
)
from .exactlin import (
    I,
    ZERO,
    Matrix,
    Scalar,
    Subspace,
    inverse,
    kernel,
    orthogonal_projection,
    sc,
)


class OrientationError(ValueError):
    pass


def adjoint(op: Operator) -> Operator:
    return op.adjoint()


def star_calibration(m: int) -> Scalar:
    """Volume scale i^m (-1)^(m(m-1)/2); equals 1 in complex dimension 2."""
    k = sc(1)
    for _ in range(m):
        k = k * I
    return k if (m * (m - 1) // 2) % 2 == 0 else -k


def hodge_star(alg: Algebra, kappa: Scalar | None = None) -> Operator:
    """Complex-linear star with  x ^ star(conj y) = <x, y> * kappa * vol.

    ``vol`` is the presentation's volume monomial in its declared order.
    """
    pres = alg.presentation
    full = (1 << pres.n) - 1
    if pres.volume != full:
        raise OrientationError("volume monomial must contain every generator")
    if pres.conj is None:
        raise OrientationError("the star needs a conjugation")
    if kappa is None:
        kappa = star_calibration(pres.complex_dimension)
    vs = pres.volume_sign()
    cols = []
    for L in alg.basis:
        sK, K = pres.conj_mask(L)
        comp = full ^ K
        if comp not in alg.position:
            raise ClosureError("algebra is not closed under the star")
        c = kappa * (vs * sK * wedge_sign(K, comp))
        cols.append({alg.position[comp]: c})
    return Operator(alg, Matrix.from_sparse_columns(cols, alg.dim), "star")


def star_adjoint(op: Operator, kappa: Scalar | None = None) -> Operator:
    """-star . conj(op) . star, the metric-free formula for the adjoint."""
    s = hodge_star(op.alg, kappa)
    out = -(s @ conjugate_operator(op) @ s)
    out.name = f"star_adj({op.name})"
    return out


def laplacian(D: Operator) -> Operator:
    Dt = D.adjoint()
    out = D @ Dt + Dt @ D
    out.name = f"lap({D.name})"
    return out


def degree_blocks(op: Operator) -> list[list[int]]:
    """Finest partition of the basis (by bidegree or total degree) that ``op`` preserves."""
    comps = op.components()
    alg = op.alg
    pres = alg.presentation
    if set(comps) <= {(0, 0)}:
        groups = alg.block_indices(pres.bidegree)
    elif all(r + s == 0 for r, s in comps):
        groups = alg.block_indices(lambda m: m.bit_count())
    else:
        groups = {0: list(range(alg.dim))}
    return [groups[k] for k in sorted(groups)]


def block_kernel(op: Operator) -> Subspace:
    n = op.alg.dim
    vecs = []
    for blk in degree_blocks(op):
        sub = op.matrix.submatrix(blk, blk)
        for v in kernel(sub).basis:
            full = [ZERO] * n
            for k, x in zip(blk, v):
                full[k] = x
            vecs.append(full)
    return Subspace(n, vecs)


def block_inverse(op: Operator) -> Matrix:
    n = op.alg.dim
    rows = [[ZERO] * n for _ in range(n)]
    for blk in degree_blocks(op):
        inv = inverse(op.matrix.submatrix(blk, blk))
        for a, i in enumerate(blk):
            for b, j in enumerate(blk):
                rows[i][j] = inv.entries[a][b]
    return Matrix(rows, n)


def harmonic_basis(D: Operator) -> Subspace:
    return block_kernel(laplacian(D))


def harmonic_projection(D: Operator) -> Operator:
    return Operator(D.alg, orthogonal_projection(harmonic_basis(D)), f"pi({D.name})")


def green(D: Operator) -> Operator:
    """Inverse of the Laplacian on its image, zero on harmonic forms."""
    lap = laplacian(D)
    pi = harmonic_projection(D)
    shifted = lap + pi
    shifted.name = "lap+pi"
    g = Operator(D.alg, block_inverse(shifted), f"G({D.name})") - pi
    g.name = f"G({D.name})"
    return g


@dataclass
class TransferDiagram:
    """Contraction data (iota, rho, h) from a complex (A, d) onto cohomology."""

    alg: Algebra
    d: Operator
    h: Operator
    iota: Matrix
    rho: Matrix
    kind: str = "hodge"

    @property
    def rank(self) -> int:
        return self.iota.cols

    @property
    def proj(self) -> Operator:
        return Operator(self.alg, self.iota @ self.rho, "iota rho")

    def class_rep(self, k: int):
        return self.alg.from_vector(self.iota.column(k))

    def class_labels(self) -> list[str]:
        return [format_element(self.class_rep(k)) for k in range(self.rank)]

    def class_bidegrees(self) -> list[tuple[int, int] | None]:
        return [self.class_rep(k).bidegree() for k in range(self.rank)]


def iota_rho_from_subspace(space: Subspace) -> tuple[Matrix, Matrix]:
    iota = space.basis_matrix()
    if not space.dim:
        return iota, Matrix.zeros(0, space.ambient)
    rho = inverse(iota.H() @ iota) @ iota.H()
    return iota, rho


def build_transfer(D: Operator) -> TransferDiagram:
    """Hodge transfer: harmonic iota, orthogonal rho, h = adj(D) G."""
    H = harmonic_basis(D)
    iota, rho = iota_rho_from_subspace(H)
    h = D.adjoint() @ green(D)
    h.name = "h"
    return TransferDiagram(D.alg, D, h, iota, rho, "hodge")


def verify_transfer(T: TransferDiagram) -> dict:
    n = T.alg.dim
    ident = Matrix.identity(n)
    dm, hm = T.d.matrix, T.h.matrix
    checks = {
        "homotopy": (dm @ hm + hm @ dm) == ident - T.iota @ T.rho,
        "rho_iota": (T.rho @ T.iota) == Matrix.identity(T.rank),
        "d_iota": (dm @ T.iota).is_zero(),
        "rho_d": (T.rho @ dm).is_zero(),
        "h_h": (hm @ hm).is_zero(),
        "h_iota": (hm @ T.iota).is_zero(),
        "rho_h": (T.rho @ hm).is_zero(),
    }
    checks["ok"] = all(checks.values())
    return checks


def verify_side_conditions(T: TransferDiagram, delta: Operator) -> dict:
    out = {
        "delta_iota": (delta.matrix @ T.iota).is_zero(),
        "rho_delta": (T.rho @ delta.matrix).is_zero(),
        "h_delta_anticommute": (T.h @ delta + delta @ T.h).is_zero(),
        "rho_delta_iota": (T.rho @ delta.matrix @ T.iota).is_zero(),
    }
    out["ok"] = out["delta_iota"] and out["rho_delta"] and out["h_delta_anticommute"]
    return out


def verify_hodge_de_rham(T: TransferDiagram, delta: Operator, k_max: int | None = None) -> dict:
    """rho (delta h)^(k-1) delta iota = 0 for k = 1..k_max."""
    if k_max is None:
        k_max = max(T.alg.degrees()) + 1
    dh = (delta @ T.h).matrix
    cur = delta.matrix @ T.iota
    failures = []
    for k in range(1, k_max + 1):
        if not (T.rho @ cur).is_zero():
            failures.append(k)
        cur = dh @ cur
    return {"ok": not failures, "k_max": k_max, "failing_k": failures}


def transport_transfer(T: TransferDiagram, eta: Matrix, target: Algebra, d_target: Operator | None = None) -> TransferDiagram:
    """Conjugate transfer data along an isomorphism eta: target -> T.alg."""
    eta_inv = inverse(eta)
    h = Operator(target, eta_inv @ T.h.matrix @ eta, "h_eta")
    d = d_target or Operator(target, eta_inv @ T.d.matrix @ eta, "d_eta")
    return TransferDiagram(target, d, h, eta_inv @ T.iota, T.rho @ eta, T.kind + "+eta")


def is_isometry(m: Matrix) -> bool:
    return m.H() @ m == Matrix.identity(m.cols)


__all__ = [
    "OrientationError",
    "TransferDiagram",
    "adjoint",
    "block_kernel",
    "build_transfer",
    "degree_blocks",
    "green",
    "harmonic_basis",
    "harmonic_projection",
    "hodge_star",
    "is_isometry",
    "laplacian",
    "star_adjoint",
    "star_calibration",
    "transport_transfer",
    "verify_hodge_de_rham",
    "verify_side_conditions",
    "verify_transfer",
]

