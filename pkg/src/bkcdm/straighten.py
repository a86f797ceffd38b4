"""Unipotent modifications of Frobenius data and the base changes realising them.

All matrices here are eta'-eigenspace restrictions (:class:`Mat2`).  The
upper unipotent U = [[1, y], [0, 1]] acts on the left; straightening finds
J_i with

    G_i = J_i^-1 (U_i G_i) Ad(diag(v^(p-1-z_i), 1))(phi J_{i-1})

as the v-adic limit of

    J_i <- U_i G_i Ad(diag(v^(p-1-z_i), 1))(phi J_{i-1}) G_i^-1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .bkmod import BKModule, Mat2, ShapedMatrix, Workspace, restricted_base_change, validate_base_change
from .cdm import CDMResult, NoConvergence
from .coeffring import NonDivisible, VSeries
from .quotient import GroupElement, XPoint, functor_T, g_action
from .tametype import second_obstruction


def star_upper(ws: Workspace, y: int, F: ShapedMatrix) -> ShapedMatrix:
    """(v a, b, c, d) -> (v (a + y c), b + y d, c, d)."""
    x1, x2, x3, x4 = F.x
    return ShapedMatrix(F.gamma, x1 + x3.shift(1).scale(y), x2 + x4.scale(y), x3, x4)


def star_lower(ws: Workspace, y: int, F: ShapedMatrix) -> ShapedMatrix:
    """(a, b, c, v d) -> (a, b, c + y a, v (d + y b))."""
    x1, x2, x3, x4 = F.x
    return ShapedMatrix(F.gamma, x1, x2, x3 + x1.scale(y), x4 + x2.shift(1).scale(y))


def unipotent(ws: Workspace, y: int) -> Mat2:
    return Mat2(ws.one(), ws.const(y), ws.zero(), ws.one())


@dataclass
class StraighteningData:
    J: list[Mat2]
    iterations: int
    trace: list[int | None] = field(default_factory=list)

    def functorial(self) -> list[Mat2]:
        """F_i(U) = J_i^-1, the base change from G to U G."""
        return [Ji.inverse() for Ji in self.J]

    def to_json(self) -> dict:
        return {"J": [Ji.to_json() for Ji in self.J], "iterations": self.iterations,
                "difference_valuations": self.trace}


def straighten_budget(ws: Workspace) -> int:
    f = ws.f
    return f * (ws.prec_v + 2 * f + 4)


def straighten_step(ws: Workspace, U: Sequence[Mat2], G: Sequence[Mat2], J: Sequence[Mat2]) -> list[Mat2]:
    tau = ws.tau
    p = tau.p
    out = []
    for i in range(tau.f):
        Gi = G[i]
        D = Gi.det().divide_exact(1)
        twisted = J[i - 1].phi().twist(p - 1 - tau.z[i])
        num = (U[i] * Gi) * twisted * Gi.adjugate()
        out.append(_scale_series(num.divide_exact(1), D.inverse()))
    return out


def _scale_series(m: Mat2, s: VSeries) -> Mat2:
    return Mat2(*(x * s for x in m.entries()))


def straighten(ws: Workspace, y: Sequence[int], G: Sequence[Mat2], max_iter: int | None = None) -> StraighteningData:
    """Iterate from J = Id until the iterates repeat exactly."""
    budget = straighten_budget(ws) if max_iter is None else max_iter
    U = [unipotent(ws, yi) for yi in y]
    J = [Mat2.identity(ws) for _ in range(ws.f)]
    trace: list[int | None] = []
    for it in range(1, budget + 1):
        try:
            Jn = straighten_step(ws, U, G, J)
        except NonDivisible as exc:
            raise NoConvergence(f"iterate {it} left R[[v]]: {exc}", trace) from exc
        vals = [(a - b).valuation() for a, b in zip(Jn, J)]
        known = [v for v in vals if v is not None]
        trace.append(min(known) if known else None)
        if all(a.identical(b) for a, b in zip(Jn, J)):
            return StraighteningData(Jn, it, trace)
        J = Jn
    raise NoConvergence(f"straightening did not stabilise in {budget} iterations", trace)


def straighten_identity(ws: Workspace, y: Sequence[int], G: Sequence[Mat2], J: Sequence[Mat2]) -> bool:
    """G_i = J_i^-1 (U_i G_i) Ad(W_i)(phi J_{i-1}) at working precision."""
    U = [unipotent(ws, yi) for yi in y]
    return all(G[i] == restricted_base_change(ws, U[i] * G[i], J[i], J[i - 1], i) for i in range(ws.f))


def full_base_change(ws: Workspace, J: Sequence[Mat2]) -> list[ShapedMatrix]:
    """The inertial base change in u-shape whose restriction is J (needs v | lower left)."""
    return [ShapedMatrix.from_restricted(ws.tau.gamma[i], Ji) for i, Ji in enumerate(J)]


def is_integral_straightening(ws: Workspace, J: Sequence[Mat2]) -> bool:
    if any(Ji.c.constant() != 0 for Ji in J):
        return False
    if any(not ws.ring.is_unit(Ji.det().constant()) for Ji in J):
        return False
    return validate_base_change(ws, full_base_change(ws, J))


def first_difference(ws: Workspace, y: int, G: Mat2) -> Mat2:
    """J^(2) - J^(1) for f = 1 and scalar G = [[v a, b], [v c, d]]:
    v^(p-z) (y/D) U [[-ac, a^2], [-c^2, ac]]."""
    ring = ws.ring
    tau = ws.tau
    a = G.a.coeffs[1]
    b, c, d = G.b.constant(), G.c.coeffs[1], G.d.constant()
    D = ring.sub(ring.mul(a, d), ring.mul(b, c))
    k = ring.div(y, D)
    mul, neg = ring.mul, ring.neg
    inner = Mat2.scalars(ws, neg(mul(a, c)), mul(a, a), neg(mul(c, c)), mul(a, c))
    r = tau.p - tau.z[0]
    return _scale_series(unipotent(ws, y) * inner, ws.v(r, k))


# --- reachability -----------------------------------------------------------


def reachability(M: BKModule, result: CDMResult) -> list[dict]:
    """Whether each F'_i = Delta_i M_i is U_i * F_i for an upper unipotent U_i.

    M must have scalar entries in eta-form.  Also reports the criterion
    "z_i != 0 or sbar_{i-1} = 0" on the constant parts of the limit.
    """
    ws = M.ws
    ring = ws.ring
    out = []
    for i, F in enumerate(M.frobs):
        Fp = result.intermediate[i]
        y = _solve_upper(ring, F, Fp)
        reachable = y is not None and star_upper(ws, y, F) == Fp
        sbar = result.limit[i - 1].x3.constant()
        criterion = ws.tau.z[i] != 0 or sbar == 0
        out.append({"index": i, "reachable": reachable, "criterion": criterion,
                    "y": ring.to_json(y) if reachable else None})
    return out


def _solve_upper(ring, F: ShapedMatrix, Fp: ShapedMatrix) -> int | None:
    c, d = F.x3.constant(), F.x4.constant()
    if not (F.x3 == Fp.x3 and F.x4 == Fp.x4):
        return None
    if ring.is_unit(d):
        return ring.div(ring.sub(Fp.x2.constant(), F.x2.constant()), d)
    if ring.is_unit(c):
        a, ap = F.x1.coeffs[1], Fp.x1.coeffs[1]
        return ring.div(ring.sub(ap, a), c)
    return None


def reachability_witness(ws: Workspace, a0: int, b0: int, c0: int, d0: int,
                         a1: int, b1: int, c1: int, d1: int) -> BKModule:
    """f = 2 scalar eta-form data with F_i = (v a_i, b_i, c_i, d_i)."""
    frobs = [
        ShapedMatrix(ws.tau.gamma[0], ws.v(1, a0), ws.const(b0), ws.const(c0), ws.const(d0)),
        ShapedMatrix(ws.tau.gamma[1], ws.v(1, a1), ws.const(b1), ws.const(c1), ws.const(d1)),
    ]
    return BKModule(ws, frobs)


# --- assembling base changes for the group action ------------------------------


def assemble_F(ws: Workspace, g: GroupElement, x: XPoint, max_iter: int | None = None) -> list[Mat2]:
    """J_0 = F_0(m) diag(lam, mu), J_i = F_i(m) diag(r_i^-1, r_i) diag(lam, mu)."""
    ring = ws.ring
    G = functor_T(ws, x).restricted()
    data = straighten(ws, g.y, G, max_iter)
    Fm = data.functorial()
    r = g.r_full()
    out = []
    for i in range(ws.f):
        lam_mu = Mat2.diag(ws, g.lam, g.mu)
        if i == 0:
            out.append(Fm[0] * lam_mu)
        else:
            out.append(Fm[i] * Mat2.diag(ws, ring.inv(r[i]), r[i]) * lam_mu)
    return out


def presentation_identity(ws: Workspace, g: GroupElement, x: XPoint, J: Sequence[Mat2]) -> bool:
    """J carries the restricted Frobenius of T(x) to that of T(g x)."""
    before = functor_T(ws, x).restricted()
    after = functor_T(ws, g_action(g, x)).restricted()
    return all(after[i] == restricted_base_change(ws, before[i], J[i], J[i - 1], i) for i in range(ws.f))


def obstruction_free(ws: Workspace) -> bool:
    return not second_obstruction(ws.p, ws.tau.z)
