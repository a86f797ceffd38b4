"""Points of X = GL2 x SL2^(f-1), the group G acting on them, and the functor to modules.

Scalar 2x2 matrices over R are tuples (a, b, c, d) of ring codes.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .bkmod import BKModule, Mat2, ShapedMatrix, Workspace
from .coeffring import CoeffRing, NotInvertible, VSeries
from .tametype import unobstructed


class RelationFails(AssertionError):
    """B_i G_i != F_i Ad(W_i)(phi B_{i-1}) on the window."""


class WindowTooSmall(ValueError):
    """Nothing can be verified at the given Laurent window."""


Scalar2 = tuple[int, int, int, int]


def smul(ring: CoeffRing, x: Scalar2, y: Scalar2) -> Scalar2:
    a, b, c, d = x
    e, f, g, h = y
    add, mul = ring.add, ring.mul
    return (add(mul(a, e), mul(b, g)), add(mul(a, f), mul(b, h)),
            add(mul(c, e), mul(d, g)), add(mul(c, f), mul(d, h)))


def sdet(ring: CoeffRing, x: Scalar2) -> int:
    a, b, c, d = x
    return ring.sub(ring.mul(a, d), ring.mul(b, c))


def sdiag(x: int, y: int) -> Scalar2:
    return (x, 0, 0, y)


@dataclass(frozen=True)
class XPoint:
    ring: CoeffRing
    A: tuple[Scalar2, ...]

    def __post_init__(self):
        if not self.ring.is_unit(sdet(self.ring, self.A[0])):
            raise NotInvertible("det A_0 must be a unit")
        for i, Ai in enumerate(self.A[1:], start=1):
            if sdet(self.ring, Ai) != 1:
                raise ValueError(f"det A_{i} must be 1")

    @property
    def f(self) -> int:
        return len(self.A)

    def to_json(self) -> list:
        r = self.ring
        return [[r.to_json(c) for c in Ai] for Ai in self.A]

    @classmethod
    def from_json(cls, ring: CoeffRing, obj) -> "XPoint":
        return cls(ring, tuple(tuple(ring.from_json(c) for c in Ai) for Ai in obj))


@dataclass(frozen=True)
class GroupElement:
    ring: CoeffRing
    lam: int
    mu: int
    r: tuple[int, ...]
    y: tuple[int, ...]

    def __post_init__(self):
        ring = self.ring
        if not all(ring.is_unit(t) for t in (self.lam, self.mu) + tuple(self.r)):
            raise NotInvertible("lambda, mu and r_i must be units")
        if len(self.r) != len(self.y) - 1:
            raise ValueError("need f-1 torus parameters r_i and f unipotent parameters")

    @property
    def f(self) -> int:
        return len(self.y)

    def r_full(self) -> tuple[int, ...]:
        """(r_0, ..., r_{f-1}) with r_0 = 1."""
        return (1,) + tuple(self.r)

    def to_json(self) -> dict:
        t = self.ring.to_json
        return {"lambda": t(self.lam), "mu": t(self.mu), "r": [t(x) for x in self.r], "m": [t(x) for x in self.y]}

    @classmethod
    def from_json(cls, ring: CoeffRing, obj) -> "GroupElement":
        p = ring.from_json
        return cls(ring, p(obj["lambda"]), p(obj["mu"]), tuple(p(x) for x in obj.get("r", [])),
                   tuple(p(x) for x in obj["m"]))


def identity_element(ring: CoeffRing, f: int) -> GroupElement:
    return GroupElement(ring, 1, 1, (1,) * (f - 1), (0,) * f)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """The element acting as g after h."""
    ring = g.ring
    mul, inv = ring.mul, ring.inv
    rh = h.r_full()
    y = tuple(
        ring.add(mul(g.y[i], mul(h.lam, inv(mul(h.mu, mul(rh[i], rh[i]))))), h.y[i])
        for i in range(g.f)
    )
    r = tuple(mul(a, b) for a, b in zip(g.r, h.r))
    return GroupElement(ring, mul(g.lam, h.lam), mul(g.mu, h.mu), r, y)


def g_action(g: GroupElement, x: XPoint) -> XPoint:
    ring = x.ring
    inv = ring.inv
    f = x.f
    r = g.r_full()
    out = []
    for i in range(f):
        left = sdiag(inv(g.lam), inv(g.mu))
        left = smul(ring, left, sdiag(r[i], inv(r[i])))
        left = smul(ring, left, (1, g.y[i], 0, 1))
        prev = r[(i - 1) % f]
        right = smul(ring, sdiag(inv(prev), prev), sdiag(g.lam, g.mu))
        out.append(smul(ring, smul(ring, left, x.A[i]), right))
    return XPoint(ring, tuple(out))


def functor_T(ws: Workspace, x: XPoint) -> BKModule:
    """Frobenius [[v a_i, u^(e-gamma_i) b_i], [u^gamma_i c_i, d_i]] at each index."""
    frobs = []
    for i, (a, b, c, d) in enumerate(x.A):
        frobs.append(ShapedMatrix(ws.tau.gamma[i], ws.v(1, a), ws.const(b), ws.const(c), ws.const(d)))
    return BKModule(ws, frobs)


def invariant_functions(x: XPoint) -> tuple[int, int]:
    ring = x.ring
    D = sdet(ring, x.A[0])
    Pd = 1
    for Ai in x.A:
        Pd = ring.mul(Pd, Ai[3])
    return D, Pd


def invariant_jacobian(x: XPoint) -> list[list[int]]:
    """d(D, Pd)/d(a_0, b_0, c_0, d_0) at a point with field entries.

    Each partial derivative is read off as the eps-coefficient after
    perturbing one entry of A_0 by eps in F_q[eps]/(eps^2).
    """
    base = x.ring
    if base.k != 1:
        raise ValueError("the Jacobian is taken at a point over the residue field")
    dual = CoeffRing(base.p, base.m, 2)
    q = dual.q
    lift = XPoint(dual, x.A)
    d0 = invariant_functions(lift)
    rows = [[], []]
    for j in range(4):
        A0 = list(lift.A[0])
        A0[j] = dual.add(A0[j], q)
        try:
            pert = XPoint(dual, (tuple(A0),) + lift.A[1:])
        except NotInvertible:
            return [[0] * 4, [0] * 4]
        vals = invariant_functions(pert)
        for r in range(2):
            diff = dual.sub(vals[r], d0[r])
            rows[r].append(dual.digits(diff)[1])
    return rows


def invariants_independent(x: XPoint) -> bool:
    """Some 2x2 minor of the Jacobian is nonzero."""
    J = invariant_jacobian(x)
    ring = x.ring
    for a in range(4):
        for b in range(a + 1, 4):
            m = ring.sub(ring.mul(J[0][a], J[1][b]), ring.mul(J[0][b], J[1][a]))
            if m:
                return True
    return False


def random_xpoint(ring: CoeffRing, f: int, rng: random.Random) -> XPoint:
    mats = []
    while True:
        A0 = tuple(ring.random(rng) for _ in range(4))
        if ring.is_unit(sdet(ring, A0)):
            break
    mats.append(A0)
    for _ in range(1, f):
        while True:
            a, b, c, d = (ring.random(rng) for _ in range(4))
            det = sdet(ring, (a, b, c, d))
            if ring.is_unit(det):
                di = ring.inv(det)
                mats.append((ring.mul(a, di), ring.mul(b, di), c, d))
                break
    return XPoint(ring, tuple(mats))


def random_group_element(ring: CoeffRing, f: int, rng: random.Random) -> GroupElement:
    return GroupElement(
        ring,
        ring.random_unit(rng),
        ring.random_unit(rng),
        tuple(ring.random_unit(rng) for _ in range(f - 1)),
        tuple(ring.random(rng) for _ in range(f)),
    )


# --- Laurent windows --------------------------------------------------------


class Laurent:
    """v^lo times a v-series; known modulo v^(lo + body.prec)."""

    __slots__ = ("lo", "body")

    def __init__(self, lo: int, body: VSeries):
        self.lo, self.body = lo, body

    @classmethod
    def from_series(cls, s: VSeries) -> "Laurent":
        return cls(0, s)

    @property
    def prec(self) -> int:
        return self.lo + self.body.prec

    def coeff(self, k: int) -> int:
        j = k - self.lo
        if 0 <= j < len(self.body.coeffs):
            return self.body.coeffs[j]
        return 0

    def valuation(self) -> int | None:
        v = self.body.valuation()
        return None if v is None else self.lo + v

    def _align(self, o: "Laurent"):
        lo = min(self.lo, o.lo)
        return lo, self.body.shift(self.lo - lo), o.body.shift(o.lo - lo)

    def __add__(self, o):
        lo, a, b = self._align(o)
        return Laurent(lo, a + b)

    def __sub__(self, o):
        lo, a, b = self._align(o)
        return Laurent(lo, a - b)

    def __neg__(self):
        return Laurent(self.lo, -self.body)

    def __mul__(self, o):
        return Laurent(self.lo + o.lo, self.body * o.body)

    def phi(self, p: int) -> "Laurent":
        return Laurent(self.lo * p, self.body.phi())

    def shift(self, r: int) -> "Laurent":
        return Laurent(self.lo + r, self.body)

    def agrees(self, o: "Laurent") -> tuple[bool, int]:
        """Equality on the common window, and the window's top."""
        top = min(self.prec, o.prec)
        lo = min(self.lo, o.lo)
        return all(self.coeff(k) == o.coeff(k) for k in range(lo, top)), top


class LaurentMat:
    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: Laurent, b: Laurent, c: Laurent, d: Laurent):
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def from_mat(cls, m: Mat2, pole: int = 0) -> "LaurentMat":
        return cls(*(Laurent(-pole, x) for x in m.entries()))

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, o):
        return LaurentMat(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                          self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def det(self) -> Laurent:
        return self.a * self.d - self.b * self.c

    def phi(self, p: int) -> "LaurentMat":
        return LaurentMat(*(x.phi(p) for x in self.entries()))

    def twist(self, r: int) -> "LaurentMat":
        return LaurentMat(self.a, self.b.shift(r), self.c.shift(-r), self.d)


def _as_laurent(m) -> LaurentMat:
    return m if isinstance(m, LaurentMat) else LaurentMat.from_mat(m)


def check_etale_base_change(ws: Workspace, F: Sequence, G: Sequence, B: Sequence) -> dict:
    """Verify B_i G_i = F_i Ad(diag(v^(p-1-z_i), 1))(phi B_{i-1}) and report integrality.

    F, G, B are sequences of Mat2 or LaurentMat.
    """
    tau = ws.tau
    ring = ws.ring
    f, p = tau.f, tau.p
    F, G, B = ([_as_laurent(m) for m in seq] for seq in (F, G, B))
    window = None
    for i in range(f):
        lhs = B[i] * G[i]
        rhs = F[i] * B[i - 1].phi(p).twist(p - 1 - tau.z[i])
        for x, y in zip(lhs.entries(), rhs.entries()):
            ok, top = x.agrees(y)
            window = top if window is None else min(window, top)
            if window <= 0:
                raise WindowTooSmall("no coefficient of the relation is known")
            if not ok:
                raise RelationFails(f"relation fails at index {i}")
    det_unit, v_integral, integral_ut = True, True, True
    for Bi in B:
        d = Bi.det()
        low = min(d.lo, 0)
        if any(d.coeff(k) for k in range(low, 0)) or not ring.is_unit(d.coeff(0)):
            det_unit = False
        for x in Bi.entries():
            if any(x.coeff(k) for k in range(min(x.lo, -1), -1)):
                v_integral = False
            if any(x.coeff(k) for k in range(min(x.lo, 0), 0)):
                integral_ut = False
        if Bi.c.coeff(0):
            integral_ut = False
    return {
        "relation_window": window,
        "det_unit": det_unit,
        "v_times_B_integral": v_integral,
        "integral_upper_triangular_mod_v": integral_ut,
        "tau_unobstructed": unobstructed(tau),
        "passed": det_unit and v_integral and (integral_ut or not unobstructed(tau)),
    }
