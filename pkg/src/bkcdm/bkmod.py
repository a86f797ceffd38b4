"""Rank-2 Breuil-Kisin data with tame descent, in inertial bases.

A Frobenius matrix at index i has the shape

    [[s1, u^(e-gamma_i) s2], [u^gamma_i s3, s4]]      s_j in R[[v]]

and is stored as the four v-series (s1, s2, s3, s4).  Inertial base-change
matrices have the same shape, so both are :class:`ShapedMatrix`.  Products of
two such matrices with the same gamma stay in shape:

    x * y = (x1 y1 + v x2 y3,  x1 y2 + x2 y4,  x3 y1 + x4 y3,  v x3 y2 + x4 y4)

Restricting to the eta'-eigenspace gives the plain matrix
[[s1, s2], [v s3, s4]] over R[[v]] (:class:`Mat2`).
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Sequence

from .coeffring import (
    CoeffRing,
    NotInvertible,
    PrecisionExhausted,
    SeriesSpace,
    USeries,
    VSeries,
    random_vseries,
)
from .tametype import TameType


class NotHodgeV0(ValueError):
    """v does not divide s1*s4, so the genre is undefined."""


class NotRegular(ValueError):
    """Some Frobenius matrix fails Hodge type v0 or is in neither form."""


class Genre(str, enum.Enum):
    I_ETA = "I_eta"
    I_ETA_PRIME = "I_eta_prime"
    II = "II"

    def merged(self) -> str:
        return "II" if self is Genre.II else "I"


class Form(str, enum.Enum):
    ETA = "eta"
    ETA_PRIME = "eta_prime"


class Workspace:
    """Type, coefficient ring and working precision shared by all matrices."""

    def __init__(self, tau: TameType, ring: CoeffRing | None = None, prec_u: int | None = None):
        if ring is None:
            ring = CoeffRing(tau.p)
        if ring.p != tau.p:
            raise ValueError("ring characteristic differs from the type's p")
        self.tau = tau
        self.ring = ring
        self.e = tau.e
        if prec_u is None:
            prec_u = tau.e * tau.p * (tau.f + 2)
        if prec_u < 2 * tau.e:
            raise ValueError("working precision must be at least 2e")
        self.prec_u = prec_u
        self.prec_v = prec_u // tau.e
        self.vspace = SeriesSpace(ring, "v", self.prec_v, 1, tau.e)
        self.uspace = SeriesSpace(ring, "u", prec_u, tau.e, tau.e)

    @property
    def p(self) -> int:
        return self.tau.p

    @property
    def f(self) -> int:
        return self.tau.f

    def metadata(self) -> dict:
        out = self.ring.metadata()
        out.update({"prec_u": self.prec_u, "prec_v": self.prec_v, "tau": self.tau.to_json()})
        return out

    # series constructors
    def series(self, coeffs: Sequence[int] = (), prec: int | None = None) -> VSeries:
        return VSeries(self.vspace, coeffs, prec)

    def const(self, c: int) -> VSeries:
        return VSeries.const(self.vspace, c)

    def zero(self) -> VSeries:
        return VSeries.zero(self.vspace)

    def one(self) -> VSeries:
        return VSeries.const(self.vspace, 1)

    def v(self, power: int = 1, c: int = 1) -> VSeries:
        return VSeries.monomial(self.vspace, c, power)

    def scalar(self, c) -> VSeries:
        if isinstance(c, VSeries):
            return c
        return self.const(self.ring.from_int(c) if isinstance(c, int) and c < 0 else c)

    def random_series(self, rng: random.Random, scalar: bool = False) -> VSeries:
        if scalar:
            return self.const(self.ring.random(rng))
        return random_vseries(self.vspace, rng)

    def random_unit_series(self, rng: random.Random, scalar: bool = False) -> VSeries:
        s = self.random_series(rng, scalar)
        c = self.ring.random_unit(rng)
        return VSeries(self.vspace, (c,) + s.coeffs[1:], s.prec)


class Mat2:
    """Plain 2x2 matrix over R[[v]]."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: VSeries, b: VSeries, c: VSeries, d: VSeries):
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def identity(cls, ws: Workspace) -> "Mat2":
        return cls(ws.one(), ws.zero(), ws.zero(), ws.one())

    @classmethod
    def scalars(cls, ws: Workspace, a, b, c, d) -> "Mat2":
        return cls(ws.scalar(a), ws.scalar(b), ws.scalar(c), ws.scalar(d))

    @classmethod
    def diag(cls, ws: Workspace, x: int, y: int) -> "Mat2":
        return cls(ws.const(x), ws.zero(), ws.zero(), ws.const(y))

    def entries(self) -> tuple[VSeries, VSeries, VSeries, VSeries]:
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, o: "Mat2") -> "Mat2":
        return Mat2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def __add__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    def __sub__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def scale(self, c: int) -> "Mat2":
        return Mat2(*(x.scale(c) for x in self.entries()))

    def det(self) -> VSeries:
        return self.a * self.d - self.b * self.c

    def adjugate(self) -> "Mat2":
        return Mat2(self.d, -self.b, -self.c, self.a)

    def inverse(self) -> "Mat2":
        dinv = self.det().inverse()
        return Mat2(*(x * dinv for x in self.adjugate().entries()))

    def phi(self) -> "Mat2":
        return Mat2(*(x.phi() for x in self.entries()))

    def divide_exact(self, r: int) -> "Mat2":
        return Mat2(*(x.divide_exact(r) for x in self.entries()))

    def twist(self, r: int) -> "Mat2":
        """Ad(diag(v^r, 1)): conjugation, exact division of the lower-left entry."""
        return Mat2(self.a, self.b.shift(r), self.c.divide_exact(r), self.d)

    def valuation(self) -> int | None:
        vals = [x.valuation() for x in self.entries()]
        vals = [x for x in vals if x is not None]
        return min(vals) if vals else None

    def min_prec(self) -> int:
        return min(x.prec for x in self.entries())

    def __eq__(self, o) -> bool:
        if not isinstance(o, Mat2):
            return NotImplemented
        return all(x == y for x, y in zip(self.entries(), o.entries()))

    __hash__ = None

    def identical(self, o: "Mat2") -> bool:
        return all(x.identical(y) for x, y in zip(self.entries(), o.entries()))

    def constants(self) -> tuple[int, int, int, int]:
        return tuple(x.constant() for x in self.entries())

    def to_json(self) -> dict:
        return {k: x.to_json() for k, x in zip(("a", "b", "c", "d"), self.entries())}

    @classmethod
    def from_json(cls, ws: Workspace, obj) -> "Mat2":
        return cls(*(VSeries.from_json(ws.vspace, obj[k]) for k in ("a", "b", "c", "d")))

    def __repr__(self):
        return f"Mat2({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"


class ShapedMatrix:
    """[[x1, u^(e-gamma) x2], [u^gamma x3, x4]] stored as four v-series."""

    __slots__ = ("gamma", "x")

    def __init__(self, gamma: int, x1: VSeries, x2: VSeries, x3: VSeries, x4: VSeries):
        self.gamma = gamma
        self.x = (x1, x2, x3, x4)

    @classmethod
    def identity(cls, ws: Workspace, gamma: int) -> "ShapedMatrix":
        return cls(gamma, ws.one(), ws.zero(), ws.zero(), ws.one())

    @classmethod
    def diag(cls, ws: Workspace, gamma: int, x: int, y: int) -> "ShapedMatrix":
        return cls(gamma, ws.const(x), ws.zero(), ws.zero(), ws.const(y))

    @classmethod
    def scalars(cls, ws: Workspace, gamma: int, x1, x2, x3, x4) -> "ShapedMatrix":
        return cls(gamma, *(ws.scalar(c) for c in (x1, x2, x3, x4)))

    @property
    def x1(self):
        return self.x[0]

    @property
    def x2(self):
        return self.x[1]

    @property
    def x3(self):
        return self.x[2]

    @property
    def x4(self):
        return self.x[3]

    def __mul__(self, o: "ShapedMatrix") -> "ShapedMatrix":
        x1, x2, x3, x4 = self.x
        y1, y2, y3, y4 = o.x
        return ShapedMatrix(
            self.gamma,
            x1 * y1 + (x2 * y3).shift(1),
            x1 * y2 + x2 * y4,
            x3 * y1 + x4 * y3,
            (x3 * y2).shift(1) + x4 * y4,
        )

    def __sub__(self, o: "ShapedMatrix") -> "ShapedMatrix":
        return ShapedMatrix(self.gamma, *(a - b for a, b in zip(self.x, o.x)))

    def __add__(self, o: "ShapedMatrix") -> "ShapedMatrix":
        return ShapedMatrix(self.gamma, *(a + b for a, b in zip(self.x, o.x)))

    def det(self) -> VSeries:
        x1, x2, x3, x4 = self.x
        return x1 * x4 - (x2 * x3).shift(1)

    def inverse(self) -> "ShapedMatrix":
        dinv = self.det().inverse()
        x1, x2, x3, x4 = self.x
        return ShapedMatrix(self.gamma, x4 * dinv, -(x2 * dinv), -(x3 * dinv), x1 * dinv)

    def phi_to(self, gamma_next: int, z_next: int, p: int) -> "ShapedMatrix":
        """phi of a gamma_{i-1}-shaped matrix, re-read in gamma_i shape."""
        x1, x2, x3, x4 = self.x
        return ShapedMatrix(gamma_next, x1.phi(), x2.phi().shift(p - 1 - z_next), x3.phi().shift(z_next), x4.phi())

    def left_diag(self, x: int, y: int) -> "ShapedMatrix":
        """diag(x, y) * self for scalars x, y."""
        x1, x2, x3, x4 = self.x
        return ShapedMatrix(self.gamma, x1.scale(x), x2.scale(x), x3.scale(y), x4.scale(y))

    def right_diag(self, x: int, y: int) -> "ShapedMatrix":
        x1, x2, x3, x4 = self.x
        return ShapedMatrix(self.gamma, x1.scale(x), x2.scale(y), x3.scale(x), x4.scale(y))

    def restrict(self) -> Mat2:
        """The eta'-eigenspace matrix [[x1, x2], [v x3, x4]]."""
        x1, x2, x3, x4 = self.x
        return Mat2(x1, x2, x3.shift(1), x4)

    @classmethod
    def from_restricted(cls, gamma: int, m: Mat2) -> "ShapedMatrix":
        return cls(gamma, m.a, m.b, m.c.divide_exact(1), m.d)

    def to_full(self, ws: Workspace) -> tuple[USeries, USeries, USeries, USeries]:
        e, g = ws.e, self.gamma
        x1, x2, x3, x4 = self.x
        return (x1.to_u(ws.uspace), x2.to_u(ws.uspace).shift(e - g), x3.to_u(ws.uspace).shift(g), x4.to_u(ws.uspace))

    @classmethod
    def from_full(cls, ws: Workspace, gamma: int, full: Sequence[USeries]) -> "ShapedMatrix":
        e = ws.e
        b1, b2, b3, b4 = full
        return cls(
            gamma,
            b1.to_v(ws.vspace, 0),
            b2.to_v(ws.vspace, e - gamma),
            b3.to_v(ws.vspace, gamma),
            b4.to_v(ws.vspace, 0),
        )

    def constants(self) -> tuple[int, int, int, int]:
        return tuple(s.constant() for s in self.x)

    def min_prec(self) -> int:
        return min(s.prec for s in self.x)

    def __eq__(self, o) -> bool:
        if not isinstance(o, ShapedMatrix):
            return NotImplemented
        return self.gamma == o.gamma and all(a == b for a, b in zip(self.x, o.x))

    __hash__ = None

    def identical(self, o: "ShapedMatrix") -> bool:
        return self.gamma == o.gamma and all(a.identical(b) for a, b in zip(self.x, o.x))

    def to_json(self) -> dict:
        return {f"s{j + 1}": s.to_json() for j, s in enumerate(self.x)}

    @classmethod
    def from_json(cls, ws: Workspace, gamma: int, obj) -> "ShapedMatrix":
        return cls(gamma, *(VSeries.from_json(ws.vspace, obj[f"s{j}"]) for j in (1, 2, 3, 4)))

    def __repr__(self):
        return f"Shaped(gamma={self.gamma}; {self.x1!r}, {self.x2!r}, {self.x3!r}, {self.x4!r})"


FrobeniusMatrix = ShapedMatrix


@dataclass
class BKModule:
    ws: Workspace
    frobs: list[ShapedMatrix]

    def __post_init__(self):
        if len(self.frobs) != self.ws.f:
            raise ValueError(f"expected {self.ws.f} Frobenius matrices")
        for i, F in enumerate(self.frobs):
            if F.gamma != self.ws.tau.gamma[i]:
                raise ValueError(f"matrix {i} has gamma {F.gamma}, expected {self.ws.tau.gamma[i]}")

    @property
    def tau(self) -> TameType:
        return self.ws.tau

    @property
    def ring(self) -> CoeffRing:
        return self.ws.ring

    def genres(self) -> list[Genre]:
        return [genre_of(F) for F in self.frobs]

    def forms(self) -> list[Form]:
        return [form_of(F) for F in self.frobs]

    def is_regular(self) -> bool:
        try:
            check_regular(self)
        except (NotRegular, NotHodgeV0):
            return False
        return True

    def restricted(self) -> list[Mat2]:
        return [F.restrict() for F in self.frobs]

    def to_json(self) -> dict:
        return {
            "tau": self.tau.to_json(),
            "ring": {"p": self.ring.p, "m": self.ring.m, "k": self.ring.k},
            "prec_u": self.ws.prec_u,
            "frobs": [dict(i=i, **F.to_json()) for i, F in enumerate(self.frobs)],
        }

    @classmethod
    def from_json(cls, obj, prec_u: int | None = None) -> "BKModule":
        tau = TameType.from_json(obj["tau"])
        r = obj.get("ring", {})
        ring = CoeffRing(tau.p, int(r.get("m", 1)), int(r.get("k", 1)))
        ws = Workspace(tau, ring, prec_u or obj.get("prec_u"))
        frobs = [None] * tau.f
        for entry in obj["frobs"]:
            i = int(entry["i"])
            frobs[i] = ShapedMatrix.from_json(ws, tau.gamma[i], entry)
        if any(F is None for F in frobs):
            raise ValueError("missing Frobenius matrix")
        return cls(ws, frobs)


def genre_of(F: ShapedMatrix) -> Genre:
    ring = F.x1.ring
    c1, c4 = F.x1.constant(), F.x4.constant()
    if ring.mul(c1, c4) != 0:
        raise NotHodgeV0("v does not divide s1*s4")
    u1, u4 = ring.is_unit(c1), ring.is_unit(c4)
    if u4 and not u1:
        return Genre.I_ETA
    if u1 and not u4:
        return Genre.I_ETA_PRIME
    if not u1 and not u4:
        return Genre.II
    raise NotHodgeV0("both diagonal entries are units")


def form_of(F: ShapedMatrix) -> Form | None:
    """eta-form if v | s1, else eta'-form if v | s4, else None."""
    if F.x1.constant() == 0:
        return Form.ETA
    if F.x4.constant() == 0:
        return Form.ETA_PRIME
    return None


def is_hodge_v0_matrix(F: ShapedMatrix) -> bool:
    """det = v * unit (over a field: u-adic valuation of det is exactly e)."""
    d = F.det()
    if d.prec < 2:
        raise PrecisionExhausted("determinant known only modulo v")
    return d.coeffs[0] == 0 and d.ring.is_unit(d.coeffs[1])


def hodge_v0(M: BKModule) -> bool:
    return all(is_hodge_v0_matrix(F) for F in M.frobs)


def check_regular(M: BKModule) -> None:
    for i, F in enumerate(M.frobs):
        if not is_hodge_v0_matrix(F):
            raise NotRegular(f"matrix {i} is not of Hodge type v0")
        if form_of(F) is None:
            raise NotRegular(f"matrix {i} is in neither eta- nor eta'-form")


def base_change_step(ws: Workspace, F: ShapedMatrix, P_cur: ShapedMatrix, P_prev: ShapedMatrix, i: int) -> ShapedMatrix:
    """P_i^{-1} F_i phi(P_{i-1})."""
    tau = ws.tau
    return P_cur.inverse() * (F * P_prev.phi_to(tau.gamma[i], tau.z[i], tau.p))


def apply_base_change(M: BKModule, P: Sequence[ShapedMatrix]) -> BKModule:
    f = M.ws.f
    if len(P) != f:
        raise ValueError(f"expected {f} base-change matrices")
    for i, Pi in enumerate(P):
        if not M.ring.is_unit(Pi.det().constant()):
            raise NotInvertible(f"base change {i} is not invertible")
    return BKModule(M.ws, [base_change_step(M.ws, M.frobs[i], P[i], P[i - 1], i) for i in range(f)])


def _exponents_ok(s: USeries, residue: int, lowest: int, e: int) -> bool:
    return all(exp % e == residue % e and exp >= lowest for exp in s.terms)


def validate_base_change(ws: Workspace, P: Sequence) -> bool:
    """Each P_i (full u-matrix or ShapedMatrix) has the inertial shape and a unit determinant."""
    e = ws.e
    ring = ws.ring
    if len(P) != ws.f:
        return False
    for i, Pi in enumerate(P):
        g = ws.tau.gamma[i]
        if isinstance(Pi, ShapedMatrix):
            if Pi.gamma != g:
                return False
            Pi = Pi.to_full(ws)
        b1, b2, b3, b4 = Pi
        if not (_exponents_ok(b1, 0, 0, e) and _exponents_ok(b4, 0, 0, e)):
            return False
        if not _exponents_ok(b2, e - g, e - g, e) or not _exponents_ok(b3, g, g, e):
            return False
        d0 = ring.sub(ring.mul(b1.coefficient(0), b4.coefficient(0)), ring.mul(b2.coefficient(0), b3.coefficient(0)))
        if not ring.is_unit(d0):
            return False
    return True


def restricted_base_change(ws: Workspace, G: Mat2, J_cur: Mat2, J_prev: Mat2, i: int) -> Mat2:
    """J_i^{-1} G_i Ad(diag(v^(p-1-z_i), 1))(phi J_{i-1})."""
    tau = ws.tau
    return J_cur.inverse() * (G * J_prev.phi().twist(tau.p - 1 - tau.z[i]))


def eta_prime_restrict(F: ShapedMatrix) -> Mat2:
    return F.restrict()


def random_shaped(ws: Workspace, rng: random.Random, gamma: int, scalar: bool = False) -> ShapedMatrix:
    return ShapedMatrix(gamma, *(ws.random_series(rng, scalar) for _ in range(4)))


def random_base_change_matrix(ws: Workspace, rng: random.Random, gamma: int, scalar: bool = False) -> ShapedMatrix:
    while True:
        P = random_shaped(ws, rng, gamma, scalar)
        if ws.ring.is_unit(P.det().constant()):
            return P


def random_base_change(ws: Workspace, rng: random.Random, scalar: bool = False) -> list[ShapedMatrix]:
    return [random_base_change_matrix(ws, rng, g, scalar) for g in ws.tau.gamma]


def random_frobenius(ws: Workspace, rng: random.Random, i: int, form: Form = Form.ETA,
                     genre: Genre | None = None, scalar: bool = False) -> ShapedMatrix:
    """A regular matrix in the given form; genre I or II is forced when asked."""
    ring = ws.ring
    g = ws.tau.gamma[i]
    while True:
        s1, s2, s3, s4 = (ws.random_series(rng, scalar) for _ in range(4))
        if form is Form.ETA:
            diag_unit = ring.is_unit(s4.constant())
            want = None if genre is None else genre is Genre.I_ETA
            if want is not None and diag_unit != want:
                continue
            F = ShapedMatrix(g, s1.shift(1), s2, s3, s4)
        else:
            diag_unit = ring.is_unit(s1.constant())
            want = None if genre is None else genre is Genre.I_ETA_PRIME
            if want is not None and diag_unit != want:
                continue
            F = ShapedMatrix(g, s1, s2, s3, s4.shift(1))
        if is_hodge_v0_matrix(F):
            return F


def random_module(ws: Workspace, rng: random.Random, forms: Sequence[Form] | None = None,
                  genres: Sequence[Genre | None] | None = None, scalar: bool = False) -> BKModule:
    f = ws.f
    forms = forms or [Form.ETA] * f
    genres = genres or [None] * f
    return BKModule(ws, [random_frobenius(ws, rng, i, forms[i], genres[i], scalar) for i in range(f)])
