"""Normal forms for Frobenius data: the B-operator and the CDM sweep.

CDM matrices at index i >= 1 are stored as

    I_eta       (v, 0, A, 1)        II, eta-form    (0, -1, 1, A')
    I_eta'      (1, A', 0, v)       II, eta'-form   (A, -1, 1, 0)

and at i = 0 they are multiplied on the left by diag(alpha, alpha').
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bkmod import (
    BKModule,
    Form,
    Genre,
    NotRegular,
    ShapedMatrix,
    Workspace,
    apply_base_change,
    check_regular,
    form_of,
)
from .coeffring import CoeffRing, NotInvertible, VSeries
from .tametype import as_subset, is_transition, tilde_z


class DetNotUnitTimesV(ValueError):
    """det G is not v times a unit."""


class NoConvergence(RuntimeError):
    """An iteration did not stabilise within its budget."""

    def __init__(self, msg: str, trace: list | None = None):
        super().__init__(msg)
        self.trace = trace or []


class NonUnitDenominator(ValueError):
    """A closed formula needs to divide by a non-unit."""


# --- B-operator ----------------------------------------------------------


@dataclass
class BResult:
    B: ShapedMatrix
    M: ShapedMatrix
    scalar: int
    genre_two: bool
    form: Form


def _check_det(G: ShapedMatrix) -> int:
    d = G.det()
    ring = d.ring
    if d.prec < 2 or d.coeffs[0] != 0 or not ring.is_unit(d.coeffs[1]):
        raise DetNotUnitTimesV("det is not v times a unit")
    return d.coeffs[1]


def b_operation(G: ShapedMatrix, form: Form | None = None) -> BResult:
    """Factor G = B(G) * M with M a CDM factor and B(G) invertible."""
    _check_det(G)
    if form is None:
        form = form_of(G)
        if form is None:
            raise NotRegular("matrix is in neither eta- nor eta'-form")
    x1, x2, x3, x4 = G.x
    ring = x1.ring
    space = x1.space
    g = G.gamma
    one = VSeries.const(space, 1)
    zero = VSeries.zero(space)
    vv = VSeries.monomial(space, 1, 1)
    if form is Form.ETA:
        s1 = x1.divide_exact(1)
        if ring.is_unit(x4.constant()):
            A = ring.div(x3.constant(), x4.constant())
            B = ShapedMatrix(g, s1 - x2.scale(A), x2, (x3 - x4.scale(A)).divide_exact(1), x4)
            M = ShapedMatrix(g, vv, zero, VSeries.const(space, A), one)
            return BResult(B, M, A, False, form)
        A = ring.div(x4.constant(), x3.constant())
        B = ShapedMatrix(g, x2 - s1.scale(A), s1, (x4 - x3.scale(A)).divide_exact(1), x3)
        M = ShapedMatrix(g, zero, one, one, VSeries.const(space, A))
        return BResult(B, M, A, True, form)
    s4 = x4.divide_exact(1)
    if ring.is_unit(x1.constant()):
        A = ring.div(x2.constant(), x1.constant())
        B = ShapedMatrix(g, x1, (x2 - x1.scale(A)).divide_exact(1), x3, s4 - x3.scale(A))
        M = ShapedMatrix(g, one, VSeries.const(space, A), zero, vv)
        return BResult(B, M, A, False, form)
    A = ring.div(x1.constant(), x2.constant())
    B = ShapedMatrix(g, x2, (x1 - x2.scale(A)).divide_exact(1), x4.divide_exact(1), x3 - s4.scale(A))
    M = ShapedMatrix(g, VSeries.const(space, A), one, one, zero)
    return BResult(B, M, A, True, form)


# --- bad genre -------------------------------------------------------------


def _def_bad_genre(p: int, pairs: Sequence[tuple[Genre, int]]) -> bool:
    IE, IEP, II = Genre.I_ETA, Genre.I_ETA_PRIME, Genre.II
    allowed = {(II, 0), (II, p - 1), (IE, 1), (IE, p - 1), (IEP, 0), (IEP, p - 2)}
    c2 = {(II, 0), (IEP, 0), (IEP, p - 2)}
    n2 = {(II, p - 1), (IE, p - 1), (IEP, p - 2)}
    c3 = {(II, p - 1), (IE, 1), (IE, p - 1)}
    n3 = {(II, 0), (IE, 1), (IEP, 0)}
    f = len(pairs)
    for i, pr in enumerate(pairs):
        nxt = pairs[(i + 1) % f]
        if pr not in allowed:
            return False
        if pr in c2 and nxt not in n2:
            return False
        if pr in c3 and nxt not in n3:
            return False
    return True


def bad_genre_pattern(p: int, genres: Sequence[Genre], z: Sequence[int]) -> bool:
    """Bad genre as a predicate on the (genre, z_i) pairs."""
    return _def_bad_genre(p, list(zip(genres, z)))


def bad_genre_pattern_mixed(p: int, genres: Sequence[Genre], z: Sequence[int], T: Iterable[int]) -> bool:
    """Bad genre for mixed eta/eta'-forms, on merged genres and the digits z-tilde."""
    f = len(z)
    T = as_subset(f, T)
    zt = tilde_z(p, f, z, T)
    pairs = [(g.merged(), x) for g, x in zip(genres, zt)]
    trans = [is_transition(f, T, i) for i in range(f)]
    for i in range(f):
        pr, nxt = pairs[i], pairs[(i + 1) % f]
        nxt_trans = trans[(i + 1) % f]
        if not trans[i]:
            if pr not in {("II", 0), ("II", p - 1), ("I", 1), ("I", p - 1)}:
                return False
        elif pr not in {("II", 1), ("I", 1), ("I", p - 1)}:
            return False
        if not trans[i] and pr == ("II", 0):
            if not (nxt == ("I", p - 1) or (nxt == ("II", p - 1) and not nxt_trans)):
                return False
        chain = (not trans[i] and pr in {("II", p - 1), ("I", 1), ("I", p - 1)}) or (
            trans[i] and pr in {("II", 1), ("I", 1), ("I", p - 1)}
        )
        if chain:
            ok = (nxt == ("II", 0) and not nxt_trans) or (nxt == ("II", 1) and nxt_trans) or nxt == ("I", 1)
            if not ok:
                return False
    return True


def is_bad_genre(M: BKModule, T: Iterable[int] | None = None) -> bool:
    check_regular(M)
    tau = M.tau
    if T is None:
        return bad_genre_pattern(tau.p, M.genres(), tau.z)
    return bad_genre_pattern_mixed(tau.p, M.genres(), tau.z, T)


# --- closeness -------------------------------------------------------------


def closeness(x: VSeries, n: int) -> int:
    """Largest t with x in I_t (I_t = m^t + vR[[v]] for t <= n, v^(t-n)R[[v]] beyond)."""
    c = x.constant()
    if c:
        return x.ring.eps_valuation(c)
    val = x.valuation()
    return n + (x.prec if val is None else val)


def matrix_closeness(D: ShapedMatrix, n: int) -> int:
    return min(closeness(s, n) for s in D.x)


def t_close(P: ShapedMatrix, Q: ShapedMatrix, t: int, n: int | None = None) -> bool:
    if n is None:
        n = P.x1.ring.n
    return matrix_closeness(P - Q, n) >= t


# --- parameters ------------------------------------------------------------


@dataclass
class CDMParams:
    ring: CoeffRing
    alpha: int
    alpha_prime: int
    A: list[int]
    A_prime: list[int]
    genres: list[Genre]
    forms: list[Form]

    def __post_init__(self):
        r = self.ring
        if not (r.is_unit(self.alpha) and r.is_unit(self.alpha_prime)):
            raise ValueError("alpha and alpha' must be units")
        for i, (g, fm) in enumerate(zip(self.genres, self.forms)):
            if g is Genre.II and fm is Form.ETA and r.is_unit(self.A_prime[i]):
                raise ValueError(f"A'_{i} must lie in the maximal ideal")
            if g is Genre.II and fm is Form.ETA_PRIME and r.is_unit(self.A[i]):
                raise ValueError(f"A_{i} must lie in the maximal ideal")

    @property
    def f(self) -> int:
        return len(self.genres)

    def key(self) -> tuple:
        return (self.alpha, self.alpha_prime, tuple(self.A), tuple(self.A_prime), tuple(self.genres), tuple(self.forms))

    def __eq__(self, o) -> bool:
        return isinstance(o, CDMParams) and self.key() == o.key()

    def has_unit_parameter(self) -> bool:
        return any(self.ring.is_unit(x) for x in list(self.A) + list(self.A_prime))

    def to_json(self) -> dict:
        r = self.ring
        return {
            "alpha": r.to_json(self.alpha),
            "alpha_prime": r.to_json(self.alpha_prime),
            "A": [r.to_json(x) for x in self.A],
            "A_prime": [r.to_json(x) for x in self.A_prime],
            "genres": [g.value for g in self.genres],
            "forms": [fm.value for fm in self.forms],
        }

    @classmethod
    def from_json(cls, ring: CoeffRing, obj) -> "CDMParams":
        return cls(
            ring,
            ring.from_json(obj["alpha"]),
            ring.from_json(obj["alpha_prime"]),
            [ring.from_json(x) for x in obj["A"]],
            [ring.from_json(x) for x in obj["A_prime"]],
            [Genre(g) for g in obj["genres"]],
            [Form(fm) for fm in obj["forms"]],
        )


def cdm_matrix(ws: Workspace, params: CDMParams, i: int) -> ShapedMatrix:
    ring = ws.ring
    g = ws.tau.gamma[i]
    genre, form = params.genres[i], params.forms[i]
    A, Ap = params.A[i], params.A_prime[i]
    m1 = ring.neg(1)
    if genre is Genre.I_ETA:
        C = ShapedMatrix(g, ws.v(), ws.zero(), ws.const(A), ws.one())
    elif genre is Genre.I_ETA_PRIME:
        C = ShapedMatrix(g, ws.one(), ws.const(Ap), ws.zero(), ws.v())
    elif form is Form.ETA:
        C = ShapedMatrix(g, ws.zero(), ws.const(m1), ws.one(), ws.const(Ap))
    else:
        C = ShapedMatrix(g, ws.const(A), ws.const(m1), ws.one(), ws.zero())
    if i == 0:
        C = C.left_diag(params.alpha, params.alpha_prime)
    return C


def read_cdm(G: ShapedMatrix, genre: Genre, form: Form) -> tuple[int, int, int, int]:
    """(scale, scale', A, A') read off a CDM-shaped matrix; unused slots are 0."""
    ring = G.x1.ring
    c = G.constants()
    if genre is Genre.I_ETA:
        beta = G.x1.coeffs[1] if G.x1.prec > 1 else 0
        beta_p = c[3]
        return beta, beta_p, ring.div(c[2], beta_p), 0
    if genre is Genre.I_ETA_PRIME:
        beta = c[0]
        beta_p = G.x4.coeffs[1] if G.x4.prec > 1 else 0
        return beta, beta_p, 0, ring.div(c[1], beta)
    beta, beta_p = ring.neg(c[1]), c[2]
    if form is Form.ETA:
        return beta, beta_p, 0, ring.div(c[3], beta_p)
    return beta, beta_p, ring.div(c[0], beta), 0


def is_cdm_form(ws: Workspace, mats: Sequence[ShapedMatrix], params: CDMParams) -> bool:
    return all(mats[i] == cdm_matrix(ws, params, i) for i in range(ws.f))


# --- the sweep -------------------------------------------------------------


@dataclass
class StepRecord:
    index: int
    delta: tuple[int, int]
    M: ShapedMatrix
    scalar: int
    genre_two: bool
    form: Form


@dataclass
class CDMResult:
    params: CDMParams
    P: list[ShapedMatrix]          # total base change: limit times diagonal rescale
    limit: list[ShapedMatrix]      # P^(i) before the rescale
    Q: list[tuple[int, int]]
    intermediate: list[ShapedMatrix]  # Delta_i M_i = P^(i)^-1 F_i phi(P^(i-1))
    trace: list[int]
    steps: int
    cdm_mats: list[ShapedMatrix] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "P": [Pi.to_json() for Pi in self.P],
            "t_trace": self.trace,
            "steps": self.steps,
        }


def default_budget(ws: Workspace) -> int:
    return ws.f * (ws.ring.n + ws.prec_v + 4)


def _genre_from_step(rec: StepRecord) -> Genre:
    if rec.genre_two:
        return Genre.II
    return Genre.I_ETA if rec.form is Form.ETA else Genre.I_ETA_PRIME


def cdm_reduce(M: BKModule, max_steps: int | None = None) -> CDMResult:
    """Iterate P_{s+1} = B(F_i phi(P_s)) Delta^-1 until it is f-periodic."""
    check_regular(M)
    ws = M.ws
    ring = ws.ring
    tau = ws.tau
    f, n = tau.f, ring.n
    budget = default_budget(ws) if max_steps is None else max_steps
    forms = M.forms()
    history = [ShapedMatrix.identity(ws, tau.gamma[0])]
    records: list[StepRecord] = []
    trace: list[int] = []
    s = 0
    while True:
        if s >= budget:
            raise NoConvergence(f"no f-periodic point after {budget} steps", trace)
        i = (s + 1) % f
        X = M.frobs[i] * history[s].phi_to(tau.gamma[i], tau.z[i], tau.p)
        res = b_operation(X, forms[i])
        d1, d4 = res.B.x1.constant(), res.B.x4.constant()
        if not (ring.is_unit(d1) and ring.is_unit(d4)):
            raise NotRegular("diagonal of B(F phi(P)) is not invertible mod v")
        Pn = res.B.right_diag(ring.inv(d1), ring.inv(d4))
        history.append(Pn)
        records.append(StepRecord(i, (d1, d4), res.M, res.scalar, res.genre_two, res.form))
        s += 1
        if s >= f:
            trace.append(matrix_closeness(Pn - history[s - f], n))
            if Pn.identical(history[s - f]):
                break
    limit = [None] * f
    steps = [None] * f
    for t in range(s - f + 1, s + 1):
        limit[t % f] = history[t]
        steps[t % f] = records[t - 1]
    params, Q, mats = _rescale(ws, steps)
    total = [limit[i].right_diag(*Q[i]) for i in range(f)]
    inter = [steps[i].M.left_diag(*steps[i].delta) for i in range(f)]
    return CDMResult(params, total, limit, Q, inter, trace, s, mats)


def _rescale(ws: Workspace, steps: Sequence[StepRecord]):
    """Diagonal Q_i (Q_0 = Id) moving Delta_i M_i into CDM form."""
    ring = ws.ring
    f = ws.f
    inv, mul, neg = ring.inv, ring.mul, ring.neg
    Q = [(1, 1)] + [None] * (f - 1)
    A = [0] * f
    Ap = [0] * f
    genres = [_genre_from_step(r) for r in steps]
    forms = [r.form for r in steps]
    for i in range(1, f):
        r = steps[i]
        d, dp = r.delta
        q, qp = Q[i - 1]
        if not r.genre_two:
            Q[i] = (mul(d, q), mul(dp, qp))
            if r.form is Form.ETA:
                A[i] = mul(r.scalar, mul(q, inv(qp)))
            else:
                Ap[i] = mul(r.scalar, mul(qp, inv(q)))
        else:
            Q[i] = (neg(mul(d, qp)), mul(dp, q))
            if r.form is Form.ETA:
                Ap[i] = mul(r.scalar, mul(qp, inv(q)))
            else:
                A[i] = neg(mul(r.scalar, mul(q, inv(qp))))
    r0 = steps[0]
    G0 = r0.M.left_diag(*r0.delta).right_diag(*Q[f - 1])
    alpha, alpha_p, a0, ap0 = read_cdm(G0, genres[0], forms[0])
    A[0], Ap[0] = a0, ap0
    params = CDMParams(ring, alpha, alpha_p, A, Ap, genres, forms)
    mats = [cdm_matrix(ws, params, i) for i in range(f)]
    return params, Q, mats


def verify_reduction(M: BKModule, result: CDMResult) -> bool:
    """Re-apply the total base change and compare with the CDM matrices."""
    N = apply_base_change(M, result.P)
    return is_cdm_form(M.ws, N.frobs, result.params)


# --- closed forms ----------------------------------------------------------


def closed_form_matrix(ws: Workspace, F: ShapedMatrix, z: int, sbar: int, rbar: int,
                       form: Form | None = None) -> ShapedMatrix:
    """The limit Delta_i M_i for a scalar-entry F_i, given constants of P^(i-1)."""
    ring = ws.ring
    p = ws.p
    g = F.gamma
    form = form or form_of(F)
    c = F.constants()
    div = _div_checked(ring)
    mul, sub, add, neg = ring.mul, ring.sub, ring.add, ring.neg
    if form is Form.ETA:
        a = F.x1.coeffs[1] if F.x1.prec > 1 else 0
        b, cc, d = c[1], c[2], c[3]
        D = sub(mul(a, d), mul(b, cc))
        if ring.is_unit(d):
            if z != 0:
                return _with_x1_v(ShapedMatrix.scalars(ws, g, 0, 0, cc, d), sub(a, div(mul(cc, b), d)))
            return _with_x1_v(ShapedMatrix.scalars(ws, g, 0, 0, add(cc, mul(d, sbar)), d), div(D, d))
        if z != 0:
            return ShapedMatrix.scalars(ws, g, 0, sub(b, div(mul(d, a), cc)), cc, d)
        cs = add(cc, mul(d, sbar))
        return ShapedMatrix.scalars(ws, g, 0, neg(div(D, cs)), cs, d)
    a, b, cc = c[0], c[1], c[2]
    d = F.x4.coeffs[1] if F.x4.prec > 1 else 0
    D = sub(mul(a, d), mul(b, cc))
    if ring.is_unit(a):
        if z != p - 1:
            return _with_x4_v(ShapedMatrix.scalars(ws, g, a, b, 0, 0), div(D, a))
        return _with_x4_v(ShapedMatrix.scalars(ws, g, a, add(b, mul(a, rbar)), 0, 0), div(D, a))
    if z != p - 1:
        return ShapedMatrix.scalars(ws, g, a, b, sub(cc, div(mul(a, d), b)), 0)
    bs = add(b, mul(a, rbar))
    return ShapedMatrix.scalars(ws, g, a, bs, neg(div(D, bs)), 0)


def _div_checked(ring: CoeffRing):
    def div(x, y):
        if not ring.is_unit(y):
            raise NonUnitDenominator("denominator is not a unit")
        return ring.div(x, y)
    return div


def _with_x1_v(m: ShapedMatrix, c: int) -> ShapedMatrix:
    x = list(m.x)
    x[0] = VSeries.monomial(x[0].space, c, 1)
    return ShapedMatrix(m.gamma, *x)


def _with_x4_v(m: ShapedMatrix, c: int) -> ShapedMatrix:
    x = list(m.x)
    x[3] = VSeries.monomial(x[3].space, c, 1)
    return ShapedMatrix(m.gamma, *x)


def closed_form_cdm(M: BKModule, limit: Sequence[ShapedMatrix]) -> list[ShapedMatrix]:
    """Closed formulas for every index, using constant parts of the limit P^(i-1)."""
    ws = M.ws
    out = []
    for i, F in enumerate(M.frobs):
        prev = limit[i - 1]
        out.append(closed_form_matrix(ws, F, ws.tau.z[i], prev.x3.constant(), prev.x2.constant()))
    return out


# --- base change between CDM forms -------------------------------------------


def cdm_base_change(ws: Workspace, params: CDMParams, scalars: tuple[int, int]) -> tuple[CDMParams, list[ShapedMatrix]]:
    """Conjugate CDM data by constant diagonals K_i with K_0 = diag(lambda, mu)."""
    ring = ws.ring
    lam, mu = scalars
    if not (ring.is_unit(lam) and ring.is_unit(mu)):
        raise NotInvertible("lambda and mu must be units")
    f = ws.f
    K = [(lam, mu)]
    for i in range(1, f):
        l, m = K[-1]
        K.append((m, l) if params.genres[i] is Genre.II else (l, m))
    A, Ap = [0] * f, [0] * f
    alpha = alpha_p = None
    for i in range(f):
        C = cdm_matrix(ws, params, i)
        li, mi = K[i]
        lp, mp = K[i - 1]
        Cn = C.left_diag(ring.inv(li), ring.inv(mi)).right_diag(lp, mp)
        beta, beta_p, a, ap = read_cdm(Cn, params.genres[i], params.forms[i])
        if i == 0:
            alpha, alpha_p = beta, beta_p
        A[i], Ap[i] = a, ap
    new = CDMParams(ring, alpha, alpha_p, A, Ap, list(params.genres), list(params.forms))
    mats = [ShapedMatrix.diag(ws, ws.tau.gamma[i], *K[i]) for i in range(f)]
    return new, mats


def relating_scalars(ws: Workspace, p1: CDMParams, p2: CDMParams) -> list[int]:
    """All ratios lambda/mu (mu = 1) carrying p1 to p2, by exhausting the units of R."""
    return [r for r in ws.ring.units() if cdm_base_change(ws, p1, (r, 1))[0] == p2]
