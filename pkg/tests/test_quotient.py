import random

import pytest
from hypothesis import given, strategies as st

from bkcdm.bkmod import Genre, Mat2, Workspace
from bkcdm.coeffring import CoeffRing, NotInvertible
from bkcdm.quotient import (
    GroupElement,
    Laurent,
    LaurentMat,
    RelationFails,
    XPoint,
    check_etale_base_change,
    compose,
    functor_T,
    g_action,
    identity_element,
    invariant_functions,
    invariant_jacobian,
    invariants_independent,
    random_group_element,
    random_xpoint,
)
from bkcdm.straighten import assemble_F, presentation_identity
from bkcdm.tametype import TameType

seeds = st.integers(0, 2**32)
RINGS = [CoeffRing(3), CoeffRing(3, 2), CoeffRing(3, 1, 2), CoeffRing(5)]


def ws_for(p, z, ring=None):
    return Workspace(TameType(p, len(z), tuple(z)), ring)


@pytest.mark.parametrize("ring", RINGS, ids=repr)
def test_group_action_axioms(ring):
    @given(seeds, st.integers(1, 3))
    def check(seed, f):
        rng = random.Random(seed)
        x = random_xpoint(ring, f, rng)
        g, h = random_group_element(ring, f, rng), random_group_element(ring, f, rng)
        assert g_action(identity_element(ring, f), x) == x
        assert g_action(compose(g, h), x) == g_action(g, g_action(h, x))
        assert invariant_functions(g_action(g, x)) == invariant_functions(x)
    check()


def test_invariant_examples():
    R = CoeffRing(3)
    ident = (1, 0, 0, 1)
    assert invariant_functions(XPoint(R, (ident, ident))) == (1, 1)
    x = XPoint(R, ((2, 1, 1, 1), (1, 1, 2, 0)))
    assert invariant_functions(x)[1] == 0


def test_point_validation():
    R = CoeffRing(3)
    with pytest.raises(NotInvertible):
        XPoint(R, ((1, 1, 1, 1),))
    with pytest.raises(ValueError):
        XPoint(R, ((1, 0, 0, 1), (2, 0, 0, 1)))


def test_functor_examples():
    ws = ws_for(3, (1, 2))
    R = ws.ring
    M = functor_T(ws, XPoint(R, ((1, 0, 0, 1), (1, 0, 0, 1))))
    assert all(F.restrict() == Mat2(ws.v(), ws.zero(), ws.zero(), ws.one()) for F in M.frobs)
    assert M.genres() == [Genre.I_ETA, Genre.I_ETA]
    ws1 = ws_for(3, (2,))
    G = functor_T(ws1, XPoint(R, ((2, 1, 1, 1),))).restricted()[0]
    assert G == Mat2(ws1.v(1, 2), ws1.one(), ws1.v(), ws1.one())


def test_jacobian_independence_locus():
    R = CoeffRing(3)
    x = XPoint(R, ((1, 0, 0, 1), (1, 0, 0, 1)))
    J = invariant_jacobian(x)
    # dD = (d0, -c0, -b0, a0); dPd = (0, 0, 0, d1)
    assert J == [[1, 0, 0, 1], [0, 0, 0, 1]]
    assert invariants_independent(x)
    assert not invariants_independent(XPoint(R, ((1, 0, 0, 1), (1, 1, 2, 0))))


@given(seeds, st.integers(1, 3))
def test_independent_exactly_off_degenerate_locus(seed, f):
    R = CoeffRing(5)
    x = random_xpoint(R, f, random.Random(seed))
    assert invariants_independent(x) == all(A[3] != 0 for A in x.A[1:])


def test_json_round_trips():
    R = CoeffRing(3, 2)
    rng = random.Random(0)
    x = random_xpoint(R, 2, rng)
    g = random_group_element(R, 2, rng)
    assert XPoint.from_json(R, x.to_json()) == x
    assert GroupElement.from_json(R, g.to_json()) == g


# --- base changes in the Laurent window -----------------------------------------

WS = [ws_for(3, (1, 2)), ws_for(3, (0, 1)), ws_for(3, (1, 2), CoeffRing(3, 2)), ws_for(5, (1, 3))]


@pytest.mark.parametrize("ws", WS, ids=lambda w: f"p{w.p}z{w.tau.z}m{w.ring.m}")
def test_presentation_identity(ws):
    @given(seeds)
    def check(seed):
        rng = random.Random(seed)
        x = random_xpoint(ws.ring, ws.f, rng)
        g = random_group_element(ws.ring, ws.f, rng)
        J = assemble_F(ws, g, x)
        assert presentation_identity(ws, g, x, J)
        F = functor_T(ws, x).restricted()
        G = functor_T(ws, g_action(g, x)).restricted()
        rep = check_etale_base_change(ws, F, G, J)
        assert rep["passed"] and rep["integral_upper_triangular_mod_v"]
    check()


def test_etale_check_trivial_and_scalar():
    ws = ws_for(3, (1, 2))
    rng = random.Random(1)
    F = functor_T(ws, random_xpoint(ws.ring, 2, rng)).restricted()
    ident = [Mat2.identity(ws)] * 2
    assert check_etale_base_change(ws, F, F, ident)["passed"]
    B = [Mat2.diag(ws, 2, 1)] * 2
    G = [B[i].inverse() * F[i] * B[i - 1].phi().twist(ws.p - 1 - ws.tau.z[i]) for i in range(2)]
    assert check_etale_base_change(ws, F, G, B)["passed"]


def test_etale_check_flags_a_pole():
    ws = ws_for(3, (1, 2))
    p = ws.p
    rng = random.Random(2)
    F = [LaurentMat.from_mat(m) for m in functor_T(ws, random_xpoint(ws.ring, 2, rng)).restricted()]
    one, zero = Laurent(0, ws.one()), Laurent(0, ws.zero())
    pole = Laurent(-1, ws.one())
    B = [LaurentMat(one, pole, zero, one)] * 2
    Binv = LaurentMat(one, -pole, zero, one)
    G = [Binv * F[i] * B[i - 1].phi(p).twist(p - 1 - ws.tau.z[i]) for i in range(2)]
    rep = check_etale_base_change(ws, F, G, B)
    assert rep["tau_unobstructed"]
    assert not rep["integral_upper_triangular_mod_v"]
    assert not rep["passed"]


def test_etale_check_rejects_wrong_relation():
    ws = ws_for(3, (1, 2))
    rng = random.Random(3)
    F = functor_T(ws, random_xpoint(ws.ring, 2, rng)).restricted()
    G = functor_T(ws, random_xpoint(ws.ring, 2, rng)).restricted()
    with pytest.raises(RelationFails):
        check_etale_base_change(ws, F, G, [Mat2.identity(ws)] * 2)
