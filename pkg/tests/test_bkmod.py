import random

import pytest
from hypothesis import given, strategies as st

from bkcdm.bkmod import (
    BKModule,
    Form,
    Genre,
    Mat2,
    NotHodgeV0,
    ShapedMatrix,
    Workspace,
    apply_base_change,
    eta_prime_restrict,
    genre_of,
    hodge_v0,
    random_base_change,
    random_module,
    restricted_base_change,
    validate_base_change,
)
from bkcdm.coeffring import CoeffRing, USeries
from bkcdm.tametype import TameType

seeds = st.integers(0, 2**32)


def ws_p3(z=(1, 2), ring=None):
    return Workspace(TameType(3, len(z), z), ring)


WORKSPACES = [
    ws_p3(),
    ws_p3((2,)),
    ws_p3((1, 2), CoeffRing(3, 2)),
    ws_p3((0, 1), CoeffRing(3, 1, 2)),
    Workspace(TameType(5, 2, (1, 3))),
]


def test_genre_examples():
    ws = ws_p3((2,))
    g = ws.tau.gamma[0]
    v, zero, one = ws.v(), ws.zero(), ws.one()
    assert genre_of(ShapedMatrix(g, v, zero, one, one)) is Genre.I_ETA
    assert genre_of(ShapedMatrix(g, one, zero, zero, v)) is Genre.I_ETA_PRIME
    assert genre_of(ShapedMatrix(g, zero, ws.const(2), one, zero)) is Genre.II
    with pytest.raises(NotHodgeV0):
        genre_of(ShapedMatrix(g, one, zero, zero, one))


def test_hodge_v0_examples():
    ws = ws_p3()
    gam = ws.tau.gamma
    cdm = [ShapedMatrix(gam[i], ws.v(), ws.zero(), ws.const(2), ws.one()) for i in range(2)]
    assert hodge_v0(BKModule(ws, cdm))
    bad = [cdm[0], ShapedMatrix(gam[1], ws.v(), ws.zero(), ws.zero(), ws.v())]
    assert not hodge_v0(BKModule(ws, bad))
    assert hodge_v0(random_module(ws, random.Random(3)))


def test_identity_base_change_is_trivial():
    ws = ws_p3()
    M = random_module(ws, random.Random(0))
    N = apply_base_change(M, [ShapedMatrix.identity(ws, g) for g in ws.tau.gamma])
    assert all(a == b for a, b in zip(M.frobs, N.frobs))


def test_scalar_diagonal_base_change_rescales_A():
    ws = ws_p3()
    R = ws.ring
    gam = ws.tau.gamma
    A = 1
    frobs = [ShapedMatrix(gam[i], ws.v(), ws.zero(), ws.const(A), ws.one()) for i in range(2)]
    lam, mu = 2, 1
    P = [ShapedMatrix.diag(ws, g, lam, mu) for g in gam]
    N = apply_base_change(BKModule(ws, frobs), P)
    # for i >= 1: [[v, 0], [(lam/mu) A u^gamma, 1]]
    assert N.frobs[1] == ShapedMatrix(gam[1], ws.v(), ws.zero(), ws.const(R.mul(R.div(lam, mu), A)), ws.one())


def test_validate_base_change_examples():
    ws = ws_p3()
    e = ws.e
    gam = ws.tau.gamma
    assert validate_base_change(ws, [ShapedMatrix.identity(ws, g) for g in gam])
    U = ws.uspace
    one = USeries(U, {0: 1})
    bad = (one, USeries(U, {(e - gam[0]) + 1: 1}), USeries(U), one)
    good1 = ShapedMatrix.identity(ws, gam[1]).to_full(ws)
    assert not validate_base_change(ws, [bad, good1])


def test_eta_prime_restrict_examples():
    ws = ws_p3((2,))
    g = ws.tau.gamma[0]
    F = ShapedMatrix(g, ws.v(), ws.zero(), ws.one(), ws.one())
    assert F.restrict() == Mat2(ws.v(), ws.zero(), ws.v(), ws.one())
    a, b, c, d = 1, 2, 2, 1
    F = ShapedMatrix(g, ws.v(1, a), ws.const(b), ws.const(c), ws.const(d))
    assert eta_prime_restrict(F) == Mat2(ws.v(1, a), ws.const(b), ws.v(1, c), ws.const(d))


@pytest.mark.parametrize("ws", WORKSPACES, ids=lambda w: f"p{w.p}z{w.tau.z}{w.ring!r}")
def test_base_change_properties(ws):
    @given(seeds)
    def check(seed):
        rng = random.Random(seed)
        forms = [rng.choice([Form.ETA, Form.ETA_PRIME]) for _ in range(ws.f)]
        M = random_module(ws, rng, forms)
        P, Q = random_base_change(ws, rng), random_base_change(ws, rng)
        N = apply_base_change(M, P)
        # genre and the Hodge condition are base-change invariant
        assert N.genres() == M.genres()
        assert hodge_v0(N)
        assert validate_base_change(ws, P)
        # successive base changes compose
        PQ = [a * b for a, b in zip(P, Q)]
        lhs, rhs = apply_base_change(N, Q), apply_base_change(M, PQ)
        assert all(a == b for a, b in zip(lhs.frobs, rhs.frobs))
        # restriction to the eta'-eigenspace commutes with base change
        G = M.restricted()
        J = [Pi.restrict() for Pi in P]
        for i in range(ws.f):
            assert N.frobs[i].restrict() == restricted_base_change(ws, G[i], J[i], J[i - 1], i)
    check()


@pytest.mark.parametrize("ws", WORKSPACES[:3], ids=lambda w: f"p{w.p}z{w.tau.z}")
def test_full_and_shaped_agree(ws):
    rng = random.Random(7)
    for _ in range(10):
        M = random_module(ws, rng)
        for F in M.frobs:
            assert ShapedMatrix.from_full(ws, F.gamma, F.to_full(ws)) == F
        P = random_base_change(ws, rng)
        assert validate_base_change(ws, [Pi.to_full(ws) for Pi in P])


def test_module_json_round_trip():
    ws = ws_p3((1, 2), CoeffRing(3, 2))
    M = random_module(ws, random.Random(11))
    N = BKModule.from_json(M.to_json())
    assert N.tau == M.tau and N.ring == M.ring
    assert all(a.identical(b) for a, b in zip(M.frobs, N.frobs))
