import random

import pytest
from hypothesis import given, strategies as st

from bkcdm.bkmod import (
    BKModule,
    Form,
    Genre,
    ShapedMatrix,
    Workspace,
    apply_base_change,
    random_base_change,
    random_base_change_matrix,
    random_frobenius,
    random_module,
)
from bkcdm.cdm import (
    CDMParams,
    DetNotUnitTimesV,
    NoConvergence,
    b_operation,
    bad_genre_pattern,
    bad_genre_pattern_mixed,
    cdm_base_change,
    cdm_matrix,
    cdm_reduce,
    closed_form_cdm,
    closed_form_matrix,
    closeness,
    is_bad_genre,
    is_cdm_form,
    read_cdm,
    relating_scalars,
    t_close,
    verify_reduction,
)
from bkcdm.coeffring import CoeffRing
from bkcdm.tametype import TameType, all_types

seeds = st.integers(0, 2**32)


def ws_for(p, z, ring=None):
    return Workspace(TameType(p, len(z), tuple(z)), ring)


def one_by_one(ws, x1, x2, x3, x4):
    g = ws.tau.gamma[0]
    return ShapedMatrix(g, x1, x2, x3, x4)


# --- B-operator ---------------------------------------------------------------


def test_b_operation_already_factored():
    ws = ws_for(3, (1, 2))
    g = ws.tau.gamma[1]
    G = ShapedMatrix(g, ws.v(), ws.zero(), ws.const(2), ws.one())
    res = b_operation(G)
    assert res.B == ShapedMatrix.identity(ws, g) and res.M == G and res.scalar == 2


def test_b_operation_genre_two_with_A_prime_in_m():
    ws = ws_for(3, (1, 2), CoeffRing(3, 1, 2))
    eps = ws.ring.eps()
    g = ws.tau.gamma[0]
    G = ShapedMatrix(g, ws.zero(), ws.one(), ws.one(), ws.const(eps))
    res = b_operation(G)
    assert res.genre_two and res.scalar == eps
    assert res.B == ShapedMatrix.identity(ws, g) and res.M == G


def test_b_operation_worked_example():
    ws = ws_for(3, (2,))
    G = one_by_one(ws, ws.v(1, 2), ws.one(), ws.one(), ws.one())
    res = b_operation(G)
    assert res.B == one_by_one(ws, ws.one(), ws.one(), ws.zero(), ws.one())
    assert res.M == one_by_one(ws, ws.v(), ws.zero(), ws.one(), ws.one())
    assert res.scalar == 1
    assert res.B * res.M == G


def test_b_operation_rejects_bad_determinant():
    ws = ws_for(3, (2,))
    G = one_by_one(ws, ws.v(), ws.zero(), ws.zero(), ws.v())
    with pytest.raises(DetNotUnitTimesV):
        b_operation(G)


WORKSPACES = [
    ws_for(3, (1, 2)),
    ws_for(3, (2,)),
    ws_for(3, (0, 1), CoeffRing(3, 2)),
    ws_for(3, (1, 2), CoeffRing(3, 1, 2)),
    ws_for(5, (1, 3)),
    ws_for(7, (2, 4, 5)),
]
ids = [f"p{w.p}z{''.join(map(str, w.tau.z))}m{w.ring.m}k{w.ring.k}" for w in WORKSPACES]


@pytest.mark.parametrize("ws", WORKSPACES, ids=ids)
def test_b_operation_factorization(ws):
    @given(seeds, st.sampled_from([Form.ETA, Form.ETA_PRIME]), st.integers(0, 5))
    def check(seed, form, i):
        rng = random.Random(seed)
        i %= ws.f
        G = random_frobenius(ws, rng, i, form)
        res = b_operation(G, form)
        assert res.B * res.M == G
        assert res.B.det().valuation() == 0
    check()


@pytest.mark.parametrize("ws", WORKSPACES, ids=ids)
def test_reduction_identity(ws):
    @given(seeds, st.sampled_from([Form.ETA, Form.ETA_PRIME]))
    def check(seed, form):
        rng = random.Random(seed)
        tau = ws.tau
        i = 1 % ws.f
        F = random_frobenius(ws, rng, i, form)
        P = random_base_change_matrix(ws, rng, tau.gamma[i - 1])
        phP = P.phi_to(tau.gamma[i], tau.z[i], tau.p)
        rF = b_operation(F, form)
        assert b_operation(F * phP, form).B == rF.B * b_operation(rF.M * phP, form).B
    check()


# --- bad genre ----------------------------------------------------------------


def test_bad_genre_examples():
    IE, II = Genre.I_ETA, Genre.II
    assert bad_genre_pattern(3, [IE], (1,))
    assert not bad_genre_pattern(3, [IE], (2,))
    assert bad_genre_pattern(3, [II, II], (0, 2))


@given(st.sampled_from([3, 5, 7]), st.lists(st.sampled_from([Genre.I_ETA, Genre.II]), min_size=1, max_size=3), seeds)
def test_mixed_predicate_specialises(p, genres, seed):
    rng = random.Random(seed)
    z = tuple(rng.randrange(p) for _ in genres)
    f = len(z)
    assert bad_genre_pattern_mixed(p, genres, z, range(f)) == bad_genre_pattern(p, genres, z)


# --- closeness ----------------------------------------------------------------


def test_t_close_examples():
    ws = ws_for(3, (2,))
    P = random_base_change_matrix(ws, random.Random(0), ws.tau.gamma[0])
    assert t_close(P, P, ws.prec_v)
    # over a field, a difference of v-valuation 3 is t-close exactly for t <= 3
    D = one_by_one(ws, ws.v(3), ws.zero(), ws.zero(), ws.zero())
    Q = P + D
    assert t_close(P, Q, 3) and not t_close(P, Q, 4)
    wk = ws_for(3, (2,), CoeffRing(3, 1, 2))
    eps = wk.ring.eps()
    assert closeness(wk.const(eps), 1) == 1
    D = one_by_one(wk, wk.const(eps), wk.zero(), wk.zero(), wk.zero())
    P = ShapedMatrix.identity(wk, wk.tau.gamma[0])
    assert t_close(P, P + D, 1) and not t_close(P, P + D, 2)


# --- the sweep ----------------------------------------------------------------


def test_reduce_on_cdm_input_is_fixed():
    ws = ws_for(3, (1, 2))
    params = CDMParams(ws.ring, 2, 1, [1, 2], [0, 0], [Genre.I_ETA] * 2, [Form.ETA] * 2)
    M = BKModule(ws, [cdm_matrix(ws, params, i) for i in range(2)])
    r = cdm_reduce(M)
    assert r.params == params
    assert all(P == ShapedMatrix.identity(ws, P.gamma) for P in r.P)


def test_reduce_worked_example():
    ws = ws_for(3, (2,))
    F = one_by_one(ws, ws.v(1, 2), ws.one(), ws.one(), ws.one())
    M = BKModule(ws, [F])
    r = cdm_reduce(M)
    assert (r.params.alpha, r.params.alpha_prime, r.params.A[0]) == (1, 1, 1)
    assert r.params.genres == [Genre.I_ETA]
    assert r.cdm_mats[0] == one_by_one(ws, ws.v(), ws.zero(), ws.one(), ws.one())
    assert verify_reduction(M, r)
    assert all(a == b for a, b in zip(closed_form_cdm(M, r.limit), r.intermediate))


def test_stated_bad_genre_instance_still_converges():
    # (2v, 1, 1, 1) at z = (1) is bad genre, yet the sweep settles
    ws = ws_for(3, (1,))
    M = BKModule(ws, [one_by_one(ws, ws.v(1, 2), ws.one(), ws.one(), ws.one())])
    assert is_bad_genre(M)
    r = cdm_reduce(M)
    assert verify_reduction(M, r)


def test_stalling_bad_genre_instance():
    ws = ws_for(3, (1,))
    M = BKModule(ws, [one_by_one(ws, ws.v(), ws.zero(), ws.v(), ws.one())])
    assert is_bad_genre(M)
    with pytest.raises(NoConvergence) as err:
        cdm_reduce(M)
    assert set(err.value.trace) == {0}
    ws2 = ws_for(3, (2,))
    M2 = BKModule(ws2, [one_by_one(ws2, ws2.v(), ws2.zero(), ws2.v(), ws2.one())])
    assert not is_bad_genre(M2)
    assert verify_reduction(M2, cdm_reduce(M2))


@pytest.mark.parametrize("ws", WORKSPACES, ids=ids)
def test_reduction_is_valid(ws):
    @given(seeds)
    def check(seed):
        rng = random.Random(seed)
        forms = [rng.choice([Form.ETA, Form.ETA_PRIME]) for _ in range(ws.f)]
        M = random_module(ws, rng, forms)
        if is_bad_genre(M):
            return
        r = cdm_reduce(M)
        assert verify_reduction(M, r)
        assert r.params.genres == M.genres()
        # t-closeness of consecutive f-periodic iterates grows
        assert r.trace[-1] > r.trace[0] or len(r.trace) == 1
    check()


@pytest.mark.parametrize("ws", WORKSPACES, ids=ids)
def test_closed_form_agreement(ws):
    @given(seeds, st.sampled_from([Form.ETA, Form.ETA_PRIME]))
    def check(seed, form):
        rng = random.Random(seed)
        M = random_module(ws, rng, [form] * ws.f, scalar=True)
        if is_bad_genre(M):
            return
        r = cdm_reduce(M)
        assert all(a == b for a, b in zip(closed_form_cdm(M, r.limit), r.intermediate))
    check()


def test_closed_form_cases():
    ws = ws_for(3, (1, 2))
    R = ws.ring
    g = ws.tau.gamma[0]
    a, b, c, d = 1, 2, 1, 1
    F = ShapedMatrix(g, ws.v(1, a), ws.const(b), ws.const(c), ws.const(d))
    out = closed_form_matrix(ws, F, 1, 0, 0)
    assert out == ShapedMatrix(g, ws.v(1, R.sub(a, R.div(R.mul(c, b), d))), ws.zero(), ws.const(c), ws.const(d))
    assert closed_form_matrix(ws, F, 0, 0, 0) == out
    F2 = ShapedMatrix(g, ws.v(1, a), ws.const(b), ws.const(c), ws.zero())
    out2 = closed_form_matrix(ws, F2, 1, 0, 0)
    assert out2 == ShapedMatrix(g, ws.zero(), ws.const(R.sub(b, 0)), ws.const(c), ws.zero())


# --- classification -------------------------------------------------------------


def test_cdm_base_change_identity():
    ws = ws_for(3, (1, 2))
    params = CDMParams(ws.ring, 2, 1, [1, 2], [0, 0], [Genre.I_ETA] * 2, [Form.ETA] * 2)
    new, K = cdm_base_change(ws, params, (1, 1))
    assert new == params


@pytest.mark.parametrize("ws", WORKSPACES[:5], ids=ids[:5])
def test_cdm_base_change_is_a_base_change(ws):
    rng = random.Random(5)
    for _ in range(10):
        M = random_module(ws, rng)
        if is_bad_genre(M):
            continue
        params = cdm_reduce(M).params
        lam, mu = ws.ring.random_unit(rng), ws.ring.random_unit(rng)
        new, K = cdm_base_change(ws, params, (lam, mu))
        C = BKModule(ws, [cdm_matrix(ws, params, i) for i in range(ws.f)])
        assert is_cdm_form(ws, apply_base_change(C, K).frobs, new)


@pytest.mark.parametrize("ws", WORKSPACES[:5], ids=ids[:5])
def test_presentations_of_one_module_are_related(ws):
    @given(seeds)
    def check(seed):
        rng = random.Random(seed)
        M = random_module(ws, rng)
        if is_bad_genre(M):
            return
        N = apply_base_change(M, random_base_change(ws, rng))
        p1, p2 = cdm_reduce(M).params, cdm_reduce(N).params
        sols = relating_scalars(ws, p1, p2)
        assert sols
        if p1.has_unit_parameter():
            assert len(sols) == 1
    check()


def test_read_cdm_inverts_cdm_matrix():
    ws = ws_for(3, (1, 2), CoeffRing(3, 1, 2))
    R = ws.ring
    eps = R.eps()
    for genre, form, A, Ap in [
        (Genre.I_ETA, Form.ETA, 2, 0),
        (Genre.I_ETA_PRIME, Form.ETA_PRIME, 0, 4),
        (Genre.II, Form.ETA, 0, eps),
        (Genre.II, Form.ETA_PRIME, eps, 0),
    ]:
        params = CDMParams(R, 4, 2, [A, A], [Ap, Ap], [genre] * 2, [form] * 2)
        for i in range(2):
            alpha, alpha_p, a, ap = read_cdm(cdm_matrix(ws, params, i), genre, form)
            assert (a, ap) == (A, Ap)
            if i == 0:
                assert (alpha, alpha_p) == (4, 2)


def test_params_json_round_trip():
    R = CoeffRing(3, 2)
    params = CDMParams(R, 4, 2, [1, 0], [0, 3], [Genre.I_ETA, Genre.I_ETA_PRIME], [Form.ETA, Form.ETA_PRIME])
    assert CDMParams.from_json(R, params.to_json()) == params


def test_genre_two_entries_must_lie_in_m():
    with pytest.raises(ValueError):
        CDMParams(CoeffRing(3), 1, 1, [0], [1], [Genre.II], [Form.ETA])


def test_every_unobstructed_type_reduces():
    rng = random.Random(2)
    for f in (1, 2):
        for tau in all_types(3, f):
            ws = Workspace(tau)
            for _ in range(5):
                M = random_module(ws, rng)
                if not is_bad_genre(M):
                    assert verify_reduction(M, cdm_reduce(M))
