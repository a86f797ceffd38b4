import itertools

import pytest
from hypothesis import given, strategies as st

from bkcdm.tametype import (
    NotCovered,
    OutOfRange,
    SerreWeight,
    ShapeNotAdmissible,
    TameType,
    all_types,
    eligible_weight,
    first_obstruction,
    gamma_from_z,
    max_refined_shape,
    p_tau_contains,
    second_obstruction,
    tau_from_weight,
    tilde_z,
    unobstructed,
    weight_from_shape,
)
from oracles import first_obstruction_oracle, gamma_direct, second_obstruction_oracle


def test_gamma_examples():
    assert gamma_from_z(3, 1, (2,)) == (2,)
    assert TameType(3, 1, (2,)).e == 2
    assert gamma_from_z(3, 2, (0, 0)) == (0, 0)
    assert gamma_from_z(3, 2, (1, 2)) == (7, 5)


@st.composite
def types(draw, primes=(3, 5, 7), fmax=3):
    p = draw(st.sampled_from(primes))
    f = draw(st.integers(1, fmax))
    z = tuple(draw(st.lists(st.integers(0, p - 1), min_size=f, max_size=f)))
    return p, f, z


@given(types())
def test_gamma_recurrence(t):
    # p gamma_{i-1} = (e) z_i-carry + gamma_i : p*gamma_{i-1} - gamma_i is a multiple of e
    p, f, z = t
    g = gamma_from_z(p, f, z)
    e = p**f - 1
    assert g == gamma_direct(p, f, z)
    for i in range(f):
        assert 0 <= g[i] <= e
        assert (p * g[i - 1] - g[i]) % e == 0


def test_gamma_recurrence_worked_case():
    assert 3 * 7 == 2 * 8 + 5


def test_out_of_range_digits():
    with pytest.raises(OutOfRange):
        TameType(3, 2, (3, 0))
    with pytest.raises(OutOfRange):
        TameType(3, 2, (1,))
    with pytest.raises(OutOfRange):
        TameType(4, 1, (1,))


def test_tilde_z_examples():
    assert tilde_z(3, 2, (1, 2), {0, 1}) == (1, 2)
    assert tilde_z(3, 2, (1, 2), set()) == (1, 0)
    assert tilde_z(3, 2, (1, 1), {1}) == (2, 2)


def test_obstruction_examples():
    assert first_obstruction(3, (1,))
    assert not first_obstruction(3, (2,))
    assert first_obstruction(3, (0, 2))
    assert second_obstruction(3, (2, 0))
    assert not second_obstruction(3, (2, 2))
    assert second_obstruction(3, (2, 1, 0))


@pytest.mark.parametrize("p,f", [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 2)])
def test_obstructions_match_brute_force(p, f):
    for z in itertools.product(range(p), repeat=f):
        assert first_obstruction(p, z) == first_obstruction_oracle(p, z), z
        assert second_obstruction(p, z) == second_obstruction_oracle(p, z), z


@given(types())
def test_obstructions_are_rotation_invariant(t):
    p, f, z = t
    for r in range(f):
        w = z[r:] + z[:r]
        assert first_obstruction(p, w) == first_obstruction(p, z)
        assert second_obstruction(p, w) == second_obstruction(p, z)


def test_unobstructed_grid_p3():
    found = sorted(t.z for f in (1, 2) for t in all_types(3, f) if unobstructed(t))
    assert found == [(0, 1), (1, 0), (1, 2), (2, 1)]


def test_p_tau_examples():
    for z in itertools.product(range(3), repeat=2):
        tau = TameType(3, 2, z)
        assert p_tau_contains(tau, {0, 1})
        assert p_tau_contains(tau, set())
    # both boundary conditions hold for z = (0, 1), J = {1}
    assert p_tau_contains(TameType(3, 2, (0, 1)), {1})
    assert not p_tau_contains(TameType(3, 2, (1, 2)), {0})


def test_weight_from_shape_examples():
    w = weight_from_shape(TameType(3, 2, (1, 2)), {0, 1})
    assert (w.a, w.b) == ((1, 2), (1, 0))
    st_w = weight_from_shape(TameType(3, 2, (0, 0)), {0, 1})
    assert st_w.a == (0, 0) and st_w.b == (2, 2) and st_w.is_steinberg_twist
    with pytest.raises(ShapeNotAdmissible):
        weight_from_shape(TameType(3, 2, (1, 2)), {0})
    w1 = weight_from_shape(TameType(3, 2, (1, 2)), {1})
    assert (w1.a, w1.b) == ((2, 0), (0, 1))


def test_tau_from_weight_examples():
    tau = tau_from_weight(SerreWeight(3, (1, 2), (1, 0)))
    assert tau.z == (1, 2) and tau.eta_prime_exp == 0
    with pytest.raises(NotCovered):
        tau_from_weight(SerreWeight(3, (0, 0), (0, 0)))
    tau = tau_from_weight(SerreWeight(5, (0,), (2,)))
    assert tau.z == (2,)


def test_eligibility_examples():
    assert eligible_weight(SerreWeight(3, (0, 0), (1, 0)))[0]
    ok, why = eligible_weight(SerreWeight(3, (0, 0), (1, 1)))
    assert not ok and "p-2" in why
    assert not eligible_weight(SerreWeight(3, (0, 0), (0, 2)))[0]


def test_max_refined_shape_examples():
    tau = TameType(3, 2, (1, 2))
    assert max_refined_shape(tau, {0, 1}) == (8, 8)
    assert max_refined_shape(tau, set()) == (8, 8)
    assert max_refined_shape(tau, {0}) == (1, 5)


@pytest.mark.parametrize("p,f", [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (7, 2)])
def test_round_trip_every_eligible_weight(p, f):
    for b in itertools.product(range(p), repeat=f):
        for twist in (0, 1):
            sigma = SerreWeight(p, (0,) * f, b, twist)
            if not eligible_weight(sigma)[0]:
                continue
            tau = tau_from_weight(sigma)
            back = weight_from_shape(tau, range(f))
            assert back.canonical() == sigma.canonical()


def test_json_round_trip():
    tau = TameType(5, 3, (1, 4, 0), 7)
    assert TameType.from_json(tau.to_json()) == tau
    sigma = SerreWeight(5, (1, 0), (2, 3), 4)
    assert SerreWeight.from_json(sigma.to_json()) == sigma
