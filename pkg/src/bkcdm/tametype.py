"""Digit vectors of tame principal series types and the Serre-weight dictionary.

Indices live in Z/f.  A type is given by its digits z_i in [0, p-1]; the
exponents gamma_i and e = p^f - 1 are derived.  Subsets of Z/f (shapes J and
eta-form sets T) are frozensets of ints.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .coeffring import is_prime


class OutOfRange(ValueError):
    """A digit or exponent lies outside its allowed range."""


class ShapeNotAdmissible(ValueError):
    """The shape does not lie in P_tau."""


class NotCovered(ValueError):
    """The weight is a twist of the trivial or Steinberg weight."""


def _check_prime(p: int):
    if not is_prime(p) or p == 2:
        raise OutOfRange(f"p = {p} must be an odd prime")


def _check_digits(p: int, z: Sequence[int], top: int | None = None):
    top = p - 1 if top is None else top
    for x in z:
        if not 0 <= x <= top:
            raise OutOfRange(f"digit {x} outside [0, {top}]")


def as_subset(f: int, s: Iterable[int] | None) -> frozenset[int]:
    if s is None:
        return frozenset(range(f))
    out = frozenset(int(i) % f for i in s)
    return out


def gamma_from_z(p: int, f: int, z: Sequence[int]) -> tuple[int, ...]:
    """gamma_i = sum_j z_{i-j} p^j."""
    _check_prime(p)
    if len(z) != f:
        raise OutOfRange(f"expected {f} digits, got {len(z)}")
    _check_digits(p, z)
    return tuple(sum(z[(i - j) % f] * p**j for j in range(f)) for i in range(f))


@dataclass(frozen=True)
class TameType:
    p: int
    f: int
    z: tuple[int, ...]
    eta_prime_exp: int = 0
    gamma: tuple[int, ...] = field(init=False, compare=False)
    e: int = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(int(x) for x in self.z))
        object.__setattr__(self, "gamma", gamma_from_z(self.p, self.f, self.z))
        e = self.p**self.f - 1
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "eta_prime_exp", self.eta_prime_exp % e)

    @property
    def eta_equals_eta_prime(self) -> bool:
        return all(x == 0 for x in self.z) or all(x == self.p - 1 for x in self.z)

    def to_json(self) -> dict:
        out = {"p": self.p, "f": self.f, "z": list(self.z)}
        if self.eta_prime_exp:
            out["eta_prime_exp"] = self.eta_prime_exp
        return out

    @classmethod
    def from_json(cls, obj) -> "TameType":
        z = obj["z"]
        return cls(int(obj["p"]), int(obj.get("f", len(z))), tuple(z), int(obj.get("eta_prime_exp", 0)))


@dataclass(frozen=True)
class SerreWeight:
    p: int
    a: tuple[int, ...]
    b: tuple[int, ...]
    twist_exp: int = 0

    def __post_init__(self):
        _check_prime(self.p)
        a = tuple(int(x) for x in self.a)
        b = tuple(int(x) for x in self.b)
        if len(a) != len(b):
            raise OutOfRange("a and b must have the same length")
        _check_digits(self.p, a)
        _check_digits(self.p, b)
        if a and all(x == self.p - 1 for x in a):
            raise OutOfRange("a may not be all p-1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "twist_exp", self.twist_exp % self.e)

    @property
    def f(self) -> int:
        return len(self.b)

    @property
    def e(self) -> int:
        return self.p**self.f - 1

    @property
    def is_steinberg_twist(self) -> bool:
        return all(x == self.p - 1 for x in self.b)

    def det_exponent(self) -> int:
        """Exponent of kappa_0 in the central character a-part plus twist."""
        f = self.f
        return (sum(x * self.p ** ((-i) % f) for i, x in enumerate(self.a)) + self.twist_exp) % self.e

    def canonical(self) -> tuple:
        return (self.p, self.b, self.det_exponent())

    def to_json(self) -> dict:
        return {"p": self.p, "a": list(self.a), "b": list(self.b), "twist": self.twist_exp}

    @classmethod
    def from_json(cls, obj) -> "SerreWeight":
        b = obj["b"]
        return cls(int(obj["p"]), tuple(obj.get("a", [0] * len(b))), tuple(b), int(obj.get("twist", 0)))


def tilde_z(p: int, f: int, z: Sequence[int], T: Iterable[int] | None = None) -> tuple[int, ...]:
    """Digits seen by mixed eta/eta'-form data; T marks the eta-form indices."""
    T = as_subset(f, T)
    out = []
    for i in range(f):
        prev_in, cur_in = (i - 1) % f in T, i in T
        if prev_in and cur_in:
            out.append(z[i])
        elif prev_in:
            out.append(z[i] + 1)
        elif cur_in:
            out.append(p - z[i])
        else:
            out.append(p - 1 - z[i])
    return tuple(out)


def is_transition(f: int, T: Iterable[int], i: int) -> bool:
    T = as_subset(f, T)
    return ((i - 1) % f in T) != (i % f in T)


def _digits_for(p, z, T):
    f = len(z)
    return tilde_z(p, f, z, T) if T is not None else tuple(z)


def _tiles(word: Sequence[int], p: int) -> bool:
    i = 0
    while i < len(word):
        if word[i] == 1:
            i += 1
        elif word[i] == 0 and i + 1 < len(word) and word[i + 1] == p - 1:
            i += 2
        else:
            return False
    return True


def first_obstruction(p: int, z: Sequence[int], T: Iterable[int] | None = None) -> bool:
    """The periodic word is a concatenation of the blocks 1 and (0, p-1)."""
    w = _digits_for(p, z, T)
    f = len(w)
    # the tiling is forced (0 opens a block, p-1 closes one), so it is
    # f-periodic and the rotation starting at any block boundary tiles
    for r in range(f):
        rot = tuple(w[r:]) + tuple(w[:r])
        if _tiles(rot, p):
            return True
    return False


def second_obstruction(p: int, z: Sequence[int], T: Iterable[int] | None = None) -> bool:
    """The periodic word contains (p-1, 1, ..., 1, 0) with zero or more 1's."""
    w = _digits_for(p, z, T)
    f = len(w)
    for start in range(f):
        if w[start] != p - 1:
            continue
        j = 1
        while j <= f:
            x = w[(start + j) % f]
            if x == 0:
                return True
            if x != 1:
                break
            j += 1
    return False


def p_tau_contains(tau: TameType, J: Iterable[int]) -> bool:
    f, p = tau.f, tau.p
    J = as_subset(f, J)
    for i in range(f):
        prev_in, cur_in = (i - 1) % f in J, i in J
        if prev_in and not cur_in and tau.z[i] == p - 1:
            return False
        if not prev_in and cur_in and tau.z[i] == 0:
            return False
    return True


def weight_from_shape(tau: TameType, J: Iterable[int] | None = None) -> SerreWeight:
    f, p, z = tau.f, tau.p, tau.z
    J = as_subset(f, J)
    if not p_tau_contains(tau, J):
        raise ShapeNotAdmissible(f"shape {sorted(J)} is not admissible for z={z}")
    a, b = [], []
    for i in range(f):
        in_j = 1 if i in J else 0
        if (i - 1) % f in J:
            a.append(z[i] + 1 - in_j)
            b.append(p - 1 - z[i] - (1 - in_j))
        else:
            a.append(0)
            b.append(z[i] - in_j)
    if all(x == p - 1 for x in a):
        # sum (p-1) p^j = e vanishes mod e, so the det character is unchanged
        a = [0] * f
    return SerreWeight(p, tuple(a), tuple(b), tau.eta_prime_exp)


def tau_from_weight(sigma: SerreWeight) -> TameType:
    p, f = sigma.p, sigma.f
    if all(x == 0 for x in sigma.b) or sigma.is_steinberg_twist:
        raise NotCovered("b is all 0 or all p-1")
    z = tuple(p - 1 - x for x in sigma.b)
    e = p**f - 1
    exp = (sum((a - zi) * p ** ((-i) % f) for i, (a, zi) in enumerate(zip(sigma.a, z))) + sigma.twist_exp) % e
    return TameType(p, f, z, exp)


def _contains_bad_b_pattern(p: int, b: Sequence[int]) -> bool:
    f = len(b)
    for start in range(f):
        if b[start] != 0:
            continue
        j = 1
        while j <= f:
            x = b[(start + j) % f]
            if x == p - 1:
                return True
            if x != p - 2:
                break
            j += 1
    return False


def eligible_weight(sigma: SerreWeight) -> tuple[bool, str]:
    """Whether the component of sigma is covered; the string names the failure."""
    p, b = sigma.p, sigma.b
    if sigma.is_steinberg_twist:
        return False, "steinberg"
    if all(x == 0 for x in b):
        return False, "b all 0"
    if all(x == p - 2 for x in b):
        return False, "b all p-2"
    if _contains_bad_b_pattern(p, b):
        return False, "b contains (0, p-2, ..., p-2, p-1)"
    return True, "eligible"


def max_refined_shape(tau: TameType, J: Iterable[int]) -> tuple[int, ...]:
    f, e = tau.f, tau.e
    J = as_subset(f, J)
    out = []
    for i in range(f):
        prev_in, cur_in = (i - 1) % f in J, i in J
        if prev_in == cur_in:
            out.append(e)
        elif prev_in:
            out.append(tau.gamma[i])
        else:
            out.append(e - tau.gamma[i])
    return tuple(out)


def unobstructed(tau: TameType) -> bool:
    """The standing assumption for the quotient presentation."""
    return not (tau.eta_equals_eta_prime or first_obstruction(tau.p, tau.z) or second_obstruction(tau.p, tau.z))


def all_types(p: int, f: int) -> list[TameType]:
    return [TameType(p, f, z) for z in product(range(p), repeat=f)]


def all_weights(p: int, f: int) -> list[SerreWeight]:
    """Every b-vector with a = 0, twist 0."""
    return [SerreWeight(p, (0,) * f, b) for b in product(range(p), repeat=f)]
