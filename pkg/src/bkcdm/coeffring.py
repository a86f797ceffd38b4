"""Exact arithmetic in R = F_{p^m}[eps]/(eps^k) and truncated power series over R.

Ring elements are plain ints.  A field element of F_{p^m} is the int
sum(c_j * p**j) of its coefficients in the basis 1, x, ..., x^{m-1}; a ring
element is sum(c_j * q**j) over its eps-digits c_j, with q = p**m.  The
:class:`CoeffElement` wrapper gives these ints operator syntax.

Series in u are stored sparsely (exponent -> coefficient) because only
exponents in a few classes mod e ever occur.  Series in v = u^e are stored
densely.  Every series carries its own precision: it is known modulo
var^prec.
"""
from __future__ import annotations

from dataclasses import dataclass
import random
from typing import Iterable, Sequence


class PrecisionExhausted(ArithmeticError):
    """An operation would leave less precision than the configured floor."""


class NonDivisible(ArithmeticError):
    """Exact division by a power of the variable is impossible."""


class NotInvertible(ZeroDivisionError):
    """Inversion of a non-unit."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# --- polynomials over F_p as coefficient lists, lowest degree first ---

def _poly_mulmod(a, b, g, p):
    m = len(g) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    # g is monic
    for d in range(len(prod) - 1, m - 1, -1):
        c = prod[d]
        if c:
            for j in range(m + 1):
                prod[d - m + j] = (prod[d - m + j] - c * g[j]) % p
    return (prod[:m] + [0] * m)[:m]


def _poly_powmod(a, n, g, p):
    result = [1] + [0] * (len(g) - 2)
    base = a
    while n:
        if n & 1:
            result = _poly_mulmod(result, base, g, p)
        base = _poly_mulmod(base, base, g, p)
        n >>= 1
    return result


def field_polynomial(p: int, m: int) -> tuple[int, ...]:
    """Deterministic primitive monic polynomial of degree m over F_p.

    Candidates are scanned with the constant term first, in increasing order
    of sum(c_j p^j); the first one for which x has multiplicative order
    p^m - 1 is returned (such a polynomial is automatically irreducible).
    For m = 1 this is x - r for the least primitive root r.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    order = p**m - 1
    factors = prime_factors(order) if order > 1 else []
    if m == 1:
        # F_p itself; "x" is the residue r of x - r
        for r in range(1, p):
            if all(pow(r, order // q, p) != 1 for q in factors):
                return ((-r) % p, 1)
    for code in range(p**m):
        low = [(code // p**j) % p for j in range(m)]
        if low[0] == 0:
            continue
        g = low + [1]
        x = [0, 1] + [0] * (m - 2)
        one = [1] + [0] * (m - 1)
        if _poly_powmod(x, order, g, p) != one:
            continue
        if all(_poly_powmod(x, order // q, g, p) != one for q in factors):
            return tuple(g)
    raise AssertionError("no primitive polynomial found")


class CoeffRing:
    """R = F_{p^m}[eps]/(eps^k); k = 1 gives the field F_{p^m}.

    Elements are ints in [0, q^k).  Small rings get full operation tables.
    """

    TABLE_LIMIT = 729

    def __init__(self, p: int, m: int = 1, k: int = 1):
        if not is_prime(p) or p == 2:
            raise ValueError("p must be an odd prime")
        if m < 1 or k < 1:
            raise ValueError("m and k must be positive")
        self.p, self.m, self.k = p, m, k
        self.q = p**m
        self.size = self.q**k
        self.n = k - 1
        self.poly = field_polynomial(p, m)
        self._build_field()
        self.zero, self.one = 0, 1
        self._tables = self.size <= self.TABLE_LIMIT
        if self._tables:
            self._build_tables()

    def __repr__(self):
        return f"CoeffRing(p={self.p}, m={self.m}, k={self.k})"

    def __eq__(self, other):
        return isinstance(other, CoeffRing) and (self.p, self.m, self.k) == (other.p, other.m, other.k)

    def __hash__(self):
        return hash((self.p, self.m, self.k))

    # --- the residue field F_q ---

    def _build_field(self):
        p, m, q = self.p, self.m, self.q
        g = list(self.poly)
        exp = [0] * (q - 1)
        log = [None] * q
        if m == 1:
            r = (-g[0]) % p
            cur = 1
            for i in range(q - 1):
                exp[i] = cur
                log[cur] = i
                cur = cur * r % p
        else:
            cur = [1] + [0] * (m - 1)
            x = [0, 1] + [0] * (m - 2)
            for i in range(q - 1):
                code = sum(c * p**j for j, c in enumerate(cur))
                exp[i] = code
                log[code] = i
                cur = _poly_mulmod(cur, x, g, p)
        self._exp, self._log = exp, log
        if m == 1:
            self.fadd = lambda a, b: (a + b) % p
            self.fneg = lambda a: (-a) % p
        else:
            self.fadd = self._fadd_digits
            self.fneg = self._fneg_digits

    def _fadd_digits(self, a, b):
        p = self.p
        out, place = 0, 1
        while a or b:
            out += ((a % p + b % p) % p) * place
            a //= p
            b //= p
            place *= p
        return out

    def _fneg_digits(self, a):
        p = self.p
        out, place = 0, 1
        while a:
            out += ((-(a % p)) % p) * place
            a //= p
            place *= p
        return out

    def fmul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def finv(self, a):
        if a == 0:
            raise NotInvertible("zero has no inverse")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def field_digits(self, a: int) -> list[int]:
        return [(a // self.p**j) % self.p for j in range(self.m)]

    # --- eps digits ---

    def digits(self, a: int) -> list[int]:
        q = self.q
        return [(a // q**j) % q for j in range(self.k)]

    def from_digits(self, ds: Sequence[int]) -> int:
        if len(ds) > self.k:
            if any(ds[self.k:]):
                raise ValueError("digit beyond eps^(k-1)")
            ds = ds[: self.k]
        out = 0
        for j, d in enumerate(ds):
            if not 0 <= d < self.q:
                raise ValueError(f"field element {d} out of range")
            out += d * self.q**j
        return out

    def _add_raw(self, a, b):
        if self.k == 1:
            return self.fadd(a, b)
        da, db = self.digits(a), self.digits(b)
        return self.from_digits([self.fadd(x, y) for x, y in zip(da, db)])

    def _neg_raw(self, a):
        if self.k == 1:
            return self.fneg(a)
        return self.from_digits([self.fneg(x) for x in self.digits(a)])

    def _mul_raw(self, a, b):
        if self.k == 1:
            return self.fmul(a, b)
        da, db = self.digits(a), self.digits(b)
        out = [0] * self.k
        for i, x in enumerate(da):
            if x:
                for j in range(self.k - i):
                    if db[j]:
                        out[i + j] = self.fadd(out[i + j], self.fmul(x, db[j]))
        return self.from_digits(out)

    def _inv_raw(self, a):
        da = self.digits(a)
        if da[0] == 0:
            raise NotInvertible(f"{self.format(a)} is not a unit")
        c0 = self.finv(da[0])
        ys = [c0]
        for j in range(1, self.k):
            acc = 0
            for l in range(1, j + 1):
                acc = self.fadd(acc, self.fmul(da[l], ys[j - l]))
            ys.append(self.fneg(self.fmul(c0, acc)))
        return self.from_digits(ys)

    def _build_tables(self):
        rng = range(self.size)
        self._add = [[self._add_raw(a, b) for b in rng] for a in rng]
        self._mul = [[self._mul_raw(a, b) for b in rng] for a in rng]
        self._neg = [self._neg_raw(a) for a in rng]
        self._inv = [self._inv_raw(a) if self.is_unit(a) else None for a in rng]

    # --- public element operations ---

    def add(self, a: int, b: int) -> int:
        if self._tables:
            return self._add[a][b]
        return self._add_raw(a, b)

    def neg(self, a: int) -> int:
        if self._tables:
            return self._neg[a]
        return self._neg_raw(a)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self._tables:
            return self._mul[a][b]
        return self._mul_raw(a, b)

    def is_unit(self, a: int) -> bool:
        return a % self.q != 0

    def inv(self, a: int) -> int:
        if self._tables:
            r = self._inv[a]
            if r is None:
                raise NotInvertible(f"{self.format(a)} is not a unit")
            return r
        return self._inv_raw(a)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            return self.pow(self.inv(a), -n)
        out, base = 1, a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> R."""
        return n % self.p

    def eps(self, power: int = 1) -> int:
        return self.q**power if power < self.k else 0

    def eps_valuation(self, a: int) -> int:
        """Largest t with a in m^t (k for zero)."""
        for j, d in enumerate(self.digits(a)):
            if d:
                return j
        return self.k

    def in_maximal_ideal(self, a: int) -> bool:
        return not self.is_unit(a)

    def elements(self) -> range:
        return range(self.size)

    def units(self) -> list[int]:
        return [a for a in range(self.size) if self.is_unit(a)]

    def random(self, rng: random.Random) -> int:
        return rng.randrange(self.size)

    def random_unit(self, rng: random.Random) -> int:
        while True:
            a = rng.randrange(self.size)
            if self.is_unit(a):
                return a

    def random_nonunit(self, rng: random.Random) -> int:
        return rng.randrange(self.size // self.q) * self.q

    def dot(self, xs: Sequence[int], ys: Sequence[int]) -> int:
        """sum(xs[i] * ys[i])."""
        acc = 0
        if self._tables:
            add, mul = self._add, self._mul
            for x, y in zip(xs, ys):
                if x and y:
                    acc = add[acc][mul[x][y]]
            return acc
        for x, y in zip(xs, ys):
            if x and y:
                acc = self.add(acc, self.mul(x, y))
        return acc

    # --- serialization ---

    def format_field(self, c: int) -> str:
        return ":".join(str(d) for d in self.field_digits(c))

    def parse_field(self, s: str) -> int:
        parts = [int(t) for t in str(s).split(":")]
        if len(parts) > self.m or any(not 0 <= d < self.p for d in parts):
            raise ValueError(f"bad field element {s!r}")
        return sum(d * self.p**j for j, d in enumerate(parts))

    def to_json(self, a: int) -> list[str]:
        return [self.format_field(d) for d in self.digits(a)]

    def from_json(self, obj) -> int:
        if isinstance(obj, int):
            return self.from_int(obj)
        if isinstance(obj, str):
            obj = [obj]
        return self.from_digits([self.parse_field(s) for s in obj])

    def format(self, a: int) -> str:
        ds = self.digits(a)
        terms = []
        for j, d in enumerate(ds):
            if d:
                c = self.format_field(d)
                terms.append(c if j == 0 else f"({c})e^{j}" if j > 1 else f"({c})e")
        return " + ".join(terms) or "0"

    def metadata(self) -> dict:
        return {"p": self.p, "m": self.m, "k": self.k, "field_polynomial": list(self.poly)}

    def element(self, value) -> "CoeffElement":
        if isinstance(value, CoeffElement):
            return value
        if isinstance(value, int):
            return CoeffElement(self, value)
        return CoeffElement(self, self.from_json(value))


@dataclass(frozen=True)
class CoeffElement:
    ring: CoeffRing
    value: int

    def _coerce(self, other):
        if isinstance(other, CoeffElement):
            return other.value
        if isinstance(other, int):
            return self.ring.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CoeffElement(self.ring, self.ring.add(self.value, o))

    __radd__ = __add__

    def __neg__(self):
        return CoeffElement(self.ring, self.ring.neg(self.value))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CoeffElement(self.ring, self.ring.sub(self.value, o))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CoeffElement(self.ring, self.ring.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CoeffElement(self.ring, self.ring.div(self.value, o))

    def __pow__(self, n: int):
        return CoeffElement(self.ring, self.ring.pow(self.value, n))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.value == o

    def __hash__(self):
        return hash((self.ring, self.value))

    def __bool__(self):
        return self.value != 0

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.value)

    def inverse(self) -> "CoeffElement":
        return CoeffElement(self.ring, self.ring.inv(self.value))

    @property
    def coefficients(self) -> list[int]:
        return self.ring.digits(self.value)

    def __repr__(self):
        return self.ring.format(self.value)


# --- series -------------------------------------------------------------


@dataclass(frozen=True)
class SeriesSpace:
    """Shared parameters of a family of series: coefficients, variable, caps.

    ``cap`` is the working precision (series are never known beyond it) and
    ``floor`` the least precision an operation may leave behind.
    """

    ring: CoeffRing
    var: str
    cap: int
    floor: int = 1
    e: int = 1

    def __post_init__(self):
        if self.var not in ("u", "v"):
            raise ValueError("var must be 'u' or 'v'")
        if self.cap < 1:
            raise ValueError("working precision must be positive")


def _val(coeffs, prec):
    for i, c in enumerate(coeffs):
        if c:
            return i
    return prec


class VSeries:
    """Power series in v over R, known modulo v^prec (dense storage)."""

    __slots__ = ("space", "coeffs", "prec")

    def __init__(self, space: SeriesSpace, coeffs: Iterable[int] = (), prec: int | None = None):
        cs = list(coeffs)
        if prec is None:
            prec = space.cap
        prec = min(prec, space.cap)
        if prec < 0:
            raise PrecisionExhausted("negative precision")
        cs = cs[:prec]
        cs += [0] * (prec - len(cs))
        self.space = space
        self.coeffs = tuple(cs)
        self.prec = prec

    # constructors
    @classmethod
    def zero(cls, space, prec=None):
        return cls(space, (), prec)

    @classmethod
    def const(cls, space, c: int, prec=None):
        return cls(space, (c,), prec)

    @classmethod
    def monomial(cls, space, c: int, r: int, prec=None):
        return cls(space, [0] * r + [c], prec)

    @property
    def ring(self) -> CoeffRing:
        return self.space.ring

    def _new(self, coeffs, prec):
        return VSeries(self.space, coeffs, prec)

    def constant(self) -> int:
        return self.coeffs[0] if self.prec > 0 else 0

    def valuation(self) -> int | None:
        """Smallest exponent with a nonzero coefficient; None if zero to precision."""
        v = _val(self.coeffs, self.prec)
        return None if v >= self.prec else v

    def _val_or_prec(self):
        return _val(self.coeffs, self.prec)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_unit(self) -> bool:
        return self.prec > 0 and self.ring.is_unit(self.coeffs[0])

    def __add__(self, other: "VSeries") -> "VSeries":
        prec = min(self.prec, other.prec)
        add = self.ring.add
        return self._new([add(a, b) for a, b in zip(self.coeffs[:prec], other.coeffs[:prec])], prec)

    def __neg__(self):
        neg = self.ring.neg
        return self._new([neg(a) for a in self.coeffs], self.prec)

    def __sub__(self, other: "VSeries") -> "VSeries":
        prec = min(self.prec, other.prec)
        sub = self.ring.sub
        return self._new([sub(a, b) for a, b in zip(self.coeffs[:prec], other.coeffs[:prec])], prec)

    def scale(self, c: int) -> "VSeries":
        if c == 1:
            return self
        mul = self.ring.mul
        return self._new([mul(c, a) for a in self.coeffs], self.prec)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        va, vb = self._val_or_prec(), other._val_or_prec()
        prec = min(self.prec + vb, other.prec + va, self.space.cap)
        a, b = self.coeffs, other.coeffs
        ring = self.ring
        out = [0] * prec
        if va < prec and vb < prec:
            dot = ring.dot
            for n in range(va + vb, prec):
                lo = max(va, n - len(b) + 1)
                hi = min(n - vb, len(a) - 1)
                if lo <= hi:
                    out[n] = dot(a[lo:hi + 1], [b[n - i] for i in range(lo, hi + 1)])
        return self._new(out, prec)

    __rmul__ = __mul__

    def shift(self, r: int) -> "VSeries":
        """Multiply by v^r (r >= 0)."""
        if r < 0:
            raise ValueError("use divide_exact for negative shifts")
        if r == 0:
            return self
        return self._new([0] * r + list(self.coeffs), self.prec + r)

    def divide_exact(self, r: int) -> "VSeries":
        """Divide by v^r; the r lowest coefficients must vanish."""
        if r == 0:
            return self
        if self.prec < r:
            raise PrecisionExhausted(f"cannot divide by v^{r} at precision {self.prec}")
        if any(self.coeffs[:r]):
            raise NonDivisible(f"series is not divisible by v^{r}")
        prec = self.prec - r
        if prec < self.space.floor:
            raise PrecisionExhausted(f"precision {prec} below floor {self.space.floor}")
        return self._new(self.coeffs[r:], prec)

    def phi(self) -> "VSeries":
        """Substitute v -> v^p (coefficients fixed)."""
        p = self.ring.p
        prec = min(self.prec * p, self.space.cap)
        out = [0] * prec
        for i, c in enumerate(self.coeffs):
            if i * p >= prec:
                break
            out[i * p] = c
        return self._new(out, prec)

    def inverse(self) -> "VSeries":
        c0 = self.constant()
        ring = self.ring
        inv0 = ring.inv(c0)
        prec = self.prec
        a = self.coeffs
        out = [inv0]
        for n in range(1, prec):
            acc = ring.dot(a[1:n + 1], out[::-1])
            out.append(ring.neg(ring.mul(inv0, acc)))
        return self._new(out, prec)

    def truncate(self, prec: int) -> "VSeries":
        return self._new(self.coeffs, min(prec, self.prec))

    def with_prec(self, prec: int) -> "VSeries":
        """Treat the stored coefficients as exact up to ``prec`` (for exact data)."""
        return self._new(self.coeffs, prec)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VSeries):
            return NotImplemented
        n = min(self.prec, other.prec)
        return self.coeffs[:n] == other.coeffs[:n]

    __hash__ = None

    def identical(self, other: "VSeries") -> bool:
        return self.prec == other.prec and self.coeffs == other.coeffs

    def to_u(self, uspace: SeriesSpace) -> "USeries":
        e = uspace.e
        terms = {i * e: c for i, c in enumerate(self.coeffs) if c}
        return USeries(uspace, terms, self.prec * e)

    def to_json(self) -> dict:
        ring = self.ring
        return {"prec": self.prec, "terms": [[i, ring.to_json(c)] for i, c in enumerate(self.coeffs) if c]}

    @classmethod
    def from_json(cls, space: SeriesSpace, obj) -> "VSeries":
        if isinstance(obj, (int, str, list)):
            return cls.const(space, space.ring.from_json(obj))
        prec = obj.get("prec", space.cap)
        cs = [0] * prec
        for exp, c in obj.get("terms", []):
            if not 0 <= exp < prec:
                raise ValueError(f"exponent {exp} outside [0, {prec})")
            cs[exp] = space.ring.from_json(c)
        return cls(space, cs, prec)

    def __repr__(self):
        ring = self.ring
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                s = ring.format(c)
                terms.append(s if i == 0 else f"({s})v^{i}")
        body = " + ".join(terms) or "0"
        return f"{body} + O(v^{self.prec})"


class USeries:
    """Power series in u over R, known modulo u^prec (sparse storage)."""

    __slots__ = ("space", "terms", "prec")

    def __init__(self, space: SeriesSpace, terms: dict[int, int] | None = None, prec: int | None = None):
        if prec is None:
            prec = space.cap
        prec = min(prec, space.cap)
        self.space = space
        self.prec = prec
        clean = {}
        for exp, c in (terms or {}).items():
            if exp < 0:
                raise ValueError("negative exponent")
            if c and exp < prec:
                clean[exp] = c
        self.terms = clean

    @property
    def ring(self):
        return self.space.ring

    def _new(self, terms, prec):
        return USeries(self.space, terms, prec)

    def valuation(self) -> int | None:
        return min(self.terms) if self.terms else None

    def _val_or_prec(self):
        return min(self.terms) if self.terms else self.prec

    def coefficient(self, exp: int) -> int:
        return self.terms.get(exp, 0)

    def __add__(self, other):
        prec = min(self.prec, other.prec)
        add = self.ring.add
        out = dict(self.terms)
        for exp, c in other.terms.items():
            out[exp] = add(out.get(exp, 0), c)
        return self._new(out, prec)

    def __neg__(self):
        neg = self.ring.neg
        return self._new({e: neg(c) for e, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            mul = self.ring.mul
            return self._new({e: mul(other, c) for e, c in self.terms.items()}, self.prec)
        va, vb = self._val_or_prec(), other._val_or_prec()
        prec = min(self.prec + vb, other.prec + va, self.space.cap)
        ring = self.ring
        out: dict[int, int] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                s = ea + eb
                if s < prec:
                    out[s] = ring.add(out.get(s, 0), ring.mul(ca, cb))
        return self._new(out, prec)

    __rmul__ = __mul__

    def shift(self, r: int) -> "USeries":
        return self._new({e + r: c for e, c in self.terms.items()}, self.prec + r)

    def divide_exact(self, r: int) -> "USeries":
        if self.prec < r:
            raise PrecisionExhausted(f"cannot divide by u^{r} at precision {self.prec}")
        if any(e < r for e in self.terms):
            raise NonDivisible(f"series is not divisible by u^{r}")
        prec = self.prec - r
        if prec < self.space.floor:
            raise PrecisionExhausted(f"precision {prec} below floor {self.space.floor}")
        return self._new({e - r: c for e, c in self.terms.items()}, prec)

    def phi(self) -> "USeries":
        p = self.ring.p
        return self._new({e * p: c for e, c in self.terms.items()}, min(self.prec * p, self.space.cap))

    def exponent_classes(self) -> set[int]:
        e = self.space.e
        return {exp % e for exp in self.terms}

    def in_v(self) -> bool:
        """True iff only exponents divisible by e occur."""
        return self.exponent_classes() <= {0}

    def to_v(self, vspace: SeriesSpace, offset: int = 0) -> VSeries:
        """Read u^offset * (series in v) back as the series in v."""
        e = self.space.e
        if any((exp - offset) % e or exp < offset for exp in self.terms):
            raise ValueError(f"series is not u^{offset} times a series in v")
        cs = {}
        for exp, c in self.terms.items():
            cs[(exp - offset) // e] = c
        nv = -(-(self.prec - offset) // e)
        return VSeries(vspace, [cs.get(i, 0) for i in range(nv)], nv)

    def __eq__(self, other):
        if not isinstance(other, USeries):
            return NotImplemented
        n = min(self.prec, other.prec)
        a = {e: c for e, c in self.terms.items() if e < n}
        b = {e: c for e, c in other.terms.items() if e < n}
        return a == b

    __hash__ = None

    def to_json(self) -> dict:
        ring = self.ring
        return {"prec": self.prec, "terms": [[e, ring.to_json(c)] for e, c in sorted(self.terms.items())]}

    @classmethod
    def from_json(cls, space: SeriesSpace, obj) -> "USeries":
        prec = obj.get("prec", space.cap)
        terms = {}
        for exp, c in obj.get("terms", []):
            if not 0 <= exp < prec:
                raise ValueError(f"exponent {exp} outside [0, {prec})")
            terms[exp] = space.ring.from_json(c)
        return cls(space, terms, prec)

    def __repr__(self):
        ring = self.ring
        parts = [ring.format(c) if e == 0 else f"({ring.format(c)})u^{e}" for e, c in sorted(self.terms.items())]
        return f"{' + '.join(parts) or '0'} + O(u^{self.prec})"


def phi_substitute(s: USeries) -> USeries:
    return s.phi()


def v_valuation(s: VSeries) -> int | None:
    return s.valuation()


def divide_exact(s, r: int):
    return s.divide_exact(r)


def random_vseries(space: SeriesSpace, rng: random.Random, prec: int | None = None, density: float = 1.0) -> VSeries:
    prec = space.cap if prec is None else prec
    ring = space.ring
    cs = [ring.random(rng) if rng.random() < density else 0 for _ in range(prec)]
    return VSeries(space, cs, prec)
