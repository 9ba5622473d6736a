# -*- coding: utf-8 -*-
"""
Residue rings Z/p^n, p-adic phases, characters and exact cyclotomic sums
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import numpy as np
import sympy
from sympy.ntheory import primitive_root

__all__ = (
    "RingError",
    "InsufficientLevelError",
    "NotAUnitError",
    "CharacterError",
    "ResidueCtx",
    "ResidueElem",
    "PadicPhase",
    "CycloSum",
    "UnitChar",
    "psi",
    "psi_exact",
    "char_eval",
    "valuation",
    "unit_part",
    "is_integral",
    "reduce_mod",
)

logger = logging.getLogger(__file__)

Number = Union[int, Fraction]


class RingError(ValueError):
    pass


class InsufficientLevelError(RingError):
    pass


class NotAUnitError(RingError):
    pass


class CharacterError(RingError):
    pass


def valuation(x: Number, p: int) -> Union[int, float]:
    """p-adic valuation of a rational, math.inf for zero"""
    x = Fraction(x)
    if x == 0:
        return math.inf
    v, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(x: Number, p: int) -> Fraction:
    """x / p^v(x), a p-adic unit"""
    x = Fraction(x)
    if x == 0:
        raise NotAUnitError("zero has no unit part")
    return x / Fraction(p) ** valuation(x, p)


def is_integral(x: Number, p: int) -> bool:
    return valuation(x, p) >= 0


def reduce_mod(x: Number, p: int, n: int) -> int:
    """image of a p-integral rational in Z/p^n"""
    x = Fraction(x)
    if x.denominator % p == 0:
        raise RingError(f"{x} is not {p}-integral")
    modulus = p**n
    if modulus == 1:
        return 0
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


@dataclass(frozen=True)
class ResidueCtx:
    p: int
    n: int

    def __post_init__(self):
        if not sympy.isprime(self.p):
            raise RingError(f"{self.p} is not prime")
        if self.n < 0:
            raise RingError(f"level exponent must be >= 0, got {self.n}")

    @property
    def modulus(self) -> int:
        return self.p**self.n

    @property
    def q(self) -> int:
        return self.p

    def __call__(self, value: Number) -> "ResidueElem":
        return ResidueElem(self, reduce_mod(value, self.p, self.n))

    def elements(self) -> Iterable["ResidueElem"]:
        for value in range(self.modulus):
            yield ResidueElem(self, value)

    def units(self) -> Iterable["ResidueElem"]:
        for value in range(self.modulus):
            if value % self.p:
                yield ResidueElem(self, value)


@dataclass(frozen=True, eq=False)
class ResidueElem:
    ctx: ResidueCtx
    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % self.ctx.modulus)

    def _coerce(self, other) -> "ResidueElem":
        if isinstance(other, ResidueElem):
            if other.ctx != self.ctx:
                raise RingError(f"context mismatch: {self.ctx} vs {other.ctx}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ResidueElem(self.ctx, self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ResidueElem(self.ctx, self.value - other.value)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ResidueElem(self.ctx, self.value * other.value)

    __rmul__ = __mul__

    def __neg__(self):
        return ResidueElem(self.ctx, -self.value)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return ResidueElem(self.ctx, pow(self.value, exponent, self.ctx.modulus))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            try:
                other = self.ctx(other)
            except RingError:
                return False
        if not isinstance(other, ResidueElem):
            return NotImplemented
        return self.ctx == other.ctx and self.value == other.value

    def __hash__(self):
        return hash((self.ctx, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} mod {self.ctx.p}^{self.ctx.n}"

    def is_unit(self) -> bool:
        return self.ctx.n == 0 or self.value % self.ctx.p != 0

    def inverse(self) -> "ResidueElem":
        if not self.is_unit():
            raise NotAUnitError(f"{self!r} is not a unit")
        if self.ctx.modulus == 1:
            return self
        return ResidueElem(self.ctx, pow(self.value, -1, self.ctx.modulus))

    def valuation(self) -> int:
        if self.value == 0:
            return self.ctx.n
        return int(valuation(self.value, self.ctx.p))


@dataclass(frozen=True)
class PadicPhase:
    """the class of numerator / p^m in Q_p/Z_p, kept in lowest terms"""

    p: int
    numerator: int = 0
    m: int = 0

    def __post_init__(self):
        if self.m < 0:
            raise RingError(f"denominator exponent must be >= 0, got {self.m}")
        num, m = int(self.numerator), self.m
        num %= self.p**m
        while m > 0 and num % self.p == 0:
            num //= self.p
            m -= 1
        object.__setattr__(self, "numerator", num % self.p**m if m else 0)
        object.__setattr__(self, "m", m)

    @classmethod
    def from_fraction(cls, p: int, x: Number) -> "PadicPhase":
        """the p-part of a rational number"""
        x = Fraction(x)
        e = -valuation(x, p) if x else 0
        if e <= 0:
            return cls(p)
        unit_den = x.denominator // p**e
        return cls(p, x.numerator * pow(unit_den, -1, p**e), e)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.p**self.m)

    def __add__(self, other: "PadicPhase") -> "PadicPhase":
        if other.p != self.p:
            raise RingError(f"phases at different primes {self.p}, {other.p}")
        m = max(self.m, other.m)
        num = self.numerator * self.p ** (m - self.m) + other.numerator * self.p ** (
            m - other.m
        )
        return PadicPhase(self.p, num, m)

    def __neg__(self) -> "PadicPhase":
        return PadicPhase(self.p, -self.numerator, self.m)

    def __sub__(self, other: "PadicPhase") -> "PadicPhase":
        return self + (-other)

    def scale(self, k: int) -> "PadicPhase":
        return PadicPhase(self.p, self.numerator * k, self.m)


@lru_cache(maxsize=None)
def _cyclotomic(order: int) -> sympy.Poly:
    x = sympy.Symbol("x")
    return sympy.Poly(sympy.cyclotomic_poly(order, x), x, domain=sympy.ZZ)


@dataclass(frozen=True, eq=False)
class CycloSum:
    """
    sum_i c_i zeta_N^i in Z[zeta_N], stored in the group-ring basis

    Equality and zero tests go through the canonical remainder modulo the N-th
    cyclotomic polynomial, so two different group-ring vectors describing the same
    algebraic integer compare equal.
    """

    order: int
    coefficients: tuple = field(default=())

    def __post_init__(self):
        if self.order < 1:
            raise RingError(f"order must be positive, got {self.order}")
        coefficients = tuple(int(c) for c in self.coefficients)
        if not coefficients:
            coefficients = (0,) * self.order
        if len(coefficients) != self.order:
            raise RingError(
                f"expected {self.order} coefficients, got {len(coefficients)}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zero(cls, order: int) -> "CycloSum":
        return cls(order)

    @classmethod
    def basis(cls, order: int, k: int, coefficient: int = 1) -> "CycloSum":
        coefficients = [0] * order
        coefficients[k % order] = coefficient
        return cls(order, tuple(coefficients))

    @classmethod
    def constant(cls, order: int, c: int) -> "CycloSum":
        return cls.basis(order, 0, c)

    @classmethod
    def from_counts(cls, order: int, counts) -> "CycloSum":
        counts = np.asarray(counts)
        if counts.shape != (order,):
            raise RingError(f"histogram shape {counts.shape} does not match order {order}")
        return cls(order, tuple(int(c) for c in counts))

    def lift(self, order: int) -> "CycloSum":
        """the same element written with zeta_order, order a multiple of self.order"""
        if order % self.order:
            raise RingError(f"cannot lift order {self.order} to {order}")
        step = order // self.order
        coefficients = [0] * order
        for i, c in enumerate(self.coefficients):
            coefficients[i * step] = c
        return CycloSum(order, tuple(coefficients))

    def _aligned(self, other: "CycloSum") -> tuple["CycloSum", "CycloSum"]:
        order = math.lcm(self.order, other.order)
        return self.lift(order), other.lift(order)

    def __add__(self, other):
        if isinstance(other, int):
            other = CycloSum.constant(self.order, other)
        if not isinstance(other, CycloSum):
            return NotImplemented
        a, b = self._aligned(other)
        return CycloSum(a.order, tuple(x + y for x, y in zip(a.coefficients, b.coefficients)))

    __radd__ = __add__

    def __neg__(self):
        return CycloSum(self.order, tuple(-c for c in self.coefficients))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return CycloSum(self.order, tuple(c * other for c in self.coefficients))
        if not isinstance(other, CycloSum):
            return NotImplemented
        a, b = self._aligned(other)
        n = a.order
        out = [0] * n
        right = [(j, c) for j, c in enumerate(b.coefficients) if c]
        for i, ca in enumerate(a.coefficients):
            if ca:
                for j, cb in right:
                    out[(i + j) % n] += ca * cb
        return CycloSum(n, tuple(out))

    __rmul__ = __mul__

    def canonical(self) -> tuple:
        """coefficients of the remainder modulo Phi_N, lowest degree first"""
        x = _cyclotomic(self.order).gen
        poly = sympy.Poly(list(reversed(self.coefficients)), x, domain=sympy.ZZ)
        rem = poly.rem(_cyclotomic(self.order))
        coeffs = [int(c) for c in reversed(rem.all_coeffs())]
        width = int(sympy.totient(self.order))
        coeffs += [0] * (width - len(coeffs))
        return tuple(coeffs[:width])

    def __eq__(self, other):
        if isinstance(other, int):
            other = CycloSum.constant(self.order, other)
        if not isinstance(other, CycloSum):
            return NotImplemented
        a, b = self._aligned(other)
        return (a - b).is_zero()

    def __hash__(self):
        return hash((self.order, self.canonical()))

    def is_zero(self) -> bool:
        if not any(self.coefficients):
            return True
        return not any(self.canonical())

    def rational_value(self) -> int | None:
        """the integer this element equals, or None if it is not rational"""
        canonical = self.canonical()
        if any(canonical[1:]):
            return None
        return canonical[0]

    def complexify(self) -> complex:
        angles = 2.0 * np.pi * np.arange(self.order) / self.order
        real = math.fsum(c * math.cos(a) for c, a in zip(self.coefficients, angles) if c)
        imag = math.fsum(c * math.sin(a) for c, a in zip(self.coefficients, angles) if c)
        return complex(real, imag)


def psi(x: PadicPhase) -> complex:
    """local additive character at p, e^{2 pi i frac(x)}"""
    if x.m == 0:
        return 1 + 0j
    return cmath.exp(2j * cmath.pi * x.numerator / x.p**x.m)


def psi_exact(x: PadicPhase, ctx: ResidueCtx) -> CycloSum:
    if x.p != ctx.p:
        raise RingError(f"phase at {x.p} used in a context at {ctx.p}")
    if x.m > ctx.n:
        raise InsufficientLevelError(
            f"phase needs level {x.m}, context has level {ctx.n}"
        )
    return CycloSum.basis(ctx.modulus, x.numerator * ctx.p ** (ctx.n - x.m))


@lru_cache(maxsize=None)
def _log_table(p: int, k: int) -> tuple[int, dict]:
    """generator and discrete-log table of (Z/p^k)^x, p odd"""
    modulus = p**k
    g = primitive_root(modulus)
    table, value = {}, 1
    for e in range(modulus - modulus // p):
        table[value] = e
        value = value * g % modulus
    return g, table


@lru_cache(maxsize=None)
def _five_table(k: int) -> dict:
    """powers of 5 modulo 2^k"""
    modulus = 2**k
    table, value = {}, 1
    for e in range(max(1, 2 ** (k - 2))):
        table[value] = e
        value = value * 5 % modulus
    return table


@dataclass(frozen=True)
class UnitChar:
    """
    Character of Q_p^x: chi(p^v u) = z^v * chi_ram(u mod p^k)

    The ramified part is stored as exponents on generators. For odd p a single
    exponent r with chi(g) = e^{2 pi i r / phi(p^k)} for the least primitive root g;
    for p = 2 a pair (r_minus, r_five) with chi(-1) = (-1)^r_minus and
    chi(5) = e^{2 pi i r_five / 2^(k-2)}.
    """

    p: int
    z: complex = 1 + 0j
    k: int = 0
    exponents: tuple = ()

    def __post_init__(self):
        if not sympy.isprime(self.p):
            raise CharacterError(f"{self.p} is not prime")
        if abs(abs(self.z) - 1.0) > 1e-12:
            raise CharacterError(f"|z| must be 1, got {abs(self.z)}")
        if self.k < 0:
            raise CharacterError(f"negative level {self.k}")
        exponents = tuple(int(e) for e in self.exponents)
        if self.k == 0:
            exponents = ()
        elif self.p == 2:
            exponents = (exponents + (0, 0))[:2]
            exponents = (exponents[0] % 2, exponents[1] % max(1, 2 ** (self.k - 2)))
        else:
            phi = self.p ** (self.k - 1) * (self.p - 1)
            exponents = ((exponents + (0,))[0] % phi,)
        object.__setattr__(self, "exponents", exponents)
        self._verify()

    def _verify(self):
        if self.k == 0:
            return
        modulus = self.p**self.k
        for u in self._generators():
            for w in self._generators():
                lhs = self.exponent(u * w % modulus)
                rhs = (self.exponent(u) + self.exponent(w)) % 1
                if lhs != rhs:
                    raise CharacterError(f"ramified data is not a homomorphism at {u}, {w}")

    def _generators(self) -> list[int]:
        modulus = self.p**self.k
        if self.p != 2:
            return [_log_table(self.p, self.k)[0]]
        return [modulus - 1, 5 % modulus]

    @classmethod
    def trivial(cls, p: int) -> "UnitChar":
        return cls(p)

    @classmethod
    def unramified(cls, p: int, z: complex) -> "UnitChar":
        return cls(p, z=complex(z))

    @classmethod
    def ramified(cls, p: int, k: int, exponents, z: complex = 1 + 0j) -> "UnitChar":
        if isinstance(exponents, int):
            exponents = (exponents,)
        return cls(p, z=complex(z), k=k, exponents=tuple(exponents))

    @classmethod
    def quadratic(cls, p: int, z: complex = 1 + 0j) -> "UnitChar":
        """Legendre symbol for odd p, the character of conductor 8 trivial at -1 for p = 2"""
        if p == 2:
            return cls(p, z=complex(z), k=3, exponents=(0, 1))
        return cls(p, z=complex(z), k=1, exponents=((p - 1) // 2,))

    @property
    def kind(self) -> str:
        return "unramified" if self.is_unramified() else "ramified"

    def is_unramified(self) -> bool:
        return self.k == 0 or all(e == 0 for e in self.exponents)

    def exponent(self, u: int) -> Fraction:
        """chi_ram(u) = e^{2 pi i exponent(u)}, exponent in [0, 1)"""
        if u % self.p == 0:
            raise NotAUnitError(f"{u} is not a unit at {self.p}")
        if self.k == 0:
            return Fraction(0)
        modulus = self.p**self.k
        u %= modulus
        if self.p != 2:
            _, table = _log_table(self.p, self.k)
            phi = modulus - modulus // self.p
            return Fraction(self.exponents[0] * table[u], phi) % 1
        sign = 0
        if u % 4 == 3:
            sign, u = 1, (-u) % modulus
        five = _five_table(self.k)[u] if self.k >= 3 else 0
        period = max(1, 2 ** (self.k - 2))
        return (Fraction(self.exponents[0] * sign, 2) + Fraction(self.exponents[1] * five, period)) % 1

    def ram_value(self, u: int) -> complex:
        e = self.exponent(u)
        if e == 0:
            return 1 + 0j
        return cmath.exp(2j * cmath.pi * e.numerator / e.denominator)

    @property
    def conductor(self) -> int:
        """least j with chi trivial on 1 + p^j Z_p"""
        for j in range(self.k + 1):
            if self.is_trivial_on(j):
                return j
        return self.k

    def is_trivial_on(self, j: int) -> bool:
        """triviality on 1 + p^j Z_p (on all units when j = 0)"""
        if j >= self.k:
            return True
        modulus = self.p**self.k
        if j == 0:
            return all(self.exponent(u) == 0 for u in range(1, modulus) if u % self.p)
        return all(self.exponent(1 + self.p**j * i) == 0 for i in range(modulus // self.p**j))


def char_eval(chi: UnitChar, v: int, u: int = 1) -> complex:
    """chi(p^v u)"""
    if u % chi.p == 0:
        raise NotAUnitError(f"{u} is not a unit at {chi.p}")
    return chi.z**v * chi.ram_value(u)
