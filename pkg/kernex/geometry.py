# -*- coding: utf-8 -*-
"""
The spaces V, V' and W: pairing, phase polynomial, group action, Bruhat cells and
Hecke indicators

Everything here is generic in the scalar ring: int, Fraction or ResidueElem.
"""
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, wraps
from typing import Any, Tuple, Union

import sympy

from .ring import ResidueElem, RingError, valuation

__all__ = (
    "GeometryError",
    "RingMismatchError",
    "SingularMatrixError",
    "NotOnQuadricError",
    "Mat2",
    "VPoint",
    "VPrimePoint",
    "AlphaPoint",
    "WPoint",
    "GroupElem",
    "UpperCell",
    "BigCell",
    "W0",
    "pairing",
    "pairing_gram",
    "phase_P",
    "p_dual",
    "dual_map_f",
    "f_inverse",
    "act",
    "grad_P",
    "hessian_P",
    "hessian_det",
    "bruhat_decompose",
    "is_relevant",
    "hecke_indicator",
    "hecke_indicator_central",
)

logger = logging.getLogger(__file__)

Scalar = Any


class GeometryError(ValueError):
    pass


class RingMismatchError(GeometryError):
    pass


class SingularMatrixError(GeometryError):
    pass


class NotOnQuadricError(GeometryError):
    pass


def _invertible(x: Scalar) -> bool:
    if isinstance(x, ResidueElem):
        return x.is_unit()
    return x != 0


def _inv(x: Scalar) -> Scalar:
    if not _invertible(x):
        raise SingularMatrixError(f"{x!r} is not invertible")
    if isinstance(x, ResidueElem):
        return x.inverse()
    return 1 / Fraction(x)


@dataclass(frozen=True)
class Mat2:
    t11: Scalar
    t12: Scalar
    t21: Scalar
    t22: Scalar

    @classmethod
    def identity(cls, one: Scalar = 1) -> "Mat2":
        return cls(one, one * 0, one * 0, one)

    @classmethod
    def diag(cls, x: Scalar, y: Scalar) -> "Mat2":
        return cls(x, x * 0, x * 0, y)

    @classmethod
    def zero(cls, zero: Scalar = 0) -> "Mat2":
        return cls(zero, zero, zero, zero)

    def entries(self) -> Tuple[Scalar, Scalar, Scalar, Scalar]:
        return self.t11, self.t12, self.t21, self.t22

    def det(self) -> Scalar:
        return self.t11 * self.t22 - self.t12 * self.t21

    def trace(self) -> Scalar:
        return self.t11 + self.t22

    def adj(self) -> "Mat2":
        return Mat2(self.t22, -self.t12, -self.t21, self.t11)

    def scale(self, c: Scalar) -> "Mat2":
        return Mat2(c * self.t11, c * self.t12, c * self.t21, c * self.t22)

    def inverse(self) -> "Mat2":
        return self.adj().scale(_inv(self.det()))

    def is_invertible(self) -> bool:
        return _invertible(self.det())

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(*(a + b for a, b in zip(self.entries(), other.entries())))

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(*(a - b for a, b in zip(self.entries(), other.entries())))

    def __neg__(self) -> "Mat2":
        return self.scale(-1)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.t11 * other.t11 + self.t12 * other.t21,
            self.t11 * other.t12 + self.t12 * other.t22,
            self.t21 * other.t11 + self.t22 * other.t21,
            self.t21 * other.t12 + self.t22 * other.t22,
        )


W0 = Mat2(0, 1, 1, 0)


@dataclass(frozen=True)
class VPoint:
    """v = (T, t1, t2); coordinates (x1, x2, x3, x4, t1, t2) with T = (x1 x2; x3 x4)"""

    T: Mat2
    t1: Scalar
    t2: Scalar

    @classmethod
    def from_coords(cls, coords) -> "VPoint":
        x1, x2, x3, x4, t1, t2 = coords
        return cls(Mat2(x1, x2, x3, x4), t1, t2)

    def coords(self) -> Tuple[Scalar, ...]:
        return (*self.T.entries(), self.t1, self.t2)

    def __add__(self, other: "VPoint") -> "VPoint":
        return VPoint(self.T + other.T, self.t1 + other.t1, self.t2 + other.t2)

    def __sub__(self, other: "VPoint") -> "VPoint":
        return VPoint(self.T - other.T, self.t1 - other.t1, self.t2 - other.t2)

    def __neg__(self) -> "VPoint":
        return self.scale(-1)

    def scale(self, c: Scalar) -> "VPoint":
        return VPoint(self.T.scale(c), c * self.t1, c * self.t2)

    def in_vprime(self) -> bool:
        return all(_invertible(x) for x in (self.T.det(), self.t1, self.t2))


@dataclass(frozen=True)
class VPrimePoint(VPoint):
    def __post_init__(self):
        if not self.in_vprime():
            raise GeometryError(f"det T, t1, t2 must be invertible: {self}")


@dataclass(frozen=True)
class AlphaPoint(VPoint):
    """alpha = (B, y1, y2), stored in the same slots as (T, t1, t2)"""

    @property
    def B(self) -> Mat2:
        return self.T

    @property
    def y1(self) -> Scalar:
        return self.t1

    @property
    def y2(self) -> Scalar:
        return self.t2

    @classmethod
    def of(cls, v: VPoint) -> "AlphaPoint":
        return cls(v.T, v.t1, v.t2)


@dataclass(frozen=True)
class WPoint:
    b: Scalar
    v: VPoint

    def __post_init__(self):
        if not _invertible(self.b) or not self.v.in_vprime():
            raise NotOnQuadricError(f"b, det T, t1, t2 must be invertible: {self}")
        if _inv(self.b) * self.v.T.det() != self.v.t1 * self.v.t2:
            raise NotOnQuadricError(f"b^-1 det T != t1 t2 at {self}")


@dataclass(frozen=True)
class GroupElem:
    """(g1, g2, h3, h4) with h3 = diag(x, 1) and h4 = diag(1, y)"""

    g1: Mat2
    g2: Mat2
    x: Scalar
    y: Scalar

    def __post_init__(self):
        if not (self.g1.is_invertible() and self.g2.is_invertible()):
            raise SingularMatrixError("g1 and g2 must be invertible")
        if not (_invertible(self.x) and _invertible(self.y)):
            raise SingularMatrixError("torus coordinates must be invertible")

    @property
    def h3(self) -> Mat2:
        return Mat2.diag(self.x, self.x * 0 + 1)

    @property
    def h4(self) -> Mat2:
        return Mat2.diag(self.y * 0 + 1, self.y)

    @classmethod
    def identity(cls, one: Scalar = 1) -> "GroupElem":
        return cls(Mat2.identity(one), Mat2.identity(one), one, one)

    def compose(self, other: "GroupElem") -> "GroupElem":
        """the element acting as self after other"""
        return GroupElem(
            other.g1 @ self.g1, other.g2 @ self.g2, self.x * other.x, self.y * other.y
        )

    __mul__ = compose

    @classmethod
    def random_rational(cls, rng: random.Random, height: int = 5) -> "GroupElem":
        def rat(nonzero: bool = False) -> Fraction:
            while True:
                value = Fraction(rng.randint(-height, height), rng.randint(1, height))
                if value or not nonzero:
                    return value

        def mat() -> Mat2:
            while True:
                m = Mat2(rat(), rat(), rat(), rat())
                if m.det():
                    return m

        return cls(mat(), mat(), rat(True), rat(True))


def _guard(func):
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RingError as exc:
            raise RingMismatchError(str(exc)) from exc

    return wrapper


@_guard
def pairing(delta_pt: VPoint, v: VPoint) -> Scalar:
    """tr(delta T) + a1 t1 + a2 t2"""
    return (delta_pt.T @ v.T).trace() + delta_pt.t1 * v.t1 + delta_pt.t2 * v.t2


def pairing_gram() -> Tuple[Tuple[int, ...], ...]:
    """Gram matrix of the pairing in the (x1, x2, x3, x4, t1, t2) coordinates"""

    def unit(i):
        return VPoint.from_coords([1 if j == i else 0 for j in range(6)])

    return tuple(tuple(pairing(unit(i), unit(j)) for j in range(6)) for i in range(6))


@_guard
def phase_P(b: Scalar, v: VPoint) -> Scalar:
    """P(b, v) = b det T - t1 t2"""
    return b * v.T.det() - v.t1 * v.t2


def p_dual(b: Scalar, alpha: VPoint) -> Scalar:
    """P^(b, alpha) = P(b^-1, alpha)"""
    return phase_P(_inv(b), alpha)


def dual_map_f(b: Scalar, v: VPoint) -> VPoint:
    """
    Linear map with P(b, v + w) = P(b, v) + P(b, w) + <f(w), v>
    (x1 x2; x3 x4, t1, t2) -> (b (x4 -x2; -x3 x1), -t2, -t1)
    """
    return VPoint(v.T.adj().scale(b), -v.t2, -v.t1)


def f_inverse(b: Scalar, v: VPoint) -> VPoint:
    return VPoint(v.T.adj().scale(_inv(b)), -v.t2, -v.t1)


@_guard
def act(g: GroupElem, w: Union[WPoint, Tuple[Scalar, VPoint]]):
    """
    (b, T, t1, t2) -> (b det g1 det g2^-1 x^-1 y, g2^-1 T g1, t1 x, t2 y^-1)

    Accepts a WPoint (and returns one) or a plain (b, VPoint) pair.
    """
    b, v = (w.b, w.v) if isinstance(w, WPoint) else w
    b_new = b * g.g1.det() * _inv(g.g2.det()) * _inv(g.x) * g.y
    v_new = VPoint(g.g2.inverse() @ v.T @ g.g1, v.t1 * g.x, v.t2 * _inv(g.y))
    if isinstance(w, WPoint):
        return WPoint(b_new, v_new)
    return b_new, v_new


@lru_cache(maxsize=None)
def _symbolic():
    b = sympy.Symbol("b")
    coords = sympy.symbols("x1 x2 x3 x4 t1 t2")
    x1, x2, x3, x4, t1, t2 = coords
    P = b * (x1 * x4 - x2 * x3) - t1 * t2
    grad = [sympy.diff(P, c) for c in coords]
    hess = sympy.hessian(P, coords)
    return {
        "b": b,
        "coords": coords,
        "P": P,
        "grad": grad,
        "hessian": hess,
        "grad_fn": sympy.lambdify((b, *coords), grad, modules="math"),
        "hess_fn": sympy.lambdify((b,), hess.tolist(), modules="math"),
        "det_fn": sympy.lambdify((b,), sympy.factor(hess.det()), modules="math"),
    }


def grad_P(b: Scalar, v: VPoint) -> Tuple[Scalar, ...]:
    """gradient of P(b, .) at v, derived symbolically from P"""
    return tuple(_symbolic()["grad_fn"](b, *v.coords()))


def hessian_P(b: Scalar) -> Tuple[Tuple[Scalar, ...], ...]:
    return tuple(tuple(row) for row in _symbolic()["hess_fn"](b))


def hessian_det(b: Scalar) -> Scalar:
    return _symbolic()["det_fn"](b)


@dataclass(frozen=True)
class UpperCell:
    """gamma = diag(a, d) n(u) in the Borel"""

    a: Fraction
    d: Fraction
    u: Fraction
    cell: int = 1

    def reconstruct(self) -> Mat2:
        return Mat2.diag(self.a, self.d) @ Mat2(1, self.u, 0, 1)


@dataclass(frozen=True)
class BigCell:
    """gamma = n(n1) delta n(n2) with delta = (0 b/c; c 0)"""

    n1: Fraction
    b: Fraction
    c: Fraction
    n2: Fraction
    cell: int = 2

    @property
    def delta(self) -> Mat2:
        return Mat2(Fraction(0), self.b / self.c, self.c, Fraction(0))

    def reconstruct(self) -> Mat2:
        return Mat2(1, self.n1, 0, 1) @ self.delta @ Mat2(1, self.n2, 0, 1)


def bruhat_decompose(gamma: Mat2) -> Union[UpperCell, BigCell]:
    a, b, c, d = (Fraction(x) for x in gamma.entries())
    det = a * d - b * c
    if det == 0:
        raise SingularMatrixError(f"singular matrix {gamma}")
    if c == 0:
        return UpperCell(a, d, b / a)
    return BigCell(a / c, -det, c, d / c)


def is_relevant(b: Fraction, c: Fraction, y1: Fraction, y2: Fraction) -> bool:
    if b == 0 or c == 0:
        raise GeometryError("b and c must be nonzero")
    return -Fraction(b) / Fraction(c) * Fraction(y1) == Fraction(y2)


def _entries_valuation(g: Mat2, p: int) -> float:
    return min(valuation(x, p) for x in g.entries())


def hecke_indicator(m: int, g: Mat2, p: int | None = None) -> int:
    """
    1_m: integral entries and (det g) = (m)
    at the prime p, or over Z when p is None
    """
    if m == 0:
        raise GeometryError("m must be nonzero")
    det = Fraction(g.det())
    if p is None:
        integral = all(Fraction(x).denominator == 1 for x in g.entries())
        return int(integral and abs(det) == abs(m))
    return int(_entries_valuation(g, p) >= 0 and valuation(det, p) == valuation(m, p))


def hecke_indicator_central(m: int, g: Mat2, p: int | None = None) -> int:
    """1_{m,m}: g in m GL2(O)"""
    if m == 0:
        raise GeometryError("m must be nonzero")
    h = g.scale(Fraction(1, m))
    det = Fraction(h.det())
    if p is None:
        integral = all(Fraction(x).denominator == 1 for x in h.entries())
        return int(integral and abs(det) == 1)
    return int(_entries_valuation(h, p) >= 0 and valuation(det, p) == 0)
