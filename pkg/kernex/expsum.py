# -*- coding: utf-8 -*-
"""
Finite exponential sums over V(Z/p^n)

Sums are averages over the 6-dimensional residue space, so the full space has
volume 1. The exact backend histograms the phase exponents into a CycloSum; the
floating backend adds e^{2 pi i phase} directly.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
import sympy

from .geometry import (
    AlphaPoint,
    VPoint,
    _symbolic,
    grad_P,
    hessian_P,
    p_dual,
    phase_P,
)
from .parallel import fsum_complex, map_blocks
from .ring import (
    CycloSum,
    PadicPhase,
    ResidueCtx,
    psi,
    reduce_mod,
    valuation,
)
from .settings import settings

__all__ = (
    "BudgetExceededError",
    "PreconditionError",
    "SumSpec",
    "SumResult",
    "gaussian_sum",
    "twisted_sum",
    "twisted_closed_form",
    "quadric_count",
    "quadric_count_formula",
    "ramanujan_sum",
    "ramanujan_closed",
    "stationary_phase_eval",
    "critical_locus",
    "hensel_lift",
    "normalized_gauss_sum",
    "critical_count",
    "critical_bound",
    "pairing_coefficients",
    "alpha_excess",
)

logger = logging.getLogger(__file__)

BACKENDS = ("exact", "floating")


class BudgetExceededError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class SumSpec:
    ctx: ResidueCtx
    b: int
    m: int
    alpha: Optional[AlphaPoint] = None
    x: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.m <= self.ctx.n:
            raise PreconditionError(f"need 0 <= m <= n, got m={self.m}, n={self.ctx.n}")
        if self.b % self.ctx.p == 0:
            raise PreconditionError(f"b={self.b} is not a unit at {self.ctx.p}")
        if self.x is not None and self.x % self.ctx.p == 0:
            raise PreconditionError(f"x={self.x} is not a unit at {self.ctx.p}")

    @property
    def p(self) -> int:
        return self.ctx.p


@dataclass(frozen=True)
class SumResult:
    """value = exact / denominator when the exact part is present"""

    value: complex
    term_count: int
    backend: str
    exact: Optional[CycloSum] = None
    denominator: int = 1

    def same_as(self, other: "SumResult") -> bool:
        """exact equality of two results carrying CycloSums"""
        if self.exact is None or other.exact is None:
            raise PreconditionError("exact comparison needs the exact backend on both sides")
        return self.exact * other.denominator == other.exact * self.denominator

    def equals(self, value: Fraction) -> bool:
        """exact equality with a rational number"""
        if self.exact is None:
            raise PreconditionError("exact comparison needs the exact backend")
        value = Fraction(value)
        lhs = self.exact * value.denominator
        return lhs == CycloSum.constant(self.exact.order, value.numerator * self.denominator)


def pairing_coefficients(alpha: VPoint) -> Tuple:
    """c with <alpha, v> = sum_k c_k v_k in the (x1, x2, x3, x4, t1, t2) coordinates"""
    B = alpha.T
    return (B.t11, B.t21, B.t12, B.t22, alpha.t1, alpha.t2)


class _QuadraticPhase:
    """exponent(v) = c_P P(b, v) + sum_k l_k v_k mod N over v in (Z/N)^6"""

    def __init__(self, modulus: int, b: int, c_P: int, linear=(0,) * 6, backend="exact"):
        self.modulus = modulus
        self.b = b % modulus
        self.c_P = c_P % modulus
        self.linear = tuple(int(c) % modulus for c in linear)
        self.backend = backend

    def exponents(self, lo: int, hi: int) -> np.ndarray:
        N = self.modulus
        idx = np.arange(lo, hi, dtype=np.int64)
        v = [(idx // N**k) % N for k in range(6)]
        x1, x2, x3, x4, t1, t2 = v
        P = (self.b * ((x1 * x4 - x2 * x3) % N) - t1 * t2) % N
        phase = self.c_P * P
        for c, coord in zip(self.linear, v):
            if c:
                phase = phase + c * coord
        return phase % N

    def __call__(self, lo: int, hi: int):
        phase = self.exponents(lo, hi)
        if self.backend == "exact":
            return np.bincount(phase, minlength=self.modulus).astype(np.int64)
        return complex(np.sum(np.exp(2j * np.pi * phase / self.modulus)))


def _check_budget(terms: int, backend: str):
    if backend not in BACKENDS:
        raise PreconditionError(f"unknown backend {backend!r}")
    key = "KERNEX_EXACT_BUDGET" if backend == "exact" else "KERNEX_FLOAT_BUDGET"
    budget = settings.int(key)
    if terms > budget:
        raise BudgetExceededError(f"{terms} terms exceed the {backend} budget {budget}")


def _evaluate(phase: _QuadraticPhase, workers=None, parts=None) -> SumResult:
    N = phase.modulus
    total = N**6
    _check_budget(total, phase.backend)
    partials = map_blocks(phase, total, workers=workers, parts=parts)
    if phase.backend == "exact":
        counts = np.sum(partials, axis=0) if partials else np.zeros(N, dtype=np.int64)
        exact = CycloSum.from_counts(N, counts)
        return SumResult(exact.complexify() / total, total, "exact", exact, total)
    return SumResult(fsum_complex(partials) / total, total, "floating")


def gaussian_sum(spec: SumSpec, backend: str = "exact", workers=None, parts=None) -> SumResult:
    """p^{-6n} sum_v psi(P(b, v) / p^m); equals p^{-3m}"""
    if spec.alpha is not None:
        raise PreconditionError("gaussian_sum takes no alpha")
    p, n, m = spec.p, spec.ctx.n, spec.m
    x = spec.x or 1
    logger.debug(f"gaussian sum p={p} n={n} m={m} b={spec.b} ({backend})")
    phase = _QuadraticPhase(p**n, spec.b, x * p ** (n - m), backend=backend)
    return _evaluate(phase, workers, parts)


def alpha_excess(alpha: VPoint, p: int) -> int:
    """largest power of p in the denominators of alpha"""
    return max([0] + [-int(valuation(c, p)) for c in pairing_coefficients(alpha) if c])


def twisted_sum(spec: SumSpec, backend: str = "exact", workers=None, parts=None) -> SumResult:
    """
    p^{-6L} sum_v psi((x P(b, v) + <alpha, v>) / p^m)

    The level L is raised to m + e when alpha has denominators p^e.
    """
    if spec.alpha is None or spec.x is None:
        raise PreconditionError("twisted_sum needs alpha and x")
    p, m = spec.p, spec.m
    level = max(spec.ctx.n, m + alpha_excess(spec.alpha, p))
    shift = p ** (level - m)
    linear = [reduce_mod(Fraction(c) * shift, p, level) for c in pairing_coefficients(spec.alpha)]
    logger.debug(f"twisted sum p={p} m={m} level={level} alpha={spec.alpha} ({backend})")
    phase = _QuadraticPhase(p**level, spec.b, spec.x * shift, linear, backend)
    return _evaluate(phase, workers, parts)


def twisted_closed_form(spec: SumSpec) -> SumResult:
    """|t|^3 psi(-P(b^-1, alpha) / (x p^m)) for integral alpha, 0 otherwise"""
    p, m = spec.p, spec.m
    alpha, x = spec.alpha, spec.x or 1
    if alpha is None:
        alpha = AlphaPoint.of(VPoint.from_coords([0] * 6))
    if alpha_excess(alpha, p) > 0:
        return SumResult(0j, 0, "closed", CycloSum.zero(1), 1)
    modulus = p**m
    if modulus == 1:
        return SumResult(1 + 0j, 0, "closed", CycloSum.constant(1, 1), 1)
    Q = reduce_mod(p_dual(Fraction(spec.b), alpha), p, m)
    a = -Q * pow(x, -1, modulus) % modulus
    exact = CycloSum.basis(modulus, a)
    return SumResult(psi(PadicPhase(p, a, m)) / p ** (3 * m), 0, "closed", exact, p ** (3 * m))


def quadric_count_formula(q: int) -> int:
    return q**4 + q**3 + 2 * q**2 + q + 1


class _QuadricZeros:
    def __init__(self, p: int, b: int):
        self.phase = _QuadraticPhase(p, b, 1)

    def __call__(self, lo: int, hi: int) -> int:
        return int(np.count_nonzero(self.phase.exponents(lo, hi) == 0))


def quadric_count(p: int, b: int = 1, workers=None) -> int:
    """points of b(x1 x4 - x2 x3) = t1 t2 in P^5(F_p), by brute force"""
    if not sympy.isprime(p):
        raise PreconditionError(f"{p} is not prime")
    if b % p == 0:
        raise PreconditionError(f"b={b} is not a unit at {p}")
    zeros = sum(map_blocks(_QuadricZeros(p, b), p**6, workers=workers))
    # the zero vector is not a projective point
    return (zeros - 1) // (p - 1)


def ramanujan_closed(p: int, m: int, a: int) -> int:
    v = valuation(a, p)
    if v >= m:
        return p**m - p ** (m - 1)
    if v == m - 1:
        return -(p ** (m - 1))
    return 0


def ramanujan_sum(p: int, m: int, a: int, backend: str = "exact") -> complex:
    """sum over x in (Z/p^m)^x of psi(x a / p^m)"""
    if m < 1:
        raise PreconditionError("ramanujan_sum needs m >= 1")
    modulus = p**m
    units = [x for x in range(modulus) if x % p]
    if backend == "exact":
        total = sum((CycloSum.basis(modulus, x * a) for x in units), CycloSum.zero(modulus))
        return complex(total.rational_value())
    return fsum_complex(psi(PadicPhase(p, x * a, m)) for x in units)


def _enumerate_grid(modulus: int) -> List[np.ndarray]:
    idx = np.arange(modulus**6, dtype=np.int64)
    return [(idx // modulus**k) % modulus for k in range(6)]


def critical_locus(b: int, p: int, level: int = 1) -> List[VPoint]:
    """v in (Z/p^level)^6 with grad P(b, v) = 0"""
    modulus = p**level
    _check_budget(modulus**6, "exact")
    coords = _enumerate_grid(modulus)
    grad = _symbolic()["grad_fn"](b, *coords)
    mask = np.ones(modulus**6, dtype=bool)
    for component in grad:
        mask &= np.asarray(component) % modulus == 0
    return [VPoint.from_coords([int(c[i]) for c in coords]) for i in np.flatnonzero(mask)]


def hensel_lift(b: int, v0: VPoint, p: int, m: int) -> VPoint:
    """Newton lift of a nondegenerate critical point to Z/p^m"""
    modulus = p**m
    H = sympy.Matrix(hessian_P(b))
    try:
        H_inv = H.inv_mod(modulus)
    except ValueError as exc:
        raise PreconditionError(f"Hessian is singular mod {p}") from exc
    v = sympy.Matrix([int(c) for c in v0.coords()])
    for _ in range(max(1, math.ceil(math.log2(max(m, 1))) + 1)):
        g = sympy.Matrix(grad_P(b, VPoint.from_coords(list(v))))
        v = (v - H_inv * g).applyfunc(lambda c: c % modulus)
    return VPoint.from_coords([int(c) for c in v])


def normalized_gauss_sum(b: int, p: int) -> Tuple[CycloSum, int]:
    """
    G = q^-3 sum_{X in F_p^6} psi(X^T H X / 2p) as (numerator, denominator)
    """
    H = np.array(hessian_P(b), dtype=np.int64)
    coords = np.stack(_enumerate_grid(p))
    form = np.einsum("ik,ij,jk->k", coords, H, coords)
    if np.any(form % 2):
        raise PreconditionError("quadratic form is not even")
    counts = np.bincount((form // 2) % p, minlength=p)
    return CycloSum.from_counts(p, counts), p**3


def stationary_phase_eval(spec: SumSpec) -> SumResult:
    """
    |t|^3 sum over critical points c of psi(P(b, c) / t) G_t, G_t = 1 for even m and
    the normalized Gauss sum for odd m
    """
    p, m, b = spec.p, spec.m, spec.b
    if m < 2:
        raise PreconditionError(f"stationary phase needs m >= 2, got {m}")
    if spec.alpha is not None:
        raise PreconditionError("stationary phase is implemented for the untwisted phase")
    modulus = p**m
    critical = [hensel_lift(b, c, p, m) for c in critical_locus(b, p, 1)]
    logger.debug(f"{len(critical)} critical points for b={b} mod {p}")
    total = sum(
        (CycloSum.basis(modulus, int(phase_P(b, c)) % modulus) for c in critical),
        CycloSum.zero(modulus),
    )
    if m % 2:
        gauss, gauss_den = normalized_gauss_sum(b, p)
    else:
        gauss, gauss_den = CycloSum.constant(1, 1), 1
    exact = total * gauss
    denominator = p ** (3 * m) * gauss_den
    return SumResult(
        exact.complexify() / denominator, len(critical), "stationary", exact, denominator
    )


def critical_count(b: int, alpha: VPoint, x3: int, p: int, level: int) -> int:
    """solutions mod p^level of grad(x3 P(b, v) - <alpha, v>) = 0, alpha integral"""
    modulus = p**level
    _check_budget(modulus**6, "exact")
    coords = _enumerate_grid(modulus)
    grad = _symbolic()["grad_fn"](b, *coords)
    shift = [reduce_mod(c, p, level) for c in pairing_coefficients(alpha)]
    mask = np.ones(modulus**6, dtype=bool)
    for component, a in zip(grad, shift):
        mask &= (x3 * np.asarray(component) - a) % modulus == 0
    return int(np.count_nonzero(mask))


def critical_bound(alpha: VPoint, p: int, level: int) -> int:
    """q^{6 min v(alpha)} capped at the enumeration level"""
    v = min(valuation(c, p) for c in pairing_coefficients(alpha))
    return p ** (6 * int(min(v, level)))
