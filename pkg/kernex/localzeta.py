# -*- coding: utf-8 -*-
"""
Local zeta integrals at p, the Dirichlet series D(s) and ramified vanishing

Measures: dv is the Haar measure with vol(V(Z_p)) = 1, dt^x restricted to Z_p^x
has volume 1 - 1/p. The global series D(s) uses vol(O^x) = 1 at every prime.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import mpmath
import numpy as np
import sympy

from .expsum import alpha_excess, pairing_coefficients
from .geometry import AlphaPoint, Mat2, VPoint, p_dual
from .parallel import map_blocks
from .ring import (
    CycloSum,
    NotAUnitError,
    ResidueCtx,
    UnitChar,
    reduce_mod,
    valuation,
)
from .settings import settings

__all__ = (
    "ConvergenceError",
    "PoleError",
    "Certified",
    "GlobalChar",
    "LFactor",
    "LocalZetaSpec",
    "Shell",
    "CosetIndicator",
    "shell_values",
    "tail_bound",
    "local_zeta_brute",
    "local_zeta_closed",
    "divisor_factor",
    "euler_product",
    "zeta_S",
    "dirichlet_D",
    "dirichlet_residue",
    "shell_integral",
    "ramified_vanishing_check",
)

logger = logging.getLogger(__file__)


class ConvergenceError(ValueError):
    pass


class PoleError(ValueError):
    pass


@dataclass(frozen=True)
class Certified:
    """a value with an absolute error bound"""

    value: complex
    error: float = 0.0

    def contains(self, x: complex, tol: float = 0.0) -> bool:
        return abs(complex(x) - self.value) <= self.error + tol

    def scale(self, c: complex) -> "Certified":
        return Certified(self.value * c, self.error * abs(c))


@dataclass(frozen=True)
class GlobalChar:
    """the unramified idele class character |.|^{i tau} of Q"""

    tau: float = 0.0

    def __call__(self, p: int) -> complex:
        return complex(p) ** (-1j * self.tau)

    def local(self, p: int) -> UnitChar:
        return UnitChar.unramified(p, self(p))


def _sigma(s: complex) -> float:
    return complex(s).real


def euler_product(
    s: complex,
    chi: GlobalChar = GlobalChar(),
    bound: Optional[int] = None,
    inverse: bool = False,
    exclude: Iterable[int] = (),
) -> Certified:
    """
    Prod_{p <= bound, p not excluded} (1 - chi(p) p^-s)^{-1}, or its inverse

    The error is certified from the tail over p > bound, which needs Re(s) > 1.
    """
    sigma = _sigma(s)
    if sigma <= 1:
        raise ConvergenceError(f"Euler product needs Re(s) > 1, got {s}")
    bound = bound or settings.int("KERNEX_EULER_BOUND")
    exclude = set(exclude)
    primes = np.array(
        [p for p in sympy.primerange(2, bound + 1) if p not in exclude], dtype=complex
    )
    x = np.power(primes, -(complex(s) + 1j * chi.tau))
    log = complex(np.sum(np.log1p(-x)))
    value = cmath.exp(log if inverse else -log)
    delta = bound ** (1 - sigma) / ((sigma - 1) * (1 - bound ** (-sigma)))
    logger.debug(f"Euler product at s={s} over {len(primes)} primes, tail {delta:.3g}")
    return Certified(value, abs(value) * math.expm1(delta))


def zeta_S(s: complex, S_fin: Iterable[int] = (), tau: float = 0.0) -> complex:
    """zeta(s + i tau) with the Euler factors at S_fin removed, continued analytically"""
    w = complex(s) + 1j * tau
    if w == 1:
        raise PoleError("zeta^S has a pole at 1")
    value = complex(mpmath.zeta(mpmath.mpc(w.real, w.imag)))
    for p in S_fin:
        value *= 1 - complex(p) ** (-w)
    return value


@dataclass(frozen=True)
class LFactor:
    """L^S(s, chi) for an unramified chi, S = {inf} plus exclude"""

    chi: GlobalChar
    s: complex
    exclude: Tuple[int, ...] = ()
    bound: Optional[int] = None

    def local(self, p: int) -> complex:
        return 1 / (1 - self.chi(p) * complex(p) ** (-complex(self.s)))

    def truncated(self, inverse: bool = False) -> Certified:
        return euler_product(self.s, self.chi, self.bound, inverse, self.exclude)

    def analytic(self) -> complex:
        return zeta_S(self.s, self.exclude, self.chi.tau)


@dataclass(frozen=True)
class LocalZetaSpec:
    """
    :param ctx: prime and the largest enumeration level allowed
    :param b: unit at p
    :param alpha: rational entries, read in Q_p
    :param chi: character of Q_p^x
    :param s: complex exponent
    :param M: last t-valuation summed by the brute force
    """

    ctx: ResidueCtx
    b: Fraction
    alpha: AlphaPoint
    chi: UnitChar
    s: complex
    M: int = 6

    def __post_init__(self):
        if self.M < 1:
            raise ConvergenceError(f"truncation M must be >= 1, got {self.M}")
        if self.chi.p != self.ctx.p:
            raise ConvergenceError(f"character at {self.chi.p}, context at {self.ctx.p}")
        if valuation(self.b, self.ctx.p) != 0:
            raise NotAUnitError(f"b={self.b} is not a unit at {self.ctx.p}")

    @property
    def p(self) -> int:
        return self.ctx.p


def _min_valuation(alpha: VPoint, p: int):
    return min(valuation(c, p) for c in pairing_coefficients(alpha))


def _val_mod(r: int, p: int, level: int) -> int:
    r %= p**level
    return level if r == 0 else int(valuation(r, p))


def _pair_term(A: int, l1: int, l2: int, p: int, level: int):
    """
    N^-2 sum_{y, z mod N} zeta_N^{A y z + l1 y + l2 z} = p^{a - level} zeta_N^e,
    returned as (a, e), or None when the sum vanishes
    """
    N = p**level
    a = _val_mod(A, p, level)
    if _val_mod(l1, p, level) < a or _val_mod(l2, p, level) < a:
        return None
    if a == level:
        return a, 0
    pa, rest = p**a, p ** (level - a)
    z0 = -(l1 % N // pa) * pow(A % N // pa, -1, rest) % rest
    return a, l2 * z0 % N


class _ShellKernel:
    """
    g_u(m) = int 1(p^m | P(b, v)) psi(<alpha, v> / (u p^m)) dv, split over the
    three hyperbolic pairs after writing the indicator as an x-average
    """

    def __init__(self, p: int, b: Fraction, alpha: VPoint, u: int, m: int, level: int):
        self.p, self.m, self.level = p, m, level
        N = p**level
        shift = p ** (level - m)
        c = [reduce_mod(Fraction(x) * shift / u, p, level) for x in pairing_coefficients(alpha)]
        b_mod = reduce_mod(b, p, level)
        # (x1, x4), (x2, x3), (t1, t2)
        self.pairs = (
            (b_mod * shift % N, c[0], c[3]),
            (-b_mod * shift % N, c[1], c[2]),
            (-shift % N, c[4], c[5]),
        )

    def __call__(self, lo: int, hi: int) -> Dict[int, int]:
        p, level = self.p, self.level
        N = p**level
        counts: Dict[int, int] = {}
        for x in range(lo, hi):
            weight, phase = 0, 0
            for coef, l1, l2 in self.pairs:
                term = _pair_term(x * coef, l1, l2, p, level)
                if term is None:
                    break
                weight += term[0]
                phase += term[1]
            else:
                key = phase % N
                counts[key] = counts.get(key, 0) + p**weight
        return counts


def _shell_g(spec: LocalZetaSpec, u: int, m: int, level: int, workers=None) -> CycloSum:
    """numerator of g_u(m); the denominator is p^{3 level + m}"""
    p = spec.p
    kernel = _ShellKernel(p, spec.b, spec.alpha, u, m, level)
    counts: Dict[int, int] = {}
    for part in map_blocks(kernel, p**m, workers=workers):
        for key, value in part.items():
            counts[key] = counts.get(key, 0) + value
    counts = {k: v for k, v in counts.items() if v}
    if not counts:
        return CycloSum.zero(1)
    N = p**level
    coefficients = [0] * N
    for key, value in counts.items():
        coefficients[key] = value
    return CycloSum(N, tuple(coefficients))


def _char_cyclo(chi: UnitChar, u: int) -> CycloSum:
    e = chi.exponent(u)
    return CycloSum.basis(e.denominator, e.numerator)


@dataclass(frozen=True)
class Shell:
    """
    one t-valuation m of the brute force: value = z^m p^{-ms} (1 - 1/p) x
    average over units u of chi(u) g_u(m), average = exact / denominator
    """

    m: int
    exact: CycloSum
    denominator: int
    value: complex

    def is_zero(self) -> bool:
        return self.exact.is_zero()


def _excess(spec: LocalZetaSpec) -> int:
    v = _min_valuation(spec.alpha, spec.p)
    return 0 if v >= 0 else int(-v)


def shell_values(spec: LocalZetaSpec, workers=None) -> List[Shell]:
    """shells m = 0..M with exact numerators"""
    p, chi, s = spec.p, spec.chi, complex(spec.s)
    e = _excess(spec)
    depends_on_u = any(pairing_coefficients(spec.alpha))
    shells = []
    for m in range(spec.M + 1):
        level = m + e
        if level > spec.ctx.n:
            raise ConvergenceError(
                f"shell {m} needs level {level}, budget is {spec.ctx.n}"
            )
        if chi.is_unramified():
            exact = _shell_g(spec, 1, m, level, workers)
            denominator = p ** (3 * level + m)
            average = exact.complexify() / denominator
        else:
            dep = level if depends_on_u else 0
            K = max(chi.k, dep)
            cache: Dict[int, CycloSum] = {}
            exact = CycloSum.zero(1)
            for u in range(1, p**K):
                if u % p == 0:
                    continue
                key = u % p**dep if dep else 1
                if key not in cache:
                    cache[key] = _shell_g(spec, key, m, level, workers)
                exact = exact + _char_cyclo(chi, u) * cache[key]
            denominator = p ** (3 * level + m + K)
            # phi(p^K) classes of measure p^-K each, scaled back to the (1 - 1/p) convention
            average = exact.complexify() / denominator / (1 - 1 / p)
        value = chi.z**m * p ** (-m * s) * (1 - 1 / p) * average
        logger.debug(f"shell m={m} level={level}: {value}")
        shells.append(Shell(m, exact, denominator, value))
    return shells


def tail_bound(spec: LocalZetaSpec) -> float:
    """bound on the shells m > M, from vol{v : p^m | P} <= p^-m p^2 / (p^2 - 1)"""
    p = spec.p
    x = p ** (-(_sigma(spec.s) + 1))
    return (1 - 1 / p) * p**2 / (p**2 - 1) * x ** (spec.M + 1) / (1 - x)


def local_zeta_brute(spec: LocalZetaSpec, workers=None) -> Certified:
    """int_{Z_p} chi(t) |t|^s int_V 1(t | P(b, v)) psi(<alpha, v> / t) dv dt^x"""
    if _sigma(spec.s) <= 0:
        raise ConvergenceError(f"brute force needs Re(s) > 0, got {spec.s}")
    shells = shell_values(spec, workers)
    values = [sh.value for sh in shells]
    value = complex(
        math.fsum(v.real for v in values), math.fsum(v.imag for v in values)
    )
    return Certified(value, tail_bound(spec))


def divisor_factor(w, r: complex) -> complex:
    """sum_{d=0}^{w} r^d, with w = inf the geometric limit and w < 0 empty"""
    if w == math.inf:
        if abs(r) >= 1:
            raise ConvergenceError(f"divergent geometric series, ratio {r}")
        return 1 / (1 - r)
    if w < 0:
        return 0j
    if r == 1:
        return complex(w + 1)
    return (1 - r ** (w + 1)) / (1 - r)


def local_zeta_closed(spec: LocalZetaSpec) -> complex:
    """
    L(4+s, chi)^-1 sum_k chi(p)^k p^{-k(1+s)} 1(p^-k alpha integral) J_k, where
    J_k = int 1(t | P(b^-1, p^-k alpha)) chi(t) |t|^{s+3} dt^x over Z_p
    """
    p, chi, s = spec.p, spec.chi, complex(spec.s)
    if not chi.is_unramified():
        return 0j
    z = chi.z
    L_inv = 1 - z * p ** (-(4 + s))
    r = z * p ** (-(s + 3))
    step = z * p ** (-(1 + s))
    top = _min_valuation(spec.alpha, p)
    if top == math.inf:
        if abs(step) >= 1:
            raise ConvergenceError(f"k-series diverges at s={s}")
        J = (1 - 1 / p) * divisor_factor(math.inf, r)
        return L_inv * J / (1 - step)
    w0 = valuation(p_dual(Fraction(spec.b), spec.alpha), p)
    total = 0j
    for k in range(0, int(top) + 1):
        # P(b^-1, .) is homogeneous of degree 2
        J = (1 - 1 / p) * divisor_factor(w0 - 2 * k, r)
        total += step**k * J
    return L_inv * total


def dirichlet_residue(
    S_fin: Iterable[int] = (), bound: Optional[int] = None
) -> Certified:
    """Res_{s=-2} D(s) on the quadric for trivial chi: Res zeta^S / zeta^S(2)"""
    S_fin = tuple(S_fin)
    res_zeta = math.prod(1 - 1 / p for p in S_fin)
    if bound:
        return euler_product(2, GlobalChar(), bound, True, S_fin).scale(res_zeta)
    return Certified(res_zeta / zeta_S(2, S_fin))


def dirichlet_D(
    b: Fraction,
    alpha: VPoint,
    s: complex,
    chi: GlobalChar = GlobalChar(),
    S_fin: Iterable[int] = (),
    bound: Optional[int] = None,
    residue: bool = False,
) -> Certified:
    """
    D(s) = L^S(s+4, chi)^-1 int_{O^S} 1(t | P(b^-1, alpha)) chi(t) |t|^{s+3} dt^x

    On the quadric P(b^-1, alpha) = 0 this is L^S(s+3)/L^S(s+4), with its pole
    at s = -2 - i tau; off it the t-integral is a finite divisor sum.
    """
    s = complex(s)
    S_fin = tuple(sorted(set(S_fin)))
    if s.real <= -3:
        raise ConvergenceError(f"D(s) needs Re(s) > -3, got {s}")
    inv4 = LFactor(chi, s + 4, S_fin, bound).truncated(inverse=True)
    Q = p_dual(Fraction(b), alpha)
    if Q == 0:
        if s + 1j * chi.tau == -2:
            if residue:
                return dirichlet_residue(S_fin, bound)
            raise PoleError("D(s) has a pole at s = -2 on the quadric")
        numerator = LFactor(chi, s + 3, S_fin).analytic()
        return inv4.scale(numerator)
    Q = Fraction(Q)
    primes = set(sympy.factorint(abs(Q.numerator))) | set(sympy.factorint(Q.denominator))
    factor = 1 + 0j
    for p in sorted(primes - set(S_fin)):
        w = valuation(Q, p)
        factor *= divisor_factor(w, chi(p) * complex(p) ** (-(s + 3)))
    logger.debug(f"D off the quadric, P^ = {Q}, divisor factor {factor}")
    return inv4.scale(factor)


@dataclass(frozen=True)
class CosetIndicator:
    """1 on gamma + p^k gl2(Z_p), gamma integral at p"""

    gamma: Mat2
    p: int
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"negative level {self.k}")
        if any(valuation(x, self.p) < 0 for x in self.gamma.entries()):
            raise ValueError(f"coset base {self.gamma} is not integral at {self.p}")

    def __call__(self, g: Mat2) -> int:
        return int(
            all(valuation(Fraction(x) - Fraction(y), self.p) >= self.k
                for x, y in zip(g.entries(), self.gamma.entries()))
        )

    def residues(self, level: int) -> Tuple[int, ...]:
        return tuple(reduce_mod(x, self.p, level) for x in self.gamma.entries())


def shell_integral(
    f1: CosetIndicator,
    f2: CosetIndicator,
    b: Fraction,
    t: Fraction,
    alpha: Optional[VPoint] = None,
) -> Tuple[CycloSum, int]:
    """
    int_V f1(T) f2((-t1, (b det T - t1 t2)/t; t, t2)) psi(<alpha, v>/t) dv
    for a single t, as (numerator, denominator)
    """
    p, k = f1.p, f1.k
    if f2.p != p or f2.k != k:
        raise ValueError("f1 and f2 must be cosets at the same level")
    t = Fraction(t)
    j = int(valuation(t, p))
    u = t / Fraction(p) ** j
    alpha = alpha or VPoint.from_coords([0] * 6)
    b11, b12, b21, b22 = f2.gamma.entries()
    if valuation(t - Fraction(b21), p) < k:
        return CycloSum.zero(1), 1
    e = alpha_excess(alpha, p)
    N_phase = p ** (j + e)
    J = max(j, j + e - k)
    mod_P = p ** (k + j)
    base = (*f1.residues(k), reduce_mod(-Fraction(b11), p, k), reduce_mod(b22, p, k))
    grid = p**J
    idx = np.arange(grid**6, dtype=np.int64)
    v = [base[i] + p**k * ((idx // grid**i) % grid) for i in range(6)]
    x1, x2, x3, x4, t1, t2 = v
    b_mod = reduce_mod(b, p, k + j)
    target = reduce_mod(t * Fraction(b12), p, k + j)
    P = (b_mod * ((x1 * x4 - x2 * x3) % mod_P) - t1 * t2) % mod_P
    mask = P == target
    phase = np.zeros_like(idx)
    for c, coord in zip(pairing_coefficients(alpha), v):
        if c:
            phase = phase + reduce_mod(Fraction(c) * p**e / u, p, j + e) * coord
    counts = np.bincount(phase[mask] % N_phase, minlength=N_phase)
    return CycloSum.from_counts(N_phase, counts), p ** (6 * (k + J))


def ramified_vanishing_check(
    f1: CosetIndicator,
    f2: CosetIndicator,
    b: Fraction,
    chi: UnitChar,
    alpha: Optional[VPoint] = None,
    max_shell: Optional[int] = None,
) -> bool:
    """
    True when every t-shell sum_u chi(u) I(p^j u) vanishes exactly

    Only shells compatible with t = beta21 mod p^k contribute; when beta21 = 0
    mod p^k the shells j = k..max_shell are checked.
    """
    p, k = f1.p, f1.k
    alpha = alpha or VPoint.from_coords([0] * 6)
    beta21 = Fraction(f2.gamma.t21)
    v21 = valuation(beta21, p)
    if v21 < k:
        shells = [int(v21)]
    else:
        shells = list(range(k, (max_shell if max_shell is not None else k + 2) + 1))
    e = alpha_excess(alpha, p)
    annihilated = True
    for j in shells:
        K = max(chi.k, k, j + e)
        total = CycloSum.zero(1)
        for u in range(1, p**K):
            if u % p == 0:
                continue
            numerator, denominator = shell_integral(f1, f2, b, Fraction(p) ** j * u, alpha)
            if numerator.is_zero():
                continue
            total = total + _char_cyclo(chi, u) * numerator
        zero = total.is_zero()
        logger.debug(f"shell j={j}, {p}^{K} unit classes: {'zero' if zero else 'nonzero'}")
        annihilated = annihilated and zero
    return annihilated
