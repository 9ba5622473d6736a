# -*- coding: utf-8 -*-
"""
Global assembly over Q with S = {inf}

Poisson summation on gl2(Z), enumeration of W(Q) by height, the truncated
geometric side and the structure checks on the first Bruhat cell.
"""
import csv
import io
import json
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy import integrate

from .arch import (
    BumpFunction,
    MatrixTestFn,
    QuadratureSpec,
    UnresolvedOscillationError,
    transform_IS,
)
from .geometry import (
    GroupElem,
    Mat2,
    VPoint,
    WPoint,
    act,
    is_relevant,
)

__all__ = (
    "NotGaussianError",
    "LatticeTestFn",
    "PoissonReport",
    "TwistReport",
    "HeightWindow",
    "GeomTerm",
    "TraceRow",
    "GeometricSide",
    "Sigma1Report",
    "height",
    "rationals",
    "theta_value",
    "poisson_check",
    "twisted_transform_check",
    "enumerate_W",
    "enumerate_integral_W",
    "indicator",
    "geometric_terms",
    "geometric_side",
    "sigma1_structure_check",
    "terms_to_json",
    "terms_to_csv",
    "GEOMETRIC_QUAD",
    "standard_geometric_functions",
)

logger = logging.getLogger(__file__)

# geometric-side terms are refused early instead of refined far
GEOMETRIC_QUAD = QuadratureSpec(n_T=7, n_t1=9, n_t2=9, n_t=9, max_axis_points=33)


class NotGaussianError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeTestFn:
    """Psi(A) = exp(-pi vec(A)^T Q vec(A)), vec(A) = (a11, a12, a21, a22)"""

    Q: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.shape != (4, 4):
            raise NotGaussianError(f"expected a 4x4 form, got shape {Q.shape}")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-14):
            raise NotGaussianError("form is not symmetric")
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise NotGaussianError("form is not positive definite")

    @classmethod
    def scaled_identity(cls, scale: float = 1.0) -> "LatticeTestFn":
        return cls(tuple(tuple(scale * float(i == j) for j in range(4)) for i in range(4)))

    @classmethod
    def random(cls, rng: random.Random, lo: float = 0.25, hi: float = 4.0) -> "LatticeTestFn":
        """rational eigenvalues in [lo, hi] in a rational orthogonal (Cayley) basis"""
        eig = [Fraction(rng.randint(int(lo * 8), int(hi * 8)), 8) for _ in range(4)]
        A = np.array([[rng.randint(-2, 2) for _ in range(4)] for _ in range(4)], dtype=float)
        S = (A - A.T) / 2
        I = np.eye(4)
        U = np.linalg.solve(I + S, I - S)
        Q = U @ np.diag([float(e) for e in eig]) @ U.T
        return cls(tuple(tuple(float(x) for x in row) for row in (Q + Q.T) / 2))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.Q, dtype=float)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """x has shape (..., 4) in the (a11, a12, a21, a22) coordinates"""
        x = np.asarray(x, dtype=float)
        return np.exp(-np.pi * np.einsum("...i,ij,...j->...", x, self.matrix, x))

    def fourier(self, X: np.ndarray) -> np.ndarray:
        """int Psi(Y) e^{-2 pi i tr(X Y)} dY, tr(X Y) = vec(X^T) . vec(Y)"""
        X = np.asarray(X, dtype=float)
        xt = X[..., [0, 2, 1, 3]]
        Q_inv = np.linalg.inv(self.matrix)
        quad = np.einsum("...i,ij,...j->...", xt, Q_inv, xt)
        return np.exp(-np.pi * quad) / math.sqrt(np.linalg.det(self.matrix))


def theta_value() -> float:
    """sum_n e^{-pi n^2} = pi^{1/4} / Gamma(3/4)"""
    closed = mpmath.pi**0.25 / mpmath.gamma(0.75)
    series = mpmath.jtheta(3, 0, mpmath.exp(-mpmath.pi))
    if abs(closed - series) > 1e-14:
        raise ArithmeticError(f"theta mismatch {closed} vs {series}")
    return float(closed)


def _box(radius: int) -> np.ndarray:
    r = np.arange(-radius, radius + 1, dtype=float)
    mesh = np.meshgrid(r, r, r, r, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _tail(radius: int, lam: float) -> float:
    """bound on sum over max|k_i| > radius of e^{-pi lam |k|^2}"""
    total, k = 0.0, radius + 1
    while True:
        term = 8 * (2 * k + 1) ** 3 * math.exp(-math.pi * lam * k * k)
        total += term
        if term < 1e-300 or term < total * 1e-17:
            return total
        k += 1


def _radius_for(lam: float, tol: float = 1e-16) -> int:
    r = 1
    while _tail(r, lam) > tol:
        r += 1
    return r


@dataclass(frozen=True)
class PoissonReport:
    lhs: float
    rhs: float
    lhs_tail: float
    rhs_tail: float
    radius: int
    termwise_equal: bool

    @property
    def difference(self) -> float:
        return abs(self.lhs - self.rhs)

    def agrees(self, tol: float = 1e-10) -> bool:
        return self.difference <= tol + self.lhs_tail + self.rhs_tail


def poisson_check(Psi: LatticeTestFn, radius: Optional[int] = None) -> PoissonReport:
    """sum_{B in gl2(Z)} Psi(B) against sum_{B in gl2(Z)} Psi^(B)"""
    if not isinstance(Psi, LatticeTestFn):
        raise NotGaussianError(f"Poisson check needs a Gaussian, got {type(Psi).__name__}")
    eig = np.linalg.eigvalsh(Psi.matrix)
    lam, lam_dual = float(eig.min()), float(1 / eig.max())
    radius = radius or max(_radius_for(lam), _radius_for(lam_dual))
    points = _box(radius)
    left = Psi(points)
    right = Psi.fourier(points)
    lhs, rhs = math.fsum(left), math.fsum(right)
    logger.debug(f"Poisson sums over {len(points)} lattice points: {lhs!r} vs {rhs!r}")
    return PoissonReport(
        lhs,
        rhs,
        _tail(radius, lam),
        _tail(radius, lam_dual) / math.sqrt(np.linalg.det(Psi.matrix)),
        radius,
        bool(np.allclose(left, right, rtol=1e-12, atol=1e-15)),
    )


@dataclass(frozen=True)
class TwistReport:
    constant: float
    predicted: Tuple[float, ...]
    numeric: Tuple[float, ...]

    @property
    def max_error(self) -> float:
        return max((abs(p - n) for p, n in zip(self.predicted, self.numeric)), default=0.0)


def _mat(g) -> np.ndarray:
    if isinstance(g, Mat2):
        return np.array([[float(g.t11), float(g.t12)], [float(g.t21), float(g.t22)]])
    return np.asarray(g, dtype=float)


def _gaussian_fourier_1d(lam: float, eta: float) -> float:
    """int e^{-pi lam z^2} cos(2 pi eta z) dz by adaptive quadrature"""
    L = math.sqrt(40 / (math.pi * lam))
    if eta == 0:
        return integrate.quad(lambda z: math.exp(-math.pi * lam * z * z), -L, L, limit=200)[0]
    return integrate.quad(
        lambda z: math.exp(-math.pi * lam * z * z),
        -L,
        L,
        weight="cos",
        wvar=2 * math.pi * eta,
        limit=200,
    )[0]


def twisted_transform_check(
    Psi: LatticeTestFn, a: float, g1, g2, points: Sequence[Sequence[float]]
) -> TwistReport:
    """
    Transform of x -> Psi(a g1 x g2) computed numerically against
    |a|^-4 |det g1 g2|^-2 Psi^(a^-1 g2^-1 X g1^-1)
    """
    if a == 0:
        raise ValueError("a must be nonzero")
    G1, G2 = _mat(g1), _mat(g2)
    # row-major vec(A Y B) = (A kron B^T) vec(Y)
    M = a * np.kron(G1, G2.T)
    Q_twist = M.T @ Psi.matrix @ M
    lam, U = np.linalg.eigh(Q_twist)
    constant = abs(a) ** -4 * abs(np.linalg.det(G1) * np.linalg.det(G2)) ** -2
    G1_inv, G2_inv = np.linalg.inv(G1), np.linalg.inv(G2)
    predicted, numeric = [], []
    for X in points:
        Xm = np.asarray(X, dtype=float).reshape(2, 2)
        inner = (G2_inv @ Xm @ G1_inv / a).ravel()
        predicted.append(constant * float(Psi.fourier(inner)))
        eta = U.T @ Xm.T.ravel()
        numeric.append(math.prod(_gaussian_fourier_1d(l, e) for l, e in zip(lam, eta)))
    return TwistReport(float(constant), tuple(predicted), tuple(numeric))


def height(x) -> int:
    x = Fraction(x)
    return max(abs(x.numerator), x.denominator)


def rationals(H: int, nonzero: bool = False) -> List[Fraction]:
    """rationals of height <= H, sorted"""
    values = {Fraction(n, d) for d in range(1, H + 1) for n in range(-H, H + 1)}
    if nonzero:
        values.discard(Fraction(0))
    return sorted(values)


@dataclass(frozen=True)
class HeightWindow:
    H: int
    C_max: int

    def __post_init__(self):
        if self.H < 1 or self.C_max < 1:
            raise ValueError(f"window bounds must be >= 1, got {self}")

    def doubled(self) -> "HeightWindow":
        return HeightWindow(2 * self.H, 2 * self.C_max)


def _w_key(w: WPoint) -> Tuple:
    coords = (w.b, *w.v.coords())
    return max(height(x) for x in coords), coords


def enumerate_W(window: HeightWindow) -> List[WPoint]:
    """(b, T, t1, t2) of height <= H with b^-1 det T = t1 t2, all of b, det T, t1, t2 nonzero"""
    values = rationals(window.H)
    units = rationals(window.H, nonzero=True)
    pairs: Dict[Fraction, List[Tuple[Fraction, Fraction]]] = {}
    for t1, t2 in product(units, units):
        pairs.setdefault(t1 * t2, []).append((t1, t2))
    found = set()
    for x1, x2, x3, x4 in product(values, repeat=4):
        det = x1 * x4 - x2 * x3
        if det == 0:
            continue
        T = Mat2(x1, x2, x3, x4)
        for b in units:
            for t1, t2 in pairs.get(det / b, ()):
                found.add(WPoint(b, VPoint(T, t1, t2)))
    points = sorted(found, key=_w_key)
    logger.debug(f"{len(points)} points of W at height <= {window.H}")
    return points


def enumerate_integral_W(window: HeightWindow) -> List[WPoint]:
    """points with b = +-1 and integral (T, t1, t2), entries bounded by H"""
    H = window.H
    r = np.arange(-H, H + 1, dtype=np.int64)
    mesh = np.meshgrid(r, r, r, r, indexing="ij")
    x1, x2, x3, x4 = (m.ravel() for m in mesh)
    det = x1 * x4 - x2 * x3
    points = []
    for b in (-1, 1):
        for t1 in range(-H, H + 1):
            if t1 == 0:
                continue
            num = b * det
            ok = (det != 0) & (num % t1 == 0)
            t2 = np.where(ok, num // t1, 0)
            ok &= (t2 != 0) & (np.abs(t2) <= H)
            for i in np.flatnonzero(ok):
                T = Mat2(int(x1[i]), int(x2[i]), int(x3[i]), int(x4[i]))
                points.append(WPoint(b, VPoint(T, t1, int(t2[i]))))
    points.sort(key=_w_key)
    logger.debug(f"{len(points)} integral points of W with entries <= {H}")
    return points


def indicator(g: GroupElem, w: WPoint) -> bool:
    """g.(b, alpha) in Z^x x V(Z)"""
    b, v = act(g, (w.b, w.v))
    if abs(Fraction(b)) != 1:
        return False
    return all(Fraction(x).denominator == 1 for x in v.coords())


@dataclass(frozen=True)
class GeomTerm:
    c: int
    w: WPoint
    included: bool
    certified: bool = False
    value: complex = 0j
    error: float = 0.0
    reason: str = ""

    def weighted(self) -> complex:
        return abs(self.c) * self.value

    def as_row(self) -> Dict:
        return {
            "c": self.c,
            "b": str(self.w.b),
            "alpha": ",".join(str(x) for x in self.w.v.coords()),
            "included": self.included,
            "certified": self.certified,
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "error": self.error,
        }


@dataclass
class _TermCache:
    values: Dict[Tuple, Tuple[bool, complex, float, str]] = field(default_factory=dict)


def geometric_terms(
    f1,
    f2: MatrixTestFn,
    V: BumpFunction,
    window: HeightWindow,
    g: Optional[GroupElem] = None,
    quad: QuadratureSpec = GEOMETRIC_QUAD,
    points: Optional[Iterable[WPoint]] = None,
    cache: Optional[_TermCache] = None,
) -> List[GeomTerm]:
    """
    |c| I_S(f, g.(b, c alpha)) for c <= C_max, ordered by (c, height, alpha)

    Points default to the integral points of the window for g = 1 and to the
    height enumeration otherwise. Quadrature refusals give uncertified terms.
    """
    g = g or GroupElem.identity(Fraction(1))
    identity = g == GroupElem.identity(Fraction(1)) or g == GroupElem.identity(1)
    if points is None:
        points = enumerate_integral_W(window) if identity else enumerate_W(window)
    cache = cache if cache is not None else _TermCache()
    terms = []
    for c in range(1, window.C_max + 1):
        for w in points:
            if not indicator(g, w):
                terms.append(GeomTerm(c, w, False, reason="indicator"))
                continue
            b, v = act(g, (w.b, w.v.scale(c)))
            key = (b, *v.coords())
            if key not in cache.values:
                try:
                    result = transform_IS(f1, f2, V, float(b), v, quad)
                    cache.values[key] = (True, result.value, result.error, "")
                except UnresolvedOscillationError as exc:
                    cache.values[key] = (False, 0j, math.inf, str(exc))
            certified, value, error, reason = cache.values[key]
            terms.append(GeomTerm(c, w, True, certified, value, error, reason))
    return terms


@dataclass(frozen=True)
class TraceRow:
    H: int
    C_max: int
    partial_sum: complex
    error: float
    included: int
    uncertified: int


@dataclass(frozen=True)
class GeometricSide:
    trace: Tuple[TraceRow, ...]
    terms: Tuple[GeomTerm, ...]

    @property
    def value(self) -> complex:
        return self.trace[-1].partial_sum if self.trace else 0j

    def cauchy(self) -> bool:
        """successive certified partial sums differ by less than their aggregated error"""
        return all(
            abs(b.partial_sum - a.partial_sum) <= a.error + b.error
            for a, b in zip(self.trace, self.trace[1:])
        )


def _aggregate(window: HeightWindow, terms: Sequence[GeomTerm]) -> TraceRow:
    good = [t for t in terms if t.included and t.certified]
    values = [t.weighted() for t in good]
    total = complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))
    error = math.fsum(abs(t.c) * t.error for t in good)
    uncertified = sum(1 for t in terms if t.included and not t.certified)
    return TraceRow(window.H, window.C_max, total, error, sum(t.included for t in terms), uncertified)


def geometric_side(
    f1,
    f2: MatrixTestFn,
    V: BumpFunction,
    g: Optional[GroupElem] = None,
    windows: Sequence[HeightWindow] = (HeightWindow(1, 1),),
    quad: QuadratureSpec = GEOMETRIC_QUAD,
) -> GeometricSide:
    """certified partial sums of the geometric side over growing windows"""
    cache = _TermCache()
    rows, terms = [], []
    for window in windows:
        terms = geometric_terms(f1, f2, V, window, g, quad, cache=cache)
        row = _aggregate(window, terms)
        logger.info(
            f"window H={row.H} C={row.C_max}: {row.partial_sum:.6g} +- {row.error:.2g}, "
            f"{row.included} terms, {row.uncertified} uncertified"
        )
        rows.append(row)
    return GeometricSide(tuple(rows), tuple(terms))


def terms_to_json(config: Dict, terms: Sequence[GeomTerm]) -> str:
    return json.dumps(
        {"config": config, "terms": [t.as_row() for t in terms]}, sort_keys=True, indent=2
    )


def terms_to_csv(terms: Sequence[GeomTerm]) -> str:
    out = io.StringIO()
    fields = ["c", "b", "alpha", "included", "certified", "value_re", "value_im", "error"]
    writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for t in terms:
        writer.writerow(t.as_row())
    return out.getvalue()


def _n(t: Fraction) -> Mat2:
    return Mat2(Fraction(1), t, Fraction(0), Fraction(1))


@dataclass(frozen=True)
class Sigma1Report:
    samples: int
    relevance: bool
    bijection: bool
    integrand: bool
    stabilizer: bool
    relevant_count: int
    line_count: int

    @property
    def passed(self) -> bool:
        return (
            self.relevance
            and self.bijection
            and self.integrand
            and self.stabilizer
            and self.relevant_count == self.line_count
        )


def _rand_rat(rng: random.Random, H: int, nonzero: bool = True) -> Fraction:
    while True:
        x = Fraction(rng.randint(-H, H), rng.randint(1, H))
        if x or not nonzero:
            return x


def sigma1_structure_check(
    window: HeightWindow, samples: int = 50, seed: int = 0
) -> Sigma1Report:
    """
    First-cell reductions: relevance y2 = -b y1 / c, the collapse of the
    (t1, t2) unipotent integrand to t = b t2 - c t1, and the stabilizer of diag(b, c)
    """
    rng = random.Random(seed)
    H = window.H
    relevance = bijection = integrand = stabilizer = True
    for _ in range(samples):
        b, c, y = _rand_rat(rng, H), _rand_rat(rng, H), _rand_rat(rng, H, nonzero=False)
        y2 = -b * y / c
        relevance &= is_relevant(b, c, y, y2) and not is_relevant(b, c, y, y2 + 1)
        y_other = y + _rand_rat(rng, H)
        bijection &= (-b * y_other / c) != y2

        t1, t2 = _rand_rat(rng, H, nonzero=False), _rand_rat(rng, H, nonzero=False)
        delta = Mat2.diag(b, c)
        two_var = _n(-t1) @ delta @ _n(t2)
        phase_two = y * t1 - b / c * y * t2
        t = b * t2 - c * t1
        one_var = Mat2(b, t, Fraction(0), c)
        integrand &= two_var == one_var and phase_two == -y * t / c

        s = _rand_rat(rng, H, nonzero=False)
        stabilizer &= _n(-s) @ delta @ _n(c * s / b) == delta

    units = rationals(H, nonzero=True)
    values = rationals(H)
    relevant = sum(
        1 for b, c, y1, y2 in product(units, units, values, values) if is_relevant(b, c, y1, y2)
    )
    allowed = set(values)
    line = sum(1 for b, c, y1 in product(units, units, values) if -b * y1 / c in allowed)
    logger.debug(f"{relevant} relevant first-cell points at height <= {H}")
    return Sigma1Report(samples, relevance, bijection, integrand, stabilizer, relevant, line)


def standard_geometric_functions():
    """narrow bumps around the identity so small multiples of alpha stay resolvable"""
    f1 = MatrixTestFn(
        BumpFunction(1.0, 0.25), BumpFunction(0.0, 0.25), BumpFunction(0.0, 0.25),
        BumpFunction(1.0, 0.25),
    )
    f2 = MatrixTestFn(
        e11=BumpFunction(0.0, 0.25), e21=BumpFunction(1.0, 0.1), e22=BumpFunction(0.0, 0.25)
    )
    return f1, f2, BumpFunction(1.0, 0.5)
