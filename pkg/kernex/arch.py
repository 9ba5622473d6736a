# -*- coding: utf-8 -*-
"""
The archimedean transform I_S over R

    I_S = c * int_t int_v V(|det T|) f1(T) f2((-t1, (b det T - t1 t2)/t; t, t2))
              psi_inf(<alpha, v>/t) dv/|det T|^2 chi(t) |t|^s dt/|t|

with s = -2 and chi trivial by default, c = KERNEX_IS_NORMALIZATION. Quadrature is
a tensor trapezoid rule on the support boxes of the test functions, refined per
axis until the phase is resolved.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from .geometry import VPoint
from .parallel import fsum_complex, map_blocks
from .settings import settings

__all__ = (
    "UnresolvedOscillationError",
    "WindowFunctionError",
    "BumpFunction",
    "GaussianWindow",
    "MatrixTestFn",
    "MatrixTestSum",
    "QuadratureSpec",
    "ArchChar",
    "ArchResult",
    "DecayReport",
    "PartialFourier",
    "psi_inf",
    "det_range",
    "b_window",
    "transform_IS",
    "transform_IS_inner",
    "separable_oracle",
    "partial_fourier_f3",
    "decay_probe",
)

logger = logging.getLogger(__file__)

Interval = Tuple[float, float]

# e^{-pi K^2} is below double precision
GAUSS_CUTOFF = 3.5
EXCISION_EPS = 0.1


class UnresolvedOscillationError(ValueError):
    pass


class WindowFunctionError(ValueError):
    pass


def psi_inf(x):
    """archimedean additive character e^{-2 pi i x}"""
    return np.exp(-2j * np.pi * np.asarray(x))


@dataclass(frozen=True)
class BumpFunction:
    """scale * exp(-1/(1 - y^2)) with y = (x - center)/radius, zero for |y| >= 1"""

    center: float = 0.0
    radius: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise WindowFunctionError(f"radius must be positive, got {self.radius}")

    def support(self) -> Interval:
        return self.center - self.radius, self.center + self.radius

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order: int = 1):
        if order not in (0, 1, 2):
            raise WindowFunctionError(f"derivatives up to order 2, got {order}")
        y = (np.asarray(x, dtype=float) - self.center) / self.radius
        out = np.zeros_like(y)
        inside = np.abs(y) < 1
        yi = y[inside]
        g = 1 - yi**2
        phi = np.exp(-1 / g)
        if order == 0:
            values = phi
        else:
            d1 = -2 * yi / g**2
            if order == 1:
                values = phi * d1 / self.radius
            else:
                d2 = -2 / g**2 - 8 * yi**2 / g**3
                values = phi * (d1**2 + d2) / self.radius**2
        out[inside] = self.scale * values
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class GaussianWindow:
    """scale * e^{-pi ((x - center)/width)^2}, cut off where it is below double precision"""

    center: float = 0.0
    width: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise WindowFunctionError(f"width must be positive, got {self.width}")

    def support(self) -> Interval:
        return self.center - GAUSS_CUTOFF * self.width, self.center + GAUSS_CUTOFF * self.width

    def __call__(self, x):
        y = (np.asarray(x, dtype=float) - self.center) / self.width
        out = self.scale * np.exp(-np.pi * y**2)
        return out if np.ndim(out) else float(out)

    def fourier(self, xi):
        """int g(x) e^{-2 pi i x xi} dx"""
        xi = np.asarray(xi, dtype=float)
        return (
            self.scale
            * self.width
            * np.exp(-np.pi * (self.width * xi) ** 2)
            * np.exp(-2j * np.pi * self.center * xi)
        )


Entry = Optional[Union[BumpFunction, GaussianWindow]]


def _entry(e: Entry, x):
    if e is None:
        return np.ones_like(np.asarray(x, dtype=float))
    return e(x)


def _support(e: Entry) -> Interval:
    return (-math.inf, math.inf) if e is None else e.support()


@dataclass(frozen=True)
class MatrixTestFn:
    """
    Entry-wise product e11(x11) e12(x12) e21(x21) e22(x22), optionally times a
    window on det; a None entry is the constant 1

    With central=True the product is averaged over the positive scalars,
    int f(aX) da/a, which makes it invariant under X -> aX for a > 0. The
    averaged function is no longer compactly supported.
    """

    e11: Entry = None
    e12: Entry = None
    e21: Entry = None
    e22: Entry = None
    det_window: Optional[BumpFunction] = None
    central: bool = False

    def entries(self) -> Tuple[Entry, Entry, Entry, Entry]:
        return self.e11, self.e12, self.e21, self.e22

    def __call__(self, x11, x12, x21, x22):
        if self.central:
            return self._radial_average(x11, x12, x21, x22)
        return self._product(x11, x12, x21, x22)

    def _product(self, x11, x12, x21, x22):
        value = (
            _entry(self.e11, x11)
            * _entry(self.e12, x12)
            * _entry(self.e21, x21)
            * _entry(self.e22, x22)
        )
        if self.det_window is not None:
            value = value * self.det_window(np.asarray(x11) * x22 - np.asarray(x12) * x21)
        return value

    def _scale_range(self, coords: Sequence[float]) -> Interval:
        """the a > 0 with f(aX) possibly nonzero"""
        x11, x12, x21, x22 = coords
        constraints = [(_support(e), x, 1) for e, x in zip(self.entries(), coords)]
        if self.det_window is not None:
            constraints.append((self.det_window.support(), x11 * x22 - x12 * x21, 2))
        lo, hi = 0.0, math.inf
        for (s_lo, s_hi), x, power in constraints:
            if x == 0:
                if not s_lo < 0 < s_hi:
                    return 0.0, 0.0
                continue
            # a^power x lies in (s_lo, s_hi)
            a_lo, a_hi = sorted((s_lo / x, s_hi / x))
            a_lo, a_hi = max(a_lo, 0.0) ** (1 / power), max(a_hi, 0.0) ** (1 / power)
            lo, hi = max(lo, a_lo), min(hi, a_hi)
        return lo, hi

    def _radial_average(self, x11, x12, x21, x22) -> float:
        coords = tuple(float(x) for x in (x11, x12, x21, x22))
        lo, hi = self._scale_range(coords)
        if lo >= hi:
            return 0.0
        if lo <= 0 or math.isinf(hi):
            raise WindowFunctionError(f"radial average diverges at {coords}: scales ({lo}, {hi})")
        value, _ = integrate.quad(
            lambda u: float(self._product(*(math.exp(u) * x for x in coords))),
            math.log(lo),
            math.log(hi),
            epsabs=1e-12,
        )
        return value

    def support_box(self) -> Tuple[Interval, ...]:
        if self.central:
            return ((-math.inf, math.inf),) * 4
        return tuple(_support(e) for e in self.entries())

    def det_support(self) -> Interval:
        lo, hi = det_range(self.support_box())
        if self.det_window is not None:
            w_lo, w_hi = self.det_window.support()
            lo, hi = max(lo, w_lo), min(hi, w_hi)
        return lo, hi


@dataclass(frozen=True)
class MatrixTestSum:
    """sum_i c_i f_i"""

    terms: Tuple[Tuple[float, MatrixTestFn], ...] = field(default=())

    def __call__(self, x11, x12, x21, x22):
        total = 0.0
        for c, f in self.terms:
            total = total + c * f(x11, x12, x21, x22)
        return total

    def support_box(self) -> Tuple[Interval, ...]:
        boxes = [f.support_box() for _, f in self.terms]
        if not boxes:
            raise WindowFunctionError("empty test function sum")
        return tuple(
            (min(b[i][0] for b in boxes), max(b[i][1] for b in boxes)) for i in range(4)
        )

    def det_support(self) -> Interval:
        ranges = [f.det_support() for _, f in self.terms]
        return min(r[0] for r in ranges), max(r[1] for r in ranges)


MatrixFn = Union[MatrixTestFn, MatrixTestSum]


def _imul(a: Interval, b: Interval) -> Interval:
    products = [x * y for x in a for y in b]
    return min(products), max(products)


def det_range(box: Sequence[Interval]) -> Interval:
    """interval hull of x11 x22 - x12 x21 over a box"""
    if any(math.isinf(x) for interval in box for x in interval):
        return -math.inf, math.inf
    x11, x12, x21, x22 = box
    p, q = _imul(x11, x22), _imul(x12, x21)
    return p[0] - q[1], p[1] - q[0]


def _det_pieces(f1: MatrixFn, V: BumpFunction) -> List[Interval]:
    """signed det T ranges allowed by f1 and by V(|det T|)"""
    d_lo, d_hi = f1.det_support()
    v_lo, v_hi = V.support()
    pieces = [(max(d_lo, v_lo), min(d_hi, v_hi)), (max(d_lo, -v_hi), min(d_hi, -v_lo))]
    return [(lo, hi) for lo, hi in pieces if lo < hi]


def b_window(f1: MatrixFn, f2: MatrixTestFn, V: BumpFunction) -> Optional[Interval]:
    """
    Hull of the b for which I_S can be nonzero, None if no b is

    The f2 argument has determinant -b det T.
    """
    if V.support()[0] <= 0:
        raise WindowFunctionError("V must be supported in (0, inf)")
    pieces = _det_pieces(f1, V)
    if not pieces:
        return None
    D2 = det_range(f2.support_box())
    if math.isinf(D2[0]) or math.isinf(D2[1]):
        return -math.inf, math.inf
    neg = (-D2[1], -D2[0])
    bounds = [_imul(neg, (1 / hi, 1 / lo)) for lo, hi in pieces]
    return min(b[0] for b in bounds), max(b[1] for b in bounds)


@dataclass(frozen=True)
class ArchChar:
    """sign(t)^eps |t|^{i tau}"""

    eps: int = 0
    tau: float = 0.0

    def __post_init__(self):
        if self.eps not in (0, 1):
            raise WindowFunctionError(f"eps must be 0 or 1, got {self.eps}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) ** self.eps * np.abs(t) ** (1j * self.tau)


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Base node counts per axis; counts are raised to resolve the phase
    :param n_T: nodes on each of the four T axes
    :param eps0: excision radius around t = 0
    """

    n_T: int = 9
    n_t1: int = 17
    n_t2: int = 17
    n_t: int = 17
    eps0: float = 1e-3
    points_per_period: Optional[int] = None
    max_axis_points: Optional[int] = None

    def doubled(self) -> "QuadratureSpec":
        return replace(
            self,
            n_T=2 * self.n_T - 1,
            n_t1=2 * self.n_t1 - 1,
            n_t2=2 * self.n_t2 - 1,
            n_t=2 * self.n_t - 1,
        )


@dataclass(frozen=True)
class ArchResult:
    value: complex
    error: float
    counts: Tuple[int, ...] = ()
    excised: float = 0.0


def _trapezoid(lo: float, hi: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes = np.linspace(lo, hi, n)
    weights = np.full(n, (hi - lo) / (n - 1))
    weights[[0, -1]] *= 0.5
    return nodes, weights


def _odd(n: int) -> int:
    return n if n % 2 else n + 1


def _alpha_floats(alpha: VPoint) -> Tuple[float, ...]:
    """pairing coefficients of alpha against (x11, x12, x21, x22, t1, t2)"""
    B = alpha.T
    return tuple(float(c) for c in (B.t11, B.t21, B.t12, B.t22, alpha.t1, alpha.t2))


class _Integrand:
    """tensor trapezoid rule for I_S with fixed node counts; picklable"""

    def __init__(self, f1, f2, V, b, coeffs, chi, s, boxes, counts, t_pieces):
        self.f2, self.b, self.coeffs = f2, float(b), coeffs
        n_t1, n_t2, n_t = counts[4:]
        grids = [_trapezoid(lo, hi, n) for (lo, hi), n in zip(boxes[:4], counts[:4])]
        mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
        wmesh = np.meshgrid(*[g[1] for g in grids], indexing="ij")
        x = [m.ravel() for m in mesh]
        wT = np.prod([w.ravel() for w in wmesh], axis=0)
        d = x[0] * x[3] - x[1] * x[2]
        base = wT * V(np.abs(d)) * f1(*x)
        base = np.divide(base, d**2, out=np.zeros_like(base), where=d != 0)
        keep = base != 0
        self.x = [c[keep] for c in x]
        self.d = d[keep]
        self.base = base[keep]

        t1, w1 = _trapezoid(*boxes[4], n_t1)
        t2, w2 = _trapezoid(*boxes[5], n_t2)
        E = np.outer(w1 * _entry(f2.e11, -t1), w2 * _entry(f2.e22, t2)).ravel()
        T1, T2 = (m.ravel() for m in np.meshgrid(t1, t2, indexing="ij"))
        keep = E != 0
        self.E, self.t1, self.t2 = E[keep], T1[keep], T2[keep]
        self.P = self.t1 * self.t2

        nodes, weights = [], []
        for lo, hi in t_pieces:
            tn, tw = _trapezoid(lo, hi, n_t)
            nodes.append(tn)
            weights.append(tw)
        self.t = np.concatenate(nodes) if nodes else np.zeros(0)
        tw = np.concatenate(weights) if weights else np.zeros(0)
        self.wt = tw * self.t_weight(self.t, chi, s)
        self.chunk = max(1, settings.int("KERNEX_BLOCK_SIZE") // max(1, len(self.E)))

    def t_weight(self, t, chi, s):
        t = np.asarray(t, dtype=float)
        return _entry(self.f2.e21, t) * chi(t) * np.abs(t) ** (s - 1)

    def inner(self, t: float) -> complex:
        """the v-integral at a fixed t"""
        c = self.coeffs
        x = self.x
        phase_T = (c[0] * x[0] + c[1] * x[1] + c[2] * x[2] + c[3] * x[3]) / t
        A = self.base * psi_inf(phase_T)
        Bv = self.E * psi_inf((c[4] * self.t1 + c[5] * self.t2) / t)
        if self.f2.e12 is None:
            return complex(np.sum(A)) * complex(np.sum(Bv))
        partials = []
        for lo in range(0, len(A), self.chunk):
            sl = slice(lo, lo + self.chunk)
            arg = (self.b * self.d[sl, None] - self.P[None, :]) / t
            partials.append(complex(np.sum(A[sl, None] * Bv[None, :] * self.f2.e12(arg))))
        return fsum_complex(partials)

    def __call__(self, lo: int, hi: int) -> complex:
        return fsum_complex(self.wt[k] * self.inner(self.t[k]) for k in range(lo, hi))


def _check_functions(f1: MatrixFn, f2: MatrixTestFn, V: BumpFunction):
    if any(math.isinf(x) for interval in f1.support_box() for x in interval):
        raise WindowFunctionError("f1 needs compact support in every entry")
    if f2.central:
        raise WindowFunctionError("f2 must not be centrally averaged")
    for name, e in (("e11", f2.e11), ("e21", f2.e21), ("e22", f2.e22)):
        if e is None:
            raise WindowFunctionError(f"f2.{name} must be compactly supported")
    if V.support()[0] <= 0:
        raise WindowFunctionError("V must be supported in (0, inf)")


def _t_pieces(f2: MatrixTestFn, eps0: float) -> Tuple[List[Interval], List[float]]:
    """t support with |t| < eps0 removed, and the excised boundary points"""
    lo, hi = f2.e21.support()
    if lo >= eps0 or hi <= -eps0:
        return [(lo, hi)], []
    pieces, cut = [], []
    if lo < -eps0:
        pieces.append((lo, -eps0))
        cut.append(-eps0)
    if hi > eps0:
        pieces.append((eps0, hi))
        cut.append(eps0)
    return pieces, cut


def _axis_count(name: str, base: int, length: float, freq: float, ppp: int, cap: int) -> int:
    n = _odd(max(base, math.ceil(ppp * length * freq) + 1))
    if n > cap:
        raise UnresolvedOscillationError(
            f"axis {name} needs {n} nodes to resolve frequency {freq:.4g}, cap is {cap}"
        )
    return n


def _plan(f1, f2, quad: QuadratureSpec, coeffs, chi: ArchChar, inner_t=None):
    boxes = list(f1.support_box())
    a_lo, a_hi = f2.e11.support()
    boxes.append((-a_hi, -a_lo))
    boxes.append(f2.e22.support())
    t_pieces, cut = _t_pieces(f2, quad.eps0) if inner_t is None else ([], [])
    if inner_t is not None:
        t_min = abs(inner_t)
    elif t_pieces:
        t_min = min(min(abs(lo), abs(hi)) for lo, hi in t_pieces)
    else:
        t_min = math.inf
    ppp = quad.points_per_period or settings.int("KERNEX_POINTS_PER_PERIOD")
    cap = quad.max_axis_points or settings.int("KERNEX_MAX_AXIS_POINTS")
    names = ("x11", "x12", "x21", "x22", "t1", "t2")
    lengths = [hi - lo for lo, hi in boxes]
    freqs = [abs(c) / t_min for c in coeffs]
    n_T = tuple(
        _axis_count(names[i], quad.n_T, lengths[i], freqs[i], ppp, cap) for i in range(4)
    )
    n_t1 = _axis_count("t1", quad.n_t1, lengths[4], freqs[4], ppp, cap)
    n_t2 = _axis_count("t2", quad.n_t2, lengths[5], freqs[5], ppp, cap)
    n_t = quad.n_t
    if inner_t is None and t_pieces:
        reach = sum(abs(c) * max(abs(lo), abs(hi)) for c, (lo, hi) in zip(coeffs, boxes))
        freq_t = reach / t_min**2 + abs(chi.tau) / (2 * np.pi * t_min)
        t_len = max(hi - lo for lo, hi in t_pieces)
        n_t = _axis_count("t", quad.n_t, t_len, freq_t, ppp, cap)
    budget = settings.int("KERNEX_FLOAT_BUDGET")
    work = math.prod(n_T) * (n_t1 * n_t2 if f2.e12 is not None else 1)
    work *= n_t if inner_t is None else 1
    if work > budget:
        raise UnresolvedOscillationError(f"quadrature of {work} evaluations exceeds {budget}")
    return boxes, (*n_T, n_t1, n_t2, n_t), t_pieces, cut


def _halved(counts: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(max(3, (n + 1) // 2) for n in counts)


def _excision_bound(integrand: _Integrand, cut: List[float], chi, s) -> float:
    if not cut:
        return 0.0
    C = max(
        abs(integrand.inner(t) * integrand.t_weight(t, chi, s)) * abs(t) ** EXCISION_EPS
        for t in cut
    )
    return len(cut) * C * abs(cut[0]) ** (1 - EXCISION_EPS) / (1 - EXCISION_EPS)


def transform_IS(
    f1: MatrixFn,
    f2: MatrixTestFn,
    V: BumpFunction,
    b: float,
    alpha: VPoint,
    quad: QuadratureSpec = QuadratureSpec(),
    chi: ArchChar = ArchChar(),
    s: complex = -2,
    workers=None,
) -> ArchResult:
    """
    I_S(f, (b, alpha), chi, s) with an error estimate

    The estimate is |Q(n) - Q(n/2)| plus the excision bound near t = 0. A phase
    the grid cannot resolve raises UnresolvedOscillationError.
    """
    _check_functions(f1, f2, V)
    window = b_window(f1, f2, V)
    if window is None or not window[0] <= b <= window[1]:
        logger.debug(f"b={b} outside the support window {window}, I_S = 0")
        return ArchResult(0j, 0.0)
    coeffs = _alpha_floats(alpha)
    boxes, counts, t_pieces, cut = _plan(f1, f2, quad, coeffs, chi)
    norm = settings.float("KERNEX_IS_NORMALIZATION")
    logger.debug(f"I_S grid {counts}, t pieces {t_pieces}")

    def evaluate(n):
        integrand = _Integrand(f1, f2, V, b, coeffs, chi, s, boxes, n, t_pieces)
        parts = map_blocks(integrand, len(integrand.t), block=1, workers=workers)
        return integrand, fsum_complex(parts)

    integrand, fine = evaluate(counts)
    _, coarse = evaluate(_halved(counts))
    excised = _excision_bound(integrand, cut, chi, s)
    error = abs(norm) * (abs(fine - coarse) + excised)
    return ArchResult(norm * fine, error, counts, abs(norm) * excised)


def transform_IS_inner(
    f1: MatrixFn,
    f2: MatrixTestFn,
    V: BumpFunction,
    b: float,
    alpha: VPoint,
    t: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> ArchResult:
    """the v-integral of I_S at a single t, with a grid-halving error estimate"""
    _check_functions(f1, f2, V)
    if t == 0:
        raise WindowFunctionError("the inner integral is taken at t != 0")
    window = b_window(f1, f2, V)
    if window is None or not window[0] <= b <= window[1]:
        return ArchResult(0j, 0.0)
    coeffs = _alpha_floats(alpha)
    boxes, counts, _, _ = _plan(f1, f2, quad, coeffs, ArchChar(), inner_t=t)

    def evaluate(n):
        return _Integrand(f1, f2, V, b, coeffs, ArchChar(), -2, boxes, n, []).inner(t)

    fine = evaluate(counts)
    coarse = evaluate(_halved(counts))
    return ArchResult(fine, abs(fine - coarse), counts)


def _quad_complex(func: Callable[[float], complex], lo: float, hi: float) -> complex:
    real = integrate.quad(lambda x: complex(func(x)).real, lo, hi, limit=200)[0]
    imag = integrate.quad(lambda x: complex(func(x)).imag, lo, hi, limit=200)[0]
    return complex(real, imag)


def separable_oracle(
    f1: MatrixFn,
    f2: MatrixTestFn,
    V: BumpFunction,
    quad: QuadratureSpec = QuadratureSpec(),
    chi: ArchChar = ArchChar(),
    s: complex = -2,
) -> complex:
    """
    I_S at alpha = 0 when f2 has no (1,2) entry: the T-integral on the same
    trapezoid rule times 1-D adaptive integrals in t1, t2 and t
    """
    _check_functions(f1, f2, V)
    if f2.e12 is not None:
        raise WindowFunctionError("the oracle needs f2.e12 = None")
    zero = VPoint.from_coords([0] * 6)
    boxes, counts, t_pieces, _ = _plan(f1, f2, quad, _alpha_floats(zero), chi)
    integrand = _Integrand(f1, f2, V, 0.0, (0.0,) * 6, chi, s, boxes, counts, t_pieces)
    T_part = math.fsum(integrand.base)
    q1 = integrate.quad(lambda x: float(f2.e11(-x)), *boxes[4], limit=200)[0]
    q2 = integrate.quad(lambda x: float(f2.e22(x)), *boxes[5], limit=200)[0]
    qt = sum(
        _quad_complex(lambda t: complex(integrand.t_weight(t, chi, s)), lo, hi)
        for lo, hi in t_pieces
    )
    return settings.float("KERNEX_IS_NORMALIZATION") * T_part * q1 * q2 * qt


class PartialFourier:
    """
    f2 with its (1,2) entry replaced by the Fourier transform
    int e12(x) e^{-2 pi i x xi} dx, tabulated on a symmetric xi grid
    """

    def __init__(self, f2: MatrixTestFn, xi_max: float, n_xi: int):
        if f2.e12 is None:
            raise WindowFunctionError("f2.e12 must be integrable")
        self.f2 = f2
        self.xi, self.weights = _trapezoid(-xi_max, xi_max, _odd(n_xi))
        self.table = np.array([self.entry(x) for x in self.xi])

    def entry(self, xi: float) -> complex:
        lo, hi = self.f2.e12.support()
        omega = 2 * np.pi * xi

        def e(x):
            return float(self.f2.e12(x))

        if omega == 0:
            return complex(integrate.quad(e, lo, hi, limit=200)[0], 0.0)
        cos = integrate.quad(e, lo, hi, weight="cos", wvar=omega, limit=200)[0]
        sin = integrate.quad(e, lo, hi, weight="sin", wvar=omega, limit=200)[0]
        return complex(cos, -sin)

    def __call__(self, x11, xi, x21, x22):
        f = self.f2
        return (
            _entry(f.e11, x11) * self.entry(xi) * _entry(f.e21, x21) * _entry(f.e22, x22)
        )

    def inverse(self, x) -> np.ndarray:
        """e12 recovered from the tabulated transform"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        kernel = np.exp(2j * np.pi * np.outer(x, self.xi))
        return kernel @ (self.weights * self.table)

    def l2_norms(self) -> Tuple[float, float]:
        """(||e12||^2, ||transform||^2)"""
        lo, hi = self.f2.e12.support()
        direct = integrate.quad(lambda x: float(self.f2.e12(x)) ** 2, lo, hi, limit=200)[0]
        return direct, float(np.sum(self.weights * np.abs(self.table) ** 2))


def partial_fourier_f3(
    f2: MatrixTestFn, xi_max: Optional[float] = None, n_xi: int = 401
) -> PartialFourier:
    """the partial Fourier transform of f2 in the (1,2) entry"""
    if f2.e12 is None:
        raise WindowFunctionError("f2.e12 must be integrable")
    if xi_max is None:
        if isinstance(f2.e12, GaussianWindow):
            xi_max = GAUSS_CUTOFF * 1.5 / f2.e12.width
        else:
            lo, hi = f2.e12.support()
            xi_max = 40.0 / (hi - lo)
    lo, hi = f2.e12.support()
    # xi spacing below 1/(support length) keeps the inversion free of aliasing
    n_xi = max(n_xi, math.ceil(2 * xi_max * 2 * max(abs(lo), abs(hi))) + 1)
    logger.debug(f"partial Fourier table on [-{xi_max}, {xi_max}] with {n_xi} nodes")
    return PartialFourier(f2, xi_max, n_xi)


@dataclass(frozen=True)
class DecayReport:
    """
    Rungs whose |value| does not exceed their error are at the noise floor; the
    ladder is cut at the first of them (noise_floor) and no slope uses them
    """

    ladder: Tuple[float, ...]
    values: Tuple[complex, ...]
    errors: Tuple[float, ...]
    slopes: Tuple[float, ...]
    n0: float
    passed: bool
    noise_floor: Optional[float] = None


def _at_noise_floor(value: complex, error: float) -> bool:
    return error > 0 and abs(value) <= error


def decay_probe(
    f1: MatrixFn,
    f2: MatrixTestFn,
    V: BumpFunction,
    b: float,
    alpha0: VPoint,
    ladder: Sequence[float] = (1, 2, 4, 8),
    t: Optional[float] = None,
    quad: QuadratureSpec = QuadratureSpec(),
    n0: float = 4.0,
) -> DecayReport:
    """
    The inner integral of I_S along alpha = lambda alpha0 and its log-log slopes;
    passes when the slopes over the resolved rungs decrease and the last one is at
    most -n0
    """
    if t is None:
        lo, hi = f2.e21.support()
        t = (lo + hi) / 2
    values, errors = [], []
    for lam in ladder:
        result = transform_IS_inner(f1, f2, V, b, alpha0.scale(lam), t, quad)
        logger.debug(f"decay rung {lam}: |I| = {abs(result.value):.4g} +- {result.error:.2g}")
        values.append(result.value)
        errors.append(result.error)
    resolved = len(ladder)
    for k, (value, error) in enumerate(zip(values, errors)):
        if _at_noise_floor(value, error):
            resolved = k
            break
    noise_floor = ladder[resolved] if resolved < len(ladder) else None
    if noise_floor is not None:
        logger.debug(f"decay ladder cut at {noise_floor}: |I| is within the quadrature error")
    slopes = []
    for k in range(1, resolved):
        (l0, v0), (l1, v1) = (ladder[k - 1], values[k - 1]), (ladder[k], values[k])
        if abs(v1) == 0 or abs(v0) == 0:
            slopes.append(-math.inf)
        else:
            slopes.append(math.log(abs(v1) / abs(v0)) / math.log(l1 / l0))
    decreasing = all(a >= later for a, later in zip(slopes, slopes[1:]))
    passed = bool(slopes) and decreasing and slopes[-1] <= -n0
    return DecayReport(
        tuple(ladder), tuple(values), tuple(errors), tuple(slopes), n0, passed, noise_floor
    )
