# -*- coding: utf-8 -*-
from fractions import Fraction

import pytest

from kernex.expsum import (
    BudgetExceededError,
    PreconditionError,
    SumSpec,
    alpha_excess,
    critical_bound,
    critical_count,
    critical_locus,
    gaussian_sum,
    hensel_lift,
    normalized_gauss_sum,
    quadric_count,
    quadric_count_formula,
    ramanujan_closed,
    ramanujan_sum,
    stationary_phase_eval,
    twisted_closed_form,
    twisted_sum,
)
from kernex.geometry import AlphaPoint, VPoint
from kernex.ring import ResidueCtx


def alpha_of(*coords) -> AlphaPoint:
    return AlphaPoint.of(VPoint.from_coords([Fraction(c) for c in coords]))


@pytest.mark.parametrize(
    "p, n, m, b",
    [(2, 1, 0, 1), (2, 1, 1, 1), (2, 2, 1, 3), (2, 2, 2, 1), (3, 1, 1, 1), (3, 1, 1, 2)],
)
def test_gaussian_sum_exact(p, n, m, b):
    result = gaussian_sum(SumSpec(ResidueCtx(p, n), b, m))
    assert result.equals(Fraction(1, p ** (3 * m)))
    assert result.term_count == p ** (6 * n)
    assert result.value == pytest.approx(1 / p ** (3 * m), abs=1e-12)


def test_gaussian_sum_floating():
    result = gaussian_sum(SumSpec(ResidueCtx(3, 1), 1, 1), backend="floating")
    assert result.exact is None
    assert result.value == pytest.approx(1 / 27, abs=1e-12)
    with pytest.raises(PreconditionError):
        result.equals(Fraction(1, 27))


def test_gaussian_sum_partition_independent(monkeypatch):
    monkeypatch.setenv("KERNEX_BLOCK_SIZE", "1000")
    spec = SumSpec(ResidueCtx(2, 2), 1, 2)
    one = gaussian_sum(spec, parts=1)
    seven = gaussian_sum(spec, parts=7)
    assert one.exact.coefficients == seven.exact.coefficients
    assert one.same_as(seven)


def test_gaussian_sum_workers():
    spec = SumSpec(ResidueCtx(2, 1), 1, 1)
    assert gaussian_sum(spec, workers=2, parts=2).same_as(gaussian_sum(spec))


def test_budget(monkeypatch):
    monkeypatch.setenv("KERNEX_EXACT_BUDGET", "100")
    with pytest.raises(BudgetExceededError, match="exceed the exact budget 100"):
        gaussian_sum(SumSpec(ResidueCtx(2, 2), 1, 1))
    monkeypatch.setenv("KERNEX_FLOAT_BUDGET", "100")
    with pytest.raises(BudgetExceededError, match="floating"):
        gaussian_sum(SumSpec(ResidueCtx(2, 2), 1, 1), backend="floating")


def test_sum_spec_preconditions():
    with pytest.raises(PreconditionError, match="m <= n"):
        SumSpec(ResidueCtx(3, 1), 1, 2)
    with pytest.raises(PreconditionError, match="not a unit"):
        SumSpec(ResidueCtx(3, 1), 3, 1)
    with pytest.raises(PreconditionError, match="x=6"):
        SumSpec(ResidueCtx(3, 1), 1, 1, x=6)
    with pytest.raises(PreconditionError, match="unknown backend"):
        gaussian_sum(SumSpec(ResidueCtx(2, 1), 1, 1), backend="gpu")
    with pytest.raises(PreconditionError):
        twisted_sum(SumSpec(ResidueCtx(2, 1), 1, 1))


@pytest.mark.parametrize(
    "p, m, b, x, alpha",
    [
        (2, 1, 1, 1, (1, 0, 0, 1, 1, 0)),
        (2, 2, 3, 1, (1, 2, 3, 1, 1, 1)),
        (3, 1, 1, 2, (1, 2, 0, 1, 1, 2)),
        (3, 1, 2, 1, (0, 0, 0, 0, 1, 1)),
        (3, 1, 4, 5, (2, 1, 1, 0, 0, 2)),
    ],
)
def test_twisted_sum_closed_form(p, m, b, x, alpha):
    spec = SumSpec(ResidueCtx(p, m), b, m, alpha_of(*alpha), x)
    assert twisted_sum(spec).same_as(twisted_closed_form(spec))


def test_twisted_sum_non_integral_alpha():
    spec = SumSpec(ResidueCtx(2, 1), 1, 1, alpha_of(Fraction(1, 2), 0, 0, 0, 0, 0), 1)
    result = twisted_sum(spec)
    assert result.term_count == 4**6
    assert result.equals(0)
    assert twisted_closed_form(spec).value == 0


def test_twisted_closed_form_untwisted():
    closed = twisted_closed_form(SumSpec(ResidueCtx(3, 2), 1, 2))
    assert closed.equals(Fraction(1, 3**6))


@pytest.mark.parametrize("p, expected", [(2, 35), (3, 130), (5, 806)])
def test_quadric_count(p, expected):
    assert quadric_count(p) == expected == quadric_count_formula(p)


def test_quadric_count_twisted_b():
    assert quadric_count(3, b=2) == 130
    assert quadric_count(5, b=3) == 806


@pytest.mark.integration
def test_quadric_count_seven():
    assert quadric_count(7) == 2850


def test_quadric_count_rejects():
    with pytest.raises(PreconditionError, match="not prime"):
        quadric_count(4)
    with pytest.raises(PreconditionError, match="not a unit"):
        quadric_count(3, b=6)


@pytest.mark.parametrize("p, m, a", [(3, 2, 3), (3, 2, 0), (3, 2, 1), (2, 3, 4), (5, 1, 10), (5, 2, 7)])
def test_ramanujan_sum(p, m, a):
    expected = ramanujan_closed(p, m, a)
    assert ramanujan_sum(p, m, a) == expected
    assert ramanujan_sum(p, m, a, backend="floating") == pytest.approx(expected, abs=1e-9)


def test_critical_locus():
    locus = critical_locus(1, 3)
    assert locus == [VPoint.from_coords([0] * 6)]
    assert hensel_lift(1, locus[0], 3, 3) == VPoint.from_coords([0] * 6)


def test_normalized_gauss_sum():
    numerator, denominator = normalized_gauss_sum(1, 3)
    assert denominator == 27
    assert numerator.rational_value() == 27


@pytest.mark.parametrize("p, m", [(3, 2), (2, 2), (2, 3)])
def test_stationary_phase(p, m):
    spec = SumSpec(ResidueCtx(p, m), 1, m)
    stationary = stationary_phase_eval(spec)
    assert stationary.term_count == 1
    assert stationary.equals(Fraction(1, p ** (3 * m)))
    assert stationary.same_as(gaussian_sum(spec))


def test_stationary_phase_needs_m_two():
    with pytest.raises(PreconditionError, match="m >= 2"):
        stationary_phase_eval(SumSpec(ResidueCtx(3, 1), 1, 1))


def test_critical_count_bound():
    alpha = alpha_of(3, 3, 0, 0, 0, 3)
    count = critical_count(1, alpha, 1, 3, 1)
    assert count == 1
    assert count <= critical_bound(alpha, 3, 1) == 3**6
    unit = alpha_of(1, 0, 0, 0, 0, 0)
    assert critical_count(1, unit, 1, 3, 1) <= critical_bound(unit, 3, 1)


def test_alpha_excess():
    zero = VPoint.from_coords([Fraction(0)] * 6)
    assert alpha_excess(zero, 3) == 0
    assert alpha_excess(VPoint.from_coords([Fraction(1, 3), 0, 0, 9, 0, Fraction(1, 9)]), 3) == 2
    assert alpha_excess(VPoint.from_coords([Fraction(1, 2), 0, 0, 0, 0, 0]), 3) == 0
