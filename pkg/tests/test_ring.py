# -*- coding: utf-8 -*-
import cmath
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from kernex.ring import (
    CharacterError,
    CycloSum,
    InsufficientLevelError,
    NotAUnitError,
    PadicPhase,
    ResidueCtx,
    RingError,
    UnitChar,
    char_eval,
    is_integral,
    psi,
    psi_exact,
    reduce_mod,
    unit_part,
    valuation,
)

rationals = st.fractions(max_denominator=10**4).filter(lambda x: abs(x) < 10**6)
primes = st.sampled_from([2, 3, 5, 7])


@pytest.mark.parametrize(
    "x, p, expected",
    [
        (12, 2, 2),
        (Fraction(3, 8), 2, -3),
        (Fraction(18, 5), 3, 2),
        (Fraction(7, 45), 5, -1),
        (1, 7, 0),
        (0, 3, math.inf),
    ],
)
def test_valuation(x, p, expected):
    assert valuation(x, p) == expected


def test_unit_part():
    assert unit_part(Fraction(-24, 5), 2) == Fraction(-3, 5)
    with pytest.raises(NotAUnitError):
        unit_part(0, 2)


def test_reduce_mod():
    assert reduce_mod(Fraction(1, 2), 3, 2) == 5
    assert reduce_mod(-1, 5, 1) == 4
    assert reduce_mod(Fraction(7, 3), 2, 0) == 0
    with pytest.raises(RingError, match="not 3-integral"):
        reduce_mod(Fraction(1, 3), 3, 1)


def test_residue_ctx():
    with pytest.raises(RingError, match="not prime"):
        ResidueCtx(4, 1)
    ctx = ResidueCtx(5, 2)
    assert ctx.modulus == 25
    assert len(list(ctx.units())) == 20
    half = ctx(Fraction(1, 2))
    assert half * 2 == 1
    assert (half - half) == 0
    assert ctx(7) ** -1 * 7 == 1
    assert ctx(10).valuation() == 1
    with pytest.raises(NotAUnitError):
        ctx(15).inverse()
    with pytest.raises(RingError, match="context mismatch"):
        _ = ctx(1) + ResidueCtx(5, 1)(1)


def test_padic_phase_normalises():
    phase = PadicPhase(2, 4, 3)
    assert (phase.numerator, phase.m) == (1, 1)
    assert PadicPhase(3, 9, 2) == PadicPhase(3)
    assert (phase + phase) == PadicPhase(2)
    with pytest.raises(RingError):
        PadicPhase(3, 1, -1)


def test_padic_phase_from_fraction():
    phase = PadicPhase.from_fraction(3, Fraction(5, 18))
    assert phase.as_fraction() == Fraction(7, 9)
    assert PadicPhase.from_fraction(3, Fraction(5, 2)) == PadicPhase(3)
    assert PadicPhase.from_fraction(5, 0) == PadicPhase(5)


@given(p=primes, x=rationals)
def test_phase_differs_by_integral(p, x):
    phase = PadicPhase.from_fraction(p, x)
    assert is_integral(x - phase.as_fraction(), p)
    assert 0 <= phase.as_fraction() < 1


@given(p=primes, x=rationals, y=rationals)
def test_psi_is_additive(p, x, y):
    a, b = PadicPhase.from_fraction(p, x), PadicPhase.from_fraction(p, y)
    assert cmath.isclose(psi(a + b), psi(a) * psi(b), abs_tol=1e-9)
    assert a + b == PadicPhase.from_fraction(p, x + y)


def test_cyclo_sum_vanishing_sums():
    assert CycloSum(4, (1, 0, 1, 0)).is_zero()
    assert CycloSum(3, (1, 1, 1)).is_zero()
    assert CycloSum(6, (1,) * 6).is_zero()
    assert not CycloSum(4, (1, 1, 0, 0)).is_zero()
    assert CycloSum.zero(9).is_zero()


def test_cyclo_sum_canonical_equality():
    assert CycloSum(2, (0, 1)) == -1
    assert CycloSum(2, (0, 1)).lift(4) == CycloSum.basis(4, 2)
    assert CycloSum(3, (2, 1, 1)).rational_value() == 1
    assert CycloSum.basis(4, 1).rational_value() is None
    assert len(CycloSum(12, tuple(range(12))).canonical()) == sympy.totient(12)
    assert hash(CycloSum(3, (1, 1, 1))) == hash(CycloSum.zero(3))


def test_cyclo_sum_arithmetic():
    zeta3 = CycloSum.basis(3, 1)
    assert zeta3 * zeta3 * zeta3 == 1
    assert zeta3 + zeta3 * zeta3 == -1
    i = CycloSum.basis(4, 1)
    assert i * i == -1
    # mixed orders are lifted to the lcm
    assert (zeta3 * i).order == 12
    assert cmath.isclose(i.complexify(), 1j, abs_tol=1e-15)
    with pytest.raises(RingError):
        CycloSum(3, (1, 2))
    with pytest.raises(RingError):
        CycloSum.basis(4, 1).lift(6)


def test_psi_exact():
    ctx = ResidueCtx(3, 2)
    phase = PadicPhase(3, 1, 1)
    assert psi_exact(phase, ctx) == CycloSum.basis(9, 3)
    assert cmath.isclose(psi_exact(phase, ctx).complexify(), psi(phase), abs_tol=1e-12)
    with pytest.raises(InsufficientLevelError):
        psi_exact(PadicPhase(3, 1, 3), ctx)
    with pytest.raises(RingError, match="phase at 2"):
        psi_exact(PadicPhase(2, 1, 1), ctx)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_quadratic_is_legendre(p):
    chi = UnitChar.quadratic(p)
    for u in range(1, p):
        assert cmath.isclose(chi.ram_value(u), sympy.legendre_symbol(u, p), abs_tol=1e-12)
    assert chi.conductor == 1


def test_quadratic_at_two():
    chi = UnitChar.quadratic(2)
    assert chi.conductor == 3
    assert cmath.isclose(chi.ram_value(7), 1)
    assert cmath.isclose(chi.ram_value(3), -1)
    assert cmath.isclose(chi.ram_value(5), -1)


@pytest.mark.parametrize("exponent, conductor", [(1, 2), (2, 2), (3, 1), (0, 0)])
def test_conductor(exponent, conductor):
    assert UnitChar.ramified(3, 2, exponent).conductor == conductor


def test_is_trivial_on():
    cubic = UnitChar.ramified(3, 2, 3)
    assert cubic.is_trivial_on(1)
    assert not cubic.is_trivial_on(0)
    wild = UnitChar.ramified(3, 2, 1)
    assert not wild.is_trivial_on(1)
    assert wild.is_trivial_on(2)
    assert UnitChar.trivial(3).is_trivial_on(0)


def test_unit_char_kinds():
    assert UnitChar.trivial(5).kind == "unramified"
    assert UnitChar.ramified(5, 1, 0).is_unramified()
    assert UnitChar.ramified(5, 1, 1).kind == "ramified"
    assert cmath.isclose(char_eval(UnitChar.unramified(3, 1j), 2), -1)
    assert cmath.isclose(char_eval(UnitChar.quadratic(5, -1), 1, 2), 1)


def test_unit_char_errors():
    with pytest.raises(CharacterError, match="not prime"):
        UnitChar(6)
    with pytest.raises(CharacterError, match=r"\|z\| must be 1"):
        UnitChar.unramified(3, 2)
    with pytest.raises(NotAUnitError):
        char_eval(UnitChar.trivial(3), 0, 3)
    with pytest.raises(NotAUnitError):
        UnitChar.quadratic(5).exponent(10)


@given(u=st.integers(1, 200).filter(lambda n: n % 2), w=st.integers(1, 200).filter(lambda n: n % 2))
def test_two_adic_character_is_multiplicative(u, w):
    chi = UnitChar.ramified(2, 5, (1, 3))
    assert cmath.isclose(chi.ram_value(u * w), chi.ram_value(u) * chi.ram_value(w), abs_tol=1e-12)
