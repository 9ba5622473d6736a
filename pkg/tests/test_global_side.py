# -*- coding: utf-8 -*-
import csv
import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from kernex.geometry import GroupElem, Mat2, VPoint, WPoint
from kernex.global_side import (
    GeomTerm,
    HeightWindow,
    LatticeTestFn,
    NotGaussianError,
    enumerate_W,
    enumerate_integral_W,
    geometric_side,
    geometric_terms,
    height,
    indicator,
    poisson_check,
    rationals,
    sigma1_structure_check,
    terms_to_csv,
    terms_to_json,
    theta_value,
    twisted_transform_check,
)

THETA = 1.0864348112133080


def w_of(b, x1, x2, x3, x4, t1, t2) -> WPoint:
    T = Mat2(*(Fraction(x) for x in (x1, x2, x3, x4)))
    return WPoint(Fraction(b), VPoint(T, Fraction(t1), Fraction(t2)))


def test_theta_value():
    assert theta_value() == pytest.approx(THETA, rel=1e-14)


def test_poisson_self_dual():
    report = poisson_check(LatticeTestFn.scaled_identity())
    assert report.lhs == pytest.approx(THETA**4, rel=1e-14)
    assert report.agrees()
    assert report.termwise_equal


def test_poisson_scaled():
    report = poisson_check(LatticeTestFn.scaled_identity(2.0))
    assert report.agrees(1e-12)
    assert not report.termwise_equal
    assert report.lhs < THETA**4 < report.rhs * 4


def test_poisson_random(rng):
    for _ in range(5):
        Psi = LatticeTestFn.random(rng)
        assert np.all(np.linalg.eigvalsh(Psi.matrix) >= 0.25 - 1e-12)
        report = poisson_check(Psi)
        assert report.agrees(1e-10), report


def test_lattice_test_fn_validation():
    with pytest.raises(NotGaussianError, match="4x4"):
        LatticeTestFn(((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(NotGaussianError, match="symmetric"):
        LatticeTestFn(((1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)))
    with pytest.raises(NotGaussianError, match="positive definite"):
        LatticeTestFn(((1, 0, 0, 0), (0, -1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)))
    with pytest.raises(NotGaussianError, match="Gaussian"):
        poisson_check(lambda x: x)


def test_lattice_fourier_at_zero():
    Psi = LatticeTestFn.scaled_identity(4.0)
    assert float(Psi.fourier(np.zeros(4))) == pytest.approx(1 / 16)
    assert float(Psi(np.zeros(4))) == 1.0


@pytest.mark.parametrize(
    "a, g1, g2",
    [
        (2.0, Mat2(1, 1, 0, 1), Mat2(2, 0, 0, 1)),
        (-0.5, Mat2(1, 0, 1, 1), Mat2.identity()),
        (1.5, Mat2(Fraction(1, 2), 1, -1, 3), Mat2(1, -1, 1, 1)),
    ],
)
def test_twisted_transform(a, g1, g2):
    points = [[0.0, 0.0, 0.0, 0.0], [0.3, -0.2, 0.1, 0.5], [1.0, 0.0, 0.0, -1.0]]
    report = twisted_transform_check(LatticeTestFn.scaled_identity(), a, g1, g2, points)
    det = float(g1.det() * g2.det())
    assert report.constant == pytest.approx(abs(a) ** -4 * abs(det) ** -2)
    assert report.max_error < 1e-9


def test_twisted_transform_rejects_zero():
    with pytest.raises(ValueError, match="nonzero"):
        twisted_transform_check(LatticeTestFn.scaled_identity(), 0, Mat2.identity(), Mat2.identity(), [])


def test_height_and_rationals():
    assert height(Fraction(-3, 2)) == 3
    assert height(0) == 1
    assert rationals(1) == [-1, 0, 1]
    assert len(rationals(2)) == 7
    assert Fraction(0) not in rationals(2, nonzero=True)


def test_height_window():
    assert HeightWindow(2, 3).doubled() == HeightWindow(4, 6)
    with pytest.raises(ValueError, match=">= 1"):
        HeightWindow(0, 1)


def test_enumerate_w():
    points = enumerate_W(HeightWindow(1, 1))
    assert points
    assert len(set(points)) == len(points)
    assert all(height(x) <= 1 for w in points for x in (w.b, *w.v.coords()))
    assert w_of(1, 1, 0, 0, 1, 1, 1) in points
    assert w_of(-1, 1, 0, 0, 1, 1, -1) in points


def test_enumerate_w_height_two_contains_halves():
    points = enumerate_W(HeightWindow(2, 1))
    assert w_of(Fraction(1, 2), 1, 0, 0, 1, 2, 1) in points
    assert all(height(x) <= 2 for w in points for x in (w.b, *w.v.coords()))


def test_enumerate_integral_w():
    points = enumerate_integral_W(HeightWindow(1, 1))
    assert w_of(1, 1, 0, 0, 1, 1, 1) in points
    assert all(abs(w.b) == 1 for w in points)
    assert all(Fraction(x).denominator == 1 and abs(x) <= 1 for w in points for x in w.v.coords())
    assert set(points) <= set(enumerate_W(HeightWindow(1, 1)))


def test_indicator():
    identity = GroupElem.identity(Fraction(1))
    assert indicator(identity, w_of(1, 1, 0, 0, 1, 1, 1))
    assert not indicator(identity, w_of(Fraction(1, 2), 1, 0, 0, 1, 2, 1))
    assert not indicator(identity, w_of(1, Fraction(1, 2), 0, 0, 2, 1, 1))
    g = GroupElem(Mat2.identity(Fraction(1)), Mat2.identity(Fraction(1)), Fraction(2), Fraction(1))
    # b -> b/2, t1 -> 2 t1
    assert indicator(g, w_of(2, 1, 0, 0, 2, Fraction(1, 2), 2))


def test_geometric_terms(standard_functions):
    f1, f2, V = standard_functions
    resolved = w_of(1, 1, 0, 0, 1, 1, 1)
    fast = w_of(1, 20, 0, 0, 20, 20, 20)
    outside = w_of(Fraction(1, 2), 1, 0, 0, 1, 2, 1)
    terms = geometric_terms(f1, f2, V, HeightWindow(1, 1), points=[resolved, fast, outside])
    assert [t.included for t in terms] == [True, True, False]
    good, refused, skipped = terms
    assert good.certified and math.isfinite(good.error)
    assert not refused.certified and refused.error == math.inf
    assert "nodes" in refused.reason
    assert skipped.reason == "indicator"


def test_geometric_side_trace(mocker):
    w = w_of(1, 1, 0, 0, 1, 1, 1)
    first = [GeomTerm(1, w, True, True, 1.0 + 0j, 0.01)]
    second = first + [
        GeomTerm(2, w, True, True, 0.001 + 0j, 0.001),
        GeomTerm(2, w, True, False, 0j, math.inf, "refused"),
        GeomTerm(2, w, False, reason="indicator"),
    ]
    mocker.patch("kernex.global_side.geometric_terms", side_effect=[first, second])
    side = geometric_side(None, None, None, windows=(HeightWindow(1, 1), HeightWindow(2, 2)))
    one, two = side.trace
    assert one.partial_sum == 1.0 and one.included == 1
    assert two.partial_sum == pytest.approx(1.002)
    assert two.error == pytest.approx(0.012)
    assert (two.included, two.uncertified) == (3, 1)
    assert side.value == two.partial_sum
    assert side.cauchy()
    assert side.terms == tuple(second)


def test_terms_csv_and_json():
    w = w_of(-1, 1, 0, 0, 1, 1, -1)
    terms = [GeomTerm(1, w, True, True, 0.5 - 0.25j, 1e-8), GeomTerm(2, w, False, reason="indicator")]
    rows = list(csv.DictReader(io.StringIO(terms_to_csv(terms))))
    assert len(rows) == 2
    assert rows[0]["alpha"] == "1,0,0,1,1,-1"
    assert rows[0]["b"] == "-1"
    assert float(rows[0]["value_im"]) == -0.25
    assert rows[1]["included"] == "False"
    data = json.loads(terms_to_json({"H": 1}, terms))
    assert data["config"] == {"H": 1}
    assert data["terms"][0]["c"] == 1
    assert terms_to_json({"H": 1}, terms) == terms_to_json({"H": 1}, terms)


def test_sigma1_structure():
    report = sigma1_structure_check(HeightWindow(2, 1), samples=30, seed=1)
    assert report.passed
    assert report.relevant_count == report.line_count > 0


@pytest.mark.integration
def test_geometric_side_converges(standard_functions):
    f1, f2, V = standard_functions
    window = HeightWindow(1, 1)
    side = geometric_side(f1, f2, V, windows=(window, window.doubled()))
    assert len(side.trace) == 2
    assert side.cauchy()
