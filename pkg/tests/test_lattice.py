"""Dilation validation, digit sets, spectral splitting, tile membership."""
from __future__ import annotations

import math
from fractions import Fraction

import pytest

import refreg as rr
import refreg.lattice as lat
import refreg.ratlinalg as rla


def test_planar_dilation_fields():
    dil = rr.validate_dilation([[2, 1], [1, -1]])
    assert dil.dim == 2
    assert dil.det == -3
    assert dil.m == 3
    prod = rla.matmul(dil.inverse, [[Fraction(2), Fraction(1)],
                                    [Fraction(1), Fraction(-1)]])
    assert prod == rla.identity(2)


def test_validate_dilation_rejects_bad_matrices():
    with pytest.raises(lat.NotSquareError):
        rr.validate_dilation([[1, 2]])
    with pytest.raises(lat.NotIntegerError):
        rr.validate_dilation([[1.5]])
    with pytest.raises(lat.DeterminantTooSmallError):
        rr.validate_dilation([[1]])
    with pytest.raises(lat.DeterminantTooSmallError):
        rr.validate_dilation([[0, 1], [1, 0]])
    with pytest.raises(lat.NotExpansiveError):
        rr.validate_dilation([[2, 0], [0, 1]])


def test_standard_digits():
    assert rr.standard_digits(rr.validate_dilation([[2]])).digits == ((0,), (1,))
    assert rr.standard_digits(rr.validate_dilation([[3]])).digits == \
        ((0,), (1,), (2,))
    planar = rr.standard_digits(rr.validate_dilation([[2, 1], [1, -1]]))
    assert planar.count == 3


def test_verify_digit_set_rejects_bad_sets():
    dil = rr.validate_dilation([[2]])
    with pytest.raises(lat.BadDigitSetError):
        rr.verify_digit_set(dil, [(0,), (2,)])  # same residue class
    with pytest.raises(lat.BadDigitSetError):
        rr.verify_digit_set(dil, [(0,)])        # wrong count


def test_residue_digit_decomposition():
    dil = rr.validate_dilation([[2]])
    digits = rr.verify_digit_set(dil, [(0,), (1,)])
    digit, quotient = lat.residue_digit(dil, digits, (5,))
    assert digit == (1,)
    assert quotient == [Fraction(2)]


def test_spectral_split_planar():
    dil = rr.validate_dilation([[2, 1], [1, -1]])
    split = rr.spectral_split(dil)
    assert split.q == 2
    assert split.dims == [1, 1]
    root13 = math.sqrt(13)
    assert abs(split.moduli[0] - (root13 - 1) / 2) <= 1e-12
    assert abs(split.moduli[1] - (root13 + 1) / 2) <= 1e-12
    assert abs(split.spectral_radius - 2.3027756377319943) <= 1e-12


def test_spectral_split_isotropic():
    split = rr.spectral_split(rr.validate_dilation([[2]]))
    assert split.q == 1
    assert split.moduli == [2.0]


def test_sqrt_bounds_bracket():
    for q in (Fraction(2), Fraction(3, 7), Fraction(169)):
        lo = lat.sqrt_lower(q)
        hi = lat.sqrt_upper(q)
        assert lo * lo <= q <= hi * hi
        assert hi - lo <= Fraction(1, 10**9)


def test_point_in_attractor_dyadic_interval():
    dil = rr.validate_dilation([[2]])
    digits = rr.verify_digit_set(dil, [(0,), (1,)])
    geo = lat.IfsGeometry(dil, tuple((Fraction(d[0]),) for d in digits.digits))
    inside = [(Fraction(1, 3),), (Fraction(0),), (Fraction(1),)]
    outside = [(Fraction(3),), (Fraction(-1, 2),)]
    for pt in inside:
        assert rr.point_in_attractor(geo, pt) == lat.IntersectKind.INTERSECTING
    for pt in outside:
        assert rr.point_in_attractor(geo, pt) == lat.IntersectKind.DISJOINT


def test_attractor_membership_matches_single_point_queries():
    dil = rr.validate_dilation([[2]])
    digits = rr.verify_digit_set(dil, [(0,), (1,)])
    geo = lat.IfsGeometry(dil, tuple((Fraction(d[0]),) for d in digits.digits))
    den = 12
    query = lat.attractor_membership(geo, den)
    for num in range(-6, 20):
        got = query((num,))
        want = rr.point_in_attractor(geo, (Fraction(num, den),))
        assert got == want, (num, den)
