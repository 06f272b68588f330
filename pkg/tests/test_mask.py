"""Mask validation, sum rules, index-set computation, probe simplexes."""
from __future__ import annotations

from fractions import Fraction

import pytest

import refreg as rr
import refreg.mask as mk


def _dil2():
    return rr.validate_dilation([[2]])


def test_make_mask_requires_exact_coefficient_total():
    with pytest.raises(mk.MaskError):
        rr.make_mask(_dil2(), {(0,): Fraction(1), (1,): Fraction(1, 2)})


def test_check_sum_rules_hat_and_violator(hat):
    sums = rr.check_sum_rules(hat.mask, hat.digits)
    assert all(v == 1 for v in sums.values())
    rr.require_sum_rules(hat.mask, hat.digits)

    bad = rr.make_mask(_dil2(), {(0,): Fraction(3, 2), (1,): Fraction(1, 2)})
    digits = rr.verify_digit_set(_dil2(), [(0,), (1,)])
    sums = rr.check_sum_rules(bad, digits)
    assert sums[(0,)] == Fraction(3, 2)
    assert sums[(1,)] == Fraction(1, 2)
    with pytest.raises(rr.SumRuleError):
        rr.require_sum_rules(bad, digits)


def test_compute_omega_univariate(hat, haar, bspline2):
    assert hat.omega.members == ((0,), (1,))
    assert hat.omega.certified
    assert hat.omega.flags == ("cover", "cover")
    assert haar.omega.members == ((0,),)
    assert set(bspline2.omega.members) == {(0,), (1,), (2,)}


def test_compute_omega_planar(aniso, reference13):
    assert aniso.omega.size == 13
    assert aniso.omega.certified
    assert set(aniso.omega.members) == set(reference13.order)


def test_admissible_simplex_planar(aniso):
    simplex = rr.make_admissible_simplex(aniso.split, aniso.dil)
    assert len(simplex.vertices) == aniso.dil.dim + 1
    assert simplex.margin > 0
    assert simplex.grid_power >= 0
    assert len(simplex.witnesses) == aniso.split.q
    for vertex in simplex.vertices:
        assert all(isinstance(c, Fraction) for c in vertex)


def test_omega_tilde_univariate(hat, haar):
    assert hat.omega_tilde.members == ((0,), (1,), (2,))
    assert haar.omega_tilde.members == ((0,), (1,))
    assert hat.omega_tilde.certified
    assert haar.omega_tilde.certified


def test_omega_tilde_planar_equals_omega(aniso_tilde):
    assert set(aniso_tilde.omega_tilde.members) == set(aniso_tilde.omega.members)
    assert aniso_tilde.omega_tilde.certified
