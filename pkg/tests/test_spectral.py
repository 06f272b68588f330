"""Joint spectral radius bounds, polytope certificates, p-radii."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

import refreg as rr
import refreg.spectral as sp

GOLDEN = (1 + math.sqrt(5)) / 2


def test_spectral_radius_exact_values():
    assert rr.spectral_radius(np.array([[0.0, 1.0], [1.0, 0.0]])) == 1.0
    assert rr.spectral_radius(np.array([[2.0]])) == 2.0


def test_jsr_bounds_singleton_closes():
    res = rr.jsr_bounds([[[Fraction(1, 2)]]], max_len=3)
    assert res.lower == res.upper == 0.5
    assert res.certified
    assert res.method == "bounds"


def test_jsr_bounds_pair_brackets_golden_ratio():
    b0 = [[Fraction(1), Fraction(1)], [Fraction(0), Fraction(1)]]
    b1 = [[Fraction(1), Fraction(0)], [Fraction(1), Fraction(1)]]
    res = rr.jsr_bounds([b0, b1], max_len=4)
    assert abs(res.lower - GOLDEN) <= 1e-9
    assert res.upper >= GOLDEN - 1e-12
    assert res.smp_word is not None


def test_invariant_polytope_diagonal_singleton():
    res = rr.invariant_polytope([[[Fraction(1, 2), Fraction(0)],
                                  [Fraction(0), Fraction(1, 3)]]])
    assert res.certified
    assert res.lower == res.upper == 0.5
    assert res.polytope_vertices == 2


def test_p_radius_even_scalar_families():
    res = rr.p_radius_even([[[Fraction(1)]], [[Fraction(0)]]], 2, m_count=2)
    assert abs(res.value - 2 ** -0.5) <= 1e-12
    assert res.method == "EvenLift"
    single = rr.p_radius_even([[[Fraction(1, 2)]]], 2, m_count=1)
    assert abs(single.value - 0.5) <= 1e-12


def test_p_radius_even_rejects_odd_p():
    with pytest.raises(Exception):
        rr.p_radius_even([[[Fraction(1, 2)]]], 3, m_count=1)


def test_p_radius_one_sign_normalization():
    res = rr.p_radius_one_nonneg([[[Fraction(-1, 2)]], [[Fraction(1, 2)]]])
    assert res.method == "PerronMean"
    assert abs(res.value - 0.5) <= 1e-12
    assert "diagonal signs" in res.notes


def test_p_radius_bounds_scalar_family():
    res = rr.p_radius_bounds(
        [[[Fraction(1, 2)]], [[Fraction(1, 2)]]], 3, max_len=3, m_count=2
    )
    assert res.lower <= 0.5 + 1e-12
    assert res.upper >= 0.5 - 1e-12
    assert res.upper - res.lower <= 1e-9


def test_symmetric_lift_values():
    lift = sp.symmetric_lift(np.array([[0.0, 1.0], [1.0, 0.0]]), 2)
    assert lift.shape == (3, 3)
    assert np.allclose(lift, np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]]))
    scalar = sp.symmetric_lift(np.array([[2.0]]), 2)
    assert np.allclose(scalar, np.array([[4.0]]))


def test_resonance_degrees():
    jordan = sp.resonance_degree_matrix(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert jordan.value_or_bound == 1
    assert jordan.exact
    assert jordan.method == "JordanSingle"
    diagonal = sp.resonance_degree_matrix(np.diag([1.0, 0.5]))
    assert diagonal.value_or_bound == 0
    assert diagonal.exact
