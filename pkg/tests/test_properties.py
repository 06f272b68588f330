"""Randomized invariants: nine suites, each over at least 100 cases.

Dimensions stay at or below 4 and family sizes at or below 3 so the
whole file runs in well under two minutes.
"""
from __future__ import annotations

import math
from fractions import Fraction

from hypothesis import HealthCheck, assume, given, settings, strategies as st

import refreg as rr
import refreg.ratlinalg as rla
import refreg.transition as tr

COMMON = settings(
    max_examples=100,
    deadline=None,
    suppress_health_check=[
        HealthCheck.too_slow,
        HealthCheck.filter_too_much,
        HealthCheck.data_too_large,
    ],
)

small_fractions = st.builds(
    Fraction, st.integers(-4, 4), st.integers(1, 3)
)


@st.composite
def matrix_families(draw, max_dim=4, max_count=3):
    n = draw(st.integers(1, max_dim))
    count = draw(st.integers(1, max_count))
    fam = [
        [[draw(small_fractions) for _ in range(n)] for _ in range(n)]
        for _ in range(count)
    ]
    return fam


@st.composite
def sum_rule_masks(draw):
    """Univariate masks built residue-by-residue so the sum rules hold."""
    m = draw(st.integers(2, 3))
    entries: dict[tuple[int, ...], Fraction] = {}
    for r in range(m):
        ks = draw(st.lists(st.integers(0, 2), min_size=1, max_size=3,
                           unique=True))
        weights = [draw(st.integers(1, 4)) for _ in ks]
        total = sum(weights)
        for k, w in zip(ks, weights):
            entries[(m * k + r,)] = Fraction(w, total)
    return m, entries


@st.composite
def plain_masks(draw):
    """Univariate masks with the correct total but no sum rules."""
    m = draw(st.integers(2, 3))
    ks = draw(st.lists(st.integers(0, 4), min_size=2, max_size=4,
                       unique=True))
    weights = [draw(st.integers(1, 4)) for _ in ks]
    total = sum(weights)
    entries = {(k,): Fraction(m * w, total) for k, w in zip(ks, weights)}
    return m, entries


def _build_1d(m, entries):
    dil = rr.validate_dilation([[m]])
    digits = rr.standard_digits(dil)
    mask = rr.make_mask(dil, entries)
    omega = rr.compute_omega(mask, digits)
    return rr.build_transition(mask, digits, omega)


# 1 ------------------------------------------------------------------------
@COMMON
@given(mask_data=sum_rule_masks())
def test_columns_sum_to_one_under_sum_rules(mask_data):
    m, entries = mask_data
    fam = _build_1d(m, entries)
    assert fam.column_stochastic
    for t in fam.matrices:
        for b in range(fam.size):
            assert sum(t[a][b] for a in range(fam.size)) == 1


# 2 ------------------------------------------------------------------------
@COMMON
@given(fam=matrix_families(), data=st.data())
def test_invariant_growth_is_order_independent(fam, data):
    n = len(fam[0])
    seed_count = data.draw(st.integers(1, 2))
    seeds = [
        [data.draw(small_fractions) for _ in range(n)]
        for _ in range(seed_count)
    ]
    order = data.draw(st.permutations(range(len(fam))))
    sb1, _ = tr._grow_invariant(fam, seeds, n)
    sb2, _ = tr._grow_invariant([fam[i] for i in order],
                                list(reversed(seeds)), n)
    assert sb1.dim == sb2.dim
    assert rla.span_equal([list(r) for r in sb1.rows],
                          [list(r) for r in sb2.rows])


# 3 ------------------------------------------------------------------------
@COMMON
@given(
    fam=matrix_families(max_dim=3),
    c=st.sampled_from([Fraction(2), Fraction(1, 2), Fraction(-3),
                       Fraction(3, 2)]),
    data=st.data(),
)
def test_jsr_bounds_scale_and_similarity(fam, c, data):
    n = len(fam[0])
    base = rr.jsr_bounds(fam, max_len=3)

    scaled = rr.jsr_bounds([rla.mat_scale(a, c) for a in fam], max_len=3)
    f = abs(float(c))
    assert math.isclose(scaled.lower, f * base.lower,
                        rel_tol=1e-8, abs_tol=1e-10)
    assert math.isclose(scaled.upper, f * base.upper,
                        rel_tol=1e-8, abs_tol=1e-10)

    s = [[Fraction(data.draw(st.integers(-2, 2))) for _ in range(n)]
         for _ in range(n)]
    for i in range(n):
        s[i][i] += 3
    assume(rla.det(s) != 0)
    s_inv = rla.inverse(s)
    sim = rr.jsr_bounds(
        [rla.matmul(rla.matmul(s_inv, a), s) for a in fam], max_len=3
    )
    # The product-spectral-radius lower bound is similarity invariant;
    # the norm-based upper bound is not, so only interval overlap holds.
    assert math.isclose(sim.lower, base.lower, rel_tol=1e-7, abs_tol=1e-9)
    assert sim.lower <= base.upper + 1e-9
    assert base.lower <= sim.upper + 1e-9


# 4 ------------------------------------------------------------------------
@COMMON
@given(fam=matrix_families())
def test_jsr_bounds_are_ordered_and_tighten(fam):
    results = [rr.jsr_bounds(fam, max_len=k) for k in (1, 2, 3, 4)]
    for res in results:
        assert res.lower <= res.upper + 1e-9
    for prev, cur in zip(results, results[1:]):
        assert cur.lower >= prev.lower - 1e-9
        assert cur.upper <= prev.upper + 1e-9


# 5 ------------------------------------------------------------------------
@COMMON
@given(fam=matrix_families(max_dim=3))
def test_p_radius_monotone_in_p_and_below_jsr(fam):
    count = len(fam)
    results = [
        rr.p_radius_bounds(fam, p, max_len=3, m_count=count)
        for p in (1, 2, 4)
    ]
    jsr = rr.jsr_bounds(fam, max_len=3)
    for res in results:
        assert res.lower <= res.upper + 1e-9
        assert res.lower <= jsr.upper + 1e-9
    for low, high in ((0, 1), (0, 2), (1, 2)):
        assert results[low].lower <= results[high].upper + 1e-9


# 6 ------------------------------------------------------------------------
@COMMON
@given(fam=matrix_families(max_dim=3))
def test_even_lift_value_inside_generic_bounds(fam):
    count = len(fam)
    exact = rr.p_radius_even(fam, 2, m_count=count)
    bounds = rr.p_radius_bounds(fam, 2, max_len=3, m_count=count)
    assert exact.value is not None
    assert bounds.lower - 1e-8 <= exact.value <= bounds.upper + 1e-8


# 7 ------------------------------------------------------------------------
@COMMON
@given(mask_data=sum_rule_masks())
def test_partition_of_unity_in_evaluation_tables(mask_data):
    m, entries = mask_data
    fam = _build_1d(m, entries)
    seed = [Fraction(1, fam.size)] * fam.size
    table = rr.evaluate_v(fam, depth=2, seed=seed)
    assert len(table.entries) == m ** 2
    for entry in table.entries:
        assert sum(entry.vector) == 1


# 8 ------------------------------------------------------------------------
@COMMON
@given(mask_data=plain_masks(), data=st.data())
def test_subdivision_is_shift_equivariant(mask_data, data):
    m, entries = mask_data
    dil = rr.validate_dilation([[m]])
    mask = rr.make_mask(dil, entries)

    support = data.draw(st.lists(st.integers(-3, 3), min_size=1, max_size=4,
                                 unique=True))
    values = {(j,): data.draw(small_fractions) for j in support}
    shift = data.draw(st.integers(-2, 2))

    shifted_in = {(j + shift,): v for (j,), v in values.items()}
    left = rr.subdivide(mask, shifted_in, 1)
    right = rr.subdivide(mask, values, 1)
    right_shifted = {(i + m * shift,): v
                     for (i,), v in right.values.items() if v != 0}
    left_clean = {k: v for k, v in left.values.items() if v != 0}
    assert left_clean == right_shifted


# 9 ------------------------------------------------------------------------
@COMMON
@given(mask_data=sum_rule_masks())
def test_cell_means_average_to_parent_mean(mask_data):
    m, entries = mask_data
    fam = _build_1d(m, entries)
    z = [Fraction(1, fam.size)] * fam.size
    parents = rr.lp_mean_approximation(fam, 1, z=z)
    children = rr.lp_mean_approximation(fam, 2, z=z)
    child_by_address = {e.address: e.vector for e in children.entries}
    mean = fam.mean_matrix()
    for entry in parents.entries:
        acc = [Fraction(0)] * fam.size
        for d in range(m):
            child = child_by_address[(d,) + entry.address]
            acc = [a + x for a, x in zip(acc, child)]
        averaged = [a / m for a in acc]
        expected = rla.matvec(mean, list(entry.vector))
        assert averaged == expected
