"""Transition-matrix assembly, special vectors, invariant subspaces."""
from __future__ import annotations

from fractions import Fraction

import pytest

import refreg as rr
import refreg.ratlinalg as rla
import refreg.transition as tr


def test_hat_matrices_exact(hat):
    t0 = hat.fam.matrix((0,))
    t1 = hat.fam.matrix((1,))
    assert t0 == [[Fraction(1, 2), Fraction(0)], [Fraction(1, 2), Fraction(1)]]
    assert t1 == [[Fraction(1), Fraction(1, 2)], [Fraction(0), Fraction(1, 2)]]
    assert hat.fam.column_stochastic


def test_column_stochastic_false_without_sum_rules():
    dil = rr.validate_dilation([[2]])
    digits = rr.verify_digit_set(dil, [(0,), (1,)])
    mask = rr.make_mask(dil, {(0,): Fraction(3, 2), (1,): Fraction(1, 2)})
    omega = rr.compute_omega(mask, digits)
    fam = rr.build_transition(mask, digits, omega)
    assert not fam.column_stochastic


def test_origin_eigenvector_hat(hat):
    res = rr.origin_eigenvector(hat.fam)
    assert res.status == "Unique"
    assert res.vector == [Fraction(0), Fraction(1)]
    assert sum(res.vector) == 1


def test_mean_eigenvector_hat(hat):
    res = rr.mean_eigenvector(hat.fam)
    assert res.vector == [Fraction(1, 2), Fraction(1, 2)]


def test_special_vectors_hat(hat):
    sv = tr.special_vectors(hat.fam)
    assert sv.v0_exists and sv.z_exists
    assert sum(sv.v0.vector) == 1
    assert sum(sv.z.vector) == 1


def test_mean_matrix_hat(hat):
    mean = hat.fam.mean_matrix()
    assert mean == [[Fraction(3, 4), Fraction(1, 4)],
                    [Fraction(1, 4), Fraction(3, 4)]]


def test_difference_subspace_and_restriction_hat(hat):
    v0 = rr.origin_eigenvector(hat.fam).vector
    sub = rr.difference_subspace(hat.fam, v0)
    assert sub.dim == 1
    (basis,) = sub.columns
    assert basis in ((Fraction(1), Fraction(-1)), (Fraction(-1), Fraction(1)))
    rf = rr.restrict(hat.fam, sub)
    assert rf.matrices == ([[Fraction(1, 2)]], [[Fraction(1, 2)]])


def test_difference_subspace_haar_is_zero(haar):
    v0 = rr.origin_eigenvector(haar.fam).vector
    sub = rr.difference_subspace(haar.fam, v0)
    assert sub.dim == 0


def test_restrict_rejects_noninvariant_subspace(hat):
    sub = rr.make_subspace(2, [[Fraction(1), Fraction(0)]], label="e1")
    with pytest.raises(tr.NotInvariantError):
        rr.restrict(hat.fam, sub)


def test_sum_zero_subspace_basis():
    sub = tr.sum_zero_subspace(3)
    assert sub.dim == 2
    for col in sub.columns:
        assert sum(col) == 0


def test_conditioned_subspace_preserves_span(aniso):
    v0 = rr.origin_eigenvector(aniso.fam).vector
    sub = rr.difference_subspace(aniso.fam, v0)
    conditioned = rr.conditioned_subspace(sub)
    assert conditioned.dim == sub.dim == 12
    assert rla.span_equal([list(c) for c in sub.columns],
                          [list(c) for c in conditioned.columns])


def test_irreducibility_hat_restriction(hat):
    v0 = rr.origin_eigenvector(hat.fam).vector
    rf = rr.restrict(hat.fam, rr.difference_subspace(hat.fam, v0))
    res = rr.irreducibility_test(rf)
    assert res.kind == "Irreducible"
    assert res.certified


def test_irreducibility_planar_restriction(aniso):
    v0 = rr.origin_eigenvector(aniso.fam).vector
    sub = rr.conditioned_subspace(rr.difference_subspace(aniso.fam, v0))
    rf = rr.restrict(aniso.fam, sub)
    res = rr.irreducibility_test(rf)
    assert res.kind == "Irreducible"


def test_planar_v0_and_dim_u(aniso):
    res = rr.origin_eigenvector(aniso.fam)
    assert res.status == "Unique"
    assert sum(res.vector) == 1
    assert rr.difference_subspace(aniso.fam, res.vector).dim == 12
    assert aniso.fam.column_stochastic
    assert aniso.fam.size == 13
