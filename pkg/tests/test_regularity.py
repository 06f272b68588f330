"""Global/local Hölder exponents, L_p membership, C¹ analysis."""
from __future__ import annotations

import math
from fractions import Fraction

import pytest

import refreg as rr

ROOT13 = math.sqrt(13)
RHO_M = (1 + ROOT13) / 2


def test_hat_global_exponent(hat):
    rep = rr.holder_C(hat.fam)
    assert abs(rep.alpha_lower - 1.0) <= 1e-12
    assert abs(rep.alpha_upper - 1.0) <= 1e-12
    assert rep.verdict == "continuous"
    assert rep.special_case == "Isotropic"
    assert abs(rep.radius_lower - 0.5) <= 1e-14
    assert abs(rep.radius_upper - 0.5) <= 1e-14
    assert rep.member is True
    assert rep.boundary is not None and rep.boundary.status == "Passed"


def test_hat_modulus_is_lipschitz(hat):
    rep = rr.holder_C(hat.fam)
    mod = rr.modulus_report(hat.fam, report=rep)
    assert mod.sharp == "Yes"
    assert mod.lipschitz
    assert mod.log_exponent == 0.0


def test_hat_local_exponents(hat):
    at_zero = rr.local_exponent(hat.fam, tail=(0,))
    assert at_zero.point == (Fraction(0),)
    assert abs(at_zero.alpha - 1.0) <= 1e-12
    assert at_zero.on_seam is True
    assert at_zero.equality_certified

    at_third = rr.local_exponent(hat.fam, tail=(0, 1))
    assert at_third.point == (Fraction(1, 3),)
    assert abs(at_third.alpha - 1.0) <= 1e-12
    assert at_third.on_seam is False
    assert at_third.in_tile == "yes"
    assert at_third.equality_certified


def test_hat_not_c1(hat):
    rep = rr.holder_C(hat.fam)
    der = rr.derivative_analysis(hat.fam, holder=rep)
    assert der.verdict == "not C¹"
    direction = der.directions[0]
    assert direction.reciprocal_is_eigenvalue
    assert direction.subspace_dim == 0
    assert direction.passes is False


def test_haar_discontinuous(haar):
    rep = rr.holder_C(haar.fam)
    assert rep.verdict == "discontinuous on R^s"
    assert rep.radius_upper == 0.0
    assert math.isinf(rep.alpha_upper)
    der = rr.derivative_analysis(haar.fam, holder=rep)
    assert der.verdict == "not C¹"


def test_haar_is_in_l2(haar):
    res = rr.exists_Lp(haar.fam, 2)
    assert res.member is True
    assert res.subspace_dim == 0


def test_bspline_is_c1(bspline2):
    rep = rr.holder_C(bspline2.fam)
    assert abs(rep.alpha_lower - 1.0) <= 1e-12
    assert abs(rep.alpha_upper - 1.0) <= 1e-12
    assert rep.verdict == "continuous"
    der = rr.derivative_analysis(bspline2.fam, holder=rep)
    assert der.verdict == "C¹"
    direction = der.directions[0]
    assert direction.subspace_dim == 1
    assert abs(direction.derivative_alpha_lower - 1.0) <= 1e-12
    assert abs(direction.derivative_alpha_upper - 1.0) <= 1e-12


def test_planar_global_exponent(aniso):
    rep = rr.holder_C(aniso.fam, split=aniso.split)
    rho = 0.9514291726193389
    assert rep.special_case == "Irreducible"
    assert abs(rep.radius_lower - rho) <= 1e-10
    assert abs(rep.radius_upper - rho) <= 1e-10
    want_alpha = -math.log(rho) / math.log(RHO_M)
    assert abs(rep.alpha_lower - want_alpha) <= 1e-9
    assert rep.verdict == "continuous"
    assert abs(rep.spectral_radius_m - RHO_M) <= 1e-12

    assert len(rep.blocks) == 2
    small, large = rep.blocks
    assert abs(small.modulus - (ROOT13 - 1) / 2) <= 1e-9
    assert abs(large.modulus - RHO_M) <= 1e-9
    assert large.alpha_lower < small.alpha_lower
    assert abs(small.alpha_lower - 0.188244157275) <= 1e-9
    assert abs(large.alpha_lower - 0.0596920340957) <= 1e-9

    mod = rr.modulus_report(aniso.fam, report=rep)
    assert mod.sharp == "Yes"
    assert mod.log_exponent == 0.0
    assert mod.attaining == [1]
    assert not mod.lipschitz


def test_planar_l2_membership_and_exponent(aniso_tilde):
    res = rr.exists_Lp(aniso_tilde.fam, 2)
    assert res.member is True
    assert res.subspace_dim == 12
    assert abs(res.radius.value - 0.7991050267704445) <= 1e-10

    lp = rr.holder_Lp(aniso_tilde.fam_tilde, 2, split=aniso_tilde.split)
    assert lp.member is True
    assert abs(lp.alpha_lower - 0.268863216496) <= 1e-9


def test_planar_local_exponent_at_origin(aniso):
    loc = rr.local_exponent(aniso.fam, tail=(0,), split=aniso.split)
    assert abs(loc.alpha - 0.25242506533) <= 1e-9
    assert loc.on_seam is True
    assert loc.in_tile == "yes"


def test_planar_not_c1(aniso):
    rep = rr.holder_C(aniso.fam, split=aniso.split)
    der = rr.derivative_analysis(aniso.fam, split=aniso.split, holder=rep)
    assert der.verdict == "not C¹"
