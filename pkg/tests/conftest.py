"""Shared fixtures: the worked example families used across the test suite.

Everything expensive (index-set computation, transition assembly) is
session-scoped so acceptance, module, and CLI tests share one build.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace

import pytest

import refreg as rr

DATA_DIR = Path(__file__).parent / "data"
CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def build_family(rows, digits, coefficients):
    """Validate, assemble T-matrices, bundle the pieces for tests."""
    dil = rr.validate_dilation(rows)
    digs = rr.verify_digit_set(dil, digits)
    mask = rr.make_mask(dil, coefficients)
    omega = rr.compute_omega(mask, digs)
    fam = rr.build_transition(mask, digs, omega)
    return SimpleNamespace(dil=dil, digits=digs, mask=mask, omega=omega, fam=fam)


def extend_family(ns):
    """Attach the thickened index set and its transition family."""
    split = rr.spectral_split(ns.dil)
    simplex = rr.make_admissible_simplex(split, ns.dil)
    omega_tilde = rr.compute_omega_tilde(ns.mask, ns.digits, simplex)
    fam_tilde = rr.build_transition(ns.mask, ns.digits, omega_tilde)
    ns.split = split
    ns.simplex = simplex
    ns.omega_tilde = omega_tilde
    ns.fam_tilde = fam_tilde
    return ns


@pytest.fixture(scope="session")
def aniso():
    """Planar family with dilation [[2,1],[1,-1]] and a 13-point index set."""
    ns = build_family(
        [[2, 1], [1, -1]],
        [(0, 0), (1, 0), (2, 0)],
        {
            (0, 0): Fraction(1, 2),
            (1, -1): Fraction(1, 2),
            (1, 0): Fraction(1),
            (2, 0): Fraction(1, 4),
            (1, 1): Fraction(3, 4),
        },
    )
    ns.split = rr.spectral_split(ns.dil)
    return ns


@pytest.fixture(scope="session")
def aniso_tilde(aniso):
    """Same family with the thickened index set attached (slow: ~7 s)."""
    if not hasattr(aniso, "fam_tilde"):
        extend_family(aniso)
    return aniso


@pytest.fixture(scope="session")
def reference13(aniso):
    """The published 13x13 family: matrices loaded verbatim from JSON.

    The stored matrices use the publication's ordering of the index set,
    which differs from compute_omega's ordering (same 13 points).  The
    bundle therefore carries its own OmegaSet in the stored order plus
    the permutation mapping stored positions to computed positions.
    """
    blob = json.loads((DATA_DIR / "reference_13x13.json").read_text())
    order = [tuple(k) for k in blob["omega_order"]]
    mats = tuple(
        [[Fraction(x, 4) for x in row] for row in mat]
        for mat in blob["reference_numerators_over_4"]
    )
    v0 = tuple(Fraction(x, 5) for x in blob["v0_numerators_over_5"])
    omega = rr.OmegaSet(
        members=tuple(order),
        flags=tuple("reference" for _ in order),
        certified=True,
    )
    fam = rr.TransitionFamily(
        mask=aniso.mask,
        digits=aniso.digits,
        omega=omega,
        matrices=mats,
        column_stochastic=True,
    )
    perm = [aniso.omega.members.index(k) for k in order]
    return SimpleNamespace(
        order=order, matrices=mats, v0=v0, omega=omega, fam=fam, perm=perm,
        dil=aniso.dil, digits=aniso.digits, mask=aniso.mask, split=aniso.split,
    )


@pytest.fixture(scope="session")
def hat():
    """Piecewise-linear hat: M = 2, coefficients 1/2, 1, 1/2."""
    ns = build_family(
        [[2]], [(0,), (1,)],
        {(0,): Fraction(1, 2), (1,): Fraction(1), (2,): Fraction(1, 2)},
    )
    return extend_family(ns)


@pytest.fixture(scope="session")
def haar():
    """Indicator of [0,1): M = 2, coefficients 1, 1."""
    ns = build_family([[2]], [(0,), (1,)], {(0,): Fraction(1), (1,): Fraction(1)})
    return extend_family(ns)


@pytest.fixture(scope="session")
def bspline2():
    """Quadratic B-spline: M = 2, coefficients (1, 3, 3, 1)/4."""
    ns = build_family(
        [[2]], [(0,), (1,)],
        {(0,): Fraction(1, 4), (1,): Fraction(3, 4),
         (2,): Fraction(3, 4), (3,): Fraction(1, 4)},
    )
    ns.split = rr.spectral_split(ns.dil)
    return ns


@pytest.fixture(scope="session")
def threedigit():
    """M = 3 with coefficients c_0 = c_1 = c_5 = 1 (an L_1 example)."""
    ns = build_family(
        [[3]], [(0,), (1,), (2,)],
        {(0,): Fraction(1), (1,): Fraction(1), (5,): Fraction(1)},
    )
    ns.split = rr.spectral_split(ns.dil)
    return ns


@pytest.fixture(scope="session")
def aniso_config_path():
    return CONFIG_DIR / "anisotropic2d.cfg"


@pytest.fixture(scope="session")
def config_paths():
    return {
        "aniso": CONFIG_DIR / "anisotropic2d.cfg",
        "hat": CONFIG_DIR / "hat.cfg",
        "haar": CONFIG_DIR / "haar.cfg",
        "bspline2": CONFIG_DIR / "bspline2.cfg",
        "threedigit": CONFIG_DIR / "threedigit.cfg",
    }
