"""End-to-end acceptance checks, one test per headline claim.

Each test pins the published figures for a worked example at its stated
tolerance: the 13-translate planar family (index set, matrices, special
vector, joint-radius certificate, Hölder and L2 exponents), the two
small univariate examples, the classical B-spline verdicts, a binary
matrix pair with an exactly known joint spectral radius, the randomized
property suites, and byte-level determinism of the CLI report.

Two reference matrices disagree with the assembly rule in a handful of
entries (they are internally inconsistent with the stated mask); those
entrywise claims are marked xfail(strict=True) with the exact cell-level
discrepancies frozen as regression facts in the passing tests.
"""
from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import refreg as rr

from conftest import build_family

PKG_ROOT = Path(__file__).resolve().parents[1]
GOLDEN = (1 + math.sqrt(5)) / 2

# Cells where the stored digit-1 / digit-2 reference matrices differ from
# the assembly rule (row, column, assembled value, stored value), indices
# in the reference ordering of the index set.
KNOWN_DIGIT1_DIFFS = {
    (0, 6): (Fraction(0), Fraction(1, 2)),
    (1, 6): (Fraction(1, 4), Fraction(0)),
    (2, 6): (Fraction(0), Fraction(1, 2)),
    (5, 6): (Fraction(3, 4), Fraction(0)),
}
KNOWN_DIGIT2_DIFFS = {
    (0, 5): (Fraction(3, 4), Fraction(0)),
    (0, 6): (Fraction(1, 2), Fraction(1)),
    (2, 5): (Fraction(1, 4), Fraction(0)),
    (4, 6): (Fraction(1, 2), Fraction(0)),
    (10, 5): (Fraction(0), Fraction(1)),
}


def _permuted(fam, order):
    """Reindex computed matrices into the reference ordering."""
    perm = [fam.omega.members.index(k) for k in order]
    n = len(order)
    return [
        [[t[perm[a]][perm[b]] for b in range(n)] for a in range(n)]
        for t in fam.matrices
    ]


def test_planar13_index_set_matrices_and_special_vector(reference13):
    """13-point index set, digit-0 matrix, v0 and dim U, built in <60 s."""
    t0 = time.monotonic()
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
    assert ns.omega.size == 13
    assert ns.omega.certified
    assert set(ns.omega.members) == set(reference13.order)

    mine = _permuted(ns.fam, reference13.order)
    ref = reference13.matrices

    # Digit 0 agrees entry for entry.
    for a in range(13):
        for b in range(13):
            assert mine[0][a][b] == ref[0][a][b], (0, a, b)

    # Digits 1 and 2 agree except at the frozen discrepancy cells.
    for i, known in ((1, KNOWN_DIGIT1_DIFFS), (2, KNOWN_DIGIT2_DIFFS)):
        diffs = {
            (a, b): (mine[i][a][b], ref[i][a][b])
            for a in range(13)
            for b in range(13)
            if mine[i][a][b] != ref[i][a][b]
        }
        assert diffs == known, f"digit {i}: {diffs}"

    # v0 = (0,4,0,0,0,0,1,0,0,0,0,0,0)/5 exactly, in the reference order.
    v0res = rr.origin_eigenvector(ns.fam)
    assert v0res.status == "Unique"
    perm = [ns.omega.members.index(k) for k in reference13.order]
    v0_reordered = tuple(v0res.vector[perm[a]] for a in range(13))
    assert v0_reordered == reference13.v0
    assert sum(v0res.vector) == 1

    sub = rr.difference_subspace(ns.fam, v0res.vector)
    assert sub.dim == 12

    assert time.monotonic() - t0 < 60.0


@pytest.mark.xfail(
    strict=True,
    reason="stored digit-1/digit-2 matrices differ from the assembly rule "
    "in 4 and 5 entries; the exact cells are pinned in the passing test",
)
def test_planar13_all_matrices_entrywise(aniso, reference13):
    mine = _permuted(aniso.fam, reference13.order)
    for i in range(3):
        for a in range(13):
            for b in range(13):
                assert mine[i][a][b] == reference13.matrices[i][a][b], (i, a, b)


def test_planar13_joint_radius_certificate(reference13):
    """On U: the 7-letter word 0101002 gives 0.93816, and the polytope
    certifies that value to 1e-5 in <5 min."""
    t0 = time.monotonic()
    v0res = rr.origin_eigenvector(reference13.fam)
    sub = rr.conditioned_subspace(
        rr.difference_subspace(reference13.fam, v0res.vector)
    )
    assert sub.dim == 12
    rf = rr.restrict(reference13.fam, sub)

    word = (0, 1, 0, 1, 0, 0, 2)
    mats = rf.as_numpy()
    prod = np.eye(sub.dim)
    for i in word:
        prod = prod @ mats[i]
    lower = rr.spectral_radius(prod) ** (1.0 / len(word))
    assert abs(lower - 0.93816) <= 5e-5

    res = rr.invariant_polytope(rf.family(), candidate=list(word))
    assert res.certified
    assert res.upper - res.lower <= 1e-5
    assert abs(res.value - 0.93816) <= 5e-5
    assert abs(res.value - lower) <= 1e-5
    assert res.smp_word == word
    # Vertex count is reported, not asserted (434 in the reference run).
    assert isinstance(res.polytope_vertices, int) and res.polytope_vertices > 0

    assert time.monotonic() - t0 < 300.0


def test_planar13_published_exponents(reference13):
    """alpha_C, rho(M), rho_2 via the even lift, and alpha_{phi,2}, <2 min."""
    t0 = time.monotonic()
    rep = rr.holder_C(reference13.fam, split=reference13.split)
    assert rep.alpha_lower is not None and rep.alpha_upper is not None
    assert abs(rep.alpha_lower - 0.07652) <= 1e-3
    assert abs(rep.alpha_upper - 0.07652) <= 1e-3
    assert abs(rep.spectral_radius_m - 2.30277) <= 1e-5

    ex = rr.exists_Lp(reference13.fam, 2)
    assert ex.member is True
    assert ex.subspace_dim == 12
    assert ex.radius.method == "EvenLift"
    assert "symmetric lift dimension 78" in ex.radius.notes
    assert abs(ex.radius.value - 0.79736) <= 1e-4

    alpha2 = -math.log(ex.radius.value) / math.log(rep.spectral_radius_m)
    assert abs(alpha2 - 0.27148) <= 1e-3

    assert time.monotonic() - t0 < 120.0


def test_univariate_two_and_three_digit_examples(haar, threedigit):
    """Indicator mask on the thickened index set and the three-digit
    L1 example: printed matrices, exact radii, exact exponents."""
    # Indicator mask: thickened index set is {0, 1}.
    assert haar.omega_tilde.members == ((0,), (1,))
    pos = [haar.omega_tilde.position((0,)), haar.omega_tilde.position((1,))]
    printed_t0 = [[1, 0], [0, 1]]
    printed_t1 = [[1, 1], [0, 0]]
    t0 = haar.fam_tilde.matrix((0,))
    t1 = haar.fam_tilde.matrix((1,))
    for a in range(2):
        for b in range(2):
            assert t0[pos[a]][pos[b]] == printed_t0[a][b]
            assert t1[pos[a]][pos[b]] == printed_t1[a][b]

    lp = rr.holder_Lp(haar.fam_tilde, 2)
    assert lp.radius_method == "EvenLift"
    assert abs(lp.radius_lower - 2 ** -0.5) <= 1e-10
    assert abs(lp.radius_upper - 2 ** -0.5) <= 1e-10
    assert abs(lp.alpha_lower - 0.5) <= 1e-10
    assert abs(lp.alpha_upper - 0.5) <= 1e-10

    # Three-digit example: index set {0, 1, 2} and printed matrices.
    assert set(threedigit.omega.members) == {(0,), (1,), (2,)}
    printed = {
        (0,): [[1, 0, 0], [0, 0, 1], [0, 1, 0]],
        (1,): [[1, 1, 0], [0, 0, 0], [0, 0, 1]],
        (2,): [[0, 1, 1], [1, 0, 0], [0, 0, 0]],
    }
    qos = [threedigit.omega.position((k,)) for k in range(3)]
    for d, want in printed.items():
        got = threedigit.fam.matrix(d)
        for a in range(3):
            for b in range(3):
                assert got[qos[a]][qos[b]] == want[a][b], (d, a, b)

    # Restriction to span(e1 - e2, e2 - e3) in index order 0, 1, 2.
    e1 = [0] * 3
    e2 = [0] * 3
    e1[qos[0]], e1[qos[1]] = 1, -1
    e2[qos[1]], e2[qos[2]] = 1, -1
    sub = rr.make_subspace(3, [e1, e2], label="difference-pair")
    rf = rr.restrict(threedigit.fam, sub)
    assert rf.matrices[0] == [[1, 0], [1, -1]]
    assert rf.matrices[1] == [[0, 1], [0, 1]]
    assert rf.matrices[2] == [[-1, 0], [0, 0]]

    lp1 = rr.holder_Lp(threedigit.fam, 1)
    rho1 = (1 + math.sqrt(2)) / 3
    assert lp1.radius_method == "PerronMean"
    assert abs(lp1.radius_lower - rho1) <= 1e-10
    assert abs(lp1.radius_upper - rho1) <= 1e-10


@pytest.mark.xfail(
    strict=True,
    reason="the stored 2x2 restrictions are inconsistent with the stated "
    "basis e1-e2, e2-e3; hand-checked images give different columns",
)
def test_threedigit_printed_restrictions_entrywise(threedigit):
    qos = [threedigit.omega.position((k,)) for k in range(3)]
    e1 = [0] * 3
    e2 = [0] * 3
    e1[qos[0]], e1[qos[1]] = 1, -1
    e2[qos[1]], e2[qos[2]] = 1, -1
    sub = rr.make_subspace(3, [e1, e2], label="difference-pair")
    rf = rr.restrict(threedigit.fam, sub)
    assert rf.matrices[0] == [[0, 1], [1, 0]]
    assert rf.matrices[1] == [[-1, 0], [0, 0]]
    assert rf.matrices[2] == [[0, 0], [-1, 0]]


def test_classical_univariate_verdicts(hat, bspline2, haar):
    """Hat: exponent 1, rate 1/2, local exponents, not C1.  Quadratic
    B-spline: C1 with derivative exponent 1.  Indicator: inconsistent
    boundary, rate 1."""
    rep = rr.holder_C(hat.fam)
    assert abs(rep.alpha_lower - 1.0) <= 1e-10
    assert abs(rep.alpha_upper - 1.0) <= 1e-10
    assert rep.verdict == "continuous"

    rate = rr.subdivision_rate(hat.fam_tilde)
    assert rate.certified
    assert abs(rate.lower - 0.5) <= 1e-10
    assert abs(rate.upper - 0.5) <= 1e-10

    loc0 = rr.local_exponent(hat.fam, tail=(0,))
    assert loc0.point == (Fraction(0),)
    assert abs(loc0.alpha - 1.0) <= 1e-10
    loc13 = rr.local_exponent(hat.fam, tail=(0, 1))
    assert loc13.point == (Fraction(1, 3),)
    assert abs(loc13.alpha - 1.0) <= 1e-10

    der = rr.derivative_analysis(hat.fam, holder=rep)
    assert der.verdict == "not C¹"

    brep = rr.holder_C(bspline2.fam)
    bder = rr.derivative_analysis(bspline2.fam, holder=brep)
    assert bder.verdict == "C¹"
    direction = bder.directions[0]
    assert abs(direction.derivative_alpha_lower - 1.0) <= 1e-10
    assert abs(direction.derivative_alpha_upper - 1.0) <= 1e-10

    bc = rr.boundary_consistency(haar.fam)
    assert bc.status == "Failed"
    assert bc.witness is not None

    hrate = rr.subdivision_rate(haar.fam_tilde)
    assert hrate.certified
    assert abs(hrate.lower - 1.0) <= 1e-12
    assert abs(hrate.upper - 1.0) <= 1e-12


def test_binary_pair_golden_ratio_certificate():
    """The pair [[1,1],[0,1]], [[1,0],[1,1]] has joint spectral radius
    (1+sqrt 5)/2; the polytope certifies it and brute-force bounds to
    word length 14 bracket it."""
    b0 = [[Fraction(1), Fraction(1)], [Fraction(0), Fraction(1)]]
    b1 = [[Fraction(1), Fraction(0)], [Fraction(1), Fraction(1)]]
    res = rr.invariant_polytope([b0, b1])
    assert res.certified
    assert abs(res.value - GOLDEN) <= 1e-8

    bounds = rr.jsr_bounds([b0, b1], max_len=14)
    assert bounds.lower <= res.value + 1e-12
    assert res.value <= bounds.upper + 1e-12
    assert abs(bounds.lower - GOLDEN) <= 1e-8


def test_property_suites_pass_within_budget():
    """All nine randomized property suites pass in under two minutes."""
    t0 = time.monotonic()
    proc = subprocess.run(
        [
            sys.executable, "-m", "pytest",
            str(Path(__file__).parent / "test_properties.py"),
            "-q", "-p", "no:cacheprovider",
        ],
        capture_output=True,
        text=True,
        cwd=PKG_ROOT,
    )
    elapsed = time.monotonic() - t0
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "9 passed" in proc.stdout, proc.stdout
    assert elapsed < 120.0, f"property suites took {elapsed:.1f}s"


def test_reports_are_deterministic(aniso_config_path):
    """Two analyze runs at different thread counts produce byte-identical
    reports once timings are excluded."""

    def run(threads: str) -> bytes:
        env = dict(os.environ)
        env["REFREG_THREADS"] = threads
        proc = subprocess.run(
            [sys.executable, "-m", "refreg.cli", "analyze",
             str(aniso_config_path)],
            capture_output=True,
            text=True,
            cwd=PKG_ROOT,
            env=env,
        )
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(proc.stdout)
        doc.pop("timings", None)
        return json.dumps(doc, sort_keys=True, indent=2).encode()

    first = run("1")
    second = run("4")
    assert first == second
