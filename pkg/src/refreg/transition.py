"""Transition matrices of a refinement scheme and their invariant subspaces.

Given a mask and the translate index set Omega, the refinement equation
induces one N x N rational matrix per digit, acting on the vector of
translated samples of the refinable function.  All regularity questions
reduce to joint-spectral data of these matrices restricted to invariant
subspaces:

* the sum-zero subspace W (translates of the all-ones covector),
* the difference subspace U, the minimal common invariant subspace
  containing the first differences of the eigenvector at the origin,
* per-spectral-block subspaces U_i spanned by differences of sample
  values taken along one root subspace of the dilation.

This module builds the matrices, finds the distinguished eigenvectors,
grows the subspaces, restricts families to them, tests irreducibility,
searches for dominant invariant subspaces, and computes the block
lower-triangular factorization into irreducible diagonal blocks.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import ratlinalg as rla
from .lattice import DigitSet, DilationData, IntVec, SpectralSplit
from .mask import Mask, OmegaSet, check_sum_rules


class TransitionError(Exception):
    pass


class NoUnitEigenvalueError(TransitionError):
    """The designated matrix has no eigenvalue 1; the refinement equation
    then has no continuous compactly supported solution."""


class NotInvariantError(TransitionError):
    """A subspace handed to ``restrict`` is not invariant under the family."""


class StrategyInconclusiveError(TransitionError):
    """The numeric subspace strategy could not stabilize a rank decision."""

    def __init__(self, message: str, candidate_dims: tuple[int, int] | None = None):
        super().__init__(message)
        self.candidate_dims = candidate_dims


class DominantInconclusiveError(TransitionError):
    """Spectral bounds too wide to decide whether a candidate subspace
    carries the full joint spectral radius."""


# ---------------------------------------------------------------------------
# domain types


@dataclass(eq=False)
class TransitionFamily:
    """One matrix per digit: entry (a, b) is the mask coefficient at
    M a - b + d, for translate indices a, b running over Omega."""

    mask: Mask
    digits: DigitSet
    omega: OmegaSet
    matrices: tuple[rla.Mat, ...]      # aligned with digits.digits
    column_stochastic: bool            # True iff sum rules hold (then exact)

    @property
    def size(self) -> int:
        return self.omega.size

    @property
    def dil(self) -> DilationData:
        return self.mask.dil

    def matrix(self, d) -> rla.Mat:
        return self.matrices[self.digits.index(tuple(int(x) for x in d))]

    def family(self) -> list[rla.Mat]:
        return [rla.mat_copy(t) for t in self.matrices]

    def as_numpy(self) -> list[np.ndarray]:
        return [np.array([[float(x) for x in row] for row in t]) for t in self.matrices]

    def mean_matrix(self) -> rla.Mat:
        total = rla.zeros(self.size, self.size)
        for t in self.matrices:
            total = rla.mat_add(total, t)
        return rla.mat_scale(total, Fraction(1, self.digits.count))


@dataclass(eq=False)
class Subspace:
    """Column-spanned subspace of R^N with a remembered basis order.

    ``columns`` keeps the spanning vectors exactly as supplied (after
    dropping dependent ones), so restrictions are expressed in the basis
    the caller chose.  ``approximate`` marks float bases produced by the
    numeric fallback; ``tolerance`` records the rank tolerance used.
    """

    ambient_dim: int
    columns: tuple[tuple, ...]         # each a length-ambient_dim vector
    label: str = "custom"
    approximate: bool = False
    tolerance: float | None = None

    @property
    def dim(self) -> int:
        return len(self.columns)

    @property
    def is_zero(self) -> bool:
        return not self.columns

    def basis_matrix(self) -> rla.Mat:
        """Ambient_dim x dim matrix whose columns are the basis."""
        return [[col[i] for col in self.columns] for i in range(self.ambient_dim)]

    def contains_vector(self, v) -> bool:
        if self.approximate:
            if self.is_zero:
                return all(abs(float(x)) <= (self.tolerance or 1e-10) for x in v)
            b = np.array(self.columns, dtype=float).T
            vv = np.array([float(x) for x in v])
            resid = vv - b @ np.linalg.lstsq(b, vv, rcond=None)[0]
            scale = max(1.0, float(np.linalg.norm(vv)))
            return float(np.linalg.norm(resid)) <= (self.tolerance or 1e-10) * scale
        sb = rla.SpanBuilder(self.ambient_dim)
        for col in self.columns:
            sb.add(col)
        return sb.contains([Fraction(x) for x in v])

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains_vector(c) for c in other.columns)

    def as_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in col] for col in self.columns]).T \
            if self.columns else np.zeros((self.ambient_dim, 0))


@dataclass(eq=False)
class RestrictedFamily:
    """The family expressed in the basis of an invariant subspace.

    For each digit, ``matrices[i]`` is the dim x dim matrix A with
    basis . A = (scaling .) T . basis, columns giving the coordinates of
    the transformed basis vectors.
    """

    subspace: Subspace
    matrices: tuple[rla.Mat, ...]
    digits: DigitSet | None = None
    parent: TransitionFamily | None = None
    scaling: Fraction | None = None

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def matrix(self, d) -> rla.Mat:
        if self.digits is None:
            raise TransitionError("family has no digit labels")
        return self.matrices[self.digits.index(tuple(int(x) for x in d))]

    def family(self) -> list[rla.Mat]:
        return [rla.mat_copy(a) for a in self.matrices]

    def as_numpy(self) -> list[np.ndarray]:
        return [np.array([[float(x) for x in row] for row in a]) for a in self.matrices]


@dataclass(eq=False)
class EigenvectorResult:
    """Outcome of a unit-eigenvalue solve, normalized to coordinate sum 1.

    status is "Unique" when the eigenspace is one-dimensional,
    "MultipleCandidates" when several independent eigenvectors exist
    (selection is deferred to the caller), and "NotNormalizable" when
    every eigenvector has coordinate sum zero.
    """

    vector: rla.Vec | None
    candidates: tuple[tuple, ...]
    status: str


@dataclass(eq=False)
class SpecialVectors:
    """The two distinguished eigenvectors of a transition family: the
    fixed vector of the digit-0 matrix (sample values at the origin) and
    the fixed vector of the arithmetic mean of the family."""

    v0: EigenvectorResult | None
    z: EigenvectorResult | None
    v0_exists: bool
    z_exists: bool


# ---------------------------------------------------------------------------
# construction


def build_transition(mask: Mask, digits: DigitSet, omega: OmegaSet) -> TransitionFamily:
    """Assemble the per-digit matrices with exact rational entries.

    When the mask satisfies the sum rules, every column of every matrix
    must sum to 1 (this is what the closure of Omega guarantees); the
    property is verified and recorded.
    """
    members = omega.members
    n = len(members)
    dil = mask.dil
    mats = []
    for d in digits.digits:
        t = rla.zeros(n, n)
        for ai, a in enumerate(members):
            ma = dil.apply([Fraction(x) for x in a])
            for bi, b in enumerate(members):
                key = tuple(int(x) - y + z for x, y, z in zip(ma, b, d))
                t[ai][bi] = mask.coeff(key)
        mats.append(t)
    stochastic = bool(check_sum_rules(mask, digits)["ok"])
    if stochastic:
        for d, t in zip(digits.digits, mats):
            for bi in range(n):
                colsum = sum((t[ai][bi] for ai in range(n)), Fraction(0))
                if colsum != 1:
                    raise TransitionError(
                        f"column {bi} of the digit-{d} matrix sums to {colsum}; "
                        "the translate set is not closed")
    return TransitionFamily(mask=mask, digits=digits, omega=omega,
                            matrices=tuple(mats), column_stochastic=stochastic)


def _unit_eigenvector(mat: rla.Mat, what: str) -> EigenvectorResult:
    n = len(mat)
    shifted = rla.mat_sub(mat, rla.identity(n))
    basis = rla.nullspace(shifted)
    if not basis:
        raise NoUnitEigenvalueError(
            f"{what} has no eigenvalue 1: no continuous solution exists")

    def normalize(v):
        s = sum(v, Fraction(0))
        if s == 0:
            return None
        return [x / s for x in v]

    if len(basis) == 1:
        nv = normalize(basis[0])
        if nv is None:
            return EigenvectorResult(vector=None, candidates=(tuple(basis[0]),),
                                     status="NotNormalizable")
        return EigenvectorResult(vector=nv, candidates=(tuple(nv),), status="Unique")
    cands = []
    any_norm = False
    for v in basis:
        nv = normalize(v)
        if nv is None:
            cands.append(tuple(v))
        else:
            any_norm = True
            cands.append(tuple(nv))
    status = "MultipleCandidates" if any_norm else "NotNormalizable"
    return EigenvectorResult(vector=None, candidates=tuple(cands), status=status)


def origin_eigenvector(fam: TransitionFamily) -> EigenvectorResult:
    """Fixed vector of the digit-0 matrix, normalized to coordinate sum 1.

    Its entries are the sample values of the refinable function at the
    integer translates of the origin.  A multi-dimensional eigenspace is
    reported as MultipleCandidates; selection between candidates needs
    spectral information and is deferred to the caller.
    """
    zero = tuple([0] * fam.dil.dim)
    return _unit_eigenvector(fam.matrix(zero), "the digit-0 matrix")


def mean_eigenvector(fam: TransitionFamily) -> EigenvectorResult:
    """Fixed vector of the arithmetic mean of the family, sum-normalized.

    This seed works even when the function value at the origin vanishes;
    the subspace grown from it is the smallest common invariant subspace
    containing all first differences.
    """
    return _unit_eigenvector(fam.mean_matrix(), "the family mean")


def special_vectors(fam: TransitionFamily) -> SpecialVectors:
    try:
        v0 = origin_eigenvector(fam)
        v0_exists = v0.vector is not None or bool(v0.candidates)
    except NoUnitEigenvalueError:
        v0, v0_exists = None, False
    try:
        z = mean_eigenvector(fam)
        z_exists = z.vector is not None or bool(z.candidates)
    except NoUnitEigenvalueError:
        z, z_exists = None, False
    return SpecialVectors(v0=v0, z=z, v0_exists=v0_exists, z_exists=z_exists)


# ---------------------------------------------------------------------------
# subspaces


def _primitive(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Scale a rational vector to a primitive integer vector (same line)."""
    fracs = [Fraction(x) for x in v]
    den = 1
    for x in fracs:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in fracs]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(Fraction(x) for x in ints)


def make_subspace(ambient_dim: int, vectors, label: str = "custom",
                  approximate: bool = False, tolerance: float | None = None) -> Subspace:
    """Drop dependent vectors (keeping the caller's order) and wrap up."""
    if approximate:
        kept: list[tuple] = []
        rows: list[np.ndarray] = []
        tol = tolerance if tolerance is not None else 1e-10
        for v in vectors:
            vv = np.array([float(x) for x in v])
            w = vv.copy()
            for r in rows:
                w = w - (r @ w) * r
            if np.linalg.norm(w) > tol * max(1.0, np.linalg.norm(vv)):
                rows.append(w / np.linalg.norm(w))
                kept.append(tuple(float(x) for x in vv))
        return Subspace(ambient_dim=ambient_dim, columns=tuple(kept), label=label,
                        approximate=True, tolerance=tol)
    sb = rla.SpanBuilder(ambient_dim)
    kept_exact: list[tuple] = []
    for v in vectors:
        fv = [Fraction(x) for x in v]
        if sb.add(fv):
            kept_exact.append(tuple(fv))
    return Subspace(ambient_dim=ambient_dim, columns=tuple(kept_exact), label=label)


def conditioned_subspace(sub: Subspace) -> Subspace:
    """The same span with an exactly orthogonalized, dyadically rescaled
    basis.

    Invariant-subspace growth keeps primitive integer vectors whose
    entries can reach 1e10; restricting to such a basis inflates the
    restricted matrices and the float rounding of their entries is then
    amplified by the basis condition number in any downstream eigenvalue
    computation.  Gram-Schmidt over the rationals plus scaling by exact
    powers of two brings the basis condition number to O(1) without
    leaving exact arithmetic; the restriction stays exactly similar, so
    every spectral quantity is unchanged.
    """
    if sub.approximate or sub.dim == 0:
        return sub
    ortho: list[list[Fraction]] = []
    for col in sub.columns:
        v = [Fraction(x) for x in col]
        for u in ortho:
            num = sum(a * b for a, b in zip(v, u))
            den = sum(a * a for a in u)
            if num != 0:
                c = num / den
                v = [a - c * b for a, b in zip(v, u)]
        if any(x != 0 for x in v):
            norm_sq = float(sum(x * x for x in v))
            exp = round(math.log2(norm_sq) / 2) if norm_sq > 0 else 0
            scale = Fraction(2) ** (-exp)
            ortho.append([x * scale for x in v])
    return Subspace(ambient_dim=sub.ambient_dim,
                    columns=tuple(tuple(v) for v in ortho),
                    label=sub.label + "+gs")


def sum_zero_subspace(n: int) -> Subspace:
    """The subspace of vectors with zero coordinate sum, with the
    difference basis e_1 - e_2, e_2 - e_3, ..., e_{n-1} - e_n."""
    cols = []
    for j in range(n - 1):
        v = [Fraction(0)] * n
        v[j] = Fraction(1)
        v[j + 1] = Fraction(-1)
        cols.append(tuple(v))
    return Subspace(ambient_dim=n, columns=tuple(cols), label="W")


def _grow_invariant(mats: Sequence[rla.Mat], seeds, ambient: int,
                    scale_primitive: bool = True):
    """Minimal common invariant subspace containing the seeds.

    Breadth-first growth: apply every matrix to every kept vector,
    keeping images that enlarge the span, until the dimension is stable.
    Returns (SpanBuilder, kept column vectors).  Kept vectors are scaled
    to primitive integer form, which changes nothing about the span but
    keeps the arithmetic small.
    """
    sb = rla.SpanBuilder(ambient)
    kept: list[tuple] = []
    queue: list[tuple] = []
    for v in seeds:
        fv = [Fraction(x) for x in v]
        if rla.vec_is_zero(fv):
            continue
        w = _primitive(fv) if scale_primitive else tuple(fv)
        if sb.add(w):
            kept.append(w)
            queue.append(w)
    while queue:
        v = queue.pop(0)
        for t in mats:
            img = rla.matvec(t, list(v))
            if rla.vec_is_zero(img):
                continue
            w = _primitive(img) if scale_primitive else tuple(img)
            if sb.add(w):
                kept.append(w)
                queue.append(w)
    return sb, kept


def difference_subspace(fam: TransitionFamily, seed: Sequence, label: str = "U") -> Subspace:
    """Minimal common invariant subspace containing the first differences
    of the seed vector, i.e. the span closure of {T_d seed - seed}.

    Deterministic: digits are processed in their canonical order and new
    basis vectors appended breadth-first, so the returned basis is
    reproducible; any processing order yields the same span.
    """
    seed_vec = [Fraction(x) for x in seed]
    diffs = [rla.vec_sub(rla.matvec(t, seed_vec), seed_vec) for t in fam.matrices]
    _, kept = _grow_invariant(fam.matrices, diffs, fam.size)
    return Subspace(ambient_dim=fam.size, columns=tuple(kept), label=label)


def restrict(fam, sub: Subspace, scaling: Fraction | None = None,
             digits: DigitSet | None = None) -> RestrictedFamily:
    """Express the family in the basis of an invariant subspace.

    Accepts a TransitionFamily or a plain sequence of square matrices.
    Raises NotInvariantError when some basis image leaves the subspace.
    An optional exact scaling multiplies every matrix of the family.
    """
    if isinstance(fam, TransitionFamily):
        mats = fam.matrices
        digs = fam.digits
        parent = fam
    else:
        mats = tuple(fam)
        digs = digits
        parent = None
    if sub.approximate:
        restricted = _restrict_numeric(mats, sub, scaling)
        return RestrictedFamily(subspace=sub, matrices=restricted, digits=digs,
                                parent=parent, scaling=scaling)
    basis = sub.basis_matrix()
    n = sub.dim
    out = []
    for t in mats:
        a = rla.zeros(n, n)
        for j, col in enumerate(sub.columns):
            img = rla.matvec(t, [Fraction(x) for x in col])
            if scaling is not None:
                img = rla.vec_scale(img, Fraction(scaling))
            if n == 0:
                if not rla.vec_is_zero(img):
                    raise NotInvariantError("zero subspace is not invariant")
                continue
            coords = rla.solve(basis, img)
            if coords is None:
                raise NotInvariantError(
                    f"image of basis column {j} leaves the subspace '{sub.label}'")
            for i in range(n):
                a[i][j] = coords[i]
        out.append(a)
    return RestrictedFamily(subspace=sub, matrices=tuple(out), digits=digs,
                            parent=parent, scaling=scaling)


def _restrict_numeric(mats, sub: Subspace, scaling) -> tuple[rla.Mat, ...]:
    b = sub.as_numpy()
    tol = sub.tolerance or 1e-10
    out = []
    lam = float(scaling) if scaling is not None else 1.0
    for t in mats:
        tn = np.array([[float(x) for x in row] for row in t])
        img = lam * (tn @ b)
        coords, *_ = np.linalg.lstsq(b, img, rcond=None)
        resid = img - b @ coords
        scale = max(1.0, float(np.linalg.norm(img)))
        if float(np.linalg.norm(resid)) > 1e3 * tol * scale:
            raise NotInvariantError(
                f"subspace '{sub.label}' not invariant at tolerance {tol}")
        out.append([[float(coords[i][j]) for j in range(coords.shape[1])]
                    for i in range(coords.shape[0])])
    return tuple(out)


# ---------------------------------------------------------------------------
# irreducibility


@dataclass(eq=False)
class IrreducibilityResult:
    kind: str                      # "Irreducible" | "Reducible" | "Inconclusive"
    witness: Subspace | None
    certified: bool
    details: str


def _family_matrices(rf) -> tuple[list[rla.Mat], bool]:
    """Normalize the argument to a matrix list plus an exactness flag."""
    if isinstance(rf, RestrictedFamily):
        mats = list(rf.matrices)
        exact = not rf.subspace.approximate
    elif isinstance(rf, TransitionFamily):
        mats = list(rf.matrices)
        exact = True
    else:
        mats = [list(list(row) for row in m) for m in rf]
        exact = all(isinstance(x, (Fraction, int)) for m in mats for row in m for x in row)
    return mats, exact


def _algebra_dimension(mats: Sequence[rla.Mat], cap: int | None = None) -> int:
    """Dimension of the unital algebra generated by the family.

    Grown as the span of all left-products starting from the identity;
    equals n^2 exactly when the family has no common complex invariant
    subspace.
    """
    n = len(mats[0])
    target = n * n if cap is None else cap
    sb = rla.SpanBuilder(n * n)
    ident = rla.identity(n)
    flat = [x for row in ident for x in row]
    sb.add(flat)
    queue = [ident]
    while queue and sb.dim < target:
        x = queue.pop(0)
        for a in mats:
            y = rla.matmul(a, x)
            fy = _primitive([v for row in y for v in row])
            if sb.add(fy):
                queue.append([list(fy[i * n:(i + 1) * n]) for i in range(n)])
    return sb.dim


def _poly_derivative(coeffs: Sequence[Fraction]) -> list[Fraction]:
    n = len(coeffs) - 1
    return [c * (n - i) for i, c in enumerate(coeffs[:-1])]


def _poly_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    while b and any(x != 0 for x in b):
        _, r = rla.poly_divmod(a, b)
        a, b = b, r
    while a and a[0] == 0:
        a = a[1:]
    if a:
        lead = a[0]
        a = [x / lead for x in a]
    return a


def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _has_repeated_eigenvalues(mat: rla.Mat) -> bool:
    cp = rla.charpoly(mat)
    g = _poly_gcd(cp, _poly_derivative(cp))
    return len(g) > 1


def _pick_pivot(mats: Sequence[rla.Mat], rng_seed: int) -> tuple[rla.Mat, str]:
    """The first family member, or a random rational combination when it
    has repeated eigenvalues (a simple-spectrum pivot makes the
    eigenvector enumeration complete)."""
    if not _has_repeated_eigenvalues(mats[0]):
        return mats[0], "first family member"
    rng = random.Random(rng_seed)
    n = len(mats[0])
    for _ in range(8):
        combo = rla.zeros(n, n)
        for a in mats:
            combo = rla.mat_add(combo, rla.mat_scale(a, Fraction(rng.randint(1, 19), 1)))
        if not _has_repeated_eigenvalues(combo):
            return combo, "random combination (simple spectrum)"
    return mats[0], "repeated eigenvalues persist"


def _rational_eigenvalues(mat: rla.Mat) -> list[Fraction]:
    """Exactly verified rational eigenvalues, recovered from float
    eigenvalues by small-denominator reconstruction."""
    cp = rla.charpoly(mat)
    fl = np.array([[float(x) for x in row] for row in mat])
    found: list[Fraction] = []
    for lam in np.linalg.eigvals(fl):
        if abs(lam.imag) > 1e-8:
            continue
        cand = Fraction(float(lam.real)).limit_denominator(10 ** 9)
        if _poly_eval(cp, cand) == 0 and cand not in found:
            found.append(cand)
    return sorted(found)


def _numeric_closure(np_mats: list[np.ndarray], seeds: list[np.ndarray],
                     tol: float) -> np.ndarray:
    """Float version of the invariant growth loop; returns an orthonormal
    basis (columns) of the closure."""
    n = np_mats[0].shape[0]
    rows: list[np.ndarray] = []

    def push(v: np.ndarray) -> bool:
        w = v.copy()
        for r in rows:
            w = w - (r @ w) * r
        norm = np.linalg.norm(w)
        if norm > tol * max(1.0, np.linalg.norm(v)):
            rows.append(w / norm)
            return True
        return False

    queue = []
    for s in seeds:
        if push(s):
            queue.append(rows[-1])
    while queue and len(rows) < n:
        v = queue.pop(0)
        for a in np_mats:
            if push(a @ v):
                queue.append(rows[-1])
    return np.array(rows).T if rows else np.zeros((n, 0))


def _complex_closure(np_mats: list[np.ndarray], seed: np.ndarray,
                     tol: float) -> np.ndarray:
    rows: list[np.ndarray] = []

    def push(v: np.ndarray) -> bool:
        w = v.astype(complex).copy()
        for r in rows:
            w = w - (np.conj(r) @ w) * r
        norm = np.linalg.norm(w)
        if norm > tol * max(1.0, np.linalg.norm(v)):
            rows.append(w / norm)
            return True
        return False

    n = np_mats[0].shape[0]
    queue = []
    if push(seed):
        queue.append(rows[-1])
    while queue and len(rows) < n:
        v = queue.pop(0)
        for a in np_mats:
            if push(a @ v):
                queue.append(rows[-1])
    return np.array(rows).T if rows else np.zeros((n, 0), dtype=complex)


def _rationalize_basis(cols: np.ndarray, mats: Sequence[rla.Mat]) -> list[tuple] | None:
    """Try to recognize a float invariant subspace as an exact rational
    one: reconstruct each basis vector with small denominators, then
    confirm that the exact closure does not grow."""
    cand: list[tuple] = []
    for j in range(cols.shape[1]):
        v = cols[:, j]
        piv = max(range(len(v)), key=lambda i: abs(v[i]))
        if abs(v[piv]) < 1e-12:
            return None
        v = v / v[piv]
        fv = tuple(Fraction(float(x)).limit_denominator(10 ** 6) for x in v)
        back = np.array([float(x) for x in fv])
        if np.linalg.norm(back - v) > 1e-7 * max(1.0, np.linalg.norm(v)):
            return None
        cand.append(fv)
    sb, kept = _grow_invariant(mats, cand, len(mats[0]))
    if sb.dim != len(cand):
        return None
    return kept


def irreducibility_test(rf, rng_seed: int = 11) -> IrreducibilityResult:
    """Decide whether the family has a common proper invariant subspace.

    Exact fast path: if the unital algebra spanned by all products has
    full dimension n^2, there is no invariant subspace even over the
    complex numbers (certified).  Otherwise eigenvectors of a pivot
    matrix are closed under the family: a proper closure is a witness of
    reducibility (exact when the eigenvector is rational).  If every
    eigenspace of the pivot is one-dimensional and every closure is
    full, the test is complete and returns Irreducible; remaining cases
    are Inconclusive.
    """
    mats, exact = _family_matrices(rf)
    if not mats:
        raise TransitionError("empty family")
    n = len(mats[0])
    if n <= 1:
        return IrreducibilityResult(kind="Irreducible", witness=None, certified=True,
                                    details="dimension <= 1")
    if exact and _algebra_dimension(mats) == n * n:
        return IrreducibilityResult(kind="Irreducible", witness=None, certified=True,
                                    details="generated matrix algebra has full dimension")

    closures = _invariant_closures(mats, exact, rng_seed)
    proper = [c for c in closures if 0 < c.dim < n]
    if proper:
        exact_proper = [c for c in proper if not c.approximate]
        pool = exact_proper or proper
        witness = min(pool, key=lambda c: c.dim)
        return IrreducibilityResult(
            kind="Reducible", witness=witness, certified=not witness.approximate,
            details=f"eigenvector closure of dimension {witness.dim}")
    if _closures_complete(mats, exact, rng_seed):
        return IrreducibilityResult(
            kind="Irreducible", witness=None, certified=False,
            details="all pivot eigenspaces simple and all closures full "
                    "(floating-point closures)")
    return IrreducibilityResult(
        kind="Inconclusive", witness=None, certified=False,
        details="pivot has repeated eigenvalues or unstable closures; "
                "eigenvector enumeration incomplete")


_closure_cache_note = """Closures are recomputed per call; families are small."""


def _invariant_closures(mats: Sequence[rla.Mat], exact: bool,
                        rng_seed: int) -> list[Subspace]:
    """All invariant closures of pivot eigenvectors (and of whole
    eigenspaces when they are fat).  Exact for rational eigen-data."""
    n = len(mats[0])
    out: list[Subspace] = []

    def add(cols, approximate, tol=None):
        sub = make_subspace(n, cols, label="closure", approximate=approximate,
                            tolerance=tol)
        for prev in out:
            if prev.dim == sub.dim and not (prev.approximate or sub.approximate):
                if prev.contains_subspace(sub):
                    return
        out.append(sub)

    if exact:
        pivot, _ = _pick_pivot(mats, rng_seed)
        rational = _rational_eigenvalues(pivot)
        for lam in rational:
            shifted = rla.mat_sub(pivot, rla.mat_scale(rla.identity(n), lam))
            eigbasis = rla.nullspace(shifted)
            for v in eigbasis:
                _, kept = _grow_invariant(mats, [v], n)
                add(kept, approximate=False)
            if len(eigbasis) > 1:
                _, kept = _grow_invariant(mats, eigbasis, n)
                add(kept, approximate=False)
        np_mats = [np.array([[float(x) for x in row] for row in m]) for m in mats]
        np_pivot = np.array([[float(x) for x in row] for row in pivot])
    else:
        np_mats = [np.array([[float(x) for x in row] for row in m]) for m in mats]
        np_pivot = np_mats[0]
        rational = []
    # float pass over the remaining (irrational / complex) eigenvectors
    vals, vecs = np.linalg.eig(np_pivot)
    for idx in range(len(vals)):
        lam = vals[idx]
        if any(abs(lam - complex(float(r), 0.0)) < 1e-7 for r in rational):
            continue
        if lam.imag < -1e-9:
            continue        # conjugate pair handled once
        v = vecs[:, idx]
        if abs(lam.imag) <= 1e-9:
            seeds = [v.real]
        else:
            seeds = [v.real, v.imag]
        basis = _numeric_closure(np_mats, seeds, tol=1e-10)
        if 0 < basis.shape[1] < n:
            rat = _rationalize_basis(basis, mats) if exact else None
            if rat is not None:
                add(rat, approximate=False)
            else:
                add([tuple(basis[:, j]) for j in range(basis.shape[1])],
                    approximate=True, tol=1e-10)
        if abs(lam.imag) > 1e-9:
            # a complex eigenline may meet its conjugate in a smaller
            # real invariant subspace that the real 2-plane closure hides
            cb = _complex_closure(np_mats, v, tol=1e-10)
            d = cb.shape[1]
            if 0 < d < n:
                stacked = np.hstack([cb, np.conj(cb)])
                rk = np.linalg.matrix_rank(stacked, tol=1e-8)
                inter = 2 * d - rk
                if 0 < inter < n:
                    null = _null_cols(np.hstack([cb, -np.conj(cb)]))
                    reals = []
                    for j in range(null.shape[1]):
                        x = cb @ null[:d, j]
                        reals.extend([x.real, x.imag])
                    basis2 = _numeric_closure(np_mats, reals, tol=1e-10)
                    if 0 < basis2.shape[1] < n:
                        rat = _rationalize_basis(basis2, mats) if exact else None
                        if rat is not None:
                            add(rat, approximate=False)
                        else:
                            add([tuple(basis2[:, j]) for j in range(basis2.shape[1])],
                                approximate=True, tol=1e-10)
    return out


def _null_cols(a: np.ndarray) -> np.ndarray:
    _, s, vh = np.linalg.svd(a)
    tol = 1e-8 * (s[0] if len(s) else 1.0)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _closures_complete(mats: Sequence[rla.Mat], exact: bool, rng_seed: int) -> bool:
    """True when the pivot's eigenspaces are provably all simple, so the
    eigenvector enumeration covered every candidate direction."""
    if exact:
        pivot, note = _pick_pivot(mats, rng_seed)
        if note == "repeated eigenvalues persist":
            return False
        return not _has_repeated_eigenvalues(pivot)
    np_pivot = np.array([[float(x) for x in row] for row in mats[0]])
    vals = np.linalg.eigvals(np_pivot)
    vals = sorted(vals, key=lambda z: (z.real, z.imag))
    for a, b in itertools.combinations(vals, 2):
        if abs(a - b) < 1e-7:
            return False
    return True


# ---------------------------------------------------------------------------
# dominant subspace and block factorization


def _restrict_mats(mats: Sequence[rla.Mat], cols: Sequence[tuple]) -> list[rla.Mat]:
    n = len(cols)
    ambient = len(cols[0]) if cols else 0
    basis = [[col[i] for col in cols] for i in range(ambient)]
    out = []
    for t in mats:
        a = rla.zeros(n, n)
        for j, col in enumerate(cols):
            img = rla.matvec(t, [Fraction(x) for x in col])
            coords = rla.solve(basis, img)
            if coords is None:
                raise NotInvariantError("candidate subspace is not invariant")
            for i in range(n):
                a[i][j] = coords[i]
        out.append(a)
    return out


def dominant_subspace(rf, jsr_oracle: Callable) -> Subspace | None:
    """Smallest discovered invariant subspace that is contained in every
    other discovered one and carries the full joint spectral radius.

    ``jsr_oracle`` maps a list of square matrices to (lower, upper)
    bounds on their joint spectral radius.  Returns the whole space for
    an irreducible family, None when no candidate qualifies, and raises
    DominantInconclusiveError when the bounds cannot separate the
    candidate's radius from the family's.
    """
    mats, exact = _family_matrices(rf)
    n = len(mats[0])
    if not exact:
        raise TransitionError("dominant subspace search needs an exact family")
    verdict = irreducibility_test(rf)
    if verdict.kind == "Irreducible":
        cols = [tuple(Fraction(1 if i == j else 0) for i in range(n)) for j in range(n)]
        return Subspace(ambient_dim=n, columns=tuple(cols), label="dominant")
    closures = _invariant_closures(mats, exact, rng_seed=11)
    discovered = [c for c in closures if 0 < c.dim < n and not c.approximate]
    if not discovered:
        return None
    candidates = sorted(discovered, key=lambda c: c.dim)
    lo_full, up_full = jsr_oracle(mats)
    for cand in candidates:
        if not all(other.contains_subspace(cand) for other in discovered):
            continue
        lo_sub, up_sub = jsr_oracle(_restrict_mats(mats, cand.columns))
        if up_sub < lo_full * (1 - 1e-12) - 1e-300:
            continue        # provably smaller radius: not dominant
        if lo_sub >= lo_full - (up_full - lo_full) - 1e-12:
            return Subspace(ambient_dim=n, columns=cand.columns, label="dominant")
        raise DominantInconclusiveError(
            f"cannot decide whether the {cand.dim}-dimensional candidate carries "
            f"the full radius: family in [{lo_full}, {up_full}], "
            f"candidate in [{lo_sub}, {up_sub}]")
    return None


@dataclass(eq=False)
class FrobeniusBlock:
    matrices: tuple[rla.Mat, ...]
    dim: int
    verdict: str                  # "Irreducible" | "Inconclusive"
    certified: bool


@dataclass(eq=False)
class FrobeniusFactorization:
    """Block lower-triangular form: in the new basis every family member
    is block lower triangular with the listed diagonal blocks, ordered
    top-left to bottom-right; each block family is irreducible unless
    flagged Inconclusive."""

    blocks: tuple[FrobeniusBlock, ...]
    change_of_basis: rla.Mat      # columns = new basis in original coordinates


def _frobenius_recurse(mats: list[rla.Mat], rng_seed: int):
    n = len(mats[0])
    verdict = irreducibility_test(mats, rng_seed=rng_seed)
    if verdict.kind != "Reducible" or verdict.witness is None \
            or verdict.witness.approximate:
        kind = "Irreducible" if verdict.kind == "Irreducible" else "Inconclusive"
        block = FrobeniusBlock(matrices=tuple(mats), dim=n, verdict=kind,
                               certified=verdict.certified)
        return [block], rla.identity(n)
    inv_cols = list(verdict.witness.columns)
    k = len(inv_cols)
    # complement first, invariant part last: images of the invariant
    # columns then have no component on the leading block, which is what
    # makes the transformed family block *lower* triangular
    sb = rla.SpanBuilder(n)
    for c in inv_cols:
        sb.add(c)
    comp_cols = []
    for j in range(n):
        e = [Fraction(0)] * n
        e[j] = Fraction(1)
        if sb.add(e):
            comp_cols.append(tuple(e))
    all_cols = comp_cols + inv_cols
    p = [[all_cols[j][i] for j in range(n)] for i in range(n)]
    pinv = rla.inverse(p)
    quot = []
    rest = []
    for a in mats:
        ap = rla.matmul(pinv, rla.matmul(a, p))
        for i in range(n - k):
            for j in range(n - k, n):
                if ap[i][j] != 0:
                    raise TransitionError("invariant witness failed verification")
        quot.append([row[:n - k] for row in ap[:n - k]])
        rest.append([row[n - k:] for row in ap[n - k:]])
    qblocks, qbasis = _frobenius_recurse(quot, rng_seed + 1)
    rblocks, rbasis = _frobenius_recurse(rest, rng_seed + 1)
    combined = rla.zeros(n, n)
    for i in range(n - k):
        for j in range(n - k):
            combined[i][j] = qbasis[i][j]
    for i in range(k):
        for j in range(k):
            combined[n - k + i][n - k + j] = rbasis[i][j]
    return qblocks + rblocks, rla.matmul(p, combined)


def frobenius_factorization(rf, rng_seed: int = 11) -> FrobeniusFactorization:
    """Recursively split off invariant subspaces until every diagonal
    block is irreducible (or the split becomes inconclusive).

    The change-of-basis columns express the new basis in the family's
    original coordinates; conjugating any family member by it gives a
    block lower-triangular matrix with the returned diagonal blocks.
    """
    mats, exact = _family_matrices(rf)
    if not exact:
        raise TransitionError("block factorization needs an exact family")
    blocks, basis = _frobenius_recurse(mats, rng_seed)
    return FrobeniusFactorization(blocks=tuple(blocks), change_of_basis=basis)


# ---------------------------------------------------------------------------
# per-spectral-block subspaces


def _adic_samples(fam: TransitionFamily, v0: rla.Vec, depth: int):
    """Exact sample points of the attractor addresses up to the given
    depth, with the corresponding vectors of translated function values.

    Returns a list of (point, vector) pairs; the vector at address
    (d1, ..., dt) is T_{d1} ... T_{dt} v0 and the point is the finite
    expansion sum M^{-k} d_k.
    """
    s = fam.dil.dim
    zero_pt = tuple(Fraction(0) for _ in range(s))
    level = [(zero_pt, tuple(v0))]
    out = [(zero_pt, tuple(v0))]
    for _ in range(depth):
        nxt = []
        for d, t in zip(fam.digits.digits, fam.matrices):
            for pt, vec in level:
                new_pt = tuple(fam.dil.apply_inv([Fraction(x) + dx
                                                  for x, dx in zip(pt, d)]))
                new_vec = tuple(rla.matvec(t, list(vec)))
                nxt.append((new_pt, new_vec))
        out.extend(nxt)
        level = nxt
    return out


def _rational_annihilator(basis_vectors: Sequence[Sequence[Fraction]],
                          dim: int) -> rla.Mat:
    """Rows spanning {q : q . v = 0 for each given v}; its kernel is
    exactly the rational span of the given vectors."""
    rows = [[Fraction(x) for x in v] for v in basis_vectors]
    comp = rla.nullspace(rows) if rows else [list(r) for r in rla.identity(dim)]
    return [list(v) for v in comp]


def block_difference_subspaces(fam: TransitionFamily, diff_space: Subspace,
                               split: SpectralSplit, origin: Sequence | None = None,
                               strategy: str = "auto", max_depth: int = 3,
                               rng_seed: int = 7) -> list[Subspace]:
    """One invariant subspace per spectral block of the dilation, spanned
    by differences of sample vectors taken along that block's root
    subspace.

    Strategy ladder: (a) when the family restricted to the difference
    subspace is irreducible, every block subspace equals the whole
    difference subspace; (b) for blocks whose root subspace has a
    rational basis, differences of exact sample vectors at grid points
    are closed under the family (exact); (c) otherwise sample vectors
    are approximated along a float witness direction and the span is
    extracted at two tolerances, flagged approximate; disagreement
    between the tolerances raises StrategyInconclusiveError.
    """
    labels = [f"U_{i + 1}" for i in range(split.q)]
    if diff_space.is_zero:
        return [Subspace(ambient_dim=fam.size, columns=(), label=lab)
                for lab in labels]
    if split.q == 1:
        return [Subspace(ambient_dim=fam.size, columns=diff_space.columns,
                         label=labels[0])]
    if strategy in ("auto", "irreducible"):
        rf = restrict(fam, diff_space)
        verdict = irreducibility_test(rf, rng_seed=rng_seed)
        if verdict.kind == "Irreducible":
            return [Subspace(ambient_dim=fam.size, columns=diff_space.columns,
                             label=lab) for lab in labels]
        if strategy == "irreducible":
            raise StrategyInconclusiveError(
                "restricted family is not certifiably irreducible: "
                + verdict.details)
    if origin is None:
        res = origin_eigenvector(fam)
        if res.vector is None:
            raise TransitionError(
                "block subspaces need a unique origin eigenvector; "
                f"status {res.status}: pass one explicitly")
        origin = res.vector
    out: list[Subspace] = []
    samples_cache: dict[int, list] = {}
    for i in range(split.q):
        rational_basis = split.rational_bases[i]
        if rational_basis is not None and strategy != "numeric":
            sub = _block_subspace_exact(fam, diff_space, rational_basis, origin,
                                        max_depth, labels[i], samples_cache)
        else:
            sub = _block_subspace_numeric(fam, split, i, origin, labels[i],
                                          rng_seed)
        out.append(sub)
    return out


def _block_subspace_exact(fam: TransitionFamily, diff_space: Subspace,
                          rational_basis, origin, max_depth: int, label: str,
                          samples_cache: dict) -> Subspace:
    s = fam.dil.dim
    annihilator = _rational_annihilator(rational_basis, s)
    prev_dim = -1
    kept: list[tuple] = []
    for depth in range(1, max_depth + 1):
        if depth not in samples_cache:
            samples_cache[depth] = _adic_samples(fam, list(origin), depth)
        samples = samples_cache[depth]
        buckets: dict[tuple, list] = {}
        for pt, vec in samples:
            key = tuple(rla.dot(row, list(pt)) for row in annihilator) \
                if annihilator else ()
            buckets.setdefault(key, []).append((pt, vec))
        seeds = []
        for group in buckets.values():
            base_pt, base_vec = group[0]
            for pt, vec in group[1:]:
                if pt == base_pt:
                    continue
                seeds.append(rla.vec_sub(list(vec), list(base_vec)))
        _, kept = _grow_invariant(fam.matrices, seeds, fam.size)
        if len(kept) == diff_space.dim or len(kept) == prev_dim:
            break
        prev_dim = len(kept)
    sub = Subspace(ambient_dim=fam.size, columns=tuple(kept), label=label)
    for col in sub.columns:
        if not diff_space.contains_vector(col):
            raise TransitionError(
                "block subspace escaped the difference subspace; "
                "the translate set is not closed")
    return sub


def _block_subspace_numeric(fam: TransitionFamily, split: SpectralSplit,
                            block: int, origin, label: str,
                            rng_seed: int) -> Subspace:
    rng = random.Random(rng_seed + block)
    np_mats = fam.as_numpy()
    v0 = np.array([float(x) for x in origin])
    witness = np.array(split.bases[block][:, 0], dtype=float)
    digits = [np.array(d, dtype=float) for d in fam.digits.digits]
    minv = np.array([[float(x) for x in row] for row in fam.dil.inv_mat()])
    m_fl = np.array([[float(x) for x in row] for row in fam.dil.mat()])

    def approx_vector(y: np.ndarray, steps: int = 24) -> np.ndarray:
        z = y.copy()
        address = []
        for _ in range(steps):
            img = m_fl @ z
            best = min(range(len(digits)),
                       key=lambda i: float(np.linalg.norm(img - digits[i])))
            address.append(best)
            z = img - digits[best]
        w = v0.copy()
        for idx in reversed(address):
            w = np_mats[idx] @ w
        return w

    anchors = []
    exact = _adic_samples(fam, list(origin), 2)
    for pt, vec in exact[: min(len(exact), 8)]:
        anchors.append((np.array([float(x) for x in pt]),
                        np.array([float(x) for x in vec])))
    diffs = []
    for base_pt, base_vec in anchors:
        for _ in range(6):
            eps = rng.uniform(0.05, 0.6) * rng.choice((-1.0, 1.0))
            y = base_pt + eps * witness
            diffs.append(approx_vector(y) - base_vec)
    stack = np.array(diffs).T
    _, svals, _ = np.linalg.svd(stack, full_matrices=False)
    top = svals[0] if len(svals) else 0.0
    ranks = []
    for tol in (1e-8, 1e-10):
        ranks.append(int(np.sum(svals > tol * max(top, 1.0))) if top else 0)
    if ranks[0] != ranks[1]:
        raise StrategyInconclusiveError(
            f"rank estimate unstable across tolerances: {ranks[0]} vs {ranks[1]}",
            candidate_dims=(ranks[0], ranks[1]))
    u, _, _ = np.linalg.svd(stack, full_matrices=False)
    seeds = [u[:, j] for j in range(ranks[0])]
    basis = _numeric_closure(np_mats, seeds, tol=1e-10)
    cols = [tuple(float(x) for x in basis[:, j]) for j in range(basis.shape[1])]
    return Subspace(ambient_dim=fam.size, columns=tuple(cols), label=label,
                    approximate=True, tolerance=1e-8)
