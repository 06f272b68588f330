"""Integer dilation matrices, digit sets, and self-affine geometry.

The objects here describe the ambient setup of a refinement equation:
an integer expansive dilation matrix, a digit set forming a complete
residue system, and the self-affine attractors driven by them (the tile
of the digit set and the support hull of a mask).  All set-level
questions are answered conservatively: "disjoint" and "intersecting"
answers are certified with exact rational arithmetic, everything else
is reported as unknown.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from . import ratlinalg as rla
from .ratlinalg import Fraction as _F  # noqa: F401  (re-export convenience)

IntVec = tuple[int, ...]


class LatticeError(Exception):
    """Base class for validation failures in this module."""


class NotSquareError(LatticeError):
    pass


class NotIntegerError(LatticeError):
    pass


class NotExpansiveError(LatticeError):
    pass


class DeterminantTooSmallError(LatticeError):
    pass


class BadDigitSetError(LatticeError):
    pass


class AmbiguousGroupingError(LatticeError):
    """Eigenvalue moduli too close to cluster reliably."""


def sqrt_upper(q: Fraction, scale: int = 10**12) -> Fraction:
    """Certified rational upper bound on sqrt(q) for q >= 0."""
    if q < 0:
        raise ValueError("negative argument")
    if q == 0:
        return Fraction(0)
    n = q.numerator * scale * scale
    d = q.denominator
    # sqrt(q) = sqrt(n/d)/scale = sqrt(n*d)/(d*scale)
    r = math.isqrt(n * d)
    if r * r < n * d:
        r += 1
    return Fraction(r, d * scale)


def sqrt_lower(q: Fraction, scale: int = 10**12) -> Fraction:
    """Certified rational lower bound on sqrt(q) for q >= 0."""
    if q < 0:
        raise ValueError("negative argument")
    if q == 0:
        return Fraction(0)
    n = q.numerator * scale * scale
    d = q.denominator
    r = math.isqrt(n * d)
    return Fraction(r, d * scale)


def _norm_sq(v) -> Fraction:
    return sum((Fraction(x) * Fraction(x) for x in v), Fraction(0))


def frobenius_sq(a: rla.Mat) -> Fraction:
    return sum((x * x for row in a for x in row), Fraction(0))


@dataclass(frozen=True)
class DilationData:
    """Validated integer expansive dilation matrix with contraction data.

    ``contraction_power`` is the smallest k such that the certified
    Frobenius bound on ||M^-k|| drops below 1, and ``contraction_factor``
    is that bound.  Both are exact rationals and safe to use in ball
    radius formulas.
    """

    matrix: tuple[IntVec, ...]
    dim: int
    det: int
    m: int
    inverse: tuple[tuple[Fraction, ...], ...]
    contraction_power: int
    contraction_factor: Fraction

    def mat(self) -> rla.Mat:
        return [[Fraction(x) for x in row] for row in self.matrix]

    def inv_mat(self) -> rla.Mat:
        return [list(row) for row in self.inverse]

    def apply(self, v) -> list[Fraction]:
        return rla.matvec(self.mat(), [Fraction(x) for x in v])

    def apply_inv(self, v) -> list[Fraction]:
        return rla.matvec(self.inv_mat(), [Fraction(x) for x in v])

    def inv_power(self, k: int) -> rla.Mat:
        out = rla.identity(self.dim)
        for _ in range(k):
            out = rla.matmul(self.inv_mat(), out)
        return out

    def inv_power_norm_upper(self, k: int) -> Fraction:
        """Certified upper bound on the spectral norm of M^-k."""
        blocks, rem = divmod(k, self.contraction_power)
        base = self.contraction_factor ** blocks
        if rem:
            base *= sqrt_upper(frobenius_sq(self.inv_power(rem)))
        return base


def validate_dilation(matrix) -> DilationData:
    """Validate an integer expansive matrix and derive contraction data.

    Raises NotSquareError / NotIntegerError / NotExpansiveError /
    DeterminantTooSmallError.
    """
    rows = list(matrix)
    s = len(rows)
    if s == 0 or any(len(r) != s for r in rows):
        raise NotSquareError("dilation matrix must be square and nonempty")
    try:
        im = tuple(tuple(int(x) for x in r) for r in rows)
    except (TypeError, ValueError) as exc:
        raise NotIntegerError(f"dilation entries must be integers: {exc}") from None
    for r, ir in zip(rows, im):
        for x, ix in zip(r, ir):
            if Fraction(x) != ix:
                raise NotIntegerError(f"dilation entry {x!r} is not an integer")

    fm = [[Fraction(x) for x in r] for r in im]
    d = rla.det(fm)
    det_int = int(d)
    if d != det_int:  # pragma: no cover - determinant of ints is an int
        raise NotIntegerError("integer matrix with non-integer determinant")
    if det_int == 0:
        raise DeterminantTooSmallError("dilation matrix is singular")
    m = abs(det_int)
    if m < 2:
        raise DeterminantTooSmallError(
            f"|det M| = {m}; need at least 2 so the residue lattice is nontrivial")

    eigs = np.linalg.eigvals(np.array(im, dtype=float))
    margin = 1e-9
    if any(abs(ev) <= 1.0 + margin for ev in eigs):
        raise NotExpansiveError(
            "all eigenvalues must satisfy |lambda| > 1; got moduli "
            + str(sorted(round(abs(e), 12) for e in eigs)))

    inv = rla.inverse(fm)
    k0 = None
    power = rla.identity(s)
    for k in range(1, 65):
        power = rla.matmul(inv, power)
        fsq = frobenius_sq(power)
        if fsq < 1:
            theta = sqrt_upper(fsq)
            if theta < 1:
                k0 = k
                break
    if k0 is None:  # pragma: no cover - expansive matrices always contract
        raise NotExpansiveError("no contracting power of M^-1 found up to k=64")
    return DilationData(
        matrix=im, dim=s, det=det_int, m=m,
        inverse=tuple(tuple(row) for row in inv),
        contraction_power=k0, contraction_factor=theta,
    )


# ---------------------------------------------------------------------------
# spectral split of the dilation


@dataclass(frozen=True)
class SpectralSplit:
    """Root subspaces of M grouped by eigenvalue modulus, ascending.

    ``bases[i]`` is an orthonormal float basis of the i-th root subspace,
    ``block_matrices[i]`` the action of M on it in that basis, and
    ``rational_bases[i]`` an exact rational basis when the subspace is
    defined over the rationals (None otherwise).
    """

    moduli: tuple[float, ...]
    dims: tuple[int, ...]
    eigenvalues: tuple[tuple[complex, ...], ...]
    bases: tuple[np.ndarray, ...]
    block_matrices: tuple[np.ndarray, ...]
    rational_bases: tuple[tuple[tuple[Fraction, ...], ...] | None, ...]
    transform: np.ndarray  # columns: concatenated bases
    spectral_radius: float

    @property
    def q(self) -> int:
        return len(self.moduli)

    def is_isotropic(self, tol: float = 1e-9) -> bool:
        return self.q == 1


def _cluster(values: list[float], rel_tol: float) -> list[list[int]]:
    """Cluster sorted scalar values whose gaps are below rel_tol."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(values[i] - values[groups[-1][-1]]) <= rel_tol * max(1.0, abs(values[i])):
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _rationalize_poly(coeffs: list[float], exact_char: list[Fraction]) -> list[Fraction] | None:
    """Try to recognize a float polynomial as an exact divisor of the
    characteristic polynomial.  Returns the exact coefficients or None."""
    for den_cap in (1, 10, 1000, 10**6, 10**9):
        cand = [Fraction(c).limit_denominator(den_cap) for c in coeffs]
        if any(abs(float(c) - f) > 1e-6 * max(1.0, abs(f)) for c, f in zip(cand, coeffs)):
            continue
        try:
            _, rem = rla.poly_divmod(exact_char, cand)
        except ZeroDivisionError:
            continue
        if not rem:
            return cand
    return None


def spectral_split(dil: DilationData, rel_tol: float = 1e-9) -> SpectralSplit:
    """Group eigenvalues of M by modulus and compute root subspace bases.

    Raises AmbiguousGroupingError when two moduli land in the band where
    they are neither reliably equal nor reliably distinct.
    """
    s = dil.dim
    fm = np.array(dil.matrix, dtype=float)
    eigs = np.linalg.eigvals(fm)
    moduli = [abs(e) for e in eigs]
    groups = _cluster(moduli, rel_tol)
    # ambiguity band: adjacent distinct groups closer than 1000x the tol
    reps = sorted(float(np.mean([moduli[i] for i in g])) for g in groups)
    for a, b in zip(reps, reps[1:]):
        if b - a <= 1000 * rel_tol * max(1.0, b) and b - a > 0:
            raise AmbiguousGroupingError(
                f"eigenvalue moduli {a!r} and {b!r} are too close to separate "
                f"at relative tolerance {rel_tol}")

    exact_char = rla.charpoly(dil.mat())
    bases = []
    blocks = []
    rat_bases = []
    grouped_eigs = []
    dims = []
    group_moduli = []
    for g in sorted(groups, key=lambda g: moduli[g[0]]):
        evs = [complex(eigs[i]) for i in g]
        n_i = len(g)
        # real polynomial with exactly these roots: pair conjugates
        poly = np.array([1.0])
        used = [False] * n_i
        for idx, ev in enumerate(evs):
            if used[idx]:
                continue
            if abs(ev.imag) < 1e-10:
                poly = np.convolve(poly, [1.0, -ev.real])
                used[idx] = True
            else:
                used[idx] = True
                # find unused conjugate partner
                for jdx in range(idx + 1, n_i):
                    if not used[jdx] and abs(evs[jdx].conjugate() - ev) < 1e-8 * max(1.0, abs(ev)):
                        used[jdx] = True
                        break
                else:  # pragma: no cover - conjugates always pair for real M
                    raise AmbiguousGroupingError("unpaired complex eigenvalue")
                poly = np.convolve(poly, [1.0, -2 * ev.real, abs(ev) ** 2])
        pm = np.zeros_like(fm)
        for c in poly:
            pm = pm @ fm
            pm += c * np.eye(s)
        # kernel of p(M): dimension is known (= n_i), take smallest singular vectors
        _, sv, vt = np.linalg.svd(pm)
        basis = vt[s - n_i:].T  # orthonormal columns spanning the root subspace
        block = basis.T @ fm @ basis
        resid = np.linalg.norm(fm @ basis - basis @ block)
        if resid > 1e-7 * max(1.0, np.linalg.norm(fm)):
            raise AmbiguousGroupingError(
                f"root subspace for modulus {abs(evs[0])!r} failed the "
                f"invariance check (residual {resid:.2e})")
        rat = _rationalize_poly([float(c) for c in poly], exact_char)
        rbasis = None
        if rat is not None:
            pm_exact = rla.poly_eval_matrix(rat, dil.mat())
            null = rla.nullspace(pm_exact)
            if len(null) == n_i:
                rbasis = tuple(tuple(v) for v in null)
        bases.append(basis)
        blocks.append(block)
        rat_bases.append(rbasis)
        grouped_eigs.append(tuple(evs))
        dims.append(n_i)
        group_moduli.append(float(np.mean([abs(e) for e in evs])))

    transform = np.hstack(bases)
    return SpectralSplit(
        moduli=tuple(group_moduli), dims=tuple(dims),
        eigenvalues=tuple(grouped_eigs), bases=tuple(bases),
        block_matrices=tuple(blocks),
        rational_bases=tuple(rat_bases), transform=transform,
        spectral_radius=max(group_moduli),
    )


# ---------------------------------------------------------------------------
# digit sets


@dataclass(frozen=True)
class DigitSet:
    """Complete residue system for Z^s / M Z^s containing the origin."""

    digits: tuple[IntVec, ...]

    @property
    def count(self) -> int:
        return len(self.digits)

    def index(self, d: IntVec) -> int:
        return self.digits.index(tuple(d))


def _residue_key(dil: DilationData, k) -> tuple[Fraction, ...]:
    """Canonical residue fingerprint: fractional part of M^-1 k."""
    y = dil.apply_inv([Fraction(x) for x in k])
    return tuple(c - Fraction(math.floor(c)) for c in y)


def verify_digit_set(dil: DilationData, digits) -> DigitSet:
    """Check that ``digits`` is a complete residue system containing 0.

    Raises BadDigitSetError with a witness on failure.
    """
    ds = tuple(tuple(int(x) for x in d) for d in digits)
    for d in ds:
        if len(d) != dil.dim:
            raise BadDigitSetError(f"digit {d} has wrong dimension")
    if len(ds) != dil.m:
        raise BadDigitSetError(
            f"digit set has {len(ds)} elements; |det M| = {dil.m} required")
    if tuple([0] * dil.dim) not in ds:
        raise BadDigitSetError("digit set must contain the origin")
    seen: dict[tuple[Fraction, ...], IntVec] = {}
    for d in ds:
        key = _residue_key(dil, d)
        if key in seen:
            raise BadDigitSetError(
                f"digits {seen[key]} and {d} are congruent modulo M Z^s")
        seen[key] = d
    return DigitSet(digits=ds)


def standard_digits(dil: DilationData) -> DigitSet:
    """The digit set Z^s intersected with M [0,1)^s."""
    s = dil.dim
    corners = [dil.apply([Fraction(c) for c in bits])
               for bits in itertools.product((0, 1), repeat=s)]
    lo = [min(int(math.floor(c[i])) for c in corners) for i in range(s)]
    hi = [max(int(math.ceil(c[i])) for c in corners) for i in range(s)]
    found = []
    for k in itertools.product(*[range(lo[i], hi[i] + 1) for i in range(s)]):
        y = dil.apply_inv([Fraction(x) for x in k])
        if all(0 <= c < 1 for c in y):
            found.append(tuple(k))
    found.sort()
    if len(found) != dil.m:  # pragma: no cover - counting argument guarantees m
        raise BadDigitSetError(
            f"standard digit enumeration found {len(found)} points, expected {dil.m}")
    return verify_digit_set(dil, found)


def residue_digit(dil: DilationData, digits: DigitSet, k) -> tuple[IntVec, list[Fraction]]:
    """Split an integer vector k as M j + d with d in the digit set.

    Returns (d, j).  Raises BadDigitSetError if no digit matches (which
    would mean the digit set is not a complete residue system).
    """
    key = _residue_key(dil, k)
    for d in digits.digits:
        if _residue_key(dil, d) == key:
            j = dil.apply_inv([Fraction(a) - b for a, b in zip(k, d)])
            return d, j
    raise BadDigitSetError(f"no digit congruent to {tuple(k)}")


# ---------------------------------------------------------------------------
# self-affine attractors, certified balls, cells


@dataclass(frozen=True)
class CertifiedBall:
    """Euclidean ball with exact rational center and certified radius bound."""

    center: tuple[Fraction, ...]
    radius: Fraction


@dataclass(frozen=True)
class Cell:
    """Image of the attractor under a digit word, plus an integer shift.

    The cell set is f_w(A) + shift where f_w composes x -> M^-1(x + g)
    over the word's generators, applied leftmost-first.
    """

    word: tuple[int, ...]
    shift: IntVec
    anchor: tuple[Fraction, ...]  # exact value of f_w(0) + shift


class IntersectKind(Enum):
    DISJOINT = "disjoint"
    INTERSECTING = "intersecting"
    UNKNOWN = "unknown"


class IfsGeometry:
    """Attractor of the maps x -> M^-1 (x + g) over a generator list.

    Used both for the digit-set tile and for the support hull of a mask.
    Exposes certified enclosing balls for cells and exact corner points
    (images of the single-generator fixed points).
    """

    def __init__(self, dil: DilationData, gens):
        self.dil = dil
        self.gens = tuple(tuple(int(x) for x in g) for g in gens)
        if not self.gens:
            raise ValueError("need at least one generator")
        s = dil.dim
        # fixed point of x -> M^-1(x+g) is (M - I)^-1 g
        mi = rla.mat_sub(dil.mat(), rla.identity(s))
        mi_inv = rla.inverse(mi)
        self.fixed_points = [tuple(rla.matvec(mi_inv, [Fraction(x) for x in g]))
                             for g in self.gens]
        self._norm_cache: dict[int, Fraction] = {}
        self.ball = self._attractor_ball()

    def _inv_norm_upper(self, k: int) -> Fraction:
        if k not in self._norm_cache:
            self._norm_cache[k] = self.dil.inv_power_norm_upper(k)
        return self._norm_cache[k]

    def _attractor_ball(self) -> CertifiedBall:
        """Ball around the origin containing the attractor.

        Splits digit expansions into blocks of length k0 (the certified
        contraction power); each block contributes at most R0 and the
        block scaling is bounded by the contraction factor.
        """
        dil = self.dil
        k0 = dil.contraction_power
        theta = dil.contraction_factor
        r0 = Fraction(0)
        if len(self.gens) ** k0 <= 4096:
            for word in itertools.product(range(len(self.gens)), repeat=k0):
                val = self.value(word)
                r0 = max(r0, sqrt_upper(_norm_sq(val)))
        else:
            gmax = max(sqrt_upper(_norm_sq(g)) for g in self.gens)
            for j in range(1, k0 + 1):
                r0 += self._inv_norm_upper(j) * gmax
        radius = r0 / (1 - theta)
        return CertifiedBall(center=tuple([Fraction(0)] * dil.dim), radius=radius)

    def value(self, word) -> tuple[Fraction, ...]:
        """Exact anchor of a digit word: sum of M^-j g_j, leftmost first."""
        val = [Fraction(0)] * self.dil.dim
        for idx in reversed(list(word)):
            g = self.gens[idx]
            val = self.dil.apply_inv([v + Fraction(x) for v, x in zip(val, g)])
        return tuple(val)

    def root_cell(self, shift=None) -> Cell:
        s = self.dil.dim
        sh = tuple(int(x) for x in (shift if shift is not None else [0] * s))
        return Cell(word=(), shift=sh,
                    anchor=tuple(Fraction(x) for x in sh))

    def children(self, cell: Cell) -> list[Cell]:
        out = []
        for idx in range(len(self.gens)):
            word = cell.word + (idx,)
            anchor = tuple(a + b for a, b in
                           zip(self.value(word), (Fraction(x) for x in cell.shift)))
            out.append(Cell(word=word, shift=cell.shift, anchor=anchor))
        return out

    def cell_ball(self, cell: Cell) -> CertifiedBall:
        k = len(cell.word)
        scale = self._inv_norm_upper(k) if k else Fraction(1)
        return CertifiedBall(center=cell.anchor, radius=scale * self.ball.radius)

    def corner_points(self, cell: Cell) -> list[tuple[Fraction, ...]]:
        """Exact attractor points inside the cell: images of the
        single-generator periodic tails."""
        k = len(cell.word)
        pts = []
        inv_k = self.dil.inv_power(k) if k else rla.identity(self.dil.dim)
        wval = self.value(cell.word)
        for p in self.fixed_points:
            img = rla.matvec(inv_k, list(p))
            pts.append(tuple(a + b + Fraction(sh) for a, b, sh in
                             zip(img, wval, cell.shift)))
        return pts


def balls_disjoint(a: CertifiedBall, b: CertifiedBall) -> bool:
    """Certified: True only when the balls provably do not meet."""
    dist_sq = _norm_sq([x - y for x, y in zip(a.center, b.center)])
    rad = a.radius + b.radius
    return dist_sq > rad * rad


def cells_intersect(geo_a: IfsGeometry, cell_a: Cell,
                    geo_b: IfsGeometry, cell_b: Cell,
                    max_depth: int = 12) -> IntersectKind:
    """Conservative branch-and-bound intersection test for two cells.

    DISJOINT and INTERSECTING are certified (ball separation with exact
    rational comparisons; an exhibited common rational point).  UNKNOWN
    means the budget ran out.
    """
    ball_a = geo_a.cell_ball(cell_a)
    ball_b = geo_b.cell_ball(cell_b)
    if balls_disjoint(ball_a, ball_b):
        return IntersectKind.DISJOINT
    pa = set(geo_a.corner_points(cell_a))
    pb = set(geo_b.corner_points(cell_b))
    if pa & pb:
        return IntersectKind.INTERSECTING
    if max_depth <= 0:
        return IntersectKind.UNKNOWN
    # split the fatter cell
    if ball_a.radius >= ball_b.radius:
        kids = geo_a.children(cell_a)
        results = [cells_intersect(geo_a, k, geo_b, cell_b, max_depth - 1)
                   for k in kids]
    else:
        kids = geo_b.children(cell_b)
        results = [cells_intersect(geo_a, cell_a, geo_b, k, max_depth - 1)
                   for k in kids]
    if any(r is IntersectKind.INTERSECTING for r in results):
        return IntersectKind.INTERSECTING
    if all(r is IntersectKind.DISJOINT for r in results):
        return IntersectKind.DISJOINT
    return IntersectKind.UNKNOWN


_cycle_memo_cache: dict = {}


def attractor_membership(geo: IfsGeometry, denominator: int,
                         max_states: int = 60000):
    """Membership oracle for rational points sharing a fixed denominator.

    Returns a callable mapping the integer numerator vector of a point
    y = Y/denominator to an IntersectKind.  A point lies in the
    attractor iff the digit-expansion graph (state y, edges y -> My - g
    kept while the result stays inside the certified ball) admits an
    infinite path from it: the path prefixes reproduce the point exactly
    as f_{g_1..g_k}(y_k), and the tails shrink to zero.  The state
    denominator never grows, so the reachable graph is finite and
    "admits an infinite path" reduces to "can reach a cycle".  That
    verdict is a global property of each state, so it is memoized across
    queries sharing the geometry and denominator: a True verdict
    exhibits a cycle, a False verdict comes from an exhausted acyclic
    search, and both stay valid for later queries.  Everything is
    integer arithmetic on numerators, so both verdicts are certified;
    UNKNOWN only on blown per-query state budget.
    """
    s = geo.dil.dim
    q = denominator
    rsq = geo.ball.radius ** 2
    # inside-ball test over integers: sum Y_i^2 * rsq_den <= rsq_num * q^2
    bound = rsq.numerator * q * q
    rden = rsq.denominator
    mat = geo.dil.matrix
    gens_scaled = [tuple(q * int(x) for x in g) for g in geo.gens]
    memo = _cycle_memo_cache.setdefault((geo, q), {})

    def inside(y: tuple[int, ...]) -> bool:
        return sum(v * v for v in y) * rden <= bound

    def kids_of(y: tuple[int, ...]) -> list[tuple[int, ...]]:
        my = tuple(sum(mat[i][j] * y[j] for j in range(s)) for i in range(s))
        return [z for z in (tuple(a - b for a, b in zip(my, g)) for g in gens_scaled)
                if inside(z)]

    def query(start: tuple[int, ...]) -> IntersectKind:
        if not inside(start):
            return IntersectKind.DISJOINT
        got = memo.get(start)
        if got is not None:
            return IntersectKind.INTERSECTING if got else IntersectKind.DISJOINT

        # Iterative tri-color DFS: gray = on the current path, memo =
        # finished.  An edge into a gray state closes a cycle, so every
        # frame on the path below it reaches that cycle; True
        # short-circuits remaining children.
        gray: set[tuple[int, ...]] = {start}
        frames: list[list] = [[start, kids_of(start), 0, False]]
        explored = 1
        while frames:
            frame = frames[-1]
            node, kids, idx, found = frame
            if found:
                memo[node] = True
                gray.discard(node)
                frames.pop()
                if frames:
                    frames[-1][3] = True
                continue
            if idx >= len(kids):
                memo[node] = False
                gray.discard(node)
                frames.pop()
                continue
            frame[2] += 1
            child = kids[idx]
            if child in gray:
                frame[3] = True
            elif child in memo:
                frame[3] = found or memo[child]
            else:
                explored += 1
                if explored > max_states:
                    return IntersectKind.UNKNOWN
                gray.add(child)
                frames.append([child, kids_of(child), 0, False])
        return IntersectKind.INTERSECTING if memo[start] else IntersectKind.DISJOINT

    return query


def point_in_attractor(geo: IfsGeometry, point, max_states: int = 60000) -> IntersectKind:
    """Exact membership test for a single rational point in the attractor.

    Convenience wrapper over attractor_membership: normalizes the point
    to integer numerators over its reduced common denominator and runs
    one query.  Callers testing many points with a shared denominator
    should hold on to the attractor_membership oracle instead, which
    amortizes the setup and the state-graph walks.
    """
    start_fr = [Fraction(x) for x in point]
    q = 1
    for x in start_fr:
        q = q * x.denominator // math.gcd(q, x.denominator)
    start = tuple(int(x * q) for x in start_fr)
    return attractor_membership(geo, q, max_states)(start)

def tile_layer_estimate(dil: DilationData, digits: DigitSet,
                        samples: int = 200, depth: int = 28,
                        seed: int = 0) -> dict:
    """Monte Carlo estimate of the covering multiplicity of the digit tile.

    For almost every x the translates of the tile should cover x exactly
    once; values far from 1 flag a digit set whose attractor is not a
    tile.  Diagnostic only: uses float arithmetic with generous slack.
    """
    geo = IfsGeometry(dil, digits.digits)
    rng = random.Random(seed)
    s = dil.dim
    fm = np.array(dil.matrix, dtype=float)
    gens = np.array(digits.digits, dtype=float)
    rad = float(geo.ball.radius) + 1e-9
    span = int(math.ceil(rad)) + 1
    counts = []
    ambiguous = 0
    for _ in range(samples):
        x = np.array([rng.random() for _ in range(s)])
        hits = 0
        for k in itertools.product(range(-span, span + 1), repeat=s):
            y = x + np.array(k, dtype=float)
            if float(np.dot(y, y)) > rad * rad:
                continue
            frontier = [y]
            alive = False
            for _ in range(depth):
                nxt = []
                for z in frontier:
                    mz = fm @ z
                    for g in gens:
                        w = mz - g
                        if float(np.dot(w, w)) <= (rad + 1e-7) ** 2:
                            nxt.append(w)
                if not nxt:
                    break
                if len(nxt) > 64:
                    nxt = nxt[:64]
                frontier = nxt
            else:
                alive = True
            if alive:
                hits += 1
        counts.append(hits)
        if hits != 1:
            ambiguous += 1
    return {
        "mean_layers": float(np.mean(counts)),
        "min_layers": int(min(counts)),
        "max_layers": int(max(counts)),
        "off_by_one_fraction": ambiguous / samples,
        "samples": samples,
    }
