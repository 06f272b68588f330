"""Joint spectral radius, p-radius, and resonance degrees of matrix families.

The regularity exponents of a refinable function are logarithms of two
quantities attached to the restricted transition family: the joint
spectral radius (supremum growth rate of arbitrary products) governs
uniform exponents, the p-radius (averaged growth rate) governs L_p
exponents, and resonance degrees count logarithmic corrections.

Provided here: brute-force two-sided JSR bounds with deterministic word
enumeration, exact JSR certification by the invariant-polytope
iteration, the exact even-p symmetric-tensor lift, the Perron-mean
identity for p = 1 over sign-normalizable families (with an exact
invariant-cone search when plain diagonal sign patterns fail), generic
p-radius bounds, and Jordan/valency resonance degrees.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import ratlinalg as rla
from .transition import (
    RestrictedFamily,
    TransitionFamily,
    _poly_eval,
    _primitive,
    frobenius_factorization,
    irreducibility_test,
)


class SpectralError(Exception):
    pass


class DimensionOverflowError(SpectralError):
    """Symmetric tensor dimension beyond the configured cap."""


class NotSignNormalizableError(SpectralError):
    """No sign normalization making the family entrywise nonnegative."""


class RankAmbiguousError(SpectralError):
    """Jordan rank staircase unstable across tolerances."""


class ResonanceInconclusiveError(SpectralError):
    """Block factorization could not be completed."""


# ---------------------------------------------------------------------------
# result types


@dataclass(eq=False)
class JsrResult:
    lower: float
    upper: float
    certified: bool
    method: str                          # "bounds" | "invariant-polytope" | "bounds-fallback"
    smp_word: tuple[int, ...] | None = None
    polytope_vertices: int | None = None
    iterations: int = 0
    notes: str = ""

    @property
    def value(self) -> float:
        return self.lower if self.certified else 0.5 * (self.lower + self.upper)


@dataclass(eq=False)
class PRadiusResult:
    p: float
    method: str                          # "EvenLift" | "PerronMean" | "Bounds"
    value: float | None
    lower: float
    upper: float
    notes: str = ""


@dataclass(eq=False)
class ResonanceInfo:
    value_or_bound: int
    exact: bool
    method: str                          # "JordanSingle" | "ValencyBound" | "IrreducibleZero"
    notes: str = ""


# ---------------------------------------------------------------------------
# conversions and small helpers


def _as_numpy(family) -> list[np.ndarray]:
    if isinstance(family, (RestrictedFamily, TransitionFamily)):
        return family.as_numpy()
    out = []
    for m in family:
        if isinstance(m, np.ndarray):
            out.append(m.astype(float))
        else:
            out.append(np.array([[float(x) for x in row] for row in m], dtype=float))
    return out


def _as_fractions(family) -> list[rla.Mat]:
    if isinstance(family, (RestrictedFamily, TransitionFamily)):
        return [rla.mat_copy(m) for m in family.matrices]
    return [[[Fraction(x) for x in row] for row in m] for m in family]


def spectral_radius(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(max(abs(np.linalg.eigvals(a))))


def _spectral_norm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


# ---------------------------------------------------------------------------
# joint spectral radius: brute bounds


def jsr_bounds(family, max_len: int = 8, level_cap: int = 60000) -> JsrResult:
    """Two-sided bounds from exhaustive products.

    Lower bound: the largest per-length-normalized spectral radius of any
    enumerated product.  Upper bound: the smallest over fully enumerated
    lengths k of the largest product norm to the power 1/k (valid by
    submultiplicativity).  When a level would exceed the cap, deepening
    continues on a beam of the largest-norm products: those levels still
    sharpen the lower bound but are excluded from the upper bound, which
    keeps both bounds correct and monotone in max_len.
    """
    mats = _as_numpy(family)
    if not mats:
        raise SpectralError("empty family")
    n = mats[0].shape[0]
    if n == 0:
        return JsrResult(lower=0.0, upper=0.0, certified=True, method="bounds",
                         notes="zero-dimensional family")
    m = len(mats)
    lower = 0.0
    best_word: tuple[int, ...] | None = None
    upper = math.inf
    level: list[tuple[tuple[int, ...], np.ndarray]] = [((), np.eye(n))]
    exhaustive = True
    for k in range(1, max_len + 1):
        if exhaustive and len(level) * m > level_cap:
            exhaustive = False
            level = sorted(level, key=lambda t: (-_spectral_norm(t[1]), t[0]))
            level = level[: max(1, level_cap // m)]
        nxt = []
        for word, prod in level:
            for d in range(m):
                nxt.append((word + (d,), prod @ mats[d]))
        level = nxt
        level_norm = 0.0
        for word, prod in level:
            level_norm = max(level_norm, _spectral_norm(prod))
            val = spectral_radius(prod) ** (1.0 / k)
            if val > lower * (1 + 1e-15) or best_word is None:
                lower = max(lower, val)
                if val >= lower:
                    best_word = word
        if exhaustive:
            upper = min(upper, level_norm ** (1.0 / k))
    if math.isinf(upper):
        upper = max(_spectral_norm(a) for a in mats)
    upper = max(upper, lower)       # guard against float round-off crossings
    certified = upper <= lower * (1 + 1e-12) + 1e-300
    return JsrResult(lower=lower, upper=upper, certified=certified,
                     method="bounds", smp_word=best_word,
                     iterations=max_len)


def _word_product(mats: Sequence[np.ndarray], word: Sequence[int]) -> np.ndarray:
    prod = np.eye(mats[0].shape[0])
    for d in word:
        prod = prod @ mats[d]
    return prod


def _smp_candidate(mats: list[np.ndarray], search_len: int,
                   level_cap: int = 60000) -> tuple[int, ...]:
    """Deterministic spectrum-maximizing-product candidate: the word with
    the largest normalized spectral radius, shorter words preferred on
    ties, lexicographic order breaking remaining ties."""
    m = len(mats)
    n = mats[0].shape[0]
    best: tuple[float, int, tuple[int, ...]] | None = None
    level: list[tuple[tuple[int, ...], np.ndarray]] = [((), np.eye(n))]
    for k in range(1, search_len + 1):
        if len(level) * m > level_cap:
            break
        nxt = []
        for word, prod in level:
            for d in range(m):
                nxt.append((word + (d,), prod @ mats[d]))
        level = nxt
        for word, prod in level:
            val = spectral_radius(prod) ** (1.0 / k)
            key = (val, -k, word)
            if best is None or val > best[0] * (1 + 1e-12):
                best = (val, k, word)
            elif abs(val - best[0]) <= best[0] * 1e-12 and k < best[1]:
                best = (val, k, word)
    assert best is not None
    return best[2]


# ---------------------------------------------------------------------------
# invariant polytope certification


def _in_symmetric_hull(point: np.ndarray, vertices: list[np.ndarray],
                       slack: float) -> bool:
    """Feasibility test: is the point an absolutely convex combination of
    the vertices (coefficient magnitudes summing to at most 1 + slack)?"""
    if not vertices:
        return False
    v = np.array(vertices).T                 # n x V
    nv = v.shape[1]
    c = np.ones(2 * nv)
    a_eq = np.hstack([v, -v])
    res = linprog(c, A_eq=a_eq, b_eq=point, bounds=(0, None), method="highs")
    if not res.success:
        return False
    return float(res.fun) <= 1.0 + slack


def _is_duplicate(point: np.ndarray, pool: list[np.ndarray], dedup: float) -> bool:
    scale = max(1.0, float(np.linalg.norm(point)))
    for v in pool:
        if min(np.linalg.norm(point - v), np.linalg.norm(point + v)) <= dedup * scale:
            return True
    return False


def invariant_polytope(family, candidate: Sequence[int] | None = None,
                       search_len: int = 8, max_vertices: int = 4000,
                       max_iters: int = 80, slack: float = 1e-10,
                       dedup: float = 1e-9) -> JsrResult:
    """Certify the joint spectral radius at a candidate product.

    The family is normalized by the candidate's per-length value; the
    leading eigenvector of the candidate product seeds a vertex set that
    is swept with all matrices, adding every image that falls outside
    the symmetric convex hull (linear-program membership test).  A sweep
    that adds nothing proves the hull invariant, so the normalized
    radius is at most 1 and the candidate value is exact.  Divergence or
    cap overruns fall back to brute bounds, with the reason recorded.
    """
    mats = _as_numpy(family)
    if not mats:
        raise SpectralError("empty family")
    n = mats[0].shape[0]
    if n == 0:
        return JsrResult(lower=0.0, upper=0.0, certified=True,
                         method="invariant-polytope", polytope_vertices=0,
                         notes="zero-dimensional family")

    def fallback(reason: str, lower_hint: float = 0.0) -> JsrResult:
        br = jsr_bounds(family, max_len=min(search_len, 8))
        return JsrResult(lower=max(br.lower, lower_hint), upper=br.upper,
                         certified=False, method="bounds-fallback",
                         smp_word=tuple(candidate) if candidate else br.smp_word,
                         iterations=br.iterations, notes=reason)

    if candidate is None:
        candidate = _smp_candidate(mats, search_len)
    candidate = tuple(int(d) for d in candidate)
    prod = _word_product(mats, candidate)
    rho = spectral_radius(prod)
    if rho <= 0.0:
        return fallback("candidate product has spectral radius zero")
    value = rho ** (1.0 / len(candidate))

    eigvals, eigvecs = np.linalg.eig(prod)
    lead = int(np.argmax(np.abs(eigvals)))
    lam = eigvals[lead]
    if abs(lam.imag) > 1e-9 * abs(lam):
        return fallback("NoRealLeadingEigenvector: leading eigenvalue is a "
                        "complex pair", lower_hint=value)
    vec = eigvecs[:, lead]
    pivot = int(np.argmax(np.abs(vec)))
    vec = vec / vec[pivot]
    if float(np.linalg.norm(vec.imag)) > 1e-9 * float(np.linalg.norm(vec)):
        return fallback("NoRealLeadingEigenvector: leading eigenvector is not "
                        "real", lower_hint=value)
    seed = vec.real / np.linalg.norm(vec.real)

    normalized = [a / value for a in mats]
    vertices: list[np.ndarray] = [seed]
    frontier: list[np.ndarray] = [seed]
    iterations = 0
    while frontier:
        if iterations >= max_iters:
            return fallback(f"CapsExceeded: {max_iters} sweeps without "
                            "convergence", lower_hint=value)
        iterations += 1
        batch: list[np.ndarray] = []
        for v in frontier:
            for a in normalized:
                y = a @ v
                norm = float(np.linalg.norm(y))
                if norm <= dedup:
                    continue
                if norm > 1e6:
                    return fallback("CapsExceeded: iterates escape, candidate "
                                    "is not spectrum-maximizing",
                                    lower_hint=value)
                if _is_duplicate(y, vertices, dedup) or _is_duplicate(y, batch, dedup):
                    continue
                if _in_symmetric_hull(y, vertices, slack):
                    continue
                batch.append(y)
                if len(vertices) + len(batch) > max_vertices:
                    return fallback(f"CapsExceeded: more than {max_vertices} "
                                    "vertices", lower_hint=value)
        batch.sort(key=lambda y: tuple(np.round(y, 12)))
        vertices.extend(batch)
        frontier = batch

    # The invariant hull bounds the family only on the span of its
    # vertices.  If that span is proper, the span is a common invariant
    # subspace (images of vertices stay in the hull), the restriction has
    # joint radius exactly `value` (hull gives <=, the leading eigenvector
    # inside the span gives >=), and the quotient action on the orthogonal
    # complement must be certified separately; the family's radius is the
    # max of the two.
    vmat = np.column_stack(vertices)
    svals = np.linalg.svd(vmat, compute_uv=False)
    rank = int(np.sum(svals > max(vmat.shape) * svals[0] * 1e-11))
    if rank < n:
        u_full, _, _ = np.linalg.svd(vmat, full_matrices=True)
        qperp = u_full[:, rank:]
        quotient = [qperp.T @ a @ qperp for a in mats]
        sub = invariant_polytope(quotient, search_len=search_len,
                                 max_vertices=max_vertices, max_iters=max_iters,
                                 slack=slack, dedup=dedup)
        lower = max(value, sub.lower)
        upper = max(value, sub.upper)
        tag = (f"degenerate hull spans a rank-{rank} subspace of R^{n}; "
               f"quotient of dimension {n - rank} handled recursively")
        if sub.certified:
            return JsrResult(lower=upper, upper=upper, certified=True,
                             method="invariant-polytope", smp_word=candidate,
                             polytope_vertices=len(vertices) + sub.polytope_vertices,
                             iterations=iterations + sub.iterations,
                             notes=f"{tag}; quotient certified at {sub.upper:.12g}; "
                                   f"hull invariant after {iterations} sweeps")
        return JsrResult(lower=lower, upper=upper, certified=False,
                         method="bounds-fallback", smp_word=candidate,
                         polytope_vertices=len(vertices) + sub.polytope_vertices,
                         iterations=iterations + sub.iterations,
                         notes=f"{tag}; quotient not certified ({sub.notes})")
    return JsrResult(lower=value, upper=value, certified=True,
                     method="invariant-polytope", smp_word=candidate,
                     polytope_vertices=len(vertices), iterations=iterations,
                     notes=f"hull invariant after {iterations} sweeps; "
                           f"membership slack {slack:g}, dedup {dedup:g}")


# ---------------------------------------------------------------------------
# p-radius


def _symmetric_indices(n: int, p: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations_with_replacement(range(n), p))


def symmetric_lift(a: np.ndarray, p: int) -> np.ndarray:
    """Induced action on symmetric p-tensors in the monomial basis of
    sorted multi-indices: entry (alpha, beta) is the coefficient of the
    beta monomial in the product of the linear forms (A x)_i, i in alpha."""
    n = a.shape[0]
    idx = _symmetric_indices(n, p)
    pos = {mi: i for i, mi in enumerate(idx)}
    dim = len(idx)
    out = np.zeros((dim, dim))
    for r, alpha in enumerate(idx):
        poly: dict[tuple[int, ...], float] = {(): 1.0}
        for i in alpha:
            nxt: dict[tuple[int, ...], float] = {}
            for mono, coef in poly.items():
                row = a[i]
                for k in range(n):
                    if row[k] == 0.0:
                        continue
                    key = tuple(sorted(mono + (k,)))
                    nxt[key] = nxt.get(key, 0.0) + coef * row[k]
            poly = nxt
        for mono, coef in poly.items():
            out[r][pos[mono]] = coef
    return out


def p_radius_even(family, p: int, m_count: int | None = None,
                  dim_cap: int = 20000) -> PRadiusResult:
    """Exact p-radius for even integer p via the symmetric tensor lift:
    the averaged lift has spectral radius equal to the p-th power of the
    p-radius, because even powers of norms are polynomials that the
    symmetric lift tracks exactly."""
    if p < 2 or p % 2 != 0:
        raise SpectralError(f"even lift needs even p >= 2, got {p}")
    mats = _as_numpy(family)
    if not mats:
        raise SpectralError("empty family")
    n = mats[0].shape[0]
    m = m_count if m_count is not None else len(mats)
    if n == 0:
        return PRadiusResult(p=p, method="EvenLift", value=0.0, lower=0.0,
                             upper=0.0, notes="zero-dimensional family")
    dim = math.comb(n + p - 1, p)
    if dim > dim_cap:
        raise DimensionOverflowError(
            f"symmetric dimension C({n}+{p}-1,{p}) = {dim} exceeds cap {dim_cap}")
    mean = sum(symmetric_lift(a, p) for a in mats) / m
    value = spectral_radius(mean) ** (1.0 / p)
    return PRadiusResult(p=p, method="EvenLift", value=value, lower=value,
                         upper=value,
                         notes=f"symmetric lift dimension {dim}, m = {m}")


def _nonneg_sign(mat: rla.Mat) -> int | None:
    """Global sign making the matrix entrywise nonnegative, if any."""
    has_pos = any(x > 0 for row in mat for x in row)
    has_neg = any(x < 0 for row in mat for x in row)
    if has_pos and has_neg:
        return None
    return -1 if has_neg else 1


def _diagonal_sign_search(mats: list[rla.Mat]) -> tuple[list[rla.Mat], str] | None:
    """Diagonal +-1 similarity plus per-matrix global signs making every
    matrix entrywise nonnegative."""
    n = len(mats[0])
    if n > 16:
        return None
    for bits in range(2 ** max(0, n - 1)):
        sigma = [1] + [(-1 if (bits >> j) & 1 else 1) for j in range(n - 1)]
        fixed = []
        ok = True
        for a in mats:
            c = [[sigma[i] * sigma[j] * a[i][j] for j in range(n)] for i in range(n)]
            eps = _nonneg_sign(c)
            if eps is None:
                ok = False
                break
            fixed.append(rla.mat_scale(c, Fraction(eps)))
        if ok:
            sig = "".join("+" if s == 1 else "-" for s in sigma)
            return fixed, f"diagonal signs {sig}"
    return None


def _positive_rational_eigen_rays(mat: rla.Mat) -> list[tuple]:
    """Primitive eigenvector rays for exactly verified positive rational
    eigenvalues of maximal modulus."""
    cp = rla.charpoly(mat)
    fl = np.array([[float(x) for x in row] for row in mat])
    eigs = np.linalg.eigvals(fl)
    radius = max(abs(eigs)) if len(eigs) else 0.0
    rays: list[tuple] = []
    for lam in eigs:
        if abs(lam.imag) > 1e-9 or lam.real <= 0:
            continue
        if abs(lam) < radius * (1 - 1e-9):
            continue
        cand = Fraction(float(lam.real)).limit_denominator(10 ** 9)
        if cand <= 0 or _poly_eval(cp, cand) != 0:
            continue
        n = len(mat)
        shifted = rla.mat_sub(mat, rla.mat_scale(rla.identity(n), cand))
        for v in rla.nullspace(shifted):
            ray = _primitive(v)
            if ray not in rays:
                rays.append(ray)
    return rays


def _orbit_cone(mats: list[rla.Mat], seed: tuple,
                ray_cap: int = 64) -> list[tuple] | None:
    """Close the seed ray under the family; None if the orbit overflows."""
    rays = [seed]
    queue = [seed]
    while queue:
        r = queue.pop(0)
        for a in mats:
            img = rla.matvec(a, list(r))
            if rla.vec_is_zero(img):
                continue
            pr = _primitive(img)
            if pr not in rays:
                if len(rays) >= ray_cap:
                    return None
                rays.append(pr)
                queue.append(pr)
    return rays


def _simplicial_basis(rays: list[tuple], n: int,
                      combo_cap: int = 3000) -> list[tuple] | None:
    """n independent rays whose cone contains every orbit ray with
    nonnegative coordinates."""
    if len(rays) < n:
        return None
    count = 0
    for combo in itertools.combinations(rays, n):
        count += 1
        if count > combo_cap:
            return None
        basis = [[combo[j][i] for j in range(n)] for i in range(n)]
        if rla.det([row[:] for row in basis]) == 0:
            continue
        good = True
        for r in rays:
            coords = rla.solve(basis, list(r))
            if coords is None or any(c < 0 for c in coords):
                good = False
                break
        if good:
            return list(combo)
    return None


def p_radius_one_nonneg(family, m_count: int | None = None) -> PRadiusResult:
    """p = 1 radius via the Perron-mean identity.

    The 1-radius equals the spectral radius of the arithmetic mean once
    the family is entrywise nonnegative in some basis.  Per-matrix sign
    flips never change any p-radius, so the search runs over global
    signs combined with (1) diagonal +-1 similarities and, failing that,
    (2) an exact invariant simplicial cone grown as the orbit of
    rational Perron rays of family members; a closed orbit admitting an
    n-ray simplicial basis yields a nonnegative realization and hence
    the exact identity.
    """
    mats = _as_fractions(family)
    if not mats:
        raise SpectralError("empty family")
    n = len(mats[0])
    m = m_count if m_count is not None else len(mats)
    if n == 0:
        return PRadiusResult(p=1, method="PerronMean", value=0.0, lower=0.0,
                             upper=0.0, notes="zero-dimensional family")

    def finish(fixed: list[rla.Mat], how: str) -> PRadiusResult:
        mean = rla.zeros(n, n)
        for a in fixed:
            mean = rla.mat_add(mean, a)
        mean = rla.mat_scale(mean, Fraction(1, m))
        value = spectral_radius(np.array([[float(x) for x in row] for row in mean]))
        return PRadiusResult(p=1, method="PerronMean", value=value, lower=value,
                             upper=value, notes=how)

    direct = _diagonal_sign_search(mats)
    if direct is not None:
        return finish(direct[0], direct[1])

    nmats = len(mats)
    for eps in itertools.product((1, -1), repeat=nmats):
        signed = [rla.mat_scale(a, Fraction(e)) for a, e in zip(mats, eps)]
        mean = rla.zeros(n, n)
        for a in signed:
            mean = rla.mat_add(mean, a)
        mean = rla.mat_scale(mean, Fraction(1, nmats))
        seeds: list[tuple] = []
        for mat in signed + [mean]:
            for ray in _positive_rational_eigen_rays(mat):
                for oriented in (ray, tuple(-x for x in ray)):
                    if oriented not in seeds:
                        seeds.append(oriented)
        for seed in seeds:
            rays = _orbit_cone(signed, seed)
            if rays is None:
                continue
            basis = _simplicial_basis(rays, n)
            if basis is None:
                continue
            p = [[basis[j][i] for j in range(n)] for i in range(n)]
            pinv = rla.inverse(p)
            transformed = [rla.matmul(pinv, rla.matmul(a, p)) for a in signed]
            if any(x < 0 for a in transformed for row in a for x in row):
                continue
            sig = "".join("+" if e == 1 else "-" for e in eps)
            return finish(signed,
                          f"invariant simplicial cone, matrix signs {sig}, "
                          f"cone rays {[tuple(int(x) for x in r) for r in basis]}")
    raise NotSignNormalizableError(
        "no diagonal sign pattern or invariant simplicial cone makes the "
        "family entrywise nonnegative")


def p_radius_bounds(family, p: float, max_len: int = 8,
                    m_count: int | None = None,
                    level_cap: int = 60000) -> PRadiusResult:
    """Generic p-radius bounds from exhaustive products.

    Upper: smallest over fully enumerated lengths k of the normalized
    power-sum (m^{-k} sum over words of norm^p)^{1/(pk)}.  Lower:
    largest single-word bound m^{-1/p} rho(A_w)^{1/k}.
    """
    if p < 1:
        raise SpectralError(f"p-radius needs p >= 1, got {p}")
    mats = _as_numpy(family)
    if not mats:
        raise SpectralError("empty family")
    n = mats[0].shape[0]
    m = m_count if m_count is not None else len(mats)
    if n == 0:
        return PRadiusResult(p=p, method="Bounds", value=None, lower=0.0,
                             upper=0.0, notes="zero-dimensional family")
    lower = 0.0
    upper = math.inf
    level: list[np.ndarray] = [np.eye(n)]
    for k in range(1, max_len + 1):
        if len(level) * len(mats) > level_cap:
            break
        level = [prod @ a for prod in level for a in mats]
        power_sum = 0.0
        for prod in level:
            power_sum += _spectral_norm(prod) ** p
            lower = max(lower, m ** (-1.0 / p) * spectral_radius(prod) ** (1.0 / k))
        upper = min(upper, (power_sum / m ** k) ** (1.0 / (p * k)))
    if math.isinf(upper):
        upper = max(_spectral_norm(a) for a in mats)
    upper = max(upper, lower)
    return PRadiusResult(p=p, method="Bounds", value=None, lower=lower,
                         upper=upper, notes=f"products up to length {max_len}")


# ---------------------------------------------------------------------------
# resonance degrees


def _largest_jordan_block(a: np.ndarray, lam: complex, tol: float) -> int:
    n = a.shape[0]
    b = a.astype(complex) - lam * np.eye(n)
    prev_rank = n
    power = np.eye(n, dtype=complex)
    for j in range(1, n + 1):
        power = power @ b
        top = float(np.linalg.norm(power, 2))
        rank = int(np.linalg.matrix_rank(power, tol=tol * max(top, 1.0)))
        if rank == prev_rank:
            return max(j - 1, 1)
        prev_rank = rank
        if rank == 0:
            return j
    return n


def resonance_degree_matrix(a, tol: float = 1e-9) -> ResonanceInfo:
    """Size of the largest Jordan block among eigenvalues of maximal
    modulus, minus one; computed from the rank staircase of powers of
    (A - lambda I) at two tolerances, erroring if they disagree."""
    mat = _as_numpy([a])[0]
    n = mat.shape[0]
    if n == 0:
        return ResonanceInfo(0, exact=True, method="JordanSingle",
                             notes="zero-dimensional matrix")
    eigs = np.linalg.eigvals(mat)
    radius = float(max(abs(eigs)))
    leading: list[complex] = []
    for lam in eigs:
        if abs(lam) < radius - tol * max(radius, 1.0):
            continue
        if lam.imag < -1e-12:
            continue                      # conjugate twin has the same staircase
        if any(abs(lam - mu) <= 1e-7 * max(radius, 1.0) for mu in leading):
            continue
        leading.append(lam)
    worst = 0
    for lam in leading:
        sizes = [_largest_jordan_block(mat, lam, t) for t in (tol, tol * 1e-2)]
        if sizes[0] != sizes[1]:
            raise RankAmbiguousError(
                f"Jordan staircase at eigenvalue {lam} gives block sizes "
                f"{sizes[0]} vs {sizes[1]} across tolerances")
        worst = max(worst, sizes[0])
    return ResonanceInfo(max(worst, 1) - 1, exact=True, method="JordanSingle",
                         notes=f"{len(leading)} leading eigenvalue(s), "
                               f"modulus {radius:.12g}")


def resonance_degree_family(rf, jsr_max_len: int = 6) -> ResonanceInfo:
    """Resonance degree of a family: exactly 0 for irreducible families;
    for a single matrix, the Jordan computation; otherwise the valency
    bound counted over diagonal blocks of the triangular factorization
    whose radius interval reaches the family's."""
    mats = _as_fractions(rf)
    if not mats:
        raise SpectralError("empty family")
    if len(mats) == 1:
        return resonance_degree_matrix(mats[0])
    n = len(mats[0])
    if n == 0:
        return ResonanceInfo(0, exact=True, method="IrreducibleZero",
                             notes="zero-dimensional family")
    verdict = irreducibility_test(mats)
    if verdict.kind == "Irreducible":
        return ResonanceInfo(0, exact=True, method="IrreducibleZero",
                             notes=verdict.details)
    if verdict.kind == "Inconclusive":
        raise ResonanceInconclusiveError(verdict.details)
    fact = frobenius_factorization(mats)
    if any(b.verdict == "Inconclusive" for b in fact.blocks):
        raise ResonanceInconclusiveError(
            "triangular factorization has an inconclusive diagonal block")
    family_bounds = jsr_bounds(mats, max_len=jsr_max_len)
    valency = 0
    for b in fact.blocks:
        bb = jsr_bounds(b.matrices, max_len=jsr_max_len)
        if bb.upper >= family_bounds.lower * (1 - 1e-9):
            valency += 1
    return ResonanceInfo(max(valency, 1) - 1, exact=False, method="ValencyBound",
                         notes=f"{valency} of {len(fact.blocks)} diagonal "
                               f"blocks can attain the family radius")
