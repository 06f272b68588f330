"""Refinement masks and their support geometry.

A mask is a finitely supported rational coefficient sequence driving the
refinement equation phi(x) = sum_k c_k phi(Mx - k).  This module checks
the sum rules, computes the index set of integer translates needed to
represent phi on the tile (the minimal covering of the support hull by
tile translates, closed under the algebraic condition that makes the
transition matrices column-stochastic), and builds the probe simplices
used by the L_p analysis to widen that index set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ratlinalg as rla
from .lattice import (
    DigitSet,
    DilationData,
    IfsGeometry,
    IntersectKind,
    IntVec,
    SpectralSplit,
    attractor_membership,
)


class MaskError(Exception):
    pass


class SumRuleError(MaskError):
    pass


class DegenerateDirectionError(MaskError):
    """No admissible simplex found for the spectral blocks."""


@dataclass(frozen=True)
class Mask:
    """Finitely supported rational mask with exact coefficients."""

    dil: DilationData
    support: tuple[IntVec, ...]            # sorted lexicographically
    coeffs: tuple[Fraction, ...]           # aligned with support

    def coeff(self, k) -> Fraction:
        kk = tuple(int(x) for x in k)
        try:
            return self.coeffs[self.support.index(kk)]
        except ValueError:
            return Fraction(0)

    def as_dict(self) -> dict[IntVec, Fraction]:
        return dict(zip(self.support, self.coeffs))

    def total(self) -> Fraction:
        return sum(self.coeffs, Fraction(0))


def make_mask(dil: DilationData, entries) -> Mask:
    """Build a mask from {index: coefficient}.

    The coefficient total must equal |det M| exactly: integrating both
    sides of the refinement equation forces it, so anything else is a
    typo in the input.
    """
    items = []
    for k, c in (entries.items() if hasattr(entries, "items") else entries):
        kk = tuple(int(x) for x in k)
        if len(kk) != dil.dim:
            raise MaskError(f"mask index {kk} has wrong dimension")
        cf = rla.to_fraction(c)
        if cf != 0:
            items.append((kk, cf))
    if not items:
        raise MaskError("mask has empty support")
    items.sort()
    support = tuple(k for k, _ in items)
    if len(set(support)) != len(support):
        raise MaskError("duplicate mask indices")
    coeffs = tuple(c for _, c in items)
    total = sum(coeffs, Fraction(0))
    if total != dil.m:
        raise MaskError(
            f"mask coefficients sum to {total}, but |det M| = {dil.m}; "
            "the refinement equation has no integrable solution otherwise")
    return Mask(dil=dil, support=support, coeffs=coeffs)


def check_sum_rules(mask: Mask, digits: DigitSet) -> dict:
    """Per-digit sums sum_k c_{Mk - d}; the rules hold iff each equals 1."""
    dil = mask.dil
    sums = {}
    for d in digits.digits:
        total = Fraction(0)
        for gamma, c in zip(mask.support, mask.coeffs):
            # c_{Mk-d} != 0 iff gamma = Mk - d for integer k
            k = dil.apply_inv([Fraction(g + dd) for g, dd in zip(gamma, d)])
            if all(x.denominator == 1 for x in k):
                total += c
        sums[d] = total
    return {"sums": sums, "ok": all(v == 1 for v in sums.values())}


def require_sum_rules(mask: Mask, digits: DigitSet) -> None:
    rep = check_sum_rules(mask, digits)
    if not rep["ok"]:
        bad = {d: str(v) for d, v in rep["sums"].items() if v != 1}
        raise SumRuleError(f"sum rules fail on digit classes {bad}")


# ---------------------------------------------------------------------------
# index set of translates


@dataclass(frozen=True)
class OmegaSet:
    """Integer translates indexing the vector representation of phi.

    ``flags[i]`` records how members[i] earned its place: "cover" for
    translates needed to cover the support hull, "closure" for ones
    added so every transition-matrix column captures its full
    coefficient sum.  ``certified`` is False when any covering decision
    rested on an unresolved membership test.
    """

    members: tuple[IntVec, ...]
    flags: tuple[str, ...]
    certified: bool

    @property
    def size(self) -> int:
        return len(self.members)

    def position(self, k) -> int:
        return self.members.index(tuple(int(x) for x in k))


def _support_hull_samples(geo_k: IfsGeometry, depth: int, cap: int = 4000) -> list[tuple[Fraction, ...]]:
    """Exact points of the support hull: corner points of all cells at
    the deepest affordable level, deduplicated, in deterministic order."""
    level = 0
    ngen = len(geo_k.gens)
    while level < depth and ngen ** (level + 1) * ngen <= cap:
        level += 1
    pts: dict[tuple[Fraction, ...], None] = {}
    for word in itertools.product(range(ngen), repeat=level):
        cell = geo_k.root_cell()
        cell = type(cell)(word=word, shift=cell.shift, anchor=geo_k.value(word))
        for p in geo_k.corner_points(cell):
            pts.setdefault(p, None)
    return list(pts.keys())


def _covering_members(dil: DilationData, geo_g: IfsGeometry,
                      samples: list[tuple[Fraction, ...]]) -> tuple[list[IntVec], bool]:
    """Greedy minimal set of translates k such that the translated tiles
    cover every sample point, preferring translates forced by a sample
    only they contain."""
    s = dil.dim
    center = geo_g.ball.center
    r_g = geo_g.ball.radius
    rad_sq = r_g * r_g

    lo = list(samples[0])
    hi = list(samples[0])
    for p in samples:
        for i in range(s):
            if p[i] < lo[i]:
                lo[i] = p[i]
            if p[i] > hi[i]:
                hi[i] = p[i]
    ranges = [range(int(math.floor(lo[i] - center[i] - r_g)),
                    int(math.ceil(hi[i] - center[i] + r_g)) + 1)
              for i in range(s)]
    candidates = sorted(itertools.product(*ranges))

    # scale samples and ball data to one integer denominator so the
    # pre-filter and the membership oracle run on plain integers
    den = 1
    for p in samples:
        for x in p:
            den = den * x.denominator // math.gcd(den, x.denominator)
    for c in center:
        c = Fraction(c)
        den = den * c.denominator // math.gcd(den, c.denominator)
    samples_i = [tuple(int(x * den) for x in p) for p in samples]
    center_i = tuple(int(Fraction(c) * den) for c in center)
    cands_i = [tuple(v * den for v in k) for k in candidates]
    # d_sq > rad_sq  <=>  sum (Y_i - C_i)^2 * rad_den > rad_num * den^2
    rad_bound = rad_sq.numerator * den * den
    rad_den = rad_sq.denominator
    query = attractor_membership(geo_g, den)

    # membership table: which candidates certifiably contain each sample
    cover: list[set[int]] = []
    unknown: list[set[int]] = []
    certified = True
    for pi in samples_i:
        cov = set()
        unk = set()
        for ci, ki in enumerate(cands_i):
            y = tuple(a - b for a, b in zip(pi, ki))
            d_sq = sum((a - c) * (a - c) for a, c in zip(y, center_i))
            if d_sq * rad_den > rad_bound:
                continue
            res = query(y)
            if res is IntersectKind.INTERSECTING:
                cov.add(ci)
            elif res is IntersectKind.UNKNOWN:
                unk.add(ci)
        cover.append(cov)
        unknown.append(unk)

    chosen: set[int] = set()
    # forced translates first: a sample covered by exactly one candidate
    for cov, unk in zip(cover, unknown):
        if len(cov) == 1 and not unk:
            chosen.add(next(iter(cov)))

    def uncovered() -> list[int]:
        return [si for si in range(len(samples)) if not (cover[si] & chosen)]

    # max-coverage greedy: boundary-touching translates cover few samples
    # and stay out; ties break toward the lexicographically first translate
    pending = uncovered()
    while pending:
        gain: dict[int, int] = {}
        for si in pending:
            for ci in cover[si]:
                gain[ci] = gain.get(ci, 0) + 1
        if gain:
            best = max(gain.values())
            pick = min(ci for ci, g in gain.items() if g == best)
            chosen.add(pick)
            pending = uncovered()
            continue
        # no certified cover for the rest; keep all possible ones, flag it
        rest_unk = set()
        for si in pending:
            rest_unk |= unknown[si]
        if not rest_unk:
            si = pending[0]
            raise MaskError(
                f"sample {tuple(float(x) for x in samples[si])} of the support "
                "hull is not covered by any candidate translate")
        chosen |= rest_unk
        certified = False
        break
    members = sorted(candidates[i] for i in chosen)
    return members, certified


def _algebraic_closure(dil: DilationData, digits: DigitSet, mask: Mask,
                       members: list[IntVec]) -> list[IntVec]:
    """Close the member set so every transition column sums over the full
    digit class: for b in the set, every integer a with Ma - b + d in the
    mask support joins the set."""
    out = set(members)
    queue = list(members)
    while queue:
        b = queue.pop()
        for d in digits.digits:
            for gamma in mask.support:
                target = [Fraction(g + bb - dd) for g, bb, dd in zip(gamma, b, d)]
                a = dil.apply_inv(target)
                if all(x.denominator == 1 for x in a):
                    ai = tuple(int(x) for x in a)
                    if ai not in out:
                        out.add(ai)
                        queue.append(ai)
    return sorted(out)


def compute_omega(mask: Mask, digits: DigitSet, sample_depth: int = 6) -> OmegaSet:
    """Index set for the vector representation of phi on the tile.

    Minimal covering of the support hull by tile translates (greedy over
    exact sample points, deterministic), then algebraic closure.
    """
    dil = mask.dil
    geo_g = IfsGeometry(dil, digits.digits)
    geo_k = IfsGeometry(dil, mask.support)
    samples = _support_hull_samples(geo_k, sample_depth)
    members, certified = _covering_members(dil, geo_g, samples)
    closed = _algebraic_closure(dil, digits, mask, members)
    base = set(members)
    flags = tuple("cover" if k in base else "closure" for k in closed)
    return OmegaSet(members=tuple(closed), flags=flags, certified=certified)


# ---------------------------------------------------------------------------
# admissible probe simplices


@dataclass(frozen=True)
class AdmissibleSimplex:
    """Simplex with one vertex at the origin whose interior meets every
    spectral block of the dilation.

    Vertices live on the grid M^-t Z^s (t = grid_power) so that shifted
    sample points keep exactly certifiable tile membership.
    ``witnesses[i]`` is a point on block i's subspace strictly inside the
    simplex; the barycentric margin certifies strictness at float
    precision.
    """

    vertices: tuple[tuple[Fraction, ...], ...]   # s+1 vertices, first is 0
    witnesses: tuple[tuple[float, ...], ...]
    margin: float
    grid_power: int


def _barycentric_inside(verts: list[np.ndarray], point: np.ndarray) -> float:
    """Smallest barycentric coordinate of the point (negative if outside)."""
    v0 = verts[0]
    a = np.column_stack([v - v0 for v in verts[1:]])
    try:
        lam = np.linalg.solve(a, point - v0)
    except np.linalg.LinAlgError:
        return -1.0
    coords = np.concatenate([[1.0 - lam.sum()], lam])
    return float(coords.min())


def _snap_to_adic_grid(dil: DilationData, v: np.ndarray, t: int) -> tuple[Fraction, ...]:
    """Nearest point of M^-t Z^s to v (rounding in M^t coordinates)."""
    mt = np.linalg.matrix_power(np.array(dil.matrix, dtype=float), t)
    z = [int(round(x)) for x in mt @ v]
    inv_t = dil.inv_power(t)
    return tuple(sum((inv_t[i][j] * z[j] for j in range(dil.dim)), Fraction(0))
                 for i in range(dil.dim))


def make_admissible_simplex(split: SpectralSplit, dil: DilationData,
                            scale: Fraction = Fraction(1, 8)) -> AdmissibleSimplex:
    """Construct a simplex on the M-adic grid whose interior meets every
    root subspace of the dilation.

    Directions are taken from each block, sign-flipped toward a common
    half-space, and enclosed in a simplicial cone that is widened until
    every direction sits strictly inside.
    """
    s = split.transform.shape[0]
    dirs = [np.asarray(b[:, 0], dtype=float) for b in split.bases]
    dirs = [d / np.linalg.norm(d) for d in dirs]
    # sign flips: align every direction with the sum of the others
    signs = [1.0] * len(dirs)
    for _ in range(32):
        changed = False
        for i in range(len(dirs)):
            rest = sum(signs[j] * dirs[j] for j in range(len(dirs)) if j != i)
            if len(dirs) > 1 and float(np.dot(signs[i] * dirs[i], rest)) < 0:
                signs[i] = -signs[i]
                changed = True
        if not changed:
            break
    flipped = [sg * d for sg, d in zip(signs, dirs)]
    h = sum(flipped)
    if np.linalg.norm(h) < 1e-9:
        h = flipped[0]
    h = h / np.linalg.norm(h)

    # grid fine enough that snapping cannot spoil the cone
    t = 1
    while t < 64 and dil.inv_power_norm_upper(t) > scale / 64:
        t += 1

    # orthonormal frame with h first
    frame = np.linalg.qr(np.column_stack([h, np.eye(s)]))[0]
    perp = frame[:, 1:s]

    beta = 1.0
    for _ in range(40):
        rays = [h + beta * perp[:, j] for j in range(s - 1)]
        rays.append(h - beta * perp.sum(axis=1) if s > 1 else h)
        norm_cap = max(float(np.linalg.norm(r)) for r in rays)
        verts_r = [tuple(Fraction(0) for _ in range(s))]
        for r in rays:
            verts_r.append(_snap_to_adic_grid(dil, float(scale) * np.asarray(r) / norm_cap, t))
        verts_f = [np.array([float(x) for x in v]) for v in verts_r]
        ok = True
        wits = []
        margin = 1.0
        for d in flipped:
            step = float(scale) / (4.0 * norm_cap)
            inside = -1.0
            for _ in range(30):
                inside = _barycentric_inside(verts_f, step * d)
                if inside > 1e-12:
                    break
                step *= 0.5
            if inside <= 1e-12:
                ok = False
                break
            wits.append(tuple(float(x) for x in step * d))
            margin = min(margin, inside)
        if ok:
            return AdmissibleSimplex(vertices=tuple(verts_r),
                                     witnesses=tuple(wits),
                                     margin=float(margin),
                                     grid_power=t)
        beta *= 2.0
    raise DegenerateDirectionError(
        "could not enclose all spectral directions in a simplex")


def compute_omega_tilde(mask: Mask, digits: DigitSet, simplex: AdmissibleSimplex,
                        sample_depth: int = 6) -> OmegaSet:
    """Index set covering the support hull thickened by the probe simplex.

    Same covering machinery as compute_omega, with sample points pushed
    by the simplex vertices (and their contracted images, which stay on
    the M-adic grid) so tiles adjacent in the probe directions are
    picked up.
    """
    dil = mask.dil
    geo_g = IfsGeometry(dil, digits.digits)
    geo_k = IfsGeometry(dil, mask.support)
    base = _support_hull_samples(geo_k, sample_depth)
    zero = tuple(Fraction(0) for _ in range(dil.dim))
    offsets: list[tuple[Fraction, ...]] = [zero]
    for v in simplex.vertices[1:]:
        offsets.append(v)
        offsets.append(tuple(dil.apply_inv(v)))        # interior probe, still on grid
        offsets.append(tuple(dil.apply_inv(dil.apply_inv(v))))
    samples = []
    seen = set()
    for p in base:
        for off in offsets:
            q = tuple(a + b for a, b in zip(p, off))
            if q not in seen:
                seen.add(q)
                samples.append(q)
    members, certified = _covering_members(dil, geo_g, samples)
    closed = _algebraic_closure(dil, digits, mask, members)
    cover_set = set(members)
    flags = tuple("cover" if k in cover_set else "closure" for k in closed)
    return OmegaSet(members=tuple(closed), flags=flags, certified=certified)
