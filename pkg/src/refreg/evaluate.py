"""Pointwise evaluation, boundary validation, subdivision, and export.

A refinable function is pinned down on the dilation-adic points of its
tile by products of transition matrices applied to the origin vector.
This module materializes those exact values (and the cell means used
for L_p approximation), validates that the values glued from the tile's
charts agree across tile boundaries (continuity on the tile does not by
itself give continuity on R^s — the box-indicator fixture fails exactly
here), applies the subdivision operator, and computes its convergence
rate.  All internal arithmetic is exact rational; decimals appear only
at export.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ratlinalg as rla
from .lattice import DigitSet, DilationData
from .mask import Mask, OmegaSet
from .spectral import JsrResult, NotSignNormalizableError, invariant_polytope, \
    p_radius_bounds, p_radius_even, p_radius_one_nonneg
from .transition import TransitionFamily, origin_eigenvector, mean_eigenvector, \
    restrict, sum_zero_subspace


class EvaluateError(Exception):
    pass


class BudgetExceededError(EvaluateError):
    """Full-depth enumeration would exceed the entry cap."""


# ---------------------------------------------------------------------------
# evaluation tables


@dataclass(eq=False)
class TableEntry:
    address: tuple[int, ...]             # digit indices, outermost first
    point: tuple[Fraction, ...]          # exact adic point in the tile
    vector: tuple[Fraction, ...]         # product of transition matrices on the seed


@dataclass(eq=False)
class EvaluationTable:
    kind: str                            # "point-values" | "cell-means"
    depth: int
    entries: list[TableEntry]
    omega: OmegaSet
    space_dim: int
    exact: bool = True
    notes: str = ""


def adic_point(dil: DilationData, digits: DigitSet,
               address: Sequence[int], tail: Sequence[Fraction] | None = None
               ) -> tuple[Fraction, ...]:
    """x(d :: rest) = M^{-1}(d + x(rest)), exact; ``tail`` seeds x(empty)."""
    s = dil.dim
    pt = list(tail) if tail is not None else [Fraction(0)] * s
    for idx in reversed(list(address)):
        d = digits.digits[idx]
        pt = dil.apply_inv([pt[i] + d[i] for i in range(s)])
    return tuple(pt)


def periodic_point(dil: DilationData, digits: DigitSet,
                   tail: Sequence[int]) -> tuple[Fraction, ...] | None:
    """Exact fixed point of the repeating digit block: the solution of
    (M^P - I) x = sum_i M^{P-i} d_{t_i}; None if M^P - I is singular
    (impossible for an expansive dilation, kept for safety)."""
    s = dil.dim
    mmat = dil.mat()
    mp = rla.identity(s)
    for _ in range(len(tail)):
        mp = rla.matmul(mp, mmat)
    shifted = rla.mat_sub(mp, rla.identity(s))
    rhs = [Fraction(0)] * s
    acc = rla.identity(s)
    for t in reversed(list(tail)):
        d = digits.digits[t]
        rhs = [rhs[i] + sum(acc[i][j] * d[j] for j in range(s)) for i in range(s)]
        acc = rla.matmul(acc, mmat)
    sol = rla.solve(shifted, rhs)
    return tuple(sol) if sol is not None else None


def evaluate_v(fam: TransitionFamily, depth: int,
               addresses: Sequence[Sequence[int]] | None = None,
               seed: Sequence[Fraction] | None = None,
               cap: int = 250000, kind: str = "point-values") -> EvaluationTable:
    """Exact values v(0.d1...dk) = T_{d1}...T_{dk} seed at adic points.

    Suffix products are shared: each depth-k vector costs one exact
    matrix-vector product on top of the depth-(k-1) table.  Without an
    address list all m^k addresses are produced in lexicographic order.
    """
    if seed is None:
        res = origin_eigenvector(fam)
        if res.vector is None:
            raise EvaluateError(
                f"origin vector not unique ({res.status}); pass an explicit seed")
        seed = res.vector
    seed = [Fraction(x) for x in seed]
    dil = fam.mask.dil
    m = fam.digits.count
    if addresses is None:
        if m ** depth > cap:
            raise BudgetExceededError(
                f"{m}^{depth} addresses exceed cap {cap}; pass an address list")
        level: list[tuple[tuple[int, ...], list[Fraction], list[Fraction]]] = [
            ((), [Fraction(0)] * dil.dim, seed)]
        for _ in range(depth):
            nxt = []
            for addr, pt, vec in level:
                for idx in range(m):
                    d = fam.digits.digits[idx]
                    npt = dil.apply_inv([pt[i] + d[i] for i in range(dil.dim)])
                    nxt.append(((idx,) + addr, npt,
                                rla.matvec(fam.matrices[idx], vec)))
            level = nxt
        level.sort(key=lambda t: t[0])
        entries = [TableEntry(addr, tuple(pt), tuple(vec)) for addr, pt, vec in level]
    else:
        memo: dict[tuple[int, ...], list[Fraction]] = {(): seed}

        def vec_for(addr: tuple[int, ...]) -> list[Fraction]:
            if addr not in memo:
                memo[addr] = rla.matvec(fam.matrices[addr[0]], vec_for(addr[1:]))
            return memo[addr]

        entries = []
        for a in sorted(tuple(int(i) for i in a) for a in addresses):
            entries.append(TableEntry(a, adic_point(dil, fam.digits, a),
                                      tuple(vec_for(a))))
        depth = max((len(e.address) for e in entries), default=0)
    return EvaluationTable(kind=kind, depth=depth, entries=entries,
                           omega=fam.omega, space_dim=dil.dim)


def lp_mean_approximation(fam: TransitionFamily, depth: int,
                          z: Sequence[Fraction] | None = None,
                          cap: int = 250000) -> EvaluationTable:
    """Cell means: the value on a depth-k cell is T_{d1}...T_{dk} z,
    where z is the mean vector (cell volume m^{-k})."""
    if z is None:
        res = mean_eigenvector(fam)
        if res.vector is None:
            raise EvaluateError(
                f"mean vector not available ({res.status}); pass z explicitly")
        z = res.vector
    table = evaluate_v(fam, depth, seed=z, cap=cap, kind="cell-means")
    table.notes = (f"cell volume {fam.digits.count}^-{depth}; linear-rate "
                   f"convergence metadata: (rho_p + eps)^{depth}")
    return table


def _decimal(x: Fraction, precision: int) -> str:
    return f"{float(x):.{precision}g}"


def export_phi(table: EvaluationTable, fmt: str = "csv",
               path: str | Path | None = None, precision: int = 12) -> str:
    """Serialize a table; CSV rows are (address point, shift, value) per
    table entry and omega translate, in address-then-omega order."""
    s = table.space_dim
    if fmt == "csv":
        header = ",".join([f"x_{i+1}" for i in range(s)]
                          + [f"shift_{i+1}" for i in range(s)] + ["phi"])
        lines = [header]
        for e in table.entries:
            coords = [_decimal(x, precision) for x in e.point]
            for pos, shift in enumerate(table.omega.members):
                lines.append(",".join(coords + [str(int(c)) for c in shift]
                                      + [_decimal(e.vector[pos], precision)]))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        doc = {
            "schema": 1,
            "kind": table.kind,
            "depth": table.depth,
            "omega": [list(map(int, k)) for k in table.omega.members],
            "entries": [
                {
                    "address": list(e.address),
                    "point": {
                        "exact": [str(x) for x in e.point],
                        "decimal": [float(x) for x in e.point],
                    },
                    "values": {
                        "exact": [str(x) for x in e.vector],
                        "decimal": [float(x) for x in e.vector],
                    },
                }
                for e in table.entries
            ],
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        raise EvaluateError(f"unknown export format {fmt!r} (csv or json)")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


# ---------------------------------------------------------------------------
# boundary consistency


@dataclass(eq=False)
class BoundaryCheck:
    status: str                          # "Passed" | "Failed" | "Skipped"
    depth: int
    tol: float
    pairs_checked: int
    witness: str | None = None
    notes: str = ""


def _periodic_tail_value(fam: TransitionFamily, tail: tuple[int, ...],
                         seed: list[Fraction], tol: float
                         ) -> tuple[list[Fraction] | None, bool]:
    """Value of v at the purely periodic point with the given repeating
    digit block: the eigenvalue-1 eigenvector of the block product when
    simple (normalized to the seed's component sum), else the sampled
    limit of iterates.  Returns (value, exact)."""
    prod = rla.identity(fam.size)
    for idx in tail:
        prod = rla.matmul(prod, fam.matrices[idx])
    shifted = rla.mat_sub(prod, rla.identity(fam.size))
    null = rla.nullspace(shifted)
    total = sum(seed)
    if len(null) == 1 and total != 0:
        scale = sum(null[0])
        if scale != 0:
            return [x * total / scale for x in null[0]], True
    # sampled limit with Cauchy check (rationalized when it verifies)
    cur = [Fraction(x) for x in seed]
    prev_f = np.array([float(x) for x in cur])
    for _ in range(60):
        cur = rla.matvec(prod, cur)
        cur_f = np.array([float(x) for x in cur])
        if float(np.linalg.norm(cur_f - prev_f)) <= tol * 1e-3:
            cand = [Fraction(float(x)).limit_denominator(10 ** 9) for x in cur]
            if rla.matvec(prod, cand) == cand:
                return cand, True
            return cur, False
        prev_f = cur_f
    return None, False


def boundary_consistency(fam: TransitionFamily, v0: Sequence[Fraction] | None = None,
                         depth: int = 6, tol: float = 1e-8, max_period: int = 2,
                         pair_cap: int = 40) -> BoundaryCheck:
    """Cross-chart agreement of the glued function.

    The function on R^s is phi(x + a) = v(x)_a for x in the tile and a
    in Omega.  A point on an overlap of the tile with an integer
    translate has two charts, and the glued function is well defined
    only if they agree.  Eventually periodic adic points (prefix of
    length <= depth, repeating block of length <= max_period) are
    enumerated exactly; two points with equal fractional parts witness
    an overlap, and for each integer offset j the check asserts
    v(x)_a = v(x - j)_{a+j}, reading components outside Omega as 0.
    The box-indicator fixture must fail here: its radius on the (trivial)
    difference space says "continuous on the tile" while the glued
    function jumps at the seam.
    """
    if v0 is None:
        res = origin_eigenvector(fam)
        if res.vector is None:
            return BoundaryCheck(status="Skipped", depth=depth, tol=tol,
                                 pairs_checked=0,
                                 notes=f"no unique origin vector ({res.status})")
        v0 = res.vector
    v0 = [Fraction(x) for x in v0]
    dil = fam.mask.dil
    m = fam.digits.count
    s = dil.dim

    # purely periodic tails: exact point and value
    tails: list[tuple[tuple[Fraction, ...], list[Fraction], bool]] = []
    words: list[tuple[int, ...]] = [(i,) for i in range(m)]
    if max_period >= 2:
        words += [(i, j) for i in range(m) for j in range(m)]
    approx_used = False
    for tail in words:
        point = periodic_point(dil, fam.digits, tail)
        if point is None:
            continue
        value, exact = _periodic_tail_value(fam, tail, v0, tol)
        if value is None:
            continue
        approx_used = approx_used or not exact
        tails.append((point, value, exact))

    # prefixed completions bucketed by fractional part
    buckets: dict[tuple, list[tuple[tuple[int, ...], tuple[float, ...]]]] = {}

    def register(point: tuple[Fraction, ...], vec: list[Fraction]) -> None:
        frac = tuple(x - (x.numerator // x.denominator) for x in point)
        offset = tuple(x.numerator // x.denominator for x in point)
        buckets.setdefault(frac, [])
        entry = (offset, tuple(float(x) for x in vec))
        if entry not in buckets[frac]:
            buckets[frac].append(entry)

    def walk(level: int, point: tuple[Fraction, ...], vec: list[Fraction]) -> None:
        register(point, vec)
        if level == 0:
            return
        for idx in range(m):
            d = fam.digits.digits[idx]
            npt = tuple(dil.apply_inv([point[i] + d[i] for i in range(s)]))
            walk(level - 1, npt, rla.matvec(fam.matrices[idx], vec))

    for point, value, _ in tails:
        walk(depth, point, value)

    members = {tuple(int(x) for x in k): i for i, k in enumerate(fam.omega.members)}
    pairs = 0
    for frac in sorted(buckets, key=str):
        group = buckets[frac]
        if len(group) < 2:
            continue
        group = group[:pair_cap]
        for i in range(len(group)):
            for k in range(i + 1, len(group)):
                pairs += 1
                for (off1, v1), (off2, v2) in (group[i], group[k]), (group[k], group[i]):
                    j = tuple(off1[t] - off2[t] for t in range(s))
                    for a, pos in members.items():
                        shifted_idx = tuple(a[t] + j[t] for t in range(s))
                        expected = v2[members[shifted_idx]] if shifted_idx in members else 0.0
                        if abs(v1[pos] - expected) > tol:
                            frac_s = "(" + ", ".join(str(x) for x in frac) + ")"
                            return BoundaryCheck(
                                status="Failed", depth=depth, tol=tol,
                                pairs_checked=pairs,
                                witness=(f"point with fractional part {frac_s}: chart at "
                                         f"offset {off1} component {a} gives {v1[pos]:.9g}, "
                                         f"chart at offset {off2} expects {expected:.9g}"))
    if pairs == 0:
        return BoundaryCheck(status="Skipped", depth=depth, tol=tol, pairs_checked=0,
                             notes="no overlapping adic points found at this depth")
    notes = "some tail values sampled, not exact" if approx_used else ""
    return BoundaryCheck(status="Passed", depth=depth, tol=tol,
                         pairs_checked=pairs, notes=notes)


# ---------------------------------------------------------------------------
# subdivision


@dataclass(eq=False)
class SubdivisionData:
    level: int
    values: dict[tuple[int, ...], Fraction]
    mask: Mask

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.values)


def _delta(mask: Mask) -> SubdivisionData:
    origin = tuple(0 for _ in range(mask.dil.dim))
    return SubdivisionData(level=0, values={origin: Fraction(1)}, mask=mask)


def subdivide(mask: Mask, data: SubdivisionData | dict | None = None,
              iterations: int = 1) -> SubdivisionData:
    """Apply [S a]_i = sum_j c_{i - M j} a_j the given number of times."""
    if data is None:
        data = _delta(mask)
    elif isinstance(data, dict):
        data = SubdivisionData(level=0,
                               values={tuple(int(x) for x in k): Fraction(v)
                                       for k, v in data.items()},
                               mask=mask)
    values = dict(data.values)
    s = mask.dil.dim
    for _ in range(iterations):
        out: dict[tuple[int, ...], Fraction] = {}
        for j, aj in values.items():
            mj = [int(x) for x in mask.dil.apply(list(j))]
            for k, c in zip(mask.support, mask.coeffs):
                idx = tuple(mj[t] + k[t] for t in range(s))
                out[idx] = out.get(idx, Fraction(0)) + c * aj
        values = {k: v for k, v in out.items() if v != 0}
    return SubdivisionData(level=data.level + iterations, values=values, mask=mask)


def subdivision_rate(fam_tilde: TransitionFamily, p: float | None = None,
                     search_len: int = 8, max_len: int = 8,
                     anisotropic: bool | None = None):
    """Convergence rate of the subdivision scheme: the joint spectral
    radius (or p-radius) of the extended transition family restricted to
    the full sum-zero subspace — the rate space is W, not the difference
    space U.  For anisotropic dilations the exponent log_{1/rho(M)} tau
    need not equal the Holder exponent; a note records that caveat."""
    rf = restrict(fam_tilde, sum_zero_subspace(fam_tilde.size))
    note = ""
    if anisotropic:
        note = ("anisotropic dilation: log_{1/rho(M)} tau need not equal "
                "the Holder exponent")
    if p is None:
        if rf.subspace.dim == 0:
            return JsrResult(lower=0.0, upper=0.0, certified=True,
                             method="invariant-polytope", polytope_vertices=0,
                             notes=note or "zero-dimensional rate space")
        result = invariant_polytope(rf, search_len=search_len)
        if note:
            result.notes = (result.notes + "; " + note) if result.notes else note
        return result
    if p == 1:
        try:
            result = p_radius_one_nonneg(rf)
        except NotSignNormalizableError:
            result = p_radius_bounds(rf, p=1, max_len=max_len)
    elif p == int(p) and int(p) % 2 == 0:
        result = p_radius_even(rf, p=int(p))
    else:
        result = p_radius_bounds(rf, p=p, max_len=max_len)
    if note:
        result.notes = (result.notes + "; " + note) if result.notes else note
    return result


def empirical_rate(mask: Mask, iterations: int = 8,
                   probe: dict | SubdivisionData | None = None) -> dict:
    """Diagnostic decay of successive subdivision refinements.

    Per level the recorded difference is the larger of (a) the change at
    coarse indices between consecutive levels and (b) the unit-step
    discrete modulus of the level data; (a) alone is blind to schemes
    whose data converges pointwise to a discontinuous limit (the
    box-indicator case), which (b) catches.  The fitted geometric rate
    over the last levels is a diagnostic, not a theorem check.
    """
    s = mask.dil.dim
    data = probe if isinstance(probe, SubdivisionData) else \
        subdivide(mask, probe, 0) if probe is not None else _delta(mask)
    levels = []
    diffs = []
    prev = data
    for _ in range(iterations):
        cur = subdivide(mask, prev, 1)
        coarse = 0.0
        for j, aj in prev.values.items():
            mj = tuple(int(x) for x in mask.dil.apply(list(j)))
            coarse = max(coarse, abs(float(cur.values.get(mj, Fraction(0)) - aj)))
        modulus = 0.0
        for j, aj in cur.values.items():
            for axis in range(s):
                nb = tuple(j[t] + (1 if t == axis else 0) for t in range(s))
                modulus = max(modulus, abs(float(cur.values.get(nb, Fraction(0)) - aj)))
        levels.append(cur.level)
        diffs.append(max(coarse, modulus))
        prev = cur
    rate = None
    tail = [d for d in diffs[len(diffs) // 2:] if d > 0]
    if len(tail) >= 2:
        rate = (tail[-1] / tail[0]) ** (1.0 / (len(tail) - 1))
    return {
        "levels": levels,
        "differences": diffs,
        "rate": rate,
        "note": ("diagnostic only: successive-level differences stand in for "
                 "the unavailable limit function"),
    }
