"""Regularity analysis of refinable functions.

Every exponent here is a logarithm of a joint spectral quantity of the
transition family restricted to an invariant subspace: global Hölder
exponents in C and L_p (per spectral block of the dilation, the worst
block wins), local exponents at adic points (the tail product decides,
the best block wins), logarithmic corrections to the modulus of
continuity (resonance degrees), and first-derivative analysis along the
eigen-directions of the dilation.  Radii arrive as certified intervals,
so exponents are intervals too; verdicts state only what the interval
supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import ratlinalg as rla
from .evaluate import BoundaryCheck, boundary_consistency, periodic_point, adic_point
from .lattice import IfsGeometry, IntersectKind, SpectralSplit, point_in_attractor, \
    spectral_split
from .spectral import JsrResult, PRadiusResult, ResonanceInfo, ResonanceInconclusiveError, \
    RankAmbiguousError, NotSignNormalizableError, invariant_polytope, jsr_bounds, \
    p_radius_bounds, p_radius_even, p_radius_one_nonneg, resonance_degree_family, \
    resonance_degree_matrix, spectral_radius
from .transition import DominantInconclusiveError, StrategyInconclusiveError, Subspace, \
    TransitionFamily, block_difference_subspaces, conditioned_subspace, \
    difference_subspace, dominant_subspace, irreducibility_test, mean_eigenvector, \
    origin_eigenvector, restrict, sum_zero_subspace, _grow_invariant, make_subspace


class RegularityError(Exception):
    pass


# ---------------------------------------------------------------------------
# report types


@dataclass(eq=False)
class BlockExponent:
    """Hölder data of one spectral block of the dilation."""

    index: int                    # 0-based block number (moduli ascending)
    modulus: float                # eigenvalue modulus r of the dilation block
    block_dim: int                # dimension of the root subspace in R^s
    subspace_dim: int             # dimension of the invariant subspace U_i
    radius_lower: float
    radius_upper: float
    alpha_lower: float            # from radius_upper
    alpha_upper: float            # from radius_lower; inf when the radius is 0
    certified: bool
    subspace: Subspace | None = None
    notes: str = ""


@dataclass(eq=False)
class HolderReport:
    kind: str                     # "C" | "Lp"
    p: float | None
    alpha_lower: float | None
    alpha_upper: float | None
    member: bool | None           # in C(R^s) resp. L_p(R^s)
    verdict: str
    special_case: str             # Isotropic | Irreducible | Dominant | General
    blocks: list[BlockExponent]
    radius_lower: float | None    # joint radius on the full difference space
    radius_upper: float | None
    radius_method: str
    spectral_radius_m: float
    boundary: BoundaryCheck | None = None
    smp_word: tuple[int, ...] | None = None
    notes: list[str] = field(default_factory=list)


@dataclass(eq=False)
class LpExistence:
    p: float
    member: bool | None
    radius: PRadiusResult | None
    subspace_dim: int | None
    verdict: str
    notes: list[str] = field(default_factory=list)


@dataclass(eq=False)
class ModulusReport:
    alpha: float | None
    log_exponent: float | None    # nu in omega(t) <= C t^alpha |log t|^nu
    sharp: str                    # "Yes" | "Unknown"
    lipschitz: bool
    attaining: list[int]          # indices of blocks attaining the minimum
    notes: list[str] = field(default_factory=list)


@dataclass(eq=False)
class LocalReport:
    point: tuple[Fraction, ...]
    prefix: tuple[int, ...]
    tail: tuple[int, ...]
    alpha: float | None
    block_alphas: list[float]
    equality_certified: bool
    in_tile: str                  # "yes" | "unknown"
    on_seam: bool | None          # True when another chart covers the point
    notes: list[str] = field(default_factory=list)


@dataclass(eq=False)
class DirectionReport:
    eigenvalue: Fraction
    multiplicity: int
    reciprocal_is_eigenvalue: bool
    subspace_dim: int | None
    radius_lower: float | None
    radius_upper: float | None
    derivative_alpha_lower: float | None
    derivative_alpha_upper: float | None
    boundary: BoundaryCheck | None
    passes: bool | None           # True/False certified, None undetermined
    notes: str = ""


@dataclass(eq=False)
class DerivativeReport:
    verdict: str                  # "C¹" | "not C¹" | "Undetermined"
    directions: list[DirectionReport]
    notes: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# helpers


def _alpha_interval(radius_lower: float, radius_upper: float,
                    modulus: float) -> tuple[float, float]:
    """alpha = -ln rho / ln r for a block of eigenvalue modulus r > 1;
    a smaller radius means a larger exponent, so bounds swap roles."""
    t = math.log(modulus)
    lo = -math.log(radius_upper) / t if radius_upper > 0 else math.inf
    up = -math.log(radius_lower) / t if radius_lower > 0 else math.inf
    return lo, up


def _jsr_oracle(mats) -> tuple[float, float]:
    br = jsr_bounds(mats, max_len=6)
    return br.lower, br.upper


@dataclass(eq=False)
class _Structure:
    v0: list[Fraction]
    diff: Subspace
    restricted: object
    global_jsr: JsrResult
    case: str
    block_subspaces: list[Subspace]
    notes: list[str]


def _zero_jsr() -> JsrResult:
    return JsrResult(lower=0.0, upper=0.0, certified=True,
                     method="invariant-polytope", polytope_vertices=0,
                     notes="zero-dimensional restriction")


def _structure(fam: TransitionFamily, split: SpectralSplit, seed,
               strategy: str, search_len: int, need_blocks: bool = True
               ) -> _Structure:
    """Common skeleton: difference space, its joint radius, the special
    case of the block decomposition, and one invariant subspace per
    spectral block of the dilation."""
    notes: list[str] = []
    diff = difference_subspace(fam, seed)
    if diff.dim == 0:
        jsr = _zero_jsr()
        return _Structure(seed, diff, None, jsr, "Isotropic" if split.q == 1
                          else "General",
                          [diff] * split.q, notes)
    ru = restrict(fam, diff)
    jsr = invariant_polytope(ru, search_len=search_len)
    if split.q == 1:
        return _Structure(seed, diff, ru, jsr, "Isotropic", [diff], notes)
    irr = irreducibility_test(ru)
    if irr.kind == "Irreducible":
        notes.append("restricted family is irreducible: every block subspace "
                     "equals the whole difference space")
        return _Structure(seed, diff, ru, jsr, "Irreducible",
                          [diff] * split.q, notes)
    dom = None
    if not need_blocks:
        try:
            dom = dominant_subspace(ru, _jsr_oracle)
        except DominantInconclusiveError as exc:
            notes.append(f"dominant-subspace probe inconclusive: {exc}")
    if dom is not None:
        notes.append("a dominant subspace carries the full joint radius: "
                     "every nonzero block subspace inherits it")
        return _Structure(seed, diff, ru, jsr, "Dominant",
                          [diff] * split.q, notes)
    try:
        subs = block_difference_subspaces(fam, diff, split, origin=seed,
                                          strategy=strategy)
    except StrategyInconclusiveError as exc:
        notes.append(f"block subspace strategy inconclusive ({exc}); every "
                     "block falls back to the full difference space, so "
                     "per-block exponents may be conservative")
        subs = [diff] * split.q
    return _Structure(seed, diff, ru, jsr, "General", subs, notes)


def _block_exponents(fam: TransitionFamily, split: SpectralSplit,
                     st: _Structure, search_len: int) -> list[BlockExponent]:
    out: list[BlockExponent] = []
    for i in range(split.q):
        sub = st.block_subspaces[i]
        if st.case in ("Isotropic", "Irreducible", "Dominant") or \
                rla.span_equal([list(c) for c in sub.columns],
                               [list(c) for c in st.diff.columns]):
            jsr = st.global_jsr
        elif sub.dim == 0:
            jsr = _zero_jsr()
        else:
            jsr = invariant_polytope(restrict(fam, sub), search_len=search_len)
        lo, up = _alpha_interval(jsr.lower, jsr.upper, split.moduli[i])
        out.append(BlockExponent(
            index=i, modulus=split.moduli[i], block_dim=split.dims[i],
            subspace_dim=sub.dim, radius_lower=jsr.lower, radius_upper=jsr.upper,
            alpha_lower=lo, alpha_upper=up,
            certified=jsr.certified and not sub.approximate,
            subspace=sub,
            notes="approximate block basis" if sub.approximate else ""))
    return out


# ---------------------------------------------------------------------------
# global Hölder regularity in C


def holder_C(fam: TransitionFamily, split: SpectralSplit | None = None,
             boundary_depth: int = 5, search_len: int = 8,
             strategy: str = "auto") -> HolderReport:
    """Global Hölder exponent in C: per spectral block of the dilation,
    alpha_i = -ln rho(family on U_i) / ln r_i, and the minimum over blocks
    is the exponent; membership in C needs the joint radius below 1 plus
    cross-chart agreement at the tile seams."""
    if split is None:
        split = spectral_split(fam.dil)
    res = origin_eigenvector(fam)
    if res.vector is None:
        return HolderReport(
            kind="C", p=None, alpha_lower=None, alpha_upper=None, member=False,
            verdict="not continuous", special_case="-", blocks=[],
            radius_lower=None, radius_upper=None, radius_method="-",
            spectral_radius_m=split.spectral_radius,
            notes=[f"origin eigenvector not unique ({res.status}): a continuous "
                   "compactly supported solution would determine it"])
    st = _structure(fam, split, res.vector, strategy, search_len,
                    need_blocks=False)
    blocks = _block_exponents(fam, split, st, search_len)
    alpha_lo = min(b.alpha_lower for b in blocks)
    alpha_up = min(b.alpha_upper for b in blocks)
    jsr = st.global_jsr
    member: bool | None
    if jsr.upper < 1.0:
        member = True
    elif jsr.lower >= 1.0:
        member = False
    else:
        member = None
    boundary = None
    notes = list(st.notes)
    if member is True:
        boundary = boundary_consistency(fam, res.vector, depth=boundary_depth)
        if boundary.status == "Passed":
            verdict = "continuous"
        elif boundary.status == "Skipped":
            verdict = "v continuous on G; global continuity unverified"
        else:
            verdict = "discontinuous on R^s"
            notes.append(f"seam witness: {boundary.witness}")
    elif member is False:
        verdict = "not continuous"
    else:
        verdict = "undetermined"
        notes.append("joint radius interval straddles 1")
    report = HolderReport(
        kind="C", p=None, alpha_lower=alpha_lo, alpha_upper=alpha_up,
        member=member, verdict=verdict, special_case=st.case, blocks=blocks,
        radius_lower=jsr.lower, radius_upper=jsr.upper, radius_method=jsr.method,
        spectral_radius_m=split.spectral_radius, boundary=boundary,
        smp_word=jsr.smp_word, notes=notes)
    aniso = anisotropic_lipschitz_check(report, split)
    if aniso is not None:
        report.notes.append(aniso)
    return report


def holder_directional(fam: TransitionFamily, split: SpectralSplit | None = None,
                       search_len: int = 8, strategy: str = "auto"
                       ) -> list[BlockExponent]:
    """Per-block directional exponents: block i governs increments along
    the root subspace of the dilation eigenvalues of modulus r_i."""
    return holder_C(fam, split=split, boundary_depth=0,
                    search_len=search_len, strategy=strategy).blocks


def anisotropic_lipschitz_check(report: HolderReport,
                                split: SpectralSplit) -> str | None:
    """For an anisotropic dilation (q >= 2) an exponent >= 1 forces the
    restricted family to be reducible and its radius to stay above
    1/rho(M); returns a note when the flag applies, None otherwise."""
    if split.q < 2 or report.alpha_lower is None or report.alpha_lower < 1.0:
        return None
    floor = 1.0 / split.spectral_radius
    rel = ">" if (report.radius_lower or 0.0) > floor else "<="
    return (f"anisotropic Lipschitz flag: exponent >= 1 with q = {split.q} "
            f"blocks forces a reducible family; joint radius "
            f"{report.radius_lower:.6g} {rel} 1/rho(M) = {floor:.6g}")


# ---------------------------------------------------------------------------
# L_p


def _p_radius(rf, p: float, max_len: int = 8) -> PRadiusResult:
    if getattr(rf, "subspace", None) is not None and rf.subspace.dim == 0:
        return PRadiusResult(p=p, method="EvenLift", value=0.0, lower=0.0,
                             upper=0.0, notes="zero-dimensional restriction")
    if p == 1:
        try:
            return p_radius_one_nonneg(rf)
        except NotSignNormalizableError as exc:
            out = p_radius_bounds(rf, p=1, max_len=max_len)
            out.notes = (out.notes + "; " if out.notes else "") + \
                f"sign normalization failed: {exc}"
            return out
    if p == int(p) and int(p) % 2 == 0:
        return p_radius_even(rf, p=int(p))
    return p_radius_bounds(rf, p=p, max_len=max_len)


def exists_Lp(fam: TransitionFamily, p: float, max_len: int = 8) -> LpExistence:
    """Existence of an L_p solution: the averaged p-radius of the family
    on the difference space seeded by the mean vector must drop below 1."""
    res = mean_eigenvector(fam)
    if res.vector is None:
        return LpExistence(p=p, member=False, radius=None, subspace_dim=None,
                           verdict="not in L_p",
                           notes=[f"mean matrix has no usable unit eigenvector "
                                  f"({res.status})"])
    uz = difference_subspace(fam, res.vector, label="U_z")
    pr = _p_radius(restrict(fam, conditioned_subspace(uz)), p, max_len=max_len)
    lo = pr.lower if pr.lower is not None else pr.value
    up = pr.upper if pr.upper is not None else pr.value
    if up < 1.0:
        member, verdict = True, "in L_p"
    elif lo >= 1.0:
        member, verdict = False, "not in L_p"
    else:
        member, verdict = None, "undetermined"
    return LpExistence(p=p, member=member, radius=pr, subspace_dim=uz.dim,
                       verdict=verdict)


def holder_Lp(fam_tilde: TransitionFamily, p: float,
              split: SpectralSplit | None = None, search_len: int = 8,
              max_len: int = 8, strategy: str = "auto") -> HolderReport:
    """Global Hölder exponent in L_p from the extended index set: the
    family restricted to the full sum-zero subspace W and its spectral
    blocks; alpha_{p,i} = -ln rho_p(block) / ln r_i, minimum over blocks."""
    if split is None:
        split = spectral_split(fam_tilde.dil)
    w = sum_zero_subspace(fam_tilde.size)
    rw = restrict(fam_tilde, w)
    pr = _p_radius(rw, p, max_len=max_len)
    notes: list[str] = [f"exponents use logarithm base rho(M) = "
                        f"{split.spectral_radius:.6g}"]
    # block subspaces inside W
    if split.q == 1:
        subs = [w]
        case = "Isotropic"
    else:
        irr = irreducibility_test(rw)
        if irr.kind == "Irreducible":
            subs = [w] * split.q
            case = "Irreducible"
        else:
            zres = mean_eigenvector(fam_tilde)
            if zres.vector is None:
                subs = [w] * split.q
                case = "General"
                notes.append(f"no mean vector ({zres.status}): block subspaces "
                             "fall back to the full sum-zero space")
            else:
                subs = block_difference_subspaces(fam_tilde, w, split,
                                                  origin=zres.vector,
                                                  strategy=strategy)
                case = "General"
    blocks: list[BlockExponent] = []
    for i in range(split.q):
        sub = subs[i]
        if rla.span_equal([list(c) for c in sub.columns],
                          [list(c) for c in w.columns]):
            bpr = pr
        else:
            bpr = _p_radius(restrict(fam_tilde, conditioned_subspace(sub)), p,
                            max_len=max_len)
        blo = bpr.lower if bpr.lower is not None else bpr.value
        bup = bpr.upper if bpr.upper is not None else bpr.value
        lo, up = _alpha_interval(bup, blo, split.moduli[i])
        blocks.append(BlockExponent(
            index=i, modulus=split.moduli[i], block_dim=split.dims[i],
            subspace_dim=sub.dim, radius_lower=blo, radius_upper=bup,
            alpha_lower=lo, alpha_upper=up,
            certified=abs(bup - blo) <= 1e-12 * max(1.0, bup)
            and not sub.approximate,
            subspace=sub))
    alpha_lo = min(b.alpha_lower for b in blocks)
    alpha_up = min(b.alpha_upper for b in blocks)
    glo = pr.lower if pr.lower is not None else pr.value
    gup = pr.upper if pr.upper is not None else pr.value
    if gup < 1.0:
        member, verdict = True, "in L_p"
    elif glo >= 1.0:
        member, verdict = False, "not in L_p"
    else:
        member, verdict = None, "undetermined"
    return HolderReport(
        kind="Lp", p=p, alpha_lower=alpha_lo, alpha_upper=alpha_up,
        member=member, verdict=verdict, special_case=case, blocks=blocks,
        radius_lower=glo, radius_upper=gup, radius_method=pr.method,
        spectral_radius_m=split.spectral_radius, notes=notes)


# ---------------------------------------------------------------------------
# modulus of continuity


def modulus_report(fam: TransitionFamily, report: HolderReport | None = None,
                   split: SpectralSplit | None = None, tol: float = 1e-9
                   ) -> ModulusReport:
    """Logarithmic correction to the Hölder modulus: on each block that
    attains the exponent, nu = alpha * nu_M + nu_A, where nu_M is the
    resonance degree of the dilation block and nu_A that of the
    restricted family at its joint radius; the modulus is certified sharp
    only when every attaining degree is exactly zero."""
    if split is None:
        split = spectral_split(fam.dil)
    if report is None:
        report = holder_C(fam, split=split)
    if report.alpha_lower is None or not report.blocks:
        return ModulusReport(alpha=None, log_exponent=None, sharp="Unknown",
                             lipschitz=False, attaining=[],
                             notes=["no exponent available"])
    alpha = report.alpha_lower
    attaining = [b.index for b in report.blocks
                 if b.alpha_lower <= alpha + tol]
    notes: list[str] = []
    log_exp = 0.0
    sharp = "Yes"
    exactness = True
    for i in attaining:
        blk = report.blocks[i]
        try:
            nu_m = resonance_degree_matrix(split.block_matrices[i])
        except RankAmbiguousError as exc:
            notes.append(f"block {i}: dilation resonance ambiguous ({exc})")
            sharp = "Unknown"
            exactness = False
            continue
        if blk.subspace is None or blk.subspace.dim == 0:
            nu_a = ResonanceInfo(value_or_bound=0.0, exact=True,
                                 method="IrreducibleZero",
                                 notes="zero-dimensional restriction")
        else:
            try:
                nu_a = resonance_degree_family(restrict(fam, blk.subspace))
            except (ResonanceInconclusiveError, RankAmbiguousError) as exc:
                notes.append(f"block {i}: family resonance inconclusive ({exc})")
                sharp = "Unknown"
                exactness = False
                continue
        log_exp = max(log_exp, alpha * nu_m.value_or_bound + nu_a.value_or_bound)
        if not (nu_m.exact and nu_a.exact and nu_m.value_or_bound == 0
                and nu_a.value_or_bound == 0):
            sharp = "Unknown"
        if not (nu_m.exact and nu_a.exact):
            exactness = False
    if not exactness:
        notes.append("log exponent is an upper bound, not exact")
    lipschitz = sharp == "Yes" and abs(alpha - 1.0) <= 1e-9 and \
        (report.alpha_upper or 0.0) >= 1.0 - 1e-9
    if lipschitz:
        notes.append("exponent 1 with sharp modulus: the function is Lipschitz")
    return ModulusReport(alpha=alpha, log_exponent=log_exp, sharp=sharp,
                         lipschitz=lipschitz, attaining=attaining, notes=notes)


# ---------------------------------------------------------------------------
# local exponent at an adic point


def local_exponent(fam: TransitionFamily, tail: Sequence[int],
                   prefix: Sequence[int] = (),
                   split: SpectralSplit | None = None, search_len: int = 8,
                   strategy: str = "auto") -> LocalReport:
    """Local Hölder exponent at the eventually periodic adic point with
    the given digit prefix and repeating tail: per block, the spectral
    radius of the tail product on U_i in place of the joint radius, and
    the largest block value wins (locally the slowest contraction along
    the point's own orbit decides)."""
    if split is None:
        split = spectral_split(fam.dil)
    tail = tuple(int(t) for t in tail)
    prefix = tuple(int(t) for t in prefix)
    if not tail:
        raise RegularityError("tail must be a nonempty digit word")
    base = periodic_point(fam.dil, fam.digits, tail)
    if base is None:
        raise RegularityError("tail has no fixed point (dilation not expansive?)")
    point = adic_point(fam.dil, fam.digits, prefix, tail=base)
    res = origin_eigenvector(fam)
    if res.vector is None:
        raise RegularityError(
            f"origin eigenvector not unique ({res.status}); local exponents "
            "are defined through the continuous solution")
    st = _structure(fam, split, res.vector, strategy, search_len,
                    need_blocks=True)
    notes = list(st.notes)
    period = len(tail)
    block_alphas: list[float] = []
    certified = True
    for i in range(split.q):
        sub = st.block_subspaces[i]
        if sub.dim == 0:
            block_alphas.append(math.inf)
            continue
        rf = restrict(fam, sub)
        if not sub.approximate:
            prod = rla.identity(sub.dim)
            for t in tail:
                prod = rla.matmul(rf.matrices[t], prod)
            rho = spectral_radius(_to_float(prod))
            for mat in rf.matrices:
                if rla.det(mat) == 0:
                    certified = False
                    notes.append(f"block {i}: a restricted matrix is singular; "
                                 "the local value is an upper bound")
                    break
        else:
            import numpy as np
            fl = [np.array(m, dtype=float) for m in rf.matrices]
            acc = np.eye(sub.dim)
            for t in tail:
                acc = fl[t] @ acc
            rho = spectral_radius(acc)
            certified = False
            notes.append(f"block {i}: approximate basis; value not certified")
        if rho <= 0:
            block_alphas.append(math.inf)
        else:
            block_alphas.append(-math.log(rho) /
                                (period * math.log(split.moduli[i])))
    alpha = max(block_alphas) if block_alphas else None
    geo = IfsGeometry(fam.dil, fam.digits.digits)
    inside = point_in_attractor(geo, list(point))
    in_tile = "yes" if inside == IntersectKind.INTERSECTING else "unknown"
    on_seam = _on_seam(geo, fam.dil.dim, point)
    if on_seam:
        notes.append("point lies on a chart seam (another integer translate "
                     "of the tile covers it); the exponent is chart-local")
    return LocalReport(point=point, prefix=prefix, tail=tail, alpha=alpha,
                       block_alphas=block_alphas, equality_certified=certified,
                       in_tile=in_tile, on_seam=on_seam, notes=notes)


def _to_float(mat: rla.Mat):
    import numpy as np
    return np.array([[float(x) for x in row] for row in mat])


def _on_seam(geo: IfsGeometry, s: int, point: tuple[Fraction, ...]) -> bool | None:
    import itertools
    rad = float(geo.ball.radius)
    spans = [range(-int(math.ceil(rad + abs(float(point[i])))) - 1,
                   int(math.ceil(rad + abs(float(point[i])))) + 2)
             for i in range(s)]
    unknown = False
    for j in itertools.product(*spans):
        if all(x == 0 for x in j):
            continue
        shifted = [point[i] + j[i] for i in range(s)]
        if any(abs(float(x)) > rad + 1e-9 for x in shifted):
            continue
        kind = point_in_attractor(geo, shifted)
        if kind == IntersectKind.INTERSECTING:
            return True
        if kind == IntersectKind.UNKNOWN:
            unknown = True
    return None if unknown else False


# ---------------------------------------------------------------------------
# derivatives


def _integer_eigenvalues(dil) -> tuple[list[tuple[int, int]], int]:
    """Integer eigenvalues of the dilation with algebraic multiplicities,
    plus the degree of the remaining (integer-root-free) factor."""
    coeffs = rla.charpoly(dil.mat())          # monic, highest power first
    coeffs = [Fraction(c) for c in coeffs]
    const = coeffs[-1]
    roots: list[tuple[int, int]] = []
    # integer roots of a monic integer polynomial divide the constant term
    cand: set[int] = set()
    c_int = int(const) if const.denominator == 1 else 0
    if c_int != 0:
        for d in range(1, abs(c_int) + 1):
            if abs(c_int) % d == 0:
                cand.update((d, -d))
    for lam in sorted(cand, key=lambda x: (abs(x), x)):
        mult = 0
        while len(coeffs) > 1:
            val = Fraction(0)
            for c in coeffs:
                val = val * lam + c
            if val != 0:
                break
            # synthetic division by (x - lam)
            out = [coeffs[0]]
            for c in coeffs[1:-1]:
                out.append(c + out[-1] * lam)
            coeffs = out
            mult += 1
        if mult:
            roots.append((lam, mult))
    return roots, len(coeffs) - 1


def derivative_analysis(fam: TransitionFamily,
                        split: SpectralSplit | None = None,
                        holder: HolderReport | None = None,
                        boundary_depth: int = 5, search_len: int = 8
                        ) -> DerivativeReport:
    """C¹ analysis along the eigen-directions of the dilation.

    A direction with dilation eigenvalue lambda passes when 1/lambda is an
    eigenvalue of the zero-digit transition matrix, the family scaled by
    lambda contracts on the invariant closure of {lambda T_d w - w}, and
    the scaled seam check does not fail.  The scaled seam check is what
    rejects functions whose derivative data is consistent on the tile but
    jumps across translates: the closure above can collapse to {0} (the
    piecewise-linear fixture), and only the seam comparison of the
    derivative boundary values detects the kink.
    """
    if split is None:
        split = spectral_split(fam.dil)
    if holder is None:
        holder = holder_C(fam, split=split, boundary_depth=boundary_depth,
                          search_len=search_len)
    notes: list[str] = []
    if holder.verdict in ("not continuous", "discontinuous on R^s"):
        return DerivativeReport(verdict="not C¹", directions=[],
                                notes=["the function is not continuous"])
    if holder.alpha_upper is not None and holder.alpha_upper < 1.0:
        return DerivativeReport(
            verdict="not C¹", directions=[],
            notes=[f"Hölder exponent at most {holder.alpha_upper:.6g} < 1"])
    s = fam.dil.dim
    roots, leftover = _integer_eigenvalues(fam.dil)
    if leftover > 0:
        notes.append(f"{leftover} dilation eigenvalues are not integers; "
                     "those directions are unsupported")
    directions: list[DirectionReport] = []
    any_fail = False
    any_undet = leftover > 0
    mmat = fam.dil.mat()
    for lam, mult in roots:
        lamf = Fraction(lam)
        geo_rank = s - rla.rank(rla.mat_sub(mmat, rla.mat_scale(
            rla.identity(s), lamf)))
        dir_notes = ""
        if geo_rank < mult:
            directions.append(DirectionReport(
                eigenvalue=lamf, multiplicity=mult, reciprocal_is_eigenvalue=False,
                subspace_dim=None, radius_lower=None, radius_upper=None,
                derivative_alpha_lower=None, derivative_alpha_upper=None,
                boundary=None, passes=None,
                notes="defective dilation eigenvalue: unsupported"))
            any_undet = True
            continue
        t0 = fam.matrices[0]
        shifted = rla.mat_sub(t0, rla.mat_scale(rla.identity(fam.size),
                                                Fraction(1, lam)))
        null = rla.nullspace(shifted)
        if not null:
            directions.append(DirectionReport(
                eigenvalue=lamf, multiplicity=mult, reciprocal_is_eigenvalue=False,
                subspace_dim=None, radius_lower=None, radius_upper=None,
                derivative_alpha_lower=None, derivative_alpha_upper=None,
                boundary=None, passes=False,
                notes="1/lambda is not an eigenvalue of the zero-digit matrix: "
                      "no consistent derivative data exists"))
            any_fail = True
            continue
        if len(null) > 1:
            dir_notes = "derivative seed not unique; using the first basis vector"
            any_undet = True
        w = null[0]
        scaled = [rla.mat_scale(m, lamf) for m in fam.matrices]
        seeds = [rla.vec_sub(rla.matvec(sm, w), w) for sm in scaled]
        _, kept = _grow_invariant(scaled, seeds, fam.size)
        sub = make_subspace(fam.size, kept, label="U_deriv")
        if sub.dim == 0:
            jsr = _zero_jsr()
        else:
            jsr = invariant_polytope(restrict(scaled, sub), search_len=search_len)
        scaled_fam = TransitionFamily(
            mask=fam.mask, digits=fam.digits, omega=fam.omega,
            matrices=tuple(scaled), column_stochastic=False)
        boundary = boundary_consistency(scaled_fam, v0=w, depth=boundary_depth)
        alo, aup = _alpha_interval(jsr.lower, jsr.upper, abs(lam))
        passes: bool | None
        if jsr.lower >= 1.0 or boundary.status == "Failed":
            passes = False
            any_fail = True
        elif jsr.upper < 1.0 and boundary.status == "Passed" and len(null) == 1:
            passes = True
        else:
            passes = None
            any_undet = True
        directions.append(DirectionReport(
            eigenvalue=lamf, multiplicity=mult, reciprocal_is_eigenvalue=True,
            subspace_dim=sub.dim, radius_lower=jsr.lower, radius_upper=jsr.upper,
            derivative_alpha_lower=alo, derivative_alpha_upper=aup,
            boundary=boundary, passes=passes, notes=dir_notes))
    covered = sum(mult for _, mult in roots)
    if covered < s:
        any_undet = True
    if any_fail:
        verdict = "not C¹"
    elif not any_undet and directions and all(d.passes for d in directions) \
            and holder.verdict == "continuous":
        verdict = "C¹"
    else:
        verdict = "Undetermined"
        if holder.verdict != "continuous" and not any_fail:
            notes.append(f"base continuity verdict: {holder.verdict}")
    return DerivativeReport(verdict=verdict, directions=directions, notes=notes)
