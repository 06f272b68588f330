"""Config files, command orchestration, and machine-readable reports.

The config grammar (sections [dilation], [digits], [mask], [options]),
the command set, and the JSON report schema are documented in README.md.
Reports are deterministic: identical config and options produce
byte-identical JSON apart from the ``timings`` member.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .lattice import (
    DigitSet,
    DilationData,
    LatticeError,
    SpectralSplit,
    spectral_split,
    standard_digits,
    validate_dilation,
    verify_digit_set,
)
from .mask import (
    Mask,
    MaskError,
    OmegaSet,
    compute_omega,
    compute_omega_tilde,
    make_admissible_simplex,
    make_mask,
)
from .transition import (
    TransitionError,
    TransitionFamily,
    build_transition,
    difference_subspace,
    origin_eigenvector,
    restrict,
)
from .spectral import JsrResult, PRadiusResult, SpectralError, invariant_polytope, jsr_bounds
from .regularity import (
    BlockExponent,
    DerivativeReport,
    HolderReport,
    LocalReport,
    ModulusReport,
    RegularityError,
    derivative_analysis,
    exists_Lp,
    holder_C,
    holder_Lp,
    local_exponent,
    modulus_report,
)
from .evaluate import (
    BoundaryCheck,
    EvaluateError,
    EvaluationTable,
    SubdivisionData,
    empirical_rate,
    evaluate_v,
    export_phi,
    subdivide,
    subdivision_rate,
)

SCHEMA_VERSION = 1

# rows embedded inline in an `evaluate` report before it switches to
# file-only output (the CSV export has no such limit)
_INLINE_ROW_CAP = 10000


# ---------------------------------------------------------------------------
# errors


class ConfigError(Exception):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """Positioned syntax errors; ``errors`` lists every (line, message)."""

    def __init__(self, line: int, message: str,
                 errors: Sequence[tuple[int, str]] | None = None):
        self.line = line
        self.message = message
        self.errors = list(errors) if errors else [(line, message)]
        super().__init__("; ".join(f"line {ln}: {msg}" for ln, msg in self.errors))


class ValidationError(ConfigError):
    """The config parsed but describes an inadmissible problem."""


# ---------------------------------------------------------------------------
# configuration types


@dataclass(frozen=True)
class AnalysisOptions:
    """Tunable depths, caps, tolerances, p values, and search lengths."""

    eval_depth: int = 3          # refinement depth for point-value tables
    boundary_depth: int = 5      # address depth of the seam consistency check
    smp_len: int = 8             # word length of the spectrum-maximizing search
    max_len: int = 8             # product length for bounds fallbacks
    p: tuple[Fraction, ...] = (Fraction(2),)   # Lebesgue exponents to analyze
    cap: int = 250000            # budget for evaluation table sizes
    tol: Fraction = Fraction(1, 10**8)         # boundary comparison tolerance
    precision: int = 12          # significant digits of decimal renderings
    sample_depth: int = 6        # support-hull sampling depth for index sets


@dataclass(frozen=True)
class ProblemConfig:
    """A dilation, a digit set (None = standard digits), a mask, options."""

    dim: int
    dilation: tuple[tuple[int, ...], ...]
    digits: tuple[tuple[int, ...], ...] | None
    coefficients: tuple[tuple[tuple[int, ...], Fraction], ...]
    options: AnalysisOptions = AnalysisOptions()


# ---------------------------------------------------------------------------
# parsing


_SECTIONS = ("dilation", "digits", "mask", "options")
_INT_OPTIONS = ("eval_depth", "boundary_depth", "smp_len", "max_len",
                "cap", "precision", "sample_depth")
_RAT_OPTIONS = ("tol",)


def _parse_ints(text: str) -> tuple[int, ...]:
    toks = text.split()
    if not toks:
        raise ValueError("expected integers")
    out = []
    for t in toks:
        try:
            out.append(int(t))
        except ValueError:
            raise ValueError(f"not an integer: {t!r}") from None
    return tuple(out)


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational: {text!r}") from None


def _rat_str(fr: Fraction) -> str:
    if fr.denominator == 1:
        return str(fr.numerator)
    return f"{fr.numerator}/{fr.denominator}"


def parse_config(text: str) -> ProblemConfig:
    """Parse the key-value config format into a validated ProblemConfig.

    Raises ParseError with every positioned syntax error collected, or
    ValidationError when the config parses but is inadmissible (non-square
    or non-expansive dilation, bad digit set, coefficients not summing to
    |det M|, ...).
    """
    rows: list[tuple[int, ...]] = []
    digit_rows: list[tuple[int, ...]] = []
    saw_digits = False
    coeffs: dict[tuple[int, ...], Fraction] = {}
    opts_seen: dict[str, object] = {}
    p_values: list[Fraction] = []
    errors: list[tuple[int, str]] = []
    section: str | None = None

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                errors.append((ln, "unterminated section header"))
                section = None
                continue
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                errors.append((ln, f"unknown section [{name}]"))
                section = None
                continue
            section = name
            if name == "digits":
                saw_digits = True
            continue
        if section is None:
            errors.append((ln, "content outside any valid section"))
            continue
        if "=" not in line:
            errors.append((ln, "expected 'key = value'"))
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        try:
            if section == "dilation":
                if key != "row":
                    raise ValueError(f"[dilation] accepts only 'row', got {key!r}")
                rows.append(_parse_ints(val))
            elif section == "digits":
                if key != "digit":
                    raise ValueError(f"[digits] accepts only 'digit', got {key!r}")
                digit_rows.append(_parse_ints(val))
            elif section == "mask":
                idx = _parse_ints(key)
                if idx in coeffs:
                    raise ValueError(f"duplicate mask index {' '.join(map(str, idx))}")
                coeffs[idx] = _parse_rational(val)
            else:  # options
                if key == "p":
                    p_values.append(_parse_rational(val))
                elif key in _INT_OPTIONS:
                    if key in opts_seen:
                        raise ValueError(f"duplicate option {key!r}")
                    try:
                        opts_seen[key] = int(val)
                    except ValueError:
                        raise ValueError(f"option {key} expects an integer, "
                                         f"got {val!r}") from None
                elif key in _RAT_OPTIONS:
                    if key in opts_seen:
                        raise ValueError(f"duplicate option {key!r}")
                    opts_seen[key] = _parse_rational(val)
                else:
                    raise ValueError(f"unknown option {key!r}")
        except ValueError as exc:
            errors.append((ln, str(exc)))

    if errors:
        raise ParseError(errors[0][0], errors[0][1], errors)

    # semantic validation
    if not rows:
        raise ValidationError("missing [dilation] section with at least one row")
    dim = len(rows)
    for r in rows:
        if len(r) != dim:
            raise ValidationError(
                f"dilation must be square: {dim} rows but a row of length {len(r)}")
    try:
        dil = validate_dilation([list(r) for r in rows])
    except LatticeError as exc:
        raise ValidationError(f"inadmissible dilation: {exc}") from None

    digits: tuple[tuple[int, ...], ...] | None = None
    if saw_digits and digit_rows:
        for d in digit_rows:
            if len(d) != dim:
                raise ValidationError(
                    f"digit {d} has length {len(d)}, expected {dim}")
        try:
            verify_digit_set(dil, [list(d) for d in digit_rows])
        except LatticeError as exc:
            raise ValidationError(f"inadmissible digit set: {exc}") from None
        digits = tuple(digit_rows)

    if not coeffs:
        raise ValidationError("missing [mask] section with at least one entry")
    for idx in coeffs:
        if len(idx) != dim:
            raise ValidationError(
                f"mask index {idx} has length {len(idx)}, expected {dim}")
    total = sum(coeffs.values(), Fraction(0))
    if total != dil.m:
        raise ValidationError(
            f"mask coefficients sum to {_rat_str(total)}, "
            f"expected |det M| = {dil.m}")

    if p_values:
        opts_seen["p"] = tuple(p_values)
    for pv in p_values:
        if pv < 1:
            raise ValidationError(f"p = {_rat_str(pv)} is below 1")
    try:
        options = AnalysisOptions(**opts_seen)
    except TypeError as exc:
        raise ValidationError(str(exc)) from None
    for name in _INT_OPTIONS:
        if getattr(options, name) < 0:
            raise ValidationError(f"option {name} must be nonnegative")

    return ProblemConfig(
        dim=dim,
        dilation=tuple(rows),
        digits=digits,
        coefficients=tuple(sorted(coeffs.items())),
        options=options,
    )


def serialize_config(cfg: ProblemConfig) -> str:
    """Canonical text for a config; parse_config(serialize_config(c)) == c."""
    out = ["[dilation]"]
    for r in cfg.dilation:
        out.append("row = " + " ".join(str(x) for x in r))
    if cfg.digits is not None:
        out.append("")
        out.append("[digits]")
        for d in cfg.digits:
            out.append("digit = " + " ".join(str(x) for x in d))
    out.append("")
    out.append("[mask]")
    for idx, c in cfg.coefficients:
        out.append(" ".join(str(x) for x in idx) + " = " + _rat_str(c))
    out.append("")
    out.append("[options]")
    o = cfg.options
    for name in _INT_OPTIONS:
        out.append(f"{name} = {getattr(o, name)}")
    out.append(f"tol = {_rat_str(o.tol)}")
    for pv in o.p:
        out.append(f"p = {_rat_str(pv)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# JSON rendering (deterministic: fixed significant digits, sorted keys)


def _num(x, precision: int):
    """Float/Fraction to a JSON number truncated to `precision` significant
    digits; infinities and NaN become strings (JSON has no literals for
    them), None passes through."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        x = float(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return float(f"{x:.{precision}g}")


def _rat_json(fr: Fraction, precision: int) -> dict:
    return {"rational": _rat_str(fr), "decimal": _num(fr, precision)}


def _vec_rat(vec, precision: int) -> dict:
    frs = [Fraction(x) for x in vec]
    return {"rational": [_rat_str(x) for x in frs],
            "decimal": [_num(x, precision) for x in frs]}


def _jsr_json(r: JsrResult, precision: int) -> dict:
    out = {
        "status": "Certified" if r.certified else "Bounds",
        "lower": _num(r.lower, precision),
        "upper": _num(r.upper, precision),
        "method": r.method,
        "notes": r.notes,
    }
    if r.certified:
        out["value"] = _num(r.value, precision)
    if r.smp_word is not None:
        out["smp_word"] = list(r.smp_word)
    if r.polytope_vertices is not None:
        out["polytope_vertices"] = r.polytope_vertices
    return out


def _prad_json(r: PRadiusResult, precision: int) -> dict:
    return {
        "status": "Certified" if r.value is not None else "Bounds",
        "p": _num(r.p, precision),
        "method": r.method,
        "value": _num(r.value, precision),
        "lower": _num(r.lower, precision),
        "upper": _num(r.upper, precision),
        "notes": r.notes,
    }


def _block_status(b: BlockExponent) -> str:
    if b.certified:
        return "Certified"
    if b.subspace is not None and b.subspace.approximate:
        return "Approximate"
    return "Bounds"


def _block_json(b: BlockExponent, precision: int) -> dict:
    status = _block_status(b)
    return {
        "index": b.index,
        "modulus": _num(b.modulus, precision),
        "block_dim": b.block_dim,
        "subspace_dim": b.subspace_dim,
        "radius": {"status": status,
                   "lower": _num(b.radius_lower, precision),
                   "upper": _num(b.radius_upper, precision)},
        "alpha": {"status": status,
                  "lower": _num(b.alpha_lower, precision),
                  "upper": _num(b.alpha_upper, precision)},
        "notes": b.notes,
    }


def _boundary_json(b: BoundaryCheck | None, precision: int) -> dict | None:
    if b is None:
        return None
    return {
        "status": b.status,
        "depth": b.depth,
        "tol": _num(b.tol, precision),
        "pairs_checked": b.pairs_checked,
        "witness": b.witness,
        "notes": b.notes,
    }


def _holder_json(rep: HolderReport, precision: int) -> dict:
    if rep.blocks and all(b.certified for b in rep.blocks):
        status = "Certified"
    elif rep.blocks and any(_block_status(b) == "Approximate" for b in rep.blocks):
        status = "Approximate"
    else:
        status = "Bounds"
    radius_certified = (rep.radius_method == "invariant-polytope"
                        and rep.radius_lower == rep.radius_upper)
    return {
        "kind": rep.kind,
        "p": _num(rep.p, precision),
        "alpha": {"status": status,
                  "lower": _num(rep.alpha_lower, precision),
                  "upper": _num(rep.alpha_upper, precision)},
        "member": rep.member,
        "verdict": rep.verdict,
        "special_case": rep.special_case,
        "joint_radius": {
            "status": "Certified" if radius_certified else "Bounds",
            "lower": _num(rep.radius_lower, precision),
            "upper": _num(rep.radius_upper, precision),
            "method": rep.radius_method,
        },
        "spectral_radius_m": _num(rep.spectral_radius_m, precision),
        "smp_word": list(rep.smp_word) if rep.smp_word is not None else None,
        "blocks": [_block_json(b, precision) for b in rep.blocks],
        "boundary": _boundary_json(rep.boundary, precision),
        "notes": list(rep.notes),
    }


def _modulus_json(rep: ModulusReport, precision: int) -> dict:
    return {
        "status": "Certified" if rep.sharp == "Yes" else "Bounds",
        "alpha": _num(rep.alpha, precision),
        "log_exponent": _num(rep.log_exponent, precision),
        "sharp": rep.sharp,
        "lipschitz": rep.lipschitz,
        "attaining_blocks": list(rep.attaining),
        "notes": list(rep.notes),
    }


def _local_json(rep: LocalReport, precision: int) -> dict:
    point = _vec_rat(rep.point, precision)
    return {
        "status": "Certified" if rep.equality_certified else "Approximate",
        "point": point,
        "prefix": list(rep.prefix),
        "tail": list(rep.tail),
        "alpha": _num(rep.alpha, precision),
        "block_alphas": [_num(a, precision) for a in rep.block_alphas],
        "in_tile": rep.in_tile,
        "on_seam": rep.on_seam,
        "notes": list(rep.notes),
    }


def _derivative_json(rep: DerivativeReport, precision: int) -> dict:
    dirs = []
    for d in rep.directions:
        if d.passes is True:
            status = "Certified"
        elif d.passes is False:
            status = "Certified"     # a certified failure is still certified
        else:
            status = "Bounds"
        dirs.append({
            "status": status,
            "eigenvalue": _rat_json(d.eigenvalue, precision),
            "multiplicity": d.multiplicity,
            "reciprocal_is_eigenvalue": d.reciprocal_is_eigenvalue,
            "subspace_dim": d.subspace_dim,
            "radius": {"lower": _num(d.radius_lower, precision),
                       "upper": _num(d.radius_upper, precision)},
            "derivative_alpha": {"lower": _num(d.derivative_alpha_lower, precision),
                                 "upper": _num(d.derivative_alpha_upper, precision)},
            "boundary": _boundary_json(d.boundary, precision),
            "passes": d.passes,
            "notes": d.notes,
        })
    return {
        "status": "Bounds" if rep.verdict == "Undetermined" else "Certified",
        "verdict": rep.verdict,
        "directions": dirs,
        "notes": list(rep.notes),
    }


def _omega_json(om: OmegaSet, precision: int) -> dict:
    return {
        "status": "Certified" if om.certified else "Approximate",
        "size": om.size,
        "members": [list(k) for k in om.members],
        "flags": list(om.flags),
    }


def _table_json(table: EvaluationTable, precision: int) -> dict:
    rows = []
    inline = len(table.entries) <= _INLINE_ROW_CAP
    if inline:
        for e in table.entries:
            rows.append({
                "address": list(e.address),
                "point": _vec_rat(e.point, precision),
                "values": _vec_rat(e.vector, precision),
            })
    out = {
        "status": "Certified" if table.exact else "Approximate",
        "kind": table.kind,
        "depth": table.depth,
        "row_count": len(table.entries),
        "omega": [list(k) for k in table.omega.members],
        "rows": rows,
    }
    if not inline:
        out["notes"] = (f"{len(table.entries)} rows exceed the inline report "
                        f"cap {_INLINE_ROW_CAP}; use --csv for the full table")
    elif table.notes:
        out["notes"] = table.notes
    return out


def _subdata_json(data: SubdivisionData, precision: int) -> dict:
    values = []
    for idx in data.support():
        values.append({"index": list(idx),
                       "value": _rat_json(data.values[idx], precision)})
    return {
        "status": "Certified",
        "level": data.level,
        "support_size": len(values),
        "values": values,
    }


def _matrices_digest(fam: TransitionFamily) -> str:
    """SHA-256 over a canonical exact rendering of the transition family."""
    parts = []
    for d, mat in zip(fam.digits.digits, fam.matrices):
        parts.append("d=" + ",".join(str(x) for x in d))
        for row in mat:
            parts.append(";".join(_rat_str(Fraction(x)) for x in row))
    return hashlib.sha256("\n".join(parts).encode()).hexdigest()


# ---------------------------------------------------------------------------
# pipeline plumbing


@dataclass(eq=False)
class _Pipeline:
    """Shared lazily-built objects for one config."""

    cfg: ProblemConfig
    dil: DilationData
    digits: DigitSet
    mask: Mask
    split: SpectralSplit
    _omega: OmegaSet | None = None
    _fam: TransitionFamily | None = None
    _omega_tilde: OmegaSet | None = None
    _fam_tilde: TransitionFamily | None = None

    @property
    def omega(self) -> OmegaSet:
        if self._omega is None:
            self._omega = compute_omega(self.mask, self.digits,
                                        sample_depth=self.cfg.options.sample_depth)
        return self._omega

    @property
    def fam(self) -> TransitionFamily:
        if self._fam is None:
            self._fam = build_transition(self.mask, self.digits, self.omega)
        return self._fam

    @property
    def omega_tilde(self) -> OmegaSet:
        if self._omega_tilde is None:
            simplex = make_admissible_simplex(self.split, self.dil)
            self._omega_tilde = compute_omega_tilde(
                self.mask, self.digits, simplex,
                sample_depth=self.cfg.options.sample_depth)
        return self._omega_tilde

    @property
    def fam_tilde(self) -> TransitionFamily:
        if self._fam_tilde is None:
            self._fam_tilde = build_transition(self.mask, self.digits,
                                               self.omega_tilde)
        return self._fam_tilde


def _build_pipeline(cfg: ProblemConfig) -> _Pipeline:
    dil = validate_dilation([list(r) for r in cfg.dilation])
    digits = (verify_digit_set(dil, [list(d) for d in cfg.digits])
              if cfg.digits is not None else standard_digits(dil))
    msk = make_mask(dil, {idx: c for idx, c in cfg.coefficients})
    return _Pipeline(cfg=cfg, dil=dil, digits=digits, mask=msk,
                     split=spectral_split(dil))


_STAGE_ERRORS = (LatticeError, MaskError, TransitionError, SpectralError,
                 RegularityError, EvaluateError)


class _Stages:
    """Stage runner: every stage gets timed; failures become per-stage
    error entries instead of crashing the run."""

    def __init__(self):
        self.results: dict = {}
        self.timings: dict[str, float] = {}
        self.errored = False

    def run(self, name: str, fn: Callable[[], dict]):
        t0 = time.perf_counter()
        try:
            self.results[name] = fn()
        except _STAGE_ERRORS as exc:
            self.results[name] = {"status": "Error",
                                  "error": f"{type(exc).__name__}: {exc}"}
            self.errored = True
        except Exception as exc:  # never panic on a valid config
            self.results[name] = {"status": "Error",
                                  "error": f"unexpected {type(exc).__name__}: {exc}"}
            self.errored = True
        finally:
            self.timings[name] = time.perf_counter() - t0


# ---------------------------------------------------------------------------
# report envelope


@dataclass(eq=False)
class ReportEnvelope:
    """Machine-readable result of one command on one config."""

    schema: int
    command: str
    config: ProblemConfig
    results: dict
    status: str            # "ok" | "inconclusive" | "error"
    timings: dict[str, float]

    @property
    def exit_code(self) -> int:
        return {"ok": 0, "inconclusive": 2}.get(self.status, 1)

    def to_json(self) -> str:
        precision = self.config.options.precision
        obj = {
            "schema": self.schema,
            "command": self.command,
            "config": _config_json(self.config, precision),
            "results": self.results,
            "status": self.status,
            "timings": {k: round(v, 6) for k, v in sorted(self.timings.items())},
        }
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _config_json(cfg: ProblemConfig, precision: int) -> dict:
    o = cfg.options
    return {
        "dim": cfg.dim,
        "dilation": [list(r) for r in cfg.dilation],
        "digits": [list(d) for d in cfg.digits] if cfg.digits is not None else None,
        "mask": [{"index": list(idx), "value": _rat_json(c, precision)}
                 for idx, c in cfg.coefficients],
        "options": {
            "eval_depth": o.eval_depth,
            "boundary_depth": o.boundary_depth,
            "smp_len": o.smp_len,
            "max_len": o.max_len,
            "p": [_rat_json(pv, precision) for pv in o.p],
            "cap": o.cap,
            "tol": _rat_json(o.tol, precision),
            "precision": o.precision,
            "sample_depth": o.sample_depth,
        },
    }


# ---------------------------------------------------------------------------
# stage implementations


def _stage_transition(pipe: _Pipeline, precision: int) -> dict:
    fam = pipe.fam
    res = origin_eigenvector(fam)
    u_dim = None
    v0 = None
    if res.vector is not None:
        u_dim = difference_subspace(fam, res.vector).dim
        v0 = _vec_rat(res.vector, precision)
    return {
        "status": "Certified" if fam.column_stochastic else "Approximate",
        "digest": _matrices_digest(fam),
        "m": fam.digits.count,
        "dim_V": fam.size,
        "column_stochastic": fam.column_stochastic,
        "v0_status": res.status,
        "v0": v0,
        "dim_U": u_dim,
    }


def _jsr_convention_zero(note: str) -> JsrResult:
    return JsrResult(lower=0.0, upper=0.0, certified=True,
                     method="invariant-polytope", polytope_vertices=0,
                     notes=note)


def _stage_jsr(pipe: _Pipeline, search_len: int, certify: bool,
               max_len: int, precision: int) -> dict:
    fam = pipe.fam
    res = origin_eigenvector(fam)
    if res.vector is None:
        return {"status": "Error",
                "error": f"origin eigenvector not available ({res.status})"}
    sub = difference_subspace(fam, res.vector)
    if sub.dim == 0:
        out = _jsr_json(_jsr_convention_zero(
            "zero-dimensional restriction: joint spectral radius 0 by "
            "convention"), precision)
    else:
        rf = restrict(fam, sub)
        if certify:
            out = _jsr_json(invariant_polytope(rf, search_len=search_len),
                            precision)
        else:
            out = _jsr_json(jsr_bounds(rf, max_len=max_len), precision)
    out["dim_U"] = sub.dim
    return out


def _anisotropy_flag(split: SpectralSplit) -> bool:
    return split.q >= 2


def _stage_rate(pipe: _Pipeline, p: Fraction | None, precision: int) -> dict:
    o = pipe.cfg.options
    rate = subdivision_rate(pipe.fam_tilde, p=float(p) if p is not None else None,
                            search_len=o.smp_len, max_len=o.max_len,
                            anisotropic=_anisotropy_flag(pipe.split))
    if isinstance(rate, JsrResult):
        body = _jsr_json(rate, precision)
    else:
        body = _prad_json(rate, precision)
    return {
        "status": body["status"],
        "omega_tilde_size": pipe.omega_tilde.size,
        "p": _num(p, precision),
        "tau": body,
        "anisotropic": _anisotropy_flag(pipe.split),
    }


# ---------------------------------------------------------------------------
# commands


def _cmd_analyze(pipe: _Pipeline) -> _Stages:
    o = pipe.cfg.options
    prec = o.precision
    st = _Stages()
    st.run("omega", lambda: _omega_json(pipe.omega, prec))
    st.run("transition", lambda: _stage_transition(pipe, prec))
    st.run("jsr", lambda: _stage_jsr(pipe, o.smp_len, True, o.max_len, prec))

    holder: dict = {}

    def run_holder() -> dict:
        rep = holder_C(pipe.fam, split=pipe.split,
                       boundary_depth=o.boundary_depth, search_len=o.smp_len)
        holder["rep"] = rep
        return _holder_json(rep, prec)

    st.run("holder_C", run_holder)
    if "rep" in holder:
        st.run("modulus", lambda: _modulus_json(
            modulus_report(pipe.fam, report=holder["rep"], split=pipe.split),
            prec))
    st.run("omega_tilde", lambda: _omega_json(pipe.omega_tilde, prec))

    def run_lp() -> dict:
        per_p = []
        for pv in o.p:
            existence = exists_Lp(pipe.fam, float(pv), max_len=o.max_len)
            rep = holder_Lp(pipe.fam_tilde, float(pv), split=pipe.split,
                            search_len=o.smp_len)
            per_p.append({
                "p": _rat_json(pv, prec),
                "existence": {
                    "status": "Certified" if existence.member is not None else "Bounds",
                    "member": existence.member,
                    "verdict": existence.verdict,
                    "subspace_dim": existence.subspace_dim,
                    "radius": _prad_json(existence.radius, prec)
                    if existence.radius is not None else None,
                    "notes": list(existence.notes),
                },
                "holder": _holder_json(rep, prec),
            })
        return {"status": "Certified", "per_p": per_p}

    st.run("lp", run_lp)
    st.run("local", lambda: _local_json(
        local_exponent(pipe.fam, tail=(0,), prefix=(), split=pipe.split,
                       search_len=o.smp_len), prec))
    st.run("derivative", lambda: _derivative_json(
        derivative_analysis(pipe.fam, split=pipe.split,
                            holder=holder.get("rep"),
                            boundary_depth=o.boundary_depth,
                            search_len=o.smp_len), prec))
    st.run("subdivision", lambda: _stage_rate(pipe, None, prec))
    return st


def _cmd_holder(pipe: _Pipeline, space: str, p: Fraction | None) -> _Stages:
    o = pipe.cfg.options
    prec = o.precision
    st = _Stages()
    if space == "C":
        holder: dict = {}

        def run_holder() -> dict:
            rep = holder_C(pipe.fam, split=pipe.split,
                           boundary_depth=o.boundary_depth,
                           search_len=o.smp_len)
            holder["rep"] = rep
            return _holder_json(rep, prec)

        st.run("holder_C", run_holder)
        if "rep" in holder:
            st.run("modulus", lambda: _modulus_json(
                modulus_report(pipe.fam, report=holder["rep"],
                               split=pipe.split), prec))
    else:
        pv = p if p is not None else (o.p[0] if o.p else Fraction(2))

        def run_lp() -> dict:
            existence = exists_Lp(pipe.fam, float(pv), max_len=o.max_len)
            rep = holder_Lp(pipe.fam_tilde, float(pv), split=pipe.split,
                            search_len=o.smp_len)
            return {
                "status": "Certified" if existence.member is not None else "Bounds",
                "p": _rat_json(pv, prec),
                "existence": {
                    "member": existence.member,
                    "verdict": existence.verdict,
                    "subspace_dim": existence.subspace_dim,
                    "radius": _prad_json(existence.radius, prec)
                    if existence.radius is not None else None,
                    "notes": list(existence.notes),
                },
                "holder": _holder_json(rep, prec),
            }

        st.run("holder_Lp", run_lp)
    return st


def _cmd_jsr(pipe: _Pipeline, smp_len: int | None, certify: bool) -> _Stages:
    o = pipe.cfg.options
    st = _Stages()
    st.run("jsr", lambda: _stage_jsr(pipe, smp_len or o.smp_len, certify,
                                     smp_len or o.max_len, o.precision))
    return st


def _parse_word(token: str, m: int, what: str) -> tuple[int, ...]:
    """Digit-index word: comma-separated indices, or one index per
    character when the digit count fits in one decimal digit."""
    token = token.strip()
    if token == "":
        return ()
    if "," in token:
        parts = [t.strip() for t in token.split(",")]
    elif m <= 10:
        parts = list(token)
    else:
        parts = [token]
    out = []
    for t in parts:
        try:
            idx = int(t)
        except ValueError:
            raise ValidationError(f"{what}: not a digit index: {t!r}") from None
        if not 0 <= idx < m:
            raise ValidationError(
                f"{what}: digit index {idx} outside 0..{m - 1}")
        out.append(idx)
    return tuple(out)


def _cmd_local(pipe: _Pipeline, prefix: str, period: str) -> _Stages:
    o = pipe.cfg.options
    m = pipe.digits.count
    pre = _parse_word(prefix, m, "--prefix")
    tail = _parse_word(period, m, "--period")
    if not tail:
        raise ValidationError("--period must name at least one digit index")
    st = _Stages()
    st.run("local", lambda: _local_json(
        local_exponent(pipe.fam, tail=tail, prefix=pre, split=pipe.split,
                       search_len=o.smp_len), o.precision))
    return st


def _cmd_derivatives(pipe: _Pipeline) -> _Stages:
    o = pipe.cfg.options
    st = _Stages()
    st.run("derivative", lambda: _derivative_json(
        derivative_analysis(pipe.fam, split=pipe.split,
                            boundary_depth=o.boundary_depth,
                            search_len=o.smp_len), o.precision))
    return st


def _cmd_evaluate(pipe: _Pipeline, depth: int, csv: str | None) -> _Stages:
    o = pipe.cfg.options
    st = _Stages()

    def run() -> dict:
        table = evaluate_v(pipe.fam, depth, cap=o.cap)
        out = _table_json(table, o.precision)
        if csv:
            export_phi(table, fmt="csv", path=csv, precision=o.precision)
            out["csv"] = csv
        return out

    st.run("evaluate", run)
    return st


def _read_subdivision_input(path: str, mask: Mask) -> SubdivisionData:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read --input {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"--input {path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or "values" not in obj:
        raise ValidationError(
            f"--input {path}: expected an object with a 'values' member")
    values: dict[tuple[int, ...], Fraction] = {}
    raw = obj["values"]
    items = raw.items() if isinstance(raw, dict) else \
        ((e["index"], e["value"]) for e in raw)
    try:
        for key, val in items:
            idx = tuple(int(x) for x in
                        (key.split() if isinstance(key, str) else key))
            if len(idx) != mask.dil.dim:
                raise ValueError(f"index {idx} has wrong dimension")
            values[idx] = Fraction(str(val))
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise ValidationError(f"--input {path}: {exc}") from None
    return SubdivisionData(level=int(obj.get("level", 0)), values=values,
                           mask=mask)


def _cmd_subdivide(pipe: _Pipeline, iters: int, input_path: str | None) -> _Stages:
    st = _Stages()

    def run() -> dict:
        data = (_read_subdivision_input(input_path, pipe.mask)
                if input_path else None)
        out = subdivide(pipe.mask, data, iterations=iters)
        return _subdata_json(out, pipe.cfg.options.precision)

    st.run("subdivide", run)
    return st


def _cmd_rate(pipe: _Pipeline, p: Fraction | None) -> _Stages:
    o = pipe.cfg.options
    st = _Stages()
    st.run("rate", lambda: _stage_rate(pipe, p, o.precision))

    def run_empirical() -> dict:
        diag = empirical_rate(pipe.mask, iterations=8)
        return {
            "status": "Approximate",
            "levels": diag["levels"],
            "differences": [_num(d, o.precision) for d in diag["differences"]],
            "rate": _num(diag["rate"], o.precision),
            "notes": diag["note"],
        }

    st.run("empirical", run_empirical)
    return st


# ---------------------------------------------------------------------------
# outcome classification


def _walk_statuses(node, out: list[str]):
    if isinstance(node, dict):
        status = node.get("status")
        if isinstance(status, str):
            out.append(status)
        for v in node.values():
            _walk_statuses(v, out)
    elif isinstance(node, list):
        for v in node:
            _walk_statuses(v, out)


_INCONCLUSIVE_VERDICTS = ("undetermined", "Undetermined", "inconclusive")


def _classify(command: str, st: _Stages, certify: bool = False) -> str:
    """Map stage results to the envelope status: 'error' when any stage
    failed, 'inconclusive' when the command's primary question got no
    definite answer, 'ok' otherwise."""
    if st.errored:
        return "error"
    res = st.results
    if command == "jsr":
        if certify and res.get("jsr", {}).get("status") != "Certified":
            return "inconclusive"
        return "ok"
    if command == "rate":
        return "ok" if res.get("rate", {}).get("tau", {}).get("status") == \
            "Certified" else "inconclusive"
    if command == "local":
        return "ok" if res.get("local", {}).get("alpha") is not None \
            else "inconclusive"
    if command == "derivatives":
        verdict = res.get("derivative", {}).get("verdict")
        return "inconclusive" if verdict in _INCONCLUSIVE_VERDICTS else "ok"
    if command == "holder":
        reps = [res.get("holder_C"), res.get("holder_Lp", {}).get("holder")
                if "holder_Lp" in res else None]
        for rep in reps:
            if rep and rep.get("verdict") in _INCONCLUSIVE_VERDICTS:
                return "inconclusive"
        return "ok"
    if command == "analyze":
        hc = res.get("holder_C", {})
        members = [hc.get("member")]
        for entry in res.get("lp", {}).get("per_p", []):
            members.append(entry.get("existence", {}).get("member"))
        if all(mb is None for mb in members) and members:
            return "inconclusive"
        return "ok"
    return "ok"


# ---------------------------------------------------------------------------
# public entry points


def run_command(cmd: str, config: ProblemConfig, **kwargs) -> ReportEnvelope:
    """Run one command against a parsed config, returning the envelope.

    kwargs mirror the CLI flags of the given command (space, p, smp_len,
    certify, prefix, period, depth, csv, iters, input).
    """
    pipe = _build_pipeline(config)
    certify = bool(kwargs.get("certify", False))
    if cmd == "analyze":
        st = _cmd_analyze(pipe)
    elif cmd == "holder":
        space = kwargs.get("space", "C")
        if space not in ("C", "Lp"):
            raise ValidationError(f"--space must be C or Lp, got {space!r}")
        st = _cmd_holder(pipe, space, kwargs.get("p"))
    elif cmd == "jsr":
        st = _cmd_jsr(pipe, kwargs.get("smp_len"), certify)
    elif cmd == "local":
        st = _cmd_local(pipe, kwargs.get("prefix", ""), kwargs.get("period", ""))
    elif cmd == "derivatives":
        st = _cmd_derivatives(pipe)
    elif cmd == "evaluate":
        st = _cmd_evaluate(pipe, int(kwargs.get("depth", config.options.eval_depth)),
                           kwargs.get("csv"))
    elif cmd == "subdivide":
        st = _cmd_subdivide(pipe, int(kwargs.get("iters", 1)),
                            kwargs.get("input"))
    elif cmd == "rate":
        st = _cmd_rate(pipe, kwargs.get("p"))
    else:
        raise ValidationError(f"unknown command {cmd!r}")
    return ReportEnvelope(
        schema=SCHEMA_VERSION,
        command=cmd,
        config=config,
        results=st.results,
        status=_classify(cmd, st, certify=certify),
        timings=st.timings,
    )


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="refreg",
                     description="Regularity analysis of refinable functions "
                                 "via transition matrices")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a problem config file")
        p.add_argument("--out", help="write the JSON report to this file "
                                     "instead of stdout")
        return p

    add("analyze", "full pipeline: index sets, matrices, joint spectral "
                   "radius, Hölder in C and L_p, local exponent, "
                   "derivatives, subdivision rate")

    p = add("holder", "global Hölder exponent in C or L_p")
    p.add_argument("--space", choices=("C", "Lp"), default="C")
    p.add_argument("--p", type=Fraction, default=None,
                   help="Lebesgue exponent for --space Lp (default: first "
                        "p from [options])")

    p = add("jsr", "joint spectral radius of the family restricted to the "
                   "difference subspace")
    p.add_argument("--smp-len", type=int, default=None, dest="smp_len",
                   help="spectrum-maximizing word search length")
    p.add_argument("--certify", action="store_true",
                   help="run the invariant-polytope certification instead "
                        "of bounds")

    p = add("local", "local Hölder exponent at an M-adic or eventually "
                     "periodic point")
    p.add_argument("--prefix", default="",
                   help="digit-index word before the repeating part")
    p.add_argument("--period", required=True,
                   help="repeating digit-index word (required)")

    add("derivatives", "directional differentiability along integer "
                       "eigenvalue directions of the dilation")

    p = add("evaluate", "exact point-value table at M-adic points")
    p.add_argument("--depth", type=int, required=True,
                   help="refinement depth k (all m^k addresses)")
    p.add_argument("--csv", default=None,
                   help="also write the table as CSV to this path")

    p = add("subdivide", "apply the subdivision operator to integer-grid data")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--input", default=None,
                   help="JSON file with {level, values}; default: unit "
                        "impulse at the origin")

    p = add("rate", "subdivision scheme convergence rate over the extended "
                    "index set")
    p.add_argument("--p", type=Fraction, default=None,
                   help="L_p rate instead of the uniform rate")
    return parser


def _error_envelope(command: str, exc: Exception) -> str:
    obj: dict = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "status": "error",
        "error": {"type": type(exc).__name__, "message": str(exc)},
    }
    if isinstance(exc, ParseError):
        obj["error"]["errors"] = [{"line": ln, "message": msg}
                                  for ln, msg in exc.errors]
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    command = args.command
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(_error_envelope(command, exc), end="")
        return 1
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(_error_envelope(command, exc), end="")
        return 1

    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "out")}
    try:
        envelope = run_command(command, cfg, **flags)
    except ConfigError as exc:
        print(_error_envelope(command, exc), end="")
        return 1

    report = envelope.to_json()
    if args.out:
        Path(args.out).write_text(report)
    else:
        print(report, end="")
    return envelope.exit_code


if __name__ == "__main__":
    sys.exit(main())
