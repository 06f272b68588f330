"""Exact linear algebra over the rationals.

Everything in this module works on ``list[list[Fraction]]`` matrices and
``list[Fraction]`` vectors, with no floating point anywhere.  It exists
because the transition-matrix pipeline must make rank and kernel decisions
exactly; a float rank at tolerance would silently change the computed
invariant subspaces.

Matrices are dense and small (a few hundred rows at most), so the simple
O(n^3) fraction-free-ish routines below are fast enough.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vec = list[Fraction]
Mat = list[list[Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)


def to_fraction(x) -> Fraction:
    """Coerce ints/strings/Fractions to Fraction; floats are rejected."""
    if isinstance(x, float):
        raise TypeError("refusing to coerce float to Fraction; pass an exact value")
    return Fraction(x)


def mat_copy(a: Mat) -> Mat:
    return [row[:] for row in a]


def identity(n: int) -> Mat:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def zeros(n: int, m: int) -> Mat:
    return [[ZERO] * m for _ in range(n)]


def matvec(a: Mat, v: Sequence[Fraction]) -> Vec:
    return [sum((row[j] * v[j] for j in range(len(v))), ZERO) for row in a]


def matmul(a: Mat, b: Mat) -> Mat:
    n, k, m = len(a), len(b), len(b[0])
    out = zeros(n, m)
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            ait = ai[t]
            if ait:
                bt = b[t]
                for j in range(m):
                    oi[j] += ait * bt[j]
    return out


def mat_add(a: Mat, b: Mat) -> Mat:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Mat, b: Mat) -> Mat:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Mat, c: Fraction) -> Mat:
    return [[c * x for x in row] for row in a]


def transpose(a: Mat) -> Mat:
    return [list(col) for col in zip(*a)]


def vec_sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vec:
    return [x - y for x, y in zip(u, v)]


def vec_add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vec:
    return [x + y for x, y in zip(u, v)]


def vec_scale(u: Sequence[Fraction], c: Fraction) -> Vec:
    return [c * x for x in u]


def vec_is_zero(u: Iterable[Fraction]) -> bool:
    return all(x == 0 for x in u)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), ZERO)


def rref(a: Mat) -> tuple[Mat, list[int]]:
    """Reduced row echelon form.  Returns (rref matrix, pivot column list).

    The result is the canonical representative of the row space: two
    matrices have equal row spans iff their rrefs (with zero rows dropped)
    are identical.
    """
    m = mat_copy(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot_row = None
        for i in range(r, rows):
            if m[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Mat) -> int:
    return len(rref(a)[1])


def nullspace(a: Mat) -> list[Vec]:
    """Basis of {x : a x = 0}, in the canonical rref parametrization."""
    if not a:
        return []
    red, pivots = rref(a)
    cols = len(a[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * cols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(a: Mat, b: Sequence[Fraction]) -> Vec | None:
    """One solution of a x = b, or None if inconsistent."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    aug = [a[i][:] + [Fraction(b[i])] for i in range(rows)]
    red, pivots = rref(aug)
    for r in range(len(pivots)):
        if pivots[r] == cols:
            return None  # pivot in the rhs column
    x = [ZERO] * cols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][cols]
    return x


def inverse(a: Mat) -> Mat:
    n = len(a)
    aug = [a[i][:] + identity(n)[i] for i in range(n)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in red]


def det(a: Mat) -> Fraction:
    """Determinant by fraction Gaussian elimination."""
    n = len(a)
    m = mat_copy(a)
    result = ONE
    for c in range(n):
        pivot_row = None
        for i in range(c, n):
            if m[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            return ZERO
        if pivot_row != c:
            m[c], m[pivot_row] = m[pivot_row], m[c]
            result = -result
        result *= m[c][c]
        inv = ONE / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return result


def charpoly(a: Mat) -> list[Fraction]:
    """Coefficients of det(xI - A), highest degree first, computed by the
    Faddeev-LeVerrier recursion (exact, O(n^4))."""
    n = len(a)
    coeffs = [ONE]
    mk = identity(n)
    for k in range(1, n + 1):
        mk = matmul(a, mk)
        tr = sum((mk[i][i] for i in range(n)), ZERO)
        ck = -tr / k
        coeffs.append(ck)
        for i in range(n):
            mk[i][i] += ck
    return coeffs


def poly_divmod(num: Sequence[Fraction], den: Sequence[Fraction]) -> tuple[Vec, Vec]:
    """Polynomial long division; coefficients highest degree first."""
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    while den and den[0] == 0:
        den = den[1:]
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    quot: Vec = []
    rem = num[:]
    dn = len(den)
    while len(rem) >= dn:
        lead = rem[0] / den[0]
        quot.append(lead)
        for i in range(dn):
            rem[i] -= lead * den[i]
        assert rem[0] == 0
        rem.pop(0)
    while rem and rem[0] == 0:
        rem.pop(0)
    return quot, rem


def poly_eval_matrix(coeffs: Sequence[Fraction], a: Mat) -> Mat:
    """Evaluate a polynomial (highest degree first) at a square matrix."""
    n = len(a)
    out = zeros(n, n)
    for c in coeffs:
        out = matmul(out, a)
        for i in range(n):
            out[i][i] += c
    return out


class SpanBuilder:
    """Incrementally grown rational row span with exact rank decisions.

    Vectors are reduced against the pivots accumulated so far; a vector
    that leaves a nonzero remainder is appended (after pivot
    normalization), so insertion order is reproducible and the stored
    basis is in echelon form.
    """

    def __init__(self, ambient: int):
        self.ambient = ambient
        self.rows: Mat = []          # echelon rows, each with leading 1
        self.pivot_cols: list[int] = []

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, v: Sequence[Fraction]) -> Vec:
        w = [Fraction(x) for x in v]
        for row, pc in zip(self.rows, self.pivot_cols):
            if w[pc] != 0:
                f = w[pc]
                w = [x - f * y for x, y in zip(w, row)]
        return w

    def contains(self, v: Sequence[Fraction]) -> bool:
        return vec_is_zero(self.reduce(v))

    def add(self, v: Sequence[Fraction]) -> bool:
        """Add a vector; True if it enlarged the span."""
        w = self.reduce(v)
        pc = next((j for j, x in enumerate(w) if x != 0), None)
        if pc is None:
            return False
        inv = ONE / w[pc]
        w = [x * inv for x in w]
        # keep rows sorted by pivot column so the basis is canonical-ish
        idx = 0
        while idx < len(self.pivot_cols) and self.pivot_cols[idx] < pc:
            idx += 1
        self.rows.insert(idx, w)
        self.pivot_cols.insert(idx, pc)
        # re-reduce earlier rows against the new pivot
        for i in range(len(self.rows)):
            if i == idx:
                continue
            f = self.rows[i][pc]
            if f != 0:
                self.rows[i] = [x - f * y for x, y in zip(self.rows[i], w)]
        return True

    def basis(self) -> Mat:
        return mat_copy(self.rows)

    def coordinates(self, v: Sequence[Fraction]) -> Vec | None:
        """Coefficients expressing v in the stored echelon basis, or None
        if v is outside the span.  With fully reduced rows, the
        coefficient on row i is just v[pivot_cols[i]]."""
        w = [Fraction(x) for x in v]
        coords = [w[pc] for pc in self.pivot_cols]
        resid = list(w)
        for c, row in zip(coords, self.rows):
            if c != 0:
                resid = [x - c * y for x, y in zip(resid, row)]
        if not vec_is_zero(resid):
            return None
        return coords


def span_equal(a: Mat, b: Mat) -> bool:
    """Row-span equality via canonical rref comparison."""
    ra, pa = rref(a) if a else ([], [])
    rb, pb = rref(b) if b else ([], [])
    ra = [r for r in ra if not vec_is_zero(r)]
    rb = [r for r in rb if not vec_is_zero(r)]
    return ra == rb
