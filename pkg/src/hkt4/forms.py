"""Exact exterior calculus on R^4 minus the origin: wedge, d, the action of a
constant complex structure on forms, the twisted differential, (p,q)
projections, Hodge star and the Lambda contraction.

Conventions (see docs/conventions.md):
  * orientation is dx0 ^ dx1 ^ dx2 ^ dx3;
  * a structure matrix L acts on forms as the pullback (L a)(X1..Xm)
    = a(L X1, .., L Xm), i.e. by the transpose of L on covectors;
  * the twisted differential carries one global sign, DC_SIGN = -1, chosen
    so that d d^c_L of phi = r^2 is a positive (1,1)-form on the flat chart.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Dict, Tuple

from .exact import QI, ScalarField, _frac
from .quaternions import IDENTITY, Matrix, squares_to_minus_id

IndexTuple = Tuple[int, ...]

# Global sign of the twisted differential relative to the bare composition
# (-1)^m L d L; fixed by the positivity self test below.
DC_SIGN = -1

_ALL_TUPLES = {m: tuple(itertools.combinations(range(4), m)) for m in range(5)}

TOP = (0, 1, 2, 3)


class DegreeError(ValueError):
    pass


def _merge_sign(s: IndexTuple, t: IndexTuple):
    """Sorted merge of disjoint index tuples with the permutation sign."""
    if set(s) & set(t):
        return None, 0
    inversions = sum(1 for a in s for b in t if a > b)
    merged = tuple(sorted(s + t))
    return merged, -1 if inversions % 2 else 1


class RationalForm:
    """Differential form of pure degree with ScalarField coefficients.

    Only strictly increasing index tuples are stored, so antisymmetry is
    structural.
    """

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs: Dict[IndexTuple, ScalarField] | None = None):
        if not 0 <= degree <= 4:
            raise DegreeError(f"form degree must be in 0..4, got {degree}")
        self.degree = degree
        cleaned: Dict[IndexTuple, ScalarField] = {}
        if coeffs:
            for t, f in coeffs.items():
                t = tuple(t)
                if len(t) != degree or list(t) != sorted(set(t)):
                    raise ValueError(f"bad index tuple {t} for degree {degree}")
                f = ScalarField.coerce(f)
                if not f.is_zero():
                    cleaned[t] = f
        self.coeffs = cleaned

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(degree: int) -> "RationalForm":
        return RationalForm(degree)

    @staticmethod
    def function(f) -> "RationalForm":
        f = ScalarField.coerce(f)
        return RationalForm(0, {(): f})

    @staticmethod
    def dx(i: int) -> "RationalForm":
        return RationalForm(1, {(i,): ScalarField.const(1)})

    @staticmethod
    def basis(indices: IndexTuple, coeff=1) -> "RationalForm":
        return RationalForm(len(indices), {tuple(indices): ScalarField.coerce(coeff)})

    @staticmethod
    def volume() -> "RationalForm":
        return RationalForm.basis(TOP)

    # -- ring structure -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        if not isinstance(other, RationalForm):
            return NotImplemented
        if other.degree != self.degree:
            raise DegreeError("cannot add forms of different degree")
        out = dict(self.coeffs)
        for t, f in other.coeffs.items():
            s = out.get(t)
            s = f if s is None else s + f
            if s.is_zero():
                out.pop(t, None)
            else:
                out[t] = s
        r = RationalForm.__new__(RationalForm)
        r.degree, r.coeffs = self.degree, out
        return r

    def __neg__(self):
        r = RationalForm.__new__(RationalForm)
        r.degree = self.degree
        r.coeffs = {t: -f for t, f in self.coeffs.items()}
        return r

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, ScalarField):
            s = scalar
        elif isinstance(scalar, (int, Fraction, QI)):
            s = ScalarField.const(QI.coerce(scalar))
        else:
            return NotImplemented
        out = {}
        for t, f in self.coeffs.items():
            p = f * s
            if not p.is_zero():
                out[t] = p
        r = RationalForm.__new__(RationalForm)
        r.degree, r.coeffs = self.degree, out
        return r

    __rmul__ = __mul__

    def conj(self) -> "RationalForm":
        r = RationalForm.__new__(RationalForm)
        r.degree = self.degree
        r.coeffs = {t: f.conj() for t, f in self.coeffs.items()}
        return r

    def __eq__(self, other):
        if not isinstance(other, RationalForm):
            return NotImplemented
        return self.degree == other.degree and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.degree, frozenset(self.coeffs.items())))

    def max_abs_coeff(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(f.max_abs_coeff() for f in self.coeffs.values())

    def __repr__(self):
        if not self.coeffs:
            return f"0 (degree {self.degree})"
        parts = []
        for t in sorted(self.coeffs):
            body = "^".join(f"dx{i}" for i in t) if t else "1"
            parts.append(f"({self.coeffs[t]!r}) {body}")
        return " + ".join(parts)


def wedge(a: RationalForm, b: RationalForm) -> RationalForm:
    """Exterior product; degree overflow past the top degree is an error."""
    m = a.degree + b.degree
    if m > 4:
        raise DegreeError(f"wedge degree {a.degree}+{b.degree} exceeds 4")
    out: Dict[IndexTuple, ScalarField] = {}
    for s, fs in a.coeffs.items():
        for t, ft in b.coeffs.items():
            merged, sign = _merge_sign(s, t)
            if sign == 0:
                continue
            term = fs * ft
            if sign < 0:
                term = -term
            prev = out.get(merged)
            term = term if prev is None else prev + term
            if term.is_zero():
                out.pop(merged, None)
            else:
                out[merged] = term
    r = RationalForm.__new__(RationalForm)
    r.degree, r.coeffs = m, out
    return r


def exterior_d(a: RationalForm) -> RationalForm:
    """Exterior derivative with exact coefficients."""
    if a.degree > 3:
        raise DegreeError("d of a top-degree form is not defined here")
    out: Dict[IndexTuple, ScalarField] = {}
    for t, f in a.coeffs.items():
        for mu in range(4):
            if mu in t:
                continue
            df = f.partial(mu)
            if df.is_zero():
                continue
            merged, sign = _merge_sign((mu,), t)
            term = df if sign > 0 else -df
            prev = out.get(merged)
            term = term if prev is None else prev + term
            if term.is_zero():
                out.pop(merged, None)
            else:
                out[merged] = term
    r = RationalForm.__new__(RationalForm)
    r.degree, r.coeffs = a.degree + 1, out
    return r


@lru_cache(maxsize=None)
def _covector_rows(L: Matrix):
    """L(dx_i) as coefficient tuples: row i of L."""
    return tuple(tuple(QI.coerce(L[i][j]) for j in range(4)) for i in range(4))


def _check_acs(L: Matrix):
    if not squares_to_minus_id(L):
        raise ValueError("matrix does not square to -Id")


@lru_cache(maxsize=None)
def _action_matrix(L: Matrix, degree: int):
    """Matrix of the pullback action on degree-m basis forms over QI."""
    rows = _covector_rows(L)
    tuples = _ALL_TUPLES[degree]
    index = {t: i for i, t in enumerate(tuples)}
    cols = {}
    for t in tuples:
        acc: Dict[IndexTuple, QI] = {(): QI(1)}
        for i in t:
            nxt: Dict[IndexTuple, QI] = {}
            for part, c in acc.items():
                for j in range(4):
                    cij = rows[i][j]
                    if cij.is_zero():
                        continue
                    merged, sign = _merge_sign(part, (j,))
                    if sign == 0:
                        continue
                    term = c * cij
                    if sign < 0:
                        term = -term
                    prev = nxt.get(merged, QI(0)) + term
                    if prev.is_zero():
                        nxt.pop(merged, None)
                    else:
                        nxt[merged] = prev
            acc = nxt
        cols[t] = acc
    out = [[QI(0)] * len(tuples) for _ in range(len(tuples))]
    for t, col in cols.items():
        for s, c in col.items():
            out[index[s]][index[t]] = c
    return tuple(tuple(row) for row in out)


def structure_action(L: Matrix, a: RationalForm) -> RationalForm:
    """(L a)(X1..Xm) = a(L X1, .., L Xm); coefficients stay at the base point
    because L is constant on the chart."""
    _check_acs(L)
    if a.degree == 0:
        return a
    mat = _action_matrix(L, a.degree)
    tuples = _ALL_TUPLES[a.degree]
    index = {t: i for i, t in enumerate(tuples)}
    out: Dict[IndexTuple, ScalarField] = {}
    for t, f in a.coeffs.items():
        j = index[t]
        for i, s in enumerate(tuples):
            c = mat[i][j]
            if c.is_zero():
                continue
            term = f * c
            prev = out.get(s)
            term = term if prev is None else prev + term
            if term.is_zero():
                out.pop(s, None)
            else:
                out[s] = term
    r = RationalForm.__new__(RationalForm)
    r.degree, r.coeffs = a.degree, out
    return r


def twisted_d(L: Matrix, a: RationalForm) -> RationalForm:
    """Twisted differential of an m-form: DC_SIGN * (-1)^m * L(d(L(a))).

    The bare composition leaves the overall sign of d^c ambiguous; DC_SIGN
    normalizes it so that d(d^c phi) is positive on the flat chart (checked
    once by a self test).
    """
    _selftest_positive_ddc()
    if a.degree > 3:
        raise DegreeError("twisted differential needs degree <= 3")
    sign = DC_SIGN * (-1 if a.degree % 2 else 1)
    res = structure_action(L, exterior_d(structure_action(L, a)))
    return res if sign > 0 else -res


@lru_cache(maxsize=1)
def _selftest_positive_ddc() -> bool:
    # dd^c_I(r^2) must equal 4(dx0^dx1 + dx2^dx3) with the left I; this pins
    # DC_SIGN once and detects convention regressions at first use.
    from .quaternions import structure_matrix

    I = structure_matrix("left", (1, 0, 0))
    phi = RationalForm.function(ScalarField.phi())
    sign = DC_SIGN  # twisted_d on a 0-form, written out to avoid recursion
    dcphi = structure_action(I, exterior_d(structure_action(I, phi)))
    dcphi = dcphi if sign > 0 else -dcphi
    ddc = exterior_d(dcphi)
    expected = RationalForm(2, {(0, 1): ScalarField.const(4),
                                (2, 3): ScalarField.const(4)})
    if ddc != expected:
        raise AssertionError("twisted differential sign convention broken")
    return True


def pq_project(L: Matrix, a: RationalForm, p: int, q: int) -> RationalForm:
    """Projection onto the (p,q) part of a complexified form w.r.t. L.

    Each basis covector splits as dx_i = pi^{1,0} dx_i + pi^{0,1} dx_i with
    pi^{1,0} = (1 - sqrt(-1) L)/2; expanding the product over a basis m-form
    and collecting terms of bidegree (p,q) gives the projector exactly.
    """
    _check_acs(L)
    if p < 0 or q < 0 or p + q != a.degree:
        raise DegreeError(f"(p,q)=({p},{q}) incompatible with degree {a.degree}")
    if a.degree == 0:
        return a
    rows = _covector_rows(L)
    i_unit = QI(0, 1)
    half = QI(Fraction(1, 2))

    def split(i: int):
        # returns ((1,0) piece, (0,1) piece) as coefficient dicts over dx_j
        base = {i: QI(1)}
        lrow = {j: rows[i][j] for j in range(4) if not rows[i][j].is_zero()}
        plus = {}
        minus = {}
        for j in range(4):
            b = base.get(j, QI(0))
            l = lrow.get(j, QI(0))
            pc = (b - i_unit * l) * half
            mc = (b + i_unit * l) * half
            if not pc.is_zero():
                plus[j] = pc
            if not mc.is_zero():
                minus[j] = mc
        return plus, minus

    splits = {i: split(i) for i in range(4)}
    out: Dict[IndexTuple, ScalarField] = {}
    for t, f in a.coeffs.items():
        for choice in itertools.product((0, 1), repeat=a.degree):
            if choice.count(0) != p:
                continue
            # wedge the chosen pieces in the order of t
            acc: Dict[IndexTuple, QI] = {(): QI(1)}
            for pos, i in enumerate(t):
                piece = splits[i][choice[pos]]
                nxt: Dict[IndexTuple, QI] = {}
                for part, c in acc.items():
                    for j, cj in piece.items():
                        merged, sign = _merge_sign(part, (j,))
                        if sign == 0:
                            continue
                        term = c * cj
                        if sign < 0:
                            term = -term
                        prev = nxt.get(merged, QI(0)) + term
                        if prev.is_zero():
                            nxt.pop(merged, None)
                        else:
                            nxt[merged] = prev
                acc = nxt
                if not acc:
                    break
            for s, c in acc.items():
                term = f * c
                prev = out.get(s)
                term = term if prev is None else prev + term
                if term.is_zero():
                    out.pop(s, None)
                else:
                    out[s] = term
    r = RationalForm.__new__(RationalForm)
    r.degree, r.coeffs = a.degree, out
    return r


# ---------------------------------------------------------------------------
# Constant metrics, Hodge star, Lambda contraction


def _fraction_sqrt(v: Fraction) -> Fraction:
    if v < 0:
        raise ValueError("negative determinant")
    n, d = v.numerator, v.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn != n or rd * rd != d:
        raise ValueError("metric determinant is not a rational square; "
                         "exact Hodge star unavailable")
    return Fraction(rn, rd)


class ConstantMetric:
    """Symmetric positive-definite 4x4 matrix of exact rationals."""

    __slots__ = ("matrix", "_inv", "_sqrt_det")

    def __init__(self, matrix):
        m = tuple(tuple(_frac(v) for v in row) for row in matrix)
        if len(m) != 4 or any(len(r) != 4 for r in m):
            raise ValueError("metric must be 4x4")
        for i in range(4):
            for j in range(4):
                if m[i][j] != m[j][i]:
                    raise ValueError("metric must be symmetric")
        for k in range(1, 5):
            if _det([row[:k] for row in m[:k]]) <= 0:
                raise ValueError("metric must be positive definite")
        self.matrix = m
        self._inv = None
        self._sqrt_det = None

    @staticmethod
    def euclidean() -> "ConstantMetric":
        return ConstantMetric(IDENTITY)

    def det(self) -> Fraction:
        return _det([list(r) for r in self.matrix])

    def sqrt_det(self) -> Fraction:
        if self._sqrt_det is None:
            self._sqrt_det = _fraction_sqrt(self.det())
        return self._sqrt_det

    def inverse(self):
        if self._inv is None:
            self._inv = _mat_inverse(self.matrix)
        return self._inv

    def __eq__(self, other):
        if not isinstance(other, ConstantMetric):
            return NotImplemented
        return self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"ConstantMetric({self.matrix})"


def _det(m) -> Fraction:
    n = len(m)
    if n == 1:
        return _frac(m[0][0])
    total = Fraction(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = _frac(m[0][j]) * _det(minor)
        total += term if j % 2 == 0 else -term
    return total


def _mat_inverse(m):
    n = len(m)
    aug = [[_frac(m[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def _perm_sign(seq) -> int:
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq))
              if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def _basis_inner(ginv, s: IndexTuple, t: IndexTuple) -> Fraction:
    """<dx_s, dx_t> = det of the inverse-metric minor (rows s, cols t)."""
    if not s:
        return Fraction(1)
    sub = [[ginv[a][b] for b in t] for a in s]
    return _det(sub)


def hodge_star(g: ConstantMetric, a: RationalForm) -> RationalForm:
    """Hodge star for a constant metric and the fixed orientation dx0123."""
    ginv = g.inverse()
    sd = g.sqrt_det()
    m = a.degree
    out: Dict[IndexTuple, ScalarField] = {}
    for s in _ALL_TUPLES[4 - m]:
        sc = tuple(i for i in range(4) if i not in s)
        eps = _perm_sign(sc + s)
        total = None
        for t, f in a.coeffs.items():
            w = _basis_inner(ginv, sc, t)
            if w == 0:
                continue
            term = f * (w * sd * eps)
            total = term if total is None else total + term
        if total is not None and not total.is_zero():
            out[s] = total
    r = RationalForm.__new__(RationalForm)
    r.degree, r.coeffs = 4 - m, out
    return r


def lambda_contract(omega: RationalForm, a: RationalForm) -> ScalarField:
    """Lambda(a) defined by a ^ omega = Lambda(a) vol with vol = omega^2/2."""
    if omega.degree != 2 or a.degree != 2:
        raise DegreeError("lambda contraction needs two 2-forms")
    vol2 = wedge(omega, omega)
    if vol2.is_zero():
        raise ValueError("degenerate hermitian form: omega ^ omega = 0")
    vol_coeff = vol2.coeffs[TOP] * Fraction(1, 2)
    top = wedge(a, omega)
    num = top.coeffs.get(TOP)
    if num is None:
        return ScalarField.const(0)
    return num.div_exact(vol_coeff)


def scale_pullback(a: RationalForm, q) -> RationalForm:
    """Pullback of the form under x -> q*x, exact for rational q != 0."""
    q = _frac(q)
    if q == 0:
        raise ValueError("scale factor must be nonzero")
    factor = q ** a.degree
    out = {}
    for t, f in a.coeffs.items():
        g = f.scale_arguments(q) * factor
        if not g.is_zero():
            out[t] = g
    r = RationalForm.__new__(RationalForm)
    r.degree, r.coeffs = a.degree, out
    return r
