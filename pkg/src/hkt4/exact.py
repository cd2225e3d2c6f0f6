"""Exact coefficient arithmetic: Gaussian rationals, 4-variable polynomials,
and rational fields of the shape P / phi^k with phi = x0^2 + x1^2 + x2^2 + x3^2.

Every identity downstream is certified by exact zero tests in this ring, so
no floating point is allowed anywhere in this module.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rat = Union[int, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"not an exact rational: {v!r}")


class QI:
    """Gaussian rational a + b*sqrt(-1) with exact rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @staticmethod
    def coerce(v) -> "QI":
        if isinstance(v, QI):
            return v
        return QI(_frac(v))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def conj(self) -> "QI":
        return QI(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        o = QI.coerce(other)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __sub__(self, other):
        o = QI.coerce(other)
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return QI.coerce(other) - self

    def __mul__(self, other):
        o = QI.coerce(other)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QI.coerce(other)
        d = o.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QI((self.re * o.re + self.im * o.im) / d,
                  (self.im * o.re - self.re * o.im) / d)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QI(other)
        if not isinstance(other, QI):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"{self.re}"
        if self.re == 0:
            return f"{self.im}*i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"


I_UNIT = QI(0, 1)

# Monomials are exponent 4-tuples (e0, e1, e2, e3).
Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])


def _mono_divides(a: Monomial, b: Monomial) -> bool:
    return all(b[i] >= a[i] for i in range(4))


def _mono_div(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3])


class Poly:
    """Polynomial in x0..x3 with QI coefficients, stored sparsely."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Monomial, QI] | None = None):
        cleaned = {}
        if coeffs:
            for m, c in coeffs.items():
                c = QI.coerce(c)
                if not c.is_zero():
                    cleaned[tuple(m)] = c
        self.coeffs = cleaned

    @staticmethod
    def zero() -> "Poly":
        return Poly()

    @staticmethod
    def const(c) -> "Poly":
        c = QI.coerce(c)
        return Poly({(0, 0, 0, 0): c}) if c else Poly()

    @staticmethod
    def variable(i: int) -> "Poly":
        e = [0, 0, 0, 0]
        e[i] = 1
        return Poly({tuple(e): QI(1)})

    @staticmethod
    def coerce(v) -> "Poly":
        if isinstance(v, Poly):
            return v
        return Poly.const(v)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(m == (0, 0, 0, 0) for m in self.coeffs)

    def constant_value(self) -> QI:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.coeffs.get((0, 0, 0, 0), QI(0))

    def degree(self) -> int:
        if not self.coeffs:
            return -1
        return max(sum(m) for m in self.coeffs)

    def __add__(self, other):
        o = Poly.coerce(other)
        out = dict(self.coeffs)
        for m, c in o.coeffs.items():
            s = out.get(m, QI(0)) + c
            if s.is_zero():
                out.pop(m, None)
            else:
                out[m] = s
        p = Poly.__new__(Poly)
        p.coeffs = out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = Poly.__new__(Poly)
        p.coeffs = {m: -c for m, c in self.coeffs.items()}
        return p

    def __sub__(self, other):
        return self + (-Poly.coerce(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            c = QI.coerce(other)
            if c.is_zero():
                return Poly()
            p = Poly.__new__(Poly)
            p.coeffs = {m: cc * c for m, cc in self.coeffs.items()}
            return p
        o = Poly.coerce(other)
        out: dict = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in o.coeffs.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, QI(0)) + c1 * c2
                if s.is_zero():
                    out.pop(m, None)
                else:
                    out[m] = s
        p = Poly.__new__(Poly)
        p.coeffs = out
        return p

    __rmul__ = __mul__

    def partial(self, i: int) -> "Poly":
        out = {}
        for m, c in self.coeffs.items():
            if m[i] == 0:
                continue
            e = list(m)
            e[i] -= 1
            out[tuple(e)] = c * m[i]
        p = Poly.__new__(Poly)
        p.coeffs = out
        return p

    def conj(self) -> "Poly":
        p = Poly.__new__(Poly)
        p.coeffs = {m: c.conj() for m, c in self.coeffs.items()}
        return p

    def _leading(self) -> Monomial:
        # lex order with x0 > x1 > x2 > x3
        return max(self.coeffs)

    def divmod_poly(self, divisor: "Poly"):
        """Multivariate division by a single divisor under lex order.

        A single polynomial generates its own Groebner basis, so the
        remainder is zero exactly when ``divisor`` divides ``self``.
        """
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        lead = divisor._leading()
        lead_c = divisor.coeffs[lead]
        quot: dict = {}
        rem: dict = {}
        work = dict(self.coeffs)
        while work:
            m = max(work)
            c = work.pop(m)
            if _mono_divides(lead, m):
                qm = _mono_div(m, lead)
                qc = c / lead_c
                quot[qm] = quot.get(qm, QI(0)) + qc
                for dm, dc in divisor.coeffs.items():
                    if dm == lead:
                        continue
                    t = _mono_mul(qm, dm)
                    s = work.get(t, QI(0)) - qc * dc
                    if s.is_zero():
                        work.pop(t, None)
                    else:
                        work[t] = s
            else:
                rem[m] = c
        q = Poly.__new__(Poly)
        q.coeffs = {m: c for m, c in quot.items() if not c.is_zero()}
        r = Poly.__new__(Poly)
        r.coeffs = {m: c for m, c in rem.items() if not c.is_zero()}
        return q, r

    def evaluate(self, point: Iterable) -> QI:
        pt = [QI.coerce(v) for v in point]
        total = QI(0)
        for m, c in self.coeffs.items():
            term = c
            for i, e in enumerate(m):
                for _ in range(e):
                    term = term * pt[i]
            total = total + term
        return total

    def scale_arguments(self, q: Fraction) -> "Poly":
        """P(x) -> P(q*x)."""
        out = {}
        for m, c in self.coeffs.items():
            out[m] = c * (q ** sum(m))
        p = Poly.__new__(Poly)
        p.coeffs = {m: c for m, c in out.items() if not c.is_zero()}
        return p

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        names = ("x0", "x1", "x2", "x3")
        parts = []
        for m in sorted(self.coeffs, reverse=True):
            c = self.coeffs[m]
            factors = [f"{names[i]}^{e}" if e > 1 else names[i]
                       for i, e in enumerate(m) if e]
            body = "*".join(factors)
            parts.append(f"({c!r})*{body}" if body else f"({c!r})")
        return " + ".join(parts)


PHI = Poly({(2, 0, 0, 0): QI(1), (0, 2, 0, 0): QI(1),
            (0, 0, 2, 0): QI(1), (0, 0, 0, 2): QI(1)})


class ScalarField:
    """Exact function P / phi^k on R^4 minus the origin.

    Closed under +, *, and all partials; canonical form keeps the numerator
    coprime to phi whenever k > 0.
    """

    __slots__ = ("num", "k")

    def __init__(self, num, k: int = 0):
        num = Poly.coerce(num)
        if k < 0:
            raise ValueError("denominator exponent must be >= 0")
        while k > 0 and not num.is_zero():
            q, r = num.divmod_poly(PHI)
            if r.is_zero():
                num, k = q, k - 1
            else:
                break
        if num.is_zero():
            k = 0
        self.num = num
        self.k = k

    @staticmethod
    def coerce(v) -> "ScalarField":
        if isinstance(v, ScalarField):
            return v
        return ScalarField(Poly.coerce(v), 0)

    @staticmethod
    def const(c) -> "ScalarField":
        return ScalarField(Poly.const(c), 0)

    @staticmethod
    def phi() -> "ScalarField":
        return ScalarField(PHI, 0)

    @staticmethod
    def inv_phi(k: int = 1) -> "ScalarField":
        return ScalarField(Poly.const(1), k)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def _phi_pow(self, n: int) -> Poly:
        p = Poly.const(1)
        for _ in range(n):
            p = p * PHI
        return p

    def __add__(self, other):
        o = ScalarField.coerce(other)
        k = max(self.k, o.k)
        a = self.num * self._phi_pow(k - self.k)
        b = o.num * self._phi_pow(k - o.k)
        return ScalarField(a + b, k)

    __radd__ = __add__

    def __neg__(self):
        f = ScalarField.__new__(ScalarField)
        f.num, f.k = -self.num, self.k
        return f

    def __sub__(self, other):
        return self + (-ScalarField.coerce(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            c = QI.coerce(other)
            if c.is_zero():
                return ScalarField.const(0)
            f = ScalarField.__new__(ScalarField)
            f.num, f.k = self.num * c, self.k
            return f
        o = ScalarField.coerce(other)
        return ScalarField(self.num * o.num, self.k + o.k)

    __rmul__ = __mul__

    def div_exact(self, other) -> "ScalarField":
        """Exact quotient; raises ValueError when the division is not exact."""
        o = ScalarField.coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero field")
        if self.is_zero():
            return ScalarField.const(0)
        if o.num.is_constant():
            c = o.num.constant_value()
            f = self.num * (QI(1) / c)
            return ScalarField(f * self._phi_pow(o.k), self.k)
        num = self.num * self._phi_pow(o.k)
        q, r = num.divmod_poly(o.num)
        if not r.is_zero():
            raise ValueError("inexact field division")
        return ScalarField(q, self.k)

    def partial(self, i: int) -> "ScalarField":
        if self.k == 0:
            return ScalarField(self.num.partial(i), 0)
        num = self.num.partial(i) * PHI - self.num * PHI.partial(i) * self.k
        return ScalarField(num, self.k + 1)

    def conj(self) -> "ScalarField":
        f = ScalarField.__new__(ScalarField)
        f.num, f.k = self.num.conj(), self.k
        return f

    def scale_arguments(self, q: Fraction) -> "ScalarField":
        """f(x) -> f(q*x); exact because phi(q*x) = q^2 phi(x)."""
        q = _frac(q)
        if q == 0:
            raise ValueError("scale factor must be nonzero")
        num = Poly()
        for m, c in self.num.coeffs.items():
            num = num + Poly({m: c * (q ** (sum(m) - 2 * self.k))})
        return ScalarField(num, self.k)

    def evaluate(self, point) -> QI:
        val = self.num.evaluate(point)
        if self.k:
            den = PHI.evaluate(point)
            for _ in range(self.k):
                val = val / den
        return val

    def max_abs_coeff(self) -> float:
        """Crude magnitude of the field, for defect reporting only."""
        if self.is_zero():
            return 0.0
        return max(math.sqrt(float(c.abs2())) for c in self.num.coeffs.values())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            other = ScalarField.const(other)
        if not isinstance(other, ScalarField):
            return NotImplemented
        return self.num == other.num and self.k == other.k

    def __hash__(self):
        return hash((self.num, self.k))

    def __repr__(self):
        if self.k == 0:
            return repr(self.num)
        return f"({self.num!r}) / phi^{self.k}"
