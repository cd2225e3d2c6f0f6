"""Degree, slope, and stability certificates for explicit curvature data.

The degree integrand F ^ omega is imaginary for anti-Hermitian curvature, so
the normalization inserts sqrt(-1)/(2 pi) to land in the reals (the degree is
only defined up to a positive constant anyway; unit torus periods are fixed
by the ledger).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .exact import QI, ScalarField
from .forms import RationalForm, wedge
from .lattice import TUPLES, LatticeField, wedge_pairing


def _integrate_unit_cell(f: ScalarField) -> QI:
    """Exact integral of a polynomial field over [0,1]^4.

    phi-denominators have a singularity at the origin and are rejected; the
    torus integrands here are polynomial.
    """
    if f.k != 0:
        raise ValueError("cannot integrate a phi-denominator over the torus cell")
    total = QI(0)
    for mono, c in f.num.coeffs.items():
        w = Fraction(1)
        for e in mono:
            w /= (e + 1)
        total = total + c * w
    return total


def integral_top_form(top: RationalForm) -> QI:
    if top.degree != 4:
        raise ValueError("integral needs a top-degree form")
    coeff = top.coeffs.get((0, 1, 2, 3))
    return _integrate_unit_cell(coeff) if coeff is not None else QI(0)


def _lattice_degree_integral(F: LatticeField, omega: RationalForm) -> complex:
    if F.n != 1:
        raise ValueError("degree needs scalar (rank-1) curvature values")
    omega_vec = np.zeros(6, dtype=complex)
    for i, t in enumerate(TUPLES[2]):
        c = omega.coeffs.get(t)
        if c is not None:
            if c.k != 0 or not c.num.is_constant():
                raise ValueError("omega must be constant on the torus")
            omega_vec[i] = complex(c.num.constant_value())
    pairing = wedge_pairing(2)
    total = 0.0 + 0.0j
    for i, s in enumerate(TUPLES[2]):
        arr = F.comps[s][..., 0, 0]
        for j, t in enumerate(TUPLES[2]):
            sign = pairing[i, j]
            if sign:
                total += sign * omega_vec[j] * complex(np.mean(arr))
    return total


DegreeInput = Union[RationalForm, LatticeField]


def degree(F: DegreeInput, omega: RationalForm,
           volume_normalization: Fraction = Fraction(1)) -> float:
    """(sqrt(-1) / 2 pi) * integral of F ^ omega, real for anti-Hermitian F.

    F may be a symbolic 2-form with imaginary coefficients or a rank-1
    LatticeField; omega is the Gauduchon Hermitian form.
    """
    if omega.degree != 2:
        raise ValueError("omega must be a 2-form")
    if isinstance(F, LatticeField):
        if F.degree != 2:
            raise ValueError("curvature must be a 2-form")
        integral = _lattice_degree_integral(F, omega)
        val = 1j * integral / (2 * math.pi) * float(volume_normalization)
        if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
            raise ValueError("degree came out non-real; curvature is not "
                             "anti-Hermitian scalar")
        return float(val.real)
    if isinstance(F, RationalForm):
        if F.degree != 2:
            raise ValueError("curvature must be a 2-form")
        integral = integral_top_form(wedge(F, omega))
        # multiply by i: (i) * (re + i im) = -im + i re
        re = -float(integral.im)
        im = float(integral.re)
        if abs(im) > 1e-9 * max(1.0, abs(re)):
            raise ValueError("degree came out non-real; pass imaginary-valued "
                             "curvature coefficients")
        return re / (2 * math.pi) * float(volume_normalization)
    raise TypeError(f"unsupported curvature input: {type(F)!r}")


@dataclass
class DegreeDatum:
    """Curvature, Gauduchon form, and the resulting degree, kept together."""

    F: DegreeInput
    omega: RationalForm
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("degree must be finite")


def degree_datum(F: DegreeInput, omega: RationalForm,
                 volume_normalization: Fraction = Fraction(1)) -> DegreeDatum:
    return DegreeDatum(F, omega, degree(F, omega, volume_normalization))


def slope(deg: Union[float, Fraction], rank: int) -> float:
    """deg / rank."""
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if isinstance(deg, Fraction):
        return float(deg / rank)
    return deg / rank


def stability_compare(sub_slopes: Iterable[float], total_slope: float,
                      tol: float = 0.0) -> str:
    """Verdict relative to the supplied subobject slopes only: a certificate
    checker, not a stability prover. Empty evidence is vacuously 'stable'."""
    verdict = "stable"
    for s in sub_slopes:
        if s > total_slope + tol:
            return "unstable"
        if abs(s - total_slope) <= tol:
            verdict = "semistable"
    return verdict
