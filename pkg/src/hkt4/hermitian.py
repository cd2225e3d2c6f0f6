"""Hermitian forms, Bismut torsion 3-forms, Gauduchon and strong-KT checks,
HKT and bi-Hermitian verification on the flat chart.

The metric may carry an exact conformal factor (a ScalarField), which is how
the Hopf metric enters: factor * constant base metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple

from .exact import QI, ScalarField
from .forms import (
    RationalForm,
    exterior_d,
    pq_project,
    structure_action,
    twisted_d,
    ConstantMetric,
)
from .quaternions import (
    HypercomplexFrame,
    Matrix,
    mat_mul,
    mat_scale,
    mat_transpose,
)

# Fixed ratio between the torsion 3-form T = L(d omega_L) and H = d^c_L
# omega_L under the sign conventions of this package. Asserted, never
# assumed, by bismut_torsion.
TORSION_RATIO_T_OVER_H = Fraction(-1)


@dataclass(frozen=True)
class ConformalMetric:
    """factor * base with an exact ScalarField factor, positive on the chart.

    Positivity of the factor is the caller's responsibility; the factors used
    here (constants and 1/phi multiples) are manifestly positive.
    """

    factor: ScalarField
    base: ConstantMetric

    @staticmethod
    def from_constant(base: ConstantMetric) -> "ConformalMetric":
        return ConformalMetric(ScalarField.const(1), base)


def _as_conformal(g) -> ConformalMetric:
    if isinstance(g, ConformalMetric):
        return g
    if isinstance(g, ConstantMetric):
        return ConformalMetric.from_constant(g)
    raise TypeError(f"not a metric: {g!r}")


def check_hermitian(g, L: Matrix) -> bool:
    """Exact check of g(LX, LY) = g(X, Y); the conformal factor is immaterial."""
    base = _as_conformal(g).base.matrix
    return mat_mul(mat_transpose(L), mat_mul(base, L)) == base


def hermitian_form(g, L: Matrix) -> RationalForm:
    """The 2-form omega_L = g(L., .) of an L-Hermitian metric."""
    gm = _as_conformal(g)
    if not check_hermitian(gm, L):
        raise ValueError("metric is not Hermitian for the given structure")
    W = mat_mul(mat_transpose(L), gm.base.matrix)
    coeffs = {}
    for a in range(4):
        for b in range(a + 1, 4):
            if W[a][b] != 0:
                coeffs[(a, b)] = gm.factor * QI(W[a][b])
    return RationalForm(2, coeffs)


def metric_from_form(omega: RationalForm, L: Matrix):
    """Bilinear form omega(., L.) as a 4x4 matrix of ScalarFields."""
    W = [[ScalarField.const(0)] * 4 for _ in range(4)]
    for (a, b), f in omega.coeffs.items():
        W[a][b] = f
        W[b][a] = -f
    out = [[ScalarField.const(0)] * 4 for _ in range(4)]
    for a in range(4):
        for b in range(4):
            acc = ScalarField.const(0)
            for c in range(4):
                if L[c][b] != 0:
                    acc = acc + W[a][c] * QI(L[c][b])
            out[a][b] = acc
    return tuple(tuple(row) for row in out)


@dataclass
class TorsionReport:
    """Torsion data of the Bismut connection for one Hermitian pair (g, L).

    torsion_T = L(d omega_L) and torsion_H = d^c_L omega_L are proportional
    with the fixed ratio above; both are carried so the proportionality is
    asserted rather than silently assumed.
    """

    omega: RationalForm
    torsion_T: RationalForm
    torsion_H: RationalForm
    dH: RationalForm
    ratio: Fraction = TORSION_RATIO_T_OVER_H

    @property
    def kahler(self) -> bool:
        """dw = 0: torsion-free regime, Bismut = Levi-Civita."""
        return self.torsion_T.is_zero()

    @property
    def strong(self) -> bool:
        return self.dH.is_zero()


def bismut_torsion(g, L: Matrix) -> TorsionReport:
    omega = hermitian_form(g, L)
    T = structure_action(L, exterior_d(omega))
    H = twisted_d(L, omega)
    if not (T - H * TORSION_RATIO_T_OVER_H).is_zero():
        raise AssertionError("torsion convention violated: T != ratio * H")
    return TorsionReport(omega=omega, torsion_T=T, torsion_H=H, dH=exterior_d(H))


def gauduchon_defect(g, L: Matrix) -> RationalForm:
    """The 4-form d d^c_L omega_L; zero exactly when g is Gauduchon for L
    (surface case of the dd^c condition)."""
    omega = hermitian_form(g, L)
    return exterior_d(twisted_d(L, omega))


@dataclass
class HKTReport:
    """HKT data of a hyperhermitian pair (g, frame) with respect to I."""

    Omega: RationalForm
    del_Omega: RationalForm
    torsion_match: Tuple[bool, bool, bool]
    strong: bool
    H: RationalForm
    torsions: dict = field(repr=False, default_factory=dict)

    @property
    def hkt(self) -> bool:
        return all(self.torsion_match)

    @property
    def hyperkahler(self) -> bool:
        return self.H.is_zero()


def hkt_report(g, frame: HypercomplexFrame) -> HKTReport:
    gm = _as_conformal(g)
    for name, L in zip("IJK", frame.matrices()):
        if not check_hermitian(gm, L):
            raise ValueError(f"metric is not Hermitian for {name}")
    omegas = {name: hermitian_form(gm, L)
              for name, L in zip("IJK", frame.matrices())}
    torsions = {name: twisted_d(L, omegas[name])
                for name, L in zip("IJK", frame.matrices())}
    match = ((torsions["I"] - torsions["J"]).is_zero(),
             (torsions["J"] - torsions["K"]).is_zero(),
             (torsions["I"] - torsions["K"]).is_zero())
    H = torsions["I"]
    Omega = omegas["J"] + omegas["K"] * QI(0, 1)
    if not (pq_project(frame.I, Omega, 2, 0) - Omega).is_zero():
        raise AssertionError("Omega = w_J + i w_K is not of type (2,0) for I")
    dOmega = exterior_d(Omega)
    del_Omega = pq_project(frame.I, dOmega, 3, 0)
    return HKTReport(Omega=Omega, del_Omega=del_Omega, torsion_match=match,
                     strong=exterior_d(H).is_zero(), H=H, torsions=torsions)


def average_metric(g0: ConstantMetric, frame: HypercomplexFrame) -> ConstantMetric:
    """Average g0 over 1, I, J, K; the result is Hermitian for the whole
    2-sphere of structures spanned by the frame."""
    acc = [[Fraction(v) for v in row] for row in g0.matrix]
    for L in frame.matrices():
        pulled = mat_mul(mat_transpose(L), mat_mul(g0.matrix, L))
        for i in range(4):
            for j in range(4):
                acc[i][j] += pulled[i][j]
    return ConstantMetric(mat_scale(tuple(tuple(r) for r in acc), Fraction(1, 4)))


def bihermitian_check(g, L_plus: Matrix, L_minus: Matrix) -> bool:
    """True iff the two Bismut torsion 3-forms are exact negatives of each
    other and both are closed."""
    rep_p = bismut_torsion(g, L_plus)
    rep_m = bismut_torsion(g, L_minus)
    opposite = (rep_p.torsion_T + rep_m.torsion_T).is_zero()
    closed = rep_p.dH.is_zero() and rep_m.dH.is_zero()
    return opposite and closed
