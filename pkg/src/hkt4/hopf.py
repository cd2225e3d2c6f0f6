"""Quaternionic Hopf surface verifier.

All computation happens on the punctured chart; invariance of the forms
under x -> q x certifies descent to the quotient. Built from the potential
phi = r^2: the six Hermitian forms d d^c_L phi / phi, the common metric they
induce, and the torsion 3-forms of both frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List

from .exact import ScalarField, _frac
from .forms import RationalForm, exterior_d, scale_pullback, twisted_d
from .hermitian import (
    ConformalMetric,
    bihermitian_check,
    hermitian_form,
    hkt_report,
    metric_from_form,
)
from .forms import ConstantMetric
from .quaternions import HypercomplexFrame, Matrix, independence_rank
from .report import EXACT_ZERO, CheckRecorder, CheckResult

STRUCTURE_NAMES = ("I+", "J+", "K+", "I-", "J-", "K-")


@dataclass(frozen=True)
class HopfSpec:
    """Real multiplier q > 1 of the cyclic group acting by x -> q x."""

    q: Fraction

    def __init__(self, q):
        q = _frac(q)
        if q <= 1:
            raise ValueError("the multiplier must satisfy q > 1")
        object.__setattr__(self, "q", q)


@dataclass
class HopfGeometry:
    spec: HopfSpec
    phi: ScalarField
    left: HypercomplexFrame
    right: HypercomplexFrame
    structures: Dict[str, Matrix]
    omegas: Dict[str, RationalForm]
    metric_candidates: Dict[str, tuple]
    metric: ConformalMetric
    H_plus: RationalForm
    H_minus: RationalForm

    @property
    def q(self) -> Fraction:
        return self.spec.q


class HopfInvariantError(AssertionError):
    """A construction-time identity of the Hopf geometry failed; the message
    names the first failing identity."""


def build_hopf(spec: HopfSpec | Fraction | int) -> HopfGeometry:
    """Build the Hopf chart data and assert its structural identities."""
    if not isinstance(spec, HopfSpec):
        spec = HopfSpec(spec)
    phi = ScalarField.phi()
    left = HypercomplexFrame.left()
    right = HypercomplexFrame.right()
    structures = dict(zip(STRUCTURE_NAMES, (*left.matrices(), *right.matrices())))

    phi_form = RationalForm.function(phi)
    inv_phi = ScalarField.inv_phi()
    omegas = {}
    for name, L in structures.items():
        omegas[name] = exterior_d(twisted_d(L, phi_form)) * inv_phi

    # the six bilinear forms omega_L(., L.) must agree componentwise
    metrics = {name: metric_from_form(omegas[name], structures[name])
               for name in STRUCTURE_NAMES}
    first = metrics["I+"]
    for name in STRUCTURE_NAMES[1:]:
        if metrics[name] != first:
            raise HopfInvariantError(
                f"metric candidates differ: omega_{name}(., {name}.) != omega_I+(., I+.)")

    # the common metric is conformally Euclidean; factor it out exactly
    factor = first[0][0]
    for a in range(4):
        for b in range(4):
            expected = factor if a == b else ScalarField.const(0)
            if first[a][b] != expected:
                raise HopfInvariantError("common metric is not conformally Euclidean")
    metric = ConformalMetric(factor, ConstantMetric.euclidean())

    # each omega_L must also arise as the Hermitian form of the common metric
    for name, L in structures.items():
        if hermitian_form(metric, L) != omegas[name]:
            raise HopfInvariantError(f"omega_{name} != g({name}., .)")

    # scale invariance: descent to the quotient
    for name in STRUCTURE_NAMES:
        if scale_pullback(omegas[name], spec.q) != omegas[name]:
            raise HopfInvariantError(f"omega_{name} is not invariant under x -> qx")

    H_plus = twisted_d(structures["I+"], omegas["I+"])
    H_minus = twisted_d(structures["I-"], omegas["I-"])
    return HopfGeometry(spec=spec, phi=phi, left=left, right=right,
                        structures=structures, omegas=omegas,
                        metric_candidates=metrics, metric=metric,
                        H_plus=H_plus, H_minus=H_minus)


@dataclass
class FlatControl:
    """Euclidean control geometry: same shape as HopfGeometry but with the
    flat metric, so every torsion form vanishes (the hyperkahler regime)."""

    left: HypercomplexFrame
    right: HypercomplexFrame
    structures: Dict[str, Matrix]
    omegas: Dict[str, RationalForm]
    metric: ConstantMetric
    H_plus: RationalForm
    H_minus: RationalForm


def build_flat_control() -> FlatControl:
    left = HypercomplexFrame.left()
    right = HypercomplexFrame.right()
    structures = dict(zip(STRUCTURE_NAMES, (*left.matrices(), *right.matrices())))
    metric = ConstantMetric.euclidean()
    omegas = {name: hermitian_form(metric, L) for name, L in structures.items()}
    return FlatControl(left=left, right=right, structures=structures,
                       omegas=omegas, metric=metric,
                       H_plus=twisted_d(structures["I+"], omegas["I+"]),
                       H_minus=twisted_d(structures["I-"], omegas["I-"]))


def verify_strong_hkt(geo, side: str) -> List[CheckResult]:
    """Certify that the metric is strong HKT for the requested frame: the
    three torsion 3-forms coincide, the common value is d-closed, and it is
    nonzero away from the flat control."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    rec = CheckRecorder()
    frame = geo.left if side == "left" else geo.right
    tag = "+" if side == "left" else "-"
    rep = hkt_report(geo.metric, frame)
    rec.exact(f"hopf.{side}.torsion-equal-IJ",
              rep.torsions["I"] - rep.torsions["J"],
              f"d^c_I{tag} w_I{tag} = d^c_J{tag} w_J{tag}")
    rec.exact(f"hopf.{side}.torsion-equal-JK",
              rep.torsions["J"] - rep.torsions["K"],
              f"d^c_J{tag} w_J{tag} = d^c_K{tag} w_K{tag}")
    rec.exact(f"hopf.{side}.torsion-closed", exterior_d(rep.H),
              "dH = 0 (strong HKT)")
    flat = isinstance(geo, FlatControl)
    if flat:
        rec.exact(f"hopf.{side}.torsion-zero", rep.H.is_zero(),
                  "hyperkahler iff H = 0")
    else:
        rec.exact(f"hopf.{side}.torsion-nonzero", not rep.H.is_zero(),
                  "H != 0 off the hyperkahler locus")
    rec.exact(f"hopf.{side}.del-Omega-zero", rep.del_Omega,
              "del Omega = 0 (hyperhermitian implies HKT on surfaces)")
    return rec.checks


def verify_44(geo) -> List[CheckResult]:
    """Certify the two-frame structure: opposite closed torsions and
    independent frames. A zero-torsion input passes the opposition trivially
    and is flagged as hyperkahler-degenerate."""
    rec = CheckRecorder()
    for side in ("left", "right"):
        for c in verify_strong_hkt(geo, side):
            rec.checks.append(c)
    rec.exact("hopf.torsion-opposition", geo.H_plus + geo.H_minus,
              "T+ = -T-")
    rec.exact("hopf.torsion-plus-closed", exterior_d(geo.H_plus), "dT+ = 0")
    rec.exact("hopf.torsion-minus-closed", exterior_d(geo.H_minus), "dT- = 0")
    rank = independence_rank(geo.left, geo.right)
    rec.add("hopf.frame-independence", rank == 6,
            EXACT_ZERO if rank == 6 else float(6 - rank),
            "rank span{I+,J+,K+,I-,J-,K-} = 6")
    for lname in ("I+", "J+", "K+"):
        for rname in ("I-", "J-", "K-"):
            ok = bihermitian_check(geo.metric, geo.structures[lname],
                                   geo.structures[rname])
            rec.exact(f"hopf.bihermitian.{lname}{rname}", ok,
                      "cross pairs (L+, L-) are bi-Hermitian")
    if geo.H_plus.is_zero():
        rec.add("hopf.hyperkahler-degenerate", True, EXACT_ZERO,
                "zero-torsion case: trivial opposition")
    return rec.checks


def verify_descent(geo: HopfGeometry) -> List[CheckResult]:
    """Pullback under x -> qx fixes the six Hermitian forms and both torsion
    forms; a deliberately non-invariant form keeps the check honest."""
    rec = CheckRecorder()
    q = geo.q
    for name in STRUCTURE_NAMES:
        rec.exact(f"hopf.descent.omega-{name}",
                  scale_pullback(geo.omegas[name], q) - geo.omegas[name],
                  "forms descend to the quotient")
    rec.exact("hopf.descent.H-plus",
              scale_pullback(geo.H_plus, q) - geo.H_plus,
              "torsion descends to the quotient")
    rec.exact("hopf.descent.H-minus",
              scale_pullback(geo.H_minus, q) - geo.H_minus,
              "torsion descends to the quotient")
    dphi = exterior_d(RationalForm.function(geo.phi))
    moved = scale_pullback(dphi, q) - dphi
    rec.exact("hopf.descent.nonvacuous-control", not moved.is_zero(),
              "plumbing")
    return rec.checks


def verify_common_metric(geo: HopfGeometry) -> List[CheckResult]:
    """Re-derive the six bilinear forms and compare them pairwise."""
    rec = CheckRecorder()
    mats = {name: metric_from_form(geo.omegas[name], geo.structures[name])
            for name in STRUCTURE_NAMES}
    base = mats["I+"]
    for name in STRUCTURE_NAMES[1:]:
        ok = mats[name] == base
        rec.exact(f"hopf.common-metric.{name}", ok,
                  "the six w_L(., L.) induce one metric")
    return rec.checks


def verify_gauduchon(geo) -> List[CheckResult]:
    from .hermitian import gauduchon_defect
    rec = CheckRecorder()
    for name, L in geo.structures.items():
        rec.exact(f"hopf.gauduchon.{name}", gauduchon_defect(geo.metric, L),
                  "d d^c_L w_L = 0 for every structure")
    return rec.checks


def verify_axis_family(geo: HopfGeometry, axes) -> List[CheckResult]:
    """Spot check: structures a I+ + b J+ + c K+ on rational unit axes give
    the same metric and the same torsion 3-form."""
    rec = CheckRecorder()
    phi_form = RationalForm.function(geo.phi)
    inv_phi = ScalarField.inv_phi()
    for axis in axes:
        L = geo.left.span_structure(axis)
        omega = exterior_d(twisted_d(L, phi_form)) * inv_phi
        label = f"({axis[0]},{axis[1]},{axis[2]})" if not hasattr(axis, "a") \
            else f"({axis.a},{axis.b},{axis.c})"
        same_metric = metric_from_form(omega, L) == metric_from_form(
            geo.omegas["I+"], geo.structures["I+"])
        rec.exact(f"hopf.axis-metric.{label}", same_metric,
                  "every induced structure gives the same metric")
        rec.exact(f"hopf.axis-torsion.{label}",
                  twisted_d(L, omega) - geo.H_plus,
                  "every induced structure gives the same torsion")
    return rec.checks
