"""Rigidity functionals and Ambarzumian-type decision logic.

Two scalar functionals of an instance (q, sigma) on a metric graph drive
everything here:

    phi1 = int_G q dx + 2 sum_v sigma_v / deg(v)
    phi2 = int_G q dx +   sum_v sigma_v

If the instance is isospectral to the free operator then phi1 = 0, so
|phi1| > 0 certifies the spectra must differ.  Conversely, when phi1 = 0
forces phi2 <= 0 (directly, or via one of three structural sufficient
conditions), isospectrality forces q = 0 and sigma = 0.
"""

import json
from dataclasses import dataclass

from .graphs import GraphClass
from .potentials import integrate_edge, sup_norm_estimate

__all__ = [
    "AmbarzumianVerdict",
    "functionals",
    "check_conditions",
    "davies_consistency",
    "verdict_to_json",
    "RIGIDITY_IMPLIED",
    "SPECTRUM_MUST_DIFFER",
    "INCONCLUSIVE",
]

RIGIDITY_IMPLIED = "RigidityImplied"
SPECTRUM_MUST_DIFFER = "SpectrumMustDiffer"
INCONCLUSIVE = "Inconclusive"

# degree-pattern cases for the line/loop specialization
CASE_LOOP = "loop"
CASE_LINE_SIGMA_NONNEG = "line-nonnegative-sigma"
CASE_LINE_SIGMA_MIXED = "line-mixed-sigma"
CASE_GENERAL = "general"


@dataclass(frozen=True)
class AmbarzumianVerdict:
    """Instance-level evaluation of the rigidity criteria.

    ``theorem_hypothesis`` is the pointwise implication
    |phi1| <= tol  =>  phi2 <= tol evaluated at this single (q, sigma); it
    does not certify the implication for a whole family of perturbations.
    ``conclusion`` is SpectrumMustDiffer when phi1 is nonzero beyond
    tolerance, RigidityImplied when phi1 vanishes and some sufficient
    condition (or the pointwise hypothesis) holds, else Inconclusive.
    """

    phi1: float
    phi2: float
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    line_loop_case: str
    theorem_hypothesis: bool
    conclusion: str
    tol: float

    def __post_init__(self):
        if self.conclusion == SPECTRUM_MUST_DIFFER:
            assert abs(self.phi1) > self.tol
        if self.conclusion == RIGIDITY_IMPLIED:
            assert (self.cond_i or self.cond_ii or self.cond_iii
                    or self.theorem_hypothesis)


def functionals(g, tol=1e-12):
    """The pair (phi1, phi2); each quadrature holds error below tol."""
    per_edge = tol / max(len(g.edges), 1)
    q_total = 0.0
    for e in g.edges:
        q_total += integrate_edge(e.potential, e.length, per_edge)
    weighted = sum(2.0 * v.sigma / g.degree(v.id) for v in g.vertices)
    plain = sum(v.sigma for v in g.vertices)
    return q_total + weighted, q_total + plain


def _line_loop_case(g):
    cls = g.classify()
    if cls is GraphClass.LOOP:
        return CASE_LOOP
    if cls is GraphClass.LINE:
        if all(v.sigma >= 0.0 for v in g.vertices):
            return CASE_LINE_SIGMA_NONNEG
        return CASE_LINE_SIGMA_MIXED
    return CASE_GENERAL


def check_conditions(g, tol=1e-9):
    """Evaluate the rigidity criteria with a +-tol band on inequalities.

    cond_i:   sum_v sigma_v (1 - 2/deg(v)) <= 0
    cond_ii:  int_G q >= 0 and every sigma_v >= 0
    cond_iii: (min_deg/2 - 1) int_G q >= 0 and every sigma_v <= 0
    """
    if tol <= 0.0:
        raise ValueError("tolerance band must be positive")
    phi1, phi2 = functionals(g, min(tol, 1e-12))
    q_total = phi2 - sum(v.sigma for v in g.vertices)

    weighted = sum(v.sigma * (1.0 - 2.0 / g.degree(v.id))
                   for v in g.vertices)
    cond_i = weighted <= tol
    cond_ii = (q_total >= -tol
               and all(v.sigma >= -tol for v in g.vertices))
    cond_iii = ((0.5 * g.min_degree() - 1.0) * q_total >= -tol
                and all(v.sigma <= tol for v in g.vertices))

    theorem_hypothesis = (abs(phi1) > tol) or (phi2 <= tol)

    if abs(phi1) > tol:
        conclusion = SPECTRUM_MUST_DIFFER
    elif cond_i or cond_ii or cond_iii or theorem_hypothesis:
        conclusion = RIGIDITY_IMPLIED
    else:
        conclusion = INCONCLUSIVE

    return AmbarzumianVerdict(
        phi1=float(phi1),
        phi2=float(phi2),
        cond_i=bool(cond_i),
        cond_ii=bool(cond_ii),
        cond_iii=bool(cond_iii),
        line_loop_case=_line_loop_case(g),
        theorem_hypothesis=bool(theorem_hypothesis),
        conclusion=conclusion,
        tol=float(tol),
    )


def davies_consistency(g, lambda0, tol=1e-9):
    """Check an instance against the ground-state rigidity statement.

    When the ground state is nonnegative and phi2 <= 0 (both up to tol),
    the instance must be trivial: every potential numerically zero and
    every sigma_v zero.  Returns that triviality check under the
    hypothesis, and True vacuously when the hypothesis fails.
    """
    _phi1, phi2 = functionals(g, min(tol, 1e-12))
    if lambda0 < -tol or phi2 > tol:
        return True
    if any(abs(v.sigma) > tol for v in g.vertices):
        return False
    return all(sup_norm_estimate(e.potential, e.length) <= tol
               for e in g.edges)


def verdict_to_json(verdict):
    """Verdict as a JSON document string."""
    doc = {
        "phi1": verdict.phi1,
        "phi2": verdict.phi2,
        "cond_i": verdict.cond_i,
        "cond_ii": verdict.cond_ii,
        "cond_iii": verdict.cond_iii,
        "line_loop_case": verdict.line_loop_case,
        "theorem_hypothesis": verdict.theorem_hypothesis,
        "conclusion": verdict.conclusion,
        "tol": verdict.tol,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
