"""Averaged eigenvalue-shift asymptotics.

For a perturbed operator (potentials q, vertex strengths sigma) and the
free operator (q = 0, sigma = 0) on the same metric graph, the running
averages

    S_N = (1/N) sum_{n=1..N} (lam_n^{q,sigma} - lam_n^0)

converge to (1/L) int_G q dx + (2/L) sum_v sigma_v / deg(v).  This module
computes both spectra, assembles the averages together with Cesaro
smoothing and an Aitken-extrapolated limit, and reports the residual
against the analytic right-hand side.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpectrumError
from .graphs import free_version
from .potentials import integrate_edge
from .secular import SpectrumRequest, compute_spectrum

__all__ = [
    "TraceAverageReport",
    "rhs_functional",
    "trace_average",
    "closeness_test",
    "report_to_csv",
    "report_to_json",
]

# quadrature budget for the right-hand-side functional
RHS_QUAD_TOL = 1e-12

# Aitken denominators below this magnitude mean the Cesaro sequence is
# already flat; extrapolation then falls back to the last Cesaro mean
AITKEN_DENOM_FLOOR = 1e-14


@dataclass(frozen=True)
class TraceAverageReport:
    """Paired-spectrum shift averages and their extrapolated limit.

    ``closeness[n-1]`` is the raw difference lam_n^{q,sigma} - lam_n^0;
    ``partial_averages[n-1]`` is S_n; ``cesaro[n-1]`` the running mean of
    S_1..S_n.  The ground states (index 0) are excluded throughout, so all
    lists start at n = 1.  ``certified`` is false when either spectrum
    failed its eigenvalue-count certificate; the numbers are still
    reported but must not be trusted for assertions.
    """

    n_used: int
    lambda_pert: list = field(repr=False)
    lambda_free: list = field(repr=False)
    closeness: list = field(repr=False)
    partial_averages: list = field(repr=False)
    cesaro: list = field(repr=False)
    extrapolated: float
    rhs: float
    residual: float
    certified: bool

    def __post_init__(self):
        n = self.n_used
        if not (len(self.lambda_pert) == len(self.lambda_free)
                == len(self.closeness) == len(self.partial_averages)
                == len(self.cesaro) == n):
            raise ValueError("report lists must all have length n_used")
        if not math.isfinite(self.rhs):
            raise ValueError("right-hand side must be finite")


def rhs_functional(g):
    """Limit value (1/L) int_G q dx + (2/L) sum_v sigma_v / deg(v)."""
    total = g.total_length()
    acc = 0.0
    for e in g.edges:
        acc += integrate_edge(e.potential, e.length,
                              RHS_QUAD_TOL / len(g.edges))
    for v in g.vertices:
        acc += 2.0 * v.sigma / g.degree(v.id)
    return acc / total


def _aitken(cesaro, n):
    # delta-squared acceleration on the Cesaro means at n, n/2, n/4
    x0 = cesaro[max(n // 4, 1) - 1]
    x1 = cesaro[max(n // 2, 1) - 1]
    x2 = cesaro[n - 1]
    denom = x2 - 2.0 * x1 + x0
    if abs(denom) < AITKEN_DENOM_FLOOR:
        return x2
    return x2 - (x2 - x1) ** 2 / denom


def trace_average(g, n_terms, tol=1e-8):
    """Compare the perturbed and free spectra through their shift averages.

    Computes lam_0..lam_{n_terms} for (q, sigma) and for the free version
    of the same graph, pairs them by sorted order with multiplicity, and
    drops the ground states.  A failed completeness certificate on either
    side flags the report instead of raising.
    """
    if n_terms < 10:
        raise ValueError("need at least 10 eigenvalue pairs")
    req = SpectrumRequest(count=n_terms + 1, tol=tol)
    pert = compute_spectrum(g, req)
    free = compute_spectrum(free_version(g), req)
    lam_p = pert.flat()[:n_terms + 1]
    lam_f = free.flat()[:n_terms + 1]
    if len(lam_p) <= n_terms or len(lam_f) <= n_terms:
        raise SpectrumError("solver returned fewer eigenvalues than requested")

    diffs = np.asarray(lam_p[1:]) - np.asarray(lam_f[1:])
    counts = np.arange(1, n_terms + 1, dtype=float)
    partial = np.cumsum(diffs) / counts
    cesaro = np.cumsum(partial) / counts

    extrapolated = _aitken(list(cesaro), n_terms)
    rhs = rhs_functional(g)
    return TraceAverageReport(
        n_used=n_terms,
        lambda_pert=[float(v) for v in lam_p[1:]],
        lambda_free=[float(v) for v in lam_f[1:]],
        closeness=[float(d) for d in diffs],
        partial_averages=[float(s) for s in partial],
        cesaro=[float(c) for c in cesaro],
        extrapolated=float(extrapolated),
        rhs=float(rhs),
        residual=float(abs(extrapolated - rhs)),
        certified=bool(pert.certified and free.certified),
    )


def closeness_test(report, window, eps):
    """True iff the last `window` raw differences all stay below eps."""
    if window > report.n_used:
        raise ValueError("window exceeds the number of computed pairs")
    if window < 1:
        raise ValueError("window must be positive")
    tail = report.closeness[report.n_used - window:]
    return bool(max(abs(d) for d in tail) < eps)


def report_to_csv(report):
    """Render the per-index table; see column header for the layout."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "lambda_pert", "lambda_free", "diff", "S_N",
                     "cesaro"])
    for i in range(report.n_used):
        writer.writerow(["%d" % (i + 1),
                         "%.17g" % report.lambda_pert[i],
                         "%.17g" % report.lambda_free[i],
                         "%.17g" % report.closeness[i],
                         "%.17g" % report.partial_averages[i],
                         "%.17g" % report.cesaro[i]])
    return out.getvalue()


def report_to_json(report):
    """Full report as a JSON document string."""
    doc = {
        "n_used": report.n_used,
        "lambda_pert": report.lambda_pert,
        "lambda_free": report.lambda_free,
        "closeness": report.closeness,
        "partial_averages": report.partial_averages,
        "cesaro": report.cesaro,
        "extrapolated": report.extrapolated,
        "rhs": report.rhs,
        "residual": report.residual,
        "certified": report.certified,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
