"""Fundamental-solution (transfer) matrices of -u'' + q u = lam u on one
edge.

The matrix propagates initial data (u(0), u'(0)) to (u(x), u'(x)) along
solutions; columns are the cosine-like and sine-like solutions

    c(0) = 1, c'(0) = 0        s(0) = 0, s'(0) = 1.

The system is trace-free, so the Wronskian c s' - s c' is identically 1;
its numerical drift (relative to the size of the two products, which grow
like cosh^2 at negative lam) is reported and policed against 100 times
the integration tolerance.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, StepFailure, WronskianViolation
from .potentials import Constant

__all__ = ["TransferMatrix", "free_transfer", "transfer", "batch_entries",
           "DEFAULT_ODE_TOL"]

# secular root refinement targets 1e-8 eigenvalues; 1e-10 per edge traversal
# keeps the matrix entries two orders tighter than that
DEFAULT_ODE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    lam: float
    x: float
    entries: np.ndarray = field(repr=False)  # [[c, s], [c', s']]
    wronskian_drift: float

    @property
    def c(self):
        return self.entries[0, 0]

    @property
    def s(self):
        return self.entries[0, 1]

    @property
    def cp(self):
        return self.entries[1, 0]

    @property
    def sp(self):
        return self.entries[1, 1]


def _pack(lam, x, c, s, cp, sp, drift):
    return TransferMatrix(lam=float(lam), x=float(x),
                          entries=np.array([[c, s], [cp, sp]]),
                          wronskian_drift=float(drift))


def free_transfer(lam, x):
    """Closed-form transfer matrix for q = 0 (series form near lam*x^2 = 0
    to avoid cancellation; exact Wronskian)."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    c, s, cp, sp = kernels.free_entries(float(lam), float(x))
    return _pack(lam, x, c, s, cp, sp, 0.0)


_STATUS_MESSAGES = {
    kernels.STEP_FAILURE: (StepFailure,
                           "step size underflow at lam=%g over [0, %g]"),
    kernels.DOMAIN_ERROR: (DomainError,
                           "potential evaluation failed at lam=%g on [0, %g]"),
    kernels.WRONSKIAN_DRIFT: (WronskianViolation,
                              "Wronskian drift exceeded at lam=%g on [0, %g]"),
}


def _raise_status(status, lam, x):
    cls, msg = _STATUS_MESSAGES[status]
    raise cls(msg % (lam, x))


def transfer(p, lam, x, tol=DEFAULT_ODE_TOL):
    """Transfer matrix of -u'' + q u = lam u over [0, x].

    Constant potentials reduce exactly to the free case with shifted
    spectral parameter; everything else goes through the adaptive
    Dormand-Prince 5(4) kernel with per-unit-step error control.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if isinstance(p, Constant):
        c, s, cp, sp = kernels.free_entries(float(lam) - p.value, float(x))
        return _pack(lam, x, c, s, cp, sp, 0.0)
    kind, code, consts, vals, ders, grid_h = p.kernel_spec(float(x))
    with np.errstate(all="ignore"):
        c, s, cp, sp, drift, status, _n = kernels.transfer_kernel(
            kind, code, consts, vals, ders, grid_h, float(lam), float(x), tol)
    if status != kernels.OK:
        _raise_status(status, lam, x)
    if drift > 100.0 * tol:
        raise WronskianViolation(
            "Wronskian drift %g > %g at lam=%g" % (drift, 100.0 * tol, lam))
    return _pack(lam, x, c, s, cp, sp, drift)


def batch_entries(p, edge_length, lams, tol=DEFAULT_ODE_TOL):
    """(n, 4) array of (c, s, c', s') across a lam grid for one edge.

    Same semantics as transfer() per row; used by the spectral scan where
    per-call TransferMatrix wrapping would dominate.
    """
    lams = np.ascontiguousarray(lams, dtype=np.float64)
    out = np.empty((lams.shape[0], 4))
    if isinstance(p, Constant):
        kernels.free_entries_batch(lams - p.value, float(edge_length), out)
        return out
    kind, code, consts, vals, ders, grid_h = p.kernel_spec(float(edge_length))
    status = np.zeros(lams.shape[0], dtype=np.int64)
    with np.errstate(all="ignore"):
        kernels.transfer_batch(kind, code, consts, vals, ders, grid_h,
                               lams, float(edge_length), tol, out, status)
    bad = np.nonzero(status)[0]
    if bad.size:
        first = bad[0]
        _raise_status(int(status[first]), float(lams[first]), edge_length)
    return out
