"""Numerical kernels: potential evaluation, transfer-matrix propagation,
banded inertia counts.

Everything in this module is written in the numba-compilable subset of
Python.  When numba is importable and the environment variable
``QGLAB_NO_NUMBA`` is unset (or "0"), the kernels are jit-compiled with
``cache=True``; otherwise the same functions run as plain Python over
numpy scalars.  Both paths execute identical statements, so results agree
to the last rounding decision of the underlying libm.

Potential kernel spec
---------------------
Potentials cross the kernel boundary as a uniform tuple

    (kind, code, consts, vals, ders, grid_h)

kind 0: constant, value in consts[0]
kind 1: expression bytecode in ``code`` (flat op/arg pairs) with literal
        pool ``consts``
kind 2: cubic Hermite data: node values ``vals``, node slopes ``ders``,
        uniform node spacing ``grid_h``

Unused arrays are empty; every field is always present so the compiled
signature is unique.
"""

import os

import numpy as np

USING_NUMBA = False
if os.environ.get("QGLAB_NO_NUMBA", "0") != "1":
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:
        pass

if not USING_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# bytecode opcodes (must match potentials._compile_ast)
OP_CONST = 0
OP_X = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_POW = 6
OP_NEG = 7
OP_SIN = 8
OP_COS = 9
OP_EXP = 10
OP_SQRT = 11
OP_ABS = 12

KIND_CONSTANT = 0
KIND_EXPRESSION = 1
KIND_SAMPLES = 2

# transfer status codes
OK = 0
STEP_FAILURE = 1
DOMAIN_ERROR = 2
WRONSKIAN_DRIFT = 3

STACK_SIZE = 64


@njit(cache=True)
def eval_program(code, consts, x, stack):
    # stack machine; depth bound checked at compile time
    sp = 0
    i = 0
    n = code.shape[0]
    while i < n:
        op = code[i]
        arg = code[i + 1]
        i += 2
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_X:
            stack[sp] = x
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == OP_POW:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] ** stack[sp]
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_SIN:
            stack[sp - 1] = np.sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = np.cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = np.exp(stack[sp - 1])
        elif op == OP_SQRT:
            stack[sp - 1] = np.sqrt(stack[sp - 1])
        elif op == OP_ABS:
            stack[sp - 1] = abs(stack[sp - 1])
    return stack[0]


@njit(cache=True)
def eval_hermite(vals, ders, grid_h, x):
    # cubic Hermite on a uniform grid; x clamped to the sampled range
    m = vals.shape[0]
    i = int(x / grid_h)
    if i < 0:
        i = 0
    if i > m - 2:
        i = m - 2
    t = (x - i * grid_h) / grid_h
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return (h00 * vals[i] + h01 * vals[i + 1]
            + grid_h * (h10 * ders[i] + h11 * ders[i + 1]))


@njit(cache=True)
def eval_potential(kind, code, consts, vals, ders, grid_h, x, stack):
    if kind == KIND_CONSTANT:
        return consts[0]
    elif kind == KIND_EXPRESSION:
        return eval_program(code, consts, x, stack)
    else:
        return eval_hermite(vals, ders, grid_h, x)


@njit(cache=True)
def free_entries(lam, x):
    """Fundamental system of -u'' = lam u at x: returns (c, s, c', s')
    with c(0)=1, c'(0)=0, s(0)=0, s'(0)=1."""
    z = lam * x * x
    if abs(z) < 1e-4:
        # series in z; relative truncation error below 1e-22 at |z|=1e-4
        c = 1.0 + z * (-1.0 / 2.0 + z * (1.0 / 24.0 + z * (-1.0 / 720.0
            + z * (1.0 / 40320.0 - z / 3628800.0))))
        s = x * (1.0 + z * (-1.0 / 6.0 + z * (1.0 / 120.0 + z * (-1.0 / 5040.0
            + z * (1.0 / 362880.0 - z / 39916800.0)))))
    elif lam > 0.0:
        k = np.sqrt(lam)
        c = np.cos(k * x)
        s = np.sin(k * x) / k
    else:
        k = np.sqrt(-lam)
        c = np.cosh(k * x)
        s = np.sinh(k * x) / k
    return c, s, -lam * s, c


@njit(cache=True)
def free_entries_batch(lams, x, out):
    for i in range(lams.shape[0]):
        c, s, cp, sp = free_entries(lams[i], x)
        out[i, 0] = c
        out[i, 1] = s
        out[i, 2] = cp
        out[i, 3] = sp


# Dormand-Prince 5(4) coefficients
_C2 = 1.0 / 5.0
_C3 = 3.0 / 10.0
_C4 = 4.0 / 5.0
_C5 = 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31 = 3.0 / 40.0
_A32 = 9.0 / 40.0
_A41 = 44.0 / 45.0
_A42 = -56.0 / 15.0
_A43 = 32.0 / 9.0
_A51 = 19372.0 / 6561.0
_A52 = -25360.0 / 2187.0
_A53 = 64448.0 / 6561.0
_A54 = -212.0 / 729.0
_A61 = 9017.0 / 3168.0
_A62 = -355.0 / 33.0
_A63 = 46732.0 / 5247.0
_A64 = 49.0 / 176.0
_A65 = -5103.0 / 18656.0
_B1 = 35.0 / 384.0
_B3 = 500.0 / 1113.0
_B4 = 125.0 / 192.0
_B5 = -2187.0 / 6784.0
_B6 = 11.0 / 84.0
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0


@njit(cache=True)
def transfer_kernel(kind, code, consts, vals, ders, grid_h, lam, x_end, tol):
    """Propagate the fundamental system of -u'' + q u = lam u from 0 to
    x_end with an adaptive Dormand-Prince 5(4) pair.

    Error control is per unit step (local error <= tol * h / x_end) so the
    accumulated error over the whole edge stays near tol rather than
    tol * nsteps.

    Returns (c, s, cp, sp, wronskian_drift, status, nsteps).
    """
    c = 1.0
    s = 0.0
    cp = 0.0
    sp = 1.0
    if x_end <= 0.0:
        return c, s, cp, sp, 0.0, OK, 0

    stack = np.empty(STACK_SIZE)
    span = x_end
    t = 0.0

    q = eval_potential(kind, code, consts, vals, ders, grid_h, 0.0, stack)
    if not np.isfinite(q):
        return c, s, cp, sp, 0.0, DOMAIN_ERROR, 0
    w = q - lam
    # state y = (c, s, cp, sp); y' = (cp, sp, w c, w s)
    k1_0 = cp
    k1_1 = sp
    k1_2 = w * c
    k1_3 = w * s

    scale0 = abs(lam)
    if scale0 < 1.0:
        scale0 = 1.0
    h = 0.1 / np.sqrt(scale0)
    if h > span:
        h = span
    hmin = span * 1e-14
    nsteps = 0

    while t < span:
        remaining = span - t
        if h > remaining:
            h = remaining
        nsteps += 1
        if nsteps > 5000000:
            return c, s, cp, sp, 0.0, STEP_FAILURE, nsteps

        q = eval_potential(kind, code, consts, vals, ders, grid_h,
                           t + _C2 * h, stack)
        if not np.isfinite(q):
            return c, s, cp, sp, 0.0, DOMAIN_ERROR, nsteps
        w = q - lam
        y0 = c + h * _A21 * k1_0
        y1 = s + h * _A21 * k1_1
        y2 = cp + h * _A21 * k1_2
        y3 = sp + h * _A21 * k1_3
        k2_0 = y2
        k2_1 = y3
        k2_2 = w * y0
        k2_3 = w * y1

        q = eval_potential(kind, code, consts, vals, ders, grid_h,
                           t + _C3 * h, stack)
        if not np.isfinite(q):
            return c, s, cp, sp, 0.0, DOMAIN_ERROR, nsteps
        w = q - lam
        y0 = c + h * (_A31 * k1_0 + _A32 * k2_0)
        y1 = s + h * (_A31 * k1_1 + _A32 * k2_1)
        y2 = cp + h * (_A31 * k1_2 + _A32 * k2_2)
        y3 = sp + h * (_A31 * k1_3 + _A32 * k2_3)
        k3_0 = y2
        k3_1 = y3
        k3_2 = w * y0
        k3_3 = w * y1

        q = eval_potential(kind, code, consts, vals, ders, grid_h,
                           t + _C4 * h, stack)
        if not np.isfinite(q):
            return c, s, cp, sp, 0.0, DOMAIN_ERROR, nsteps
        w = q - lam
        y0 = c + h * (_A41 * k1_0 + _A42 * k2_0 + _A43 * k3_0)
        y1 = s + h * (_A41 * k1_1 + _A42 * k2_1 + _A43 * k3_1)
        y2 = cp + h * (_A41 * k1_2 + _A42 * k2_2 + _A43 * k3_2)
        y3 = sp + h * (_A41 * k1_3 + _A42 * k2_3 + _A43 * k3_3)
        k4_0 = y2
        k4_1 = y3
        k4_2 = w * y0
        k4_3 = w * y1

        q = eval_potential(kind, code, consts, vals, ders, grid_h,
                           t + _C5 * h, stack)
        if not np.isfinite(q):
            return c, s, cp, sp, 0.0, DOMAIN_ERROR, nsteps
        w = q - lam
        y0 = c + h * (_A51 * k1_0 + _A52 * k2_0 + _A53 * k3_0 + _A54 * k4_0)
        y1 = s + h * (_A51 * k1_1 + _A52 * k2_1 + _A53 * k3_1 + _A54 * k4_1)
        y2 = cp + h * (_A51 * k1_2 + _A52 * k2_2 + _A53 * k3_2 + _A54 * k4_2)
        y3 = sp + h * (_A51 * k1_3 + _A52 * k2_3 + _A53 * k3_3 + _A54 * k4_3)
        k5_0 = y2
        k5_1 = y3
        k5_2 = w * y0
        k5_3 = w * y1

        q = eval_potential(kind, code, consts, vals, ders, grid_h,
                           t + h, stack)
        if not np.isfinite(q):
            return c, s, cp, sp, 0.0, DOMAIN_ERROR, nsteps
        w = q - lam
        y0 = c + h * (_A61 * k1_0 + _A62 * k2_0 + _A63 * k3_0
                      + _A64 * k4_0 + _A65 * k5_0)
        y1 = s + h * (_A61 * k1_1 + _A62 * k2_1 + _A63 * k3_1
                      + _A64 * k4_1 + _A65 * k5_1)
        y2 = cp + h * (_A61 * k1_2 + _A62 * k2_2 + _A63 * k3_2
                       + _A64 * k4_2 + _A65 * k5_2)
        y3 = sp + h * (_A61 * k1_3 + _A62 * k2_3 + _A63 * k3_3
                       + _A64 * k4_3 + _A65 * k5_3)
        k6_0 = y2
        k6_1 = y3
        k6_2 = w * y0
        k6_3 = w * y1

        # 5th order solution (b2 = b7 = 0)
        y5_0 = c + h * (_B1 * k1_0 + _B3 * k3_0 + _B4 * k4_0
                        + _B5 * k5_0 + _B6 * k6_0)
        y5_1 = s + h * (_B1 * k1_1 + _B3 * k3_1 + _B4 * k4_1
                        + _B5 * k5_1 + _B6 * k6_1)
        y5_2 = cp + h * (_B1 * k1_2 + _B3 * k3_2 + _B4 * k4_2
                         + _B5 * k5_2 + _B6 * k6_2)
        y5_3 = sp + h * (_B1 * k1_3 + _B3 * k3_3 + _B4 * k4_3
                         + _B5 * k5_3 + _B6 * k6_3)

        # k7 = f(t+h, y5); same w as stage 6 (both at t+h)
        k7_0 = y5_2
        k7_1 = y5_3
        k7_2 = w * y5_0
        k7_3 = w * y5_1

        e0 = h * (_E1 * k1_0 + _E3 * k3_0 + _E4 * k4_0 + _E5 * k5_0
                  + _E6 * k6_0 + _E7 * k7_0)
        e1 = h * (_E1 * k1_1 + _E3 * k3_1 + _E4 * k4_1 + _E5 * k5_1
                  + _E6 * k6_1 + _E7 * k7_1)
        e2 = h * (_E1 * k1_2 + _E3 * k3_2 + _E4 * k4_2 + _E5 * k5_2
                  + _E6 * k6_2 + _E7 * k7_2)
        e3 = h * (_E1 * k1_3 + _E3 * k3_3 + _E4 * k4_3 + _E5 * k5_3
                  + _E6 * k6_3 + _E7 * k7_3)

        sc0 = 1.0 + max(abs(c), abs(y5_0))
        sc1 = 1.0 + max(abs(s), abs(y5_1))
        sc2 = 1.0 + max(abs(cp), abs(y5_2))
        sc3 = 1.0 + max(abs(sp), abs(y5_3))
        err = np.sqrt(0.25 * ((e0 / sc0) ** 2 + (e1 / sc1) ** 2
                              + (e2 / sc2) ** 2 + (e3 / sc3) ** 2))

        budget = tol * h / span
        if err <= budget or h <= hmin:
            t = t + h
            c = y5_0
            s = y5_1
            cp = y5_2
            sp = y5_3
            k1_0 = k7_0
            k1_1 = k7_1
            k1_2 = k7_2
            k1_3 = k7_3

        if err > 0.0 and np.isfinite(err):
            fac = 0.9 * (budget / err) ** 0.2
            if fac < 0.2:
                fac = 0.2
            elif fac > 5.0:
                fac = 5.0
        else:
            fac = 0.2 if not np.isfinite(err) else 5.0
        h = h * fac
        if h < hmin:
            if t < span and err > budget:
                return c, s, cp, sp, 0.0, STEP_FAILURE, nsteps
            h = hmin

    # police the Wronskian relative to the size of its two products: at
    # deeply negative lam the entries grow like cosh, and rounding alone
    # makes the absolute defect proportional to their magnitude
    scale = 1.0 + abs(c * sp) + abs(s * cp)
    drift = abs(c * sp - s * cp - 1.0) / scale
    return c, s, cp, sp, drift, OK, nsteps


@njit(cache=True)
def transfer_batch(kind, code, consts, vals, ders, grid_h, lams, x_end, tol,
                   out, status):
    for i in range(lams.shape[0]):
        c, s, cp, sp, drift, st, _ = transfer_kernel(
            kind, code, consts, vals, ders, grid_h, lams[i], x_end, tol)
        out[i, 0] = c
        out[i, 1] = s
        out[i, 2] = cp
        out[i, 3] = sp
        status[i] = st
        if drift > 100.0 * tol and st == OK:
            status[i] = WRONSKIAN_DRIFT


@njit(cache=True)
def banded_inertia(band_a, band_m, shift, pivmin):
    """Number of eigenvalues of the pencil (A, M) strictly below shift,
    by counting negative pivots of the LDL^T factorization of A - shift M.

    Banded lower storage: band[r, j] = A[j + r, j], r = 0..kd.
    Returns -1 if the factorization produced a NaN.
    """
    kd = band_a.shape[0] - 1
    n = band_a.shape[1]
    w = band_a - shift * band_m
    neg = 0
    for j in range(n):
        d = w[0, j]
        if d != d:
            return -1
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            neg += 1
        jmax = kd
        if jmax > n - 1 - j:
            jmax = n - 1 - j
        for p in range(1, jmax + 1):
            lp = w[p, j] / d
            for q in range(p, jmax + 1):
                w[q - p, j + p] -= lp * w[q, j]
    return neg
