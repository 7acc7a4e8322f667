import math
import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.linalg

from qglab import kernels

_PROBE = r"""
import numpy as np
from qglab import kernels
from qglab.potentials import Expression
from qglab.transfer import batch_entries, transfer

q = Expression("2/(1+x)^2")
lams = np.array([-6.25, -1.0, 0.0, 1.0, 4.0, 25.0])
rows = batch_entries(q, 0.5, lams, tol=1e-11)
for row in rows:
    print(" ".join(repr(float(v)) for v in row))
tm = transfer(Expression("0.3*sin(2*x)"), 9.0, 1.3, tol=1e-12)
print(repr(tm.c), repr(tm.s), repr(tm.cp), repr(tm.sp))
print(repr(float(tm.wronskian_drift)))
print(kernels.USING_NUMBA)
"""


def _run_probe(no_numba):
    env = dict(os.environ)
    if no_numba:
        env["QGLAB_NO_NUMBA"] = "1"
    else:
        env.pop("QGLAB_NO_NUMBA", None)
    proc = subprocess.run([sys.executable, "-c", _PROBE], env=env,
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.mark.slow
def test_fallback_path_is_bit_identical_to_compiled():
    with_numba = _run_probe(no_numba=False)
    without = _run_probe(no_numba=True)
    assert with_numba.splitlines()[-1] == "True"
    assert without.splitlines()[-1] == "False"
    # every numeric line must agree exactly: same statements, same order
    assert with_numba.splitlines()[:-1] == without.splitlines()[:-1]


def test_env_flag_changes_selection():
    out = subprocess.run(
        [sys.executable, "-c", "import qglab; print(qglab.USING_NUMBA)"],
        env={**os.environ, "QGLAB_NO_NUMBA": "1"},
        capture_output=True, text=True, timeout=600)
    assert out.stdout.strip() == "False"


# ------------------------------------------------------ free entries

def test_free_entries_matches_trig():
    for lam, x in [(4.0, 1.2), (100.0, 0.3), (-9.0, 0.7)]:
        c, s, cp, sp = kernels.free_entries(lam, x)
        if lam > 0:
            k = math.sqrt(lam)
            assert c == pytest.approx(math.cos(k * x), abs=1e-15)
            assert s == pytest.approx(math.sin(k * x) / k, abs=1e-15)
        else:
            kap = math.sqrt(-lam)
            assert c == pytest.approx(math.cosh(kap * x), rel=1e-15)
            assert s == pytest.approx(math.sinh(kap * x) / kap, rel=1e-15)
        assert cp == pytest.approx(-lam * s, rel=1e-14, abs=1e-15)
        assert sp == pytest.approx(c, rel=1e-14)


def test_free_entries_series_branch_is_smooth():
    # tiny |lam| x^2 goes through the series; it must agree with the
    # trig branch to full precision right at the switch
    x = 0.01
    for lam in (1e-9, -1e-9, 0.0, 2e-4, -2e-4):
        c, s, cp, sp = kernels.free_entries(lam, x)
        if lam == 0.0:
            assert c == 1.0 and s == x
        else:
            k = complex(lam) ** 0.5
            ref_c = complex(np.cos(k * x)).real
            ref_s = complex(np.sin(k * x) / k).real
            assert c == pytest.approx(ref_c, abs=1e-16)
            assert s == pytest.approx(ref_s, abs=1e-16)
        assert cp == pytest.approx(-lam * s, abs=1e-16)
        assert sp == pytest.approx(c, abs=1e-16)


# --------------------------------------------------- banded inertia

def _to_band(dense, bandwidth):
    n = dense.shape[0]
    band = np.zeros((bandwidth + 1, n))
    for r in range(bandwidth + 1):
        for j in range(n - r):
            band[r, j] = dense[j + r, j]
    return band


def test_banded_inertia_counts_match_dense_solver():
    rng = np.random.default_rng(5)
    n, bw = 40, 2
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - bw), min(n, i + bw + 1)):
            if j <= i:
                a[i, j] = a[j, i] = rng.uniform(-1.0, 1.0)
    m = np.zeros((n, n))
    for i in range(n):
        m[i, i] = rng.uniform(2.0, 3.0)
        if i + 1 < n:
            m[i, i + 1] = m[i + 1, i] = 0.3
    eigs = scipy.linalg.eigh(a, m, eigvals_only=True)
    band_a = _to_band(a, bw)
    band_m = _to_band(m, bw)
    for shift in (-2.0, -0.5, 0.0, 0.4, 1.1, 5.0):
        want = int((eigs < shift).sum())
        got = kernels.banded_inertia(band_a, band_m, shift, 1e-14)
        assert got == want, "shift %g" % shift
