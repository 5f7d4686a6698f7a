import os
import subprocess
import sys

import numpy as np
import pytest

from kgewi import _pykernels, kernels

try:
    from kgewi import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")
rng = np.random.default_rng(7)
N = 257


def fields(k):
    return [rng.standard_normal(N) for _ in range(k)]


@needs_ext
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_chain_term_backends_agree(m):
    args = fields(8)
    a, b = np.empty(N), np.empty(N)
    _pykernels.chain_term(m, *args, a)
    _ckernels.chain_term(m, *args, b)
    assert np.allclose(a, b, rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("impl", [_pykernels, pytest.param(_ckernels, marks=needs_ext)])
def test_chain_term_closed_form(impl):
    f1, f2, f3, f4, u1, u2, u3, u4 = fields(8)
    out = np.empty(N)
    impl.chain_term(4, f1, f2, f3, f4, u1, u2, u3, u4, out)
    want = f4 * u1**4 + 6 * f3 * u1**2 * u2 + 3 * f2 * u2**2 + 4 * f2 * u1 * u3 + f1 * u4
    assert np.allclose(out, want, rtol=1e-13, atol=1e-13)
    with pytest.raises(ValueError):
        impl.chain_term(5, f1, f2, f3, f4, u1, u2, u3, u4, out)


@needs_ext
def test_accel_backends_agree():
    w2 = rng.uniform(1, 100, N)
    uh = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    fh = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    a, b = np.empty(N, complex), np.empty(N, complex)
    _pykernels.accel(w2, uh, fh, 4.0, a)
    _ckernels.accel(w2, uh, fh, 4.0, b)
    assert np.allclose(a, b, rtol=1e-15, atol=0)
    assert np.allclose(a, -(w2 * uh + 4.0 * fh), rtol=1e-15)


@needs_ext
@pytest.mark.parametrize("nterms", [1, 2, 3])
def test_main_update_backends_agree(nterms):
    cplx = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    u, d, v = cplx(N), cplx(N), cplx(N)
    gap, wsin2 = rng.uniform(0, 4, N), rng.standard_normal(N)
    A, Adot = rng.standard_normal((nterms, N)), rng.standard_normal((nterms, N))
    F = cplx(nterms, N)
    py = [x.copy() for x in (u, d, v)]
    cy = [x.copy() for x in (u, d, v)]
    _pykernels.main_update(*py, gap, wsin2, A, Adot, F)
    _ckernels.main_update(*cy, gap, wsin2, A, Adot, F)
    for a, b in zip(py, cy):
        assert np.allclose(a, b, rtol=1e-14, atol=1e-14)
    # semantics: u^{n+1} = u^n + d^{n+1}
    d_new = d - gap * u - sum(A[m] * F[m] for m in range(nterms))
    assert np.allclose(py[1], d_new, rtol=1e-13, atol=1e-13)
    assert np.allclose(py[0], u + d_new, rtol=1e-13, atol=1e-13)


@needs_ext
def test_whole_run_backends_agree():
    code = (
        "import numpy as np, warnings; warnings.simplefilter('ignore');"
        "from kgewi import *;"
        "g = build_grid(-32, 32, 256); p = KGEProblem.gaussian_benchmark(0.5);"
        "s = integrate(p, g, 0.01, 0.5, 6);"
        "print(BACKEND); print(repr(h1_norm(g, s.u)))"
    )
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, KGEWI_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, norm = res.stdout.split()
        out[backend] = float(norm)
    assert set(out) == {"cython", "python"}
    assert out["cython"] == pytest.approx(out["python"], rel=1e-13)


def test_selected_backend_is_exported():
    assert kernels.BACKEND in ("cython", "python")
    if os.environ.get("KGEWI_PURE_PYTHON", "") not in ("", "0"):
        assert kernels.BACKEND == "python"
