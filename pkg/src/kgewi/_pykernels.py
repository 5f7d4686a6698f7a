"""NumPy implementations of the per-step kernels.

Mirrors ``_ckernels.pyx`` call for call; used when the compiled module is
unavailable or ``KGEWI_PURE_PYTHON`` is set.
"""
import numpy as np

BACKEND = "python"


def chain_term(m, f1, f2, f3, f4, u1, u2, u3, u4, out):
    """m-th time derivative of f(u(t)) from f^(k)(u) and u_k = d^k u / dt^k."""
    if m == 1:
        np.multiply(f1, u1, out=out)
    elif m == 2:
        np.multiply(f2 * u1, u1, out=out)
        out += f1 * u2
    elif m == 3:
        np.multiply(f3 * u1 * u1, u1, out=out)
        out += 3.0 * f2 * u1 * u2
        out += f1 * u3
    elif m == 4:
        sq = u1 * u1
        np.multiply(f4 * sq, sq, out=out)
        out += 6.0 * f3 * sq * u2
        out += 3.0 * f2 * u2 * u2
        out += 4.0 * f2 * u1 * u3
        out += f1 * u4
    else:
        raise ValueError(f"chain_term supports m = 1..4, got {m}")
    return out


def accel(omega2, uh, fh, inv_eps2, out):
    """Second time derivative in spectral space: -omega^2 u - f / eps^2."""
    np.multiply(omega2, uh, out=out)
    out += inv_eps2 * fh
    np.negative(out, out=out)
    return out


def main_update(u, d, v, gap, wsin2, A, Adot, F):
    """Three-level update in difference form, in place.

    ``d`` holds ``u^n - u^{n-1}`` and ``v`` holds ``v^{n-1}``; on return
    ``u``, ``d``, ``v`` hold ``u^{n+1}``, ``u^{n+1} - u^n`` and ``v^{n+1}``.
    ``gap = 2 - 2 cos(omega tau)`` must be computed without cancellation.
    """
    d -= gap * u
    v -= wsin2 * u
    for m in range(F.shape[0]):
        d -= A[m] * F[m]
        v -= Adot[m] * F[m]
    u += d
