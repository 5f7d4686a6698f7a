"""Classical fourth-order Runge-Kutta in Fourier space (method of lines).

The semi-discrete system for each mode is

    u' = v,    v' = -omega^2 u - f_hat(u) / eps^2,

with ``f_hat`` evaluated pseudospectrally on the same grid and transforms as
the exponential integrators.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import kernels
from .ewi import InstabilityError, _full_state, _half_state, step_count
from .grid import GridSpec, dealias_mask
from .problem import KGEProblem, SolverState, initial_state
from .weights import mode_frequencies

__all__ = ["rk4_rhs", "integrate_rk4", "RK4Stepper"]


class RK4Stepper:
    def __init__(self, problem: KGEProblem, grid: GridSpec, tau: float, dealias: bool = False):
        self.problem = problem
        self.grid = grid
        self.tau = tau
        self.M = grid.M
        self.omega2 = np.ascontiguousarray(mode_frequencies(grid, problem.epsilon)[: grid.M // 2 + 1] ** 2)
        self.inv_eps2 = 1.0 / problem.epsilon**2
        self.mask = dealias_mask(grid, half=True) if dealias else None
        K = grid.M // 2 + 1
        self._fh = np.empty(K, np.complex128)

    def accel(self, uh, out=None):
        """``-omega^2 u - f_hat(u) / eps^2`` on a half spectrum."""
        u = np.fft.irfft(uh, n=self.M, norm="forward")
        np.fft.rfft(self.problem.nonlinearity(u), norm="forward", out=self._fh)
        if self.mask is not None:
            self._fh *= self.mask
        if out is None:
            out = np.empty_like(uh)
        kernels.accel(self.omega2, uh, self._fh, self.inv_eps2, out)
        return out

    def step(self, u, v):
        h = self.tau
        a1 = self.accel(u)
        u2 = u + (0.5 * h) * v
        v2 = v + (0.5 * h) * a1
        a2 = self.accel(u2)
        u3 = u + (0.5 * h) * v2
        v3 = v + (0.5 * h) * a2
        a3 = self.accel(u3)
        u4 = u + h * v3
        v4 = v + h * a3
        a4 = self.accel(u4)
        un = u + (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4)
        vn = v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        return un, vn


def rk4_rhs(problem: KGEProblem, grid: GridSpec, state: SolverState):
    """Right-hand side ``(u_t, v_t)`` of the first-order system, as full spectra."""
    st = RK4Stepper(problem, grid, 1.0)
    uh, vh = _half_state(state)
    acc = st.accel(uh)
    rhs = _full_state(grid, vh, acc, state.t)
    return rhs.u, rhs.udot


def integrate_rk4(problem: KGEProblem, grid: GridSpec, tau: float, T: float,
                  observer: Callable | None = None, stride: int = 1, dealias: bool = False,
                  state0: SolverState | None = None) -> SolverState:
    """RK4 from ``t = 0`` to ``T``; raises :class:`InstabilityError` on blow-up."""
    n_steps = step_count(T, tau)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    st = RK4Stepper(problem, grid, tau, dealias)
    s0 = initial_state(problem, grid) if state0 is None else state0
    if observer is not None:
        observer(0, s0.copy())
    u, v = _half_state(s0)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_steps + 1):
            u, v = st.step(u, v)
            t = s0.t + n * tau
            if n % 64 == 0 or n == n_steps:
                if not np.isfinite(u).all():
                    raise InstabilityError(n, t, "RK4")
            if observer is not None and (n % stride == 0 or n == n_steps):
                observer(n, _full_state(grid, u, v, t))
    return _full_state(grid, u, v, s0.t + n_steps * tau)
