"""Symmetric Gautschi-type exponential wave integrators of order 2, 4 and 6.

In Fourier space every mode obeys a forced harmonic oscillator with frequency
``omega_l``.  The variation-of-constants formula taken forward and backward
from ``t_n`` gives the three-level recurrence

    u^{n+1} = -u^{n-1} + 2 cos(w tau) u^n - sum_m A_m d^m f / dt^m,
    v^{n+1} =  v^{n-1} - 2 w sin(w tau) u^n - sum_m Adot_m d^m f / dt^m,

(even ``m < order``), where the time derivatives of ``f(u(t))`` at ``t_n``
are recovered from the PDE itself.  The start uses the one-sided formula with
all ``m <= order - 2``.  See :mod:`kgewi.weights` for the weights.

All stepping runs on real-FFT half spectra; the public functions accept and
return full spectra in :class:`~kgewi.problem.SolverState`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .grid import GridSpec, dealias_mask, forward_dft, from_half, inverse_dft, to_half
from .problem import KGEProblem, SolverState, initial_state
from .weights import SUPPORTED_ORDERS, WeightTable, build_weight_table

__all__ = [
    "InstabilityError",
    "StabilityWarning",
    "StepPair",
    "DerivativeBundle",
    "Expansion",
    "EWIStepper",
    "step_count",
    "time_derivatives_of_u",
    "nonlinearity_time_derivatives",
    "first_step",
    "main_step",
    "march",
    "integrate",
]

_NAN_CHECK_EVERY = 64


class InstabilityError(RuntimeError):
    """Raised when a run produces non-finite values."""

    def __init__(self, step: int, t: float, method: str = ""):
        self.step = step
        self.t = t
        super().__init__(f"{method or 'integration'} produced non-finite values at step {step} (t={t:.6g})")


class StabilityWarning(UserWarning):
    pass


@dataclass
class StepPair:
    """Two consecutive levels feeding the three-level recurrence."""

    prev: SolverState
    curr: SolverState


@dataclass
class DerivativeBundle:
    """Grid values of ``d^k u / dt^k`` for ``k = 0 .. len(fields) - 1``."""

    fields: list = field(default_factory=list)
    t: float = 0.0

    @property
    def k_max(self) -> int:
        return len(self.fields) - 1

    def __getitem__(self, k):
        return self.fields[k]


def step_count(T: float, tau: float) -> int:
    """Number of steps of size ``tau`` reaching ``T``; must be an integer."""
    if not (T > 0 and tau > 0):
        raise ValueError(f"need T > 0 and tau > 0, got T={T}, tau={tau}")
    ratio = T / tau
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9:
        raise ValueError(f"T/tau = {ratio!r} is not an integer step count")
    return int(n)


class Expansion:
    """Time derivatives of ``u`` and ``f(u(t))`` at one level, on half spectra.

    Transforms are issued lazily: ``d^2 u/dt^2`` needs the transform of ``f``,
    ``d^3 u/dt^3`` that of ``df/dt`` and ``d^4 u/dt^4`` that of ``d^2 f/dt^2``.
    """

    def __init__(self, problem: KGEProblem, grid: GridSpec, dealias: bool = False):
        self.problem = problem
        self.grid = grid
        self.M = grid.M
        K = grid.M // 2 + 1
        eps2 = problem.epsilon**2
        self.inv_eps2 = 1.0 / eps2
        omega = np.sqrt(eps2 * grid.mu_half**2 + 1.0) / eps2
        self.omega2 = np.ascontiguousarray(omega**2)
        self.mask = dealias_mask(grid, half=True) if dealias else None
        self._uh = [np.empty(K, np.complex128) for _ in range(5)]
        self._d = np.empty(grid.M)

    def _fft(self, v, out):
        np.fft.rfft(v, norm="forward", out=out)
        if self.mask is not None:
            out *= self.mask
        return out

    def _ifft(self, vh):
        return np.fft.irfft(vh, n=self.M, norm="forward")

    def run(self, uh, vh, wanted, out, k_need: int = 0):
        """Fill ``out[m]`` with the half spectrum of ``d^m f/dt^m`` for ``m in wanted``.

        Returns grid fields ``d^k u / dt^k`` for ``k = 0 .. max(max(wanted), k_need)``.
        """
        top = max(wanted)
        k_top = max(top, k_need)
        nl = self.problem.nonlinearity
        uk = [None] * 5
        uk[0] = self._ifft(uh)
        if k_top >= 1:
            uk[1] = self._ifft(vh)
        fk = _derivative_stack(nl, uk[0], max(top, k_top - 2))
        d = self._d
        spec = {}

        def transform(m):
            if m not in spec:
                buf = out[m] if m in wanted else self._uh[4]
                if m == 0:
                    np.copyto(d, fk[0])
                else:
                    # derivatives of u above order m are never read; d stands in
                    kernels.chain_term(m, fk[1], fk[2], fk[3], fk[4], uk[1],
                                       d if uk[2] is None else uk[2],
                                       d if uk[3] is None else uk[3],
                                       d if uk[4] is None else uk[4], d)
                spec[m] = self._fft(d, buf)
            return spec[m]

        transform(0)
        if k_top >= 2:
            kernels.accel(self.omega2, uh, spec[0], self.inv_eps2, self._uh[2])
            uk[2] = self._ifft(self._uh[2])
        if k_top >= 3:
            transform(1)
            kernels.accel(self.omega2, vh, spec[1], self.inv_eps2, self._uh[3])
            uk[3] = self._ifft(self._uh[3])
        if k_top >= 4:
            transform(2)
            kernels.accel(self.omega2, self._uh[2], spec[2], self.inv_eps2, self._uh[1])
            uk[4] = self._ifft(self._uh[1])
        for m in sorted(wanted):
            transform(m)
        return uk[: k_top + 1]


def _derivative_stack(nl, u, top):
    """f and its derivatives through order 4; orders above ``top`` are zeros."""
    fs = list(nl.derivatives(u, top))
    zeros = None
    while len(fs) < 5:
        if zeros is None:
            zeros = np.zeros_like(u)
        fs.append(zeros)
    return fs


class EWIStepper:
    """Stepping engine for one ``(problem, grid, tau, order)``.

    The three-level recurrence is carried in difference form: with
    ``d^n = u^n - u^{n-1}``

        d^{n+1} = d^n - (2 - 2 cos(w tau)) u^n - sum_m A_m F_m,
        u^{n+1} = u^n + d^{n+1},

    which is the same recurrence but keeps ``2 - 2 cos`` free of cancellation
    when ``w tau`` is small (fine reference runs).
    """

    def __init__(self, problem: KGEProblem, grid: GridSpec, weights: WeightTable, dealias: bool = False):
        if weights.order not in SUPPORTED_ORDERS:
            raise ValueError(f"unsupported order {weights.order}")
        if weights.epsilon != problem.epsilon:
            raise ValueError("weight table was built for a different epsilon")
        if weights.omega.shape[0] != grid.M:
            raise ValueError("weight table was built for a different grid")
        self.problem = problem
        self.grid = grid
        self.weights = weights
        self.order = weights.order
        self.tau = weights.tau
        self.expansion = Expansion(problem, grid, dealias)
        K = grid.M // 2 + 1
        w = weights
        omega = w.half("omega")
        self.cos = w.half("cos")
        self.sin_over_omega = w.half("sin") / omega
        self.omega_sin = omega * w.half("sin")
        self.gap = w.half("gap")
        self.wsin2 = 2.0 * self.omega_sin
        self.main_terms = sorted(w.main)
        self.first_terms = sorted(w.first)
        self.A = np.ascontiguousarray([w.half("main", m) for m in self.main_terms])
        self.Adot = np.ascontiguousarray([w.half("main_dot", m) for m in self.main_terms])
        self.B = {m: w.half("first", m) for m in self.first_terms}
        self.Bdot = {m: w.half("first_dot", m) for m in self.first_terms}
        self._F = np.empty((len(self.main_terms), K), np.complex128)
        self._Fviews = {m: self._F[i] for i, m in enumerate(self.main_terms)}
        self._wanted = set(self.main_terms)

    def first(self, uh, vh):
        """Level 1 from level 0 (new arrays)."""
        F = {m: np.empty_like(uh) for m in self.first_terms}
        self.expansion.run(uh, vh, set(self.first_terms), F)
        un = self.cos * uh + self.sin_over_omega * vh
        vn = self.cos * vh - self.omega_sin * uh
        for m in self.first_terms:
            un -= self.B[m] * F[m]
            vn -= self.Bdot[m] * F[m]
        return un, vn

    def main(self, u, d, v_prev, v_curr):
        """Advance in place: ``u, d, v_prev`` become ``u^{n+1}, d^{n+1}, v^{n+1}``."""
        self.expansion.run(u, v_curr, self._wanted, self._Fviews)
        kernels.main_update(u, d, v_prev, self.gap, self.wsin2, self.A, self.Adot, self._F)


def _half_state(s: SolverState):
    return (np.ascontiguousarray(to_half(s.u), dtype=np.complex128),
            np.ascontiguousarray(to_half(s.udot), dtype=np.complex128))


def _full_state(grid, uh, vh, t):
    return SolverState(from_half(uh, grid.M), from_half(vh, grid.M), t)


def time_derivatives_of_u(problem: KGEProblem, grid: GridSpec, state: SolverState, k_max: int,
                          dealias: bool = False) -> DerivativeBundle:
    """Grid values of ``u, u_t, ..., d^k_max u/dt^k_max`` from the PDE.

    ``u_tt = (u_xx - u/eps^2 - f(u)) / eps^2`` and its time derivatives.
    """
    if k_max not in (2, 3, 4):
        raise ValueError(f"k_max must be 2, 3 or 4, got {k_max}")
    uh, vh = _half_state(state)
    exp = Expansion(problem, grid, dealias)
    K = grid.M // 2 + 1
    out = {0: np.empty(K, np.complex128)}
    fields = exp.run(uh, vh, {0}, out, k_need=k_max)
    return DerivativeBundle([f.copy() for f in fields], state.t)


def nonlinearity_time_derivatives(problem: KGEProblem, grid: GridSpec, bundle: DerivativeBundle,
                                  m_max: int) -> list:
    """Spectra of ``d^m f(u(t)) / dt^m`` for ``m = 0 .. m_max`` (chain rule)."""
    if not 0 <= m_max <= 4:
        raise ValueError(f"m_max must lie in 0..4, got {m_max}")
    if m_max > bundle.k_max:
        raise ValueError(f"bundle holds derivatives through {bundle.k_max}, need {m_max}")
    u = bundle[0]
    fk = _derivative_stack(problem.nonlinearity, u, m_max)
    uk = list(bundle.fields) + [np.zeros_like(u)] * (5 - len(bundle.fields))
    out = [forward_dft(grid, fk[0])]
    d = np.empty_like(u)
    for m in range(1, m_max + 1):
        kernels.chain_term(m, fk[1], fk[2], fk[3], fk[4], uk[1], uk[2], uk[3], uk[4], d)
        out.append(forward_dft(grid, d))
    return out


def _stepper(problem, grid, weights, order, dealias=False):
    if order is not None and order != weights.order:
        raise ValueError(f"order {order} does not match weight table order {weights.order}")
    return EWIStepper(problem, grid, weights, dealias)


def first_step(problem: KGEProblem, grid: GridSpec, weights: WeightTable, s0: SolverState,
               order: int | None = None, dealias: bool = False) -> SolverState:
    """One-sided start from level 0 to level 1."""
    st = _stepper(problem, grid, weights, order, dealias)
    uh, vh = _half_state(s0)
    un, vn = st.first(uh, vh)
    return _full_state(grid, un, vn, s0.t + weights.tau)


def main_step(problem: KGEProblem, grid: GridSpec, weights: WeightTable, pair: StepPair,
              order: int | None = None, dealias: bool = False) -> SolverState:
    """Level ``n+1`` from levels ``n-1`` (``pair.prev``) and ``n`` (``pair.curr``).

    With a table built for ``-tau`` and the pair swapped this runs the
    recurrence backwards.
    """
    _check_spacing(pair, weights.tau)
    st = _stepper(problem, grid, weights, order, dealias)
    up, vp = _half_state(pair.prev)
    u, vc = _half_state(pair.curr)
    d = u - up
    st.main(u, d, vp, vc)
    return _full_state(grid, u, vp, pair.curr.t + weights.tau)


def _check_spacing(pair, tau):
    if not math.isclose(pair.curr.t - pair.prev.t, tau, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"pair spacing {pair.curr.t - pair.prev.t!r} does not match tau={tau!r}")


def _check_finite(arr, step, t, method):
    if not np.isfinite(arr).all():
        raise InstabilityError(step, t, method)


def _run(stepper: EWIStepper, u, d, vp, vc, n0: int, n_steps: int, t0: float,
         observer=None, stride: int = 1, method: str = ""):
    """``n_steps`` main steps from level ``n0`` (time ``t0 + n0 tau``), in place.

    Returns ``(u, d, v_prev, v_curr)`` at the final level.
    """
    tau = stepper.tau
    grid = stepper.grid
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n_steps + 1):
            stepper.main(u, d, vp, vc)
            vp, vc = vc, vp
            n = n0 + i
            if i % _NAN_CHECK_EVERY == 0 or i == n_steps:
                _check_finite(u, n, t0 + n * tau, method)
            if observer is not None and (n % stride == 0 or i == n_steps):
                observer(n, _full_state(grid, u, vc, t0 + n * tau))
    return u, d, vp, vc


def march(problem: KGEProblem, grid: GridSpec, weights: WeightTable, pair: StepPair, n_steps: int,
          dealias: bool = False) -> StepPair:
    """Apply ``n_steps`` three-level steps to ``pair``; returns the last two levels."""
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if n_steps == 0:
        return StepPair(pair.prev.copy(), pair.curr.copy())
    _check_spacing(pair, weights.tau)
    st = EWIStepper(problem, grid, weights, dealias)
    up, vp = _half_state(pair.prev)
    u, vc = _half_state(pair.curr)
    d = u - up
    t = pair.curr.t
    u, d, vp, vc = _run(st, u, d, vp, vc, 0, n_steps, t, method=f"EWI order {weights.order}")
    t_end = t + n_steps * weights.tau
    return StepPair(_full_state(grid, u - d, vp, t_end - weights.tau), _full_state(grid, u, vc, t_end))


def _warn_if_beyond_theory(problem, grid, tau):
    eps = problem.epsilon
    limit = min(eps * eps, grid.h * eps)
    if tau > limit:
        warnings.warn(
            f"tau={tau:g} exceeds min(eps^2, h*eps)={limit:g}; convergence theory does not cover "
            "this step, results are reported as computed",
            StabilityWarning,
            stacklevel=3,
        )


def integrate(problem: KGEProblem, grid: GridSpec, tau: float, T: float, order: int,
              observer: Callable | None = None, stride: int = 1, dealias: bool = False,
              weights: WeightTable | None = None, state0: SolverState | None = None) -> SolverState:
    """Integrate from ``t = 0`` to ``T`` with the order-``order`` EWI.

    ``observer(n, state)`` is called at ``n = 0``, every ``stride`` steps and
    at the final step.
    """
    n_steps = step_count(T, tau)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    _warn_if_beyond_theory(problem, grid, tau)
    if weights is None:
        weights = build_weight_table(grid, problem.epsilon, tau, order)
    st = _stepper(problem, grid, weights, order, dealias)
    s0 = initial_state(problem, grid) if state0 is None else state0
    method = f"EWI order {order}"
    if observer is not None:
        observer(0, s0.copy())
    u0, v0 = _half_state(s0)
    with np.errstate(over="ignore", invalid="ignore"):
        u1, v1 = st.first(u0, v0)
    _check_finite(u1, 1, s0.t + tau, method)
    if observer is not None and (1 % stride == 0 or n_steps == 1):
        observer(1, _full_state(grid, u1, v1, s0.t + tau))
    if n_steps == 1:
        return _full_state(grid, u1, v1, s0.t + tau)
    d = u1 - u0
    u, _, _, vc = _run(st, u1, d, v0, v1, 1, n_steps - 1, s0.t, observer, stride, method)
    return _full_state(grid, u, vc, s0.t + n_steps * tau)
