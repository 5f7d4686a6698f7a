"""Mode frequencies and Gautschi-type step weights.

Every coefficient of the exponential integrators is built from the moments

    S_m(w, tau) = int_0^tau s^m sin(w (tau - s)) ds,
    C_m(w, tau) = int_0^tau s^m cos(w (tau - s)) ds.

Writing ``x = w tau`` and ``S_m = tau^(m+1) s_m(x)``, ``C_m = tau^(m+1) c_m(x)``
the scaled moments satisfy

    s_0 = (1 - cos x) / x,      c_0 = sin x / x,
    s_m = (1 - m c_{m-1}) / x,  c_m = m s_{m-1} / x,

which is used for ``|x| >= SERIES_THRESHOLD``.  Below the threshold the upward
recurrence amplifies rounding by roughly ``m! / x^m``, so the entire series

    s_m = sum_k (-1)^k m! x^(2k+1) / (m+2k+2)!,
    c_m = sum_k (-1)^k m! x^(2k)   / (m+2k+1)!

is summed instead.  ``s_m`` is odd and ``c_m`` even in ``x``, which makes
negative ``tau`` (the time-reversed step) come out right automatically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec

__all__ = [
    "SERIES_THRESHOLD",
    "MAX_MOMENT",
    "SUPPORTED_ORDERS",
    "MomentTable",
    "WeightTable",
    "mode_frequencies",
    "scaled_moments",
    "moment_integrals",
    "build_weight_table",
]

SERIES_THRESHOLD = 2.0
MAX_MOMENT = 6
SUPPORTED_ORDERS = (2, 4, 6)
_SERIES_TERMS = 16


def mode_frequencies(grid: GridSpec, epsilon: float) -> np.ndarray:
    """``omega_l = sqrt(eps^2 mu_l^2 + 1) / eps^2`` in FFT order."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    eps2 = epsilon * epsilon
    return np.sqrt(eps2 * grid.mu**2 + 1.0) / eps2


def _series(x: np.ndarray, m_max: int):
    s = np.zeros((m_max + 1, x.size))
    c = np.zeros((m_max + 1, x.size))
    x2 = x * x
    for m in range(m_max + 1):
        ts = x * (math.factorial(m) / math.factorial(m + 2))
        tc = np.full_like(x, math.factorial(m) / math.factorial(m + 1))
        acc_s = np.zeros_like(x)
        acc_c = np.zeros_like(x)
        for k in range(_SERIES_TERMS):
            acc_s += ts
            acc_c += tc
            ts = ts * (-x2 / ((m + 2 * k + 3) * (m + 2 * k + 4)))
            tc = tc * (-x2 / ((m + 2 * k + 2) * (m + 2 * k + 3)))
        s[m] = acc_s
        c[m] = acc_c
    return s, c


def _recurrence(x: np.ndarray, m_max: int):
    s = np.empty((m_max + 1, x.size))
    c = np.empty((m_max + 1, x.size))
    s[0] = 2.0 * np.sin(0.5 * x) ** 2 / x
    c[0] = np.sin(x) / x
    for m in range(1, m_max + 1):
        s[m] = (1.0 - m * c[m - 1]) / x
        c[m] = m * s[m - 1] / x
    return s, c


def scaled_moments(x, m_max: int = MAX_MOMENT):
    """Return ``(s, c)`` with shape ``(m_max + 1, len(x))`` for ``x = omega * tau``."""
    if not 0 <= m_max <= MAX_MOMENT:
        raise ValueError(f"m_max must lie in 0..{MAX_MOMENT}, got {m_max}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.empty((m_max + 1, x.size))
    c = np.empty((m_max + 1, x.size))
    small = np.abs(x) < SERIES_THRESHOLD
    if small.any():
        s[:, small], c[:, small] = _series(x[small], m_max)
    if (~small).any():
        s[:, ~small], c[:, ~small] = _recurrence(x[~small], m_max)
    return s, c


@dataclass(frozen=True)
class MomentTable:
    omega: float
    tau: float
    S: np.ndarray
    C: np.ndarray


def moment_integrals(omega: float, tau: float, m_max: int = MAX_MOMENT) -> MomentTable:
    """``S_m`` and ``C_m`` for ``m = 0 .. m_max`` at a single ``(omega, tau)``.

    Negative ``tau`` is accepted and gives the integrals over ``[0, tau]``.
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if tau == 0:
        return MomentTable(omega, tau, np.zeros(m_max + 1), np.zeros(m_max + 1))
    s, c = scaled_moments(omega * tau, m_max)
    scale = tau ** np.arange(1, m_max + 2)
    return MomentTable(omega, tau, scale * s[:, 0], scale * c[:, 0])


@dataclass(frozen=True)
class WeightTable:
    """Per-mode step coefficients for one ``(tau, order)``; FFT order.

    ``main[m]`` / ``main_dot[m]`` (even ``m``) weight the ``m``-th time
    derivative of ``f`` in the three-level step for ``u`` / ``u_t``;
    ``first[m]`` / ``first_dot[m]`` do the same in the starting step.
    ``gap`` is ``2 - 2 cos(omega tau)`` evaluated as ``4 sin^2(omega tau / 2)``.
    """

    order: int
    tau: float
    epsilon: float
    omega: np.ndarray
    cos: np.ndarray
    sin: np.ndarray
    gap: np.ndarray
    main: dict
    main_dot: dict
    first: dict
    first_dot: dict

    def half(self, name: str, m: int | None = None) -> np.ndarray:
        arr = getattr(self, name)
        if m is not None:
            arr = arr[m]
        return np.ascontiguousarray(arr[: self.omega.shape[0] // 2 + 1])


def build_weight_table(grid: GridSpec, epsilon: float, tau: float, order: int) -> WeightTable:
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order {order}; choose from {SUPPORTED_ORDERS}")
    if tau == 0 or not math.isfinite(tau):
        raise ValueError(f"tau must be nonzero and finite, got {tau}")
    eps2 = epsilon * epsilon
    omega = mode_frequencies(grid, epsilon)
    top = order - 2
    s, c = scaled_moments(omega * tau, top)
    main, main_dot, first, first_dot = {}, {}, {}, {}
    for m in range(top + 1):
        scale = tau ** (m + 1) / (eps2 * math.factorial(m))
        S = scale * s[m] / omega
        C = scale * c[m]
        first[m] = S
        first_dot[m] = C
        if m % 2 == 0:
            main[m] = 2.0 * S
            main_dot[m] = 2.0 * C
    return WeightTable(
        order=order,
        tau=float(tau),
        epsilon=float(epsilon),
        omega=omega,
        cos=np.cos(omega * tau),
        sin=np.sin(omega * tau),
        gap=4.0 * np.sin(0.5 * omega * tau) ** 2,
        main=main,
        main_dot=main_dot,
        first=first,
        first_dot=first_dot,
    )
