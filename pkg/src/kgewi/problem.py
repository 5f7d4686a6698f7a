"""Klein-Gordon problem data: nonlinearity, initial data, state and energy.

The equation is

    eps^2 u_tt - u_xx + u / eps^2 + f(u) = 0,
    u(x, 0) = phi1(x),  u_t(x, 0) = phi2(x) / eps^2,

on a periodic interval, with conserved energy

    E = int eps^2 u_t^2 + u_x^2 + u^2 / eps^2 + F(u) dx,   F(u) = 2 int_0^u f.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .grid import GridSpec, forward_dft, inverse_dft, spectral_derivative

__all__ = [
    "Nonlinearity",
    "PolynomialNonlinearity",
    "CubicNonlinearity",
    "ConstantNonlinearity",
    "FunctionNonlinearity",
    "InitialData",
    "gaussian",
    "cosine",
    "zero",
    "preset",
    "KGEProblem",
    "SolverState",
    "initial_state",
    "energy",
    "nonlinearity_field",
]

MAX_DERIVATIVE = 4


class Nonlinearity:
    """Pointwise nonlinearity ``f`` with derivatives through order 4."""

    def derivative(self, u: np.ndarray, k: int) -> np.ndarray:
        raise NotImplementedError

    def antiderivative(self, u: np.ndarray) -> np.ndarray:
        """``F(u) = 2 * int_0^u f(rho) d rho``."""
        raise NotImplementedError

    def derivatives(self, u: np.ndarray, k_max: int) -> list:
        """``[f(u), f'(u), ..., f^(k_max)(u)]``."""
        return [self.derivative(u, k) for k in range(k_max + 1)]

    def __call__(self, u):
        return self.derivative(u, 0)

    @property
    def key(self) -> str:
        """Stable identifier, used when hashing cached reference solutions."""
        raise NotImplementedError


class PolynomialNonlinearity(Nonlinearity):
    """``f(u) = sum_k c_k u^k`` with coefficients in ascending order."""

    def __init__(self, coeffs: Sequence[float]):
        self.poly = Polynomial(np.asarray(coeffs, dtype=float))
        self._derivs = [self.poly.deriv(k) for k in range(MAX_DERIVATIVE + 1)]
        self._anti = 2.0 * self.poly.integ(lbnd=0.0)

    def derivative(self, u, k):
        if not 0 <= k <= MAX_DERIVATIVE:
            raise ValueError(f"derivative order {k} outside 0..{MAX_DERIVATIVE}")
        u = np.asarray(u, dtype=float)
        # Polynomial of degree 0 returns a scalar-shaped broadcast; force a full array.
        return np.broadcast_to(self._derivs[k](u), u.shape).astype(float, copy=True)

    def antiderivative(self, u):
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(self._anti(u), u.shape).astype(float, copy=True)

    @property
    def key(self):
        return "poly:" + ",".join(repr(float(c)) for c in self.poly.coef)

    def __repr__(self):
        return f"{type(self).__name__}({list(self.poly.coef)})"


class CubicNonlinearity(PolynomialNonlinearity):
    """``f(u) = lam * u^3``."""

    def __init__(self, lam: float = 1.0):
        self.lam = float(lam)
        super().__init__([0.0, 0.0, 0.0, self.lam])

    def derivatives(self, u, k_max):
        if not 0 <= k_max <= MAX_DERIVATIVE:
            raise ValueError(f"derivative order {k_max} outside 0..{MAX_DERIVATIVE}")
        lam = self.lam
        u = np.asarray(u, dtype=float)
        u2 = u * u
        out = [lam * u2 * u, (3.0 * lam) * u2, (6.0 * lam) * u,
               np.full_like(u, 6.0 * lam), np.zeros_like(u)]
        return out[: k_max + 1]

    def __repr__(self):
        return f"CubicNonlinearity(lam={self.lam})"


class ConstantNonlinearity(PolynomialNonlinearity):
    """``f(u) = K``; the EWI family is exact for this case."""

    def __init__(self, K: float = 0.0):
        self.K = float(K)
        super().__init__([self.K])

    def __repr__(self):
        return f"ConstantNonlinearity(K={self.K})"


class FunctionNonlinearity(Nonlinearity):
    """User-supplied ``f`` from explicit derivative callables.

    ``derivatives`` lists ``f, f', f'', ...``; orders that are not supplied
    raise when requested.
    """

    def __init__(self, derivatives: Sequence[Callable], antiderivative: Callable, name: str):
        self._derivs = list(derivatives)
        self._anti = antiderivative
        self.name = name

    def derivative(self, u, k):
        if not 0 <= k < len(self._derivs):
            raise ValueError(f"derivative order {k} not supplied for {self.name}")
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(self._derivs[k](u), u.shape).astype(float, copy=True)

    def antiderivative(self, u):
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(self._anti(u), u.shape).astype(float, copy=True)

    @property
    def key(self):
        return f"func:{self.name}"


@dataclass(frozen=True)
class InitialData:
    """A named, parametrised function of ``x``."""

    name: str
    params: tuple = ()
    func: Callable = field(default=None, compare=False, repr=False)

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    @property
    def key(self) -> str:
        return self.name + "(" + ",".join(f"{k}={v!r}" for k, v in self.params) + ")"


def gaussian(amplitude: float = 1.0, width: float = 1.0, center: float = 0.0) -> InitialData:
    """``amplitude * exp(-((x - center) / width)^2)``."""
    A, w, c = float(amplitude), float(width), float(center)
    return InitialData(
        "gaussian",
        (("amplitude", A), ("width", w), ("center", c)),
        lambda x: A * np.exp(-(((x - c) / w) ** 2)),
    )


def cosine(amplitude: float = 1.0, wavenumber: float = 1.0, shift: float = 0.0) -> InitialData:
    """``amplitude * cos(wavenumber * (x - shift))``."""
    A, k, s = float(amplitude), float(wavenumber), float(shift)
    return InitialData(
        "cosine",
        (("amplitude", A), ("wavenumber", k), ("shift", s)),
        lambda x: A * np.cos(k * (x - s)),
    )


def zero() -> InitialData:
    return InitialData("zero", (), lambda x: np.zeros_like(x))


_PRESETS = {"gaussian": gaussian, "cosine": cosine, "zero": zero}


def preset(name: str, **params) -> InitialData:
    try:
        return _PRESETS[name](**params)
    except KeyError:
        raise ValueError(f"unknown initial-data preset {name!r}; known: {sorted(_PRESETS)}") from None


def _as_initial(data) -> InitialData:
    if isinstance(data, InitialData):
        return data
    if callable(data):
        return InitialData(getattr(data, "__name__", "custom"), (), data)
    raise TypeError(f"initial data must be callable, got {type(data).__name__}")


@dataclass(frozen=True)
class KGEProblem:
    """Problem parameters.

    ``phi2`` is the unscaled velocity datum; the initial time derivative is
    ``phi2 / epsilon**2``.
    """

    epsilon: float
    nonlinearity: Nonlinearity
    phi1: InitialData
    phi2: InitialData

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        object.__setattr__(self, "phi1", _as_initial(self.phi1))
        object.__setattr__(self, "phi2", _as_initial(self.phi2))

    @classmethod
    def gaussian_benchmark(cls, epsilon: float, lam: float = 1.0) -> "KGEProblem":
        """Cubic ``f`` with ``phi1 = 2 exp(-x^2)``, ``phi2 = 3 exp(-x^2)``."""
        return cls(epsilon, CubicNonlinearity(lam), gaussian(2.0), gaussian(3.0))


@dataclass
class SolverState:
    """Spectral coefficients of ``u`` and ``u_t`` at time ``t``."""

    u: np.ndarray
    udot: np.ndarray
    t: float = 0.0

    def copy(self) -> "SolverState":
        return SolverState(self.u.copy(), self.udot.copy(), self.t)


def initial_state(problem: KGEProblem, grid: GridSpec) -> SolverState:
    u = forward_dft(grid, problem.phi1(grid.x))
    udot = forward_dft(grid, problem.phi2(grid.x)) / problem.epsilon**2
    return SolverState(u, udot, 0.0)


def energy(problem: KGEProblem, grid: GridSpec, state: SolverState) -> float:
    """Rectangle-rule energy of the interpolated state."""
    eps2 = problem.epsilon**2
    u = inverse_dft(grid, state.u)
    ud = inverse_dft(grid, state.udot)
    ux = inverse_dft(grid, spectral_derivative(grid, state.u, 1))
    density = eps2 * ud**2 + ux**2 + u**2 / eps2 + problem.nonlinearity.antiderivative(u)
    return float(grid.h * np.sum(density))


def nonlinearity_field(problem: KGEProblem, grid: GridSpec, u_values, k: int) -> np.ndarray:
    u_values = np.asarray(u_values, dtype=float)
    if u_values.shape != (grid.M,):
        raise ValueError(f"field has shape {u_values.shape}, grid expects ({grid.M},)")
    return problem.nonlinearity.derivative(u_values, k)
