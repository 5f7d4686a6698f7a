"""Periodic Fourier grid, discrete transforms and Sobolev norms.

Spectral fields are stored as length-``M`` complex arrays in FFT order
(``l = 0, 1, ..., M/2-1, -M/2, ..., -1``) and normalised so that

    c_l = (1/M) * sum_j v_j exp(-i mu_l (x_j - a)),

i.e. ``forward_dft`` is ``numpy.fft.fft(v) / M``.  Use :func:`centered` to
reorder into ``l = -M/2, ..., M/2-1``.

The time steppers work on the real-FFT half spectrum (first ``M/2 + 1``
entries of the FFT-ordered array, the last one being the Nyquist mode
``l = -M/2``); :func:`to_half` and :func:`from_half` convert between the two.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "GridSpec",
    "build_grid",
    "forward_dft",
    "inverse_dft",
    "spectral_derivative",
    "h1_norm",
    "centered",
    "to_half",
    "from_half",
    "embed",
    "dealias_mask",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[a, b)`` with ``M`` intervals."""

    a: float
    b: float
    M: int

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need b > a, got a={self.a}, b={self.b}")
        if int(self.M) != self.M or self.M % 2 or self.M < 4:
            raise ValueError(f"M must be an even integer >= 4, got {self.M}")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.M

    @cached_property
    def nodes(self) -> np.ndarray:
        """All ``M + 1`` nodes ``x_0 .. x_M`` (``x_M`` duplicates ``x_0``)."""
        return self.a + self.h * np.arange(self.M + 1)

    @cached_property
    def x(self) -> np.ndarray:
        """The ``M`` distinct nodes carrying field values."""
        return self.nodes[:-1].copy()

    @cached_property
    def l(self) -> np.ndarray:
        """Mode indices in FFT order."""
        return np.fft.fftfreq(self.M, d=1.0 / self.M).astype(np.int64)

    @cached_property
    def mu(self) -> np.ndarray:
        """Wavenumbers ``2 pi l / (b - a)`` in FFT order."""
        return 2.0 * np.pi * self.l / self.length

    @cached_property
    def mu_half(self) -> np.ndarray:
        # Nyquist entry carries mu_{-M/2}; only its square is ever used.
        return self.mu[: self.M // 2 + 1].copy()

    def mode(self, l: int) -> int:
        """FFT-order position of mode ``l`` (``-M/2 <= l < M/2``)."""
        if not -self.M // 2 <= l < self.M // 2:
            raise IndexError(f"mode {l} outside [-{self.M // 2}, {self.M // 2})")
        return l % self.M


def build_grid(a: float, b: float, M: int) -> GridSpec:
    return GridSpec(float(a), float(b), int(M))


def _check_length(grid: GridSpec, v: np.ndarray, what: str):
    if v.ndim != 1 or v.shape[0] != grid.M:
        raise ValueError(f"{what} has shape {v.shape}, grid expects ({grid.M},)")


def forward_dft(grid: GridSpec, v) -> np.ndarray:
    """Discrete Fourier coefficients of grid values ``v_0 .. v_{M-1}``."""
    v = np.asarray(v)
    _check_length(grid, v, "field")
    return np.fft.fft(v, norm="forward")


def inverse_dft(grid: GridSpec, c, real: bool = True) -> np.ndarray:
    """Evaluate the trigonometric interpolant at the grid nodes.

    With ``real=True`` (default) the imaginary residue is discarded, which is
    exact for conjugate-symmetric input.
    """
    c = np.asarray(c)
    _check_length(grid, c, "coefficients")
    v = np.fft.ifft(c, norm="forward")
    return v.real.copy() if real else v


def spectral_derivative(grid: GridSpec, c, order: int = 1) -> np.ndarray:
    """Multiply coefficients by ``(i mu_l) ** order``.

    For odd order the Nyquist coefficient is zeroed so derivatives of real
    fields stay real; second derivatives keep it with factor ``-mu^2``.
    """
    c = np.asarray(c)
    _check_length(grid, c, "coefficients")
    if order == 1:
        factor = 1j * grid.mu
        factor[grid.M // 2] = 0.0
    elif order == 2:
        factor = -grid.mu**2
    else:
        raise ValueError(f"unsupported derivative order {order}; use 1 or 2")
    return c * factor


def h1_norm(grid: GridSpec, c) -> float:
    """Discrete H^1 norm ``sqrt((b-a) sum_l (1 + mu_l^2) |c_l|^2)``."""
    c = np.asarray(c)
    _check_length(grid, c, "coefficients")
    return float(np.sqrt(grid.length * np.sum((1.0 + grid.mu**2) * np.abs(c) ** 2)))


def centered(c) -> np.ndarray:
    """Reorder FFT-ordered coefficients to ``l = -M/2 .. M/2-1``."""
    return np.fft.fftshift(c)


def to_half(c) -> np.ndarray:
    """Half spectrum ``l = 0 .. M/2-1`` plus the Nyquist mode."""
    c = np.asarray(c)
    return c[: c.shape[0] // 2 + 1].copy()


def from_half(half, M: int) -> np.ndarray:
    """Rebuild the full conjugate-symmetric spectrum from a half spectrum."""
    half = np.asarray(half)
    if half.shape[0] != M // 2 + 1:
        raise ValueError(f"half spectrum of length {half.shape[0]} does not match M={M}")
    full = np.empty(M, dtype=np.complex128)
    full[: M // 2 + 1] = half
    full[M // 2 + 1 :] = np.conj(half[1 : M // 2][::-1])
    return full


def embed(c, coarse: GridSpec, fine: GridSpec) -> np.ndarray:
    """Zero-pad coefficients of ``coarse`` onto the finer grid ``fine``.

    The coarse interpolant is taken literally over ``l = -M/2 .. M/2-1``, so
    the Nyquist coefficient stays at ``l = -M_coarse/2``.
    """
    if (coarse.a, coarse.b) != (fine.a, fine.b):
        raise ValueError("grids cover different intervals; no embedding exists")
    if fine.M < coarse.M:
        raise ValueError(f"cannot embed M={coarse.M} into coarser M={fine.M}")
    c = np.asarray(c)
    _check_length(coarse, c, "coefficients")
    out = np.zeros(fine.M, dtype=np.complex128)
    out[coarse.l % fine.M] = c
    return out


def dealias_mask(grid: GridSpec, half: bool = False) -> np.ndarray:
    """Two-thirds rule: keep modes with ``|l| <= M/3``."""
    keep = np.abs(grid.l) <= grid.M // 3
    return keep[: grid.M // 2 + 1].copy() if half else keep
