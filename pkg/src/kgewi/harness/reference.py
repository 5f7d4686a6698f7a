"""Cached high-accuracy reference solutions and H^1 errors against them.

Cache file layout (plain text)::

    # kgewi reference solution
    problem_hash: <sha256>
    epsilon: 0.5
    ...
    content_hash: <sha256 of the data lines>
    # index u udot
    0 1.2345678901234567e-07 -3.4567890123456789e-05
    ...

Values carry 17 significant digits, which round-trips IEEE doubles exactly.
Files are written to a temporary name and moved into place with
:func:`os.replace`, so concurrent writers of the same key cannot leave a
torn file behind.
"""
from __future__ import annotations

import hashlib
import os
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..ewi import integrate
from ..grid import GridSpec, embed, forward_dft, h1_norm, inverse_dft
from ..problem import SolverState
from .config import RunConfig

__all__ = [
    "CacheWarning",
    "ReferenceSolution",
    "problem_hash",
    "reference_path",
    "compute_reference",
    "load_reference",
    "save_reference",
    "h1_error_vs_reference",
]

_MAGIC = "# kgewi reference solution"
_DATA_MARK = "# index u udot"


class CacheWarning(UserWarning):
    """A cached reference was unusable and has been regenerated."""


@dataclass
class ReferenceSolution:
    """Grid values of ``u(., T)`` and ``u_t(., T)`` plus identifying metadata."""

    metadata: dict
    grid: GridSpec
    u: np.ndarray
    udot: np.ndarray
    path: Path | None = None
    cache_hit: bool = False
    _state: SolverState | None = field(default=None, repr=False)

    @property
    def state(self) -> SolverState:
        if self._state is None:
            T = float(self.metadata.get("T", 0.0))
            self._state = SolverState(forward_dft(self.grid, self.u), forward_dft(self.grid, self.udot), T)
        return self._state


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _identity(config: RunConfig, epsilon: float) -> dict:
    """Ordered metadata that determines the reference field."""
    grid = config.grid_for(config.ref_h)
    problem = config.problem(epsilon)
    # Sampled data guards against presets whose name alone is ambiguous.
    samples = np.concatenate([problem.phi1(grid.x), problem.phi2(grid.x)])
    return {
        "epsilon": _fmt(epsilon),
        "T": _fmt(config.T),
        "a": _fmt(grid.a),
        "b": _fmt(grid.b),
        "M": str(grid.M),
        "tau_ref": _fmt(config.ref_tau),
        "generator": f"ewi{config.ref_order}",
        "dealias": str(bool(config.dealias)).lower(),
        "nonlinearity": problem.nonlinearity.key,
        "phi1": problem.phi1.key,
        "phi2": problem.phi2.key,
        "data_sha256": hashlib.sha256(np.ascontiguousarray(samples, dtype="<f8").tobytes()).hexdigest(),
    }


def problem_hash(config: RunConfig, epsilon: float | None = None) -> str:
    eps = config.epsilon if epsilon is None else epsilon
    ident = _identity(config, eps)
    text = "\n".join(f"{k}={v}" for k, v in ident.items())
    return hashlib.sha256(text.encode()).hexdigest()


def reference_path(config: RunConfig, epsilon: float | None = None) -> Path:
    return Path(config.cache_dir) / f"ref-{problem_hash(config, epsilon)[:24]}.txt"


def _data_text(u, udot) -> str:
    return "".join(f"{i} {_fmt(a)} {_fmt(b)}\n" for i, (a, b) in enumerate(zip(u, udot)))


def save_reference(ref: ReferenceSolution, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = _data_text(ref.u, ref.udot)
    meta = dict(ref.metadata)
    meta["content_hash"] = hashlib.sha256(data.encode()).hexdigest()
    header = _MAGIC + "\n" + "".join(f"{k}: {v}\n" for k, v in meta.items()) + _DATA_MARK + "\n"
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(header + data)
        # mkstemp creates 0600; use the usual umask-derived mode instead
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    ref.metadata = meta
    ref.path = path
    return path


def load_reference(path: str | Path) -> ReferenceSolution:
    """Read and verify a cache file; raises ``ValueError`` when it is corrupt."""
    path = Path(path)
    text = path.read_text()
    head, sep, data = text.partition(_DATA_MARK + "\n")
    if not sep or not head.startswith(_MAGIC + "\n"):
        raise ValueError(f"{path}: not a reference cache file")
    meta = {}
    for line in head.splitlines()[1:]:
        key, colon, value = line.partition(": ")
        if not colon:
            raise ValueError(f"{path}: malformed header line {line!r}")
        meta[key] = value
    if hashlib.sha256(data.encode()).hexdigest() != meta.get("content_hash"):
        raise ValueError(f"{path}: content hash mismatch")
    M = int(meta["M"])
    table = np.loadtxt(data.splitlines(), ndmin=2) if data else np.empty((0, 3))
    if table.shape != (M, 3) or not np.array_equal(table[:, 0], np.arange(M)):
        raise ValueError(f"{path}: expected {M} data lines")
    grid = GridSpec(float(meta["a"]), float(meta["b"]), M)
    return ReferenceSolution(meta, grid, table[:, 1].copy(), table[:, 2].copy(), path=path)


def compute_reference(config: RunConfig, epsilon: float | None = None,
                      regenerate: bool = False) -> ReferenceSolution:
    """Load the cached reference for ``config`` or integrate and cache it.

    The reference uses the order-``config.ref_order`` EWI with step
    ``config.ref_tau`` on the ``config.ref_h`` grid.
    """
    eps = config.epsilon if epsilon is None else epsilon
    ident = _identity(config, eps)
    phash = problem_hash(config, eps)
    path = reference_path(config, eps)
    if path.exists() and not regenerate:
        try:
            ref = load_reference(path)
            if ref.metadata.get("problem_hash") != phash:
                raise ValueError(f"{path}: problem hash mismatch")
            ref.cache_hit = True
            return ref
        except (ValueError, KeyError, OSError) as exc:
            warnings.warn(f"regenerating reference: {exc}", CacheWarning, stacklevel=2)
    grid = config.grid_for(config.ref_h)
    problem = config.problem(eps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        state = integrate(problem, grid, config.ref_tau, config.T, config.ref_order, dealias=config.dealias)
    meta = {"problem_hash": phash, **ident, "kgewi_version": __version__}
    ref = ReferenceSolution(meta, grid, inverse_dft(grid, state.u), inverse_dft(grid, state.udot))
    save_reference(ref, path)
    return ref


def h1_error_vs_reference(state: SolverState, grid: GridSpec, ref: ReferenceSolution) -> float:
    """H^1 norm of ``I_M u - u_ref``.

    When the grids differ the coarser spectrum is zero-padded onto the finer
    grid before subtracting.
    """
    rg = ref.grid
    if (grid.a, grid.b) != (rg.a, rg.b):
        raise ValueError("state and reference live on different intervals")
    rc = ref.state.u
    sc = np.asarray(state.u)
    if grid.M == rg.M:
        return h1_norm(grid, sc - rc)
    if grid.M < rg.M:
        return h1_norm(rg, embed(sc, grid, rg) - rc)
    return h1_norm(grid, sc - embed(rc, rg, grid))
