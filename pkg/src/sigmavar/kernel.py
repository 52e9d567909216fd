"""Hermitian kernel algebra over grid modes.

Kernels are complex hermitian matrices indexed by the modes of one
:class:`~sigmavar.lattice.MomentumGrid`.  They represent expectation values
such as ``A(k,k') = <a_k^+ a_k' + b_{-k'}^+ b_{-k}>`` and the pair kernel
``B(k,k')``.  The central admissibility condition for a kernel pair coming
from an actual quantum state is that ``(1 + A) - sqrt(1 + B @ B)`` is
positive semidefinite, where ``B @ B`` is the matrix square of the
expectation kernel itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConstraintViolationError
from .lattice import MomentumGrid

__all__ = [
    "HermitianKernel",
    "PsdCheck",
    "is_psd",
    "sqrt_psd",
    "check_quantum_constraint",
    "trace_weighted",
]

#: negative eigenvalues above this (relative) size fail PSD preconditions
_CLIP_TOL = 1e-10


@dataclass(frozen=True)
class HermitianKernel:
    """Hermitian matrix over the modes of a grid.

    Construction symmetrizes the input, ``(M + M^H)/2``, and records how far
    the raw matrix was from hermitian in ``hermiticity_defect``.  The grid is
    carried along so trace operations can never mix discretizations.
    """

    grid: MomentumGrid
    entries: np.ndarray
    hermiticity_defect: float

    @classmethod
    def from_matrix(cls, grid: MomentumGrid, matrix: np.ndarray,
                    max_defect: float | None = None) -> "HermitianKernel":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"kernel must be a square matrix, got shape {m.shape}")
        if m.shape[0] != grid.n_modes:
            raise ValueError(
                f"kernel size {m.shape[0]} does not match grid with "
                f"{grid.n_modes} modes")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("kernel entries must be finite")
        defect = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if max_defect is not None and defect > max_defect:
            raise ValueError(
                f"matrix is not hermitian: max |M - M^H| = {defect:.3e} "
                f"exceeds {max_defect:.3e}")
        sym = 0.5 * (m + m.conj().T)
        sym.setflags(write=False)
        return cls(grid=grid, entries=sym, hermiticity_defect=defect)

    @property
    def n_modes(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


class PsdCheck(NamedTuple):
    is_psd: bool
    min_eigenvalue: float


def _same_grid(a: HermitianKernel, b: HermitianKernel) -> bool:
    if a.grid is b.grid:
        return True
    return (a.grid.dim_spatial == b.grid.dim_spatial
            and a.grid.n_modes == b.grid.n_modes
            and np.array_equal(a.grid.modes, b.grid.modes))


def is_psd(kernel: HermitianKernel, tol: float) -> PsdCheck:
    """Whether the minimum eigenvalue is >= -tol; always reports that eigenvalue."""
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    if not np.all(np.isfinite(kernel.entries.view(float))):
        raise ValueError("kernel entries must be finite")
    lam_min = float(np.linalg.eigvalsh(kernel.entries)[0])
    return PsdCheck(lam_min >= -tol, lam_min)


def sqrt_psd(kernel: HermitianKernel) -> HermitianKernel:
    """Principal square root of a PSD kernel.

    Eigenvalues below ``-1e-10 * max(1, lam_max)`` are rejected with a
    :class:`ConstraintViolationError`; tiny negatives inside that band are
    clipped to zero (optimizers walk along the PSD boundary, where roundoff
    produces them).
    """
    evals, evecs = np.linalg.eigh(kernel.entries)
    lam_max = float(evals[-1]) if evals.size else 0.0
    floor = -_CLIP_TOL * max(1.0, lam_max)
    lam_min = float(evals[0]) if evals.size else 0.0
    if lam_min < floor:
        raise ConstraintViolationError(
            f"kernel is not PSD: min eigenvalue {lam_min:.6e} below "
            f"tolerance {floor:.1e}", min_eigenvalue=lam_min)
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    return HermitianKernel.from_matrix(kernel.grid, root)


def check_quantum_constraint(a: HermitianKernel, b: HermitianKernel,
                             tol: float) -> PsdCheck:
    """PSD check of ``(1 + A) - sqrt(1 + B @ B)`` for a kernel pair.

    ``B @ B`` is the matrix square of the expectation kernel, so the result
    depends on B only through its square and is even under ``B -> -B``.
    """
    if not _same_grid(a, b):
        raise ValueError("A and B kernels live on different grids")
    eye = np.eye(a.n_modes)
    b_sq = HermitianKernel.from_matrix(a.grid, eye + b.entries @ b.entries)
    root = sqrt_psd(b_sq)  # cannot fail: 1 + B^2 >= 1
    excess = HermitianKernel.from_matrix(a.grid, eye + a.entries - root.entries)
    return is_psd(excess, tol)


def trace_weighted(kernel: HermitianKernel, w) -> float:
    """sum_k  grid_weight_k * w_k * K(k,k), asserted real.

    Implements grid traces such as Tr[eps . K] and Tr[eps^{-1} . K]; ``w``
    holds the per-mode factor (eps, 1/eps, ones, ...).
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (kernel.n_modes,):
        raise ValueError(
            f"weight vector has shape {w.shape}, expected ({kernel.n_modes},)")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    total = complex(np.sum(kernel.grid.weights * w * np.diag(kernel.entries)))
    if abs(total.imag) > 1e-12 * abs(total.real) + 1e-12:
        raise ValueError(
            f"trace has non-negligible imaginary part {total.imag:.3e}")
    return float(total.real)
